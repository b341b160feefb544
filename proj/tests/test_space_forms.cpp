#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "intrinsic/flat_local.hpp"
#include "intrinsic/space_forms.hpp"

using namespace intrinsic;

TEST_CASE("heat kernels against frozen oracles at t = 0.5, r = 0.7") {
    CHECK(heat_kernel(SpaceForm(2, 0.0), 0.5, 0.7) == doctest::Approx(0.19500503780602756).epsilon(1e-12));
    CHECK(heat_kernel(SpaceForm(3, -1.0), 0.5, 0.7) == doctest::Approx(0.07906637113947933).epsilon(1e-10));
    CHECK(heat_kernel(SpaceForm(2, -1.0), 0.5, 0.7) == doctest::Approx(0.17256187698143479).epsilon(1e-8));
    CHECK(heat_kernel(SpaceForm(2, 1.0), 0.5, 0.7) == doctest::Approx(0.22127763548943473).epsilon(1e-10));
}

TEST_CASE("semigroup preserves constants") {
    for (auto [n, k] : {std::pair{2, 0.0}, {2, -1.0}, {3, -1.0}, {2, 1.0}}) {
        SpaceForm sp(n, k);
        HeatSemigroup sg(sp, 0.5);
        CHECK(sg.mass() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(sg.apply_at_distance(RadialProfile::constant(3.0), 0.4) == doctest::Approx(3.0).epsilon(1e-9));
    }
}

TEST_CASE("exponential and logarithm maps are inverse") {
    std::mt19937_64 g(2);
    std::normal_distribution<double> N(0.0, 0.5);
    for (auto [n, k] : {std::pair{3, -1.0}, {2, 1.0}, {2, 0.0}}) {
        SpaceForm sp(n, k);
        Vector x = sp.point_at_distance(0.6);
        Matrix E = sp.frame_at(x);
        CHECK(sp.frame_defect(E) <= 1e-12);
        for (int i = 0; i < 10; ++i) {
            Vector c(n);
            for (int j = 0; j < n; ++j) c(j) = N(g);
            Vector v = E * c;
            Vector y = sp.exp_map(x, v);
            CHECK(sp.constraint_violation(y) <= 1e-12);
            CHECK((sp.log_map(x, y) - v).norm() <= 1e-10);
            CHECK(sp.distance(x, y) == doctest::Approx(c.norm()).epsilon(1e-10));
        }
    }
}

TEST_CASE("parallel transport is an isometry") {
    SpaceForm sp(3, -1.0);
    Vector x = sp.point_at_distance(0.3);
    Matrix E = sp.frame_at(x);
    Vector y = sp.exp_map(x, 0.8 * E.col(1) + 0.2 * E.col(2));
    Vector w = E.col(0) - 0.5 * E.col(2);
    Vector tw = sp.parallel_transport(x, y, w);
    CHECK(sp.tangency_violation(y, tw) <= 1e-12);
    CHECK(sp.norm(tw) == doctest::Approx(sp.norm(w)).epsilon(1e-12));
}

TEST_CASE("flat semigroup of a Gaussian profile") {
    // P_T e^{−a r²} on ℝ² at the center equals (1 + 2aT)⁻¹.
    SpaceForm sp(2, 0.0);
    HeatSemigroup sg(sp, 0.5);
    CHECK(sg.apply_at_distance(RadialProfile::gaussian(1.5), 0.0) == doctest::Approx(1.0 / 2.5).epsilon(1e-9));
}

TEST_CASE("Hessian commutation on flat space") {
    SpaceForm sp(2, 0.0);
    RadialFunction f{sp.origin(), RadialProfile::bump(2.0, 1.5)};
    CHECK(flat_commutation_residual(sp, f, 0.5, sp.point_at_distance(0.5)) <= 2e-4);
}

TEST_CASE("direct entropy vanishes for constants and is positive otherwise") {
    SpaceForm sp(3, -1.0);
    HeatSemigroup sg(sp, 0.5);
    RadialFunction one{sp.origin(), RadialProfile::constant(1.0)};
    CHECK(std::abs(direct_entropy(sg, one, sp.origin())) <= 1e-12);
    RadialFunction bump{sp.origin(), RadialProfile::bump(2.0, 1.5)};
    double H = direct_entropy(sg, bump, sp.origin());
    CHECK(H > 0.0);
    RadialFunction scaled{sp.origin(), RadialProfile::bump(2.0, 1.5).scaled(7.0)};
    CHECK(direct_entropy(sg, scaled, sp.origin()) == doctest::Approx(H).epsilon(1e-10));
}

TEST_CASE("flat local inequality is saturated by Gaussians") {
    Matrix S(2, 2);
    S << 0.4, 0.1, 0.1, 0.3;
    Vector m(2), x(2);
    m << 0.2, -0.1;
    x << 0.5, 0.4;
    FlatLocalResult r = flat_local_lsi(make_gaussian({m, S}), x, 0.5);
    CHECK(r.lower == doctest::Approx(r.entropy).epsilon(1e-10));
    CHECK(r.upper == doctest::Approx(r.entropy).epsilon(1e-10));
    CHECK(r.upper <= r.upper_dim + 1e-14);
    CHECK(r.lower_dim <= r.lower + 1e-14);
    FlatLocalResult one = flat_local_lsi(std::nullopt, x, 0.5);
    CHECK(std::abs(one.entropy) + std::abs(one.upper) + std::abs(one.lower) <= 1e-14);
}

TEST_CASE("flat Hamilton bound on a Gaussian") {
    Matrix S = Matrix::Identity(2, 2) * 0.2;
    FlatHamilton h = flat_hamilton(make_gaussian({Vector::Zero(2), S}), Vector::Ones(2), 0.5);
    // −∇²log P_Tf = (S + T·Id)⁻¹
    CHECK(h.max_eig == doctest::Approx(1.0 / 0.7).epsilon(1e-12));
    CHECK(h.fd_max_eig == doctest::Approx(1.0 / 0.7).epsilon(1e-5));
    CHECK(h.li_yau_lhs <= 2.0 / 0.5);
}
