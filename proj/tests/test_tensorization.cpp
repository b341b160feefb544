#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "intrinsic/tensorization.hpp"

using namespace intrinsic;

TEST_CASE("two-point energy and entropy ratios") {
    TwoPointSample s = two_point_sample(1.0, std::numbers::e, 1.0, {0.5, 0.5});
    CHECK(s.energy == doctest::Approx(0.23105857863000488).epsilon(1e-13));  // ½ tanh ½
    CHECK(s.entropy == doctest::Approx(0.11094407167172735).epsilon(1e-13));
    TwoPointSample flat = two_point_sample(2.0, 2.0, 1.5, {0.5, 0.5});
    CHECK(flat.energy == doctest::Approx(0.0).scale(1.0));
    CHECK(flat.entropy == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("calibrated profile is concave and dominates every two-point sample") {
    ConcavePhi phi = calibrate_phi(1.0, DiscreteProductSpace::hamming_cube(1));
    CHECK(phi.is_concave());
    CHECK(phi(0.0) == doctest::Approx(0.0).scale(1.0));
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (int k = 0; k < 200; ++k) {
        TwoPointSample s = two_point_sample(1.0, std::exp(U(g)), 1.0, {0.5, 0.5});
        if (!phi.extrapolates(s.energy)) CHECK(s.entropy <= phi(s.energy) + 1e-9);
    }
}

TEST_CASE("one-coordinate function: frozen entropy and a large gap to the sum bound") {
    const int n = 10;
    DiscreteProductSpace space = DiscreteProductSpace::hamming_cube(n);
    ConcavePhi phi = calibrate_phi(1.0, DiscreteProductSpace::hamming_cube(1));
    std::vector<double> f(space.states());
    for (std::size_t s = 0; s < f.size(); ++s) f[s] = space.digit(s, 0) ? std::exp(8.0) : 1.0;
    TensorizedBound b = tensorized_bound(f, phi, 1.0, space);
    CHECK(b.lhs == doctest::Approx(1028.9678017768113).epsilon(1e-12));
    CHECK(b.lhs <= b.rhs_intrinsic + 1e-9 * b.lhs);
    CHECK(b.rhs_ps / b.rhs_intrinsic >= 2.0);
}

TEST_CASE("subadditivity of entropy on the cube") {
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    DiscreteProductSpace space = DiscreteProductSpace::hamming_cube(5);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> f(space.states());
        for (double& v : f) v = std::exp(U(g));
        Subadditivity s = subadditivity_check(f, space);
        CHECK(s.entropy <= s.sum_conditional + 1e-12);
    }
}

TEST_CASE("product functions tensorize with equality in the Dirichlet sum") {
    DiscreteProductSpace space = DiscreteProductSpace::hamming_cube(3);
    std::vector<double> f(space.states(), 1.0);
    TensorizedBound b = tensorized_bound(f, calibrate_phi(2.0, DiscreteProductSpace::hamming_cube(1)), 2.0, space);
    CHECK(b.lhs == doctest::Approx(0.0).scale(1.0));
    CHECK(b.rhs_intrinsic == doctest::Approx(0.0).scale(1.0));
    CHECK(b.rhs_ps == doctest::Approx(0.0).scale(1.0));
}
