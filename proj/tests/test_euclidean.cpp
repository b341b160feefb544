#include <doctest.h>

#include <cmath>

#include "intrinsic/euclidean.hpp"

using namespace intrinsic;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("log-det bound saturates on Gaussians") {
    DensityModel mu = make_gaussian({vec2(0.3, -1.0), diag2(4, 1)});
    BoundResult b = dembo_bound(mu, mu.default_grid(10));
    CHECK(b.lhs == doctest::Approx(-0.6931471805599453).epsilon(1e-12));  // −½ log det Σ
    CHECK(b.margin == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    BoundResult g = dembo_bound(make_standard_gaussian(2), QuadratureGrid::standard_hermite(2, 10));
    CHECK(g.lhs == doctest::Approx(0.0).scale(1.0));
    CHECK(g.rhs == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("log-det bound is strict on a mixture") {
    DensityModel mu = make_mixture({0.5, 0.5}, {make_gaussian({vec2(-1, 0), diag2(0.5, 0.5)}),
                                                make_gaussian({vec2(1, 0.5), diag2(0.4, 0.7)})});
    BoundResult b = dembo_bound(mu, mu.default_grid(40));
    CHECK(b.margin > 1e-3);
}

TEST_CASE("dimensional bound is weaker than the log-det bound") {
    DensityModel mu = make_gaussian({Vector::Zero(2), diag2(4, 1)});
    DimensionalResult d = dimensional_bound(mu, mu.default_grid(10));
    CHECK(d.dembo_rhs < d.rhs - 1e-3);
    DensityModel iso = make_gaussian({Vector::Zero(2), diag2(2, 2)});
    DimensionalResult s = dimensional_bound(iso, iso.default_grid(10));
    CHECK(s.lhs == doctest::Approx(s.rhs));
}

TEST_CASE("GNS improvement: isotropy and strictness") {
    GNSParams prm;
    CHECK(prm.constraint_defect(2) == doctest::Approx(0.0).scale(1.0));
    TestFunction iso{[](const Vector& x) { return std::exp(-0.5 * x.squaredNorm()); },
                     [](const Vector& x) { return Vector(-std::exp(-0.5 * x.squaredNorm()) * x); }};
    QuadratureGrid g = QuadratureGrid::hermite(2, 40, Vector::Zero(2), Matrix::Identity(2, 2));
    GNSResult r = gns_improved(iso, prm, g);
    CHECK(r.rhs_improved == doctest::Approx(r.rhs_classical).epsilon(1e-6));
    CHECK(r.lhs <= r.rhs_improved);

    Matrix A = diag2(4.0, 0.25);
    TestFunction aniso{[A](const Vector& x) { return std::exp(-0.5 * x.dot(A * x)); },
                       [A](const Vector& x) { return Vector(-std::exp(-0.5 * x.dot(A * x)) * (A * x)); }};
    QuadratureGrid ga = QuadratureGrid::hermite(2, 40, Vector::Zero(2), diag2(0.5, 2.0));
    GNSResult s = gns_improved(aniso, prm, ga);
    CHECK(s.rhs_improved < s.rhs_classical - 1e-3);
    CHECK(s.lhs <= s.rhs_improved);
}

TEST_CASE("Beckner: constants vanish and small perturbations are strict") {
    QuadratureGrid g = QuadratureGrid::standard_hermite(2, 30);
    TestFunction one{[](const Vector&) { return 1.0; }, [](const Vector& x) { return Vector(Vector::Zero(x.size())); }};
    for (double p : {1.0, 1.5, 1.9}) {
        BecknerResult r = beckner_improved(one, p, g);
        CHECK(std::abs(r.lhs) <= 1e-14);
        CHECK(std::abs(r.rhs_matrix) <= 1e-14);
    }
    CHECK(beckner_phi(1.5, 2, 0.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("quadratic-entropy minimizer agrees with a golden-section search") {
    const double a = 0.7, b = 1.3, q = 1.5, ct = 1.0;
    double lo = -6.0, hi = 6.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    auto F = [&](double u) { return qlsi_objective(a, b, q, ct, std::exp(u)); };
    for (int i = 0; i < 200; ++i) {
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        (F(x1) < F(x2) ? hi : lo) = (F(x1) < F(x2) ? x2 : x1);
    }
    CHECK(std::log(qlsi_minimizer(a, b, q, ct)) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-8));
}

TEST_CASE("Gaussian channel mutual information") {
    const double tau = 1.5, sigma = 0.8;
    Matrix P = Matrix::Identity(2, 2) * tau * tau;
    DensityModel prior = make_gaussian({Vector::Zero(2), P});
    CramerRaoResult r = cramer_rao_gaussian(prior, ParametricFamily::gaussian_channel(2, sigma),
                                            prior.default_grid(20));
    CHECK(r.mutual_information == doctest::Approx(std::log(1.0 + tau * tau / (sigma * sigma))).epsilon(1e-8));
    CHECK(r.lhs <= r.rhs + 1e-10);
}

TEST_CASE("diagonal Gaussian transport is an equality") {
    DensityModel mu = make_gaussian({Vector::Zero(2), diag2(4.0, 0.3)});
    // τ carries γ to μ coordinatewise.
    DiffeoSpec T{{affine_component(2.0, 0.0), affine_component(std::sqrt(0.3), 0.0)}};
    TransportResult r = transport_deficit(mu, T, mu.default_grid(20));
    CHECK(r.psi == doctest::Approx(r.entropy_gap).epsilon(1e-8));
    DensityModel g = make_standard_gaussian(2);
    DiffeoSpec id{{affine_component(1.0, 0.0), affine_component(1.0, 0.0)}};
    TransportResult z = transport_deficit(g, id, g.default_grid(10));
    CHECK(std::abs(z.psi) <= 1e-12);
    CHECK(std::abs(z.entropy_gap) <= 1e-12);
}
