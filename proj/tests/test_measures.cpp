#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "intrinsic/measures.hpp"

using namespace intrinsic;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

DensityModel sample_mixture() {
    return make_mixture({0.3, 0.7}, {make_gaussian({vec2(-0.5, 0.2), mat2(0.6, 0.1, 0.1, 0.4)}),
                                     make_gaussian({vec2(0.7, -0.4), mat2(0.3, -0.05, -0.05, 0.8)})});
}

}  // namespace

TEST_CASE("standard normal peak") {
    DensityModel g = make_gaussian({Vector::Zero(2), Matrix::Identity(2, 2)});
    CHECK(g.value(Vector::Zero(2)) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK(g.grad(Vector::Zero(2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("anisotropic Gaussian value matches frozen oracle") {
    DensityModel g = make_gaussian({Vector::Zero(2), mat2(2, 0, 0, 1)});
    // (2π√2)⁻¹ exp(−¾)
    CHECK(g.value(vec2(1, 1)) == doctest::Approx(0.053159914329952714).epsilon(1e-13));
}

TEST_CASE("non-PD covariance is rejected") {
    CHECK_THROWS(make_gaussian({Vector::Zero(2), mat2(1, 2, 2, 1)}));
}

TEST_CASE("mixture derivatives agree with finite differences") {
    DensityModel mu = sample_mixture();
    std::mt19937_64 g(7);
    std::normal_distribution<double> N;
    for (int k = 0; k < 10; ++k) {
        Vector x = vec2(N(g), N(g));
        Vector fd_g = fd_gradient([&](const Vector& y) { return mu.value(y); }, x);
        Matrix fd_h = fd_hessian([&](const Vector& y) { return mu.value(y); }, x);
        CHECK((mu.grad(x) - fd_g).norm() <= 1e-7 * (1.0 + mu.grad(x).norm()));
        CHECK((mu.hess(x) - fd_h).norm() <= 1e-5 * (1.0 + mu.hess(x).norm()));
    }
}

TEST_CASE("pushforward of a Gaussian is the transformed Gaussian") {
    Matrix S = mat2(1.0, 0.3, 0.3, 0.5);
    Matrix A = mat2(1.2, -0.4, 0.3, 0.9);
    DensityModel mu = make_gaussian({Vector::Zero(2), S});
    DensityModel pushed = pushforward_linear(mu, A);
    Matrix Ai = A.inverse();
    DensityModel direct = make_gaussian({Vector::Zero(2), Matrix(Ai * S * Ai.transpose())});
    std::mt19937_64 g(3);
    std::normal_distribution<double> N;
    for (int k = 0; k < 20; ++k) {
        Vector x = vec2(N(g), N(g));
        CHECK(pushed.value(x) == doctest::Approx(direct.value(x)).epsilon(1e-10));
        CHECK((pushed.grad_log(x) - direct.grad_log(x)).norm() <= 1e-10);
    }
}

TEST_CASE("identity pushforward and singular map") {
    DensityModel mu = sample_mixture();
    DensityModel same = pushforward_linear(mu, Matrix::Identity(2, 2));
    CHECK(same.value(vec2(0.1, 0.2)) == doctest::Approx(mu.value(vec2(0.1, 0.2))).epsilon(1e-14));
    CHECK_THROWS(pushforward_linear(mu, mat2(1, 2, 2, 4)));
}

TEST_CASE("quadrature normalization") {
    DensityModel mu = sample_mixture();
    Estimate one = integrate([](const Vector&) { return 1.0; }, mu, mu.default_grid(40));
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-8));
    QuadratureGrid std_grid = QuadratureGrid::standard_hermite(3, 10);
    CHECK(std_grid.reference_weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std_grid.reference_weights().minCoeff() > 0.0);
    // Second moment of γ₁.
    QuadratureGrid g1 = QuadratureGrid::standard_hermite(1, 20);
    Estimate m2 = integrate_gaussian([](const Vector& x) { return x(0) * x(0); }, g1);
    CHECK(m2.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mixture mean under quadrature") {
    DensityModel mu = sample_mixture();
    Estimate m = integrate([](const Vector& x) { return x(0); }, mu, mu.default_grid(30));
    // A single Gaussian grid over a two-bump mixture converges slowly; 30 nodes give ~1e-7.
    CHECK(std::abs(m.value - (0.3 * -0.5 + 0.7 * 0.7)) <= 1e-6);
}

TEST_CASE("Hamming cube enumeration") {
    DiscreteProductSpace s = DiscreteProductSpace::hamming_cube(4);
    CHECK(s.states() == 16);
    double total = 0.0;
    for (std::size_t i = 0; i < s.states(); ++i) total += s.probability(i);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    std::size_t t = s.with_digit(5, 1, 1 - s.digit(5, 1));
    CHECK(s.digit(t, 1) != s.digit(5, 1));
    CHECK(s.digit(t, 0) == s.digit(5, 0));
}
