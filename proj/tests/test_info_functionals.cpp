#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "intrinsic/info_functionals.hpp"

using namespace intrinsic;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("Gaussian differential entropy") {
    CHECK(gaussian_entropy_lebesgue(2) == doctest::Approx(-std::log(2.0 * std::numbers::pi * std::numbers::e)));
    DensityModel g = make_standard_gaussian(3);
    CHECK(relative_entropy(g, Reference::lebesgue_measure()).value ==
          doctest::Approx(gaussian_entropy_lebesgue(3)));
    CHECK(relative_entropy(g, Reference::of(g)).value == doctest::Approx(0.0));
}

TEST_CASE("anisotropic Gaussian entropy: closed form and quadrature") {
    DensityModel mu = make_gaussian({Vector::Zero(2), diag2(4, 1)});
    const double frozen = -3.5310242469692907;  // −½ log 4 − log(2πe)
    CHECK(relative_entropy(mu, Reference::lebesgue_measure()).value == doctest::Approx(frozen).epsilon(1e-13));
    DensityModel wrapped = make_mixture({1.0}, {mu});
    EntropyValue q = relative_entropy(wrapped, Reference::lebesgue_measure(), mu.default_grid(30));
    CHECK(q.estimator == "quadrature");
    CHECK(std::abs(q.value - frozen) <= 1e-6);
}

TEST_CASE("Fisher matrix of a Gaussian is the precision") {
    Matrix S(2, 2);
    S << 1.0, 0.4, 0.4, 0.8;
    DensityModel mu = make_gaussian({Vector::Zero(2), S});
    FisherMatrix F = fisher_matrix(mu, Reference::lebesgue_measure());
    CHECK((F.matrix - S.inverse()).norm() <= 1e-10);
    DensityModel wrapped = make_mixture({1.0}, {mu});
    FisherMatrix Fq = fisher_matrix(wrapped, Reference::lebesgue_measure(), mu.default_grid(30));
    CHECK((Fq.matrix - S.inverse()).norm() <= 1e-6);
    CHECK(Fq.trace == doctest::Approx(Fq.matrix.trace()));
    Estimate scalar = scalar_fisher(wrapped, Reference::lebesgue_measure(), mu.default_grid(30));
    CHECK(scalar.value == doctest::Approx(Fq.trace).epsilon(1e-6));
}

TEST_CASE("Fisher matrix against the reference itself vanishes") {
    DensityModel g = make_standard_gaussian(2);
    FisherMatrix F = fisher_matrix(g, Reference::of(g));
    CHECK(F.matrix.norm() <= 1e-12);
}

TEST_CASE("product with a Gaussian factor has an identity block") {
    Matrix s1(1, 1);
    s1 << 0.25;
    DensityModel mu = make_product({make_gaussian({Vector::Zero(1), s1}), make_standard_gaussian(1)});
    FisherMatrix F = fisher_matrix(mu, Reference::lebesgue_measure(), mu.default_grid(20));
    CHECK(F.matrix(0, 0) == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(F.matrix(1, 1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(F.matrix(0, 1)) <= 1e-10);
}

TEST_CASE("discrete entropy") {
    CHECK(entropy_functional(std::vector<double>{2.0, 0.0}, {0.5, 0.5}).value ==
          doctest::Approx(std::log(2.0)));
    CHECK(entropy_functional(std::vector<double>{3.0, 3.0, 3.0}, {0.2, 0.3, 0.5}).value ==
          doctest::Approx(0.0));
    CHECK_THROWS(entropy_functional(std::vector<double>{0.0, 0.0}, {0.5, 0.5}));
}

TEST_CASE("Gaussian entropy of u² = 1 vanishes") {
    QuadratureGrid g = QuadratureGrid::standard_hermite(2, 10);
    CHECK(entropy_functional([](const Vector&) { return 1.0; }, g).value == doctest::Approx(0.0));
}

TEST_CASE("Lp norms") {
    QuadratureGrid g1 = QuadratureGrid::standard_hermite(1, 40);
    CHECK(lp_norm([](const Vector&) { return 1.0; }, 3.0, Weight::gaussian, g1).value == doctest::Approx(1.0));
    CHECK(lp_norm([](const Vector& x) { return x(0); }, 2.0, Weight::gaussian, g1).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    // (∫ e^{x²/4} dγ₁)^{1/2} = 2^{1/4}
    Estimate e = lp_norm([](const Vector& x) { return std::exp(x(0) * x(0) / 8.0); }, 2.0, Weight::gaussian, g1);
    CHECK(e.value == doctest::Approx(1.1892071150027210).epsilon(1e-8));
}

TEST_CASE("log-det chain ordering on random PSD matrices") {
    std::mt19937_64 g(11);
    std::normal_distribution<double> N;
    for (int k = 0; k < 200; ++k) {
        int n = 1 + k % 5;
        Matrix B(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) B(i, j) = N(g);
        LogDetChain c = log_det_chain(B * B.transpose() + 1e-3 * Matrix::Identity(n, n));
        CHECK(c.log_det <= c.log_diag + 1e-10);
        CHECK(c.log_diag <= c.log_trace + 1e-10);
    }
    LogDetChain id = log_det_chain(Matrix::Identity(3, 3) * 2.0);
    CHECK(id.log_det == doctest::Approx(id.log_trace));
}

TEST_CASE("Dirichlet form on one coordinate") {
    DiscreteProductSpace s = DiscreteProductSpace::hamming_cube(1);
    std::vector<double> f = {1.0, std::numbers::e};
    std::vector<double> lf = {0.0, 1.0};
    // c²·𝔼[(f(x) − f(x⊕1))(log f(x) − log f(x⊕1))] = ¼(e − 1)
    CHECK(dirichlet_form_coordinate(f, lf, 0, s) == doctest::Approx(0.25 * (std::numbers::e - 1.0)));
}
