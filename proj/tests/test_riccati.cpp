#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "intrinsic/numerics.hpp"
#include "intrinsic/riccati.hpp"

using namespace intrinsic;

namespace {

ScalarRiccatiParams pure(double lambda, double y) { return {0.0, lambda, y}; }

}  // namespace

TEST_CASE("scalar comparison branches against frozen closed forms") {
    CHECK(scalar_xi(pure(1.0, 0.0), 0.5) == doctest::Approx(0.5463024898437905).epsilon(1e-13));
    CHECK(scalar_xi(pure(4.0, 1.0), 0.3) == doctest::Approx(3.5995742288357254).epsilon(1e-12));
    CHECK(scalar_xi(pure(0.0, 1.0), 0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(scalar_xi(pure(-1.0, 0.0), 0.5) == doctest::Approx(-0.46211715726000976).epsilon(1e-13));
    CHECK(xi_integral(1.0, 0.0, 0.5) == doctest::Approx(0.13058424044372272).epsilon(1e-12));
    CHECK(xi_integral(-1.0, 0.0, 0.5) == doctest::Approx(-0.12011450695827752).epsilon(1e-12));
    CHECK(pure(2.0, 0.0).branch() == XiBranch::tan);
    CHECK(pure(0.0, 0.0).branch() == XiBranch::linear);
    CHECK(pure(-2.0, 0.0).branch() == XiBranch::tanh);
}

TEST_CASE("blow-up times") {
    CHECK(xi_blowup_time(0.0, 2.0) == doctest::Approx(0.5));
    CHECK(xi_blowup_time(1.0, 0.0) == doctest::Approx(std::numbers::pi / 2));
    CHECK(std::isinf(xi_blowup_time(-1.0, 0.5)));
    CHECK_THROWS(scalar_xi(pure(0.0, 2.0), 0.6));
}

TEST_CASE("Hamilton bound regimes") {
    CHECK(hamilton_bound(0.0, 3, 0.5, 0.0).value == doctest::Approx(2.0));
    HamiltonBound one = hamilton_bound(-1.0, 3, 0.5, 1.0);
    CHECK(one.value == doctest::Approx(1.0 / 0.5 + 1.5));
    CHECK(!hamilton_bound(-1.0, 3, 0.5, 0.5).supported);
    // Continuity of the ratio > 1 branch at ratio → 1.
    CHECK(hamilton_bound(-1.0, 3, 0.5, 1.0 + 1e-9).value == doctest::Approx(one.value).epsilon(1e-5));
}

TEST_CASE("flat master equation matches its closed form") {
    Matrix J(2, 2);
    J << 0.3, 0.2, 0.2, -0.3;
    const double c = 0.4;
    Matrix H = J + 0.5 * c * Matrix::Identity(2, 2);
    Matrix U0(2, 2);
    U0 << 0.8, 0.1, 0.1, -0.2;
    RiccatiState st = integrate_master_ode(J, c, 0.0, 2, 0.5, Boundary::at_zero, U0, 1e-12);
    REQUIRE(st.completed);
    for (std::size_t i = 0; i < st.times.size(); ++i)
        CHECK((st.values[i] - flat_closed_form(U0, H, st.times[i])).cwiseAbs().maxCoeff() <= 1e-8);
    Matrix one = Matrix::Identity(1, 1);
    CHECK(flat_closed_form(one, Matrix::Zero(1, 1), 0.5)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("one-dimensional envelopes solve the equality case") {
    Matrix A = Matrix::Constant(1, 1, 0.4), B = Matrix::Constant(1, 1, -0.3);
    const double gamma = 0.8, eps = 0.1, T = 0.7;
    CommutingPair pair(A, B, gamma);
    Matrix v0 = Matrix::Constant(1, 1, 0.2);
    OdeRhs rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
        double cp = std::exp(gamma * t) * 0.4 - 0.3;
        dy[0] = y[0] * y[0] + 2.0 * cp * y[0];
    };
    std::vector<double> y = {0.2};
    OdeOptions o;
    o.rel_tol = 1e-13;
    o.abs_tol = 1e-15;
    integrate_dopri(rhs, y, eps, T, o);
    EnvelopeValue e = lower_envelope(pair, v0, eps, T);
    CHECK(e.value(0, 0) == doctest::Approx(y[0]).epsilon(1e-10));
    CHECK(e.factor_min_eig > 0.0);
    std::vector<double> z = {0.2};
    integrate_dopri(rhs, z, T, eps, o);
    CHECK(upper_envelope(pair, v0, T, eps).value(0, 0) == doctest::Approx(z[0]).epsilon(1e-10));
}

TEST_CASE("entropy bracket collapses for a constant function") {
    NgeBracket b = nge_entropy_bracket({-1.5, -1.5, -1.5}, {-1.5, -1.5, -1.5}, -1.0, 3, 0.5, 0.0);
    CHECK(b.lower <= 1e-12);
    CHECK(b.upper >= -1e-12);
}
