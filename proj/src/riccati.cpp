#include "intrinsic/riccati.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "intrinsic/numerics.hpp"

namespace intrinsic {

namespace {

constexpr double kLambdaZero = 1e-12;
constexpr double kMaxExponent = 700.0;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// log cosh and log|sinh| without overflow.
double log_cosh(double x) {
    double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}
double log_abs_sinh(double x) {
    double a = std::abs(x);
    return a + std::log1p(-std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

// ---------------------------------------------------------------- commuting pair

CommutingPair::CommutingPair(Matrix A, Matrix B, double gamma)
    : A_(std::move(A)), B_(std::move(B)), gamma_(gamma) {
    if (A_.rows() != A_.cols() || B_.rows() != B_.cols() || A_.rows() != B_.rows())
        throw std::invalid_argument("CommutingPair: A and B must be square of equal size");
    if (gamma_ == 0.0) throw std::invalid_argument("CommutingPair: γ must be nonzero");
    if (asymmetry(A_) > 1e-10 || asymmetry(B_) > 1e-10)
        throw std::invalid_argument("CommutingPair: A and B must be symmetric");
    A_ = symmetrize(A_);
    B_ = symmetrize(B_);
    double comm = (A_ * B_ - B_ * A_).norm();
    if (comm > 1e-10)
        throw std::invalid_argument("CommutingPair: ‖AB − BA‖ = " + fmt(comm) + " exceeds 1e-10");
    // Diagonalize A, then B inside each cluster of equal A-eigenvalues.
    const int n = dim();
    SymEig ea = sym_eig(A_);
    Q_ = ea.vectors;
    const double scale = std::max(1.0, ea.values.cwiseAbs().maxCoeff());
    int start = 0;
    while (start < n) {
        int end = start + 1;
        while (end < n && ea.values(end) - ea.values(start) <= 1e-9 * scale) ++end;
        if (end - start > 1) {
            Matrix block = Q_.middleCols(start, end - start);
            SymEig eb = sym_eig(block.transpose() * B_ * block);
            Q_.middleCols(start, end - start) = block * eb.vectors;
        }
        start = end;
    }
    a_ = (Q_.transpose() * A_ * Q_).diagonal();
    b_ = (Q_.transpose() * B_ * Q_).diagonal();
}

Vector CommutingPair::c_diag(double t) const {
    return (std::exp(gamma_ * t) / gamma_) * a_ + t * b_;
}

Matrix c_tensor(const CommutingPair& pair, double t) {
    return (std::exp(pair.gamma() * t) / pair.gamma()) * pair.A() + t * pair.B();
}

Matrix exp_c_shifted(const CommutingPair& pair, double t, double t_ref) {
    Vector d = pair.c_diag(t) - pair.c_diag(t_ref);
    for (int k = 0; k < d.size(); ++k)
        if (d(k) > kMaxExponent)
            throw std::overflow_error("exp_c: exponent " + fmt(d(k)) + " at eigenvalue a = " +
                                      fmt(pair.a()(k)));
    const Matrix& Q = pair.basis();
    return Q * d.array().exp().matrix().asDiagonal() * Q.transpose();
}

Matrix exp_c(const CommutingPair& pair, double t) {
    Vector d = pair.c_diag(t);
    for (int k = 0; k < d.size(); ++k)
        if (d(k) > kMaxExponent)
            throw std::overflow_error("exp_c: exponent " + fmt(d(k)) + " at eigenvalue a = " +
                                      fmt(pair.a()(k)));
    const Matrix& Q = pair.basis();
    return Q * d.array().exp().matrix().asDiagonal() * Q.transpose();
}

namespace {

Vector integral_diag(const CommutingPair& pair, double t0, double t1, double t_ref, bool shifted) {
    const int n = pair.dim();
    const double g = pair.gamma();
    Vector out(n);
    for (int k = 0; k < n; ++k) {
        const double a = pair.a()(k), b = pair.b()(k);
        const double ref = shifted ? std::exp(g * t_ref) / g * a + t_ref * b : 0.0;
        auto expo = [&](double s) { return 2.0 * (std::exp(g * s) / g * a + s * b - ref); };
        for (double s : {t0, t1})
            if (expo(s) > kMaxExponent)
                throw std::overflow_error("integral_e2c: exponent " + fmt(expo(s)) +
                                          " at eigenvalue a = " + fmt(a));
        if (a == 0.0) {
            if (b == 0.0)
                out(k) = t1 - t0;
            else
                out(k) = (std::exp(expo(t1)) - std::exp(expo(t0))) / (2.0 * b);
            continue;
        }
        IntegralResult r = adaptive_simpson([&](double s) { return std::exp(expo(s)); }, t0, t1, 1e-12);
        out(k) = r.value;
    }
    return out;
}

}  // namespace

Matrix integral_e2c(const CommutingPair& pair, double t0, double t1) {
    const Matrix& Q = pair.basis();
    return Q * integral_diag(pair, t0, t1, 0.0, false).asDiagonal() * Q.transpose();
}

Matrix integral_e2c_shifted(const CommutingPair& pair, double t0, double t1, double t_ref) {
    const Matrix& Q = pair.basis();
    return Q * integral_diag(pair, t0, t1, t_ref, true).asDiagonal() * Q.transpose();
}

// ---------------------------------------------------------------- envelopes

namespace {

// D S (Id + sign·S K S)⁻¹ S D in the shared basis, S = V^{1/2}.
EnvelopeValue envelope(const CommutingPair& pair, const Matrix& V, const Vector& d,
                       const Vector& k, double sign, const char* who) {
    const Matrix& Q = pair.basis();
    const int n = pair.dim();
    Matrix Vb = symmetrize(Q.transpose() * V * Q);
    Matrix S = sym_sqrt_psd(Vb);
    Matrix factor = Matrix::Identity(n, n) + sign * (S * k.asDiagonal() * S);
    factor = symmetrize(factor);
    EnvelopeValue out;
    out.factor_min_eig = min_eigenvalue(factor);
    if (!(out.factor_min_eig > kEigenClip))
        throw std::runtime_error(std::string(who) + ": inverted factor lost positive definiteness "
                                 "(smallest eigenvalue " + fmt(out.factor_min_eig) + ")");
    Matrix inner = S * factor.ldlt().solve(S);
    Matrix res = d.asDiagonal() * inner * d.asDiagonal();
    out.value = symmetrize(Q * res * Q.transpose());
    return out;
}

}  // namespace

EnvelopeValue lower_envelope(const CommutingPair& pair, const Matrix& v_eps, double eps, double t) {
    if (t < eps) throw std::invalid_argument("lower_envelope: t must be ≥ ε");
    if (!is_psd(v_eps)) throw std::invalid_argument("lower_envelope: boundary matrix must be PSD");
    Vector d = (pair.c_diag(t) - pair.c_diag(eps)).array().exp().matrix();
    Vector k = integral_diag(pair, eps, t, eps, true);
    return envelope(pair, v_eps, d, k, -1.0, "lower_envelope");
}

EnvelopeValue upper_envelope(const CommutingPair& pair, const Matrix& v_T, double T, double t) {
    if (t > T) throw std::invalid_argument("upper_envelope: t must be ≤ T");
    if (!is_psd(v_T)) throw std::invalid_argument("upper_envelope: boundary matrix must be PSD");
    Vector d = (pair.c_diag(t) - pair.c_diag(T)).array().exp().matrix();
    Vector k = integral_diag(pair, t, T, T, true);
    return envelope(pair, v_T, d, k, 1.0, "upper_envelope");
}

double envelope_trace_integral(const std::function<Matrix(double)>& env, double t0, double t1,
                               double rel_tol) {
    IntegralResult r = adaptive_simpson([&](double t) { return env(t).trace(); }, t0, t1, rel_tol,
                                        1e-14, 30);
    return 0.5 * r.value;
}

// ---------------------------------------------------------------- master ODE

RiccatiState integrate_master_ode(const Matrix& J, double c, double kappa, int n, double T,
                                  Boundary boundary, const Matrix& U_boundary, double rel_tol) {
    if (J.rows() != n || J.cols() != n || U_boundary.rows() != n || U_boundary.cols() != n)
        throw std::invalid_argument("integrate_master_ode: dimension mismatch");
    if (std::abs(J.trace()) > 1e-8)
        throw std::invalid_argument("integrate_master_ode: J must be traceless (tr = " +
                                    fmt(J.trace()) + ")");
    if (asymmetry(U_boundary) > 1e-10)
        throw std::invalid_argument("integrate_master_ode: boundary matrix must be symmetric");
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const Matrix Js = symmetrize(J);
    const Matrix I = Matrix::Identity(n, n);
    auto u_at = [&](double t) { return Matrix(std::exp(-n * kappa * (T - t)) * Js + (c / n) * I); };

    OdeRhs rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
        Eigen::Map<const Matrix> U(y.data(), n, n);
        Matrix u = u_at(t);
        Matrix d = U * U - u * U - U * u + u * u + (n - 1) * kappa * U;
        Eigen::Map<Matrix>(dy.data(), n, n) = d;
        dy[nn] = U.trace();
    };

    RiccatiState st;
    std::vector<double> y(nn + 1, 0.0);
    Eigen::Map<Matrix>(y.data(), n, n) = symmetrize(U_boundary);
    const double t0 = boundary == Boundary::at_zero ? 0.0 : T;
    const double t1 = boundary == Boundary::at_zero ? T : 0.0;
    st.times.push_back(t0);
    st.values.push_back(symmetrize(U_boundary));
    double last_t = t0;
    OdeObserver obs = [&](double t, std::vector<double>& state) {
        Eigen::Map<Matrix> U(state.data(), n, n);
        U = symmetrize(Matrix(U));
        last_t = t;
        if (U.norm() > 1e12) return false;
        st.times.push_back(t);
        st.values.push_back(U);
        return true;
    };
    OdeOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-13;
    opt.h_init = 1e-4 * std::max(T, 1e-3);
    OdeResult res = integrate_dopri(rhs, y, t0, t1, opt, obs);
    st.completed = res.completed;
    if (!res.completed) st.blowup_time = last_t;
    st.trace_integral = boundary == Boundary::at_zero ? y[nn] : -y[nn];
    if (boundary == Boundary::at_end) {
        std::reverse(st.times.begin(), st.times.end());
        std::reverse(st.values.begin(), st.values.end());
    }
    return st;
}

Matrix flat_closed_form(const Matrix& U0, const Matrix& H, double t) {
    const int n = static_cast<int>(U0.rows());
    Matrix X = symmetrize(U0 - H);
    Matrix F = Matrix::Identity(n, n) - t * X;
    SymEig e = sym_eig(F);
    double smallest = e.values.cwiseAbs().minCoeff();
    if (smallest < 1e-12)
        throw std::runtime_error("flat_closed_form: [U0 − H]⁻¹ − t is singular (eigenvalue of "
                                 "Id − t(U0 − H) = " + fmt(smallest) + ")");
    Matrix res = e.vectors * e.values.cwiseInverse().asDiagonal() * e.vectors.transpose() * X;
    return symmetrize(res + H);
}

// ---------------------------------------------------------------- scalar ξ

std::string to_string(XiBranch b) {
    switch (b) {
        case XiBranch::tan: return "tan";
        case XiBranch::linear: return "linear";
        case XiBranch::tanh: return "tanh";
    }
    return "?";
}

namespace {
XiBranch branch_of(double lambda) {
    if (std::abs(lambda) <= kLambdaZero) return XiBranch::linear;
    return lambda > 0.0 ? XiBranch::tan : XiBranch::tanh;
}
}  // namespace

XiBranch ScalarRiccatiParams::branch() const { return branch_of(lambda()); }

double xi_blowup_time(double lambda, double y) {
    const double inf = std::numeric_limits<double>::infinity();
    switch (branch_of(lambda)) {
        case XiBranch::tan: {
            double k = std::sqrt(lambda);
            return (0.5 * std::numbers::pi - std::atan(y / k)) / k;
        }
        case XiBranch::linear: return y > 0.0 ? 1.0 / y : inf;
        case XiBranch::tanh: {
            double k = std::sqrt(-lambda);
            if (y <= k) return inf;
            return -std::atanh(-k / y) / k;
        }
    }
    return inf;
}

namespace {

double xi_value(double lambda, double y, double t) {
    double tb = xi_blowup_time(lambda, y);
    if (t >= tb)
        throw std::domain_error("scalar_xi: t = " + fmt(t) + " is past the blow-up time " + fmt(tb));
    switch (branch_of(lambda)) {
        case XiBranch::tan: {
            double k = std::sqrt(lambda);
            return k * std::tan(k * t + std::atan(y / k));
        }
        case XiBranch::linear: return y / (1.0 - y * t);
        case XiBranch::tanh: {
            double k = std::sqrt(-lambda);
            double ay = std::abs(y);
            if (std::abs(ay - k) <= 1e-14 * k) return y;  // constant solution
            if (ay < k) return -k * std::tanh(k * t + std::atanh(-y / k));
            return -k / std::tanh(k * t + std::atanh(-k / y));
        }
    }
    return 0.0;
}

}  // namespace

double scalar_xi(const ScalarRiccatiParams& p, double t) {
    return xi_value(p.lambda(), p.c + 0.5 * p.alpha, t);
}

double scalar_sigma(const ScalarRiccatiParams& p, double t) { return scalar_xi(p, t) - 0.5 * p.alpha; }

double xi_integral(double lambda, double y, double T) {
    double tb = xi_blowup_time(lambda, y);
    if (T >= tb)
        throw std::domain_error("xi_integral: horizon " + fmt(T) + " passes the blow-up time " +
                                fmt(tb));
    switch (branch_of(lambda)) {
        case XiBranch::tan: {
            double k = std::sqrt(lambda);
            double a = std::atan(y / k);
            double cT = std::cos(k * T + a);
            if (!(cT > 0.0)) throw std::domain_error("xi_integral: cos(√λT + α) ≤ 0");
            return std::log(std::cos(a) / cT);
        }
        case XiBranch::linear: return -std::log1p(-y * T);
        case XiBranch::tanh: {
            double k = std::sqrt(-lambda);
            double ay = std::abs(y);
            if (std::abs(ay - k) <= 1e-14 * k) return y * T;
            if (ay < k) {
                double a = std::atanh(-y / k);
                return log_cosh(a) - log_cosh(k * T + a);
            }
            double a = std::atanh(-k / y);
            return log_abs_sinh(a) - log_abs_sinh(k * T + a);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------- Hamilton, nge

HamiltonBound hamilton_bound(double kappa, int n, double T, double ratio) {
    if (!(T > 0.0)) throw std::invalid_argument("hamilton_bound: T must be positive");
    if (kappa > 0.0) throw std::invalid_argument("hamilton_bound: κ must be ≤ 0");
    HamiltonBound hb;
    if (kappa == 0.0) {
        hb.value = 1.0 / T;
        hb.regime = "flat";
        return hb;
    }
    const double a = 0.5 * n * std::abs(kappa);
    const double lambda = a * a * (ratio - 1.0);
    if (std::abs(lambda) <= kLambdaZero) {
        hb.value = 1.0 / T + a;
        hb.regime = "ratio=1";
        return hb;
    }
    if (ratio < 1.0) {
        hb.supported = false;
        hb.value = std::numeric_limits<double>::quiet_NaN();
        hb.regime = "ratio<1";
        return hb;
    }
    const double w = a * std::sqrt(ratio - 1.0);
    if (w * T >= std::numbers::pi)
        throw std::domain_error("hamilton_bound: cot argument " + fmt(w * T) +
                                " reaches the pole at π; the Li–Yau range condition fails");
    hb.value = w / std::tan(w * T) + a;
    hb.regime = "ratio>1";
    return hb;
}

NgeBracket nge_entropy_bracket(const std::vector<double>& sigma_start,
                               const std::vector<double>& sigma_end, double kappa, int n,
                               double T, double c_T) {
    if (kappa > 0.0) throw std::invalid_argument("nge_entropy_bracket: κ must be ≤ 0");
    if (static_cast<int>(sigma_start.size()) != n || static_cast<int>(sigma_end.size()) != n)
        throw std::invalid_argument("nge_entropy_bracket: need n eigenvalues for each boundary");
    NgeBracket br;
    br.lambda = kappa * c_T - 0.25 * n * n * kappa * kappa;
    if (std::abs(br.lambda) <= kLambdaZero) br.lambda = 0.0;
    br.branch = branch_of(br.lambda);
    const double common = 0.5 * T * c_T - 0.25 * n * n * kappa * T;
    const double shift = 0.5 * n * kappa;
    double lo = 0.0, up = 0.0;
    for (int i = 0; i < n; ++i) {
        lo += xi_integral(br.lambda, sigma_start[i] + shift, T);
        // Terminal data: run the comparison backwards, ∫ξ = −∫η with η(0) = −y.
        // A backward blow-up only means the comparison gives no finite upper bound.
        double y = -(sigma_end[i] + shift);
        if (T >= xi_blowup_time(br.lambda, y))
            up = std::numeric_limits<double>::infinity();
        else
            up += -xi_integral(br.lambda, y, T);
    }
    br.lower = common + 0.5 * lo;
    br.upper = common + 0.5 * up;
    br.note = "branch " + to_string(br.branch) + " (tan for λ>0, tanh/coth for λ<0)";
    if (std::isinf(up)) br.note += "; terminal comparison blows up, upper bound vacuous";
    return br;
}

}  // namespace intrinsic
