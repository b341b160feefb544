#include "intrinsic/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace intrinsic {

namespace {

// Orthonormal probabilists' Hermite values p_0..p_{m} at x, and derivative of p_m.
void hermite_orthonormal(int m, double x, double& pm, double& dpm, double& sumsq_below) {
    double p_prev = 0.0, p = 1.0;
    sumsq_below = 0.0;
    for (int k = 0; k < m; ++k) {
        sumsq_below += p * p;
        double next = (x * p - std::sqrt(static_cast<double>(k)) * p_prev) /
                      std::sqrt(static_cast<double>(k + 1));
        p_prev = p;
        p = next;
    }
    pm = p;
    dpm = std::sqrt(static_cast<double>(m)) * p_prev;
}

std::vector<double> jacobi_nodes(int m, const std::function<double(int)>& offdiag) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) J(k, k - 1) = J(k - 1, k) = offdiag(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    std::vector<double> x(m);
    for (int i = 0; i < m; ++i) x[i] = es.eigenvalues()(i);
    return x;
}

}  // namespace

Rule1D gauss_hermite_rule(int m) {
    if (m < 1) throw std::invalid_argument("gauss_hermite_rule: m must be positive");
    Rule1D r;
    r.nodes = jacobi_nodes(m, [](int k) { return std::sqrt(static_cast<double>(k)); });
    r.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        double x = r.nodes[i];
        for (int it = 0; it < 3; ++it) {
            double pm, dpm, s;
            hermite_orthonormal(m, x, pm, dpm, s);
            if (dpm == 0.0) break;
            x -= pm / dpm;
        }
        double pm, dpm, s;
        hermite_orthonormal(m, x, pm, dpm, s);
        r.nodes[i] = x;
        r.weights[i] = 1.0 / s;
    }
    for (int i = 0; i < m / 2; ++i) {
        double xs = 0.5 * (r.nodes[m - 1 - i] - r.nodes[i]);
        double ws = 0.5 * (r.weights[i] + r.weights[m - 1 - i]);
        r.nodes[i] = -xs;
        r.nodes[m - 1 - i] = xs;
        r.weights[i] = r.weights[m - 1 - i] = ws;
    }
    if (m % 2 == 1) r.nodes[m / 2] = 0.0;
    return r;
}

Rule1D gauss_legendre_rule(int m, double a, double b) {
    if (m < 1) throw std::invalid_argument("gauss_legendre_rule: m must be positive");
    Rule1D r;
    std::vector<double> x = jacobi_nodes(m, [](int k) {
        double kk = static_cast<double>(k);
        return kk / std::sqrt(4.0 * kk * kk - 1.0);
    });
    r.nodes.resize(m);
    r.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        double t = x[i], dp = 0.0;
        for (int it = 0; it < 4; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) { p1 = t; p0 = 1.0; }
            dp = m * (t * p1 - p0) / (t * t - 1.0);
            double step = p1 / dp;
            t -= step;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= m; ++k) {
            double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (m == 1) p0 = 1.0;
        dp = m * (t * p1 - p0) / (t * t - 1.0);
        double w = 2.0 / ((1.0 - t * t) * dp * dp);
        r.nodes[i] = 0.5 * (b - a) * t + 0.5 * (a + b);
        r.weights[i] = 0.5 * (b - a) * w;
    }
    return r;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth, bool& ok) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0) {
        ok = false;
        return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok);
}

}  // namespace

IntegralResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                double rel_tol, double abs_tol, int max_depth) {
    IntegralResult res;
    if (a == b) return res;
    // A coarse composite pass sets the scale for the relative tolerance.
    const int pieces = 16;
    double h = (b - a) / pieces;
    std::vector<double> fx(2 * pieces + 1);
    for (int i = 0; i <= 2 * pieces; ++i) fx[i] = f(a + 0.5 * h * i);
    double coarse = 0.0, scale = 0.0;
    for (int i = 0; i < pieces; ++i) {
        double s = h / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);
        coarse += s;
        scale += std::abs(s);
    }
    double tol = std::max(rel_tol * scale, abs_tol);
    bool ok = true;
    double total = 0.0;
    for (int i = 0; i < pieces; ++i) {
        double x0 = a + h * i, x1 = x0 + h;
        double whole = h / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);
        total += simpson_rec(f, x0, x1, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], whole,
                             tol / pieces, max_depth, ok);
    }
    res.value = total;
    res.error = std::abs(total - coarse);
    res.converged = ok;
    return res;
}

IntegralResult adaptive_kronrod(const std::function<double(double)>& f, double a, double b,
                                double rel_tol, int max_depth) {
    IntegralResult res;
    double err = 0.0, l1 = 0.0;
    res.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, static_cast<unsigned>(max_depth), rel_tol, &err, &l1);
    res.error = err * std::max(l1, std::abs(res.value));
    res.converged = err <= std::max(rel_tol * 100.0, 1e-8);
    return res;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: need ≥ 2 points");
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double h = x_[i + 1] - x_[i];
        if (!(h > 0.0)) throw std::invalid_argument("MonotoneCubic: abscissae not increasing");
        delta[i] = (y_[i + 1] - y_[i]) / h;
    }
    d_.assign(n, 0.0);
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
}

std::size_t MonotoneCubic::locate(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double t) const {
    std::size_t i = locate(t);
    double h = x_[i + 1] - x_[i];
    double s = (t - x_[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::derivative(double t) const {
    std::size_t i = locate(t);
    double h = x_[i + 1] - x_[i];
    double s = (t - x_[i]) / h;
    double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
    double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
    return (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * d_[i] + d11 * d_[i + 1];
}

UniformCubic::UniformCubic(double x0, double dx, std::vector<double> y)
    : x0_(x0), dx_(dx), y_(std::move(y)) {
    if (y_.size() < 4) throw std::invalid_argument("UniformCubic: need ≥ 4 samples");
}

double UniformCubic::operator()(double t) const {
    const long n = static_cast<long>(y_.size());
    double u = (t - x0_) / dx_;
    long i = static_cast<long>(std::floor(u));
    i = std::clamp(i, 1L, n - 3);
    double s = u - static_cast<double>(i);
    double p0 = y_[i - 1], p1 = y_[i], p2 = y_[i + 1], p3 = y_[i + 2];
    // Cubic Lagrange through four neighbours.
    double l0 = -s * (s - 1) * (s - 2) / 6.0;
    double l1 = (s + 1) * (s - 1) * (s - 2) / 2.0;
    double l2 = -(s + 1) * s * (s - 2) / 2.0;
    double l3 = (s + 1) * s * (s - 1) / 6.0;
    return l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3;
}

OdeResult integrate_dopri(const OdeRhs& rhs, std::vector<double>& y, double t0, double t1,
                          const OdeOptions& opt, const OdeObserver& observer) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeResult res;
    const std::size_t n = y.size();
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    double span = std::abs(t1 - t0);
    if (span == 0.0) {
        res.t_end = t0;
        return res;
    }
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
    double t = t0;
    double h = std::min(opt.h_init, span);
    rhs(t, y, k1);
    while (dir * (t1 - t) > 0.0) {
        if (res.steps >= opt.max_steps) {
            res.completed = false;
            break;
        }
        if (h > std::abs(t1 - t)) h = std::abs(t1 - t);
        double hs = dir * h;
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
        rhs(t + c2 * hs, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * hs, tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * hs, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * hs, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(t + hs, tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + hs, ynew, k7);
        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
            double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double r = e / sc;
            err = std::max(err, std::abs(r));
            if (!std::isfinite(ynew[i])) finite = false;
        }
        if (!finite) err = std::numeric_limits<double>::infinity();
        if (err <= 1.0) {
            t += hs;
            y = ynew;
            ++res.steps;
            bool keep = true;
            if (observer) keep = observer(t, y);
            if (!keep) {
                res.completed = false;
                break;
            }
            rhs(t, y, k1);
        }
        double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
        if (!std::isfinite(fac)) fac = 0.2;
        fac = std::clamp(fac, 0.2, 5.0);
        h *= fac;
        if (h < opt.h_min) {
            res.completed = false;
            break;
        }
    }
    res.t_end = t;
    return res;
}

void integrate_rk4(const OdeRhs& rhs, std::vector<double>& y, double t0, double t1,
                   std::size_t steps) {
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    double h = (t1 - t0) / static_cast<double>(steps);
    double t = t0;
    for (std::size_t s = 0; s < steps; ++s) {
        rhs(t, y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(t + h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t = t0 + h * static_cast<double>(s + 1);
    }
}

namespace {
std::atomic<unsigned> g_workers{0};
}

void set_worker_count(unsigned jobs) { g_workers = jobs; }

unsigned worker_count() {
    unsigned w = g_workers.load();
    if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
    return w;
}

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    if (chunk == 0) chunk = 1;
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), nchunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) body(c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t c = next.fetch_add(1);
                if (c >= nchunks || failed.load()) return;
                try {
                    body(c * chunk, std::min(n, (c + 1) * chunk));
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
    return std::mt19937_64(seq);
}

double ordered_sum(const std::vector<double>& v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

}  // namespace intrinsic
