#include "intrinsic/euclidean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace intrinsic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------- Dembo / dimensional

BoundResult dembo_bound(const DensityModel& mu, const QuadratureGrid& grid) {
    const int n = mu.dim();
    EntropyValue h = relative_entropy(mu, Reference::lebesgue_measure(), grid);
    FisherMatrix info = fisher_matrix(mu, Reference::lebesgue_measure(), grid);
    BoundResult r;
    r.lhs = h.value - gaussian_entropy_lebesgue(n);
    r.rhs = 0.5 * log_det_sym(info.matrix);
    r.error = h.error + info.error * std::max(1.0, std::abs(sym_inverse(info.matrix).trace()));
    if (r.rhs == -kInf) {
        r.vacuous = true;
        r.note = "singular Fisher matrix";
    }
    r.margin = r.rhs - r.lhs;
    return r;
}

DimensionalResult dimensional_bound(const DensityModel& mu, const QuadratureGrid& grid) {
    const int n = mu.dim();
    EntropyValue h = relative_entropy(mu, Reference::lebesgue_measure(), grid);
    FisherMatrix info = fisher_matrix(mu, Reference::lebesgue_measure(), grid);
    if (!(info.trace > 0.0)) throw std::runtime_error("dimensional_bound: Fisher information ≤ 0");
    DimensionalResult r;
    r.lhs = h.value - gaussian_entropy_lebesgue(n);
    r.rhs = 0.5 * n * std::log(info.trace / n);
    r.dembo_rhs = 0.5 * log_det_sym(info.matrix);
    return r;
}

// ---------------------------------------------------------------- homogeneous measures

HomogeneousMeasureSpec HomogeneousMeasureSpec::lebesgue(int n) {
    HomogeneousMeasureSpec s;
    s.p.assign(static_cast<std::size_t>(n), 0.0);
    s.log_w = [](const Vector&) { return 0.0; };
    s.grad_log_w = [n](const Vector&) { return Vector::Zero(n).eval(); };
    s.c1 = 0.5;
    s.c2 = gaussian_entropy_lebesgue(n) - 0.5 * n;
    return s;
}

double homogeneity_defect(const HomogeneousMeasureSpec& rho, int samples, unsigned seed) {
    const int n = static_cast<int>(rho.p.size());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> tdist(0.5, 2.0);
    std::normal_distribution<double> xdist(0.0, 1.0);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        Vector t(n), x(n);
        for (int k = 0; k < n; ++k) {
            t(k) = tdist(rng);
            x(k) = xdist(rng);
        }
        double expected = rho.log_w(x);
        for (int k = 0; k < n; ++k) expected += rho.p[k] * std::log(t(k));
        double got = rho.log_w(t.cwiseProduct(x));
        worst = std::max(worst, std::abs(std::expm1(got - expected)));
    }
    return worst;
}

double homogeneous_objective(const HomogeneousMeasureSpec& rho, const std::vector<double>& fisher,
                             const std::vector<double>& t) {
    double v = rho.c2;
    for (std::size_t k = 0; k < fisher.size(); ++k)
        v += rho.c1 * t[k] * t[k] * fisher[k] - (1.0 + rho.p[k]) * std::log(t[k]);
    return v;
}

HomogeneousResult homogeneous_lsi_bound(const DensityModel& mu, const HomogeneousMeasureSpec& rho,
                                        const QuadratureGrid& grid) {
    const int n = mu.dim();
    if (static_cast<int>(rho.p.size()) != n)
        throw std::invalid_argument("homogeneous_lsi_bound: weight count differs from dimension");
    HomogeneousResult r;
    r.lhs = integrate([&](const Vector& x) { return mu.log_value(x) - rho.log_w(x); }, mu, grid)
                .value;
    r.fisher_components.resize(n);
    for (int k = 0; k < n; ++k)
        r.fisher_components[k] = integrate(
                                     [&](const Vector& x) {
                                         double s = mu.grad_log(x)(k) - rho.grad_log_w(x)(k);
                                         return s * s;
                                     },
                                     mu, grid)
                                     .value;
    r.rhs = rho.c2;
    r.optimal_t.resize(n);
    for (int k = 0; k < n; ++k) {
        double F = r.fisher_components[k];
        double pk = 1.0 + rho.p[k];
        if (!(F > 0.0) || !std::isfinite(F)) {
            r.vacuous = true;
            r.optimal_t[k] = kInf;
            continue;
        }
        r.optimal_t[k] = std::sqrt(pk / (2.0 * rho.c1 * F));
        r.rhs += 0.5 * pk * std::log(2.0 * M_E * rho.c1 / pk * F);
    }
    if (r.vacuous) r.rhs = -kInf;
    return r;
}

// ---------------------------------------------------------------- GNS

double GNSParams::constraint_defect(int n) const {
    return std::abs(1.0 / p - theta / q - (1.0 / r - 1.0 / n) * (1.0 - theta));
}

GNSResult gns_improved(const TestFunction& u, const GNSParams& prm, const QuadratureGrid& grid) {
    const int n = grid.dim();
    if (prm.constraint_defect(n) > 1e-12)
        throw std::invalid_argument("gns_improved: exponent constraint violated");
    if (!(prm.theta >= 0.0 && prm.theta <= 1.0))
        throw std::invalid_argument("gns_improved: θ outside [0,1]");
    GNSResult r;
    r.lhs = lp_norm(u.value, prm.p, Weight::lebesgue, grid).value;
    r.norm_q = lp_norm(u.value, prm.q, Weight::lebesgue, grid).value;
    r.partial_norms.resize(n);
    double sum_r = 0.0, log_prod = 0.0;
    bool zero = false;
    for (int j = 0; j < n; ++j) {
        r.partial_norms[j] =
            lp_norm([&](const Vector& x) { return u.grad(x)(j); }, prm.r, Weight::lebesgue, grid)
                .value;
        sum_r += std::pow(r.partial_norms[j], prm.r);
        if (r.partial_norms[j] <= 0.0)
            zero = true;
        else
            log_prod += std::log(r.partial_norms[j]);
    }
    const double e = 1.0 - prm.theta;
    const double head = prm.C * std::pow(r.norm_q, prm.theta);
    r.rhs_classical = head * std::pow(sum_r, e / prm.r);
    if (zero && e > 0.0) {
        r.rhs_improved = 0.0;
        r.degenerate = true;
        r.note = "a vanishing partial derivative forces u ≡ 0";
    } else {
        r.rhs_improved = head * std::pow(static_cast<double>(n), e / prm.r) *
                         std::exp(e / n * log_prod);
    }
    return r;
}

// ---------------------------------------------------------------- Beckner

double beckner_phi(double p, int n, double s) {
    return 0.25 * n * (std::pow(1.0 - s, -2.0 * p / (n * (2.0 - p))) - 1.0);
}

BecknerResult beckner_improved(const TestFunction& u, double p, const QuadratureGrid& grid,
                               double normalization_tol) {
    if (!(p >= 1.0 && p < 2.0)) throw std::invalid_argument("beckner_improved: p must lie in [1,2)");
    const int n = grid.dim();
    BecknerResult r;
    r.norm2_sq = integrate_gaussian(
                     [&](const Vector& x) {
                         double v = u.value(x);
                         return v * v;
                     },
                     grid)
                     .value;
    Matrix M = weighted_second_moment_matrix(u.value, grid);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double target = i == j ? r.norm2_sq : 0.0;
            if (std::abs(M(i, j) - target) > normalization_tol * r.norm2_sq)
                throw std::invalid_argument("beckner_improved: second-moment normalization fails at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
        }
    double normp = std::pow(
        integrate_gaussian([&](const Vector& x) { return std::pow(std::abs(u.value(x)), p); }, grid)
            .value,
        2.0 / p);
    r.lhs = (r.norm2_sq - normp) / r.norm2_sq;
    Matrix G = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double v = integrate_gaussian(
                           [&](const Vector& x) {
                               Vector g = u.grad(x);
                               return g(i) * g(j);
                           },
                           grid)
                           .value;
            G(i, j) = G(j, i) = v;
        }
    r.gradient_gram = G;
    const double expo = (2.0 - p) / (2.0 * p);
    Matrix K = 4.0 * G / r.norm2_sq + Matrix::Identity(n, n);
    r.rhs_matrix = -std::expm1(-expo * log_det_sym(K));
    r.rhs_dt = -std::expm1(-n * expo * std::log1p(4.0 * G.trace() / (n * r.norm2_sq)));
    return r;
}

// ---------------------------------------------------------------- q-LSI

double qlsi_objective(double a, double b, double q, double c_tilde, double t) {
    double p = q / (q - 1.0);
    return c_tilde * std::pow(t, q) * a + c_tilde * std::pow(t, -p) * b - std::log(t);
}

double qlsi_minimizer(double a, double b, double q, double c) {
    if (!(q > 1.0)) throw std::invalid_argument("qlsi_minimizer: q must exceed 1");
    const double p = q / (q - 1.0);
    if (a <= 0.0) return kInf;
    if (b <= 0.0) return std::pow(1.0 / (q * c * a), 1.0 / q);
    auto d1 = [&](double s) { return q * c * a * std::exp(q * s) - p * c * b * std::exp(-p * s) - 1.0; };
    auto d2 = [&](double s) {
        return q * q * c * a * std::exp(q * s) + p * p * c * b * std::exp(-p * s);
    };
    double lo = -1.0, hi = 1.0;
    while (d1(lo) > 0.0) lo *= 2.0;
    while (d1(hi) < 0.0) hi *= 2.0;
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double g = d1(s);
        if (std::abs(g) <= 1e-10) break;
        if (g > 0.0)
            hi = s;
        else
            lo = s;
        double next = s - g / d2(s);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) < 1e-15 * std::max(1.0, std::abs(s))) {
            s = next;
            break;
        }
        s = next;
    }
    return std::exp(s);
}

QlsiResult qlsi_improved(const DensityModel& mu, double q, double c_tilde,
                         const QuadratureGrid& grid) {
    if (!(q > 1.0 && q < 2.0)) throw std::invalid_argument("qlsi_improved: q must lie in (1,2)");
    const int n = mu.dim();
    const double p = q / (q - 1.0);
    QlsiResult r;
    r.lhs = relative_entropy(mu, Reference::lebesgue_measure(), grid).value;
    r.a.resize(n);
    r.b.resize(n);
    r.optimal_t.resize(n);
    for (int i = 0; i < n; ++i) {
        r.a[i] = integrate([&](const Vector& x) { return std::pow(std::abs(mu.grad_log(x)(i)), q); },
                           mu, grid)
                     .value;
        r.b[i] = integrate([&](const Vector& x) { return std::pow(std::abs(x(i)), p); }, mu, grid)
                     .value;
        double t = qlsi_minimizer(r.a[i], r.b[i], q, c_tilde);
        r.optimal_t[i] = t;
        if (!std::isfinite(t)) {
            r.vacuous = true;
            continue;
        }
        r.rhs += qlsi_objective(r.a[i], r.b[i], q, c_tilde, t);
    }
    if (r.vacuous) r.rhs = -kInf;
    return r;
}

// ---------------------------------------------------------------- Cramér–Rao

ParametricFamily ParametricFamily::gaussian_channel(int n, double sigma) {
    ParametricFamily f;
    f.space = Space::gaussian_channel;
    f.dim = n;
    f.sigma = sigma;
    return f;
}

ParametricFamily ParametricFamily::finite(int n, int outcomes,
                                          std::function<double(int, const Vector&)> f,
                                          std::function<Vector(int, const Vector&)> grad_theta) {
    ParametricFamily p;
    p.space = Space::finite;
    p.dim = n;
    p.outcomes = outcomes;
    p.f = std::move(f);
    p.grad_theta = std::move(grad_theta);
    return p;
}

namespace {

double gaussian_channel_mi(const DensityModel& pi, double sigma, const QuadratureGrid& grid,
                           std::string& estimator) {
    const int n = pi.dim();
    const double s2 = sigma * sigma;
    const double cond = 0.5 * n * std::log(2.0 * M_PI * M_E * s2);
    if (pi.gaussian()) {
        estimator = "analytic";
        Matrix K = Matrix::Identity(n, n) + pi.gaussian()->covariance / s2;
        return 0.5 * log_det_sym(K);
    }
    if (pi.kind() == DensityKind::mixture) {
        bool all_gauss = true;
        std::vector<DensityModel> comps;
        for (const auto& c : pi.mixture_components()) {
            if (!c.gaussian()) {
                all_gauss = false;
                break;
            }
            comps.push_back(make_gaussian(
                {c.gaussian()->mean, c.gaussian()->covariance + s2 * Matrix::Identity(n, n)}));
        }
        if (all_gauss) {
            estimator = "quadrature";
            DensityModel y = make_mixture(pi.mixture_weights(), comps);
            return -relative_entropy(y, Reference::lebesgue_measure()).value - cond;
        }
    }
    estimator = "nested-quadrature";
    Matrix cov = pi.covariance_hint() + s2 * Matrix::Identity(n, n);
    Eigen::LLT<Matrix> llt(cov);
    QuadratureGrid ygrid =
        QuadratureGrid::hermite(n, grid.points_per_axis(), pi.mean_hint(), 1.25 * Matrix(llt.matrixL()));
    const double lognorm = -0.5 * n * std::log(2.0 * M_PI * s2);
    auto fy = [&](const Vector& y) {
        double s = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto col = static_cast<Eigen::Index>(k);
            Vector th = grid.nodes().col(col);
            s += grid.lebesgue_weights()(col) * pi.value(th) *
                 std::exp(lognorm - 0.5 * (y - th).squaredNorm() / s2);
        }
        return s;
    };
    double hy = integrate_lebesgue(
                    [&](const Vector& y) {
                        double v = fy(y);
                        return v > 0.0 ? -v * std::log(v) : 0.0;
                    },
                    ygrid)
                    .value;
    return hy - cond;
}

}  // namespace

CramerRaoResult cramer_rao_gaussian(const DensityModel& pi, const ParametricFamily& family,
                                    const QuadratureGrid& grid) {
    const int n = pi.dim();
    if (family.dim != n) throw std::invalid_argument("cramer_rao_gaussian: θ-dimension mismatch");
    CramerRaoResult r;
    Matrix J = Matrix::Zero(n, n);
    if (family.space == ParametricFamily::Space::gaussian_channel) {
        J = Matrix::Identity(n, n) / (family.sigma * family.sigma);
        r.mutual_information = gaussian_channel_mi(pi, family.sigma, grid, r.mi_estimator);
    } else {
        r.mi_estimator = "quadrature";
        const int K = family.outcomes;
        std::vector<double> fbar(K, 0.0);
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const auto col = static_cast<Eigen::Index>(s);
            Vector th = grid.nodes().col(col);
            double w = grid.lebesgue_weights()(col) * pi.value(th);
            Vector reg = Vector::Zero(n);
            for (int x = 0; x < K; ++x) {
                double fx = family.f(x, th);
                Vector g = family.grad_theta(x, th);
                reg += g;
                fbar[x] += w * fx;
                if (fx > 0.0) J += w * g * g.transpose() / fx;
            }
            if (reg.cwiseAbs().maxCoeff() > 1e-6)
                throw std::invalid_argument("cramer_rao_gaussian: score does not integrate to zero");
        }
        double mi = 0.0;
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const auto col = static_cast<Eigen::Index>(s);
            Vector th = grid.nodes().col(col);
            double w = grid.lebesgue_weights()(col) * pi.value(th);
            for (int x = 0; x < K; ++x) {
                double fx = family.f(x, th);
                if (fx > 0.0) mi += w * fx * std::log(fx / fbar[x]);
            }
        }
        r.mutual_information = mi;
    }
    r.average_fisher = symmetrize(J);
    DensityModel gamma = make_standard_gaussian(n);
    r.prior_entropy_gauss = relative_entropy(pi, Reference::of(gamma), grid).value;
    Matrix info_gauss = fisher_matrix(pi, Reference::of(gamma), grid).matrix;
    Matrix info_leb = fisher_matrix(pi, Reference::lebesgue_measure(), grid).matrix;
    Matrix M2(n, n);
    if (pi.gaussian()) {
        const auto& g = *pi.gaussian();
        M2 = g.covariance + g.mean * g.mean.transpose();
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j)
                M2(i, j) = M2(j, i) =
                    integrate([&](const Vector& x) { return x(i) * x(j); }, pi, grid).value;
    }
    r.lhs = r.mutual_information + r.prior_entropy_gauss;
    r.rhs = 0.5 * (M2.trace() - n) +
            0.5 * log_det_sym(2.0 * Matrix::Identity(n, n) + info_gauss + r.average_fisher - M2);
    double h_leb = relative_entropy(pi, Reference::lebesgue_measure(), grid).value;
    r.lhs_homogeneous = r.mutual_information + h_leb;
    r.rhs_homogeneous = gaussian_entropy_lebesgue(n);
    for (int k = 0; k < n; ++k)
        r.rhs_homogeneous += 0.5 * std::log(info_leb(k, k) + r.average_fisher(k, k));
    return r;
}

// ---------------------------------------------------------------- transport

namespace {

class AffineComponent final : public TransportComponent {
public:
    AffineComponent(double a, double b) : a_(a), b_(b) {
        if (!(a > 0.0)) throw std::invalid_argument("affine_component: slope must be positive");
    }
    Local at_image(double y) const override { return {(y - b_) / a_, a_, 0.0}; }

private:
    double a_, b_;
};

class TabulatedComponent final : public TransportComponent {
public:
    TabulatedComponent(std::function<double(double)> rho, std::function<double(double)> drho,
                       double lo, double hi, int size)
        : rho_(std::move(rho)), drho_(std::move(drho)) {
        if (size < 8 || !(hi > lo)) throw std::invalid_argument("monotone transport: bad table");
        std::vector<double> x(size), F(size);
        Rule1D gl = gauss_legendre_rule(8, 0.0, 1.0);
        const double h = (hi - lo) / (size - 1);
        F[0] = 0.0;
        x[0] = lo;
        for (int j = 1; j < size; ++j) {
            x[j] = lo + h * j;
            double s = 0.0;
            for (int k = 0; k < 8; ++k) s += gl.weights[k] * rho_(x[j - 1] + h * gl.nodes[k]);
            F[j] = F[j - 1] + h * s;
        }
        mass_ = F.back();
        for (double& v : F) v /= mass_;
        cdf_ = MonotoneCubic(x, F);
    }
    Local at_image(double y) const override {
        double F = std::clamp(cdf_(y), 1e-15, 1.0 - 1e-15);
        double z = normal_quantile(F);
        double r = rho_(y) / mass_;
        if (!(r > 0.0)) throw std::runtime_error("monotone transport: density vanishes");
        double d1 = normal_pdf(z) / r;
        double d2 = d1 * (-z - drho_(y) / rho_(y) * d1);
        return {z, d1, d2};
    }

private:
    std::function<double(double)> rho_, drho_;
    MonotoneCubic cdf_;
    double mass_ = 1.0;
};

}  // namespace

std::shared_ptr<const TransportComponent> affine_component(double a, double b) {
    return std::make_shared<AffineComponent>(a, b);
}

std::shared_ptr<const TransportComponent> monotone_transport_component(
    const std::function<double(double)>& density, const std::function<double(double)>& density_prime,
    double lo, double hi, int table_size) {
    return std::make_shared<TabulatedComponent>(density, density_prime, lo, hi, table_size);
}

TransportResult transport_deficit(const DensityModel& mu, const DiffeoSpec& T,
                                  const QuadratureGrid& grid) {
    const int n = mu.dim();
    if (static_cast<int>(T.components.size()) != n)
        throw std::invalid_argument("transport_deficit: component count differs from dimension");
    auto integrand = [&](const Vector& y) {
        Vector score = mu.grad_log(y);
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            auto loc = T.components[i]->at_image(y(i));
            if (!(loc.d1 > 0.0))
                throw std::runtime_error("transport_deficit: non-increasing component " +
                                         std::to_string(i));
            double v = loc.d1 * score(i) + loc.d2 / loc.d1;
            s += 0.5 * v * v - 0.5 - std::log(loc.d1);
        }
        return s;
    };
    Estimate psi = integrate(integrand, mu, grid);
    EntropyValue h = relative_entropy(mu, Reference::lebesgue_measure(), grid);
    return {psi.value, h.value - gaussian_entropy_lebesgue(n), psi.error + h.error};
}

}  // namespace intrinsic
