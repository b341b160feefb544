#include "intrinsic/info_functionals.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace intrinsic {

double gaussian_entropy_lebesgue(int n) { return -0.5 * n * std::log(2.0 * M_PI * M_E); }

namespace {

std::string node_string(const Vector& x) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
    os << ")";
    return os.str();
}

double entropy_on_grid(const DensityModel& mu, const Reference& nu, const QuadratureGrid& grid) {
    std::vector<double> terms(grid.size());
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const auto col = static_cast<Eigen::Index>(s);
        Vector x = grid.nodes().col(col);
        double lf = mu.log_value(x);
        if (lf == -std::numeric_limits<double>::infinity()) {
            terms[s] = 0.0;
            continue;
        }
        double lg = nu.lebesgue ? 0.0 : nu.density.log_value(x);
        double t = grid.lebesgue_weights()(col) * std::exp(lf) * (lf - lg);
        if (!std::isfinite(t))
            throw std::runtime_error("relative_entropy: non-finite integrand at node " +
                                     node_string(x));
        terms[s] = t;
    }
    return ordered_sum(terms);
}

Matrix fisher_on_grid(const DensityModel& mu, const Reference& nu, const QuadratureGrid& grid) {
    const int n = mu.dim();
    Matrix acc = Matrix::Zero(n, n);
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const auto col = static_cast<Eigen::Index>(s);
        Vector x = grid.nodes().col(col);
        double lf = mu.log_value(x);
        if (lf == -std::numeric_limits<double>::infinity()) continue;
        Vector score = mu.grad_log(x);
        if (!nu.lebesgue) score -= nu.density.grad_log(x);
        double w = grid.lebesgue_weights()(col) * std::exp(lf);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) acc(i, j) += w * score(i) * score(j);
        if (!acc.allFinite())
            throw std::runtime_error("fisher_matrix: non-finite integrand at node " + node_string(x));
    }
    return acc;
}

}  // namespace

EntropyValue relative_entropy(const DensityModel& mu, const Reference& nu,
                              const QuadratureGrid& grid) {
    const auto& g1 = mu.gaussian();
    if (g1 && nu.lebesgue)
        return {-0.5 * log_det_sym(2.0 * M_PI * M_E * g1->covariance), "analytic", 0.0};
    if (g1 && !nu.lebesgue && nu.density.gaussian()) {
        const auto& g2 = *nu.density.gaussian();
        Matrix P2 = sym_inverse(g2.covariance);
        Vector d = g2.mean - g1->mean;
        double v = 0.5 * ((P2 * g1->covariance).trace() + d.dot(P2 * d) -
                          static_cast<double>(mu.dim()) + log_det_sym(g2.covariance) -
                          log_det_sym(g1->covariance));
        return {v, "analytic", 0.0};
    }
    EntropyValue e;
    e.estimator = "quadrature";
    e.value = entropy_on_grid(mu, nu, grid);
    if (grid.points_per_axis() > 2) e.error = std::abs(e.value - entropy_on_grid(mu, nu, grid.coarser()));
    return e;
}

EntropyValue relative_entropy(const DensityModel& mu, const Reference& nu) {
    return relative_entropy(mu, nu, mu.default_grid());
}

FisherMatrix fisher_matrix(const DensityModel& mu, const Reference& nu, const QuadratureGrid& grid) {
    const auto& g1 = mu.gaussian();
    FisherMatrix out;
    if (g1 && (nu.lebesgue || nu.density.gaussian())) {
        Matrix P1 = sym_inverse(g1->covariance);
        if (nu.lebesgue) {
            out.matrix = symmetrize(P1);
        } else {
            const auto& g2 = *nu.density.gaussian();
            Matrix P2 = sym_inverse(g2.covariance);
            Matrix D = P2 - P1;
            Vector b = P2 * (g1->mean - g2.mean);
            out.matrix = symmetrize(D * g1->covariance * D + b * b.transpose());
        }
        out.trace = out.matrix.trace();
        return out;
    }
    out.estimator = "quadrature";
    Matrix m = fisher_on_grid(mu, nu, grid);
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asymmetry(m) > 1e-8 * scale)
        throw std::runtime_error("fisher_matrix: asymmetry " + std::to_string(asymmetry(m)) +
                                 " indicates quadrature failure");
    out.matrix = symmetrize(m);
    out.trace = out.matrix.trace();
    if (grid.points_per_axis() > 2)
        out.error = (out.matrix - symmetrize(fisher_on_grid(mu, nu, grid.coarser())))
                        .cwiseAbs()
                        .maxCoeff();
    return out;
}

FisherMatrix fisher_matrix(const DensityModel& mu, const Reference& nu) {
    return fisher_matrix(mu, nu, mu.default_grid());
}

Estimate scalar_fisher(const DensityModel& mu, const Reference& nu, const QuadratureGrid& grid) {
    // ∫ |∇r|²/r dν with r = dμ/dν, assembled from value and gradient evaluators.
    return integrate_lebesgue(
        [&](const Vector& x) {
            double f = mu.value(x);
            if (f == 0.0) return 0.0;
            Vector gf = mu.grad(x);
            if (nu.lebesgue) return gf.squaredNorm() / f;
            double g = nu.density.value(x);
            Vector gg = nu.density.grad(x);
            Vector grad_r = (gf * g - f * gg) / (g * g);
            double r = f / g;
            return grad_r.squaredNorm() / r * g;
        },
        grid, 1e-6);
}

EntropyValue entropy_functional(const std::vector<double>& f, const std::vector<double>& pi) {
    if (f.size() != pi.size()) throw std::invalid_argument("entropy_functional: size mismatch");
    std::vector<double> a(f.size()), b(f.size());
    for (std::size_t s = 0; s < f.size(); ++s) {
        if (f[s] < 0.0) throw std::invalid_argument("entropy_functional: negative value");
        a[s] = f[s] > 0.0 ? pi[s] * f[s] * std::log(f[s]) : 0.0;
        b[s] = pi[s] * f[s];
    }
    double mean = ordered_sum(b);
    if (!(mean > 0.0)) throw std::invalid_argument("entropy_functional: f identically zero");
    return {std::max(0.0, ordered_sum(a) - mean * std::log(mean)), "enumeration", 0.0};
}

EntropyValue entropy_functional(const ScalarField& f, const QuadratureGrid& grid) {
    Estimate flogf = integrate_gaussian(
        [&](const Vector& x) {
            double v = f(x);
            if (v < 0.0) throw std::invalid_argument("entropy_functional: negative value");
            return v > 0.0 ? v * std::log(v) : 0.0;
        },
        grid);
    Estimate mean = integrate_gaussian(f, grid);
    if (!(mean.value > 0.0)) throw std::invalid_argument("entropy_functional: f identically zero");
    return {flogf.value - mean.value * std::log(mean.value), "quadrature",
            flogf.error + mean.error * (1.0 + std::abs(std::log(mean.value)))};
}

Estimate lp_norm(const ScalarField& u, double p, Weight weight, const QuadratureGrid& grid) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be ≥ 1");
    auto h = [&](const Vector& x) { return std::pow(std::abs(u(x)), p); };
    Estimate e = weight == Weight::gaussian ? integrate_gaussian(h, grid)
                                            : integrate_lebesgue(h, grid);
    Estimate out;
    out.value = std::pow(e.value, 1.0 / p);
    out.error = e.value > 0.0 ? out.value * e.error / (p * e.value) : e.error;
    out.flagged = e.value > 0.0 ? e.error > 0.1 * e.value : false;
    return out;
}

Matrix weighted_second_moment_matrix(const ScalarField& u, const QuadratureGrid& grid) {
    const int n = grid.dim();
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double v = integrate_gaussian(
                           [&](const Vector& x) {
                               double ux = u(x);
                               return x(i) * x(j) * ux * ux;
                           },
                           grid)
                           .value;
            m(i, j) = m(j, i) = v;
        }
    return m;
}

double dirichlet_form_coordinate(const std::vector<double>& f, const std::vector<double>& g, int i,
                                 const DiscreteProductSpace& space, double c_conv) {
    if (space.base_size() != 2)
        throw std::invalid_argument("dirichlet_form_coordinate: flip convention needs two-point factors");
    if (f.size() != space.states() || g.size() != space.states())
        throw std::invalid_argument("dirichlet_form_coordinate: function size mismatch");
    if (i < 0 || i >= space.factors()) throw std::out_of_range("dirichlet_form_coordinate: coordinate");
    std::vector<double> terms(space.states());
    const std::size_t stride = space.stride(i);
    for (std::size_t s = 0; s < space.states(); ++s) {
        std::size_t t = space.digit(s, i) == 0 ? s + stride : s - stride;
        terms[s] = space.probability(s) * (f[s] - f[t]) * (g[s] - g[t]);
    }
    return c_conv * c_conv * ordered_sum(terms);
}

LogDetChain log_det_chain(const Matrix& info) {
    const auto n = info.rows();
    LogDetChain c;
    c.log_det = 0.5 * log_det_sym(info);
    for (Eigen::Index k = 0; k < n; ++k) c.log_diag += 0.5 * std::log(info(k, k));
    c.log_trace = 0.5 * static_cast<double>(n) * std::log(info.trace() / static_cast<double>(n));
    return c;
}

}  // namespace intrinsic
