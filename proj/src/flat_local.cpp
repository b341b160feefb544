#include "intrinsic/flat_local.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace intrinsic {

namespace {

struct Component {
    double w;
    Vector a;
    Matrix S;
};

std::vector<Component> components(const DensityModel& f) {
    std::vector<Component> out;
    if (f.gaussian()) {
        out.push_back({1.0, f.gaussian()->mean, f.gaussian()->covariance});
        return out;
    }
    if (f.kind() != DensityKind::mixture)
        throw std::invalid_argument("flat local suite: f must be Gaussian or a Gaussian mixture");
    const auto& w = f.mixture_weights();
    const auto& c = f.mixture_components();
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (!c[k].gaussian())
            throw std::invalid_argument("flat local suite: mixture components must be Gaussian");
        out.push_back({w[k], c[k].gaussian()->mean, c[k].gaussian()->covariance});
    }
    return out;
}

double log_normal(const Vector& x, const Vector& a, const Matrix& K) {
    Eigen::LLT<Matrix> llt(K);
    Vector d = x - a;
    double quad = d.dot(llt.solve(d));
    double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (quad + logdet + x.size() * std::log(2.0 * std::numbers::pi));
}

Matrix sqrt_factor(const Matrix& C) {
    Eigen::LLT<Matrix> llt(C);
    if (llt.info() != Eigen::Success) return sym_sqrt_psd(C);
    return llt.matrixL();
}

}  // namespace

FlatPosterior flat_posterior(const FlatFunction& f, const Vector& x, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("flat_posterior: T must be positive");
    const int n = static_cast<int>(x.size());
    const Matrix I = Matrix::Identity(n, n);
    FlatPosterior post;
    if (!f) {
        post.weights = {1.0};
        post.means = {x};
        post.covariances = {T * I};
        post.mean = x;
        post.covariance = T * I;
        return post;
    }
    if (f->dim() != n) throw std::invalid_argument("flat_posterior: dimension mismatch");
    std::vector<Component> comp = components(*f);
    std::vector<double> logw;
    double lmax = -std::numeric_limits<double>::infinity();
    for (const Component& c : comp) {
        Matrix K = c.S + T * I;
        Matrix Kinv = sym_inverse(K);
        logw.push_back(std::log(c.w) + log_normal(x, c.a, K));
        lmax = std::max(lmax, logw.back());
        post.means.push_back(T * Kinv * c.a + c.S * Kinv * x);
        post.covariances.push_back(symmetrize(T * c.S * Kinv));
    }
    double z = 0.0;
    for (double l : logw) z += std::exp(l - lmax);
    post.log_PTf = lmax + std::log(z);
    post.mean = Vector::Zero(n);
    Matrix second = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < comp.size(); ++k) {
        double p = std::exp(logw[k] - post.log_PTf);
        post.weights.push_back(p);
        post.mean += p * post.means[k];
        second += p * (post.covariances[k] + post.means[k] * post.means[k].transpose());
    }
    post.covariance = symmetrize(second - post.mean * post.mean.transpose());
    return post;
}

double flat_log_PTf(const FlatFunction& f, const Vector& x, double T) {
    return flat_posterior(f, x, T).log_PTf;
}

FlatLocalResult flat_local_lsi(const FlatFunction& f, const Vector& x, double T, int m) {
    const int n = static_cast<int>(x.size());
    const Matrix I = Matrix::Identity(n, n);
    FlatPosterior post = flat_posterior(f, x, T);
    FlatLocalResult r;
    Vector dm = post.mean - x;
    r.c = (post.covariance.trace() + dm.squaredNorm()) / (T * T) - n / T;
    r.hess_log_PTf = post.covariance / (T * T) - I / T;
    r.lower_matrix = symmetrize(post.covariance / T);

    if (!f) {
        r.upper_matrix = I;
        r.entropy = 0.0;
    } else if (f->gaussian()) {
        const Matrix& S = f->gaussian()->covariance;
        r.upper_matrix = symmetrize(I + T * sym_inverse(S));
        const Matrix& C = post.covariances[0];
        r.entropy = 0.5 * (C.trace() / T + dm.squaredNorm() / T - n + n * std::log(T) -
                           log_det_sym(C));
    } else {
        // 𝔼_μ log f and 𝔼_μ ∇²log f component by component, with an m−2 companion rule.
        r.estimator = "quadrature";
        auto moments = [&](int pts, Matrix& hess_mean) {
            double log_mean = 0.0;
            hess_mean = Matrix::Zero(n, n);
            for (std::size_t k = 0; k < post.weights.size(); ++k) {
                QuadratureGrid g = QuadratureGrid::hermite(n, pts, post.means[k],
                                                           sqrt_factor(post.covariances[k]));
                const Vector& w = g.reference_weights();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    Vector z = g.nodes().col(static_cast<Eigen::Index>(i));
                    double wi = post.weights[k] * w(static_cast<Eigen::Index>(i));
                    log_mean += wi * f->log_value(z);
                    hess_mean += wi * f->hess_log(z);
                }
            }
            return log_mean;
        };
        Matrix hm, hm_coarse;
        double lm = moments(m, hm);
        double lm_coarse = moments(m - 2, hm_coarse);
        r.entropy = lm - post.log_PTf;
        r.entropy_error = std::abs(lm - lm_coarse);
        r.upper_matrix = symmetrize(I - T * hm);
    }
    const double base = 0.5 * T * r.c;
    r.upper = base + 0.5 * log_det_sym(r.upper_matrix);
    r.lower = base - 0.5 * log_det_sym(r.lower_matrix);
    r.upper_dim = base + 0.5 * n * std::log(r.upper_matrix.trace() / n);
    r.lower_dim = base - 0.5 * n * std::log(r.lower_matrix.trace() / n);
    return r;
}

FlatHamilton flat_hamilton(const FlatFunction& f, const Vector& x, double T) {
    const int n = static_cast<int>(x.size());
    FlatPosterior post = flat_posterior(f, x, T);
    Matrix m = Matrix::Identity(n, n) / T - post.covariance / (T * T);
    FlatHamilton h;
    h.max_eig = max_eigenvalue(m);
    h.margin = min_eigenvalue(post.covariance) / (T * T);
    h.li_yau_lhs = m.trace();
    h.li_yau_margin = post.covariance.trace() / (T * T);
    auto logP = [&](const Vector& y) { return flat_log_PTf(f, y, T); };
    Matrix fd = symmetrize(fd_hessian(logP, x, 1e-3 * std::sqrt(T)));
    h.fd_max_eig = max_eigenvalue(-fd);
    return h;
}

double flat_commutation_residual(const SpaceForm& space, const RadialFunction& f, double T,
                                 const Vector& x, int m) {
    if (space.model() != Model::flat)
        throw std::invalid_argument("flat_commutation_residual: flat space required");
    const int n = space.dim();
    HeatSemigroup sg(space, T);
    SemigroupJet jet = semigroup_jet(sg, f, x);
    QuadratureGrid g = QuadratureGrid::hermite(n, m, x, std::sqrt(T) * Matrix::Identity(n, n));
    Matrix PT_hess = Matrix::Zero(n, n);
    const Vector& w = g.reference_weights();
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vector y = g.nodes().col(static_cast<Eigen::Index>(i));
        Vector d = y - f.center;
        double r = d.norm();
        Vector dir = r > 0.0 ? Vector(d / r) : Vector(Vector::Unit(n, 0));
        PT_hess += w(static_cast<Eigen::Index>(i)) *
                   radial_hessian(space, r, f.profile.d1(r), f.profile.d2(r), dir);
    }
    // frame_at is the identity frame on flat space.
    return (jet.hess - PT_hess).cwiseAbs().maxCoeff();
}

}  // namespace intrinsic
