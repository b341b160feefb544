#include "intrinsic/measures.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace intrinsic {

std::string to_string(DensityKind k) {
    switch (k) {
        case DensityKind::gaussian: return "gaussian";
        case DensityKind::mixture: return "mixture";
        case DensityKind::product: return "product";
        case DensityKind::custom: return "custom-analytic";
    }
    return "unknown";
}

// ---------------------------------------------------------------- grids

namespace {

void check_grid_dim(int dim) {
    if (dim < 1 || dim > 4)
        throw std::invalid_argument("tensor quadrature supports 1 ≤ n ≤ 4, got n = " +
                                    std::to_string(dim));
}

template <class Fn>
void tensor_loop(int dim, int m, Fn&& fn) {
    std::vector<int> idx(dim, 0);
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(m);
    for (std::size_t s = 0; s < total; ++s) {
        fn(s, idx);
        for (int d = 0; d < dim; ++d) {
            if (++idx[d] < m) break;
            idx[d] = 0;
        }
    }
}

}  // namespace

QuadratureGrid QuadratureGrid::hermite(int dim, int m, const Vector& center, const Matrix& scale) {
    check_grid_dim(dim);
    if (center.size() != dim || scale.rows() != dim || scale.cols() != dim)
        throw std::invalid_argument("QuadratureGrid::hermite: shape mismatch");
    QuadratureGrid g;
    g.rule_ = RuleKind::gauss_hermite;
    g.dim_ = dim;
    g.m_ = m;
    g.center_ = center;
    g.scale_ = scale;
    Rule1D r = gauss_hermite_rule(m);
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(m);
    g.nodes_.resize(dim, static_cast<Eigen::Index>(total));
    g.leb_.resize(static_cast<Eigen::Index>(total));
    g.ref_.resize(static_cast<Eigen::Index>(total));
    const double absdet = std::abs(scale.determinant());
    if (!(absdet > 0.0)) throw std::invalid_argument("QuadratureGrid::hermite: singular scale");
    const double log_norm = 0.5 * dim * std::log(2.0 * M_PI) + std::log(absdet);
    tensor_loop(dim, m, [&](std::size_t s, const std::vector<int>& idx) {
        Vector z(dim);
        double w = 1.0;
        for (int d = 0; d < dim; ++d) {
            z(d) = r.nodes[idx[d]];
            w *= r.weights[idx[d]];
        }
        const auto col = static_cast<Eigen::Index>(s);
        g.nodes_.col(col) = center + scale * z;
        g.ref_(col) = w;
        g.leb_(col) = w * std::exp(0.5 * z.squaredNorm() + log_norm);
    });
    return g;
}

QuadratureGrid QuadratureGrid::standard_hermite(int dim, int m) {
    return hermite(dim, m, Vector::Zero(dim), Matrix::Identity(dim, dim));
}

QuadratureGrid QuadratureGrid::legendre(const Box& box, int m) {
    const int dim = static_cast<int>(box.lo.size());
    check_grid_dim(dim);
    QuadratureGrid g;
    g.rule_ = RuleKind::gauss_legendre_box;
    g.dim_ = dim;
    g.m_ = m;
    g.box_ = box;
    g.center_ = 0.5 * (box.lo + box.hi);
    g.scale_ = (0.5 * (box.hi - box.lo)).asDiagonal();
    std::vector<Rule1D> rules;
    double volume = 1.0;
    for (int d = 0; d < dim; ++d) {
        if (!(box.hi(d) > box.lo(d))) throw std::invalid_argument("legendre grid: empty box");
        rules.push_back(gauss_legendre_rule(m, box.lo(d), box.hi(d)));
        volume *= box.hi(d) - box.lo(d);
    }
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(m);
    g.nodes_.resize(dim, static_cast<Eigen::Index>(total));
    g.leb_.resize(static_cast<Eigen::Index>(total));
    g.ref_.resize(static_cast<Eigen::Index>(total));
    tensor_loop(dim, m, [&](std::size_t s, const std::vector<int>& idx) {
        double w = 1.0;
        const auto col = static_cast<Eigen::Index>(s);
        for (int d = 0; d < dim; ++d) {
            g.nodes_(d, col) = rules[d].nodes[idx[d]];
            w *= rules[d].weights[idx[d]];
        }
        g.leb_(col) = w;
        g.ref_(col) = w / volume;
    });
    return g;
}

QuadratureGrid QuadratureGrid::coarser() const {
    int m = std::max(1, m_ - 2);
    if (rule_ == RuleKind::gauss_hermite) return hermite(dim_, m, center_, scale_);
    return legendre(box_, m);
}

// ---------------------------------------------------------------- densities

DensityModel::DensityModel(std::shared_ptr<const Impl> impl, DensityKind kind, Vector mean_hint,
                           Matrix cov_hint)
    : impl_(std::move(impl)), kind_(kind), mean_(std::move(mean_hint)), cov_(std::move(cov_hint)) {}

double DensityModel::value(const Vector& x) const { return std::exp(impl_->log_value(x)); }

Vector DensityModel::grad(const Vector& x) const { return value(x) * impl_->grad_log(x); }

Matrix DensityModel::hess(const Vector& x) const {
    Vector g = impl_->grad_log(x);
    return value(x) * (impl_->hess_log(x) + g * g.transpose());
}

DensityModel& DensityModel::with_gaussian(GaussianSpec g) {
    gaussian_ = std::move(g);
    return *this;
}
DensityModel& DensityModel::with_mixture(std::vector<double> w, std::vector<DensityModel> c) {
    mix_w_ = std::move(w);
    mix_c_ = std::move(c);
    return *this;
}
DensityModel& DensityModel::with_support(Box b) {
    support_ = std::move(b);
    return *this;
}

QuadratureGrid DensityModel::default_grid(int m) const {
    if (support_) return QuadratureGrid::legendre(*support_, m);
    Eigen::LLT<Matrix> llt(cov_);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("default_grid: covariance hint not positive definite");
    Matrix L = llt.matrixL();
    if (kind_ != DensityKind::gaussian) L *= 1.25;
    return QuadratureGrid::hermite(dim(), m, mean_, L);
}

namespace {

struct GaussianImpl final : DensityModel::Impl {
    Vector mean;
    Matrix precision;
    double log_norm;
    int dim() const override { return static_cast<int>(mean.size()); }
    double log_value(const Vector& x) const override {
        Vector d = x - mean;
        return log_norm - 0.5 * d.dot(precision * d);
    }
    Vector grad_log(const Vector& x) const override { return -precision * (x - mean); }
    Matrix hess_log(const Vector&) const override { return -precision; }
};

struct MixtureImpl final : DensityModel::Impl {
    std::vector<double> log_w;
    std::vector<DensityModel> comps;
    int dim() const override { return comps.front().dim(); }
    std::vector<double> responsibilities(const Vector& x, double& lse) const {
        std::vector<double> l(comps.size());
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < comps.size(); ++k) {
            l[k] = log_w[k] + comps[k].log_value(x);
            mx = std::max(mx, l[k]);
        }
        double s = 0.0;
        for (double v : l) s += std::exp(v - mx);
        lse = mx + std::log(s);
        for (double& v : l) v = std::exp(v - lse);
        return l;
    }
    double log_value(const Vector& x) const override {
        double lse;
        responsibilities(x, lse);
        return lse;
    }
    Vector grad_log(const Vector& x) const override {
        double lse;
        auto r = responsibilities(x, lse);
        Vector g = Vector::Zero(dim());
        for (std::size_t k = 0; k < comps.size(); ++k) g += r[k] * comps[k].grad_log(x);
        return g;
    }
    Matrix hess_log(const Vector& x) const override {
        double lse;
        auto r = responsibilities(x, lse);
        const int n = dim();
        Vector g = Vector::Zero(n);
        Matrix h = Matrix::Zero(n, n);
        for (std::size_t k = 0; k < comps.size(); ++k) {
            Vector gk = comps[k].grad_log(x);
            g += r[k] * gk;
            h += r[k] * (comps[k].hess_log(x) + gk * gk.transpose());
        }
        return h - g * g.transpose();
    }
};

struct ProductImpl final : DensityModel::Impl {
    std::vector<DensityModel> factors;
    std::vector<int> offsets;
    int total = 0;
    int dim() const override { return total; }
    double log_value(const Vector& x) const override {
        double s = 0.0;
        for (std::size_t k = 0; k < factors.size(); ++k)
            s += factors[k].log_value(x.segment(offsets[k], factors[k].dim()));
        return s;
    }
    Vector grad_log(const Vector& x) const override {
        Vector g(total);
        for (std::size_t k = 0; k < factors.size(); ++k) {
            int d = factors[k].dim();
            g.segment(offsets[k], d) = factors[k].grad_log(x.segment(offsets[k], d));
        }
        return g;
    }
    Matrix hess_log(const Vector& x) const override {
        Matrix h = Matrix::Zero(total, total);
        for (std::size_t k = 0; k < factors.size(); ++k) {
            int d = factors[k].dim();
            h.block(offsets[k], offsets[k], d, d) = factors[k].hess_log(x.segment(offsets[k], d));
        }
        return h;
    }
};

struct CustomImpl final : DensityModel::Impl {
    CustomDensity spec;
    int dim() const override { return spec.dim; }
    double log_value(const Vector& x) const override {
        double v = spec.value(x);
        if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
        return std::log(v);
    }
    Vector grad_log(const Vector& x) const override { return spec.grad(x) / spec.value(x); }
    Matrix hess_log(const Vector& x) const override {
        double v = spec.value(x);
        Vector g = spec.grad(x) / v;
        return spec.hess(x) / v - g * g.transpose();
    }
};

struct PushforwardImpl final : DensityModel::Impl {
    DensityModel base;
    Matrix A;
    double log_abs_det;
    int dim() const override { return base.dim(); }
    double log_value(const Vector& x) const override {
        return log_abs_det + base.log_value(A * x);
    }
    Vector grad_log(const Vector& x) const override {
        return A.transpose() * base.grad_log(A * x);
    }
    Matrix hess_log(const Vector& x) const override {
        return A.transpose() * base.hess_log(A * x) * A;
    }
};

}  // namespace

DensityModel make_gaussian(const GaussianSpec& spec) {
    const auto n = spec.mean.size();
    if (n < 1 || spec.covariance.rows() != n || spec.covariance.cols() != n)
        throw std::invalid_argument("make_gaussian: shape mismatch");
    if (asymmetry(spec.covariance) > 1e-12)
        throw std::invalid_argument("make_gaussian: covariance not symmetric");
    double lam = min_eigenvalue(spec.covariance);
    if (!(lam > 0.0))
        throw std::invalid_argument("make_gaussian: covariance not positive definite (eigenvalue " +
                                    std::to_string(lam) + ")");
    auto impl = std::make_shared<GaussianImpl>();
    impl->mean = spec.mean;
    impl->precision = symmetrize(sym_inverse(spec.covariance));
    impl->log_norm =
        -0.5 * static_cast<double>(n) * std::log(2.0 * M_PI) - 0.5 * log_det_sym(spec.covariance);
    DensityModel d(impl, DensityKind::gaussian, spec.mean, spec.covariance);
    d.with_gaussian(spec);
    return d;
}

DensityModel make_standard_gaussian(int n) {
    return make_gaussian({Vector::Zero(n), Matrix::Identity(n, n)});
}

DensityModel make_mixture(const std::vector<double>& weights,
                          const std::vector<DensityModel>& components) {
    if (weights.empty() || weights.size() != components.size())
        throw std::invalid_argument("make_mixture: weights/components mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("make_mixture: weights must be positive");
        total += w;
    }
    const int n = components.front().dim();
    auto impl = std::make_shared<MixtureImpl>();
    std::vector<double> w(weights.size());
    Vector mean = Vector::Zero(n);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (components[k].dim() != n) throw std::invalid_argument("make_mixture: dimension mismatch");
        w[k] = weights[k] / total;
        impl->log_w.push_back(std::log(w[k]));
        mean += w[k] * components[k].mean_hint();
    }
    Matrix cov = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        Vector d = components[k].mean_hint() - mean;
        cov += w[k] * (components[k].covariance_hint() + d * d.transpose());
    }
    impl->comps = components;
    DensityModel d(impl, DensityKind::mixture, mean, cov);
    d.with_mixture(w, components);
    return d;
}

DensityModel make_product(const std::vector<DensityModel>& factors) {
    if (factors.empty()) throw std::invalid_argument("make_product: no factors");
    auto impl = std::make_shared<ProductImpl>();
    impl->factors = factors;
    for (const auto& f : factors) {
        impl->offsets.push_back(impl->total);
        impl->total += f.dim();
    }
    const int n = impl->total;
    Vector mean(n);
    Matrix cov = Matrix::Zero(n, n);
    bool all_gauss = true;
    for (std::size_t k = 0; k < factors.size(); ++k) {
        int d = factors[k].dim(), o = impl->offsets[k];
        mean.segment(o, d) = factors[k].mean_hint();
        cov.block(o, o, d, d) = factors[k].covariance_hint();
        all_gauss = all_gauss && factors[k].gaussian().has_value();
    }
    DensityModel d(impl, DensityKind::product, mean, cov);
    if (all_gauss) d.with_gaussian({mean, cov});
    return d;
}

DensityModel make_custom(const CustomDensity& spec) {
    if (!spec.value || !spec.grad || !spec.hess)
        throw std::invalid_argument("make_custom: evaluators missing");
    if (spec.support.lo.size() != spec.dim || spec.support.hi.size() != spec.dim)
        throw std::invalid_argument("make_custom: support box missing");
    auto impl = std::make_shared<CustomImpl>();
    impl->spec = spec;
    Vector mean = 0.5 * (spec.support.lo + spec.support.hi);
    Vector half = 0.5 * (spec.support.hi - spec.support.lo);
    Matrix cov = (half / 3.0).array().square().matrix().asDiagonal();
    DensityModel d(impl, DensityKind::custom, mean, cov);
    d.with_support(spec.support);
    return d;
}

DensityModel pushforward_linear(const DensityModel& mu, const Matrix& A) {
    if (A.rows() != mu.dim() || A.cols() != mu.dim())
        throw std::invalid_argument("pushforward_linear: shape mismatch");
    const double det = A.determinant();
    if (std::abs(det) < 1e-12)
        throw std::invalid_argument("pushforward_linear: singular map (|det| = " +
                                    std::to_string(std::abs(det)) + ")");
    auto impl = std::make_shared<PushforwardImpl>();
    impl->base = mu;
    impl->A = A;
    impl->log_abs_det = std::log(std::abs(det));
    Matrix Ainv = A.inverse();
    Vector mean = Ainv * mu.mean_hint();
    Matrix cov = symmetrize(Ainv * mu.covariance_hint() * Ainv.transpose());
    DensityModel d(impl, mu.kind(), mean, cov);
    if (mu.gaussian())
        d.with_gaussian({Ainv * mu.gaussian()->mean,
                         symmetrize(Ainv * mu.gaussian()->covariance * Ainv.transpose())});
    if (mu.support()) {
        // The image of a box is not a box; use the bounding box of the mapped corners.
        const int n = mu.dim();
        Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
        Vector hi = -lo;
        for (int c = 0; c < (1 << n); ++c) {
            Vector corner(n);
            for (int i = 0; i < n; ++i)
                corner(i) = (c >> i) & 1 ? mu.support()->hi(i) : mu.support()->lo(i);
            Vector y = Ainv * corner;
            lo = lo.cwiseMin(y);
            hi = hi.cwiseMax(y);
        }
        d.with_support({lo, hi});
    }
    return d;
}

// ---------------------------------------------------------------- integration

namespace {

double grid_sum(const ScalarField& h, const QuadratureGrid& grid, const Vector& w) {
    std::vector<double> terms(grid.size());
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const auto col = static_cast<Eigen::Index>(s);
        double ws = w(col);
        if (ws == 0.0) {
            terms[s] = 0.0;
            continue;
        }
        double v = h(grid.nodes().col(col));
        terms[s] = ws * v;
    }
    return ordered_sum(terms);
}

Estimate with_companion(const std::function<double(const QuadratureGrid&)>& eval,
                        const QuadratureGrid& grid, double tolerance) {
    Estimate e;
    e.value = eval(grid);
    if (grid.points_per_axis() > 2) {
        double coarse = eval(grid.coarser());
        e.error = std::abs(e.value - coarse);
    }
    e.flagged = !(e.error <= tolerance * std::max(1.0, std::abs(e.value)));
    return e;
}

}  // namespace

Estimate integrate(const ScalarField& g, const DensityModel& mu, const QuadratureGrid& grid,
                   double tolerance) {
    if (grid.dim() != mu.dim()) throw std::invalid_argument("integrate: dimension mismatch");
    return with_companion(
        [&](const QuadratureGrid& gr) {
            return grid_sum(
                [&](const Vector& x) {
                    double lf = mu.log_value(x);
                    if (lf == -std::numeric_limits<double>::infinity()) return 0.0;
                    return g(x) * std::exp(lf);
                },
                gr, gr.lebesgue_weights());
        },
        grid, tolerance);
}

Estimate integrate_lebesgue(const ScalarField& h, const QuadratureGrid& grid, double tolerance) {
    return with_companion(
        [&](const QuadratureGrid& gr) { return grid_sum(h, gr, gr.lebesgue_weights()); }, grid,
        tolerance);
}

Estimate integrate_gaussian(const ScalarField& h, const QuadratureGrid& grid, double tolerance) {
    const bool standard = grid.rule() == RuleKind::gauss_hermite &&
                          grid.center().isZero(0.0) &&
                          grid.scale().isApprox(Matrix::Identity(grid.dim(), grid.dim()), 0.0);
    const int n = grid.dim();
    return with_companion(
        [&](const QuadratureGrid& gr) {
            if (standard) return grid_sum(h, gr, gr.reference_weights());
            return grid_sum(
                [&](const Vector& x) {
                    return h(x) * std::exp(-0.5 * x.squaredNorm() -
                                           0.5 * n * std::log(2.0 * M_PI));
                },
                gr, gr.lebesgue_weights());
        },
        grid, tolerance);
}

Vector fd_gradient(const ScalarField& f, const Vector& x, double h) {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

Matrix fd_hessian(const ScalarField& f, const Vector& x, double h) {
    const auto n = x.size();
    Matrix H(n, n);
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        H(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
        for (Eigen::Index j = 0; j < i; ++j) {
            Vector a = x, b = x, c = x, d = x;
            a(i) += h; a(j) += h;
            b(i) += h; b(j) -= h;
            c(i) -= h; c(j) += h;
            d(i) -= h; d(j) -= h;
            H(i, j) = H(j, i) = (f(a) - f(b) - f(c) + f(d)) / (4.0 * h * h);
        }
    }
    return H;
}

// ---------------------------------------------------------------- discrete spaces

DiscreteProductSpace::DiscreteProductSpace(int base_size, int factors,
                                           std::vector<double> base_weights)
    : k_(base_size), n_(factors), w_(std::move(base_weights)) {
    if (k_ < 2 || n_ < 1) throw std::invalid_argument("DiscreteProductSpace: need k ≥ 2, n ≥ 1");
    if (static_cast<int>(w_.size()) != k_)
        throw std::invalid_argument("DiscreteProductSpace: weight count differs from base size");
    double s = 0.0;
    for (double w : w_) {
        if (!(w > 0.0)) throw std::invalid_argument("DiscreteProductSpace: weights must be positive");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteProductSpace: weights must sum to 1");
    if (n_ * std::log2(static_cast<double>(k_)) > 24.0 + 1e-12)
        throw std::invalid_argument("DiscreteProductSpace: more than 2^24 states");
    states_ = 1;
    for (int i = 0; i < n_; ++i) {
        strides_.push_back(states_);
        states_ *= static_cast<std::size_t>(k_);
    }
}

DiscreteProductSpace DiscreteProductSpace::hamming_cube(int n) {
    return DiscreteProductSpace(2, n, {0.5, 0.5});
}

int DiscreteProductSpace::digit(std::size_t s, int i) const {
    return static_cast<int>((s / strides_[i]) % static_cast<std::size_t>(k_));
}

std::size_t DiscreteProductSpace::with_digit(std::size_t s, int i, int d) const {
    int cur = digit(s, i);
    return s + (static_cast<std::size_t>(d) - static_cast<std::size_t>(cur)) * strides_[i];
}

double DiscreteProductSpace::probability(std::size_t s) const {
    double p = 1.0;
    for (int i = 0; i < n_; ++i) p *= w_[digit(s, i)];
    return p;
}

}  // namespace intrinsic
