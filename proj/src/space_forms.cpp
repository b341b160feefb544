#include "intrinsic/space_forms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "intrinsic/numerics.hpp"

namespace intrinsic {

namespace {

// Heap-free vectors for the path loops (ambient dimension ≤ 5).
using SVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 5, 1>;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

template <class V>
double inner_t(Model m, const V& a, const V& b) {
    double s = a.dot(b);
    if (m == Model::hyperboloid) s -= 2.0 * a(0) * b(0);
    return s;
}

template <class V>
V exp_t(Model m, double R, const V& x, const V& v) {
    if (m == Model::flat) return V(x + v);
    double nv = std::sqrt(std::max(0.0, inner_t(m, v, v)));
    if (nv == 0.0) return x;
    double th = nv / R;
    if (m == Model::sphere) return V(std::cos(th) * x + (R * std::sin(th) / nv) * v);
    return V(std::cosh(th) * x + (R * std::sinh(th) / nv) * v);
}

template <class V>
V transport_t(Model m, double R, const V& x, const V& y, const V& w) {
    if (m == Model::flat) return w;
    if (m == Model::sphere) return V(w - (y.dot(w) / (R * R + x.dot(y))) * (x + y));
    return V(w + (inner_t(m, y, w) / (R * R - inner_t(m, x, y))) * (x + y));
}

template <class V>
V project_point_t(Model m, double R, const V& x) {
    if (m == Model::flat) return x;
    if (m == Model::sphere) return V(R * x / x.norm());
    V y = x;
    y(0) = std::sqrt(R * R + x.tail(x.size() - 1).squaredNorm());
    return y;
}

template <class V>
V project_tangent_t(Model m, double R, const V& x, const V& v) {
    if (m == Model::flat) return v;
    if (m == Model::sphere) return V(v - (x.dot(v) / (R * R)) * x);
    return V(v + (inner_t(m, x, v) / (R * R)) * x);
}

template <class V>
double constraint_t(Model m, double R, const V& x) {
    if (m == Model::flat) return 0.0;
    if (m == Model::sphere) return std::abs(x.squaredNorm() - R * R) / (R * R);
    return std::abs(inner_t(m, x, x) + R * R) / (R * R);
}

template <class V>
double distance_t(Model m, double R, const V& x, const V& y) {
    V d = x - y;
    if (m == Model::flat) return d.norm();
    if (m == Model::sphere) return 2.0 * R * std::asin(std::min(1.0, d.norm() / (2.0 * R)));
    return 2.0 * R * std::asinh(std::sqrt(std::max(0.0, inner_t(m, d, d))) / (2.0 * R));
}

// Unit direction at x pointing away from o, and d(o, x).
template <class V>
double radial_direction_t(Model m, double R, const V& o, const V& x, V& dir) {
    double d = distance_t(m, R, o, x);
    dir = V::Zero(x.size());
    if (d < 1e-14) return d;
    V u;
    if (m == Model::flat) {
        u = x - o;
    } else if (m == Model::sphere) {
        // −log_x(o) direction: −(o − (⟨x,o⟩/R²)x)
        u = (x.dot(o) / (R * R)) * x - o;
    } else {
        u = -(o + (inner_t(m, x, o) / (R * R)) * x);
    }
    double nu = std::sqrt(std::max(0.0, inner_t(m, u, u)));
    if (nu == 0.0) return d;
    dir = u / nu;
    return d;
}

template <class V>
void gram_schmidt_t(Model m, double R, const V& x, std::vector<V>& E) {
    for (std::size_t i = 0; i < E.size(); ++i) {
        V w = project_tangent_t(m, R, x, E[i]);
        for (std::size_t j = 0; j < i; ++j) w -= inner_t(m, E[j], w) * E[j];
        E[i] = w / std::sqrt(inner_t(m, w, w));
    }
}

}  // namespace

std::string to_string(Model m) {
    switch (m) {
        case Model::flat: return "flat";
        case Model::sphere: return "sphere";
        case Model::hyperboloid: return "hyperboloid";
    }
    return "?";
}

// ---------------------------------------------------------------- SpaceForm

SpaceForm::SpaceForm(int n, double kappa) : n_(n), kappa_(kappa) {
    if (kappa == 0.0) {
        if (n < 1 || n > 4) throw std::invalid_argument("SpaceForm: flat space supports n ≤ 4");
        model_ = Model::flat;
        R_ = std::numeric_limits<double>::infinity();
    } else if (kappa > 0.0) {
        if (n != 2) throw std::invalid_argument("SpaceForm: spheres are supported for n = 2 only");
        model_ = Model::sphere;
        R_ = 1.0 / std::sqrt(kappa);
    } else {
        if (n != 2 && n != 3)
            throw std::invalid_argument("SpaceForm: hyperbolic space is supported for n ∈ {2, 3}");
        model_ = Model::hyperboloid;
        R_ = 1.0 / std::sqrt(-kappa);
    }
}

std::string SpaceForm::name() const {
    std::string base = model_ == Model::flat ? "R" : model_ == Model::sphere ? "S" : "H";
    std::string s = base + std::to_string(n_);
    if (model_ != Model::flat && std::abs(kappa_) != 1.0) s += "(k=" + fmt(kappa_) + ")";
    return s;
}

Vector SpaceForm::origin() const {
    Vector o = Vector::Zero(ambient_dim());
    if (model_ != Model::flat) o(0) = R_;
    return o;
}

Matrix SpaceForm::origin_frame() const {
    Matrix E = Matrix::Zero(ambient_dim(), n_);
    int off = model_ == Model::flat ? 0 : 1;
    for (int i = 0; i < n_; ++i) E(i + off, i) = 1.0;
    return E;
}

Vector SpaceForm::point_at_distance(double rho) const {
    return exp_map(origin(), rho * origin_frame().col(0));
}

Matrix SpaceForm::frame_at(const Vector& x) const {
    Vector o = origin();
    Matrix E = origin_frame();
    if (distance(o, x) < 1e-15) return E;
    for (int i = 0; i < n_; ++i) E.col(i) = parallel_transport(o, x, E.col(i));
    return E;
}

double SpaceForm::ambient_inner(const Vector& u, const Vector& v) const { return inner_t(model_, u, v); }
double SpaceForm::norm(const Vector& v) const { return std::sqrt(std::max(0.0, ambient_inner(v, v))); }

Vector SpaceForm::exp_map(const Vector& x, const Vector& v) const { return exp_t(model_, R_, x, v); }

Vector SpaceForm::log_map(const Vector& x, const Vector& y) const {
    double d = distance(x, y);
    if (d == 0.0) return Vector::Zero(x.size());
    if (model_ == Model::flat) return y - x;
    if (model_ == Model::sphere && d > std::numbers::pi * R_ * (1.0 - 1e-9))
        throw std::domain_error("log_map: points are (nearly) antipodal");
    Vector u = project_tangent(x, y - x);
    double nu = norm(u);
    if (!(nu > 0.0)) throw std::domain_error("log_map: ill-conditioned direction");
    return (d / nu) * u;
}

Vector SpaceForm::parallel_transport(const Vector& x, const Vector& y, const Vector& w) const {
    if (model_ == Model::sphere && distance(x, y) > std::numbers::pi * R_ * (1.0 - 1e-9))
        throw std::domain_error("parallel_transport: points are (nearly) antipodal");
    return transport_t(model_, R_, x, y, w);
}

double SpaceForm::distance(const Vector& x, const Vector& y) const { return distance_t(model_, R_, x, y); }
Vector SpaceForm::project_point(const Vector& x) const { return project_point_t(model_, R_, x); }
Vector SpaceForm::project_tangent(const Vector& x, const Vector& v) const {
    return project_tangent_t(model_, R_, x, v);
}
double SpaceForm::constraint_violation(const Vector& x) const { return constraint_t(model_, R_, x); }

double SpaceForm::tangency_violation(const Vector& x, const Vector& v) const {
    if (model_ == Model::flat) return 0.0;
    return std::abs(ambient_inner(x, v)) / R_;
}

Matrix SpaceForm::orthonormalize(const Vector& x, const Matrix& frame) const {
    std::vector<Vector> E;
    for (int i = 0; i < frame.cols(); ++i) E.push_back(frame.col(i));
    gram_schmidt_t(model_, R_, x, E);
    Matrix out(frame.rows(), frame.cols());
    for (int i = 0; i < frame.cols(); ++i) out.col(i) = E[i];
    return out;
}

double SpaceForm::frame_defect(const Matrix& frame) const {
    double worst = 0.0;
    for (int i = 0; i < frame.cols(); ++i)
        for (int j = 0; j < frame.cols(); ++j) {
            double g = ambient_inner(frame.col(i), frame.col(j)) - (i == j ? 1.0 : 0.0);
            worst = std::max(worst, std::abs(g));
        }
    return worst;
}

double SpaceForm::sn(double r) const {
    switch (model_) {
        case Model::flat: return r;
        case Model::sphere: return R_ * std::sin(r / R_);
        case Model::hyperboloid: return R_ * std::sinh(r / R_);
    }
    return r;
}

double SpaceForm::cot_k(double r) const {
    switch (model_) {
        case Model::flat: return 1.0 / r;
        case Model::sphere: return 1.0 / (R_ * std::tan(r / R_));
        case Model::hyperboloid: return 1.0 / (R_ * std::tanh(r / R_));
    }
    return 1.0 / r;
}

double SpaceForm::volume_density(double r) const { return std::pow(sn(r), n_ - 1); }

double SpaceForm::unit_sphere_area() const {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n_) / std::tgamma(0.5 * n_);
}

double SpaceForm::max_distance() const {
    return model_ == Model::sphere ? std::numbers::pi * R_ : std::numeric_limits<double>::infinity();
}

double SpaceForm::law_of_cosines(double rho, double r, double c) const {
    if (model_ == Model::flat) {
        double q = (rho - r) * (rho - r) + 2.0 * rho * r * (1.0 + c);
        return std::sqrt(std::max(0.0, q));
    }
    double a = rho / R_, b = r / R_;
    if (model_ == Model::sphere) {
        double s = std::sin(0.5 * (a - b));
        double q = s * s + std::sin(a) * std::sin(b) * 0.5 * (1.0 + c);
        return 2.0 * R_ * std::asin(std::sqrt(std::clamp(q, 0.0, 1.0)));
    }
    double s = std::sinh(0.5 * (a - b));
    double q = s * s + std::sinh(a) * std::sinh(b) * 0.5 * (1.0 + c);
    return 2.0 * R_ * std::asinh(std::sqrt(std::max(0.0, q)));
}

double SpaceForm::law_of_cosines_drho(double rho, double r, double c, double d) const {
    if (d <= 0.0) return 0.0;
    if (model_ == Model::flat) return (rho + r * c) / d;
    double a = rho / R_, b = r / R_, e = d / R_;
    if (model_ == Model::sphere)
        return (std::sin(a) * std::cos(b) + std::cos(a) * std::sin(b) * c) / std::sin(e);
    return (std::sinh(a) * std::cosh(b) + std::cosh(a) * std::sinh(b) * c) / std::sinh(e);
}

// ---------------------------------------------------------------- heat kernels

namespace {

double kernel_h2_unit(double t, double rho) {
    // McKean's formula for Δ at time τ = t/2, with s = ρ + w².
    const double tau = 0.5 * t;
    const double pref = std::numbers::sqrt2 * std::exp(-0.25 * tau) / std::pow(4.0 * std::numbers::pi * tau, 1.5);
    auto integrand = [&](double w) {
        double w2 = w * w;
        double s = rho + w2;
        double den = 2.0 * std::sinh(rho + 0.5 * w2) * std::sinh(0.5 * w2);
        if (!(den > 0.0)) return 0.0;
        return 2.0 * w * s * std::exp(-s * s / (4.0 * tau)) / std::sqrt(den);
    };
    const double wmax = std::sqrt(std::sqrt(rho * rho + 240.0 * tau) - rho);
    IntegralResult r = adaptive_kronrod(integrand, 0.0, wmax, 1e-11);
    if (!r.converged)
        throw std::runtime_error("heat_kernel: H² integral did not converge (error " + fmt(r.error) + ")");
    return pref * r.value;
}

double kernel_h3_unit(double t, double r) {
    double ratio = r < 1e-8 ? 1.0 - r * r / 6.0 : r / std::sinh(r);
    return std::pow(2.0 * std::numbers::pi * t, -1.5) * ratio * std::exp(-0.5 * t - r * r / (2.0 * t));
}

double kernel_s2_unit(double t, double r) {
    const double x = std::cos(r);
    double p0 = 1.0, p1 = x, sum = 1.0;  // ℓ = 0 term times 4π
    for (int l = 1; l < 100000; ++l) {
        double pl = l == 1 ? p1 : 0.0;
        if (l >= 2) {
            pl = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
            p0 = p1;
            p1 = pl;
        }
        double damp = (2.0 * l + 1.0) * std::exp(-0.5 * l * (l + 1.0) * t);
        sum += damp * pl;
        // Remaining terms are bounded by the geometric tail of the damping factors.
        if (damp < 1e-17 * std::abs(sum) && l > 2) return sum / (4.0 * std::numbers::pi);
    }
    throw std::runtime_error("heat_kernel: S² series did not reach tolerance");
}

}  // namespace

double heat_kernel(const SpaceForm& space, double t, double r) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
    if (r < 0.0) throw std::invalid_argument("heat_kernel: r must be nonnegative");
    const int n = space.dim();
    if (space.model() == Model::flat)
        return std::pow(2.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-r * r / (2.0 * t));
    const double R = space.radius();
    const double scale = std::pow(R, -n);
    const double tu = t / (R * R), ru = r / R;
    if (space.model() == Model::sphere) return scale * kernel_s2_unit(tu, ru);
    if (n == 3) return scale * kernel_h3_unit(tu, ru);
    return scale * kernel_h2_unit(tu, ru);
}

// ---------------------------------------------------------------- radial profiles

RadialProfile RadialProfile::constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

RadialProfile RadialProfile::bump(double amp, double a) {
    return {[=](double r) { return 1.0 + amp * std::exp(-a * r * r); },
            [=](double r) { return -2.0 * a * r * amp * std::exp(-a * r * r); },
            [=](double r) { return amp * (4.0 * a * a * r * r - 2.0 * a) * std::exp(-a * r * r); }};
}

RadialProfile RadialProfile::gaussian(double a) {
    return {[=](double r) { return std::exp(-a * r * r); },
            [=](double r) { return -2.0 * a * r * std::exp(-a * r * r); },
            [=](double r) { return (4.0 * a * a * r * r - 2.0 * a) * std::exp(-a * r * r); }};
}

RadialProfile RadialProfile::scaled(double s) const {
    auto v = value, a = d1, b = d2;
    return {[=](double r) { return s * v(r); }, [=](double r) { return s * a(r); },
            [=](double r) { return s * b(r); }};
}

RadialProfile RadialProfile::entropy_density() const {
    auto v = value, a = d1, b = d2;
    return {[=](double r) {
                double f = v(r);
                return f * std::log(f);
            },
            [=](double r) { return a(r) * (std::log(v(r)) + 1.0); },
            [=](double r) {
                double f = v(r), g = a(r);
                return b(r) * (std::log(f) + 1.0) + g * g / f;
            }};
}

Matrix radial_hessian(const SpaceForm& space, double r, double d1, double d2, const Vector& dir) {
    const int n = space.dim();
    Matrix I = Matrix::Identity(n, n);
    if (r < 1e-12) return d2 * I;
    Matrix P = dir * dir.transpose();
    return d2 * P + d1 * space.cot_k(r) * (I - P);
}

// ---------------------------------------------------------------- semigroup

HeatSemigroup::HeatSemigroup(const SpaceForm& space, double T, int radial_nodes, int angle_nodes)
    : space_(space), T_(T) {
    if (!(T > 0.0)) throw std::invalid_argument("HeatSemigroup: T must be positive");
    const int n = space.dim();
    double rmax = std::sqrt(T) * (10.0 + 2.0 * std::sqrt(double(n)));
    if (space.model() == Model::hyperboloid) rmax += 0.5 * (n - 1) * T / space.radius();
    rmax = std::min(rmax, space.max_distance());
    const int panels = 8;
    const int per = std::max(4, radial_nodes / panels);
    Rule1D gl = gauss_legendre_rule(per, 0.0, 1.0);
    const double surf = n == 1 ? 1.0
                        : n == 2 ? 2.0
                        : n == 3 ? 2.0 * std::numbers::pi
                                 : 4.0 * std::numbers::pi;
    for (int p = 0; p < panels; ++p) {
        double a = rmax * p / panels, b = rmax * (p + 1) / panels;
        for (int k = 0; k < per; ++k) {
            double r = a + (b - a) * gl.nodes[k];
            double w = (b - a) * gl.weights[k] * heat_kernel(space, T, r) * space.volume_density(r) * surf;
            r_.push_back(r);
            wr_.push_back(w);
        }
    }
    if (n == 1) {
        cos_psi_ = {1.0, -1.0};
        wpsi_ = {1.0, 1.0};
    } else {
        Rule1D ga = gauss_legendre_rule(angle_nodes, 0.0, std::numbers::pi);
        for (int k = 0; k < angle_nodes; ++k) {
            cos_psi_.push_back(std::cos(ga.nodes[k]));
            wpsi_.push_back(ga.weights[k] * std::pow(std::sin(ga.nodes[k]), n - 2));
        }
    }
}

std::pair<double, double> HeatSemigroup::evaluate(const RadialProfile& f, double rho,
                                                  bool want_derivative) const {
    // Law of cosines in half-angle form: sn²(d/2) = sn²((a−b)/2) + sn(a)sn(b)(1+cos ψ)/2.
    const Model m = space_.model();
    const double R = std::isfinite(space_.radius()) ? space_.radius() : 1.0;
    const double a = rho / R;
    const double sa = m == Model::sphere ? std::sin(a) : m == Model::hyperboloid ? std::sinh(a) : a;
    const double ca = m == Model::sphere ? std::cos(a) : m == Model::hyperboloid ? std::cosh(a) : 1.0;
    std::vector<double> outer(r_.size()), outer_d(r_.size());
    for (std::size_t i = 0; i < r_.size(); ++i) {
        const double b = r_[i] / R;
        double sb, cb, h;
        if (m == Model::sphere) {
            sb = std::sin(b);
            cb = std::cos(b);
            h = std::sin(0.5 * (a - b));
        } else if (m == Model::hyperboloid) {
            sb = std::sinh(b);
            cb = std::cosh(b);
            h = std::sinh(0.5 * (a - b));
        } else {
            sb = b;
            cb = 1.0;
            h = 0.5 * (a - b);
        }
        double s = 0.0, sd = 0.0;
        for (std::size_t j = 0; j < cos_psi_.size(); ++j) {
            const double c = cos_psi_[j];
            const double q = std::max(0.0, h * h + sa * sb * 0.5 * (1.0 + c));
            const double sq = std::sqrt(q);
            double d;
            if (m == Model::sphere)
                d = 2.0 * R * std::asin(std::min(1.0, sq));
            else if (m == Model::hyperboloid)
                d = 2.0 * R * std::asinh(sq);
            else
                d = 2.0 * R * sq;
            s += wpsi_[j] * f.value(d);
            if (want_derivative && q > 0.0) {
                double num, den;
                if (m == Model::sphere) {
                    num = sa * cb + ca * sb * c;
                    den = 2.0 * sq * std::sqrt(std::max(0.0, 1.0 - q));
                } else if (m == Model::hyperboloid) {
                    num = sa * cb + ca * sb * c;
                    den = 2.0 * sq * std::sqrt(1.0 + q);
                } else {
                    num = a + b * c;
                    den = 2.0 * sq;
                }
                if (den > 0.0) sd += wpsi_[j] * f.d1(d) * num / den;
            }
        }
        outer[i] = wr_[i] * s;
        outer_d[i] = wr_[i] * sd;
    }
    return {ordered_sum(outer), want_derivative ? ordered_sum(outer_d) : 0.0};
}

double HeatSemigroup::apply_at_distance(const RadialProfile& f, double rho) const {
    return evaluate(f, rho, false).first;
}

double HeatSemigroup::d_apply_at_distance(const RadialProfile& f, double rho) const {
    return evaluate(f, rho, true).second;
}

double HeatSemigroup::apply(const RadialFunction& f, const Vector& x) const {
    return apply_at_distance(f.profile, space_.distance(f.center, x));
}

double HeatSemigroup::mass() const { return apply_at_distance(RadialProfile::constant(1.0), 0.0); }

double semigroup_apply(const SpaceForm& space, const RadialFunction& f, double T, const Vector& x) {
    return HeatSemigroup(space, T).apply(f, x);
}

double default_fd_step(const SpaceForm& space, double T) {
    double R = space.radius();
    return 1e-3 * std::sqrt(T) * (std::isfinite(R) ? std::min(1.0, R) : 1.0);
}

Vector fd_gradient_normal(const SpaceForm& space, const Vector& x, const Matrix& frame,
                          const std::function<double(const Vector&)>& F, double h) {
    const int n = space.dim();
    Vector g(n);
    auto at = [&](int i, double s) { return F(space.exp_map(x, s * frame.col(i))); };
    for (int i = 0; i < n; ++i)
        g(i) = (-at(i, 2 * h) + 8 * at(i, h) - 8 * at(i, -h) + at(i, -2 * h)) / (12 * h);
    return g;
}

Matrix fd_hessian_normal(const SpaceForm& space, const Vector& x, const Matrix& frame,
                         const std::function<double(const Vector&)>& F, double h) {
    const int n = space.dim();
    Matrix H(n, n);
    const double f0 = F(x);
    auto at = [&](int i, double si, int j, double sj) {
        Vector v = si * frame.col(i);
        if (j >= 0) v += sj * frame.col(j);
        return F(space.exp_map(x, v));
    };
    for (int i = 0; i < n; ++i)
        H(i, i) = (-at(i, 2 * h, -1, 0) + 16 * at(i, h, -1, 0) - 30 * f0 + 16 * at(i, -h, -1, 0) -
                   at(i, -2 * h, -1, 0)) / (12 * h * h);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            auto cross = [&](double s) {
                return (at(i, s, j, s) - at(i, s, j, -s) - at(i, -s, j, s) + at(i, -s, j, -s)) / (4 * s * s);
            };
            H(i, j) = H(j, i) = (4.0 * cross(h) - cross(2 * h)) / 3.0;
        }
    return H;
}

SemigroupJet semigroup_jet(const HeatSemigroup& sg, const RadialFunction& f, const Vector& x) {
    const SpaceForm& space = sg.space();
    SemigroupJet jet;
    jet.fd_step = default_fd_step(space, sg.time());
    Matrix E = space.frame_at(x);
    auto F = [&](const Vector& y) { return sg.apply(f, y); };
    jet.value = F(x);
    jet.grad = fd_gradient_normal(space, x, E, F, jet.fd_step);
    jet.hess = fd_hessian_normal(space, x, E, F, jet.fd_step);
    return jet;
}

// ---------------------------------------------------------------- paths

McMean batch_mean(const std::vector<double>& values, int batches) {
    McMean m;
    const std::size_t N = values.size();
    if (N == 0) return m;
    m.mean = ordered_sum(values) / static_cast<double>(N);
    const std::size_t B = std::min<std::size_t>(batches, N);
    if (B < 2) return m;
    std::vector<double> bm;
    for (std::size_t b = 0; b < B; ++b) {
        std::size_t lo = b * N / B, hi = (b + 1) * N / B;
        std::vector<double> part(values.begin() + lo, values.begin() + hi);
        bm.push_back(ordered_sum(part) / static_cast<double>(hi - lo));
    }
    double var = 0.0;
    for (double v : bm) var += (v - m.mean) * (v - m.mean);
    var /= static_cast<double>(B - 1);
    m.se = std::sqrt(var / static_cast<double>(B));
    return m;
}

namespace {

using DriftFn = std::function<double(double, double)>;  // (s, ρ) ↦ ∂_ρ log P_s f

PathEnsemble simulate(const SpaceForm& space, const Vector& x0, double T, double h, int n_paths,
                      std::uint64_t seed, const SimulationOptions& opt, const Vector* drift_center,
                      const DriftFn* drift, double s_min) {
    if (!(h > 0.0) || h > 1e-2 * T + 1e-15)
        throw std::invalid_argument("simulate: step must satisfy 0 < h ≤ 1e-2·T");
    if (space.constraint_violation(x0) > 1e-10)
        throw std::invalid_argument("simulate: start point is off the manifold");
    const Model m = space.model();
    const double R = space.radius();
    const int n = space.dim();
    const int D = space.ambient_dim();
    const int steps = static_cast<int>(std::llround(T / h));
    PathEnsemble ens;
    ens.h = h;
    ens.T = T;
    ens.n_paths = n_paths;
    ens.seed = seed;
    ens.steps = steps;
    ens.endpoints = Matrix(D, n_paths);
    ens.frames.assign(n_paths, Matrix());
    if (drift) {
        ens.lehec_sum.assign(n_paths, 0.0);
        ens.last_drift_sq.assign(n_paths, 0.0);
    }
    const int keep = std::min(opt.keep_paths, n_paths);
    ens.kept_paths.assign(keep, {});
    const Matrix E0 = space.frame_at(x0);
    const SVec xs0 = x0;
    SVec o = SVec::Zero(D);
    if (drift_center) o = *drift_center;
    const double sqh = std::sqrt(h);
    std::vector<double> viol(n_paths, 0.0), defect(n_paths, 0.0);
    const int stop_step = drift ? static_cast<int>(std::floor((T - s_min) / h + 1e-9)) : steps;

    parallel_chunks(static_cast<std::size_t>(n_paths), 256, [&](std::size_t b, std::size_t e) {
        std::vector<SVec> E(n), En(n);
        for (std::size_t p = b; p < e; ++p) {
            auto rng = stream_rng(seed, p);
            std::normal_distribution<double> gauss(0.0, 1.0);
            SVec x = xs0;
            for (int i = 0; i < n; ++i) E[i] = E0.col(i);
            double vmax = 0.0, dmax = 0.0, lehec = 0.0, last = 0.0;
            const bool keep_this = static_cast<int>(p) < keep;
            if (keep_this) ens.kept_paths[p].push_back(Vector(x));
            for (int k = 0; k < steps; ++k) {
                SVec v = SVec::Zero(D);
                for (int i = 0; i < n; ++i) v += (sqh * gauss(rng)) * E[i];
                if (drift) {
                    double s = std::max(T - k * h, s_min);
                    SVec dir;
                    double rho = radial_direction_t(m, R, o, x, dir);
                    double g = rho < 1e-14 ? 0.0 : (*drift)(s, rho);
                    v += (h * g) * dir;
                    if (k < stop_step) {
                        lehec += 0.5 * g * g * h;
                        last = g * g;
                    }
                }
                SVec y = exp_t(m, R, x, v);
                for (int i = 0; i < n; ++i) En[i] = transport_t(m, R, x, y, E[i]);
                double pre = constraint_t(m, R, y);
                if (pre > 1e-6)
                    throw std::runtime_error("simulate: path left the manifold (violation " + fmt(pre) + ")");
                x = project_point_t(m, R, y);
                vmax = std::max(vmax, constraint_t(m, R, x));
                std::swap(E, En);
                if ((k + 1) % opt.reorthonormalize_every == 0 || k + 1 == steps) {
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            dmax = std::max(dmax, std::abs(inner_t(m, E[i], E[j]) - (i == j ? 1.0 : 0.0)));
                    gram_schmidt_t(m, R, x, E);
                }
                if (keep_this) ens.kept_paths[p].push_back(Vector(x));
            }
            ens.endpoints.col(p) = x;
            Matrix F(D, n);
            for (int i = 0; i < n; ++i) F.col(i) = E[i];
            ens.frames[p] = F;
            viol[p] = vmax;
            defect[p] = dmax;
            if (drift) {
                ens.lehec_sum[p] = lehec;
                ens.last_drift_sq[p] = last;
            }
        }
    });
    for (int p = 0; p < n_paths; ++p) {
        ens.max_constraint_violation = std::max(ens.max_constraint_violation, viol[p]);
        ens.max_frame_defect = std::max(ens.max_frame_defect, defect[p]);
    }
    return ens;
}

// Cubic Lagrange weights on a uniform grid, clamped to the table.
void cubic_stencil(double u, int count, int& i0, double w[4]) {
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i - 1, 0, std::max(0, count - 4));
    double t = u - i;
    t = std::clamp(t, 0.0, 3.0);
    w[0] = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    w[1] = t * (t - 2) * (t - 3) / 2.0;
    w[2] = -t * (t - 1) * (t - 3) / 2.0;
    w[3] = t * (t - 1) * (t - 2) / 6.0;
    i0 = i;
}

}  // namespace

PathEnsemble simulate_brownian(const SpaceForm& space, const Vector& x0, double T, double h,
                               int n_paths, std::uint64_t seed, const SimulationOptions& opt) {
    return simulate(space, x0, T, h, n_paths, seed, opt, nullptr, nullptr, 0.0);
}

FollmerDrift::FollmerDrift(const SpaceForm& space, const RadialFunction& f, double T, double s_min,
                           double rho_max, int s_nodes, int rho_nodes)
    : s_min_(s_min), T_(T), rho_max_(rho_max), ns_(s_nodes), nr_(rho_nodes) {
    if (!(s_min > 0.0 && s_min < T)) throw std::invalid_argument("FollmerDrift: need 0 < s_min < T");
    du_ = std::log(T / s_min) / (ns_ - 1);
    drho_ = rho_max / (nr_ - 1);
    table_.assign(static_cast<std::size_t>(ns_) * nr_, 0.0);
    parallel_chunks(static_cast<std::size_t>(ns_), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            double s = s_min_ * std::exp(du_ * static_cast<double>(k));
            HeatSemigroup sg(space, s);
            for (int j = 0; j < nr_; ++j) {
                double rho = drho_ * j;
                auto [P, dP] = sg.evaluate(f.profile, rho, true);
                table_[k * nr_ + j] = dP / P;
            }
        }
    });
}

double FollmerDrift::operator()(double s, double rho) const {
    s = std::clamp(s, s_min_, T_);
    rho = std::clamp(rho, 0.0, rho_max_);
    double u = std::log(s / s_min_) / du_, v = rho / drho_;
    int i0, j0;
    double wu[4], wv[4];
    cubic_stencil(u, ns_, i0, wu);
    cubic_stencil(v, nr_, j0, wv);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) acc += wu[a] * wv[b] * table_[(i0 + a) * nr_ + (j0 + b)];
    return acc;
}

namespace {

double drift_rho_max(const SpaceForm& space, const RadialFunction& f, const Vector& x0, double T) {
    double rmax = std::sqrt(T) * (12.0 + 2.0 * std::sqrt(double(space.dim())));
    if (space.model() == Model::hyperboloid) rmax += 0.5 * (space.dim() - 1) * T / space.radius();
    return std::min(space.distance(f.center, x0) + rmax, space.max_distance());
}

}  // namespace

PathEnsemble simulate_follmer(const SpaceForm& space, const RadialFunction& f, const Vector& x0,
                              double T, double h, int n_paths, std::uint64_t seed,
                              const SimulationOptions& opt) {
    const double s_min = 10.0 * h;
    FollmerDrift table(space, f, T, s_min, drift_rho_max(space, f, x0, T));
    DriftFn fn = [&](double s, double rho) { return table(s, rho); };
    return simulate(space, x0, T, h, n_paths, seed, opt, &f.center, &fn, s_min);
}

void export_paths_csv(const SpaceForm& space, const PathEnsemble& ens, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_paths_csv: cannot open " + path);
    out << "path,t";
    for (int i = 0; i < space.ambient_dim(); ++i) out << ",x" << i;
    out << "\n";
    out.precision(17);
    for (std::size_t p = 0; p < ens.kept_paths.size(); ++p)
        for (std::size_t k = 0; k < ens.kept_paths[p].size(); ++k) {
            out << p << "," << ens.h * static_cast<double>(k);
            for (int i = 0; i < ens.kept_paths[p][k].size(); ++i) out << "," << ens.kept_paths[p][k](i);
            out << "\n";
        }
}

// ---------------------------------------------------------------- Lehec, Wang, v/m

double direct_entropy(const HeatSemigroup& sg, const RadialFunction& f, const Vector& x) {
    double P = sg.apply(f, x);
    RadialFunction g{f.center, f.profile.entropy_density()};
    double Q = sg.apply(g, x);
    return Q / P - std::log(P);
}

LehecEstimate lehec_entropy_estimate(const SpaceForm& space, const RadialFunction& f,
                                     const Vector& x0, double T, double h, int n_paths,
                                     std::uint64_t seed) {
    HeatSemigroup sg(space, T);
    const double P = sg.apply(f, x0);
    RadialFunction fn{f.center, f.profile.scaled(1.0 / P)};
    LehecEstimate out;
    out.direct = direct_entropy(sg, fn, x0);
    PathEnsemble ens = simulate_follmer(space, fn, x0, T, h, n_paths, seed);
    // The unsimulated final segment [T − 10h, T] enters through its last integrand value.
    const double h_min = 10.0 * h;
    std::vector<double> total(ens.lehec_sum.size());
    for (std::size_t p = 0; p < total.size(); ++p)
        total[p] = ens.lehec_sum[p] + 0.5 * ens.last_drift_sq[p] * h_min;
    McMean mm = batch_mean(total);
    out.estimate = mm.mean;
    out.std_error = mm.se;
    out.tail_bound = 0.5 * batch_mean(ens.last_drift_sq).mean * h_min;
    out.inconclusive = out.estimate > 0.0 && out.std_error > 0.2 * out.estimate;
    return out;
}

namespace {

struct TensorSample {
    Matrix hess;   // ∇²f in the endpoint frame
    Vector grad;   // ∇f in the endpoint frame
    double value;
};

TensorSample sample_tensors(const SpaceForm& space, const RadialFunction& f, const Vector& y,
                            const Matrix& E) {
    const int n = space.dim();
    Vector o = f.center;
    SVec dir;
    double d = radial_direction_t(space.model(), space.radius(), SVec(o), SVec(y), dir);
    Vector a(n);
    for (int i = 0; i < n; ++i) a(i) = space.ambient_inner(E.col(i), Vector(dir));
    TensorSample s;
    s.value = f.profile.value(d);
    double d1 = f.profile.d1(d), d2 = f.profile.d2(d);
    s.grad = d1 * a;
    s.hess = radial_hessian(space, d, d1, d2, a);
    return s;
}

}  // namespace

WangResidual wang_residual(const SpaceForm& space, const RadialFunction& f, double T,
                           const Vector& x, double h, int n_paths, std::uint64_t seed) {
    const int n = space.dim();
    const double kappa = space.curvature();
    HeatSemigroup sg(space, T);
    WangResidual out;
    SemigroupJet jet = semigroup_jet(sg, f, x);
    out.hess_PTf = jet.hess;
    Matrix fd_err;
    {
        Matrix E = space.frame_at(x);
        auto F = [&](const Vector& y) { return sg.apply(f, y); };
        Matrix coarse = fd_hessian_normal(space, x, E, F, 2.0 * jet.fd_step);
        fd_err = (coarse - jet.hess).cwiseAbs().array() + 1e-9;
        out.fd_tol = fd_err.maxCoeff();
    }
    const double c = jet.hess.trace();

    // Control variate: Δf(X_T) has mean P_TΔf, computed by quadrature of the radial Laplacian.
    const RadialProfile& phi = f.profile;
    RadialProfile lap;
    lap.value = [phi, n, &space](double r) {
        if (r < 1e-8) return n * phi.d2(r);
        return phi.d2(r) + (n - 1) * space.cot_k(r) * phi.d1(r);
    };
    lap.d1 = [](double) { return 0.0; };
    lap.d2 = [](double) { return 0.0; };
    const double lap_mean = sg.apply_at_distance(lap, space.distance(f.center, x));

    PathEnsemble ens = simulate_brownian(space, x, T, h, n_paths, seed);
    std::vector<std::vector<double>> entries(n * n, std::vector<double>(n_paths));
    std::vector<double> control(n_paths);
    for (int p = 0; p < n_paths; ++p) {
        TensorSample s = sample_tensors(space, f, ens.endpoints.col(p), ens.frames[p]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) entries[i * n + j][p] = s.hess(i, j);
        control[p] = s.hess.trace() - lap_mean;
    }
    double cc = 0.0;
    for (double v : control) cc += v * v;
    out.PT_hess_mc = Matrix(n, n);
    Matrix se(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<double>& e = entries[i * n + j];
            double mean = ordered_sum(e) / n_paths, ec = 0.0;
            for (int p = 0; p < n_paths; ++p) ec += (e[p] - mean) * control[p];
            double beta = cc > 0.0 ? ec / cc : 0.0;
            for (int p = 0; p < n_paths; ++p) e[p] -= beta * control[p];
            McMean mm = batch_mean(e);
            out.PT_hess_mc(i, j) = mm.mean;
            se(i, j) = mm.se;
        }
    const double decay = std::exp(-n * kappa * T);
    out.mc_se = decay * se.maxCoeff();
    Matrix model = decay * out.PT_hess_mc + ((1.0 - decay) / n) * c * Matrix::Identity(n, n);
    Matrix res = (jet.hess - model).cwiseAbs();
    out.residual = res.maxCoeff();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.worst_ratio = std::max(out.worst_ratio, res(i, j) / (decay * se(i, j) + fd_err(i, j)));
    double signal = (decay * out.PT_hess_mc).cwiseAbs().maxCoeff();
    out.inconclusive = signal > 0.0 && out.mc_se > 0.5 * signal;
    return out;
}

VmMatrices v_and_m_matrices(const SpaceForm& space, const RadialFunction& f, const Vector& x,
                            double T, const VmOptions& opt) {
    const int n = space.dim();
    const double kappa = space.curvature();
    if (std::abs(n * kappa * T) > 30.0)
        throw std::domain_error("v_and_m_matrices: |nκT| > 30 makes the commutation inversion ill-conditioned");
    HeatSemigroup sg(space, T);
    VmMatrices out;
    out.PTf = sg.apply(f, x);
    RadialFunction fn{f.center, f.profile.scaled(1.0 / out.PTf)};
    SemigroupJet jet = semigroup_jet(sg, fn, x);
    const Matrix I = Matrix::Identity(n, n);
    out.grad_log = jet.grad / jet.value;
    out.v0 = out.grad_log * out.grad_log.transpose();
    out.hess_PTf = symmetrize(jet.hess / jet.value);
    out.m0 = symmetrize(out.v0 - out.hess_PTf);
    out.c = out.hess_PTf.trace();
    const double grow = std::exp(n * kappa * T);
    out.PT_hess = symmetrize(grow * (out.hess_PTf - ((1.0 - 1.0 / grow) / n) * out.c * I));
    out.J = symmetrize(out.PT_hess - (out.c / n) * I);
    if (std::abs(out.J.trace()) > 1e-6)
        throw std::runtime_error("v_and_m_matrices: tr J_T = " + fmt(out.J.trace()) + " is not 0");

    // v(T) and m(T) by reweighting Brownian endpoints with f, in transported frames.
    PathEnsemble ens = simulate_brownian(space, x, T, opt.h, opt.n_paths, opt.seed);
    const int B = 20;
    std::vector<Matrix> vb(B, Matrix::Zero(n, n)), mb(B, Matrix::Zero(n, n));
    std::vector<double> wb(B, 0.0);
    Matrix vs = Matrix::Zero(n, n), ms = Matrix::Zero(n, n);
    double ws = 0.0;
    for (int p = 0; p < opt.n_paths; ++p) {
        TensorSample s = sample_tensors(space, fn, ens.endpoints.col(p), ens.frames[p]);
        Vector a = s.grad / s.value;
        Matrix va = a * a.transpose();
        Matrix mm = va - s.hess / s.value;
        int b = static_cast<int>(static_cast<long long>(p) * B / opt.n_paths);
        vb[b] += s.value * va;
        mb[b] += s.value * mm;
        wb[b] += s.value;
    }
    for (int b = 0; b < B; ++b) {
        vs += vb[b];
        ms += mb[b];
        ws += wb[b];
    }
    out.vT = symmetrize(vs / ws);
    out.mT = symmetrize(ms / ws);
    double sv = 0.0, sm = 0.0;
    for (int b = 0; b < B; ++b) {
        Matrix dv = vb[b] / wb[b] - out.vT, dm = mb[b] / wb[b] - out.mT;
        sv += dv.squaredNorm();
        sm += dm.squaredNorm();
    }
    out.vT_se = std::sqrt(sv / (B - 1) / B);
    out.mT_se = std::sqrt(sm / (B - 1) / B);
    return out;
}

}  // namespace intrinsic
