#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "intrinsic/linalg.hpp"

namespace intrinsic {

enum class Model { flat, sphere, hyperboloid };
std::string to_string(Model m);

/// Constant-curvature space in an embedded model. Curved models use ambient index 0
/// as the normal axis: |x|² = R² on the sphere, ⟨x,x⟩_L = −R² on the hyperboloid.
class SpaceForm {
public:
    SpaceForm(int n, double kappa);

    int dim() const { return n_; }
    double curvature() const { return kappa_; }
    Model model() const { return model_; }
    int ambient_dim() const { return model_ == Model::flat ? n_ : n_ + 1; }
    /// Curvature radius 1/√|κ| (infinite when flat).
    double radius() const { return R_; }
    std::string name() const;

    Vector origin() const;
    /// Orthonormal frame of T_origin, as ambient columns.
    Matrix origin_frame() const;
    /// exp(origin, ρ·e₁).
    Vector point_at_distance(double rho) const;
    /// Origin frame transported to x along the geodesic from the origin.
    Matrix frame_at(const Vector& x) const;

    /// Ambient bilinear form (Euclidean, or Minkowski on the hyperboloid).
    double ambient_inner(const Vector& u, const Vector& v) const;
    double norm(const Vector& v) const;

    Vector exp_map(const Vector& x, const Vector& v) const;
    Vector log_map(const Vector& x, const Vector& y) const;
    /// Parallel transport of w ∈ T_x along the geodesic from x to y.
    Vector parallel_transport(const Vector& x, const Vector& y, const Vector& w) const;
    double distance(const Vector& x, const Vector& y) const;

    Vector project_point(const Vector& x) const;
    Vector project_tangent(const Vector& x, const Vector& v) const;
    double constraint_violation(const Vector& x) const;
    double tangency_violation(const Vector& x, const Vector& v) const;
    /// Gram–Schmidt in the metric after projecting each column onto T_x.
    Matrix orthonormalize(const Vector& x, const Matrix& frame) const;
    /// max |EᵀgE − Id|.
    double frame_defect(const Matrix& frame) const;

    /// sn_κ(r) and cot_κ(r) = sn'/sn.
    double sn(double r) const;
    double cot_k(double r) const;
    /// Volume density sn_κ(r)^{n−1} in geodesic polar coordinates.
    double volume_density(double r) const;
    /// Surface area of the unit sphere S^{n−1}.
    double unit_sphere_area() const;
    /// Largest geodesic distance (πR on the sphere, otherwise infinite).
    double max_distance() const;

    /// d(o, y) when d(o, x) = ρ, d(x, y) = r and ψ is the angle at x between the
    /// geodesic to y and the direction pointing away from o.
    double law_of_cosines(double rho, double r, double cos_psi) const;
    /// ∂d/∂ρ for the same configuration (0 at coincident points).
    double law_of_cosines_drho(double rho, double r, double cos_psi, double d) const;

private:
    int n_;
    double kappa_;
    Model model_;
    double R_;
};

/// Density of P_tδ_x at geodesic distance r, generator ½Δ.
double heat_kernel(const SpaceForm& space, double t, double r);

/// Radial profile φ(r) with first and second derivatives.
struct RadialProfile {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;

    static RadialProfile constant(double c);
    /// 1 + amp·exp(−a r²).
    static RadialProfile bump(double amp, double a);
    /// exp(−a r²).
    static RadialProfile gaussian(double a);
    RadialProfile scaled(double s) const;
    /// φ·log φ with derivatives.
    RadialProfile entropy_density() const;
};

struct RadialFunction {
    Vector center;
    RadialProfile profile;
    double operator()(const SpaceForm& space, const Vector& y) const {
        return profile.value(space.distance(center, y));
    }
};

/// Hessian of a radial function in an orthonormal frame, from φ', φ'' and the
/// frame coordinates of the unit radial direction.
Matrix radial_hessian(const SpaceForm& space, double r, double d1, double d2, const Vector& dir);

/// Heat semigroup P_T on one space, as a fixed 2-d (distance, angle) Gauss–Legendre rule.
class HeatSemigroup {
public:
    HeatSemigroup(const SpaceForm& space, double T, int radial_nodes = 128, int angle_nodes = 48);

    const SpaceForm& space() const { return space_; }
    double time() const { return T_; }
    /// P_Tφ at a point at distance ρ from the profile's center.
    double apply_at_distance(const RadialProfile& f, double rho) const;
    /// ∂/∂ρ of the same.
    double d_apply_at_distance(const RadialProfile& f, double rho) const;
    double apply(const RadialFunction& f, const Vector& x) const;
    /// (P_Tφ, ∂_ρP_Tφ) in one pass.
    std::pair<double, double> evaluate(const RadialProfile& f, double rho, bool want_derivative) const;
    /// Integral of the kernel against 1.
    double mass() const;

private:
    SpaceForm space_;
    double T_;
    std::vector<double> r_, wr_, cos_psi_, wpsi_;
};

double semigroup_apply(const SpaceForm& space, const RadialFunction& f, double T, const Vector& x);

/// Value, gradient and Hessian of P_Tf at x in frame_at(x), by 5-point finite differences
/// along normal coordinates.
struct SemigroupJet {
    double value = 0.0;
    Vector grad;
    Matrix hess;
    double fd_step = 0.0;
};
SemigroupJet semigroup_jet(const HeatSemigroup& sg, const RadialFunction& f, const Vector& x);
double default_fd_step(const SpaceForm& space, double T);

/// Same derivatives from a scalar function evaluated at ambient points.
Vector fd_gradient_normal(const SpaceForm& space, const Vector& x, const Matrix& frame,
                          const std::function<double(const Vector&)>& F, double h);
Matrix fd_hessian_normal(const SpaceForm& space, const Vector& x, const Matrix& frame,
                         const std::function<double(const Vector&)>& F, double h);

// ---------------------------------------------------------------- paths

struct PathEnsemble {
    double h = 0.0;
    double T = 0.0;
    int n_paths = 0;
    std::uint64_t seed = 0;
    int steps = 0;
    Matrix endpoints;               // ambient × n_paths
    std::vector<Matrix> frames;     // endpoint frames (ambient × n)
    std::vector<double> lehec_sum;  // ½Σ|drift|²h per path (Föllmer only)
    std::vector<double> last_drift_sq;
    std::vector<std::vector<Vector>> kept_paths;  // full trajectories of the first few paths
    double max_constraint_violation = 0.0;
    double max_frame_defect = 0.0;
};

struct SimulationOptions {
    int keep_paths = 0;           // trajectories retained for CSV export
    int reorthonormalize_every = 100;
};

PathEnsemble simulate_brownian(const SpaceForm& space, const Vector& x0, double T, double h,
                               int n_paths, std::uint64_t seed, const SimulationOptions& opt = {});

/// Drift ∂_ρ log P_s f tabulated over (log s, ρ).
class FollmerDrift {
public:
    FollmerDrift(const SpaceForm& space, const RadialFunction& f, double T, double s_min,
                 double rho_max, int s_nodes = 40, int rho_nodes = 120);
    /// ∂_ρ log P_s f(ρ).
    double operator()(double s, double rho) const;
    double s_min() const { return s_min_; }

private:
    double s_min_, T_, rho_max_, du_, drho_;
    int ns_, nr_;
    std::vector<double> table_;  // ns × nr
};

PathEnsemble simulate_follmer(const SpaceForm& space, const RadialFunction& f, const Vector& x0,
                              double T, double h, int n_paths, std::uint64_t seed,
                              const SimulationOptions& opt = {});

void export_paths_csv(const SpaceForm& space, const PathEnsemble& ens, const std::string& path);

/// Mean and batch standard error of per-path values (20 batches in path order).
struct McMean {
    double mean = 0.0;
    double se = 0.0;
};
McMean batch_mean(const std::vector<double>& values, int batches = 20);

struct LehecEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double tail_bound = 0.0;  // rectangle-rule value of the final segment (included in estimate)
    double direct = 0.0;      // P_T(f log f) − P_Tf log P_Tf by quadrature
    bool inconclusive = false;
};
LehecEstimate lehec_entropy_estimate(const SpaceForm& space, const RadialFunction& f,
                                     const Vector& x0, double T, double h, int n_paths,
                                     std::uint64_t seed);

/// Direct relative entropy of μ = f·P_Tδ_x/P_Tf(x) against P_Tδ_x.
double direct_entropy(const HeatSemigroup& sg, const RadialFunction& f, const Vector& x);

struct WangResidual {
    double residual = 0.0;   // sup-norm of the identity defect
    double mc_se = 0.0;      // largest entrywise SE of the Monte Carlo term, scaled
                             // (control variate: Δf with its quadrature mean)
    double fd_tol = 0.0;
    double worst_ratio = 0.0;  // max over entries of |defect| / (scaled SE + FD error)
    bool inconclusive = false;
    Matrix hess_PTf;         // ∇²P_Tf by finite differences
    Matrix PT_hess_mc;       // P_T∇²f by transported-frame Monte Carlo
};
WangResidual wang_residual(const SpaceForm& space, const RadialFunction& f, double T,
                           const Vector& x, double h, int n_paths, std::uint64_t seed);

struct VmMatrices {
    double PTf = 0.0;         // before normalization
    Matrix v0, vT, m0, mT, J;
    double c = 0.0;           // ΔP_Tf(x) after normalization
    Matrix PT_hess;           // P_T∇²f recovered from the commutation identity
    Matrix hess_PTf;
    Vector grad_log;
    double vT_se = 0.0, mT_se = 0.0;
};

struct VmOptions {
    double h = 1e-3;
    int n_paths = 100000;
    std::uint64_t seed = 1;
};

/// v(0), v(T), m(0), m(T), J_T and c_T for f normalized so that P_Tf(x) = 1.
VmMatrices v_and_m_matrices(const SpaceForm& space, const RadialFunction& f, const Vector& x,
                            double T, const VmOptions& opt);

}  // namespace intrinsic
