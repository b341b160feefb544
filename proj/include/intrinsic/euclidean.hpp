#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "intrinsic/info_functionals.hpp"

namespace intrinsic {

struct BoundResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double error = 0.0;
    bool vacuous = false;
    std::string note;
};

/// 𝖧(μ‖λ) − 𝖧(γ‖λ) ≤ ½ log det 𝓘(μ‖λ).
BoundResult dembo_bound(const DensityModel& mu, const QuadratureGrid& grid);

struct DimensionalResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double dembo_rhs = 0.0;
};
DimensionalResult dimensional_bound(const DensityModel& mu, const QuadratureGrid& grid);

/// Density w with w(t∘x) = Π t_k^{p_k} w(x) and LSI constants for ρ = w dx.
struct HomogeneousMeasureSpec {
    std::vector<double> p;
    std::function<double(const Vector&)> log_w;
    std::function<Vector(const Vector&)> grad_log_w;
    double c1 = 0.5;
    double c2 = 0.0;

    /// Lebesgue measure with the constants of the Gaussian LSI.
    static HomogeneousMeasureSpec lebesgue(int n);
};

/// Largest relative deviation of the homogeneity identity over random (t, x).
double homogeneity_defect(const HomogeneousMeasureSpec& rho, int samples, unsigned seed);

struct HomogeneousResult {
    double lhs = 0.0;
    double rhs = 0.0;
    std::vector<double> optimal_t;
    std::vector<double> fisher_components;
    bool vacuous = false;
};

HomogeneousResult homogeneous_lsi_bound(const DensityModel& mu, const HomogeneousMeasureSpec& rho,
                                        const QuadratureGrid& grid);
/// c₁ Σ t_k² F_k − Σ (1+p_k) log t_k + c₂.
double homogeneous_objective(const HomogeneousMeasureSpec& rho, const std::vector<double>& fisher,
                             const std::vector<double>& t);

struct GNSParams {
    double p = 4.0, q = 2.0, r = 2.0, theta = 0.5;
    double C = 1.0;
    bool constant_supplied = false;
    /// |1/p − θ/q − (1/r − 1/n)(1−θ)|.
    double constraint_defect(int n) const;
};

struct TestFunction {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> grad;
};

struct GNSResult {
    double lhs = 0.0;
    double rhs_classical = 0.0;
    double rhs_improved = 0.0;
    double norm_q = 0.0;
    std::vector<double> partial_norms;
    bool degenerate = false;
    std::string note;
};

GNSResult gns_improved(const TestFunction& u, const GNSParams& params, const QuadratureGrid& grid);

struct BecknerResult {
    double lhs = 0.0;
    double rhs_dt = 0.0;
    double rhs_matrix = 0.0;
    double norm2_sq = 0.0;
    Matrix gradient_gram;
};

/// φ_{p,n}(s) = (n/4)((1−s)^{−2p/(n(2−p))} − 1).
double beckner_phi(double p, int n, double s);
BecknerResult beckner_improved(const TestFunction& u, double p, const QuadratureGrid& grid,
                               double normalization_tol = 1e-6);

struct QlsiResult {
    double lhs = 0.0;
    double rhs = 0.0;
    std::vector<double> optimal_t;
    std::vector<double> a, b;
    bool vacuous = false;
};

/// C̃ t^q a + C̃ t^{−p} b − log t with p = q/(q−1).
double qlsi_objective(double a, double b, double q, double c_tilde, double t);
/// Minimizer of qlsi_objective (safeguarded Newton in log t); +∞ when unbounded below.
double qlsi_minimizer(double a, double b, double q, double c_tilde);
QlsiResult qlsi_improved(const DensityModel& mu, double q, double c_tilde,
                         const QuadratureGrid& grid);

struct ParametricFamily {
    enum class Space { finite, gaussian_channel } space = Space::gaussian_channel;
    int dim = 1;
    double sigma = 1.0;
    int outcomes = 0;
    std::function<double(int, const Vector&)> f;
    std::function<Vector(int, const Vector&)> grad_theta;

    static ParametricFamily gaussian_channel(int n, double sigma);
    static ParametricFamily finite(int n, int outcomes, std::function<double(int, const Vector&)> f,
                                   std::function<Vector(int, const Vector&)> grad_theta);
};

struct CramerRaoResult {
    double mutual_information = 0.0;
    double prior_entropy_gauss = 0.0;  // 𝖧(π‖γ)
    double lhs = 0.0;
    double rhs = 0.0;
    double lhs_homogeneous = 0.0;  // I + 𝖧(π‖λ)
    double rhs_homogeneous = 0.0;
    Matrix average_fisher;
    std::string mi_estimator;
};

CramerRaoResult cramer_rao_gaussian(const DensityModel& pi, const ParametricFamily& family,
                                    const QuadratureGrid& grid);

/// One coordinate of a product map, evaluated at image points y = τ(z).
class TransportComponent {
public:
    struct Local {
        double z;   // τ⁻¹(y)
        double d1;  // τ'(z)
        double d2;  // τ''(z)
    };
    virtual ~TransportComponent() = default;
    virtual Local at_image(double y) const = 0;
};

/// τ(z) = a z + b.
std::shared_ptr<const TransportComponent> affine_component(double a, double b);
/// τ = F⁻¹∘Φ for a 1-d density on [lo, hi], from a CDF table with monotone cubic interpolation.
std::shared_ptr<const TransportComponent> monotone_transport_component(
    const std::function<double(double)>& density, const std::function<double(double)>& density_prime,
    double lo, double hi, int table_size = 2048);

struct DiffeoSpec {
    std::vector<std::shared_ptr<const TransportComponent>> components;
};

struct TransportResult {
    double psi = 0.0;
    double entropy_gap = 0.0;
    double error = 0.0;
};

TransportResult transport_deficit(const DensityModel& mu, const DiffeoSpec& T,
                                  const QuadratureGrid& grid);

}  // namespace intrinsic
