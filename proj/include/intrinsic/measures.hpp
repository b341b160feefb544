#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "intrinsic/linalg.hpp"
#include "intrinsic/numerics.hpp"

namespace intrinsic {

enum class DensityKind { gaussian, mixture, product, custom };
std::string to_string(DensityKind k);

struct GaussianSpec {
    Vector mean;
    Matrix covariance;
};

struct Box {
    Vector lo;
    Vector hi;
};

enum class RuleKind { gauss_hermite, gauss_legendre_box };

/// Tensor-product rule. Hermite rules are mapped affinely, x = c + L z.
class QuadratureGrid {
public:
    static QuadratureGrid hermite(int dim, int m, const Vector& center, const Matrix& scale);
    static QuadratureGrid standard_hermite(int dim, int m = 40);
    static QuadratureGrid legendre(const Box& box, int m);

    RuleKind rule() const { return rule_; }
    int dim() const { return dim_; }
    int points_per_axis() const { return m_; }
    std::size_t size() const { return static_cast<std::size_t>(nodes_.cols()); }
    const Matrix& nodes() const { return nodes_; }
    /// Weights such that Σ w h(x) ≈ ∫ h dx.
    const Vector& lebesgue_weights() const { return leb_; }
    /// Probability weights of the reference measure (N(c, LLᵀ) or uniform on the box).
    const Vector& reference_weights() const { return ref_; }
    /// Same rule with m − 2 points per axis (error-estimate companion).
    QuadratureGrid coarser() const;
    const Vector& center() const { return center_; }
    const Matrix& scale() const { return scale_; }
    const Box& box() const { return box_; }

private:
    RuleKind rule_ = RuleKind::gauss_hermite;
    int dim_ = 0, m_ = 0;
    Vector center_;
    Matrix scale_;
    Box box_;
    Matrix nodes_;
    Vector leb_, ref_;
};

/// Smooth positive density on ℝⁿ with exact derivatives.
class DensityModel {
public:
    struct Impl {
        virtual ~Impl() = default;
        virtual int dim() const = 0;
        virtual double log_value(const Vector& x) const = 0;
        virtual Vector grad_log(const Vector& x) const = 0;
        virtual Matrix hess_log(const Vector& x) const = 0;
    };

    DensityModel() = default;
    DensityModel(std::shared_ptr<const Impl> impl, DensityKind kind, Vector mean_hint,
                 Matrix cov_hint);

    int dim() const { return impl_->dim(); }
    DensityKind kind() const { return kind_; }

    double value(const Vector& x) const;
    Vector grad(const Vector& x) const;
    Matrix hess(const Vector& x) const;
    double log_value(const Vector& x) const { return impl_->log_value(x); }
    Vector grad_log(const Vector& x) const { return impl_->grad_log(x); }
    Matrix hess_log(const Vector& x) const { return impl_->hess_log(x); }

    const Vector& mean_hint() const { return mean_; }
    const Matrix& covariance_hint() const { return cov_; }

    /// Exact parameters when the density is Gaussian.
    const std::optional<GaussianSpec>& gaussian() const { return gaussian_; }
    /// Mixture weights and components (empty unless kind == mixture).
    const std::vector<double>& mixture_weights() const { return mix_w_; }
    const std::vector<DensityModel>& mixture_components() const { return mix_c_; }
    const std::optional<Box>& support() const { return support_; }

    QuadratureGrid default_grid(int m = 40) const;

    // Construction helpers used by the factory functions.
    DensityModel& with_gaussian(GaussianSpec g);
    DensityModel& with_mixture(std::vector<double> w, std::vector<DensityModel> c);
    DensityModel& with_support(Box b);

private:
    std::shared_ptr<const Impl> impl_;
    DensityKind kind_ = DensityKind::custom;
    Vector mean_;
    Matrix cov_;
    std::optional<GaussianSpec> gaussian_;
    std::vector<double> mix_w_;
    std::vector<DensityModel> mix_c_;
    std::optional<Box> support_;
};

DensityModel make_gaussian(const GaussianSpec& spec);
DensityModel make_standard_gaussian(int n);
DensityModel make_mixture(const std::vector<double>& weights,
                          const std::vector<DensityModel>& components);
/// Independent product of lower-dimensional densities (coordinates concatenated).
DensityModel make_product(const std::vector<DensityModel>& factors);

struct CustomDensity {
    int dim = 1;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> grad;
    std::function<Matrix(const Vector&)> hess;
    Box support;
};
DensityModel make_custom(const CustomDensity& spec);

/// x ↦ |det A| f(Ax).
DensityModel pushforward_linear(const DensityModel& mu, const Matrix& A);

struct Estimate {
    double value = 0.0;
    double error = 0.0;
    bool flagged = false;
};

using ScalarField = std::function<double(const Vector&)>;

/// ∫ g dμ with the m versus m−2 error estimate.
Estimate integrate(const ScalarField& g, const DensityModel& mu, const QuadratureGrid& grid,
                   double tolerance = 1e-6);
/// ∫ h dx over the grid (Lebesgue weights).
Estimate integrate_lebesgue(const ScalarField& h, const QuadratureGrid& grid,
                            double tolerance = 1e-6);
/// ∫ h dγ_n over the grid.
Estimate integrate_gaussian(const ScalarField& h, const QuadratureGrid& grid,
                            double tolerance = 1e-6);

/// Finite-difference steps.
inline constexpr double kFdFirst = 1e-4;
inline constexpr double kFdSecond = 1e-3;
Vector fd_gradient(const ScalarField& f, const Vector& x, double h = kFdFirst);
Matrix fd_hessian(const ScalarField& f, const Vector& x, double h = kFdSecond);

/// Finite product space 𝕏ⁿ with identical base weights.
class DiscreteProductSpace {
public:
    DiscreteProductSpace(int base_size, int factors, std::vector<double> base_weights);
    static DiscreteProductSpace hamming_cube(int n);

    int base_size() const { return k_; }
    int factors() const { return n_; }
    const std::vector<double>& base_weights() const { return w_; }
    std::size_t states() const { return states_; }
    /// Digit of coordinate i in state s.
    int digit(std::size_t s, int i) const;
    std::size_t with_digit(std::size_t s, int i, int d) const;
    double probability(std::size_t s) const;
    std::size_t stride(int i) const { return strides_[i]; }

private:
    int k_, n_;
    std::vector<double> w_;
    std::size_t states_;
    std::vector<std::size_t> strides_;
};

}  // namespace intrinsic
