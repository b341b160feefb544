#pragma once

#include <optional>
#include <string>
#include <vector>

#include "intrinsic/measures.hpp"
#include "intrinsic/space_forms.hpp"

namespace intrinsic {

/// f on ℝⁿ given as a Gaussian density or a finite mixture of them; nullopt means f ≡ 1.
using FlatFunction = std::optional<DensityModel>;

/// μ = f·N(x, T·Id)/P_Tf(x), again a Gaussian mixture.
struct FlatPosterior {
    double log_PTf = 0.0;
    std::vector<double> weights;
    std::vector<Vector> means;
    std::vector<Matrix> covariances;
    Vector mean;
    Matrix covariance;
};

FlatPosterior flat_posterior(const FlatFunction& f, const Vector& x, double T);

/// log P_Tf(x) in closed form.
double flat_log_PTf(const FlatFunction& f, const Vector& x, double T);

struct FlatLocalResult {
    double entropy = 0.0;        // 𝖧(μ ‖ P_Tδ_x)
    double entropy_error = 0.0;
    double c = 0.0;              // ΔP_Tf(x)/P_Tf(x)
    double upper = 0.0;          // Tc/2 + ½ log det(Id − T·𝔼_μ∇²log f)
    double lower = 0.0;          // Tc/2 − ½ log det(Id + T∇²log P_Tf)
    double upper_dim = 0.0;      // trace versions
    double lower_dim = 0.0;
    Matrix hess_log_PTf;
    Matrix upper_matrix;         // Id − T·𝔼_μ∇²log f
    Matrix lower_matrix;         // Id + T∇²log P_Tf
    std::string estimator = "analytic";
};

/// Entropy and the four bounds of the flat local inequality; quadrature with m points per
/// axis for non-Gaussian f.
FlatLocalResult flat_local_lsi(const FlatFunction& f, const Vector& x, double T, int m = 40);

struct FlatHamilton {
    double max_eig = 0.0;        // of −∇²log P_Tf(x)
    double margin = 0.0;         // 1/T − max_eig
    double li_yau_lhs = 0.0;     // −Δlog P_Tf(x)
    double li_yau_margin = 0.0;  // n/T − li_yau_lhs
    double fd_max_eig = 0.0;     // same eigenvalue from finite differences of log P_Tf
};

FlatHamilton flat_hamilton(const FlatFunction& f, const Vector& x, double T);

/// sup-norm of ∇²P_Tf − P_T∇²f on flat space for a radial f: left side by finite
/// differences of the semigroup quadrature, right side by Gauss–Hermite quadrature.
double flat_commutation_residual(const SpaceForm& space, const RadialFunction& f, double T,
                                 const Vector& x, int m = 40);

}  // namespace intrinsic
