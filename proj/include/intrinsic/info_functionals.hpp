#pragma once

#include <string>
#include <vector>

#include "intrinsic/measures.hpp"

namespace intrinsic {

/// Reference measure: Lebesgue or a density.
struct Reference {
    bool lebesgue = true;
    DensityModel density;
    static Reference lebesgue_measure() { return {}; }
    static Reference of(const DensityModel& d) { return {false, d}; }
};

struct EntropyValue {
    double value = 0.0;
    std::string estimator = "analytic";  // analytic | quadrature | monte-carlo | enumeration
    double error = 0.0;
};

struct FisherMatrix {
    Matrix matrix;
    double trace = 0.0;
    std::string estimator = "analytic";
    double error = 0.0;
};

/// −(n/2) log(2πe).
double gaussian_entropy_lebesgue(int n);

EntropyValue relative_entropy(const DensityModel& mu, const Reference& nu,
                              const QuadratureGrid& grid);
EntropyValue relative_entropy(const DensityModel& mu, const Reference& nu);

FisherMatrix fisher_matrix(const DensityModel& mu, const Reference& nu, const QuadratureGrid& grid);
FisherMatrix fisher_matrix(const DensityModel& mu, const Reference& nu);

/// Scalar Fisher information from ∇(dμ/dν) directly (independent of fisher_matrix).
Estimate scalar_fisher(const DensityModel& mu, const Reference& nu, const QuadratureGrid& grid);

/// Ent_π[f] on a finite probability space.
EntropyValue entropy_functional(const std::vector<double>& f, const std::vector<double>& pi);
/// Ent_{γ_n}[f] on a Gaussian grid.
EntropyValue entropy_functional(const ScalarField& f, const QuadratureGrid& grid);

enum class Weight { gaussian, lebesgue };
Estimate lp_norm(const ScalarField& u, double p, Weight weight, const QuadratureGrid& grid);

/// M_ij = ∫ x_i x_j u² dγ_n.
Matrix weighted_second_moment_matrix(const ScalarField& u, const QuadratureGrid& grid);

/// Convention constant of the discrete derivative on two-point factors.
inline constexpr double kDefaultConvention = 0.5;

/// ℰ_i(f,g) = c² 𝔼[(f(x) − f(x⊕i))(g(x) − g(x⊕i))] on a space with two-point factors.
double dirichlet_form_coordinate(const std::vector<double>& f, const std::vector<double>& g, int i,
                                 const DiscreteProductSpace& space,
                                 double c_conv = kDefaultConvention);

/// ½ log det I, ½ Σ log I_kk and (n/2) log(tr I / n).
struct LogDetChain {
    double log_det = 0.0;
    double log_diag = 0.0;
    double log_trace = 0.0;
};
LogDetChain log_det_chain(const Matrix& info);

}  // namespace intrinsic
