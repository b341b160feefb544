#pragma once

#include <functional>
#include <vector>

#include "intrinsic/info_functionals.hpp"

namespace intrinsic {

/// Piecewise-linear concave function with Φ(0) = 0.
class ConcavePhi {
public:
    ConcavePhi() = default;
    /// Breakpoints must be positive and increasing; the origin is implicit.
    ConcavePhi(std::vector<double> breakpoints, std::vector<double> values);

    double operator()(double e) const;
    bool extrapolates(double e) const { return e > xs_.back(); }
    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }
    std::vector<double> slopes() const;
    bool is_concave(double tol = 1e-12) const;

private:
    std::vector<double> xs_{0.0}, ys_{0.0};
};

/// Energy and entropy ratios of a positive two-point function (f0, f1).
struct TwoPointSample {
    double energy;   // ℰ(f, f^{p−1}) / 𝔼 f^p
    double entropy;  // Ent[f^p] / 𝔼 f^p
};
TwoPointSample two_point_sample(double f0, double f1, double p, const std::vector<double>& weights,
                                double c_conv = kDefaultConvention);

ConcavePhi calibrate_phi(double p, const DiscreteProductSpace& base, int resolution = 2000,
                         double c_conv = kDefaultConvention);

/// f ↦ f^{p−1}, or log f at p = 1.
std::vector<double> companion_power(const std::vector<double>& f, double p);

struct TensorizedBound {
    double lhs = 0.0;
    double rhs_intrinsic = 0.0;
    double rhs_ps = 0.0;
    std::vector<double> coordinate_energy;  // 𝔼ℰ_i(f, f^{p−1})
    bool extrapolated = false;
};

TensorizedBound tensorized_bound(const std::vector<double>& f, const ConcavePhi& phi, double p,
                                 const DiscreteProductSpace& space,
                                 double c_conv = kDefaultConvention);

/// Function on the sub-product spanned by the listed coordinates (first coordinate varies fastest).
struct SubProductFunction {
    std::vector<int> coords;
    std::vector<double> values;
};

struct FunctionalPair {
    std::function<double(const SubProductFunction&, int)> Q;
    std::function<double(const SubProductFunction&, int)> M;
};

SubProductFunction full_function(const std::vector<double>& f, const DiscreteProductSpace& space);
/// Restriction of f to coordinate i with the others frozen at state s.
SubProductFunction restriction(const std::vector<double>& f, const DiscreteProductSpace& space,
                               int i, std::size_t s);

struct GeneralTensorizeResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool assumption_holds = true;
    double assumption_worst = 0.0;   // largest violation of the one-coordinate assumption
    double disintegration_defect = 0.0;
};

GeneralTensorizeResult general_tensorize(const std::vector<double>& f,
                                         const std::vector<FunctionalPair>& pairs,
                                         const ConcavePhi& phi, const DiscreteProductSpace& space);

/// Ent[f] and Σ_i ∫ Ent_{π_i}[f_{x∼i}] dμ_{∼i}.
struct Subadditivity {
    double entropy = 0.0;
    double sum_conditional = 0.0;
};
Subadditivity subadditivity_check(const std::vector<double>& f, const DiscreteProductSpace& space);

/// Dirichlet-form pair on a sub-product: M_i(g) = ℰ_i(g, g^{p−1}) with product weights.
double subproduct_dirichlet(const SubProductFunction& g, int i, const DiscreteProductSpace& space,
                            double p, double c_conv = kDefaultConvention);
double subproduct_mean(const SubProductFunction& g, const DiscreteProductSpace& space,
                       const std::function<double(double)>& transform);

}  // namespace intrinsic
