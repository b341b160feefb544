#pragma once

#include <string>
#include <vector>

#include "intrinsic/linalg.hpp"

namespace intrinsic {

/// Commuting symmetric pair (A, B) with rate γ, defining C(t) = (e^{γt}/γ)A + tB.
class CommutingPair {
public:
    CommutingPair(Matrix A, Matrix B, double gamma);

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    double gamma() const { return gamma_; }
    int dim() const { return static_cast<int>(A_.rows()); }
    /// Shared eigenbasis (columns) and the diagonal entries of A and B in it.
    const Matrix& basis() const { return Q_; }
    const Vector& a() const { return a_; }
    const Vector& b() const { return b_; }
    /// Diagonal of C(t) in the shared basis.
    Vector c_diag(double t) const;

private:
    Matrix A_, B_, Q_;
    Vector a_, b_;
    double gamma_;
};

Matrix c_tensor(const CommutingPair& pair, double t);
/// e^{C(t) − C(t_ref)}; t_ref = none gives e^{C(t)}.
Matrix exp_c(const CommutingPair& pair, double t);
Matrix exp_c_shifted(const CommutingPair& pair, double t, double t_ref);
/// ∫_{t0}^{t1} e^{2C(s)} ds.
Matrix integral_e2c(const CommutingPair& pair, double t0, double t1);
/// ∫_{t0}^{t1} e^{2C(s) − 2C(t_ref)} ds, evaluated eigenvalue-wise.
Matrix integral_e2c_shifted(const CommutingPair& pair, double t0, double t1, double t_ref);

struct EnvelopeValue {
    Matrix value;
    double factor_min_eig = 0.0;  // smallest eigenvalue of the inverted factor
};

/// Lower comparison solution started from V(ε) = v_eps.
EnvelopeValue lower_envelope(const CommutingPair& pair, const Matrix& v_eps, double eps, double t);
/// Upper comparison solution ending at V(T) = v_T.
EnvelopeValue upper_envelope(const CommutingPair& pair, const Matrix& v_T, double T, double t);

/// ½∫_{t0}^{t1} tr of an envelope, by adaptive Simpson.
double envelope_trace_integral(const std::function<Matrix(double)>& envelope, double t0, double t1,
                               double rel_tol = 1e-9);

struct RiccatiState {
    std::vector<double> times;
    std::vector<Matrix> values;
    double trace_integral = 0.0;  // ∫ tr U over the covered interval
    bool completed = true;
    double blowup_time = 0.0;
};

enum class Boundary { at_zero, at_end };

/// Master matrix ODE
///   U' = U² − uU − Uu + u² + (n−1)κU,  u(t) = e^{−nκ(T−t)} J + (c/n) Id,
/// from U(0) or backwards from U(T).
RiccatiState integrate_master_ode(const Matrix& J, double c, double kappa, int n, double T,
                                  Boundary boundary, const Matrix& U_boundary,
                                  double rel_tol = 1e-10);

/// ([U0 − H]⁻¹ − t)⁻¹ + H, written as (Id − tX)⁻¹X + H with X = U0 − H.
Matrix flat_closed_form(const Matrix& U0, const Matrix& H, double t);

enum class XiBranch { tan, linear, tanh };
std::string to_string(XiBranch b);

/// σ' = σ² + ασ + β with σ(0) = c; λ = β − α²/4.
struct ScalarRiccatiParams {
    double alpha = 0.0;
    double beta = 0.0;
    double c = 0.0;
    double lambda() const { return beta - 0.25 * alpha * alpha; }
    XiBranch branch() const;
};

/// ξ_λ(t); the comparison solution is ξ_λ(t) − α/2. Throws past a blow-up.
double scalar_xi(const ScalarRiccatiParams& p, double t);
double scalar_sigma(const ScalarRiccatiParams& p, double t);
/// Blow-up time of ξ started at y (inf when none).
double xi_blowup_time(double lambda, double y);
/// ∫_0^T ξ(t) dt for ξ' = ξ² + λ, ξ(0) = y. Throws past a blow-up.
double xi_integral(double lambda, double y, double T);

struct HamiltonBound {
    double value = 0.0;
    bool supported = true;
    std::string regime;
};

/// Upper bound on the spectrum of −∇²log P_Tf for κ ≤ 0.
/// ratio = (4/(n²κ))·ΔP_Tf/P_Tf (ignored for κ = 0).
HamiltonBound hamilton_bound(double kappa, int n, double T, double ratio);

struct NgeBracket {
    double lower = 0.0;
    double upper = 0.0;
    double lambda = 0.0;
    XiBranch branch = XiBranch::linear;
    std::string note;
};

/// Entropy bracket on hyperbolic space from the scalar comparison of m(t).
/// sigma_start: eigenvalues of m(0) = −∇²log P_Tf(x); sigma_end: eigenvalues of
/// m(T) = 𝔼_μ[−∇²log f]; c_T = ΔP_Tf(x) with P_Tf(x) = 1.
NgeBracket nge_entropy_bracket(const std::vector<double>& sigma_start,
                               const std::vector<double>& sigma_end, double kappa, int n,
                               double T, double c_T);

}  // namespace intrinsic
