#pragma once

#include <Eigen/Dense>
#include <functional>

namespace intrinsic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenvalue clipping used by every PSD test.
inline constexpr double kEigenClip = 1e-12;

struct SymEig {
    Vector values;   // ascending
    Matrix vectors;  // columns
};

Matrix symmetrize(const Matrix& m);
SymEig sym_eig(const Matrix& m);

/// Applies a scalar function to the spectrum of a symmetric matrix.
Matrix sym_apply(const Matrix& m, const std::function<double(double)>& fn);
Matrix sym_sqrt_psd(const Matrix& m);
Matrix sym_inverse(const Matrix& m);

double min_eigenvalue(const Matrix& m);
double max_eigenvalue(const Matrix& m);
bool is_psd(const Matrix& m, double tol = kEigenClip);
bool is_pd(const Matrix& m, double tol = kEigenClip);
/// True when a ⪯ b, i.e. b − a is PSD up to tol.
bool psd_leq(const Matrix& a, const Matrix& b, double tol = kEigenClip);

/// log det of a symmetric PD matrix; −∞ for singular PSD input.
double log_det_sym(const Matrix& m);
double asymmetry(const Matrix& m);

}  // namespace intrinsic
