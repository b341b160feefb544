#include "intrinsic/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace intrinsic {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

SymEig sym_eig(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("sym_eig: matrix not square");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: decomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

Matrix sym_apply(const Matrix& m, const std::function<double(double)>& fn) {
    SymEig e = sym_eig(m);
    Vector d = e.values.unaryExpr(fn);
    return e.vectors * d.asDiagonal() * e.vectors.transpose();
}

Matrix sym_sqrt_psd(const Matrix& m) {
    return sym_apply(m, [](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
}

Matrix sym_inverse(const Matrix& m) {
    SymEig e = sym_eig(m);
    for (int i = 0; i < e.values.size(); ++i)
        if (std::abs(e.values(i)) <= kEigenClip)
            throw std::runtime_error("sym_inverse: singular matrix, eigenvalue " +
                                     std::to_string(e.values(i)));
    Vector d = e.values.cwiseInverse();
    return e.vectors * d.asDiagonal() * e.vectors.transpose();
}

double min_eigenvalue(const Matrix& m) { return sym_eig(m).values.minCoeff(); }
double max_eigenvalue(const Matrix& m) { return sym_eig(m).values.maxCoeff(); }

bool is_psd(const Matrix& m, double tol) { return min_eigenvalue(m) >= -tol; }
bool is_pd(const Matrix& m, double tol) { return min_eigenvalue(m) > tol; }
bool psd_leq(const Matrix& a, const Matrix& b, double tol) { return is_psd(b - a, tol); }

double log_det_sym(const Matrix& m) {
    SymEig e = sym_eig(m);
    double s = 0.0;
    for (int i = 0; i < e.values.size(); ++i) {
        double v = e.values(i);
        if (v < -kEigenClip) throw std::runtime_error("log_det_sym: matrix not PSD");
        if (v <= kEigenClip) return -std::numeric_limits<double>::infinity();
        s += std::log(v);
    }
    return s;
}

double asymmetry(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace intrinsic
