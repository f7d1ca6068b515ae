#include "mk/linalg.hpp"

#include <cmath>

#include "mk/errors.hpp"

namespace mk {

Eigen::MatrixXd min_norm_lstsq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rcond) {
    if (a.rows() != b.rows()) throw_numeric("min_norm_lstsq: row-count mismatch");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rcond);
    return svd.solve(b);
}

SymEigen sym_eigen(const Eigen::MatrixXd& matrix, double sym_tol) {
    if (matrix.rows() != matrix.cols()) throw_data("sym_eigen: matrix not square");
    const double scale = matrix.cwiseAbs().maxCoeff();
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (scale > 0.0 && asym > sym_tol * scale) {
        throw_data("sym_eigen: matrix not symmetric (max asymmetry " + std::to_string(asym) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
    if (solver.info() != Eigen::Success) {
        throw_numeric("symmetric eigensolver failed to converge (n=" +
                      std::to_string(matrix.rows()) + ", max |entry| " + std::to_string(scale) +
                      ")");
    }
    return SymEigen{solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace mk
