#pragma once

#include <Eigen/Dense>

namespace mk {

// Minimum-norm least-squares solution of A * X = B via SVD, treating
// singular values below `rcond` * sigma_max as zero. For full-column-rank A
// this is the unique least-squares fit; for rank-deficient systems it is the
// pseudo-inverse solution.
Eigen::MatrixXd min_norm_lstsq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               double rcond = 1e-10);

struct SymEigen {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(i) <-> values(i)
};

// Full eigendecomposition of a symmetric matrix. Throws ErrorKind::numeric
// on solver failure; asymmetry beyond `sym_tol` (relative to the largest
// entry) is a data error.
SymEigen sym_eigen(const Eigen::MatrixXd& matrix, double sym_tol = 1e-10);

}  // namespace mk
