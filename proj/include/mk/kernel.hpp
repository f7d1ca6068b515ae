#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mk/ar_model.hpp"

namespace mk {

// Distance fed to the exponential: the squared Euclidean norm (standard RBF,
// the default) or the plain norm.
enum class NormMode { squared, plain };

NormMode parse_norm_mode(const std::string& text);
std::string norm_mode_name(NormMode mode);

struct KernelConfig {
    double gamma = 0.1;
    NormMode norm_mode = NormMode::squared;
};

// Symmetric pairwise-affinity matrix: values(i, j) = exp(-gamma * d(x_i, x_j)).
// Structural guarantees, checked at construction: exact symmetry (each pair
// computed once and mirrored), unit diagonal, entries in [0, 1]. Off-diagonal
// entries are mathematically positive but may underflow to zero for extreme
// gamma; degrees stay positive regardless because the diagonal is 1.
class KernelMatrix {
public:
    KernelMatrix(Eigen::MatrixXd values, std::vector<std::string> object_ids);

    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& object_ids() const { return object_ids_; }
    Eigen::Index size() const { return values_.rows(); }

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> object_ids_;
};

// Pairwise affinities over feature rows. Requires n >= 2 and finite
// features. `threads` > 1 computes row blocks in parallel; the result is
// identical at any thread count.
KernelMatrix rbf_kernel(const FeatureMatrix& features, const KernelConfig& config = {},
                        int threads = 1);

struct KernelStats {
    double min_off_diag = 0.0;
    double max_off_diag = 0.0;
    double mean_off_diag = 0.0;
    int effective_rank = 0;  // eigenvalues above tol * largest eigenvalue
};

KernelStats kernel_stats(const KernelMatrix& kernel, double tol = 1e-8);

// Full-matrix CSV: header `object_id,<id_0>,...,<id_{n-1}>`, one row per id.
std::string kernel_to_csv(const KernelMatrix& kernel);
void write_kernel(const std::string& path, const KernelMatrix& kernel);
KernelMatrix load_kernel(const std::string& path);

}  // namespace mk
