#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mk/kernel.hpp"
#include "mk/rng.hpp"

namespace mk {

struct ClusterConfig {
    int k = 5;
    std::uint64_t seed = 0;
    int restarts = 10;     // independent k-means++ initializations
    int max_iter = 300;    // Lloyd iterations per run
    double tol = 1e-9;     // max center movement at convergence
};

// Symmetric normalized graph Laplacian L = I - D^{-1/2} A D^{-1/2}, with
// degrees taken over the full kernel including the unit self-affinity.
// Symmetry is structural (each pair computed once and mirrored).
Eigen::MatrixXd normalized_laplacian(const KernelMatrix& kernel);

struct EigenPairs {
    Eigen::VectorXd values;   // k smallest, ascending
    Eigen::MatrixXd vectors;  // n x k, unit-norm columns
};

// The k smallest eigenpairs of a symmetric matrix. Every returned pair is
// verified to satisfy ||M v - lambda v||_2 <= 1e-8 (numeric error otherwise,
// with condition diagnostics). Eigenvector signs are fixed so the entry of
// largest magnitude (lowest index on ties) is positive.
EigenPairs smallest_eigenpairs(const Eigen::MatrixXd& sym, int k);

// Rows of the k smallest Laplacian eigenvectors, one row per object, each
// row scaled to unit Euclidean norm (rows that are exactly zero stay zero).
// When the input is a normalized Laplacian the eigenvalues lie in [0, 2] up
// to numerical slack.
struct SpectralEmbedding {
    Eigen::MatrixXd coordinates;  // n x k, row-normalized
    Eigen::VectorXd eigenvalues;  // ascending
};

SpectralEmbedding eigen_embed(const Eigen::MatrixXd& laplacian, int k);

// Canonicalized cluster labels: the first-occurring label is 0, the next new
// one 1, and so on. inertia is the k-means objective in the embedded space.
struct ClusterAssignment {
    std::vector<int> labels;
    std::vector<std::string> object_ids;
    double inertia = 0.0;
};

// One seeded k-means++ / Lloyd run, exposed for property tests: the
// inertia trace (one value per assignment step) is non-increasing.
struct KmeansRun {
    std::vector<int> labels;
    double inertia = 0.0;
    std::vector<double> inertia_trace;
};

KmeansRun kmeans_single_run(const Eigen::MatrixXd& points, int k, Rng rng, int max_iter,
                            double tol);

// Best of `restarts` seeded runs (lowest inertia; earlier restart wins
// ties). Deterministic for fixed (points, config): restart r draws from
// substream (seed, r). Points equidistant from several centers go to the
// lowest-index center; a cluster that empties is re-seeded at the farthest
// point (skipped when every distance is zero).
ClusterAssignment kmeans(const Eigen::MatrixXd& points, const ClusterConfig& config,
                         std::vector<std::string> object_ids = {});

// The full spectral pipeline: normalized Laplacian, k smallest eigenvectors,
// row normalization, then k-means in the embedded space.
ClusterAssignment spectral_cluster(const KernelMatrix& kernel, const ClusterConfig& config);

// Artifact emission/ingestion.
std::string labels_to_csv(const ClusterAssignment& assignment);
void write_labels(const std::string& path, const ClusterAssignment& assignment);
ClusterAssignment load_labels(const std::string& path);

std::string embedding_to_csv(const SpectralEmbedding& embedding,
                             const std::vector<std::string>& object_ids);
std::string eigenvalues_to_text(const Eigen::VectorXd& eigenvalues);

}  // namespace mk
