#include "mk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mk/csv.hpp"
#include "mk/errors.hpp"
#include "mk/linalg.hpp"

namespace mk {

Eigen::MatrixXd normalized_laplacian(const KernelMatrix& kernel) {
    const Eigen::Index n = kernel.size();
    const Eigen::MatrixXd& a = kernel.values();

    Eigen::VectorXd inv_sqrt_degree(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double degree = a.row(i).sum();
        if (!(degree > 0.0)) {
            throw_numeric("zero degree at row " + std::to_string(i) +
                          " (kernel diagonal should make this impossible)");
        }
        inv_sqrt_degree(i) = 1.0 / std::sqrt(degree);
    }

    Eigen::MatrixXd lap(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        lap(i, i) = 1.0 - a(i, i) * inv_sqrt_degree(i) * inv_sqrt_degree(i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = -a(i, j) * inv_sqrt_degree(i) * inv_sqrt_degree(j);
            lap(i, j) = v;
            lap(j, i) = v;
        }
    }
    return lap;
}

EigenPairs smallest_eigenpairs(const Eigen::MatrixXd& sym, int k) {
    const Eigen::Index n = sym.rows();
    if (k < 1 || k > n) {
        throw_config("eigenpair count k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(n) + "]");
    }
    const SymEigen eig = sym_eigen(sym);

    EigenPairs out;
    out.values = eig.values.head(k);
    out.vectors = eig.vectors.leftCols(k);

    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::Index pivot = 0;
        out.vectors.col(c).cwiseAbs().maxCoeff(&pivot);
        if (out.vectors(pivot, c) < 0.0) out.vectors.col(c) = -out.vectors.col(c);

        const double residual =
            (sym * out.vectors.col(c) - out.values(c) * out.vectors.col(c)).norm();
        if (!(residual <= 1e-8)) {
            const double spread = eig.values(n - 1) - eig.values(0);
            throw_numeric("eigenpair " + std::to_string(c) + " residual " +
                          std::to_string(residual) + " exceeds 1e-8 (n=" + std::to_string(n) +
                          ", spectrum spread " + std::to_string(spread) + ")");
        }
    }
    return out;
}

SpectralEmbedding eigen_embed(const Eigen::MatrixXd& laplacian, int k) {
    const EigenPairs pairs = smallest_eigenpairs(laplacian, k);
    SpectralEmbedding embedding;
    embedding.eigenvalues = pairs.values;
    embedding.coordinates = pairs.vectors;
    for (Eigen::Index i = 0; i < embedding.coordinates.rows(); ++i) {
        const double norm = embedding.coordinates.row(i).norm();
        if (norm > 0.0) embedding.coordinates.row(i) /= norm;
    }
    return embedding;
}

namespace {

double assign_labels(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::vector<int>& labels) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centers.rows();
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d2 = (points.row(i) - centers.row(0)).squaredNorm();
        for (Eigen::Index c = 1; c < k; ++c) {
            const double d2 = (points.row(i) - centers.row(c)).squaredNorm();
            if (d2 < best_d2) {  // strict: ties stay with the lowest index
                best_d2 = d2;
                best = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
        inertia += best_d2;
    }
    return inertia;
}

Eigen::MatrixXd kmeans_pp_init(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd centers(k, points.cols());
    std::vector<bool> is_center(static_cast<std::size_t>(n), false);

    const Eigen::Index first = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    centers.row(0) = points.row(first);
    is_center[static_cast<std::size_t>(first)] = true;

    Eigen::VectorXd d2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2(i) = (points.row(i) - centers.row(0)).squaredNorm();
    }

    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index chosen = -1;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double cumulative = 0.0;
            Eigen::Index last_positive = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (d2(i) > 0.0) last_positive = i;
                cumulative += d2(i);
                if (cumulative > r) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) chosen = last_positive;  // roundoff at the far end
        }
        if (chosen < 0) {
            // All remaining distances vanish (duplicated points): take the
            // lowest-index point that is not yet a center.
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!is_center[static_cast<std::size_t>(i)]) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) chosen = 0;
        }
        centers.row(c) = points.row(chosen);
        is_center[static_cast<std::size_t>(chosen)] = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            d2(i) = std::min(d2(i), (points.row(i) - centers.row(c)).squaredNorm());
        }
    }
    return centers;
}

// Move each empty cluster's center onto the point farthest from its current
// center, relabelling that point. Skipped when the farthest distance is zero
// (all points coincide with their centers); such clusters stay empty.
void relocate_empty_clusters(const Eigen::MatrixXd& points, Eigen::MatrixXd& centers,
                             std::vector<int>& labels) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centers.rows();
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (int label : labels) ++counts[static_cast<std::size_t>(label)];

    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (Eigen::Index c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] != 0) continue;
        Eigen::Index farthest = -1;
        double farthest_d2 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            const auto owner = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
            const double d2 = (points.row(i) - centers.row(owner)).squaredNorm();
            if (d2 > farthest_d2) {
                farthest_d2 = d2;
                farthest = i;
            }
        }
        if (farthest < 0) continue;  // nothing is displaced; leave the cluster empty
        taken[static_cast<std::size_t>(farthest)] = true;
        --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(farthest)])];
        labels[static_cast<std::size_t>(farthest)] = static_cast<int>(c);
        ++counts[static_cast<std::size_t>(c)];
        centers.row(c) = points.row(farthest);
    }
}

void update_centers(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                    Eigen::MatrixXd& centers) {
    const Eigen::Index k = centers.rows();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const auto c = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
        sums.row(c) += points.row(i);
        ++counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
        // empty clusters keep their center; relocation handles them
    }
}

}  // namespace

KmeansRun kmeans_single_run(const Eigen::MatrixXd& points, int k, Rng rng, int max_iter,
                            double tol) {
    const Eigen::Index n = points.rows();
    KmeansRun run;
    run.labels.assign(static_cast<std::size_t>(n), 0);

    Eigen::MatrixXd centers = kmeans_pp_init(points, k, rng);
    for (int iter = 0; iter < max_iter; ++iter) {
        run.inertia = assign_labels(points, centers, run.labels);
        run.inertia_trace.push_back(run.inertia);
        relocate_empty_clusters(points, centers, run.labels);

        const Eigen::MatrixXd previous = centers;
        update_centers(points, run.labels, centers);
        const double movement = (centers - previous).rowwise().norm().maxCoeff();
        if (movement <= tol) break;
    }
    // Sync labels and inertia with the final centers.
    run.inertia = assign_labels(points, centers, run.labels);
    run.inertia_trace.push_back(run.inertia);
    return run;
}

namespace {

void canonicalize_labels(std::vector<int>& labels) {
    std::unordered_map<int, int> remap;
    int next = 0;
    for (int& label : labels) {
        auto [it, inserted] = remap.emplace(label, next);
        if (inserted) ++next;
        label = it->second;
    }
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, const ClusterConfig& config,
                         std::vector<std::string> object_ids) {
    const Eigen::Index n = points.rows();
    if (config.k < 1) throw_config("k must be >= 1");
    if (n < config.k) {
        throw_data("k-means needs at least k=" + std::to_string(config.k) + " points, got " +
                   std::to_string(n));
    }
    if (config.restarts < 1) throw_config("restarts must be >= 1");
    if (!object_ids.empty() && static_cast<Eigen::Index>(object_ids.size()) != n) {
        throw_data("object id count does not match point count");
    }

    KmeansRun best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < config.restarts; ++r) {
        KmeansRun run = kmeans_single_run(
            points, config.k, Rng::substream(config.seed, static_cast<std::uint64_t>(r)),
            config.max_iter, config.tol);
        if (run.inertia < best.inertia) best = std::move(run);
    }

    canonicalize_labels(best.labels);
    return ClusterAssignment{std::move(best.labels), std::move(object_ids), best.inertia};
}

ClusterAssignment spectral_cluster(const KernelMatrix& kernel, const ClusterConfig& config) {
    const Eigen::Index n = kernel.size();
    if (config.k < 2 || config.k > n) {
        throw_config("cluster count k=" + std::to_string(config.k) + " outside [2, " +
                     std::to_string(n) + "]");
    }
    const Eigen::MatrixXd lap = normalized_laplacian(kernel);
    const SpectralEmbedding embedding = eigen_embed(lap, config.k);

    constexpr double slack = 1e-10;
    if (embedding.eigenvalues(0) < -slack ||
        embedding.eigenvalues(embedding.eigenvalues.size() - 1) > 2.0 + slack) {
        throw_numeric("Laplacian eigenvalues escape [0, 2]: [" +
                      std::to_string(embedding.eigenvalues(0)) + ", " +
                      std::to_string(embedding.eigenvalues(embedding.eigenvalues.size() - 1)) +
                      "]");
    }
    return kmeans(embedding.coordinates, config, kernel.object_ids());
}

std::string labels_to_csv(const ClusterAssignment& assignment) {
    std::string out = "object_id,label\n";
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
        check_csv_safe(assignment.object_ids[i]);
        out += assignment.object_ids[i];
        out += ',';
        out += format_int(assignment.labels[i]);
        out += '\n';
    }
    return out;
}

void write_labels(const std::string& path, const ClusterAssignment& assignment) {
    write_text_file(path, labels_to_csv(assignment));
}

ClusterAssignment load_labels(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header != std::vector<std::string>{"object_id", "label"}) {
        throw_data(path + ": expected header 'object_id,label'");
    }
    ClusterAssignment out;
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        out.object_ids.push_back(row[0]);
        const std::int64_t label =
            parse_int(row[1], path + ": line " + std::to_string(line_no));
        if (label < 0) throw_data(path + ": negative label at line " + std::to_string(line_no));
        out.labels.push_back(static_cast<int>(label));
    }
    return out;
}

std::string embedding_to_csv(const SpectralEmbedding& embedding,
                             const std::vector<std::string>& object_ids) {
    const Eigen::Index n = embedding.coordinates.rows();
    const Eigen::Index k = embedding.coordinates.cols();
    if (static_cast<Eigen::Index>(object_ids.size()) != n) {
        throw_data("embedding id count does not match row count");
    }
    std::string out = "object_id";
    for (Eigen::Index c = 0; c < k; ++c) {
        out += ",e";
        out += format_int(c);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        check_csv_safe(object_ids[static_cast<std::size_t>(i)]);
        out += object_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < k; ++c) {
            out += ',';
            out += format_double(embedding.coordinates(i, c));
        }
        out += '\n';
    }
    return out;
}

std::string eigenvalues_to_text(const Eigen::VectorXd& eigenvalues) {
    std::string out;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        out += format_double(eigenvalues(i));
        out += '\n';
    }
    return out;
}

}  // namespace mk
