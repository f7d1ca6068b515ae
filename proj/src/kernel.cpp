#include "mk/kernel.hpp"

#include <cmath>
#include <thread>

#include "mk/csv.hpp"
#include "mk/errors.hpp"
#include "mk/linalg.hpp"

namespace mk {

NormMode parse_norm_mode(const std::string& text) {
    if (text == "squared") return NormMode::squared;
    if (text == "plain") return NormMode::plain;
    throw_config("unknown norm mode '" + text + "' (expected 'squared' or 'plain')");
}

std::string norm_mode_name(NormMode mode) {
    return mode == NormMode::squared ? "squared" : "plain";
}

KernelMatrix::KernelMatrix(Eigen::MatrixXd values, std::vector<std::string> object_ids)
    : values_(std::move(values)), object_ids_(std::move(object_ids)) {
    const Eigen::Index n = values_.rows();
    if (n != values_.cols()) throw_data("kernel matrix not square");
    if (static_cast<Eigen::Index>(object_ids_.size()) != n) {
        throw_data("kernel matrix id count does not match dimension");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values_(i, i) != 1.0) {
            throw_data("kernel diagonal entry at " + std::to_string(i) + " is not 1");
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = values_(i, j);
            if (v != values_(j, i)) throw_data("kernel matrix not symmetric");
            if (!(v >= 0.0 && v <= 1.0)) {
                throw_data("kernel entry (" + std::to_string(i) + "," + std::to_string(j) +
                           ") outside [0, 1]");
            }
        }
    }
}

KernelMatrix rbf_kernel(const FeatureMatrix& features, const KernelConfig& config, int threads) {
    if (!(config.gamma > 0.0)) throw_config("gamma must be positive");
    const Eigen::Index n = features.values.rows();
    if (n < 2) throw_data("kernel needs at least 2 feature rows, got " + std::to_string(n));
    if (!features.values.allFinite()) throw_data("feature matrix contains non-finite values");

    Eigen::MatrixXd values(n, n);
    const bool squared = config.norm_mode == NormMode::squared;

    // Upper triangle only; mirrored below so symmetry holds bit-for-bit.
    auto fill_rows = [&](Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index i = lo; i < hi; ++i) {
            values(i, i) = 1.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double d2 = (features.values.row(i) - features.values.row(j)).squaredNorm();
                const double d = squared ? d2 : std::sqrt(d2);
                values(i, j) = std::exp(-config.gamma * d);
            }
        }
    };

    const int workers = std::max(1, threads);
    if (workers == 1) {
        fill_rows(0, n);
    } else {
        std::vector<std::thread> pool;
        const Eigen::Index chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const Eigen::Index lo = w * chunk;
            const Eigen::Index hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(fill_rows, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            values(j, i) = values(i, j);
        }
    }
    return KernelMatrix(std::move(values), features.object_ids);
}

KernelStats kernel_stats(const KernelMatrix& kernel, double tol) {
    const Eigen::Index n = kernel.size();
    KernelStats stats;
    double min_v = 1.0, max_v = 0.0, sum = 0.0;
    std::int64_t count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double v = kernel.values()(i, j);
            min_v = std::min(min_v, v);
            max_v = std::max(max_v, v);
            sum += v;
            ++count;
        }
    }
    stats.min_off_diag = count ? min_v : 0.0;
    stats.max_off_diag = count ? max_v : 0.0;
    stats.mean_off_diag = count ? sum / static_cast<double>(count) : 0.0;

    const SymEigen eig = sym_eigen(kernel.values());
    const double largest = eig.values(n - 1);
    int rank = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (eig.values(i) > tol * largest) ++rank;
    }
    stats.effective_rank = rank;
    return stats;
}

std::string kernel_to_csv(const KernelMatrix& kernel) {
    const Eigen::Index n = kernel.size();
    std::string out = "object_id";
    for (const auto& id : kernel.object_ids()) {
        check_csv_safe(id);
        out += ',';
        out += id;
    }
    out += '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        out += kernel.object_ids()[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
            out += ',';
            out += format_double(kernel.values()(i, j));
        }
        out += '\n';
    }
    return out;
}

void write_kernel(const std::string& path, const KernelMatrix& kernel) {
    write_text_file(path, kernel_to_csv(kernel));
}

KernelMatrix load_kernel(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header[0] != "object_id") {
        throw_data(path + ": kernel CSV must start with an 'object_id' column");
    }
    const auto n = static_cast<Eigen::Index>(table.header.size()) - 1;
    if (static_cast<Eigen::Index>(table.rows.size()) != n) {
        throw_data(path + ": kernel CSV must be square (" + std::to_string(n) + " columns, " +
                   std::to_string(table.rows.size()) + " rows)");
    }
    std::vector<std::string> ids(table.header.begin() + 1, table.header.end());
    Eigen::MatrixXd values(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        if (row[0] != ids[static_cast<std::size_t>(i)]) {
            throw_data(path + ": kernel row order does not match header order at row " +
                       std::to_string(i + 2));
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            values(i, j) = parse_finite_double(
                row[static_cast<std::size_t>(j) + 1],
                path + ": line " + std::to_string(i + 2));
        }
    }
    return KernelMatrix(std::move(values), std::move(ids));
}

}  // namespace mk
