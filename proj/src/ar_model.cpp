#include "mk/ar_model.hpp"

#include <cmath>
#include <thread>

#include "mk/csv.hpp"
#include "mk/errors.hpp"
#include "mk/linalg.hpp"

namespace mk {

namespace {

constexpr double kRankCutoff = 1e-10;

// Design matrix rows (x_{t-1}, ..., x_{t-p}[, 1]) and targets x_t for
// t = p .. T-1.
void build_design(const Trajectory& segment, int order, bool intercept, Eigen::MatrixXd& design,
                  Eigen::MatrixXd& target) {
    const auto& pts = segment.points();
    const auto t_total = static_cast<std::int64_t>(pts.size());
    const std::int64_t rows = t_total - order;
    const std::int64_t cols = 2 * order + (intercept ? 1 : 0);
    design.resize(rows, cols);
    target.resize(rows, 2);
    for (std::int64_t r = 0; r < rows; ++r) {
        const std::int64_t t = r + order;
        for (int j = 1; j <= order; ++j) {
            design(r, 2 * (j - 1)) = pts[static_cast<std::size_t>(t - j)].x;
            design(r, 2 * (j - 1) + 1) = pts[static_cast<std::size_t>(t - j)].y;
        }
        if (intercept) design(r, cols - 1) = 1.0;
        target(r, 0) = pts[static_cast<std::size_t>(t)].x;
        target(r, 1) = pts[static_cast<std::size_t>(t)].y;
    }
}

}  // namespace

ArParameters fit_ar(const Trajectory& segment, const ArConfig& config) {
    if (config.order < 1) throw_config("AR order must be >= 1");
    const auto needed = static_cast<std::size_t>(config.order) + 1;
    if (segment.size() < needed) {
        throw_data("trajectory '" + segment.object_id() + "' has " +
                   std::to_string(segment.size()) + " points, need at least " +
                   std::to_string(needed) + " for order " + std::to_string(config.order));
    }

    Eigen::MatrixXd design, target;
    build_design(segment, config.order, config.fit_intercept, design, target);

    // Coefficient layout: rows [A_1^T; A_2^T; ...; A_p^T; C^T].
    const Eigen::MatrixXd coef = min_norm_lstsq(design, target, kRankCutoff);

    ArParameters params;
    params.matrices.reserve(static_cast<std::size_t>(config.order));
    for (int j = 0; j < config.order; ++j) {
        params.matrices.push_back(coef.block(2 * j, 0, 2, 2).transpose());
    }
    params.intercept =
        config.fit_intercept ? Eigen::Vector2d(coef.row(coef.rows() - 1)) : Eigen::Vector2d::Zero();

    const Eigen::MatrixXd residual = design * coef - target;
    params.residual_rms =
        std::sqrt(residual.rowwise().squaredNorm().mean());
    if (!std::isfinite(params.residual_rms) || !params.intercept.allFinite()) {
        throw_numeric("AR fit produced non-finite parameters for '" + segment.object_id() + "'");
    }
    return params;
}

Eigen::Vector2d predict(const ArParameters& params, std::span<const Eigen::Vector2d> history) {
    if (static_cast<int>(history.size()) != params.order()) {
        throw_data("predict: history length " + std::to_string(history.size()) +
                   " does not match model order " + std::to_string(params.order()));
    }
    Eigen::Vector2d next = params.intercept;
    for (std::size_t j = 0; j < history.size(); ++j) {
        next += params.matrices[j] * history[j];
    }
    return next;
}

FeatureVector featurize(const ArParameters& params, std::string object_id) {
    Eigen::VectorXd values(4 * params.order());
    for (int j = 0; j < params.order(); ++j) {
        const Eigen::Matrix2d& a = params.matrices[static_cast<std::size_t>(j)];
        values(4 * j + 0) = a(0, 0);
        values(4 * j + 1) = a(0, 1);
        values(4 * j + 2) = a(1, 0);
        values(4 * j + 3) = a(1, 1);
    }
    return FeatureVector{std::move(object_id), std::move(values)};
}

FeatureMatrix featurize_corpus(const TrajectoryCorpus& corpus, const ArConfig& config,
                               int threads) {
    if (config.order >= corpus.segment_length()) {
        throw_config("AR order " + std::to_string(config.order) +
                     " must be below segment length " + std::to_string(corpus.segment_length()));
    }
    const auto n = static_cast<std::int64_t>(corpus.size());
    FeatureMatrix out;
    out.object_ids = corpus.object_ids();
    out.values.resize(n, 4 * config.order);

    auto fit_range = [&](std::int64_t lo, std::int64_t hi, std::exception_ptr& error) {
        try {
            for (std::int64_t i = lo; i < hi; ++i) {
                const Trajectory& t = corpus.trajectories()[static_cast<std::size_t>(i)];
                const FeatureVector fv = featurize(fit_ar(t, config), t.object_id());
                out.values.row(i) = fv.values.transpose();
            }
        } catch (...) {
            error = std::current_exception();
        }
    };

    const int workers = std::max(1, threads);
    if (workers == 1 || n < 2) {
        std::exception_ptr error;
        fit_range(0, n, error);
        if (error) std::rethrow_exception(error);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        const std::int64_t chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::int64_t lo = w * chunk;
            const std::int64_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(fit_range, lo, hi, std::ref(errors[static_cast<std::size_t>(w)]));
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    return out;
}

std::string features_to_csv(const FeatureMatrix& features) {
    const auto dims = features.values.cols();
    std::string out = "object_id";
    for (Eigen::Index d = 0; d < dims; ++d) {
        out += ",f";
        out += format_int(d);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < features.values.rows(); ++i) {
        check_csv_safe(features.object_ids[static_cast<std::size_t>(i)]);
        out += features.object_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index d = 0; d < dims; ++d) {
            out += ',';
            out += format_double(features.values(i, d));
        }
        out += '\n';
    }
    return out;
}

void write_features(const std::string& path, const FeatureMatrix& features) {
    write_text_file(path, features_to_csv(features));
}

FeatureMatrix load_features(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header[0] != "object_id") {
        throw_data(path + ": feature CSV must start with an 'object_id' column");
    }
    const auto dims = static_cast<Eigen::Index>(table.header.size()) - 1;
    if (dims < 1) throw_data(path + ": feature CSV has no feature columns");
    FeatureMatrix out;
    out.values.resize(static_cast<Eigen::Index>(table.rows.size()), dims);
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        const std::string ctx = path + ": line " + std::to_string(line_no);
        out.object_ids.push_back(row[0]);
        for (Eigen::Index d = 0; d < dims; ++d) {
            out.values(static_cast<Eigen::Index>(line_no) - 2, d) =
                parse_finite_double(row[static_cast<std::size_t>(d) + 1], ctx);
        }
    }
    return out;
}

}  // namespace mk
