#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "mk/trajectory.hpp"

namespace mk {

struct ArConfig {
    int order = 5;              // number of lags p
    bool fit_intercept = true;  // fit the constant term (always dropped from features)
};

// Fitted motion model for one trajectory segment:
//   x_t = sum_j A_j x_{t-j} + C
// residual_rms is the root of the mean squared one-step prediction error
// over the fitting rows, mean_t ||x_t - x_hat_t||^2, in pixels.
struct ArParameters {
    std::vector<Eigen::Matrix2d> matrices;  // A_1 .. A_p
    Eigen::Vector2d intercept = Eigen::Vector2d::Zero();
    double residual_rms = 0.0;

    int order() const { return static_cast<int>(matrices.size()); }
};

// Least-squares fit of the order-p model, stacking one row
// (x_{t-1}, ..., x_{t-p}, 1) -> x_t per usable step. Both coordinates share
// the design matrix (two right-hand-side columns). Rank-deficient designs
// (constant or collinear tracks) resolve to the minimum-norm solution with a
// relative singular-value cutoff of 1e-10. Requires segment length >= p + 1.
ArParameters fit_ar(const Trajectory& segment, const ArConfig& config = {});

// One-step prediction. history[0] is the most recent position x_{t-1},
// history[p-1] the oldest; history.size() must equal the model order.
Eigen::Vector2d predict(const ArParameters& params, std::span<const Eigen::Vector2d> history);

// Flattened transition matrices: A_1 row-major, then A_2, ..., then A_p
// (4p values; the intercept is excluded).
struct FeatureVector {
    std::string object_id;
    Eigen::VectorXd values;
};

FeatureVector featurize(const ArParameters& params, std::string object_id);

// Row i = featurize(fit_ar(trajectory i)); n x 4p, rows in corpus order.
struct FeatureMatrix {
    std::vector<std::string> object_ids;
    Eigen::MatrixXd values;
};

// `threads` > 1 splits the corpus across worker threads; the result is
// byte-identical at any thread count (each row is computed independently).
FeatureMatrix featurize_corpus(const TrajectoryCorpus& corpus, const ArConfig& config = {},
                               int threads = 1);

std::string features_to_csv(const FeatureMatrix& features);
void write_features(const std::string& path, const FeatureMatrix& features);
FeatureMatrix load_features(const std::string& path);

}  // namespace mk
