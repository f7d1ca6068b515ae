#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mk/ar_model.hpp"
#include "mk/csv.hpp"
#include "mk/errors.hpp"
#include "mk/rng.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace mk;

namespace {

Trajectory from_positions(const std::string& id, const std::vector<Eigen::Vector2d>& xs) {
    std::vector<TrajectoryPoint> pts;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        pts.push_back({static_cast<std::int64_t>(t), xs[t].x(), xs[t].y(), {}});
    }
    return Trajectory(id, std::move(pts));
}

// Random-walk segment: full-rank design with probability one.
Trajectory random_walk_track(Rng& rng, int n, const Eigen::Vector2d& offset = {0, 0}) {
    std::vector<Eigen::Vector2d> xs;
    Eigen::Vector2d pos = offset;
    for (int t = 0; t < n; ++t) {
        xs.push_back(pos);
        pos += Eigen::Vector2d(rng.gaussian(), rng.gaussian());
    }
    return from_positions("rw", xs);
}

Eigen::MatrixXd design_matrix(const Trajectory& segment, int order) {
    const auto& pts = segment.points();
    const auto rows = static_cast<Eigen::Index>(pts.size()) - order;
    Eigen::MatrixXd d(rows, 2 * order + 1);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int j = 1; j <= order; ++j) {
            d(r, 2 * (j - 1)) = pts[static_cast<std::size_t>(r + order - j)].x;
            d(r, 2 * (j - 1) + 1) = pts[static_cast<std::size_t>(r + order - j)].y;
        }
        d(r, 2 * order) = 1.0;
    }
    return d;
}

}  // namespace

TEST_CASE("fit_ar: parabola track is exactly AR(1) with intercept") {
    std::vector<Eigen::Vector2d> xs;
    for (int t = 0; t <= 20; ++t) {
        xs.push_back({static_cast<double>(t), static_cast<double>(t) * t});
    }
    const ArParameters params = fit_ar(from_positions("parabola", xs), ArConfig{1, true});
    Eigen::Matrix2d expected;
    expected << 1, 0, 2, 1;
    CHECK((params.matrices[0] - expected).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((params.intercept - Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(params.residual_rms < 1e-9);
}

TEST_CASE("fit_ar: quarter-turn rotation is exactly AR(1)") {
    Eigen::Matrix2d rot;
    rot << 0, -1, 1, 0;
    std::vector<Eigen::Vector2d> xs = {{1, 0}};
    for (int t = 1; t < 12; ++t) xs.push_back(rot * xs.back());
    const ArParameters params = fit_ar(from_positions("rot", xs), ArConfig{1, true});
    CHECK((params.matrices[0] - rot).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(params.intercept.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(params.residual_rms < 1e-12);
}

TEST_CASE("fit_ar: constant track resolves to the minimum-norm solution") {
    std::vector<Eigen::Vector2d> xs(150, Eigen::Vector2d(3, 4));
    const Trajectory track = from_positions("const", xs);
    const ArParameters params = fit_ar(track, ArConfig{5, true});
    CHECK(params.residual_rms < 1e-12);

    // independent one-sided Jacobi SVD pseudo-inverse oracle
    const Eigen::MatrixXd d = design_matrix(track, 5);
    Eigen::MatrixXd target(d.rows(), 2);
    for (Eigen::Index r = 0; r < d.rows(); ++r) target.row(r) << 3, 4;
    const Eigen::MatrixXd coef = oracle::jacobi_min_norm_solve(d, target, 1e-10);
    for (int j = 0; j < 5; ++j) {
        const Eigen::Matrix2d expected = coef.block(2 * j, 0, 2, 2).transpose();
        CHECK((params.matrices[static_cast<std::size_t>(j)] - expected).cwiseAbs().maxCoeff() <
              1e-10);
    }
    CHECK((params.intercept - Eigen::Vector2d(coef.row(10))).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fit_ar: rejects segments shorter than order + 1") {
    std::vector<Eigen::Vector2d> xs = {{0, 0}, {1, 1}, {2, 2}};
    CHECK_THROWS_AS(fit_ar(from_positions("tiny", xs), ArConfig{5, true}), Error);
    CHECK_THROWS_AS(fit_ar(from_positions("tiny", xs), ArConfig{0, true}), Error);
}

TEST_CASE("fit_ar without intercept leaves C at zero") {
    Eigen::Matrix2d rot;
    rot << 0, -1, 1, 0;
    std::vector<Eigen::Vector2d> xs = {{1, 0}};
    for (int t = 1; t < 12; ++t) xs.push_back(rot * xs.back());
    const ArParameters params = fit_ar(from_positions("rot", xs), ArConfig{1, false});
    CHECK((params.matrices[0] - rot).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(params.intercept.cwiseAbs().maxCoeff() == 0.0);
    CHECK(params.residual_rms < 1e-12);
}

TEST_CASE("predict: intercept-only model") {
    ArParameters params;
    params.matrices = {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
    params.intercept = {5, 6};
    const std::vector<Eigen::Vector2d> history = {{100, -3}, {2, 2}};
    CHECK((predict(params, history) - Eigen::Vector2d(5, 6)).norm() == 0.0);
}

TEST_CASE("predict: one rotation step") {
    Eigen::Matrix2d rot;
    rot << 0, -1, 1, 0;
    ArParameters params;
    params.matrices = {rot};
    const std::vector<Eigen::Vector2d> history = {{0, 1}};
    CHECK((predict(params, history) - Eigen::Vector2d(-1, 0)).norm() < 1e-15);

    const std::vector<Eigen::Vector2d> wrong = {{0, 1}, {1, 0}};
    CHECK_THROWS_AS(predict(params, wrong), Error);
}

TEST_CASE("predict is consistent with residual_rms on the fitting rows") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int order = 1 + static_cast<int>(rng.index(5));
        const Trajectory track = random_walk_track(rng, 40);
        const ArParameters params = fit_ar(track, ArConfig{order, true});

        double sum_sq = 0.0;
        std::int64_t rows = 0;
        for (std::size_t t = static_cast<std::size_t>(order); t < track.size(); ++t) {
            std::vector<Eigen::Vector2d> history;
            for (int j = 1; j <= order; ++j) {
                const auto& p = track[t - static_cast<std::size_t>(j)];
                history.push_back({p.x, p.y});
            }
            const Eigen::Vector2d err =
                predict(params, history) - Eigen::Vector2d(track[t].x, track[t].y);
            sum_sq += err.squaredNorm();
            ++rows;
        }
        const double rms = std::sqrt(sum_sq / static_cast<double>(rows));
        CHECK(std::abs(rms - params.residual_rms) < 1e-12);
    }
}

TEST_CASE("featurize: layout and length") {
    ArParameters p5;
    p5.matrices.assign(5, Eigen::Matrix2d::Zero());
    CHECK(featurize(p5, "x").values.size() == 20);

    ArParameters p2;
    Eigen::Matrix2d a1;
    a1 << 1, 2, 3, 4;
    p2.matrices = {a1, Eigen::Matrix2d::Zero()};
    const FeatureVector fv = featurize(p2, "obj");
    Eigen::VectorXd expected(8);
    expected << 1, 2, 3, 4, 0, 0, 0, 0;
    CHECK((fv.values - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK(fv.object_id == "obj");

    ArParameters p1;
    p1.matrices = {Eigen::Matrix2d::Identity()};
    Eigen::VectorXd id_expected(4);
    id_expected << 1, 0, 0, 1;
    CHECK((featurize(p1, "i").values - id_expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("featurize_corpus: singleton equals direct featurize; identical rows repeat") {
    Rng rng(3);
    const Trajectory track = random_walk_track(rng, 30);
    const TrajectoryCorpus single({track}, 30);
    const FeatureMatrix m = featurize_corpus(single, ArConfig{3, true});
    const FeatureVector direct = featurize(fit_ar(track, ArConfig{3, true}), track.object_id());
    CHECK(m.values.rows() == 1);
    CHECK((m.values.row(0).transpose() - direct.values).cwiseAbs().maxCoeff() == 0.0);

    std::vector<Trajectory> copies;
    for (int i = 0; i < 10; ++i) {
        copies.emplace_back("c" + std::to_string(i), track.points());
    }
    const FeatureMatrix rows = featurize_corpus(TrajectoryCorpus(copies, 30), ArConfig{3, true});
    for (int i = 1; i < 10; ++i) {
        CHECK((rows.values.row(i) - rows.values.row(0)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("featurize_corpus: error carries the object id; threads do not change bytes") {
    std::vector<Trajectory> tracks;
    Rng rng(5);
    for (int i = 0; i < 7; ++i) {
        auto t = random_walk_track(rng, 25);
        tracks.emplace_back("obj" + std::to_string(i), t.points());
    }
    const TrajectoryCorpus corpus(tracks, 25);
    CHECK_THROWS_AS(featurize_corpus(corpus, ArConfig{25, true}), Error);

    const FeatureMatrix seq = featurize_corpus(corpus, ArConfig{4, true}, 1);
    const FeatureMatrix par = featurize_corpus(corpus, ArConfig{4, true}, 4);
    CHECK(features_to_csv(seq) == features_to_csv(par));
}

TEST_CASE("translation invariance: transition matrices ignore constant shifts") {
    Rng rng(21);
    for (int trial = 0; trial < 8; ++trial) {
        const int order = 1 + static_cast<int>(rng.index(5));
        const Trajectory base = random_walk_track(rng, 60);
        const Eigen::Vector2d shift(rng.uniform(-500, 500), rng.uniform(-500, 500));

        std::vector<Eigen::Vector2d> moved;
        for (const auto& p : base.points()) moved.push_back({p.x + shift.x(), p.y + shift.y()});
        const ArParameters a = fit_ar(base, ArConfig{order, true});
        const ArParameters b = fit_ar(from_positions("moved", moved), ArConfig{order, true});

        Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
        for (int j = 0; j < order; ++j) {
            CHECK((a.matrices[static_cast<std::size_t>(j)] -
                   b.matrices[static_cast<std::size_t>(j)])
                      .cwiseAbs()
                      .maxCoeff() < 1e-8);
            sum += a.matrices[static_cast<std::size_t>(j)];
        }
        const Eigen::Vector2d expected_shift = (Eigen::Matrix2d::Identity() - sum) * shift;
        CHECK((b.intercept - a.intercept - expected_shift).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("noise-free AR-generated data is recovered exactly") {
    Rng rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        const int order = 1 + static_cast<int>(rng.index(3));
        std::vector<Eigen::Matrix2d> truth;
        for (int j = 0; j < order; ++j) {
            Eigen::Matrix2d a;
            a << rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4),
                rng.uniform(-0.4, 0.4);
            truth.push_back(a / static_cast<double>(order));
        }
        const Eigen::Vector2d c(rng.uniform(-2, 2), rng.uniform(-2, 2));

        std::vector<Eigen::Vector2d> xs;
        for (int j = 0; j < order; ++j) xs.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
        for (int t = order; t < 60; ++t) {
            Eigen::Vector2d next = c;
            for (int j = 1; j <= order; ++j) {
                next += truth[static_cast<std::size_t>(j - 1)] *
                        xs[static_cast<std::size_t>(t - j)];
            }
            xs.push_back(next);
        }
        const Trajectory track = from_positions("gen", xs);

        // only meaningful when the design kept full rank
        const Eigen::MatrixXd d = design_matrix(track, order);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
        if (svd.singularValues()(svd.singularValues().size() - 1) <
            1e-6 * svd.singularValues()(0)) {
            continue;
        }

        const ArParameters fit = fit_ar(track, ArConfig{order, true});
        for (int j = 0; j < order; ++j) {
            CHECK((fit.matrices[static_cast<std::size_t>(j)] -
                   truth[static_cast<std::size_t>(j)])
                      .cwiseAbs()
                      .maxCoeff() < 1e-8);
        }
        CHECK((fit.intercept - c).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(fit.residual_rms < 1e-10);
    }
}

TEST_CASE("fitted parameters beat perturbed parameters on residual") {
    Rng rng(41);
    const Trajectory track = random_walk_track(rng, 50);
    const int order = 2;
    const ArParameters fit = fit_ar(track, ArConfig{order, true});

    const Eigen::MatrixXd d = design_matrix(track, order);
    Eigen::MatrixXd target(d.rows(), 2);
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const auto& p = track[static_cast<std::size_t>(r + order)];
        target.row(r) << p.x, p.y;
    }
    auto residual_of = [&](const ArParameters& params) {
        Eigen::MatrixXd coef(2 * order + 1, 2);
        for (int j = 0; j < order; ++j) {
            coef.block(2 * j, 0, 2, 2) = params.matrices[static_cast<std::size_t>(j)].transpose();
        }
        coef.row(2 * order) = params.intercept.transpose();
        return std::sqrt((d * coef - target).rowwise().squaredNorm().mean());
    };
    CHECK(std::abs(residual_of(fit) - fit.residual_rms) < 1e-12);

    for (int trial = 0; trial < 20; ++trial) {
        ArParameters perturbed = fit;
        perturbed.matrices[rng.index(static_cast<std::size_t>(order))](
            static_cast<Eigen::Index>(rng.index(2)), static_cast<Eigen::Index>(rng.index(2))) +=
            rng.gaussian(0.05);
        perturbed.intercept(static_cast<Eigen::Index>(rng.index(2))) += rng.gaussian(0.05);
        CHECK(residual_of(perturbed) >= fit.residual_rms - 1e-12);
    }
}

TEST_CASE("fit and featurize are deterministic") {
    Rng rng(55);
    const Trajectory track = random_walk_track(rng, 80);
    const FeatureVector a = featurize(fit_ar(track, ArConfig{5, true}), "x");
    const FeatureVector b = featurize(fit_ar(track, ArConfig{5, true}), "x");
    for (Eigen::Index i = 0; i < a.values.size(); ++i) {
        CHECK(a.values(i) == b.values(i));  // bitwise
    }
}

TEST_CASE("feature CSV round trip") {
    Rng rng(60);
    FeatureMatrix m;
    m.object_ids = {"a", "b", "c"};
    m.values.resize(3, 8);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 8; ++j) m.values(i, j) = rng.gaussian(3.0);
    }
    testutil::TempDir dir("mk_ar");
    write_features(dir.file("f.csv"), m);
    const FeatureMatrix back = load_features(dir.file("f.csv"));
    CHECK(back.object_ids == m.object_ids);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 8; ++j) CHECK(back.values(i, j) == m.values(i, j));
    }
}
