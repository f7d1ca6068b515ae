#include "mk/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "mk/ar_model.hpp"
#include "mk/csv.hpp"
#include "mk/errors.hpp"
#include "mk/svg.hpp"
#include "mk/synth.hpp"
#include "mk/trajectory.hpp"

namespace mk {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct StageTimer {
    std::vector<StageInfo>& stages;

    template <typename Fn>
    auto run(const std::string& name, std::int64_t& rows_out, Fn&& fn) {
        const auto start = Clock::now();
        try {
            auto result = fn();
            const auto stop = Clock::now();
            stages.push_back(StageInfo{
                name, rows_out,
                std::chrono::duration<double, std::milli>(stop - start).count()});
            return result;
        } catch (const Error& e) {
            throw Error(e.kind(), "stage " + name + ": " + e.what());
        }
    }
};

int count_empty_clusters(const ClusterAssignment& assignment, int k) {
    int max_label = -1;
    for (int label : assignment.labels) max_label = std::max(max_label, label);
    return k - (max_label + 1);
}

}  // namespace

std::string digest_hex(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string("fnv1a64:") + buf;
}

std::string file_digest_hex(const std::string& path) {
    return digest_hex(read_text_file(path));
}

std::string manifest_to_json(const RunManifest& manifest) {
    nlohmann::json j;
    j["tool"] = "motif-kinetics";
    j["version"] = manifest.tool_version;
    j["input_digest"] = manifest.input_digest;

    nlohmann::json cfg;
    cfg["input"] = manifest.config.input;
    cfg["out"] = manifest.config.out_dir;
    cfg["event_frame"] = manifest.config.event_frame;
    cfg["segment_length"] = manifest.config.segment_length;
    cfg["order"] = manifest.config.order;
    cfg["gamma"] = manifest.config.gamma;
    cfg["norm_mode"] = norm_mode_name(manifest.config.norm_mode);
    cfg["k"] = manifest.config.k;
    cfg["seed"] = manifest.config.seed;
    cfg["restarts"] = manifest.config.restarts;
    if (manifest.config.max_step) {
        cfg["max_step"] = *manifest.config.max_step;
    } else {
        cfg["max_step"] = nullptr;
    }
    cfg["threads"] = manifest.config.threads;
    j["config"] = cfg;

    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : manifest.stages) {
        stages.push_back({{"name", s.name}, {"rows", s.rows}});
    }
    j["stages"] = stages;
    j["empty_clusters"] = manifest.empty_clusters;
    j["outputs"] = manifest.outputs;
    return j.dump(2) + "\n";
}

RunManifest run_pipeline(const PipelineConfig& config) {
    if (config.input.empty()) throw_config("pipeline: missing input path");
    if (config.out_dir.empty()) throw_config("pipeline: missing output directory");
    if (config.segment_length < 2) throw_config("segment_length must be >= 2");
    if (config.order < 1 || config.order >= static_cast<int>(config.segment_length)) {
        throw_config("order must lie in [1, segment_length)");
    }

    RunManifest manifest;
    manifest.config = config;
    StageTimer timer{manifest.stages};
    std::vector<std::pair<std::string, std::string>> artifacts;  // name -> content

    std::int64_t rows = 0;
    auto trajectories = timer.run("load", rows, [&] {
        auto loaded = load_trajectories(config.input);
        rows = static_cast<std::int64_t>(loaded.size());
        return loaded;
    });
    manifest.input_digest = file_digest_hex(config.input);

    if (config.max_step) {
        trajectories = timer.run("max_step_filter", rows, [&] {
            auto kept = filter_max_step(std::move(trajectories), *config.max_step);
            rows = static_cast<std::int64_t>(kept.size());
            return kept;
        });
    }

    const SegmentedCorpus segmented = timer.run("preprocess", rows, [&] {
        auto seg = segment_corpus(trajectories, config.event_frame, config.segment_length);
        rows = static_cast<std::int64_t>(seg.before.size());
        return seg;
    });

    const ArConfig ar_config{config.order, true};
    const KernelConfig kernel_config{config.gamma, config.norm_mode};
    const ClusterConfig cluster_config{config.k, config.seed, config.restarts, 300, 1e-9};

    for (const auto* side : {"before", "after"}) {
        const bool is_before = std::string(side) == "before";
        const TrajectoryCorpus& corpus = is_before ? segmented.before : segmented.after;
        const std::string suffix = std::string("_") + side;

        const FeatureMatrix features = timer.run("features" + suffix, rows, [&] {
            auto f = featurize_corpus(corpus, ar_config, config.threads);
            rows = f.values.rows();
            return f;
        });
        const KernelMatrix kernel = timer.run("kernel" + suffix, rows, [&] {
            return rbf_kernel(features, kernel_config, config.threads);
        });
        const Eigen::MatrixXd laplacian = timer.run("laplacian" + suffix, rows, [&] {
            return normalized_laplacian(kernel);
        });
        const SpectralEmbedding embedding = timer.run("embed" + suffix, rows, [&] {
            return eigen_embed(laplacian, config.k);
        });
        const ClusterAssignment assignment = timer.run("cluster" + suffix, rows, [&] {
            return kmeans(embedding.coordinates, cluster_config, kernel.object_ids());
        });
        manifest.empty_clusters[side] = count_empty_clusters(assignment, config.k);

        timer.run("plots" + suffix, rows, [&] {
            artifacts.emplace_back("features" + suffix + ".csv", features_to_csv(features));
            artifacts.emplace_back("kernel" + suffix + ".csv", kernel_to_csv(kernel));
            artifacts.emplace_back("embedding" + suffix + ".csv",
                                   embedding_to_csv(embedding, kernel.object_ids()));
            artifacts.emplace_back("labels" + suffix + ".csv", labels_to_csv(assignment));
            artifacts.emplace_back("eigenvalues" + suffix + ".txt",
                                   eigenvalues_to_text(embedding.eigenvalues));
            artifacts.emplace_back("kernel" + suffix + ".svg", kernel_heatmap(kernel));
            artifacts.emplace_back("clusters" + suffix + ".svg",
                                   plot_clusters(corpus, assignment, PlotStyle::small_multiples));
            artifacts.emplace_back("aggregate" + suffix + ".svg",
                                   plot_clusters(corpus, assignment, PlotStyle::aggregate));
            return 0;
        });
    }

    for (const auto& [name, content] : artifacts) {
        (void)content;
        manifest.outputs.push_back(name);
    }
    manifest.outputs.push_back("manifest.json");

    // Emission happens only after every stage succeeded.
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw_io("cannot create output directory '" + config.out_dir + "': " + ec.message());
    for (const auto& [name, content] : artifacts) {
        write_text_file((fs::path(config.out_dir) / name).string(), content);
    }
    write_text_file((fs::path(config.out_dir) / "manifest.json").string(),
                    manifest_to_json(manifest));

    std::string timings;
    for (const auto& s : manifest.stages) {
        char line[128];
        std::snprintf(line, sizeof(line), "%s %.3f ms\n", s.name.c_str(), s.wall_ms);
        timings += line;
    }
    write_text_file((fs::path(config.out_dir) / "timings.txt").string(), timings);

    return manifest;
}

}  // namespace mk
