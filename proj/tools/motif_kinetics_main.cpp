// motif-kinetics: unsupervised motility phenotyping for 2-D object
// trajectories. Subcommands run the pipeline end to end or one stage at a
// time on the previous stage's CSV artifacts.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "mk/ar_model.hpp"
#include "mk/csv.hpp"
#include "mk/errors.hpp"
#include "mk/kernel.hpp"
#include "mk/pipeline.hpp"
#include "mk/spectral.hpp"
#include "mk/svg.hpp"
#include "mk/synth.hpp"
#include "mk/trajectory.hpp"

namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    const std::string content = mk::read_text_file(path);
    std::map<std::string, std::string> entries;
    std::istringstream stream(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                mk::throw_config(path + ": line " + std::to_string(line_no) +
                                 ": expected 'key = value'");
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto begin = s.find_first_not_of(" \t\r");
            const auto end = s.find_last_not_of(" \t\r");
            return begin == std::string::npos ? std::string() : s.substr(begin, end - begin + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            mk::throw_config(path + ": line " + std::to_string(line_no) + ": empty key");
        }
        entries[key] = value;
    }
    return entries;
}

// Precedence: CLI flag > config file > MOTIF_KINETICS_SEED (seed only) >
// built-in defaults. CLI11 fills flags into `cfg` directly, so here we only
// backfill the sources below flag level for options the user did not pass.
void apply_config_sources(CLI::App* cmd, const std::string& config_path,
                          mk::PipelineConfig& cfg) {
    std::map<std::string, std::string> file;
    if (!config_path.empty()) file = parse_config_file(config_path);

    auto passed = [&](const std::string& flag) {
        const CLI::Option* opt = cmd->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    auto from_file = [&](const std::string& key) -> const std::string* {
        auto it = file.find(key);
        return it == file.end() ? nullptr : &it->second;
    };

    auto known = {"input",  "out",  "event_frame", "segment_length", "order",   "gamma",
                  "norm_mode", "k", "seed",        "restarts",       "max_step", "threads"};
    for (const auto& [key, value] : file) {
        (void)value;
        bool ok = false;
        for (const char* k : known) {
            if (key == k) ok = true;
        }
        if (!ok) mk::throw_config(config_path + ": unknown key '" + key + "'");
    }

    const std::string ctx = config_path;
    if (!passed("--input")) {
        if (auto* v = from_file("input")) cfg.input = *v;
    }
    if (!passed("--out")) {
        if (auto* v = from_file("out")) cfg.out_dir = *v;
    }
    if (!passed("--event-frame")) {
        if (auto* v = from_file("event_frame")) cfg.event_frame = mk::parse_int(*v, ctx);
    }
    if (!passed("--segment-length")) {
        if (auto* v = from_file("segment_length")) cfg.segment_length = mk::parse_int(*v, ctx);
    }
    if (!passed("--order")) {
        if (auto* v = from_file("order")) cfg.order = static_cast<int>(mk::parse_int(*v, ctx));
    }
    if (!passed("--gamma")) {
        if (auto* v = from_file("gamma")) cfg.gamma = mk::parse_finite_double(*v, ctx);
    }
    if (!passed("--norm-mode")) {
        if (auto* v = from_file("norm_mode")) cfg.norm_mode = mk::parse_norm_mode(*v);
    }
    if (!passed("--k")) {
        if (auto* v = from_file("k")) cfg.k = static_cast<int>(mk::parse_int(*v, ctx));
    }
    if (!passed("--restarts")) {
        if (auto* v = from_file("restarts")) {
            cfg.restarts = static_cast<int>(mk::parse_int(*v, ctx));
        }
    }
    if (!passed("--max-step")) {
        if (auto* v = from_file("max_step")) cfg.max_step = mk::parse_finite_double(*v, ctx);
    }
    if (!passed("--threads")) {
        if (auto* v = from_file("threads")) {
            cfg.threads = static_cast<int>(mk::parse_int(*v, ctx));
        }
    }
    if (!passed("--seed")) {
        if (auto* v = from_file("seed")) {
            cfg.seed = static_cast<std::uint64_t>(mk::parse_int(*v, ctx));
        } else if (const char* env = std::getenv("MOTIF_KINETICS_SEED")) {
            cfg.seed = static_cast<std::uint64_t>(
                mk::parse_int(env, "MOTIF_KINETICS_SEED environment variable"));
        }
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) mk::throw_io("cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"motif-kinetics: AR-feature spectral clustering of 2-D trajectories"};
    app.require_subcommand(1);

    mk::PipelineConfig cfg;
    std::string config_path;
    std::string spec_path;
    std::string labels_path;
    std::string style_name = "small_multiples";
    std::string out_file;

    auto add_common = [&](CLI::App* cmd, std::initializer_list<const char*> names) {
        for (const char* name : names) {
            const std::string flag = name;
            if (flag == "--input") cmd->add_option("--input", cfg.input, "input CSV");
            if (flag == "--out") cmd->add_option("--out", cfg.out_dir, "output directory");
            if (flag == "--event-frame")
                cmd->add_option("--event-frame", cfg.event_frame, "stimulus frame index");
            if (flag == "--segment-length")
                cmd->add_option("--segment-length", cfg.segment_length,
                                "frames per segment (default 150)");
            if (flag == "--order") cmd->add_option("--order", cfg.order, "AR order (default 5)");
            if (flag == "--gamma")
                cmd->add_option("--gamma", cfg.gamma, "RBF width (default 0.1)");
            if (flag == "--norm-mode")
                cmd->add_option_function<std::string>(
                       "--norm-mode",
                       [&](const std::string& v) { cfg.norm_mode = mk::parse_norm_mode(v); },
                       "kernel distance: squared|plain (default squared)");
            if (flag == "--k") cmd->add_option("--k", cfg.k, "cluster count (default 5)");
            if (flag == "--seed") cmd->add_option("--seed", cfg.seed, "RNG seed (default 0)");
            if (flag == "--restarts")
                cmd->add_option("--restarts", cfg.restarts, "k-means restarts (default 10)");
            if (flag == "--max-step")
                cmd->add_option_function<double>(
                       "--max-step", [&](double v) { cfg.max_step = v; },
                       "drop tracks whose largest per-frame step exceeds this");
            if (flag == "--threads")
                cmd->add_option("--threads", cfg.threads, "worker threads (default 1)");
            if (flag == "--config")
                cmd->add_option("--config", config_path, "key = value config file");
        }
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    synth->add_option("--spec", spec_path, "motif spec file")->required();
    add_common(synth, {"--out", "--seed", "--event-frame", "--config"});

    CLI::App* preprocess =
        app.add_subcommand("preprocess", "split and truncate trajectories around the event");
    add_common(preprocess, {"--input", "--out", "--event-frame", "--segment-length", "--max-step",
                            "--config"});

    CLI::App* fit = app.add_subcommand("fit", "fit AR models and emit the feature matrix");
    add_common(fit, {"--input", "--out", "--order", "--threads", "--config"});

    CLI::App* kern = app.add_subcommand("kernel", "RBF affinity matrix from features");
    add_common(kern, {"--input", "--out", "--gamma", "--norm-mode", "--threads", "--config"});
    bool print_stats = false;
    kern->add_flag("--stats", print_stats, "print kernel summary statistics");

    CLI::App* cluster = app.add_subcommand("cluster", "spectral clustering of a kernel matrix");
    add_common(cluster, {"--input", "--out", "--k", "--seed", "--restarts", "--config"});

    CLI::App* pipeline = app.add_subcommand("pipeline", "full before/after analysis");
    add_common(pipeline, {"--input", "--out", "--event-frame", "--segment-length", "--order",
                          "--gamma", "--norm-mode", "--k", "--seed", "--restarts", "--max-step",
                          "--threads", "--config"});

    CLI::App* plot = app.add_subcommand("plot", "render cluster plots from CSV artifacts");
    add_common(plot, {"--input", "--config"});
    plot->add_option("--labels", labels_path, "labels CSV")->required();
    plot->add_option("--style", style_name, "small_multiples|aggregate");
    plot->add_option("--out-file", out_file, "output SVG path")->required();

    CLI::App* version = app.add_subcommand("version", "print tool version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(mk::ErrorKind::config);
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        apply_config_sources(active, config_path, cfg);

        if (active == version) {
            std::cout << "motif-kinetics " << mk::kToolVersion << "\n";
            return 0;
        }
        if (active == synth) {
            if (cfg.out_dir.empty()) mk::throw_config("synth: --out is required");
            mk::SynthConfig synth_cfg = mk::load_motif_specs(spec_path);
            const std::int64_t event = active->count("--event-frame") > 0
                                           ? cfg.event_frame
                                           : synth_cfg.event_frame;
            const mk::LabeledCorpus labeled =
                mk::generate(synth_cfg.motifs, cfg.seed, event);
            ensure_dir(cfg.out_dir);
            mk::write_trajectories((fs::path(cfg.out_dir) / "trajectories.csv").string(),
                                   labeled.corpus.trajectories());
            mk::write_truth((fs::path(cfg.out_dir) / "truth.csv").string(), labeled);
            std::cout << "wrote " << labeled.corpus.size() << " trajectories\n";
            return 0;
        }
        if (active == preprocess) {
            if (cfg.input.empty()) mk::throw_config("preprocess: --input is required");
            if (cfg.out_dir.empty()) mk::throw_config("preprocess: --out is required");
            auto trajectories = mk::load_trajectories(cfg.input);
            if (cfg.max_step) {
                trajectories = mk::filter_max_step(std::move(trajectories), *cfg.max_step);
            }
            const mk::SegmentedCorpus segmented =
                mk::segment_corpus(trajectories, cfg.event_frame, cfg.segment_length);
            ensure_dir(cfg.out_dir);
            mk::write_trajectories((fs::path(cfg.out_dir) / "before.csv").string(),
                                   segmented.before.trajectories());
            mk::write_trajectories((fs::path(cfg.out_dir) / "after.csv").string(),
                                   segmented.after.trajectories());
            std::cout << "kept " << segmented.before.size() << " objects per segment\n";
            return 0;
        }
        if (active == fit) {
            if (cfg.input.empty()) mk::throw_config("fit: --input is required");
            if (cfg.out_dir.empty()) mk::throw_config("fit: --out is required");
            const auto trajectories = mk::load_trajectories(cfg.input);
            if (trajectories.empty()) mk::throw_data(cfg.input + ": no trajectories");
            const auto length = static_cast<std::int64_t>(trajectories.front().size());
            mk::TrajectoryCorpus corpus(trajectories, length);
            const mk::FeatureMatrix features =
                mk::featurize_corpus(corpus, mk::ArConfig{cfg.order, true}, cfg.threads);
            ensure_dir(cfg.out_dir);
            mk::write_features((fs::path(cfg.out_dir) / "features.csv").string(), features);
            std::cout << "wrote " << features.values.rows() << "x" << features.values.cols()
                      << " feature matrix\n";
            return 0;
        }
        if (active == kern) {
            if (cfg.input.empty()) mk::throw_config("kernel: --input is required");
            if (cfg.out_dir.empty()) mk::throw_config("kernel: --out is required");
            const mk::FeatureMatrix features = mk::load_features(cfg.input);
            const mk::KernelMatrix kernel =
                mk::rbf_kernel(features, mk::KernelConfig{cfg.gamma, cfg.norm_mode}, cfg.threads);
            ensure_dir(cfg.out_dir);
            mk::write_kernel((fs::path(cfg.out_dir) / "kernel.csv").string(), kernel);
            if (print_stats) {
                const mk::KernelStats stats = mk::kernel_stats(kernel);
                std::cout << "min_off_diag = " << mk::format_double(stats.min_off_diag) << "\n"
                          << "max_off_diag = " << mk::format_double(stats.max_off_diag) << "\n"
                          << "mean_off_diag = " << mk::format_double(stats.mean_off_diag) << "\n"
                          << "effective_rank = " << stats.effective_rank << "\n";
            }
            std::cout << "wrote " << kernel.size() << "x" << kernel.size() << " kernel\n";
            return 0;
        }
        if (active == cluster) {
            if (cfg.input.empty()) mk::throw_config("cluster: --input is required");
            if (cfg.out_dir.empty()) mk::throw_config("cluster: --out is required");
            const mk::KernelMatrix kernel = mk::load_kernel(cfg.input);
            const mk::ClusterConfig cluster_cfg{cfg.k, cfg.seed, cfg.restarts, 300, 1e-9};
            const Eigen::MatrixXd laplacian = mk::normalized_laplacian(kernel);
            const mk::SpectralEmbedding embedding = mk::eigen_embed(laplacian, cfg.k);
            const mk::ClusterAssignment assignment =
                mk::kmeans(embedding.coordinates, cluster_cfg, kernel.object_ids());
            ensure_dir(cfg.out_dir);
            mk::write_labels((fs::path(cfg.out_dir) / "labels.csv").string(), assignment);
            mk::write_text_file((fs::path(cfg.out_dir) / "embedding.csv").string(),
                                mk::embedding_to_csv(embedding, kernel.object_ids()));
            mk::write_text_file((fs::path(cfg.out_dir) / "eigenvalues.txt").string(),
                                mk::eigenvalues_to_text(embedding.eigenvalues));
            std::cout << "clustered " << kernel.size() << " objects into k=" << cfg.k << "\n";
            return 0;
        }
        if (active == pipeline) {
            const mk::RunManifest manifest = mk::run_pipeline(cfg);
            std::cout << "pipeline finished: " << manifest.outputs.size()
                      << " artifacts in " << cfg.out_dir << "\n";
            return 0;
        }
        if (active == plot) {
            if (cfg.input.empty()) mk::throw_config("plot: --input is required");
            const auto trajectories = mk::load_trajectories(cfg.input);
            if (trajectories.empty()) mk::throw_data(cfg.input + ": no trajectories");
            const auto length = static_cast<std::int64_t>(trajectories.front().size());
            mk::TrajectoryCorpus corpus(trajectories, length);
            const mk::ClusterAssignment labels = mk::load_labels(labels_path);
            const std::string doc =
                mk::plot_clusters(corpus, labels, mk::parse_plot_style(style_name));
            mk::write_text_file(out_file, doc);
            std::cout << "wrote " << out_file << "\n";
            return 0;
        }
        mk::throw_config("no subcommand handler");  // unreachable
    } catch (const mk::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return static_cast<int>(mk::ErrorKind::numeric);
    }
}
