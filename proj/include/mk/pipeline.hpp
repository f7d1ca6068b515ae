#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mk/kernel.hpp"
#include "mk/spectral.hpp"

namespace mk {

inline constexpr const char* kToolVersion = "0.1.0";

struct PipelineConfig {
    std::string input;
    std::string out_dir;
    std::int64_t event_frame = 150;
    std::int64_t segment_length = 150;
    int order = 5;
    double gamma = 0.1;
    NormMode norm_mode = NormMode::squared;
    int k = 5;
    std::uint64_t seed = 0;
    int restarts = 10;
    std::optional<double> max_step;  // artifact filter; disabled by default
    int threads = 1;
};

struct StageInfo {
    std::string name;
    std::int64_t rows = 0;  // objects leaving the stage
    double wall_ms = 0.0;
};

// Everything needed to reproduce a run: the config snapshot plus the input
// content digest pin the outputs bit-for-bit. Wall-clock timings are the one
// non-deterministic quantity and are emitted to a separate timings.txt, so
// manifest.json itself is reproducible.
struct RunManifest {
    PipelineConfig config;
    std::string input_digest;
    std::vector<StageInfo> stages;
    std::string tool_version = kToolVersion;
    std::map<std::string, int> empty_clusters;  // segment name -> count of empty clusters
    std::vector<std::string> outputs;           // file names written under out_dir
};

// Runs load -> preprocess -> AR features -> RBF kernel -> spectral
// clustering for the before and after segments, then writes per-segment
// CSV artifacts, SVG reports, manifest.json, and timings.txt. All artifacts
// are composed in memory and written only after every stage succeeded, so a
// failing run leaves no partial outputs. Errors carry the stage name.
RunManifest run_pipeline(const PipelineConfig& config);

std::string manifest_to_json(const RunManifest& manifest);

// FNV-1a 64-bit content hash, hex-encoded.
std::string digest_hex(std::string_view bytes);
std::string file_digest_hex(const std::string& path);

}  // namespace mk
