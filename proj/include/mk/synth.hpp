#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mk/trajectory.hpp"

namespace mk {

// Planted motion motifs. Noise placement follows each motif's dynamics:
//   circular     x_t = c + R(w)(x_{t-1} - c) + noise            (noise in the recursion)
//   twirl        x_t = (I+R)x_{t-1} - R x_{t-2} + (I-R)d + noise  (rotation + constant drift)
//   linear       x_t = 2 x_{t-1} - x_{t-2} + noise              (constant mean velocity)
//   immotile     x_t = p0 + noise                               (jitter about a fixed point)
//   random_walk  x_t = x_{t-1} + step, step ~ N(0, step_sigma^2) (+ optional jitter)
enum class Motif { circular, twirl, linear, immotile, random_walk };

Motif parse_motif(const std::string& name);
std::string motif_name(Motif motif);

struct MotifParams {
    double radius = 0.0;                            // circular, twirl
    double angular_step = 0.0;                      // rad/frame; circular, twirl
    Eigen::Vector2d drift = Eigen::Vector2d::Zero();  // px/frame; twirl drift, linear velocity
    double step_sigma = 0.0;                        // random_walk
    double noise_sigma = 0.0;                       // per-step isotropic Gaussian jitter
};

struct MotifSpec {
    Motif motif = Motif::immotile;
    int count = 1;
    std::int64_t length = 150;
    MotifParams params;
    // When present, generation switches to these parameters at the event
    // offset (position continuity is preserved across the switch).
    std::optional<MotifParams> after_params;
};

struct LabeledCorpus {
    TrajectoryCorpus corpus;
    std::map<std::string, std::string> truth;  // object_id -> motif name
};

// Deterministic for a fixed (specs, seed): object (s, r) draws from the
// substream indexed by spec s and replicate r, so generation order does not
// matter. Object ids are "s<spec>_<motif>_r<replicate>", which sort in
// generation order. event_offset < 0 disables parameter switching.
LabeledCorpus generate(std::span<const MotifSpec> specs, std::uint64_t seed,
                       std::int64_t event_offset = -1);

// Chance-corrected partition agreement in [-1, 1]; 1 iff the partitions are
// identical up to label renaming.
double adjusted_rand_index(std::span<const int> truth, std::span<const int> predicted);

// Convenience for string-labelled partitions (truth files).
double adjusted_rand_index(const std::vector<std::string>& truth,
                           const std::vector<std::string>& predicted);

// Motif spec file: '#' comments; an optional `event = <frame>` line; one
// `motif <name> key=value ...` line per family, where a '|' introduces
// parameter overrides applied after the event. Example:
//   motif circular count=28 length=300 noise=0.25 radius=7 angular_step=0.9 | radius=12
struct SynthConfig {
    std::vector<MotifSpec> motifs;
    std::int64_t event_frame = -1;
};

SynthConfig load_motif_specs(const std::string& path);

std::string truth_to_csv(const LabeledCorpus& labeled);
void write_truth(const std::string& path, const LabeledCorpus& labeled);
std::map<std::string, std::string> load_truth(const std::string& path);

}  // namespace mk
