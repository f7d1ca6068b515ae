#include "mk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "mk/csv.hpp"
#include "mk/errors.hpp"
#include "mk/rng.hpp"

namespace mk {

namespace {

constexpr double kFieldHalfWidth = 200.0;  // px; start positions drawn from this square

Eigen::Matrix2d rotation(double angle) {
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

Eigen::Vector2d noise2(Rng& rng, double sigma) {
    return {rng.gaussian(sigma), rng.gaussian(sigma)};
}

void validate_params(Motif motif, const MotifParams& p) {
    if (!(p.noise_sigma >= 0.0)) throw_config("noise_sigma must be non-negative");
    if (motif == Motif::circular || motif == Motif::twirl) {
        if (!(p.radius > 0.0)) throw_config(motif_name(motif) + " requires radius > 0");
        if (!(p.angular_step > -std::numbers::pi && p.angular_step <= std::numbers::pi)) {
            throw_config("angular_step must lie in (-pi, pi]");
        }
    }
    if (motif == Motif::random_walk && !(p.step_sigma >= 0.0)) {
        throw_config("step_sigma must be non-negative");
    }
}

std::vector<TrajectoryPoint> to_points(const std::vector<Eigen::Vector2d>& xs) {
    std::vector<TrajectoryPoint> pts;
    pts.reserve(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) {
        pts.push_back(TrajectoryPoint{static_cast<std::int64_t>(t), xs[t].x(), xs[t].y(), {}});
    }
    return pts;
}

// Direction of x away from c, or (1, 0) when they coincide.
Eigen::Vector2d safe_direction(const Eigen::Vector2d& x, const Eigen::Vector2d& c) {
    const Eigen::Vector2d delta = x - c;
    const double norm = delta.norm();
    return norm > 0.0 ? Eigen::Vector2d(delta / norm) : Eigen::Vector2d(1.0, 0.0);
}

std::vector<Eigen::Vector2d> gen_circular(Rng& rng, std::int64_t length, const MotifParams& a,
                                          const MotifParams* b, std::int64_t switch_at) {
    Eigen::Vector2d center(rng.uniform(-kFieldHalfWidth, kFieldHalfWidth),
                           rng.uniform(-kFieldHalfWidth, kFieldHalfWidth));
    const double theta0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const MotifParams* cur = &a;
    Eigen::Matrix2d rot = rotation(cur->angular_step);

    std::vector<Eigen::Vector2d> xs;
    xs.reserve(static_cast<std::size_t>(length));
    xs.push_back(center + cur->radius * Eigen::Vector2d(std::cos(theta0), std::sin(theta0)));
    for (std::int64_t t = 1; t < length; ++t) {
        if (b && t == switch_at) {
            // Re-anchor: the current point sits on the new circle.
            center = xs.back() - b->radius * safe_direction(xs.back(), center);
            cur = b;
            rot = rotation(cur->angular_step);
        }
        xs.push_back(center + rot * (xs.back() - center) + noise2(rng, cur->noise_sigma));
    }
    return xs;
}

std::vector<Eigen::Vector2d> gen_twirl(Rng& rng, std::int64_t length, const MotifParams& a,
                                       const MotifParams* b, std::int64_t switch_at) {
    Eigen::Vector2d center(rng.uniform(-kFieldHalfWidth, kFieldHalfWidth),
                           rng.uniform(-kFieldHalfWidth, kFieldHalfWidth));
    const double theta0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const MotifParams* cur = &a;
    Eigen::Matrix2d rot = rotation(cur->angular_step);

    std::vector<Eigen::Vector2d> xs;
    xs.reserve(static_cast<std::size_t>(length));
    xs.push_back(center + cur->radius * Eigen::Vector2d(std::cos(theta0), std::sin(theta0)));
    if (length == 1) return xs;
    xs.push_back(center + cur->drift + rot * (xs[0] - center));
    for (std::int64_t t = 2; t < length; ++t) {
        if (b && t == switch_at) {
            // Seed one first-order step on the new orbit, then resume the
            // second-order recursion with the new coefficients.
            center = xs.back() - b->radius * safe_direction(xs.back(), center);
            cur = b;
            rot = rotation(cur->angular_step);
            xs.push_back(center + cur->drift + rot * (xs.back() - center) +
                         noise2(rng, cur->noise_sigma));
            continue;
        }
        const Eigen::Vector2d next = xs[xs.size() - 1] + rot * (xs[xs.size() - 1] - xs[xs.size() - 2]) +
                                     (Eigen::Matrix2d::Identity() - rot) * cur->drift +
                                     noise2(rng, cur->noise_sigma);
        xs.push_back(next);
    }
    return xs;
}

std::vector<Eigen::Vector2d> gen_linear(Rng& rng, std::int64_t length, const MotifParams& a,
                                        const MotifParams* b, std::int64_t switch_at) {
    Eigen::Vector2d start(rng.uniform(-kFieldHalfWidth, kFieldHalfWidth),
                          rng.uniform(-kFieldHalfWidth, kFieldHalfWidth));
    const MotifParams* cur = &a;

    std::vector<Eigen::Vector2d> xs;
    xs.reserve(static_cast<std::size_t>(length));
    xs.push_back(start);
    if (length == 1) return xs;
    xs.push_back(start + cur->drift);
    for (std::int64_t t = 2; t < length; ++t) {
        if (b && t == switch_at) {
            cur = b;
            xs.push_back(xs.back() + cur->drift + noise2(rng, cur->noise_sigma));
            continue;
        }
        xs.push_back(2.0 * xs[xs.size() - 1] - xs[xs.size() - 2] +
                     noise2(rng, cur->noise_sigma));
    }
    return xs;
}

std::vector<Eigen::Vector2d> gen_immotile(Rng& rng, std::int64_t length, const MotifParams& a,
                                          const MotifParams* b, std::int64_t switch_at) {
    const Eigen::Vector2d anchor(rng.uniform(-kFieldHalfWidth, kFieldHalfWidth),
                                 rng.uniform(-kFieldHalfWidth, kFieldHalfWidth));
    std::vector<Eigen::Vector2d> xs;
    xs.reserve(static_cast<std::size_t>(length));
    for (std::int64_t t = 0; t < length; ++t) {
        const MotifParams* cur = (b && t >= switch_at) ? b : &a;
        xs.push_back(anchor + noise2(rng, cur->noise_sigma));
    }
    return xs;
}

std::vector<Eigen::Vector2d> gen_random_walk(Rng& rng, std::int64_t length, const MotifParams& a,
                                             const MotifParams* b, std::int64_t switch_at) {
    Eigen::Vector2d pos(rng.uniform(-kFieldHalfWidth, kFieldHalfWidth),
                        rng.uniform(-kFieldHalfWidth, kFieldHalfWidth));
    std::vector<Eigen::Vector2d> xs;
    xs.reserve(static_cast<std::size_t>(length));
    xs.push_back(pos);
    for (std::int64_t t = 1; t < length; ++t) {
        const MotifParams* cur = (b && t >= switch_at) ? b : &a;
        pos += noise2(rng, cur->step_sigma);
        xs.push_back(pos + noise2(rng, cur->noise_sigma));
    }
    return xs;
}

}  // namespace

Motif parse_motif(const std::string& name) {
    if (name == "circular") return Motif::circular;
    if (name == "twirl") return Motif::twirl;
    if (name == "linear") return Motif::linear;
    if (name == "immotile") return Motif::immotile;
    if (name == "random_walk") return Motif::random_walk;
    throw_config("unknown motif '" + name + "'");
}

std::string motif_name(Motif motif) {
    switch (motif) {
        case Motif::circular: return "circular";
        case Motif::twirl: return "twirl";
        case Motif::linear: return "linear";
        case Motif::immotile: return "immotile";
        case Motif::random_walk: return "random_walk";
    }
    throw_config("invalid motif enum value");
}

LabeledCorpus generate(std::span<const MotifSpec> specs, std::uint64_t seed,
                       std::int64_t event_offset) {
    if (specs.empty()) throw_config("no motif specs given");
    const std::int64_t length = specs[0].length;
    for (const auto& spec : specs) {
        if (spec.count < 1) throw_config("motif count must be >= 1");
        if (spec.length < 2) throw_config("motif length must be >= 2");
        if (spec.length != length) {
            throw_config("all motif specs must share one trajectory length");
        }
        validate_params(spec.motif, spec.params);
        if (spec.after_params) validate_params(spec.motif, *spec.after_params);
    }
    const bool switching = event_offset > 0 && event_offset < length;

    std::vector<Trajectory> trajectories;
    std::map<std::string, std::string> truth;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const MotifSpec& spec = specs[s];
        const MotifParams* after =
            (switching && spec.after_params) ? &*spec.after_params : nullptr;
        for (int r = 0; r < spec.count; ++r) {
            Rng rng = Rng::substream(
                seed, (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint64_t>(r));
            std::vector<Eigen::Vector2d> xs;
            switch (spec.motif) {
                case Motif::circular:
                    xs = gen_circular(rng, length, spec.params, after, event_offset);
                    break;
                case Motif::twirl:
                    xs = gen_twirl(rng, length, spec.params, after, event_offset);
                    break;
                case Motif::linear:
                    xs = gen_linear(rng, length, spec.params, after, event_offset);
                    break;
                case Motif::immotile:
                    xs = gen_immotile(rng, length, spec.params, after, event_offset);
                    break;
                case Motif::random_walk:
                    xs = gen_random_walk(rng, length, spec.params, after, event_offset);
                    break;
            }
            std::ostringstream id;
            id << 's' << (s < 10 ? "0" : "") << s << '_' << motif_name(spec.motif) << "_r"
               << (r < 10 ? "00" : (r < 100 ? "0" : "")) << r;
            trajectories.emplace_back(id.str(), to_points(xs));
            truth[id.str()] = motif_name(spec.motif);
        }
    }
    return LabeledCorpus{TrajectoryCorpus(std::move(trajectories), length), std::move(truth)};
}

namespace {

std::vector<int> compact_labels(std::span<const int> labels) {
    std::unordered_map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    int next = 0;
    for (int label : labels) {
        auto [it, inserted] = remap.emplace(label, next);
        if (inserted) ++next;
        out.push_back(it->second);
    }
    return out;
}

std::int64_t comb2(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace

double adjusted_rand_index(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) {
        throw_data("adjusted_rand_index: partitions have different sizes (" +
                   std::to_string(truth.size()) + " vs " + std::to_string(predicted.size()) + ")");
    }
    const auto n = static_cast<std::int64_t>(truth.size());
    if (n < 2) return 1.0;

    const std::vector<int> a = compact_labels(truth);
    const std::vector<int> b = compact_labels(predicted);
    const int ka = *std::max_element(a.begin(), a.end()) + 1;
    const int kb = *std::max_element(b.begin(), b.end()) + 1;

    std::vector<std::int64_t> contingency(static_cast<std::size_t>(ka) * kb, 0);
    std::vector<std::int64_t> row_sum(static_cast<std::size_t>(ka), 0);
    std::vector<std::int64_t> col_sum(static_cast<std::size_t>(kb), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto ai = static_cast<std::size_t>(a[static_cast<std::size_t>(i)]);
        const auto bi = static_cast<std::size_t>(b[static_cast<std::size_t>(i)]);
        ++contingency[ai * static_cast<std::size_t>(kb) + bi];
        ++row_sum[ai];
        ++col_sum[bi];
    }

    std::int64_t index = 0;
    for (std::int64_t cell : contingency) index += comb2(cell);
    std::int64_t sum_a = 0, sum_b = 0;
    for (std::int64_t v : row_sum) sum_a += comb2(v);
    for (std::int64_t v : col_sum) sum_b += comb2(v);

    const double total = static_cast<double>(comb2(n));
    const double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) / total;
    const double max_index = 0.5 * static_cast<double>(sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0) return 1.0;  // both partitions trivial in the same way
    return (static_cast<double>(index) - expected) / denom;
}

double adjusted_rand_index(const std::vector<std::string>& truth,
                           const std::vector<std::string>& predicted) {
    auto encode = [](const std::vector<std::string>& labels) {
        std::unordered_map<std::string, int> remap;
        std::vector<int> out;
        out.reserve(labels.size());
        int next = 0;
        for (const auto& label : labels) {
            auto [it, inserted] = remap.emplace(label, next);
            if (inserted) ++next;
            out.push_back(it->second);
        }
        return out;
    };
    const std::vector<int> a = encode(truth);
    const std::vector<int> b = encode(predicted);
    return adjusted_rand_index(std::span<const int>(a), std::span<const int>(b));
}

namespace {

// Applies one `key=value` token onto params.
void apply_token(MotifParams& params, const std::string& key, const std::string& value,
                 const std::string& ctx) {
    if (key == "noise") {
        params.noise_sigma = parse_finite_double(value, ctx);
    } else if (key == "radius") {
        params.radius = parse_finite_double(value, ctx);
    } else if (key == "angular_step") {
        params.angular_step = parse_finite_double(value, ctx);
    } else if (key == "step_sigma") {
        params.step_sigma = parse_finite_double(value, ctx);
    } else if (key == "drift") {
        const auto comma = value.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorKind::config, ctx + ": drift needs two comma-separated components");
        }
        params.drift.x() = parse_finite_double(value.substr(0, comma), ctx);
        params.drift.y() = parse_finite_double(value.substr(comma + 1), ctx);
    } else {
        throw Error(ErrorKind::config, ctx + ": unknown parameter '" + key + "'");
    }
}

}  // namespace

SynthConfig load_motif_specs(const std::string& path) {
    const std::string content = read_text_file(path);
    SynthConfig config;
    std::istringstream stream(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const std::string ctx = path + ": line " + std::to_string(line_no);
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream tokens(line);
        std::string word;
        if (!(tokens >> word)) continue;

        if (word == "event") {
            std::string eq, value;
            if (!(tokens >> eq >> value) || eq != "=") {
                throw Error(ErrorKind::config, ctx + ": expected 'event = <frame>'");
            }
            config.event_frame = parse_int(value, ctx);
            continue;
        }
        if (word != "motif") {
            throw Error(ErrorKind::config, ctx + ": expected 'motif' or 'event', got '" + word + "'");
        }

        MotifSpec spec;
        std::string name;
        if (!(tokens >> name)) throw Error(ErrorKind::config, ctx + ": missing motif name");
        spec.motif = parse_motif(name);

        bool after_phase = false;
        MotifParams after;
        while (tokens >> word) {
            if (word == "|") {
                after_phase = true;
                after = spec.params;  // overrides apply on top of the base parameters
                continue;
            }
            const auto eq = word.find('=');
            if (eq == std::string::npos) {
                throw Error(ErrorKind::config, ctx + ": expected key=value, got '" + word + "'");
            }
            const std::string key = word.substr(0, eq);
            const std::string value = word.substr(eq + 1);
            if (key == "count") {
                if (after_phase) throw Error(ErrorKind::config, ctx + ": count is not switchable");
                spec.count = static_cast<int>(parse_int(value, ctx));
            } else if (key == "length") {
                if (after_phase) throw Error(ErrorKind::config, ctx + ": length is not switchable");
                spec.length = parse_int(value, ctx);
            } else {
                apply_token(after_phase ? after : spec.params, key, value, ctx);
            }
        }
        if (after_phase) spec.after_params = after;
        config.motifs.push_back(std::move(spec));
    }
    if (config.motifs.empty()) {
        throw Error(ErrorKind::config, path + ": no motif lines found");
    }
    return config;
}

std::string truth_to_csv(const LabeledCorpus& labeled) {
    std::string out = "object_id,motif\n";
    for (const auto& t : labeled.corpus.trajectories()) {
        const auto it = labeled.truth.find(t.object_id());
        if (it == labeled.truth.end()) {
            throw_data("truth map missing object '" + t.object_id() + "'");
        }
        out += t.object_id();
        out += ',';
        out += it->second;
        out += '\n';
    }
    return out;
}

void write_truth(const std::string& path, const LabeledCorpus& labeled) {
    write_text_file(path, truth_to_csv(labeled));
}

std::map<std::string, std::string> load_truth(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header != std::vector<std::string>{"object_id", "motif"}) {
        throw_data(path + ": expected header 'object_id,motif'");
    }
    std::map<std::string, std::string> truth;
    for (const auto& row : table.rows) {
        if (!truth.emplace(row[0], row[1]).second) {
            throw_data(path + ": duplicate object_id '" + row[0] + "'");
        }
    }
    return truth;
}

}  // namespace mk
