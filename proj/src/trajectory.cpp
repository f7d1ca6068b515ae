#include "mk/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mk/csv.hpp"
#include "mk/errors.hpp"

namespace mk {

Trajectory::Trajectory(std::string object_id, std::vector<TrajectoryPoint> points)
    : object_id_(std::move(object_id)), points_(std::move(points)) {
    if (object_id_.empty()) throw_data("trajectory with empty object_id");
    if (points_.empty()) throw_data("trajectory '" + object_id_ + "' has no points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw_data("trajectory '" + object_id_ + "': non-finite coordinate at frame " +
                       std::to_string(p.frame));
        }
        if (p.fluorescence && (!std::isfinite(*p.fluorescence) || *p.fluorescence < 0.0)) {
            throw_data("trajectory '" + object_id_ + "': invalid fluorescence at frame " +
                       std::to_string(p.frame));
        }
        if (i > 0 && points_[i - 1].frame >= p.frame) {
            throw_data("trajectory '" + object_id_ + "': frame indices not strictly increasing (" +
                       std::to_string(points_[i - 1].frame) + " then " + std::to_string(p.frame) +
                       ")");
        }
    }
}

TrajectoryCorpus::TrajectoryCorpus(std::vector<Trajectory> trajectories,
                                   std::int64_t segment_length)
    : trajectories_(std::move(trajectories)), segment_length_(segment_length) {
    if (segment_length_ <= 0) throw_data("corpus segment_length must be positive");
    std::set<std::string> seen;
    for (const auto& t : trajectories_) {
        if (static_cast<std::int64_t>(t.size()) != segment_length_) {
            throw_data("corpus not normalized: trajectory '" + t.object_id() + "' has " +
                       std::to_string(t.size()) + " points, expected " +
                       std::to_string(segment_length_));
        }
        if (!seen.insert(t.object_id()).second) {
            throw_data("duplicate object_id '" + t.object_id() + "' in corpus");
        }
    }
}

std::vector<std::string> TrajectoryCorpus::object_ids() const {
    std::vector<std::string> ids;
    ids.reserve(trajectories_.size());
    for (const auto& t : trajectories_) ids.push_back(t.object_id());
    return ids;
}

SegmentedCorpus::SegmentedCorpus(TrajectoryCorpus before_corpus, TrajectoryCorpus after_corpus)
    : before(std::move(before_corpus)), after(std::move(after_corpus)) {
    if (before.segment_length() != after.segment_length()) {
        throw_data("segmented corpus halves have different segment lengths");
    }
    if (before.size() != after.size()) {
        throw_data("segmented corpus halves have different object counts");
    }
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (before.trajectories()[i].object_id() != after.trajectories()[i].object_id()) {
            throw_data("segmented corpus halves disagree on object order at index " +
                       std::to_string(i));
        }
    }
}

namespace {

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const std::string& path, bool required) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    if (required) throw_data(path + ": missing required column '" + name + "'");
    return header.size();  // sentinel: not present
}

}  // namespace

std::vector<Trajectory> load_trajectories(const std::string& path, const CsvSchema& schema) {
    const CsvTable table = read_csv(path);
    const std::size_t id_col = find_column(table.header, schema.object_id, path, true);
    const std::size_t frame_col = find_column(table.header, schema.frame, path, true);
    const std::size_t x_col = find_column(table.header, schema.x, path, true);
    const std::size_t y_col = find_column(table.header, schema.y, path, true);
    const std::size_t fluo_col = find_column(table.header, schema.fluorescence, path, false);
    const bool has_fluo = fluo_col < table.header.size();

    // std::map keeps objects in lexicographic id order, which is the
    // canonical corpus order (independent of input row order).
    std::map<std::string, std::vector<TrajectoryPoint>> groups;
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        const std::string ctx = path + ": line " + std::to_string(line_no);
        const std::string& id = row[id_col];
        if (id.empty()) throw_data(ctx + ": empty object_id");
        TrajectoryPoint p;
        p.frame = parse_int(row[frame_col], ctx + ", column '" + schema.frame + "'");
        if (p.frame < 0) throw_data(ctx + ": negative frame index");
        p.x = parse_finite_double(row[x_col], ctx + ", column '" + schema.x + "'");
        p.y = parse_finite_double(row[y_col], ctx + ", column '" + schema.y + "'");
        if (has_fluo && !row[fluo_col].empty()) {
            p.fluorescence =
                parse_finite_double(row[fluo_col], ctx + ", column '" + schema.fluorescence + "'");
        }
        groups[id].push_back(p);
    }

    std::vector<Trajectory> result;
    result.reserve(groups.size());
    for (auto& [id, points] : groups) {
        std::stable_sort(points.begin(), points.end(),
                         [](const TrajectoryPoint& a, const TrajectoryPoint& b) {
                             return a.frame < b.frame;
                         });
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (points[i - 1].frame == points[i].frame) {
                throw_data(path + ": duplicate (object_id, frame) = ('" + id + "', " +
                           std::to_string(points[i].frame) + ")");
            }
        }
        result.emplace_back(id, std::move(points));
    }
    return result;
}

std::string trajectories_to_csv(std::span<const Trajectory> trajectories) {
    bool any_fluo = false;
    for (const auto& t : trajectories) {
        check_csv_safe(t.object_id());
        for (const auto& p : t.points()) {
            if (p.fluorescence) any_fluo = true;
        }
    }
    std::string out = any_fluo ? "object_id,frame,x,y,fluorescence\n" : "object_id,frame,x,y\n";
    for (const auto& t : trajectories) {
        for (const auto& p : t.points()) {
            out += t.object_id();
            out += ',';
            out += format_int(p.frame);
            out += ',';
            out += format_double(p.x);
            out += ',';
            out += format_double(p.y);
            if (any_fluo) {
                out += ',';
                if (p.fluorescence) out += format_double(*p.fluorescence);
            }
            out += '\n';
        }
    }
    return out;
}

void write_trajectories(const std::string& path, std::span<const Trajectory> trajectories) {
    write_text_file(path, trajectories_to_csv(trajectories));
}

std::vector<Trajectory> filter_min_length(std::vector<Trajectory> trajectories,
                                          std::int64_t min_frames) {
    if (min_frames < 1) throw_data("min_frames must be >= 1");
    std::vector<Trajectory> kept;
    kept.reserve(trajectories.size());
    for (auto& t : trajectories) {
        if (static_cast<std::int64_t>(t.size()) >= min_frames) kept.push_back(std::move(t));
    }
    return kept;
}

std::vector<Trajectory> filter_max_step(std::vector<Trajectory> trajectories, double max_step) {
    if (!(max_step > 0.0)) throw_data("max_step must be positive");
    std::vector<Trajectory> kept;
    kept.reserve(trajectories.size());
    for (auto& t : trajectories) {
        bool ok = true;
        const auto& pts = t.points();
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double dx = pts[i].x - pts[i - 1].x;
            const double dy = pts[i].y - pts[i - 1].y;
            if (std::sqrt(dx * dx + dy * dy) > max_step) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(std::move(t));
    }
    return kept;
}

std::pair<Trajectory, Trajectory> split_at_event(const Trajectory& trajectory,
                                                 std::int64_t event_frame) {
    std::vector<TrajectoryPoint> before, after;
    for (const auto& p : trajectory.points()) {
        (p.frame < event_frame ? before : after).push_back(p);
    }
    if (before.empty() || after.empty()) {
        throw_data("trajectory '" + trajectory.object_id() +
                   "' has no points on one side of event frame " + std::to_string(event_frame));
    }
    return {Trajectory(trajectory.object_id(), std::move(before)),
            Trajectory(trajectory.object_id(), std::move(after))};
}

namespace {

TrajectoryCorpus truncate_impl(const std::vector<Trajectory>& trajectories, std::int64_t length,
                               bool keep_tail) {
    if (length <= 0) throw_data("truncation length must be positive");
    std::vector<Trajectory> result;
    result.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        if (static_cast<std::int64_t>(t.size()) < length) {
            throw_data("trajectory '" + t.object_id() + "' has " + std::to_string(t.size()) +
                       " points, fewer than truncation length " + std::to_string(length));
        }
        const auto& pts = t.points();
        const std::size_t offset = keep_tail ? pts.size() - static_cast<std::size_t>(length) : 0;
        std::vector<TrajectoryPoint> kept(pts.begin() + static_cast<std::ptrdiff_t>(offset),
                                          pts.begin() + static_cast<std::ptrdiff_t>(offset) +
                                              static_cast<std::ptrdiff_t>(length));
        result.emplace_back(t.object_id(), std::move(kept));
    }
    return TrajectoryCorpus(std::move(result), length);
}

}  // namespace

TrajectoryCorpus truncate_uniform(const std::vector<Trajectory>& trajectories,
                                  std::int64_t length) {
    return truncate_impl(trajectories, length, /*keep_tail=*/false);
}

TrajectoryCorpus truncate_uniform_tail(const std::vector<Trajectory>& trajectories,
                                       std::int64_t length) {
    return truncate_impl(trajectories, length, /*keep_tail=*/true);
}

SegmentedCorpus segment_corpus(const std::vector<Trajectory>& trajectories,
                               std::int64_t event_frame, std::int64_t segment_length) {
    if (segment_length <= 0) throw_data("segment_length must be positive");
    std::vector<Trajectory> before_side, after_side;
    for (const auto& t : trajectories) {
        const auto& pts = t.points();
        if (pts.front().frame >= event_frame || pts.back().frame < event_frame) continue;
        std::size_t n_before = 0;
        for (const auto& p : pts) {
            if (p.frame < event_frame) ++n_before;
        }
        const std::size_t n_after = pts.size() - n_before;
        const auto needed = static_cast<std::size_t>(segment_length);
        if (n_before < needed || n_after < needed) continue;
        auto [b, a] = split_at_event(t, event_frame);
        before_side.push_back(std::move(b));
        after_side.push_back(std::move(a));
    }
    if (before_side.empty()) {
        throw_data("no trajectory covers " + std::to_string(segment_length) +
                   " frames on both sides of event frame " + std::to_string(event_frame));
    }
    return SegmentedCorpus(truncate_uniform_tail(before_side, segment_length),
                           truncate_uniform(after_side, segment_length));
}

}  // namespace mk
