#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mk {

// One tracked observation: frame index, pixel position, and the optional
// fluorescence intensity carried through from the tracker (never used in
// features, only passed along).
struct TrajectoryPoint {
    std::int64_t frame = 0;
    double x = 0.0;
    double y = 0.0;
    std::optional<double> fluorescence;
};

// Time-ordered positions of one tracked object. Invariants checked at
// construction: non-empty, frame indices strictly increasing, coordinates
// finite, fluorescence (when present) finite and non-negative.
class Trajectory {
public:
    Trajectory(std::string object_id, std::vector<TrajectoryPoint> points);

    const std::string& object_id() const { return object_id_; }
    const std::vector<TrajectoryPoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    const TrajectoryPoint& operator[](std::size_t i) const { return points_[i]; }

private:
    std::string object_id_;
    std::vector<TrajectoryPoint> points_;
};

// A set of equally long trajectories with unique object ids; segment_length
// is the (uniform) number of frames per trajectory.
class TrajectoryCorpus {
public:
    TrajectoryCorpus(std::vector<Trajectory> trajectories, std::int64_t segment_length);

    const std::vector<Trajectory>& trajectories() const { return trajectories_; }
    std::int64_t segment_length() const { return segment_length_; }
    std::size_t size() const { return trajectories_.size(); }
    std::vector<std::string> object_ids() const;

private:
    std::vector<Trajectory> trajectories_;
    std::int64_t segment_length_;
};

// The pre-stimulus / post-stimulus halves of a corpus. Both halves carry the
// same object ids in the same order and the same segment length.
struct SegmentedCorpus {
    TrajectoryCorpus before;
    TrajectoryCorpus after;

    SegmentedCorpus(TrajectoryCorpus before_corpus, TrajectoryCorpus after_corpus);
};

// Column-name mapping for trajectory CSV ingestion. The fluorescence column
// is optional; when the header lacks it, points carry no fluorescence.
struct CsvSchema {
    std::string object_id = "object_id";
    std::string frame = "frame";
    std::string x = "x";
    std::string y = "y";
    std::string fluorescence = "fluorescence";
};

// Reads a trajectory CSV. One Trajectory per distinct object id, points
// sorted by frame; trajectories returned in lexicographic object-id order so
// the result is independent of input row order. Errors: unreadable file (io),
// malformed row with its line number, duplicate (object_id, frame), or
// non-finite coordinate (all data errors).
std::vector<Trajectory> load_trajectories(const std::string& path, const CsvSchema& schema = {});

// Serializes trajectories grouped per object, frames ascending. The
// fluorescence column is emitted only if at least one point carries a value;
// points without one get an empty field.
std::string trajectories_to_csv(std::span<const Trajectory> trajectories);
void write_trajectories(const std::string& path, std::span<const Trajectory> trajectories);

// Keeps exactly the trajectories with at least `min_frames` points,
// preserving order.
std::vector<Trajectory> filter_min_length(std::vector<Trajectory> trajectories,
                                          std::int64_t min_frames);

// Drops trajectories whose largest per-step displacement exceeds `max_step`
// (artifact filter; disabled by default in the pipeline).
std::vector<Trajectory> filter_max_step(std::vector<Trajectory> trajectories, double max_step);

// Splits around the stimulus: first part holds frames < event_frame, second
// holds frames >= event_frame; their concatenation is the input. Throws a
// data error when either side would be empty.
std::pair<Trajectory, Trajectory> split_at_event(const Trajectory& trajectory,
                                                 std::int64_t event_frame);

// Each trajectory keeps its first `length` points. Throws a data error
// naming the object id of any trajectory shorter than `length`.
TrajectoryCorpus truncate_uniform(const std::vector<Trajectory>& trajectories,
                                  std::int64_t length);

// Same contract but keeps the *last* `length` points; used for the
// pre-stimulus side so the segment ends immediately at the event.
TrajectoryCorpus truncate_uniform_tail(const std::vector<Trajectory>& trajectories,
                                       std::int64_t length);

// Full preprocessing: split every trajectory at `event_frame`, keep objects
// with at least `segment_length` points on each side, then take the last
// `segment_length` points before the event and the first `segment_length`
// after it. Objects that do not cover both sides are silently discarded;
// throws a data error if nothing survives.
SegmentedCorpus segment_corpus(const std::vector<Trajectory>& trajectories,
                               std::int64_t event_frame, std::int64_t segment_length);

}  // namespace mk
