#pragma once

#include <string>

#include "mk/kernel.hpp"
#include "mk/spectral.hpp"
#include "mk/trajectory.hpp"

namespace mk {

// Static SVG reports. Documents are plain text, byte-deterministic for
// identical inputs, and carry no external references.

enum class PlotStyle { small_multiples, aggregate };

PlotStyle parse_plot_style(const std::string& text);

// small_multiples: one panel per non-empty cluster; every trajectory is
// drawn centered on its own centroid, so panels compare shape, not position.
// aggregate: all trajectories at absolute coordinates, colored by cluster
// from a fixed 10-color palette (cycled). Labels must cover the corpus ids.
std::string plot_clusters(const TrajectoryCorpus& corpus, const ClusterAssignment& labels,
                          PlotStyle style);

// Affinity matrix as an n x n cell grid, white (0) to dark blue (1).
std::string kernel_heatmap(const KernelMatrix& kernel);

}  // namespace mk
