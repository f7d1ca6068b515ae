#include "mk/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

#include "mk/errors.hpp"

namespace mk {

namespace {

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

// Two decimal places is plenty for plot geometry and keeps output compact.
std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string svg_open(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string polyline(const std::string& points, const char* color) {
    return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1\" points=\"" + points + "\"/>\n";
}

struct Bounds {
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
};

Bounds trajectory_bounds(const TrajectoryCorpus& corpus) {
    Bounds b;
    bool first = true;
    for (const auto& t : corpus.trajectories()) {
        for (const auto& p : t.points()) {
            if (first) {
                b = Bounds{p.x, p.x, p.y, p.y};
                first = false;
            } else {
                b.min_x = std::min(b.min_x, p.x);
                b.max_x = std::max(b.max_x, p.x);
                b.min_y = std::min(b.min_y, p.y);
                b.max_y = std::max(b.max_y, p.y);
            }
        }
    }
    return b;
}

std::map<std::string, int> label_map(const ClusterAssignment& labels) {
    std::map<std::string, int> by_id;
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        by_id[labels.object_ids[i]] = labels.labels[i];
    }
    return by_id;
}

std::string heat_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    // white -> dark blue
    const int r = static_cast<int>(std::lround(255.0 + (8.0 - 255.0) * v));
    const int g = static_cast<int>(std::lround(255.0 + (48.0 - 255.0) * v));
    const int b = static_cast<int>(std::lround(255.0 + (107.0 - 255.0) * v));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

PlotStyle parse_plot_style(const std::string& text) {
    if (text == "small_multiples") return PlotStyle::small_multiples;
    if (text == "aggregate") return PlotStyle::aggregate;
    throw_config("unknown plot style '" + text + "' (expected 'small_multiples' or 'aggregate')");
}

std::string plot_clusters(const TrajectoryCorpus& corpus, const ClusterAssignment& labels,
                          PlotStyle style) {
    const std::map<std::string, int> by_id = label_map(labels);
    for (const auto& t : corpus.trajectories()) {
        if (!by_id.count(t.object_id())) {
            throw_data("plot_clusters: no label for object '" + t.object_id() + "'");
        }
    }

    if (style == PlotStyle::aggregate) {
        const Bounds b = trajectory_bounds(corpus);
        const double span_x = std::max(b.width(), 1e-9);
        const double span_y = std::max(b.height(), 1e-9);
        const double margin = 0.05 * std::max(span_x, span_y);
        const double width = 800.0;
        const double scale = (width - 2.0) / (span_x + 2 * margin);
        const double height = scale * (span_y + 2 * margin) + 2.0;

        std::string doc = svg_open(width, height);
        for (const auto& t : corpus.trajectories()) {
            const int label = by_id.at(t.object_id());
            std::string pts;
            for (const auto& p : t.points()) {
                const double sx = 1.0 + scale * (p.x - b.min_x + margin);
                const double sy = 1.0 + scale * (b.max_y + margin - p.y);  // y grows downward
                pts += fmt(sx) + "," + fmt(sy) + " ";
            }
            if (!pts.empty()) pts.pop_back();
            doc += polyline(pts, kPalette[static_cast<std::size_t>(label) % 10]);
        }
        doc += "</svg>\n";
        return doc;
    }

    // small multiples: group members per cluster, skip empty clusters
    std::map<int, std::vector<const Trajectory*>> clusters;
    for (const auto& t : corpus.trajectories()) {
        clusters[by_id.at(t.object_id())].push_back(&t);
    }

    const int n_panels = static_cast<int>(clusters.size());
    const int n_cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(n_panels))));
    const int n_rows = (n_panels + n_cols - 1) / n_cols;
    const double panel = 220.0;
    const double pad = 14.0;

    std::string doc = svg_open(n_cols * panel, n_rows * panel);
    int index = 0;
    for (const auto& [label, members] : clusters) {
        const double ox = (index % n_cols) * panel;
        const double oy = (index / n_cols) * panel;
        ++index;

        // centroid-centered coordinates share one scale per panel
        double extent = 0.0;
        std::vector<std::pair<const Trajectory*, std::pair<double, double>>> centered;
        for (const Trajectory* t : members) {
            double cx = 0, cy = 0;
            for (const auto& p : t->points()) {
                cx += p.x;
                cy += p.y;
            }
            cx /= static_cast<double>(t->size());
            cy /= static_cast<double>(t->size());
            centered.push_back({t, {cx, cy}});
            for (const auto& p : t->points()) {
                extent = std::max({extent, std::abs(p.x - cx), std::abs(p.y - cy)});
            }
        }
        const double scale = (panel / 2.0 - pad) / std::max(extent, 1e-9);

        doc += "<g class=\"panel\" data-cluster=\"" + std::to_string(label) + "\">\n";
        doc += "<rect x=\"" + fmt(ox + 1) + "\" y=\"" + fmt(oy + 1) + "\" width=\"" +
               fmt(panel - 2) + "\" height=\"" + fmt(panel - 2) +
               "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
        doc += "<text x=\"" + fmt(ox + 8) + "\" y=\"" + fmt(oy + 16) +
               "\" font-family=\"sans-serif\" font-size=\"11\">cluster " + std::to_string(label) +
               " (" + std::to_string(members.size()) + ")</text>\n";
        for (const auto& [t, centroid] : centered) {
            std::string pts;
            for (const auto& p : t->points()) {
                const double sx = ox + panel / 2.0 + scale * (p.x - centroid.first);
                const double sy = oy + panel / 2.0 - scale * (p.y - centroid.second);
                pts += fmt(sx) + "," + fmt(sy) + " ";
            }
            if (!pts.empty()) pts.pop_back();
            doc += polyline(pts, kPalette[static_cast<std::size_t>(label) % 10]);
        }
        doc += "</g>\n";
    }
    doc += "</svg>\n";
    return doc;
}

std::string kernel_heatmap(const KernelMatrix& kernel) {
    const Eigen::Index n = kernel.size();
    const double side = 600.0;
    const double cell = side / static_cast<double>(n);

    std::string doc = svg_open(side, side);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            doc += "<rect x=\"" + fmt(static_cast<double>(j) * cell) + "\" y=\"" +
                   fmt(static_cast<double>(i) * cell) + "\" width=\"" + fmt(cell) +
                   "\" height=\"" + fmt(cell) + "\" fill=\"" +
                   heat_color(kernel.values()(i, j)) + "\"/>\n";
        }
    }
    doc += "</svg>\n";
    return doc;
}

}  // namespace mk
