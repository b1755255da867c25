#include "tubeloc/motion.hpp"

#include <algorithm>
#include <cmath>

namespace tubeloc {

FrameTrackIndex FrameTrackIndex::build(std::span<const Track> tracks, int frame_index) {
    FrameTrackIndex index;
    for (const Track& t : tracks) {
        if (!t.alive_at(frame_index)) continue;
        const Point2& p = t.at(frame_index);
        index.points.push_back(TrackPoint{t.id, t.cluster_label, p.x, p.y});
        ++index.cluster_counts[t.cluster_label];
    }
    return index;
}

// Perimeter bins: top row 0..4, bottom row 5..9, left column (rows 1..3)
// 10..12, right column (rows 1..3) 13..15.
int EdgeBinning::perimeter_bin(int col, int row) {
    constexpr int last = kGrid - 1;
    if (row == 0) return col;
    if (row == last) return kGrid + col;
    if (col == 0) return 2 * kGrid + (row - 1);
    if (col == last) return 2 * kGrid + (kGrid - 2) + (row - 1);
    return -1;
}

std::array<int, EdgeBinning::kGrid> EdgeBinning::edge_bins(Edge edge) {
    std::array<int, kGrid> out{};
    for (int i = 0; i < kGrid; ++i) {
        switch (edge) {
            case kTop: out[i] = perimeter_bin(i, 0); break;
            case kBottom: out[i] = perimeter_bin(i, kGrid - 1); break;
            case kLeft: out[i] = perimeter_bin(0, i); break;
            case kRight: out[i] = perimeter_bin(kGrid - 1, i); break;
        }
    }
    return out;
}

std::pair<int, int> cell_of(const Box& box, double x, double y) {
    constexpr int n = EdgeBinning::kGrid;
    auto index = [](double offset, double extent) {
        const int i = static_cast<int>(std::floor(offset / extent * n));
        return std::clamp(i, 0, n - 1);
    };
    return {index(x - box.x_min, box.width), index(y - box.y_min, box.height)};
}

EdgeBinning edge_bin_labels(const Box& box, const FrameTrackIndex& tracks) {
    std::array<std::map<int, int>, EdgeBinning::kBins> tallies;
    for (const TrackPoint& p : tracks.points) {
        if (!box.contains(p.x, p.y)) continue;
        const auto [col, row] = cell_of(box, p.x, p.y);
        const int bin = EdgeBinning::perimeter_bin(col, row);
        if (bin >= 0) ++tallies[static_cast<std::size_t>(bin)][p.cluster_label];
    }
    EdgeBinning binning;
    for (std::size_t b = 0; b < tallies.size(); ++b) {
        int best_label = 0;
        int best_count = 0;
        // Ascending label order: strict > keeps the smaller label on ties.
        for (const auto& [label, count] : tallies[b]) {
            if (count > best_count) {
                best_label = label;
                best_count = count;
            }
        }
        if (best_count > 0) binning.labels[b] = best_label;
    }
    return binning;
}

double cluster_weight(int label, const Box& box, const FrameTrackIndex& tracks) {
    auto it = tracks.cluster_counts.find(label);
    if (it == tracks.cluster_counts.end() || it->second == 0) return 0.0;
    int inside = 0;
    for (const TrackPoint& p : tracks.points) {
        if (p.cluster_label == label && box.contains(p.x, p.y)) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(it->second);
}

double motion_coherence(const Box& box, const FrameTrackIndex& tracks) {
    const EdgeBinning binning = edge_bin_labels(box, tracks);
    std::map<int, double> weights;
    auto weight = [&](int label) {
        auto it = weights.find(label);
        if (it != weights.end()) return it->second;
        const double w = cluster_weight(label, box, tracks);
        weights.emplace(label, w);
        return w;
    };
    double score = 0.0;
    for (auto edge : {EdgeBinning::kLeft, EdgeBinning::kRight, EdgeBinning::kTop, EdgeBinning::kBottom}) {
        double best = 0.0;
        for (int b : EdgeBinning::edge_bins(edge)) {
            const auto& label = binning.labels[static_cast<std::size_t>(b)];
            if (label) best = std::max(best, weight(*label));
        }
        score += best;
    }
    return score;
}

}  // namespace tubeloc
