#pragma once

// Motion coherence of a box from cluster-labelled point tracks.

#include "tubeloc/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace tubeloc {

struct TrackPoint {
    int track_id = 0;
    int cluster_label = 0;
    double x = 0.0;
    double y = 0.0;
};

/// Tracks alive at one frame, plus per-cluster live counts.
struct FrameTrackIndex {
    std::vector<TrackPoint> points;
    std::map<int, int> cluster_counts;

    static FrameTrackIndex build(std::span<const Track> tracks, int frame_index);
};

/// The 16 perimeter cells of a 5x5 grid over a box. Each edge owns five
/// cells; the four corner cells belong to two edges.
struct EdgeBinning {
    static constexpr int kGrid = 5;
    static constexpr int kBins = 16;

    enum Edge { kLeft = 0, kRight = 1, kTop = 2, kBottom = 3 };

    /// Perimeter bin labels; indexed by perimeter_bin().
    std::array<std::optional<int>, kBins> labels{};

    /// Bin index of perimeter cell (col, row), or -1 for interior cells.
    static int perimeter_bin(int col, int row);
    /// The five bins along one edge.
    static std::array<int, kGrid> edge_bins(Edge edge);
};

/// Grid cell of a point inside `box` (inclusive boundaries, clamped to 0..4).
std::pair<int, int> cell_of(const Box& box, double x, double y);

/// Majority cluster label per perimeter bin; ties go to the smaller label.
EdgeBinning edge_bin_labels(const Box& box, const FrameTrackIndex& tracks);

/// Fraction of the cluster's live tracks whose point lies inside `box`;
/// 0 when the cluster has no live track in the frame.
double cluster_weight(int label, const Box& box, const FrameTrackIndex& tracks);

/// Sum over the four edges of the maximum cluster weight among occupied bins.
double motion_coherence(const Box& box, const FrameTrackIndex& tracks);

}  // namespace tubeloc
