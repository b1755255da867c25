#pragma once

// Temporal consistency between regions of consecutive key frames.

#include "tubeloc/types.hpp"

#include <span>
#include <vector>

namespace tubeloc {

struct UnitSquarePoint {
    double u = 0.0;
    double v = 0.0;
};

/// Maps a point inside `box` to the box's unit square.
UnitSquarePoint tau(const Point2& point, const Box& box);

/// Raw appearance consistency: -||a - b||_2.
double psi_appearance_raw(const Descriptor& a, const Descriptor& b);

/// Per-transition min-max rescale of raw appearance consistencies.
std::vector<double> psi_appearance(std::span<const double> raw);

/// Tracks alive at both frames whose points lie inside `box_from` at
/// `frame_from` and inside `box_to` at `frame_to`.
std::vector<const Track*> shared_tracks(std::span<const Track> tracks, const Box& box_from,
                                        int frame_from, const Box& box_to, int frame_to);

/// Motion consistency: theta when no track is shared, otherwise minus the
/// mean half-L1 distance between unit-square coordinates, in [-1, 0].
double psi_motion(const Box& box_from, int frame_from, const Box& box_to, int frame_to,
                  std::span<const Track* const> shared, double theta);

double psi_motion(const Box& box_from, int frame_from, const Box& box_to, int frame_to,
                  std::span<const Track> tracks, double theta);

inline double psi_total(double psi_a_rescaled, double psi_m) { return psi_a_rescaled + psi_m; }

/// Full pairwise consistency matrix (rows = `from`, cols = `to`) for one
/// key-frame transition: rescaled psi_a plus psi_m.
struct TransitionScores {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> psi_a;  // rescaled, row-major
    std::vector<double> psi_m;
    std::vector<double> total;
};

TransitionScores transition_scores(std::span<const Proposal* const> from, int frame_from,
                                   std::span<const Proposal* const> to, int frame_to,
                                   std::span<const Track> tracks, double theta);

}  // namespace tubeloc
