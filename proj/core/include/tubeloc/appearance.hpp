#pragma once

// Probabilistic Hough matching between the proposal sets of two frames and
// the appearance-based foreground confidence derived from it.

#include "tubeloc/config.hpp"
#include "tubeloc/types.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace tubeloc {

/// Position and scale of a box relative to its frame:
/// (center_x / W, center_y / H, ln sqrt(box area / frame area)).
struct Location {
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
};

struct Offset {
    double du = 0.0;
    double dv = 0.0;
    double ds = 0.0;
};

Location location_of(const Box& box, double frame_width, double frame_height);
Offset offset_between(const Location& a, const Location& b);  // a - b

/// A frame's proposals as seen by the matcher. `proposals` may be any subset
/// of the frame's proposals (e.g. those inside a localized region).
struct RegionSet {
    double frame_width = 0.0;
    double frame_height = 0.0;
    std::vector<Proposal> proposals;
};

RegionSet region_set(const Frame& frame);
RegionSet region_set(const Frame& frame, std::span<const std::size_t> subset);

/// exp(-gamma * ||a - b||^2). Throws ValidationError on dimension mismatch.
double appearance_affinity(const Descriptor& a, const Descriptor& b, double gamma);

/// Unnormalized diagonal Gaussian of (offset - center), one bandwidth per axis.
double geometry_likelihood(const Offset& offset, const Offset& center, const HoughParams& params);

/// Accumulated votes over the discretized offset space, bins indexed
/// [iu][iv][is] in row-major order.
class HoughGrid {
public:
    explicit HoughGrid(const HoughParams& params);

    const HoughParams& params() const { return params_; }
    int translation_bins() const { return params_.translation_bins; }
    int scale_bins() const { return params_.scale_bins; }
    std::size_t bin_count() const { return votes_.size(); }

    double translation_center(int i) const;
    double scale_center(int i) const;
    Offset center(int iu, int iv, int is) const;

    std::size_t index(int iu, int iv, int is) const {
        return (static_cast<std::size_t>(iu) * static_cast<std::size_t>(params_.translation_bins) +
                static_cast<std::size_t>(iv)) *
                   static_cast<std::size_t>(params_.scale_bins) +
               static_cast<std::size_t>(is);
    }
    double at(int iu, int iv, int is) const { return votes_[index(iu, iv, is)]; }
    std::span<const double> votes() const { return votes_; }
    std::span<double> mutable_votes() { return votes_; }

    /// Writes a header line and one line per bin ("iu iv is center... vote").
    void dump(const std::filesystem::path& path) const;

private:
    HoughParams params_;
    std::vector<double> votes_;
};

/// Match confidence c(m) for every pair (query row, candidate column).
class MatchScoreTable {
public:
    MatchScoreTable() = default;
    MatchScoreTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double row_max(std::size_t r) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Bottom-up vote: every bin x receives sum over pairs of p(m_a) p(m_g | x).
/// Throws ValidationError when either set is empty.
HoughGrid hough_vote(const RegionSet& query, const RegionSet& candidate, const Config& config);

/// Top-down confidence: c(m) = p(m_a) * sum_x p(m_g | x) h(x).
MatchScoreTable match_confidence(const RegionSet& query, const RegionSet& candidate,
                                 const HoughGrid& grid, const Config& config);

/// hough_vote followed by match_confidence.
MatchScoreTable phm_match(const RegionSet& query, const RegionSet& candidate, const Config& config);

/// Region saliency of every query row: sum over tables (one per neighbor
/// frame) of the row maximum. Throws ValidationError for an empty list.
std::vector<double> region_saliency(std::span<const MatchScoreTable> tables);

/// True when `inner` is strictly contained in `outer`: at least 99% of inner
/// lies inside outer and outer is more than 1% larger.
bool strictly_contains(const Box& outer, const Box& inner);

/// Saliency minus the best saliency among strict containers (0 when none).
std::vector<double> standout_scores(std::span<const Box> boxes, std::span<const double> saliency);

/// Min-max rescale to [0, 1]; a constant input maps to all zeros.
std::vector<double> rescale_unit(std::span<const double> values);

/// Appearance confidence phi_a of each proposal of `frame`, given the match
/// tables of the frame against each neighbor (rows = frame proposals).
std::vector<double> standout_phi_a(const Frame& frame, std::span<const MatchScoreTable> tables);

}  // namespace tubeloc
