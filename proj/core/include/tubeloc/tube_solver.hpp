#pragma once

// Chain dynamic programming over per-key-frame candidate regions.

#include "tubeloc/types.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace tubeloc {

struct Candidate {
    int proposal_id = 0;
    double phi = 0.0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Candidates per key frame plus a dense pairwise consistency matrix per
/// transition (rows = candidates of frame t, cols = candidates of frame t+1).
class Trellis {
public:
    Trellis() = default;
    Trellis(std::vector<int> frame_indices, std::vector<std::vector<Candidate>> candidates,
            std::vector<std::vector<double>> pairwise);

    std::size_t frame_count() const { return candidates_.size(); }
    const std::vector<int>& frame_indices() const { return frame_indices_; }
    std::span<const Candidate> candidates(std::size_t t) const { return candidates_[t]; }
    double psi(std::size_t t, std::size_t from, std::size_t to) const {
        return pairwise_[t][from * candidates_[t + 1].size() + to];
    }
    bool any_frame_empty() const;

    /// Position of `proposal_id` among frame t's candidates, or npos.
    std::size_t find(std::size_t t, int proposal_id) const;

    /// Copy with the given proposal removed from every frame (one id per frame).
    Trellis without(std::span<const int> proposal_ids) const;

    /// sum phi + lambda * sum psi of a proposal-id sequence, accumulated in
    /// long double. The sequence must name one candidate per frame.
    double objective(std::span<const int> proposal_ids, double lambda) const;

    /// One record per frame with its candidates and scores.
    void dump(const std::filesystem::path& path) const;

    friend bool operator==(const Trellis&, const Trellis&) = default;

private:
    std::vector<int> frame_indices_;
    std::vector<std::vector<Candidate>> candidates_;
    std::vector<std::vector<double>> pairwise_;
};

/// Returns the row-major pairwise matrix for transition t between the given
/// candidate lists.
using PairwiseScorer =
    std::function<std::vector<double>(std::size_t t, std::span<const Candidate> from,
                                      std::span<const Candidate> to)>;

/// Sorts each frame's candidates by phi descending (ties by proposal id
/// ascending), keeps the first `top_candidates`, then scores transitions.
/// Throws ValidationError for a frame with no candidates.
Trellis build_trellis(std::vector<int> frame_indices, std::vector<std::vector<Candidate>> unary,
                      int top_candidates, const PairwiseScorer& pairwise);

struct TubeSolution {
    std::vector<int> frame_indices;
    std::vector<int> proposal_ids;
    double objective = 0.0;

    friend bool operator==(const TubeSolution&, const TubeSolution&) = default;
};

/// Global maximizer of the chain objective; among equal objectives the
/// lexicographically smallest proposal-id sequence wins.
TubeSolution solve_best_tube(const Trellis& trellis, double lambda);

/// Sequential DP: solve, remove the chosen proposal from each frame, repeat.
/// Stops early once a frame runs out of candidates.
std::vector<TubeSolution> solve_p_best(const Trellis& trellis, int p, double lambda);

/// Attaches video id and proposal boxes.
Tube to_tube(const TubeSolution& solution, const Video& video);

}  // namespace tubeloc
