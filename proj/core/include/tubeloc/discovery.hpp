#pragma once

// Alternating discovery (cross-video retrieval) and tracking (per-video DP).

#include "tubeloc/config.hpp"
#include "tubeloc/consistency.hpp"
#include "tubeloc/model_io.hpp"
#include "tubeloc/tube_solver.hpp"
#include "tubeloc/types.hpp"

#include <functional>
#include <map>
#include <span>
#include <vector>

namespace tubeloc {

/// Localized boxes of each key frame (one per tube kept for that video).
using RegionMap = std::map<FrameRef, std::vector<Box>>;

/// Scores computed for one key frame during relocalization; vectors are
/// indexed like Frame::proposals.
struct KeyFrameScores {
    int frame_index = 0;
    std::vector<double> saliency;
    std::vector<double> phi_a;
    std::vector<double> phi_m;
};

struct VideoState {
    std::vector<Tube> tubes;  // rank order, best first
    std::vector<KeyFrameScores> frames;
    std::vector<TransitionScores> transitions;
};

struct IterationState {
    int iteration = 0;
    std::vector<VideoState> videos;  // parallel to Collection::videos
    NeighborGraph graph;

    RegionMap localized_regions() const;
};

struct Snapshot {
    int iteration = 0;
    TubeSet tubes;
    NeighborGraph graph;
};

struct DiscoveryResult {
    TubeSet tubes;  // best tube per video
    NeighborGraph graph;
    std::vector<Snapshot> snapshots;
};

/// Whole-frame tube per video; iteration 0. Throws ValidationError for an
/// empty collection.
IterationState initialize(const Collection& collection, const Config& config);

/// k nearest other-video key frames by L2 signature distance; similarity is
/// the negated distance. Ties by (video, frame index).
NeighborGraph bootstrap_neighbors(const Collection& collection, int k, int stride);

/// Proposals of `frame` that lie at least 90% inside any of `regions`, the
/// `cap` most salient first (ties by proposal id).
std::vector<std::size_t> retrieval_subset(const Frame& frame, std::span<const Box> regions,
                                          std::span<const double> saliency, int cap);

/// Sum of region saliencies of the query subset matched against the
/// candidate subset; 0 when either subset is empty.
double phm_frame_similarity(const Frame& query, std::span<const Box> query_regions,
                            std::span<const double> query_saliency, const Frame& candidate,
                            std::span<const Box> candidate_regions,
                            std::span<const double> candidate_saliency, const Config& config);

/// Iteration 0 delegates to bootstrap_neighbors; later iterations rank other
/// videos' key frames by phm_frame_similarity.
NeighborGraph update_network(const IterationState& state, const Collection& collection,
                             const Config& config);

/// Scores every key frame of one video against its neighbors (neighbor
/// proposals restricted to the neighbors' localized regions) and builds the
/// candidate trellis. Per-frame and per-transition scores are recorded in
/// `scores` when it is non-null.
Trellis build_video_trellis(const Collection& collection, std::size_t video,
                            const NeighborGraph& graph, const RegionMap& regions,
                            const Config& config, VideoState* scores = nullptr);

/// build_video_trellis followed by sequential DP for up to `p` tubes.
VideoState relocalize_video(const Collection& collection, std::size_t video,
                            const NeighborGraph& graph, const RegionMap& regions,
                            const Config& config, int p);

/// Called after each completed iteration (1-based).
using IterationObserver = std::function<void(const IterationState&)>;

DiscoveryResult run_discovery(const Collection& collection, const Config& config,
                              const IterationObserver& observer = {});

TubeSet tube_set(const Collection& collection, const IterationState& state);

}  // namespace tubeloc
