#include "tubeloc/discovery.hpp"

#include "parallel.hpp"
#include "tubeloc/appearance.hpp"
#include "tubeloc/error.hpp"
#include "tubeloc/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tubeloc {

namespace {

// A proposal belongs to a localized region when this share of its area lies
// inside the region box.
constexpr double kContainedCoverage = 0.9;

std::vector<FrameRef> all_key_frames(const Collection& collection, int stride) {
    std::vector<FrameRef> refs;
    for (std::size_t v = 0; v < collection.videos.size(); ++v) {
        for (int t : key_frames(collection.videos[v], stride)) refs.push_back(FrameRef{v, t});
    }
    return refs;
}

const Frame& frame_of(const Collection& collection, const FrameRef& ref) {
    return collection.videos.at(ref.video).frame(ref.frame_index);
}

bool neighbor_order(const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.frame < b.frame;
}

double signature_distance(const Frame& a, const Frame& b) {
    if (a.signature.empty() || b.signature.empty()) {
        throw ValidationError("frame " + std::to_string(a.signature.empty() ? a.frame_index : b.frame_index) +
                              " has no signature");
    }
    return std::sqrt(squared_distance(a.signature, b.signature));
}

std::vector<std::size_t> contained_proposals(const Frame& frame, std::span<const Box> regions) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < frame.proposals.size(); ++i) {
        const Box& b = frame.proposals[i].box;
        for (const Box& r : regions) {
            if (coverage(b, r) >= kContainedCoverage) {
                idx.push_back(i);
                break;
            }
        }
    }
    return idx;
}

const KeyFrameScores* scores_for(const VideoState& state, int frame_index) {
    for (const auto& f : state.frames) {
        if (f.frame_index == frame_index) return &f;
    }
    return nullptr;
}

}  // namespace

RegionMap IterationState::localized_regions() const {
    RegionMap out;
    for (std::size_t v = 0; v < videos.size(); ++v) {
        for (const Tube& tube : videos[v].tubes) {
            for (const TubeRegion& r : tube.regions) out[FrameRef{v, r.frame_index}].push_back(r.box);
        }
    }
    return out;
}

IterationState initialize(const Collection& collection, const Config& config) {
    if (collection.videos.empty()) throw ValidationError("initialize: empty collection");
    IterationState state;
    state.iteration = 0;
    state.videos.resize(collection.videos.size());
    for (std::size_t v = 0; v < collection.videos.size(); ++v) {
        const Video& video = collection.videos[v];
        Tube tube;
        tube.video_id = video.id;
        for (int t : key_frames(video, config.keyframe_stride)) {
            tube.regions.push_back(TubeRegion{t, kWholeFrame, video.frame(t).bounds()});
        }
        state.videos[v].tubes.push_back(std::move(tube));
    }
    return state;
}

NeighborGraph bootstrap_neighbors(const Collection& collection, int k, int stride) {
    if (k < 1) throw ValidationError("bootstrap_neighbors: k must be >= 1");
    const auto refs = all_key_frames(collection, stride);
    NeighborGraph graph;
    for (const FrameRef& q : refs) {
        const Frame& qf = frame_of(collection, q);
        std::vector<Neighbor> list;
        for (const FrameRef& c : refs) {
            if (c.video == q.video) continue;
            list.push_back(Neighbor{c, -signature_distance(qf, frame_of(collection, c))});
        }
        std::sort(list.begin(), list.end(), neighbor_order);
        if (list.size() > static_cast<std::size_t>(k)) list.resize(static_cast<std::size_t>(k));
        graph.neighbors.emplace(q, std::move(list));
    }
    return graph;
}

std::vector<std::size_t> retrieval_subset(const Frame& frame, std::span<const Box> regions,
                                          std::span<const double> saliency, int cap) {
    auto idx = contained_proposals(frame, regions);
    auto sal = [&](std::size_t i) { return i < saliency.size() ? saliency[i] : 0.0; };
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (sal(a) != sal(b)) return sal(a) > sal(b);
        return frame.proposals[a].id < frame.proposals[b].id;
    });
    if (cap >= 0 && idx.size() > static_cast<std::size_t>(cap)) idx.resize(static_cast<std::size_t>(cap));
    return idx;
}

double phm_frame_similarity(const Frame& query, std::span<const Box> query_regions,
                            std::span<const double> query_saliency, const Frame& candidate,
                            std::span<const Box> candidate_regions,
                            std::span<const double> candidate_saliency, const Config& config) {
    const auto qs = retrieval_subset(query, query_regions, query_saliency, config.retrieval_proposals);
    const auto cs = retrieval_subset(candidate, candidate_regions, candidate_saliency, config.retrieval_proposals);
    if (qs.empty() || cs.empty()) return 0.0;
    const MatchScoreTable table = phm_match(region_set(query, qs), region_set(candidate, cs), config);
    double total = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) total += table.row_max(r);
    return total;
}

NeighborGraph update_network(const IterationState& state, const Collection& collection, const Config& config) {
    if (state.iteration == 0) {
        return bootstrap_neighbors(collection, config.k_neighbors, config.keyframe_stride);
    }
    const auto refs = all_key_frames(collection, config.keyframe_stride);
    const RegionMap regions = state.localized_regions();
    static const std::vector<Box> kNoRegions;
    static const std::vector<double> kNoSaliency;
    auto regions_of = [&](const FrameRef& r) -> const std::vector<Box>& {
        auto it = regions.find(r);
        return it == regions.end() ? kNoRegions : it->second;
    };
    auto saliency_of = [&](const FrameRef& r) -> const std::vector<double>& {
        const KeyFrameScores* s = scores_for(state.videos.at(r.video), r.frame_index);
        return s == nullptr ? kNoSaliency : s->saliency;
    };

    std::vector<std::vector<Neighbor>> lists(refs.size());
    detail::parallel_for(refs.size(), detail::resolve_threads(config.threads), [&](std::size_t qi) {
        const FrameRef& q = refs[qi];
        const Frame& qf = frame_of(collection, q);

        std::vector<FrameRef> pool;
        for (const FrameRef& c : refs) {
            if (c.video != q.video) pool.push_back(c);
        }
        if (config.retrieval_shortlist > 0 && pool.size() > static_cast<std::size_t>(config.retrieval_shortlist)) {
            std::vector<Neighbor> by_sig;
            for (const FrameRef& c : pool) by_sig.push_back(Neighbor{c, -signature_distance(qf, frame_of(collection, c))});
            std::sort(by_sig.begin(), by_sig.end(), neighbor_order);
            by_sig.resize(static_cast<std::size_t>(config.retrieval_shortlist));
            pool.clear();
            for (const Neighbor& n : by_sig) pool.push_back(n.frame);
        }

        std::vector<Neighbor> list;
        list.reserve(pool.size());
        for (const FrameRef& c : pool) {
            const double sim = phm_frame_similarity(qf, regions_of(q), saliency_of(q), frame_of(collection, c),
                                                    regions_of(c), saliency_of(c), config);
            list.push_back(Neighbor{c, sim});
        }
        std::sort(list.begin(), list.end(), neighbor_order);
        if (list.size() > static_cast<std::size_t>(config.k_neighbors)) {
            list.resize(static_cast<std::size_t>(config.k_neighbors));
        }
        lists[qi] = std::move(list);
    });

    NeighborGraph graph;
    for (std::size_t i = 0; i < refs.size(); ++i) graph.neighbors.emplace(refs[i], std::move(lists[i]));
    return graph;
}

Trellis build_video_trellis(const Collection& collection, std::size_t video_index, const NeighborGraph& graph,
                            const RegionMap& regions, const Config& config, VideoState* diagnostics) {
    const Video& video = collection.videos.at(video_index);
    const std::vector<int> kfs = key_frames(video, config.keyframe_stride);

    VideoState local;
    VideoState& state = diagnostics != nullptr ? *diagnostics : local;
    std::vector<std::vector<Candidate>> unary;
    for (int t : kfs) {
        const Frame& frame = video.frame(t);
        const RegionSet query = region_set(frame);

        std::vector<MatchScoreTable> tables;
        for (const Neighbor& n : graph.of(FrameRef{video_index, t})) {
            const Frame& nf = frame_of(collection, n.frame);
            auto it = regions.find(n.frame);
            const std::vector<Box> whole{nf.bounds()};
            const std::span<const Box> nregions =
                it == regions.end() ? std::span<const Box>(whole) : std::span<const Box>(it->second);
            const auto pool = contained_proposals(nf, nregions);
            if (pool.empty()) continue;
            tables.push_back(phm_match(query, region_set(nf, pool), config));
        }

        KeyFrameScores scores;
        scores.frame_index = t;
        scores.saliency = tables.empty() ? std::vector<double>(frame.proposals.size(), 0.0) : region_saliency(tables);
        scores.phi_a = standout_phi_a(frame, tables);
        const FrameTrackIndex tracks = FrameTrackIndex::build(video.tracks, t);
        scores.phi_m.reserve(frame.proposals.size());
        std::vector<Candidate> cands;
        for (std::size_t i = 0; i < frame.proposals.size(); ++i) {
            scores.phi_m.push_back(motion_coherence(frame.proposals[i].box, tracks));
            cands.push_back(Candidate{frame.proposals[i].id, scores.phi_a[i] + config.alpha * scores.phi_m[i]});
        }
        unary.push_back(std::move(cands));
        state.frames.push_back(std::move(scores));
    }

    auto scorer = [&](std::size_t t, std::span<const Candidate> from, std::span<const Candidate> to) {
        const Frame& ff = video.frame(kfs[t]);
        const Frame& tf = video.frame(kfs[t + 1]);
        std::vector<const Proposal*> a;
        std::vector<const Proposal*> b;
        for (const Candidate& c : from) a.push_back(ff.find_proposal(c.proposal_id));
        for (const Candidate& c : to) b.push_back(tf.find_proposal(c.proposal_id));
        TransitionScores s = transition_scores(a, kfs[t], b, kfs[t + 1], video.tracks, config.theta);
        std::vector<double> total = s.total;
        state.transitions.push_back(std::move(s));
        return total;
    };
    return build_trellis(kfs, std::move(unary), config.top_candidates, scorer);
}

VideoState relocalize_video(const Collection& collection, std::size_t video_index, const NeighborGraph& graph,
                            const RegionMap& regions, const Config& config, int p) {
    VideoState state;
    const Trellis trellis = build_video_trellis(collection, video_index, graph, regions, config, &state);
    const Video& video = collection.videos.at(video_index);
    for (const TubeSolution& sol : solve_p_best(trellis, p, config.lambda)) {
        state.tubes.push_back(to_tube(sol, video));
    }
    return state;
}

TubeSet tube_set(const Collection& collection, const IterationState& state) {
    TubeSet out;
    for (std::size_t v = 0; v < state.videos.size(); ++v) out[collection.videos[v].id] = state.videos[v].tubes;
    return out;
}

DiscoveryResult run_discovery(const Collection& collection, const Config& config, const IterationObserver& observer) {
    config.validate();
    validate_key_frames(collection, config.keyframe_stride);
    const int threads = detail::resolve_threads(config.threads);

    IterationState state = initialize(collection, config);
    DiscoveryResult result;
    for (int it = 1; it <= config.iterations; ++it) {
        NeighborGraph graph = update_network(state, collection, config);
        const RegionMap regions = state.localized_regions();
        const int p = it == config.iterations ? 1 : config.p_tubes;

        std::vector<VideoState> videos(collection.videos.size());
        detail::parallel_for(videos.size(), threads, [&](std::size_t v) {
            videos[v] = relocalize_video(collection, v, graph, regions, config, p);
        });

        state.iteration = it;
        state.videos = std::move(videos);
        state.graph = std::move(graph);
        result.snapshots.push_back(Snapshot{it, tube_set(collection, state), state.graph});
        if (observer) observer(state);
    }
    result.tubes = tube_set(collection, state);
    result.graph = state.graph;
    return result;
}

}  // namespace tubeloc
