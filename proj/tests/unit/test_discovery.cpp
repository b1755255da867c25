#include "test_support.hpp"

#include "tubeloc/discovery.hpp"
#include "tubeloc/error.hpp"
#include "tubeloc/evaluation.hpp"
#include "tubeloc/synth.hpp"

#include <doctest.h>

#include <algorithm>

using namespace tubeloc;
using tubeloc::testing::unit;

namespace {

SynthCollection small_synth() {
    SynthSpec spec;
    spec.videos_per_class = 3;
    spec.frames_per_video = 41;
    return generate_collection(spec);
}

Frame toy_frame(int index, std::vector<Proposal> proposals) {
    return Frame{index, 100, 100, std::move(proposals), unit(2, 0)};
}

}  // namespace

TEST_CASE("initialize") {
    const SynthCollection s = small_synth();
    Config config;
    const IterationState state = initialize(s.collection, config);
    CHECK(state.iteration == 0);
    REQUIRE(state.videos.size() == s.collection.videos.size());
    for (std::size_t v = 0; v < state.videos.size(); ++v) {
        REQUIRE(state.videos[v].tubes.size() == 1);
        const Tube& t = state.videos[v].tubes[0];
        CHECK(t.regions.size() == 3);
        for (const TubeRegion& r : t.regions) {
            CHECK(r.proposal_id == kWholeFrame);
            CHECK(r.box == Box{0, 0, 320, 240});
        }
    }

    Collection one;
    one.videos.push_back(Video{"x", 1, {toy_frame(0, {Proposal{0, Box{1, 1, 5, 5}, unit(2, 0)}})}, {}});
    CHECK(initialize(one, config).videos[0].tubes[0].regions.size() == 1);
    CHECK_THROWS_AS(initialize(Collection{}, config), ValidationError);
}

TEST_CASE("bootstrap_neighbors") {
    const SynthCollection s = small_synth();
    const NeighborGraph g = bootstrap_neighbors(s.collection, 100, 20);
    for (const auto& [q, list] : g.neighbors) {
        CHECK(list.size() == 15);  // 5 other videos x 3 key frames
        for (const Neighbor& n : list) CHECK(n.frame.video != q.video);
        CHECK(std::is_sorted(list.begin(), list.end(),
                             [](const Neighbor& a, const Neighbor& b) { return a.similarity > b.similarity; }));
    }

    Collection c = s.collection;
    c.videos[3].frames[1].signature = c.videos[0].frames[2].signature;
    const NeighborGraph g2 = bootstrap_neighbors(c, 3, 20);
    CHECK(g2.of(FrameRef{3, 20}).front().frame == FrameRef{0, 40});
    CHECK(g2.of(FrameRef{3, 20}).front().similarity == 0.0);
    CHECK(g2.of(FrameRef{3, 20}).size() == 3);
}

TEST_CASE("bootstrap ties order by video then frame") {
    Collection c;
    for (const char* id : {"a", "b", "c"}) {
        Video v{id, 41, {}, {}};
        for (int t : {0, 20, 40}) v.frames.push_back(toy_frame(t, {Proposal{0, Box{1, 1, 5, 5}, unit(2, 0)}}));
        c.videos.push_back(v);
    }
    const NeighborGraph g = bootstrap_neighbors(c, 4, 20);
    const auto& list = g.of(FrameRef{1, 0});
    REQUIRE(list.size() == 4);
    CHECK(list[0].frame == FrameRef{0, 0});
    CHECK(list[1].frame == FrameRef{0, 20});
    CHECK(list[2].frame == FrameRef{0, 40});
    CHECK(list[3].frame == FrameRef{2, 0});
}

TEST_CASE("phm_frame_similarity") {
    const Config config;
    const Box region{10, 10, 60, 60};
    const Frame query = toy_frame(0, {Proposal{0, Box{10, 10, 60, 60}, unit(4, 0)}, Proposal{1, Box{20, 20, 30, 30}, unit(4, 1)}});
    const Frame orthogonal =
        toy_frame(0, {Proposal{0, Box{10, 10, 60, 60}, unit(4, 2)}, Proposal{1, Box{20, 20, 30, 30}, unit(4, 3)}});
    const std::vector<Box> regions{region};
    const std::vector<double> sal{1.0, 0.5};
    const double same = phm_frame_similarity(query, regions, sal, query, regions, sal, config);
    const double other = phm_frame_similarity(query, regions, sal, orthogonal, regions, sal, config);
    CHECK(same > other);

    const std::vector<Box> elsewhere{Box{80, 80, 10, 10}};
    CHECK(phm_frame_similarity(query, regions, sal, query, elsewhere, sal, config) == 0.0);

    Frame padded = query;
    padded.proposals.push_back(Proposal{2, Box{75, 75, 20, 20}, unit(4, 0)});
    padded.proposals.push_back(Proposal{3, Box{0, 75, 20, 20}, unit(4, 1)});
    const std::vector<double> padded_sal{1.0, 0.5, 2.0, 2.0};
    CHECK(phm_frame_similarity(query, regions, sal, padded, regions, padded_sal, config) == same);
}

TEST_CASE("retrieval_subset caps by saliency") {
    const Frame f = toy_frame(0, {Proposal{0, Box{0, 0, 10, 10}, unit(2, 0)}, Proposal{1, Box{0, 0, 20, 20}, unit(2, 0)},
                                  Proposal{2, Box{0, 0, 30, 30}, unit(2, 0)}, Proposal{3, Box{60, 60, 30, 30}, unit(2, 0)}});
    const std::vector<Box> regions{Box{0, 0, 50, 50}};
    const std::vector<double> sal{0.1, 0.9, 0.5, 5.0};
    CHECK(retrieval_subset(f, regions, sal, 2) == std::vector<std::size_t>{1, 2});
    CHECK(retrieval_subset(f, regions, sal, 20) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("update_network after one relocalization retrieves same-class frames") {
    const SynthCollection s = small_synth();
    Config config;
    config.k_neighbors = 6;
    IterationState state = initialize(s.collection, config);
    state.graph = update_network(state, s.collection, config);
    const RegionMap regions = state.localized_regions();
    for (std::size_t v = 0; v < s.collection.videos.size(); ++v) {
        state.videos[v] = relocalize_video(s.collection, v, state.graph, regions, config, config.p_tubes);
    }
    state.iteration = 1;
    const NeighborGraph g = update_network(state, s.collection, config);
    CHECK(corret(g, video_labels(s.collection)).average == 100.0);

    config.k_neighbors = 1;
    for (const auto& [q, list] : update_network(state, s.collection, config).neighbors) CHECK(list.size() == 1);
}

TEST_CASE("planted proposal has the top appearance score under ideal neighbors") {
    const SynthCollection s = small_synth();
    Config config;
    RegionMap regions;
    NeighborGraph ideal;
    for (std::size_t v = 0; v < s.collection.videos.size(); ++v) {
        for (const TubeRegion& r : s.planted.videos[v].tube.regions) regions[FrameRef{v, r.frame_index}].push_back(r.box);
    }
    for (std::size_t v = 0; v < s.collection.videos.size(); ++v) {
        for (int t : {0, 20, 40}) {
            for (std::size_t u = 0; u < s.collection.videos.size(); ++u) {
                if (u != v && s.planted.videos[u].class_label == s.planted.videos[v].class_label) {
                    ideal.neighbors[FrameRef{v, t}].push_back(Neighbor{FrameRef{u, t}, 1.0});
                }
            }
        }
    }
    for (std::size_t v = 0; v < s.collection.videos.size(); ++v) {
        VideoState scores;
        build_video_trellis(s.collection, v, ideal, regions, config, &scores);
        for (std::size_t k = 0; k < scores.frames.size(); ++k) {
            const Frame& f = s.collection.videos[v].frames[k];
            const int planted = s.planted.videos[v].tube.regions[k].proposal_id;
            const auto& phi = scores.frames[k].phi_a;
            const auto best = static_cast<std::size_t>(std::max_element(phi.begin(), phi.end()) - phi.begin());
            CHECK(f.proposals[best].id == planted);
        }
    }
}

TEST_CASE("run_discovery: loop bound and thread independence") {
    const SynthCollection s = small_synth();
    Config config;
    config.iterations = 1;
    config.threads = 1;
    const DiscoveryResult one = run_discovery(s.collection, config);
    CHECK(one.snapshots.size() == 1);
    for (const auto& [id, tubes] : one.tubes) CHECK(tubes.size() == 1);

    config.iterations = 3;
    const DiscoveryResult serial = run_discovery(s.collection, config);
    config.threads = 4;
    const DiscoveryResult parallel = run_discovery(s.collection, config);
    CHECK(serial.tubes == parallel.tubes);
    CHECK(serial.graph == parallel.graph);
    CHECK(serial.snapshots.size() == 3);
    CHECK(serial.snapshots[1].tubes.begin()->second.size() == static_cast<std::size_t>(config.p_tubes));
    CHECK(corloc(serial.tubes, s.collection.ground_truth).average == 100.0);
}
