#include "tubeloc/error.hpp"
#include "tubeloc/evaluation.hpp"

#include <doctest.h>

#include <random>

using namespace tubeloc;

namespace {

TubeSet one_box(const std::string& id, const Box& b) {
    TubeSet s;
    s[id].push_back(Tube{id, {TubeRegion{0, 0, b}}, 0.0});
    return s;
}

std::vector<Neighbor> neighbors(std::initializer_list<std::size_t> videos, double sim = 1.0) {
    std::vector<Neighbor> out;
    for (std::size_t v : videos) out.push_back(Neighbor{FrameRef{v, 0}, sim});
    return out;
}

}  // namespace

TEST_CASE("iou") {
    CHECK(iou(Box{0, 0, 10, 10}, Box{0, 0, 10, 10}) == 1.0);
    CHECK(iou(Box{0, 0, 10, 10}, Box{20, 20, 10, 10}) == 0.0);
    CHECK(iou(Box{0, 0, 10, 10}, Box{5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(iou(Box{0, 0, 10, 10}, Box{10, 0, 10, 10}) == 0.0);
}

TEST_CASE("corloc") {
    const std::vector<GroundTruth> gt{GroundTruth{"a", 0, Box{0, 0, 10, 10}, "cat"}};
    CHECK(corloc(one_box("a", Box{0, 0, 10, 10}), gt).average == 100.0);
    // IoU exactly 0.5: (0,0,10,10) vs (0,0,10,20) -> 100/200.
    CHECK(iou(Box{0, 0, 10, 10}, Box{0, 0, 10, 20}) == 0.5);
    CHECK(corloc(one_box("a", Box{0, 0, 10, 20}), gt).average == 0.0);

    TubeSet both = one_box("a", Box{0, 0, 10, 10});
    both["b"].push_back(Tube{"b", {TubeRegion{0, 0, Box{50, 50, 5, 5}}}, 0.0});
    const std::vector<GroundTruth> two{GroundTruth{"a", 0, Box{0, 0, 10, 10}, "cat"},
                                       GroundTruth{"b", 0, Box{0, 0, 10, 10}, "dog"}};
    const ClassScores s = corloc(both, two);
    CHECK(s.per_class.at("cat") == 100.0);
    CHECK(s.per_class.at("dog") == 0.0);
    CHECK(s.average == 50.0);

    CHECK_THROWS_AS(corloc(TubeSet{}, gt), ValidationError);
}

TEST_CASE("corloc interpolates between key frames") {
    TubeSet s;
    s["a"].push_back(Tube{"a", {TubeRegion{0, 0, Box{0, 0, 10, 10}}, TubeRegion{20, 0, Box{20, 0, 10, 10}}}, 0.0});
    CHECK(corloc(s, std::vector<GroundTruth>{GroundTruth{"a", 10, Box{10, 0, 10, 10}, "x"}}).average == 100.0);
    CHECK(corloc(s, std::vector<GroundTruth>{GroundTruth{"a", 10, Box{0, 0, 10, 10}, "x"}}).average == 0.0);
}

TEST_CASE("corret") {
    const VideoLabels labels{"x", "x", "y", "y", "y"};
    NeighborGraph g;
    g.neighbors[FrameRef{0, 0}] = neighbors({1, 1});
    CHECK(corret(g, labels).average == 100.0);

    NeighborGraph forty;
    forty.neighbors[FrameRef{0, 0}] = neighbors({1, 1, 1, 1, 2, 2, 2, 2, 2, 2});
    forty.neighbors[FrameRef{0, 20}] = neighbors({1, 1, 1, 1, 3, 3, 3, 3, 3, 3});
    CHECK(corret(forty, labels).average == doctest::Approx(40.0));
}

TEST_CASE("topk_error") {
    const VideoLabels labels{"x", "x", "y", "y", "z"};
    NeighborGraph g;
    g.neighbors[FrameRef{0, 0}] = neighbors({1, 1, 1});
    CHECK(topk_error(g, labels, 1).average == 0.0);

    NeighborGraph second;
    second.neighbors[FrameRef{0, 0}] = neighbors({2, 2, 1});
    CHECK(topk_error(second, labels, 1).average == 100.0);
    CHECK(topk_error(second, labels, 2).average == 0.0);

    NeighborGraph tied;
    tied.neighbors[FrameRef{0, 0}] = {Neighbor{FrameRef{1, 0}, 0.9}, Neighbor{FrameRef{2, 0}, 0.1}};
    CHECK(topk_error(tied, labels, 1).average == 0.0);
    NeighborGraph tied_lost;
    tied_lost.neighbors[FrameRef{0, 0}] = {Neighbor{FrameRef{1, 0}, 0.1}, Neighbor{FrameRef{2, 0}, 0.9}};
    CHECK(topk_error(tied_lost, labels, 1).average == 100.0);
}

TEST_CASE("confusion matrix") {
    const VideoLabels labels{"x", "x", "y", "y", std::nullopt};
    NeighborGraph g;
    g.neighbors[FrameRef{0, 0}] = neighbors({1, 2, 2, 4});
    g.neighbors[FrameRef{2, 0}] = neighbors({3, 3, 0, 1});
    const ConfusionMatrix m = confusion_matrix(g, labels);
    CHECK(m.row_labels == std::vector<std::string>{"x", "y"});
    CHECK(m.col_labels == std::vector<std::string>{"x", "y", "?"});
    CHECK(m.values[0] == std::vector<double>{25.0, 50.0, 25.0});
    CHECK(m.values[1] == std::vector<double>{50.0, 50.0, 0.0});
    const ClassScores cr = corret(g, labels);
    CHECK(m.values[0][0] == cr.per_class.at("x"));
    CHECK(m.values[1][1] == cr.per_class.at("y"));
}

TEST_CASE("randomized graphs: top-2 <= top-1 and diagonal equals CorRet") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::size_t> vid(0, 11);
    std::uniform_real_distribution<double> sim(-1.0, 1.0);
    VideoLabels labels;
    for (int i = 0; i < 12; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i % 4)));
    for (int trial = 0; trial < 50; ++trial) {
        NeighborGraph g;
        for (std::size_t v = 0; v < 12; ++v) {
            for (int t : {0, 20, 40}) {
                auto& list = g.neighbors[FrameRef{v, t}];
                for (int k = 0; k < 6; ++k) {
                    std::size_t u = vid(rng);
                    if (u == v) u = (u + 1) % 12;
                    list.push_back(Neighbor{FrameRef{u, 0}, sim(rng)});
                }
            }
        }
        CHECK(topk_error(g, labels, 2).average <= topk_error(g, labels, 1).average);
        const ConfusionMatrix m = confusion_matrix(g, labels);
        const ClassScores cr = corret(g, labels);
        for (std::size_t r = 0; r < m.row_labels.size(); ++r) {
            CHECK(m.values[r][r] == doctest::Approx(cr.per_class.at(m.row_labels[r])).epsilon(1e-12));
        }
    }
}

TEST_CASE("report rendering") {
    EvalReport r;
    r.corloc.per_class = {{"cat", 100.0}};
    r.corloc.average = 100.0;
    CHECK(report_to_jsonl(r).find("\"record\":\"corloc\"") != std::string::npos);
    CHECK(report_to_table(r).find("100.0") != std::string::npos);
}
