#include "tubeloc/motion.hpp"

#include <doctest.h>

#include <set>
#include <vector>

using namespace tubeloc;

namespace {

Track static_track(int id, int label, double x, double y) {
    return Track{id, label, 0, {Point2{x, y}, Point2{x, y}}};
}

/// n x n points of one cluster spread over `box`, corners included.
void add_grid(std::vector<Track>& tracks, const Box& box, int n, int label) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = box.x_min + box.width * i / (n - 1);
            const double y = box.y_min + box.height * j / (n - 1);
            tracks.push_back(static_track(static_cast<int>(tracks.size()), label, x, y));
        }
    }
}

}  // namespace

TEST_CASE("perimeter bins cover 16 distinct cells; edges share corners") {
    std::set<int> bins;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) {
            const int b = EdgeBinning::perimeter_bin(c, r);
            const bool border = r == 0 || r == 4 || c == 0 || c == 4;
            CHECK((b >= 0) == border);
            if (b >= 0) bins.insert(b);
        }
    CHECK(bins.size() == 16);
    const auto top = EdgeBinning::edge_bins(EdgeBinning::kTop);
    const auto left = EdgeBinning::edge_bins(EdgeBinning::kLeft);
    CHECK(top[0] == left[0]);
    CHECK(top[0] == EdgeBinning::perimeter_bin(0, 0));
}

TEST_CASE("cell_of clamps the far boundary") {
    const Box b{0, 0, 50, 50};
    CHECK(cell_of(b, 0, 0) == std::pair{0, 0});
    CHECK(cell_of(b, 50, 50) == std::pair{4, 4});
    CHECK(cell_of(b, 25, 9.99) == std::pair{2, 0});
}

TEST_CASE("edge_bin_labels") {
    const Box box{0, 0, 50, 50};
    SUBCASE("no tracks") {
        const auto idx = FrameTrackIndex::build({}, 0);
        for (const auto& l : edge_bin_labels(box, idx).labels) CHECK_FALSE(l.has_value());
    }
    SUBCASE("unanimous cluster") {
        std::vector<Track> tracks;
        add_grid(tracks, box, 9, 2);
        const auto labels = edge_bin_labels(box, FrameTrackIndex::build(tracks, 0)).labels;
        for (const auto& l : labels) {
            REQUIRE(l.has_value());
            CHECK(*l == 2);
        }
    }
    SUBCASE("majority and tie") {
        std::vector<Track> tracks{static_track(0, 1, 2, 2), static_track(1, 1, 3, 3), static_track(2, 3, 4, 4),
                                  static_track(3, 5, 48, 2), static_track(4, 4, 47, 3)};
        const auto labels = edge_bin_labels(box, FrameTrackIndex::build(tracks, 0)).labels;
        CHECK(*labels[EdgeBinning::perimeter_bin(0, 0)] == 1);
        CHECK(*labels[EdgeBinning::perimeter_bin(4, 0)] == 4);
        CHECK_FALSE(labels[EdgeBinning::perimeter_bin(2, 0)].has_value());
    }
    SUBCASE("dead tracks are ignored") {
        std::vector<Track> tracks{Track{0, 1, 5, {Point2{2, 2}, Point2{2, 2}}}};
        const auto labels = edge_bin_labels(box, FrameTrackIndex::build(tracks, 0)).labels;
        CHECK_FALSE(labels[EdgeBinning::perimeter_bin(0, 0)].has_value());
    }
}

TEST_CASE("cluster_weight") {
    std::vector<Track> tracks;
    for (int i = 0; i < 10; ++i) tracks.push_back(static_track(i, 3, i < 5 ? 10.0 : 90.0, 10.0));
    const auto idx = FrameTrackIndex::build(tracks, 0);
    CHECK(cluster_weight(3, Box{0, 0, 100, 20}, idx) == 1.0);
    CHECK(cluster_weight(3, Box{0, 0, 50, 20}, idx) == 0.5);
    CHECK(cluster_weight(3, Box{0, 50, 50, 20}, idx) == 0.0);
    CHECK(cluster_weight(7, Box{0, 0, 100, 20}, idx) == 0.0);
}

TEST_CASE("motion_coherence") {
    const Box box{10, 10, 40, 40};
    SUBCASE("tight box around one cluster") {
        std::vector<Track> tracks;
        add_grid(tracks, box, 9, 1);
        CHECK(motion_coherence(box, FrameTrackIndex::build(tracks, 0)) == 4.0);
    }
    SUBCASE("no tracks on the perimeter") {
        std::vector<Track> tracks{static_track(0, 1, 30, 30), static_track(1, 1, 200, 200)};
        CHECK(motion_coherence(box, FrameTrackIndex::build(tracks, 0)) == 0.0);
    }
    SUBCASE("half of the cluster inside") {
        std::vector<Track> tracks;
        add_grid(tracks, box, 9, 1);
        add_grid(tracks, Box{100, 100, 40, 40}, 9, 1);
        CHECK(motion_coherence(box, FrameTrackIndex::build(tracks, 0)) == 2.0);
    }
    SUBCASE("range") {
        std::vector<Track> tracks;
        add_grid(tracks, Box{0, 0, 60, 60}, 13, 1);
        add_grid(tracks, Box{20, 20, 60, 60}, 11, 2);
        const auto idx = FrameTrackIndex::build(tracks, 0);
        for (double x = 0; x < 60; x += 7)
            for (double w = 5; w < 70; w += 9) {
                const double m = motion_coherence(Box{x, x / 2, w, w}, idx);
                CHECK(m >= 0.0);
                CHECK(m <= 4.0);
            }
    }
}
