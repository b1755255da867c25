#include "test_support.hpp"

#include "tubeloc/consistency.hpp"

#include <doctest.h>

#include <random>

using namespace tubeloc;
using tubeloc::testing::random_unit;
using tubeloc::testing::unit;

TEST_CASE("tau") {
    const Box b{10, 20, 40, 80};
    const auto corner = tau(Point2{10, 20}, b);
    CHECK(corner.u == 0.0);
    CHECK(corner.v == 0.0);
    const auto center = tau(Point2{30, 60}, b);
    CHECK(center.u == 0.5);
    CHECK(center.v == 0.5);
    const auto far = tau(Point2{50, 100}, b);
    CHECK(far.u == 1.0);
    CHECK(far.v == 1.0);
}

TEST_CASE("psi_appearance") {
    CHECK(psi_appearance_raw(unit(3, 0), unit(3, 0)) == 0.0);
    CHECK(psi_appearance_raw(unit(3, 0), unit(3, 1)) == doctest::Approx(-std::sqrt(2.0)));
    CHECK(psi_appearance(std::vector<double>{-2, -1, 0}) == std::vector<double>{0, 0.5, 1});
    CHECK(psi_appearance(std::vector<double>{-1, -1}) == std::vector<double>{0, 0});
    const std::vector<double> raw{psi_appearance_raw(unit(3, 0), unit(3, 0)), psi_appearance_raw(unit(3, 0), unit(3, 1))};
    CHECK(psi_appearance(raw)[0] == 1.0);
}

TEST_CASE("psi_motion") {
    const Box b{0, 0, 10, 10};
    SUBCASE("identical boxes, static shared tracks") {
        std::vector<Track> tracks{Track{0, 1, 0, {Point2{2, 3}, Point2{2, 3}}}, Track{1, 1, 0, {Point2{7, 7}, Point2{7, 7}}}};
        CHECK(psi_motion(b, 0, b, 1, tracks, -2.0) == 0.0);
    }
    SUBCASE("no shared tracks") {
        std::vector<Track> tracks{Track{0, 1, 0, {Point2{50, 50}, Point2{2, 2}}}};
        CHECK(psi_motion(b, 0, b, 1, tracks, -2.0) == -2.0);
        CHECK(psi_motion(b, 0, b, 1, std::vector<Track>{}, -2.0) == -2.0);
    }
    SUBCASE("opposite corners") {
        std::vector<Track> tracks{Track{0, 1, 0, {Point2{0, 0}, Point2{10, 10}}}};
        CHECK(psi_motion(b, 0, b, 1, tracks, -2.0) == -1.0);
    }
    SUBCASE("track must be alive at both frames") {
        std::vector<Track> tracks{Track{0, 1, 1, {Point2{5, 5}, Point2{5, 5}}}};
        CHECK(shared_tracks(tracks, b, 0, b, 1).empty());
        CHECK(shared_tracks(tracks, b, 1, b, 2).size() == 1);
    }
}

TEST_CASE("psi_total") {
    CHECK(psi_total(1.0, 0.0) == 1.0);
    CHECK(psi_total(0.0, -2.0) == -2.0);
    CHECK(psi_total(0.5, -1.0) == -0.5);
}

TEST_CASE("transition_scores ranges") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> pos(0.0, 90.0);
    std::vector<Proposal> from, to;
    for (int i = 0; i < 6; ++i) {
        from.push_back(Proposal{i, tubeloc::testing::random_box(rng, 100, 100), random_unit(rng, 5)});
        to.push_back(Proposal{i, tubeloc::testing::random_box(rng, 100, 100), random_unit(rng, 5)});
    }
    std::vector<Track> tracks;
    for (int i = 0; i < 40; ++i) tracks.push_back(Track{i, 0, 0, {Point2{pos(rng), pos(rng)}, Point2{pos(rng), pos(rng)}}});
    std::vector<const Proposal*> pf, pt;
    for (auto& p : from) pf.push_back(&p);
    for (auto& p : to) pt.push_back(&p);
    const TransitionScores s = transition_scores(pf, 0, pt, 1, tracks, -2.0);
    REQUIRE(s.total.size() == 36);
    double lo = 1.0, hi = 0.0;
    for (std::size_t i = 0; i < 36; ++i) {
        CHECK(s.psi_a[i] >= 0.0);
        CHECK(s.psi_a[i] <= 1.0);
        lo = std::min(lo, s.psi_a[i]);
        hi = std::max(hi, s.psi_a[i]);
        CHECK((s.psi_m[i] == -2.0 || (s.psi_m[i] >= -1.0 && s.psi_m[i] <= 0.0)));
        CHECK(s.total[i] == s.psi_a[i] + s.psi_m[i]);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
}
