#include "test_support.hpp"

#include "tubeloc/appearance.hpp"
#include "tubeloc/error.hpp"
#include "tubeloc/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace tubeloc;
using tubeloc::testing::random_region_set;
using tubeloc::testing::unit;

namespace {

double relative_error(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("appearance_affinity") {
    const Descriptor a = unit(4, 0);
    const Descriptor b = unit(4, 1);
    CHECK(appearance_affinity(a, a, 1.0) == 1.0);
    CHECK(appearance_affinity(a, b, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(appearance_affinity(a, b, 0.0) == 1.0);
    CHECK_THROWS_AS(appearance_affinity(a, unit(3, 0), 1.0), ValidationError);
}

TEST_CASE("geometry_likelihood") {
    const HoughParams p;
    const Offset c{0.0625, -0.0625, 0.0};
    CHECK(geometry_likelihood(c, c, p) == 1.0);
    const Offset one_bw{c.du + p.translation_bin_width(), c.dv, c.ds};
    CHECK(geometry_likelihood(one_bw, c, p) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    const Offset one_bw_s{c.du, c.dv, c.ds + p.scale_bin_width()};
    CHECK(geometry_likelihood(one_bw_s, c, p) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(geometry_likelihood(Offset{5.0, 5.0, 5.0}, c, p) < 1e-8);
}

TEST_CASE("location_of") {
    const Location l = location_of(Box{0, 0, 50, 40}, 100, 80);
    CHECK(l.u == doctest::Approx(0.25));
    CHECK(l.v == doctest::Approx(0.25));
    CHECK(l.s == doctest::Approx(0.5 * std::log(0.25)));
}

TEST_CASE("hough_vote peaks at the zero-offset bins") {
    const Box b{100, 60, 80, 60};
    RegionSet q{320, 240, {Proposal{0, b, unit(3, 0)}}};
    const HoughGrid grid = hough_vote(q, q, Config{});
    double best = 0.0;
    int bu = -1, bv = -1, bs = -1;
    for (int iu = 0; iu < grid.translation_bins(); ++iu)
        for (int iv = 0; iv < grid.translation_bins(); ++iv)
            for (int is = 0; is < grid.scale_bins(); ++is)
                if (grid.at(iu, iv, is) > best) {
                    best = grid.at(iu, iv, is);
                    bu = iu, bv = iv, bs = is;
                }
    // 16 translation bins leave 0 on a bin boundary: the peak is one of the
    // four bins touching it, all tied.
    CHECK((bu == 7 || bu == 8));
    CHECK((bv == 7 || bv == 8));
    CHECK(bs == 3);
    CHECK(grid.at(7, 7, 3) == doctest::Approx(grid.at(8, 8, 3)).epsilon(1e-12));
}

TEST_CASE("zero affinity produces an empty grid and zero confidence") {
    Config config;
    config.affinity_gamma = 1e6;
    RegionSet q{320, 240, {Proposal{0, Box{0, 0, 50, 50}, unit(2, 0)}}};
    RegionSet c{320, 240, {Proposal{0, Box{10, 10, 50, 50}, unit(2, 1)}}};
    const HoughGrid grid = hough_vote(q, c, config);
    for (double v : grid.votes()) CHECK(v == 0.0);
    CHECK(phm_match(q, c, config)(0, 0) == 0.0);
}

TEST_CASE("single pair closed form") {
    Config config;
    std::mt19937_64 rng(3);
    const RegionSet q = random_region_set(rng, 1, 8);
    const RegionSet c = random_region_set(rng, 1, 8);
    const double pa = appearance_affinity(q.proposals[0].descriptor, c.proposals[0].descriptor, 1.0);
    const HoughGrid grid = hough_vote(q, c, config);
    const Offset o = offset_between(location_of(q.proposals[0].box, 320, 240), location_of(c.proposals[0].box, 320, 240));
    double sum_sq = 0.0;
    for (int iu = 0; iu < grid.translation_bins(); ++iu)
        for (int iv = 0; iv < grid.translation_bins(); ++iv)
            for (int is = 0; is < grid.scale_bins(); ++is) {
                const double g = geometry_likelihood(o, grid.center(iu, iv, is), config.hough);
                sum_sq += g * g;
            }
    const double expected = pa * pa * sum_sq;
    CHECK(relative_error(match_confidence(q, c, grid, config)(0, 0), expected) < 1e-12);
    CHECK(relative_error(brute_force_phm(q, c, config).second(0, 0), expected) < 1e-12);
}

TEST_CASE("2x2 toy instance matches the naive oracle") {
    Config config;
    std::mt19937_64 rng(11);
    const RegionSet q = random_region_set(rng, 2, 6);
    const RegionSet c = random_region_set(rng, 2, 6);
    const auto [oracle_grid, oracle_table] = brute_force_phm(q, c, config);
    const HoughGrid grid = hough_vote(q, c, config);
    for (std::size_t i = 0; i < grid.bin_count(); ++i) {
        CHECK(relative_error(grid.votes()[i], oracle_grid.votes()[i]) < 1e-12);
    }
    const MatchScoreTable table = match_confidence(q, c, grid, config);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t k = 0; k < 2; ++k) CHECK(relative_error(table(r, k), oracle_table(r, k)) < 1e-12);
}

TEST_CASE("identical frames: self-match maximizes each row") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const RegionSet q = random_region_set(rng, 8, 16);
        const MatchScoreTable table = phm_match(q, q, Config{});
        for (std::size_t r = 0; r < table.rows(); ++r) {
            CHECK(table(r, r) == table.row_max(r));
        }
    }
}

TEST_CASE("brute_force_phm guard") {
    std::mt19937_64 rng(1);
    const RegionSet big = random_region_set(rng, 101, 2);
    CHECK_THROWS_AS(brute_force_phm(big, big, Config{}), ValidationError);
    CHECK_THROWS_AS(hough_vote(RegionSet{320, 240, {}}, big, Config{}), ValidationError);
}

TEST_CASE("region_saliency") {
    MatchScoreTable t(2, 3);
    t(0, 0) = 0.1, t(0, 1) = 0.7, t(0, 2) = 0.3;
    t(1, 0) = 0.2, t(1, 1) = 0.0, t(1, 2) = 0.4;
    const std::vector<MatchScoreTable> one{t};
    CHECK(region_saliency(one) == std::vector<double>{0.7, 0.4});
    const std::vector<MatchScoreTable> two{t, t};
    CHECK(region_saliency(two) == std::vector<double>{1.4, 0.8});

    MatchScoreTable single(1, 1);
    single(0, 0) = 0.3;
    CHECK(region_saliency(std::vector<MatchScoreTable>{single}) == std::vector<double>{0.3});
    CHECK_THROWS_AS(region_saliency(std::vector<MatchScoreTable>{}), ValidationError);
}

TEST_CASE("region_saliency equals max-then-sum over three neighbors") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<MatchScoreTable> tables;
    for (std::size_t cols : {2u, 4u, 3u}) {
        MatchScoreTable t(5, cols);
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t c = 0; c < cols; ++c) t(r, c) = u(rng);
        tables.push_back(t);
    }
    const auto g = region_saliency(tables);
    for (std::size_t r = 0; r < 5; ++r) {
        double expected = 0.0;
        for (const auto& t : tables) {
            double m = -1.0;
            for (std::size_t c = 0; c < t.cols(); ++c) m = std::max(m, t(r, c));
            expected += m;
        }
        CHECK(g[r] == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("strictly_contains") {
    const Box outer{0, 0, 100, 100};
    CHECK(strictly_contains(outer, Box{10, 10, 20, 20}));
    CHECK_FALSE(strictly_contains(outer, outer));
    CHECK_FALSE(strictly_contains(Box{10, 10, 20, 20}, outer));
    CHECK_FALSE(strictly_contains(outer, Box{90, 90, 20, 20}));
}

TEST_CASE("standout scores") {
    const std::vector<Box> boxes{Box{0, 0, 100, 100}, Box{10, 10, 20, 20}, Box{200, 200, 10, 10}};
    SUBCASE("no container means s = g") {
        const std::vector<double> g{0.5, 0.2, 0.9};
        const auto s = standout_scores(boxes, g);
        CHECK(s[0] == 0.5);
        CHECK(s[2] == 0.9);
        CHECK(s[1] == doctest::Approx(0.2 - 0.5));
    }
    SUBCASE("container more salient gives negative raw score") {
        const std::vector<double> g{0.8, 0.3, 0.1};
        CHECK(standout_scores(boxes, g)[1] < 0.0);
    }
}

TEST_CASE("rescale_unit") {
    CHECK(rescale_unit(std::vector<double>{-2, -1, 0}) == std::vector<double>{0, 0.5, 1});
    CHECK(rescale_unit(std::vector<double>{3, 3, 3}) == std::vector<double>{0, 0, 0});
    CHECK(rescale_unit(std::vector<double>{}).empty());
}

TEST_CASE("standout_phi_a: equal saliency gives all zeros") {
    Frame f{0, 320, 240, {Proposal{0, Box{0, 0, 10, 10}, unit(2, 0)}, Proposal{1, Box{50, 50, 10, 10}, unit(2, 1)}}, unit(2, 0)};
    MatchScoreTable t(2, 1);
    t(0, 0) = 0.4;
    t(1, 0) = 0.4;
    const auto phi = standout_phi_a(f, std::vector<MatchScoreTable>{t});
    CHECK(phi == std::vector<double>{0.0, 0.0});
    CHECK(standout_phi_a(f, std::vector<MatchScoreTable>{}) == std::vector<double>{0.0, 0.0});
}
