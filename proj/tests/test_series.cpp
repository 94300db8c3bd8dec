#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "orbital/series.hpp"
#include "orbital/verify.hpp"
#include "test_support.hpp"

using namespace orbital;

namespace {

CondensationSystem exercise_system(double p) {
    return make_exercise_system(p, DiscreteMeasure::point_mass(0.0));
}

CondensationSystem two_map_system(double p) {
    return CondensationSystem(
        Ifs({MapSpec(Affine1D{0.5, 0.0}), MapSpec(Affine1D{0.5, 0.5})}, {0.5, 0.5}),
        DiscreteMeasure::point_mass(0.0), p);
}

double route_distance(const CondensationSystem& sys, const DiscreteMeasure& a,
                      const DiscreteMeasure& b) {
    return sys.dim() == 1 ? wasserstein1_1d(a, b)
                          : sliced_w1_2d(a, b, evenly_spaced_directions(16));
}

}  // namespace

TEST_CASE("tail_mass is the geometric remainder") {
    CHECK(tail_mass(0.0, 0) == 0.0);
    CHECK(tail_mass(0.5, 3) == 0.0625);

    // Oracle: 1 - sum_{n<=10} 0.3 * 0.7^n, accumulated directly.
    double captured = 0.0;
    double term = 0.3;
    for (int n = 0; n <= 10; ++n) {
        captured += term;
        term *= 0.7;
    }
    CHECK(tail_mass(0.7, 10) == Catch::Approx(1.0 - captured).margin(1e-15));

    CHECK_THROWS_AS(tail_mass(1.0, 3), InvalidQ);
    CHECK_THROWS_AS(tail_mass(-0.1, 3), InvalidQ);
}

TEST_CASE("depth_for_tolerance inverts the tail") {
    CHECK(depth_for_tolerance(0.0, 0.1) == 0);
    CHECK(depth_for_tolerance(0.5, 0.0625) == 3);

    // Oracle: scan depths until the tail drops under epsilon.
    int expect = 0;
    while (std::pow(0.9, expect + 1) > 1e-6) ++expect;
    CHECK(expect == 131);
    CHECK(depth_for_tolerance(0.9, 1e-6) == expect);

    for (double q : {0.1, 0.5, 0.77, 0.99}) {
        for (double eps : {0.25, 1e-3, 1e-9}) {
            const int m = depth_for_tolerance(q, eps);
            CHECK(tail_mass(q, m) <= eps);
            if (m > 0) CHECK(tail_mass(q, m - 1) > eps);
        }
    }

    CHECK_THROWS_AS(depth_for_tolerance(0.5, 0.0), InvalidTolerance);
    CHECK_THROWS_AS(depth_for_tolerance(1.0, 0.5), InvalidQ);
}

TEST_CASE("enumerate_series on the half-shift system") {
    const auto degenerate = enumerate_series(exercise_system(1.0), 5);
    CHECK(degenerate.measure == DiscreteMeasure::point_mass(0.0));
    CHECK(degenerate.tail_bound == 0.0);

    // Depth 3: raw weights 1/2, 1/4, 1/8, 1/16 at 0, 1/2, 3/4, 7/8 (hand
    // geometric sum), captured mass 15/16, then renormalized proportionally.
    const auto trunc = enumerate_series(exercise_system(0.5), 3);
    CHECK(trunc.raw_mass == Catch::Approx(15.0 / 16.0).margin(1e-15));
    CHECK(trunc.tail_bound == 0.0625);
    CHECK(trunc.pruned_mass == 0.0);
    REQUIRE(trunc.measure.size() == 4);
    const std::vector<double> positions{0.0, 0.5, 0.75, 0.875};
    const std::vector<double> raw{0.5, 0.25, 0.125, 0.0625};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(trunc.measure.atom(i).x == positions[i]);
        CHECK(trunc.measure.weight(i) == Catch::Approx(raw[i] / (15.0 / 16.0)).margin(1e-15));
    }
}

TEST_CASE("enumerate_series on a two-map system") {
    // Depth 1 by hand: (1/2) d0 + (1/8) d0 + (1/8) d1/2, captured 3/4.
    const auto trunc = enumerate_series(two_map_system(0.5), 1);
    CHECK(trunc.raw_mass == Catch::Approx(0.75).margin(1e-15));
    CHECK(trunc.tail_bound == 0.25);
    REQUIRE(trunc.measure.size() == 2);
    CHECK(trunc.measure.atom(0).x == 0.0);
    CHECK(trunc.measure.weight(0) == Catch::Approx((5.0 / 8.0) / 0.75).margin(1e-15));
    CHECK(trunc.measure.atom(1).x == 0.5);
    CHECK(trunc.measure.weight(1) == Catch::Approx((1.0 / 8.0) / 0.75).margin(1e-15));
}

TEST_CASE("neumann_iterate degenerate cases") {
    CHECK(neumann_iterate(exercise_system(1.0), 5).measure == DiscreteMeasure::point_mass(0.0));

    const auto zeroth = neumann_iterate(exercise_system(0.5), 0);
    CHECK(zeroth.measure == DiscreteMeasure::point_mass(0.0));
    CHECK(zeroth.raw_mass == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("both routes and the oracle agree") {
    testsupport::Rng rng(55);
    for (int trial = 0; trial < 25; ++trial) {
        const auto sys = testsupport::random_dyadic_system(
            rng, 1 + trial % 3, testsupport::uniform(rng, 0.15, 0.9));
        const int depth = 2 + trial % 7;  // up to 8
        const auto via_enum = enumerate_series(sys, depth);
        const auto via_iter = neumann_iterate(sys, depth);
        const auto via_oracle = testsupport::oracle_series(sys, depth);

        CHECK(route_distance(sys, via_enum.measure, via_iter.measure) <= 1e-10);
        CHECK(route_distance(sys, via_enum.measure, via_oracle) <= 1e-10);
        CHECK(std::abs(via_enum.raw_mass - via_iter.raw_mass) <= 1e-12);
    }
}

TEST_CASE("captured mass equals one minus the tail") {
    for (double p : {0.01, 0.3, 0.5, 0.9}) {
        const auto sys = exercise_system(p);
        for (int depth = 0; depth <= 30; ++depth) {
            const double expected = 1.0 - tail_mass(sys.q(), depth);
            CHECK(std::abs(enumerate_series(sys, depth).raw_mass - expected) <= 1e-12);
            CHECK(std::abs(neumann_iterate(sys, depth).raw_mass - expected) <= 1e-12);
        }
    }
}

TEST_CASE("raw mass grows strictly with depth") {
    const auto sys = two_map_system(0.3);
    double prev = -1.0;
    for (int depth = 0; depth <= 10; ++depth) {
        const double raw = enumerate_series(sys, depth).raw_mass;
        CHECK(raw > prev);
        prev = raw;
    }
}

TEST_CASE("one fixed-point step contracts the truncation tail") {
    testsupport::Rng rng(56);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = testsupport::random_dyadic_system(rng, 2, 0.5);
        for (int depth : {2, 4, 6}) {
            const auto coarse = enumerate_series(sys, depth);
            const auto fine = enumerate_series(sys, depth + 1);
            const auto stepped = condensation_step(sys, coarse.measure);
            // Support lives in [0, 1], so the diameter bound is 1.
            CHECK(wasserstein1_1d(fine.measure, stepped) <=
                  2.0 * tail_mass(sys.q(), depth) * 1.0);
        }
    }
}

TEST_CASE("subtree pruning accounts for the skipped mass") {
    const auto sys = two_map_system(0.5);
    const auto pruned = enumerate_series(sys, 16, 1e-4);
    CHECK(pruned.pruned_mass > 0.0);
    CHECK(std::abs(pruned.raw_mass + pruned.pruned_mass + pruned.tail_bound - 1.0) <= 1e-10);

    const auto exact = enumerate_series(sys, 16);
    CHECK(wasserstein1_1d(pruned.measure, exact.measure) <= 2.0 * pruned.pruned_mass + 1e-12);
}

TEST_CASE("term budget guards the address blowup") {
    const auto sys = two_map_system(0.5);
    CHECK_THROWS_AS(enumerate_series(sys, 30, 0.0, 1000), DepthOverflow);
    CHECK_THROWS_AS(neumann_iterate(sys, 30, 0.0, 1000), DepthOverflow);
    CHECK_NOTHROW(enumerate_series(sys, 30, 1e-4, 1000));
}
