#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "orbital/sampler.hpp"
#include "orbital/series.hpp"
#include "orbital/verify.hpp"
#include "test_support.hpp"

using namespace orbital;

namespace {

CondensationSystem exercise_system(double p) {
    return make_exercise_system(p, DiscreteMeasure::point_mass(0.0));
}

}  // namespace

TEST_CASE("sample_mu0 draws from each spec kind") {
    RngStream rng(1, 0, 0);
    CHECK(sample_mu0(Mu0Spec::point(0.0), rng).x == 0.0);
    CHECK(sample_mu0(Mu0Spec(DiscreteMeasure::point_mass(0.0)), rng).x == 0.0);

    const Mu0Spec uniform{UniformInterval{0.0, 0.5}};
    double sum = 0.0;
    const int n = 1'000'000;
    RngStream stream(9, 0, 0);
    for (int i = 0; i < n; ++i) {
        const double x = sample_mu0(uniform, stream).x;
        REQUIRE(x >= 0.0);
        REQUIRE(x < 0.5);
        sum += x;
    }
    // Mean 1/4, sigma of the mean = (0.5/sqrt(12))/1000.
    CHECK(sum / n == Catch::Approx(0.25).margin(3.0 * 0.5 / std::sqrt(12.0) / 1000.0));

    CHECK_THROWS_AS(Mu0Spec(UniformInterval{0.5, 0.5}), DegenerateSpec);
    CHECK_THROWS_AS(Mu0Spec(UniformBox{{0.0, 1.0}, {1.0, 1.0}}), DegenerateSpec);
}

TEST_CASE("inverse-cdf atom selection breaks ties low and skips zero weights") {
    const DiscreteMeasure atoms(1, {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}, {0.5, 0.0, 0.5});
    const Mu0Spec spec(atoms);
    std::set<double> seen;
    RngStream rng(3, 0, 0);
    for (int i = 0; i < 2000; ++i) seen.insert(sample_mu0(spec, rng).x);
    CHECK(seen == std::set<double>{0.0, 2.0});
}

TEST_CASE("mu0_to_measure discretizes deterministically") {
    const auto grid = mu0_to_measure(Mu0Spec{UniformInterval{0.0, 0.5}}, 1, 64);
    CHECK(grid.size() == 64);
    CHECK(grid.atom(0).x == 0.5 * (0.5 / 64.0));
    CHECK(grid.max_coord(0) < 0.5);

    const auto box = mu0_to_measure(Mu0Spec{UniformBox{{0.0, 0.0}, {1.0, 1.0}}}, 2, 8);
    CHECK(box.size() == 64);

    CHECK_THROWS_AS(mu0_to_measure(Mu0Spec{UniformInterval{0.0, 0.5}}, 2), DimensionMismatch);
}

TEST_CASE("geometric_draw realizes the length law") {
    CHECK(geometric_draw(0.0, 0.7) == 0);
    CHECK(geometric_draw(0.5, 0.0) == 0);
    // Boundary 1-u = q^n resolves to the lower length: u = 0.5, q = 0.5.
    CHECK(geometric_draw(0.5, 0.5) == 1);
    CHECK_THROWS_AS(geometric_draw(1.0, 0.5), InvalidQ);
}

TEST_CASE("exact sampler length frequencies match the geometric law") {
    // p = 0.3 system; lengths recorded from the sampler itself.
    const CondensationSystem sys(Ifs({MapSpec(Affine1D{0.5, 0.5})}, {1.0}),
                                 DiscreteMeasure::point_mass(0.0), 0.3);
    const std::size_t n = 1'000'000;
    std::vector<int> lengths;
    sample_orbital(sys, Mu0Spec::point(0.0), 2718, n, 1, &lengths);

    std::vector<std::size_t> freq(64, 0);
    for (int len : lengths)
        if (len < 64) ++freq[static_cast<std::size_t>(len)];

    for (int k = 0; k <= 10; ++k) {
        const double expected = 0.3 * std::pow(0.7, k);
        const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
        const double observed = static_cast<double>(freq[static_cast<std::size_t>(k)]) /
                                static_cast<double>(n);
        CHECK(std::abs(observed - expected) <= 4.0 * se);
    }
}

TEST_CASE("exact sampler hits the support of the orbital measure") {
    const auto sys = exercise_system(0.5);
    const std::size_t n = 100'000;
    std::vector<int> lengths;
    const auto batch = sample_orbital(sys, Mu0Spec::point(0.0), 11, n, 1, &lengths);

    std::size_t zeros = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double expected = 1.0 - std::ldexp(1.0, -lengths[i]);
        CHECK(batch.points[i].x == expected);
        if (batch.points[i].x == 0.0) ++zeros;
    }
    // P(length 0) = p = 1/2, binomial three-sigma band.
    const double half_band = 3.0 * std::sqrt(0.25 / static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(zeros) / static_cast<double>(n) - 0.5) <= half_band);
}

TEST_CASE("q = 0 samplers reduce to condensation draws") {
    const auto sys = exercise_system(1.0);
    const auto exact = sample_orbital(sys, Mu0Spec::point(0.0), 5, 500);
    for (const Point& pt : exact.points) CHECK(pt.x == 0.0);

    const auto chain = chaos_game_restart(sys, Mu0Spec{UniformInterval{0.0, 0.5}}, 5, 500);
    for (const Point& pt : chain.points) {
        CHECK(pt.x >= 0.0);
        CHECK(pt.x < 0.5);
    }
}

TEST_CASE("batches are bit-identical across runs and worker counts") {
    const auto sys = exercise_system(0.5);
    const Mu0Spec mu0 = Mu0Spec{UniformInterval{0.0, 0.5}};

    const auto a = sample_orbital(sys, mu0, 99, 20'000, 1);
    const auto b = sample_orbital(sys, mu0, 99, 20'000, 1);
    const auto c = sample_orbital(sys, mu0, 99, 20'000, 4);
    CHECK(a.points == b.points);
    CHECK(a.points == c.points);
    CHECK(a.generator_id == "philox4x32-10");

    const auto x = chaos_game_restart(sys, mu0, 77, 20'000, 3);
    const auto y = chaos_game_restart(sys, mu0, 77, 20'000, 3);
    CHECK(x.points == y.points);

    const auto other_seed = sample_orbital(sys, mu0, 100, 20'000, 1);
    CHECK(a.points != other_seed.points);
}

TEST_CASE("exact samples of an atomic system stay on enumerated atoms") {
    // Dyadic two-map system; every sample with address length <= 18 must land
    // exactly on an atom of the depth-18 enumeration.
    const CondensationSystem sys(
        Ifs({MapSpec(Affine1D{0.5, 0.0}), MapSpec(Affine1D{0.5, 0.5})}, {0.5, 0.5}),
        DiscreteMeasure::point_mass(0.0), 0.5);
    const auto trunc = enumerate_series(sys, 18);
    std::set<double> support;
    for (const Point& a : trunc.measure.atoms()) support.insert(a.x);

    std::vector<int> lengths;
    const auto batch = sample_orbital(sys, Mu0Spec::point(0.0), 4242, 4096, 1, &lengths);
    for (std::size_t i = 0; i < batch.points.size(); ++i) {
        if (lengths[i] <= 18) CHECK(support.count(batch.points[i].x) == 1);
    }
}

TEST_CASE("chaos game agrees with the exact sampler") {
    const auto sys = exercise_system(0.5);
    const std::size_t n = 200'000;
    const auto exact = empirical_measure(sample_orbital(sys, Mu0Spec::point(0.0), 31, n));
    const auto chain = empirical_measure(chaos_game_restart(sys, Mu0Spec::point(0.0), 37, n));
    CHECK(ks_distance(exact, chain) <= 0.01);

    const auto trunc = enumerate_series(sys, 40);
    CHECK(ks_distance(chain, trunc.measure) <= 0.01);
}

TEST_CASE("empirical_measure weighs points uniformly") {
    SampleBatch one;
    one.dim = 1;
    one.points = {{0.4, 0.0}};
    one.count = 1;
    CHECK(empirical_measure(one) == DiscreteMeasure::point_mass(0.4));

    SampleBatch four;
    four.dim = 1;
    four.points = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}};
    four.count = 4;
    CHECK(canonicalize(empirical_measure(four)) ==
          DiscreteMeasure(1, {{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}));

    SampleBatch empty;
    CHECK_THROWS_AS(empirical_measure(empty), EmptyBatch);
}
