#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here is test-only and deliberately avoids the library's own series
// construction paths.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "orbital/ifs.hpp"
#include "orbital/measure.hpp"
#include "orbital/transfer.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Dyadic rational k / 2^bits in [lo, hi).
inline double dyadic(Rng& rng, double lo, double hi, int bits = 6) {
    const double scale = std::ldexp(1.0, bits);
    const auto steps = static_cast<long long>((hi - lo) * scale);
    std::uniform_int_distribution<long long> d(0, steps - 1);
    return lo + static_cast<double>(d(rng)) / scale;
}

inline orbital::DiscreteMeasure random_measure(Rng& rng, int dim, std::size_t n_atoms,
                                               double lo = -1.0, double hi = 1.0) {
    std::vector<orbital::Point> atoms;
    std::vector<double> weights;
    for (std::size_t i = 0; i < n_atoms; ++i) {
        atoms.push_back({uniform(rng, lo, hi), dim == 2 ? uniform(rng, lo, hi) : 0.0});
        weights.push_back(uniform(rng, 0.05, 1.0));
    }
    return orbital::DiscreteMeasure::from_unnormalized(dim, std::move(atoms), std::move(weights));
}

/// Random probability vector with strictly positive entries.
inline std::vector<double> random_probs(Rng& rng, std::size_t n) {
    std::vector<double> probs(n);
    double sum = 0.0;
    for (double& p : probs) {
        p = uniform(rng, 0.1, 1.0);
        sum += p;
    }
    for (double& p : probs) p /= sum;
    return probs;
}

/// Random 1-D affine system with dyadic coefficients mapping [0,1] into
/// itself (|a| + |b| kept inside the unit interval).
inline orbital::CondensationSystem random_dyadic_system(Rng& rng, std::size_t n_maps,
                                                        double p_restart) {
    std::vector<orbital::MapSpec> maps;
    for (std::size_t i = 0; i < n_maps; ++i) {
        const double a = dyadic(rng, 0.0, 0.5, 5);
        const double b = dyadic(rng, 0.0, 0.5, 5);
        maps.emplace_back(orbital::Affine1D{a, b});
    }
    std::vector<orbital::Point> mu0_atoms{{dyadic(rng, 0.0, 1.0, 5), 0.0},
                                          {dyadic(rng, 0.0, 1.0, 5), 0.0}};
    auto mu0 = orbital::DiscreteMeasure(1, std::move(mu0_atoms), {0.5, 0.5});
    return orbital::CondensationSystem(orbital::Ifs(std::move(maps), random_probs(rng, n_maps)),
                                       std::move(mu0), p_restart);
}

/// Independent series oracle: walks every address of length <= depth with an
/// odometer, scores it with address_weight, and applies the composition
/// through apply_address. No shared code with enumerate_series' traversal.
inline orbital::DiscreteMeasure oracle_series(const orbital::CondensationSystem& sys,
                                              int depth) {
    std::vector<orbital::Point> atoms;
    std::vector<double> weights;
    const auto& mu0 = sys.mu0();
    const int n_maps = static_cast<int>(sys.ifs().size());

    auto emit = [&](const orbital::Address& address) {
        const double w = orbital::address_weight(sys, address);
        for (std::size_t i = 0; i < mu0.size(); ++i) {
            atoms.push_back(orbital::apply_address(sys.ifs(), address, mu0.atom(i)));
            weights.push_back(w * mu0.weight(i));
        }
    };

    emit({});
    for (int len = 1; len <= depth && sys.q() > 0.0; ++len) {
        orbital::Address address(static_cast<std::size_t>(len), 1);
        while (true) {
            emit(address);
            int k = len - 1;
            while (k >= 0 && address[static_cast<std::size_t>(k)] == n_maps) {
                address[static_cast<std::size_t>(k)] = 1;
                --k;
            }
            if (k < 0) break;
            ++address[static_cast<std::size_t>(k)];
        }
    }
    auto measure = orbital::DiscreteMeasure::from_unnormalized(sys.dim(), std::move(atoms),
                                                               std::move(weights));
    return orbital::canonicalize(measure);
}

/// Operator-power oracle: all addresses of length exactly n, weighted by the
/// symbol probabilities alone.
inline orbital::DiscreteMeasure oracle_rho(const orbital::CondensationSystem& sys, int n) {
    if (n == 0) return orbital::canonicalize(sys.mu0());
    std::vector<orbital::Point> atoms;
    std::vector<double> weights;
    const auto& mu0 = sys.mu0();
    const int n_maps = static_cast<int>(sys.ifs().size());

    orbital::Address address(static_cast<std::size_t>(n), 1);
    while (true) {
        double w = 1.0;
        for (int s : address) w *= sys.ifs().prob(static_cast<std::size_t>(s - 1));
        for (std::size_t i = 0; i < mu0.size(); ++i) {
            atoms.push_back(orbital::apply_address(sys.ifs(), address, mu0.atom(i)));
            weights.push_back(w * mu0.weight(i));
        }
        int k = n - 1;
        while (k >= 0 && address[static_cast<std::size_t>(k)] == n_maps) {
            address[static_cast<std::size_t>(k)] = 1;
            --k;
        }
        if (k < 0) break;
        ++address[static_cast<std::size_t>(k)];
    }
    auto measure = orbital::DiscreteMeasure::from_unnormalized(sys.dim(), std::move(atoms),
                                                               std::move(weights));
    return orbital::canonicalize(measure);
}

}  // namespace testsupport
