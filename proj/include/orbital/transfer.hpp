#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "orbital/error.hpp"
#include "orbital/ifs.hpp"
#include "orbital/measure.hpp"

namespace orbital {

/// Guard against uncontrolled atom growth when iterating the operator on
/// many-map systems without pruning.
inline constexpr std::size_t kDefaultAtomBudget = 10'000'000;

/// Image measure under a map: every atom moves to its image, weights
/// unchanged. Exact for atomic measures.
inline DiscreteMeasure pushforward(const MapSpec& m, const DiscreteMeasure& nu) {
    if (m.dim() != nu.dim()) throw DimensionMismatch("pushforward: map/measure dim mismatch");
    std::vector<Point> atoms;
    atoms.reserve(nu.size());
    for (const Point& a : nu.atoms()) atoms.push_back(m.apply(a));
    return DiscreteMeasure(nu.dim(), std::move(atoms), nu.weights());
}

/// The transfer operator: probability-weighted mixture of the push-forwards
/// under every map, in map order. Atom count multiplies by the map count;
/// callers canonicalize when they need duplicates merged.
inline DiscreteMeasure markov_apply(const Ifs& ifs, const DiscreteMeasure& nu) {
    if (ifs.dim() != nu.dim()) throw DimensionMismatch("markov_apply: ifs/measure dim mismatch");
    std::vector<Point> atoms;
    std::vector<double> weights;
    atoms.reserve(ifs.size() * nu.size());
    weights.reserve(ifs.size() * nu.size());
    for (std::size_t n = 0; n < ifs.size(); ++n) {
        const double pn = ifs.prob(n);
        const MapSpec& f = ifs.map(n);
        for (std::size_t i = 0; i < nu.size(); ++i) {
            atoms.push_back(f.apply(nu.atom(i)));
            weights.push_back(pn * nu.weight(i));
        }
    }
    return DiscreteMeasure(nu.dim(), std::move(atoms), std::move(weights));
}

/// Drops atoms below weight_tol and rescales, redistributing the pruned mass
/// proportionally over the survivors.
inline DiscreteMeasure prune_atoms(const DiscreteMeasure& m, double weight_tol) {
    if (weight_tol < 0.0) throw InvalidTolerance("prune: negative tolerance");
    if (weight_tol == 0.0) return m;
    std::vector<Point> atoms;
    std::vector<double> weights;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.weight(i) >= weight_tol) {
            atoms.push_back(m.atom(i));
            weights.push_back(m.weight(i));
        }
    }
    if (atoms.empty()) throw AllZeroWeights("prune: tolerance removed every atom");
    if (atoms.size() == m.size()) return m;
    return DiscreteMeasure::from_unnormalized(m.dim(), std::move(atoms), std::move(weights));
}

/// n-fold application of the transfer operator to the condensation measure,
/// merging duplicate atoms at every step.
inline DiscreteMeasure rho_n(const CondensationSystem& sys, int n, double prune_tol = 0.0,
                             std::size_t atom_budget = kDefaultAtomBudget) {
    if (n < 0) throw InvalidTolerance("rho_n: n must be >= 0");
    DiscreteMeasure rho = sys.mu0();
    for (int step = 0; step < n; ++step) {
        rho = canonicalize(markov_apply(sys.ifs(), rho));
        if (prune_tol > 0.0) rho = prune_atoms(rho, prune_tol);
        if (rho.size() > atom_budget)
            throw DepthOverflow("rho_n: atom count " + std::to_string(rho.size()) +
                                " exceeds budget; raise prune_tol or lower n");
    }
    return rho;
}

/// One application of the affine fixed-point map: p*mu0 + q*(transfer of nu).
inline DiscreteMeasure condensation_step(const CondensationSystem& sys,
                                         const DiscreteMeasure& nu) {
    if (sys.dim() != nu.dim())
        throw DimensionMismatch("condensation_step: system/measure dim mismatch");
    if (sys.q() == 0.0) return sys.mu0();

    const DiscreteMeasure moved = markov_apply(sys.ifs(), nu);
    std::vector<Point> atoms;
    std::vector<double> weights;
    atoms.reserve(sys.mu0().size() + moved.size());
    weights.reserve(sys.mu0().size() + moved.size());
    for (std::size_t i = 0; i < sys.mu0().size(); ++i) {
        atoms.push_back(sys.mu0().atom(i));
        weights.push_back(sys.p() * sys.mu0().weight(i));
    }
    for (std::size_t i = 0; i < moved.size(); ++i) {
        atoms.push_back(moved.atom(i));
        weights.push_back(sys.q() * moved.weight(i));
    }
    detail::canonicalize_raw(atoms, weights, 0.0);
    return DiscreteMeasure(nu.dim(), std::move(atoms), std::move(weights));
}

}  // namespace orbital
