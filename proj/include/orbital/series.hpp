#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "orbital/error.hpp"
#include "orbital/ifs.hpp"
#include "orbital/measure.hpp"
#include "orbital/numeric.hpp"
#include "orbital/transfer.hpp"

namespace orbital {

/// Default cap on the number of emitted series terms (addresses times
/// condensation atoms) before enumeration refuses to continue.
inline constexpr std::size_t kDefaultTermBudget = 10'000'000;

/// Mass of the series tail beyond truncation depth M: q^(M+1).
inline double tail_mass(double q, int depth) {
    if (!(q >= 0.0 && q < 1.0)) throw InvalidQ("tail_mass: q must lie in [0, 1)");
    if (depth < 0) throw InvalidTolerance("tail_mass: depth must be >= 0");
    return std::pow(q, depth + 1);
}

/// Smallest depth M with q^(M+1) <= eps.
inline int depth_for_tolerance(double q, double eps) {
    if (!(q >= 0.0 && q < 1.0)) throw InvalidQ("depth_for_tolerance: q must lie in [0, 1)");
    if (!(eps > 0.0 && eps < 1.0))
        throw InvalidTolerance("depth_for_tolerance: eps must lie in (0, 1)");
    if (q == 0.0) return 0;
    int depth = std::max(0, static_cast<int>(std::ceil(std::log(eps) / std::log(q))) - 1);
    while (tail_mass(q, depth) > eps) ++depth;
    while (depth > 0 && tail_mass(q, depth - 1) <= eps) --depth;
    return depth;
}

enum class Route { enumeration, iteration };

inline const char* route_name(Route r) {
    return r == Route::enumeration ? "enum" : "neumann";
}

/// A depth-M truncation of the orbital series, renormalized to unit mass.
/// raw_mass is the captured (pre-renormalization) weight, tail_bound the
/// analytic q^(M+1) left in the tail, pruned_mass whatever subtree skipping
/// discarded on top of that (enumeration route only).
struct TruncatedOrbital {
    DiscreteMeasure measure;
    int depth = 0;
    double tail_bound = 0.0;
    double raw_mass = 1.0;
    double pruned_mass = 0.0;
    Route route = Route::enumeration;
};

/// Builds the truncation by depth-first enumeration of all addresses up to
/// the given depth. Subtrees whose accumulated weight falls below
/// weight_floor are skipped with their mass accounted analytically.
inline TruncatedOrbital enumerate_series(const CondensationSystem& sys, int depth,
                                         double weight_floor = 0.0,
                                         std::size_t term_budget = kDefaultTermBudget) {
    if (depth < 0) throw InvalidTolerance("enumerate_series: depth must be >= 0");
    if (weight_floor < 0.0) throw InvalidTolerance("enumerate_series: negative weight floor");

    const DiscreteMeasure& mu0 = sys.mu0();
    const std::size_t n_maps = sys.ifs().size();
    const double q = sys.q();

    if (weight_floor == 0.0) {
        // Address count grows as N^M; refuse up front when it cannot fit.
        double terms = 0.0;
        double level = static_cast<double>(mu0.size());
        for (int k = 0; k <= depth && terms <= 2.0 * static_cast<double>(term_budget); ++k) {
            terms += level;
            level *= static_cast<double>(n_maps);
        }
        if (terms > static_cast<double>(term_budget))
            throw DepthOverflow("enumerate_series: term count exceeds budget of " +
                                std::to_string(term_budget) +
                                "; lower the depth or set a weight floor");
    }

    std::vector<Point> atoms;
    std::vector<double> weights;
    NeumaierSum pruned;
    std::size_t terms = 0;

    // Mass of a whole skipped subtree rooted at a node of the given depth and
    // weight: the node term plus every extension down to the target depth.
    auto subtree_mass = [&](double w, int node_depth) {
        const int levels_left = depth - node_depth;
        return w * (1.0 - std::pow(q, levels_left + 1)) / sys.p();
    };

    struct Node {
        double weight;
        int depth;
        std::vector<Point> images;
    };
    std::vector<Node> stack;
    stack.push_back({sys.p(), 0, mu0.atoms()});

    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();

        terms += node.images.size();
        if (terms > term_budget)
            throw DepthOverflow("enumerate_series: term count exceeds budget of " +
                                std::to_string(term_budget));
        for (std::size_t i = 0; i < node.images.size(); ++i) {
            atoms.push_back(node.images[i]);
            weights.push_back(node.weight * mu0.weight(i));
        }

        if (node.depth == depth || q == 0.0) continue;
        // Children extend the address on the outside, so a child's images are
        // one map application away from the parent's.
        for (std::size_t n = n_maps; n-- > 0;) {
            const double child_weight = node.weight * (q * sys.ifs().prob(n));
            if (weight_floor > 0.0 && child_weight < weight_floor) {
                pruned.add(subtree_mass(child_weight, node.depth + 1));
                continue;
            }
            Node child;
            child.weight = child_weight;
            child.depth = node.depth + 1;
            child.images.reserve(node.images.size());
            const MapSpec& f = sys.ifs().map(n);
            for (const Point& img : node.images) child.images.push_back(f.apply(img));
            stack.push_back(std::move(child));
        }
    }

    detail::canonicalize_raw(atoms, weights, 0.0);
    DiscreteMeasure measure =
        DiscreteMeasure::from_unnormalized(sys.dim(), std::move(atoms), std::move(weights));

    TruncatedOrbital out{std::move(measure), depth, tail_mass(q, depth), 0.0, pruned.value(),
                         Route::enumeration};
    out.raw_mass = out.measure.raw_weight_sum();
    return out;
}

/// Builds the same truncation through the resolvent expansion: the partial
/// sum of p * q^n times the n-th operator power of the condensation measure.
inline TruncatedOrbital neumann_iterate(const CondensationSystem& sys, int depth,
                                        double prune_tol = 0.0,
                                        std::size_t atom_budget = kDefaultTermBudget) {
    if (depth < 0) throw InvalidTolerance("neumann_iterate: depth must be >= 0");
    if (prune_tol < 0.0) throw InvalidTolerance("neumann_iterate: negative prune tolerance");

    std::vector<Point> atoms;
    std::vector<double> weights;
    DiscreteMeasure rho = sys.mu0();
    double scale = sys.p();

    for (int n = 0;; ++n) {
        for (std::size_t i = 0; i < rho.size(); ++i) {
            atoms.push_back(rho.atom(i));
            weights.push_back(scale * rho.weight(i));
        }
        if (n == depth || sys.q() == 0.0) break;
        rho = canonicalize(markov_apply(sys.ifs(), rho));
        if (prune_tol > 0.0) rho = prune_atoms(rho, prune_tol);
        if (atoms.size() + rho.size() > atom_budget)
            throw DepthOverflow("neumann_iterate: atom count exceeds budget; raise prune_tol");
        scale *= sys.q();
    }

    detail::canonicalize_raw(atoms, weights, 0.0);
    DiscreteMeasure measure =
        DiscreteMeasure::from_unnormalized(sys.dim(), std::move(atoms), std::move(weights));

    TruncatedOrbital out{std::move(measure), depth, tail_mass(sys.q(), depth), 0.0, 0.0,
                         Route::iteration};
    out.raw_mass = out.measure.raw_weight_sum();
    return out;
}

}  // namespace orbital
