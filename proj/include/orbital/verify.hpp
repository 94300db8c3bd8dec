#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "orbital/error.hpp"
#include "orbital/ifs.hpp"
#include "orbital/measure.hpp"
#include "orbital/numeric.hpp"
#include "orbital/sampler.hpp"
#include "orbital/series.hpp"
#include "orbital/transfer.hpp"

namespace orbital {

/// W1 distance between a measure and its image under one fixed-point step.
/// Zero exactly at the solution; the depth-M truncation stays within
/// q^(M+1) times the support diameter.
inline double fixed_point_residual(const CondensationSystem& sys, const DiscreteMeasure& m,
                                   int sliced_directions = 16) {
    if (sys.dim() != m.dim())
        throw DimensionMismatch("fixed_point_residual: system/measure dim mismatch");
    const DiscreteMeasure stepped = condensation_step(sys, m);
    if (m.dim() == 1) return wasserstein1_1d(m, stepped);
    return sliced_w1_2d(m, stepped, evenly_spaced_directions(sliced_directions));
}

/// Iterates the fixed-point step from several starting measures and returns
/// the maximum pairwise distance of the results. For bounded supports the
/// contraction gives at most 2 q^iterations times the diameter.
inline double uniqueness_probe(const CondensationSystem& sys,
                               const std::vector<DiscreteMeasure>& starts, int iterations,
                               double prune_tol = 0.0,
                               std::size_t atom_budget = kDefaultAtomBudget) {
    if (starts.size() < 2)
        throw EmptyBatch("uniqueness_probe: at least two starting measures required");
    if (iterations < 0) throw InvalidTolerance("uniqueness_probe: iterations must be >= 0");
    for (const DiscreteMeasure& s : starts)
        if (s.dim() != sys.dim())
            throw DimensionMismatch("uniqueness_probe: start/system dim mismatch");

    std::vector<DiscreteMeasure> current = starts;
    for (int step = 0; step < iterations; ++step) {
        for (DiscreteMeasure& m : current) {
            m = condensation_step(sys, m);
            if (prune_tol > 0.0) m = prune_atoms(m, prune_tol);
            if (m.size() > atom_budget)
                throw DepthOverflow("uniqueness_probe: atom budget exceeded; raise prune_tol");
        }
    }

    double max_dist = 0.0;
    for (std::size_t i = 0; i < current.size(); ++i) {
        for (std::size_t j = i + 1; j < current.size(); ++j) {
            const double d = sys.dim() == 1
                                 ? wasserstein1_1d(current[i], current[j])
                                 : sliced_w1_2d(current[i], current[j],
                                                evenly_spaced_directions(16));
            max_dist = std::max(max_dist, d);
        }
    }
    return max_dist;
}

/// Partition-sum audit of the grid discretization at one resolution, plus
/// every 2x coarsening of it down to a single cell.
struct AdditivityReport {
    double partition_sum = 0.0;  // cells + escaped at the finest level
    double total_mass = 0.0;     // mass of the source measure
    double max_abs_gap = 0.0;    // worst |partition - total| across levels
    double escaped_mass = 0.0;
};

inline AdditivityReport additivity_check(const DiscreteMeasure& m, const Box& box,
                                         std::size_t resolution) {
    GridMeasure g = discretize_to_grid(m, box, resolution);

    AdditivityReport report;
    report.total_mass = compensated_total(m.weights());
    report.escaped_mass = g.escaped_mass;

    auto level_sum = [&](const GridMeasure& grid) {
        NeumaierSum s;
        for (double c : grid.cells) s.add(c);
        s.add(grid.escaped_mass);
        return s.value();
    };

    report.partition_sum = level_sum(g);
    report.max_abs_gap = std::abs(report.partition_sum - report.total_mass);

    // Coarsen by 2 per axis while the resolution allows it; sums must hold at
    // every level.
    while (g.resolution[0] % 2 == 0 && g.resolution[0] > 1 &&
           (g.dim == 1 || (g.resolution[1] % 2 == 0 && g.resolution[1] > 1))) {
        const std::size_t nx = g.resolution[0] / 2;
        const std::size_t ny = g.dim == 2 ? g.resolution[1] / 2 : 1;
        GridMeasure coarse;
        coarse.box = g.box;
        coarse.resolution = {nx, ny};
        coarse.dim = g.dim;
        coarse.escaped_mass = g.escaped_mass;
        coarse.cells.assign(nx * ny, 0.0);
        for (std::size_t iy = 0; iy < (g.dim == 2 ? g.resolution[1] : 1); ++iy)
            for (std::size_t ix = 0; ix < g.resolution[0]; ++ix)
                coarse.cells[(ix / 2) + nx * (g.dim == 2 ? iy / 2 : 0)] +=
                    g.cells[ix + g.resolution[0] * iy];
        g = std::move(coarse);
        report.max_abs_gap =
            std::max(report.max_abs_gap, std::abs(level_sum(g) - report.total_mass));
    }
    return report;
}

/// The single-map system of the half-shift exercise: f(x) = 1/2 + x/2 with a
/// condensation measure supported in [0, 1/2).
inline CondensationSystem make_exercise_system(double p, DiscreteMeasure mu0) {
    return CondensationSystem(Ifs({MapSpec(Affine1D{0.5, 0.5})}, {1.0}), std::move(mu0), p);
}

namespace detail {

inline void require_mu0_in_lower_half(const Mu0Spec& mu0, const DiscreteMeasure& atoms) {
    if (atoms.dim() != 1)
        throw InvalidMu0Support("exercise: condensation measure must be 1-D");
    if (const auto* u = mu0.as_interval()) {
        if (u->lo < 0.0 || u->hi > 0.5)
            throw InvalidMu0Support("exercise: interval must lie inside [0, 1/2)");
    }
    for (const Point& a : atoms.atoms())
        if (a.x < 0.0 || a.x >= 0.5)
            throw InvalidMu0Support("exercise: mass must lie strictly inside [0, 1/2)");
}

}  // namespace detail

struct EscapeRow {
    double p = 0.0;
    double mass = 0.0;   // truncated orbital measure of [0, x]
    double ratio = 0.0;  // mass / p
};

/// Lower-tail mass of the exercise system's orbital measure as p varies.
/// depth < 0 selects the depth that pushes the truncation tail under 1e-12.
inline std::vector<EscapeRow> exercise_escape_study(const std::vector<double>& p_values,
                                                    double x, const Mu0Spec& mu0,
                                                    int depth = -1,
                                                    std::size_t mu0_atoms = 64) {
    if (!(x >= 0.0 && x < 1.0)) throw InvalidTolerance("exercise: x must lie in [0, 1)");
    const DiscreteMeasure atoms = mu0_to_measure(mu0, 1, mu0_atoms);
    detail::require_mu0_in_lower_half(mu0, atoms);

    std::vector<EscapeRow> rows;
    rows.reserve(p_values.size());
    for (double p : p_values) {
        if (!(p > 0.0 && p <= 1.0))
            throw InvalidProbabilities("exercise: every p must lie in (0, 1]");
        const CondensationSystem sys = make_exercise_system(p, atoms);
        const int m = depth >= 0 ? depth : depth_for_tolerance(sys.q(), 1e-12);
        const TruncatedOrbital trunc = enumerate_series(sys, m);
        const double mass = cdf_eval(trunc.measure, x);
        rows.push_back({p, mass, mass / p});
    }
    return rows;
}

struct ClosedIntervalRow {
    double p = 0.0;
    double w1_to_right_endpoint = 0.0;
};

/// The [0,1] variant: distance from the orbital measure to the point mass at
/// 1, the fixed point of the half-shift map on the closed interval.
inline std::vector<ClosedIntervalRow> exercise_closed_interval_probe(
    const std::vector<double>& p_values, int depth = -1, const Mu0Spec& mu0 = Mu0Spec::point(0.0),
    std::size_t mu0_atoms = 64) {
    const DiscreteMeasure atoms = mu0_to_measure(mu0, 1, mu0_atoms);
    detail::require_mu0_in_lower_half(mu0, atoms);
    const DiscreteMeasure delta_one = DiscreteMeasure::point_mass(1.0);

    std::vector<ClosedIntervalRow> rows;
    rows.reserve(p_values.size());
    for (double p : p_values) {
        if (!(p > 0.0 && p <= 1.0))
            throw InvalidProbabilities("exercise: every p must lie in (0, 1]");
        const CondensationSystem sys = make_exercise_system(p, atoms);
        const int m = depth >= 0 ? depth : depth_for_tolerance(sys.q(), 1e-12);
        const TruncatedOrbital trunc = enumerate_series(sys, m);
        rows.push_back({p, wasserstein1_1d(trunc.measure, delta_one)});
    }
    return rows;
}

}  // namespace orbital
