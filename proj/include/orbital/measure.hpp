#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "orbital/error.hpp"
#include "orbital/numeric.hpp"
#include "orbital/point.hpp"

namespace orbital {

/// Construction-time tolerance on |sum of weights - 1|. Inside it the weights
/// are silently rescaled to unit mass; outside it construction fails.
inline constexpr double kMassTolerance = 1e-9;

/// Rescales non-negative weights to sum to 1.
inline std::vector<double> normalize(std::vector<double> weights) {
    NeumaierSum total;
    for (double w : weights) {
        if (std::isnan(w) || std::isinf(w)) throw NonFiniteValue("normalize: non-finite weight");
        if (w < 0.0) throw NegativeWeight("normalize: negative weight");
        total.add(w);
    }
    const double sum = total.value();
    if (sum <= 0.0) throw AllZeroWeights("normalize: weights sum to zero");
    for (double& w : weights) w /= sum;
    return weights;
}

/// A normalized measure represented as a finite list of weighted atoms.
/// Immutable after construction; the pre-normalization weight sum is kept
/// for mass bookkeeping.
class DiscreteMeasure {
public:
    /// Requires the weights to already sum to 1 within kMassTolerance.
    DiscreteMeasure(int dim, std::vector<Point> atoms, std::vector<double> weights)
        : DiscreteMeasure(dim, std::move(atoms), std::move(weights), kMassTolerance) {}

    /// Accepts any positive total mass and rescales to 1.
    static DiscreteMeasure from_unnormalized(int dim, std::vector<Point> atoms,
                                             std::vector<double> weights) {
        return DiscreteMeasure(dim, std::move(atoms), std::move(weights), -1.0);
    }

    static DiscreteMeasure point_mass(double x) {
        return DiscreteMeasure(1, {Point{x, 0.0}}, {1.0});
    }

    static DiscreteMeasure point_mass(double x, double y) {
        return DiscreteMeasure(2, {Point{x, y}}, {1.0});
    }

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    const std::vector<Point>& atoms() const noexcept { return atoms_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const Point& atom(std::size_t i) const { return atoms_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    /// Weight sum as constructed, before rescaling to unit mass.
    double raw_weight_sum() const noexcept { return raw_sum_; }

    double min_coord(int axis) const {
        double m = axis == 0 ? atoms_[0].x : atoms_[0].y;
        for (const Point& a : atoms_) m = std::min(m, axis == 0 ? a.x : a.y);
        return m;
    }

    double max_coord(int axis) const {
        double m = axis == 0 ? atoms_[0].x : atoms_[0].y;
        for (const Point& a : atoms_) m = std::max(m, axis == 0 ? a.x : a.y);
        return m;
    }

    /// Representation equality: dimension, atoms, weights. The recorded
    /// pre-normalization sum is construction bookkeeping, not identity.
    friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
        return a.dim_ == b.dim_ && a.atoms_ == b.atoms_ && a.weights_ == b.weights_;
    }

private:
    // mass_tol < 0 means "accept any positive sum".
    DiscreteMeasure(int dim, std::vector<Point> atoms, std::vector<double> weights,
                    double mass_tol)
        : dim_(dim), atoms_(std::move(atoms)), weights_(std::move(weights)) {
        if (dim_ != 1 && dim_ != 2) throw DimensionMismatch("measure: dim must be 1 or 2");
        if (atoms_.size() != weights_.size())
            throw DimensionMismatch("measure: atom/weight count mismatch");
        if (atoms_.empty()) throw AllZeroWeights("measure: no atoms");
        NeumaierSum total;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!point_finite(atoms_[i])) throw NonFiniteValue("measure: non-finite atom");
            if (dim_ == 1) atoms_[i].y = 0.0;
            const double w = weights_[i];
            if (std::isnan(w) || std::isinf(w)) throw NonFiniteValue("measure: non-finite weight");
            if (w < 0.0) throw NegativeWeight("measure: negative weight");
            total.add(w);
        }
        raw_sum_ = total.value();
        if (raw_sum_ <= 0.0) throw AllZeroWeights("measure: weights sum to zero");
        if (mass_tol >= 0.0) {
            // Weights already within tolerance of unit mass are kept verbatim
            // so that value-identical inputs yield value-identical measures.
            if (std::abs(raw_sum_ - 1.0) > mass_tol)
                throw NotNormalized("measure: weights sum to " + std::to_string(raw_sum_));
        } else {
            for (double& w : weights_) w /= raw_sum_;
        }
    }

    int dim_ = 1;
    std::vector<Point> atoms_;
    std::vector<double> weights_;
    double raw_sum_ = 1.0;
};

namespace detail {

/// Sorts atoms lexicographically and merges groups closer than merge_tol in
/// max-norm (transitively, so a second pass is a no-op). Operates on raw
/// vectors so series construction can reuse it before normalization.
inline void canonicalize_raw(std::vector<Point>& atoms, std::vector<double>& weights,
                             double merge_tol) {
    if (merge_tol < 0.0) throw InvalidTolerance("canonicalize: negative merge tolerance");
    const std::size_t n = atoms.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (atoms[a].x != atoms[b].x) return atoms[a].x < atoms[b].x;
        if (atoms[a].y != atoms[b].y) return atoms[a].y < atoms[b].y;
        return weights[a] < weights[b];
    });

    std::vector<Point> out_atoms;
    std::vector<double> out_weights;
    out_atoms.reserve(n);
    out_weights.reserve(n);

    if (merge_tol == 0.0) {
        // Exact duplicates only: equality is transitive, one pass suffices.
        std::size_t i = 0;
        while (i < n) {
            const Point& rep = atoms[order[i]];
            NeumaierSum w;
            std::size_t j = i;
            while (j < n && atoms[order[j]] == rep) {
                w.add(weights[order[j]]);
                ++j;
            }
            out_atoms.push_back(rep);
            out_weights.push_back(w.value());
            i = j;
        }
    } else {
        // Union-find over pairs within merge_tol; clusters are the transitive
        // closure, so representatives of distinct clusters are > merge_tol
        // apart and canonicalize is idempotent.
        std::vector<std::size_t> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t v) {
            while (parent[v] != v) {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            return v;
        };
        auto unite = [&](std::size_t a, std::size_t b) {
            a = find(a);
            b = find(b);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        };
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const Point& pi = atoms[order[i]];
                const Point& pj = atoms[order[j]];
                if (pj.x - pi.x > merge_tol) break;  // sorted by x first
                if (max_norm_dist(pi, pj) <= merge_tol) unite(i, j);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (find(i) != i) continue;
            const Point& rep = atoms[order[i]];  // lex-smallest member
            NeumaierSum w;
            for (std::size_t j = i; j < n; ++j)
                if (find(j) == i) w.add(weights[order[j]]);
            out_atoms.push_back(rep);
            out_weights.push_back(w.value());
        }
    }

    atoms = std::move(out_atoms);
    weights = std::move(out_weights);
}

/// Signed CDF-difference events for the 1-D transport metrics.
/// Each event is (position, weight delta); a-atoms enter with +w, b-atoms
/// with -w.
using CdfEvents = std::vector<std::pair<double, double>>;

inline CdfEvents make_events(const std::vector<Point>& a_atoms, const std::vector<double>& a_w,
                             const std::vector<Point>& b_atoms, const std::vector<double>& b_w) {
    CdfEvents ev;
    ev.reserve(a_atoms.size() + b_atoms.size());
    for (std::size_t i = 0; i < a_atoms.size(); ++i) ev.emplace_back(a_atoms[i].x, a_w[i]);
    for (std::size_t i = 0; i < b_atoms.size(); ++i) ev.emplace_back(b_atoms[i].x, -b_w[i]);
    std::sort(ev.begin(), ev.end());
    return ev;
}

/// Integral of |CDF_a - CDF_b| over the merged support.
inline double w1_from_events(CdfEvents& ev) {
    NeumaierSum integral;
    NeumaierSum diff;
    std::size_t i = 0;
    while (i < ev.size()) {
        const double pos = ev[i].first;
        while (i < ev.size() && ev[i].first == pos) {
            diff.add(ev[i].second);
            ++i;
        }
        if (i < ev.size()) integral.add(std::abs(diff.value()) * (ev[i].first - pos));
    }
    return integral.value();
}

/// sup |CDF_a - CDF_b| over the merged atom positions.
inline double ks_from_events(CdfEvents& ev) {
    double sup = 0.0;
    NeumaierSum diff;
    std::size_t i = 0;
    while (i < ev.size()) {
        const double pos = ev[i].first;
        while (i < ev.size() && ev[i].first == pos) {
            diff.add(ev[i].second);
            ++i;
        }
        sup = std::max(sup, std::abs(diff.value()));
    }
    return sup;
}

}  // namespace detail

/// Merges atoms within merge_tol of each other (max-norm) and sorts the atom
/// list lexicographically. Total mass is preserved.
inline DiscreteMeasure canonicalize(const DiscreteMeasure& m, double merge_tol = 0.0) {
    std::vector<Point> atoms = m.atoms();
    std::vector<double> weights = m.weights();
    detail::canonicalize_raw(atoms, weights, merge_tol);
    return DiscreteMeasure(m.dim(), std::move(atoms), std::move(weights));
}

/// Mass at (-inf, x]; closed right endpoint.
inline double cdf_eval(const DiscreteMeasure& m, double x) {
    if (m.dim() != 1) throw DimensionMismatch("cdf_eval: 1-D measures only");
    NeumaierSum acc;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.atom(i).x <= x) acc.add(m.weight(i));
    return acc.value();
}

/// Exact 1-D Wasserstein-1 distance: integral of the absolute CDF difference.
inline double wasserstein1_1d(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.dim() != 1 || b.dim() != 1) throw DimensionMismatch("wasserstein1_1d: 1-D only");
    auto ev = detail::make_events(a.atoms(), a.weights(), b.atoms(), b.weights());
    return detail::w1_from_events(ev);
}

/// Kolmogorov-Smirnov distance between two 1-D measures.
inline double ks_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.dim() != 1 || b.dim() != 1) throw DimensionMismatch("ks_distance: 1-D only");
    auto ev = detail::make_events(a.atoms(), a.weights(), b.atoms(), b.weights());
    return detail::ks_from_events(ev);
}

/// Unit direction vectors at evenly spaced angles k*pi/count, k = 0..count-1.
inline std::vector<Point> evenly_spaced_directions(int count) {
    if (count < 1) throw EmptyDirections("directions: count must be >= 1");
    std::vector<Point> dirs(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double angle = M_PI * k / count;
        dirs[static_cast<std::size_t>(k)] = Point{std::cos(angle), std::sin(angle)};
    }
    return dirs;
}

/// Sliced W1 for planar measures: mean 1-D W1 over projections onto the given
/// unit directions.
inline double sliced_w1_2d(const DiscreteMeasure& a, const DiscreteMeasure& b,
                           const std::vector<Point>& directions) {
    if (a.dim() != 2 || b.dim() != 2) throw DimensionMismatch("sliced_w1_2d: 2-D only");
    if (directions.empty()) throw EmptyDirections("sliced_w1_2d: no directions");
    NeumaierSum mean;
    for (const Point& u : directions) {
        if (std::abs(std::sqrt(dot(u, u)) - 1.0) > 1e-9)
            throw InvalidDirection("sliced_w1_2d: direction not unit length");
        detail::CdfEvents ev;
        ev.reserve(a.size() + b.size());
        for (std::size_t i = 0; i < a.size(); ++i) ev.emplace_back(dot(a.atom(i), u), a.weight(i));
        for (std::size_t i = 0; i < b.size(); ++i) ev.emplace_back(dot(b.atom(i), u), -b.weight(i));
        std::sort(ev.begin(), ev.end());
        mean.add(detail::w1_from_events(ev));
    }
    return mean.value() / static_cast<double>(directions.size());
}

/// Axis-aligned bounding box; y-axis entries are ignored for dim 1.
struct Box {
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    int dim = 1;
};

/// Histogram of a measure on a regular grid. Cells partition the box with
/// half-open intervals per axis, closed on the last cell; mass outside the
/// box lands in escaped_mass.
struct GridMeasure {
    Box box;
    std::array<std::size_t, 2> resolution{1, 1};
    std::vector<double> cells;  // row-major, index = ix + resolution[0] * iy
    double escaped_mass = 0.0;
    int dim = 1;

    std::size_t cell_count() const noexcept {
        return resolution[0] * (dim == 2 ? resolution[1] : 1);
    }
};

inline GridMeasure discretize_to_grid(const DiscreteMeasure& m, const Box& box,
                                      std::array<std::size_t, 2> resolution) {
    if (box.dim != m.dim()) throw DimensionMismatch("discretize: box/measure dim mismatch");
    const int dim = m.dim();
    const std::size_t nx = resolution[0];
    const std::size_t ny = dim == 2 ? resolution[1] : 1;
    if (nx < 1 || ny < 1) throw DegenerateBox("discretize: resolution must be >= 1");
    for (int axis = 0; axis < dim; ++axis)
        if (!(box.hi[axis] > box.lo[axis]))
            throw DegenerateBox("discretize: box must have hi > lo per axis");

    GridMeasure g;
    g.box = box;
    g.resolution = {nx, ny};
    g.dim = dim;
    g.cells.assign(nx * ny, 0.0);
    std::vector<double> comp(nx * ny, 0.0);
    NeumaierSum escaped;

    auto bin_axis = [&](double c, int axis, std::size_t res, std::size_t& idx) {
        const double lo = box.lo[axis];
        const double hi = box.hi[axis];
        if (c < lo || c > hi) return false;
        const double t = (c - lo) / (hi - lo) * static_cast<double>(res);
        idx = std::min(static_cast<std::size_t>(t), res - 1);
        return true;
    };

    for (std::size_t i = 0; i < m.size(); ++i) {
        std::size_t ix = 0;
        std::size_t iy = 0;
        bool inside = bin_axis(m.atom(i).x, 0, nx, ix);
        if (inside && dim == 2) inside = bin_axis(m.atom(i).y, 1, ny, iy);
        if (!inside) {
            escaped.add(m.weight(i));
            continue;
        }
        const std::size_t cell = ix + nx * iy;
        // Neumaier step inlined per cell.
        const double w = m.weight(i);
        const double t = g.cells[cell] + w;
        if (std::abs(g.cells[cell]) >= std::abs(w))
            comp[cell] += (g.cells[cell] - t) + w;
        else
            comp[cell] += (w - t) + g.cells[cell];
        g.cells[cell] = t;
    }
    for (std::size_t c = 0; c < g.cells.size(); ++c) g.cells[c] += comp[c];
    g.escaped_mass = escaped.value();
    return g;
}

inline GridMeasure discretize_to_grid(const DiscreteMeasure& m, const Box& box,
                                      std::size_t resolution) {
    return discretize_to_grid(m, box, {resolution, resolution});
}

}  // namespace orbital
