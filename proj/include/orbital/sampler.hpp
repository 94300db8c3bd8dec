#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "orbital/error.hpp"
#include "orbital/ifs.hpp"
#include "orbital/measure.hpp"
#include "orbital/philox.hpp"

namespace orbital {

struct PointMass {
    Point at;
};

struct UniformInterval {
    double lo = 0.0;
    double hi = 1.0;
};

struct UniformBox {
    Point lo;
    Point hi;
};

/// Condensation-measure source for the samplers: an atom list or one of the
/// simple continuous families.
class Mu0Spec {
public:
    Mu0Spec(PointMass m) : spec_(m) {
        if (!point_finite(m.at)) throw DegenerateSpec("mu0: non-finite point");
    }
    Mu0Spec(DiscreteMeasure atoms) : spec_(std::move(atoms)) {}
    Mu0Spec(UniformInterval u) : spec_(u) {
        if (!(u.hi > u.lo)) throw DegenerateSpec("mu0: interval must have hi > lo");
    }
    Mu0Spec(UniformBox u) : spec_(u) {
        if (!(u.hi.x > u.lo.x) || !(u.hi.y > u.lo.y))
            throw DegenerateSpec("mu0: box must have hi > lo per axis");
    }

    static Mu0Spec point(double x) { return Mu0Spec(PointMass{Point{x, 0.0}}); }
    static Mu0Spec point(double x, double y) { return Mu0Spec(PointMass{Point{x, y}}); }

    int dim(int system_dim) const {
        if (std::holds_alternative<UniformInterval>(spec_)) return 1;
        if (std::holds_alternative<UniformBox>(spec_)) return 2;
        if (const auto* m = std::get_if<DiscreteMeasure>(&spec_)) return m->dim();
        return system_dim;  // a point mass adopts the system's dimension
    }

    const PointMass* as_point() const noexcept { return std::get_if<PointMass>(&spec_); }
    const DiscreteMeasure* as_atoms() const noexcept {
        return std::get_if<DiscreteMeasure>(&spec_);
    }
    const UniformInterval* as_interval() const noexcept {
        return std::get_if<UniformInterval>(&spec_);
    }
    const UniformBox* as_box() const noexcept { return std::get_if<UniformBox>(&spec_); }

private:
    std::variant<PointMass, DiscreteMeasure, UniformInterval, UniformBox> spec_;
};

namespace detail {

/// Cumulative table for inverse-CDF selection; zero-weight entries are
/// skipped so they can never be drawn.
class InverseCdf {
public:
    explicit InverseCdf(const std::vector<double>& weights) {
        cum_.reserve(weights.size());
        index_.reserve(weights.size());
        double run = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            run += weights[i];
            cum_.push_back(run);
            index_.push_back(i);
        }
    }

    /// Ties at a cumulative boundary resolve to the lower index.
    std::size_t pick(double u) const {
        const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
        const std::size_t k = std::min(static_cast<std::size_t>(it - cum_.begin()),
                                       cum_.size() - 1);
        return index_[k];
    }

private:
    std::vector<double> cum_;
    std::vector<std::size_t> index_;
};

}  // namespace detail

namespace detail {

/// Draw-ready view of a Mu0Spec; the atom-list cumulative table is built once.
class Mu0Sampler {
public:
    explicit Mu0Sampler(const Mu0Spec& spec) : spec_(&spec) {
        if (const auto* m = spec.as_atoms()) table_.emplace(m->weights());
    }

    Point draw(RngStream& rng) const {
        if (const auto* m = spec_->as_point()) return m->at;
        if (const auto* u = spec_->as_interval())
            return Point{u->lo + rng.next_double() * (u->hi - u->lo), 0.0};
        if (const auto* u = spec_->as_box()) {
            const double x = u->lo.x + rng.next_double() * (u->hi.x - u->lo.x);
            const double y = u->lo.y + rng.next_double() * (u->hi.y - u->lo.y);
            return Point{x, y};
        }
        return spec_->as_atoms()->atom(table_->pick(rng.next_double()));
    }

private:
    const Mu0Spec* spec_;
    std::optional<InverseCdf> table_;
};

}  // namespace detail

/// One draw from the condensation measure.
inline Point sample_mu0(const Mu0Spec& spec, RngStream& rng) {
    return detail::Mu0Sampler(spec).draw(rng);
}

/// Deterministic atomic stand-in for a non-atomic condensation measure:
/// midpoint atoms with equal weights (atoms_per_axis per axis).
inline DiscreteMeasure mu0_to_measure(const Mu0Spec& spec, int dim,
                                      std::size_t atoms_per_axis = 64) {
    if (atoms_per_axis < 1) throw DegenerateSpec("mu0: atoms_per_axis must be >= 1");
    if (spec.dim(dim) != dim) throw DimensionMismatch("mu0: spec/system dim mismatch");
    if (const auto* m = spec.as_atoms()) return *m;
    if (const auto* m = spec.as_point()) {
        return DiscreteMeasure(dim, {m->at}, {1.0});
    }
    if (const auto* u = spec.as_interval()) {
        std::vector<Point> atoms;
        std::vector<double> weights(atoms_per_axis, 1.0 / static_cast<double>(atoms_per_axis));
        atoms.reserve(atoms_per_axis);
        for (std::size_t i = 0; i < atoms_per_axis; ++i) {
            const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(atoms_per_axis);
            atoms.push_back(Point{u->lo + t * (u->hi - u->lo), 0.0});
        }
        return DiscreteMeasure::from_unnormalized(1, std::move(atoms), std::move(weights));
    }
    const UniformBox& u = *spec.as_box();
    std::vector<Point> atoms;
    std::vector<double> weights(atoms_per_axis * atoms_per_axis,
                                1.0 / static_cast<double>(atoms_per_axis * atoms_per_axis));
    atoms.reserve(atoms_per_axis * atoms_per_axis);
    for (std::size_t j = 0; j < atoms_per_axis; ++j) {
        const double ty = (static_cast<double>(j) + 0.5) / static_cast<double>(atoms_per_axis);
        for (std::size_t i = 0; i < atoms_per_axis; ++i) {
            const double tx = (static_cast<double>(i) + 0.5) / static_cast<double>(atoms_per_axis);
            atoms.push_back(
                Point{u.lo.x + tx * (u.hi.x - u.lo.x), u.lo.y + ty * (u.hi.y - u.lo.y)});
        }
    }
    return DiscreteMeasure::from_unnormalized(2, std::move(atoms), std::move(weights));
}

/// A reproducible batch: same (seed, system, count) gives bit-identical
/// points regardless of worker count.
struct SampleBatch {
    int dim = 1;
    std::vector<Point> points;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    std::string generator_id = kGeneratorId;
};

/// Inverse-CDF draw of the address length: P(L = n) = (1-q) q^n. Ties at the
/// floor boundary resolve to the lower length.
inline int geometric_draw(double q, double u) {
    if (!(q >= 0.0 && q < 1.0)) throw InvalidQ("geometric_draw: q must lie in [0, 1)");
    if (q == 0.0) return 0;
    // 1-u in (0, 1], so the log never sees zero.
    return static_cast<int>(std::floor(std::log1p(-u) / std::log(q)));
}

namespace detail {

inline constexpr std::uint32_t kStreamExact = 1;
inline constexpr std::uint32_t kStreamChaos = 2;

}  // namespace detail

/// Draws i.i.d. samples distributed exactly as the orbital measure, read as a
/// mixture: a geometric address length, i.i.d. symbols, one condensation
/// draw, then the address composition applied to it.
inline SampleBatch sample_orbital(const CondensationSystem& sys, const Mu0Spec& mu0,
                                  std::uint64_t seed, std::size_t count, unsigned workers = 1,
                                  std::vector<int>* lengths_out = nullptr) {
    if (count < 1) throw EmptyBatch("sample_orbital: count must be >= 1");
    if (mu0.dim(sys.dim()) != sys.dim())
        throw DimensionMismatch("sample_orbital: mu0/system dim mismatch");

    SampleBatch batch;
    batch.dim = sys.dim();
    batch.seed = seed;
    batch.count = count;
    batch.points.resize(count);
    if (lengths_out) lengths_out->assign(count, 0);

    const detail::InverseCdf symbols(sys.ifs().probs());
    const detail::Mu0Sampler mu0_sampler(mu0);
    const double q = sys.q();

    auto run_chunk = [&](std::size_t begin, std::size_t end) {
        Address address;
        for (std::size_t i = begin; i < end; ++i) {
            RngStream rng(seed, detail::kStreamExact, i);
            const int length = q == 0.0 ? 0 : geometric_draw(q, rng.next_double());
            address.resize(static_cast<std::size_t>(length));
            for (int k = 0; k < length; ++k)
                address[static_cast<std::size_t>(k)] =
                    static_cast<int>(symbols.pick(rng.next_double())) + 1;
            const Point x = mu0_sampler.draw(rng);
            batch.points[i] = apply_address(sys.ifs(), address, x);
            if (lengths_out) (*lengths_out)[i] = length;
        }
    };

    if (workers <= 1) {
        run_chunk(0, count);
    } else {
        const std::size_t chunk = (count + workers - 1) / workers;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min<std::size_t>(w * chunk, count);
            const std::size_t end = std::min<std::size_t>(begin + chunk, count);
            if (begin < end) pool.emplace_back(run_chunk, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    return batch;
}

/// Streaming chain: per step restart from the condensation measure with
/// probability p, otherwise apply a randomly selected map. Recording starts
/// at the first restart; every stride-th state afterwards is kept.
inline SampleBatch chaos_game_restart(const CondensationSystem& sys, const Mu0Spec& mu0,
                                      std::uint64_t seed, std::size_t count,
                                      std::size_t stride = 1) {
    if (count < 1) throw EmptyBatch("chaos_game_restart: count must be >= 1");
    if (stride < 1) throw InvalidTolerance("chaos_game_restart: stride must be >= 1");
    if (mu0.dim(sys.dim()) != sys.dim())
        throw DimensionMismatch("chaos_game_restart: mu0/system dim mismatch");

    SampleBatch batch;
    batch.dim = sys.dim();
    batch.seed = seed;
    batch.count = count;
    batch.points.reserve(count);

    const detail::InverseCdf symbols(sys.ifs().probs());
    const detail::Mu0Sampler mu0_sampler(mu0);
    RngStream rng(seed, detail::kStreamChaos, 0);

    // The chain state is undefined until the first restart; only the restart
    // coin is consumed while waiting.
    while (rng.next_double() >= sys.p()) {
    }
    Point x = mu0_sampler.draw(rng);
    batch.points.push_back(x);

    std::size_t step = 0;
    while (batch.points.size() < count) {
        const double u = rng.next_double();
        if (u < sys.p()) {
            x = mu0_sampler.draw(rng);
        } else {
            x = sys.ifs().map(symbols.pick(rng.next_double())).apply(x);
        }
        if (++step % stride == 0) batch.points.push_back(x);
    }
    return batch;
}

/// Uniform empirical measure over the batch points.
inline DiscreteMeasure empirical_measure(const SampleBatch& batch) {
    if (batch.points.empty()) throw EmptyBatch("empirical_measure: empty batch");
    std::vector<double> weights(batch.points.size(),
                                1.0 / static_cast<double>(batch.points.size()));
    return DiscreteMeasure(batch.dim, batch.points, std::move(weights));
}

}  // namespace orbital
