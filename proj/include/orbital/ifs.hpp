#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "orbital/error.hpp"
#include "orbital/measure.hpp"
#include "orbital/numeric.hpp"
#include "orbital/point.hpp"

namespace orbital {

/// x -> a*x + b on the line.
struct Affine1D {
    double a = 1.0;
    double b = 0.0;
};

/// x -> A*x + t in the plane, A given row-wise.
struct Affine2D {
    double a11 = 1.0, a12 = 0.0;
    double a21 = 0.0, a22 = 1.0;
    double tx = 0.0, ty = 0.0;
};

/// A continuous map from a fixed build-time registry, selected by name.
struct NamedMap {
    std::string name;
    std::vector<double> params;
};

struct NamedMapDef {
    int dim;
    std::size_t arity;
    Point (*apply)(const std::vector<double>& params, Point p);
};

/// Registry of named continuous maps usable in configs. "logistic-half" is
/// the halving shift x -> 1/2 + x/2; "logistic" is x -> r*x*(1-x).
inline const std::map<std::string, NamedMapDef>& named_map_registry() {
    static const std::map<std::string, NamedMapDef> registry = {
        {"logistic-half",
         {1, 0, [](const std::vector<double>&, Point p) {
              return Point{0.5 + 0.5 * p.x, 0.0};
          }}},
        {"logistic",
         {1, 1, [](const std::vector<double>& ps, Point p) {
              return Point{ps[0] * p.x * (1.0 - p.x), 0.0};
          }}},
    };
    return registry;
}

/// One self-map of the state space: affine in 1-D or 2-D, or a registry map.
class MapSpec {
public:
    MapSpec(Affine1D m) : spec_(m) { check_finite({m.a, m.b}); }

    MapSpec(Affine2D m) : spec_(m) {
        check_finite({m.a11, m.a12, m.a21, m.a22, m.tx, m.ty});
    }

    MapSpec(NamedMap m) : spec_(std::move(m)) {
        const auto& named = std::get<NamedMap>(spec_);
        const auto it = named_map_registry().find(named.name);
        if (it == named_map_registry().end())
            throw UnknownNamedMap("map: unknown named map '" + named.name + "'");
        if (named.params.size() != it->second.arity)
            throw UnknownNamedMap("map: '" + named.name + "' expects " +
                                  std::to_string(it->second.arity) + " parameter(s)");
        check_finite(named.params);
        def_ = &it->second;
    }

    int dim() const noexcept {
        if (std::holds_alternative<Affine1D>(spec_)) return 1;
        if (std::holds_alternative<Affine2D>(spec_)) return 2;
        return def_->dim;
    }

    Point apply(Point p) const {
        if (const auto* m = std::get_if<Affine1D>(&spec_)) return {m->a * p.x + m->b, 0.0};
        if (const auto* m = std::get_if<Affine2D>(&spec_))
            return {m->a11 * p.x + m->a12 * p.y + m->tx, m->a21 * p.x + m->a22 * p.y + m->ty};
        return def_->apply(std::get<NamedMap>(spec_).params, p);
    }

    const Affine1D* as_affine1d() const noexcept { return std::get_if<Affine1D>(&spec_); }
    const Affine2D* as_affine2d() const noexcept { return std::get_if<Affine2D>(&spec_); }
    const NamedMap* as_named() const noexcept { return std::get_if<NamedMap>(&spec_); }

private:
    static void check_finite(const std::vector<double>& xs) {
        for (double x : xs)
            if (!std::isfinite(x)) throw NonFiniteValue("map: non-finite parameter");
    }

    std::variant<Affine1D, Affine2D, NamedMap> spec_;
    const NamedMapDef* def_ = nullptr;
};

inline Point apply_map(const MapSpec& m, Point p) { return m.apply(p); }

/// Finite family of maps with strictly positive selection probabilities
/// summing to one.
class Ifs {
public:
    Ifs(std::vector<MapSpec> maps, std::vector<double> probs)
        : maps_(std::move(maps)), probs_(std::move(probs)) {
        if (maps_.empty()) throw EmptyIfs("ifs: at least one map required");
        if (probs_.size() != maps_.size())
            throw InvalidProbabilities("ifs: map/probability count mismatch");
        dim_ = maps_[0].dim();
        for (const MapSpec& m : maps_)
            if (m.dim() != dim_) throw DimensionMismatch("ifs: maps of mixed dimension");
        NeumaierSum total;
        for (double pn : probs_) {
            if (!std::isfinite(pn) || pn <= 0.0)
                throw InvalidProbabilities("ifs: map probabilities must be > 0");
            total.add(pn);
        }
        const double sum = total.value();
        if (std::abs(sum - 1.0) > kMassTolerance)
            throw InvalidProbabilities("ifs: map probabilities sum to " + std::to_string(sum));
        for (double& pn : probs_) pn /= sum;
    }

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return maps_.size(); }
    const MapSpec& map(std::size_t n) const { return maps_[n]; }
    double prob(std::size_t n) const { return probs_[n]; }
    const std::vector<MapSpec>& maps() const noexcept { return maps_; }
    const std::vector<double>& probs() const noexcept { return probs_; }

private:
    std::vector<MapSpec> maps_;
    std::vector<double> probs_;
    int dim_ = 1;
};

/// Finite word over {1..N}; the empty word stands for the condensation term.
using Address = std::vector<int>;

/// Applies the composition indexed by the address, innermost symbol last:
/// the final symbol's map touches x first.
inline Point apply_address(const Ifs& ifs, const Address& address, Point x) {
    const int n = static_cast<int>(ifs.size());
    for (int symbol : address)
        if (symbol < 1 || symbol > n)
            throw SymbolOutOfRange("address: symbol " + std::to_string(symbol) +
                                   " outside [1, " + std::to_string(n) + "]");
    for (auto it = address.rbegin(); it != address.rend(); ++it)
        x = ifs.map(static_cast<std::size_t>(*it - 1)).apply(x);
    return x;
}

/// The IFS with condensation: maps plus a condensation measure injected with
/// probability p per step (q = 1 - p).
class CondensationSystem {
public:
    CondensationSystem(Ifs ifs, DiscreteMeasure mu0, double p)
        : ifs_(std::move(ifs)), mu0_(std::move(mu0)), p_(p) {
        if (!std::isfinite(p_) || p_ <= 0.0)
            throw InvalidProbabilities("system: p must be > 0");
        if (p_ > 1.0 + kMassTolerance)
            throw InvalidProbabilities("system: p must be <= 1");
        p_ = std::min(p_, 1.0);
        q_ = 1.0 - p_;
        if (mu0_.dim() != ifs_.dim())
            throw DimensionMismatch("system: condensation measure dim differs from maps");
    }

    const Ifs& ifs() const noexcept { return ifs_; }
    const DiscreteMeasure& mu0() const noexcept { return mu0_; }
    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    int dim() const noexcept { return ifs_.dim(); }

private:
    Ifs ifs_;
    DiscreteMeasure mu0_;
    double p_ = 1.0;
    double q_ = 0.0;
};

/// p * q^|address| * product of the symbol probabilities.
inline double address_weight(const CondensationSystem& sys, const Address& address) {
    const int n = static_cast<int>(sys.ifs().size());
    double w = sys.p();
    for (int symbol : address) {
        if (symbol < 1 || symbol > n)
            throw SymbolOutOfRange("address: symbol " + std::to_string(symbol) +
                                   " outside [1, " + std::to_string(n) + "]");
        w *= sys.q() * sys.ifs().prob(static_cast<std::size_t>(symbol - 1));
    }
    return w;
}

/// Outcome of whole-system validation: either a system or the full list of
/// violations, never both.
struct SystemValidation {
    std::vector<Violation> violations;
    std::optional<CondensationSystem> system;

    bool ok() const noexcept { return system.has_value(); }
};

/// Checks all constraints at once and reports every violation. Probability
/// sums within kMassTolerance of 1 are renormalized rather than rejected.
inline SystemValidation validate_system(const std::vector<MapSpec>& maps,
                                        const std::vector<double>& probs, double p,
                                        const DiscreteMeasure& mu0,
                                        std::optional<double> q = std::nullopt) {
    SystemValidation result;
    auto flag = [&](std::string path, std::string reason) {
        result.violations.push_back({std::move(path), std::move(reason)});
    };

    if (maps.empty()) flag("maps", "at least one map is required");
    int dim = maps.empty() ? 0 : maps[0].dim();
    for (std::size_t i = 0; i < maps.size(); ++i)
        if (maps[i].dim() != dim)
            flag("maps[" + std::to_string(i) + "]", "dimension differs from maps[0]");

    if (probs.size() != maps.size()) {
        flag("map_probs", "expected " + std::to_string(maps.size()) + " entries, got " +
                              std::to_string(probs.size()));
    } else {
        NeumaierSum total;
        bool entries_ok = true;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (!std::isfinite(probs[i]) || probs[i] <= 0.0) {
                flag("map_probs[" + std::to_string(i) + "]", "must be > 0");
                entries_ok = false;
            } else {
                total.add(probs[i]);
            }
        }
        if (entries_ok && std::abs(total.value() - 1.0) > kMassTolerance)
            flag("map_probs", "sum to " + std::to_string(total.value()) + ", expected 1");
    }

    if (!std::isfinite(p) || p <= 0.0)
        flag("p", "must be > 0");
    else if (p > 1.0 + kMassTolerance)
        flag("p", "must be <= 1");
    if (q && std::isfinite(p) && std::abs(p + *q - 1.0) > kMassTolerance)
        flag("q", "p + q must equal 1");

    if (dim != 0 && mu0.dim() != dim) flag("mu0", "dimension differs from maps");

    if (result.violations.empty())
        result.system.emplace(Ifs(maps, probs), mu0, std::min(p, 1.0));
    return result;
}

}  // namespace orbital
