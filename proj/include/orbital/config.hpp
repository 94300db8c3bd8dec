#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "orbital/error.hpp"
#include "orbital/ifs.hpp"
#include "orbital/sampler.hpp"
#include "orbital/series.hpp"

namespace orbital {

/// Optional run parameters carried by a config document; command-line flags
/// override them.
struct RunParams {
    std::optional<int> depth;
    std::optional<double> tolerance;
    std::uint64_t seed = 1;
    std::size_t count = 100'000;
    std::size_t stride = 1;
    unsigned workers = 1;
    std::size_t mu0_atoms = 64;
    double weight_floor = 0.0;
    double prune_tol = 0.0;
    std::size_t term_budget = kDefaultTermBudget;
    std::optional<std::string> out;
};

/// A validated declarative system description.
struct SystemConfig {
    int dimension = 1;
    std::vector<MapSpec> maps;
    std::vector<double> map_probs;
    double p = 1.0;
    Mu0Spec mu0 = Mu0Spec::point(0.0);
    RunParams run;

    CondensationSystem to_system() const {
        SystemValidation v = validate_system(maps, map_probs, p,
                                             mu0_to_measure(mu0, dimension, run.mu0_atoms));
        if (!v.ok()) throw SchemaViolation(v.violations);
        return *std::move(v.system);
    }

    /// Depth resolution order: explicit depth, then tolerance, then the run
    /// section, then a 1e-9 tail.
    int resolve_depth(std::optional<int> cli_depth, std::optional<double> cli_tol) const {
        const double q = 1.0 - p;
        if (cli_depth) return *cli_depth;
        if (cli_tol) return depth_for_tolerance(q, *cli_tol);
        if (run.depth) return *run.depth;
        return depth_for_tolerance(q, run.tolerance.value_or(1e-9));
    }
};

namespace detail {

using Json = nlohmann::json;

class ConfigReader {
public:
    explicit ConfigReader(const Json& root) : root_(root) {}

    SystemConfig read() {
        expect_keys(root_, "", {"dimension", "maps", "map_probs", "p", "mu0", "run"});

        SystemConfig cfg;
        cfg.dimension = read_dimension();
        cfg.maps = read_maps(cfg.dimension);
        cfg.map_probs = read_probs();
        cfg.p = read_p();
        if (auto mu0 = read_mu0(cfg.dimension)) cfg.mu0 = *std::move(mu0);
        cfg.run = read_run();

        // System-level validation runs whenever the core fields parsed, so
        // unknown keys elsewhere cannot mask probability violations. Field
        // paths from validate_system match the document keys.
        bool core_ok = true;
        for (const Violation& v : violations_)
            for (const char* prefix : {"dimension", "maps", "map_probs", "p", "mu0"})
                if (v.path.rfind(prefix, 0) == 0) core_ok = false;
        if (core_ok) {
            SystemValidation v = validate_system(
                cfg.maps, cfg.map_probs, cfg.p,
                mu0_to_measure(cfg.mu0, cfg.dimension, cfg.run.mu0_atoms));
            for (Violation& violation : v.violations)
                violations_.push_back(std::move(violation));
        }
        if (!violations_.empty()) throw SchemaViolation(std::move(violations_));
        return cfg;
    }

private:
    void flag(const std::string& path, const std::string& reason) {
        violations_.push_back({path.empty() ? "(document)" : path, reason});
    }

    void expect_keys(const Json& obj, const std::string& path,
                     std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) {
            flag(path, "expected an object");
            return;
        }
        for (const auto& item : obj.items()) {
            bool known = false;
            for (const char* key : allowed)
                if (item.key() == key) known = true;
            if (!known) flag(path.empty() ? item.key() : path + "." + item.key(),
                             "unknown key");
        }
    }

    const Json* require(const std::string& key) {
        if (!root_.contains(key)) {
            flag(key, "missing required key");
            return nullptr;
        }
        return &root_.at(key);
    }

    std::optional<double> as_number(const Json& j, const std::string& path) {
        if (!j.is_number()) {
            flag(path, "expected a number");
            return std::nullopt;
        }
        return j.get<double>();
    }

    int read_dimension() {
        const Json* j = require("dimension");
        if (!j) return 1;
        if (!j->is_number_integer() || (j->get<int>() != 1 && j->get<int>() != 2)) {
            flag("dimension", "must be 1 or 2");
            return 1;
        }
        return j->get<int>();
    }

    std::vector<double> read_vector(const Json& j, const std::string& path,
                                    std::size_t expected_len) {
        std::vector<double> out;
        if (!j.is_array() || j.size() != expected_len) {
            flag(path, "expected an array of " + std::to_string(expected_len) + " number(s)");
            return out;
        }
        for (std::size_t i = 0; i < j.size(); ++i)
            if (auto v = as_number(j[i], path + "[" + std::to_string(i) + "]"))
                out.push_back(*v);
        return out;
    }

    std::vector<MapSpec> read_maps(int dimension) {
        std::vector<MapSpec> maps;
        const Json* j = require("maps");
        if (!j) return maps;
        if (!j->is_array() || j->empty()) {
            flag("maps", "expected a non-empty array");
            return maps;
        }
        for (std::size_t i = 0; i < j->size(); ++i) {
            const std::string path = "maps[" + std::to_string(i) + "]";
            const Json& m = (*j)[i];
            if (!m.is_object() || !m.contains("kind") || !m.at("kind").is_string()) {
                flag(path, "expected an object with a 'kind' string");
                continue;
            }
            const std::string kind = m.at("kind").get<std::string>();
            try {
                if (kind == "affine1d") {
                    expect_keys(m, path, {"kind", "a", "b"});
                    double a = 0.0;
                    double b = 0.0;
                    if (m.contains("a")) a = as_number(m.at("a"), path + ".a").value_or(0.0);
                    else flag(path + ".a", "missing required key");
                    if (m.contains("b")) b = as_number(m.at("b"), path + ".b").value_or(0.0);
                    else flag(path + ".b", "missing required key");
                    maps.emplace_back(Affine1D{a, b});
                } else if (kind == "affine2d") {
                    expect_keys(m, path, {"kind", "matrix", "offset"});
                    Affine2D aff;
                    if (m.contains("matrix") && m.at("matrix").is_array() &&
                        m.at("matrix").size() == 2) {
                        const auto r0 = read_vector(m.at("matrix")[0], path + ".matrix[0]", 2);
                        const auto r1 = read_vector(m.at("matrix")[1], path + ".matrix[1]", 2);
                        if (r0.size() == 2 && r1.size() == 2) {
                            aff.a11 = r0[0];
                            aff.a12 = r0[1];
                            aff.a21 = r1[0];
                            aff.a22 = r1[1];
                        }
                    } else {
                        flag(path + ".matrix", "expected a 2x2 array");
                    }
                    const auto t = m.contains("offset")
                                       ? read_vector(m.at("offset"), path + ".offset", 2)
                                       : (flag(path + ".offset", "missing required key"),
                                          std::vector<double>{});
                    if (t.size() == 2) {
                        aff.tx = t[0];
                        aff.ty = t[1];
                    }
                    maps.emplace_back(aff);
                } else if (kind == "named") {
                    expect_keys(m, path, {"kind", "name", "params"});
                    NamedMap named;
                    if (m.contains("name") && m.at("name").is_string())
                        named.name = m.at("name").get<std::string>();
                    else
                        flag(path + ".name", "expected a string");
                    if (m.contains("params")) {
                        if (!m.at("params").is_array()) {
                            flag(path + ".params", "expected an array of numbers");
                        } else {
                            for (std::size_t k = 0; k < m.at("params").size(); ++k)
                                if (auto v = as_number(m.at("params")[k],
                                                       path + ".params[" + std::to_string(k) + "]"))
                                    named.params.push_back(*v);
                        }
                    }
                    maps.emplace_back(std::move(named));
                } else {
                    flag(path + ".kind", "unknown map kind '" + kind + "'");
                    continue;
                }
            } catch (const Error& e) {
                flag(path, e.what());
                continue;
            }
            if (!maps.empty() && maps.back().dim() != dimension)
                flag(path, "map dimension differs from 'dimension'");
        }
        return maps;
    }

    std::vector<double> read_probs() {
        std::vector<double> probs;
        const Json* j = require("map_probs");
        if (!j) return probs;
        if (!j->is_array() || j->empty()) {
            flag("map_probs", "expected a non-empty array of numbers");
            return probs;
        }
        for (std::size_t i = 0; i < j->size(); ++i)
            if (auto v = as_number((*j)[i], "map_probs[" + std::to_string(i) + "]"))
                probs.push_back(*v);
        return probs;
    }

    double read_p() {
        const Json* j = require("p");
        if (!j) return 1.0;
        return as_number(*j, "p").value_or(1.0);
    }

    std::optional<Mu0Spec> read_mu0(int dimension) {
        const Json* j = require("mu0");
        if (!j) return std::nullopt;
        if (!j->is_object() || !j->contains("kind") || !j->at("kind").is_string()) {
            flag("mu0", "expected an object with a 'kind' string");
            return std::nullopt;
        }
        const std::string kind = j->at("kind").get<std::string>();
        try {
            if (kind == "point") {
                expect_keys(*j, "mu0", {"kind", "at"});
                if (!j->contains("at")) {
                    flag("mu0.at", "missing required key");
                    return std::nullopt;
                }
                const auto at = read_vector(j->at("at"), "mu0.at",
                                            static_cast<std::size_t>(dimension));
                if (at.size() != static_cast<std::size_t>(dimension)) return std::nullopt;
                return Mu0Spec(PointMass{Point{at[0], dimension == 2 ? at[1] : 0.0}});
            }
            if (kind == "uniform") {
                expect_keys(*j, "mu0", {"kind", "lo", "hi"});
                if (!j->contains("lo") || !j->contains("hi")) {
                    flag("mu0", "uniform needs 'lo' and 'hi'");
                    return std::nullopt;
                }
                const auto lo = read_vector(j->at("lo"), "mu0.lo",
                                            static_cast<std::size_t>(dimension));
                const auto hi = read_vector(j->at("hi"), "mu0.hi",
                                            static_cast<std::size_t>(dimension));
                if (lo.size() != static_cast<std::size_t>(dimension) ||
                    hi.size() != static_cast<std::size_t>(dimension))
                    return std::nullopt;
                if (dimension == 1) return Mu0Spec(UniformInterval{lo[0], hi[0]});
                return Mu0Spec(UniformBox{Point{lo[0], lo[1]}, Point{hi[0], hi[1]}});
            }
            if (kind == "atoms") {
                expect_keys(*j, "mu0", {"kind", "points", "weights"});
                if (!j->contains("points") || !j->at("points").is_array() ||
                    !j->contains("weights") || !j->at("weights").is_array()) {
                    flag("mu0", "atoms needs 'points' and 'weights' arrays");
                    return std::nullopt;
                }
                std::vector<Point> points;
                for (std::size_t i = 0; i < j->at("points").size(); ++i) {
                    const auto c = read_vector(j->at("points")[i],
                                               "mu0.points[" + std::to_string(i) + "]",
                                               static_cast<std::size_t>(dimension));
                    if (c.size() != static_cast<std::size_t>(dimension)) return std::nullopt;
                    points.push_back(Point{c[0], dimension == 2 ? c[1] : 0.0});
                }
                std::vector<double> weights;
                for (std::size_t i = 0; i < j->at("weights").size(); ++i)
                    if (auto v = as_number(j->at("weights")[i],
                                           "mu0.weights[" + std::to_string(i) + "]"))
                        weights.push_back(*v);
                return Mu0Spec(DiscreteMeasure::from_unnormalized(dimension, std::move(points),
                                                                  std::move(weights)));
            }
            flag("mu0.kind", "unknown mu0 kind '" + kind + "'");
        } catch (const Error& e) {
            flag("mu0", e.what());
        }
        return std::nullopt;
    }

    RunParams read_run() {
        RunParams run;
        if (!root_.contains("run")) return run;
        const Json& j = root_.at("run");
        expect_keys(j, "run",
                    {"depth", "tol", "seed", "count", "stride", "workers", "mu0_atoms",
                     "weight_floor", "prune_tol", "term_budget", "out"});
        if (!j.is_object()) return run;

        auto read_uint = [&](const char* key, auto& target, std::uint64_t min_value) {
            if (!j.contains(key)) return;
            const std::string path = std::string("run.") + key;
            if (!j.at(key).is_number_unsigned() && !j.at(key).is_number_integer()) {
                flag(path, "expected a non-negative integer");
                return;
            }
            const auto v = j.at(key).get<std::int64_t>();
            if (v < static_cast<std::int64_t>(min_value)) {
                flag(path, "must be >= " + std::to_string(min_value));
                return;
            }
            target = static_cast<std::remove_reference_t<decltype(target)>>(v);
        };

        if (j.contains("depth")) {
            int depth = 0;
            read_uint("depth", depth, 0);
            run.depth = depth;
        }
        if (j.contains("tol")) {
            if (auto v = as_number(j.at("tol"), "run.tol")) {
                if (*v > 0.0 && *v < 1.0)
                    run.tolerance = *v;
                else
                    flag("run.tol", "must lie in (0, 1)");
            }
        }
        read_uint("seed", run.seed, 0);
        read_uint("count", run.count, 1);
        read_uint("stride", run.stride, 1);
        read_uint("workers", run.workers, 1);
        read_uint("mu0_atoms", run.mu0_atoms, 1);
        read_uint("term_budget", run.term_budget, 1);
        if (j.contains("weight_floor")) {
            if (auto v = as_number(j.at("weight_floor"), "run.weight_floor")) {
                if (*v >= 0.0)
                    run.weight_floor = *v;
                else
                    flag("run.weight_floor", "must be >= 0");
            }
        }
        if (j.contains("prune_tol")) {
            if (auto v = as_number(j.at("prune_tol"), "run.prune_tol")) {
                if (*v >= 0.0)
                    run.prune_tol = *v;
                else
                    flag("run.prune_tol", "must be >= 0");
            }
        }
        if (j.contains("out")) {
            if (j.at("out").is_string())
                run.out = j.at("out").get<std::string>();
            else
                flag("run.out", "expected a string");
        }
        return run;
    }

    const Json& root_;
    std::vector<Violation> violations_;
};

}  // namespace detail

/// Parses and fully validates a config document. Unknown keys are rejected;
/// every violation is reported at once.
inline SystemConfig load_config(const std::string& text) {
    detail::Json root;
    try {
        root = detail::Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    return detail::ConfigReader(root).read();
}

inline SystemConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config(buf.str());
}

}  // namespace orbital
