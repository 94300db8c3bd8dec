// Command-line front end: validate configs, build truncations, sample,
// verify fixed-point properties, run the escape study, render densities.

#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbital/orbital.hpp"

namespace {

using nlohmann::json;

struct GlobalOptions {
    bool json_errors = false;
};

void report_error(const GlobalOptions& g, const std::string& kind, const orbital::Error& e) {
    if (g.json_errors) {
        json out{{"error", kind}, {"message", e.what()}};
        if (const auto* sv = dynamic_cast<const orbital::SchemaViolation*>(&e)) {
            json vs = json::array();
            for (const auto& v : sv->violations()) vs.push_back({{"path", v.path}, {"reason", v.reason}});
            out["violations"] = vs;
        }
        std::cerr << out.dump() << "\n";
    } else {
        std::cerr << "error: " << e.what() << "\n";
    }
}

std::string error_kind(const orbital::Error& e) {
    if (dynamic_cast<const orbital::SchemaViolation*>(&e)) return "SchemaViolation";
    if (dynamic_cast<const orbital::ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const orbital::IoError*>(&e)) return "IoError";
    if (dynamic_cast<const orbital::DepthOverflow*>(&e)) return "DepthOverflow";
    return "Error";
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string field;
    while (std::getline(in, field, ',')) {
        if (field.empty()) continue;
        out.push_back(std::stod(field));
    }
    return out;
}

orbital::Box support_box(const orbital::DiscreteMeasure& m, double pad = 0.0) {
    orbital::Box box;
    box.dim = m.dim();
    for (int axis = 0; axis < m.dim(); ++axis) {
        double lo = m.min_coord(axis);
        double hi = m.max_coord(axis);
        if (!(hi > lo)) hi = lo + 1.0;  // degenerate support still needs a box
        const double margin = pad * (hi - lo);
        box.lo[axis] = lo - margin;
        box.hi[axis] = hi + margin;
    }
    if (m.dim() == 1) {
        box.lo[1] = 0.0;
        box.hi[1] = 1.0;
    }
    return box;
}

double support_diameter(const orbital::Box& box) {
    const double dx = box.hi[0] - box.lo[0];
    if (box.dim == 1) return dx;
    const double dy = box.hi[1] - box.lo[1];
    return std::sqrt(dx * dx + dy * dy);
}

int run_validate(const GlobalOptions&, const std::string& config_path) {
    orbital::load_config_file(config_path);  // throws on any violation
    std::cout << "ok\n";
    return 0;
}

int run_build(const GlobalOptions&, const std::string& config_path, std::optional<int> depth,
              std::optional<double> tol, const std::string& route, std::optional<double> floor,
              std::optional<double> prune, std::optional<std::string> out,
              std::optional<std::string> cdf_out) {
    const orbital::SystemConfig cfg = orbital::load_config_file(config_path);
    const orbital::CondensationSystem sys = cfg.to_system();
    const int m = cfg.resolve_depth(depth, tol);

    orbital::TruncatedOrbital trunc =
        route == "neumann"
            ? orbital::neumann_iterate(sys, m, prune.value_or(cfg.run.prune_tol),
                                       cfg.run.term_budget)
            : orbital::enumerate_series(sys, m, floor.value_or(cfg.run.weight_floor),
                                        cfg.run.term_budget);

    const std::string out_path = out ? *out : cfg.run.out.value_or("");
    if (out_path.empty()) throw orbital::IoError("build: no output path (--out or run.out)");
    orbital::io::write_atoms_csv(trunc.measure, out_path);
    if (cdf_out) orbital::io::write_cdf_csv(trunc.measure, *cdf_out);

    const json meta{{"depth", trunc.depth},
                    {"tail_bound", trunc.tail_bound},
                    {"raw_mass", trunc.raw_mass},
                    {"pruned_mass", trunc.pruned_mass},
                    {"route", orbital::route_name(trunc.route)}};
    orbital::io::atomic_write(out_path + ".meta.jsonl", meta.dump() + "\n");
    std::cout << meta.dump() << "\n";
    return 0;
}

int run_sample(const GlobalOptions&, const std::string& config_path,
               std::optional<std::uint64_t> seed, std::optional<std::size_t> count,
               const std::string& method, std::optional<std::size_t> stride,
               std::optional<unsigned> workers, std::optional<std::string> out) {
    const orbital::SystemConfig cfg = orbital::load_config_file(config_path);
    const orbital::CondensationSystem sys = cfg.to_system();

    const std::uint64_t s = seed.value_or(cfg.run.seed);
    const std::size_t n = count.value_or(cfg.run.count);
    orbital::SampleBatch batch =
        method == "chaos"
            ? orbital::chaos_game_restart(sys, cfg.mu0, s, n, stride.value_or(cfg.run.stride))
            : orbital::sample_orbital(sys, cfg.mu0, s, n, workers.value_or(cfg.run.workers));

    const std::string out_path = out ? *out : cfg.run.out.value_or("");
    if (out_path.empty()) throw orbital::IoError("sample: no output path (--out or run.out)");
    orbital::io::write_samples_csv(batch, out_path);
    std::cerr << "wrote " << batch.points.size() << " samples (" << batch.generator_id
              << ", seed " << batch.seed << ")\n";
    return 0;
}

int run_verify(const GlobalOptions&, const std::string& config_path, std::optional<int> depth,
               std::optional<double> tol) {
    const orbital::SystemConfig cfg = orbital::load_config_file(config_path);
    const orbital::CondensationSystem sys = cfg.to_system();
    const int m = cfg.resolve_depth(depth, tol);

    const orbital::TruncatedOrbital trunc =
        orbital::enumerate_series(sys, m, cfg.run.weight_floor, cfg.run.term_budget);

    // Common support box: truncation atoms plus the condensation measure.
    orbital::Box box = support_box(trunc.measure);
    for (int axis = 0; axis < sys.dim(); ++axis) {
        box.lo[axis] = std::min(box.lo[axis], sys.mu0().min_coord(axis));
        box.hi[axis] = std::max(box.hi[axis], sys.mu0().max_coord(axis));
    }
    const double diam = support_diameter(box);
    bool all_pass = true;
    auto report = [&](const std::string& name, double value, double bound) {
        const bool pass = value <= bound;
        all_pass = all_pass && pass;
        std::cout << name << ": value=" << orbital::io::format_double(value)
                  << " bound=" << orbital::io::format_double(bound) << " "
                  << (pass ? "PASS" : "FAIL") << "\n";
    };

    const double residual = orbital::fixed_point_residual(sys, trunc.measure);
    report("fixed_point_residual", residual,
           2.0 * orbital::tail_mass(sys.q(), m) * diam + 1e-12);

    const orbital::DiscreteMeasure corner =
        sys.dim() == 1 ? orbital::DiscreteMeasure::point_mass(box.hi[0])
                       : orbital::DiscreteMeasure::point_mass(box.hi[0], box.hi[1]);
    const double probe = orbital::uniqueness_probe(sys, {sys.mu0(), corner}, m,
                                                   cfg.run.prune_tol, cfg.run.term_budget);
    report("uniqueness_probe", probe, 2.0 * std::pow(sys.q(), m) * diam + 1e-9);

    double worst_gap = 0.0;
    for (std::size_t res = 2; res <= 1024; res *= 2) {
        const orbital::AdditivityReport add = orbital::additivity_check(trunc.measure, box, res);
        worst_gap = std::max(worst_gap, add.max_abs_gap);
    }
    report("additivity_gap", worst_gap, 1e-12);

    std::cout << (all_pass ? "verify: PASS" : "verify: FAIL") << "\n";
    return all_pass ? 0 : 1;
}

int run_study(const GlobalOptions&, const std::string& config_path, const std::string& ps_csv,
              double x, std::optional<int> depth, std::optional<std::string> out,
              std::optional<std::string> closed_out) {
    const orbital::SystemConfig cfg = orbital::load_config_file(config_path);
    const std::vector<double> ps = parse_double_list(ps_csv);
    if (ps.empty()) throw orbital::InvalidProbabilities("study-exercise: empty --ps list");

    const auto rows =
        orbital::exercise_escape_study(ps, x, cfg.mu0, depth.value_or(-1), cfg.run.mu0_atoms);
    const std::string out_path = out ? *out : cfg.run.out.value_or("");
    if (out_path.empty())
        throw orbital::IoError("study-exercise: no output path (--out or run.out)");
    orbital::io::write_escape_csv(rows, out_path);

    std::cout << "p,mass,mass/p\n";
    for (const auto& r : rows)
        std::cout << orbital::io::format_double(r.p) << ","
                  << orbital::io::format_double(r.mass) << ","
                  << orbital::io::format_double(r.ratio) << "\n";

    if (closed_out) {
        const auto closed =
            orbital::exercise_closed_interval_probe(ps, depth.value_or(-1), cfg.mu0,
                                                    cfg.run.mu0_atoms);
        orbital::io::write_closed_csv(closed, *closed_out);
    }
    return 0;
}

int run_render(const GlobalOptions&, const std::string& config_path, const std::string& res_str,
               std::optional<std::string> box_str, const std::string& scale,
               std::optional<int> depth, std::optional<double> tol, const std::string& route,
               std::optional<std::string> out) {
    const orbital::SystemConfig cfg = orbital::load_config_file(config_path);
    const orbital::CondensationSystem sys = cfg.to_system();
    const int m = cfg.resolve_depth(depth, tol);

    orbital::TruncatedOrbital trunc =
        route == "neumann"
            ? orbital::neumann_iterate(sys, m, cfg.run.prune_tol, cfg.run.term_budget)
            : orbital::enumerate_series(sys, m, cfg.run.weight_floor, cfg.run.term_budget);

    std::array<std::size_t, 2> res{256, 256};
    {
        const auto sep = res_str.find('x');
        if (sep == std::string::npos)
            throw orbital::ParseError("render: --res expects WxH, got '" + res_str + "'");
        res[0] = static_cast<std::size_t>(std::stoull(res_str.substr(0, sep)));
        res[1] = static_cast<std::size_t>(std::stoull(res_str.substr(sep + 1)));
    }

    orbital::Box box = support_box(trunc.measure, 0.02);
    if (box_str) {
        const auto vals = parse_double_list(*box_str);
        if (vals.size() != 4)
            throw orbital::ParseError("render: --box expects x0,x1,y0,y1");
        box.dim = 2;
        box.lo = {vals[0], vals[2]};
        box.hi = {vals[1], vals[3]};
    }

    const std::string out_path = out ? *out : cfg.run.out.value_or("");
    if (out_path.empty()) throw orbital::IoError("render: no output path (--out or run.out)");
    orbital::io::render_density(trunc.measure, box, res,
                                scale == "log" ? orbital::io::RenderScale::log
                                               : orbital::io::RenderScale::linear,
                                out_path, &std::cerr);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbital measures: truncated series, samplers, and checks for an IFS with condensation"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_flag("--json-errors", global.json_errors, "emit machine-readable errors on stderr");

    std::string config_path;
    std::optional<int> depth;
    std::optional<double> tol;
    std::string route = "enum";
    std::optional<double> weight_floor;
    std::optional<double> prune_tol;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> count;
    std::string method = "exact";
    std::optional<std::size_t> stride;
    std::optional<unsigned> workers;
    std::string ps_csv = "0.5,0.1,0.01";
    double x_value = 0.9;
    std::optional<std::string> closed_out;
    std::optional<std::string> cdf_out;
    std::string res_str = "256x256";
    std::optional<std::string> box_str;
    std::string scale = "linear";

    auto* validate = app.add_subcommand("validate", "check a config document");
    validate->add_option("config", config_path, "config file")->required();

    auto* build = app.add_subcommand("build", "construct a truncated orbital measure");
    build->add_option("config", config_path)->required();
    build->add_option("--depth", depth, "truncation depth");
    build->add_option("--tol", tol, "tail tolerance selecting the depth");
    build->add_option("--route", route)->check(CLI::IsMember({"enum", "neumann"}));
    build->add_option("--weight-floor", weight_floor, "subtree pruning floor (enum route)");
    build->add_option("--prune-tol", prune_tol, "atom pruning tolerance (neumann route)");
    build->add_option("--out", out, "atom CSV output path");
    build->add_option("--cdf-out", cdf_out, "also write the CDF table (1-D only)");

    auto* sample = app.add_subcommand("sample", "draw samples from the orbital measure");
    sample->add_option("config", config_path)->required();
    sample->add_option("--count", count);
    sample->add_option("--seed", seed);
    sample->add_option("--method", method)->check(CLI::IsMember({"exact", "chaos"}));
    sample->add_option("--stride", stride, "record every stride-th chaos state");
    sample->add_option("--workers", workers, "worker threads (exact method)");
    sample->add_option("--out", out, "sample CSV output path");

    auto* verify = app.add_subcommand("verify", "run residual, uniqueness, additivity checks");
    verify->add_option("config", config_path)->required();
    verify->add_option("--depth", depth);
    verify->add_option("--tol", tol);

    auto* study = app.add_subcommand("study-exercise", "escape-of-mass study for the half-shift system");
    study->add_option("config", config_path)->required();
    study->add_option("--ps", ps_csv, "comma-separated p values");
    study->add_option("--x", x_value, "evaluation point in [0,1)");
    study->add_option("--depth", depth, "override the automatic truncation depth");
    study->add_option("--out", out, "escape table CSV path");
    study->add_option("--closed-out", closed_out, "also write the [0,1]-variant table");

    auto* render = app.add_subcommand("render", "render a 2-D truncation as a PGM density");
    render->add_option("config", config_path)->required();
    render->add_option("--res", res_str, "WxH grid resolution");
    render->add_option("--box", box_str, "x0,x1,y0,y1 view box");
    render->add_option("--scale", scale)->check(CLI::IsMember({"linear", "log"}));
    render->add_option("--depth", depth);
    render->add_option("--tol", tol);
    render->add_option("--route", route)->check(CLI::IsMember({"enum", "neumann"}));
    render->add_option("--out", out, "PGM output path");

    CLI11_PARSE(app, argc, argv);

    try {
        try {
            if (validate->parsed()) return run_validate(global, config_path);
            if (build->parsed())
                return run_build(global, config_path, depth, tol, route, weight_floor,
                                 prune_tol, out, cdf_out);
            if (sample->parsed())
                return run_sample(global, config_path, seed, count, method, stride, workers, out);
            if (verify->parsed()) return run_verify(global, config_path, depth, tol);
            if (study->parsed())
                return run_study(global, config_path, ps_csv, x_value, depth, out, closed_out);
            if (render->parsed())
                return run_render(global, config_path, res_str, box_str, scale, depth, tol, route, out);
        } catch (const std::exception& e) {
            if (dynamic_cast<const orbital::Error*>(&e)) throw;
            throw orbital::Error(e.what());
        }
    } catch (const orbital::SchemaViolation& e) {
        report_error(global, "SchemaViolation", e);
        return 1;
    } catch (const orbital::ParseError& e) {
        report_error(global, "ParseError", e);
        return 1;
    } catch (const orbital::Error& e) {
        report_error(global, error_kind(e), e);
        return 2;
    }
    return 0;
}
