#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "orbital/error.hpp"
#include "orbital/measure.hpp"
#include "orbital/numeric.hpp"
#include "orbital/sampler.hpp"
#include "orbital/verify.hpp"

namespace orbital::io {

/// Shortest-faithful decimal for a double: 17 significant digits round-trip.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// RFC-4180 quoting; numeric fields pass through untouched.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

/// Writes through a temp file in the same directory, then renames into place.
inline void atomic_write(const std::string& path, const std::string& payload) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path + " (" + ec.message() + ")");
}

/// Atom list as CSV, header "x,weight" or "x,y,weight".
inline void write_atoms_csv(const DiscreteMeasure& m, const std::string& path) {
    std::string out = m.dim() == 1 ? "x,weight\n" : "x,y,weight\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += format_double(m.atom(i).x);
        if (m.dim() == 2) {
            out += ',';
            out += format_double(m.atom(i).y);
        }
        out += ',';
        out += format_double(m.weight(i));
        out += '\n';
    }
    atomic_write(path, out);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline double parse_double(const std::string& s, const std::string& context) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || (end && *end != '\0' && *end != '\r'))
        throw ParseError("bad number '" + s + "' in " + context);
    return v;
}

}  // namespace detail

inline DiscreteMeasure read_atoms_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty atom file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    int dim = 0;
    if (line == "x,weight") dim = 1;
    else if (line == "x,y,weight") dim = 2;
    else throw ParseError("unrecognized atom CSV header: " + line);

    std::vector<Point> atoms;
    std::vector<double> weights;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != static_cast<std::size_t>(dim) + 1)
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(dim + 1) + " fields");
        const std::string context = path + " row " + std::to_string(row);
        Point a{detail::parse_double(fields[0], context), 0.0};
        if (dim == 2) a.y = detail::parse_double(fields[1], context);
        atoms.push_back(a);
        weights.push_back(detail::parse_double(fields.back(), context));
        ++row;
    }
    return DiscreteMeasure(dim, std::move(atoms), std::move(weights));
}

/// CDF table of a 1-D measure: header "x,cdf", one row per distinct atom
/// position in increasing order.
inline void write_cdf_csv(const DiscreteMeasure& m, const std::string& path) {
    if (m.dim() != 1) throw DimensionMismatch("write_cdf_csv: 1-D only");
    const DiscreteMeasure c = canonicalize(m);
    std::string out = "x,cdf\n";
    NeumaierSum cdf;
    for (std::size_t i = 0; i < c.size(); ++i) {
        cdf.add(c.weight(i));
        out += format_double(c.atom(i).x);
        out += ',';
        out += format_double(cdf.value());
        out += '\n';
    }
    atomic_write(path, out);
}

/// Sample points as CSV, header "x" or "x,y".
inline void write_samples_csv(const SampleBatch& batch, const std::string& path) {
    std::string out = batch.dim == 1 ? "x\n" : "x,y\n";
    for (const Point& p : batch.points) {
        out += format_double(p.x);
        if (batch.dim == 2) {
            out += ',';
            out += format_double(p.y);
        }
        out += '\n';
    }
    atomic_write(path, out);
}

/// Escape-study table, header "p,mass".
inline void write_escape_csv(const std::vector<EscapeRow>& rows, const std::string& path) {
    std::string out = "p,mass\n";
    for (const EscapeRow& r : rows) {
        out += format_double(r.p);
        out += ',';
        out += format_double(r.mass);
        out += '\n';
    }
    atomic_write(path, out);
}

/// Closed-interval probe table, header "p,w1".
inline void write_closed_csv(const std::vector<ClosedIntervalRow>& rows,
                             const std::string& path) {
    std::string out = "p,w1\n";
    for (const ClosedIntervalRow& r : rows) {
        out += format_double(r.p);
        out += ',';
        out += format_double(r.w1_to_right_endpoint);
        out += '\n';
    }
    atomic_write(path, out);
}

enum class RenderScale { linear, log };

/// Renders a planar measure as a binary PGM (P5) density image. Pixel values
/// scale against the heaviest cell, linearly or through log(1 + mass).
/// Byte-exact for identical inputs. Top image row is the max-y cell row.
inline void render_density(const DiscreteMeasure& m, const Box& box,
                           std::array<std::size_t, 2> resolution, RenderScale scale,
                           const std::string& path, std::ostream* diagnostics = nullptr) {
    if (m.dim() != 2) throw DimensionMismatch("render_density: 2-D only");
    const GridMeasure g = discretize_to_grid(m, box, resolution);
    const std::size_t w = g.resolution[0];
    const std::size_t h = g.resolution[1];

    auto shade = [scale](double v) {
        return scale == RenderScale::log ? std::log1p(v) : v;
    };
    double max_cell = 0.0;
    for (double c : g.cells) max_cell = std::max(max_cell, c);
    if (max_cell == 0.0 && diagnostics)
        *diagnostics << "warning: no mass inside the render box (escaped "
                     << format_double(g.escaped_mass) << ")\n";
    const double denom = max_cell > 0.0 ? shade(max_cell) : 1.0;

    std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    out.reserve(out.size() + w * h);
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t iy = h - 1 - row;
        for (std::size_t ix = 0; ix < w; ++ix) {
            const double v = g.cells[ix + w * iy];
            const int pixel =
                v <= 0.0 ? 0 : static_cast<int>(std::floor(255.0 * shade(v) / denom));
            out += static_cast<char>(std::clamp(pixel, 0, 255));
        }
    }
    atomic_write(path, out);
}

}  // namespace orbital::io
