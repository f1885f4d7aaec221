// Copyright 2026 The rbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RBENCH_IO_HPP
#define RBENCH_IO_HPP

// CSV readers and writers for decay curves and fit reports. Files are written
// to a temporary sibling and renamed into place.

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rbench/analysis.hpp"
#include "rbench/fit.hpp"
#include "rbench/protocol.hpp"

namespace rbench {

/// Writes `path` by filling a temporary file in the same directory and renaming it.
inline void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        try {
            fill(out);
        } catch (...) {
            out.close();
            fs::remove(tmp);
            throw;
        }
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw Error("failed while writing " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

inline void write_decay_csv(std::ostream& out, const DecayCurve& curve) {
    for (const auto& [key, value] : curve.metadata) out << "# " << key << ": " << value << '\n';
    out << "m,f_mean,f_stderr,n_sequences\n";
    for (const auto& p : curve.points) {
        out << p.m << ',' << detail::format_double(p.f_mean) << ',' << detail::format_double(p.f_stderr) << ','
            << p.n_sequences << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double_field(const std::string& s, std::size_t line, const std::string& column) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw ValidationError("line " + std::to_string(line) + ": column '" + column + "' is not a number: '" + s +
                              "'");
    }
    return v;
}

}  // namespace detail

/// Reads the decay schema. Columns m and f_mean are required; f_stderr
/// defaults to 0 (uniform fit weights) and n_sequences to 0. Lines starting
/// with '#' carry `key: value` metadata.
inline DecayCurve read_decay_csv(std::istream& in) {
    DecayCurve curve;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    int col_m = -1, col_f = -1, col_se = -1, col_n = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line.front() == '#') {
            const std::string body = line.substr(line.find_first_not_of("# "));
            const auto colon = body.find(": ");
            if (colon != std::string::npos) curve.metadata.emplace_back(body.substr(0, colon), body.substr(colon + 2));
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (header.empty()) {
            header = fields;
            for (std::size_t i = 0; i < header.size(); ++i) {
                const int idx = static_cast<int>(i);
                if (header[i] == "m") col_m = idx;
                else if (header[i] == "f_mean") col_f = idx;
                else if (header[i] == "f_stderr") col_se = idx;
                else if (header[i] == "n_sequences") col_n = idx;
                else throw ValidationError("line " + std::to_string(lineno) + ": unknown column '" + header[i] + "'");
            }
            if (col_m < 0 || col_f < 0) {
                throw ValidationError("line " + std::to_string(lineno) + ": header must contain columns m and f_mean");
            }
            continue;
        }
        if (fields.size() != header.size()) {
            throw ValidationError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                                  " fields, found " + std::to_string(fields.size()));
        }
        CurvePoint p{};
        const double m = detail::parse_double_field(fields[col_m], lineno, "m");
        if (m != std::floor(m) || m < 1 || m > 1e9) {
            throw ValidationError("line " + std::to_string(lineno) + ": m must be a positive integer");
        }
        p.m = static_cast<int>(m);
        p.f_mean = detail::parse_double_field(fields[col_f], lineno, "f_mean");
        p.f_stderr = col_se >= 0 && !fields[col_se].empty()
                         ? detail::parse_double_field(fields[col_se], lineno, "f_stderr")
                         : 0.0;
        if (p.f_stderr < 0.0) throw ValidationError("line " + std::to_string(lineno) + ": f_stderr is negative");
        if (col_n >= 0 && !fields[col_n].empty()) {
            const double n = detail::parse_double_field(fields[col_n], lineno, "n_sequences");
            if (n < 0 || n != std::floor(n)) {
                throw ValidationError("line " + std::to_string(lineno) + ": n_sequences must be a non-negative integer");
            }
            p.n_sequences = static_cast<std::size_t>(n);
        }
        curve.points.push_back(p);
    }
    if (header.empty()) throw ValidationError("decay CSV has no header line");
    if (curve.points.empty()) throw ValidationError("decay CSV has no data rows");
    return curve;
}

inline DecayCurve read_decay_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return read_decay_csv(in);
}

/// One row of the fit report.
struct FitRow {
    FitResult fit;
    std::optional<double> gamma;
    std::optional<int> validity_m_max;
};

inline void write_fit_csv(std::ostream& out, const std::vector<FitRow>& rows) {
    const auto opt = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
    out << "order,A,B,p,C,q,G,r,residual_rms,converged,gamma,validity_m_max\n";
    for (const auto& row : rows) {
        const auto& f = row.fit;
        out << f.order << ',' << detail::format_double(f.A) << ',' << detail::format_double(f.B) << ','
            << detail::format_double(f.p) << ',' << opt(f.C) << ',' << opt(f.q) << ',' << opt(f.G) << ','
            << detail::format_double(f.r) << ',' << detail::format_double(f.residual_rms) << ','
            << (f.converged ? "true" : "false") << ',' << opt(row.gamma) << ','
            << (row.validity_m_max ? std::to_string(*row.validity_m_max) : std::string()) << '\n';
    }
}

/// Data and model curves with each fit's B subtracted, for semilog plots.
inline void write_offset_csv(std::ostream& out, const DecayCurve& curve, const std::vector<FitResult>& fits) {
    std::vector<CurvePoint> pts = curve.points;
    std::sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.m < b.m; });
    out << "m,f_stderr";
    for (const auto& f : fits) out << ",f_minus_b" << f.order << ",model" << f.order << "_minus_b" << f.order;
    out << '\n';
    for (const auto& p : pts) {
        out << p.m << ',' << detail::format_double(p.f_stderr);
        for (const auto& f : fits) {
            out << ',' << detail::format_double(p.f_mean - f.B) << ',' << detail::format_double(f.evaluate(p.m) - f.B);
        }
        out << '\n';
    }
}

}  // namespace rbench

#endif  // RBENCH_IO_HPP
