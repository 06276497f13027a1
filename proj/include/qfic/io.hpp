// Copyright 2026 The qfic Authors
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

#pragma once

// JSON and CSV encodings of protocol results.
//
// CSV output is locale-independent ('.' decimal separator). Lines starting
// with '#' are metadata comments and are skipped by the readers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "qfic/compression.hpp"
#include "qfic/estimation.hpp"
#include "qfic/photonic.hpp"
#include "qfic/qfi.hpp"

namespace qfic {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class ParseError : public std::runtime_error {
   public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

   private:
    std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

}  // namespace detail

/// Reads "E,p" rows. A leading non-numeric row is taken as a header.
/// Probabilities must be non-negative and sum to 1 within `tol`; they are
/// then renormalized exactly.
inline EnergyDistribution read_distribution(std::istream& in, double tol = 1e-9) {
    std::vector<EnergyLevel> levels;
    std::string line;
    std::size_t lineno = 0;
    bool seen_row = false;
    double total = 0.0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v = detail::trim(line);
        if (v.empty() || v.front() == '#') {
            continue;
        }
        auto fields = detail::split_fields(v);
        if (fields.size() != 2) {
            throw ParseError(lineno, "expected two comma-separated fields (E, p)");
        }
        EnergyLevel lvl;
        const bool ok = detail::parse_number(fields[0], lvl.energy) && detail::parse_number(fields[1], lvl.probability);
        if (!ok) {
            if (!seen_row && levels.empty()) {
                seen_row = true;
                continue;
            }
            throw ParseError(lineno, "malformed number");
        }
        seen_row = true;
        if (lvl.probability < 0.0) {
            throw ParseError(lineno, "negative probability");
        }
        total += lvl.probability;
        levels.push_back(lvl);
    }
    if (levels.empty()) {
        throw ParseError(lineno, "no distribution rows");
    }
    if (std::abs(total - 1.0) > tol) {
        throw std::invalid_argument("distribution probabilities sum to " + format_double(total));
    }
    return EnergyDistribution::from_weights(std::move(levels));
}

/// Angles are written in degrees. Values within rounding noise of a 1e-9
/// degree grid are snapped to it, so -87.5 does not print as -87.49999999999999.
inline void write_count_records(std::ostream& out, std::span<const CountRecord> records) {
    out << "theta_deg,n_plus,n_minus,duration_s\n";
    for (const auto& r : records) {
        const double raw = r.theta_set * 180.0 / kPi;
        const double grid = std::round(raw * 1e9) / 1e9;
        const double deg = std::abs(grid - raw) <= 1e-13 * std::max(1.0, std::abs(raw)) ? grid : raw;
        out << format_double(deg == 0.0 ? 0.0 : deg) << ',' << r.n_plus << ',' << r.n_minus << ','
            << format_double(r.duration) << '\n';
    }
}

inline std::vector<CountRecord> read_count_records(std::istream& in) {
    std::vector<CountRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v = detail::trim(line);
        if (v.empty() || v.front() == '#') {
            continue;
        }
        if (!header) {
            header = true;
            if (v != "theta_deg,n_plus,n_minus,duration_s") {
                throw ParseError(lineno, "expected header theta_deg,n_plus,n_minus,duration_s");
            }
            continue;
        }
        auto f = detail::split_fields(v);
        if (f.size() != 4) {
            throw ParseError(lineno, "expected four fields");
        }
        CountRecord r;
        double deg = 0.0;
        if (!detail::parse_number(f[0], deg) || !detail::parse_number(f[1], r.n_plus) ||
            !detail::parse_number(f[2], r.n_minus) || !detail::parse_number(f[3], r.duration)) {
            throw ParseError(lineno, "malformed number");
        }
        if (r.n_plus < 0 || r.n_minus < 0) {
            throw ParseError(lineno, "negative count");
        }
        r.theta_set = deg * kPi / 180.0;
        out.push_back(r);
    }
    return out;
}

inline Json to_json(const CascadeResult& r) {
    Json bits = Json::array();
    for (int b : r.outcome_bits) {
        bits.push_back(b);
    }
    return Json{{"bits", bits},
                {"k", r.k_zero_count},
                {"phase", r.final_phase.radians()},
                {"probability", r.probability},
                {"branch_qfi", r.common_phase_qfi()}};
}

inline Json to_json(const TwoPointComponent& c) {
    Json support = Json::array();
    Json conditionals = Json::array();
    for (const auto& s : c.support) {
        support.push_back(s.energy);
        conditionals.push_back(s.conditional);
    }
    return Json{{"weight", c.weight}, {"support", support}, {"conditionals", conditionals}, {"mean", c.mean}};
}

inline Json to_json(const EnergyDistribution& d) {
    Json rows = Json::array();
    for (const auto& e : d.entries()) {
        rows.push_back(Json{{"energy", e.energy}, {"probability", e.probability}});
    }
    return rows;
}

inline Json to_json(const CompressionEnsemble& e) {
    Json comps = Json::array();
    for (const auto& c : e.components) {
        comps.push_back(to_json(c));
    }
    Json ops = Json::array();
    for (const auto& m : e.measurement_ops) {
        Json diag = Json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            diag.push_back(m(i, i).real());
        }
        ops.push_back(diag);
    }
    return Json{{"parent", to_json(e.parent)}, {"components", comps}, {"measurement_diagonals", ops}};
}

/// Rebuilds an ensemble from `to_json` output; the measurement is recomputed.
inline CompressionEnsemble ensemble_from_json(const Json& j) {
    CompressionEnsemble e;
    std::vector<EnergyLevel> levels;
    for (const auto& row : j.at("parent")) {
        levels.push_back({row.at("energy").get<double>(), row.at("probability").get<double>()});
    }
    e.parent = EnergyDistribution(std::move(levels), kTolerances.algebraic);
    for (const auto& c : j.at("components")) {
        TwoPointComponent comp;
        comp.weight = c.at("weight").get<double>();
        comp.mean = c.at("mean").get<double>();
        const auto& sup = c.at("support");
        const auto& cond = c.at("conditionals");
        if (sup.size() != cond.size()) {
            throw std::invalid_argument("ensemble_from_json: support and conditionals differ in length");
        }
        for (std::size_t i = 0; i < sup.size(); ++i) {
            const double energy = sup[i].get<double>();
            std::size_t index = e.parent.size();
            for (std::size_t p = 0; p < e.parent.size(); ++p) {
                if (e.parent[p].energy == energy) {
                    index = p;
                }
            }
            if (index == e.parent.size()) {
                throw std::invalid_argument("ensemble_from_json: support energy not in parent");
            }
            comp.support.push_back({index, energy, cond[i].get<double>()});
        }
        e.components.push_back(std::move(comp));
    }
    e.measurement_ops = build_measurement(e);
    return e;
}

inline Json to_json(const FusionTreeStats& s) {
    Json phases = Json::array();
    for (const auto& [key, count] : s.phase_histogram) {
        phases.push_back(Json{{"multiplier", key.first}, {"pi_shift_bit", key.second}, {"count", count}});
    }
    return Json{{"n", s.n},
                {"theta", s.theta.radians()},
                {"trials", s.trials},
                {"depth_histogram", s.depth_histogram},
                {"survivor_histogram", s.survivor_histogram},
                {"max_depth", s.max_depth},
                {"max_survivors", s.max_survivors},
                {"mean_total_qfi", s.mean_total_qfi},
                {"mean_classical_bits", s.mean_classical_bits},
                {"fusions", s.fusions},
                {"discards", s.discards},
                {"survivor_phases", phases}};
}

inline Json to_json(const EstimationRecord& r, bool include_estimates = false) {
    Json j{{"theta_true", r.theta_true},
           {"theta_true_deg", r.theta_true * 180.0 / kPi},
           {"trials", r.estimates.size()},
           {"mean_photons", r.mean_photons},
           {"mean_error", r.mean_error},
           {"std", r.std_dev},
           {"rmse", r.rmse},
           {"bias", r.bias},
           {"sqrt_n_std", r.scaled_std()},
           {"sqrt_n_rmse", r.scaled_rmse()},
           {"sqrt_n_bias", r.scaled_bias()}};
    if (include_estimates) {
        j["estimates"] = r.estimates;
    }
    return j;
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out << contents;
        if (!out) {
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

}  // namespace qfic
