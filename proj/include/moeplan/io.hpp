// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// File formats: JSON serialization for every public object and the CSV
// schemas used for plot data and fixtures. Doubles are written in
// shortest-round-trip form so re-ingesting an emitted file reproduces the
// in-memory values bit-identically.

#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "moeplan/arch.hpp"
#include "moeplan/errors.hpp"
#include "moeplan/fit.hpp"
#include "moeplan/laws.hpp"
#include "moeplan/presets.hpp"
#include "moeplan/region.hpp"
#include "moeplan/search.hpp"
#include "moeplan/solver.hpp"

namespace moeplan {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// number formatting and parsing
// ---------------------------------------------------------------------------

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const char* ctx) {
    double v = 0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw InputError(std::string(ctx) + ": cannot parse number '" + s + "'");
    return v;
}

inline Count parse_count(const std::string& s, const char* ctx) {
    Count v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw InputError(std::string(ctx) + ": cannot parse integer '" + s + "'");
    return v;
}

// ---------------------------------------------------------------------------
// CSV plumbing
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable parse_csv(const std::string& text, const char* ctx) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
        } else {
            if (cells.size() != t.header.size())
                throw InputError(std::string(ctx) + ": line " + std::to_string(line_no) +
                                 " has " + std::to_string(cells.size()) +
                                 " fields, expected " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw InputError(std::string(ctx) + ": empty CSV");
    return t;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << text;
}

// ---------------------------------------------------------------------------
// JSON: architecture and solver types
// ---------------------------------------------------------------------------

inline void to_json(json& j, const ArchConfig& c) {
    j = json{{"d", c.d},         {"l_d", c.l_d},     {"l_m", c.l_m},
             {"d_d", c.d_d},     {"d_m", c.d_m},     {"d_qkv", c.d_qkv},
             {"n_q", c.n_q},     {"n_kv", c.n_kv},   {"s", c.s},
             {"n_e", c.n_e},     {"k", c.k},         {"gamma", c.gamma}};
    j["vocab_size"] = c.vocab_size ? json(*c.vocab_size) : json(nullptr);
}

inline void from_json(const json& j, ArchConfig& c) {
    j.at("d").get_to(c.d);
    j.at("l_d").get_to(c.l_d);
    j.at("l_m").get_to(c.l_m);
    j.at("d_d").get_to(c.d_d);
    j.at("d_m").get_to(c.d_m);
    j.at("d_qkv").get_to(c.d_qkv);
    j.at("n_q").get_to(c.n_q);
    j.at("n_kv").get_to(c.n_kv);
    j.at("s").get_to(c.s);
    j.at("n_e").get_to(c.n_e);
    j.at("k").get_to(c.k);
    j.at("gamma").get_to(c.gamma);
    if (j.contains("vocab_size") && !j.at("vocab_size").is_null())
        c.vocab_size = j.at("vocab_size").get<Count>();
    else
        c.vocab_size.reset();
}

inline void to_json(json& j, const ResourceMetrics& m) {
    j = json{{"m", m.m},
             {"n_a", m.n_a},
             {"n", m.n},
             {"m_over_na", m.m_over_na},
             {"n_over_na", m.n_over_na},
             {"r_a", m.r_a},
             {"r_d", m.r_d},
             {"r_m", m.r_m},
             {"r_m_na", m.r_m_na}};
}

inline void from_json(const json& j, ResourceMetrics& m) {
    j.at("m").get_to(m.m);
    j.at("n_a").get_to(m.n_a);
    j.at("n").get_to(m.n);
    j.at("m_over_na").get_to(m.m_over_na);
    j.at("n_over_na").get_to(m.n_over_na);
    j.at("r_a").get_to(m.r_a);
    j.at("r_d").get_to(m.r_d);
    j.at("r_m").get_to(m.r_m);
    j.at("r_m_na").get_to(m.r_m_na);
}

inline void to_json(json& j, const ScalePreset& p) {
    j = json{{"name", p.name},     {"c", p.c},
             {"m_target", p.m_target}, {"d_tokens", p.d_tokens},
             {"d_qkv", p.d_qkv},   {"n_q", p.n_q},
             {"n_kv", p.n_kv},     {"s", p.s},
             {"k", p.k},           {"n_e", p.n_e},
             {"lr", p.lr},         {"batch", p.batch},
             {"n_over_na", p.n_over_na}};
}

inline void from_json(const json& j, ScalePreset& p) {
    j.at("name").get_to(p.name);
    j.at("c").get_to(p.c);
    j.at("m_target").get_to(p.m_target);
    j.at("d_tokens").get_to(p.d_tokens);
    j.at("d_qkv").get_to(p.d_qkv);
    j.at("n_q").get_to(p.n_q);
    j.at("n_kv").get_to(p.n_kv);
    j.at("s").get_to(p.s);
    j.at("k").get_to(p.k);
    j.at("n_e").get_to(p.n_e);
    j.at("lr").get_to(p.lr);
    j.at("batch").get_to(p.batch);
    j.at("n_over_na").get_to(p.n_over_na);
}

inline void to_json(json& j, const MacroTarget& t) {
    j = json{{"m", t.m}, {"n_a", t.n_a}, {"n", t.n}, {"preset", t.preset}};
}

inline void from_json(const json& j, MacroTarget& t) {
    j.at("m").get_to(t.m);
    j.at("n_a").get_to(t.n_a);
    j.at("n").get_to(t.n);
    j.at("preset").get_to(t.preset);
}

inline SolveStatus solve_status_from_string(const std::string& s) {
    for (SolveStatus st : {SolveStatus::accepted, SolveStatus::infeasible_m,
                           SolveStatus::infeasible_shape, SolveStatus::rounding_reject})
        if (to_string(st) == s) return st;
    throw InputError("unknown solve status: " + s);
}

inline void to_json(json& j, const RoundingStep& r) {
    j = json{{"field", r.field}, {"exact", r.exact}, {"rounded", r.rounded}};
}

inline void from_json(const json& j, RoundingStep& r) {
    j.at("field").get_to(r.field);
    j.at("exact").get_to(r.exact);
    j.at("rounded").get_to(r.rounded);
}

inline void to_json(json& j, const StructuralSolution& s) {
    j = json{{"status", to_string(s.status)},
             {"reason", s.reason},
             {"deviation_m", s.deviation_m},
             {"deviation_na", s.deviation_na},
             {"deviation_n", s.deviation_n},
             {"rounding_trace", s.rounding_trace}};
    if (s.accepted()) {
        j["config"] = s.config;
        j["metrics"] = s.achieved;
    } else {
        j["config"] = nullptr;
        j["metrics"] = nullptr;
    }
}

inline void from_json(const json& j, StructuralSolution& s) {
    s.status = solve_status_from_string(j.at("status").get<std::string>());
    j.at("reason").get_to(s.reason);
    j.at("deviation_m").get_to(s.deviation_m);
    j.at("deviation_na").get_to(s.deviation_na);
    j.at("deviation_n").get_to(s.deviation_n);
    j.at("rounding_trace").get_to(s.rounding_trace);
    if (!j.at("config").is_null()) {
        j.at("config").get_to(s.config);
        j.at("metrics").get_to(s.achieved);
    } else {
        s.config = {};
        s.achieved = {};
    }
}

inline void to_json(json& j, const FeasibleInterval& f) {
    j = json{{"d_min", f.d_min},
             {"d_max", f.d_max},
             {"d_median", f.d_median},
             {"feasible", f.feasible}};
}

inline void from_json(const json& j, FeasibleInterval& f) {
    j.at("d_min").get_to(f.d_min);
    j.at("d_max").get_to(f.d_max);
    j.at("d_median").get_to(f.d_median);
    j.at("feasible").get_to(f.feasible);
}

// ---------------------------------------------------------------------------
// JSON: fit results
// ---------------------------------------------------------------------------

inline void to_json(json& j, const Band& b) {
    j = json{{"x_l", b.x_l},
             {"x_opt", b.x_opt},
             {"x_r", b.x_r},
             {"clipped_lo", b.clipped_lo},
             {"clipped_hi", b.clipped_hi}};
}

inline void from_json(const json& j, Band& b) {
    j.at("x_l").get_to(b.x_l);
    j.at("x_opt").get_to(b.x_opt);
    j.at("x_r").get_to(b.x_r);
    j.at("clipped_lo").get_to(b.clipped_lo);
    j.at("clipped_hi").get_to(b.clipped_hi);
}

inline void to_json(json& j, const FitResult& r) {
    j = json{{"family", to_string(r.family)},
             {"coefficients", r.coefficients},
             {"r_squared", r.r_squared},
             {"residuals", r.residuals},
             {"converged", r.converged},
             {"metadata", r.metadata},
             {"domain_lo", r.domain_lo},
             {"domain_hi", r.domain_hi}};
    j["x_opt"] = r.x_opt ? json(*r.x_opt) : json(nullptr);
    j["band"] = r.band ? json(*r.band) : json(nullptr);
}

inline void from_json(const json& j, FitResult& r) {
    r.family = fit_family_from_string(j.at("family").get<std::string>());
    j.at("coefficients").get_to(r.coefficients);
    j.at("r_squared").get_to(r.r_squared);
    j.at("residuals").get_to(r.residuals);
    j.at("converged").get_to(r.converged);
    j.at("metadata").get_to(r.metadata);
    j.at("domain_lo").get_to(r.domain_lo);
    j.at("domain_hi").get_to(r.domain_hi);
    if (!j.at("x_opt").is_null()) r.x_opt = j.at("x_opt").get<double>();
    else r.x_opt.reset();
    if (!j.at("band").is_null()) r.band = j.at("band").get<Band>();
    else r.band.reset();
}

// ---------------------------------------------------------------------------
// JSON: lawset and design report
// ---------------------------------------------------------------------------

inline void to_json(json& j, const PowerLaw& p) {
    j = json{{"multiplier", p.multiplier}, {"exponent", p.exponent}};
}

inline void from_json(const json& j, PowerLaw& p) {
    j.at("multiplier").get_to(p.multiplier);
    j.at("exponent").get_to(p.exponent);
}

inline void to_json(json& j, const Law& l) {
    j = json{{"law", l.law},
             {"source", to_string(l.source)},
             {"c_lo", l.c_lo},
             {"c_hi", l.c_hi}};
}

inline void from_json(const json& j, Law& l) {
    j.at("law").get_to(l.law);
    l.source = provenance_from_string(j.at("source").get<std::string>());
    j.at("c_lo").get_to(l.c_lo);
    j.at("c_hi").get_to(l.c_hi);
}

inline void to_json(json& j, const BandLaws& b) {
    j = json{{"d_l", b.d_l},
             {"d_opt", b.d_opt},
             {"d_r", b.d_r},
             {"tolerance", b.tolerance},
             {"source", to_string(b.source)},
             {"c_lo", b.c_lo},
             {"c_hi", b.c_hi}};
}

inline void from_json(const json& j, BandLaws& b) {
    j.at("d_l").get_to(b.d_l);
    j.at("d_opt").get_to(b.d_opt);
    j.at("d_r").get_to(b.d_r);
    j.at("tolerance").get_to(b.tolerance);
    b.source = provenance_from_string(j.at("source").get<std::string>());
    j.at("c_lo").get_to(b.c_lo);
    j.at("c_hi").get_to(b.c_hi);
}

inline void to_json(json& j, const NnaPreset& p) {
    j = json{{"c", p.c}, {"n_over_na", p.n_over_na}};
}

inline void from_json(const json& j, NnaPreset& p) {
    j.at("c").get_to(p.c);
    j.at("n_over_na").get_to(p.n_over_na);
}

inline void to_json(json& j, const LawSet& ls) {
    j = json{{"schema_version", ls.schema_version},
             {"tokens_of_c", ls.tokens_of_c},
             {"flops_of_c", ls.flops_of_c},
             {"nna_presets", ls.nna_presets},
             {"nna_source", to_string(ls.nna_source)}};
    j["mna_of_c"] = ls.mna_of_c ? json(*ls.mna_of_c) : json(nullptr);
    j["d_band_of_c"] = ls.d_band_of_c ? json(*ls.d_band_of_c) : json(nullptr);
}

inline void from_json(const json& j, LawSet& ls) {
    j.at("schema_version").get_to(ls.schema_version);
    if (ls.schema_version != 1)
        throw InputError("unsupported lawset schema version " +
                         std::to_string(ls.schema_version));
    j.at("tokens_of_c").get_to(ls.tokens_of_c);
    j.at("flops_of_c").get_to(ls.flops_of_c);
    j.at("nna_presets").get_to(ls.nna_presets);
    ls.nna_source = provenance_from_string(j.at("nna_source").get<std::string>());
    if (!j.at("mna_of_c").is_null()) ls.mna_of_c = j.at("mna_of_c").get<Law>();
    else ls.mna_of_c.reset();
    if (!j.at("d_band_of_c").is_null()) ls.d_band_of_c = j.at("d_band_of_c").get<BandLaws>();
    else ls.d_band_of_c.reset();
}

inline void to_json(json& j, const ProvValue& v) {
    j = json{{"value", v.value}, {"source", to_string(v.source)}};
}

inline void from_json(const json& j, ProvValue& v) {
    j.at("value").get_to(v.value);
    v.source = provenance_from_string(j.at("source").get<std::string>());
}

inline void to_json(json& j, const DesignReport& r) {
    j = json{{"c", r.c},
             {"preset", r.preset_name},
             {"m", r.m},
             {"d_tokens", r.d_tokens},
             {"lr", r.lr},
             {"batch", r.batch},
             {"training_source", to_string(r.training_source)},
             {"warnings", r.warnings}};
    j["n_a"] = r.n_a ? json(*r.n_a) : json(nullptr);
    j["n"] = r.n ? json(*r.n) : json(nullptr);
    j["d_hidden"] = r.d_hidden ? json(*r.d_hidden) : json(nullptr);
    j["solution"] = r.solution ? json(*r.solution) : json(nullptr);
    j["band_slack"] = r.band_slack ? json(*r.band_slack) : json(nullptr);
}

inline void from_json(const json& j, DesignReport& r) {
    j.at("c").get_to(r.c);
    j.at("preset").get_to(r.preset_name);
    j.at("m").get_to(r.m);
    j.at("d_tokens").get_to(r.d_tokens);
    j.at("lr").get_to(r.lr);
    j.at("batch").get_to(r.batch);
    r.training_source = provenance_from_string(j.at("training_source").get<std::string>());
    j.at("warnings").get_to(r.warnings);
    auto opt_pv = [&](const char* key) -> std::optional<ProvValue> {
        if (j.at(key).is_null()) return {};
        return j.at(key).get<ProvValue>();
    };
    r.n_a = opt_pv("n_a");
    r.n = opt_pv("n");
    r.d_hidden = opt_pv("d_hidden");
    if (!j.at("solution").is_null()) r.solution = j.at("solution").get<StructuralSolution>();
    else r.solution.reset();
    if (!j.at("band_slack").is_null()) r.band_slack = j.at("band_slack").get<double>();
    else r.band_slack.reset();
}

/// Human-readable design summary.
inline std::string design_summary(const DesignReport& r) {
    std::ostringstream os;
    os << "design for compute budget " << format_double(r.c) << " FLOPs (preset "
       << r.preset_name << ")\n";
    os << "  flops/token  " << format_double(r.m.value / 1e9) << " GFLOPs  ["
       << to_string(r.m.source) << "]\n";
    os << "  tokens       " << format_double(r.d_tokens.value / 1e9) << " B  ["
       << to_string(r.d_tokens.source) << "]\n";
    if (r.n_a)
        os << "  active params  " << format_double(r.n_a->value) << "  ["
           << to_string(r.n_a->source) << "]\n";
    if (r.n)
        os << "  total params   " << format_double(r.n->value) << "  ["
           << to_string(r.n->source) << "]\n";
    if (r.d_hidden)
        os << "  hidden dim     " << static_cast<Count>(r.d_hidden->value) << "  ["
           << to_string(r.d_hidden->source) << "]\n";
    if (r.solution && r.solution->accepted()) {
        const ArchConfig& c = r.solution->config;
        os << "  layers         " << c.layers() << " = " << c.l_d << " dense + " << c.l_m
           << " moe\n";
        os << "  expert width   " << c.d_m << " (dense ffn " << c.d_d << ")\n";
        os << "  achieved       m " << r.solution->achieved.m << ", n_a "
           << r.solution->achieved.n_a << ", n " << r.solution->achieved.n << "\n";
        os << "  deviations     m " << format_double(r.solution->deviation_m) << ", n_a "
           << format_double(r.solution->deviation_na) << ", n "
           << format_double(r.solution->deviation_n) << "\n";
    }
    if (r.band_slack)
        os << "  band slack     " << format_double(*r.band_slack) << "\n";
    os << "  lr " << format_double(r.lr) << ", batch " << format_double(r.batch) << "  ["
       << to_string(r.training_source) << "]\n";
    for (const auto& w : r.warnings) os << "  warning: " << w << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// JSON: region and grid
// ---------------------------------------------------------------------------

inline void to_json(json& j, const RegionResolution& r) {
    j = json{{"m_cells", r.m_cells}, {"n_cells", r.n_cells}, {"m_lo", r.m_lo},
             {"m_hi", r.m_hi},       {"n_lo", r.n_lo},       {"n_hi", r.n_hi}};
}

inline void from_json(const json& j, RegionResolution& r) {
    j.at("m_cells").get_to(r.m_cells);
    j.at("n_cells").get_to(r.n_cells);
    j.at("m_lo").get_to(r.m_lo);
    j.at("m_hi").get_to(r.m_hi);
    j.at("n_lo").get_to(r.n_lo);
    j.at("n_hi").get_to(r.n_hi);
}

inline void to_json(json& j, const RegionCell& c) {
    j = json{{"m_over_na", c.m_over_na}, {"n_over_na", c.n_over_na},
             {"n_a", c.n_a},             {"n", c.n},
             {"d_min", c.d_min},         {"d_max", c.d_max},
             {"d_count", c.d_count}};
}

inline void from_json(const json& j, RegionCell& c) {
    j.at("m_over_na").get_to(c.m_over_na);
    j.at("n_over_na").get_to(c.n_over_na);
    j.at("n_a").get_to(c.n_a);
    j.at("n").get_to(c.n);
    j.at("d_min").get_to(c.d_min);
    j.at("d_max").get_to(c.d_max);
    j.at("d_count").get_to(c.d_count);
}

inline void to_json(json& j, const RegionMap& m) {
    j = json{{"m", m.m},
             {"preset", m.preset_name},
             {"resolution", m.resolution},
             {"cells", m.cells}};
}

inline void from_json(const json& j, RegionMap& m) {
    j.at("m").get_to(m.m);
    j.at("preset").get_to(m.preset_name);
    j.at("resolution").get_to(m.resolution);
    j.at("cells").get_to(m.cells);
}

inline std::string region_csv(const RegionMap& m) {
    std::ostringstream os;
    os << "m_over_na,n_over_na,n_a,n,d_min,d_max,d_count\n";
    for (const auto& c : m.cells)
        os << format_double(c.m_over_na) << ',' << format_double(c.n_over_na) << ','
           << format_double(c.n_a) << ',' << format_double(c.n) << ',' << c.d_min << ','
           << c.d_max << ',' << c.d_count << '\n';
    return os.str();
}

inline std::vector<RegionCell> parse_region_csv(const std::string& text) {
    const CsvTable t = parse_csv(text, "region csv");
    const std::vector<std::string> expect = {"m_over_na", "n_over_na", "n_a", "n",
                                             "d_min",     "d_max",     "d_count"};
    if (t.header != expect) throw InputError("region csv: unexpected header");
    std::vector<RegionCell> cells;
    for (const auto& row : t.rows) {
        RegionCell c;
        c.m_over_na = parse_double(row[0], "region csv");
        c.n_over_na = parse_double(row[1], "region csv");
        c.n_a = parse_double(row[2], "region csv");
        c.n = parse_double(row[3], "region csv");
        c.d_min = parse_count(row[4], "region csv");
        c.d_max = parse_count(row[5], "region csv");
        c.d_count = parse_count(row[6], "region csv");
        cells.push_back(c);
    }
    return cells;
}

inline std::string region_cells_csv(const std::vector<RegionCell>& cells) {
    RegionMap tmp;
    tmp.cells = cells;
    return region_csv(tmp);
}

struct GridCsvRow {
    double m_over_na = 0, n_over_na = 0;
    std::string status; // "accepted" or "infeasible"
    Count d = 0, l_d = 0, l_m = 0, d_m = 0, d_d = 0;
    Count m = 0, n_a = 0, n = 0;
    double dev_m = 0, dev_na = 0, dev_n = 0;

    bool operator==(const GridCsvRow&) const = default;
};

inline std::vector<GridCsvRow> grid_rows(const ExperimentGrid& g) {
    std::vector<GridCsvRow> rows;
    for (const auto& p : g.points) {
        GridCsvRow r;
        r.m_over_na = p.m_over_na;
        r.n_over_na = p.n_over_na;
        r.status = to_string(p.solution.status);
        if (p.solution.accepted()) {
            const auto& c = p.solution.config;
            r.d = c.d;
            r.l_d = c.l_d;
            r.l_m = c.l_m;
            r.d_m = c.d_m;
            r.d_d = c.d_d;
            r.m = p.solution.achieved.m;
            r.n_a = p.solution.achieved.n_a;
            r.n = p.solution.achieved.n;
            r.dev_m = p.solution.deviation_m;
            r.dev_na = p.solution.deviation_na;
            r.dev_n = p.solution.deviation_n;
        }
        rows.push_back(r);
    }
    for (const auto& inf : g.infeasible) {
        GridCsvRow r;
        r.m_over_na = inf.m_over_na;
        r.n_over_na = inf.n_over_na;
        r.status = "infeasible";
        rows.push_back(r);
    }
    return rows;
}

inline void to_json(json& j, const GridCsvRow& r) {
    j = json{{"m_over_na", r.m_over_na}, {"n_over_na", r.n_over_na},
             {"status", r.status},       {"d", r.d},
             {"l_d", r.l_d},             {"l_m", r.l_m},
             {"d_m", r.d_m},             {"d_d", r.d_d},
             {"m", r.m},                 {"n_a", r.n_a},
             {"n", r.n},                 {"dev_m", r.dev_m},
             {"dev_na", r.dev_na},       {"dev_n", r.dev_n}};
}

inline void from_json(const json& j, GridCsvRow& r) {
    j.at("m_over_na").get_to(r.m_over_na);
    j.at("n_over_na").get_to(r.n_over_na);
    j.at("status").get_to(r.status);
    j.at("d").get_to(r.d);
    j.at("l_d").get_to(r.l_d);
    j.at("l_m").get_to(r.l_m);
    j.at("d_m").get_to(r.d_m);
    j.at("d_d").get_to(r.d_d);
    j.at("m").get_to(r.m);
    j.at("n_a").get_to(r.n_a);
    j.at("n").get_to(r.n);
    j.at("dev_m").get_to(r.dev_m);
    j.at("dev_na").get_to(r.dev_na);
    j.at("dev_n").get_to(r.dev_n);
}

inline std::string grid_csv(const std::vector<GridCsvRow>& rows) {
    std::ostringstream os;
    os << "m_over_na,n_over_na,status,d,l_d,l_m,d_m,d_d,m,n_a,n,dev_m,dev_na,dev_n\n";
    for (const auto& r : rows)
        os << format_double(r.m_over_na) << ',' << format_double(r.n_over_na) << ','
           << r.status << ',' << r.d << ',' << r.l_d << ',' << r.l_m << ',' << r.d_m
           << ',' << r.d_d << ',' << r.m << ',' << r.n_a << ',' << r.n << ','
           << format_double(r.dev_m) << ',' << format_double(r.dev_na) << ','
           << format_double(r.dev_n) << '\n';
    return os.str();
}

inline std::vector<GridCsvRow> parse_grid_csv(const std::string& text) {
    const CsvTable t = parse_csv(text, "grid csv");
    if (t.header.size() != 14 || t.header[0] != "m_over_na")
        throw InputError("grid csv: unexpected header");
    std::vector<GridCsvRow> rows;
    for (const auto& row : t.rows) {
        GridCsvRow r;
        r.m_over_na = parse_double(row[0], "grid csv");
        r.n_over_na = parse_double(row[1], "grid csv");
        r.status = row[2];
        r.d = parse_count(row[3], "grid csv");
        r.l_d = parse_count(row[4], "grid csv");
        r.l_m = parse_count(row[5], "grid csv");
        r.d_m = parse_count(row[6], "grid csv");
        r.d_d = parse_count(row[7], "grid csv");
        r.m = parse_count(row[8], "grid csv");
        r.n_a = parse_count(row[9], "grid csv");
        r.n = parse_count(row[10], "grid csv");
        r.dev_m = parse_double(row[11], "grid csv");
        r.dev_na = parse_double(row[12], "grid csv");
        r.dev_n = parse_double(row[13], "grid csv");
        rows.push_back(r);
    }
    return rows;
}

struct SweepCsvRow {
    Count d = 0, l_d = 0, l_m = 0, d_m = 0, d_d = 0;
    Count m = 0, n_a = 0, n = 0;
    double dev_m = 0, dev_na = 0, dev_n = 0;

    bool operator==(const SweepCsvRow&) const = default;
};

inline std::vector<SweepCsvRow> sweep_rows(const std::vector<StructuralSolution>& sweep) {
    std::vector<SweepCsvRow> rows;
    for (const auto& s : sweep) {
        SweepCsvRow r;
        r.d = s.config.d;
        r.l_d = s.config.l_d;
        r.l_m = s.config.l_m;
        r.d_m = s.config.d_m;
        r.d_d = s.config.d_d;
        r.m = s.achieved.m;
        r.n_a = s.achieved.n_a;
        r.n = s.achieved.n;
        r.dev_m = s.deviation_m;
        r.dev_na = s.deviation_na;
        r.dev_n = s.deviation_n;
        rows.push_back(r);
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepCsvRow>& rows) {
    std::ostringstream os;
    os << "d,l_d,l_m,d_m,d_d,m,n_a,n,dev_m,dev_na,dev_n\n";
    for (const auto& r : rows)
        os << r.d << ',' << r.l_d << ',' << r.l_m << ',' << r.d_m << ',' << r.d_d << ','
           << r.m << ',' << r.n_a << ',' << r.n << ',' << format_double(r.dev_m) << ','
           << format_double(r.dev_na) << ',' << format_double(r.dev_n) << '\n';
    return os.str();
}

inline std::vector<SweepCsvRow> parse_sweep_csv(const std::string& text) {
    const CsvTable t = parse_csv(text, "sweep csv");
    if (t.header.size() != 11 || t.header[0] != "d")
        throw InputError("sweep csv: unexpected header");
    std::vector<SweepCsvRow> rows;
    for (const auto& row : t.rows) {
        SweepCsvRow r;
        r.d = parse_count(row[0], "sweep csv");
        r.l_d = parse_count(row[1], "sweep csv");
        r.l_m = parse_count(row[2], "sweep csv");
        r.d_m = parse_count(row[3], "sweep csv");
        r.d_d = parse_count(row[4], "sweep csv");
        r.m = parse_count(row[5], "sweep csv");
        r.n_a = parse_count(row[6], "sweep csv");
        r.n = parse_count(row[7], "sweep csv");
        r.dev_m = parse_double(row[8], "sweep csv");
        r.dev_na = parse_double(row[9], "sweep csv");
        r.dev_n = parse_double(row[10], "sweep csv");
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Dataset CSV (x,y[,weight])
// ---------------------------------------------------------------------------

inline std::string dataset_csv(const Dataset1D& d) {
    std::ostringstream os;
    os << (d.w.empty() ? "x,y" : "x,y,weight") << '\n';
    for (size_t i = 0; i < d.x.size(); ++i) {
        os << format_double(d.x[i]) << ',' << format_double(d.y[i]);
        if (!d.w.empty()) os << ',' << format_double(d.w[i]);
        os << '\n';
    }
    return os.str();
}

inline Dataset1D parse_dataset_csv(const std::string& text) {
    const CsvTable t = parse_csv(text, "dataset csv");
    const bool weighted = t.header.size() == 3;
    if (!(t.header.size() == 2 || weighted) || t.header[0] != "x" || t.header[1] != "y" ||
        (weighted && t.header[2] != "weight"))
        throw InputError("dataset csv: header must be x,y[,weight]");
    Dataset1D d;
    for (const auto& row : t.rows) {
        d.x.push_back(parse_double(row[0], "dataset csv"));
        d.y.push_back(parse_double(row[1], "dataset csv"));
        if (weighted) d.w.push_back(parse_double(row[2], "dataset csv"));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Harness CSV
// ---------------------------------------------------------------------------

inline std::string harness_summary_csv(const ProxyValidationReport& rep) {
    std::ostringstream os;
    os << "seed,pearson,spearman,kendall,regret,fit_slope,fit_intercept\n";
    for (const auto& r : rep.replicates)
        os << r.seed << ',' << format_double(r.pearson) << ',' << format_double(r.spearman)
           << ',' << format_double(r.kendall) << ',' << format_double(r.regret) << ','
           << format_double(r.fit_slope) << ',' << format_double(r.fit_intercept) << '\n';
    return os.str();
}

inline std::vector<ProxyReplicate> parse_harness_summary_csv(const std::string& text) {
    const CsvTable t = parse_csv(text, "harness csv");
    if (t.header.size() != 7 || t.header[0] != "seed")
        throw InputError("harness csv: unexpected header");
    std::vector<ProxyReplicate> rows;
    for (const auto& row : t.rows) {
        ProxyReplicate r;
        r.seed = static_cast<std::uint64_t>(parse_count(row[0], "harness csv"));
        r.pearson = parse_double(row[1], "harness csv");
        r.spearman = parse_double(row[2], "harness csv");
        r.kendall = parse_double(row[3], "harness csv");
        r.regret = parse_double(row[4], "harness csv");
        r.fit_slope = parse_double(row[5], "harness csv");
        r.fit_intercept = parse_double(row[6], "harness csv");
        rows.push_back(r);
    }
    return rows;
}

struct ScatterCsvRow {
    std::uint64_t seed = 0;
    double m_over_na = 0, n_over_na = 0;
    double proxy_loss = 0, true_min_loss = 0;

    bool operator==(const ScatterCsvRow&) const = default;
};

inline std::string scatter_csv(const std::vector<ScatterCsvRow>& rows) {
    std::ostringstream os;
    os << "seed,m_over_na,n_over_na,proxy_loss,true_min_loss\n";
    for (const auto& r : rows)
        os << r.seed << ',' << format_double(r.m_over_na) << ','
           << format_double(r.n_over_na) << ',' << format_double(r.proxy_loss) << ','
           << format_double(r.true_min_loss) << '\n';
    return os.str();
}

inline std::vector<ScatterCsvRow> parse_scatter_csv(const std::string& text) {
    const CsvTable t = parse_csv(text, "scatter csv");
    if (t.header.size() != 5 || t.header[0] != "seed")
        throw InputError("scatter csv: unexpected header");
    std::vector<ScatterCsvRow> rows;
    for (const auto& row : t.rows) {
        ScatterCsvRow r;
        r.seed = static_cast<std::uint64_t>(parse_count(row[0], "scatter csv"));
        r.m_over_na = parse_double(row[1], "scatter csv");
        r.n_over_na = parse_double(row[2], "scatter csv");
        r.proxy_loss = parse_double(row[3], "scatter csv");
        r.true_min_loss = parse_double(row[4], "scatter csv");
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Reference configuration corpus (fixture tables)
// ---------------------------------------------------------------------------

struct CorpusRow {
    std::string scale; // preset name, e.g. "1e18"
    Count d = 0, l_d = 0, d_d = 0, l_m = 0, d_m = 0, l = 0;
};

struct CorpusTable {
    int table_id = 0;
    std::vector<CorpusRow> rows;
};

inline std::vector<CorpusRow> parse_corpus_csv(const std::string& text) {
    const CsvTable t = parse_csv(text, "corpus csv");
    const std::vector<std::string> expect = {"scale", "d", "l_d", "d_d", "l_m", "d_m", "l"};
    if (t.header != expect) throw InputError("corpus csv: header must be scale,d,l_d,d_d,l_m,d_m,l");
    std::vector<CorpusRow> rows;
    for (const auto& row : t.rows) {
        CorpusRow r;
        r.scale = row[0];
        r.d = parse_count(row[1], "corpus csv");
        r.l_d = parse_count(row[2], "corpus csv");
        r.d_d = parse_count(row[3], "corpus csv");
        r.l_m = parse_count(row[4], "corpus csv");
        r.d_m = parse_count(row[5], "corpus csv");
        r.l = parse_count(row[6], "corpus csv");
        if (r.l != r.l_d + r.l_m)
            throw InputError("corpus csv: row with l != l_d + l_m (d = " +
                             std::to_string(r.d) + ")");
        rows.push_back(r);
    }
    return rows;
}

/// Fixture table ids shipped with the repo and their transcribed row counts.
inline const std::vector<std::pair<int, size_t>>& corpus_expected_row_counts() {
    static const std::vector<std::pair<int, size_t>> v = {
        {6, 36},  {7, 36},  {8, 36},  {9, 36},  {10, 36}, {11, 36},
        {12, 54}, {13, 40}, {14, 40}, {15, 43}, {16, 42}, {17, 39},
        {18, 49}, {19, 72}, {20, 72}};
    return v;
}

inline std::string corpus_table_filename(int table_id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "table%02d.csv", table_id);
    return buf;
}

inline std::vector<CorpusTable> load_corpus(const std::string& dir) {
    std::vector<CorpusTable> tables;
    for (const auto& [id, expected] : corpus_expected_row_counts()) {
        const std::string path = dir + "/" + corpus_table_filename(id);
        CorpusTable t;
        t.table_id = id;
        t.rows = parse_corpus_csv(read_text_file(path));
        if (t.rows.size() != expected)
            throw InputError(path + ": expected " + std::to_string(expected) +
                             " rows, found " + std::to_string(t.rows.size()));
        tables.push_back(std::move(t));
    }
    return tables;
}

/// Materialize a corpus row as a full ArchConfig using its scale geometry.
inline ArchConfig corpus_row_config(const CorpusRow& r) {
    const ScalePreset& p = preset_by_name(r.scale);
    ArchConfig c;
    c.d = r.d;
    c.l_d = r.l_d;
    c.l_m = r.l_m;
    c.d_d = r.d_d;
    c.d_m = r.d_m;
    c.d_qkv = p.d_qkv;
    c.n_q = p.n_q;
    c.n_kv = p.n_kv;
    c.s = p.s;
    c.n_e = p.n_e;
    c.k = p.k;
    c.gamma = static_cast<double>(r.d_d) / static_cast<double>(r.d);
    return c;
}

} // namespace moeplan
