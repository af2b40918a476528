// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// Consistency checks over the bundled reference configuration corpus:
// accounting anchors, the per-scale FLOPs/token deviation bound, exact solver
// round trips, and unique grid-cell assignment for the grid tables.

#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "moeplan/arch.hpp"
#include "moeplan/io.hpp"
#include "moeplan/presets.hpp"
#include "moeplan/region.hpp"
#include "moeplan/solver.hpp"

namespace moeplan {

struct DeviationViolation {
    int table_id = 0;
    size_t row = 0; // 1-based within the table
    std::string scale;
    Count d = 0;
    double deviation = 0;
};

struct CorpusValidation {
    size_t rows_checked = 0;
    size_t roundtrip_failures = 0;
    std::vector<std::string> errors; // structural problems (bad counts, anchors, ...)
    std::vector<DeviationViolation> m_deviation_violations; // rows beyond the bound
    double worst_m_deviation = 0;
    double m_deviation_bound = 0.05;

    bool ok() const {
        return errors.empty() && roundtrip_failures == 0 &&
               m_deviation_violations.empty();
    }
};

/// Validate the fixture tables in `dir` against the accounting formulas, the
/// per-scale FLOPs/token bound, and the exact solver round trip.
inline CorpusValidation validate_corpus(const std::string& dir,
                                        const SolverOptions& opt = {}) {
    CorpusValidation rep;

    // Preset fixture must match the shipped constants.
    try {
        const CsvTable t = parse_csv(read_text_file(dir + "/table05.csv"), "table05");
        if (t.rows.size() != scale_presets().size())
            rep.errors.push_back("table05.csv: expected " +
                                 std::to_string(scale_presets().size()) + " presets");
        for (size_t i = 0; i < t.rows.size() && i < scale_presets().size(); ++i) {
            const auto& row = t.rows[i];
            const ScalePreset& p = scale_presets()[i];
            if (row[0] != p.name ||
                parse_double(row[1], "table05") != p.c ||
                parse_count(row[2], "table05") != p.m_target ||
                parse_double(row[3], "table05") != p.d_tokens ||
                parse_count(row[4], "table05") != p.d_qkv ||
                parse_count(row[5], "table05") != p.n_q ||
                parse_count(row[6], "table05") != p.n_kv ||
                parse_count(row[7], "table05") != p.s ||
                parse_count(row[8], "table05") != p.k ||
                parse_count(row[9], "table05") != p.n_e ||
                parse_double(row[10], "table05") != p.lr ||
                parse_count(row[11], "table05") != p.batch ||
                parse_double(row[12], "table05") != p.n_over_na)
                rep.errors.push_back("table05.csv: row " + std::to_string(i + 1) +
                                     " disagrees with the shipped preset " + p.name);
            // The (m, d) pair of each preset must multiply back to c.
            const double ratio = static_cast<double>(p.m_target) * p.d_tokens / p.c;
            if (std::fabs(ratio - 1.0) > 0.005)
                rep.errors.push_back("preset " + p.name + ": m*d/c = " +
                                     format_double(ratio) + " drifts beyond 0.5%");
        }
    } catch (const std::exception& e) {
        rep.errors.push_back(e.what());
    }

    std::vector<CorpusTable> tables;
    try {
        tables = load_corpus(dir);
    } catch (const std::exception& e) {
        rep.errors.push_back(e.what());
        return rep;
    }

    for (const auto& table : tables) {
        for (size_t i = 0; i < table.rows.size(); ++i) {
            const CorpusRow& row = table.rows[i];
            const ScalePreset& p = preset_by_name(row.scale);
            const ArchConfig cfg = corpus_row_config(row);
            const ResourceMetrics met = compute_metrics(cfg);
            ++rep.rows_checked;

            const double dev =
                std::fabs(static_cast<double>(met.m) - static_cast<double>(p.m_target)) /
                static_cast<double>(p.m_target);
            rep.worst_m_deviation = std::max(rep.worst_m_deviation, dev);
            if (dev > rep.m_deviation_bound)
                rep.m_deviation_violations.push_back(
                    {table.table_id, i + 1, row.scale, row.d, dev});

            // Exact round trip: re-solving the row's own triad at its own d
            // must reproduce (l_d, l_m, d_m) exactly.
            MacroTarget t;
            t.m = static_cast<double>(met.m);
            t.n_a = static_cast<double>(met.n_a);
            t.n = static_cast<double>(met.n);
            t.preset = p;
            const StructuralSolution s = solve_structure(t, row.d, opt);
            if (!s.accepted() || s.config.l_d != row.l_d || s.config.l_m != row.l_m ||
                s.config.d_m != row.d_m)
                ++rep.roundtrip_failures;
        }

        // Grid tables: each row must sit nearest to exactly one default cell.
        if (table.table_id >= 6 && table.table_id <= 11) {
            for (size_t i = 0; i < table.rows.size(); ++i) {
                const ResourceMetrics met = compute_metrics(corpus_row_config(table.rows[i]));
                try {
                    nearest_grid_index(met.m_over_na, default_m_grid());
                    nearest_grid_index(met.n_over_na, default_n_grid());
                } catch (const DomainError& e) {
                    rep.errors.push_back("table " + std::to_string(table.table_id) +
                                         " row " + std::to_string(i + 1) +
                                         ": ambiguous grid cell: " + e.what());
                }
            }
        }

        // Hand-verified accounting anchors for the first grid table.
        if (table.table_id == 6) {
            const ResourceMetrics a = compute_metrics(corpus_row_config(table.rows[0]));
            if (a.m != 260712576 || a.n_a != 37160640 || a.n != 459391680)
                rep.errors.push_back("table 6 row 1 anchors disagree with the accounting");
            for (const auto& row : table.rows) {
                if (row.d != 432) continue;
                const ResourceMetrics b = compute_metrics(corpus_row_config(row));
                if (b.m != 257591808 || b.n_a != 36640512 || b.n != 1093347072)
                    rep.errors.push_back("table 6 d=432 anchors disagree with the accounting");
            }
        }
    }
    return rep;
}

inline std::string validation_summary(const CorpusValidation& rep) {
    std::ostringstream os;
    os << "corpus rows checked: " << rep.rows_checked << "\n";
    os << "solver round-trip failures: " << rep.roundtrip_failures << "\n";
    os << "worst flops/token deviation: " << format_double(100.0 * rep.worst_m_deviation)
       << "% (bound " << format_double(100.0 * rep.m_deviation_bound) << "%)\n";
    os << "rows beyond the deviation bound: " << rep.m_deviation_violations.size() << "\n";
    for (const auto& v : rep.m_deviation_violations)
        os << "  table " << v.table_id << " row " << v.row << " (scale " << v.scale
           << ", d " << v.d << "): " << format_double(100.0 * v.deviation) << "%\n";
    for (const auto& e : rep.errors) os << "  error: " << e << "\n";
    os << (rep.ok() ? "corpus validation: OK" : "corpus validation: FAILED") << "\n";
    return os.str();
}

} // namespace moeplan
