// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "moeplan/io.hpp"
#include "moeplan/solver.hpp"

using namespace moeplan;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

MacroTarget row1_triad() {
    const ResourceMetrics m = compute_metrics(test_helpers::grid_row1_config());
    MacroTarget t;
    t.m = static_cast<double>(m.m);
    t.n_a = static_cast<double>(m.n_a);
    t.n = static_cast<double>(m.n);
    t.preset = preset_by_name("1e18");
    return t;
}

/// Component-wise mean triad of one fixture table, a stand-in for the
/// fixed target its rows were generated from.
MacroTarget table_centroid(int table_id) {
    const auto rows =
        parse_corpus_csv(read_text_file(test_helpers::tables_dir() + "/" +
                                        corpus_table_filename(table_id)));
    double m = 0, na = 0, n = 0;
    for (const auto& r : rows) {
        const ResourceMetrics met = compute_metrics(corpus_row_config(r));
        m += static_cast<double>(met.m);
        na += static_cast<double>(met.n_a);
        n += static_cast<double>(met.n);
    }
    const double k = static_cast<double>(rows.size());
    MacroTarget t;
    t.m = m / k;
    t.n_a = na / k;
    t.n = n / k;
    t.preset = preset_by_name(rows.front().scale);
    return t;
}

} // namespace

TEST_CASE("hardware rounding: nearest multiple, ties up, clamped to a quantum") {
    REQUIRE(hardware_round(168.4, 8) == 168);
    REQUIRE(hardware_round(12.0, 8) == 16); // tie resolves to the larger multiple
    REQUIRE(hardware_round(3.9, 8) == 8);   // clamped to one quantum
    REQUIRE(hardware_round(24.0, 16) == 32);
    REQUIRE(hardware_round(47.9, 32) == 32);
    REQUIRE_THROWS_AS(hardware_round(10.0, 7), DomainError);
    REQUIRE_THROWS_AS(hardware_round(-1.0, 8), DomainError);
    REQUIRE_THROWS_AS(hardware_round(0.0, 8), DomainError);
}

TEST_CASE("structural inversion lands exactly on the generating row") {
    const StructuralSolution s = solve_structure(row1_triad(), 1496);
    REQUIRE(s.accepted());
    REQUIRE(s.config.layers() == 3);
    REQUIRE(s.config.l_d == 1);
    REQUIRE(s.config.l_m == 2);
    REQUIRE(s.config.d_m == 168);
    REQUIRE(s.config.d_d == 4488);
    REQUIRE(s.deviation_m == 0.0);
    REQUIRE(s.deviation_na == 0.0);
    REQUIRE(s.deviation_n == 0.0);

    // The real-valued solution lands on integers; the trace shows it.
    REQUIRE(s.rounding_trace.size() == 3);
    REQUIRE(s.rounding_trace[0].field == "l");
    REQUIRE(s.rounding_trace[0].exact == 3.0);
    REQUIRE(s.rounding_trace[1].field == "l_m");
    REQUIRE(s.rounding_trace[1].exact == 2.0);
    REQUIRE(s.rounding_trace[2].field == "d_m");
    REQUIRE(s.rounding_trace[2].exact == 168.0);
}

TEST_CASE("no MoE mass and attention-floor budgets are infeasible") {
    MacroTarget t = row1_triad();
    t.n = t.n_a;
    REQUIRE(solve_structure(t, 1496).status == SolveStatus::infeasible_shape);

    t = row1_triad();
    t.m = 6.0 * t.n_a;
    REQUIRE(solve_structure(t, 1496).status == SolveStatus::infeasible_m);
}

TEST_CASE("solve_structure rejects a hidden dimension off the quantum lattice") {
    REQUIRE_THROWS_AS(solve_structure(row1_triad(), 1497), DomainError);
    REQUIRE_THROWS_AS(solve_structure(row1_triad(), 0), DomainError);
}

TEST_CASE("ratio coordinates convert to raw targets on the open box") {
    const ScalePreset& p = preset_by_name("1e18");
    const MacroTarget t = ratios_to_macro(0.2672e9, 7.0, 12.0, p);
    REQUIRE_THAT(t.n_a, WithinRel(38171428.5714285714, 1e-12));
    REQUIRE_THAT(t.n, WithinRel(458057142.857142857, 1e-12));

    REQUIRE_THROWS_WITH(ratios_to_macro(0.2672e9, 6.0, 12.0, p),
                        Catch::Matchers::ContainsSubstring("exceed the open bound 6"));
    REQUIRE_THROWS_WITH(ratios_to_macro(0.2672e9, 7.0, 289.0 / 9.0, p),
                        Catch::Matchers::ContainsSubstring("(n_e+1)/(k+1)"));
    REQUIRE_THROWS_AS(ratios_to_macro(0.2672e9, 7.0, 1.0, p), DomainError);
}

TEST_CASE("feasible interval around the anchor row") {
    const FeasibleInterval iv = feasible_d_interval(row1_triad());
    REQUIRE_FALSE(iv.empty());
    REQUIRE(std::find(iv.feasible.begin(), iv.feasible.end(), 1496) != iv.feasible.end());
    REQUIRE(iv.d_min <= 1496);
    REQUIRE(iv.d_max >= 1496);
    REQUIRE(iv.d_min <= iv.d_median);
    REQUIRE(iv.d_median <= iv.d_max);
    // Every member admits an accepted solution (independent per-d re-solve).
    for (Count d : iv.feasible) REQUIRE(solve_structure(row1_triad(), d).accepted());
    // Lower median of an even-cardinality set.
    REQUIRE(iv.d_median == iv.feasible[(iv.feasible.size() - 1) / 2]);
}

TEST_CASE("feasible set is exactly the set solve_structure accepts") {
    const MacroTarget t = row1_triad();
    const FeasibleInterval iv = feasible_d_interval(t);
    SolverOptions opt;
    size_t idx = 0;
    for (Count d = opt.quantum; d <= opt.d_cap; d += opt.quantum) {
        const bool in_set = idx < iv.feasible.size() && iv.feasible[idx] == d;
        REQUIRE(solve_structure(t, d).accepted() == in_set);
        if (in_set) ++idx;
    }
    REQUIRE(idx == iv.feasible.size());
}

TEST_CASE("infeasible targets yield an empty interval") {
    MacroTarget t = row1_triad();
    t.n = t.n_a - 1.0;
    REQUIRE(feasible_d_interval(t).empty());
}

TEST_CASE("widening total parameters keeps the lower end on the lattice") {
    const MacroTarget base = row1_triad();
    for (double scale : {1.0, 1.02, 1.05, 1.10, 1.20}) {
        MacroTarget t = base;
        t.n = base.n * scale;
        const FeasibleInterval iv = feasible_d_interval(t);
        REQUIRE_FALSE(iv.empty());
        REQUIRE(iv.d_min >= 8);
        REQUIRE(iv.d_min % 8 == 0);
    }
}

TEST_CASE("accepted solutions stay within the tolerance in every component") {
    const ScalePreset& p = preset_by_name("1e19");
    test_helpers::Lcg rng(7);
    int accepted = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const double mna = rng.uniform(6.5, 17.5);
        const double nna = rng.uniform(8.0, 31.0);
        const MacroTarget t =
            ratios_to_macro(static_cast<double>(p.m_target), mna, nna, p);
        const FeasibleInterval iv = feasible_d_interval(t);
        if (iv.empty()) continue;
        const StructuralSolution s = solve_structure(t, iv.d_median);
        REQUIRE(s.accepted());
        REQUIRE(s.deviation_m <= 0.05);
        REQUIRE(s.deviation_na <= 0.05);
        REQUIRE(s.deviation_n <= 0.05);
        ++accepted;
    }
    REQUIRE(accepted > 10);
}

TEST_CASE("width-ratio solve recovers the anchor family") {
    const double rho = width_ratio(test_helpers::grid_row1_config()); // 9*168/1496
    const StructuralSolution s = solve_by_width_ratio(row1_triad(), rho);
    REQUIRE(s.accepted());
    REQUIRE(s.config.d == 1496);
    REQUIRE(s.config.d_m == 168);
    // Achieved ratio within one quantum of d_m rounding.
    const double achieved = width_ratio(s.config);
    REQUIRE(std::fabs(achieved - rho) <=
            9.0 * 4.0 / static_cast<double>(s.config.d));
}

TEST_CASE("width-ratio solve rejects degenerate widths") {
    const StructuralSolution s = solve_by_width_ratio(row1_triad(), 1e-3);
    REQUIRE_FALSE(s.accepted());
    REQUIRE_THAT(s.reason, Catch::Matchers::ContainsSubstring("infeasible-ratio"));
    REQUIRE_THROWS_AS(solve_by_width_ratio(row1_triad(), -1.0), DomainError);
}

TEST_CASE("width-ratio grid is accepted on all six scale targets") {
    // Table-derived stand-ins for the per-scale optimal triads.
    int accepted = 0;
    for (int table_id : {12, 13, 14, 15, 16, 17}) {
        const MacroTarget t = table_centroid(table_id);
        for (double rho : {3.0, 3.5, 4.0, 4.5, 5.0}) {
            const StructuralSolution s = solve_by_width_ratio(t, rho);
            if (s.accepted()) ++accepted;
        }
    }
    REQUIRE(accepted == 30);
}

TEST_CASE("aligned-dense mode inverts its own accounting") {
    // A config obeying d_d = (k+1)*d_m.
    ArchConfig c = test_helpers::grid_row1_config();
    c.d = 512;
    c.l_d = 2;
    c.l_m = 6;
    c.d_m = 64;
    c.d_d = 9 * 64;
    c.gamma = static_cast<double>(c.d_d) / static_cast<double>(c.d);
    const ResourceMetrics m = compute_metrics(c);

    MacroTarget t;
    t.m = static_cast<double>(m.m);
    t.n_a = static_cast<double>(m.n_a);
    t.n = static_cast<double>(m.n);
    t.preset = preset_by_name("1e18");

    SolverOptions opt;
    opt.align_dense_to_moe = true;
    const StructuralSolution s = solve_structure(t, 512, opt);
    REQUIRE(s.accepted());
    REQUIRE(s.config.l_d == 2);
    REQUIRE(s.config.l_m == 6);
    REQUIRE(s.config.d_m == 64);
    REQUIRE(s.config.d_d == 576);
    REQUIRE(s.deviation_m == 0.0);
}

TEST_CASE("solver round trip over a sample of fixture rows") {
    for (int table_id : {6, 9, 11, 12, 18, 19}) {
        const auto rows =
            parse_corpus_csv(read_text_file(test_helpers::tables_dir() + "/" +
                                            corpus_table_filename(table_id)));
        for (const auto& row : rows) {
            const ResourceMetrics met = compute_metrics(corpus_row_config(row));
            MacroTarget t;
            t.m = static_cast<double>(met.m);
            t.n_a = static_cast<double>(met.n_a);
            t.n = static_cast<double>(met.n);
            t.preset = preset_by_name(row.scale);
            const StructuralSolution s = solve_structure(t, row.d);
            REQUIRE(s.accepted());
            REQUIRE(s.config.l_d == row.l_d);
            REQUIRE(s.config.l_m == row.l_m);
            REQUIRE(s.config.d_m == row.d_m);
        }
    }
}
