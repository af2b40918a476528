// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// Feasible-region enumeration in ratio space at fixed FLOPs/token, the
// default experiment grid over (m/n_a, n/n_a), and hidden-dimension sweeps
// for a fixed target triad.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "moeplan/errors.hpp"
#include "moeplan/presets.hpp"
#include "moeplan/solver.hpp"

namespace moeplan {

inline const std::vector<double>& default_m_grid() {
    static const std::vector<double> g = {7, 8, 9, 11, 14, 17};
    return g;
}

inline const std::vector<double>& default_n_grid() {
    static const std::vector<double> g = {12, 16, 20, 22, 26, 30};
    return g;
}

struct RegionResolution {
    int m_cells = 64, n_cells = 64;
    double m_lo = 6.0, m_hi = 18.0;
    double n_lo = 1.0, n_hi = 0.0; // n_hi <= 0 means the preset expansion limit
};

struct RegionCell {
    double m_over_na = 0, n_over_na = 0; // cell center in ratio space
    double n_a = 0, n = 0;               // implied raw coordinates
    Count d_min = 0, d_max = 0;
    Count d_count = 0;
};

struct RegionMap {
    Count m = 0;
    std::string preset_name;
    RegionResolution resolution;
    std::vector<RegionCell> cells; // row-major over (m index, n index)
};

/// Evaluate the feasible-d geometry on a ratio-space lattice. Cell centers
/// lie strictly inside the admissible open box, so every conversion is valid;
/// infeasible cells are kept with d_count == 0 rather than dropped.
inline RegionMap map_region(Count m, const ScalePreset& preset,
                            RegionResolution res = {},
                            const SolverOptions& opt = {}) {
    if (m <= 0) throw DomainError("map_region: m must be positive");
    if (res.n_hi <= 0) res.n_hi = preset.expansion_limit();
    if (res.m_cells < 1 || res.n_cells < 1)
        throw DomainError("map_region: resolution must be at least 1x1");

    RegionMap out;
    out.m = m;
    out.preset_name = preset.name;
    out.resolution = res;
    out.cells.reserve(static_cast<size_t>(res.m_cells) * res.n_cells);

    const double dm = (res.m_hi - res.m_lo) / res.m_cells;
    const double dn = (res.n_hi - res.n_lo) / res.n_cells;
    bool any = false;
    for (int i = 0; i < res.m_cells; ++i) {
        const double mv = res.m_lo + (i + 0.5) * dm;
        for (int j = 0; j < res.n_cells; ++j) {
            const double nv = res.n_lo + (j + 0.5) * dn;
            RegionCell cell;
            cell.m_over_na = mv;
            cell.n_over_na = nv;
            const MacroTarget t =
                ratios_to_macro(static_cast<double>(m), mv, nv, preset);
            cell.n_a = t.n_a;
            cell.n = t.n;
            const FeasibleInterval iv = feasible_d_interval(t, opt);
            cell.d_min = iv.d_min;
            cell.d_max = iv.d_max;
            cell.d_count = static_cast<Count>(iv.feasible.size());
            any = any || cell.d_count > 0;
            out.cells.push_back(cell);
        }
    }
    if (!any)
        throw DomainError("map_region: infeasible-m, the region is empty at m = " +
                          std::to_string(m));
    return out;
}

struct GridPoint {
    double m_over_na = 0, n_over_na = 0;
    MacroTarget target;
    FeasibleInterval interval;
    StructuralSolution solution; // solved at the median proxy d
};

struct InfeasibleCell {
    double m_over_na = 0, n_over_na = 0;
    std::string reason;
};

struct ExperimentGrid {
    ScalePreset scale;
    std::vector<GridPoint> points;
    std::vector<InfeasibleCell> infeasible;
};

/// One target per (m/n_a, n/n_a) cell, solved at the median feasible d.
/// Cells with no feasible hidden dimension are listed, not dropped.
inline ExperimentGrid generate_grid(const ScalePreset& preset,
                                    const std::vector<double>& m_grid = default_m_grid(),
                                    const std::vector<double>& n_grid = default_n_grid(),
                                    const SolverOptions& opt = {}) {
    ExperimentGrid grid;
    grid.scale = preset;
    for (double mv : m_grid) {
        for (double nv : n_grid) {
            const MacroTarget t =
                ratios_to_macro(static_cast<double>(preset.m_target), mv, nv, preset);
            const FeasibleInterval iv = feasible_d_interval(t, opt);
            if (iv.empty()) {
                grid.infeasible.push_back({mv, nv, "no feasible hidden dimension"});
                continue;
            }
            GridPoint pt;
            pt.m_over_na = mv;
            pt.n_over_na = nv;
            pt.target = t;
            pt.interval = iv;
            pt.solution = solve_structure(t, iv.d_median, opt);
            grid.points.push_back(std::move(pt));
        }
    }
    return grid;
}

/// One accepted solution per feasible hidden dimension, ascending in d.
inline std::vector<StructuralSolution> sweep_d(const MacroTarget& t,
                                               const SolverOptions& opt = {}) {
    std::vector<StructuralSolution> out;
    const FeasibleInterval iv = feasible_d_interval(t, opt);
    out.reserve(iv.feasible.size());
    for (Count d : iv.feasible) out.push_back(solve_structure(t, d, opt));
    return out;
}

/// Index of the nearest grid value; throws on an exact midpoint tie.
inline size_t nearest_grid_index(double v, const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("nearest_grid_index: empty grid");
    size_t best = 0;
    double best_dist = std::fabs(v - grid[0]);
    bool tie = false;
    for (size_t i = 1; i < grid.size(); ++i) {
        const double dist = std::fabs(v - grid[i]);
        if (dist < best_dist) {
            best = i;
            best_dist = dist;
            tie = false;
        } else if (dist == best_dist) {
            tie = true;
        }
    }
    if (tie)
        throw DomainError("nearest_grid_index: exact tie at value " + std::to_string(v));
    return best;
}

} // namespace moeplan
