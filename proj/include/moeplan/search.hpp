// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic loss landscapes over (m/n_a, n/n_a, d) with controllable rank
// perturbation, a two-phase median-proxy search, a brute-force oracle, and a
// replicated validation report. All randomness derives from explicit seeds
// through a fixed 64-bit hash, so results are reproducible across platforms.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "moeplan/errors.hpp"
#include "moeplan/fit.hpp"
#include "moeplan/solver.hpp"

namespace moeplan {

namespace detail_search {

// splitmix64 finalizer; the perturbation is fully specified by this mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic noise in [-1, 1) keyed by (cell, d, seed).
inline double unit_noise(std::uint64_t seed, std::uint64_t cell, std::uint64_t d) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (cell * 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ d);
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

} // namespace detail_search

/// Separable base loss f(m/n_a) + g(n/n_a) with an inv-linear density shape
/// and a bounded-rational expansion shape, plus a per-cell quadratic response
/// in d (normalized so the in-interval contribution never exceeds resp_amp),
/// plus seeded noise of amplitude perturb_amp.
struct SyntheticLandscape {
    std::vector<double> m_values, n_values; // grid axes (row-major cells)
    double f_a = 0.5, f_b = 0.02, f_c = 1.0;        // a/(m-6) + b*m + c
    double g_a = 2.0, g_b = 5.0, g_c = 0.0;          // a/(n-g_lo) + b/(g_hi-n) + c
    double g_lo = 1.0, g_hi = 289.0 / 9.0;
    std::vector<Count> resp_vertex;   // per cell, inside the cell's d interval
    std::vector<double> resp_half;    // per cell, normalization half-width
    std::vector<double> resp_amp;     // per cell, max in-interval contribution
    double perturb_amp = 0.0;
    std::uint64_t seed = 0;

    size_t cell_count() const { return m_values.size() * n_values.size(); }
    size_t cell_index(size_t i, size_t j) const { return i * n_values.size() + j; }

    double base(size_t i, size_t j) const {
        const double m = m_values[i], n = n_values[j];
        return f_a / (m - 6.0) + f_b * m + f_c + g_a / (n - g_lo) + g_b / (g_hi - n) +
               g_c;
    }
};

/// Deterministic loss of one (cell, d) evaluation.
inline double evaluate(const SyntheticLandscape& land, size_t i, size_t j, Count d) {
    if (i >= land.m_values.size() || j >= land.n_values.size())
        throw DomainError("evaluate: cell outside the grid");
    const size_t c = land.cell_index(i, j);
    double loss = land.base(i, j);
    if (!land.resp_amp.empty()) {
        const double rel =
            (static_cast<double>(d) - static_cast<double>(land.resp_vertex[c])) /
            land.resp_half[c];
        loss += land.resp_amp[c] * rel * rel;
    }
    if (land.perturb_amp != 0.0)
        loss += land.perturb_amp *
                detail_search::unit_noise(land.seed, static_cast<std::uint64_t>(c),
                                          static_cast<std::uint64_t>(d));
    return loss;
}

struct SearchOutcome {
    size_t phase1_i = 0, phase1_j = 0; // winning cell of the median-proxy pass
    Count phase2_d = 0;                // fitted-then-snapped optimal d
    size_t brute_i = 0, brute_j = 0;   // exhaustive optimum
    Count brute_d = 0;
    double two_phase_loss = 0, brute_loss = 0;
    double regret = 0; // two_phase_loss - brute_loss, never negative
    RankStats rank;    // proxy loss vs true per-cell minimum across cells
};

/// Phase 1 scores every cell at the median of its d interval; phase 2 sweeps
/// d inside the winner, fits a quadratic, and snaps the vertex to the
/// feasible set. The brute-force oracle shares evaluate() bit-identically.
inline SearchOutcome two_phase_search(const SyntheticLandscape& land,
                                      const std::vector<FeasibleInterval>& d_intervals) {
    const size_t ni = land.m_values.size(), nj = land.n_values.size();
    if (ni == 0 || nj == 0) throw DomainError("two_phase_search: empty grid");
    if (d_intervals.size() != ni * nj)
        throw DomainError("two_phase_search: one d interval required per cell");
    for (const auto& iv : d_intervals)
        if (iv.empty()) throw DomainError("two_phase_search: empty d interval");

    SearchOutcome out;

    // Phase 1: median proxy.
    std::vector<double> proxy_losses;
    std::vector<double> true_minima;
    double best_proxy = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ni; ++i) {
        for (size_t j = 0; j < nj; ++j) {
            const auto& iv = d_intervals[land.cell_index(i, j)];
            const double proxy = evaluate(land, i, j, iv.d_median);
            proxy_losses.push_back(proxy);
            if (proxy < best_proxy) {
                best_proxy = proxy;
                out.phase1_i = i;
                out.phase1_j = j;
            }
            double tmin = std::numeric_limits<double>::infinity();
            for (Count d : iv.feasible) tmin = std::min(tmin, evaluate(land, i, j, d));
            true_minima.push_back(tmin);
        }
    }

    // Phase 2: quadratic fit over the winner's d sweep, vertex snapped to the
    // feasible set; falls back to the best sweep sample when the fit has no
    // interior optimum.
    const auto& win = d_intervals[land.cell_index(out.phase1_i, out.phase1_j)];
    Dataset1D sweep;
    for (Count d : win.feasible) {
        sweep.x.push_back(static_cast<double>(d));
        sweep.y.push_back(evaluate(land, out.phase1_i, out.phase1_j, d));
    }
    Count chosen = win.d_median;
    if (sweep.x.size() >= 3) {
        const FitResult qf = fit_quadratic(sweep);
        if (qf.x_opt) {
            double best_dist = std::numeric_limits<double>::infinity();
            for (Count d : win.feasible) {
                const double dist = std::fabs(static_cast<double>(d) - *qf.x_opt);
                if (dist < best_dist) {
                    best_dist = dist;
                    chosen = d;
                }
            }
        } else {
            size_t arg = 0;
            for (size_t t = 1; t < sweep.y.size(); ++t)
                if (sweep.y[t] < sweep.y[arg]) arg = t;
            chosen = win.feasible[arg];
        }
    }
    out.phase2_d = chosen;
    out.two_phase_loss = evaluate(land, out.phase1_i, out.phase1_j, chosen);

    // Brute force over the full (cell, d) grid; first index wins exact ties.
    out.brute_loss = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ni; ++i) {
        for (size_t j = 0; j < nj; ++j) {
            for (Count d : d_intervals[land.cell_index(i, j)].feasible) {
                const double loss = evaluate(land, i, j, d);
                if (loss < out.brute_loss) {
                    out.brute_loss = loss;
                    out.brute_i = i;
                    out.brute_j = j;
                    out.brute_d = d;
                }
            }
        }
    }
    out.regret = out.two_phase_loss - out.brute_loss;
    out.rank = rank_stats(proxy_losses, true_minima);
    return out;
}

// ---------------------------------------------------------------------------
// Scenario generators
// ---------------------------------------------------------------------------

/// Minimum pairwise gap between the base losses of distinct cells.
inline double min_intercell_gap(const SyntheticLandscape& land) {
    std::vector<double> bases;
    for (size_t i = 0; i < land.m_values.size(); ++i)
        for (size_t j = 0; j < land.n_values.size(); ++j)
            bases.push_back(land.base(i, j));
    std::sort(bases.begin(), bases.end());
    double gap = std::numeric_limits<double>::infinity();
    for (size_t t = 1; t < bases.size(); ++t) gap = std::min(gap, bases[t] - bases[t - 1]);
    return gap;
}

inline double mean_intercell_gap(const SyntheticLandscape& land) {
    std::vector<double> bases;
    for (size_t i = 0; i < land.m_values.size(); ++i)
        for (size_t j = 0; j < land.n_values.size(); ++j)
            bases.push_back(land.base(i, j));
    std::sort(bases.begin(), bases.end());
    return (bases.back() - bases.front()) / static_cast<double>(bases.size() - 1);
}

struct HarnessScenario {
    SyntheticLandscape landscape;
    std::vector<FeasibleInterval> intervals;
};

/// Rank-exact scenario: narrow three-point d intervals, a steep quadratic
/// response vanishing at each cell's median, and the response magnitude tied
/// to the minimum inter-cell gap so the base ordering holds at every d.
/// perturb_rel scales the noise amplitude relative to that gap.
inline HarnessScenario make_rank_exact_scenario(size_t grid_size, double perturb_rel,
                                                std::uint64_t seed,
                                                Count quantum = 8) {
    if (grid_size < 2 || grid_size > 6)
        throw DomainError("make_rank_exact_scenario: grid size must be in [2, 6]");
    HarnessScenario sc;
    auto& land = sc.landscape;
    const std::vector<double> m_all = {7, 8, 9, 11, 14, 17};
    const std::vector<double> n_all = {12, 16, 20, 22, 26, 30};
    land.m_values.assign(m_all.begin(), m_all.begin() + grid_size);
    land.n_values.assign(n_all.begin(), n_all.begin() + grid_size);
    land.seed = seed;

    const double gap = min_intercell_gap(land);
    land.perturb_amp = perturb_rel * gap;

    const size_t cells = land.cell_count();
    land.resp_vertex.resize(cells);
    land.resp_half.resize(cells);
    land.resp_amp.resize(cells);
    for (size_t c = 0; c < cells; ++c) {
        const Count vertex = 128 + static_cast<Count>(c) * quantum;
        land.resp_vertex[c] = vertex;
        land.resp_half[c] = static_cast<double>(quantum);
        land.resp_amp[c] = 0.4 * gap;
        FeasibleInterval iv;
        iv.feasible = {vertex - quantum, vertex, vertex + quantum};
        iv.d_min = iv.feasible.front();
        iv.d_max = iv.feasible.back();
        iv.d_median = vertex;
        sc.intervals.push_back(iv);
    }
    return sc;
}

/// Realistic scenario: d intervals supplied by the caller (typically from
/// feasible_d_interval on real targets), response vertices at the medians,
/// bounded response amplitude, noise relative to the minimum gap.
inline HarnessScenario make_scenario_with_intervals(
    const std::vector<double>& m_values, const std::vector<double>& n_values,
    std::vector<FeasibleInterval> intervals, double perturb_rel, std::uint64_t seed) {
    HarnessScenario sc;
    auto& land = sc.landscape;
    land.m_values = m_values;
    land.n_values = n_values;
    land.seed = seed;
    if (intervals.size() != land.cell_count())
        throw DomainError("make_scenario_with_intervals: interval count mismatch");
    const double gap = min_intercell_gap(land);
    land.perturb_amp = perturb_rel * gap;
    const size_t cells = land.cell_count();
    land.resp_vertex.resize(cells);
    land.resp_half.resize(cells);
    land.resp_amp.resize(cells);
    for (size_t c = 0; c < cells; ++c) {
        const auto& iv = intervals[c];
        if (iv.empty())
            throw DomainError("make_scenario_with_intervals: empty interval");
        land.resp_vertex[c] = iv.d_median;
        const double half =
            std::max<double>({1.0,
                              static_cast<double>(iv.d_median - iv.d_min),
                              static_cast<double>(iv.d_max - iv.d_median)});
        land.resp_half[c] = half;
        land.resp_amp[c] = 0.4 * gap;
    }
    sc.intervals = std::move(intervals);
    return sc;
}

struct ProxyReplicate {
    std::uint64_t seed = 0;
    double pearson = 0, spearman = 0, kendall = 0;
    double regret = 0;
    double fit_slope = 0, fit_intercept = 0; // least-squares line, true min vs proxy
};

struct ProxyValidationReport {
    std::vector<ProxyReplicate> replicates;
    double mean_pearson = 0, mean_spearman = 0, mean_kendall = 0;
    double mean_regret = 0;
};

/// Published reference correlations for the median proxy (Pearson, Spearman,
/// Kendall); carried for display next to the synthetic replications.
inline const std::array<double, 3>& published_proxy_correlations() {
    static const std::array<double, 3> v = {0.9793, 0.9758, 0.9111};
    return v;
}

/// Run one scenario family over a seed list and tabulate per-replicate rank
/// statistics of proxy loss vs true per-cell minimum, plus the least-squares
/// line between them.
template <typename ScenarioFactory>
inline ProxyValidationReport proxy_validation_report(ScenarioFactory&& factory,
                                                     const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 2)
        throw DomainError("proxy_validation_report: needs at least 2 replicates");
    ProxyValidationReport rep;
    for (std::uint64_t seed : seeds) {
        const HarnessScenario sc = factory(seed);
        const SearchOutcome out = two_phase_search(sc.landscape, sc.intervals);

        // Least-squares line of true minimum on proxy loss.
        std::vector<double> proxy, tmin;
        for (size_t i = 0; i < sc.landscape.m_values.size(); ++i) {
            for (size_t j = 0; j < sc.landscape.n_values.size(); ++j) {
                const auto& iv = sc.intervals[sc.landscape.cell_index(i, j)];
                proxy.push_back(evaluate(sc.landscape, i, j, iv.d_median));
                double mn = std::numeric_limits<double>::infinity();
                for (Count d : iv.feasible)
                    mn = std::min(mn, evaluate(sc.landscape, i, j, d));
                tmin.push_back(mn);
            }
        }
        double mx = 0, my = 0;
        for (size_t t = 0; t < proxy.size(); ++t) { mx += proxy[t]; my += tmin[t]; }
        mx /= static_cast<double>(proxy.size());
        my /= static_cast<double>(proxy.size());
        double cov = 0, vx = 0;
        for (size_t t = 0; t < proxy.size(); ++t) {
            cov += (proxy[t] - mx) * (tmin[t] - my);
            vx += (proxy[t] - mx) * (proxy[t] - mx);
        }
        ProxyReplicate r;
        r.seed = seed;
        r.pearson = out.rank.pearson_r;
        r.spearman = out.rank.spearman_rho;
        r.kendall = out.rank.kendall_tau;
        r.regret = out.regret;
        r.fit_slope = vx > 0 ? cov / vx : 0.0;
        r.fit_intercept = my - r.fit_slope * mx;
        rep.replicates.push_back(r);

        rep.mean_pearson += r.pearson;
        rep.mean_spearman += r.spearman;
        rep.mean_kendall += r.kendall;
        rep.mean_regret += r.regret;
    }
    const double k = static_cast<double>(rep.replicates.size());
    rep.mean_pearson /= k;
    rep.mean_spearman /= k;
    rep.mean_kendall /= k;
    rep.mean_regret /= k;
    return rep;
}

/// The shipped seed list for replicated validation runs.
inline const std::vector<std::uint64_t>& shipped_seed_list() {
    static const std::vector<std::uint64_t> seeds = {1,  2,  3,  5,  7,  11, 13,
                                                     17, 19, 23, 29, 31, 37, 41,
                                                     43, 47, 53, 59, 61, 67};
    return seeds;
}

} // namespace moeplan
