// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// Inverts the resource accounting: given macroscopic targets (m, n_a, n) and a
// hidden dimension, recover the layer split and expert width over the reals,
// round to hardware-friendly integers, and accept when the re-evaluated exact
// metrics stay within tolerance. Also scans hidden dimensions for the feasible
// interval and its median proxy, and solves with the MoE width ratio as the
// free variable instead of d.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moeplan/arch.hpp"
#include "moeplan/errors.hpp"
#include "moeplan/presets.hpp"

namespace moeplan {

struct SolverOptions {
    Count quantum = 8;        // dimension rounding multiple; one of 8, 16, 32
    Count d_cap = Count{1} << 14;  // hidden-dimension scan ceiling
    double max_deviation = 0.05;   // per-component acceptance bound
    bool allow_zero_dense = false; // permit l_d == 0 solutions
    double gamma = 3.0;            // dense width multiple d_d = gamma*d
    bool align_dense_to_moe = false; // alternative constraint d_d = (k+1)*d_m
};

struct MacroTarget {
    double m = 0;    // FLOPs/token
    double n_a = 0;  // active parameters
    double n = 0;    // total parameters
    ScalePreset preset; // supplies s, n_q, n_kv, d_qkv, n_e, k
};

/// Nearest multiple of quantum, ties toward the larger multiple, clamped to
/// at least one quantum. quantum must be 8, 16 or 32.
inline Count hardware_round(double value, Count quantum) {
    if (quantum != 8 && quantum != 16 && quantum != 32)
        throw DomainError("hardware_round: quantum must be one of 8, 16, 32");
    if (!(value > 0))
        throw DomainError("hardware_round: rounding-reject, value must be positive");
    const auto k = static_cast<Count>(std::floor(value / static_cast<double>(quantum) + 0.5));
    return std::max<Count>(k, 1) * quantum;
}

enum class SolveStatus {
    accepted,
    infeasible_m,     // budget below the attention floor (no positive layer count)
    infeasible_shape, // no valid (l_d, l_m, d_m) split
    rounding_reject,  // rounded structure deviates beyond tolerance
};

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::accepted: return "accepted";
        case SolveStatus::infeasible_m: return "infeasible-m";
        case SolveStatus::infeasible_shape: return "infeasible-shape";
        case SolveStatus::rounding_reject: return "rounding-reject";
    }
    return "unknown";
}

struct RoundingStep {
    std::string field;
    double exact = 0;   // real-valued solution before rounding
    Count rounded = 0;
};

struct StructuralSolution {
    SolveStatus status = SolveStatus::infeasible_shape;
    std::string reason;
    ArchConfig config;        // valid only when accepted
    ResourceMetrics achieved; // valid only when accepted
    double deviation_m = 0, deviation_na = 0, deviation_n = 0;
    std::vector<RoundingStep> rounding_trace;

    bool accepted() const { return status == SolveStatus::accepted; }
    double max_deviation() const {
        return std::max({deviation_m, deviation_na, deviation_n});
    }
};

struct FeasibleInterval {
    Count d_min = 0, d_max = 0, d_median = 0;
    std::vector<Count> feasible; // every hidden dimension with an accepted solution

    bool empty() const { return feasible.empty(); }
};

namespace detail {

inline StructuralSolution rejected(SolveStatus st, std::string why,
                                   std::vector<RoundingStep> trace = {}) {
    StructuralSolution s;
    s.status = st;
    s.reason = std::move(why);
    s.rounding_trace = std::move(trace);
    return s;
}

inline Count round_half_up(double v) {
    return static_cast<Count>(std::floor(v + 0.5));
}

} // namespace detail

/// Recover (l, l_d, l_m, d_m) for a fixed hidden dimension d, round in the
/// order l, l_m, d_m, re-evaluate exactly, and accept iff every deviation is
/// within tolerance.
inline StructuralSolution solve_structure(const MacroTarget& t, Count d,
                                          const SolverOptions& opt = {}) {
    if (d < opt.quantum || d % opt.quantum != 0)
        throw DomainError("solve_structure: d must be a positive multiple of the quantum");
    if (!(t.m > 0) || !(t.n_a > 0))
        throw DomainError("solve_structure: target m and n_a must be positive");

    const ScalePreset& p = t.preset;
    std::vector<RoundingStep> trace;

    // Layer count from the attention FLOPs residue.
    const double layer_unit = 6.0 * static_cast<double>(p.s * p.n_q * p.d_qkv);
    const double l_real = (t.m - 6.0 * t.n_a) / layer_unit;
    if (!(l_real > 0))
        return detail::rejected(SolveStatus::infeasible_m,
                                "budget below attention floor: m <= 6*n_a");
    const Count l = detail::round_half_up(l_real);
    trace.push_back({"l", l_real, l});
    if (l < 1)
        return detail::rejected(SolveStatus::infeasible_m,
                                "layer count rounds below 1", trace);

    if (t.n < t.n_a)
        return detail::rejected(SolveStatus::infeasible_shape,
                                "target n below n_a", trace);

    // Inactive expert mass fixes the product d_m * l_m.
    const double dm_lm = (t.n - t.n_a) /
                         (3.0 * static_cast<double>(d) * static_cast<double>(p.n_e - p.k));
    if (!(dm_lm > 0))
        return detail::rejected(SolveStatus::infeasible_shape,
                                "no MoE mass to place: n == n_a", trace);

    const double dd = static_cast<double>(d);
    const double attn_per_layer = 2.0 * static_cast<double>((p.n_q + p.n_kv) * p.d_qkv) * dd;

    Count l_m = 0, d_m = 0, d_d = 0;
    if (!opt.align_dense_to_moe) {
        // d_d = gamma*d: split layers so active params land on target.
        const double dense_per_layer = opt.gamma * 3.0 * dd * dd;
        const double l_m_real = ((attn_per_layer + dense_per_layer) * static_cast<double>(l) +
                                 3.0 * dd * static_cast<double>(p.k + 1) * dm_lm - t.n_a) /
                                dense_per_layer;
        l_m = detail::round_half_up(l_m_real);
        trace.push_back({"l_m", l_m_real, l_m});
        if (l_m < 1)
            return detail::rejected(SolveStatus::infeasible_shape,
                                    "MoE layer count rounds below 1", trace);
        if (l - l_m < (opt.allow_zero_dense ? 0 : 1))
            return detail::rejected(SolveStatus::infeasible_shape,
                                    "dense layer count rounds below minimum", trace);
        const double d_m_real = dm_lm / static_cast<double>(l_m);
        d_m = hardware_round(d_m_real, opt.quantum);
        trace.push_back({"d_m", d_m_real, d_m});
        d_d = detail::round_half_up(opt.gamma * dd);
    } else {
        // d_d = (k+1)*d_m: dense and MoE layers share the same active FFN
        // width, so the split no longer affects n_a and d_m comes first.
        const double d_m_real = (t.n_a - attn_per_layer * static_cast<double>(l)) /
                                (3.0 * dd * static_cast<double>(p.k + 1) *
                                 static_cast<double>(l));
        if (!(d_m_real > 0))
            return detail::rejected(SolveStatus::infeasible_shape,
                                    "active params below attention floor", trace);
        d_m = hardware_round(d_m_real, opt.quantum);
        trace.push_back({"d_m", d_m_real, d_m});
        const double l_m_real = dm_lm / static_cast<double>(d_m);
        l_m = detail::round_half_up(l_m_real);
        trace.push_back({"l_m", l_m_real, l_m});
        if (l_m < 1)
            return detail::rejected(SolveStatus::infeasible_shape,
                                    "MoE layer count rounds below 1", trace);
        if (l - l_m < (opt.allow_zero_dense ? 0 : 1))
            return detail::rejected(SolveStatus::infeasible_shape,
                                    "dense layer count rounds below minimum", trace);
        d_d = (p.k + 1) * d_m;
    }

    ArchConfig cfg;
    cfg.d = d;
    cfg.l_d = l - l_m;
    cfg.l_m = l_m;
    cfg.d_d = d_d;
    cfg.d_m = d_m;
    cfg.d_qkv = p.d_qkv;
    cfg.n_q = p.n_q;
    cfg.n_kv = p.n_kv;
    cfg.s = p.s;
    cfg.n_e = p.n_e;
    cfg.k = p.k;
    cfg.gamma = opt.align_dense_to_moe
                    ? static_cast<double>(d_d) / static_cast<double>(d)
                    : opt.gamma;

    StructuralSolution s;
    s.rounding_trace = std::move(trace);
    s.config = cfg;
    s.achieved = compute_metrics(cfg);
    s.deviation_m = std::fabs(static_cast<double>(s.achieved.m) - t.m) / t.m;
    s.deviation_na = std::fabs(static_cast<double>(s.achieved.n_a) - t.n_a) / t.n_a;
    s.deviation_n =
        t.n > 0 ? std::fabs(static_cast<double>(s.achieved.n) - t.n) / t.n : 0.0;
    if (s.max_deviation() <= opt.max_deviation) {
        s.status = SolveStatus::accepted;
    } else {
        s.status = SolveStatus::rounding_reject;
        s.reason = "rounded structure deviates " +
                   std::to_string(100.0 * s.max_deviation()) + "% from target";
    }
    return s;
}

/// Map normalized coordinates (m, m/n_a, n/n_a) back to a raw target triad.
inline MacroTarget ratios_to_macro(double m, double m_over_na, double n_over_na,
                                   const ScalePreset& preset) {
    if (!(m > 0)) throw DomainError("ratios_to_macro: m must be positive");
    if (!(m_over_na > 6.0))
        throw DomainError("ratios_to_macro: m_over_na must exceed the open bound 6");
    const double limit = preset.expansion_limit();
    if (!(n_over_na > 1.0))
        throw DomainError("ratios_to_macro: n_over_na must exceed the open bound 1");
    if (!(n_over_na < limit))
        throw DomainError("ratios_to_macro: n_over_na must stay below the open bound (n_e+1)/(k+1) = " +
                          std::to_string(limit));
    MacroTarget t;
    t.m = m;
    t.n_a = m / m_over_na;
    t.n = n_over_na * t.n_a;
    t.preset = preset;
    return t;
}

/// Scan quantum multiples of d up to the cap and collect every accepted
/// hidden dimension. The median is the lower median for even cardinality.
inline FeasibleInterval feasible_d_interval(const MacroTarget& t,
                                            const SolverOptions& opt = {}) {
    FeasibleInterval iv;
    if (!(t.m > 6.0 * t.n_a) || t.n < t.n_a) return iv;
    for (Count d = opt.quantum; d <= opt.d_cap; d += opt.quantum) {
        if (solve_structure(t, d, opt).accepted()) iv.feasible.push_back(d);
    }
    if (!iv.feasible.empty()) {
        iv.d_min = iv.feasible.front();
        iv.d_max = iv.feasible.back();
        iv.d_median = iv.feasible[(iv.feasible.size() - 1) / 2];
    }
    return iv;
}

/// Solve with the MoE width ratio rho = (k+1)*d_m/d as the free variable.
/// Substituting d_m = rho*d/(k+1) leaves a single equation in d, solved by a
/// bracketed root search over quantum multiples, then delegated to
/// solve_structure at the nearby quantized candidates.
inline StructuralSolution solve_by_width_ratio(const MacroTarget& t, double rho,
                                               const SolverOptions& opt = {}) {
    if (!(rho > 0)) throw DomainError("solve_by_width_ratio: rho must be positive");
    if (opt.align_dense_to_moe)
        throw DomainError("solve_by_width_ratio: not defined for the aligned-dense mode");

    const ScalePreset& p = t.preset;
    const double layer_unit = 6.0 * static_cast<double>(p.s * p.n_q * p.d_qkv);
    const double l_real = (t.m - 6.0 * t.n_a) / layer_unit;
    if (!(l_real > 0))
        return detail::rejected(SolveStatus::infeasible_m,
                                "budget below attention floor: m <= 6*n_a");
    const Count l = detail::round_half_up(l_real);
    if (l < 1)
        return detail::rejected(SolveStatus::infeasible_m, "layer count rounds below 1");
    if (!(t.n > t.n_a))
        return detail::rejected(SolveStatus::infeasible_shape, "no MoE mass to place");

    // With d_m*l_m fixed by the inactive expert mass, l_m*d^2 is a constant W,
    // so the active-parameter equation reduces to a polynomial in d alone:
    //   a1*l*d + 3*gamma*l*d^2 + (3*rho - 3*gamma)*W - n_a = 0
    const double w = (t.n - t.n_a) * static_cast<double>(p.k + 1) /
                     (3.0 * rho * static_cast<double>(p.n_e - p.k));
    const double a1 = 2.0 * static_cast<double>((p.n_q + p.n_kv) * p.d_qkv);
    const auto residual = [&](double d) {
        return a1 * static_cast<double>(l) * d +
               3.0 * opt.gamma * static_cast<double>(l) * d * d +
               (3.0 * rho - 3.0 * opt.gamma) * w - t.n_a;
    };

    double lo = static_cast<double>(opt.quantum);
    double hi = static_cast<double>(opt.d_cap);
    if (residual(lo) > 0 || residual(hi) < 0)
        return detail::rejected(SolveStatus::infeasible_shape,
                                "infeasible-ratio: no root in the hidden-dimension range");
    for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) < 0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    if (root * rho / static_cast<double>(p.k + 1) < static_cast<double>(opt.quantum))
        return detail::rejected(SolveStatus::infeasible_shape,
                                "infeasible-ratio: implied expert width below one quantum");

    const Count base = hardware_round(root, opt.quantum);
    StructuralSolution best;
    for (Count cand : {base - opt.quantum, base, base + opt.quantum}) {
        if (cand < opt.quantum || cand > opt.d_cap) continue;
        StructuralSolution s = solve_structure(t, cand, opt);
        if (!s.accepted()) continue;
        if (!best.accepted() || s.max_deviation() < best.max_deviation()) best = std::move(s);
    }
    if (!best.accepted())
        return detail::rejected(SolveStatus::infeasible_shape,
                                "infeasible-ratio: no accepted solution near root d=" +
                                    std::to_string(root));
    return best;
}

} // namespace moeplan
