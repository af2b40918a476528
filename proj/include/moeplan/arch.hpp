// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// Architecture description of a GQA-attention MoE transformer and the exact
// forward-pass accounting: active/total non-embedding parameter counts and
// FLOPs per token. All counts use exact 64-bit integer arithmetic, so two
// evaluations of the same config are bit-identical.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "moeplan/errors.hpp"

namespace moeplan {

using Count = std::int64_t;

/// A fully specified MoE architecture. Embedding parameters are excluded
/// from all accounting; vocab_size is carried as metadata only.
struct ArchConfig {
    Count d = 0;      ///< hidden dimension
    Count l_d = 0;    ///< dense FFN layer count
    Count l_m = 0;    ///< MoE layer count
    Count d_d = 0;    ///< dense FFN intermediate dimension
    Count d_m = 0;    ///< MoE expert intermediate dimension
    Count d_qkv = 0;  ///< attention head dimension
    Count n_q = 0;    ///< query head count
    Count n_kv = 0;   ///< key/value head count
    Count s = 0;      ///< training context length in tokens
    Count n_e = 0;    ///< routed expert count
    Count k = 0;      ///< activated experts per token
    double gamma = 3.0;  ///< dense FFN width multiple, d_d/d for solver output
    std::optional<Count> vocab_size;  ///< metadata only, never counted

    Count layers() const { return l_d + l_m; }
};

/// Resource triad plus derived ratios for one architecture.
/// r_a + r_d + r_m == 1 up to double rounding; m_over_na > 6 always.
struct ResourceMetrics {
    Count m = 0;    ///< forward FLOPs per token
    Count n_a = 0;  ///< active non-embedding parameters
    Count n = 0;    ///< total non-embedding parameters
    double m_over_na = 0;  ///< active compute density
    double n_over_na = 0;  ///< parameter expansion ratio
    double r_a = 0;  ///< attention share of m (params + logits/softmax)
    double r_d = 0;  ///< dense FFN share of m
    double r_m = 0;  ///< MoE FFN share of m
    double r_m_na = 0;  ///< MoE share of active parameters
};

/// Throws DomainError naming the violated constraint.
inline void validate(const ArchConfig& c) {
    auto fail = [](const std::string& what) { throw DomainError("invalid ArchConfig: " + what); };
    if (c.d < 1) fail("d must be a positive integer");
    if (c.l_d < 0) fail("l_d must be non-negative");
    if (c.l_m < 0) fail("l_m must be non-negative");
    if (c.l_d + c.l_m < 1) fail("l_d + l_m must be at least 1");
    if (c.d_d < 1) fail("d_d must be a positive integer");
    if (c.l_m > 0 && c.d_m < 1) fail("d_m must be a positive integer when l_m > 0");
    if (c.d_qkv < 1) fail("d_qkv must be a positive integer");
    if (c.n_q < 1) fail("n_q must be a positive integer");
    if (c.n_kv < 1) fail("n_kv must be a positive integer");
    if (c.n_q % c.n_kv != 0) fail("n_q must be an integer multiple of n_kv");
    if (c.s < 1) fail("s must be a positive integer");
    if (c.k < 1) fail("k must be at least 1");
    if (c.n_e <= c.k) fail("n_e must exceed k");
    if (!(c.gamma > 0)) fail("gamma must be positive");
}

namespace detail {
inline Count attn_params_per_layer(const ArchConfig& c) {
    return 2 * c.d * c.d_qkv * (c.n_q + c.n_kv);
}
inline Count dense_params_per_layer(const ArchConfig& c) { return 3 * c.d * c.d_d; }
inline Count moe_active_params_per_layer(const ArchConfig& c) {
    // k routed experts plus one shared expert, each a SwiGLU-style 3*d*d_m block
    return (c.k + 1) * 3 * c.d * c.d_m;
}
inline Count attn_flops(const ArchConfig& c) {
    return 6 * c.s * c.n_q * c.d_qkv * c.layers();
}
} // namespace detail

inline Count count_active_params(const ArchConfig& c) {
    validate(c);
    return detail::attn_params_per_layer(c) * c.layers() +
           detail::dense_params_per_layer(c) * c.l_d +
           detail::moe_active_params_per_layer(c) * c.l_m;
}

inline Count flops_per_token(const ArchConfig& c) {
    return 6 * count_active_params(c) + detail::attn_flops(c);
}

inline Count total_params(const ArchConfig& c) {
    return count_active_params(c) + 3 * c.d * c.d_m * (c.n_e - c.k) * c.l_m;
}

/// MoE FFN active width relative to the hidden size, (k+1)*d_m/d.
inline double width_ratio(const ArchConfig& c) {
    if (c.d < 1) throw DomainError("width_ratio: d must be positive");
    return static_cast<double>((c.k + 1) * c.d_m) / static_cast<double>(c.d);
}

/// Upper limit of the parameter expansion ratio, (n_e+1)/(k+1).
inline double expansion_ratio_limit(Count n_e, Count k) {
    return static_cast<double>(n_e + 1) / static_cast<double>(k + 1);
}

/// Expansion ratio implied by the MoE share of active parameters.
inline double expansion_ratio_from_moe_share(double r_m_na, Count n_e, Count k) {
    return 1.0 + r_m_na * (expansion_ratio_limit(n_e, k) - 1.0);
}

inline ResourceMetrics compute_metrics(const ArchConfig& c) {
    validate(c);
    const Count attn_p = detail::attn_params_per_layer(c) * c.layers();
    const Count dense_p = detail::dense_params_per_layer(c) * c.l_d;
    const Count moe_p = detail::moe_active_params_per_layer(c) * c.l_m;
    const Count n_a = attn_p + dense_p + moe_p;
    const Count m_attn = detail::attn_flops(c);
    const Count m = 6 * n_a + m_attn;
    const Count n = n_a + 3 * c.d * c.d_m * (c.n_e - c.k) * c.l_m;

    ResourceMetrics r;
    r.m = m;
    r.n_a = n_a;
    r.n = n;
    const double md = static_cast<double>(m);
    r.m_over_na = md / static_cast<double>(n_a);
    r.n_over_na = static_cast<double>(n) / static_cast<double>(n_a);
    r.r_a = static_cast<double>(6 * attn_p + m_attn) / md;
    r.r_d = static_cast<double>(6 * dense_p) / md;
    r.r_m = static_cast<double>(6 * moe_p) / md;
    r.r_m_na = static_cast<double>(moe_p) / static_cast<double>(n_a);
    return r;
}

} // namespace moeplan
