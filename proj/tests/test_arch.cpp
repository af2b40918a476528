// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "moeplan/arch.hpp"

using namespace moeplan;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Random but valid configs spanning the geometry of all six presets.
ArchConfig random_config(test_helpers::Lcg& rng) {
    ArchConfig c;
    c.d = 8 * rng.range(2, 400);
    c.l_d = rng.range(0, 8);
    c.l_m = rng.range(0, 20);
    if (c.l_d + c.l_m == 0) c.l_m = 1;
    c.d_d = 3 * c.d;
    c.d_m = 8 * rng.range(1, 700);
    c.d_qkv = (rng.next() & 1) ? 64 : 128;
    c.n_kv = 1LL << rng.range(1, 3);
    c.n_q = c.n_kv * rng.range(1, 3);
    c.s = 8192;
    c.n_e = 288;
    c.k = 8;
    return c;
}

} // namespace

TEST_CASE("active parameter count matches hand-computed anchors") {
    REQUIRE(count_active_params(test_helpers::grid_row1_config()) == 37160640);
    REQUIRE(count_active_params(test_helpers::grid_row432_config()) == 36640512);
}

TEST_CASE("zero-MoE configs count only attention and dense parameters") {
    ArchConfig c = test_helpers::grid_row1_config();
    c.l_m = 0;
    c.d_m = 0;
    c.l_d = 1;
    const Count p_attn = 2 * c.d * c.d_qkv * (c.n_q + c.n_kv);
    REQUIRE(count_active_params(c) == p_attn + 3 * c.d * c.d_d);
    REQUIRE(total_params(c) == count_active_params(c));
}

TEST_CASE("flops per token matches hand-computed anchors") {
    REQUIRE(flops_per_token(test_helpers::grid_row1_config()) == 260712576);
    REQUIRE(flops_per_token(test_helpers::grid_row432_config()) == 257591808);

    // Anchors sit within a few percent of the 0.2672 GFLOPs scale target.
    REQUIRE_THAT(260712576.0 / 267200000.0, WithinAbs(1.0, 0.025));
    REQUIRE_THAT(257591808.0 / 267200000.0, WithinAbs(1.0, 0.037));
}

TEST_CASE("attention term vanishes in the s -> 0 limit") {
    // s = 0 is not a valid config, so check the algebraic split instead:
    // m - 6*n_a is exactly the attention term, linear in s.
    ArchConfig c = test_helpers::grid_row1_config();
    const Count m = flops_per_token(c);
    const Count na = count_active_params(c);
    REQUIRE(m - 6 * na == 6 * c.s * c.n_q * c.d_qkv * c.layers());
}

TEST_CASE("total parameter count matches anchors") {
    REQUIRE(total_params(test_helpers::grid_row1_config()) == 459391680);
    REQUIRE(total_params(test_helpers::grid_row432_config()) == 1093347072);
}

TEST_CASE("metric ratios match the anchors and the grid cells") {
    const ResourceMetrics a = compute_metrics(test_helpers::grid_row1_config());
    REQUIRE_THAT(a.m_over_na, WithinAbs(7.016, 5e-4));
    REQUIRE_THAT(a.n_over_na, WithinAbs(12.362, 5e-4));

    const ResourceMetrics b = compute_metrics(test_helpers::grid_row432_config());
    REQUIRE_THAT(b.m_over_na, WithinAbs(7.030, 5e-4));
    REQUIRE_THAT(b.n_over_na, WithinAbs(29.840, 5e-4));
}

TEST_CASE("all-MoE share saturates the expansion-ratio limit") {
    REQUIRE_THAT(expansion_ratio_from_moe_share(1.0, 288, 8),
                 WithinRel(289.0 / 9.0, 1e-15));
    REQUIRE_THAT(expansion_ratio_limit(288, 8), WithinRel(289.0 / 9.0, 1e-15));
}

TEST_CASE("width ratio anchors") {
    REQUIRE_THAT(width_ratio(test_helpers::grid_row1_config()),
                 WithinAbs(9.0 * 168.0 / 1496.0, 1e-15));
    ArchConfig c = test_helpers::grid_row1_config();
    c.d_m = c.d;
    REQUIRE(width_ratio(c) == 9.0);
}

TEST_CASE("invalid configs are rejected with the violated constraint named") {
    ArchConfig c = test_helpers::grid_row1_config();
    c.n_q = 3; // not a multiple of n_kv = 2
    REQUIRE_THROWS_WITH(count_active_params(c),
                        Catch::Matchers::ContainsSubstring("multiple of n_kv"));

    c = test_helpers::grid_row1_config();
    c.n_e = 8; // equal to k
    REQUIRE_THROWS_WITH(count_active_params(c),
                        Catch::Matchers::ContainsSubstring("n_e must exceed k"));

    c = test_helpers::grid_row1_config();
    c.l_d = 0;
    c.l_m = 0;
    REQUIRE_THROWS_AS(count_active_params(c), DomainError);
}

TEST_CASE("metric invariants hold across random configs") {
    test_helpers::Lcg rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        const ArchConfig c = random_config(rng);
        const ResourceMetrics m = compute_metrics(c);

        // Total never below active, equality iff no routed surplus.
        REQUIRE(m.n >= m.n_a);
        REQUIRE((m.n == m.n_a) == (c.l_m == 0));

        // Strictly more than 6 FLOPs per active parameter.
        REQUIRE(m.m > 6 * m.n_a);
        REQUIRE(m.m_over_na > 6.0);

        // Compute shares close ratio-wise and bound-wise.
        REQUIRE_THAT(m.r_a + m.r_d + m.r_m, WithinAbs(1.0, 1e-12));
        for (double share : {m.r_a, m.r_d, m.r_m}) {
            REQUIRE(share >= 0.0);
            REQUIRE(share <= 1.0);
        }

        // Expansion ratio within its admissible closed interval.
        REQUIRE(m.n_over_na >= 1.0);
        REQUIRE(m.n_over_na <= expansion_ratio_limit(c.n_e, c.k) + 1e-12);
        REQUIRE_THAT(m.n_over_na,
                     WithinRel(expansion_ratio_from_moe_share(m.r_m_na, c.n_e, c.k), 1e-12));

        // Independent algebraic route for the density: the attention share
        // identity must reproduce m/n_a.
        const double kv_ratio = static_cast<double>(c.n_kv) / static_cast<double>(c.n_q);
        const double denom =
            1.0 - m.r_a / (1.0 + 2.0 * static_cast<double>(c.d) * (1.0 + kv_ratio) /
                                     static_cast<double>(c.s));
        REQUIRE_THAT(m.m_over_na, WithinRel(6.0 / denom, 1e-9));

        // Deterministic: two evaluations are bit-identical.
        const ResourceMetrics m2 = compute_metrics(c);
        REQUIRE(m.m == m2.m);
        REQUIRE(m.n_a == m2.n_a);
        REQUIRE(m.n == m2.n);
        REQUIRE(m.r_a == m2.r_a);
        REQUIRE(m.m_over_na == m2.m_over_na);
    }
}
