// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "moeplan/arch.hpp"
#include "moeplan/presets.hpp"

namespace test_helpers {

inline std::string data_dir() { return MOEPLAN_DATA_DIR; }
inline std::string tables_dir() { return data_dir() + "/tables"; }

/// First row of the first grid fixture table (1e18 scale), hand-checkable.
inline moeplan::ArchConfig grid_row1_config() {
    moeplan::ArchConfig c;
    c.d = 1496;
    c.l_d = 1;
    c.l_m = 2;
    c.d_d = 4488;
    c.d_m = 168;
    c.d_qkv = 64;
    c.n_q = 4;
    c.n_kv = 2;
    c.s = 8192;
    c.n_e = 288;
    c.k = 8;
    return c;
}

/// The d = 432 row of the same table.
inline moeplan::ArchConfig grid_row432_config() {
    moeplan::ArchConfig c = grid_row1_config();
    c.d = 432;
    c.d_d = 1296;
    c.d_m = 1456;
    return c;
}

/// Golden-section minimizer, used as an independent oracle against analytic
/// optima of fitted curves.
inline double golden_minimize(const std::function<double(double)>& f, double lo,
                              double hi, int iters = 200) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

/// Deterministic pseudo-random stream for property tests.
struct Lcg {
    std::uint64_t state;
    explicit Lcg(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return state >> 11;
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(next() & ((1ULL << 40) - 1)) /
                                 static_cast<double>(1ULL << 40));
    }
    moeplan::Count range(moeplan::Count lo, moeplan::Count hi) {
        return lo + static_cast<moeplan::Count>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

} // namespace test_helpers
