// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// Per-compute-scale constants: the six shipped presets pin the FLOPs/token
// target, attention geometry, sparsity, training hyperparameters, and the
// manually chosen expansion-ratio value for each budget.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "moeplan/arch.hpp"
#include "moeplan/errors.hpp"

namespace moeplan {

struct ScalePreset {
    std::string name;   // e.g. "1e18"
    double c = 0;       // training compute budget, FLOPs
    Count m_target = 0; // FLOPs/token target
    double d_tokens = 0; // training tokens paired with m_target (c = m*d)
    Count d_qkv = 0, n_q = 0, n_kv = 0;
    Count s = 8192;
    Count k = 8, n_e = 288;
    double lr = 0;
    Count batch = 0;
    double n_over_na = 0; // manual expansion-ratio choice for this budget

    double expansion_limit() const { return expansion_ratio_limit(n_e, k); }
};

inline const std::vector<ScalePreset>& scale_presets() {
    static const std::vector<ScalePreset> presets = {
        {"1e18", 1e18, 267'200'000, 3.7420e9, 64, 4, 2, 8192, 8, 288, 1.20e-3, 64, 19.0},
        {"3e18", 3e18, 485'600'000, 6.1775e9, 64, 8, 4, 8192, 8, 288, 1.00e-3, 80, 20.0},
        {"1e19", 1e19, 934'500'000, 10.7004e9, 64, 8, 4, 8192, 8, 288, 8.28e-4, 128, 21.0},
        {"3e19", 3e19, 1'698'300'000, 17.6649e9, 128, 8, 4, 8192, 8, 288, 6.95e-4, 160, 21.0},
        {"1e20", 1e20, 3'268'100'000, 30.5985e9, 128, 8, 4, 8192, 8, 288, 5.74e-4, 208, 22.0},
        {"3e20", 3e20, 5'939'000'000, 50.5138e9, 128, 16, 8, 8192, 8, 288, 4.82e-4, 288, 22.0},
    };
    return presets;
}

inline const ScalePreset& preset_by_name(const std::string& name) {
    for (const auto& p : scale_presets())
        if (p.name == name) return p;
    throw InputError("unknown scale preset: " + name);
}

/// Nearest preset in log-compute distance.
inline const ScalePreset& preset_nearest_c(double c) {
    if (!(c > 0)) throw DomainError("compute budget must be positive");
    const ScalePreset* best = nullptr;
    double best_dist = 0;
    for (const auto& p : scale_presets()) {
        const double dist = std::fabs(std::log10(c) - std::log10(p.c));
        if (!best || dist < best_dist) {
            best = &p;
            best_dist = dist;
        }
    }
    return *best;
}

} // namespace moeplan
