// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// The end-to-end design pipeline: compute budget in, complete architecture
// plus training hyperparameters out, through a registry of fitted scaling
// laws. Every numeric in a report carries provenance.

#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "moeplan/errors.hpp"
#include "moeplan/fit.hpp"
#include "moeplan/presets.hpp"
#include "moeplan/region.hpp"
#include "moeplan/solver.hpp"

namespace moeplan {

enum class Provenance { published, user_fitted, solver_derived };

inline std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::published: return "published";
        case Provenance::user_fitted: return "user-fitted";
        case Provenance::solver_derived: return "solver-derived";
    }
    return "unknown";
}

inline Provenance provenance_from_string(const std::string& s) {
    for (Provenance p : {Provenance::published, Provenance::user_fitted,
                         Provenance::solver_derived})
        if (to_string(p) == s) return p;
    throw InputError("unknown provenance: " + s);
}

struct PowerLaw {
    double multiplier = 0, exponent = 0;
    double eval(double c) const { return multiplier * std::pow(c, exponent); }
};

struct Law {
    PowerLaw law;
    Provenance source = Provenance::published;
    double c_lo = 0, c_hi = 0; // compute range the law was fitted on

    bool extrapolated_at(double c) const { return c < c_lo || c > c_hi; }
};

struct BandLaws {
    PowerLaw d_l, d_opt, d_r;
    double tolerance = 1e-3; // relative loss slack defining the band
    Provenance source = Provenance::user_fitted;
    double c_lo = 0, c_hi = 0;
};

struct NnaPreset {
    double c = 0;
    double n_over_na = 0;
};

struct LawSet {
    int schema_version = 1;
    Law tokens_of_c;                 // optimal training tokens vs compute
    Law flops_of_c;                  // optimal FLOPs/token vs compute
    std::optional<Law> mna_of_c;     // optimal m/n_a vs compute
    std::vector<NnaPreset> nna_presets;
    Provenance nna_source = Provenance::published;
    std::optional<BandLaws> d_band_of_c; // hidden-dimension optimum and band

    bool complete() const { return mna_of_c.has_value() && d_band_of_c.has_value(); }
};

/// The shipped constants: compute-optimal token and FLOPs/token laws plus the
/// per-budget manual expansion-ratio presets. The density and hidden-dimension
/// laws are left for user fitting.
inline LawSet published_lawset() {
    LawSet ls;
    ls.tokens_of_c = {{22.8929, 0.4563}, Provenance::published, 1e18, 3e20};
    ls.flops_of_c = {{0.04368, 0.5437}, Provenance::published, 1e18, 3e20};
    for (const auto& p : scale_presets()) ls.nna_presets.push_back({p.c, p.n_over_na});
    ls.nna_source = Provenance::published;
    return ls;
}

/// Published per-scale expansion-ratio optima from the bounded-rational fits;
/// reference constants only, the underlying losses are not reproducible here.
inline const std::vector<double>& published_nna_fit_optima() {
    static const std::vector<double> v = {19.23, 19.33, 20.69, 20.78, 21.29, 22.07};
    return v;
}

struct OptimalCmd {
    double m = 0;        // FLOPs/token
    double d_tokens = 0; // training tokens
    double product_ratio = 0; // m*d/c
};

/// Evaluate the (m, d) laws at a budget. Throws a lawset-error when the laws
/// disagree with c = m*d by more than 1%.
inline OptimalCmd optimal_cmd(double c, const LawSet& laws) {
    if (!(c > 0)) throw DomainError("optimal_cmd: compute budget must be positive");
    OptimalCmd out;
    out.m = laws.flops_of_c.law.eval(c);
    out.d_tokens = laws.tokens_of_c.law.eval(c);
    out.product_ratio = out.m * out.d_tokens / c;
    if (std::fabs(out.product_ratio - 1.0) > 0.01)
        throw DomainError("lawset-error: m and d laws are inconsistent, m*d/c = " +
                          std::to_string(out.product_ratio));
    return out;
}

/// Expansion-ratio preset lookup: nearest preset in log-compute, optionally
/// interpolated linearly in log c between the bracketing presets.
inline double nna_for_budget(const LawSet& laws, double c, bool interpolate = false) {
    if (laws.nna_presets.empty())
        throw DomainError("nna_for_budget: lawset carries no expansion-ratio presets");
    std::vector<NnaPreset> ps = laws.nna_presets;
    std::sort(ps.begin(), ps.end(), [](auto& a, auto& b) { return a.c < b.c; });
    if (!interpolate || c <= ps.front().c || c >= ps.back().c) {
        const NnaPreset* best = &ps.front();
        for (const auto& p : ps)
            if (std::fabs(std::log10(c) - std::log10(p.c)) <
                std::fabs(std::log10(c) - std::log10(best->c)))
                best = &p;
        return best->n_over_na;
    }
    for (size_t i = 0; i + 1 < ps.size(); ++i) {
        if (c >= ps[i].c && c <= ps[i + 1].c) {
            const double t = (std::log10(c) - std::log10(ps[i].c)) /
                             (std::log10(ps[i + 1].c) - std::log10(ps[i].c));
            return ps[i].n_over_na + t * (ps[i + 1].n_over_na - ps[i].n_over_na);
        }
    }
    return ps.back().n_over_na;
}

struct ProvValue {
    double value = 0;
    Provenance source = Provenance::published;
};

struct DesignReport {
    double c = 0;
    std::string preset_name;
    ProvValue m;         // FLOPs/token
    ProvValue d_tokens;  // training tokens
    std::optional<ProvValue> n_a, n, d_hidden;
    std::optional<StructuralSolution> solution;
    std::optional<double> band_slack; // loss slack implied by staying inside (d_l, d_r)
    double lr = 0;
    double batch = 0;
    Provenance training_source = Provenance::published;
    std::vector<std::string> warnings;

    bool complete() const { return solution.has_value(); }
};

struct DesignOptions {
    bool interpolate_nna = false;
    SolverOptions solver;
};

namespace detail_laws {

inline std::pair<PowerLaw, PowerLaw> training_laws() {
    // Power-law interpolants through the per-scale learning-rate and batch
    // presets, for budgets between the anchors.
    Dataset1D lr_d, bs_d;
    for (const auto& p : scale_presets()) {
        lr_d.x.push_back(p.c);
        lr_d.y.push_back(p.lr);
        bs_d.x.push_back(p.c);
        bs_d.y.push_back(static_cast<double>(p.batch));
    }
    const FitResult lr_fit = fit_power_law(lr_d);
    const FitResult bs_fit = fit_power_law(bs_d);
    return {{lr_fit.coeff("multiplier"), lr_fit.coeff("exponent")},
            {bs_fit.coeff("multiplier"), bs_fit.coeff("exponent")}};
}

} // namespace detail_laws

/// Chain the full design procedure. Missing laws truncate the report with a
/// warning instead of failing; infeasible intermediates throw, naming the
/// stage.
inline DesignReport design(double c, const LawSet& laws, const ScalePreset& preset,
                           const DesignOptions& opt = {}) {
    DesignReport rep;
    rep.c = c;
    rep.preset_name = preset.name;

    const OptimalCmd cmd = optimal_cmd(c, laws);
    rep.m = {cmd.m, laws.flops_of_c.source};
    rep.d_tokens = {cmd.d_tokens, laws.tokens_of_c.source};
    if (std::fabs(cmd.product_ratio - 1.0) > 0.005)
        rep.warnings.push_back("m and d laws drift from c = m*d by more than 0.5%");
    if (laws.flops_of_c.extrapolated_at(c) || laws.tokens_of_c.extrapolated_at(c))
        rep.warnings.push_back("compute budget lies outside the fitted range of the (m, d) laws");

    // Training hyperparameters: exact preset values on an anchor budget,
    // power-law interpolation otherwise.
    if (std::fabs(std::log10(c) - std::log10(preset.c)) < 1e-12) {
        rep.lr = preset.lr;
        rep.batch = static_cast<double>(preset.batch);
        rep.training_source = Provenance::published;
    } else {
        const auto [lr_law, bs_law] = detail_laws::training_laws();
        rep.lr = lr_law.eval(c);
        rep.batch = bs_law.eval(c);
        rep.training_source = Provenance::solver_derived;
        rep.warnings.push_back("training hyperparameters interpolated between preset budgets");
    }

    if (!laws.mna_of_c) {
        rep.warnings.push_back(
            "density law (m/n_a vs compute) is not in the lawset; supply a user-fitted "
            "lawset to complete the structural design");
        return rep;
    }
    const double mna = laws.mna_of_c->law.eval(c);
    if (!(mna > 6.0))
        throw DomainError("design stage mna_of_c: law yields density " +
                          std::to_string(mna) + " <= 6");
    if (laws.mna_of_c->extrapolated_at(c))
        rep.warnings.push_back("density law evaluated outside its fitted compute range");
    rep.n_a = ProvValue{cmd.m / mna, laws.mna_of_c->source};

    const double nna = nna_for_budget(laws, c, opt.interpolate_nna);
    if (!(nna > 1.0) || !(nna < preset.expansion_limit()))
        throw DomainError("design stage nna_presets: expansion ratio " +
                          std::to_string(nna) + " outside the admissible interval");
    rep.n = ProvValue{nna * rep.n_a->value, laws.nna_source};

    MacroTarget target;
    target.m = cmd.m;
    target.n_a = rep.n_a->value;
    target.n = rep.n->value;
    target.preset = preset;

    const FeasibleInterval iv = feasible_d_interval(target, opt.solver);
    if (iv.empty())
        throw DomainError("design stage solve: infeasible-target, no feasible hidden dimension");

    Count d_choice = 0;
    if (laws.d_band_of_c) {
        const double d_l = laws.d_band_of_c->d_l.eval(c);
        const double d_r = laws.d_band_of_c->d_r.eval(c);
        const double d_opt = laws.d_band_of_c->d_opt.eval(c);
        if (laws.d_band_of_c->c_lo > 0 &&
            (c < laws.d_band_of_c->c_lo || c > laws.d_band_of_c->c_hi))
            rep.warnings.push_back("hidden-dimension law evaluated outside its fitted compute range");
        // Nearest feasible quantum multiple inside the band, else nearest
        // feasible overall with a warning.
        Count best_in_band = 0, best_any = 0;
        double dist_in_band = 0, dist_any = 0;
        for (Count d : iv.feasible) {
            const double dist = std::fabs(static_cast<double>(d) - d_opt);
            if (best_any == 0 || dist < dist_any) {
                best_any = d;
                dist_any = dist;
            }
            if (static_cast<double>(d) >= d_l && static_cast<double>(d) <= d_r &&
                (best_in_band == 0 || dist < dist_in_band)) {
                best_in_band = d;
                dist_in_band = dist;
            }
        }
        if (best_in_band != 0) {
            d_choice = best_in_band;
        } else {
            d_choice = best_any;
            rep.warnings.push_back(
                "no feasible hidden dimension inside the near-optimal band; "
                "snapped to the nearest feasible value");
        }
        rep.d_hidden = ProvValue{static_cast<double>(d_choice), laws.d_band_of_c->source};
        rep.band_slack = laws.d_band_of_c->tolerance;
    } else {
        d_choice = iv.d_median;
        rep.d_hidden = ProvValue{static_cast<double>(d_choice), Provenance::solver_derived};
        rep.warnings.push_back(
            "hidden-dimension law is not in the lawset; using the feasible-interval median");
    }

    StructuralSolution sol = solve_structure(target, d_choice, opt.solver);
    if (!sol.accepted())
        throw DomainError("design stage solve: " + to_string(sol.status) + ", " + sol.reason);
    rep.solution = std::move(sol);
    return rep;
}

// ---------------------------------------------------------------------------
// Fitting a lawset from per-scale loss measurements
// ---------------------------------------------------------------------------

struct ScaleRun {
    double c = 0;
    Dataset1D mna_loss; // loss vs m/n_a
    Dataset1D d_loss;   // loss vs hidden dimension
};

struct LawsetFitDiagnostics {
    std::vector<double> c;
    std::vector<double> mna_opt;
    std::vector<double> d_opt, d_l, d_r;
};

/// Fit the density curve per scale (inv-linear) and the hidden-dimension
/// curve per scale (quadratic), extract optima and 0.1% bands, then fit power
/// laws of those optima and band edges against compute.
inline LawSet fit_lawset(const std::vector<ScaleRun>& runs,
                         double band_tolerance = 1e-3,
                         LawsetFitDiagnostics* diag = nullptr) {
    if (runs.size() < 2)
        throw FitError("fit_lawset: single-scale input, cannot fit a law across scales");

    Dataset1D mna_pts, dopt_pts, dl_pts, dr_pts;
    std::string failures;
    for (const auto& run : runs) {
        try {
            const FitResult mf = fit_inv_linear(run.mna_loss);
            if (!mf.x_opt) throw FitError("no interior density optimum");
            const FitResult df = fit_quadratic(run.d_loss);
            if (!df.x_opt) throw FitError("no interior hidden-dimension optimum");
            const Band db = near_optimal_band(df, band_tolerance);
            mna_pts.x.push_back(run.c);
            mna_pts.y.push_back(*mf.x_opt);
            dopt_pts.x.push_back(run.c);
            dopt_pts.y.push_back(*df.x_opt);
            dl_pts.x.push_back(run.c);
            dl_pts.y.push_back(db.x_l);
            dr_pts.x.push_back(run.c);
            dr_pts.y.push_back(db.x_r);
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << (failures.empty() ? "" : "; ") << "scale " << run.c << ": " << e.what();
            failures += os.str();
        }
    }
    if (!failures.empty())
        throw FitError("fit_lawset: partial result, per-scale failures: " + failures);

    const auto law_of = [](const Dataset1D& pts) {
        const FitResult f = fit_power_law(pts);
        return PowerLaw{f.coeff("multiplier"), f.coeff("exponent")};
    };

    LawSet ls = published_lawset();
    const double c_lo = *std::min_element(mna_pts.x.begin(), mna_pts.x.end());
    const double c_hi = *std::max_element(mna_pts.x.begin(), mna_pts.x.end());
    ls.mna_of_c = Law{law_of(mna_pts), Provenance::user_fitted, c_lo, c_hi};
    BandLaws band;
    band.d_l = law_of(dl_pts);
    band.d_opt = law_of(dopt_pts);
    band.d_r = law_of(dr_pts);
    band.tolerance = band_tolerance;
    band.source = Provenance::user_fitted;
    band.c_lo = c_lo;
    band.c_hi = c_hi;
    ls.d_band_of_c = band;

    if (diag) {
        diag->c = mna_pts.x;
        diag->mna_opt = mna_pts.y;
        diag->d_opt = dopt_pts.y;
        diag->d_l = dl_pts.y;
        diag->d_r = dr_pts.y;
    }
    return ls;
}

} // namespace moeplan
