// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "helpers.hpp"
#include "moeplan/fit.hpp"
#include "moeplan/presets.hpp"

using namespace moeplan;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Dataset1D sample(const std::vector<double>& xs, const std::function<double(double)>& f) {
    Dataset1D d;
    for (double x : xs) {
        d.x.push_back(x);
        d.y.push_back(f(x));
    }
    return d;
}

} // namespace

TEST_CASE("power law recovers planted coefficients exactly") {
    const FitResult r =
        fit_power_law(sample({1, 4, 9}, [](double x) { return 2.0 * std::sqrt(x); }));
    REQUIRE_THAT(r.coeff("multiplier"), WithinRel(2.0, 1e-12));
    REQUIRE_THAT(r.coeff("exponent"), WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(r.r_squared, WithinAbs(1.0, 1e-12));
}

TEST_CASE("power law rejects non-positive values") {
    Dataset1D d;
    d.x = {1, 2, 3};
    d.y = {1, -1, 2};
    REQUIRE_THROWS_AS(fit_power_law(d), DomainError);
}

TEST_CASE("refitting the preset (c, m) and (c, d) columns recovers the exponents") {
    Dataset1D cm, cd;
    for (const auto& p : scale_presets()) {
        cm.x.push_back(p.c);
        cm.y.push_back(static_cast<double>(p.m_target));
        cd.x.push_back(p.c);
        cd.y.push_back(p.d_tokens);
    }
    const FitResult m_fit = fit_power_law(cm);
    REQUIRE_THAT(m_fit.coeff("exponent"), WithinAbs(0.5437, 0.002));
    REQUIRE_THAT(m_fit.coeff("multiplier"), WithinRel(0.04368, 0.02));

    const FitResult d_fit = fit_power_law(cd);
    REQUIRE_THAT(d_fit.coeff("exponent"), WithinAbs(0.4563, 0.002));
}

TEST_CASE("saturating power recovers a planted floor") {
    std::vector<double> xs;
    for (int i = 0; i < 8; ++i) xs.push_back(std::pow(10.0, 0.4 * i));
    const FitResult r = fit_saturating_power(
        sample(xs, [](double x) { return 1.5 + 10.0 * std::pow(x, -0.3); }));
    REQUIRE(r.converged);
    REQUIRE_THAT(r.coeff("floor"), WithinAbs(1.5, 1e-6));
    REQUIRE_THAT(r.coeff("multiplier"), WithinRel(10.0, 1e-6));
    REQUIRE_THAT(r.coeff("exponent"), WithinAbs(-0.3, 1e-6));
    REQUIRE(r.metadata.count("start_count") == 1);
    REQUIRE(r.metadata.count("selected_start") == 1);
}

TEST_CASE("pinning the floor to zero reduces to the plain power law") {
    const Dataset1D data =
        sample({1, 2, 4, 8, 16}, [](double x) { return 3.0 * std::pow(x, 0.7); });
    const FitResult pinned = fit_saturating_power(data, {}, true);
    const FitResult plain = fit_power_law(data);
    REQUIRE(pinned.coeff("floor") == 0.0);
    REQUIRE_THAT(pinned.coeff("multiplier"), WithinRel(plain.coeff("multiplier"), 1e-9));
    REQUIRE_THAT(pinned.coeff("exponent"), WithinAbs(plain.coeff("exponent"), 1e-9));
}

TEST_CASE("constant data collapses to the floor") {
    const FitResult r =
        fit_saturating_power(sample({1, 2, 3, 4}, [](double) { return 2.75; }));
    REQUIRE(r.converged);
    REQUIRE_THAT(r.coeff("floor"), WithinAbs(2.75, 1e-12));
    REQUIRE_THAT(r.coeff("multiplier"), WithinAbs(0.0, 1e-12));
}

TEST_CASE("inv-linear analytic optimum") {
    // Exact: vertex of a/(x-6) + b*x at 6 + sqrt(a/b).
    const FitResult r = fit_inv_linear(sample(
        {7, 8, 9, 10, 12, 14, 16, 18, 20},
        [](double x) { return 1.0 / (x - 6.0) + 0.01 * x; }));
    REQUIRE(r.x_opt.has_value());
    REQUIRE_THAT(*r.x_opt, WithinAbs(16.0, 1e-9));
    REQUIRE_THAT(r.coeff("a"), WithinRel(1.0, 1e-10));
    REQUIRE_THAT(r.coeff("b"), WithinRel(0.01, 1e-10));
    REQUIRE_THAT(r.coeff("c"), WithinAbs(0.0, 1e-10));
}

TEST_CASE("inv-linear planted recovery and numeric cross-check") {
    std::vector<double> xs;
    for (int i = 7; i <= 17; ++i) xs.push_back(static_cast<double>(i));
    const FitResult r = fit_inv_linear(sample(
        xs, [](double x) { return 0.5 / (x - 6.0) + 0.02 * x + 1.0; }));
    REQUIRE_THAT(r.coeff("a"), WithinRel(0.5, 1e-9));
    REQUIRE_THAT(r.coeff("b"), WithinRel(0.02, 1e-9));
    REQUIRE_THAT(r.coeff("c"), WithinRel(1.0, 1e-9));
    REQUIRE(r.x_opt.has_value());
    REQUIRE_THAT(*r.x_opt, WithinAbs(11.0, 1e-6));

    const double numeric = test_helpers::golden_minimize(
        [&](double x) { return r.curve(x); }, 6.0 + 1e-6, 40.0);
    REQUIRE_THAT(*r.x_opt, WithinAbs(numeric, 1e-6));
}

TEST_CASE("inv-linear domain and missing-optimum cases") {
    Dataset1D bad;
    bad.x = {5, 7, 8};
    bad.y = {1, 2, 3};
    REQUIRE_THROWS_AS(fit_inv_linear(bad), DomainError);

    // Monotone decreasing data has no interior optimum (b < 0).
    const FitResult r = fit_inv_linear(
        sample({7, 9, 11, 13, 15, 17}, [](double x) { return 5.0 - 0.1 * x; }));
    REQUIRE_FALSE(r.x_opt.has_value());
}

TEST_CASE("bounded rational: symmetric coefficients put the optimum midway") {
    const double c1 = 1.0, c2 = 289.0 / 9.0;
    const FitResult r = fit_bounded_rational(
        sample({12, 16, 20, 22, 26, 30},
               [&](double x) { return 2.0 / (x - c1) + 2.0 / (c2 - x) + 0.7; }),
        c1, c2);
    REQUIRE(r.x_opt.has_value());
    REQUIRE_THAT(*r.x_opt, WithinRel(0.5 * (c1 + c2), 1e-10));
}

TEST_CASE("bounded rational planted recovery and numeric cross-check") {
    const double c1 = 1.0, c2 = 289.0 / 9.0;
    const FitResult r = fit_bounded_rational(
        sample({12, 16, 20, 22, 26, 30},
               [&](double x) { return 2.0 / (x - c1) + 5.0 / (c2 - x) + 0.9; }),
        c1, c2);
    REQUIRE_THAT(r.coeff("a"), WithinRel(2.0, 1e-8));
    REQUIRE_THAT(r.coeff("b"), WithinRel(5.0, 1e-8));
    REQUIRE_THAT(r.coeff("c"), WithinRel(0.9, 1e-8));
    const double expected =
        (c1 * std::sqrt(5.0) + c2 * std::sqrt(2.0)) / (std::sqrt(2.0) + std::sqrt(5.0));
    REQUIRE(r.x_opt.has_value());
    REQUIRE_THAT(*r.x_opt, WithinRel(expected, 1e-8));

    const double numeric = test_helpers::golden_minimize(
        [&](double x) { return r.curve(x); }, c1 + 1e-6, c2 - 1e-6);
    REQUIRE_THAT(*r.x_opt, WithinAbs(numeric, 1e-6));
}

TEST_CASE("bounded rational rejects points outside the open interval") {
    Dataset1D d;
    d.x = {0.5, 12, 20};
    d.y = {1, 2, 3};
    REQUIRE_THROWS_AS(fit_bounded_rational(d, 1.0, 289.0 / 9.0), DomainError);
}

TEST_CASE("quadratic vertex, degenerate, and downward cases") {
    const FitResult exact = fit_quadratic(
        sample({1, 2, 3, 4, 5}, [](double x) { return (x - 3.0) * (x - 3.0) + 2.0; }));
    REQUIRE(exact.x_opt.has_value());
    REQUIRE_THAT(*exact.x_opt, WithinAbs(3.0, 1e-10));
    REQUIRE_THAT(exact.curve(*exact.x_opt), WithinAbs(2.0, 1e-10));

    std::vector<double> ds;
    for (int d = 600; d <= 1400; d += 100) ds.push_back(static_cast<double>(d));
    const FitResult planted = fit_quadratic(sample(ds, [](double d) {
        return 1e-8 * (d - 1000.0) * (d - 1000.0) + 2.0;
    }));
    REQUIRE(planted.x_opt.has_value());
    REQUIRE_THAT(*planted.x_opt, WithinAbs(1000.0, 1e-3));
    const double numeric = test_helpers::golden_minimize(
        [&](double x) { return planted.curve(x); }, 0.0, 3000.0);
    REQUIRE_THAT(*planted.x_opt, WithinAbs(numeric, 1e-6));

    const FitResult flat =
        fit_quadratic(sample({1, 2, 3, 4, 5}, [](double x) { return 2.0 * x + 1.0; }));
    REQUIRE_FALSE(flat.x_opt.has_value());
    REQUIRE(flat.metadata.count("degenerate_collinear") == 1);

    const FitResult down =
        fit_quadratic(sample({1, 2, 3, 4, 5}, [](double x) { return -(x - 3.0) * (x - 3.0); }));
    REQUIRE_FALSE(down.x_opt.has_value());
    REQUIRE(down.metadata.count("opens_downward") == 1);
}

TEST_CASE("near-optimal band: closed form for quadratics") {
    std::vector<double> ds;
    for (int d = 200; d <= 1800; d += 100) ds.push_back(static_cast<double>(d));
    const FitResult fit = fit_quadratic(sample(ds, [](double d) {
        return 1e-8 * (d - 1000.0) * (d - 1000.0) + 2.0;
    }));
    const Band band = near_optimal_band(fit, 1e-3);
    const double half = std::sqrt(1e-3 * 2.0 / 1e-8);
    REQUIRE_THAT(band.x_l, WithinAbs(1000.0 - half, 1e-3));
    REQUIRE_THAT(band.x_r, WithinAbs(1000.0 + half, 1e-3));
    REQUIRE_THAT(half, WithinAbs(447.2135955, 1e-6));
    REQUIRE_FALSE(band.clipped_lo);
    REQUIRE_FALSE(band.clipped_hi);

    // Endpoints satisfy the level equation.
    const double level = (1.0 + 1e-3) * fit.curve(band.x_opt);
    REQUIRE_THAT(fit.curve(band.x_l), WithinRel(level, 1e-10));
    REQUIRE_THAT(fit.curve(band.x_r), WithinRel(level, 1e-10));
}

TEST_CASE("near-optimal band: zero tolerance degenerates to the optimum") {
    const FitResult fit = fit_quadratic(
        sample({1, 2, 3, 4, 5}, [](double x) { return (x - 3.0) * (x - 3.0) + 2.0; }));
    const Band band = near_optimal_band(fit, 0.0);
    REQUIRE(band.x_l == band.x_opt);
    REQUIRE(band.x_r == band.x_opt);
}

TEST_CASE("near-optimal band: bisection sides for the density curve") {
    const FitResult fit = fit_inv_linear(sample(
        {7, 8, 9, 10, 12, 14, 16, 18, 20, 24, 28},
        [](double x) { return 1.0 / (x - 6.0) + 0.01 * x; }));
    REQUIRE(fit.x_opt.has_value());
    const Band band = near_optimal_band(fit, 1e-3);
    REQUIRE(band.x_l < *fit.x_opt);
    REQUIRE(band.x_r > *fit.x_opt);
    REQUIRE(band.x_l > 6.0);
    const double level = (1.0 + 1e-3) * fit.curve(band.x_opt);
    REQUIRE_THAT(fit.curve(band.x_l), WithinRel(level, 1e-10));
    REQUIRE_THAT(fit.curve(band.x_r), WithinRel(level, 1e-10));
}

TEST_CASE("near-optimal band: explicit domain clipping is flagged") {
    std::vector<double> ds;
    for (int d = 200; d <= 1800; d += 100) ds.push_back(static_cast<double>(d));
    const FitResult fit = fit_quadratic(sample(ds, [](double d) {
        return 1e-8 * (d - 1000.0) * (d - 1000.0) + 2.0;
    }));
    const Band band = near_optimal_band(fit, 1e-3, 800.0, 1100.0);
    REQUIRE(band.x_l == 800.0);
    REQUIRE(band.x_r == 1100.0);
    REQUIRE(band.clipped_lo);
    REQUIRE(band.clipped_hi);
}

TEST_CASE("near-optimal band requires an optimum") {
    const FitResult r =
        fit_power_law(sample({1, 2, 4}, [](double x) { return 2.0 * x; }));
    REQUIRE_THROWS_AS(near_optimal_band(r, 1e-3), DomainError);
}

TEST_CASE("linear band: collinear points give a zero-width band") {
    const FitResult r = fit_linear_band(
        sample({0, 1, 2, 3}, [](double x) { return 2.0 * x + 1.0; }));
    REQUIRE_THAT(r.coeff("slope"), WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(r.coeff("width"), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(r.coeff("intercept_mean"), WithinAbs(1.0, 1e-12));
}

TEST_CASE("linear band: the four-point anchor") {
    Dataset1D d;
    d.x = {0, 1, 0, 1};
    d.y = {0, 1, 1, 2};
    const FitResult r = fit_linear_band(d);
    REQUIRE_THAT(r.coeff("slope"), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(r.coeff("width"), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(r.coeff("intercept_mean"), WithinAbs(0.5, 1e-12));
}

TEST_CASE("linear band: contains every point and is width-minimal") {
    test_helpers::Lcg rng(99);
    Dataset1D d;
    for (int i = 0; i < 12; ++i) {
        d.x.push_back(rng.uniform(0, 10));
        d.y.push_back(0.7 * d.x.back() + rng.uniform(-1, 1));
    }
    const FitResult r = fit_linear_band(d);
    const double s = r.coeff("slope");
    const double lo = r.coeff("intercept_low");
    const double hi = r.coeff("intercept_high");
    for (size_t i = 0; i < d.x.size(); ++i) {
        const double resid = d.y[i] - s * d.x[i];
        REQUIRE(resid >= lo - 1e-12);
        REQUIRE(resid <= hi + 1e-12);
    }
    // Dense slope grid cannot beat the candidate-slope minimum.
    for (double cand = -2.0; cand <= 3.0; cand += 0.001) {
        double mn = 1e300, mx = -1e300;
        for (size_t i = 0; i < d.x.size(); ++i) {
            const double resid = d.y[i] - cand * d.x[i];
            mn = std::min(mn, resid);
            mx = std::max(mx, resid);
        }
        REQUIRE(r.coeff("width") <= (mx - mn) + 1e-12);
    }
}

TEST_CASE("linear band over the preset learning rates contains all six") {
    Dataset1D d;
    for (const auto& p : scale_presets()) {
        d.x.push_back(std::log10(p.c));
        d.y.push_back(std::log10(p.lr));
    }
    const FitResult r = fit_linear_band(d);
    const double s = r.coeff("slope");
    for (size_t i = 0; i < d.x.size(); ++i) {
        const double resid = d.y[i] - s * d.x[i];
        REQUIRE(resid >= r.coeff("intercept_low") - 1e-12);
        REQUIRE(resid <= r.coeff("intercept_high") + 1e-12);
    }
    REQUIRE(s < 0); // learning rate decays with compute
}

TEST_CASE("linear band needs two distinct abscissae") {
    Dataset1D d;
    d.x = {1, 1, 1};
    d.y = {1, 2, 3};
    REQUIRE_THROWS_AS(fit_linear_band(d), DomainError);
}

TEST_CASE("rank statistics: hand-computed three-point anchor") {
    const RankStats st = rank_stats({1, 2, 3}, {6, 4, 5});
    REQUIRE(st.spearman_rho == -0.5);
    REQUIRE(st.kendall_tau == -1.0 / 3.0);
    REQUIRE_THAT(st.pearson_r, WithinAbs(-0.5, 1e-12));
    REQUIRE_THAT(st.p_pearson, WithinRel(0.6666666666666666, 1e-9));
    REQUIRE_THAT(st.p_spearman, WithinRel(0.6666666666666667, 1e-9));
    REQUIRE_THAT(st.p_kendall, WithinRel(0.6015081344405899, 1e-9));
}

TEST_CASE("rank statistics: eight-point anchor") {
    const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
    const std::vector<double> y = {2.1, 2.0, 3.5, 3.1, 5.0, 4.9, 6.2, 7.0};
    const RankStats st = rank_stats(x, y);
    REQUIRE_THAT(st.pearson_r, WithinRel(0.9686759953642405, 1e-12));
    REQUIRE_THAT(st.p_pearson, WithinRel(7.50434269707325e-05, 1e-9));
    REQUIRE_THAT(st.spearman_rho, WithinRel(13.0 / 14.0, 1e-12));
    REQUIRE_THAT(st.p_spearman, WithinRel(0.0008629681828999769, 1e-9));
    REQUIRE_THAT(st.kendall_tau, WithinRel(11.0 / 14.0, 1e-12));
    REQUIRE_THAT(st.p_kendall, WithinRel(0.006492857745083887, 1e-9));
}

TEST_CASE("rank statistics: tie handling matches the reference values") {
    const std::vector<double> x = {1, 2, 2, 3, 4, 5};
    const std::vector<double> y = {1, 1, 2, 3, 3, 5};
    const RankStats st = rank_stats(x, y);
    REQUIRE_THAT(st.spearman_rho, WithinRel(0.9404032585917881, 1e-9));
    REQUIRE_THAT(st.p_spearman, WithinRel(0.005221820373325761, 1e-9));
    REQUIRE_THAT(st.kendall_tau, WithinRel(0.8894991799933215, 1e-9));
    REQUIRE_THAT(st.p_kendall, WithinRel(0.017411131570499803, 1e-9));
}

TEST_CASE("rank statistics: monotone data is exactly plus or minus one") {
    const RankStats same = rank_stats({1, 2, 3, 4}, {1, 2, 3, 4});
    REQUIRE(same.pearson_r == 1.0);
    REQUIRE(same.spearman_rho == 1.0);
    REQUIRE(same.kendall_tau == 1.0);
    REQUIRE(same.p_pearson == 0.0);

    const RankStats rev = rank_stats({1, 2, 3, 4}, {4, 3, 2, 1});
    REQUIRE(rev.pearson_r == -1.0);
    REQUIRE(rev.spearman_rho == -1.0);
    REQUIRE(rev.kendall_tau == -1.0);

    // Strictly monotone nonlinear data: the rank statistics are still exact.
    const RankStats cube = rank_stats({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125});
    REQUIRE(cube.spearman_rho == 1.0);
    REQUIRE(cube.kendall_tau == 1.0);
}

TEST_CASE("rank statistics: zero variance is undefined") {
    REQUIRE_THROWS_WITH(rank_stats({1, 1, 1}, {1, 2, 3}),
                        Catch::Matchers::ContainsSubstring("undefined-correlation"));
    REQUIRE_THROWS_AS(rank_stats({1, 2}, {1, 2}), DomainError);
    REQUIRE_THROWS_AS(rank_stats({1, 2, 3}, {1, 2}), DomainError);
}

TEST_CASE("every planted family recovers to at least 1e-8 relative") {
    // One compact check per family, the acceptance gate re-runs these.
    const FitResult pl =
        fit_power_law(sample({2, 3, 5, 8}, [](double x) { return 4.0 * std::pow(x, 1.3); }));
    REQUIRE_THAT(pl.coeff("multiplier"), WithinRel(4.0, 1e-8));
    REQUIRE_THAT(pl.coeff("exponent"), WithinRel(1.3, 1e-8));

    const FitResult q = fit_quadratic(sample(
        {10, 20, 30, 40, 50}, [](double x) { return 0.25 * x * x - 3.0 * x + 11.0; }));
    REQUIRE_THAT(q.coeff("a"), WithinRel(0.25, 1e-8));
    REQUIRE_THAT(q.coeff("b"), WithinRel(-3.0, 1e-8));
    REQUIRE_THAT(q.coeff("c"), WithinRel(11.0, 1e-8));
}
