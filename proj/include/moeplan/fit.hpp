// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// Curve families, optimum extraction, near-optimal bands, the robust linear
// band fit, and rank statistics. Every fitter is deterministic; the nonlinear
// saturating-power fit multi-starts from a fixed grid recorded in the result
// metadata.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moeplan/errors.hpp"

namespace moeplan {

struct Dataset1D {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w; // optional per-point weights; empty means unweighted
};

enum class FitFamily {
    power_law,        // y = multiplier * x^exponent
    saturating_power, // y = floor + multiplier * x^exponent
    inv_linear,       // y = a/(x-6) + b*x + c
    bounded_rational, // y = a/(x-c1) + b/(c2-x) + c
    quadratic,        // y = a*x^2 + b*x + c
    linear_band,      // two parallel lines of shared slope containing all points
};

inline std::string to_string(FitFamily f) {
    switch (f) {
        case FitFamily::power_law: return "power-law";
        case FitFamily::saturating_power: return "saturating-power";
        case FitFamily::inv_linear: return "inv-linear";
        case FitFamily::bounded_rational: return "bounded-rational";
        case FitFamily::quadratic: return "quadratic";
        case FitFamily::linear_band: return "linear-band";
    }
    return "unknown";
}

inline FitFamily fit_family_from_string(const std::string& s) {
    for (FitFamily f : {FitFamily::power_law, FitFamily::saturating_power,
                        FitFamily::inv_linear, FitFamily::bounded_rational,
                        FitFamily::quadratic, FitFamily::linear_band})
        if (to_string(f) == s) return f;
    throw InputError("unknown fit family: " + s);
}

struct Band {
    double x_l = 0, x_opt = 0, x_r = 0;
    bool clipped_lo = false, clipped_hi = false;
};

struct FitResult {
    FitFamily family = FitFamily::power_law;
    std::map<std::string, double> coefficients;
    double r_squared = 0; // log-space for power-law, linear-space otherwise
    std::optional<double> x_opt;
    std::optional<Band> band;
    std::vector<double> residuals; // same space as r_squared
    bool converged = true;
    std::map<std::string, double> metadata;
    double domain_lo = 0, domain_hi = 0; // x-range of the fitted data

    double coeff(const std::string& name) const {
        auto it = coefficients.find(name);
        if (it == coefficients.end())
            throw DomainError("FitResult: missing coefficient " + name);
        return it->second;
    }

    /// Evaluate the fitted curve (the mean line for the band family).
    double curve(double x) const {
        switch (family) {
            case FitFamily::power_law:
                return coeff("multiplier") * std::pow(x, coeff("exponent"));
            case FitFamily::saturating_power:
                return coeff("floor") + coeff("multiplier") * std::pow(x, coeff("exponent"));
            case FitFamily::inv_linear:
                return coeff("a") / (x - 6.0) + coeff("b") * x + coeff("c");
            case FitFamily::bounded_rational:
                return coeff("a") / (x - coeff("c1")) + coeff("b") / (coeff("c2") - x) +
                       coeff("c");
            case FitFamily::quadratic:
                return (coeff("a") * x + coeff("b")) * x + coeff("c");
            case FitFamily::linear_band:
                return coeff("slope") * x + coeff("intercept_mean");
        }
        throw DomainError("FitResult: unknown family");
    }
};

struct RankStats {
    double pearson_r = 0, spearman_rho = 0, kendall_tau = 0;
    double p_pearson = 1, p_spearman = 1, p_kendall = 1;
};

// ---------------------------------------------------------------------------
// internals
// ---------------------------------------------------------------------------
namespace numeric {

/// Regularized incomplete beta function I_x(a, b) via the continued fraction
/// evaluated with the modified Lentz scheme.
inline double ibeta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = std::numeric_limits<double>::epsilon();
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const double m2 = 2.0 * m;
        double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 10.0 * eps) break;
    }
    return h;
}

inline double ibeta_reg(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * ibeta_cf(a, b, x) / a;
    return 1.0 - bt * ibeta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of a t statistic with df degrees of freedom.
inline double t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    return ibeta_reg(0.5 * df, 0.5, df / (df + t * t));
}

/// Two-sided p-value of a standard normal statistic.
inline double normal_two_sided_p(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

/// Solve a small dense linear system in place. Throws FitError when singular.
template <int N>
inline std::array<double, N> solve_linear(std::array<std::array<double, N>, N> a,
                                          std::array<double, N> rhs) {
    for (int col = 0; col < N; ++col) {
        int pivot = col;
        for (int r = col + 1; r < N; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-300)
            throw FitError("singular normal equations");
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c2 = col; c2 < N; ++c2) a[r][c2] -= f * a[col][c2];
            rhs[r] -= f * rhs[col];
        }
    }
    std::array<double, N> out{};
    for (int r = N - 1; r >= 0; --r) {
        double acc = rhs[r];
        for (int c2 = r + 1; c2 < N; ++c2) acc -= a[r][c2] * out[c2];
        out[r] = acc / a[r][r];
    }
    return out;
}

/// Weighted least squares over K basis functions via normal equations.
template <int K, typename Basis>
inline std::array<double, K> least_squares(const std::vector<double>& x,
                                           const std::vector<double>& y,
                                           const std::vector<double>& w,
                                           Basis basis) {
    std::array<std::array<double, K>, K> ata{};
    std::array<double, K> aty{};
    for (size_t i = 0; i < x.size(); ++i) {
        const std::array<double, K> phi = basis(x[i]);
        const double wi = w.empty() ? 1.0 : w[i];
        for (int r = 0; r < K; ++r) {
            aty[r] += wi * phi[r] * y[i];
            for (int c = 0; c < K; ++c) ata[r][c] += wi * phi[r] * phi[c];
        }
    }
    return solve_linear<K>(ata, aty);
}

inline double r_squared_of(const std::vector<double>& y,
                           const std::vector<double>& residuals,
                           const std::vector<double>& w) {
    double mean = 0, wsum = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        mean += wi * y[i];
        wsum += wi;
    }
    mean /= wsum;
    double ss_tot = 0, ss_res = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        ss_tot += wi * (y[i] - mean) * (y[i] - mean);
        ss_res += wi * residuals[i] * residuals[i];
    }
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    return 1.0 - ss_res / ss_tot;
}

} // namespace numeric

namespace detail_fit {

inline void check_dataset(const Dataset1D& d, size_t min_points, const char* who,
                          bool require_distinct_x = true) {
    if (d.x.size() != d.y.size())
        throw DomainError(std::string(who) + ": x and y sizes differ");
    if (!d.w.empty() && d.w.size() != d.x.size())
        throw DomainError(std::string(who) + ": weight size differs from data size");
    if (d.x.size() < min_points)
        throw DomainError(std::string(who) + ": needs at least " +
                          std::to_string(min_points) + " points");
    for (double wi : d.w)
        if (!(wi > 0)) throw DomainError(std::string(who) + ": weights must be positive");
    if (require_distinct_x) {
        std::vector<double> xs = d.x;
        std::sort(xs.begin(), xs.end());
        if (std::adjacent_find(xs.begin(), xs.end()) != xs.end())
            throw DomainError(std::string(who) + ": x values must be distinct");
    }
}

inline void set_domain(FitResult& r, const Dataset1D& d) {
    auto [lo, hi] = std::minmax_element(d.x.begin(), d.x.end());
    r.domain_lo = *lo;
    r.domain_hi = *hi;
}

} // namespace detail_fit

// ---------------------------------------------------------------------------
// fitters
// ---------------------------------------------------------------------------

/// Ordinary least squares in log10-log10 space. Residuals and r_squared are
/// reported in log space.
inline FitResult fit_power_law(const Dataset1D& data) {
    detail_fit::check_dataset(data, 2, "fit_power_law");
    for (size_t i = 0; i < data.x.size(); ++i)
        if (!(data.x[i] > 0) || !(data.y[i] > 0))
            throw DomainError("fit_power_law: x and y must be positive");

    std::vector<double> lx(data.x.size()), ly(data.y.size());
    for (size_t i = 0; i < data.x.size(); ++i) {
        lx[i] = std::log10(data.x[i]);
        ly[i] = std::log10(data.y[i]);
    }
    const auto sol = numeric::least_squares<2>(
        lx, ly, data.w, [](double u) { return std::array<double, 2>{1.0, u}; });

    FitResult r;
    r.family = FitFamily::power_law;
    r.coefficients["multiplier"] = std::pow(10.0, sol[0]);
    r.coefficients["exponent"] = sol[1];
    r.residuals.resize(lx.size());
    for (size_t i = 0; i < lx.size(); ++i)
        r.residuals[i] = ly[i] - (sol[0] + sol[1] * lx[i]);
    r.r_squared = numeric::r_squared_of(ly, r.residuals, data.w);
    detail_fit::set_domain(r, data);
    return r;
}

struct SaturatingInit {
    double floor = 0, multiplier = 0, exponent = 0;
};

/// Nonlinear least squares for y = floor + multiplier * x^exponent with
/// floor >= 0, Levenberg-Marquardt from a fixed deterministic start grid.
/// pin_floor_to_zero reduces the model to the plain power law.
inline FitResult fit_saturating_power(const Dataset1D& data,
                                      std::optional<SaturatingInit> init = {},
                                      bool pin_floor_to_zero = false) {
    detail_fit::check_dataset(data, 3, "fit_saturating_power");
    for (size_t i = 0; i < data.x.size(); ++i)
        if (!(data.x[i] > 0))
            throw DomainError("fit_saturating_power: x must be positive");

    if (pin_floor_to_zero) {
        FitResult r = fit_power_law(data);
        r.family = FitFamily::saturating_power;
        r.coefficients["floor"] = 0.0;
        r.metadata["pinned_floor"] = 1.0;
        return r;
    }

    const size_t n = data.x.size();
    const double y_min = *std::min_element(data.y.begin(), data.y.end());
    const double y_max = *std::max_element(data.y.begin(), data.y.end());

    FitResult r;
    r.family = FitFamily::saturating_power;
    detail_fit::set_domain(r, data);

    // Degenerate flat data: the floor absorbs everything.
    if (y_max - y_min <= 1e-14 * std::max(1.0, std::fabs(y_max))) {
        r.coefficients["floor"] = y_min;
        r.coefficients["multiplier"] = 0.0;
        r.coefficients["exponent"] = 0.0;
        r.residuals.assign(n, 0.0);
        for (size_t i = 0; i < n; ++i) r.residuals[i] = y_min - data.y[i];
        r.r_squared = numeric::r_squared_of(data.y, r.residuals, data.w);
        r.metadata["degenerate_constant"] = 1.0;
        return r;
    }

    auto cost_of = [&](double e, double a, double b, std::vector<double>& res) {
        double cost = 0;
        for (size_t i = 0; i < n; ++i) {
            const double wi = data.w.empty() ? 1.0 : data.w[i];
            res[i] = e + a * std::pow(data.x[i], b) - data.y[i];
            cost += wi * res[i] * res[i];
        }
        return cost;
    };

    // Fixed start grid: floor fractions of the smallest observation, the
    // remainder seeded by a log-log fit of (y - floor).
    std::vector<SaturatingInit> starts;
    if (init) starts.push_back(*init);
    for (double frac : {0.0, 0.5, 0.9, 0.99}) {
        const double e0 = std::max(0.0, frac * y_min);
        Dataset1D shifted;
        shifted.x = data.x;
        shifted.w = data.w;
        bool ok = true;
        for (double yi : data.y) {
            if (!(yi - e0 > 0)) { ok = false; break; }
            shifted.y.push_back(yi - e0);
        }
        if (!ok) continue;
        try {
            const FitResult pl = fit_power_law(shifted);
            starts.push_back({e0, pl.coeff("multiplier"), pl.coeff("exponent")});
        } catch (const FitError&) {
            continue;
        }
    }
    if (starts.empty()) starts.push_back({0.0, y_max, 0.0});

    double best_cost = std::numeric_limits<double>::infinity();
    SaturatingInit best{};
    int best_start = -1, best_iters = 0;
    bool best_converged = false;

    std::vector<double> res(n), trial_res(n);
    for (size_t si = 0; si < starts.size(); ++si) {
        double e = std::max(0.0, starts[si].floor);
        double a = starts[si].multiplier;
        double b = starts[si].exponent;
        double lambda = 1e-3;
        double cost = cost_of(e, a, b, res);
        bool converged = false;
        int it = 0;
        for (; it < 250; ++it) {
            std::array<std::array<double, 3>, 3> jtj{};
            std::array<double, 3> jtr{};
            for (size_t i = 0; i < n; ++i) {
                const double wi = data.w.empty() ? 1.0 : data.w[i];
                const double xb = std::pow(data.x[i], b);
                const std::array<double, 3> j = {1.0, xb, a * xb * std::log(data.x[i])};
                for (int p = 0; p < 3; ++p) {
                    jtr[p] += wi * j[p] * res[i];
                    for (int q = 0; q < 3; ++q) jtj[p][q] += wi * j[p] * j[q];
                }
            }
            bool stepped = false;
            for (int tries = 0; tries < 30; ++tries) {
                auto damped = jtj;
                for (int p = 0; p < 3; ++p) damped[p][p] += lambda * (1.0 + jtj[p][p]);
                std::array<double, 3> step{};
                try {
                    step = numeric::solve_linear<3>(damped, jtr);
                } catch (const FitError&) {
                    lambda *= 10;
                    continue;
                }
                const double e2 = std::max(0.0, e - step[0]);
                const double a2 = a - step[1];
                const double b2 = b - step[2];
                const double c2 = cost_of(e2, a2, b2, trial_res);
                if (c2 < cost) {
                    const double rel_drop = (cost - c2) / std::max(cost, 1e-300);
                    e = e2; a = a2; b = b2;
                    cost = c2;
                    res = trial_res;
                    lambda = std::max(lambda * 0.25, 1e-14);
                    stepped = true;
                    if (rel_drop < 1e-14) converged = true;
                    break;
                }
                lambda *= 10;
                if (lambda > 1e14) break;
            }
            if (!stepped) { converged = cost < std::numeric_limits<double>::infinity(); break; }
            if (converged) break;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = {e, a, b};
            best_start = static_cast<int>(si);
            best_iters = it;
            best_converged = converged || it < 250;
        }
    }

    r.coefficients["floor"] = best.floor;
    r.coefficients["multiplier"] = best.multiplier;
    r.coefficients["exponent"] = best.exponent;
    r.residuals.resize(n);
    cost_of(best.floor, best.multiplier, best.exponent, r.residuals);
    r.r_squared = numeric::r_squared_of(data.y, r.residuals, data.w);
    r.converged = best_converged;
    if (!best_converged) r.metadata["best_so_far"] = 1.0;
    r.metadata["start_count"] = static_cast<double>(starts.size());
    r.metadata["selected_start"] = static_cast<double>(best_start);
    r.metadata["iterations"] = static_cast<double>(best_iters);
    return r;
}

/// Least squares over the basis {1/(x-6), x, 1}; interior optimum at
/// 6 + sqrt(a/b) whenever a and b are both positive.
inline FitResult fit_inv_linear(const Dataset1D& data) {
    detail_fit::check_dataset(data, 3, "fit_inv_linear");
    for (double xi : data.x)
        if (!(xi > 6.0)) throw DomainError("fit_inv_linear: x must exceed 6");

    const auto sol = numeric::least_squares<3>(
        data.x, data.y, data.w,
        [](double u) { return std::array<double, 3>{1.0 / (u - 6.0), u, 1.0}; });

    FitResult r;
    r.family = FitFamily::inv_linear;
    r.coefficients["a"] = sol[0];
    r.coefficients["b"] = sol[1];
    r.coefficients["c"] = sol[2];
    r.residuals.resize(data.x.size());
    for (size_t i = 0; i < data.x.size(); ++i)
        r.residuals[i] = r.curve(data.x[i]) - data.y[i];
    r.r_squared = numeric::r_squared_of(data.y, r.residuals, data.w);
    if (sol[0] > 0 && sol[1] > 0) r.x_opt = 6.0 + std::sqrt(sol[0] / sol[1]);
    detail_fit::set_domain(r, data);
    return r;
}

/// Least squares over {1/(x-c1), 1/(c2-x), 1}; interior optimum at
/// (c1*sqrt(b) + c2*sqrt(a)) / (sqrt(a) + sqrt(b)).
inline FitResult fit_bounded_rational(const Dataset1D& data, double c1, double c2) {
    detail_fit::check_dataset(data, 3, "fit_bounded_rational");
    if (!(c1 < c2)) throw DomainError("fit_bounded_rational: requires c1 < c2");
    for (double xi : data.x)
        if (!(xi > c1) || !(xi < c2))
            throw DomainError("fit_bounded_rational: x must lie inside (c1, c2)");

    const auto sol = numeric::least_squares<3>(
        data.x, data.y, data.w, [c1, c2](double u) {
            return std::array<double, 3>{1.0 / (u - c1), 1.0 / (c2 - u), 1.0};
        });

    FitResult r;
    r.family = FitFamily::bounded_rational;
    r.coefficients["a"] = sol[0];
    r.coefficients["b"] = sol[1];
    r.coefficients["c"] = sol[2];
    r.coefficients["c1"] = c1;
    r.coefficients["c2"] = c2;
    r.residuals.resize(data.x.size());
    for (size_t i = 0; i < data.x.size(); ++i)
        r.residuals[i] = r.curve(data.x[i]) - data.y[i];
    r.r_squared = numeric::r_squared_of(data.y, r.residuals, data.w);
    if (sol[0] > 0 && sol[1] > 0) {
        const double sa = std::sqrt(sol[0]), sb = std::sqrt(sol[1]);
        r.x_opt = (c1 * sb + c2 * sa) / (sa + sb);
    }
    detail_fit::set_domain(r, data);
    return r;
}

/// Least-squares parabola, centered internally for conditioning. The vertex
/// is reported only for an upward-opening, non-degenerate quadratic term.
inline FitResult fit_quadratic(const Dataset1D& data) {
    detail_fit::check_dataset(data, 3, "fit_quadratic");

    double x_mean = 0;
    for (double xi : data.x) x_mean += xi;
    x_mean /= static_cast<double>(data.x.size());

    std::vector<double> u(data.x.size());
    for (size_t i = 0; i < data.x.size(); ++i) u[i] = data.x[i] - x_mean;
    const auto sol = numeric::least_squares<3>(
        u, data.y, data.w, [](double v) { return std::array<double, 3>{v * v, v, 1.0}; });

    const double a = sol[0];
    const double b = sol[1] - 2.0 * sol[0] * x_mean;
    const double c = sol[0] * x_mean * x_mean - sol[1] * x_mean + sol[2];

    FitResult r;
    r.family = FitFamily::quadratic;
    r.coefficients["a"] = a;
    r.coefficients["b"] = b;
    r.coefficients["c"] = c;
    r.residuals.resize(data.x.size());
    for (size_t i = 0; i < data.x.size(); ++i)
        r.residuals[i] = r.curve(data.x[i]) - data.y[i];
    r.r_squared = numeric::r_squared_of(data.y, r.residuals, data.w);
    detail_fit::set_domain(r, data);

    double y_scale = 0;
    for (double yi : data.y) y_scale = std::max(y_scale, std::fabs(yi));
    const double half_range = 0.5 * (r.domain_hi - r.domain_lo);
    const bool degenerate =
        std::fabs(a) * half_range * half_range <= 1e-12 * std::max(1.0, y_scale);
    if (degenerate) {
        r.metadata["degenerate_collinear"] = 1.0;
    } else if (a < 0) {
        r.metadata["opens_downward"] = 1.0;
    } else {
        r.x_opt = -b / (2.0 * a);
    }
    return r;
}

/// Minimal-width pair of parallel lines containing every point: the shared
/// slope minimizes max(y - s*x) - min(y - s*x), a convex piecewise-linear
/// objective whose minimum sits on a pairwise slope, so candidate slopes are
/// enumerated exactly.
inline FitResult fit_linear_band(const Dataset1D& data) {
    // Duplicate x values are legitimate here (several optima at one budget);
    // only two distinct abscissae are required.
    detail_fit::check_dataset(data, 2, "fit_linear_band", false);
    const size_t n = data.x.size();
    {
        std::vector<double> xs = data.x;
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        if (xs.size() < 2)
            throw DomainError("fit_linear_band: needs at least 2 distinct x values");
    }

    std::vector<double> candidates = {0.0};
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (data.x[i] != data.x[j])
                candidates.push_back((data.y[j] - data.y[i]) / (data.x[j] - data.x[i]));
    std::sort(candidates.begin(), candidates.end());

    auto width_at = [&](double s, double& lo, double& hi) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (size_t i = 0; i < n; ++i) {
            const double resid = data.y[i] - s * data.x[i];
            lo = std::min(lo, resid);
            hi = std::max(hi, resid);
        }
        return hi - lo;
    };

    double best_s = candidates.front(), best_lo = 0, best_hi = 0;
    double best_w = std::numeric_limits<double>::infinity();
    for (double s : candidates) {
        double lo, hi;
        const double w = width_at(s, lo, hi);
        if (w < best_w) {
            best_w = w;
            best_s = s;
            best_lo = lo;
            best_hi = hi;
        }
    }

    FitResult r;
    r.family = FitFamily::linear_band;
    r.coefficients["slope"] = best_s;
    r.coefficients["intercept_low"] = best_lo;
    r.coefficients["intercept_high"] = best_hi;
    r.coefficients["intercept_mean"] = 0.5 * (best_lo + best_hi);
    r.coefficients["width"] = best_w;
    r.residuals.resize(n);
    for (size_t i = 0; i < n; ++i) r.residuals[i] = r.curve(data.x[i]) - data.y[i];
    r.r_squared = numeric::r_squared_of(data.y, r.residuals, data.w);
    detail_fit::set_domain(r, data);
    return r;
}

/// Connected interval around the optimum where the curve stays within
/// (1 + tolerance) of its minimum. Closed form for quadratics, bisection to a
/// 1e-10 relative level residual otherwise. Sides that never reach the level
/// inside the curve domain are clipped and flagged.
inline Band near_optimal_band(const FitResult& fit, double tolerance,
                              std::optional<double> domain_lo = {},
                              std::optional<double> domain_hi = {}) {
    if (!fit.x_opt)
        throw DomainError("near_optimal_band: fit has no interior optimum");
    if (tolerance < 0) throw DomainError("near_optimal_band: tolerance must be >= 0");

    const double x0 = *fit.x_opt;
    const double y0 = fit.curve(x0);
    if (!(y0 > 0))
        throw DomainError("near_optimal_band: relative band undefined for a non-positive minimum");
    Band band;
    band.x_opt = x0;
    if (tolerance == 0) {
        band.x_l = band.x_r = x0;
        return band;
    }
    const double level = (1.0 + tolerance) * y0;

    if (fit.family == FitFamily::quadratic) {
        const double a = fit.coeff("a");
        const double delta = std::sqrt(tolerance * y0 / a);
        band.x_l = x0 - delta;
        band.x_r = x0 + delta;
    } else {
        // Natural open domain per family.
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        if (fit.family == FitFamily::inv_linear) lo = 6.0;
        if (fit.family == FitFamily::bounded_rational) {
            lo = fit.coeff("c1");
            hi = fit.coeff("c2");
        }

        auto solve_side = [&](bool right, double bound, bool& clipped) {
            // Walk outward until the level is crossed, then bisect.
            double inside = x0;     // curve below level
            double outside = x0;    // curve at or above level once found
            bool found = false;
            if (std::isfinite(bound)) {
                double frac = 0.5;
                for (int k = 0; k < 200; ++k) {
                    outside = right ? bound - frac * (bound - x0) : bound + frac * (x0 - bound);
                    if (fit.curve(outside) >= level) { found = true; break; }
                    inside = outside;
                    frac *= 0.5;
                }
                if (!found) { clipped = true; return outside; }
            } else {
                double step = std::max(std::fabs(x0), 1.0) * 1e-6;
                for (int k = 0; k < 200; ++k) {
                    outside = right ? x0 + step : x0 - step;
                    if (fit.curve(outside) >= level) { found = true; break; }
                    inside = outside;
                    step *= 2.0;
                }
                if (!found) { clipped = true; return outside; }
            }
            for (int k = 0; k < 400; ++k) {
                const double mid = 0.5 * (inside + outside);
                const double fm = fit.curve(mid);
                if (std::fabs(fm - level) <= 1e-10 * level) return mid;
                (fm < level ? inside : outside) = mid;
            }
            return 0.5 * (inside + outside);
        };
        band.x_l = solve_side(false, lo, band.clipped_lo);
        band.x_r = solve_side(true, hi, band.clipped_hi);
    }

    if (domain_lo && band.x_l < *domain_lo) {
        band.x_l = *domain_lo;
        band.clipped_lo = true;
    }
    if (domain_hi && band.x_r > *domain_hi) {
        band.x_r = *domain_hi;
        band.clipped_hi = true;
    }
    return band;
}

// ---------------------------------------------------------------------------
// rank statistics
// ---------------------------------------------------------------------------
namespace detail_fit {

inline std::vector<double> average_ranks(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

inline bool has_ties(const std::vector<double>& v) {
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) != s.end();
}

inline double pearson_of(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0, vx = 0, vy = 0;
    for (size_t i = 0; i < n; ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    if (vx == 0 || vy == 0)
        throw DomainError("rank_stats: undefined-correlation, zero variance input");
    return cov / std::sqrt(vx * vy);
}

} // namespace detail_fit

/// Pearson, Spearman (average ranks for ties; exact rank-difference formula
/// otherwise) and Kendall tau-b. Two-sided p-values use the t approximation
/// with n-2 degrees of freedom for Pearson and Spearman and the tie-corrected
/// normal approximation for Kendall.
inline RankStats rank_stats(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DomainError("rank_stats: length mismatch");
    const size_t n = x.size();
    if (n < 3) throw DomainError("rank_stats: needs at least 3 points");

    RankStats st;
    st.pearson_r = detail_fit::pearson_of(x, y);

    const std::vector<double> rx = detail_fit::average_ranks(x);
    const std::vector<double> ry = detail_fit::average_ranks(y);
    if (!detail_fit::has_ties(x) && !detail_fit::has_ties(y)) {
        double d2 = 0;
        for (size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
        const double nn = static_cast<double>(n);
        st.spearman_rho = 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
    } else {
        st.spearman_rho = detail_fit::pearson_of(rx, ry);
    }

    // Kendall tau-b with tie corrections.
    double concordant = 0, discordant = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double prod = (x[i] - x[j]) * (y[i] - y[j]);
            if (prod > 0) concordant += 1;
            else if (prod < 0) discordant += 1;
        }
    }
    auto tie_sums = [](const std::vector<double>& v, double& t1, double& t2, double& t3) {
        std::vector<double> s = v;
        std::sort(s.begin(), s.end());
        t1 = t2 = t3 = 0;
        size_t i = 0;
        while (i < s.size()) {
            size_t j = i;
            while (j + 1 < s.size() && s[j + 1] == s[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            t1 += t * (t - 1) / 2.0;
            t2 += t * (t - 1) * (2 * t + 5);
            t3 += t * (t - 1) * (t - 2);
            i = j + 1;
        }
    };
    double tx1, tx2, tx3, ty1, ty2, ty3;
    tie_sums(x, tx1, tx2, tx3);
    tie_sums(y, ty1, ty2, ty3);
    const double nn = static_cast<double>(n);
    const double n0 = nn * (nn - 1) / 2.0;
    if (n0 - tx1 == 0 || n0 - ty1 == 0)
        throw DomainError("rank_stats: undefined-correlation, zero variance input");
    st.kendall_tau = (concordant - discordant) /
                     std::sqrt((n0 - tx1) * (n0 - ty1));

    // t-based p for the product-moment statistics.
    auto t_p = [&](double r) {
        const double df = nn - 2.0;
        if (std::fabs(r) >= 1.0) return 0.0;
        const double t = r * std::sqrt(df / (1.0 - r * r));
        return numeric::t_two_sided_p(t, df);
    };
    st.p_pearson = t_p(st.pearson_r);
    st.p_spearman = t_p(st.spearman_rho);

    const double v0 = nn * (nn - 1) * (2 * nn + 5);
    double var = (v0 - tx2 - ty2) / 18.0 +
                 (2.0 * tx1) * (2.0 * ty1) / (2.0 * nn * (nn - 1)) +
                 tx3 * ty3 / (9.0 * nn * (nn - 1) * (nn - 2));
    st.p_kendall = var > 0
                       ? numeric::normal_two_sided_p((concordant - discordant) / std::sqrt(var))
                       : 0.0;
    return st;
}

} // namespace moeplan
