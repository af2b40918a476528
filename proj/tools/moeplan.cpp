// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0
//
// moeplan CLI: compute-budget-to-architecture design, feasibility queries,
// region/grid/sweep plot data, curve fitting, lawset building, corpus
// validation, and the synthetic search harness.
//
// Exit codes: 0 ok, 2 domain/infeasible, 3 fit failure, 4 bad input.
// Units: --compute in FLOPs (scientific notation accepted), --m in GFLOPs,
// token counts are printed in billions.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "moeplan/io.hpp"
#include "moeplan/laws.hpp"
#include "moeplan/region.hpp"
#include "moeplan/search.hpp"
#include "moeplan/solver.hpp"
#include "moeplan/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitFit = 3;
constexpr int kExitInput = 4;

std::string resolve_out(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    if (const char* dir = std::getenv("MOEPLAN_OUT_DIR"))
        return std::string(dir) + "/" + path;
    return path;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        moeplan::write_text_file(resolve_out(out_path), text);
    }
}

moeplan::Count gflops_to_flops(double gf) {
    return static_cast<moeplan::Count>(std::llround(gf * 1e9));
}

struct CommonTargetArgs {
    double m_gflops = 0;
    double mna = 0, nna = 0;
    std::string scale;
};

moeplan::MacroTarget make_target(const CommonTargetArgs& a) {
    const moeplan::ScalePreset& p = moeplan::preset_by_name(a.scale);
    const double m = a.m_gflops > 0 ? a.m_gflops * 1e9
                                    : static_cast<double>(p.m_target);
    return moeplan::ratios_to_macro(m, a.mna, a.nna, p);
}

} // namespace

int main(int argc, char** argv) {
    using namespace moeplan;

    CLI::App app{"MoE architecture design from compute budgets"};
    app.require_subcommand(1);

    // --- design ---------------------------------------------------------
    auto* design_cmd = app.add_subcommand("design", "compute budget to full architecture");
    double design_c = 0;
    std::string design_scale, design_lawset, design_out, design_format = "json";
    bool design_interp_nna = false;
    design_cmd->add_option("--compute", design_c, "compute budget in FLOPs")->required();
    design_cmd->add_option("--scale", design_scale, "scale preset (default: nearest)");
    design_cmd->add_option("--lawset", design_lawset, "lawset JSON file");
    design_cmd->add_option("--out", design_out, "output path (default: stdout)");
    design_cmd->add_option("--format", design_format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
    design_cmd->add_flag("--interpolate-nna", design_interp_nna,
                         "interpolate the expansion-ratio presets in log compute");

    // --- feasible -------------------------------------------------------
    auto* feas_cmd = app.add_subcommand("feasible", "feasible hidden-dimension interval");
    CommonTargetArgs feas_args;
    std::string feas_out;
    feas_cmd->add_option("--m", feas_args.m_gflops, "FLOPs/token in GFLOPs (default: preset)");
    feas_cmd->add_option("--mna", feas_args.mna, "target m/n_a")->required();
    feas_cmd->add_option("--nna", feas_args.nna, "target n/n_a")->required();
    feas_cmd->add_option("--scale", feas_args.scale, "scale preset")->required();
    feas_cmd->add_option("--out", feas_out, "output path (default: stdout)");

    // --- region ---------------------------------------------------------
    auto* region_cmd = app.add_subcommand("region", "feasible-region map in ratio space");
    double region_m_gf = 0;
    std::string region_scale, region_csv_path, region_json_path;
    RegionResolution region_res;
    region_cmd->add_option("--m", region_m_gf, "FLOPs/token in GFLOPs (default: preset)");
    region_cmd->add_option("--scale", region_scale, "scale preset")->required();
    region_cmd->add_option("--m-cells", region_res.m_cells, "cells along m/n_a");
    region_cmd->add_option("--n-cells", region_res.n_cells, "cells along n/n_a");
    region_cmd->add_option("--m-hi", region_res.m_hi, "upper m/n_a bound");
    region_cmd->add_option("--csv", region_csv_path, "CSV output path")->required();
    region_cmd->add_option("--json", region_json_path, "optional JSON output path");

    // --- grid -----------------------------------------------------------
    auto* grid_cmd = app.add_subcommand("grid", "experiment grid at one scale");
    std::string grid_scale, grid_csv_path, grid_json_path;
    std::vector<double> grid_m = default_m_grid(), grid_n = default_n_grid();
    grid_cmd->add_option("--scale", grid_scale, "scale preset")->required();
    grid_cmd->add_option("--m-grid", grid_m, "m/n_a grid values");
    grid_cmd->add_option("--n-grid", grid_n, "n/n_a grid values");
    grid_cmd->add_option("--csv", grid_csv_path, "CSV output path")->required();
    grid_cmd->add_option("--json", grid_json_path, "optional JSON output path");

    // --- sweep-d ---------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep-d", "hidden-dimension sweep for a target");
    CommonTargetArgs sweep_args;
    std::string sweep_csv_path;
    sweep_cmd->add_option("--m", sweep_args.m_gflops, "FLOPs/token in GFLOPs (default: preset)");
    sweep_cmd->add_option("--mna", sweep_args.mna, "target m/n_a")->required();
    sweep_cmd->add_option("--nna", sweep_args.nna, "target n/n_a")->required();
    sweep_cmd->add_option("--scale", sweep_args.scale, "scale preset")->required();
    sweep_cmd->add_option("--csv", sweep_csv_path, "CSV output path")->required();

    // --- fit --------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit one curve family to CSV data");
    std::string fit_family, fit_data, fit_out;
    double fit_tolerance = 1e-3;
    double fit_c1 = 1.0, fit_c2 = 289.0 / 9.0;
    bool fit_pin_floor = false;
    fit_cmd->add_option("--family", fit_family, "power-law | saturating-power | inv-linear | bounded-rational | quadratic | linear-band")
        ->required();
    fit_cmd->add_option("--data", fit_data, "input CSV with header x,y[,weight]")->required();
    fit_cmd->add_option("--tolerance", fit_tolerance, "near-optimal band tolerance");
    fit_cmd->add_option("--c1", fit_c1, "lower pole for bounded-rational");
    fit_cmd->add_option("--c2", fit_c2, "upper pole for bounded-rational");
    fit_cmd->add_flag("--pin-floor", fit_pin_floor, "pin the saturating-power floor to 0");
    fit_cmd->add_option("--out", fit_out, "output path (default: stdout)");

    // --- lawset -----------------------------------------------------------
    auto* lawset_cmd = app.add_subcommand("lawset", "lawset operations");
    lawset_cmd->require_subcommand(1);
    auto* lawset_fit_cmd = lawset_cmd->add_subcommand("fit", "build a lawset from per-scale runs");
    std::string lawset_runs, lawset_out;
    lawset_fit_cmd->add_option("--runs", lawset_runs,
                               "directory with c<budget>_mna.csv and c<budget>_d.csv files")
        ->required();
    lawset_fit_cmd->add_option("--out", lawset_out, "output path (default: stdout)");
    auto* lawset_show_cmd = lawset_cmd->add_subcommand("show", "print the built-in lawset");
    std::string lawset_show_out;
    lawset_show_cmd->add_option("--out", lawset_show_out, "output path (default: stdout)");

    // --- validate -----------------------------------------------------------
    auto* validate_cmd = app.add_subcommand("validate", "check the reference corpus");
    std::string validate_dir;
    validate_cmd->add_option("--tables", validate_dir, "fixture table directory")->required();

    // --- harness -------------------------------------------------------------
    auto* harness_cmd = app.add_subcommand("harness", "two-phase proxy search scenarios");
    std::vector<std::uint64_t> harness_seeds;
    double harness_amp = 0.1;
    int harness_grid = 6;
    std::string harness_summary_path, harness_scatter_path;
    harness_cmd->add_option("--seed", harness_seeds, "seed list (default: shipped list)");
    harness_cmd->add_option("--amp-rel", harness_amp,
                            "perturbation amplitude relative to the minimum inter-cell gap");
    harness_cmd->add_option("--grid", harness_grid, "square grid size (2..6)");
    harness_cmd->add_option("--summary", harness_summary_path, "summary CSV path")->required();
    harness_cmd->add_option("--scatter", harness_scatter_path, "scatter CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (*design_cmd) {
            LawSet laws = published_lawset();
            if (!design_lawset.empty())
                laws = json::parse(read_text_file(design_lawset)).get<LawSet>();
            const ScalePreset& preset = design_scale.empty()
                                            ? preset_nearest_c(design_c)
                                            : preset_by_name(design_scale);
            DesignOptions opt;
            opt.interpolate_nna = design_interp_nna;
            const DesignReport rep = design(design_c, laws, preset, opt);
            if (design_format == "text") {
                emit(design_out, design_summary(rep));
            } else {
                emit(design_out, json(rep).dump(2) + "\n");
            }
            for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
            return kExitOk;
        }
        if (*feas_cmd) {
            const MacroTarget t = make_target(feas_args);
            const FeasibleInterval iv = feasible_d_interval(t);
            if (iv.empty()) {
                std::cerr << "infeasible-target: no feasible hidden dimension\n";
                return kExitDomain;
            }
            emit(feas_out, json(iv).dump(2) + "\n");
            std::cerr << "feasible d in [" << iv.d_min << ", " << iv.d_max << "], "
                      << iv.feasible.size() << " values, median " << iv.d_median << "\n";
            return kExitOk;
        }
        if (*region_cmd) {
            const ScalePreset& p = preset_by_name(region_scale);
            const Count m = region_m_gf > 0 ? gflops_to_flops(region_m_gf) : p.m_target;
            const RegionMap map = map_region(m, p, region_res);
            emit(region_csv_path, region_csv(map));
            if (!region_json_path.empty()) emit(region_json_path, json(map).dump(2) + "\n");
            std::cerr << "region cells: " << map.cells.size() << "\n";
            return kExitOk;
        }
        if (*grid_cmd) {
            const ScalePreset& p = preset_by_name(grid_scale);
            const ExperimentGrid grid = generate_grid(p, grid_m, grid_n);
            emit(grid_csv_path, grid_csv(grid_rows(grid)));
            if (!grid_json_path.empty()) emit(grid_json_path, json(grid_rows(grid)).dump(2) + "\n");
            std::cerr << "grid points: " << grid.points.size() << ", infeasible: "
                      << grid.infeasible.size() << "\n";
            return kExitOk;
        }
        if (*sweep_cmd) {
            const MacroTarget t = make_target(sweep_args);
            const auto sweep = sweep_d(t);
            if (sweep.empty()) {
                std::cerr << "infeasible-target: empty sweep\n";
                return kExitDomain;
            }
            emit(sweep_csv_path, sweep_csv(sweep_rows(sweep)));
            std::cerr << "sweep points: " << sweep.size() << "\n";
            return kExitOk;
        }
        if (*fit_cmd) {
            const Dataset1D data = parse_dataset_csv(read_text_file(fit_data));
            const FitFamily family = fit_family_from_string(fit_family);
            FitResult result;
            switch (family) {
                case FitFamily::power_law: result = fit_power_law(data); break;
                case FitFamily::saturating_power:
                    result = fit_saturating_power(data, {}, fit_pin_floor);
                    break;
                case FitFamily::inv_linear: result = fit_inv_linear(data); break;
                case FitFamily::bounded_rational:
                    result = fit_bounded_rational(data, fit_c1, fit_c2);
                    break;
                case FitFamily::quadratic: result = fit_quadratic(data); break;
                case FitFamily::linear_band: result = fit_linear_band(data); break;
            }
            if (result.x_opt) result.band = near_optimal_band(result, fit_tolerance);
            emit(fit_out, json(result).dump(2) + "\n");
            if (!result.converged) {
                std::cerr << "fit did not converge; best-so-far reported\n";
                return kExitFit;
            }
            return kExitOk;
        }
        if (*lawset_fit_cmd) {
            // Run files: c<budget>_mna.csv and c<budget>_d.csv per scale.
            std::vector<ScaleRun> runs;
            for (const auto& p : scale_presets()) {
                const std::string base = lawset_runs + "/c" + p.name;
                std::ifstream probe(base + "_mna.csv");
                if (!probe) continue;
                ScaleRun run;
                run.c = p.c;
                run.mna_loss = parse_dataset_csv(read_text_file(base + "_mna.csv"));
                run.d_loss = parse_dataset_csv(read_text_file(base + "_d.csv"));
                runs.push_back(std::move(run));
            }
            if (runs.empty())
                throw InputError("no c<budget>_mna.csv files found in " + lawset_runs);
            const LawSet ls = fit_lawset(runs);
            emit(lawset_out, json(ls).dump(2) + "\n");
            return kExitOk;
        }
        if (*lawset_show_cmd) {
            emit(lawset_show_out, json(published_lawset()).dump(2) + "\n");
            return kExitOk;
        }
        if (*validate_cmd) {
            const CorpusValidation rep = validate_corpus(validate_dir);
            std::cout << validation_summary(rep);
            return rep.ok() ? kExitOk : kExitDomain;
        }
        if (*harness_cmd) {
            const std::vector<std::uint64_t>& seeds =
                harness_seeds.empty() ? shipped_seed_list() : harness_seeds;
            const auto factory = [&](std::uint64_t seed) {
                return make_rank_exact_scenario(static_cast<size_t>(harness_grid),
                                                harness_amp, seed);
            };
            const ProxyValidationReport rep = proxy_validation_report(factory, seeds);
            emit(harness_summary_path, harness_summary_csv(rep));
            if (!harness_scatter_path.empty()) {
                std::vector<ScatterCsvRow> scatter;
                for (std::uint64_t seed : seeds) {
                    const HarnessScenario sc = factory(seed);
                    const auto& land = sc.landscape;
                    for (size_t i = 0; i < land.m_values.size(); ++i) {
                        for (size_t j = 0; j < land.n_values.size(); ++j) {
                            const auto& iv = sc.intervals[land.cell_index(i, j)];
                            ScatterCsvRow row;
                            row.seed = seed;
                            row.m_over_na = land.m_values[i];
                            row.n_over_na = land.n_values[j];
                            row.proxy_loss = evaluate(land, i, j, iv.d_median);
                            double mn = row.proxy_loss;
                            for (Count d : iv.feasible)
                                mn = std::min(mn, evaluate(land, i, j, d));
                            row.true_min_loss = mn;
                            scatter.push_back(row);
                        }
                    }
                }
                emit(harness_scatter_path, scatter_csv(scatter));
            }
            const auto& ref = published_proxy_correlations();
            std::cerr << "mean pearson " << format_double(rep.mean_pearson) << ", spearman "
                      << format_double(rep.mean_spearman) << ", kendall "
                      << format_double(rep.mean_kendall) << " (reference " << ref[0] << ", "
                      << ref[1] << ", " << ref[2] << ")\n";
            return kExitOk;
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFit;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
