// Command-line driver: calibrate, solve-ss, transition, report, print-defaults.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "olg/calibration.hpp"
#include "olg/params.hpp"
#include "olg/report.hpp"
#include "olg/steady_state.hpp"
#include "olg/svg.hpp"
#include "olg/transition.hpp"

namespace fs = std::filesystem;
using namespace olg;

namespace {

struct CommonFlags {
    std::string config;
    std::vector<std::string> scenarios;
    std::optional<int> horizon;
    std::optional<double> tol;
    std::optional<double> damping;
    std::string out = "out";
    bool no_timestamp = false;
};

struct Setup {
    ModelParams params;
    ScenarioSpec spec;
    std::vector<Instrument> instruments;
};

Setup load_setup(const CommonFlags& f, std::vector<Instrument> default_set) {
    Setup s;
    bool instrument_from_config = false;
    if (!f.config.empty()) {
        std::tie(s.params, s.spec) = load_config(f.config);
        instrument_from_config = true;
    }
    if (f.horizon) s.spec.horizon_T = *f.horizon;
    if (!f.scenarios.empty()) {
        for (const auto& name : f.scenarios) s.instruments.push_back(parse_instrument(name));
    } else if (instrument_from_config && s.spec.instrument != Instrument::baseline_paygo) {
        s.instruments = {s.spec.instrument};
    } else {
        s.instruments = std::move(default_set);
    }
    validate(s.params);
    validate(s.spec, s.params);
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<std::string> timestamp(bool suppressed) {
    if (suppressed) return std::nullopt;
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

std::string command_line(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) out += ' ';
        out += argv[i];
    }
    return out;
}

const std::vector<Instrument> kReforms = {Instrument::labor_tax, Instrument::profit_tax,
                                          Instrument::capital_income_tax};

int run_print_defaults() {
    fmt::print("{}", serialize_config(ModelParams{}, ScenarioSpec{}));
    return 0;
}

int run_calibrate(const std::string& data_path, const CommonFlags& f, const std::string& cmd, bool write_out) {
    const auto start = std::chrono::steady_clock::now();
    const auto series = ingest_series(data_path);
    const double alpha = estimate_alpha(series);
    const double A = estimate_A(series, alpha);
    const auto diag = intercept_diagnostic(series);
    const ModelParams defaults;
    const auto grid = labor_grid(defaults.l_tilde);
    const auto fit = fit_ellipse(defaults.theta, defaults.l_tilde, grid);
    const double gap = sup_mu_gap(fit.b, fit.nu, defaults.theta, defaults.l_tilde, grid);

    fmt::print("data: {} ({} observations, {}-{})\n", data_path, series.size(), series.years.front(),
               series.years.back());
    fmt::print("note: inputs are assumed difference-stationary; no unit-root test is run\n");
    fmt::print("{:<28}{:>14}\n", "parameter", "estimate");
    fmt::print("{:<28}{:>14.6f}\n", "alpha (no intercept)", alpha);
    fmt::print("{:<28}{:>14.6f}\n", "A", A);
    fmt::print("{:<28}{:>14.6f}\n", "alpha (with intercept)", diag.slope);
    fmt::print("{:<28}{:>14.6f}\n", "intercept (diagnostic)", diag.intercept);
    fmt::print("{:<28}{:>14.6f}\n", "ellipse b", fit.b);
    fmt::print("{:<28}{:>14.6f}\n", "ellipse nu", fit.nu);
    fmt::print("{:<28}{:>14.6f}\n", "ellipse objective", fit.objective);
    fmt::print("{:<28}{:>14.6f}\n", "sup |MU gap| on grid", gap);
    fmt::print("{:<28}{:>14}\n", "ellipse grid", fmt::format("{} pts [{}, {}]", grid.size(), svg::format_value(grid.front()),
                                                            svg::format_value(grid.back())));
    if (!write_out) return 0;

    fs::create_directories(f.out);
    const auto pred = predicted_series(series, alpha, A, defaults.delta);
    std::string csv = "year,Y,Y_fitted,K,L,r_implied\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        csv += fmt::format("{},{},{},{},{},{}\n", series.years[t], svg::format_value(series.Y[t]),
                           svg::format_value(pred.Y_fitted[t]), svg::format_value(series.K[t]),
                           svg::format_value(series.L[t]), svg::format_value(pred.r_implied[t]));
    }
    write_text_file(fs::path(f.out) / "calibration_series.csv", csv);
    std::string summary = "quantity,value\n";
    for (auto [k, v] : {std::pair{"alpha", alpha}, std::pair{"A", A}, std::pair{"alpha_with_intercept", diag.slope},
                        std::pair{"intercept", diag.intercept}, std::pair{"ellipse_b", fit.b},
                        std::pair{"ellipse_nu", fit.nu}, std::pair{"ellipse_objective", fit.objective},
                        std::pair{"sup_mu_gap", gap}}) {
        summary += fmt::format("{},{}\n", k, svg::format_value(v));
    }
    write_text_file(fs::path(f.out) / "calibration_summary.csv", summary);
    fmt::print("r_implied uses the same K series as the estimation (gross fixed capital formation)\n");

    RunManifest m{cmd, f.config, {}, f.out, OLG_VERSION, {{"calibrate", 0, 0.0, 0.0, seconds_since(start)}},
                  {"calibration_series.csv", "calibration_summary.csv"}};
    write_manifest(m, f.out);
    return 0;
}

void print_ss(const std::string& label, const SteadyState& ss) {
    fmt::print("{:<22} K={:.6f} L={:.6f} Y={:.6f} C={:.6f} w={:.6f} r={:.6f} rates=({:.4f},{:.4f},{:.4f}) "
               "transfer={:.6f} euler={:.2e}\n",
               label, ss.aggregates.K, ss.aggregates.L, ss.aggregates.Y, ss.aggregates.C, ss.prices.w, ss.prices.r,
               ss.rates.tau_l, ss.rates.tau_k, ss.rates.tau_c, ss.transfer, ss.max_euler_residual);
}

SteadyStateOptions ss_options(const CommonFlags& f) {
    SteadyStateOptions o;
    if (f.damping) o.damping = *f.damping;
    return o;
}

int run_solve_ss(const CommonFlags& f, const std::string& cmd) {
    const auto setup = load_setup(f, kReforms);
    fs::create_directories(f.out);
    RunManifest m{cmd, f.config, {}, f.out, OLG_VERSION, {}, {}};
    auto start = std::chrono::steady_clock::now();
    const auto base = solve_steady_state(setup.params, FiscalRule::baseline(), ss_options(f));
    m.solves.push_back({"ss_baseline", base.outer_iterations, 0.0, base.max_euler_residual, seconds_since(start)});
    print_ss("baseline", base);
    auto write = [&](const std::string& label, const SteadyState& ss) {
        const auto file = fmt::format("steady_state_{}.csv", label);
        write_text_file(fs::path(f.out) / file, steady_state_csv(steady_state_table(label, ss, setup.params)));
        m.files.push_back(file);
    };
    write("baseline", base);
    for (auto instrument : setup.instruments) {
        if (instrument == Instrument::baseline_paygo) continue;
        auto spec = setup.spec;
        spec.instrument = instrument;
        const auto label = std::string(to_string(instrument));
        m.scenarios.push_back(label);
        start = std::chrono::steady_clock::now();
        const auto ss = solve_steady_state(setup.params, settled_rule(spec, base, setup.params), ss_options(f));
        m.solves.push_back({"ss_" + label, ss.outer_iterations, 0.0, ss.max_euler_residual, seconds_since(start)});
        print_ss(label, ss);
        write(label, ss);
    }
    write_manifest(m, f.out);
    return 0;
}

int run_transition(const CommonFlags& f, const std::string& cmd) {
    const auto setup = load_setup(f, kReforms);
    const auto& p = setup.params;
    TransitionOptions topts;
    if (f.tol) topts.tol = *f.tol;
    if (f.damping) topts.damping = *f.damping;
    fs::create_directories(f.out);
    RunManifest m{cmd, f.config, {}, f.out, OLG_VERSION, {}, {}};

    auto start = std::chrono::steady_clock::now();
    const auto base = solve_steady_state(p, FiscalRule::baseline(), ss_options(f));
    m.solves.push_back({"ss_baseline", base.outer_iterations, 0.0, base.max_euler_residual, seconds_since(start)});
    print_ss("baseline", base);

    ReportTables tables;
    tables.steady_states.push_back(steady_state_table("baseline", base, p));

    auto base_spec = setup.spec;
    base_spec.instrument = Instrument::baseline_paygo;
    start = std::chrono::steady_clock::now();
    const auto base_path = solve_transition(base, base, base_spec, p, topts);
    m.solves.push_back({"tpi_baseline_paygo", base_path.iterations, base_path.final_change,
                        base_path.max_euler_residual, seconds_since(start)});

    for (auto instrument : setup.instruments) {
        auto spec = setup.spec;
        spec.instrument = instrument;
        const auto label = std::string(to_string(instrument));
        m.scenarios.push_back(label);
        const TransitionResult* result = &base_path;
        TransitionResult reform;
        if (instrument != Instrument::baseline_paygo) {
            start = std::chrono::steady_clock::now();
            const auto final_ss = solve_steady_state(p, settled_rule(spec, base, p), ss_options(f));
            m.solves.push_back({"ss_" + label, final_ss.outer_iterations, 0.0, final_ss.max_euler_residual,
                                seconds_since(start)});
            print_ss(label, final_ss);
            tables.steady_states.push_back(steady_state_table(label, final_ss, p));
            start = std::chrono::steady_clock::now();
            reform = solve_transition(base, final_ss, spec, p, topts);
            m.solves.push_back({"tpi_" + label, reform.iterations, reform.final_change, reform.max_euler_residual,
                                seconds_since(start)});
            result = &reform;
        }
        fmt::print("{:<22} transition: {} iterations, path change {:.2e}, {:.1f} s\n", label, result->iterations,
                   result->final_change, m.solves.back().seconds);
        tables.scenarios.push_back(label);
        tables.aggregates[label] = aggregate_rows(*result, base_path, p);
        tables.cohorts[label] = cohort_rows(*result, base, spec, p);
    }

    for (const auto& ss : tables.steady_states) {
        const auto file = fmt::format("steady_state_{}.csv", ss.label);
        write_text_file(fs::path(f.out) / file, steady_state_csv(ss));
        m.files.push_back(file);
    }
    for (const auto& sc : tables.scenarios) {
        const auto agg = fmt::format("aggregates_{}.csv", sc);
        const auto coh = fmt::format("cohorts_{}.csv", sc);
        write_text_file(fs::path(f.out) / agg, aggregates_csv(tables.aggregates.at(sc)));
        write_text_file(fs::path(f.out) / coh, cohorts_csv(tables.cohorts.at(sc)));
        m.files.push_back(agg);
        m.files.push_back(coh);
    }
    ChartOptions copts;
    copts.timestamp = timestamp(f.no_timestamp);
    for (auto& file : emit_charts(tables, f.out, copts)) m.files.push_back(std::move(file));
    write_manifest(m, f.out);
    fmt::print("wrote {} files to {}\n", m.files.size() + 1, f.out);
    return 0;
}

int run_report(const CommonFlags& f, const std::string& cmd) {
    const auto start = std::chrono::steady_clock::now();
    const auto tables = load_tables(f.out);
    ChartOptions copts;
    copts.timestamp = timestamp(f.no_timestamp);
    RunManifest m{cmd, f.config, tables.scenarios, f.out, OLG_VERSION, {}, {}};
    for (const auto& entry : fs::directory_iterator(f.out)) {
        if (entry.path().extension() == ".csv") m.files.push_back(entry.path().filename().string());
    }
    for (auto& file : emit_charts(tables, f.out, copts)) m.files.push_back(std::move(file));
    m.solves.push_back({"report", 0, 0.0, 0.0, seconds_since(start)});
    write_manifest(m, f.out);
    fmt::print("regenerated charts for {} scenario(s) in {}\n", tables.scenarios.size(), f.out);
    return 0;
}

void add_common(CLI::App* sub, CommonFlags& f, bool solver_flags) {
    sub->add_option("--config", f.config, "key = value parameter file")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory");
    if (!solver_flags) return;
    sub->add_option("--scenario", f.scenarios, "comma-separated instruments")->delimiter(',');
    sub->add_option("--horizon", f.horizon, "transition horizon T");
    sub->add_option("--tol", f.tol, "transition path tolerance");
    sub->add_option("--damping", f.damping, "initial damping factor in (0, 1]");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Overlapping-generations pension transition engine"};
    app.set_version_flag("--version", std::string(OLG_VERSION));
    app.require_subcommand(1);
    CommonFlags flags;
    std::string data_path = "data/russia_macro_1999_2021.csv";
    bool calibrate_write = false;

    auto* calibrate = app.add_subcommand("calibrate", "estimate alpha, A and the elliptical disutility fit");
    calibrate->add_option("--data", data_path, "CSV with header year,Y,K,L")->check(CLI::ExistingFile);
    add_common(calibrate, flags, false);
    calibrate->callback([&] { calibrate_write = calibrate->count("--out") > 0; });

    auto* solve_ss = app.add_subcommand("solve-ss", "baseline and settled steady states");
    add_common(solve_ss, flags, true);

    auto* transition = app.add_subcommand("transition", "transition paths, CSVs, charts and manifest");
    add_common(transition, flags, true);
    transition->add_flag("--no-timestamp", flags.no_timestamp, "omit the generation time from charts");

    auto* report = app.add_subcommand("report", "redraw charts from the CSVs in --out");
    add_common(report, flags, false);
    report->add_flag("--no-timestamp", flags.no_timestamp, "omit the generation time from charts");

    app.add_subcommand("print-defaults", "print the default parameters");

    CLI11_PARSE(app, argc, argv);
    const auto cmd = command_line(argc, argv);
    try {
        if (app.got_subcommand("print-defaults")) return run_print_defaults();
        if (*calibrate) return run_calibrate(data_path, flags, cmd, calibrate_write);
        if (*solve_ss) return run_solve_ss(flags, cmd);
        if (*transition) return run_transition(flags, cmd);
        if (*report) return run_report(flags, cmd);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
