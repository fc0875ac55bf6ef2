#include "olg/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "olg/svg.hpp"

namespace olg {
namespace {

using svg::format_value;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ReportError(fmt::format("{}: cannot parse '{}' as a number", context, s));
    }
    return v;
}

int to_int(const std::string& s, const std::string& context) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ReportError(fmt::format("{}: cannot parse '{}' as an integer", context, s));
    }
    return v;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(line);
    }
    return out;
}

std::string pct_field(const std::optional<double>& pct) { return pct ? format_value(*pct) : std::string{}; }

std::optional<double> pct_or_blank(double value, double baseline) {
    if (baseline == 0.0) return std::nullopt;
    return 100.0 * (value / baseline - 1.0);
}

struct Variable {
    const char* name;
    std::function<double(const AggregatePath&, std::size_t)> get;
};

const std::vector<Variable>& path_variables() {
    static const std::vector<Variable> vars = {
        {"K", [](const AggregatePath& p, std::size_t i) { return p.K[i]; }},
        {"L", [](const AggregatePath& p, std::size_t i) { return p.L[i]; }},
        {"Y", [](const AggregatePath& p, std::size_t i) { return p.Y[i]; }},
        {"C", [](const AggregatePath& p, std::size_t i) { return p.C[i]; }},
        {"I", [](const AggregatePath& p, std::size_t i) { return p.I[i]; }},
        {"w", [](const AggregatePath& p, std::size_t i) { return p.w[i]; }},
        {"r", [](const AggregatePath& p, std::size_t i) { return p.r[i]; }},
        {"tau_l", [](const AggregatePath& p, std::size_t i) { return p.tau_l[i]; }},
        {"tau_k", [](const AggregatePath& p, std::size_t i) { return p.tau_k[i]; }},
        {"tau_c", [](const AggregatePath& p, std::size_t i) { return p.tau_c[i]; }},
        {"tax_rate", [](const AggregatePath& p, std::size_t i) { return p.tax_rate[i]; }},
        {"payout", [](const AggregatePath& p, std::size_t i) { return p.payout[i]; }},
        {"eligible_retirees", [](const AggregatePath& p, std::size_t i) { return p.eligible_retirees[i]; }},
        {"revenue", [](const AggregatePath& p, std::size_t i) { return p.revenue[i]; }},
        {"tax_to_gdp", [](const AggregatePath& p, std::size_t i) { return p.revenue[i] / p.Y[i]; }},
    };
    return vars;
}

std::vector<double> band_path(const TransitionResult& result, AgeBand band) {
    std::vector<double> out;
    for (const auto& row : result.panel.consumption) out.push_back(band_average(row, band));
    return out;
}

// Series (x, y) for one scenario and variable, either value or pct_dev.
svg::Series series_of(const std::vector<SeriesRow>& rows, const std::string& variable, bool pct, int max_period,
                      const std::string& name) {
    svg::Series s;
    s.name = name;
    for (const auto& r : rows) {
        if (r.variable != variable || r.period > max_period) continue;
        if (pct && !r.pct_dev) continue;
        s.x.push_back(r.year);
        s.y.push_back(pct ? *r.pct_dev : r.value);
    }
    return s;
}

}  // namespace

std::vector<double> deviation_series(const std::vector<double>& reform, const std::vector<double>& baseline) {
    if (reform.size() != baseline.size()) {
        throw ReportError(fmt::format("deviation_series: lengths differ ({} vs {})", reform.size(), baseline.size()));
    }
    std::vector<double> out(reform.size());
    for (std::size_t i = 0; i < reform.size(); ++i) {
        if (baseline[i] == 0.0) throw ReportError(fmt::format("deviation_series: baseline is zero at index {}", i));
        out[i] = 100.0 * (reform[i] / baseline[i] - 1.0);
    }
    return out;
}

SteadyStateTable steady_state_table(const std::string& label, const SteadyState& ss, const ModelParams& params) {
    SteadyStateTable t;
    t.label = label;
    for (int s = 1; s <= params.S; ++s) {
        const auto i = static_cast<std::size_t>(s - 1);
        t.profile.push_back({s, calendar_age(s), ss.consumption[i], ss.labor[i], ss.savings[i]});
    }
    const auto& a = ss.aggregates;
    t.summary = {{"K", a.K},
                 {"L", a.L},
                 {"Y", a.Y},
                 {"C", a.C},
                 {"I", a.I},
                 {"w", ss.prices.w},
                 {"r", ss.prices.r},
                 {"tau_l", ss.rates.tau_l},
                 {"tau_k", ss.rates.tau_k},
                 {"tau_c", ss.rates.tau_c},
                 {"transfer_per_retiree", ss.transfer},
                 {"revenue", ss.revenue},
                 {"average_earnings", ss.average_earnings(params)},
                 {"outer_iterations", static_cast<double>(ss.outer_iterations)},
                 {"max_euler_residual", ss.max_euler_residual},
                 {"capital_clearing_residual", ss.capital_clearing_residual()},
                 {"labor_clearing_residual", ss.labor_clearing_residual()},
                 {"goods_clearing_residual", ss.goods_clearing_residual(params)}};
    return t;
}

std::vector<SeriesRow> aggregate_rows(const TransitionResult& reform, const TransitionResult& baseline,
                                      const ModelParams& params) {
    const auto& rp = reform.path;
    const auto& bp = baseline.path;
    if (rp.length() != bp.length()) {
        throw ReportError(fmt::format("aggregate_rows: horizons differ ({} vs {})", rp.length(), bp.length()));
    }
    const auto middle = model_age_band(35, 45, params);
    const auto retiree = model_age_band(62, 72, params);
    const auto mid_r = band_path(reform, middle);
    const auto mid_b = band_path(baseline, middle);
    const auto ret_r = band_path(reform, retiree);
    const auto ret_b = band_path(baseline, retiree);

    std::vector<SeriesRow> rows;
    for (int t = 1; t <= rp.length(); ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        auto push = [&](std::string var, double value, double base) {
            rows.push_back({rp.scenario, t, calendar_year(t), std::move(var), value, pct_or_blank(value, base)});
        };
        for (const auto& v : path_variables()) push(v.name, v.get(rp, i), v.get(bp, i));
        push("c_age_35_45", mid_r[i], mid_b[i]);
        push("c_age_62_72", ret_r[i], ret_b[i]);
    }
    return rows;
}

std::vector<CohortRow> cohort_rows(const TransitionResult& reform, const SteadyState& baseline_ss,
                                   const ScenarioSpec& spec, const ModelParams& params) {
    const auto cc = cohort_consumption_panels(reform, baseline_ss, spec, params);
    std::vector<CohortRow> rows;
    for (std::size_t k = 0; k < cc.age_at_reform.size(); ++k) {
        const int a = cc.age_at_reform[k];
        rows.push_back({reform.path.scenario, a, calendar_age(a), "lifetime_consumption", cc.lifetime_total[k],
                        cc.lifetime_pct_dev[k]});
    }
    return rows;
}

std::string aggregates_csv(const std::vector<SeriesRow>& rows) {
    std::string out = "scenario,period,year,variable,value,pct_dev_from_baseline\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{}\n", r.scenario, r.period, r.year, r.variable, format_value(r.value),
                           pct_field(r.pct_dev));
    }
    return out;
}

std::string cohorts_csv(const std::vector<CohortRow>& rows) {
    std::string out = "scenario,age_at_reform,calendar_age_at_reform,variable,value,pct_dev_from_baseline\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{}\n", r.scenario, r.age_at_reform, r.calendar_age, r.variable,
                           format_value(r.value), pct_field(r.pct_dev));
    }
    return out;
}

std::string steady_state_csv(const SteadyStateTable& table) {
    std::string out = "age,calendar_age,consumption,labor,savings\n";
    for (const auto& r : table.profile) {
        out += fmt::format("{},{},{},{},{}\n", r.age, r.calendar_age, format_value(r.consumption),
                           format_value(r.labor), format_value(r.savings));
    }
    out += "\nquantity,value\n";
    for (const auto& [key, value] : table.summary) out += fmt::format("{},{}\n", key, format_value(value));
    return out;
}

std::vector<SeriesRow> parse_aggregates_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "scenario,period,year,variable,value,pct_dev_from_baseline") {
        throw ReportError("aggregates CSV: unexpected header");
    }
    std::vector<SeriesRow> rows;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        const auto f = split_csv(lines[n]);
        const auto ctx = fmt::format("aggregates CSV line {}", n + 1);
        if (f.size() != 6) throw ReportError(fmt::format("{}: expected 6 fields", ctx));
        SeriesRow r{f[0], to_int(f[1], ctx), to_int(f[2], ctx), f[3], to_double(f[4], ctx), std::nullopt};
        if (!f[5].empty()) r.pct_dev = to_double(f[5], ctx);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<CohortRow> parse_cohorts_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "scenario,age_at_reform,calendar_age_at_reform,variable,value,pct_dev_from_baseline") {
        throw ReportError("cohorts CSV: unexpected header");
    }
    std::vector<CohortRow> rows;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        const auto f = split_csv(lines[n]);
        const auto ctx = fmt::format("cohorts CSV line {}", n + 1);
        if (f.size() != 6) throw ReportError(fmt::format("{}: expected 6 fields", ctx));
        CohortRow r{f[0], to_int(f[1], ctx), to_int(f[2], ctx), f[3], to_double(f[4], ctx), std::nullopt};
        if (!f[5].empty()) r.pct_dev = to_double(f[5], ctx);
        rows.push_back(std::move(r));
    }
    return rows;
}

SteadyStateTable parse_steady_state_csv(const std::string& label, const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "age,calendar_age,consumption,labor,savings") {
        throw ReportError("steady-state CSV: unexpected header");
    }
    SteadyStateTable t;
    t.label = label;
    std::size_t n = 1;
    for (; n < lines.size() && !lines[n].empty(); ++n) {
        const auto f = split_csv(lines[n]);
        const auto ctx = fmt::format("steady-state CSV line {}", n + 1);
        if (f.size() != 5) throw ReportError(fmt::format("{}: expected 5 fields", ctx));
        t.profile.push_back({to_int(f[0], ctx), to_int(f[1], ctx), to_double(f[2], ctx), to_double(f[3], ctx),
                             to_double(f[4], ctx)});
    }
    if (n + 1 < lines.size() && lines[n + 1] == "quantity,value") {
        for (n += 2; n < lines.size(); ++n) {
            if (lines[n].empty()) continue;
            const auto f = split_csv(lines[n]);
            const auto ctx = fmt::format("steady-state CSV line {}", n + 1);
            if (f.size() != 2) throw ReportError(fmt::format("{}: expected 2 fields", ctx));
            t.summary.emplace_back(f[0], to_double(f[1], ctx));
        }
    }
    return t;
}

ReportTables load_tables(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ReportError(fmt::format("'{}' is not a directory", dir.string()));
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    ReportTables tables;
    auto strip = [](const std::string& stem, const std::string& prefix) { return stem.substr(prefix.size()); };
    for (const auto& path : files) {
        const auto stem = path.stem().string();
        if (stem.rfind("aggregates_", 0) == 0) {
            const auto name = strip(stem, "aggregates_");
            tables.scenarios.push_back(name);
            tables.aggregates[name] = parse_aggregates_csv(read_text_file(path));
        } else if (stem.rfind("cohorts_", 0) == 0) {
            tables.cohorts[strip(stem, "cohorts_")] = parse_cohorts_csv(read_text_file(path));
        } else if (stem.rfind("steady_state_", 0) == 0) {
            const auto label = strip(stem, "steady_state_");
            tables.steady_states.push_back(parse_steady_state_csv(label, read_text_file(path)));
        }
    }
    if (tables.scenarios.empty() && tables.steady_states.empty()) {
        throw ReportError(fmt::format("no aggregates_*.csv or steady_state_*.csv files in '{}'", dir.string()));
    }
    // Baseline first, then the instruments in their declaration order.
    const std::vector<std::string> order = {"baseline_paygo", "labor_tax", "profit_tax", "capital_income_tax"};
    auto rank = [&](const std::string& s) {
        const auto it = std::find(order.begin(), order.end(), s);
        return static_cast<std::size_t>(it - order.begin());
    };
    std::stable_sort(tables.scenarios.begin(), tables.scenarios.end(),
                     [&](const std::string& a, const std::string& b) { return rank(a) < rank(b); });
    std::stable_sort(tables.steady_states.begin(), tables.steady_states.end(),
                     [&](const SteadyStateTable& a, const SteadyStateTable& b) {
                         const auto ra = a.label == "baseline" ? 0 : rank(a.label) + 1;
                         const auto rb = b.label == "baseline" ? 0 : rank(b.label) + 1;
                         return ra < rb;
                     });
    return tables;
}

std::vector<std::string> emit_charts(const ReportTables& tables, const std::filesystem::path& out_dir,
                                     const ChartOptions& opts) {
    std::filesystem::create_directories(out_dir);
    svg::RenderOptions ro;
    ro.timestamp = opts.timestamp;
    std::vector<std::string> written;
    auto emit = [&](const std::string& file, const svg::LineChart& chart) {
        write_text_file(out_dir / file, svg::render(chart, ro));
        written.push_back(file);
    };

    if (!tables.steady_states.empty()) {
        svg::LineChart chart{"Labor supply by age in steady state", "age (years)", "labor supply n", {}};
        for (const auto& t : tables.steady_states) {
            svg::Series s;
            s.name = t.label;
            for (const auto& r : t.profile) {
                s.x.push_back(r.calendar_age);
                s.y.push_back(r.labor);
            }
            chart.series.push_back(std::move(s));
        }
        emit("fig_labor_profile.svg", chart);
    }
    if (tables.scenarios.empty()) return written;

    auto deviation_chart = [&](const std::string& file, const std::string& title,
                               const std::vector<std::string>& variables) {
        svg::LineChart chart{title, "year", "% deviation from baseline", {}};
        for (const auto& sc : tables.scenarios) {
            for (const auto& var : variables) {
                const auto name = variables.size() > 1 ? fmt::format("{} {}", sc, var) : sc;
                chart.series.push_back(series_of(tables.aggregates.at(sc), var, true, opts.display_periods, name));
            }
        }
        emit(file, chart);
    };
    deviation_chart("fig_output.svg", "Aggregate output", {"Y"});
    deviation_chart("fig_capital_labor.svg", "Aggregate capital and labor", {"K", "L"});
    deviation_chart("fig_wage_consumption.svg", "Wage and aggregate consumption", {"w", "C"});
    deviation_chart("fig_age_band_consumption.svg", "Consumption of ages 35-45 and 62-72",
                    {"c_age_35_45", "c_age_62_72"});

    {
        svg::LineChart chart{"Pension tax revenue relative to output", "year", "revenue / Y", {}};
        for (const auto& sc : tables.scenarios) {
            chart.series.push_back(series_of(tables.aggregates.at(sc), "tax_to_gdp", false, opts.display_periods, sc));
        }
        emit("fig_tax_to_gdp.svg", chart);
    }
    {
        svg::LineChart chart{"Lifetime consumption of cohorts alive at the reform", "age at reform (years)",
                             "% deviation from baseline", {}};
        for (const auto& sc : tables.scenarios) {
            const auto it = tables.cohorts.find(sc);
            if (it == tables.cohorts.end()) continue;
            svg::Series s;
            s.name = sc;
            for (const auto& r : it->second) {
                if (r.variable != "lifetime_consumption" || !r.pct_dev) continue;
                s.x.push_back(r.calendar_age);
                s.y.push_back(*r.pct_dev);
            }
            chart.series.push_back(std::move(s));
        }
        emit("fig_lifetime_consumption.svg", chart);
    }
    return written;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw ReportError("SHA-256 computation failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& out_dir) {
    std::string out;
    out += fmt::format("command: {}\n", m.command);
    out += fmt::format("config: {}\n", m.config_path.empty() ? "(defaults)" : m.config_path);
    out += fmt::format("scenarios: {}\n", fmt::join(m.scenarios, ","));
    out += fmt::format("output_dir: {}\n", m.output_dir);
    out += fmt::format("version: {}\n", m.tool_version);
    for (const auto& s : m.solves) {
        out += fmt::format("solve {}: iterations={} final_change={} max_euler_residual={} seconds={:.3f}\n", s.label,
                           s.iterations, format_value(s.final_change), format_value(s.max_euler_residual), s.seconds);
    }
    auto files = m.files;
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        out += fmt::format("file {} sha256 {}\n", f, sha256_hex(read_text_file(out_dir / f)));
    }
    write_text_file(out_dir / "manifest.txt", out);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ReportError(fmt::format("cannot write '{}'", path.string()));
    out << content;
    if (!out) throw ReportError(fmt::format("write to '{}' failed", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace olg
