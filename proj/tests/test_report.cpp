#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include <fmt/format.h>

#include "olg/report.hpp"
#include "olg/svg.hpp"

using namespace olg;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

// A short hand-built transition; consumption by age is 1 + s/100 scaled per period.
TransitionResult fake_result(const std::string& scenario, double scale, const ModelParams& p) {
    TransitionResult r;
    auto& a = r.path;
    a.scenario = scenario;
    for (int t = 1; t <= 3; ++t) {
        const double f = scale * t;
        a.K.push_back(10.0 * f);
        a.L.push_back(2.0 * f);
        a.Y.push_back(5.0 * f);
        a.C.push_back(4.0 * f);
        a.I.push_back(1.0 * f);
        a.w.push_back(1.5);
        a.r.push_back(0.05 * f);
        a.tau_l.push_back(0.22 * f);
        a.tau_k.push_back(0.0);
        a.tau_c.push_back(0.0);
        a.tax_rate.push_back(0.22 * f);
        a.payout.push_back(0.3 * f);
        a.eligible_retirees.push_back(11.0);
        a.revenue.push_back(3.3 * f);
        a.phase.push_back(Phase::window);
        std::vector<double> row;
        for (int s = 1; s <= p.S; ++s) row.push_back(f * (1.0 + s / 100.0));
        r.panel.consumption.push_back(row);
    }
    return r;
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("olg_report_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("deviation series") {
    CHECK(deviation_series({1.0, 2.0}, {1.0, 2.0}) == std::vector<double>{0.0, 0.0});
    const auto d = deviation_series({1.1, 0.5}, {1.0, 1.0});
    CHECK(d[0] == Approx(10.0));
    CHECK(d[1] == Approx(-50.0));
    CHECK_THROWS_AS(deviation_series({1.0}, {0.0}), ReportError);
    CHECK_THROWS_AS(deviation_series({1.0}, {1.0, 2.0}), ReportError);
    CHECK(deviation_series({}, {}).empty());
}

TEST_CASE("aggregate rows against a baseline") {
    const ModelParams p;
    const auto base = fake_result("baseline_paygo", 1.0, p);
    const auto reform = fake_result("labor_tax", 1.1, p);
    const auto same = aggregate_rows(base, base, p);
    for (const auto& r : same) {
        if (r.pct_dev) CHECK(*r.pct_dev == 0.0);
        else CHECK((r.variable == "tau_k" || r.variable == "tau_c"));
    }
    const auto rows = aggregate_rows(reform, base, p);
    CHECK(rows.size() == 3 * 17);
    for (const auto& r : rows) {
        CHECK(r.year == calendar_year(r.period));
        if (r.variable == "Y" || r.variable == "c_age_62_72") CHECK(*r.pct_dev == Approx(10.0));
        if (r.variable == "tax_to_gdp") CHECK(r.value == Approx(3.3 / 5.0));
    }
    auto shorter = base;
    shorter.path.K.pop_back();
    CHECK_THROWS_AS(aggregate_rows(reform, shorter, p), ReportError);
}

TEST_CASE("aggregates CSV round-trips") {
    const ModelParams p;
    const auto rows = aggregate_rows(fake_result("labor_tax", 1.1, p), fake_result("baseline_paygo", 1.0, p), p);
    const auto text = aggregates_csv(rows);
    CHECK(text.rfind("scenario,period,year,variable,value,pct_dev_from_baseline\n", 0) == 0);
    const auto back = parse_aggregates_csv(text);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].variable == rows[i].variable);
        CHECK(back[i].period == rows[i].period);
        CHECK(back[i].value == Approx(rows[i].value).epsilon(1e-9));
        CHECK(back[i].pct_dev.has_value() == rows[i].pct_dev.has_value());
    }
    CHECK(aggregates_csv(back) == text);
    CHECK_THROWS_AS(parse_aggregates_csv("scenario,period\nx,1\n"), ReportError);
}

TEST_CASE("cohort and steady-state CSVs round-trip") {
    std::vector<CohortRow> rows{{"profit_tax", 1, 20, "lifetime_consumption", 12.5, -1.25},
                                {"profit_tax", 2, 21, "lifetime_consumption", 13.0, std::nullopt}};
    const auto text = cohorts_csv(rows);
    const auto back = parse_cohorts_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].pct_dev == -1.25);
    CHECK_FALSE(back[1].pct_dev);
    CHECK(cohorts_csv(back) == text);

    SteadyStateTable t{"baseline", {{1, 20, 0.5, 0.9, 0.0}, {2, 21, 0.6, 0.8, 0.25}}, {{"K", 248.26}, {"r", 0.138}}};
    const auto ss_text = steady_state_csv(t);
    const auto t2 = parse_steady_state_csv("baseline", ss_text);
    CHECK(t2.profile.size() == 2);
    CHECK(t2.profile[1].savings == 0.25);
    CHECK(t2.summary == t.summary);
    CHECK(steady_state_csv(t2) == ss_text);
}

TEST_CASE("charts are written deterministically and reloaded from CSV") {
    const ModelParams p;
    const auto base = fake_result("baseline_paygo", 1.0, p);
    const auto dir = scratch_dir("charts");
    for (auto [name, scale] : {std::pair{"labor_tax", 1.1}, std::pair{"profit_tax", 0.9}}) {
        const auto reform = fake_result(name, scale, p);
        write_text_file(dir / fmt::format("aggregates_{}.csv", name), aggregates_csv(aggregate_rows(reform, base, p)));
        write_text_file(dir / fmt::format("cohorts_{}.csv", name),
                        cohorts_csv({{name, 1, 20, "lifetime_consumption", scale, 100.0 * (scale - 1.0)}}));
    }
    write_text_file(dir / "steady_state_baseline.csv",
                    steady_state_csv({"baseline", {{1, 20, 0.5, 0.9, 0.0}, {2, 21, 0.6, 0.8, 0.25}}, {{"K", 1.0}}}));

    const auto tables = load_tables(dir);
    CHECK(tables.scenarios == std::vector<std::string>{"labor_tax", "profit_tax"});
    const auto first = emit_charts(tables, dir / "a");
    const auto second = emit_charts(load_tables(dir), dir / "b");
    CHECK(first == second);
    CHECK(std::find(first.begin(), first.end(), "fig_output.svg") != first.end());
    for (const auto& f : first) CHECK(read_text_file(dir / "a" / f) == read_text_file(dir / "b" / f));

    ChartOptions stamped;
    stamped.timestamp = "2020-01-01T00:00:00Z";
    emit_charts(tables, dir / "c", stamped);
    CHECK(read_text_file(dir / "c" / "fig_output.svg").find("2020-01-01") != std::string::npos);
    CHECK(read_text_file(dir / "a" / "fig_output.svg").find("generated") == std::string::npos);
    CHECK_THROWS_AS(load_tables(dir / "a"), ReportError);
    fs::remove_all(dir);
}

TEST_CASE("manifest lists files with their SHA-256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const auto dir = scratch_dir("manifest");
    write_text_file(dir / "x.csv", "abc");
    RunManifest m;
    m.command = "olg test";
    m.output_dir = dir.string();
    m.tool_version = "0";
    m.files = {"x.csv"};
    write_manifest(m, dir);
    const auto text = read_text_file(dir / "manifest.txt");
    CHECK(text.find("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad") != std::string::npos);
    CHECK(text.find("x.csv") != std::string::npos);
    CHECK_THROWS(read_text_file(dir / "missing.csv"));
    fs::remove_all(dir);
}

TEST_CASE("svg rendering") {
    CHECK(svg::format_value(0.0) == "0");
    CHECK(svg::format_value(-0.0) == "0");
    CHECK(svg::format_value(0.1) == "0.1");
    CHECK(svg::escape_xml("a<b & \"c\">") == "a&lt;b &amp; &quot;c&quot;&gt;");
    svg::LineChart chart;
    chart.title = "T & U";
    chart.series = {{"flat", {1.0, 2.0}, {3.0, 3.0}}};
    const auto out = svg::render(chart, {});
    CHECK(out.find("T &amp; U") != std::string::npos);
    CHECK(out.find("<polyline") != std::string::npos);
    chart.series = {{"bad", {1.0}, {1.0, 2.0}}};
    CHECK_THROWS(svg::render(chart, {}));
}
