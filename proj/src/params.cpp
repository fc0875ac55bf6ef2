#include "olg/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace olg {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
        throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, value));
    }
    return out;
}

int parse_int(std::string_view key, std::string_view value) {
    int out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(fmt::format("{}: cannot parse '{}' as an integer", key, value));
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(fmt::format("{}: expected true/false, got '{}'", key, value));
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const auto piece = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                     : comma - start));
        out.push_back(parse_double(key, piece));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void invalid(std::string_view field, double value, std::string_view rule) {
    throw ConfigError(fmt::format("{} = {} violates {}", field, value, rule));
}

}  // namespace

std::string_view to_string(Instrument instrument) noexcept {
    switch (instrument) {
        case Instrument::baseline_paygo: return "baseline_paygo";
        case Instrument::labor_tax: return "labor_tax";
        case Instrument::profit_tax: return "profit_tax";
        case Instrument::capital_income_tax: return "capital_income_tax";
    }
    return "unknown";
}

std::string_view to_string(PostWindowPillar pillar) noexcept {
    switch (pillar) {
        case PostWindowPillar::subsistence_for_all: return "subsistence_for_all";
        case PostWindowPillar::subsistence_for_grandfathered: return "subsistence_for_grandfathered";
        case PostWindowPillar::none: return "none";
    }
    return "unknown";
}

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::pre_reform: return "pre_reform";
        case Phase::window: return "window";
        case Phase::mixed: return "mixed";
        case Phase::settled: return "settled";
    }
    return "unknown";
}

Instrument parse_instrument(std::string_view name) {
    for (auto i : {Instrument::baseline_paygo, Instrument::labor_tax, Instrument::profit_tax,
                   Instrument::capital_income_tax}) {
        if (to_string(i) == name) return i;
    }
    throw ConfigError(fmt::format("instrument: unknown scenario '{}'", name));
}

PostWindowPillar parse_pillar(std::string_view name) {
    for (auto p : {PostWindowPillar::subsistence_for_all, PostWindowPillar::subsistence_for_grandfathered,
                   PostWindowPillar::none}) {
        if (to_string(p) == name) return p;
    }
    throw ConfigError(fmt::format("post_window_pillar: unknown value '{}'", name));
}

void validate(const ModelParams& p) {
    if (!(p.beta > 0.0 && p.beta < 1.0)) invalid("beta", p.beta, "0 < beta < 1");
    if (!(p.sigma > 0.0)) invalid("sigma", p.sigma, "sigma > 0");
    // Log utility is outside the calibrated range and not special-cased.
    if (p.sigma == 1.0) invalid("sigma", p.sigma, "sigma != 1");
    if (!(p.theta > 0.0)) invalid("theta", p.theta, "theta > 0");
    if (!(p.l_tilde > 0.0)) invalid("l_tilde", p.l_tilde, "l_tilde > 0");
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) invalid("alpha", p.alpha, "0 < alpha < 1");
    if (!(p.A > 0.0)) invalid("A", p.A, "A > 0");
    if (!(p.delta >= 0.0 && p.delta <= 1.0)) invalid("delta", p.delta, "0 <= delta <= 1");
    if (!(p.ellip_nu > 1.0)) invalid("ellip_nu", p.ellip_nu, "ellip_nu > 1");
    if (!(p.ellip_b > 0.0)) invalid("ellip_b", p.ellip_b, "ellip_b > 0");
    if (p.S < 2) invalid("S", p.S, "S >= 2");
    if (!(p.R >= 1 && p.R < p.S)) invalid("R", p.R, "1 <= R < S");
    if (static_cast<int>(p.chi_n.size()) != p.S) {
        invalid("chi_n", static_cast<double>(p.chi_n.size()), "chi_n has exactly S entries");
    }
    for (double chi : p.chi_n) {
        if (!(chi > 0.0)) invalid("chi_n", chi, "chi_n entries > 0");
    }
    if (!(p.tau_l0 >= 0.0 && p.tau_l0 < 1.0)) invalid("tau_l0", p.tau_l0, "0 <= tau_l0 < 1");
    if (!(p.tau_k0 >= 0.0 && p.tau_k0 < 1.0)) invalid("tau_k0", p.tau_k0, "0 <= tau_k0 < 1");
    if (!(p.tau_c0 >= 0.0 && p.tau_c0 < 1.0)) invalid("tau_c0", p.tau_c0, "0 <= tau_c0 < 1");
}

void validate(const ScenarioSpec& s, const ModelParams& p) {
    if (s.reform_period < 1) invalid("reform_period", s.reform_period, "reform_period >= 1");
    if (s.window_length < 1) invalid("window_length", s.window_length, "window_length >= 1");
    if (s.horizon_T < s.reform_period - 1 + s.window_length + 2 * p.S) {
        invalid("horizon_T", s.horizon_T, "horizon_T >= reform_period - 1 + window_length + 2*S");
    }
    if (!(s.payout_low_ratio >= 0.0)) invalid("payout_low_ratio", s.payout_low_ratio, "payout_low_ratio >= 0");
    if (!(s.payout_high_ratio >= s.payout_low_ratio)) {
        invalid("payout_high_ratio", s.payout_high_ratio, "payout_low_ratio <= payout_high_ratio");
    }
}

std::pair<ModelParams, ScenarioSpec> parse_config(std::string_view text) {
    std::map<std::string, std::string, std::less<>> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line_no, view));
        }
        std::string key{trim(view.substr(0, eq))};
        std::string value{trim(view.substr(eq + 1))};
        if (key.empty() || value.empty()) {
            throw ConfigError(fmt::format("line {}: empty key or value", line_no));
        }
        if (!entries.emplace(key, value).second) {
            throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
        }
    }

    ModelParams p;
    ScenarioSpec s;
    bool chi_given = false;
    for (const auto& [key, value] : entries) {
        if (key == "beta") p.beta = parse_double(key, value);
        else if (key == "sigma") p.sigma = parse_double(key, value);
        else if (key == "chi_n") { p.chi_n = parse_list(key, value); chi_given = true; }
        else if (key == "ellip_b") p.ellip_b = parse_double(key, value);
        else if (key == "ellip_nu") p.ellip_nu = parse_double(key, value);
        else if (key == "theta") p.theta = parse_double(key, value);
        else if (key == "l_tilde") p.l_tilde = parse_double(key, value);
        else if (key == "S") p.S = parse_int(key, value);
        else if (key == "R") p.R = parse_int(key, value);
        else if (key == "A") p.A = parse_double(key, value);
        else if (key == "alpha") p.alpha = parse_double(key, value);
        else if (key == "delta") p.delta = parse_double(key, value);
        else if (key == "tau_l0") p.tau_l0 = parse_double(key, value);
        else if (key == "tau_k0") p.tau_k0 = parse_double(key, value);
        else if (key == "tau_c0") p.tau_c0 = parse_double(key, value);
        else if (key == "no_borrowing") p.no_borrowing = parse_bool(key, value);
        else if (key == "instrument") s.instrument = parse_instrument(value);
        else if (key == "reform_period") s.reform_period = parse_int(key, value);
        else if (key == "window_length") s.window_length = parse_int(key, value);
        else if (key == "payout_high_ratio") s.payout_high_ratio = parse_double(key, value);
        else if (key == "payout_low_ratio") s.payout_low_ratio = parse_double(key, value);
        else if (key == "post_window_pillar") s.post_window_pillar = parse_pillar(value);
        else if (key == "horizon_T") s.horizon_T = parse_int(key, value);
        else throw ConfigError(fmt::format("unknown key '{}'", key));
    }
    // A single chi_n value is broadcast; an absent one follows S.
    if (!chi_given) {
        p.chi_n.assign(static_cast<std::size_t>(std::max(p.S, 0)), 1.0);
    } else if (p.chi_n.size() == 1 && p.S > 1) {
        p.chi_n.assign(static_cast<std::size_t>(p.S), p.chi_n.front());
    }
    validate(p);
    validate(s, p);
    return {std::move(p), s};
}

std::pair<ModelParams, ScenarioSpec> load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize_config(const ModelParams& p, const ScenarioSpec& s) {
    std::string out;
    auto put = [&out](std::string_view key, const auto& value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    out += "# preferences\n";
    put("beta", p.beta);
    put("sigma", p.sigma);
    // A uniform chi_n is written once; parse_config broadcasts it back.
    const bool uniform = std::adjacent_find(p.chi_n.begin(), p.chi_n.end(), std::not_equal_to<>()) == p.chi_n.end();
    if (uniform && !p.chi_n.empty()) {
        put("chi_n", p.chi_n.front());
    } else {
        put("chi_n", fmt::format("{}", fmt::join(p.chi_n, ",")));
    }
    put("ellip_b", p.ellip_b);
    put("ellip_nu", p.ellip_nu);
    put("theta", p.theta);
    put("l_tilde", p.l_tilde);
    out += "# demographics\n";
    put("S", p.S);
    put("R", p.R);
    out += "# technology\n";
    put("A", p.A);
    put("alpha", p.alpha);
    put("delta", p.delta);
    out += "# initial tax rates\n";
    put("tau_l0", p.tau_l0);
    put("tau_k0", p.tau_k0);
    put("tau_c0", p.tau_c0);
    put("no_borrowing", p.no_borrowing ? "true" : "false");
    out += "# scenario\n";
    put("instrument", to_string(s.instrument));
    put("reform_period", s.reform_period);
    put("window_length", s.window_length);
    put("payout_high_ratio", s.payout_high_ratio);
    put("payout_low_ratio", s.payout_low_ratio);
    put("post_window_pillar", to_string(s.post_window_pillar));
    put("horizon_T", s.horizon_T);
    return out;
}

Phase phase_of_period(int t, const ScenarioSpec& spec, const ModelParams& params) {
    if (t < spec.reform_period) {
        throw std::invalid_argument(
            fmt::format("period {} precedes the reform period {}", t, spec.reform_period));
    }
    const int window_end = spec.reform_period + spec.window_length;
    if (t < window_end) return Phase::window;
    if (t < window_end + params.retired_count()) return Phase::mixed;
    return Phase::settled;
}

}  // namespace olg
