#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace olg {

/// Thrown for unreadable or invalid run configurations. The message names the
/// offending field and value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structural parameters of the life-cycle economy. Defaults are the
/// calibrated values for Russia (annual periods, ages 20..72).
struct ModelParams {
    double beta = 0.905;   ///< per-period discount factor
    double sigma = 1.97;   ///< CRRA coefficient
    std::vector<double> chi_n = std::vector<double>(53, 1.0);  ///< labor disutility weight by age
    double ellip_b = 0.431;
    double ellip_nu = 1.765;
    double theta = 0.565;  ///< Frisch elasticity
    double l_tilde = 1.0;  ///< time endowment per period
    int S = 53;            ///< lifespan in periods
    int R = 42;            ///< ages s > R are retired (1-based)
    double A = 1.889;
    double alpha = 0.3573;
    double delta = 0.05;
    double tau_l0 = 0.22;
    double tau_k0 = 0.0;
    double tau_c0 = 0.0;

    /// Sensitivity switch: forbid negative savings (b >= 0) in household plans.
    bool no_borrowing = false;

    [[nodiscard]] int retired_count() const noexcept { return S - R; }

    bool operator==(const ModelParams&) const = default;
};

enum class Instrument { baseline_paygo, labor_tax, profit_tax, capital_income_tax };

/// Who keeps receiving the first-pillar payment after the high-payout window.
enum class PostWindowPillar { subsistence_for_all, subsistence_for_grandfathered, none };

enum class Phase { pre_reform, window, mixed, settled };

struct ScenarioSpec {
    Instrument instrument = Instrument::baseline_paygo;
    int reform_period = 1;  ///< period at which PAYG is abolished; period 1 is 2024
    int window_length = 30;
    double payout_high_ratio = 0.26;  ///< MROT / average wage
    double payout_low_ratio = 0.18;   ///< pensioner subsistence minimum / average wage
    PostWindowPillar post_window_pillar = PostWindowPillar::subsistence_for_all;
    int horizon_T = 300;

    bool operator==(const ScenarioSpec&) const = default;
};

std::string_view to_string(Instrument instrument) noexcept;
std::string_view to_string(PostWindowPillar pillar) noexcept;
std::string_view to_string(Phase phase) noexcept;
Instrument parse_instrument(std::string_view name);
PostWindowPillar parse_pillar(std::string_view name);

/// Throws ConfigError naming the first violated invariant.
void validate(const ModelParams& params);
void validate(const ScenarioSpec& spec, const ModelParams& params);

/// Parses the `key = value` configuration format. Absent keys keep their
/// defaults; unknown keys are errors.
std::pair<ModelParams, ScenarioSpec> parse_config(std::string_view text);
std::pair<ModelParams, ScenarioSpec> load_config(const std::filesystem::path& path);

/// Writes every field in the configuration format with round-trip precision.
std::string serialize_config(const ModelParams& params, const ScenarioSpec& spec);

/// Phase of the reform path at period t (t >= reform_period).
Phase phase_of_period(int t, const ScenarioSpec& spec, const ModelParams& params);

/// Calendar year for a model period; period 1 is 2024.
constexpr int calendar_year(int period) noexcept { return 2023 + period; }

/// Calendar age of model age s (s = 1 is age 20).
constexpr int calendar_age(int s) noexcept { return s + 19; }

}  // namespace olg
