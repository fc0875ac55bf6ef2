#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "olg/household.hpp"
#include "olg/params.hpp"
#include "olg/steady_state.hpp"

namespace olg {

/// Per-period aggregates along a transition, periods t = 1..T stored at index t - 1.
struct AggregatePath {
    std::string scenario;
    std::vector<double> K, L, Y, C, I, w, r;
    std::vector<double> tau_l, tau_k, tau_c;
    std::vector<double> tax_rate;           ///< the scenario's endogenous rate (tau_l0 in baseline periods)
    std::vector<double> payout;             ///< per eligible retiree
    std::vector<double> eligible_retirees;  ///< retirees receiving `payout`
    std::vector<double> revenue;
    std::vector<Phase> phase;

    [[nodiscard]] int length() const noexcept { return static_cast<int>(K.size()); }
};

/// Period-by-age panels; row t - 1 holds period t, column s - 1 holds age s.
struct CohortPanel {
    std::vector<std::vector<double>> consumption;
    std::vector<std::vector<double>> labor;
    std::vector<std::vector<double>> savings;  ///< wealth entering age s in period t; T + 1 rows
};

struct TransitionOptions {
    /// Max relative path change (denominator max(|x|, 1)). Goods-market and
    /// budget residuals scale with it, hence well below 1e-6.
    double tol = 1e-10;
    double damping = 0.3;
    bool adaptive_damping = true;  ///< halve the damping whenever the path change grows
    double min_damping = 0.01;
    int max_iterations = 500;
    HouseholdOptions household{};
};

struct TransitionResult {
    AggregatePath path;
    CohortPanel panel;
    int iterations = 0;
    double final_change = 0.0;
    double final_damping = 0.0;
    double max_euler_residual = 0.0;           ///< over every cohort and age
    std::vector<double> goods_residual;        ///< Y_t - C_t - I_t
    std::vector<double> budget_residual;       ///< revenue_t minus spending_t
    std::vector<double> change_history;
};

class TransitionError : public std::runtime_error {
public:
    TransitionError(const std::string& what, std::vector<double> change_history)
        : std::runtime_error(what), history_(std::move(change_history)) {}
    [[nodiscard]] const std::vector<double>& change_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Average gross labor earnings in the baseline steady state; payouts are quoted against it.
double payout_base(const SteadyState& baseline, const ModelParams& params);

/// Per-retiree payout level in period t: the balanced baseline transfer for
/// baseline_paygo and before the reform, the high ratio during the window,
/// then the low ratio (or 0 under `none`).
double pension_payout_at(int t, const ScenarioSpec& spec, const SteadyState& baseline, const ModelParams& params);

/// Whether a retiree of age s receives the scenario payout in period t >= reform_period.
bool payout_eligible(int t, int s, const ScenarioSpec& spec, const ModelParams& params);

/// Fiscal rule of the steady state a scenario settles into.
FiscalRule settled_rule(const ScenarioSpec& spec, const SteadyState& baseline, const ModelParams& params);

TransitionResult solve_transition(const SteadyState& initial_ss, const SteadyState& final_ss, const ScenarioSpec& spec,
                                  const ModelParams& params, const TransitionOptions& opts = {});

/// Labels for reporting; periods before the reform (and every period of the
/// baseline scenario) are pre_reform.
Phase period_phase(int t, const ScenarioSpec& spec, const ModelParams& params);

struct CohortConsumption {
    std::vector<int> age_at_reform;         ///< ages 1..S alive in reform_period
    std::vector<double> lifetime_total;     ///< undiscounted sum over the whole life
    std::vector<double> lifetime_pct_dev;   ///< vs the same cohort under baseline
    std::vector<double> middle_band_pct_dev;   ///< per period, calendar ages 35-45
    std::vector<double> retiree_band_pct_dev;  ///< per period, calendar ages 62-72
};

/// Age ranges in model periods for the calendar bands.
struct AgeBand {
    int first_age;
    int last_age;
};
AgeBand model_age_band(int first_calendar_age, int last_calendar_age, const ModelParams& params);

double band_average(const std::vector<double>& by_age, AgeBand band);

CohortConsumption cohort_consumption_panels(const TransitionResult& result, const SteadyState& baseline,
                                            const ScenarioSpec& spec, const ModelParams& params);

}  // namespace olg
