#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "olg/economics.hpp"
#include "olg/household.hpp"
#include "olg/params.hpp"

namespace olg {

/// Raised when a pension payout cannot be financed (required rate >= 1) or
/// the instrument's base is not positive.
class InfeasibleScenario : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FiscalRegime {
    baseline_paygo,  ///< initial rates fixed, transfer balances the budget
    settled_payout,  ///< payout fixed per retiree, instrument rate balances the budget
};

struct FiscalRule {
    FiscalRegime regime = FiscalRegime::baseline_paygo;
    Instrument instrument = Instrument::baseline_paygo;
    double payout_per_retiree = 0.0;

    static FiscalRule baseline() { return {}; }
    static FiscalRule settled(Instrument instrument, double payout) {
        return {FiscalRegime::settled_payout, instrument, payout};
    }
};

struct SteadyState {
    FiscalRule rule;
    Prices prices;
    std::vector<double> consumption;  ///< c_s, s = 1..S
    std::vector<double> labor;        ///< n_s, s = 1..S
    std::vector<double> savings;      ///< b_s entering age s, s = 1..S (b_1 = 0)
    AggregateState aggregates;        ///< K, L at the solved point; I = delta K
    TaxRates rates;
    double transfer = 0.0;  ///< per-retiree payment
    double revenue = 0.0;   ///< collected from households and firms
    int outer_iterations = 0;
    double max_euler_residual = 0.0;

    /// Average gross labor earnings w * n over working ages s <= R.
    [[nodiscard]] double average_earnings(const ModelParams& p) const;
    [[nodiscard]] double capital_clearing_residual() const;
    [[nodiscard]] double labor_clearing_residual() const;
    [[nodiscard]] double goods_clearing_residual(const ModelParams& p) const;
};

struct SteadyStateOptions {
    double damping = 0.3;
    bool adaptive_damping = true;  ///< halve the damping whenever the outer change grows
    double min_damping = 0.01;
    double tol = 1e-8;  ///< max relative change of (K, L, fiscal quantity)
    int max_iterations = 3000;
    bool polish = true;  ///< finish with Newton on the outer map
    HouseholdOptions household{};
    std::optional<std::array<double, 2>> initial_KL;
};

class SteadyStateError : public std::runtime_error {
public:
    SteadyStateError(const std::string& what, std::vector<std::array<double, 3>> trajectory)
        : std::runtime_error(what), trajectory_(std::move(trajectory)) {}
    /// (K, L, fiscal quantity) guesses per outer iteration.
    [[nodiscard]] const std::vector<std::array<double, 3>>& trajectory() const noexcept { return trajectory_; }

private:
    std::vector<std::array<double, 3>> trajectory_;
};

/// Rate on `instrument` that raises `required_revenue` at aggregates (K, L).
/// The capital-income base uses r before personal taxes.
double required_rate(Instrument instrument, double required_revenue, double K, double L, const ModelParams& p);

/// Rate that finances `payout_per_retiree` for all S - R retirees.
double endogenous_rate_for_payout(Instrument instrument, double payout_per_retiree, const AggregateState& aggregates,
                                  const ModelParams& p);

/// Stationary equilibrium by damped fixed-point iteration on (K, L, fiscal
/// quantity) with an inner lifetime solve, finished with a Newton polish.
SteadyState solve_steady_state(const ModelParams& params, const FiscalRule& rule,
                               const SteadyStateOptions& opts = {});

/// Fiscal slice implied by a rule at a given value of its endogenous quantity.
FiscalSlice fiscal_slice(const FiscalRule& rule, double fiscal_quantity, const ModelParams& p);

}  // namespace olg
