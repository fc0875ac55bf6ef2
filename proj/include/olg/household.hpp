#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "olg/economics.hpp"
#include "olg/numerics.hpp"
#include "olg/params.hpp"

namespace olg {

/// Remaining-lifetime problem of one cohort. The cohort lives until age S, so
/// it enters at age S - p + 1 where p is the number of remaining periods.
struct LifetimeEnvironment {
    double initial_savings = 0.0;  ///< wealth at entry; 0 for newborns
    std::vector<Prices> prices;    ///< one per remaining period
    std::vector<double> tau_l;
    std::vector<double> tau_k;
    std::vector<double> transfer;

    [[nodiscard]] int ages_remaining() const noexcept { return static_cast<int>(prices.size()); }
    [[nodiscard]] int first_age(const ModelParams& p) const noexcept { return p.S - ages_remaining() + 1; }

    /// Environment with time-invariant prices and fiscal slice over the remaining life.
    static LifetimeEnvironment constant(int ages_remaining, double initial_savings, const Prices& prices,
                                        const FiscalSlice& fiscal, const ModelParams& p);
};

struct HouseholdPlan {
    std::vector<double> consumption;   ///< length p, positive
    std::vector<double> labor;         ///< length p, inside [0, l_tilde)
    std::vector<double> savings_next;  ///< length p; last entry is 0 (no bequests)
    int iterations = 0;
    double max_residual = 0.0;
};

enum class HouseholdJacobian { analytic, finite_difference };

struct HouseholdOptions {
    numerics::RootOptions root{.tol_residual = 1e-12, .max_iterations = 200};
    HouseholdJacobian jacobian = HouseholdJacobian::analytic;
};

class HouseholdError : public std::runtime_error {
public:
    HouseholdError(const std::string& what, double best_residual, int iterations)
        : std::runtime_error(what), best_residual_(best_residual), iterations_(iterations) {}
    [[nodiscard]] double best_residual() const noexcept { return best_residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    double best_residual_;
    int iterations_;
};

class InfeasibleEnvironment : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown layout: [n_1 .. n_p, b_2 .. b_p] (p labor choices, then p - 1
/// savings balances entering each later period).
///
/// Residual layout: p intratemporal labor conditions by age, then p - 1
/// intertemporal savings conditions by age. Consumption comes from the period
/// budget. With `no_borrowing` each savings condition is replaced by its
/// Fischer-Burmeister complementarity form with b >= 0.
numerics::Vector residual_stack(const numerics::Vector& unknowns, const LifetimeEnvironment& env,
                                const ModelParams& params);

/// Banded analytic Jacobian of residual_stack.
numerics::Matrix residual_jacobian(const numerics::Vector& unknowns, const LifetimeEnvironment& env,
                                   const ModelParams& params);

/// Consumption implied by the budget at the given unknowns.
std::vector<double> implied_consumption(const numerics::Vector& unknowns, const LifetimeEnvironment& env);

/// Labor at 0.4 l_tilde; savings follow a hump peaking at retirement, scaled
/// to one period's gross earnings, blended into the cohort's initial wealth.
numerics::Vector default_initial_guess(const LifetimeEnvironment& env, const ModelParams& params);

numerics::Vector pack_unknowns(const HouseholdPlan& plan);

HouseholdPlan solve_lifetime(const LifetimeEnvironment& env, const ModelParams& params,
                             const HouseholdOptions& opts = {},
                             const numerics::Vector* warm_start = nullptr);

void validate(const LifetimeEnvironment& env, const ModelParams& params);

}  // namespace olg
