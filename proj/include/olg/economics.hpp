#pragma once

#include <stdexcept>
#include <vector>

#include "olg/params.hpp"

namespace olg {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct Prices {
    double w = 0.0;  ///< wage per unit of labor
    double r = 0.0;  ///< net interest rate, after the corporate wedge
};

struct TaxRates {
    double tau_l = 0.0;
    double tau_k = 0.0;
    double tau_c = 0.0;
};

/// Taxes and transfers faced by households in one period.
struct FiscalSlice {
    TaxRates rates;
    std::vector<double> transfer_by_age;  ///< length S; zero for working ages
};

struct AggregateState {
    double K = 0.0;
    double L = 0.0;
    double Y = 0.0;
    double C = 0.0;
    double I = 0.0;
    double T_rev = 0.0;
};

/// Bases of the three pension taxes in one period.
struct TaxBases {
    double labor_income = 0.0;    ///< sum of w * n
    double capital_income = 0.0;  ///< sum of r * b
    double profit = 0.0;          ///< Y - wL - delta K
};

// Technology. All three throw DomainError unless K > 0 and L > 0.
double output(double K, double L, const ModelParams& p);
double wage(double K, double L, const ModelParams& p);
double interest(double K, double L, const ModelParams& p, double tau_c);
double profit_base(double K, double L, const ModelParams& p);

// Preferences (strict domain checks).
double mu_consumption(double c, double sigma);
double mdu_labor_elliptical(double n, double chi, const ModelParams& p);
double mdu_labor_cfe(double n, double theta);
/// c <= 0 yields the smooth penalty described at kConsumptionFloor; n outside
/// [0, l_tilde) throws.
double period_utility(double c, double n, double chi, const ModelParams& p);

struct Consumption {
    double value = 0.0;
    bool feasible = false;  ///< value > 0
};

Consumption consumption_from_budget(double n, double b_now, double b_next, const Prices& prices,
                                    const TaxRates& rates, double transfer);

double total_revenue(const TaxBases& bases, const TaxRates& rates) noexcept;

/// Per-retiree transfer that balances the budget across S - R retirees.
double balanced_transfer(const TaxBases& bases, const TaxRates& rates, int S, int R);
std::vector<double> transfer_by_age(double per_retiree, int S, int R);

double euler_labor_residual(double c, double n, const Prices& prices, double tau_l, double chi,
                            const ModelParams& p);
double euler_savings_residual(double c_now, double c_next, double r_next, double tau_k_next,
                              const ModelParams& p);

// Solver-facing versions. Outside the domain they continue linearly from the
// nearest admissible point, so residuals stay finite and point back inside.

/// Below this consumption level marginal utility continues linearly.
inline constexpr double kConsumptionFloor = 1e-4;
/// Labor is extrapolated linearly outside [kLaborEdge, 1 - kLaborEdge] * l_tilde.
inline constexpr double kLaborEdge = 1e-6;

struct ValueSlope {
    double value;
    double slope;
};

ValueSlope mu_consumption_smooth(double c, double sigma) noexcept;
ValueSlope mdu_labor_smooth(double n, double chi, const ModelParams& p) noexcept;

}  // namespace olg
