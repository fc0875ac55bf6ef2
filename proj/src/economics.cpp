#include "olg/economics.hpp"

#include <cmath>

#include <fmt/format.h>

namespace olg {
namespace {

void require_positive_factors(double K, double L) {
    if (!(K > 0.0) || !(L > 0.0)) {
        throw DomainError(fmt::format("factor inputs must be positive (K = {}, L = {})", K, L));
    }
}

// mdu and its derivative for interior n in (0, l_tilde).
ValueSlope mdu_interior(double n, double chi, const ModelParams& p) {
    const double nu = p.ellip_nu;
    const double x = n / p.l_tilde;
    const double xnu = std::pow(x, nu);
    const double bracket = 1.0 - xnu;
    const double scale = chi * p.ellip_b / p.l_tilde;
    const double value = scale * std::pow(x, nu - 1.0) * std::pow(bracket, (1.0 - nu) / nu);
    // d/dn log(value) = (nu-1)/n + (nu-1) x^(nu-1) / (l_tilde * bracket)
    const double dlog = (nu - 1.0) / n + (nu - 1.0) * xnu / (n * bracket);
    return {value, value * dlog};
}

}  // namespace

double output(double K, double L, const ModelParams& p) {
    require_positive_factors(K, L);
    return p.A * std::pow(K, p.alpha) * std::pow(L, 1.0 - p.alpha);
}

double wage(double K, double L, const ModelParams& p) {
    require_positive_factors(K, L);
    return (1.0 - p.alpha) * p.A * std::pow(K / L, p.alpha);
}

double interest(double K, double L, const ModelParams& p, double tau_c) {
    require_positive_factors(K, L);
    return (1.0 - tau_c) * (p.alpha * p.A * std::pow(L / K, 1.0 - p.alpha) - p.delta);
}

double profit_base(double K, double L, const ModelParams& p) {
    return output(K, L, p) - wage(K, L, p) * L - p.delta * K;
}

double mu_consumption(double c, double sigma) {
    if (!(c > 0.0)) throw DomainError(fmt::format("marginal utility needs c > 0 (c = {})", c));
    return std::pow(c, -sigma);
}

double mdu_labor_elliptical(double n, double chi, const ModelParams& p) {
    if (!(n >= 0.0) || !(n < p.l_tilde)) {
        throw DomainError(fmt::format("elliptical disutility needs 0 <= n < l_tilde (n = {})", n));
    }
    if (n == 0.0) return 0.0;
    return mdu_interior(n, chi, p).value;
}

double mdu_labor_cfe(double n, double theta) {
    if (!(n >= 0.0)) throw DomainError(fmt::format("CFE disutility needs n >= 0 (n = {})", n));
    return std::pow(n, 1.0 / theta);
}

double period_utility(double c, double n, double chi, const ModelParams& p) {
    if (!(n >= 0.0) || !(n < p.l_tilde)) {
        throw DomainError(fmt::format("period utility needs 0 <= n < l_tilde (n = {})", n));
    }
    const double x = n / p.l_tilde;
    const double leisure = chi * p.ellip_b * std::pow(1.0 - std::pow(x, p.ellip_nu), 1.0 / p.ellip_nu);
    const double crra = 1.0 - p.sigma;
    if (c >= kConsumptionFloor) return std::pow(c, crra) / crra + leisure;
    // Tangent continuation below the floor: steep but finite, increasing in c.
    const double at_floor = std::pow(kConsumptionFloor, crra) / crra;
    return at_floor + std::pow(kConsumptionFloor, -p.sigma) * (c - kConsumptionFloor) + leisure;
}

Consumption consumption_from_budget(double n, double b_now, double b_next, const Prices& prices,
                                    const TaxRates& rates, double transfer) {
    const double c = (1.0 - rates.tau_l) * prices.w * n + (1.0 + prices.r * (1.0 - rates.tau_k)) * b_now +
                     transfer - b_next;
    return {c, c > 0.0};
}

double total_revenue(const TaxBases& bases, const TaxRates& rates) noexcept {
    return rates.tau_l * bases.labor_income + rates.tau_k * bases.capital_income + rates.tau_c * bases.profit;
}

double balanced_transfer(const TaxBases& bases, const TaxRates& rates, int S, int R) {
    if (S <= R) throw DomainError(fmt::format("balanced transfer needs S > R (S = {}, R = {})", S, R));
    return total_revenue(bases, rates) / static_cast<double>(S - R);
}

std::vector<double> transfer_by_age(double per_retiree, int S, int R) {
    std::vector<double> out(static_cast<std::size_t>(S), 0.0);
    for (int s = R + 1; s <= S; ++s) out[static_cast<std::size_t>(s - 1)] = per_retiree;
    return out;
}

double euler_labor_residual(double c, double n, const Prices& prices, double tau_l, double chi,
                            const ModelParams& p) {
    return prices.w * (1.0 - tau_l) * mu_consumption(c, p.sigma) - mdu_labor_elliptical(n, chi, p);
}

double euler_savings_residual(double c_now, double c_next, double r_next, double tau_k_next,
                              const ModelParams& p) {
    return mu_consumption(c_now, p.sigma) -
           p.beta * (1.0 + r_next * (1.0 - tau_k_next)) * mu_consumption(c_next, p.sigma);
}

ValueSlope mu_consumption_smooth(double c, double sigma) noexcept {
    if (c >= kConsumptionFloor) {
        const double v = std::pow(c, -sigma);
        return {v, -sigma * v / c};
    }
    const double v = std::pow(kConsumptionFloor, -sigma);
    const double slope = -sigma * v / kConsumptionFloor;
    return {v + slope * (c - kConsumptionFloor), slope};
}

ValueSlope mdu_labor_smooth(double n, double chi, const ModelParams& p) noexcept {
    const double lo = kLaborEdge * p.l_tilde;
    const double hi = (1.0 - kLaborEdge) * p.l_tilde;
    if (n < lo) {
        const auto edge = mdu_interior(lo, chi, p);
        return {edge.value + edge.slope * (n - lo), edge.slope};
    }
    if (n > hi) {
        const auto edge = mdu_interior(hi, chi, p);
        return {edge.value + edge.slope * (n - hi), edge.slope};
    }
    return mdu_interior(n, chi, p);
}

}  // namespace olg
