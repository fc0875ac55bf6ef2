#include "olg/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace olg {
namespace {

using numerics::Vector;

struct OuterState {
    double K;
    double L;
    double z;  // transfer (baseline) or instrument rate (settled)
};

struct Evaluation {
    HouseholdPlan plan;
    OuterState implied;
    Prices prices;
    FiscalSlice fiscal;
    bool admissible = true;  // households hold positive K and supply positive L
};

class OuterMap {
public:
    OuterMap(const ModelParams& p, const FiscalRule& rule, const HouseholdOptions& hh)
        : p_(p), rule_(rule), hh_(hh) {}

    Evaluation operator()(const OuterState& x) {
        if (!(x.K > 0.0) || !(x.L > 0.0)) {
            throw DomainError(fmt::format("steady state: non-positive aggregate guess (K = {}, L = {})", x.K, x.L));
        }
        Evaluation ev;
        ev.fiscal = fiscal_slice(rule_, x.z, p_);
        ev.prices = {wage(x.K, x.L, p_), interest(x.K, x.L, p_, ev.fiscal.rates.tau_c)};
        const auto env = LifetimeEnvironment::constant(p_.S, 0.0, ev.prices, ev.fiscal, p_);
        ev.plan = solve_lifetime(env, p_, hh_, warm_.size() > 0 ? &warm_ : nullptr);
        warm_ = pack_unknowns(ev.plan);

        const double K_new = std::accumulate(ev.plan.savings_next.begin(), ev.plan.savings_next.end(), 0.0);
        const double L_new = std::accumulate(ev.plan.labor.begin(), ev.plan.labor.end(), 0.0);
        ev.admissible = K_new > 0.0 && L_new > 0.0;
        ev.implied = {K_new, L_new, ev.admissible ? implied_fiscal(K_new, L_new) : x.z};
        return ev;
    }

private:
    double implied_fiscal(double K, double L) const {
        if (rule_.regime == FiscalRegime::baseline_paygo) {
            const TaxRates rates{p_.tau_l0, p_.tau_k0, p_.tau_c0};
            const TaxBases bases{wage(K, L, p_) * L, interest(K, L, p_, p_.tau_c0) * K, profit_base(K, L, p_)};
            return balanced_transfer(bases, rates, p_.S, p_.R);
        }
        return required_rate(rule_.instrument, p_.retired_count() * rule_.payout_per_retiree, K, L, p_);
    }

    const ModelParams& p_;
    FiscalRule rule_;
    HouseholdOptions hh_;
    Vector warm_;
};

double relative_change(double next, double current) {
    return std::abs(next - current) / std::max(std::abs(current), 1.0);
}

// Start slightly above the rate at which a flat consumption path is optimal,
// where households are net savers.
OuterState default_start(const ModelParams& p) {
    const double L0 = 0.4 * p.l_tilde * p.S;
    const double r0 = 1.0 / p.beta - 1.0 + 0.02;
    const double K0 = L0 * std::pow(p.alpha * p.A / (r0 + p.delta), 1.0 / (1.0 - p.alpha));
    return {K0, L0, 0.0};
}

}  // namespace

FiscalSlice fiscal_slice(const FiscalRule& rule, double z, const ModelParams& p) {
    FiscalSlice out;
    if (rule.regime == FiscalRegime::baseline_paygo) {
        out.rates = {p.tau_l0, p.tau_k0, p.tau_c0};
        out.transfer_by_age = transfer_by_age(z, p.S, p.R);
        return out;
    }
    switch (rule.instrument) {
        case Instrument::labor_tax: out.rates.tau_l = z; break;
        case Instrument::capital_income_tax: out.rates.tau_k = z; break;
        case Instrument::profit_tax: out.rates.tau_c = z; break;
        case Instrument::baseline_paygo:
            throw std::invalid_argument("settled fiscal rule needs a financing instrument");
    }
    out.transfer_by_age = transfer_by_age(rule.payout_per_retiree, p.S, p.R);
    return out;
}

double required_rate(Instrument instrument, double required_revenue, double K, double L, const ModelParams& p) {
    if (required_revenue == 0.0) return 0.0;
    if (required_revenue < 0.0) throw std::invalid_argument("required revenue must be non-negative");
    double base = 0.0;
    switch (instrument) {
        case Instrument::labor_tax: base = wage(K, L, p) * L; break;
        case Instrument::capital_income_tax: base = interest(K, L, p, 0.0) * K; break;
        // The profit base Y - wL - delta K does not move with tau_c at fixed (K, L),
        // so the budget condition is linear in the rate.
        case Instrument::profit_tax: base = profit_base(K, L, p); break;
        case Instrument::baseline_paygo: throw std::invalid_argument("baseline has no endogenous rate");
    }
    if (!(base > 0.0)) {
        throw InfeasibleScenario(fmt::format("{}: tax base {} is not positive", to_string(instrument), base));
    }
    const double rate = required_revenue / base;
    if (!(rate < 1.0)) {
        throw InfeasibleScenario(fmt::format("{}: required rate {} >= 1, payout unaffordable", to_string(instrument), rate));
    }
    return rate;
}

double endogenous_rate_for_payout(Instrument instrument, double payout_per_retiree, const AggregateState& agg,
                                  const ModelParams& p) {
    return required_rate(instrument, p.retired_count() * payout_per_retiree, agg.K, agg.L, p);
}

double SteadyState::average_earnings(const ModelParams& p) const {
    double sum = 0.0;
    for (int s = 0; s < p.R; ++s) sum += labor[static_cast<std::size_t>(s)];
    return prices.w * sum / p.R;
}

double SteadyState::capital_clearing_residual() const {
    return aggregates.K - std::accumulate(savings.begin() + 1, savings.end(), 0.0);
}

double SteadyState::labor_clearing_residual() const {
    return aggregates.L - std::accumulate(labor.begin(), labor.end(), 0.0);
}

double SteadyState::goods_clearing_residual(const ModelParams& p) const {
    return aggregates.Y - std::accumulate(consumption.begin(), consumption.end(), 0.0) - p.delta * aggregates.K;
}

SteadyState solve_steady_state(const ModelParams& params, const FiscalRule& rule, const SteadyStateOptions& opts) {
    validate(params);
    if (rule.regime == FiscalRegime::settled_payout && rule.payout_per_retiree < 0.0) {
        throw std::invalid_argument("settled payout must be non-negative");
    }
    OuterMap map(params, rule, opts.household);

    OuterState x = default_start(params);
    if (opts.initial_KL) {
        x.K = (*opts.initial_KL)[0];
        x.L = (*opts.initial_KL)[1];
    }
    std::vector<std::array<double, 3>> trajectory;
    Evaluation ev;
    int iter = 0;
    bool converged = false;
    double d = opts.damping;
    double previous_change = INFINITY;
    try {
        // First pass fixes the fiscal quantity consistent with the starting aggregates.
        x.z = rule.regime == FiscalRegime::baseline_paygo
                  ? params.tau_l0 * wage(x.K, x.L, params) * x.L / params.retired_count()
                  : 0.0;
        for (iter = 1; iter <= opts.max_iterations; ++iter) {
            trajectory.push_back({x.K, x.L, x.z});
            ev = map(x);
            if (!ev.admissible) {
                // Households dissave in aggregate: raise the return by shrinking K.
                x.K *= 0.5;
                continue;
            }
            const double change = std::max({relative_change(ev.implied.K, x.K), relative_change(ev.implied.L, x.L),
                                            relative_change(ev.implied.z, x.z)});
            // Savings respond steeply to the return, so a growing step signals
            // overshooting; back the damping off instead of cycling.
            if (opts.adaptive_damping && change > previous_change) d = std::max(0.5 * d, opts.min_damping);
            previous_change = change;
            x = {x.K + d * (ev.implied.K - x.K), x.L + d * (ev.implied.L - x.L), x.z + d * (ev.implied.z - x.z)};
            if (change <= opts.tol) {
                converged = true;
                break;
            }
        }
    } catch (const HouseholdError& e) {
        throw SteadyStateError(fmt::format("steady state: inner household failure at outer iteration {}: {}", iter,
                                           e.what()),
                               trajectory);
    }
    if (!converged) {
        throw SteadyStateError(
            fmt::format("steady state: no convergence in {} outer iterations (last guess K = {}, L = {}, z = {})",
                        opts.max_iterations, x.K, x.L, x.z),
            trajectory);
    }

    if (opts.polish) {
        auto gap = [&](const Vector& v) {
            const auto e = map({v[0], v[1], v[2]});
            Vector out(3);
            out << e.implied.K - v[0], e.implied.L - v[1], e.implied.z - v[2];
            return out;
        };
        Vector v(3);
        v << x.K, x.L, x.z;
        numerics::RootOptions ro;
        ro.tol_residual = 1e-11 * std::max(1.0, x.K);
        ro.max_iterations = 50;
        try {
            v = numerics::solve_root(gap, v, ro).x;
            x = {v[0], v[1], v[2]};
        } catch (const std::runtime_error&) {
            // Keep the fixed-point answer; it already meets the outer tolerance.
        }
    }
    ev = map(x);

    SteadyState ss;
    ss.rule = rule;
    ss.prices = ev.prices;
    ss.rates = ev.fiscal.rates;
    ss.transfer = rule.regime == FiscalRegime::baseline_paygo ? x.z : rule.payout_per_retiree;
    ss.consumption = ev.plan.consumption;
    ss.labor = ev.plan.labor;
    ss.savings.assign(1, 0.0);
    ss.savings.insert(ss.savings.end(), ev.plan.savings_next.begin(), ev.plan.savings_next.end() - 1);
    ss.outer_iterations = iter;

    auto& agg = ss.aggregates;
    agg.K = x.K;
    agg.L = x.L;
    agg.Y = output(x.K, x.L, params);
    agg.C = std::accumulate(ss.consumption.begin(), ss.consumption.end(), 0.0);
    agg.I = params.delta * x.K;
    const double sum_n = std::accumulate(ss.labor.begin(), ss.labor.end(), 0.0);
    const double sum_b = std::accumulate(ss.savings.begin(), ss.savings.end(), 0.0);
    const TaxBases bases{ss.prices.w * sum_n, ss.prices.r * sum_b, profit_base(x.K, x.L, params)};
    ss.revenue = total_revenue(bases, ss.rates);
    agg.T_rev = ss.revenue;

    double max_res = 0.0;
    for (int s = 0; s < params.S; ++s) {
        const auto i = static_cast<std::size_t>(s);
        max_res = std::max(max_res, std::abs(euler_labor_residual(ss.consumption[i], ss.labor[i], ss.prices,
                                                                  ss.rates.tau_l, params.chi_n[i], params)));
        if (s + 1 < params.S && !params.no_borrowing) {
            max_res = std::max(max_res, std::abs(euler_savings_residual(ss.consumption[i], ss.consumption[i + 1],
                                                                        ss.prices.r, ss.rates.tau_k, params)));
        }
    }
    ss.max_euler_residual = max_res;
    return ss;
}

}  // namespace olg
