#include "olg/transition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace olg {
namespace {

using numerics::Vector;

double relative_change(double next, double current) {
    return std::abs(next - current) / std::max(std::abs(current), 1.0);
}

bool baseline_regime(int t, const ScenarioSpec& spec) {
    return spec.instrument == Instrument::baseline_paygo || t < spec.reform_period;
}

int eligible_count(int t, const ScenarioSpec& spec, const ModelParams& p) {
    int count = 0;
    for (int s = p.R + 1; s <= p.S; ++s) count += payout_eligible(t, s, spec, p) ? 1 : 0;
    return count;
}

// Everything the households need to know about one period.
struct PeriodSlice {
    Prices prices;
    TaxRates rates;
    std::vector<double> transfer_by_age;
};

class PathProblem {
public:
    PathProblem(const SteadyState& initial, const SteadyState& final_ss, const ScenarioSpec& spec,
                const ModelParams& p, const HouseholdOptions& hh)
        : initial_(initial), spec_(spec), p_(p), hh_(hh), T_(spec.horizon_T) {
        final_slice_ = {final_ss.prices, final_ss.rates, transfer_by_age(final_ss.transfer, p.S, p.R)};
        // Cohorts: ages 2..S alive at t = 1 (index s - 2), then newborns of t = 1..T.
        warm_.resize(static_cast<std::size_t>(p.S - 1 + T_));
        const auto final_plan = pack_unknowns(HouseholdPlan{final_ss.consumption, final_ss.labor,
                                                            std::vector<double>(final_ss.savings.begin() + 1,
                                                                                final_ss.savings.end()),
                                                            0, 0.0});
        for (int j = 0; j < T_; ++j) warm_[static_cast<std::size_t>(p.S - 1 + j)] = final_plan;
    }

    [[nodiscard]] int horizon() const noexcept { return T_; }

    // Fiscal quantity in period t: the transfer in baseline periods, the instrument rate after the reform.
    [[nodiscard]] double fiscal_quantity(int t, double K, double L) const {
        if (baseline_regime(t, spec_)) {
            const TaxRates rates{p_.tau_l0, p_.tau_k0, p_.tau_c0};
            const TaxBases bases{wage(K, L, p_) * L, interest(K, L, p_, p_.tau_c0) * K, profit_base(K, L, p_)};
            return balanced_transfer(bases, rates, p_.S, p_.R);
        }
        const double spending = eligible_count(t, spec_, p_) * pension_payout_at(t, spec_, initial_, p_);
        try {
            return required_rate(spec_.instrument, spending, K, L, p_);
        } catch (const InfeasibleScenario& e) {
            throw InfeasibleScenario(fmt::format("period {}: {}", t, e.what()));
        }
    }

    [[nodiscard]] TaxRates rates_at(int t, double z) const {
        if (baseline_regime(t, spec_)) return {p_.tau_l0, p_.tau_k0, p_.tau_c0};
        TaxRates rates;
        switch (spec_.instrument) {
            case Instrument::labor_tax: rates.tau_l = z; break;
            case Instrument::capital_income_tax: rates.tau_k = z; break;
            case Instrument::profit_tax: rates.tau_c = z; break;
            case Instrument::baseline_paygo: break;
        }
        return rates;
    }

    [[nodiscard]] double transfer_at(int t, int s, double z) const {
        if (s <= p_.R) return 0.0;
        if (baseline_regime(t, spec_)) return z;
        return payout_eligible(t, s, spec_, p_) ? pension_payout_at(t, spec_, initial_, p_) : 0.0;
    }

    void set_paths(const std::vector<double>& K, const std::vector<double>& L, const std::vector<double>& z) {
        slices_.resize(static_cast<std::size_t>(T_));
        for (int t = 1; t <= T_; ++t) {
            const auto i = static_cast<std::size_t>(t - 1);
            auto& sl = slices_[i];
            sl.rates = rates_at(t, z[i]);
            sl.prices = {wage(K[i], L[i], p_), interest(K[i], L[i], p_, sl.rates.tau_c)};
            sl.transfer_by_age.resize(static_cast<std::size_t>(p_.S));
            for (int s = 1; s <= p_.S; ++s) sl.transfer_by_age[static_cast<std::size_t>(s - 1)] = transfer_at(t, s, z[i]);
        }
    }

    [[nodiscard]] const PeriodSlice& slice(int t) const {
        return t <= T_ ? slices_[static_cast<std::size_t>(t - 1)] : final_slice_;
    }

    // Solves every cohort at the current slices and fills the panel.
    double solve_cohorts(CohortPanel& panel) {
        const auto S = static_cast<std::size_t>(p_.S);
        panel.consumption.assign(static_cast<std::size_t>(T_), std::vector<double>(S, 0.0));
        panel.labor.assign(static_cast<std::size_t>(T_), std::vector<double>(S, 0.0));
        panel.savings.assign(static_cast<std::size_t>(T_ + 1), std::vector<double>(S, 0.0));
        panel.savings[0] = initial_.savings;

        double worst = 0.0;
        const int cohorts = p_.S - 1 + T_;
        for (int j = 0; j < cohorts; ++j) {
            // Entry period and age of cohort j.
            const int t0 = j < p_.S - 1 ? 1 : j - (p_.S - 1) + 1;
            const int a0 = j < p_.S - 1 ? j + 2 : 1;
            const int remaining = p_.S - a0 + 1;
            LifetimeEnvironment env;
            env.initial_savings = a0 == 1 ? 0.0 : initial_.savings[static_cast<std::size_t>(a0 - 1)];
            env.prices.resize(static_cast<std::size_t>(remaining));
            env.tau_l.resize(static_cast<std::size_t>(remaining));
            env.tau_k.resize(static_cast<std::size_t>(remaining));
            env.transfer.resize(static_cast<std::size_t>(remaining));
            for (int k = 0; k < remaining; ++k) {
                const auto& sl = slice(t0 + k);
                const auto ks = static_cast<std::size_t>(k);
                env.prices[ks] = sl.prices;
                env.tau_l[ks] = sl.rates.tau_l;
                env.tau_k[ks] = sl.rates.tau_k;
                env.transfer[ks] = sl.transfer_by_age[static_cast<std::size_t>(a0 - 1 + k)];
            }
            auto& warm = warm_[static_cast<std::size_t>(j)];
            HouseholdPlan plan;
            try {
                plan = solve_lifetime(env, p_, hh_, warm.size() > 0 ? &warm : nullptr);
            } catch (const HouseholdError& e) {
                throw HouseholdError(fmt::format("cohort entering period {} at age {}: {}", t0, a0, e.what()),
                                     e.best_residual(), e.iterations());
            }
            warm = pack_unknowns(plan);
            worst = std::max(worst, plan.max_residual);

            for (int k = 0; k < remaining; ++k) {
                const int t = t0 + k;
                const auto ks = static_cast<std::size_t>(k);
                const auto age = static_cast<std::size_t>(a0 - 1 + k);
                if (t <= T_) {
                    panel.consumption[static_cast<std::size_t>(t - 1)][age] = plan.consumption[ks];
                    panel.labor[static_cast<std::size_t>(t - 1)][age] = plan.labor[ks];
                }
                if (k + 1 < remaining && t + 1 <= T_ + 1) {
                    panel.savings[static_cast<std::size_t>(t)][age + 1] = plan.savings_next[ks];
                }
            }
        }
        return worst;
    }

private:
    const SteadyState& initial_;
    const ScenarioSpec& spec_;
    const ModelParams& p_;
    HouseholdOptions hh_;
    int T_;
    PeriodSlice final_slice_;
    std::vector<PeriodSlice> slices_;
    std::vector<Vector> warm_;
};

double row_sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

double payout_base(const SteadyState& baseline, const ModelParams& params) {
    return baseline.average_earnings(params);
}

bool payout_eligible(int t, int s, const ScenarioSpec& spec, const ModelParams& params) {
    if (s <= params.R || spec.instrument == Instrument::baseline_paygo) return false;
    const int last_window_period = spec.reform_period + spec.window_length - 1;
    if (t <= last_window_period) return true;
    switch (spec.post_window_pillar) {
        case PostWindowPillar::subsistence_for_all: return true;
        case PostWindowPillar::subsistence_for_grandfathered:
            // Retired by the end of the window: entered age R + 1 no later than its last period.
            return t - (s - params.R - 1) <= last_window_period;
        case PostWindowPillar::none: return false;
    }
    return false;
}

double pension_payout_at(int t, const ScenarioSpec& spec, const SteadyState& baseline, const ModelParams& params) {
    if (t < 1) throw std::invalid_argument(fmt::format("period {} precedes the first period", t));
    if (baseline_regime(t, spec)) return baseline.transfer;
    const double base = payout_base(baseline, params);
    if (t < spec.reform_period + spec.window_length) return spec.payout_high_ratio * base;
    if (spec.post_window_pillar == PostWindowPillar::none) return 0.0;
    return spec.payout_low_ratio * base;
}

FiscalRule settled_rule(const ScenarioSpec& spec, const SteadyState& baseline, const ModelParams& params) {
    if (spec.instrument == Instrument::baseline_paygo) return FiscalRule::baseline();
    const double payout = spec.post_window_pillar == PostWindowPillar::subsistence_for_all
                              ? spec.payout_low_ratio * payout_base(baseline, params)
                              : 0.0;
    return FiscalRule::settled(spec.instrument, payout);
}

Phase period_phase(int t, const ScenarioSpec& spec, const ModelParams& params) {
    if (baseline_regime(t, spec)) return Phase::pre_reform;
    return phase_of_period(t, spec, params);
}

TransitionResult solve_transition(const SteadyState& initial_ss, const SteadyState& final_ss, const ScenarioSpec& spec,
                                  const ModelParams& params, const TransitionOptions& opts) {
    validate(params);
    validate(spec, params);
    if (initial_ss.labor.size() != static_cast<std::size_t>(params.S) ||
        final_ss.labor.size() != static_cast<std::size_t>(params.S)) {
        throw std::invalid_argument("transition: steady states were solved for a different S");
    }
    if (initial_ss.rule.regime != FiscalRegime::baseline_paygo) {
        throw std::invalid_argument("transition: the initial steady state must be the PAYG baseline");
    }

    PathProblem problem(initial_ss, final_ss, spec, params, opts.household);
    const int T = spec.horizon_T;
    const auto Tn = static_cast<std::size_t>(T);

    // Linear interpolation between the steady states over the reform, window
    // and one lifespan, flat afterwards.
    std::vector<double> K(Tn), L(Tn), z(Tn);
    const int ramp = std::min(T, spec.reform_period - 1 + spec.window_length + params.S);
    for (int t = 1; t <= T; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        const double share = t >= ramp ? 1.0 : static_cast<double>(t - 1) / (ramp - 1);
        K[i] = initial_ss.aggregates.K + share * (final_ss.aggregates.K - initial_ss.aggregates.K);
        L[i] = initial_ss.aggregates.L + share * (final_ss.aggregates.L - initial_ss.aggregates.L);
    }
    K[0] = initial_ss.aggregates.K;
    for (int t = 1; t <= T; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        z[i] = problem.fiscal_quantity(t, K[i], L[i]);
    }

    TransitionResult result;
    CohortPanel panel;
    std::vector<double> K_new(Tn), L_new(Tn), z_new(Tn);
    double d = opts.damping;
    double previous = INFINITY;
    bool converged = false;
    int iter = 0;
    for (iter = 1; iter <= opts.max_iterations; ++iter) {
        problem.set_paths(K, L, z);
        problem.solve_cohorts(panel);
        double change = 0.0;
        for (int t = 1; t <= T; ++t) {
            const auto i = static_cast<std::size_t>(t - 1);
            K_new[i] = t == 1 ? initial_ss.aggregates.K : row_sum(panel.savings[i]);
            L_new[i] = row_sum(panel.labor[i]);
            if (!(K_new[i] > 0.0) || !(L_new[i] > 0.0)) {
                throw TransitionError(
                    fmt::format("transition: households imply K = {} and L = {} in period {}", K_new[i], L_new[i], t),
                    result.change_history);
            }
            z_new[i] = problem.fiscal_quantity(t, K_new[i], L_new[i]);
            change = std::max({change, relative_change(K_new[i], K[i]), relative_change(L_new[i], L[i]),
                               relative_change(z_new[i], z[i])});
        }
        result.change_history.push_back(change);
        if (change <= opts.tol) {
            converged = true;
            break;
        }
        if (opts.adaptive_damping && change > previous) d = std::max(0.5 * d, opts.min_damping);
        previous = change;
        for (std::size_t i = 0; i < Tn; ++i) {
            K[i] += d * (K_new[i] - K[i]);
            L[i] += d * (L_new[i] - L[i]);
            z[i] += d * (z_new[i] - z[i]);
        }
    }
    if (!converged) {
        throw TransitionError(fmt::format("transition ({}): no convergence in {} iterations, last path change {}",
                                          to_string(spec.instrument), opts.max_iterations,
                                          result.change_history.back()),
                              result.change_history);
    }

    // Report the last guess, whose prices the stored plans were solved against.
    result.max_euler_residual = 0.0;
    for (const auto& row : panel.consumption) {
        for (double c : row) {
            if (!(c > 0.0)) throw TransitionError("transition: non-positive consumption on the converged path", result.change_history);
        }
    }
    result.iterations = iter;
    result.final_change = result.change_history.back();
    result.final_damping = d;

    auto& path = result.path;
    path.scenario = std::string(to_string(spec.instrument));
    for (auto* v : {&path.K, &path.L, &path.Y, &path.C, &path.I, &path.w, &path.r, &path.tau_l, &path.tau_k,
                    &path.tau_c, &path.tax_rate, &path.payout, &path.eligible_retirees, &path.revenue}) {
        v->assign(Tn, 0.0);
    }
    path.phase.resize(Tn);
    result.goods_residual.assign(Tn, 0.0);
    result.budget_residual.assign(Tn, 0.0);
    for (int t = 1; t <= T; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        const auto& sl = problem.slice(t);
        path.K[i] = K[i];
        path.L[i] = L[i];
        path.Y[i] = output(K[i], L[i], params);
        path.C[i] = row_sum(panel.consumption[i]);
        // Capital next period comes from this period's savings decisions.
        const double K_next = row_sum(panel.savings[i + 1]);
        path.I[i] = K_next - (1.0 - params.delta) * K[i];
        path.w[i] = sl.prices.w;
        path.r[i] = sl.prices.r;
        path.tau_l[i] = sl.rates.tau_l;
        path.tau_k[i] = sl.rates.tau_k;
        path.tau_c[i] = sl.rates.tau_c;
        path.phase[i] = period_phase(t, spec, params);
        const bool pre = baseline_regime(t, spec);
        path.tax_rate[i] = pre ? params.tau_l0 : z[i];
        path.payout[i] = pre ? z[i] : pension_payout_at(t, spec, initial_ss, params);
        path.eligible_retirees[i] = pre ? params.retired_count() : eligible_count(t, spec, params);

        const double sum_n = row_sum(panel.labor[i]);
        const double sum_b = row_sum(panel.savings[i]);
        const TaxBases bases{sl.prices.w * sum_n, sl.prices.r * sum_b, profit_base(K[i], L[i], params)};
        path.revenue[i] = total_revenue(bases, sl.rates);
        result.budget_residual[i] = path.revenue[i] - path.payout[i] * path.eligible_retirees[i];
        result.goods_residual[i] = path.Y[i] - path.C[i] - path.I[i];
    }
    result.panel = std::move(panel);

    // Euler residuals recomputed from the stored panel, independent of the solver's own norm.
    double worst = 0.0;
    for (int t = 1; t <= T; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        const auto& sl = problem.slice(t);
        for (int s = 1; s <= params.S; ++s) {
            const auto a = static_cast<std::size_t>(s - 1);
            const double c = result.panel.consumption[i][a];
            worst = std::max(worst, std::abs(euler_labor_residual(c, result.panel.labor[i][a], sl.prices,
                                                                  sl.rates.tau_l, params.chi_n[a], params)));
            if (s < params.S && t < T && !params.no_borrowing) {
                const auto& next = problem.slice(t + 1);
                worst = std::max(worst, std::abs(euler_savings_residual(c, result.panel.consumption[i + 1][a + 1],
                                                                        next.prices.r, next.rates.tau_k, params)));
            }
        }
    }
    result.max_euler_residual = worst;
    return result;
}

AgeBand model_age_band(int first_calendar_age, int last_calendar_age, const ModelParams& params) {
    const int offset = calendar_age(1) - 1;
    AgeBand band{first_calendar_age - offset, last_calendar_age - offset};
    if (band.first_age < 1 || band.last_age > params.S || band.first_age > band.last_age) {
        throw std::invalid_argument(fmt::format("age band {}-{} is outside model ages", first_calendar_age,
                                                last_calendar_age));
    }
    return band;
}

double band_average(const std::vector<double>& by_age, AgeBand band) {
    double sum = 0.0;
    for (int s = band.first_age; s <= band.last_age; ++s) sum += by_age.at(static_cast<std::size_t>(s - 1));
    return sum / (band.last_age - band.first_age + 1);
}

CohortConsumption cohort_consumption_panels(const TransitionResult& result, const SteadyState& baseline,
                                            const ScenarioSpec& spec, const ModelParams& params) {
    CohortConsumption out;
    const auto& c = result.panel.consumption;
    const int T = static_cast<int>(c.size());
    const double baseline_lifetime = row_sum(baseline.consumption);
    auto consumption_at = [&](int t, int s) {
        if (t < 1 || t > T) return baseline.consumption[static_cast<std::size_t>(s - 1)];
        return c[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(s - 1)];
    };
    const int t_r = spec.reform_period;
    for (int a = 1; a <= params.S; ++a) {
        double lifetime = 0.0;
        for (int s = 1; s <= params.S; ++s) lifetime += consumption_at(t_r + (s - a), s);
        out.age_at_reform.push_back(a);
        out.lifetime_total.push_back(lifetime);
        out.lifetime_pct_dev.push_back(100.0 * (lifetime / baseline_lifetime - 1.0));
    }
    const auto middle = model_age_band(35, 45, params);
    const auto retiree = model_age_band(62, 72, params);
    const double middle_base = band_average(baseline.consumption, middle);
    const double retiree_base = band_average(baseline.consumption, retiree);
    for (const auto& row : c) {
        out.middle_band_pct_dev.push_back(100.0 * (band_average(row, middle) / middle_base - 1.0));
        out.retiree_band_pct_dev.push_back(100.0 * (band_average(row, retiree) / retiree_base - 1.0));
    }
    return out;
}

}  // namespace olg
