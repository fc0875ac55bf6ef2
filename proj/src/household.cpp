#include "olg/household.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace olg {
namespace {

using numerics::Matrix;
using numerics::Vector;

struct PeriodTerms {
    double after_tax_wage;  // (1 - tau_l) w
    double gross_return;    // 1 + r (1 - tau_k)
};

PeriodTerms terms(const LifetimeEnvironment& env, int k) {
    const auto i = static_cast<std::size_t>(k);
    return {(1.0 - env.tau_l[i]) * env.prices[i].w, 1.0 + env.prices[i].r * (1.0 - env.tau_k[i])};
}

// Savings entering period k (0-based); b_0 is the initial wealth, b_p = 0.
double savings_in(const Vector& u, const LifetimeEnvironment& env, int k) {
    const int p = env.ages_remaining();
    if (k == 0) return env.initial_savings;
    if (k >= p) return 0.0;
    return u[p + k - 1];
}

struct FbTerms {
    double value;
    double d_savings;
    double d_residual;
};

FbTerms fischer_burmeister(double b, double e) {
    const double rho = std::sqrt(b * b + e * e + 1e-30);
    return {b + e - rho, 1.0 - b / rho, 1.0 - e / rho};
}

}  // namespace

LifetimeEnvironment LifetimeEnvironment::constant(int ages_remaining, double initial_savings, const Prices& prices,
                                                  const FiscalSlice& fiscal, const ModelParams& p) {
    LifetimeEnvironment env;
    env.initial_savings = initial_savings;
    const auto n = static_cast<std::size_t>(ages_remaining);
    env.prices.assign(n, prices);
    env.tau_l.assign(n, fiscal.rates.tau_l);
    env.tau_k.assign(n, fiscal.rates.tau_k);
    env.transfer.resize(n);
    const int first = p.S - ages_remaining + 1;
    for (std::size_t k = 0; k < n; ++k) env.transfer[k] = fiscal.transfer_by_age.at(first - 1 + k);
    return env;
}

void validate(const LifetimeEnvironment& env, const ModelParams& params) {
    const int p = env.ages_remaining();
    if (p < 1 || p > params.S) {
        throw std::invalid_argument(fmt::format("lifetime environment: ages_remaining {} outside [1, {}]", p, params.S));
    }
    const auto n = static_cast<std::size_t>(p);
    if (env.tau_l.size() != n || env.tau_k.size() != n || env.transfer.size() != n) {
        throw std::invalid_argument("lifetime environment: sequence lengths differ from ages_remaining");
    }
    if (!std::isfinite(env.initial_savings)) {
        throw std::invalid_argument("lifetime environment: initial savings not finite");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!(env.prices[k].w > 0.0) || !(env.prices[k].r > -1.0)) {
            throw std::invalid_argument(
                fmt::format("lifetime environment: invalid prices in period {} (w = {}, r = {})", k, env.prices[k].w,
                            env.prices[k].r));
        }
    }
}

std::vector<double> implied_consumption(const Vector& u, const LifetimeEnvironment& env) {
    const int p = env.ages_remaining();
    std::vector<double> c(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
        const auto t = terms(env, k);
        c[static_cast<std::size_t>(k)] = t.after_tax_wage * u[k] + t.gross_return * savings_in(u, env, k) +
                                         env.transfer[static_cast<std::size_t>(k)] - savings_in(u, env, k + 1);
    }
    return c;
}

Vector residual_stack(const Vector& u, const LifetimeEnvironment& env, const ModelParams& params) {
    const int p = env.ages_remaining();
    const int first = env.first_age(params);
    const auto c = implied_consumption(u, env);
    Vector res(2 * p - 1);
    std::vector<double> mu(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        mu[ks] = mu_consumption_smooth(c[ks], params.sigma).value;
        const double chi = params.chi_n[static_cast<std::size_t>(first - 1 + k)];
        res[k] = terms(env, k).after_tax_wage * mu[ks] - mdu_labor_smooth(u[k], chi, params).value;
    }
    for (int k = 0; k + 1 < p; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double euler = mu[ks] - params.beta * terms(env, k + 1).gross_return * mu[ks + 1];
        res[p + k] = params.no_borrowing ? fischer_burmeister(u[p + k], euler).value : euler;
    }
    return res;
}

Matrix residual_jacobian(const Vector& u, const LifetimeEnvironment& env, const ModelParams& params) {
    const int p = env.ages_remaining();
    const int m = 2 * p - 1;
    const int first = env.first_age(params);
    const auto c = implied_consumption(u, env);
    Matrix jac = Matrix::Zero(m, m);

    std::vector<ValueSlope> mu(static_cast<std::size_t>(p));
    std::vector<PeriodTerms> pt(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
        mu[static_cast<std::size_t>(k)] = mu_consumption_smooth(c[static_cast<std::size_t>(k)], params.sigma);
        pt[static_cast<std::size_t>(k)] = terms(env, k);
    }
    auto b_col = [p](int k) { return p + k - 1; };  // column of b entering period k, 1 <= k <= p - 1

    // Derivatives of c_k: n_k -> a_k, b_k -> G_k, b_{k+1} -> -1.
    auto add_dc = [&](int row, int k, double factor) {
        const auto& t = pt[static_cast<std::size_t>(k)];
        jac(row, k) += factor * t.after_tax_wage;
        if (k >= 1) jac(row, b_col(k)) += factor * t.gross_return;
        if (k + 1 <= p - 1) jac(row, b_col(k + 1)) -= factor;
    };

    for (int k = 0; k < p; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double chi = params.chi_n[static_cast<std::size_t>(first - 1 + k)];
        add_dc(k, k, pt[ks].after_tax_wage * mu[ks].slope);
        jac(k, k) -= mdu_labor_smooth(u[k], chi, params).slope;
    }
    for (int k = 0; k + 1 < p; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const int row = p + k;
        const double discount = params.beta * pt[ks + 1].gross_return;
        add_dc(row, k, mu[ks].slope);
        add_dc(row, k + 1, -discount * mu[ks + 1].slope);
        if (params.no_borrowing) {
            const double euler = mu[ks].value - discount * mu[ks + 1].value;
            const auto fb = fischer_burmeister(u[p + k], euler);
            jac.row(row) *= fb.d_residual;
            jac(row, b_col(k + 1)) += fb.d_savings;
        }
    }
    return jac;
}

Vector default_initial_guess(const LifetimeEnvironment& env, const ModelParams& params) {
    const int p = env.ages_remaining();
    const int first = env.first_age(params);
    Vector u(2 * p - 1);
    for (int k = 0; k < p; ++k) u[k] = 0.4 * params.l_tilde;

    const double earnings = env.prices.front().w * 0.4 * params.l_tilde;
    const double peak_age = params.R + 1.0;
    auto hump = [&](int age) {
        const double z = (age - peak_age) / params.R;
        return earnings * std::max(0.0, 1.0 - z * z);
    };
    // Shift the hump so it starts at the cohort's actual wealth and fades out by death.
    const double gap = env.initial_savings - hump(first);
    for (int k = 1; k < p; ++k) {
        const int age = first + k;
        const double fade = static_cast<double>(params.S + 1 - age) / (params.S + 1 - first);
        u[p + k - 1] = hump(age) + gap * fade;
    }
    return u;
}

Vector pack_unknowns(const HouseholdPlan& plan) {
    const int p = static_cast<int>(plan.labor.size());
    Vector u(2 * p - 1);
    for (int k = 0; k < p; ++k) u[k] = plan.labor[static_cast<std::size_t>(k)];
    for (int k = 0; k + 1 < p; ++k) u[p + k] = plan.savings_next[static_cast<std::size_t>(k)];
    return u;
}

HouseholdPlan solve_lifetime(const LifetimeEnvironment& env, const ModelParams& params, const HouseholdOptions& opts,
                             const Vector* warm_start) {
    validate(env, params);
    const int p = env.ages_remaining();

    // Upper bound on lifetime resources: full-time work every period.
    double resources = (1.0 + env.prices[0].r * (1.0 - env.tau_k[0])) * env.initial_savings;
    double discount = 1.0;
    for (int k = 0; k < p; ++k) {
        if (k > 0) discount /= terms(env, k).gross_return;
        resources += discount * (terms(env, k).after_tax_wage * params.l_tilde + env.transfer[static_cast<std::size_t>(k)]);
    }
    if (!(resources > 0.0)) {
        throw InfeasibleEnvironment(
            fmt::format("household: no feasible plan, lifetime resources {} <= 0 (p = {})", resources, p));
    }

    auto f = [&](const Vector& u) { return residual_stack(u, env, params); };
    numerics::JacobianFunction jac;
    if (opts.jacobian == HouseholdJacobian::analytic) {
        jac = [&](const Vector& u) { return residual_jacobian(u, env, params); };
    }

    numerics::RootResult root;
    auto attempt = [&](const Vector& x0) { root = numerics::solve_root(f, x0, opts.root, jac); };
    try {
        if (warm_start != nullptr && warm_start->size() == 2 * p - 1) {
            try {
                attempt(*warm_start);
            } catch (const std::runtime_error&) {
                attempt(default_initial_guess(env, params));
            }
        } else {
            attempt(default_initial_guess(env, params));
        }
    } catch (const numerics::SolverError& e) {
        throw HouseholdError(fmt::format("household (p = {}): {}", p, e.what()), e.best_residual(), e.iterations());
    } catch (const numerics::NonFiniteError& e) {
        throw HouseholdError(fmt::format("household (p = {}): {}", p, e.what()), INFINITY, 0);
    }

    HouseholdPlan plan;
    plan.consumption = implied_consumption(root.x, env);
    plan.labor.assign(root.x.data(), root.x.data() + p);
    plan.savings_next.assign(static_cast<std::size_t>(p), 0.0);
    for (int k = 0; k + 1 < p; ++k) plan.savings_next[static_cast<std::size_t>(k)] = root.x[p + k];
    plan.iterations = root.iterations;
    plan.max_residual = root.residual_norm;

    for (int k = 0; k < p; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (!(plan.consumption[ks] >= kConsumptionFloor) || !(plan.labor[ks] >= 0.0) || !(plan.labor[ks] < params.l_tilde)) {
            throw HouseholdError(
                fmt::format("household (p = {}): converged outside the domain at period {} (c = {}, n = {})", p, k,
                            plan.consumption[ks], plan.labor[ks]),
                plan.max_residual, plan.iterations);
        }
    }
    return plan;
}

}  // namespace olg
