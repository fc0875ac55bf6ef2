#include <doctest.h>

#include <cmath>

#include "olg/household.hpp"
#include "olg/steady_state.hpp"
#include "support/oracles.hpp"

using namespace olg;
using doctest::Approx;

namespace {

ModelParams two_period() {
    ModelParams p;
    p.S = 2;
    p.R = 1;
    p.chi_n.assign(2, 1.0);
    return p;
}

FiscalSlice slice(double tau_l, std::vector<double> transfer) {
    FiscalSlice f;
    f.rates.tau_l = tau_l;
    f.transfer_by_age = std::move(transfer);
    return f;
}

const SteadyState& baseline() {
    static const SteadyState ss = solve_steady_state(ModelParams{}, FiscalRule::baseline());
    return ss;
}

}  // namespace

TEST_CASE("S = 2 residuals at hand-set unknowns") {
    const auto p = two_period();
    const Prices prices{1.1, 0.06};
    const auto env = LifetimeEnvironment::constant(2, 0.0, prices, slice(0.2, {0.0, 0.15}), p);
    numerics::Vector u(3);
    u << 0.6, 0.3, 0.12;  // n1, n2, b2
    const auto res = residual_stack(u, env, p);
    REQUIRE(res.size() == 3);

    const double c1 = 0.8 * 1.1 * 0.6 - 0.12;
    const double c2 = 0.8 * 1.1 * 0.3 + 1.06 * 0.12 + 0.15;
    auto mdu = [&](double n) {
        const double nu = p.ellip_nu;
        return p.ellip_b * std::pow(n, nu - 1.0) * std::pow(1.0 - std::pow(n, nu), (1.0 - nu) / nu);
    };
    CHECK(res[0] == Approx(0.8 * 1.1 * std::pow(c1, -p.sigma) - mdu(0.6)).epsilon(1e-12));
    CHECK(res[1] == Approx(0.8 * 1.1 * std::pow(c2, -p.sigma) - mdu(0.3)).epsilon(1e-12));
    CHECK(res[2] == Approx(std::pow(c1, -p.sigma) - p.beta * 1.06 * std::pow(c2, -p.sigma)).epsilon(1e-12));
}

TEST_CASE("terminal cohort has a single labor condition") {
    const ModelParams p;
    const auto env = LifetimeEnvironment::constant(1, 2.0, {1.2, 0.1}, slice(0.22, std::vector<double>(53, 0.5)), p);
    const auto u = default_initial_guess(env, p);
    REQUIRE(u.size() == 1);
    CHECK(u[0] == Approx(0.4));
    CHECK(residual_stack(u, env, p).size() == 1);
    const auto plan = solve_lifetime(env, p);
    CHECK(plan.savings_next == std::vector<double>{0.0});
    CHECK(plan.max_residual <= 1e-9);
}

TEST_CASE("analytic Jacobian matches finite differences") {
    const ModelParams p;
    const auto& ss = baseline();
    const auto fiscal = fiscal_slice(FiscalRule::baseline(), ss.transfer, p);
    for (int remaining : {2, 12, 53}) {
        const auto env = LifetimeEnvironment::constant(remaining, remaining == 53 ? 0.0 : 3.0, ss.prices, fiscal, p);
        auto u = default_initial_guess(env, p);
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] *= 1.0 + 0.01 * std::sin(static_cast<double>(i));
        const auto analytic = residual_jacobian(u, env, p);
        auto f = [&](const numerics::Vector& x) { return residual_stack(x, env, p); };
        // Central differences for a tight reference.
        numerics::Matrix fd(u.size(), u.size());
        for (Eigen::Index j = 0; j < u.size(); ++j) {
            const double h = 1e-6 * std::max(std::abs(u[j]), 1.0);
            auto up = u;
            auto dn = u;
            up[j] += h;
            dn[j] -= h;
            fd.col(j) = (f(up) - f(dn)) / (2.0 * h);
        }
        const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1.0);
        CHECK((analytic - fd).cwiseAbs().maxCoeff() / scale <= 1e-6);
    }
}

TEST_CASE("analytic and finite-difference Jacobians give the same plan") {
    const ModelParams p;
    const auto& ss = baseline();
    const auto env = LifetimeEnvironment::constant(53, 0.0, ss.prices, fiscal_slice(FiscalRule::baseline(), ss.transfer, p), p);
    HouseholdOptions fd;
    fd.jacobian = HouseholdJacobian::finite_difference;
    const auto a = solve_lifetime(env, p);
    const auto b = solve_lifetime(env, p, fd);
    for (std::size_t s = 0; s < a.labor.size(); ++s) {
        CHECK(a.labor[s] == Approx(b.labor[s]).epsilon(1e-9));
        CHECK(a.savings_next[s] == Approx(b.savings_next[s]).scale(1.0).epsilon(1e-9));
    }
}

TEST_CASE("default guess is feasible and converges at the baseline prices") {
    const ModelParams p;
    const auto& ss = baseline();
    const auto env = LifetimeEnvironment::constant(53, 0.0, ss.prices, fiscal_slice(FiscalRule::baseline(), ss.transfer, p), p);
    const auto u = default_initial_guess(env, p);
    for (double c : implied_consumption(u, env)) CHECK(c > 0.0);
    const auto plan = solve_lifetime(env, p);
    CHECK(plan.max_residual <= 1e-9);
    CHECK(numerics::max_norm(residual_stack(pack_unknowns(plan), env, p)) <= 1e-9);
}

TEST_CASE("constant steady-state prices reproduce the steady-state profiles") {
    const ModelParams p;
    const auto& ss = baseline();
    const auto env = LifetimeEnvironment::constant(53, 0.0, ss.prices, fiscal_slice(FiscalRule::baseline(), ss.transfer, p), p);
    const auto plan = solve_lifetime(env, p);
    for (std::size_t s = 0; s < 53; ++s) {
        CHECK(plan.consumption[s] == Approx(ss.consumption[s]).epsilon(1e-8));
        CHECK(plan.labor[s] == Approx(ss.labor[s]).epsilon(1e-8));
        if (s + 1 < 53) CHECK(plan.savings_next[s] == Approx(ss.savings[s + 1]).scale(1.0).epsilon(1e-8));
    }
}

TEST_CASE("budget identity holds every period and lifetime resources are exhausted") {
    const ModelParams p;
    const auto& ss = baseline();
    const auto fiscal = fiscal_slice(FiscalRule::baseline(), ss.transfer, p);
    const double b0 = 4.0;
    const auto env = LifetimeEnvironment::constant(20, b0, ss.prices, fiscal, p);
    const auto plan = solve_lifetime(env, p);
    const double gross = 1.0 + ss.prices.r;
    double b = b0;
    double pv_c = 0.0;
    double pv_income = gross * b0;
    double discount = 1.0;
    for (int k = 0; k < 20; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double income = (1.0 - p.tau_l0) * ss.prices.w * plan.labor[ks] + env.transfer[ks];
        CHECK(plan.consumption[ks] == Approx(income + gross * b - plan.savings_next[ks]).epsilon(1e-10));
        pv_c += plan.consumption[ks] * discount;
        pv_income += income * discount;
        b = plan.savings_next[ks];
        discount /= gross;
    }
    CHECK(plan.savings_next.back() == 0.0);
    CHECK(pv_c == Approx(pv_income).epsilon(1e-10));
}

TEST_CASE("perfect smoothing with no taxes and a flat wage") {
    ModelParams p;
    p.tau_l0 = 0.0;
    const Prices prices{1.0, 1.0 / p.beta - 1.0};
    const auto env = LifetimeEnvironment::constant(53, 0.0, prices, slice(0.0, std::vector<double>(53, 0.0)), p);
    const auto plan = solve_lifetime(env, p);
    for (double c : plan.consumption) CHECK(c == Approx(plan.consumption.front()).epsilon(1e-9));
}

TEST_CASE("S = 2 lifetime matches a utility-maximizing grid search") {
    const auto p = two_period();
    for (double r : {0.02, 0.08, 0.3}) {
        const Prices prices{1.2, r};
        const std::vector<double> transfer{0.0, 0.3};
        const auto plan = solve_lifetime(LifetimeEnvironment::constant(2, 0.0, prices, slice(0.22, transfer), p), p);
        const auto ref = oracle::household({prices.w, prices.r, 0.22, 0.0, transfer}, p);
        for (std::size_t s = 0; s < 2; ++s) {
            CHECK(std::abs(plan.labor[s] - ref.labor[s]) <= 1e-4);
            CHECK(std::abs(plan.consumption[s] - ref.consumption[s]) <= 1e-4);
        }
        CHECK(std::abs(plan.savings_next[0] - ref.savings[1]) <= 1e-4);
    }
}

TEST_CASE("no-borrowing plans keep savings non-negative") {
    ModelParams p;
    p.no_borrowing = true;
    const auto& ss = baseline();
    const auto env = LifetimeEnvironment::constant(53, 0.0, ss.prices, fiscal_slice(FiscalRule::baseline(), ss.transfer, p), p);
    const auto plan = solve_lifetime(env, p);
    for (double b : plan.savings_next) CHECK(b >= -1e-10);
}

TEST_CASE("invalid environments are rejected") {
    const ModelParams p;
    LifetimeEnvironment env;
    env.prices = {{1.0, 0.05}, {1.0, 0.05}};
    env.tau_l = {0.2};
    env.tau_k = {0.0, 0.0};
    env.transfer = {0.0, 0.0};
    CHECK_THROWS(validate(env, p));
}
