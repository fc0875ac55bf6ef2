#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "olg/steady_state.hpp"
#include "olg/transition.hpp"
#include "support/oracles.hpp"

using namespace olg;
using doctest::Approx;

namespace {

const SteadyState& baseline() {
    static const SteadyState ss = solve_steady_state(ModelParams{}, FiscalRule::baseline());
    return ss;
}

void check_invariants(const SteadyState& ss, const ModelParams& p) {
    CHECK(std::abs(ss.capital_clearing_residual()) <= 1e-8 * std::max(1.0, ss.aggregates.K));
    CHECK(std::abs(ss.labor_clearing_residual()) <= 1e-8 * std::max(1.0, ss.aggregates.L));
    CHECK(std::abs(ss.goods_clearing_residual(p)) <= 1e-8 * std::max(1.0, ss.aggregates.Y));
    CHECK(ss.max_euler_residual <= 1e-9);
    CHECK(ss.savings.front() == 0.0);
}

}  // namespace

TEST_CASE("baseline steady state satisfies every equilibrium condition") {
    const ModelParams p;
    const auto& ss = baseline();
    check_invariants(ss, p);
    CHECK(ss.prices.r > 0.0);
    CHECK(ss.prices.w == Approx(wage(ss.aggregates.K, ss.aggregates.L, p)).epsilon(1e-14));
    CHECK(ss.prices.r == Approx(interest(ss.aggregates.K, ss.aggregates.L, p, 0.0)).epsilon(1e-14));
    CHECK(ss.aggregates.Y == Approx(output(ss.aggregates.K, ss.aggregates.L, p)).epsilon(1e-14));
    // Pay-as-you-go identity.
    CHECK(p.retired_count() * ss.transfer == Approx(ss.revenue).epsilon(1e-12));
    CHECK(ss.revenue == Approx(p.tau_l0 * ss.prices.w * ss.aggregates.L).epsilon(1e-8));
    CHECK(ss.consumption.size() == 53);
}

TEST_CASE("baseline labor profile declines into retirement with its minimum among retirees") {
    const ModelParams p;
    const auto& n = baseline().labor;
    for (int s = 26; s < p.S; ++s) CHECK(n[static_cast<std::size_t>(s)] <= n[static_cast<std::size_t>(s - 1)] + 1e-12);
    const auto lowest = std::min_element(n.begin(), n.end()) - n.begin() + 1;
    CHECK(lowest > p.R);
}

TEST_CASE("the same equilibrium is found from starts spread over a factor of four") {
    const ModelParams p;
    const auto& ref = baseline();
    for (double scale : {0.5, 1.0, 2.0}) {
        SteadyStateOptions o;
        o.initial_KL = std::array<double, 2>{ref.aggregates.K * scale, ref.aggregates.L * (scale < 1.0 ? 2.0 : 0.5)};
        const auto ss = solve_steady_state(p, FiscalRule::baseline(), o);
        CHECK(ss.aggregates.K == Approx(ref.aggregates.K).epsilon(1e-8));
        CHECK(ss.aggregates.L == Approx(ref.aggregates.L).epsilon(1e-8));
    }
}

TEST_CASE("solution does not depend on the damping schedule") {
    const ModelParams p;
    SteadyStateOptions o;
    o.damping = 0.1;
    o.adaptive_damping = false;
    o.polish = false;
    o.tol = 1e-11;
    const auto ss = solve_steady_state(p, FiscalRule::baseline(), o);
    CHECK(ss.aggregates.K == Approx(baseline().aggregates.K).epsilon(1e-8));
    CHECK(ss.transfer == Approx(baseline().transfer).epsilon(1e-8));
}

TEST_CASE("an iteration cap raises with the trajectory") {
    SteadyStateOptions o;
    o.max_iterations = 3;
    o.polish = false;
    try {
        solve_steady_state(ModelParams{}, FiscalRule::baseline(), o);
        FAIL("expected SteadyStateError");
    } catch (const SteadyStateError& e) {
        CHECK(e.trajectory().size() >= 3);
    }
}

TEST_CASE("settled steady states balance the payout with the instrument") {
    const ModelParams p;
    const double payout = 0.18 * payout_base(baseline(), p);
    for (auto i : {Instrument::labor_tax, Instrument::profit_tax, Instrument::capital_income_tax}) {
        const auto ss = solve_steady_state(p, FiscalRule::settled(i, payout));
        check_invariants(ss, p);
        CHECK(ss.transfer == Approx(payout).epsilon(1e-14));
        CHECK(ss.revenue == Approx(p.retired_count() * payout).epsilon(1e-8));
    }
}

TEST_CASE("profit and capital-income taxes are equivalent") {
    const ModelParams p;
    const double payout = 0.18 * payout_base(baseline(), p);
    const auto a = solve_steady_state(p, FiscalRule::settled(Instrument::profit_tax, payout));
    const auto b = solve_steady_state(p, FiscalRule::settled(Instrument::capital_income_tax, payout));
    CHECK(a.aggregates.K == Approx(b.aggregates.K).epsilon(1e-8));
    CHECK(a.aggregates.L == Approx(b.aggregates.L).epsilon(1e-8));
    CHECK(a.rates.tau_c == Approx(b.rates.tau_k).epsilon(1e-8));
    for (std::size_t s = 0; s < a.consumption.size(); ++s) {
        CHECK(a.consumption[s] == Approx(b.consumption[s]).epsilon(1e-8));
    }
}

TEST_CASE("zero payout leaves every rate at zero") {
    const ModelParams p;
    const auto ss = solve_steady_state(p, FiscalRule::settled(Instrument::labor_tax, 0.0));
    CHECK(ss.rates.tau_l == 0.0);
    CHECK(ss.revenue == 0.0);
    check_invariants(ss, p);
}

TEST_CASE("S = 3 household at the solved prices matches a utility-maximizing grid search") {
    ModelParams p;
    p.S = 3;
    p.R = 2;
    p.chi_n.assign(3, 1.0);
    const auto ss = solve_steady_state(p, FiscalRule::baseline());
    check_invariants(ss, p);
    const auto ref = oracle::household({ss.prices.w, ss.prices.r, p.tau_l0, 0.0, {0.0, 0.0, ss.transfer}}, p);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(std::abs(ss.labor[s] - ref.labor[s]) <= 1e-4);
        CHECK(std::abs(ss.consumption[s] - ref.consumption[s]) <= 1e-4);
        CHECK(std::abs(ss.savings[s] - ref.savings[s]) <= 1e-4);
    }
}

TEST_CASE("fiscal slice") {
    const ModelParams p;
    const auto base = fiscal_slice(FiscalRule::baseline(), 0.7, p);
    CHECK(base.rates.tau_l == p.tau_l0);
    CHECK(base.transfer_by_age[41] == 0.0);
    CHECK(base.transfer_by_age[42] == 0.7);
    const auto settled = fiscal_slice(FiscalRule::settled(Instrument::profit_tax, 0.2), 0.05, p);
    CHECK(settled.rates.tau_c == 0.05);
    CHECK(settled.rates.tau_l == 0.0);
    CHECK(settled.transfer_by_age[52] == 0.2);
}
