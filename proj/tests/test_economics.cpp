#include <doctest.h>

#include <cmath>
#include <random>

#include "olg/economics.hpp"
#include "olg/steady_state.hpp"

using namespace olg;
using doctest::Approx;

namespace {
ModelParams unit_tech() {
    ModelParams p;
    p.A = 1.0;
    p.alpha = 0.5;
    p.delta = 0.0;
    return p;
}

// Central difference with a relative step.
double derivative(const std::function<double(double)>& f, double x) {
    const double h = 1e-6 * std::max(std::abs(x), 1e-3);
    return (f(x + h) - f(x - h)) / (2.0 * h);
}
}  // namespace

TEST_CASE("output") {
    const ModelParams p;
    CHECK(output(1.0, 1.0, p) == Approx(1.889).epsilon(1e-15));
    CHECK(output(4.0, 1.0, unit_tech()) == Approx(2.0).epsilon(1e-15));
    CHECK(output(10.0, 20.0, p) == Approx(1.889 * std::pow(10.0, 0.3573) * std::pow(20.0, 0.6427)).epsilon(1e-14));
    CHECK_THROWS_AS(output(0.0, 1.0, p), DomainError);
    CHECK_THROWS_AS(output(1.0, -1.0, p), DomainError);
}

TEST_CASE("wage") {
    const ModelParams p;
    CHECK(wage(3.0, 3.0, unit_tech()) == Approx(0.5).epsilon(1e-15));
    CHECK(wage(1.0, 1.0, p) == Approx(0.6427 * 1.889).epsilon(1e-14));
    CHECK(wage(2.0, 1.0, p) > wage(1.0, 1.0, p));
}

TEST_CASE("interest") {
    const ModelParams p;
    CHECK(interest(1.0, 1.0, unit_tech(), 0.0) == Approx(0.5).epsilon(1e-15));
    CHECK(interest(1.0, 1.0, p, 0.0) == Approx(0.3573 * 1.889 - 0.05).epsilon(1e-14));
    CHECK(interest(7.0, 2.0, p, 1.0) == 0.0);
}

TEST_CASE("profit base equals the pre-tax return on capital") {
    const ModelParams p;
    for (double K : {0.5, 3.0, 200.0}) {
        CHECK(profit_base(K, 30.0, p) == Approx(interest(K, 30.0, p, 0.0) * K).epsilon(1e-12));
    }
}

TEST_CASE("marginal utilities") {
    const ModelParams p;
    CHECK(mu_consumption(1.0, 1.97) == 1.0);
    CHECK(mu_consumption(2.0, 1.97) == Approx(std::pow(2.0, -1.97)).epsilon(1e-15));
    CHECK(mu_consumption(2.0, 1.97) < mu_consumption(1.0, 1.97));
    CHECK_THROWS_AS(mu_consumption(0.0, 1.97), DomainError);
    CHECK(mdu_labor_elliptical(0.0, 1.0, p) == 0.0);
    // Divergence at the endowment: the bracket term goes to zero under a negative exponent.
    double previous = mdu_labor_elliptical(0.9, 1.0, p);
    for (double gap : {1e-3, 1e-6, 1e-9, 1e-12}) {
        const double v = mdu_labor_elliptical(1.0 - gap, 1.0, p);
        CHECK(v > 2.0 * previous);
        previous = v;
    }
    CHECK_THROWS_AS(mdu_labor_elliptical(1.0, 1.0, p), DomainError);
    CHECK(mdu_labor_cfe(0.0, 0.565) == 0.0);
    CHECK(mdu_labor_cfe(1.0, 0.565) == 1.0);
    CHECK(mdu_labor_cfe(1.0, 3.0) == 1.0);
    CHECK(mdu_labor_cfe(0.5, 0.565) == Approx(std::pow(0.5, 1.0 / 0.565)).epsilon(1e-15));
}

TEST_CASE("period utility") {
    const ModelParams p;
    const double c = 1.3;
    const double crra = std::pow(c, 1.0 - p.sigma) / (1.0 - p.sigma);
    CHECK(period_utility(c, 0.0, 1.7, p) == Approx(crra + 1.7 * p.ellip_b).epsilon(1e-15));
    CHECK_THROWS_AS(period_utility(c, 1.0, 1.0, p), DomainError);

    // Below the floor: finite, continuous at the floor and increasing toward feasibility.
    const double at_floor = period_utility(kConsumptionFloor, 0.3, 1.0, p);
    CHECK(period_utility(kConsumptionFloor * (1 - 1e-9), 0.3, 1.0, p) == Approx(at_floor).epsilon(1e-6));
    const double neg = period_utility(-0.5, 0.3, 1.0, p);
    CHECK(std::isfinite(neg));
    CHECK(neg < period_utility(-0.1, 0.3, 1.0, p));
    CHECK(period_utility(-0.1, 0.3, 1.0, p) < at_floor);
}

TEST_CASE("period-utility gradients match the analytic marginal utilities at random interior points") {
    const ModelParams p;
    std::mt19937_64 rng(20240101);
    std::uniform_real_distribution<double> cdist(0.05, 5.0);
    std::uniform_real_distribution<double> ndist(0.02, 0.97);
    std::uniform_real_distribution<double> chidist(0.5, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double c = cdist(rng);
        const double n = ndist(rng);
        const double chi = chidist(rng);
        const double du_dc = derivative([&](double x) { return period_utility(x, n, chi, p); }, c);
        const double du_dn = derivative([&](double x) { return period_utility(c, x, chi, p); }, n);
        const double mu_c = mu_consumption(c, p.sigma);
        const double mu_n = -mdu_labor_elliptical(n, chi, p);
        worst = std::max({worst, std::abs(du_dc - mu_c) / std::abs(mu_c), std::abs(du_dn - mu_n) / std::abs(mu_n)});
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("smooth marginal utilities agree inside the domain and have consistent slopes") {
    const ModelParams p;
    for (double c : {0.01, 0.5, 3.0}) {
        const auto v = mu_consumption_smooth(c, p.sigma);
        CHECK(v.value == Approx(mu_consumption(c, p.sigma)).epsilon(1e-15));
        CHECK(v.slope == Approx(derivative([&](double x) { return mu_consumption(x, p.sigma); }, c)).epsilon(1e-6));
    }
    for (double n : {0.05, 0.5, 0.9}) {
        const auto v = mdu_labor_smooth(n, 1.0, p);
        CHECK(v.value == Approx(mdu_labor_elliptical(n, 1.0, p)).epsilon(1e-14));
        CHECK(v.slope ==
              Approx(derivative([&](double x) { return mdu_labor_elliptical(x, 1.0, p); }, n)).epsilon(1e-6));
    }
    // Linear continuation outside.
    const auto below = mu_consumption_smooth(-1.0, p.sigma);
    CHECK(std::isfinite(below.value));
    CHECK(below.slope < 0.0);
    const auto above = mdu_labor_smooth(1.2, 1.0, p);
    CHECK(std::isfinite(above.value));
    CHECK(above.slope > 0.0);
}

TEST_CASE("cross-partial of output is positive at random (K, L)") {
    const ModelParams p;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> logdist(std::log(1e-2), std::log(1e4));
    int positive = 0;
    for (int i = 0; i < 100; ++i) {
        const double K = std::exp(logdist(rng));
        const double L = std::exp(logdist(rng));
        const double dw_dK = derivative([&](double k) { return wage(k, L, p); }, K);
        const double analytic = p.alpha * p.A * std::pow(K, p.alpha - 1.0) * (1.0 - p.alpha) * std::pow(L, -p.alpha);
        CHECK(dw_dK == Approx(analytic).epsilon(1e-6));
        if (dw_dK > 0.0) ++positive;
    }
    CHECK(positive == 100);
}

TEST_CASE("factor prices are homogeneous of degree zero") {
    const ModelParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.1, 100.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double K = dist(rng);
        const double L = dist(rng);
        for (double lambda : {0.25, 3.0, 1e3}) {
            const double w0 = wage(K, L, p);
            const double r0 = interest(K, L, p, 0.1);
            worst = std::max(worst, std::abs(wage(lambda * K, lambda * L, p) - w0) / std::abs(w0));
            worst = std::max(worst, std::abs(interest(lambda * K, lambda * L, p, 0.1) - r0) / std::max(std::abs(r0), 1.0));
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("budget") {
    const Prices prices{1.0, 0.0};
    const TaxRates rates{0.22, 0.0, 0.0};
    const auto zero = consumption_from_budget(0.0, 0.0, 0.0, prices, rates, 0.0);
    CHECK(zero.value == 0.0);
    CHECK_FALSE(zero.feasible);
    const auto c = consumption_from_budget(0.5, 0.0, 0.0, prices, rates, 0.0);
    CHECK(c.value == Approx(0.39).epsilon(1e-15));
    CHECK(c.feasible);
    const auto full = consumption_from_budget(0.4, 2.0, 1.5, {1.3, 0.05}, {0.2, 0.1, 0.3}, 0.25);
    CHECK(full.value == Approx(0.8 * 1.3 * 0.4 + (1.0 + 0.05 * 0.9) * 2.0 + 0.25 - 1.5).epsilon(1e-15));
}

TEST_CASE("balanced transfer") {
    TaxBases bases;
    bases.labor_income = 10.0;
    CHECK(balanced_transfer(bases, {0.22, 0.0, 0.0}, 53, 42) == Approx(0.2).epsilon(1e-15));
    CHECK(balanced_transfer(bases, {}, 53, 42) == 0.0);
    const auto by_age = transfer_by_age(0.3, 5, 3);
    CHECK(by_age == std::vector<double>{0.0, 0.0, 0.0, 0.3, 0.3});
    CHECK_THROWS_AS(balanced_transfer(bases, {}, 3, 3), DomainError);
}

TEST_CASE("Euler residual properties") {
    const ModelParams p;
    const Prices prices{1.2, 0.05};
    // Labor condition decreasing in c at fixed n, sign change across n.
    CHECK(euler_labor_residual(0.5, 0.4, prices, 0.22, 1.0, p) > euler_labor_residual(0.6, 0.4, prices, 0.22, 1.0, p));
    CHECK(euler_labor_residual(0.8, 0.01, prices, 0.22, 1.0, p) > 0.0);
    CHECK(euler_labor_residual(0.8, 0.999, prices, 0.22, 1.0, p) < 0.0);
    // Perfect smoothing.
    const double r_smooth = 1.0 / p.beta - 1.0;
    CHECK(euler_savings_residual(0.7, 0.7, r_smooth, 0.0, p) == Approx(0.0).scale(1.0).epsilon(1e-14));
    // A return above the smoothing rate leaves a negative residual at a flat path;
    // the root in c_next lies above c_now.
    const double r_high = r_smooth + 0.05;
    CHECK(euler_savings_residual(0.7, 0.7, r_high, 0.0, p) < 0.0);
    const double c_next = numerics::bisect([&](double x) { return euler_savings_residual(0.7, x, r_high, 0.0, p); },
                                           0.7, 10.0);
    CHECK(c_next > 0.7);
    CHECK(c_next == Approx(0.7 * std::pow(p.beta * (1.0 + r_high), 1.0 / p.sigma)).epsilon(1e-10));
}

TEST_CASE("required rate") {
    const ModelParams p;
    const double K = 248.0;
    const double L = 34.0;
    for (auto i : {Instrument::labor_tax, Instrument::profit_tax, Instrument::capital_income_tax}) {
        CHECK(required_rate(i, 0.0, K, L, p) == 0.0);
    }
    const double revenue = 0.22 * wage(K, L, p) * L;
    CHECK(required_rate(Instrument::labor_tax, revenue, K, L, p) == Approx(0.22).epsilon(1e-14));

    // Profit rate against a bisection on the revenue identity, the base recomputed at each trial rate.
    const double payout = 0.05;
    const double needed = p.retired_count() * payout;
    auto gap = [&](double tc) {
        const double pre = output(K, L, p) - wage(K, L, p) * L - p.delta * K;
        return tc * pre - needed;
    };
    const double oracle = numerics::bisect(gap, 0.0, 0.999999, 1e-15);
    CHECK(required_rate(Instrument::profit_tax, needed, K, L, p) == Approx(oracle).epsilon(1e-10));
    CHECK_THROWS_AS(required_rate(Instrument::labor_tax, 1e6, K, L, p), InfeasibleScenario);
    CHECK_THROWS(required_rate(Instrument::labor_tax, -1.0, K, L, p));
}
