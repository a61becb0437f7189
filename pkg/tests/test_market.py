import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentecon.market import (AdjustmentParams, MarketState, ProductionParams,
                             TaxSchedule, TaylorParams, adjust_wages_and_price,
                             aggregate_demand, apply_taxes, draw_adjustment,
                             market_imbalance, produce, taylor_rate,
                             update_capital)


def params(**kw):
    return ProductionParams(**{"productivity": 1.0, "beta1": 0.5,
                               "beta2": 0.5, "lambda_k": 0.0, **kw})


class TestProduce:
    def test_square_root_form(self):
        assert produce(4.0, 9.0, params()) == pytest.approx(6.0)

    def test_zero_capital(self):
        assert produce(0.0, 100.0, params(productivity=3.0)) == 0.0
        assert produce(100.0, 0.0, params()) == 0.0

    def test_capital_damping(self):
        # independent evaluation: 2 * 1 * 1 * exp(-0.1)
        expected = 2.0 * math.exp(-0.1)
        got = produce(1.0, 1.0, params(productivity=2.0, lambda_k=0.1))
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(1.809675, abs=1e-6)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            produce(math.nan, 1.0, params())
        with pytest.raises(ValueError):
            produce(1.0, math.inf, params())
        with pytest.raises(ValueError):
            produce(-1.0, 1.0, params())

    @given(st.floats(0, 1e6), st.floats(0, 1e6), st.floats(0, 1e6))
    @settings(max_examples=200)
    def test_monotone_in_labor_and_nonnegative(self, k, l1, l2):
        p = params(productivity=2.0, beta1=0.3, beta2=0.7, lambda_k=1e-6)
        lo, hi = sorted([l1, l2])
        assert produce(k, lo, p) <= produce(k, hi, p) + 1e-9
        assert produce(k, lo, p) >= 0.0


class TestUpdateCapital:
    def test_explicit_when_no_inefficiency(self):
        assert update_capital(100.0, 10.0, params(depreciation=0.1)) \
            == pytest.approx(100.0)

    def test_implicit_solution(self):
        got = update_capital(100.0, 10.0,
                             params(depreciation=0.1, inefficiency=0.05))
        assert got == pytest.approx(100.0 / 1.05, rel=1e-12)

    def test_full_depreciation(self):
        assert update_capital(50.0, 0.0, params(depreciation=1.0)) == 0.0

    @given(st.floats(0, 1e6), st.floats(0, 1e6), st.floats(0, 1),
           st.floats(0, 1))
    @settings(max_examples=500)
    def test_residual_of_implicit_equation(self, k_prev, inv, delta, omega):
        p = params(depreciation=delta, inefficiency=omega)
        k = update_capital(k_prev, inv, p)
        residual = abs(k - ((1 - delta) * k_prev + inv - omega * k))
        assert residual < 1e-12 * max(1.0, k)


class TestAggregateDemand:
    def test_single_agent(self):
        assert aggregate_demand([(0.5, 100.0)], 10.0) == pytest.approx(5.0)

    def test_empty(self):
        assert aggregate_demand([], 1.0) == 0.0

    def test_three_agents(self):
        pairs = [(0.5, 100.0), (0.2, 50.0), (1.0, 10.0)]
        assert aggregate_demand(pairs, 2.0) == pytest.approx(35.0)

    def test_rejects_bad_price(self):
        with pytest.raises(ValueError):
            aggregate_demand([(0.5, 1.0)], 0.0)
        with pytest.raises(ValueError):
            aggregate_demand([(0.5, 1.0)], -1.0)


class TestMarketImbalance:
    def test_balanced(self):
        assert market_imbalance(100.0, 100.0) == 0.0

    def test_excess_demand(self):
        assert market_imbalance(150.0, 100.0) == pytest.approx(1.0 / 3.0)

    def test_empty_market(self):
        assert market_imbalance(0.0, 0.0) == 0.0

    @given(st.floats(0, 1e9), st.floats(0, 1e9))
    @settings(max_examples=300)
    def test_bounded_and_antisymmetric(self, d, g):
        phi = market_imbalance(d, g)
        assert -1.0 <= phi <= 1.0
        assert market_imbalance(g, d) == pytest.approx(-phi, abs=1e-15)


class TestDrawAdjustment:
    def test_zero_imbalance(self):
        rng = np.random.default_rng(0)
        assert draw_adjustment(rng, 0.0, 0.4) == 0.0

    def test_positive_interval_and_mean(self):
        rng = np.random.default_rng(42)
        draws = [draw_adjustment(rng, 0.5, 0.4) for _ in range(10_000)]
        assert all(0.0 <= d <= 0.2 for d in draws)
        # mean of U(0, 0.2) is 0.1, sd of the mean = 0.2/sqrt(12)/100
        assert abs(sum(draws) / len(draws) - 0.1) < 3 * 0.2 / math.sqrt(12) / 100

    def test_negative_mirror(self):
        rng = np.random.default_rng(42)
        draws = [draw_adjustment(rng, -0.5, 0.4) for _ in range(10_000)]
        assert all(-0.2 <= d <= 0.0 for d in draws)

    def test_consumes_exactly_one_draw(self):
        rng_a = np.random.default_rng(7)
        rng_b = np.random.default_rng(7)
        draw_adjustment(rng_a, 0.3, 0.4)
        rng_b.uniform(0.0, 1.0)
        assert rng_a.random() == rng_b.random()


class TestAdjustWagesAndPrice:
    def _run(self, imbalance, n=1000, kappa=0.2, beta_w=0.5, beta_p=0.5):
        rngs = [np.random.default_rng(i) for i in range(n)]
        wages = [10.0] * n
        market = MarketState(price=2.0)
        ap = AdjustmentParams(kappa=kappa, beta_w=beta_w, beta_p=beta_p)
        adjust_wages_and_price(rngs, wages, market, imbalance, ap,
                               np.random.default_rng(999))
        return wages, market.price

    def test_zero_imbalance_is_identity(self):
        wages, price = self._run(0.0)
        assert wages == [10.0] * len(wages)
        assert price == 2.0

    def test_positive_imbalance_interval(self):
        wages, _ = self._run(1.0)
        assert all(10.0 <= w <= 11.0 for w in wages)

    def test_negative_imbalance_price_interval(self):
        _, price = self._run(-1.0)
        assert 2.0 * 0.9 <= price <= 2.0

    def test_config_guard(self):
        with pytest.raises(ValueError):
            AdjustmentParams(kappa=2.0, beta_w=0.5, beta_p=0.5).validate()

    def test_positivity_over_horizon(self):
        rngs = [np.random.default_rng(3)]
        wages = [1e-3]
        market = MarketState(price=1e-3)
        ap = AdjustmentParams(kappa=0.2, beta_w=0.9, beta_p=0.9)
        ap.validate()
        rng_p = np.random.default_rng(5)
        for sign in [1, -1] * 500:
            adjust_wages_and_price(rngs, wages, market, sign * 1.0, ap, rng_p)
            assert wages[0] > 0 and market.price > 0


def oracle_bracket_tax(annual_income, brackets):
    """Independent marginal calculator: tax each slice between bounds."""
    bounds = [lo for lo, _ in brackets] + [math.inf]
    total = 0.0
    for i, (lo, rate) in enumerate(brackets):
        hi = bounds[i + 1]
        if annual_income <= lo:
            break
        total += rate * (min(annual_income, hi) - lo)
    return total


class TestApplyTaxes:
    def test_flat_single_agent(self):
        schedule = TaxSchedule(brackets=[(0.0, 0.10)])
        post, taxes, lump = apply_taxes([1000.0], schedule)
        assert taxes == [pytest.approx(100.0)]
        assert lump == pytest.approx(100.0)
        assert post == [pytest.approx(1000.0)]

    def test_flat_two_agents(self):
        schedule = TaxSchedule(brackets=[(0.0, 0.10)])
        post, taxes, lump = apply_taxes([1000.0, 0.0], schedule)
        assert taxes == [pytest.approx(100.0), pytest.approx(0.0)]
        assert lump == pytest.approx(50.0)
        assert post[0] == pytest.approx(950.0)
        assert post[1] == pytest.approx(50.0)

    def test_default_brackets_match_oracle(self):
        schedule = TaxSchedule()
        annual = 50_000.0
        assert schedule.annual_tax(annual) == oracle_bracket_tax(
            annual, schedule.brackets)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            apply_taxes([], TaxSchedule())

    @given(st.lists(st.floats(0, 1e5), min_size=1, max_size=40))
    @settings(max_examples=300)
    def test_conservation(self, incomes):
        post, _, _ = apply_taxes(incomes, TaxSchedule())
        assert sum(post) == pytest.approx(sum(incomes), rel=1e-9, abs=1e-9)

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            TaxSchedule(brackets=[(10.0, 0.1)]).validate()
        with pytest.raises(ValueError):
            TaxSchedule(brackets=[(0.0, 0.1), (0.0, 0.2)]).validate()
        with pytest.raises(ValueError):
            TaxSchedule(brackets=[(0.0, 1.0)]).validate()


class TestTaylorRate:
    def test_no_gap_point(self):
        tp = TaylorParams()
        rate = taylor_rate(tp.target_inflation, tp.natural_unemployment, tp)
        assert rate == pytest.approx(tp.natural_rate + tp.target_inflation)

    def test_zero_lower_bound(self):
        tp = TaylorParams(natural_rate=0.01, target_inflation=0.02,
                          natural_unemployment=0.04, alpha_pi=0.5, alpha_u=0.5)
        assert taylor_rate(-0.10, 0.30, tp) == 0.0

    def test_inflation_gap(self):
        tp = TaylorParams(natural_rate=0.01, target_inflation=0.02,
                          natural_unemployment=0.04, alpha_pi=0.5, alpha_u=0.5)
        assert taylor_rate(0.04, 0.04, tp) == pytest.approx(0.04)

    @given(st.floats(-1, 1), st.floats(0, 1))
    @settings(max_examples=200)
    def test_never_negative(self, pi, u):
        assert taylor_rate(pi, u, TaylorParams()) >= 0.0
