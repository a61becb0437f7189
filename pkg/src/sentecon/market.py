"""Economy-side mechanics: production, capital, demand, price/wage adjustment,
progressive taxation with lump-sum redistribution, and the interest-rate rule.

Everything here is a pure function over value inputs except
:func:`adjust_wages_and_price`, which mutates a wage list and a
:class:`MarketState` owned by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HOURS_PER_MONTH = 168

# 2018 U.S. federal single-filer marginal brackets (annual income lower
# bound, marginal rate). Used as the default progressive schedule; fully
# configurable.
DEFAULT_TAX_BRACKETS: list[tuple[float, float]] = [
    (0.0, 0.10),
    (9_525.0, 0.12),
    (38_700.0, 0.22),
    (82_500.0, 0.24),
    (157_500.0, 0.32),
    (200_000.0, 0.35),
    (500_000.0, 0.37),
]


@dataclass
class MarketState:
    """Economy-wide state carried month to month.

    ``base_price`` is fixed at construction (the initial numeraire) and is
    never mutated afterwards; reporting code derives its own base-year price
    from the recorded series.
    """

    month_index: int = 0
    price: float = 1.0
    base_price: float = 1.0
    inventory: float = 0.0
    capital: float = 1000.0
    interest_rate: float = 0.03  # fraction per year
    unemployment: float = 0.04
    last_annual_inflation: float = 0.02

    def validate(self) -> None:
        if not (self.price > 0 and math.isfinite(self.price)):
            raise ValueError(f"price must be positive and finite, got {self.price}")
        if self.inventory < 0 or self.capital < 0 or self.interest_rate < 0:
            raise ValueError("inventory, capital and interest rate must be >= 0")
        if not 0.0 <= self.unemployment <= 1.0:
            raise ValueError(f"unemployment out of [0,1]: {self.unemployment}")


@dataclass
class ProductionParams:
    """Cobb-Douglas production with exponential capital damping.

    Output is ``A * K**beta1 * L**beta2 * exp(-lambda_k * K)``; the damping
    term keeps runaway capital accumulation from raising output without
    bound. ``hours_per_month`` is a fixed calendar constant.
    """

    productivity: float = 5.6
    beta1: float = 0.04
    beta2: float = 1.0
    lambda_k: float = 1e-9
    depreciation: float = 0.1
    inefficiency: float = 0.05
    hours_per_month: int = HOURS_PER_MONTH

    def validate(self) -> None:
        for name in ("productivity", "beta1", "beta2", "lambda_k",
                     "depreciation", "inefficiency"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"production.{name} must be finite, got {v}")
        if self.productivity <= 0:
            raise ValueError("production.productivity must be > 0")
        if not (0 < self.beta1 <= 1 and 0 < self.beta2 <= 1):
            raise ValueError("production exponents must lie in (0, 1]")
        if self.lambda_k < 0:
            raise ValueError("production.lambda_k must be >= 0")
        if not 0 <= self.depreciation <= 1:
            raise ValueError("production.depreciation must lie in [0, 1]")
        if self.inefficiency < 0:
            raise ValueError("production.inefficiency must be >= 0")
        if self.hours_per_month != HOURS_PER_MONTH:
            raise ValueError(f"hours_per_month is fixed at {HOURS_PER_MONTH}")


@dataclass
class AdjustmentParams:
    """Gain and noise bounds for imbalance-driven wage/price updates.

    The price bound deliberately exceeds the wage bound: when demand and
    supply drift apart, the price then corrects faster than wages follow,
    which pulls the real wage back toward productivity from either side.
    With equal bounds the real wage is a random walk and an excess-supply
    episode becomes a permanent deflation trap (inventory piles up and pins
    the imbalance at -1).
    """

    kappa: float = 0.2
    beta_w: float = 0.2
    beta_p: float = 0.6

    def validate(self) -> None:
        for name in ("kappa", "beta_w", "beta_p"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"adjustment.{name} must be finite and >= 0")
        # kappa * bound < 1 keeps wages and the price strictly positive.
        if self.kappa * self.beta_w >= 1 or self.kappa * self.beta_p >= 1:
            raise ValueError(
                "kappa * noise bound must be < 1 (would allow non-positive "
                "wages or price)"
            )


@dataclass
class TaxSchedule:
    """Marginal brackets over annualized income plus equal redistribution.

    ``brackets`` is an ordered list of (annual lower bound, marginal rate)
    pairs; the first lower bound must be 0 and bounds must strictly increase.
    """

    brackets: list[tuple[float, float]] = field(
        default_factory=lambda: list(DEFAULT_TAX_BRACKETS))
    redistribution_mode: str = "equal-lump-sum"

    def validate(self) -> None:
        if not self.brackets:
            raise ValueError("tax schedule needs at least one bracket")
        if self.brackets[0][0] != 0:
            raise ValueError("first bracket lower bound must be 0")
        prev = -1.0
        for lo, rate in self.brackets:
            if lo <= prev:
                raise ValueError("bracket lower bounds must strictly increase")
            if not 0 <= rate < 1:
                raise ValueError(f"bracket rate out of [0,1): {rate}")
            prev = lo
        if self.redistribution_mode != "equal-lump-sum":
            raise ValueError(
                f"unknown redistribution mode: {self.redistribution_mode!r}")

    def annual_tax(self, annual_income: float) -> float:
        """Marginal-bracket tax on a (non-negative) annual income."""
        tax = 0.0
        for i, (lo, rate) in enumerate(self.brackets):
            hi = self.brackets[i + 1][0] if i + 1 < len(self.brackets) else math.inf
            if annual_income <= lo:
                break
            tax += (min(annual_income, hi) - lo) * rate
        return tax


@dataclass
class TaylorParams:
    """Interest-rate rule reacting to inflation and unemployment gaps."""

    natural_rate: float = 0.01
    target_inflation: float = 0.02
    natural_unemployment: float = 0.04
    alpha_pi: float = 0.5
    alpha_u: float = 0.5

    def validate(self) -> None:
        for name in ("natural_rate", "target_inflation", "natural_unemployment",
                     "alpha_pi", "alpha_u"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"taylor.{name} must be finite")
        if not 0 <= self.natural_unemployment <= 1:
            raise ValueError("taylor.natural_unemployment must lie in [0, 1]")


def produce(capital: float, labor_hours: float, params: ProductionParams) -> float:
    """Goods produced this month from capital and total labor hours."""
    if not (math.isfinite(capital) and math.isfinite(labor_hours)):
        raise ValueError("capital and labor hours must be finite")
    if capital < 0 or labor_hours < 0:
        raise ValueError("capital and labor hours must be >= 0")
    if capital == 0.0 or labor_hours == 0.0:
        return 0.0
    return (params.productivity
            * capital ** params.beta1
            * labor_hours ** params.beta2
            * math.exp(-params.lambda_k * capital))


def update_capital(capital_prev: float, investment: float,
                   params: ProductionParams) -> float:
    """Next-period capital from depreciation, investment and inefficiency.

    The inefficiency term is proportional to the *new* stock, which makes
    the law of motion implicit; it has the closed-form solution
    ``((1 - delta) * K_prev + I) / (1 + omega)``.
    """
    if not (math.isfinite(capital_prev) and math.isfinite(investment)):
        raise ValueError("capital and investment must be finite")
    if capital_prev < 0 or investment < 0:
        raise ValueError("capital and investment must be >= 0")
    return ((1.0 - params.depreciation) * capital_prev + investment) \
        / (1.0 + params.inefficiency)


def aggregate_demand(agents: Sequence[tuple[float, float]], price: float) -> float:
    """Total goods demanded by (consumption propensity, savings) pairs."""
    if not (math.isfinite(price) and price > 0):
        raise ValueError(f"price must be positive and finite, got {price}")
    return sum(q * s for q, s in agents) / price


def market_imbalance(demand: float, inventory: float) -> float:
    """Normalized excess demand in [-1, 1]; 0 when the market is empty."""
    if demand < 0 or inventory < 0:
        raise ValueError("demand and inventory must be >= 0")
    if demand == 0.0 and inventory == 0.0:
        return 0.0
    return (demand - inventory) / max(demand, inventory)


def draw_adjustment(rng: np.random.Generator, imbalance: float,
                    bound: float) -> float:
    """One multiplicative shock: sign of the imbalance, magnitude uniform on
    [0, bound * |imbalance|]. Always consumes exactly one draw."""
    magnitude = rng.uniform(0.0, bound * abs(imbalance))
    return math.copysign(magnitude, imbalance) if imbalance != 0.0 else 0.0


def adjust_wages_and_price(
    agent_rngs: Sequence[np.random.Generator],
    wages: list[float],
    market: MarketState,
    imbalance: float,
    params: AdjustmentParams,
    price_rng: np.random.Generator,
) -> None:
    """Apply imbalance-driven multiplicative updates in place.

    Each wage gets an independent shock from its agent's own random stream
    (so the population can grow without reshuffling existing agents' draws);
    the price shock comes from a separate market-level stream.
    """
    kappa = params.kappa
    for i, rng in enumerate(agent_rngs):
        phi = draw_adjustment(rng, imbalance, params.beta_w)
        wages[i] *= 1.0 + phi * kappa
    phi_p = draw_adjustment(price_rng, imbalance, params.beta_p)
    market.price *= 1.0 + phi_p * kappa


def apply_taxes(
    incomes: Sequence[float], schedule: TaxSchedule
) -> tuple[list[float], list[float], float]:
    """Tax monthly incomes and redistribute the take as an equal lump sum.

    Each monthly income is annualized (x12), run through the marginal
    brackets, and the annual tax divided back by 12. Returns
    (post-tax incomes, taxes, per-capita lump sum); total post-tax income
    equals total pre-tax income up to rounding.
    """
    if len(incomes) == 0:
        raise ValueError("cannot tax an empty population")
    taxes = [schedule.annual_tax(z * 12.0) / 12.0 for z in incomes]
    lump_sum = sum(taxes) / len(incomes)
    post_tax = [z - t + lump_sum for z, t in zip(incomes, taxes)]
    return post_tax, taxes, lump_sum


def taylor_rate(annual_inflation: float, unemployment: float,
                params: TaylorParams) -> float:
    """Annual interest rate under the gap rule, floored at zero."""
    rate = (params.natural_rate
            + params.target_inflation
            + params.alpha_pi * (annual_inflation - params.target_inflation)
            + params.alpha_u * (params.natural_unemployment - unemployment))
    return max(0.0, rate)
