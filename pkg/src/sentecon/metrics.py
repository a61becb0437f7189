"""Indicator construction and regularity statistics over monthly records.

Annual indicators aggregate the monthly series (nominal/real GDP, price and
wage inflation, unemployment); the regularity report tests the Phillips
relation (unemployment vs wage inflation) and Okun's co-movement (change in
unemployment vs real output growth) with Pearson correlations and
closed-form least-squares slopes. The Student-t tail probability behind the
p-values is computed locally via the regularized incomplete beta function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass
class AnnualRow:
    year: int
    nominal_gdp: float
    real_gdp: float
    inflation: float | None          # undefined for the base year
    wage_inflation: float | None
    unemployment_mean: float
    nominal_gdp_growth: float | None


@dataclass
class IndicatorSeries:
    annual: list[AnnualRow]
    base_price: float


def annual_indicators(
    months: Sequence[dict], base_price: float | None = None
) -> IndicatorSeries:
    """Aggregate monthly rows into annual indicators.

    ``months`` holds mappings with at least ``price``, ``production``,
    ``mean_wage`` and ``unemployment``. Nominal GDP sums production at the
    month's price; real GDP reprices it at the base-year price, which
    defaults to the first year's mean price. Inflation compares annual mean
    prices (mean wages for wage inflation) and is undefined for year 0.
    """
    if len(months) < 12:
        raise ValueError(f"need at least 12 months, got {len(months)}")
    n_years = len(months) // 12
    if base_price is None:
        base_price = sum(m["price"] for m in months[:12]) / 12.0

    rows: list[AnnualRow] = []
    prev_price = prev_wage = prev_nominal = None
    for year in range(n_years):
        chunk = months[year * 12:(year + 1) * 12]
        nominal = sum(m["production"] * m["price"] for m in chunk)
        real = sum(m["production"] * base_price for m in chunk)
        mean_price = sum(m["price"] for m in chunk) / 12.0
        mean_wage = sum(m["mean_wage"] for m in chunk) / 12.0
        mean_u = sum(m["unemployment"] for m in chunk) / 12.0
        rows.append(AnnualRow(
            year=year,
            nominal_gdp=nominal,
            real_gdp=real,
            inflation=(None if prev_price is None
                       else (mean_price - prev_price) / prev_price),
            wage_inflation=(None if prev_wage is None
                            else (mean_wage - prev_wage) / prev_wage),
            unemployment_mean=mean_u,
            nominal_gdp_growth=(None if prev_nominal is None
                                else (nominal - prev_nominal) / prev_nominal),
        ))
        prev_price, prev_wage, prev_nominal = mean_price, mean_wage, nominal
    return IndicatorSeries(annual=rows, base_price=base_price)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            break
    return h


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log(1.0 - x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, df: int) -> float:
    """Two-sided tail probability P(|T| >= t) for Student's t."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Pearson correlation and two-sided p-value (t-test, n-2 df)."""
    n = len(x)
    if n != len(y):
        raise ValueError("series lengths differ")
    if n < 3:
        raise ValueError("need at least 3 points")
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation undefined for zero-variance series")
    rho = sxy / math.sqrt(sxx * syy)
    rho = min(1.0, max(-1.0, rho))
    if 1.0 - rho * rho <= 0.0:
        return rho, 0.0
    t = abs(rho) * math.sqrt((n - 2) / (1.0 - rho * rho))
    return rho, student_t_sf2(t, n - 2)


def ols_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of y on x."""
    n = len(x)
    if n != len(y) or n < 2:
        raise ValueError("need two equal-length series of >= 2 points")
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    if sxx == 0.0:
        raise ValueError("slope undefined for zero-variance regressor")
    return sum((a - mx) * (b - my) for a, b in zip(x, y)) / sxx


def regularity_report(series: IndicatorSeries) -> dict:
    """Phillips and Okun statistics from annual indicators.

    Both relations are evaluated at annual frequency. Phillips pairs annual
    mean unemployment with wage inflation; Okun pairs the year-over-year
    change in unemployment with real GDP growth.
    """
    rows = series.annual
    if len(rows) < 5:
        raise ValueError("need at least 5 annual points")

    u = [r.unemployment_mean for r in rows[1:]]
    wage_inf = [r.wage_inflation for r in rows[1:]]
    phillips_rho, phillips_p = pearson(u, wage_inf)
    phillips_slope = ols_slope(u, wage_inf)

    du = [rows[i].unemployment_mean - rows[i - 1].unemployment_mean
          for i in range(1, len(rows))]
    real_growth = [(rows[i].real_gdp - rows[i - 1].real_gdp) / rows[i - 1].real_gdp
                   for i in range(1, len(rows))]
    okun_rho, okun_p = pearson(du, real_growth)
    okun_slope = ols_slope(du, real_growth)

    return {
        "frequency": "annual",
        "n_years": len(rows),
        "phillips": {"rho": phillips_rho, "p_value": phillips_p,
                     "slope": phillips_slope, "n": len(u)},
        "okun": {"rho": okun_rho, "p_value": okun_p,
                 "slope": okun_slope, "n": len(du)},
    }


def full_report(months: Sequence[dict],
                base_price: float | None = None) -> dict:
    """Everything recomputable from the monthly table: annual indicators,
    regularity statistics, and the aggregate production-side profit margin
    (revenue minus wage bill over revenue)."""
    series = annual_indicators(months, base_price)
    report = {
        "base_price": series.base_price,
        "annual": [vars(r) for r in series.annual],
    }
    try:
        report["regularity"] = regularity_report(series)
    except ValueError as exc:
        report["regularity"] = {"error": str(exc)}

    margins = []
    n_years = len(months) // 12
    for year in range(n_years):
        chunk = months[year * 12:(year + 1) * 12]
        revenue = sum(m["realized_consumption"] * m["price"] for m in chunk)
        wage_bill = sum(m["total_post_tax"] for m in chunk)
        margins.append(None if revenue <= 0
                       else (revenue - wage_bill) / revenue)
    report["profit_margin"] = margins
    return report
