"""Calibration sweep (scratch, not part of the package)."""
import sys
import sentecon
from sentecon.config import from_dict
from sentecon.metrics import annual_indicators, regularity_report


def probe(overrides):
    cfg = from_dict(overrides)
    res = sentecon.run(cfg)
    months = [dict(zip(sentecon.engine.MONTH_COLUMNS, r.to_row()))
              for r in res.month_records]
    series = annual_indicators(months)
    infl = [r.inflation for r in series.annual if r.inflation is not None]
    u = [r.unemployment_mean for r in series.annual]
    out = {"u": sum(u) / len(u), "infl": sum(infl) / len(infl)}
    try:
        rep = regularity_report(series)
        out["phil_rho"] = rep["phillips"]["rho"]
        out["phil_p"] = rep["phillips"]["p_value"]
        out["okun_rho"] = rep["okun"]["rho"]
    except ValueError:
        pass
    return out


GRID = [
    ("api1.0 b.2/.6", {"alpha_pi": 1.0}, {"beta_w": 0.2, "beta_p": 0.6}),
    ("api1.0 b.15/.65", {"alpha_pi": 1.0}, {"beta_w": 0.15, "beta_p": 0.65}),
]

for label, tay, adj in GRID:
    base = {"production": {"productivity": 9.0, "lambda_k": 1e-9},
            "adjustment": adj, "taylor": tay,
            "sentiment": {"work_gain": 0.5, "consume_gain": 1.0,
                          "decay_lambda": 0.85}}
    for seed in (1, 2, 3):
        long = probe({**base, "n_months": 240, "master_seed": seed})
        print(f'{label} seed={seed}: u={long["u"]:.3f} infl={long["infl"]:+.4f} '
              f'phil={long.get("phil_rho", 0):+.3f} (p={long.get("phil_p", 1):.4f}) '
              f'okun={long.get("okun_rho", 0):+.3f}')
    diffs = []
    for seed in (1, 2, 3, 4, 5, 6, 7, 8):
        a = probe({**base, "n_months": 120, "n_agents": 100, "master_seed": seed})
        b = probe({**base, "n_months": 120, "n_agents": 300, "master_seed": seed})
        diffs.append(abs(a["infl"] - b["infl"]))
    print(f'>>> {label}: crit10 diffs = {[round(d, 4) for d in diffs]}')
    sys.stdout.flush()
