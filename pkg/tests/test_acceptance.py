"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the per-criterion lines are
repeated in the terminal summary under "acceptance criteria".
"""

import itertools
import json
import math
import time

import numpy as np
import pytest
from scipy import integrate

from copair.backtest import form_cycles, run_backtest
from copair.cli import main
from copair.config import RunConfig
from copair.copula import ROTATIONS, CopulaFamily, copula_cdf, copula_pdf, fit_cml, h_function
from copair.dependence import kendall_tau
from copair.market_data import build_schedule
from copair.synthetic import STUDY_HOURS, UNIVERSE, synthetic_panel, write_panel
from copair.unit_root import adf_test, kss_test

from fixtures import hand_round_trip, round_trip_setup
from sampling import (
    draw_params,
    sample_clayton,
    sample_frank,
    sample_gaussian,
    sample_gumbel,
    to_pseudo,
)

pytestmark = pytest.mark.acceptance

FAMILIES = [f.value for f in CopulaFamily]


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_copula_axioms(criterion):
    grid = np.linspace(0.0, 1.0, 50)
    uu, vv = np.meshgrid(grid, grid, indexing="ij")
    lower, upper = np.maximum(uu + vv - 1.0, 0.0), np.minimum(uu, vv)

    def run():
        worst = 0.0
        failures = []
        for fam, rot in itertools.product(FAMILIES, ROTATIONS):
            rng = np.random.default_rng([FAMILIES.index(fam), rot, 1])
            for _ in range(20):
                p = draw_params(fam, rng, rot)
                c = copula_cdf(p, uu, vv)
                vol = c[1:, 1:] - c[:-1, 1:] - c[1:, :-1] + c[:-1, :-1]
                err = max(
                    np.abs(c[0, :]).max(), np.abs(c[:, 0]).max(),
                    np.abs(c[-1, :] - grid).max(), np.abs(c[:, -1] - grid).max(),
                    max(0.0, (lower - c).max()), max(0.0, (c - upper).max()),
                    max(0.0, -vol.min()),
                )
                if not np.isfinite(c).all():
                    err = np.inf
                worst = max(worst, err)
                if err > 1e-9:
                    failures.append((fam, rot, p.vector))
        return worst, failures

    (worst, failures), secs = _timed(run)
    ok = not failures and secs < 120
    criterion(1, "copula axioms and Frechet bounds, 50x50 grid, 20 draws x 12 families x 4 rotations",
              ok, f"max violation {worst:.2e}, {secs:.0f} s")
    assert ok, failures[:5]


def test_h_function_finite_differences(criterion):
    g = (np.arange(20) + 0.5) / 20
    uu, vv = np.meshgrid(g, g, indexing="ij")
    e = 1e-6

    def run():
        worst = 0.0
        for fam, rot in itertools.product(FAMILIES, ROTATIONS):
            rng = np.random.default_rng([FAMILIES.index(fam), rot, 2])
            for _ in range(3):
                p = draw_params(fam, rng, rot)
                dcdu = (copula_cdf(p, uu + e, vv) - copula_cdf(p, uu - e, vv)) / (2 * e)
                dcdv = (copula_cdf(p, uu, vv + e) - copula_cdf(p, uu, vv - e)) / (2 * e)
                e21 = np.abs(h_function(p, "2given1", uu, vv) - dcdu).max()
                e12 = np.abs(h_function(p, "1given2", uu, vv) - dcdv).max()
                worst = max(worst, e21 if np.isfinite(e21) else np.inf, e12 if np.isfinite(e12) else np.inf)
        return worst

    worst, secs = _timed(run)
    ok = worst < 1e-5 and secs < 120
    criterion(2, "h-function equals central differences of the CDF, 20x20 grid, all families and rotations",
              ok, f"max error {worst:.2e}, {secs:.0f} s")
    assert ok


def test_density_normalization(criterion):
    def run():
        out = []
        for fam in FAMILIES:
            rng = np.random.default_rng([FAMILIES.index(fam), 3])
            for _ in range(3):
                p = draw_params(fam, rng, 0)
                res = integrate.cubature(
                    lambda x: copula_pdf(p, x[:, 0], x[:, 1]), [0.0, 0.0], [1.0, 1.0],
                    rtol=1e-6, atol=1e-7, max_subdivisions=20_000,
                )
                out.append((fam, p.vector, res.status, float(res.estimate)))
        return out

    vals, secs = _timed(run)
    bad = [x for x in vals if x[2] != "converged" or not abs(x[3] - 1.0) <= 1e-3]
    worst = max(abs(x[3] - 1.0) if np.isfinite(x[3]) else np.inf for x in vals)
    ok = not bad and secs < 300
    criterion(3, "density integrates to one by adaptive cubature, 3 draws per family",
              ok, f"max |integral - 1| {worst:.2e}, {secs:.0f} s")
    assert ok, bad


def test_tau_identities(criterion):
    n = 10_000
    cases = {
        "Clayton(2)": (sample_clayton(2.0, n, 101), 2.0 / (2.0 + 2.0)),
        "Gumbel(2)": (sample_gumbel(2.0, n, 102), 1.0 - 1.0 / 2.0),
        "Gaussian(0.5)": (sample_gaussian(0.5, n, 103), 2.0 / math.pi * math.asin(0.5)),
    }
    errs = {k: abs(kendall_tau(x[:, 0], x[:, 1]) - tau) for k, (x, tau) in cases.items()}
    ok = max(errs.values()) <= 0.02
    criterion(4, "sample Kendall tau matches the closed-form tau identities, n=10,000",
              ok, ", ".join(f"{k} {v:.4f}" for k, v in errs.items()))
    assert ok


def test_mle_recovery(criterion):
    n, reps = 2000, 40
    specs = {
        "Clayton": (lambda s: sample_clayton(2.0, n, s), (1.7, 2.3), "theta"),
        "Gumbel": (lambda s: sample_gumbel(2.0, n, s), (1.7, 2.3), "theta"),
        "Frank": (lambda s: sample_frank(5.0, n, s), (4.25, 5.75), "theta"),
        "Gaussian": (lambda s: sample_gaussian(0.8, n, s), (0.77, 0.83), "rho"),
    }

    def run():
        rates = {}
        for k, (fam, (sampler, (lo, hi), attr)) in enumerate(specs.items()):
            hits = 0
            for r in range(reps):
                fit = fit_cml(fam, 0, to_pseudo(sampler(10_000 * (k + 1) + r)))
                hits += lo <= getattr(fit.params, attr) <= hi
            rates[fam] = hits / reps
        return rates

    rates, secs = _timed(run)
    ok = min(rates.values()) >= 0.95 and secs < 600
    criterion(5, "canonical ML recovers Clayton, Gumbel, Frank and Gaussian parameters in >= 95% of 40 fits",
              ok, ", ".join(f"{k} {v:.0%}" for k, v in rates.items()) + f", {secs:.0f} s")
    assert ok


def _estar(rng, n, gamma=-0.5, theta=1.0):
    y = np.zeros(n)
    e = rng.standard_normal(n)
    for t in range(1, n):
        y[t] = y[t - 1] + gamma * (1.0 - math.exp(-theta * y[t - 1] ** 2)) * y[t - 1] + e[t]
    return y


def test_unit_root_size_power(criterion):
    def run():
        rng = np.random.default_rng(1)
        adf_rej = kss_rej = 0
        paths = 2000
        for _ in range(paths):
            y = np.cumsum(rng.standard_normal(1000))
            adf_rej += adf_test(y).p_value < 0.10
            kss_rej += kss_test(y).p_value < 0.10
        prng = np.random.default_rng(2)
        power = np.mean([kss_test(_estar(prng, 2000)).p_value < 0.10 for _ in range(500)])
        return adf_rej / paths, kss_rej / paths, power

    (adf_size, kss_size, power), secs = _timed(run)
    ok = abs(adf_size - 0.10) <= 0.02 and abs(kss_size - 0.10) <= 0.02 and power > 0.90 and secs < 600
    criterion(6, "unit-root size at 10% under the null and KSS power against ESTAR",
              ok, f"ADF size {adf_size:.4f}, KSS size {kss_size:.4f}, KSS power {power:.3f}, {secs:.0f} s")
    assert ok


def _brute_tau(x, y):
    num = 0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            a = (x[i] > x[j]) - (x[i] < x[j])
            b = (y[i] > y[j]) - (y[i] < y[j])
            num += a * b
    n = len(x)
    return num / (n * (n - 1) / 2)


def test_kendall_brute_force(criterion):
    rng = np.random.default_rng(7)
    mismatches = 0
    for k in range(500):
        n = int(rng.integers(2, 201))
        if k % 3 == 0:
            x, y = rng.integers(0, 6, n).astype(float), rng.integers(0, 6, n).astype(float)
        else:
            x = rng.standard_normal(n)
            y = rng.normal(0.4 * x, 1.0)
        mismatches += kendall_tau(x, y) != _brute_tau(x.tolist(), y.tolist())
    ok = mismatches == 0
    criterion(7, "Kendall tau equals exhaustive pair enumeration on 500 instances, n <= 200",
              ok, f"{mismatches} mismatches")
    assert ok


def test_ledger_fixture(criterion):
    panel, schedule, config, formations = round_trip_setup()
    ledger, report = run_backtest(panel, schedule, config, formations)
    hand = hand_round_trip(config.capital, config.taker_fee)
    pnl_err = abs(report.net_pnl - hand["net"]) / config.capital
    fee_err = abs(report.total_fees - hand["fees"]) / config.capital
    exact_fee = all(e.fee == e.qty * e.price * 0.0004 for e in ledger.executions)
    ok = len(ledger.executions) == 4 and pnl_err <= 1e-6 and fee_err <= 1e-6 and exact_fee
    criterion(8, "hand-computed single round trip matches engine P&L and fees",
              ok, f"{len(ledger.executions)} executions, P&L error {pnl_err:.1e}, fee error {fee_err:.1e} of capital")
    assert ok


def test_threshold_monotonicity(criterion):
    panel = synthetic_panel(hours=1680, seed=11)
    base = RunConfig()
    schedule = build_schedule(panel)
    formations = form_cycles(panel, schedule, base)
    counts = []
    for a1 in (0.05, 0.10, 0.15, 0.20):
        _, rep = run_backtest(panel, schedule, base.replace(alpha1=a1), formations=formations)
        counts.append(rep.n_transactions)
    ok = counts == sorted(counts) and counts[-1] > counts[0]
    criterion(9, "n_transactions non-decreasing over alpha1 = 0.05, 0.10, 0.15, 0.20",
              ok, f"{len(schedule)} cycles, counts {counts}")
    assert ok


def test_determinism(criterion, tmp_path):
    data = tmp_path / "data"
    write_panel(synthetic_panel(symbols=UNIVERSE[:6], hours=1008, seed=5), data)
    outs = []
    for name in ("a", "b"):
        assert main(["backtest", "--data-dir", str(data), "--output-dir", str(tmp_path / name), "--alpha1", "0.1"]) == 0
        doc = json.loads((tmp_path / name / "report.json").read_text())
        doc.pop("generated_at")
        doc["config"].pop("output_dir")
        files = {f: (tmp_path / name / f).read_bytes() for f in ("equity.csv", "trades.csv", "occurrence.csv")}
        outs.append((json.dumps(doc, sort_keys=True), files))
    ok = outs[0] == outs[1]
    criterion(10, "two identical runs give byte-identical numeric outputs", ok,
              "report.json (timestamp and output path aside), equity.csv, trades.csv, occurrence.csv")
    assert ok


def test_full_range_reproduction(criterion, tmp_path, capsys):
    data = tmp_path / "data"
    write_panel(synthetic_panel(hours=STUDY_HOURS, seed=2021), data)
    code = main(["backtest", "--data-dir", str(data), "--output-dir", str(tmp_path / "out"), "--print-pairs"])
    out = capsys.readouterr().out
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    header = next(i for i, line in enumerate(out.splitlines()) if line.split()[:2] == ["Week", "Pair"])
    rows = out.splitlines()[header + 1 : header + 1 + len(doc["cycles"])]
    ok = code == 0 and len(doc["cycles"]) == 94 and len(rows) == 94 and rows[-1].split()[0] == "94"
    with capsys.disabled():
        print()
        print(out)
    criterion(11, "20 symbols over the full study range give 94 cycles and a per-week pair table",
              ok, f"{len(doc['cycles'])} cycles, {len(rows)} table rows")
    assert ok
