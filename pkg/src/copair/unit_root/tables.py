"""Monte Carlo critical-value tables for the unit-root statistics.

Tables hold null quantiles of the lag-0 t-ratio on a grid of sample sizes.
Between grid sizes quantiles are interpolated linearly in ``1/n``; between
tabulated levels p-values are interpolated linearly in ``log(level)``.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from ..exceptions import UnsupportedTest

TESTS = ("ADF_nc", "KSS_raw")
TABLE_VERSION = 1
DEFAULT_SEED = 20210101
DEFAULT_REPLICATIONS = 50_000
N_GRID = (25, 50, 75, 100, 150, 200, 300, 400, 500, 750, 1000, 1500, 2000, 3000, 5000)
LEVELS = (
    0.001, 0.0025, 0.005, 0.01, 0.025, 0.05, 0.075, 0.10, 0.125, 0.15, 0.20, 0.25, 0.30,
    0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.975,
    0.99, 0.995, 0.999,
)
_CHUNK = 2_000
_TABLE_FILE = "critical_values.json"


def null_statistics(n, replications, rng):
    """Lag-0 ADF and KSS t-ratios for ``replications`` Gaussian random walks.

    Each walk starts at zero and contributes ``n`` regression observations.
    Returns two arrays ``(adf, kss)``.
    """
    adf = np.empty(replications)
    kss = np.empty(replications)
    done = 0
    while done < replications:
        m = min(_CHUNK, replications - done)
        e = rng.standard_normal((m, n))
        y = np.cumsum(e, axis=1)
        lag = np.concatenate([np.zeros((m, 1)), y[:, :-1]], axis=1)
        for out, reg in ((adf, lag), (kss, lag**3)):
            sxx = np.einsum("ij,ij->i", reg, reg)
            sxy = np.einsum("ij,ij->i", reg, e)
            coef = sxy / sxx
            rss = np.einsum("ij,ij->i", e, e) - coef * sxy
            se = np.sqrt(rss / (n - 1) / sxx)
            out[done : done + m] = coef / se
        done += m
    return adf, kss


def _grid_point(args):
    n, replications, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    adf, kss = null_statistics(n, replications, rng)
    return np.quantile(adf, LEVELS), np.quantile(kss, LEVELS)


def generate_tables(seed=DEFAULT_SEED, replications=DEFAULT_REPLICATIONS, n_grid=N_GRID, workers=1):
    """Simulate the null distributions and return the table document.

    Every grid size draws from its own spawned seed substream, so the output
    does not depend on ``workers``.
    """
    streams = np.random.SeedSequence(seed).spawn(len(n_grid))
    jobs = [(int(n), int(replications), s) for n, s in zip(n_grid, streams)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_grid_point, jobs))
    else:
        rows = [_grid_point(j) for j in jobs]
    tables = {}
    for k, test in enumerate(TESTS):
        tables[test] = {
            "n_grid": [int(n) for n in n_grid],
            "levels": list(LEVELS),
            "values": [[round(float(x), 6) for x in r[k]] for r in rows],
        }
    return {
        "version": TABLE_VERSION,
        "seed": int(seed),
        "replications": int(replications),
        "statistic": "lag-0 t-ratio, Gaussian random walk started at zero",
        "tables": tables,
    }


def default_table_path():
    return Path(str(resources.files("copair.unit_root") / "data" / _TABLE_FILE))


def write_tables(document, path=None):
    path = Path(path) if path is not None else default_table_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=1) + "\n")
    load_tables.cache_clear()
    return path


@lru_cache(maxsize=4)
def load_tables(path=None):
    path = Path(path) if path is not None else default_table_path()
    doc = json.loads(path.read_text())
    out = {}
    for test, tab in doc["tables"].items():
        out[test] = (
            np.asarray(tab["n_grid"], float),
            np.asarray(tab["levels"], float),
            np.asarray(tab["values"], float),
        )
    return out


def _quantile_row(test, n_obs):
    tables = load_tables()
    if test not in tables:
        raise UnsupportedTest(f"unknown test {test!r}; expected one of {TESTS}")
    n_grid, levels, values = tables[test]
    inv = 1.0 / n_grid  # decreasing
    x = 1.0 / float(min(max(n_obs, n_grid[0]), n_grid[-1]))
    row = np.array([np.interp(x, inv[::-1], values[::-1, j]) for j in range(levels.size)])
    # interpolation can break ties in quantile order only by rounding
    return levels, np.maximum.accumulate(row)


def critical_values(test, n_obs, levels=(0.01, 0.05, 0.10)):
    """Left-tail critical values at the requested significance levels.

    Parameters
    ----------
    test : {"ADF_nc", "KSS_raw"}
    n_obs : int
        Number of regression observations, at least 25.

    Returns
    -------
    dict
        ``{level: critical value}``.
    """
    if test not in TESTS:
        raise UnsupportedTest(f"unknown test {test!r}; expected one of {TESTS}")
    if n_obs < 25:
        raise ValueError("critical values are tabulated for n_obs >= 25")
    tab_levels, row = _quantile_row(test, n_obs)
    log_levels = np.log(tab_levels)
    return {lv: float(np.interp(np.log(lv), log_levels, row)) for lv in levels}


def p_value(test, statistic, n_obs):
    """Approximate left-tail p-value, clamped to the tabulated level range."""
    tab_levels, row = _quantile_row(test, n_obs)
    if not np.isfinite(statistic):
        return float(tab_levels[0]) if statistic < 0 else float(tab_levels[-1])
    return float(np.exp(np.interp(statistic, row, np.log(tab_levels))))
