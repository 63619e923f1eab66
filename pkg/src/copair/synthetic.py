"""Seeded synthetic hourly price panels for demos and tests.

The reference follows a geometric random walk. Cointegrated coins are built
so that ``ref - beta * coin`` equals a stationary AR(1) spread with a shared
factor, giving pairs with strong rank dependence; the remaining coins are
independent random walks.
"""

import csv
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .market_data import DEFAULT_REFERENCE, HOUR, PricePanel, PriceSeries

# the 20 contracts of the study universe
UNIVERSE = (
    "BTCUSDT", "ETHUSDT", "BCHUSDT", "XRPUSDT", "EOSUSDT", "LTCUSDT", "TRXUSDT",
    "ETCUSDT", "LINKUSDT", "XLMUSDT", "ADAUSDT", "XMRUSDT", "DASHUSDT", "ZECUSDT",
    "XTZUSDT", "ATOMUSDT", "BNBUSDT", "ONTUSDT", "IOTAUSDT", "BATUSDT",
)
STUDY_START = int(datetime(2021, 1, 1, tzinfo=timezone.utc).timestamp())
STUDY_END = int(datetime(2022, 11, 11, tzinfo=timezone.utc).timestamp())
STUDY_HOURS = (STUDY_END - STUDY_START) // HOUR


def synthetic_panel(
    symbols=UNIVERSE,
    hours=2000,
    start=STUDY_START,
    seed=0,
    n_cointegrated=8,
    reference=DEFAULT_REFERENCE,
    ref_price=30_000.0,
    spread_scale=0.01,
    phi=0.97,
):
    """Build a :class:`PricePanel` of simulated hourly closes.

    Parameters
    ----------
    symbols : sequence of str
        Must contain ``reference``.
    hours : int
        Number of hourly rows.
    n_cointegrated : int
        Number of non-reference coins whose spread against the reference is
        stationary.
    spread_scale : float
        Spread standard deviation as a fraction of the starting reference price.
    phi : float
        AR(1) coefficient of the stationary spread components.
    """
    rng = np.random.default_rng(seed)
    symbols = list(symbols)
    if reference not in symbols:
        raise ValueError("reference symbol must be among the symbols")
    others = [s for s in symbols if s != reference]
    ts = start + HOUR * np.arange(hours, dtype=np.int64)
    ref = ref_price * np.exp(np.cumsum(rng.normal(0.0, 0.004, hours)))

    def ar1(scale):
        e = rng.normal(0.0, scale * np.sqrt(1.0 - phi**2), hours)
        out = np.empty(hours)
        out[0] = rng.normal(0.0, scale)
        for t in range(1, hours):
            out[t] = phi * out[t - 1] + e[t]
        return out

    sd = spread_scale * ref_price
    factor = ar1(sd)
    series = [PriceSeries(reference, ts, ref)]
    for k, sym in enumerate(others):
        level = ref_price / rng.uniform(5.0, 500.0)
        if k < n_cointegrated:
            beta = ref_price / level
            load = rng.uniform(0.5, 0.9)
            spread = load * factor + np.sqrt(1.0 - load**2) * ar1(sd)
            px = (ref - spread) / beta
            px = np.maximum(px, 1e-6 * level)
        else:
            px = level * np.exp(np.cumsum(rng.normal(0.0, 0.006, hours)))
        series.append(PriceSeries(sym, ts, px))
    return PricePanel(series[0], tuple(series[1:]))


def write_panel(panel, data_dir):
    """Write one ``<SYMBOL>.csv`` per series in the candle format."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for sym in panel.symbols:
        s = panel.series(sym)
        path = data_dir / f"{sym}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["timestamp", "close"])
            for t, c in zip(s.timestamps.tolist(), s.closes.tolist()):
                w.writerow([t, repr(c)])
        paths.append(path)
    return paths
