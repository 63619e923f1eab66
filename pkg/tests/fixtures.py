"""Hand-built strategy fixtures shared by the unit and acceptance tests."""

import numpy as np

from copair.config import RunConfig
from copair.copula import CopulaParams, FittedCopula
from copair.dependence import ecdf_build
from copair.market_data import HOUR, PricePanel, PriceSeries, build_schedule
from copair.strategy import CycleFormation, CycleModel, PairCandidate
from copair.synthetic import STUDY_START
from copair.unit_root import SpreadSeries

REF_PRICE = 1000.0
# formation spread values: the integers -50..50 for both spreads
FORMATION_SPREAD = np.arange(-50.0, 51.0)
# trading spreads (s1, s2) per hour: hold, open long S1 / short S2, hold, close, hold, hold
TRADING_SPREADS = [(0, 0), (-48, 48), (-25, 25), (0, 0), (0, 0), (0, 0)]


def independence_model(formation_values=FORMATION_SPREAD, beta1=1.0, beta2=1.0, alt1="AAAUSDT", alt2="BBBUSDT"):
    """A cycle model whose copula is the independence copula (Gaussian, rho = 0).

    Under independence ``h(u1 | u2) = u1``, so the signals depend only on the
    pseudo-observations and can be predicted by hand.
    """
    n = len(formation_values)
    ts = STUDY_START + HOUR * np.arange(n)
    sp1 = SpreadSeries(alt1, beta1, np.asarray(formation_values, float), ts)
    sp2 = SpreadSeries(alt2, beta2, np.asarray(formation_values, float), ts)
    pair = PairCandidate(alt1, alt2, sp1, sp2, 0.01, 0.01, 0.0)
    cop = FittedCopula(CopulaParams("Gaussian", rho=0.0), 0.0, n)
    return CycleModel(pair, cop, ecdf_build(sp1.values), ecdf_build(sp2.values))


def round_trip_panel(spreads=TRADING_SPREADS, hours_before=None):
    """Reference at a constant price, coins priced so that ``ref - coin`` is the spread."""
    spreads = np.asarray(spreads, dtype=float)
    pre = len(spreads) if hours_before is None else hours_before
    s = np.vstack([np.zeros((pre, 2)), spreads])
    ts = STUDY_START + HOUR * np.arange(len(s))
    ref = np.full(len(s), REF_PRICE)
    return PricePanel(
        PriceSeries("BTCUSDT", ts, ref),
        (PriceSeries("AAAUSDT", ts, ref - s[:, 0]), PriceSeries("BBBUSDT", ts, ref - s[:, 1])),
    )


def round_trip_setup(capital=200_000.0, fee=0.0004):
    """``(panel, schedule, config, formations)`` for a single-cycle backtest."""
    panel = round_trip_panel()
    hours = len(TRADING_SPREADS)
    config = RunConfig(capital=capital, taker_fee=fee, formation_hours=hours, trading_hours=hours, step_hours=hours)
    schedule = build_schedule(panel, hours, hours, hours)
    formations = [CycleFormation((), model=independence_model())]
    return panel, schedule, config, formations


def hand_round_trip(capital=200_000.0, fee=0.0004):
    """Hand-computed P&L and fees of :func:`round_trip_setup`.

    Open at hour 1: sell coin 1 at 1048, buy coin 2 at 952, both legs sized
    ``capital / 1048`` (betas are 1). Close at hour 3 at 1000 each.
    """
    q = capital / 1048.0
    gross = q * (1048.0 - 1000.0) + q * (1000.0 - 952.0)
    fees = fee * q * (1048.0 + 952.0 + 1000.0 + 1000.0)
    return {"qty": q, "gross": gross, "fees": fees, "net": gross - fees}
