"""Trade execution, equity accounting, performance metrics and reports."""

import csv
import enum
import json
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .copula import CopulaFamily
from .exceptions import EmptyInput, NonPositiveEquity
from .market_data import HOUR
from .strategy import Action, CycleFormation, form_cycle, leg_quantities, run_signals

logger = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760
SIG_DIGITS = 10


class Side(str, enum.Enum):
    BUY = "Buy"
    SELL = "Sell"

    @property
    def sign(self):
        return 1.0 if self is Side.BUY else -1.0


@dataclass(frozen=True)
class Execution:
    timestamp: int
    symbol: str
    side: Side
    qty: float
    price: float
    fee: float
    cycle: int = -1

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        if not self.qty > 0:
            raise ValueError(f"execution quantity must be positive, got {self.qty}")

    @property
    def notional(self):
        return self.qty * self.price


@dataclass(frozen=True)
class PairEvent:
    """One pair-level transaction: an open or a close of the two-leg position."""

    timestamp: int
    cycle: int
    action: str
    pair: str
    forced: bool = False


@dataclass(frozen=True, eq=False)
class EquityCurve:
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = np.asarray(self.values, dtype=float)
        if ts.shape != vals.shape:
            raise ValueError("equity timestamps and values differ in length")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class TradeLedger:
    executions: tuple
    cash: float
    positions: dict
    equity_curve: EquityCurve
    events: tuple = ()
    cycles: tuple = ()

    @property
    def total_fees(self):
        return math.fsum(e.fee for e in self.executions)


@dataclass(frozen=True)
class PerfReport:
    annualized_return: float
    annualized_std: float
    sharpe: Optional[float]
    max_drawdown: float
    romad: Optional[float]
    n_transactions: int
    fees_over_gross: Optional[float]
    copula_occurrence: dict = field(default_factory=dict)
    n_executions: int = 0
    total_fees: float = 0.0
    gross_pnl: float = 0.0
    net_pnl: float = 0.0
    start_equity: float = 0.0
    end_equity: float = 0.0
    n_hours: int = 0

    def as_dict(self):
        return asdict(self)


class _Book:
    """Mutable single-writer state used while a backtest runs."""

    def __init__(self, capital, fee_rate):
        self.cash = float(capital)
        self.fee_rate = fee_rate
        self.positions = {}
        self.executions = []
        self.events = []
        self.eq_ts = []
        self.eq_values = []

    def execute(self, ts, symbol, side, qty, price, cycle):
        fee = qty * price * self.fee_rate
        self.cash -= side.sign * qty * price + fee
        self.positions[symbol] = self.positions.get(symbol, 0.0) + side.sign * qty
        self.executions.append(Execution(ts, symbol, side, qty, price, fee, cycle))

    def flatten(self, ts, prices, cycle):
        for sym in sorted(self.positions):
            pos = self.positions[sym]
            if pos != 0.0:
                side = Side.SELL if pos > 0 else Side.BUY
                self.execute(ts, sym, side, abs(pos), prices[sym], cycle)
                self.positions[sym] = 0.0

    def mark(self, ts, prices):
        val = self.cash + math.fsum(pos * prices[s] for s, pos in self.positions.items() if pos)
        self.eq_ts.append(int(ts))
        self.eq_values.append(val)
        return val

    def equity(self, prices):
        return self.cash + math.fsum(pos * prices[s] for s, pos in self.positions.items() if pos)


def trade_cycle(book, model, trading, thresholds, cycle_index=0):
    """Run one trading window through ``book``; returns the number of pair events."""
    alt1, alt2 = model.pair.alt1, model.pair.alt2
    p1 = trading.close(alt1)
    p2 = trading.close(alt2)
    ts = trading.timestamps
    capital = book.equity({alt1: p1[0], alt2: p2[0]})
    if not capital > 0:
        raise NonPositiveEquity(f"equity {capital:g} at cycle start")
    signals = run_signals(model, trading, thresholds)
    n_events = 0
    for i, sig in enumerate(signals):
        prices = {alt1: float(p1[i]), alt2: float(p2[i])}
        t = int(ts[i])
        if sig.action in (Action.OPEN_LONG_S1_SHORT_S2, Action.OPEN_SHORT_S1_LONG_S2):
            q1, q2 = leg_quantities(model, (prices[alt1], prices[alt2]), capital)
            # long S1 / short S2 sells coin 1 and buys coin 2; reference legs cancel
            long_s1 = sig.action is Action.OPEN_LONG_S1_SHORT_S2
            book.execute(t, alt1, Side.SELL if long_s1 else Side.BUY, q1, prices[alt1], cycle_index)
            book.execute(t, alt2, Side.BUY if long_s1 else Side.SELL, q2, prices[alt2], cycle_index)
            book.events.append(PairEvent(t, cycle_index, sig.action.value, model.pair.label))
            n_events += 1
        elif sig.action is Action.CLOSE:
            book.flatten(t, prices, cycle_index)
            book.events.append(
                PairEvent(t, cycle_index, Action.CLOSE.value, model.pair.label, forced=i == len(signals) - 1)
            )
            n_events += 1
        book.mark(t, prices)
    return n_events


def _form_job(args):
    formation, config = args
    return form_cycle(
        formation,
        test=config.test,
        significance=config.significance,
        fallback=config.fallback,
        max_lags=config.max_lags,
        families=config.families,
    )


def form_cycles(panel, schedule, config, workers=None):
    """Formation step for every cycle, in cycle order.

    Cycles are independent, so they may be formed in parallel; results are
    always returned in schedule order.
    """
    workers = config.workers if workers is None else workers
    jobs = []
    for cyc in schedule:
        try:
            formation = panel.slice(cyc.formation_start, cyc.formation_end)
        except Exception as exc:  # OutOfRange on gaps is recorded, never fatal
            jobs.append(exc)
            continue
        jobs.append((formation, config))
    real = [j for j in jobs if not isinstance(j, Exception)]
    if workers > 1 and len(real) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = iter(list(pool.map(_form_job, real)))
    else:
        done = iter([_form_job(j) for j in real])
    out = []
    for j in jobs:
        if isinstance(j, Exception):
            out.append(CycleFormation((), skip_reason=f"{type(j).__name__}: {j}"))
        else:
            out.append(next(done))
    return out


def _cycle_record(cyc, formation, n_events):
    rec = {
        "week": cyc.index + 1,
        "formation_start": cyc.formation_start,
        "trading_start": cyc.trading_start,
        "trading_end": cyc.trading_end,
        "pair": None,
        "alt1": None,
        "alt2": None,
        "p1": None,
        "p2": None,
        "tau": None,
        "beta1": None,
        "beta2": None,
        "fallback_used": False,
        "copula": None,
        "n_events": n_events,
        "skip_reason": formation.skip_reason,
    }
    m = formation.model
    if m is not None:
        rec.update(
            pair=m.pair.label,
            alt1=m.pair.alt1,
            alt2=m.pair.alt2,
            p1=m.pair.p1,
            p2=m.pair.p2,
            tau=m.pair.tau,
            beta1=m.pair.spread1.beta,
            beta2=m.pair.spread2.beta,
            fallback_used=m.fallback_used,
            copula=m.copula.as_record(),
        )
    return rec


def run_backtest(panel, schedule, config, formations=None):
    """Form, trade and account every cycle of ``schedule``.

    Parameters
    ----------
    panel : PricePanel
    schedule : CycleSchedule
    config : RunConfig
    formations : list of CycleFormation, optional
        Precomputed formation results (they do not depend on the thresholds,
        so a threshold sweep can reuse them).

    Returns
    -------
    (TradeLedger, PerfReport)
    """
    if formations is None:
        formations = form_cycles(panel, schedule, config)
    if len(formations) != len(schedule):
        raise ValueError("one formation result per cycle is required")
    th = config.thresholds
    book = _Book(config.capital, config.taker_fee)
    records = []
    # the curve opens with the uninvested capital one hour before trading
    first = schedule[0].trading_start if len(schedule) else panel.start + HOUR
    book.mark(first - HOUR, {})
    for cyc, formation in zip(schedule, formations):
        try:
            trading = panel.slice(cyc.trading_start, cyc.trading_end)
        except Exception as exc:
            records.append(_cycle_record(cyc, CycleFormation((), skip_reason=f"{type(exc).__name__}: {exc}"), 0))
            continue
        n_events = 0
        traded = False
        if formation.model is not None:
            try:
                n_events = trade_cycle(book, formation.model, trading, th, cyc.index)
                traded = True
            except NonPositiveEquity as exc:
                formation = CycleFormation(formation.screened, None, f"NonPositiveEquity: {exc}")
        if not traded:
            # flat week: equity is cash
            for t in trading.timestamps:
                book.mark(int(t), {})
        records.append(_cycle_record(cyc, formation, n_events))
    curve = EquityCurve(book.eq_ts, book.eq_values)
    ledger = TradeLedger(
        executions=tuple(book.executions),
        cash=book.cash,
        positions=dict(book.positions),
        equity_curve=curve,
        events=tuple(book.events),
        cycles=tuple(records),
    )
    models = [f.model for f in formations if f.model is not None]
    occurrence = occurrence_stats(models) if models else {}
    report = compute_metrics(curve, ledger.executions, n_transactions=len(ledger.events), occurrence=occurrence)
    return ledger, report


def max_drawdown(values):
    values = np.asarray(values, dtype=float)
    peaks = np.maximum.accumulate(values)
    return float(np.min(values / peaks - 1.0))


def compute_metrics(equity_curve, executions=(), n_transactions=None, occurrence=None):
    """Performance metrics of an hourly equity curve.

    Returns are simple hourly returns; annualization uses 8760 hours. Sharpe
    and RoMaD are ``None`` when volatility or drawdown is zero.
    """
    values = equity_curve.values if isinstance(equity_curve, EquityCurve) else np.asarray(equity_curve, float)
    if values.size == 0:
        raise EmptyInput("equity curve is empty")
    if not np.all(values > 0):
        raise NonPositiveEquity("equity must stay strictly positive")
    n_hours = values.size - 1
    e0, e1 = float(values[0]), float(values[-1])
    if n_hours > 0:
        rets = values[1:] / values[:-1] - 1.0
        # very short curves can overflow; report inf rather than fail
        with np.errstate(over="ignore"):
            ann_ret = float(np.power(e1 / e0, HOURS_PER_YEAR / n_hours) - 1.0)
        ann_std = float(np.std(rets, ddof=1)) * math.sqrt(HOURS_PER_YEAR) if n_hours > 1 else 0.0
    else:
        ann_ret, ann_std = 0.0, 0.0
    mdd = max_drawdown(values)
    fees = math.fsum(e.fee for e in executions)
    net = e1 - e0
    gross = net + fees
    return PerfReport(
        annualized_return=float(ann_ret),
        annualized_std=float(ann_std),
        sharpe=float(ann_ret / ann_std) if ann_std > 0 else None,
        max_drawdown=mdd,
        romad=float(ann_ret / abs(mdd)) if mdd != 0 else None,
        n_transactions=len(executions) if n_transactions is None else int(n_transactions),
        fees_over_gross=float(fees / gross) if gross != 0 else None,
        copula_occurrence=dict(occurrence or {}),
        n_executions=len(executions),
        total_fees=fees,
        gross_pnl=gross,
        net_pnl=net,
        start_equity=e0,
        end_equity=e1,
        n_hours=n_hours,
    )


def _family_of(item):
    for attr in ("copula", "fitted", "params"):
        if hasattr(item, attr):
            item = getattr(item, attr)
    fam = getattr(item, "family", item)
    return CopulaFamily(fam)


def occurrence_stats(cycle_models):
    """Share of cycles selecting each base family (rotations pooled)."""
    items = list(cycle_models)
    if not items:
        raise EmptyInput("no cycle models")
    counts = Counter(_family_of(m) for m in items)
    total = sum(counts.values())
    return {f.value: counts[f] / total for f in sorted(counts, key=lambda f: f.order)}


BUY_AND_HOLD_MODES = ("reference_only", "equal_weight_portfolio")


def buy_and_hold(panel, mode="reference_only", capital=200_000.0, taker_fee=0.0):
    """Passive baseline: buy at the first close, sell at the last.

    ``equal_weight_portfolio`` splits capital equally over every symbol in the
    panel (reference included). The curve starts with the uninvested capital
    one hour before the first bar, and fees are paid on both trades.
    """
    if mode not in BUY_AND_HOLD_MODES:
        raise ValueError(f"mode must be one of {BUY_AND_HOLD_MODES}, got {mode!r}")
    symbols = [panel.reference.symbol] if mode == "reference_only" else list(panel.symbols)
    prices = panel.closes_matrix(symbols)
    ts = panel.timestamps
    share = capital / len(symbols)
    qty = share / (prices[0] * (1.0 + taker_fee))
    values = prices @ qty
    values[-1] = values[-1] * (1.0 - taker_fee)
    execs = []
    for j, sym in enumerate(symbols):
        execs.append(Execution(int(ts[0]), sym, Side.BUY, qty[j], prices[0, j], qty[j] * prices[0, j] * taker_fee))
        execs.append(Execution(int(ts[-1]), sym, Side.SELL, qty[j], prices[-1, j], qty[j] * prices[-1, j] * taker_fee))
    curve = EquityCurve(np.concatenate([[ts[0] - HOUR], ts]), np.concatenate([[capital], values]))
    return compute_metrics(curve, execs, n_transactions=2)


# ---- report writers -------------------------------------------------------


def fmt(x):
    """Decimal text with 10 significant digits; empty for undefined values."""
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.{SIG_DIGITS}g}"


def _round(obj):
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return float(f"{obj:.{SIG_DIGITS}g}") if math.isfinite(obj) else None
    return obj


def iso_utc(ts):
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def write_report(out_dir, ledger, report, config=None, data_hash=None, baselines=None, generated_at=None):
    """Write ``report.json``, ``equity.csv``, ``trades.csv`` and ``occurrence.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if generated_at is None:
        generated_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    doc = {
        "generated_at": generated_at,
        "config": config.as_dict() if hasattr(config, "as_dict") else config,
        "data_hash": data_hash,
        "metrics": report.as_dict(),
        "baselines": {k: v.as_dict() for k, v in (baselines or {}).items()},
        "cycles": list(ledger.cycles),
        "events": [asdict(e) for e in ledger.events],
    }
    (out / "report.json").write_text(json.dumps(_round(doc), indent=1, sort_keys=False) + "\n")

    with (out / "equity.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "equity"])
        for t, v in zip(ledger.equity_curve.timestamps, ledger.equity_curve.values):
            w.writerow([int(t), fmt(v)])

    with (out / "trades.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "symbol", "side", "qty", "price", "fee", "cycle"])
        for e in ledger.executions:
            w.writerow([e.timestamp, e.symbol, e.side.value, fmt(e.qty), fmt(e.price), fmt(e.fee), e.cycle])

    with (out / "occurrence.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", "rate"])
        for fam in CopulaFamily:
            w.writerow([fam.value, fmt(float(report.copula_occurrence.get(fam.value, 0.0)))])
    return out
