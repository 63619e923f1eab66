"""Pair formation and the conditional-probability signal engine.

Each cycle the reference price is regressed on every other coin to give one
spread per coin. Spreads that pass the unit-root screen are paired, the pair
with the highest Kendall tau is kept, a copula is selected for its
pseudo-observations, and hourly h-function values drive the signals.

Going long spread ``S = ref - beta * alt`` means buying the reference and
selling ``beta`` units of the coin. In a two-spread trade the reference legs
cancel, so only the two coins are traded.
"""

import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .copula import ROTATIONS, FittedCopula, h_function, select_model
from .dependence import EmpiricalCdf, PseudoObservations, ecdf_build, kendall_tau, pit_transform
from .exceptions import (
    CopairError,
    ConfigError,
    DegenerateBeta,
    EmptyCandidates,
    NoSpreadPassed,
)
from .unit_root import DEFAULT_MAX_LAGS, SpreadSeries, adf_test, kss_test, make_spread

logger = logging.getLogger(__name__)

DEFAULT_SIGNIFICANCE = 0.10
FALLBACKS = ("best-effort", "skip-week")
_TEST_ALIASES = {"eg": "EG_ADF", "eg_adf": "EG_ADF", "adf": "EG_ADF", "kss": "KSS"}


def normalize_test(test):
    """Map ``eg``/``kss`` style names to ``EG_ADF``/``KSS``."""
    key = str(test).lower()
    if key not in _TEST_ALIASES:
        raise ConfigError(f"unknown unit-root test {test!r}; use 'eg' or 'kss'")
    return _TEST_ALIASES[key]


def _unit_root_fn(test):
    return adf_test if normalize_test(test) == "EG_ADF" else kss_test


class Position(str, enum.Enum):
    FLAT = "Flat"
    LONG_S1_SHORT_S2 = "LongS1ShortS2"
    SHORT_S1_LONG_S2 = "ShortS1LongS2"


class Action(str, enum.Enum):
    OPEN_LONG_S1_SHORT_S2 = "OpenLongS1ShortS2"
    OPEN_SHORT_S1_LONG_S2 = "OpenShortS1LongS2"
    CLOSE = "Close"
    HOLD = "Hold"


@dataclass(frozen=True)
class Thresholds:
    alpha1: float = 0.05
    alpha2: float = 0.10

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            val = getattr(self, name)
            if not 0.0 < val < 0.5:
                raise ConfigError(f"{name} must lie in (0, 0.5), got {val}")


@dataclass(frozen=True)
class SignalState:
    position: Position = Position.FLAT
    opened_at: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "position", Position(self.position))
        if (self.position is Position.FLAT) != (self.opened_at is None):
            raise ValueError("opened_at must be set exactly when a position is open")


@dataclass(frozen=True)
class Signal:
    timestamp: Optional[int]
    action: Action
    h12: float
    h21: float


@dataclass(frozen=True, eq=False)
class ScreenedSpread:
    """A formation spread and its unit-root outcome (``result`` is None on failure)."""

    spread: SpreadSeries
    result: object = None
    error: Optional[str] = None

    @property
    def alt_symbol(self):
        return self.spread.alt_symbol

    @property
    def p_value(self):
        return self.result.p_value if self.result is not None else float("nan")


@dataclass(frozen=True, eq=False)
class PairCandidate:
    alt1: str
    alt2: str
    spread1: SpreadSeries
    spread2: SpreadSeries
    p1: float
    p2: float
    tau: float

    def __post_init__(self):
        if self.alt1 == self.alt2:
            raise ValueError("a pair needs two different symbols")

    @property
    def label(self):
        return f"{self.alt1}-{self.alt2}"


@dataclass(frozen=True, eq=False)
class CycleModel:
    pair: PairCandidate
    copula: FittedCopula
    ecdf1: EmpiricalCdf
    ecdf2: EmpiricalCdf
    fallback_used: bool = False
    candidates: tuple = field(default=(), repr=False)

    @property
    def betas(self):
        return (self.pair.spread1.beta, self.pair.spread2.beta)

    def pseudo(self, s1, s2):
        return pit_transform(self.ecdf1, s1), pit_transform(self.ecdf2, s2)

    def h_values(self, s1, s2):
        """``(h12, h21)``: ``P(U1 <= u1 | U2 = u2)`` and ``P(U2 <= u2 | U1 = u1)``."""
        u1, u2 = self.pseudo(s1, s2)
        p = self.copula.params
        return h_function(p, "1given2", u1, u2), h_function(p, "2given1", u1, u2)


def screen_spreads(formation, test="eg", max_lags=DEFAULT_MAX_LAGS):
    """One spread per non-reference symbol with its unit-root result.

    A spread whose test cannot be computed (non-finite values, singular
    design) is kept with ``result=None`` and the error recorded.
    """
    fn = _unit_root_fn(test)
    out = []
    for sym in formation.other_symbols:
        spread = make_spread(formation, sym)
        try:
            out.append(ScreenedSpread(spread, fn(spread.values, max_lags)))
        except CopairError as exc:
            out.append(ScreenedSpread(spread, None, f"{type(exc).__name__}: {exc}"))
    return out


def _pair_candidates(screened):
    screened = sorted(screened, key=lambda s: s.alt_symbol)
    cands = []
    for a, b in itertools.combinations(screened, 2):
        tau = kendall_tau(a.spread.values, b.spread.values)
        cands.append(PairCandidate(a.alt_symbol, b.alt_symbol, a.spread, b.spread, a.p_value, b.p_value, tau))
    return _rank(cands)


def _rank(candidates):
    return sorted(candidates, key=lambda c: (-c.tau, c.alt1, c.alt2))


def passing_spreads(screened, significance=DEFAULT_SIGNIFICANCE):
    return [s for s in screened if s.result is not None and s.result.p_value < significance]


def form_candidates(formation, test="eg", significance=DEFAULT_SIGNIFICANCE, max_lags=DEFAULT_MAX_LAGS, screened=None):
    """All pairs of spreads that pass the unit-root screen, ranked by tau.

    Raises
    ------
    NoSpreadPassed
        If fewer than two spreads have ``p_value < significance``.
    """
    if screened is None:
        screened = screen_spreads(formation, test, max_lags)
    passed = passing_spreads(screened, significance)
    if len(passed) < 2:
        raise NoSpreadPassed(f"{len(passed)} spread(s) passed at the {significance:g} level")
    return _pair_candidates(passed)


def fallback_candidate(screened):
    """The pair of spreads with the two smallest p-values, ignoring the threshold."""
    usable = [s for s in screened if s.result is not None]
    if len(usable) < 2:
        raise NoSpreadPassed("fewer than two spreads have a usable unit-root result")
    best = sorted(usable, key=lambda s: (s.p_value, s.alt_symbol))[:2]
    return _pair_candidates(best)[0]


def select_pair(candidates):
    """Highest-tau candidate; ties go to the lexicographically smaller pair."""
    if not candidates:
        raise EmptyCandidates("no pair candidates")
    return _rank(candidates)[0]


def build_cycle_model(pair, families=None, rotations=ROTATIONS, fallback_used=False):
    """ECDFs of the formation spreads and the AIC-selected copula."""
    ecdf1 = ecdf_build(pair.spread1.values)
    ecdf2 = ecdf_build(pair.spread2.values)
    pseudo = PseudoObservations(
        np.asarray(pit_transform(ecdf1, pair.spread1.values)),
        np.asarray(pit_transform(ecdf2, pair.spread2.values)),
    )
    best, cands = select_model(pseudo, families, rotations, return_candidates=True)
    return CycleModel(pair, best, ecdf1, ecdf2, fallback_used, tuple(cands))


def decide(state, h12, h21, th):
    """Transition table of the signal engine; returns the action."""
    if state.position is Position.FLAT:
        if h12 < th.alpha1 and h21 > 1.0 - th.alpha1:
            return Action.OPEN_LONG_S1_SHORT_S2
        if h12 > 1.0 - th.alpha1 and h21 < th.alpha1:
            return Action.OPEN_SHORT_S1_LONG_S2
        return Action.HOLD
    if abs(h12 - 0.5) < th.alpha2 and abs(h21 - 0.5) < th.alpha2:
        return Action.CLOSE
    return Action.HOLD


def advance(state, action, timestamp):
    if action is Action.OPEN_LONG_S1_SHORT_S2:
        return SignalState(Position.LONG_S1_SHORT_S2, timestamp)
    if action is Action.OPEN_SHORT_S1_LONG_S2:
        return SignalState(Position.SHORT_S1_LONG_S2, timestamp)
    if action is Action.CLOSE:
        return SignalState()
    return state


def signal_step(model, state, s1, s2, th, timestamp=None):
    """Evaluate one hourly close; returns ``(Signal, next SignalState)``."""
    h12, h21 = model.h_values(float(s1), float(s2))
    action = decide(state, h12, h21, th)
    # without a clock the open time is recorded as 0
    next_state = advance(state, action, 0 if timestamp is None else timestamp)
    return Signal(timestamp, action, float(h12), float(h21)), next_state


def trading_spreads(model, trading, reference):
    """Spread values of the model's pair over a trading window (formation betas)."""
    ref = trading.close(reference)
    s1 = ref - model.pair.spread1.beta * trading.close(model.pair.alt1)
    s2 = ref - model.pair.spread2.beta * trading.close(model.pair.alt2)
    return s1, s2


def run_signals(model, trading, th, reference=None):
    """Signals for every hour of a trading window.

    Positions still open on the last bar are closed there, and no position
    is opened on the last bar.
    """
    reference = trading.reference.symbol if reference is None else reference
    s1, s2 = trading_spreads(model, trading, reference)
    h12, h21 = model.h_values(s1, s2)
    h12 = np.atleast_1d(h12)
    h21 = np.atleast_1d(h21)
    ts = trading.timestamps
    state = SignalState()
    signals = []
    last = len(ts) - 1
    for i in range(len(ts)):
        t = int(ts[i])
        action = decide(state, h12[i], h21[i], th)
        if i == last:
            action = Action.HOLD if state.position is Position.FLAT else Action.CLOSE
        state = advance(state, action, t)
        signals.append(Signal(t, action, float(h12[i]), float(h21[i])))
    return signals


def leg_quantities(model, prices, capital):
    """Coin quantities ``lambda * beta_i`` with the larger leg worth ``capital``.

    Parameters
    ----------
    model : CycleModel or tuple
        A model, or the betas ``(beta1, beta2)`` directly.
    prices : tuple of float
        Current prices of coin 1 and coin 2.
    capital : float
    """
    b1, b2 = model.betas if hasattr(model, "betas") else model
    p1, p2 = prices
    if not (b1 > 0 and b2 > 0):
        raise DegenerateBeta(f"hedge ratios must be positive, got {b1:g} and {b2:g}")
    if not (p1 > 0 and p2 > 0):
        raise ValueError("prices must be positive")
    if not capital > 0:
        raise ValueError("capital must be positive")
    lam = capital / max(b1 * p1, b2 * p2)
    return lam * b1, lam * b2


@dataclass(frozen=True, eq=False)
class CycleFormation:
    """Outcome of the formation step for one cycle."""

    screened: tuple
    model: Optional[CycleModel] = None
    skip_reason: Optional[str] = None
    n_candidates: int = 0


def form_cycle(formation, test="eg", significance=DEFAULT_SIGNIFICANCE, fallback="best-effort",
               max_lags=DEFAULT_MAX_LAGS, families=None, rotations=ROTATIONS):
    """Screen, pair, select and fit for one formation window.

    Failures are returned as a ``skip_reason`` rather than raised, so one bad
    cycle never stops a backtest.
    """
    if fallback not in FALLBACKS:
        raise ConfigError(f"fallback must be one of {FALLBACKS}, got {fallback!r}")
    screened = tuple(screen_spreads(formation, test, max_lags))
    fallback_used = False
    try:
        cands = form_candidates(formation, test, significance, max_lags, screened=screened)
        pair = select_pair(cands)
    except NoSpreadPassed as exc:
        if fallback == "skip-week":
            return CycleFormation(screened, skip_reason=f"NoSpreadPassed: {exc}")
        try:
            pair = fallback_candidate(screened)
        except NoSpreadPassed as exc2:
            return CycleFormation(screened, skip_reason=f"NoSpreadPassed: {exc2}")
        cands = [pair]
        fallback_used = True
    try:
        if not (pair.spread1.beta > 0 and pair.spread2.beta > 0):
            raise DegenerateBeta(f"{pair.label}: betas {pair.spread1.beta:g}, {pair.spread2.beta:g}")
        model = build_cycle_model(pair, families, rotations, fallback_used)
    except CopairError as exc:
        return CycleFormation(screened, skip_reason=f"{type(exc).__name__}: {exc}", n_candidates=len(cands))
    return CycleFormation(screened, model=model, n_candidates=len(cands))


class CopulaPairsStrategy(BaseEstimator):
    """Estimator wrapper around one formation/trading cycle.

    ``fit`` runs the formation step on a price panel; ``predict`` returns the
    hourly signals for a later trading panel.

    Parameters
    ----------
    test : {"eg", "kss"}
    alpha1, alpha2 : float
        Entry trigger and exit band.
    significance : float
        Unit-root screen level.
    fallback : {"best-effort", "skip-week"}
    max_lags : int
    families : list of str or None
        Copula families to consider; None means all.

    Attributes
    ----------
    formation_ : CycleFormation
    model_ : CycleModel or None
        None when the cycle was skipped.
    """

    def __init__(self, test="eg", alpha1=0.05, alpha2=0.10, significance=DEFAULT_SIGNIFICANCE,
                 fallback="best-effort", max_lags=DEFAULT_MAX_LAGS, families=None):
        self.test = test
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.significance = significance
        self.fallback = fallback
        self.max_lags = max_lags
        self.families = families

    def fit(self, X, y=None):
        normalize_test(self.test)
        Thresholds(self.alpha1, self.alpha2)
        self.formation_ = form_cycle(
            X, self.test, self.significance, self.fallback, self.max_lags, self.families
        )
        self.model_ = self.formation_.model
        return self

    def predict(self, X):
        """Signals over trading panel ``X``; empty when the cycle was skipped."""
        check_is_fitted(self, "formation_")
        if self.model_ is None:
            return []
        return run_signals(self.model_, X, Thresholds(self.alpha1, self.alpha2))
