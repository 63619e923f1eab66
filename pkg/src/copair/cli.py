"""``copair`` command line: validate, backtest, fit, tables.

Exit codes: 0 success, 2 data error, 3 config error, 4 model failure,
5 internal error.
"""

import argparse
import hashlib
import json
import logging
import sys
import traceback
from pathlib import Path

from . import __version__
from .backtest import BUY_AND_HOLD_MODES, buy_and_hold, form_cycles, iso_utc, run_backtest, write_report
from .config import load_config
from .exceptions import ConfigError, CopairError, DataError, OutOfRange, ParseError
from .market_data import HOUR, _parse_file, build_schedule, load_panel_dir, symbol_from_path
from .strategy import build_cycle_model, fallback_candidate, form_candidates, screen_spreads, select_pair
from .unit_root import critical_values, generate_tables, load_tables, write_tables
from .unit_root.tables import DEFAULT_REPLICATIONS, DEFAULT_SEED

logger = logging.getLogger("copair")

SUMMARY_ROWS = (
    ("Annualized Return", "annualized_return", "pct"),
    ("Annualized STD", "annualized_std", "pct"),
    ("Annualized Sharpe Ratio", "sharpe", "num"),
    ("Maximum Drawdown", "max_drawdown", "pct"),
    ("Return Over Max. Drawdown.", "romad", "num"),
    ("Transaction Costs Over Gross P&L", "fees_over_gross", "pct"),
    ("Number of Transactions", "n_transactions", "int"),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _config_flags(p, with_alpha_list=False):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--data-dir")
    p.add_argument("--reference-symbol")
    p.add_argument("--test", choices=["eg", "kss"])
    if with_alpha_list:
        p.add_argument("--alpha1", help="entry trigger, or a comma separated sweep")
    else:
        p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--significance", type=float)
    p.add_argument("--capital", type=float)
    p.add_argument("--formation-hours", type=int)
    p.add_argument("--trading-hours", type=int)
    p.add_argument("--step-hours", type=int)
    p.add_argument("--taker-fee", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--fallback", choices=["best-effort", "skip-week"])
    p.add_argument("--output-dir")
    p.add_argument("--max-lags", type=int)
    p.add_argument("--families", help="comma separated copula families")
    p.add_argument("--workers", type=int)


_CONFIG_KEYS = (
    "data_dir", "reference_symbol", "test", "alpha2", "significance", "capital",
    "formation_hours", "trading_hours", "step_hours", "taker_fee", "seed", "fallback",
    "output_dir", "max_lags", "workers",
)


def _resolve(args, alpha1=None):
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    if getattr(args, "families", None):
        overrides["families"] = tuple(f.strip() for f in args.families.split(",") if f.strip())
    overrides["alpha1"] = alpha1 if alpha1 is not None else getattr(args, "alpha1", None)
    return load_config(args.config, **overrides)


def _alpha_list(raw):
    if raw is None:
        return [None]
    try:
        return [float(x) for x in str(raw).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --alpha1 value {raw!r}") from None


def data_hash(panel):
    h = hashlib.sha256()
    h.update(panel.timestamps.tobytes())
    for sym in panel.symbols:
        h.update(sym.encode())
        h.update(panel.close(sym).tobytes())
    return h.hexdigest()


def _load(config):
    return load_panel_dir(config.data_dir, config.reference_symbol)


# ---- validate --------------------------------------------------------------


def cmd_validate(config, out=None):
    """Per-file row and gap counts plus the aligned grid; returns an exit code."""
    out = sys.stdout if out is None else out
    data_dir = Path(config.data_dir)
    paths = sorted(data_dir.glob("*.csv")) if data_dir.is_dir() else []
    if not paths:
        print(f"error: no candle files found in {data_dir}", file=out)
        return DataError.exit_code
    errors = []
    rows = {}
    print(f"{'symbol':<12} {'rows':>8} {'gaps':>8} {'first':>21} {'last':>21}", file=out)
    for p in paths:
        sym = symbol_from_path(p)
        try:
            parsed = _parse_file(p)
        except ParseError as exc:
            errors.append(str(exc))
            print(f"{sym:<12} ParseError {exc}", file=out)
            continue
        if not parsed:
            errors.append(f"{p}: no data rows")
            print(f"{sym:<12} {0:>8}", file=out)
            continue
        ts = sorted(parsed)
        gaps = (ts[-1] - ts[0]) // HOUR + 1 - len(ts)
        rows[sym] = set(ts)
        print(f"{sym:<12} {len(ts):>8} {gaps:>8} {_iso(ts[0]):>21} {_iso(ts[-1]):>21}", file=out)
    if config.reference_symbol not in rows and not errors:
        errors.append(f"reference symbol {config.reference_symbol} not found")
    common = set.intersection(*rows.values()) if rows else set()
    print(f"symbols: {len(rows)}  aligned rows: {len(common)}", file=out)
    if rows and common:
        span = (max(common) - min(common)) // HOUR + 1
        print(f"aligned span: {_iso(min(common))} .. {_iso(max(common))} ({span} h, {span - len(common)} missing)", file=out)
        n_cycles = max(0, (span - config.formation_hours - config.trading_hours) // config.step_hours + 1)
        print(f"cycles: {n_cycles}", file=out)
    if errors:
        for e in errors:
            print(f"error: {e}", file=out)
        return DataError.exit_code
    if not common:
        print("error: files share no timestamps", file=out)
        return DataError.exit_code
    return 0


def _iso(ts):
    return iso_utc(ts)


# ---- backtest --------------------------------------------------------------


def _pct(x):
    return "n/a" if x is None else f"{100.0 * x:.1f}%"


def _num(x):
    return "n/a" if x is None else f"{x:.2f}"


def format_summary(columns):
    """Table with one row per metric and one column per named report."""
    names = list(columns)
    width = max(12, *(len(n) for n in names))
    lines = [f"{'':<34}" + "".join(f"{n:>{width + 2}}" for n in names)]
    for label, key, kind in SUMMARY_ROWS:
        cells = []
        for n in names:
            val = getattr(columns[n], key)
            cells.append(_pct(val) if kind == "pct" else _num(val) if kind == "num" else str(val))
        lines.append(f"{label:<34}" + "".join(f"{c:>{width + 2}}" for c in cells))
    return "\n".join(lines)


def _short(sym, quote="USDT"):
    return sym[: -len(quote)] if sym.endswith(quote) and sym != quote else sym


def format_pairs(cycles):
    """Per-week selected pairs in the layout Week | Pair | P-Value (S1) | P-Value (S2)."""
    lines = [f"{'Week':>5}  {'Pair':<16} {'P-Value (S1)':>12} {'P-Value (S2)':>12}"]
    for rec in cycles:
        if rec["pair"] is None:
            lines.append(f"{rec['week']:>5}  {'-':<16} {'-':>12} {'-':>12}  ({rec['skip_reason']})")
            continue
        pair = f"{_short(rec['alt1'])}-{_short(rec['alt2'])}"
        lines.append(f"{rec['week']:>5}  {pair:<16} {rec['p1']:>12.3f} {rec['p2']:>12.3f}")
    return "\n".join(lines)


def cmd_backtest(args, out=None):
    out = sys.stdout if out is None else out
    alphas = _alpha_list(getattr(args, "alpha1", None))
    configs = [_resolve(args, a) for a in alphas]
    base = configs[0]
    panel = _load(base)
    schedule = build_schedule(panel, base.formation_hours, base.trading_hours, base.step_hours)
    digest = data_hash(panel)
    print(f"loaded {len(panel.symbols)} symbols, {len(panel)} aligned rows, {len(schedule)} cycles", file=out)
    formations = form_cycles(panel, schedule, base)

    span = panel.slice(schedule[0].trading_start, schedule[-1].trading_end)
    baselines = {
        "bh_" + mode: buy_and_hold(span, mode, base.capital, base.taker_fee) for mode in BUY_AND_HOLD_MODES
    }
    out_root = Path(base.output_dir)
    columns = {}
    cycles = None
    for cfg in configs:
        ledger, report = run_backtest(panel, schedule, cfg, formations=formations)
        target = out_root if len(configs) == 1 else out_root / f"alpha1_{cfg.alpha1:g}"
        write_report(target, ledger, report, cfg, digest, baselines)
        columns[f"a1={cfg.alpha1:g}"] = report
        cycles = ledger.cycles
    columns["BTC B&H" if base.reference_symbol == "BTCUSDT" else "Ref B&H"] = baselines["bh_reference_only"]
    columns["Portfolio B&H"] = baselines["bh_equal_weight_portfolio"]
    print(f"test: {base.test}", file=out)
    print(format_summary(columns), file=out)
    if getattr(args, "print_pairs", False):
        print(file=out)
        print(format_pairs(cycles), file=out)
    print(f"reports written to {out_root}", file=out)
    return 0


# ---- fit ---------------------------------------------------------------------


def cmd_fit(args, out=None):
    out = sys.stdout if out is None else out
    config = _resolve(args)
    panel = _load(config)
    if args.cycle is not None:
        schedule = build_schedule(panel, config.formation_hours, config.trading_hours, config.step_hours)
        if not 1 <= args.cycle <= len(schedule):
            raise OutOfRange(f"cycle must be in 1..{len(schedule)}, got {args.cycle}")
        cyc = schedule[args.cycle - 1]
        start, stop = cyc.formation_start, cyc.formation_end
    else:
        if args.start is None or args.end is None:
            raise ConfigError("give --cycle or both --start and --end")
        start, stop = args.start, args.end
    window = panel.slice(start, stop)
    screened = screen_spreads(window, config.test, config.max_lags)
    try:
        pair = select_pair(form_candidates(window, config.test, config.significance, config.max_lags, screened))
        fallback = False
    except CopairError:
        if config.fallback == "skip-week":
            raise
        pair, fallback = fallback_candidate(screened), True
    model = build_cycle_model(pair, config.families, fallback_used=fallback)
    print(f"window: {_iso(window.start)} .. {_iso(window.end)} ({len(window)} rows)", file=out)
    print(f"pair: {pair.label}  p1={pair.p1:.3f}  p2={pair.p2:.3f}  tau={pair.tau:.4f}"
          + ("  (fallback)" if fallback else ""), file=out)
    print(f"{'family':<10} {'rot':>4} {'k':>2} {'loglik':>12} {'aic':>12}  params", file=out)
    records = []
    for c in model.candidates:
        rec = c.as_record()
        records.append(rec)
        par = " ".join(f"{k}={v:.6g}" for k, v in rec["params"].items())
        print(f"{rec['family']:<10} {rec['rotation']:>4} {c.k:>2} {c.loglik:>12.4f} {c.aic:>12.4f}  {par}", file=out)
    if args.json:
        doc = {"window": [start, stop], "pair": pair.label, "p1": pair.p1, "p2": pair.p2, "tau": pair.tau,
               "fallback_used": fallback, "candidates": records}
        Path(args.json).write_text(json.dumps(doc, indent=1) + "\n")
    return 0


# ---- tables ------------------------------------------------------------------


def cmd_tables(args, out=None):
    out = sys.stdout if out is None else out
    if args.regenerate:
        seed = DEFAULT_SEED if args.seed is None else args.seed
        doc = generate_tables(seed=seed, replications=args.replications, workers=args.workers)
        path = write_tables(doc, args.output)
        print(f"wrote {path} (seed {seed}, {args.replications} replications)", file=out)
        return 0
    tables = load_tables()
    for test in tables:
        n_grid = tables[test][0]
        print(test, file=out)
        print(f"  {'n':>6} {'1%':>9} {'5%':>9} {'10%':>9}", file=out)
        for n in n_grid:
            cv = critical_values(test, int(n))
            print(f"  {int(n):>6} {cv[0.01]:>9.4f} {cv[0.05]:>9.4f} {cv[0.10]:>9.4f}", file=out)
    return 0


def build_parser():
    parser = _Parser(prog="copair", description="Copula-based pairs trading research engine.")
    parser.add_argument("--version", action="version", version=f"copair {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("validate", help="data quality report for a candle directory")
    _config_flags(p)

    p = sub.add_parser("backtest", help="run the strategy and write reports")
    _config_flags(p, with_alpha_list=True)
    p.add_argument("--print-pairs", action="store_true", help="print the per-week selected pairs")

    p = sub.add_parser("fit", help="copula diagnostics for one formation window")
    _config_flags(p)
    p.add_argument("--cycle", type=int, help="1-based cycle (week) number")
    p.add_argument("--start", type=int, help="window start, epoch seconds")
    p.add_argument("--end", type=int, help="window end (exclusive), epoch seconds")
    p.add_argument("--json", help="also write the candidate fits to this file")

    p = sub.add_parser("tables", help="show or regenerate critical-value tables")
    p.add_argument("--regenerate", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", help="table file to write (default: the packaged table)")
    return parser


def main(argv=None):
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        if args.command is None:
            parser.print_help()
            return ConfigError.exit_code
        if args.command == "validate":
            return cmd_validate(_resolve(args))
        if args.command == "backtest":
            return cmd_backtest(args)
        if args.command == "fit":
            return cmd_fit(args)
        return cmd_tables(args)
    except CopairError as exc:
        print(f"copair: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception:  # invariant violations and bugs
        traceback.print_exc()
        return 5


if __name__ == "__main__":
    sys.exit(main())
