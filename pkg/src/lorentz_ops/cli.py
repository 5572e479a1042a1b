"""Command-line front end.

Three subcommands:

* ``analyze <config.toml>`` — run every requested criterion on one
  instance, cross-check against the oracle, print text or ``--json``.
* ``replicate <entry-id|all>`` — re-run catalog entries and compare
  against their pinned outcomes.
* ``norms <config.toml> --function "<pieces>"`` — quasi-norm and norm
  of a simple function given as ``"3 on (0,1/4); 1 on (1/2,1)"`` or
  ``"2 on {a,c}"``.

Exit codes: 0 success, 1 usage, 2 invalid config or arguments,
3 analysis failure, 4 cross-check or replication mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import catalog
from .config import ConfigError, load_config
from .lorentz import SimpleFunction, norm, quasi_norm
from .rational import as_fraction
from .report import analyze, norm_json, render_json, render_text
from .sets import AtomSet, IntervalUnion, StructuredSet
from .spaces import CountableAtomicSpace, FiniteAtomicSpace

USAGE_EXIT = 1
CONFIG_EXIT = 2
ANALYSIS_EXIT = 3
MISMATCH_EXIT = 4


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; we reserve 2 for config errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lorentz-ops", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="analyze one instance config")
    pa.add_argument("config", help="path to a TOML instance config")
    pa.add_argument("--json", action="store_true", help="emit JSON")
    pa.add_argument("--horizon", type=int, default=None, metavar="K",
                    help="probe depth for kernel chains (default: config, "
                         "then LORENTZ_OPS_HORIZON, then 6)")
    pa.add_argument("--tolerance", type=float, default=None, metavar="T",
                    help="relative tolerance for numeric norm integrals")

    pr = sub.add_parser("replicate", help="re-run catalog entries")
    pr.add_argument("entry", help="catalog entry id, or 'all'")
    pr.add_argument("--json", action="store_true", help="emit JSON")

    pn = sub.add_parser("norms", help="norms of a simple function")
    pn.add_argument("config", help="path to a TOML instance config")
    pn.add_argument("--function", required=True, metavar="PIECES",
                    help='e.g. "3 on (0,1/4); 1 on (1/2,1)" or "2 on {a,c}"')
    pn.add_argument("--json", action="store_true", help="emit JSON")
    pn.add_argument("--tolerance", type=float, default=None, metavar="T")
    return parser


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def _load(path: str):
    try:
        return load_config(path)
    except OSError as e:
        raise SystemExit(_fail(USAGE_EXIT, f"cannot read {path}: {e}"))
    except ConfigError as e:
        for loc, msg in e.problems:
            print(f"{loc}: {msg}", file=sys.stderr)
        raise SystemExit(CONFIG_EXIT)


def _cmd_analyze(args) -> int:
    config = _load(args.config)
    if args.horizon is not None and args.horizon < 0:
        return _fail(CONFIG_EXIT, "horizon: must be nonnegative")
    if args.tolerance is not None and args.tolerance <= 0:
        return _fail(CONFIG_EXIT, "tolerance: must be positive")
    try:
        report = analyze(config, horizon=args.horizon, tolerance=args.tolerance)
    except Exception as e:  # noqa: BLE001 - boundary: report, don't crash
        return _fail(ANALYSIS_EXIT, f"analysis failed: {e}")
    print(render_json(report) if args.json else render_text(report))
    if report.disagreements:
        for row in report.disagreements:
            print(f"cross-check disagreement: {row}", file=sys.stderr)
        return MISMATCH_EXIT
    return 0


def _cmd_replicate(args) -> int:
    if args.entry == "all":
        targets = catalog.entries()
    else:
        try:
            targets = (catalog.entry(args.entry),)
        except catalog.CatalogError as e:
            return _fail(CONFIG_EXIT, str(e.args[0]))
    results = []
    for ent in targets:
        try:
            results.append(catalog.replicate(ent))
        except Exception as e:  # noqa: BLE001
            return _fail(ANALYSIS_EXIT, f"{ent.id}: replication crashed: {e}")
    if args.json:
        doc = [
            {
                "id": r.entry_id,
                "ok": r.ok,
                "mismatches": list(r.mismatches),
                "elapsed_ms": round(r.elapsed_ms, 3),
            }
            for r in results
        ]
        print(json.dumps(doc, indent=2))
    else:
        for r in results:
            ent = catalog.entry(r.entry_id)
            mark = "ok" if r.ok else "MISMATCH"
            print(f"{r.entry_id:18s} {mark:9s} {r.elapsed_ms:7.1f} ms  {ent.title}")
            for m in r.mismatches:
                print(f"    - {m}")
    return 0 if all(r.ok for r in results) else MISMATCH_EXIT


def _parse_piece_set(token: str, space):
    token = token.strip()
    if token.startswith("{") and token.endswith("}"):
        items = [t.strip() for t in token[1:-1].split(",") if t.strip()]
        if isinstance(space, FiniteAtomicSpace):
            stray = [i for i in items if i not in space.atoms]
            if stray:
                raise ValueError(f"unknown atoms: {', '.join(stray)}")
            return AtomSet.of(items)
        if isinstance(space, CountableAtomicSpace):
            return StructuredSet.of(int(i) for i in items)
        raise ValueError("atom sets need an atomic space")
    if token.startswith("(") and token.endswith(")"):
        if isinstance(space, (FiniteAtomicSpace, CountableAtomicSpace)):
            raise ValueError("interval sets need the interval engine")
        parts = [t.strip() for t in token[1:-1].split(",")]
        if len(parts) != 2:
            raise ValueError(f"an interval is (lo,hi): {token!r}")
        lo = None if parts[0] in ("-inf", "-oo") else as_fraction(parts[0])
        hi = None if parts[1] in ("inf", "oo") else as_fraction(parts[1])
        return IntervalUnion.interval(lo, hi)
    raise ValueError(f"cannot parse set {token!r}; use (lo,hi) or {{a,b}}")


def parse_function(text: str, space) -> SimpleFunction:
    """Parse ``"VALUE on SET; VALUE on SET"`` against the given space."""
    pieces = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if " on " not in chunk:
            raise ValueError(f"a piece is 'VALUE on SET': {chunk!r}")
        raw_value, raw_set = chunk.split(" on ", 1)
        value = Fraction(raw_value.strip())
        pieces.append((value, _parse_piece_set(raw_set, space)))
    if not pieces:
        raise ValueError("no pieces given")
    return SimpleFunction.of(space, pieces)


def _cmd_norms(args) -> int:
    config = _load(args.config)
    try:
        f = parse_function(args.function, config.space)
    except (ValueError, ArithmeticError) as e:
        return _fail(CONFIG_EXIT, f"--function: {e}")
    tol = args.tolerance or config.tolerance or 1e-12
    if tol <= 0:
        return _fail(CONFIG_EXIT, "tolerance: must be positive")
    try:
        qn = quasi_norm(f, config.index)
        nn = norm(f, config.index, rel_tol=tol)
    except Exception as e:  # noqa: BLE001 - boundary: report, don't crash
        return _fail(ANALYSIS_EXIT, f"norm computation failed: {e}")
    if args.json:
        doc = {
            "quasi_norm": norm_json(qn, tol),
            "norm": norm_json(nn, tol),
        }
        print(json.dumps(doc, indent=2))
    else:
        for label, result in (("quasi_norm", qn), ("norm", nn)):
            shown = "inf" if result.diverges else repr(result.value)
            print(f"{label}: {shown}  (tolerance {tol!r})")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "replicate":
            return _cmd_replicate(args)
        return _cmd_norms(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE_EXIT
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
