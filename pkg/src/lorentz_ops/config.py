"""Instance configuration: parse, validate, and serialize analysis setups.

The file format is TOML.  Exact rationals are written as strings ("3/4",
"2", "-1/2"); interval endpoints additionally accept "inf" and "-inf".
``parse_config`` collects *all* validation problems instead of stopping at
the first one, so a broken file is fixable in a single pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import tomli

from .lorentz import LorentzError, LorentzIndex, SimpleFunction
from .operators import AffineWeight, FiniteWeight, OperatorSpec, TailWeight
from .rational import as_fraction
from .sets import AtomSet, IntervalUnion, StructuredSet
from .spaces import (
    AtomMap,
    CountableAtomicSpace,
    FiniteAtomicSpace,
    IntervalSpace,
    PiecewiseAffineMap,
    PiecewiseConstant,
    TailResidueMap,
)

OPERATOR_KINDS = ("mu", "ct", "wut", "wut_hat")
REQUESTS = ("ascent", "descent", "norms", "boundedness")
_DEFAULT_REQUESTS = ("boundedness", "ascent", "descent")


class ConfigError(ValueError):
    """Carries every problem found, as (path, message) pairs."""

    def __init__(self, problems):
        self.problems = tuple(problems)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.problems))


class _Problems:
    def __init__(self):
        self.items = []

    def add(self, path, message):
        self.items.append((path, message))

    def raise_if_any(self):
        if self.items:
            raise ConfigError(self.items)


_BAD = object()


@dataclass(frozen=True)
class InstanceConfig:
    """One fully validated analysis instance."""

    space: object
    transformation: object | None
    weight: object | None
    kind: str
    index: LorentzIndex
    requests: tuple
    horizon: int | None = None
    tolerance: float | None = None
    norm_function: SimpleFunction | None = None

    def spec(self) -> OperatorSpec:
        if self.kind == "mu":
            return OperatorSpec.multiplication(self.space, self.weight)
        if self.kind == "ct":
            return OperatorSpec.composition(self.space, self.transformation)
        if self.kind == "wut":
            return OperatorSpec.weighted(
                self.space, self.weight, self.transformation)
        return OperatorSpec.weighted_inner(
            self.space, self.weight, self.transformation)


# --------------------------------------------------------------------------
# scalar parsing

def _frac(raw, path, problems, positive=False):
    try:
        v = as_fraction(raw)
    except (TypeError, ValueError, ZeroDivisionError):
        problems.add(path, f"not an exact rational: {raw!r}")
        return _BAD
    if positive and v <= 0:
        problems.add(path, "weight must be positive")
        return _BAD
    return v


def _endpoint(raw, path, problems):
    if raw in ("inf", "-inf", None):
        return None
    return _frac(raw, path, problems)


def _interval(raw, path, problems):
    if not (isinstance(raw, list) and len(raw) == 2):
        problems.add(path, "an interval is a two-element list [lo, hi]")
        return _BAD
    lo = _endpoint(raw[0], f"{path}[0]", problems)
    hi = _endpoint(raw[1], f"{path}[1]", problems)
    if lo is _BAD or hi is _BAD:
        return _BAD
    if raw[0] == "inf":
        problems.add(path, "lower endpoint cannot be +inf")
        return _BAD
    if raw[1] == "-inf":
        problems.add(path, "upper endpoint cannot be -inf")
        return _BAD
    if lo is not None and hi is not None and lo >= hi:
        problems.add(path, f"empty interval: {raw[0]} >= {raw[1]}")
        return _BAD
    return (lo, hi)


def _intervals(raw, path, problems):
    if not isinstance(raw, list) or not raw:
        problems.add(path, "expected a nonempty list of intervals")
        return _BAD
    pieces = [_interval(r, f"{path}[{i}]", problems) for i, r in enumerate(raw)]
    if any(p is _BAD for p in pieces):
        return _BAD
    return IntervalUnion.make(pieces)


def _int(raw, path, problems, minimum=None):
    if not isinstance(raw, int) or isinstance(raw, bool):
        problems.add(path, f"expected an integer, got {raw!r}")
        return _BAD
    if minimum is not None and raw < minimum:
        problems.add(path, f"must be at least {minimum}")
        return _BAD
    return raw


def _table(data, key, path, problems, required=True):
    v = data.get(key)
    if v is None:
        if required:
            problems.add(path, f"missing section or key: {key}")
        return None
    if not isinstance(v, dict):
        problems.add(f"{path}.{key}", "expected a table")
        return None
    return v


# --------------------------------------------------------------------------
# engines

def _parse_space(data, problems):
    sec = _table(data, "space", "space", problems)
    if sec is None:
        return None
    engine = sec.get("engine")
    if engine == "finite":
        atoms = _table(sec, "atoms", "space", problems)
        if atoms is None:
            return None
        weights = {}
        ok = True
        for name, w in atoms.items():
            v = _frac(w, f"space.atoms.{name}", problems, positive=True)
            ok = ok and v is not _BAD
            weights[name] = v
        if not ok or not weights:
            if not weights:
                problems.add("space.atoms", "at least one atom is required")
            return None
        return FiniteAtomicSpace.of(weights)
    if engine == "countable":
        thr = _int(sec.get("threshold", 0), "space.threshold", problems, 0)
        tail = _frac(sec.get("tail_weight", "1"), "space.tail_weight",
                     problems, positive=True)
        exc = {}
        for k, w in (sec.get("exceptional") or {}).items():
            try:
                n = int(k)
            except ValueError:
                problems.add(f"space.exceptional.{k}", "keys must be integers")
                continue
            v = _frac(w, f"space.exceptional.{k}", problems, positive=True)
            if v is not _BAD:
                exc[n] = v
        if thr is _BAD or tail is _BAD:
            return None
        bad = [n for n in exc if not 1 <= n <= thr]
        if bad:
            problems.add("space.exceptional",
                         f"exceptional indices must lie in 1..threshold: {bad}")
            return None
        return CountableAtomicSpace.of(thr, exc, tail)
    if engine == "interval":
        carrier = _intervals(sec.get("carrier"), "space.carrier", problems)
        if carrier is _BAD:
            return None
        raw_density = sec.get("density")
        if raw_density is None:
            return IntervalSpace.lebesgue(carrier)
        pieces = []
        for i, row in enumerate(raw_density):
            path = f"space.density[{i}]"
            if not (isinstance(row, list) and len(row) == 2):
                problems.add(path, "a density piece is [[lo, hi], value]")
                return None
            iv = _interval(row[0], path, problems)
            val = _frac(row[1], path, problems)
            if iv is _BAD or val is _BAD:
                return None
            if val < 0:
                problems.add(path, "density values must be nonnegative")
                return None
            pieces.append((iv, val))
        try:
            return IntervalSpace(carrier, PiecewiseConstant.make(pieces))
        except ValueError as e:
            problems.add("space.density", str(e))
            return None
    problems.add("space.engine",
                 f"engine must be finite, countable, or interval, got {engine!r}")
    return None


def _parse_transformation(data, space, problems):
    sec = _table(data, "transformation", "transformation", problems,
                 required=False)
    if sec is None:
        return None
    kind = sec.get("kind")
    if kind == "atom_map":
        if not isinstance(space, FiniteAtomicSpace):
            problems.add("transformation", "atom_map needs the finite engine")
            return None
        mapping = _table(sec, "mapping", "transformation", problems)
        if mapping is None:
            return None
        missing = [a for a in space.atoms if a not in mapping]
        stray = [a for a in mapping if a not in space.atoms]
        if missing or stray:
            if missing:
                problems.add("transformation.mapping",
                             f"unmapped atoms: {missing}")
            if stray:
                problems.add("transformation.mapping",
                             f"images of unknown atoms: {stray}")
            return None
        bad = [a for a, b in mapping.items() if b not in space.atoms]
        if bad:
            problems.add("transformation.mapping",
                         f"values must be atoms of the space: {bad}")
            return None
        return AtomMap.of(mapping)
    if kind == "tail_residue":
        if not isinstance(space, CountableAtomicSpace):
            problems.add("transformation",
                         "tail_residue needs the countable engine")
            return None
        thr = _int(sec.get("threshold", 0), "transformation.threshold",
                   problems, 0)
        modulus = _int(sec.get("modulus", 1), "transformation.modulus",
                       problems, 1)
        shifts = sec.get("shifts")
        if not isinstance(shifts, list) or any(
                not isinstance(s, int) or isinstance(s, bool) for s in shifts):
            problems.add("transformation.shifts", "expected a list of integers")
            return None
        exceptions = {}
        for k, img in (sec.get("exceptions") or {}).items():
            try:
                n = int(k)
            except ValueError:
                problems.add(f"transformation.exceptions.{k}",
                             "keys must be integers")
                continue
            img_v = _int(img, f"transformation.exceptions.{k}", problems, 1)
            if img_v is not _BAD:
                exceptions[n] = img_v
        if thr is _BAD or modulus is _BAD:
            return None
        if len(shifts) != modulus:
            problems.add("transformation.shifts",
                         f"need one shift per residue class (got {len(shifts)},"
                         f" modulus {modulus})")
            return None
        try:
            return TailResidueMap.make(thr, exceptions, modulus, shifts)
        except ValueError as e:
            problems.add("transformation", str(e))
            return None
    if kind == "piecewise_affine":
        if not isinstance(space, IntervalSpace):
            problems.add("transformation",
                         "piecewise_affine needs the interval engine")
            return None
        raw = sec.get("branches")
        if not isinstance(raw, list) or not raw:
            problems.add("transformation.branches",
                         "expected a nonempty list of [[lo, hi], a, b]")
            return None
        branches = []
        for i, row in enumerate(raw):
            path = f"transformation.branches[{i}]"
            if not (isinstance(row, list) and len(row) == 3):
                problems.add(path, "a branch is [[lo, hi], a, b]")
                return None
            iv = _interval(row[0], path, problems)
            a = _frac(row[1], f"{path}.a", problems)
            b = _frac(row[2], f"{path}.b", problems)
            if _BAD in (iv, a, b):
                return None
            branches.append((iv, a, b))
        try:
            return PiecewiseAffineMap.make(branches)
        except ValueError as e:
            problems.add("transformation.branches", str(e))
            return None
    problems.add("transformation.kind",
                 f"kind must be atom_map, tail_residue, or piecewise_affine, "
                 f"got {kind!r}")
    return None


def _parse_weight(data, space, problems):
    sec = _table(data, "weight", "weight", problems, required=False)
    if sec is None:
        return None
    kind = sec.get("kind")
    if kind == "finite":
        if not isinstance(space, FiniteAtomicSpace):
            problems.add("weight", "finite weights need the finite engine")
            return None
        values = _table(sec, "values", "weight", problems)
        if values is None:
            return None
        out = {}
        for name, v in values.items():
            if name not in space.atoms:
                problems.add(f"weight.values.{name}", "unknown atom")
                return None
            fv = _frac(v, f"weight.values.{name}", problems)
            if fv is _BAD:
                return None
            out[name] = fv
        return FiniteWeight.of(out)
    if kind == "tail":
        if not isinstance(space, CountableAtomicSpace):
            problems.add("weight", "tail weights need the countable engine")
            return None
        thr = _int(sec.get("threshold", 0), "weight.threshold", problems, 0)
        modulus = _int(sec.get("modulus", 1), "weight.modulus", problems, 1)
        classes_raw = sec.get("classes")
        if not isinstance(classes_raw, list) or not classes_raw:
            problems.add("weight.classes",
                         "expected a list of [a, b] pairs (value a + b*n)")
            return None
        classes = []
        for i, row in enumerate(classes_raw):
            path = f"weight.classes[{i}]"
            if not (isinstance(row, list) and len(row) == 2):
                problems.add(path, "a class is [a, b]")
                return None
            a = _frac(row[0], path, problems)
            b = _frac(row[1], path, problems)
            if _BAD in (a, b):
                return None
            classes.append((a, b))
        exceptional = {}
        for k, v in (sec.get("exceptional") or {}).items():
            try:
                n = int(k)
            except ValueError:
                problems.add(f"weight.exceptional.{k}", "keys must be integers")
                continue
            fv = _frac(v, f"weight.exceptional.{k}", problems)
            if fv is not _BAD:
                exceptional[n] = fv
        if thr is _BAD or modulus is _BAD:
            return None
        if len(classes) != modulus:
            problems.add("weight.classes",
                         f"need one class per residue (got {len(classes)}, "
                         f"modulus {modulus})")
            return None
        try:
            return TailWeight.make(thr, exceptional, modulus, classes)
        except ValueError as e:
            problems.add("weight", str(e))
            return None
    if kind == "affine":
        if not isinstance(space, IntervalSpace):
            problems.add("weight", "affine weights need the interval engine")
            return None
        raw = sec.get("pieces")
        if not isinstance(raw, list) or not raw:
            problems.add("weight.pieces",
                         "expected a nonempty list of [[lo, hi], alpha, beta]")
            return None
        pieces = []
        for i, row in enumerate(raw):
            path = f"weight.pieces[{i}]"
            if not (isinstance(row, list) and len(row) == 3):
                problems.add(path, "a piece is [[lo, hi], alpha, beta]")
                return None
            iv = _interval(row[0], path, problems)
            alpha = _frac(row[1], f"{path}.alpha", problems)
            beta = _frac(row[2], f"{path}.beta", problems)
            if _BAD in (iv, alpha, beta):
                return None
            pieces.append((iv, alpha, beta))
        try:
            return AffineWeight.make(pieces)
        except ValueError as e:
            problems.add("weight.pieces", str(e))
            return None
    problems.add("weight.kind",
                 f"kind must be finite, tail, or affine, got {kind!r}")
    return None


def _parse_engine_set(space, raw, path, problems):
    if isinstance(space, FiniteAtomicSpace):
        if not isinstance(raw, list):
            problems.add(path, "expected a list of atom names")
            return _BAD
        stray = [a for a in raw if a not in space.atoms]
        if stray:
            problems.add(path, f"unknown atoms: {stray}")
            return _BAD
        return AtomSet.of(raw)
    if isinstance(space, CountableAtomicSpace):
        if not isinstance(raw, list) or any(
                not isinstance(n, int) or isinstance(n, bool) or n < 1
                for n in raw):
            problems.add(path, "expected a list of positive integers")
            return _BAD
        return StructuredSet.of(raw)
    return _intervals(raw, path, problems)


def _parse_function(space, sec, path, problems):
    raw = sec.get("pieces")
    if not isinstance(raw, list) or not raw:
        problems.add(f"{path}.pieces",
                     "expected a nonempty list of [value, set]")
        return None
    pieces = []
    for i, row in enumerate(raw):
        row_path = f"{path}.pieces[{i}]"
        if not (isinstance(row, list) and len(row) == 2):
            problems.add(row_path, "a piece is [value, set]")
            return None
        value = _frac(row[0], row_path, problems)
        where = _parse_engine_set(space, row[1], row_path, problems)
        if value is _BAD or where is _BAD:
            return None
        pieces.append((value, where))
    try:
        return SimpleFunction.of(space, pieces)
    except ValueError as e:
        problems.add(path, str(e))
        return None


# --------------------------------------------------------------------------
# the entry points

def parse_config(text: str) -> InstanceConfig:
    """Parse and fully validate a config; raises ConfigError with every
    problem found (syntax errors carry tomli's line/column message)."""
    problems = _Problems()
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError([("syntax", str(e))]) from None

    space = _parse_space(data, problems)
    T = _parse_transformation(data, space, problems) if space else None
    u = _parse_weight(data, space, problems) if space else None

    op = _table(data, "operator", "operator", problems)
    kind = op.get("kind") if op else None
    if op is not None and kind not in OPERATOR_KINDS:
        problems.add("operator.kind",
                     f"kind must be one of {', '.join(OPERATOR_KINDS)}")
        kind = None
    if kind is not None and space is not None:
        needs_T = kind != "mu"
        needs_u = kind != "ct"
        if needs_T and "transformation" not in data:
            problems.add("transformation",
                         f"operator kind {kind} needs a transformation")
        if not needs_T and "transformation" in data:
            problems.add("transformation",
                         "multiplication operators take no transformation")
        if needs_u and "weight" not in data:
            problems.add("weight", f"operator kind {kind} needs a weight")
        if not needs_u and "weight" in data:
            problems.add("weight", "composition operators take no weight")

    lor = _table(data, "lorentz", "lorentz", problems)
    index = None
    if lor is not None:
        try:
            index = LorentzIndex.of(lor.get("p"), lor.get("q"))
        except (LorentzError, TypeError, ValueError) as e:
            problems.add("lorentz", str(e))

    requests = _DEFAULT_REQUESTS
    horizon = tolerance = norm_function = None
    ana = _table(data, "analysis", "analysis", problems, required=False)
    if ana is not None:
        raw_req = ana.get("requests")
        if raw_req is not None:
            if not isinstance(raw_req, list) or any(
                    r not in REQUESTS for r in raw_req):
                problems.add("analysis.requests",
                             f"requests must be among {', '.join(REQUESTS)}")
            else:
                requests = tuple(raw_req)
        if "horizon" in ana:
            h = _int(ana["horizon"], "analysis.horizon", problems, 0)
            horizon = None if h is _BAD else h
        if "tolerance" in ana:
            t = ana["tolerance"]
            if not isinstance(t, (int, float)) or isinstance(t, bool) or t <= 0:
                problems.add("analysis.tolerance",
                             "tolerance must be a positive number")
            else:
                tolerance = float(t)
        nf = ana.get("norm_function")
        if nf is not None and space is not None:
            if not isinstance(nf, dict):
                problems.add("analysis.norm_function", "expected a table")
            else:
                norm_function = _parse_function(
                    space, nf, "analysis.norm_function", problems)
    if "norms" in requests and norm_function is None:
        problems.add("analysis",
                     "a norms request needs [analysis.norm_function]")

    problems.raise_if_any()
    config = InstanceConfig(space, T, u, kind, index, requests, horizon,
                            tolerance, norm_function)
    try:
        config.spec()
    except ValueError as e:
        raise ConfigError([("operator", str(e))]) from None
    return config


def load_config(path) -> InstanceConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# --------------------------------------------------------------------------
# serialization (canonical TOML; parse_config(serialize(c)) == c)

def _plain(v):
    return v.re if getattr(v, "im", 0) == 0 else v


def _fmt_frac(v) -> str:
    return f'"{v}"'


def _fmt_endpoint(v, side) -> str:
    if v is None:
        return '"-inf"' if side == "lo" else '"inf"'
    return f'"{v}"'


def _fmt_interval(piece) -> str:
    lo, hi = piece
    return f'[{_fmt_endpoint(lo, "lo")}, {_fmt_endpoint(hi, "hi")}]'


def _fmt_set(space, S) -> str:
    if isinstance(space, FiniteAtomicSpace):
        return "[" + ", ".join(f'"{a}"' for a in sorted(S, key=str)) + "]"
    if isinstance(space, CountableAtomicSpace):
        return "[" + ", ".join(str(n) for n in sorted(S.as_finite_set())) + "]"
    return "[" + ", ".join(_fmt_interval(p) for p in S.pieces) + "]"


def serialize(config: InstanceConfig) -> str:
    out = ["[space]"]
    space = config.space
    if isinstance(space, FiniteAtomicSpace):
        out.append('engine = "finite"')
        out.append("[space.atoms]")
        for a in space.atoms:
            out.append(f'"{a}" = {_fmt_frac(space.weight(a))}')
    elif isinstance(space, CountableAtomicSpace):
        out.append('engine = "countable"')
        out.append(f"threshold = {space.threshold}")
        out.append(f"tail_weight = {_fmt_frac(space.tail_weight)}")
        plain = {n: w for n, w in space.exceptional.items()
                 if w != space.tail_weight}
        if plain:
            out.append("[space.exceptional]")
            for n in sorted(plain):
                out.append(f'"{n}" = {_fmt_frac(plain[n])}')
    else:
        out.append('engine = "interval"')
        out.append("carrier = ["
                   + ", ".join(_fmt_interval(p) for p in space.carrier.pieces)
                   + "]")
        flat = [(iv, v) for iv, v in space.density.pieces]
        if not (len(flat) == len(space.carrier.pieces)
                and all(v == 1 for _, v in flat)
                and IntervalUnion.make([iv for iv, _ in flat]).ae_equal(
                    space.carrier)):
            rows = ", ".join(f"[{_fmt_interval(iv)}, {_fmt_frac(v)}]"
                             for iv, v in flat)
            out.append(f"density = [{rows}]")

    T = config.transformation
    if T is not None:
        out.append("")
        out.append("[transformation]")
        if isinstance(T, AtomMap):
            out.append('kind = "atom_map"')
            out.append("[transformation.mapping]")
            for a in space.atoms:
                out.append(f'"{a}" = "{T.at(a)}"')
        elif isinstance(T, TailResidueMap):
            out.append('kind = "tail_residue"')
            out.append(f"threshold = {T.threshold}")
            out.append(f"modulus = {T.modulus}")
            out.append("shifts = [" + ", ".join(map(str, T.shifts)) + "]")
            if T.exceptions:
                out.append("[transformation.exceptions]")
                for n, img in T.exceptions:
                    out.append(f'"{n}" = {img}')
        else:
            out.append('kind = "piecewise_affine"')
            rows = ", ".join(
                f"[{_fmt_interval(iv)}, {_fmt_frac(a)}, {_fmt_frac(b)}]"
                for iv, a, b in T.branches)
            out.append(f"branches = [{rows}]")

    u = config.weight
    if u is not None:
        out.append("")
        out.append("[weight]")
        if isinstance(u, FiniteWeight):
            out.append('kind = "finite"')
            out.append("[weight.values]")
            for a in space.atoms:
                v = u.at(a)
                out.append(f'"{a}" = {_fmt_frac(_plain(v))}')
        elif isinstance(u, TailWeight):
            out.append('kind = "tail"')
            out.append(f"threshold = {u.threshold}")
            out.append(f"modulus = {u.modulus}")
            rows = ", ".join(
                f"[{_fmt_frac(_plain(a))}, {_fmt_frac(_plain(b))}]"
                for a, b in u.classes)
            out.append(f"classes = [{rows}]")
            if u.exceptional:
                out.append("[weight.exceptional]")
                for n, v in u.exceptional:
                    out.append(f'"{n}" = {_fmt_frac(_plain(v))}')
        else:
            out.append('kind = "affine"')
            rows = ", ".join(
                f"[{_fmt_interval(iv)}, {_fmt_frac(a)}, {_fmt_frac(b)}]"
                for iv, a, b in u.pieces)
            out.append(f"pieces = [{rows}]")

    out.append("")
    out.append("[operator]")
    out.append(f'kind = "{config.kind}"')

    out.append("")
    out.append("[lorentz]")
    p = "inf" if config.index.p is None else str(config.index.p)
    q = "inf" if config.index.q is None else str(config.index.q)
    out.append(f'p = "{p}"')
    out.append(f'q = "{q}"')

    out.append("")
    out.append("[analysis]")
    out.append("requests = ["
               + ", ".join(f'"{r}"' for r in config.requests) + "]")
    if config.horizon is not None:
        out.append(f"horizon = {config.horizon}")
    if config.tolerance is not None:
        out.append(f"tolerance = {config.tolerance!r}")
    if config.norm_function is not None:
        out.append("[analysis.norm_function]")
        rows = ", ".join(
            f"[{_fmt_frac(_plain(v))}, {_fmt_set(space, S)}]"
            for v, S in config.norm_function.pieces)
        out.append(f"pieces = [{rows}]")
    return "\n".join(out) + "\n"
