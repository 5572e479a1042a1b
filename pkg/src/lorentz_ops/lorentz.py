"""Lorentz-space functionals: distribution, rearrangement, norms.

Simple functions carry complex-rational values on disjoint engine sets.
The decreasing rearrangement of a simple function is an exact rational
step function, so every comparison that feeds a verdict happens on
rationals; floats appear only in final norm values.

Admissible index pairs (p, q): 1 < p < ∞ with 1 <= q < ∞, or
1 < p <= ∞ with q = ∞ (``None`` encodes ∞ in both slots).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .rational import (
    INF,
    QQi,
    as_fraction,
    exact_pow,
    exact_root,
    ext_sum,
    is_inf,
    real_pow,
)
from .sets import AtomSet, IntervalUnion, StructuredSet
from .spaces import (
    EngineMismatch,
    measure_of,
    MeasurableSet,
)


class LorentzError(ValueError):
    pass


class NotRearrangeable(LorentzError):
    """The distribution function is infinite at every level (cannot occur
    for simple functions, kept for interface completeness)."""


@dataclass(frozen=True)
class LorentzIndex:
    """An admissible Lorentz index pair; ``None`` means infinity."""

    p: Fraction | None
    q: Fraction | None

    @staticmethod
    def of(p, q) -> "LorentzIndex":
        pv = None if p in (None, "inf") else as_fraction(p)
        qv = None if q in (None, "inf") else as_fraction(q)
        if pv is not None and pv <= 1:
            raise LorentzError("p must exceed 1")
        if qv is not None and qv < 1:
            raise LorentzError("q must be at least 1")
        if pv is None and qv is not None:
            raise LorentzError("p = infinity requires q = infinity")
        return LorentzIndex(pv, qv)

    @property
    def p_finite(self) -> bool:
        return self.p is not None

    @property
    def q_finite(self) -> bool:
        return self.q is not None

    def p_conjugate(self) -> Fraction:
        """p' with 1/p + 1/p' = 1 (p' = 1 when p = infinity)."""
        if self.p is None:
            return Fraction(1)
        return self.p / (self.p - 1)

    def __str__(self):
        fmt = lambda v: "inf" if v is None else str(v)
        return f"({fmt(self.p)},{fmt(self.q)})"


# --------------------------------------------------------------------------
# simple functions


@dataclass(frozen=True)
class SimpleFunction:
    """Finitely many complex-rational values on disjoint measurable sets.

    Zero-valued pieces are dropped; the function is 0 off the listed sets.
    """

    space: object
    pieces: tuple  # ((QQi value, MeasurableSet), ...)

    @staticmethod
    def of(space, pieces) -> "SimpleFunction":
        cleaned = []
        for value, S in pieces:
            v = value if isinstance(value, QQi) else QQi.of(value)
            if v.is_zero() or _set_is_empty(S):
                continue
            cleaned.append((v, S))
        for i in range(len(cleaned)):
            for j in range(i + 1, len(cleaned)):
                if not _set_is_empty(_set_intersect(cleaned[i][1], cleaned[j][1])):
                    raise LorentzError("simple-function pieces must be disjoint")
        return SimpleFunction(space, tuple(cleaned))

    @staticmethod
    def indicator(space, S, value=1) -> "SimpleFunction":
        return SimpleFunction.of(space, [(QQi.of(value), S)])

    @staticmethod
    def zero(space) -> "SimpleFunction":
        return SimpleFunction(space, ())

    def support(self) -> MeasurableSet:
        sets = [S for _, S in self.pieces]
        if not sets:
            return _empty_like(self.space)
        out = sets[0]
        for S in sets[1:]:
            out = _set_union(out, S)
        return out

    def scale(self, c) -> "SimpleFunction":
        cv = c if isinstance(c, QQi) else QQi.of(c)
        return SimpleFunction.of(
            self.space, [(cv * v, S) for v, S in self.pieces]
        )

    def add(self, other: "SimpleFunction") -> "SimpleFunction":
        """Pointwise sum via common refinement."""
        out = []
        osupp = other.support()
        ssupp = self.support()
        for v, S in self.pieces:
            rest = _set_difference(S, osupp)
            if not _set_is_empty(rest):
                out.append((v, rest))
        for w, R in other.pieces:
            rest = _set_difference(R, ssupp)
            if not _set_is_empty(rest):
                out.append((w, rest))
            for v, S in self.pieces:
                both = _set_intersect(S, R)
                if not _set_is_empty(both):
                    out.append((v + w, both))
        return SimpleFunction.of(self.space, out)

    def negate(self) -> "SimpleFunction":
        return SimpleFunction(self.space, tuple((-v, S) for v, S in self.pieces))

    def value_at_atom(self, atom) -> QQi:
        for v, S in self.pieces:
            if _set_contains_atom(S, atom):
                return v
        return QQi.of(0)


def _set_is_empty(S) -> bool:
    return S.is_empty()


def _set_union(A, B):
    return A.union(B)


def _set_intersect(A, B):
    return A.intersect(B)


def _set_difference(A, B):
    return A.difference(B)


def _set_contains_atom(S, atom) -> bool:
    if isinstance(S, AtomSet):
        return atom in S.atoms
    if isinstance(S, StructuredSet):
        return S.contains(atom)
    raise EngineMismatch("pointwise values only exist on atomic engines")


def _empty_like(space):
    from .spaces import CountableAtomicSpace, FiniteAtomicSpace, IntervalSpace

    if isinstance(space, FiniteAtomicSpace):
        return AtomSet.of(())
    if isinstance(space, CountableAtomicSpace):
        return StructuredSet.empty()
    if isinstance(space, IntervalSpace):
        return IntervalUnion.empty()
    raise EngineMismatch(f"unknown space {space!r}")


# --------------------------------------------------------------------------
# distribution and rearrangement


def distribution(h: SimpleFunction, s) -> Fraction:
    """μ_h(s) = μ({|h| > s}); Fraction or INF.  s is a nonnegative rational."""
    s = as_fraction(s)
    if s < 0:
        raise LorentzError("levels are nonnegative")
    s2 = s * s
    return ext_sum(
        measure_of(h.space, S) for v, S in h.pieces if v.abs2() > s2
    )


def is_zero_ae(h: SimpleFunction) -> bool:
    """True iff μ({h != 0}) = 0."""
    return distribution(h, 0) == 0


@dataclass(frozen=True)
class StepFunction:
    """Nonincreasing step function on [0, ∞): value ``values[i]`` on
    [cuts[i-1], cuts[i]) (cuts[-1] read as 0) and ``tail`` on [cuts[-1], ∞)."""

    cuts: tuple  # strictly increasing positive Fractions
    values: tuple  # strictly decreasing positive Fractions, len == len(cuts)
    tail: Fraction = Fraction(0)

    @staticmethod
    def make(cuts, values, tail=Fraction(0)) -> "StepFunction":
        cuts = tuple(as_fraction(c) for c in cuts)
        values = tuple(as_fraction(v) for v in values)
        tail = as_fraction(tail)
        if len(cuts) != len(values):
            raise LorentzError("cuts and values must align")
        merged_c, merged_v = [], []
        for c, v in zip(cuts, values):
            if merged_v and merged_v[-1] == v:
                merged_c[-1] = c
                continue
            merged_c.append(c)
            merged_v.append(v)
        if merged_v and merged_v[-1] == tail:
            merged_c.pop()
            merged_v.pop()
        for a, b in zip(merged_c, merged_c[1:]):
            if a >= b:
                raise LorentzError("cuts must increase strictly")
        for a, b in zip(merged_v, merged_v[1:]):
            if a <= b:
                raise LorentzError("step values must decrease")
        if merged_v and merged_v[-1] <= tail:
            raise LorentzError("tail must sit below the last step")
        return StepFunction(tuple(merged_c), tuple(merged_v), tail)

    @staticmethod
    def zero() -> "StepFunction":
        return StepFunction((), (), Fraction(0))

    def at(self, t) -> Fraction:
        t = as_fraction(t)
        if t < 0:
            raise LorentzError("step functions live on [0, ∞)")
        prev = Fraction(0)
        for c, v in zip(self.cuts, self.values):
            if prev <= t < c:
                return v
            prev = c
        return self.tail

    def first_value(self) -> Fraction:
        """The essential sup, f(0+)."""
        return self.values[0] if self.values else self.tail

    def integral_upto(self, t) -> Fraction:
        """∫_0^t f, exact."""
        t = as_fraction(t)
        total = Fraction(0)
        prev = Fraction(0)
        for c, v in zip(self.cuts, self.values):
            if t <= c:
                return total + v * (t - prev)
            total += v * (c - prev)
            prev = c
        return total + self.tail * (t - prev)

    def scale_values(self, c) -> "StepFunction":
        c = as_fraction(c)
        if c < 0:
            raise LorentzError("scaling factor must be nonnegative")
        if c == 0:
            return StepFunction.zero()
        return StepFunction(
            self.cuts, tuple(c * v for v in self.values), c * self.tail
        )


def rearrangement(h: SimpleFunction) -> StepFunction:
    """Decreasing rearrangement h* of a simple function, exact."""
    weights: dict[Fraction, object] = {}
    for v, S in h.pieces:
        lvl2 = v.abs2()
        m = measure_of(h.space, S)
        prev = weights.get(lvl2, Fraction(0))
        weights[lvl2] = INF if (is_inf(m) or is_inf(prev)) else prev + m
    levels = sorted(weights, reverse=True)
    cuts, values = [], []
    acc = Fraction(0)
    for lvl2 in levels:
        w = weights[lvl2]
        if w == 0:
            continue
        lvl = exact_root(lvl2, 2)
        if lvl is None:
            raise LorentzError(
                "rearrangement levels must be rational; use values with "
                "rational modulus"
            )
        if is_inf(w):
            return StepFunction.make(cuts, values, tail=lvl)
        acc += w
        cuts.append(acc)
        values.append(lvl)
    return StepFunction.make(cuts, values)


def average_function(f: StepFunction, t) -> Fraction:
    """f**(t) = (1/t)∫_0^t f, exact for rational t > 0."""
    t = as_fraction(t)
    if t <= 0:
        raise LorentzError("the average function is defined for t > 0")
    return f.integral_upto(t) / t


def average_pieces(f: StepFunction):
    """Piecewise form of f**: on each step cell, f**(t) = a + b/t.

    Yields (lo, hi, a, b) with hi = None on the last unbounded cell.
    """
    prev = Fraction(0)
    running = Fraction(0)  # ∫_0^prev f
    for c, v in zip(f.cuts, f.values):
        yield (prev, c, v, running - v * prev)
        running += v * (c - prev)
        prev = c
    yield (prev, None, f.tail, running - f.tail * prev)


# --------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormResult:
    """A norm value: float ``value``; ``power`` is the exact q-th power when
    one exists (for q = ∞, the exact value itself); ``diverges`` marks +∞."""

    value: float
    power: Fraction | None = None
    diverges: bool = False

    @staticmethod
    def zero() -> "NormResult":
        return NormResult(0.0, Fraction(0))

    @staticmethod
    def infinite() -> "NormResult":
        return NormResult(math.inf, None, True)

    def exact_value(self, q: Fraction | None):
        """Exact rational value when recoverable from the stored power."""
        if self.diverges or self.power is None:
            return None
        if q is None:
            return self.power
        return exact_pow(self.power, 1 / q)

    def close_to(self, other: "NormResult", rel: float = 1e-9) -> bool:
        if self.diverges or other.diverges:
            return self.diverges == other.diverges
        a, b = self.value, other.value
        return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def _finalise(q: Fraction, power_exact, power_float: float) -> NormResult:
    if power_exact is not None:
        return NormResult(real_pow(power_exact, 1 / q), power_exact)
    return NormResult(power_float ** (1.0 / float(q)), None)


def quasi_norm(h: SimpleFunction, index: LorentzIndex) -> NormResult:
    """||h||_(pq) computed from h* in closed form (always exact pieces)."""
    f = rearrangement(h)
    return step_quasi_norm(f, index)


def step_quasi_norm(f: StepFunction, index: LorentzIndex) -> NormResult:
    p, q = index.p, index.q
    if not f.cuts and f.tail == 0:
        return NormResult.zero()
    if q is None:
        return _sup_norm_of_step(f, p)
    # q < ∞ (hence p < ∞): (q/p)∫ t^{q/p-1} f*(t)^q dt, integrated stepwise
    if f.tail != 0:
        return NormResult.infinite()
    s = q / p
    power_exact: Fraction | None = Fraction(0)
    power_float = 0.0
    prev = Fraction(0)
    for c, v in zip(f.cuts, f.values):
        vq = exact_pow(v, q)
        hi = exact_pow(c, s)
        lo = exact_pow(prev, s) if prev > 0 else Fraction(0)
        term_float = real_pow(v, q) * (real_pow(c, s) - (real_pow(prev, s) if prev > 0 else 0.0))
        power_float += term_float
        if power_exact is not None and None not in (vq, hi) and (prev == 0 or lo is not None):
            power_exact += vq * (hi - lo)
        else:
            power_exact = None
        prev = c
    return _finalise(q, power_exact, power_float)


def _sup_norm_of_step(f: StepFunction, p: Fraction | None) -> NormResult:
    """sup_t t^{1/p} f(t) for a nonincreasing step function."""
    if p is None:
        v = f.first_value()
        return NormResult(float(v), v)
    if f.tail != 0:
        return NormResult.infinite()
    best_exact: Fraction | None = Fraction(0)
    best_float = 0.0
    for c, v in zip(f.cuts, f.values):
        cand_f = real_pow(c, 1 / p) * float(v)
        if cand_f > best_float:
            best_float = cand_f
        ce = exact_pow(c, 1 / p)
        if best_exact is not None and ce is not None:
            cand = ce * v
            if cand > best_exact:
                best_exact = cand
        else:
            best_exact = None
    return NormResult(best_float if best_exact is None else float(best_exact), best_exact)


def norm(
    h: SimpleFunction,
    index: LorentzIndex,
    rel_tol: float = 1e-12,
    force_quadrature: bool = False,
) -> NormResult:
    """||h||_pq via the maximal (average) function h**.

    Exact closed forms when q is a positive integer (term-by-term binomial
    integration, logarithmic terms evaluated in floats); otherwise adaptive
    quadrature on each breakpoint cell to ``rel_tol``.
    """
    f = rearrangement(h)
    return step_norm(f, index, rel_tol=rel_tol, force_quadrature=force_quadrature)


def step_norm(
    f: StepFunction,
    index: LorentzIndex,
    rel_tol: float = 1e-12,
    force_quadrature: bool = False,
) -> NormResult:
    p, q = index.p, index.q
    if not f.cuts and f.tail == 0:
        return NormResult.zero()
    if f.tail != 0 and p is not None:
        return NormResult.infinite()
    if q is None:
        return _sup_norm_of_average(f, p)
    # q, p finite from here on (tail = 0)
    s = q / p
    use_closed = q.denominator == 1 and not force_quadrature
    power_exact: Fraction | None = Fraction(0)
    power_float = 0.0
    for lo, hi, a, b in average_pieces(f):
        if a == 0 and b == 0:
            continue
        if hi is None and a != 0:
            return NormResult.infinite()
        if use_closed:
            exact_term, float_term = _closed_cell(lo, hi, a, b, s, q)
        else:
            exact_term, float_term = None, _quad_cell(lo, hi, a, b, s, q, rel_tol)
        power_float += float_term
        if power_exact is not None and exact_term is not None:
            power_exact += exact_term
        else:
            power_exact = None
    factor = s  # q/p
    if power_exact is not None:
        power_exact *= factor
    power_float *= float(factor)
    return _finalise(q, power_exact, power_float)


def _closed_cell(lo, hi, a, b, s: Fraction, q: Fraction):
    """∫_lo^hi t^{s-1}(a + b/t)^q dt for integer q, exact when no logs.

    Returns (exact or None, float)."""
    n = q.numerator
    exact_total: Fraction | None = Fraction(0)
    float_total = 0.0
    for j in range(n + 1):
        coeff = math.comb(n, j) * a ** (n - j) * b**j
        if coeff == 0:
            continue
        e = s - j  # exponent of t inside, antiderivative t^e/e or ln
        if e == 0:
            if hi is None:
                return None, math.inf
            float_total += float(coeff) * (math.log(float(hi)) - math.log(float(lo)))
            exact_total = None
            continue
        hi_pow_exact = None if hi is None else exact_pow(hi, e)
        lo_pow_exact = exact_pow(lo, e) if lo > 0 else (Fraction(0) if e > 0 else None)
        if hi is None:
            if e > 0:
                return None, math.inf
            hi_f = 0.0
            hi_pow_exact = Fraction(0)
        else:
            hi_f = real_pow(hi, e)
        if lo == 0:
            if e < 0:
                return None, math.inf  # divergent at 0 (cannot occur: b=0 cell)
            lo_f = 0.0
            lo_pow_exact = Fraction(0)
        else:
            lo_f = real_pow(lo, e)
        float_total += float(coeff) * (hi_f - lo_f) / float(e)
        if exact_total is not None and None not in (hi_pow_exact, lo_pow_exact):
            exact_total += coeff * (hi_pow_exact - lo_pow_exact) / e
        else:
            exact_total = None
    return exact_total, float_total


def _quad_cell(lo, hi, a, b, s: Fraction, q: Fraction, rel_tol: float) -> float:
    from scipy.integrate import quad

    sf, qf, af, bf = float(s), float(q), float(a), float(b)

    def integrand(t):
        return t ** (sf - 1.0) * (af + bf / t) ** qf

    lo_f = float(lo)
    hi_f = math.inf if hi is None else float(hi)
    val, _err = quad(integrand, lo_f, hi_f, epsrel=rel_tol, limit=200)
    return val


def _sup_norm_of_average(f: StepFunction, p: Fraction | None) -> NormResult:
    """sup_t t^{1/p} f**(t).  Candidates sit at the cell endpoints because
    t^{1/p}(a + b/t) is endpoint-maximal on each cell."""
    if p is None:
        v = f.first_value()
        return NormResult(float(v), v)
    if f.tail != 0:
        return NormResult.infinite()
    best_exact: Fraction | None = Fraction(0)
    best_float = 0.0
    exact_ok = True
    for lo, hi, a, b in average_pieces(f):
        if hi is None:
            if a != 0:
                return NormResult.infinite()
            continue  # t^{1/p-1}·b decreases to 0; left endpoint covered below
        for t in (lo, hi):
            if t == 0:
                continue
            avg = a + b / t
            tf = real_pow(t, 1 / p)
            cand_f = tf * float(avg)
            if cand_f > best_float:
                best_float = cand_f
            te = exact_pow(t, 1 / p)
            if te is None:
                exact_ok = False
            elif exact_ok and best_exact is not None and te * avg > best_exact:
                best_exact = te * avg
    if not exact_ok:
        best_exact = None
    return NormResult(
        best_float if best_exact is None else float(best_exact), best_exact
    )


def char_norm_closed_form(space, A: MeasurableSet, index: LorentzIndex) -> NormResult:
    """||χ_A||_pq = (p')^{1/q} μ(A)^{1/p} (q < ∞) or μ(A)^{1/p} (q = ∞)."""
    m = measure_of(space, A)
    if is_inf(m):
        if index.p is None:
            return NormResult(1.0, Fraction(1))
        return NormResult.infinite()
    if m == 0:
        return NormResult.zero()
    p, q = index.p, index.q
    if q is None:
        if p is None:
            return NormResult(1.0, Fraction(1))
        val_exact = exact_pow(m, 1 / p)
        return NormResult(
            real_pow(m, 1 / p) if val_exact is None else float(val_exact),
            val_exact,
        )
    pp = index.p_conjugate()
    power = exact_pow(m, q / p)
    if power is not None:
        power *= pp
        return NormResult(real_pow(power, 1 / q), power)
    val = real_pow(pp, 1 / q) * real_pow(m, 1 / p)
    return NormResult(val, None)
