"""Kernel/range chains of operator powers.

On finite atomic spaces the operator is a matrix over the complex
rationals, so ascent and descent are decided exactly by rank
stabilization — this is the brute-force oracle that theorem-level
criteria are checked against.

On infinite engines kernels of powers are probed through the set
identity

    {x : (O^k f)(x) != 0} = T^{-k}(supp f) ∩ {weight factors all nonzero},

which holds pointwise for every simple f because a product of complex
values vanishes only when a factor does.  Probing indicator generators
against this identity can certify strict kernel growth (hence lower
bounds on ascent) but never equality, so the horizon report is a lower
bound or an explicit unknown — exactness on infinite engines is the
business of the theorem checkers, not of this module.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

from .lorentz import SimpleFunction
from .operators import OperatorSpec, matrix_rows, weight_support
from .rational import QQi
from .sets import AtomSet, IntervalUnion, StructuredSet
from .spaces import (
    CountableAtomicSpace,
    FiniteAtomicSpace,
    IntervalSpace,
    measure_of,
    preimage,
)

DEFAULT_HORIZON = 6


def probe_horizon(explicit: int | None = None) -> int:
    if explicit is not None:
        return explicit
    return int(os.environ.get("LORENTZ_OPS_HORIZON", DEFAULT_HORIZON))


# --------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class OrderVerdict:
    """Outcome of an ascent/descent question.

    kind: exact | at_most | at_least | infinite | symbolic_infinite |
    unknown | refused.  ``value`` is the bound (horizon for unknown),
    ``note`` says why in one sentence.
    """

    kind: str
    value: int | None = None
    note: str = ""

    def __str__(self):
        if self.kind == "exact":
            body = f"exactly {self.value}"
        elif self.kind == "at_most":
            body = f"at most {self.value}"
        elif self.kind == "at_least":
            body = f"at least {self.value}"
        elif self.kind == "infinite":
            body = "infinite"
        elif self.kind == "symbolic_infinite":
            body = "infinite (no finite stage works)"
        elif self.kind == "unknown":
            body = f"unknown up to horizon {self.value}"
        else:
            body = "refused"
        return body if not self.note else f"{body}: {self.note}"

    def agrees_with_exact(self, k: int) -> bool:
        """Whether this verdict is consistent with the true value k."""
        if self.kind == "exact":
            return self.value == k
        if self.kind == "at_most":
            return k <= self.value
        if self.kind == "at_least":
            return k >= self.value
        if self.kind == "unknown":
            return True
        return False


def exact(k: int, note: str = "") -> OrderVerdict:
    return OrderVerdict("exact", k, note)


def at_most(k: int, note: str = "") -> OrderVerdict:
    return OrderVerdict("at_most", k, note)


def at_least(k: int, note: str = "") -> OrderVerdict:
    return OrderVerdict("at_least", k, note)


def infinite(note: str = "") -> OrderVerdict:
    return OrderVerdict("infinite", None, note)


def symbolic_infinite(note: str = "") -> OrderVerdict:
    return OrderVerdict("symbolic_infinite", None, note)


def unknown(horizon: int, note: str = "") -> OrderVerdict:
    return OrderVerdict("unknown", horizon, note)


def refused(note: str) -> OrderVerdict:
    return OrderVerdict("refused", None, note)


# --------------------------------------------------------------------------
# exact matrices over the complex rationals

_ZERO = QQi.of(0)
_ONE = QQi.of(1)


@dataclass(frozen=True)
class Matrix:
    rows: tuple  # tuple of tuples of QQi

    @staticmethod
    def of(rows) -> "Matrix":
        rs = tuple(tuple(v if isinstance(v, QQi) else QQi.of(v) for v in r) for r in rows)
        if rs and any(len(r) != len(rs[0]) for r in rs):
            raise ValueError("ragged matrix")
        return Matrix(rs)

    @staticmethod
    def identity(n: int) -> "Matrix":
        return Matrix(
            tuple(
                tuple(_ONE if i == j else _ZERO for j in range(n))
                for i in range(n)
            )
        )

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __mul__(self, other: "Matrix") -> "Matrix":
        n, m = self.shape
        m2, p = other.shape
        if m != m2:
            raise ValueError("shape mismatch")
        cols = tuple(zip(*other.rows)) if other.rows else ()
        out = []
        for row in self.rows:
            out.append(
                tuple(
                    sum(
                        (a * b for a, b in zip(row, col) if not a.is_zero()),
                        _ZERO,
                    )
                    for col in cols
                )
            )
        return Matrix(tuple(out))

    def power(self, k: int) -> "Matrix":
        n, m = self.shape
        if n != m:
            raise ValueError("powers need a square matrix")
        out = Matrix.identity(n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def apply(self, vec):
        return tuple(
            sum((a * v for a, v in zip(row, vec) if not a.is_zero()), _ZERO)
            for row in self.rows
        )

    def hstack(self, other: "Matrix") -> "Matrix":
        if len(self.rows) != len(other.rows):
            raise ValueError("row count mismatch")
        return Matrix(tuple(a + b for a, b in zip(self.rows, other.rows)))

    def rank(self) -> int:
        return len(_rref([list(r) for r in self.rows])[1])

    def null_space(self):
        """Basis of {v : Av = 0}, exact."""
        n_rows, n_cols = self.shape
        rref, pivots = _rref([list(r) for r in self.rows])
        pivot_cols = {c: i for i, c in enumerate(pivots)}
        free = [c for c in range(n_cols) if c not in pivot_cols]
        basis = []
        for f in free:
            vec = [_ZERO] * n_cols
            vec[f] = _ONE
            for c, i in pivot_cols.items():
                vec[c] = -rref[i][f]
            basis.append(tuple(vec))
        return basis


def _rref(rows):
    """Reduced row echelon form in place; returns (rows, pivot columns)."""
    if not rows:
        return rows, []
    n_cols = len(rows[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        pivot = next(
            (i for i in range(r, len(rows)) if not rows[i][c].is_zero()), None
        )
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = _ONE / rows[r][c]
        rows[r] = [inv * v for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


# --------------------------------------------------------------------------
# finite-space oracle


def operator_matrix(spec: OperatorSpec) -> Matrix:
    _atoms, rows = matrix_rows(spec)
    return Matrix.of(rows)


@dataclass(frozen=True)
class RankChain:
    """Exact ranks of successive powers, long enough to show the
    stabilization point."""

    ranks: tuple  # rank(A^0), rank(A^1), ...

    def stabilization(self) -> int:
        for j in range(len(self.ranks) - 1):
            if self.ranks[j] == self.ranks[j + 1]:
                return j
        raise AssertionError("chain too short for stabilization")


def rank_chain(spec: OperatorSpec) -> RankChain:
    A = operator_matrix(spec)
    n = A.shape[0]
    ranks = [n]
    power = Matrix.identity(n)
    for _ in range(n + 1):
        power = power * A
        ranks.append(power.rank())
        if len(ranks) >= 2 and ranks[-1] == ranks[-2]:
            break
    return RankChain(tuple(ranks))


def finite_ascent_descent(spec: OperatorSpec):
    """(ascent, descent) on a finite atomic space, both exact.

    Ascent: first j with ker A^j = ker A^{j+1}, certified by kernel
    dimensions plus the inclusion ker A^j ⊆ ker A^{j+1}.  Descent: first
    j with ran A^j = ran A^{j+1}, certified by an augmented-rank
    equality.  Each is verified at j itself, not inferred from the other.
    """
    A = operator_matrix(spec)
    n = A.shape[0]
    powers = [Matrix.identity(n)]
    for _ in range(n + 2):
        powers.append(powers[-1] * A)
    asc = None
    for j in range(n + 1):
        if n - powers[j].rank() == n - powers[j + 1].rank():
            asc = j
            break
    desc = None
    for j in range(n + 1):
        # ran A^{j+1} ⊆ ran A^j always; equality iff every column of A^j
        # already lies in the span of the columns of A^{j+1}
        if powers[j + 1].hstack(powers[j]).rank() == powers[j + 1].rank():
            desc = j
            break
    if asc is None or desc is None:
        raise AssertionError("rank chain failed to stabilize within dimension")
    return exact(asc, "kernel chain stabilized"), exact(
        desc, "range chain stabilized"
    )


def kernel_dimension(spec: OperatorSpec, k: int) -> int:
    A = operator_matrix(spec)
    n = A.shape[0]
    return n - A.power(k).rank()


def kernel_basis_functions(spec: OperatorSpec, k: int):
    """Simple functions spanning ker(O^k) on a finite space."""
    space = spec.space
    A = operator_matrix(spec)
    basis = A.power(k).null_space()
    atoms = space.atoms
    out = []
    for vec in basis:
        pieces = {}
        for atom, v in zip(atoms, vec):
            if not v.is_zero():
                pieces.setdefault(v, []).append(atom)
        out.append(
            SimpleFunction.of(
                space, [(v, AtomSet.of(ats)) for v, ats in pieces.items()]
            )
        )
    return out


# --------------------------------------------------------------------------
# kernels of powers through the set identity (all engines)


def surviving_weight_set(spec: OperatorSpec, k: int):
    """The set where every weight factor of the k-th power is nonzero.

    For the outer weighted operator the factors are u(T x), …, u(T^k x);
    for the inner one u(x), …, u(T^{k-1} x); for multiplication the
    single factor u; composition has none.
    """
    space = spec.space
    whole = space.whole_set()
    if spec.kind == "ct" or k == 0:
        return whole
    supp = weight_support(space, spec.u)
    if spec.kind == "mu":
        return supp
    indices = range(1, k + 1) if spec.kind == "wut" else range(0, k)
    out = whole
    for i in indices:
        out = out.intersect(preimage(spec.T, supp, i) if i else supp)
    return out


def power_nonzero_set(spec: OperatorSpec, f: SimpleFunction, k: int):
    """{x : (O^k f)(x) != 0}, exactly, for any simple f."""
    supp_f = f.support()
    if k == 0:
        return supp_f
    base = preimage(spec.T, supp_f, k) if spec.composes() else supp_f
    return base.intersect(surviving_weight_set(spec, k))


def kernel_membership(spec: OperatorSpec, f: SimpleFunction, k: int) -> bool:
    """Whether O^k f = 0 almost everywhere."""
    return measure_of(spec.space, power_nonzero_set(spec, f, k)) == 0


# --------------------------------------------------------------------------
# horizon probe on infinite engines


@dataclass(frozen=True)
class KernelSeparation:
    """A witness that ker O^{k+1} strictly contains ker O^k."""

    k: int
    witness_set: object  # G with chi_G in ker O^{k+1} \ ker O^k

    def __str__(self):
        return f"chi_{self.witness_set} separates powers {self.k} and {self.k + 1}"


@dataclass(frozen=True)
class HorizonReport:
    horizon: int
    separations: tuple  # KernelSeparation, ascending k
    verdict: OrderVerdict

    def __str__(self):
        lines = [str(self.verdict)]
        lines.extend(f"  {s}" for s in self.separations)
        return "\n".join(lines)


def generator_sets(spec: OperatorSpec, horizon: int):
    """Indicator generators used to probe kernel growth."""
    space = spec.space
    if isinstance(space, FiniteAtomicSpace):
        return [AtomSet.of([a]) for a in space.atoms]
    if isinstance(space, CountableAtomicSpace):
        bound = 32 + space.threshold
        if spec.T is not None:
            bound += (spec.T.threshold + spec.T.max_shift() * (horizon + 1))
        return [StructuredSet.of([n]) for n in range(1, bound + 1)]
    if isinstance(space, IntervalSpace):
        carrier = space.carrier
        out = []
        seen = set()

        def push(candidate: IntervalUnion):
            live = candidate.intersect(carrier)
            if live.is_empty() or not live.is_bounded():
                return
            if measure_of(space, live) == 0:
                return
            if live.pieces in seen:
                return
            seen.add(live.pieces)
            out.append(live)

        for j in range(13):
            push(
                IntervalUnion.interval(
                    Fraction(1, 2 ** (j + 1)), Fraction(1, 2**j)
                )
            )
        for m in range(-16, 16):
            push(IntervalUnion.interval(m, m + 1))
        cuts = set()
        for lo, hi in carrier.pieces:
            cuts.update(x for x in (lo, hi) if x is not None)
        for (lo, hi), _v in space.density.pieces:
            cuts.update(x for x in (lo, hi) if x is not None)
        if spec.T is not None:
            for (lo, hi), _a, _b in spec.T.branches:
                cuts.update(x for x in (lo, hi) if x is not None)
        ordered = sorted(cuts)
        for a, b in zip(ordered, ordered[1:]):
            push(IntervalUnion.interval(a, b))
        return out
    raise TypeError(f"unknown space {space!r}")


def horizon_chain(
    spec: OperatorSpec, horizon: int | None = None
) -> HorizonReport:
    """Probe strict kernel growth of powers with indicator generators.

    A separation at k proves ascent > k; absence of one proves nothing,
    so the verdict is a lower bound or unknown, never an exact value.
    """
    K = probe_horizon(horizon)
    gens = generator_sets(spec, K)
    seps = []
    for k in range(K):
        found = None
        for G in gens:
            g = SimpleFunction.indicator(spec.space, G)
            if kernel_membership(spec, g, k + 1) and not kernel_membership(
                spec, g, k
            ):
                found = KernelSeparation(k, G)
                break
        if found is not None:
            seps.append(found)
    if seps:
        low = max(s.k for s in seps) + 1
        verdict = at_least(
            low,
            f"indicator witnesses separate successive kernels (horizon {K})",
        )
    else:
        verdict = unknown(
            K, "no indicator generator separates successive kernels"
        )
    return HorizonReport(K, tuple(seps), verdict)
