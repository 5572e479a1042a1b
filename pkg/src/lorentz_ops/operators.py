"""Weight functions and the four operator kinds.

Four operators act on simple functions over one measure space:

* multiplication      ``M_u  f = u · f``
* composition         ``C_T  f = f ∘ T``
* weighted (outer)    ``W    f = (u ∘ T) · (f ∘ T)``
* weighted (inner)    ``Ŵ    f = u · (f ∘ T)``

Weights are engine-matched: finitely many complex-rational values on a
finite space, eventually affine-per-residue-class values on the counting
space, piecewise real-affine values on an interval space.  Points not
covered by an explicit piece carry the value 0.

``apply`` stays inside exact arithmetic and raises ``NonSimpleResult``
when an image genuinely is not a simple function (an affine weight factor
with nonzero slope over a set of positive measure); kernel and range
questions are handled elsewhere through set identities, so this is a
reporting boundary, not a correctness one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .lorentz import SimpleFunction
from .rational import INF, QQi, as_fraction, exact_root, is_inf
from .sets import AtomSet, IntervalUnion, StructuredSet
from .spaces import (
    CountableAtomicSpace,
    EngineMismatch,
    FiniteAtomicSpace,
    IntervalSpace,
    PiecewiseAffineMap,
    TailResidueMap,
    forward_image,
    maps_into_carrier,
    measure_of,
    preimage,
)


class OperatorError(ValueError):
    pass


class NonSimpleResult(OperatorError):
    """The operator image is not a simple function (affine weight factor
    of nonzero slope over a set of positive measure)."""


def _qqi(v) -> QQi:
    return v if isinstance(v, QQi) else QQi.of(v)


# --------------------------------------------------------------------------
# weight functions


@dataclass(frozen=True)
class FiniteWeight:
    """Complex-rational values on the atoms of a finite space; missing
    atoms carry 0."""

    values: dict

    @staticmethod
    def of(values: dict) -> "FiniteWeight":
        return FiniteWeight({a: _qqi(v) for a, v in values.items()})

    def at(self, atom) -> QQi:
        return self.values.get(atom, QQi.of(0))

    def __hash__(self):
        return hash(tuple(sorted((str(a), str(v)) for a, v in self.values.items())))


@dataclass(frozen=True)
class TailWeight:
    """Values on 1, 2, 3, …: explicit up to ``threshold``, then affine in
    the index on each residue class: n ↦ a_r + b_r·n for n ≡ r (mod m)."""

    threshold: int
    exceptional: tuple  # ((n, QQi), ...) for every n in 1..threshold
    modulus: int
    classes: tuple  # ((a, b), ...) one per residue 0..modulus-1

    @staticmethod
    def make(threshold: int, exceptional: dict, modulus: int, classes) -> "TailWeight":
        cls = tuple((_qqi(a), _qqi(b)) for a, b in classes)
        if modulus < 1 or len(cls) != modulus:
            raise OperatorError("need one (a, b) pair per residue class")
        exc = {int(n): _qqi(v) for n, v in exceptional.items()}
        if any(n < 1 for n in exc):
            raise OperatorError("weight indices start at 1")
        m = modulus
        for d in range(1, modulus + 1):
            if modulus % d:
                continue
            if all(cls[r] == cls[r % d] for r in range(modulus)):
                m, cls = d, cls[:d]
                break
        thr = max([threshold] + list(exc))
        filled = {}
        for n in range(1, thr + 1):
            a, b = cls[n % m]
            filled[n] = exc.get(n, a + b * QQi.of(n))
        while thr > 0:
            a, b = cls[thr % m]
            if filled[thr] == a + b * QQi.of(thr):
                del filled[thr]
                thr -= 1
            else:
                break
        return TailWeight(thr, tuple(sorted(filled.items())), m, cls)

    @staticmethod
    def constant(value) -> "TailWeight":
        return TailWeight.make(0, {}, 1, [(value, 0)])

    @staticmethod
    def identity_index() -> "TailWeight":
        """u(n) = n."""
        return TailWeight.make(0, {}, 1, [(0, 1)])

    def at(self, n: int) -> QQi:
        if n <= self.threshold:
            for k, v in self.exceptional:
                if k == n:
                    return v
        a, b = self.classes[n % self.modulus]
        return a + b * QQi.of(n)

    def is_index_affine(self) -> bool:
        """True when some class genuinely depends on the index."""
        return any(b != QQi.of(0) for _, b in self.classes)


@dataclass(frozen=True)
class AffineWeight:
    """Real piecewise-affine values on an interval carrier: α + βx on each
    listed piece, 0 elsewhere."""

    pieces: tuple  # (((lo, hi), alpha, beta), ...) disjoint, sorted

    @staticmethod
    def make(pieces) -> "AffineWeight":
        cleaned = []
        for (lo, hi), alpha, beta in pieces:
            a, b = as_fraction(alpha), as_fraction(beta)
            seg = IntervalUnion.interval(lo, hi)
            if seg.is_empty() or (a == 0 and b == 0):
                continue
            cleaned.append((seg.pieces[0], a, b))
        cleaned.sort(key=lambda t: (t[0][0] is not None, t[0][0]))
        for (l1, h1), (l2, _h2) in zip(
            [p[0] for p in cleaned], [p[0] for p in cleaned[1:]]
        ):
            if h1 is None or l2 is None or l2 < h1:
                raise OperatorError("affine weight pieces must not overlap")
        merged = []
        for piece in cleaned:
            if merged:
                (plo, phi), pa, pb = merged[-1]
                (lo, hi), a, b = piece
                if phi == lo and pa == a and pb == b:
                    merged[-1] = ((plo, hi), a, b)
                    continue
            merged.append(piece)
        return AffineWeight(tuple(merged))

    @staticmethod
    def constant_on(region: IntervalUnion, value) -> "AffineWeight":
        return AffineWeight.make([(p, value, 0) for p in region.pieces])

    @staticmethod
    def one_on(region: IntervalUnion) -> "AffineWeight":
        return AffineWeight.constant_on(region, 1)

    def at(self, x) -> Fraction:
        x = as_fraction(x)
        for (lo, hi), a, b in self.pieces:
            if (lo is None or lo <= x) and (hi is None or x <= hi):
                return a + b * x
        return Fraction(0)

    def covered(self) -> IntervalUnion:
        return IntervalUnion.make(list(p for p, _a, _b in self.pieces))


Weight = FiniteWeight | TailWeight | AffineWeight


def constant_weight(space, value=1):
    if isinstance(space, FiniteAtomicSpace):
        return FiniteWeight.of({a: value for a in space.atoms})
    if isinstance(space, CountableAtomicSpace):
        return TailWeight.constant(value)
    if isinstance(space, IntervalSpace):
        return AffineWeight.constant_on(space.carrier, value)
    raise EngineMismatch(f"unknown space {space!r}")


# --------------------------------------------------------------------------
# zero sets / supports


def _affine_root(a: QQi, b: QQi):
    """The unique n with a + b·n = 0, as a Fraction, or None."""
    if b.is_zero():
        return None
    if b.re != 0:
        n = -a.re / b.re
    else:
        n = -a.im / b.im
    if a.re + b.re * n == 0 and a.im + b.im * n == 0:
        return n
    return None


def weight_zero_set(space, u: Weight):
    """{u = 0} as an engine set (mod null on interval spaces)."""
    if isinstance(u, FiniteWeight):
        return AtomSet.of(a for a in space.atoms if u.at(a).is_zero())
    if isinstance(u, TailWeight):
        fin = {n for n in range(1, u.threshold + 1) if u.at(n).is_zero()}
        residues = set()
        for r, (a, b) in enumerate(u.classes):
            if a.is_zero() and b.is_zero():
                residues.add(r)
                continue
            root = _affine_root(a, b)
            if (
                root is not None
                and root.denominator == 1
                and root > u.threshold
                and root % u.modulus == r
            ):
                fin.add(int(root))
        return StructuredSet.make(u.modulus, u.threshold, fin, residues)
    if isinstance(u, AffineWeight):
        # pieces with a nonzero slope vanish only at a point (null);
        # everything off the listed pieces is 0 by convention
        nonzero = [p for p, a, b in u.pieces if not (a == 0 and b == 0)]
        return space.carrier.difference(IntervalUnion.make(nonzero))
    raise EngineMismatch(f"unknown weight {u!r}")


def weight_support(space, u: Weight):
    return space.whole_set().difference(weight_zero_set(space, u))


def weight_nonzero_ae(space, u: Weight) -> bool:
    return measure_of(space, weight_zero_set(space, u)) == 0


# --------------------------------------------------------------------------
# essential bounds of |u|^2


def _quad_coeffs(a: QQi, b: QQi):
    """|a + b·n|² = A n² + B n + C with rational A, B, C."""
    A = b.abs2()
    B = 2 * (a.re * b.re + a.im * b.im)
    C = a.abs2()
    return A, B, C


def _tail_class_members(S: StructuredSet, r: int, modulus: int, threshold: int):
    """Whether residue r (mod modulus) beyond max(threshold, S.threshold)
    belongs to S, plus that cutoff."""
    cut = max(threshold, S.threshold)
    probe = cut + 1 + ((r - cut - 1) % modulus)
    # probe ≡ r (mod modulus), probe > cut; membership beyond cut is
    # periodic with period lcm(modulus, S.modulus) — sample one period
    L = lcm(modulus, S.modulus)
    hits = [n for n in range(probe, probe + L, modulus) if S.contains(n)]
    return hits, cut, L


def ess_sup2(space, u: Weight, within=None):
    """Essential sup of |u|² over ``within`` (default: whole space),
    ignoring null sets.  Returns a Fraction, INF, or None for an
    effectively empty region."""
    region = within if within is not None else space.whole_set()
    if isinstance(u, FiniteWeight):
        vals = [u.at(a).abs2() for a in region]
        return max(vals) if vals else None
    if isinstance(u, TailWeight):
        if region.is_empty():
            return None
        best = None
        for n in region.members_upto(max(u.threshold, region.threshold)):
            v = u.at(n).abs2()
            best = v if best is None else max(best, v)
        for r, (a, b) in enumerate(u.classes):
            hits, cut, L = _tail_class_members(region, r, u.modulus, u.threshold)
            if not hits:
                continue
            if not b.is_zero():
                return INF
            v = a.abs2()
            best = v if best is None else max(best, v)
        return best
    if isinstance(u, AffineWeight):
        live = region.intersect(space.density.support())
        if live.is_empty():
            return None
        best = Fraction(0) if not live.subset_of(u.covered()) else None
        for piece, a, b in u.pieces:
            part = live.intersect(IntervalUnion(((piece),)))
            for lo, hi in part.pieces:
                if b == 0:
                    v = Fraction(a * a)
                    best = v if best is None else max(best, v)
                    continue
                if lo is None or hi is None:
                    return INF
                for x in (lo, hi):
                    v = (a + b * x) ** 2
                    best = v if best is None else max(best, v)
        return best
    raise EngineMismatch(f"unknown weight {u!r}")


def ess_inf2(space, u: Weight, within=None):
    """Essential inf of |u|² over ``within`` (default: whole space).
    Returns a Fraction or None for an effectively empty region."""
    region = within if within is not None else space.whole_set()
    if isinstance(u, FiniteWeight):
        vals = [u.at(a).abs2() for a in region]
        return min(vals) if vals else None
    if isinstance(u, TailWeight):
        if region.is_empty():
            return None
        best = None

        def consider(v):
            nonlocal best
            best = v if best is None else min(best, v)

        for n in region.members_upto(max(u.threshold, region.threshold)):
            consider(u.at(n).abs2())
        for r, (a, b) in enumerate(u.classes):
            hits, cut, L = _tail_class_members(region, r, u.modulus, u.threshold)
            if not hits:
                continue
            if b.is_zero():
                consider(a.abs2())
                continue
            A, B, C = _quad_coeffs(a, b)
            vertex = -B / (2 * A)
            for base in hits:
                # members are base + k·L for k ≥ 0; quadratic in k, so the
                # minimum sits at the ends of the window around the vertex
                kv = (vertex - base) / L
                cands = {0, max(0, math.floor(kv)), max(0, math.ceil(kv))}
                for k in cands:
                    n = base + k * L
                    consider(A * n * n + B * n + C)
        return best
    if isinstance(u, AffineWeight):
        live = region.intersect(space.density.support())
        if live.is_empty():
            return None
        if not live.subset_of(u.covered()):
            return Fraction(0)
        best = None
        for piece, a, b in u.pieces:
            part = live.intersect(IntervalUnion((piece,)))
            for lo, hi in part.pieces:
                if b == 0:
                    v = Fraction(a * a)
                else:
                    root = Fraction(-a, 1) / b
                    inside = (lo is None or lo <= root) and (hi is None or root <= hi)
                    if inside:
                        v = Fraction(0)
                    else:
                        cands = [x for x in (lo, hi) if x is not None]
                        v = min((a + b * x) ** 2 for x in cands)
                best = v if best is None else min(best, v)
        return best
    raise EngineMismatch(f"unknown weight {u!r}")


def weight_in_Linf(space, u: Weight) -> bool:
    return not is_inf(ess_sup2(space, u))


def weight_bounded_away(space, u: Weight) -> bool:
    """ess inf |u| > 0 over the whole space."""
    v = ess_inf2(space, u)
    return v is not None and v > 0


# --------------------------------------------------------------------------
# superlevel sets {|u| > eps} and the level grid


def superlevel_set(space, u: Weight, eps2):
    """{x : |u(x)|² > eps2}, exact."""
    eps2 = as_fraction(eps2)
    if isinstance(u, FiniteWeight):
        return AtomSet.of(a for a in space.atoms if u.at(a).abs2() > eps2)
    if isinstance(u, TailWeight):
        fin = {n for n in range(1, u.threshold + 1) if u.at(n).abs2() > eps2}
        residues = set()
        removed: set[int] = set()
        added: set[int] = set()
        for r, (a, b) in enumerate(u.classes):
            if b.is_zero():
                if a.abs2() > eps2:
                    residues.add(r)
                continue
            residues.add(r)
            A, B, C = _quad_coeffs(a, b)
            # Q(n) ≤ eps2 on a bounded integer window around the vertex
            vertex = -B / (2 * A)
            qmin = C - B * B / (4 * A)
            if qmin > eps2:
                continue
            halfwidth = math.isqrt(int((eps2 - qmin) / A)) + 2
            centre = math.floor(vertex)
            for n in range(centre - halfwidth, centre + halfwidth + 1):
                if n >= 1 and n % u.modulus == r and A * n * n + B * n + C <= eps2:
                    if n <= u.threshold:
                        # already decided by the explicit value
                        continue
                    removed.add(n)
        base = StructuredSet.make(u.modulus, u.threshold, fin, residues)
        if removed:
            base = base.difference(
                StructuredSet.make(1, max(removed), removed, set())
            )
        return base
    if isinstance(u, AffineWeight):
        if eps2 < 0:
            return space.carrier
        out = IntervalUnion.empty()
        eps = None
        for piece, a, b in u.pieces:
            seg = IntervalUnion((piece,))
            if b == 0:
                if a * a > eps2:
                    out = out.union(seg)
                continue
            # |a + bx| ≤ eps on the band between the two line crossings
            eps = exact_root(eps2, 2) if eps is None else eps
            if eps is None:
                raise OperatorError(
                    "interval superlevel thresholds must be squares of rationals"
                )
            x1 = (-eps - a) / b
            x2 = (eps - a) / b
            band = IntervalUnion.interval(min(x1, x2), max(x1, x2))
            out = out.union(seg.difference(band))
        return out.intersect(space.carrier)
    raise EngineMismatch(f"unknown weight {u!r}")


def weight_level_grid(space, u: Weight):
    """All distinct values of |u|² on μ-positive sets, sorted ascending,
    when |u| is essentially piecewise constant — else None.  Testing the
    superlevel sets at exactly these thresholds (plus 0) covers every
    superlevel set of u."""
    if isinstance(u, FiniteWeight):
        return sorted({u.at(a).abs2() for a in space.atoms})
    if isinstance(u, TailWeight):
        if u.is_index_affine():
            return None
        vals = {u.at(n).abs2() for n in range(1, u.threshold + 1)}
        vals.update(a.abs2() for a, _b in u.classes)
        return sorted(vals)
    if isinstance(u, AffineWeight):
        support = space.density.support()
        vals = {Fraction(0)} if not support.subset_of(u.covered()) else set()
        for piece, a, b in u.pieces:
            live = support.intersect(IntervalUnion((piece,)))
            if measure_of(space, live) == 0:
                continue
            if b != 0:
                return None
            vals.add(Fraction(a * a))
        return sorted(vals)
    raise EngineMismatch(f"unknown weight {u!r}")


# --------------------------------------------------------------------------
# composition of weights with transformations


def compose_weight(space, u: Weight, T) -> Weight:
    """u ∘ T in the same weight representation."""
    if isinstance(u, FiniteWeight):
        return FiniteWeight({a: u.at(T.at(a)) for a in space.atoms})
    if isinstance(u, TailWeight):
        if not isinstance(T, TailResidueMap):
            raise EngineMismatch("countable weights compose with residue maps")
        shifts = T.shifts
        min_shift = min(shifts)
        B = max(T.threshold, u.threshold + max(0, -min_shift))
        M = lcm(T.modulus, u.modulus)
        classes = []
        for r in range(M):
            s = shifts[r % T.modulus]
            a, b = u.classes[(r + s) % u.modulus]
            classes.append((a + b * QQi.of(s), b))
        exc = {n: u.at(T.at(n)) for n in range(1, B + 1)}
        return TailWeight.make(B, exc, M, classes)
    if isinstance(u, AffineWeight):
        if not isinstance(T, PiecewiseAffineMap):
            raise EngineMismatch("interval weights compose with affine maps")
        pieces = []
        for (blo, bhi), a, b in T.branches:
            dom = IntervalUnion.interval(blo, bhi)
            if a == 0:
                val = u.at(b)
                if val != 0:
                    pieces.extend(((p, val, Fraction(0)) for p in dom.pieces))
                continue
            for upiece, alpha, beta in u.pieces:
                pre = IntervalUnion((upiece,)).affine_preimage(a, b).intersect(dom)
                for p in pre.pieces:
                    pieces.append((p, alpha + beta * b, beta * a))
        return AffineWeight.make(pieces)
    raise EngineMismatch(f"unknown weight {u!r}")


# --------------------------------------------------------------------------
# operator specifications


OPERATOR_KINDS = ("mu", "ct", "wut", "wut_hat")


@dataclass(frozen=True)
class OperatorSpec:
    """One operator on one measure space.

    ``mu`` needs a weight, ``ct`` a transformation, the weighted kinds
    both.  ``wut`` multiplies by u ∘ T, ``wut_hat`` by u itself.
    """

    kind: str
    space: object
    u: Weight | None = None
    T: object = None

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise OperatorError(f"unknown operator kind {self.kind!r}")
        if self.kind != "ct" and self.u is None:
            raise OperatorError(f"{self.kind} needs a weight")
        if self.kind != "mu" and self.T is None:
            raise OperatorError(f"{self.kind} needs a transformation")
        if self.T is not None and not maps_into_carrier(self.space, self.T):
            raise OperatorError("transformation must map the space into itself")
        matched = {
            FiniteAtomicSpace: FiniteWeight,
            CountableAtomicSpace: TailWeight,
            IntervalSpace: AffineWeight,
        }[type(self.space)]
        if self.u is not None and not isinstance(self.u, matched):
            raise OperatorError(
                f"{type(self.u).__name__} does not live on "
                f"{type(self.space).__name__}"
            )

    @staticmethod
    def multiplication(space, u) -> "OperatorSpec":
        return OperatorSpec("mu", space, u=u)

    @staticmethod
    def composition(space, T) -> "OperatorSpec":
        return OperatorSpec("ct", space, T=T)

    @staticmethod
    def weighted(space, u, T) -> "OperatorSpec":
        return OperatorSpec("wut", space, u=u, T=T)

    @staticmethod
    def weighted_inner(space, u, T) -> "OperatorSpec":
        return OperatorSpec("wut_hat", space, u=u, T=T)

    def weight_factor(self) -> Weight | None:
        """The pointwise multiplier: u∘T for wut, u for mu/wut_hat, none
        for ct."""
        if self.kind == "ct":
            return None
        if self.kind == "wut":
            return compose_weight(self.space, self.u, self.T)
        return self.u

    def composes(self) -> bool:
        return self.kind != "mu"


# --------------------------------------------------------------------------
# applying an operator to a simple function


def _split_piece_by_weight(space, w: Weight, value: QQi, S):
    """Split value·w restricted to S into simple pieces."""
    if isinstance(w, FiniteWeight):
        groups: dict[QQi, list] = {}
        for atom in S:
            v = w.at(atom)
            if not v.is_zero():
                groups.setdefault(v, []).append(atom)
        return [(value * v, AtomSet.of(atoms)) for v, atoms in groups.items()]
    if isinstance(w, TailWeight):
        cut = max(w.threshold, S.threshold)
        groups: dict[QQi, set] = {}
        for n in S.members_upto(cut):
            v = w.at(n)
            if not v.is_zero():
                groups.setdefault(v, set()).add(n)
        out = [
            (value * v, StructuredSet.make(1, cut, atoms, set()))
            for v, atoms in groups.items()
        ]
        tail_groups: dict[QQi, list] = {}
        L = lcm(w.modulus, S.modulus)
        for r in range(L):
            probe = cut + 1 + ((r - cut - 1) % L)
            if not S.contains(probe):
                continue
            a, b = w.classes[r % w.modulus]
            if not b.is_zero():
                raise NonSimpleResult(
                    "index-affine weight over an infinite set of atoms"
                )
            if a.is_zero():
                continue
            tail_groups.setdefault(a, []).append(r)
        for v, residues in tail_groups.items():
            out.append(
                (value * v, StructuredSet.make(L, cut, set(), set(residues)))
            )
        return out
    if isinstance(w, AffineWeight):
        out = []
        for piece, a, b in w.pieces:
            part = S.intersect(IntervalUnion((piece,)))
            if part.is_empty():
                continue
            if b != 0:
                if measure_of(space, part) != 0:
                    raise NonSimpleResult(
                        "affine weight with nonzero slope over a set of "
                        "positive measure"
                    )
                continue
            if a != 0:
                out.append((value * QQi.of(a), part))
        return out
    raise EngineMismatch(f"unknown weight {w!r}")


def apply_operator(spec: OperatorSpec, f: SimpleFunction, power: int = 1) -> SimpleFunction:
    """The image (operator^power) f as a simple function.

    Raises ``NonSimpleResult`` when the image leaves the simple class.
    """
    if f.space is not spec.space and f.space != spec.space:
        raise OperatorError("function lives on a different space")
    out = f
    for _ in range(power):
        out = _apply_once(spec, out)
    return out


def _apply_once(spec: OperatorSpec, f: SimpleFunction) -> SimpleFunction:
    if isinstance(spec.space, FiniteAtomicSpace):
        # pointwise is always exact on finitely many atoms
        values = {}
        for x in spec.space.atoms:
            y = spec.T.at(x) if spec.composes() else x
            fv = f.value_at_atom(y)
            if fv.is_zero():
                continue
            if spec.kind == "ct":
                wv = QQi.of(1)
            elif spec.kind == "mu":
                wv = spec.u.at(x)
            elif spec.kind == "wut":
                wv = spec.u.at(spec.T.at(x))
            else:
                wv = spec.u.at(x)
            if not wv.is_zero():
                values[x] = wv * fv
        groups: dict = {}
        for x, v in values.items():
            groups.setdefault(v, []).append(x)
        return SimpleFunction.of(
            spec.space, [(v, AtomSet.of(xs)) for v, xs in groups.items()]
        )
    w = spec.weight_factor()
    pieces = []
    for v, S in f.pieces:
        P = preimage(spec.T, S) if spec.composes() else S
        if P.is_empty():
            continue
        if w is None:
            pieces.append((v, P))
        else:
            pieces.extend(_split_piece_by_weight(spec.space, w, v, P))
    # pieces with equal values may overlap only through disjoint origins;
    # sets from distinct f-pieces are disjoint because preimages of
    # disjoint sets are disjoint, so this is a valid simple function
    merged: dict = {}
    for v, S in pieces:
        key = v
        merged[key] = S if key not in merged else merged[key].union(S)
    return SimpleFunction.of(spec.space, list(merged.items()))


# --------------------------------------------------------------------------
# matrices on finite spaces


def matrix_rows(spec: OperatorSpec):
    """Rows of the operator in the pointwise basis: (O f)(x) =
    Σ_y rows[x][y] f(y), atoms in space order."""
    space = spec.space
    if not isinstance(space, FiniteAtomicSpace):
        raise EngineMismatch("matrices exist only on finite atomic spaces")
    atoms = space.atoms
    index = {a: i for i, a in enumerate(atoms)}
    zero = QQi.of(0)
    rows = [[zero] * len(atoms) for _ in atoms]
    for i, x in enumerate(atoms):
        if spec.composes():
            y = spec.T.at(x)
        else:
            y = x
        j = index[y]
        if spec.kind == "ct":
            rows[i][j] = QQi.of(1)
        elif spec.kind == "mu":
            rows[i][j] = spec.u.at(x)
        elif spec.kind == "wut":
            rows[i][j] = spec.u.at(y)
        else:
            rows[i][j] = spec.u.at(x)
    return atoms, rows


# --------------------------------------------------------------------------
# boundedness


@dataclass(frozen=True)
class BoundednessReport:
    verdict: str  # "bounded" | "not_bounded" | "inconclusive"
    u_essentially_bounded: bool
    density_essentially_bounded: bool | None
    reason: str

    def __str__(self):
        return f"{self.verdict}: {self.reason}"


def boundedness_report(spec: OperatorSpec) -> BoundednessReport:
    """Decide boundedness where the sufficient criteria apply.

    Bounded when the weight and the composition density are both
    essentially bounded.  Unbounded when the weight is essentially
    unbounded, the density is essentially bounded, and every superlevel
    set of the weight is forward-invariant under T — checkable exactly
    when the weight level grid is finite or T is the identity.  Anything
    else is reported inconclusive rather than guessed.
    """
    from .spaces import NotAbsolutelyContinuous, radon_nikodym

    space = spec.space
    u = spec.u if spec.u is not None else constant_weight(space)
    hT_bounded: bool | None = None
    if spec.composes():
        try:
            hT = radon_nikodym(space, spec.T)
        except NotAbsolutelyContinuous:
            return BoundednessReport(
                "inconclusive",
                weight_in_Linf(space, u),
                None,
                "the transformation is singular: composition does not act on "
                "equivalence classes",
            )
        hT_bounded = _density_bounded(hT)
    u_bounded = weight_in_Linf(space, u)
    if u_bounded and (hT_bounded is None or hT_bounded):
        return BoundednessReport(
            "bounded",
            True,
            hT_bounded,
            "weight and composition density are essentially bounded",
        )
    if not u_bounded and (hT_bounded is None or hT_bounded):
        if spec.T is None or _is_identity(spec.T):
            return BoundednessReport(
                "not_bounded",
                False,
                hT_bounded,
                "weight is essentially unbounded and every superlevel set is "
                "trivially invariant",
            )
        grid = weight_level_grid(space, u)
        if grid is not None:
            thresholds = sorted(set(grid) | {Fraction(0)})
            if all(
                forward_image(spec.T, superlevel_set(space, u, t)).subset_of(
                    superlevel_set(space, u, t)
                )
                for t in thresholds
            ):
                return BoundednessReport(
                    "not_bounded",
                    False,
                    hT_bounded,
                    "weight is essentially unbounded and its superlevel sets "
                    "are forward-invariant",
                )
            return BoundednessReport(
                "inconclusive",
                False,
                hT_bounded,
                "weight is essentially unbounded but some superlevel set is "
                "not forward-invariant",
            )
        return BoundednessReport(
            "inconclusive",
            False,
            hT_bounded,
            "weight is essentially unbounded and its level structure is not "
            "finitely checkable",
        )
    return BoundednessReport(
        "inconclusive",
        u_bounded,
        hT_bounded,
        "composition density is essentially unbounded",
    )


def _density_bounded(h) -> bool:
    from .spaces import FiniteFunction, PiecewiseConstant, TailFunction

    if isinstance(h, FiniteFunction):
        return True
    if isinstance(h, TailFunction):
        return True
    if isinstance(h, PiecewiseConstant):
        return True
    raise EngineMismatch(f"unknown density {h!r}")


def _is_identity(T) -> bool:
    return T.is_identity()
