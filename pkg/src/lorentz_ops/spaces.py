"""Measure-space engines, measurable transformations and pushforward calculus.

Three σ-finite engines, all with exact rational data:

* ``FiniteAtomicSpace``  — finitely many atoms with positive rational weights.
* ``CountableAtomicSpace`` — atoms indexed by N = {1, 2, ...}: finitely many
  exceptional weights below a threshold, one constant tail weight above it.
* ``IntervalSpace`` — a finite union of rational intervals carrying a
  piecewise-constant nonnegative rational density against Lebesgue measure.

Transformations come in three matching flavours (``AtomMap``,
``TailResidueMap``, ``PiecewiseAffineMap``).  Derived measures (iterated
pushforwards) and Radon–Nikodym densities stay inside exactly representable
classes, so every absolute-continuity or zero-set question downstream is
decided by structural comparison, never numerically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .rational import INF, as_fraction, ext_sum, is_inf
from .sets import AtomSet, IntervalUnion, StructuredSet


class EngineMismatch(TypeError):
    """A set, map or function does not belong to this space engine."""


class InfiniteAtomMass(ValueError):
    """A pushforward would assign infinite mass to a single atom."""


class NotAbsolutelyContinuous(ValueError):
    """The requested Radon–Nikodym density does not exist."""


# --------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class FiniteAtomicSpace:
    """Finitely many atoms; ``weights`` maps atom id -> positive rational."""

    atoms: tuple
    weights: dict = field(compare=False)

    def __post_init__(self):
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("duplicate atom ids")
        for a in self.atoms:
            w = self.weights.get(a)
            if w is None or as_fraction(w) <= 0:
                raise ValueError(f"atom {a!r} needs a positive rational weight")

    @staticmethod
    def of(weights: dict) -> "FiniteAtomicSpace":
        ws = {a: as_fraction(w) for a, w in weights.items()}
        return FiniteAtomicSpace(tuple(sorted(ws, key=str)), ws)

    def whole_set(self) -> AtomSet:
        return AtomSet.of(self.atoms)

    def weight(self, atom) -> Fraction:
        return self.weights[atom]


@dataclass(frozen=True)
class CountableAtomicSpace:
    """Atoms 1, 2, 3, ...; exceptional weights up to ``threshold``, constant
    ``tail_weight`` beyond it.  All weights are positive rationals."""

    threshold: int
    exceptional: dict = field(compare=False)
    tail_weight: Fraction = Fraction(1)

    def __post_init__(self):
        if as_fraction(self.tail_weight) <= 0:
            raise ValueError("tail weight must be positive")
        for n, w in self.exceptional.items():
            if n < 1 or n > self.threshold:
                raise ValueError("exceptional indices must lie in [1, threshold]")
            if as_fraction(w) <= 0:
                raise ValueError("atom weights must be positive")

    @staticmethod
    def counting() -> "CountableAtomicSpace":
        return CountableAtomicSpace(0, {}, Fraction(1))

    @staticmethod
    def of(threshold: int, exceptional: dict, tail_weight) -> "CountableAtomicSpace":
        exc = {int(n): as_fraction(w) for n, w in exceptional.items()}
        filled = {
            n: exc.get(n, as_fraction(tail_weight)) for n in range(1, threshold + 1)
        }
        return CountableAtomicSpace(threshold, filled, as_fraction(tail_weight))

    def whole_set(self) -> StructuredSet:
        return StructuredSet.all_naturals()

    def weight(self, n: int) -> Fraction:
        if n <= self.threshold:
            return as_fraction(self.exceptional.get(n, self.tail_weight))
        return as_fraction(self.tail_weight)


@dataclass(frozen=True)
class IntervalSpace:
    """Union of rational intervals with a piecewise-constant density."""

    carrier: IntervalUnion
    density: "PiecewiseConstant"

    @staticmethod
    def lebesgue(carrier: IntervalUnion) -> "IntervalSpace":
        return IntervalSpace(carrier, PiecewiseConstant.constant(carrier, 1))

    def __post_init__(self):
        if not self.density.support().subset_of(self.carrier):
            raise ValueError("density must live on the carrier")

    def whole_set(self) -> IntervalUnion:
        return self.carrier


MeasureSpace = FiniteAtomicSpace | CountableAtomicSpace | IntervalSpace


# --------------------------------------------------------------------------
# engine-matched nonnegative functions (measures and densities share these)


@dataclass(frozen=True)
class FiniteFunction:
    """Nonnegative rational values on the atoms of a finite space."""

    values: dict = field(compare=False)
    _key: tuple = field(default=(), repr=False)

    @staticmethod
    def of(values: dict) -> "FiniteFunction":
        vals = {a: as_fraction(v) for a, v in values.items()}
        key = tuple(sorted(((str(a), v) for a, v in vals.items())))
        return FiniteFunction(vals, key)

    def at(self, atom) -> Fraction:
        return self.values.get(atom, Fraction(0))

    def zero_set_within(self, atoms) -> AtomSet:
        return AtomSet.of(a for a in atoms if self.at(a) == 0)

    def __eq__(self, other):
        return isinstance(other, FiniteFunction) and self._key == other._key

    def __hash__(self):
        return hash(self._key)


@dataclass(frozen=True)
class TailFunction:
    """Nonnegative rational values on N: exceptional values up to a
    threshold, then one value per residue class mod ``modulus``."""

    threshold: int
    exceptional: tuple  # ((n, value), ...) sorted
    modulus: int
    class_values: tuple  # value for residue 0..modulus-1

    @staticmethod
    def make(threshold: int, exceptional: dict, modulus: int, class_values) -> "TailFunction":
        cvs = tuple(as_fraction(v) for v in class_values)
        if len(cvs) != modulus or modulus < 1:
            raise ValueError("need one class value per residue")
        exc = {int(n): as_fraction(v) for n, v in exceptional.items()}
        # canonical: minimal modulus, then minimal threshold
        m = modulus
        for d in range(1, modulus + 1):
            if modulus % d:
                continue
            if all(cvs[r] == cvs[r % d] for r in range(modulus)):
                m = d
                cvs = cvs[:d]
                break
        thr = max([threshold] + [n for n in exc])
        exc = {n: exc.get(n, cvs[n % m]) for n in range(1, thr + 1)}
        while thr > 0 and exc[thr] == cvs[thr % m]:
            del exc[thr]
            thr -= 1
        return TailFunction(thr, tuple(sorted(exc.items())), m, cvs)

    @staticmethod
    def constant(value) -> "TailFunction":
        return TailFunction.make(0, {}, 1, [value])

    def at(self, n: int) -> Fraction:
        if n <= self.threshold:
            for k, v in self.exceptional:
                if k == n:
                    return v
            return self.class_values[n % self.modulus]
        return self.class_values[n % self.modulus]

    def zero_set(self) -> StructuredSet:
        fin = {n for n in range(1, self.threshold + 1) if self.at(n) == 0}
        res = {r for r in range(self.modulus) if self.class_values[r] == 0}
        return StructuredSet.make(self.modulus, self.threshold, fin, res)


@dataclass(frozen=True)
class PiecewiseConstant:
    """Nonnegative rational step function on a union of intervals."""

    pieces: tuple  # ((IntervalUnion-piece as (lo,hi), value), ...) disjoint

    @staticmethod
    def make(pairs) -> "PiecewiseConstant":
        """pairs: iterable of (IntervalUnion | (lo, hi), value); later pieces
        must not overlap earlier ones.  Gaps are implicitly 0."""
        flat = []
        for region, value in pairs:
            v = as_fraction(value)
            if isinstance(region, IntervalUnion):
                ivs = region.pieces
            else:
                ivs = IntervalUnion.make([region]).pieces
            for lo, hi in ivs:
                flat.append(((lo, hi), v))
        return PiecewiseConstant._normalise(flat)

    @staticmethod
    def _normalise(flat) -> "PiecewiseConstant":
        """Sort pieces, drop zero and degenerate pieces, merge touching
        equal-valued neighbours.  Support-only form: the function is 0 off
        the stored pieces, so structural equality is a.e. equality."""
        cleaned = []
        for (lo, hi), v in flat:
            if v == 0:
                continue
            if lo is not None and hi is not None and lo >= hi:
                continue
            cleaned.append(((lo, hi), v))
        cleaned.sort(key=lambda p: (0,) if p[0][0] is None else (1, p[0][0]))
        merged = []
        for (lo, hi), v in cleaned:
            if merged:
                (plo, phi), pv = merged[-1]
                if phi is None or lo is None or lo < phi:
                    raise ValueError("overlapping density pieces")
                if pv == v and lo == phi:
                    merged[-1] = ((plo, hi), v)
                    continue
            merged.append(((lo, hi), v))
        return PiecewiseConstant(tuple(merged))

    @staticmethod
    def constant(region: IntervalUnion, value) -> "PiecewiseConstant":
        return PiecewiseConstant.make([(region, value)])

    def at(self, x) -> Fraction:
        x = as_fraction(x)
        for (lo, hi), v in self.pieces:
            if (lo is None or lo <= x) and (hi is None or x < hi):
                return v
        return Fraction(0)

    def support(self) -> IntervalUnion:
        return IntervalUnion.make([iv for iv, v in self.pieces if v != 0])

    def zero_set_within(self, carrier: IntervalUnion) -> IntervalUnion:
        return carrier.difference(self.support())

    def integral_over(self, region: IntervalUnion):
        total = Fraction(0)
        for iv, v in self.pieces:
            if v == 0:
                continue
            seg = region.intersect(IntervalUnion.make([iv]))
            ln = seg.length()
            if is_inf(ln):
                return INF
            total += v * ln
        return total

    def restrict(self, region: IntervalUnion) -> "PiecewiseConstant":
        out = []
        for iv, v in self.pieces:
            for piece in region.intersect(IntervalUnion.make([iv])).pieces:
                out.append((piece, v))
        return PiecewiseConstant._normalise(out)

    def distinct_values(self) -> set:
        return {v for _, v in self.pieces}

    def ae_equal(self, other: "PiecewiseConstant") -> bool:
        values = self.distinct_values() | other.distinct_values()
        for v in values:
            a = IntervalUnion.make([iv for iv, w in self.pieces if w == v])
            b = IntervalUnion.make([iv for iv, w in other.pieces if w == v])
            if v != 0 and a != b:
                return False
        return True


Measure = FiniteFunction | TailFunction | PiecewiseConstant
Density = Measure
MeasurableSet = AtomSet | StructuredSet | IntervalUnion


# --------------------------------------------------------------------------
# transformations


@dataclass(frozen=True)
class AtomMap:
    """Total map on the atoms of a finite space."""

    mapping: dict = field(compare=False)
    _key: tuple = field(default=(), repr=False)

    @staticmethod
    def of(mapping: dict) -> "AtomMap":
        key = tuple(sorted(((str(a), str(b)) for a, b in mapping.items())))
        return AtomMap(dict(mapping), key)

    def at(self, atom):
        return self.mapping[atom]

    def is_identity(self) -> bool:
        return all(v == k for k, v in self.mapping.items())

    def __eq__(self, other):
        return isinstance(other, AtomMap) and self._key == other._key

    def __hash__(self):
        return hash(self._key)


@dataclass(frozen=True)
class TailResidueMap:
    """Map on N: an explicit table up to ``threshold``; above it, each
    residue class j (mod ``modulus``) is shifted by ``shifts[j]``."""

    threshold: int
    exceptions: tuple  # ((n, image), ...) sorted, covers 1..threshold
    modulus: int
    shifts: tuple  # per residue class 0..modulus-1

    @staticmethod
    def make(threshold: int, exceptions: dict, modulus: int, shifts) -> "TailResidueMap":
        sh = tuple(int(c) for c in shifts)
        if len(sh) != modulus or modulus < 1:
            raise ValueError("need one shift per residue class")
        exc = {int(n): int(v) for n, v in exceptions.items()}
        if set(exc) != set(range(1, threshold + 1)):
            raise ValueError("exceptions must cover exactly 1..threshold")
        if any(v < 1 for v in exc.values()):
            raise ValueError("images must be >= 1")
        for j in range(modulus):
            first = None
            for n in range(threshold + 1, threshold + modulus + 1):
                if n % modulus == j:
                    first = n
                    break
            if first is not None and first + sh[j] < 1:
                raise ValueError(f"class {j} maps below 1")
        return TailResidueMap(threshold, tuple(sorted(exc.items())), modulus, sh)

    @staticmethod
    def identity() -> "TailResidueMap":
        return TailResidueMap.make(0, {}, 1, [0])

    def at(self, n: int) -> int:
        if n <= self.threshold:
            for k, v in self.exceptions:
                if k == n:
                    return v
            raise ValueError(f"{n} not covered")
        return n + self.shifts[n % self.modulus]

    def is_identity(self) -> bool:
        return all(v == k for k, v in self.exceptions) and all(
            c == 0 for c in self.shifts
        )

    def max_shift(self) -> int:
        return max([0] + [abs(c) for c in self.shifts])


@dataclass(frozen=True)
class PiecewiseAffineMap:
    """Branches (domain interval, slope, intercept): x -> slope*x + intercept.

    Branch domains cover the carrier and overlap at most in null sets."""

    branches: tuple  # (((lo, hi), a, b), ...)

    @staticmethod
    def make(branches) -> "PiecewiseAffineMap":
        out = []
        for dom, a, b in branches:
            if isinstance(dom, IntervalUnion):
                if len(dom.pieces) != 1:
                    raise ValueError("each branch domain must be one interval")
                dom = dom.pieces[0]
            else:
                dom = IntervalUnion.make([dom]).pieces[0]
            out.append((dom, as_fraction(a), as_fraction(b)))
        out.sort(key=lambda p: (0,) if p[0][0] is None else (1, p[0][0]))
        return PiecewiseAffineMap(tuple(out))

    @staticmethod
    def identity(carrier: IntervalUnion) -> "PiecewiseAffineMap":
        return PiecewiseAffineMap.make([(iv, 1, 0) for iv in carrier.pieces])

    def at(self, x) -> Fraction:
        x = as_fraction(x)
        for (lo, hi), a, b in self.branches:
            if (lo is None or lo <= x) and (hi is None or x <= hi):
                return a * x + b
        raise ValueError(f"{x} outside every branch domain")

    def is_identity(self) -> bool:
        return all(a == 1 and b == 0 for _, a, b in self.branches)

    def domain(self) -> IntervalUnion:
        return IntervalUnion.make([dom for dom, _, _ in self.branches])


Transformation = AtomMap | TailResidueMap | PiecewiseAffineMap


# --------------------------------------------------------------------------
# measure of a set


def base_measure(space) -> Measure:
    if isinstance(space, FiniteAtomicSpace):
        return FiniteFunction.of(space.weights)
    if isinstance(space, CountableAtomicSpace):
        return TailFunction.make(
            space.threshold, dict(space.exceptional), 1, [space.tail_weight]
        )
    if isinstance(space, IntervalSpace):
        return space.density
    raise EngineMismatch(f"unknown space {space!r}")


def measure_under(measure: Measure, A: MeasurableSet):
    """ν(A) for an engine-matched measure ν; Fraction or INF."""
    if isinstance(measure, FiniteFunction):
        if not isinstance(A, AtomSet):
            raise EngineMismatch("finite measures take AtomSet arguments")
        return ext_sum(measure.at(a) for a in A.atoms)
    if isinstance(measure, TailFunction):
        if not isinstance(A, StructuredSet):
            raise EngineMismatch("countable measures take StructuredSet arguments")
        bound = max(measure.threshold, A.threshold)
        total = ext_sum(measure.at(n) for n in A.members_upto(bound))
        m = lcm(measure.modulus, A.modulus)
        for t in range(m):
            if (t % A.modulus) in A.residues:
                v = measure.class_values[t % measure.modulus]
                if v > 0:
                    return INF
        return total
    if isinstance(measure, PiecewiseConstant):
        if not isinstance(A, IntervalUnion):
            raise EngineMismatch("interval measures take IntervalUnion arguments")
        return measure.integral_over(A)
    raise EngineMismatch(f"unknown measure {measure!r}")


def measure_of(space, A: MeasurableSet):
    """μ(A) under the space's base measure (Fraction or INF)."""
    return measure_under(base_measure(space), A)


# --------------------------------------------------------------------------
# preimages and forward images


def preimage(T: Transformation, A: MeasurableSet, k: int = 1) -> MeasurableSet:
    """T^{-k}(A), exactly."""
    if k < 0:
        raise ValueError("k must be >= 0")
    S = A
    for _ in range(k):
        S = _preimage_once(T, S)
    return S


def _preimage_once(T, A):
    if isinstance(T, AtomMap):
        if not isinstance(A, AtomSet):
            raise EngineMismatch("AtomMap expects AtomSet")
        return AtomSet.of(a for a in T.mapping if T.mapping[a] in A.atoms)
    if isinstance(T, TailResidueMap):
        if not isinstance(A, StructuredSet):
            raise EngineMismatch("TailResidueMap expects StructuredSet")
        # beyond B, T(n) lands past all of A's exceptional data
        B = max(T.threshold, A.threshold + T.max_shift() + T.modulus)
        fin = {n for n in range(1, B + 1) if A.contains(T.at(n))}
        L = lcm(T.modulus, A.modulus)
        res = set()
        for t in range(L):
            n0 = B + 1 + ((t - (B + 1)) % L)
            if A.contains(T.at(n0)):
                res.add(t % L)
        return StructuredSet.make(L, B, fin, res)
    if isinstance(T, PiecewiseAffineMap):
        if not isinstance(A, IntervalUnion):
            raise EngineMismatch("PiecewiseAffineMap expects IntervalUnion")
        out = IntervalUnion.empty()
        for dom, a, b in T.branches:
            dom_u = IntervalUnion.make([dom])
            if a == 0:
                if A.contains_point(b):
                    out = out.union(dom_u)
            else:
                out = out.union(A.affine_preimage(a, b).intersect(dom_u))
        return out
    raise EngineMismatch(f"unknown transformation {T!r}")


def forward_image(T: Transformation, A: MeasurableSet, k: int = 1) -> MeasurableSet:
    """T^k(A) mod null (degenerate interval images are dropped)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    S = A
    for _ in range(k):
        S = _forward_once(T, S)
    return S


def _forward_once(T, A):
    if isinstance(T, AtomMap):
        return AtomSet.of(T.mapping[a] for a in A.atoms)
    if isinstance(T, TailResidueMap):
        B = max(T.threshold, A.threshold) + T.modulus * A.modulus
        fin = {T.at(n) for n in A.members_upto(B)}
        L = lcm(T.modulus, A.modulus)
        res = set()
        thr_out = B + T.max_shift()
        for t in range(L):
            n0 = B + 1 + ((t - (B + 1)) % L)
            if A.contains(n0):
                res.add((n0 + T.shifts[n0 % T.modulus]) % L)
        # boundary zone: pointwise images until every shifted class has begun
        for n in range(B + 1, thr_out + 2 * T.max_shift() + L + 1):
            if A.contains(n):
                fin.add(T.at(n))
        return StructuredSet.make(L, thr_out, fin, res)
    if isinstance(T, PiecewiseAffineMap):
        out = IntervalUnion.empty()
        for dom, a, b in T.branches:
            seg = A.intersect(IntervalUnion.make([dom]))
            if a == 0 or seg.is_empty():
                continue  # a degenerate image is null
            out = out.union(seg.affine_image(a, b))
        return out
    raise EngineMismatch(f"unknown transformation {T!r}")


# --------------------------------------------------------------------------
# non-singularity, pushforward, Radon–Nikodym


def is_nonsingular(space, T) -> bool:
    """True iff μ(A) = 0 implies μ(T^{-1}(A)) = 0."""
    if isinstance(space, (FiniteAtomicSpace, CountableAtomicSpace)):
        return True  # every atom has positive mass; only ∅ is null
    if isinstance(space, IntervalSpace):
        ρ = space.density
        for dom, a, b in T.branches:
            if a == 0 and ρ.integral_over(IntervalUnion.make([dom])) != 0:
                return False
        dead = ρ.zero_set_within(space.carrier)
        if not dead.is_empty():
            pulled = preimage(T, dead, 1)
            if ρ.integral_over(pulled) != 0:
                return False
        return True
    raise EngineMismatch(f"unknown space {space!r}")


def push_once(space, measure: Measure, T) -> Measure:
    """ν ∘ T^{-1} for an engine-matched measure ν."""
    if isinstance(space, FiniteAtomicSpace):
        out = {a: Fraction(0) for a in space.atoms}
        for a in space.atoms:
            out[T.at(a)] += measure.at(a)
        return FiniteFunction.of(out)
    if isinstance(space, CountableAtomicSpace):
        if not isinstance(measure, TailFunction):
            raise EngineMismatch("expected a TailFunction measure")
        exc_img = max((v for _, v in T.exceptions), default=0)
        base = max(T.threshold, measure.threshold)
        M = max(exc_img, base + max(T.shifts, default=0), T.threshold)
        L = lcm(T.modulus, measure.modulus)

        def mass_at(n: int) -> Fraction:
            total = Fraction(0)
            for m0, img in T.exceptions:
                if img == n:
                    total += measure.at(m0)
            for j, c in enumerate(T.shifts):
                m0 = n - c
                if m0 > T.threshold and m0 % T.modulus == j:
                    total += measure.at(m0)
            return total

        exc = {n: mass_at(n) for n in range(1, M + 1)}
        cvs = []
        for t in range(L):
            n0 = M + 1 + ((t - (M + 1)) % L)
            cvs.append(mass_at(n0))
        return TailFunction.make(M, exc, L, cvs)
    if isinstance(space, IntervalSpace):
        if not isinstance(measure, PiecewiseConstant):
            raise EngineMismatch("expected a PiecewiseConstant measure")
        contributions = []
        for dom, a, b in T.branches:
            dom_u = IntervalUnion.make([dom])
            if a == 0:
                if measure.integral_over(dom_u) != 0:
                    raise NotAbsolutelyContinuous(
                        "a degenerate branch carries positive mass onto one point"
                    )
                continue
            for iv, v in measure.pieces:
                seg = dom_u.intersect(IntervalUnion.make([iv]))
                if seg.is_empty() or v == 0:
                    continue
                img = seg.affine_image(a, b)
                contributions.append((img, v / abs(a)))
        return _sum_piecewise(contributions, space.carrier)
    raise EngineMismatch(f"unknown space {space!r}")


def _sum_piecewise(contributions, carrier: IntervalUnion) -> PiecewiseConstant:
    """Sum overlapping (region, value) contributions into one step function."""
    cuts = set()
    for region, _ in contributions:
        for lo, hi in region.pieces:
            cuts.add(lo)
            cuts.add(hi)
    for lo, hi in carrier.pieces:
        cuts.add(lo)
        cuts.add(hi)
    has_neg_inf = None in cuts
    finite = sorted(c for c in cuts if c is not None)
    edges = []
    if has_neg_inf or any(lo is None for lo, _ in carrier.pieces):
        edges.append(None)
    edges.extend(finite)
    if any(hi is None for _, hi in carrier.pieces):
        edges.append(None)
    pieces = []
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        if lo is not None and hi is not None and lo >= hi:
            continue
        cell = IntervalUnion.make([(lo, hi)]).intersect(carrier)
        if cell.is_empty():
            continue
        total = Fraction(0)
        for region, v in contributions:
            if cell.subset_of(region):
                total += v
        for piece in cell.pieces:
            pieces.append((piece, total))
    return PiecewiseConstant._normalise(pieces)


def pushforward(space, T, k: int = 1) -> Measure:
    """μ_k = μ ∘ T^{-k} as an engine-matched measure."""
    if isinstance(space, IntervalSpace) and not is_nonsingular(space, T):
        raise NotAbsolutelyContinuous("transformation is singular for this density")
    m = base_measure(space)
    for _ in range(k):
        m = push_once(space, m, T)
    return m


def radon_nikodym(space, T, k: int = 1) -> Density:
    """d(μ ∘ T^{-k})/dμ, canonically 0 where the base density vanishes."""
    mk = pushforward(space, T, k)
    if isinstance(space, FiniteAtomicSpace):
        return FiniteFunction.of(
            {a: mk.at(a) / space.weight(a) for a in space.atoms}
        )
    if isinstance(space, CountableAtomicSpace):
        base = base_measure(space)
        thr = max(mk.threshold, base.threshold)
        m = lcm(mk.modulus, base.modulus)
        exc = {n: mk.at(n) / base.at(n) for n in range(1, thr + 1)}
        cvs = [
            mk.class_values[t % mk.modulus] / base.class_values[t % base.modulus]
            for t in range(m)
        ]
        return TailFunction.make(thr, exc, m, cvs)
    if isinstance(space, IntervalSpace):
        ρ = space.density
        dead = ρ.zero_set_within(space.carrier)
        if measure_under(mk, dead) != 0:
            raise NotAbsolutelyContinuous("pushforward charges a base-null region")
        cuts = set()
        for iv, _ in list(mk.pieces) + list(ρ.pieces):
            cuts.add(iv[0])
            cuts.add(iv[1])
        pieces = []
        finite = sorted(c for c in cuts if c is not None)
        edges = ([None] if None in cuts else []) + finite + (
            [None] if any(hi is None for (_, hi), _ in ρ.pieces) else []
        )
        for i in range(len(edges) - 1):
            lo, hi = edges[i], edges[i + 1]
            if lo is not None and hi is not None and lo >= hi:
                continue
            cell = IntervalUnion.make([(lo, hi)]).intersect(space.carrier)
            for piece in cell.pieces:
                mid_den = _value_on(ρ, piece)
                mid_num = _value_on(mk, piece)
                h = mid_num / mid_den if mid_den != 0 else Fraction(0)
                pieces.append((piece, h))
        return PiecewiseConstant._normalise(pieces)
    raise EngineMismatch(f"unknown space {space!r}")


def _value_on(f: PiecewiseConstant, piece) -> Fraction:
    """Value of a step function on a cell contained in one of its pieces."""
    lo, hi = piece
    cell = IntervalUnion.make([piece])
    for iv, v in f.pieces:
        if cell.subset_of(IntervalUnion.make([iv])):
            return v
    return Fraction(0)


# --------------------------------------------------------------------------
# comparisons of measures/densities


def zero_set(space, density: Density) -> MeasurableSet:
    """{h = 0} for an engine-matched density, canonical mod null."""
    if isinstance(space, FiniteAtomicSpace):
        return density.zero_set_within(space.atoms)
    if isinstance(space, CountableAtomicSpace):
        return density.zero_set()
    if isinstance(space, IntervalSpace):
        return density.zero_set_within(space.carrier)
    raise EngineMismatch(f"unknown space {space!r}")


def abs_continuous(space, nu: Measure, mu: Measure) -> bool:
    """ν ≪ μ, decided by zero-set inclusion."""
    znu, zmu = zero_set(space, nu), zero_set(space, mu)
    if isinstance(space, IntervalSpace):
        return zmu.subset_of(znu)
    if isinstance(space, FiniteAtomicSpace):
        return zmu.atoms <= znu.atoms
    return zmu.difference(znu).is_empty()


def equivalent(space, nu: Measure, mu: Measure) -> bool:
    """Mutual absolute continuity."""
    return abs_continuous(space, nu, mu) and abs_continuous(space, mu, nu)


# --------------------------------------------------------------------------
# forward monotonicity: μ(T(A)) <= μ(A) for every measurable A


def measure_nonincreasing_forward(space, T) -> bool:
    if isinstance(space, FiniteAtomicSpace):
        return all(space.weight(T.at(a)) <= space.weight(a) for a in space.atoms)
    if isinstance(space, CountableAtomicSpace):
        # pointwise check up to a bound; beyond it both sides equal the tail
        B = max(T.threshold, space.threshold + T.max_shift()) + T.modulus
        return all(space.weight(T.at(n)) <= space.weight(n) for n in range(1, B + 1))
    if isinstance(space, IntervalSpace):
        # Sufficient and necessary branchwise: ρ(T(x))·|slope| <= ρ(x) a.e.
        # (images of distinct pieces can only overlap, which shrinks T(A)).
        ρ = space.density
        for dom, a, b in T.branches:
            if a == 0:
                continue  # the image is a single point, a null set
            dom_u = IntervalUnion.make([dom]).intersect(space.carrier)
            regions = [
                (dom_u.intersect(IntervalUnion.make([iv])), v) for iv, v in ρ.pieces
            ]
            regions.append((dom_u.difference(ρ.support()), Fraction(0)))
            for seg, v in regions:
                if seg.is_empty():
                    continue
                img = seg.affine_image(a, b)
                for jv, w in ρ.pieces:
                    if w * abs(a) > v and not img.intersect(
                        IntervalUnion.make([jv])
                    ).is_empty():
                        return False
        return True
    raise EngineMismatch(f"unknown space {space!r}")


def maps_into_carrier(space, T) -> bool:
    """Check T maps the space into itself (mod null on the interval engine)."""
    if isinstance(space, FiniteAtomicSpace):
        atoms = set(space.atoms)
        return set(T.mapping) == atoms and all(v in atoms for v in T.mapping.values())
    if isinstance(space, CountableAtomicSpace):
        return True  # TailResidueMap already guarantees images >= 1
    if isinstance(space, IntervalSpace):
        dom_ok = space.carrier.difference(T.domain()).is_empty()
        img = forward_image(T, space.carrier, 1)
        return dom_ok and img.subset_of(space.carrier)
    raise EngineMismatch(f"unknown space {space!r}")
