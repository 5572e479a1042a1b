"""Canonical measurable-set representations for the three space engines.

Three families, one per engine:

* ``AtomSet`` — finite collection of atom ids.
* ``StructuredSet`` — subset of N = {1, 2, ...} given by a finite part below
  a threshold plus full residue classes (mod m) above it.
* ``IntervalUnion`` — finite union of intervals with rational (or infinite)
  endpoints, normalised modulo null sets.

Every class canonicalises on construction, so structural equality decides
set equality (mod null for intervals).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .rational import INF, as_fraction


# --------------------------------------------------------------------------
# finite atomic sets


@dataclass(frozen=True)
class AtomSet:
    atoms: frozenset

    @staticmethod
    def of(items) -> "AtomSet":
        return AtomSet(frozenset(items))

    def union(self, other: "AtomSet") -> "AtomSet":
        return AtomSet(self.atoms | other.atoms)

    def intersect(self, other: "AtomSet") -> "AtomSet":
        return AtomSet(self.atoms & other.atoms)

    def difference(self, other: "AtomSet") -> "AtomSet":
        return AtomSet(self.atoms - other.atoms)

    def complement_within(self, universe) -> "AtomSet":
        return AtomSet(frozenset(universe) - self.atoms)

    def is_empty(self) -> bool:
        return not self.atoms

    def contains(self, atom) -> bool:
        return atom in self.atoms

    def __iter__(self):
        return iter(sorted(self.atoms, key=str))

    def __len__(self):
        return len(self.atoms)


EMPTY_ATOMS = AtomSet(frozenset())


# --------------------------------------------------------------------------
# structured subsets of N


@dataclass(frozen=True)
class StructuredSet:
    """finite ∪ { n > threshold : n mod modulus ∈ residues }, canonical."""

    modulus: int
    threshold: int
    finite: frozenset[int]
    residues: frozenset[int]

    @staticmethod
    def make(modulus: int, threshold: int, finite, residues) -> "StructuredSet":
        if modulus < 1:
            raise ValueError("modulus must be >= 1")
        res = frozenset(r % modulus for r in residues)
        fin = {int(n) for n in finite}
        if any(n < 1 for n in fin):
            raise ValueError("indices must be >= 1")
        thr = max(threshold, 0)
        # absorb finite members above the threshold into an enlarged threshold
        if fin and max(fin) > thr:
            new_thr = max(fin)
            for n in range(thr + 1, new_thr + 1):
                if (n % modulus) in res:
                    fin.add(n)
            thr = new_thr
        fin = {n for n in fin if n <= thr} | {
            n for n in fin if n > thr and (n % modulus) in res
        }
        # minimal modulus: smallest divisor d of modulus whose lift matches
        m = modulus
        if not res:
            m, res = 1, frozenset()
        else:
            for d in range(1, modulus + 1):
                if modulus % d:
                    continue
                base = {r % d for r in res}
                if frozenset(r for r in range(modulus) if (r % d) in base) == res:
                    m = d
                    res = frozenset(base)
                    break
        # minimal threshold
        fin = set(fin)
        while thr > 0:
            tail_says = (thr % m) in res
            fin_says = thr in fin
            if tail_says != fin_says:
                break
            fin.discard(thr)
            thr -= 1
        return StructuredSet(m, thr, frozenset(fin), res)

    @staticmethod
    def of(items) -> "StructuredSet":
        return StructuredSet.make(1, 0, items, ())

    @staticmethod
    def empty() -> "StructuredSet":
        return StructuredSet.make(1, 0, (), ())

    @staticmethod
    def all_naturals() -> "StructuredSet":
        return StructuredSet.make(1, 0, (), (0,))

    @staticmethod
    def residue_class(modulus: int, residue: int, threshold: int = 0) -> "StructuredSet":
        return StructuredSet.make(modulus, threshold, (), (residue,))

    # -- queries ------------------------------------------------------------

    def contains(self, n: int) -> bool:
        if n < 1:
            return False
        if n <= self.threshold:
            return n in self.finite
        return (n % self.modulus) in self.residues

    def is_empty(self) -> bool:
        return not self.finite and not self.residues

    def is_finite(self) -> bool:
        return not self.residues

    def members_upto(self, bound: int):
        for n in range(1, bound + 1):
            if self.contains(n):
                yield n

    def as_finite_set(self) -> frozenset[int]:
        if not self.is_finite():
            raise ValueError("set has an infinite tail")
        return self.finite

    # -- algebra ------------------------------------------------------------

    def _pointwise(self, other: "StructuredSet", op) -> "StructuredSet":
        m = lcm(self.modulus, other.modulus)
        thr = max(self.threshold, other.threshold)
        fin = {
            n
            for n in range(1, thr + 1)
            if op(self.contains(n), other.contains(n))
        }
        res = {
            t
            for t in range(m)
            if op((t % self.modulus) in self.residues, (t % other.modulus) in other.residues)
        }
        return StructuredSet.make(m, thr, fin, res)

    def union(self, other: "StructuredSet") -> "StructuredSet":
        return self._pointwise(other, lambda a, b: a or b)

    def intersect(self, other: "StructuredSet") -> "StructuredSet":
        return self._pointwise(other, lambda a, b: a and b)

    def difference(self, other: "StructuredSet") -> "StructuredSet":
        return self._pointwise(other, lambda a, b: a and not b)

    def complement(self) -> "StructuredSet":
        fin = {n for n in range(1, self.threshold + 1) if n not in self.finite}
        res = {t for t in range(self.modulus) if t not in self.residues}
        return StructuredSet.make(self.modulus, self.threshold, fin, res)

    def __str__(self):
        bits = []
        if self.finite:
            bits.append("{" + ",".join(str(n) for n in sorted(self.finite)) + "}")
        for r in sorted(self.residues):
            bits.append(f"{{n>{self.threshold}: n≡{r} (mod {self.modulus})}}")
        return " ∪ ".join(bits) if bits else "∅"


# --------------------------------------------------------------------------
# interval unions (mod null)

# An endpoint is a Fraction, or None for the unbounded end (the side of the
# pair disambiguates which infinity is meant).


def _lo_key(lo):
    return (0,) if lo is None else (1, lo)


def _lt(a, b) -> bool:
    """a < b for right-endpoint vs left-endpoint style comparisons."""
    if a is None or b is None:
        return False
    return a < b


@dataclass(frozen=True)
class IntervalUnion:
    pieces: tuple[tuple, ...]  # ((lo, hi), ...) sorted, disjoint, merged

    @staticmethod
    def make(pairs) -> "IntervalUnion":
        ivs = []
        for lo, hi in pairs:
            lo = None if lo is None else as_fraction(lo)
            hi = None if hi is None else as_fraction(hi)
            if lo is not None and hi is not None and lo >= hi:
                continue  # degenerate or empty: null, dropped
            ivs.append((lo, hi))
        ivs.sort(key=lambda p: _lo_key(p[0]))
        merged = []
        for lo, hi in ivs:
            if merged:
                plo, phi = merged[-1]
                touches = phi is None or lo is None or lo <= phi
                if touches:
                    if phi is not None and (hi is None or hi > phi):
                        merged[-1] = (plo, hi)
                    continue
            merged.append((lo, hi))
        return IntervalUnion(tuple(merged))

    @staticmethod
    def interval(lo, hi) -> "IntervalUnion":
        return IntervalUnion.make([(lo, hi)])

    @staticmethod
    def empty() -> "IntervalUnion":
        return IntervalUnion(())

    @staticmethod
    def real_line() -> "IntervalUnion":
        return IntervalUnion(((None, None),))

    # -- queries ------------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.pieces

    def length(self):
        total = Fraction(0)
        for lo, hi in self.pieces:
            if lo is None or hi is None:
                return INF
            total += hi - lo
        return total

    def contains_point(self, x) -> bool:
        """Closure membership; individual points only matter up to null sets."""
        x = as_fraction(x)
        for lo, hi in self.pieces:
            if (lo is None or lo <= x) and (hi is None or x <= hi):
                return True
        return False

    def is_bounded(self) -> bool:
        return all(lo is not None and hi is not None for lo, hi in self.pieces)

    # -- algebra (all mod null) ----------------------------------------------

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion.make(list(self.pieces) + list(other.pieces))

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        for alo, ahi in self.pieces:
            for blo, bhi in other.pieces:
                lo = blo if alo is None else (alo if blo is None else max(alo, blo))
                hi = bhi if ahi is None else (ahi if bhi is None else min(ahi, bhi))
                if lo is None or hi is None or lo < hi:
                    out.append((lo, hi))
        return IntervalUnion.make(out)

    def complement(self) -> "IntervalUnion":
        """Complement within the whole real line."""
        out = []
        prev_hi = None  # running left edge, None = -inf at start
        first = True
        for lo, hi in self.pieces:
            if first:
                if lo is not None:
                    out.append((None, lo))
                first = False
            else:
                out.append((prev_hi, lo))
            prev_hi = hi
            if hi is None:
                return IntervalUnion.make(out)
        if first:
            return IntervalUnion.real_line()
        out.append((prev_hi, None))
        return IntervalUnion.make(out)

    def difference(self, other: "IntervalUnion") -> "IntervalUnion":
        return self.intersect(other.complement())

    def complement_within(self, carrier: "IntervalUnion") -> "IntervalUnion":
        return carrier.difference(self)

    def subset_of(self, other: "IntervalUnion") -> bool:
        """Inclusion mod null sets."""
        return self.difference(other).is_empty()

    def ae_equal(self, other: "IntervalUnion") -> bool:
        return self == other  # canonical form

    def affine_image(self, a, b) -> "IntervalUnion":
        """Image under x -> a*x + b with a != 0 (exact, mod null)."""
        a, b = as_fraction(a), as_fraction(b)
        if a == 0:
            raise ValueError("degenerate affine image (slope 0) is a null set")
        out = []
        for lo, hi in self.pieces:
            p = None if lo is None else a * lo + b
            q = None if hi is None else a * hi + b
            out.append((p, q) if a > 0 else (q, p))
        return IntervalUnion.make(out)

    def affine_preimage(self, a, b) -> "IntervalUnion":
        """{x : a*x + b ∈ self} for a != 0."""
        a, b = as_fraction(a), as_fraction(b)
        if a == 0:
            raise ValueError("preimage under constant map is decided elsewhere")
        return self.affine_image(Fraction(1) / a, -b / a)

    def __str__(self):
        if not self.pieces:
            return "∅"

        def fmt(lo, hi):
            l = "-inf" if lo is None else str(lo)
            r = "inf" if hi is None else str(hi)
            return f"({l},{r})"

        return " ∪ ".join(fmt(lo, hi) for lo, hi in self.pieces)
