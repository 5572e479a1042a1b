"""Measure-space primitives: masses, preimages, forward images, densities."""

from fractions import Fraction as F

import pytest

from lorentz_ops.rational import INF
from lorentz_ops.sets import AtomSet, IntervalUnion, StructuredSet
from lorentz_ops.spaces import (
    AtomMap,
    CountableAtomicSpace,
    FiniteAtomicSpace,
    IntervalSpace,
    PiecewiseAffineMap,
    PiecewiseConstant,
    TailResidueMap,
    forward_image,
    measure_of,
    preimage,
    radon_nikodym,
    zero_set,
)


@pytest.fixture
def finite():
    return FiniteAtomicSpace.of({"a": F(1), "b": F(2), "c": F(3)})


@pytest.fixture
def naturals():
    return CountableAtomicSpace.counting()


@pytest.fixture
def unit():
    return IntervalSpace.lebesgue(IntervalUnion.interval(0, 1))


# ------------------------------------------------------------------ measure --

def test_finite_measure(finite):
    assert measure_of(finite, AtomSet.of(["a", "c"])) == 4
    assert measure_of(finite, AtomSet.of([])) == 0
    assert measure_of(finite, finite.whole_set()) == 6


def test_countable_measure_with_tail(naturals):
    assert measure_of(naturals, StructuredSet.of([3, 5])) == 2
    assert measure_of(naturals, StructuredSet.residue_class(2, 0)) is INF
    weighted = CountableAtomicSpace.of(2, {1: F(5), 2: F(1, 2)}, F(1))
    assert weighted.weight(1) == 5 and weighted.weight(2) == F(1, 2)
    assert weighted.weight(9) == 1
    assert measure_of(weighted, StructuredSet.of([1, 2, 3])) == F(13, 2)


def test_interval_measure_with_density():
    carrier = IntervalUnion.interval(0, 2)
    rho = PiecewiseConstant.make([((0, 1), F(2)), ((1, 2), F(1, 2))])
    space = IntervalSpace(carrier, rho)
    assert measure_of(space, IntervalUnion.interval(0, 2)) == F(5, 2)
    assert measure_of(space, IntervalUnion.interval(F(1, 2), F(3, 2))) == F(5, 4)
    line = IntervalSpace.lebesgue(IntervalUnion.real_line())
    assert measure_of(line, IntervalUnion.real_line()) is INF


def test_density_must_live_on_carrier():
    with pytest.raises(ValueError):
        IntervalSpace(
            IntervalUnion.interval(0, 1),
            PiecewiseConstant.make([((0, 2), F(1))]),
        )


# ---------------------------------------------------------------- preimages --

def test_atom_map_preimage_and_image(finite):
    T = AtomMap.of({"a": "b", "b": "c", "c": "c"})
    assert preimage(T, AtomSet.of(["c"])) == AtomSet.of(["b", "c"])
    assert preimage(T, AtomSet.of(["a"])) == AtomSet.of([])
    assert preimage(T, AtomSet.of(["c"]), 2) == AtomSet.of(["a", "b", "c"])
    assert preimage(T, AtomSet.of(["c"]), 0) == AtomSet.of(["c"])
    assert forward_image(T, AtomSet.of(["a", "b"])) == AtomSet.of(["b", "c"])
    assert forward_image(T, finite.whole_set(), 3) == AtomSet.of(["c"])


def test_tail_residue_map_backward_shift():
    # T(1) = T(2) = 1, otherwise T(n) = n - 1
    T = TailResidueMap.make(2, {1: 1, 2: 1}, 1, [-1])
    assert [T.at(n) for n in (1, 2, 3, 4)] == [1, 1, 2, 3]
    assert preimage(T, StructuredSet.of([1])) == StructuredSet.of([1, 2])
    assert preimage(T, StructuredSet.of([3])) == StructuredSet.of([4])
    assert preimage(T, StructuredSet.of([1]), 3) == StructuredSet.of([1, 2, 3, 4])
    tail = StructuredSet.residue_class(1, 0, threshold=4)  # {n > 4}
    assert forward_image(T, tail) == StructuredSet.residue_class(1, 0, threshold=3)


def test_tail_residue_map_parity_shifts():
    # evens climb by 2 on the tail, odds above the exceptions drop by 2
    T = TailResidueMap.make(4, {1: 1, 2: 4, 3: 2, 4: 6}, 2, [2, -2])
    assert [T.at(n) for n in (1, 2, 3, 4, 5, 6, 7, 8)] == [1, 4, 2, 6, 3, 8, 5, 10]
    assert preimage(T, StructuredSet.of([4])) == StructuredSet.of([2])
    assert preimage(T, StructuredSet.of([2])) == StructuredSet.of([3])
    odds = StructuredSet.residue_class(2, 1)
    assert forward_image(T, StructuredSet.of([5, 7])) == StructuredSet.of([3, 5])
    assert preimage(T, odds).intersect(StructuredSet.of([5])).contains(5)


def test_piecewise_affine_preimage(unit):
    half = PiecewiseAffineMap.make([((0, 1), F(1, 2), 0)])
    A = IntervalUnion.interval(F(1, 4), F(1, 2))
    assert preimage(half, A) == IntervalUnion.interval(F(1, 2), 1)
    assert preimage(half, A, 2).ae_equal(IntervalUnion.empty())
    assert forward_image(half, IntervalUnion.interval(0, 1)) == IntervalUnion.interval(0, F(1, 2))


def test_fold_map_two_branch_preimage():
    T = PiecewiseAffineMap.make([((-1, 0), F(-1, 2), 0), ((0, 1), F(1, 2), 0)])
    A = IntervalUnion.interval(0, F(1, 4))
    got = preimage(T, A)
    want = IntervalUnion.make([(F(-1, 2), 0), (0, F(1, 2))])
    assert got.ae_equal(want)
    assert forward_image(T, IntervalUnion.interval(-1, 1)).ae_equal(
        IntervalUnion.interval(0, F(1, 2))
    )


# ----------------------------------------------------------- radon-nikodym --

def test_finite_pushforward_density(finite):
    T = AtomMap.of({"a": "b", "b": "b", "c": "b"})
    h = radon_nikodym(finite, T, 1)
    # everything lands on b: mass 6 over weight 2
    assert h.at("b") == 3
    assert h.at("a") == 0 and h.at("c") == 0
    assert zero_set(finite, h) == AtomSet.of(["a", "c"])
    assert zero_set(finite, radon_nikodym(finite, T, 0)).is_empty()


def test_countable_pushforward_density():
    space = CountableAtomicSpace.counting()
    T = TailResidueMap.make(2, {1: 1, 2: 1}, 1, [-1])
    h = radon_nikodym(space, T, 1)
    assert h.at(1) == 2  # {1, 2} lands there
    assert h.at(2) == 1
    two_step = radon_nikodym(space, T, 2)
    assert two_step.at(1) == 3  # {1, 2, 3}
    assert zero_set(space, h).is_empty()


def test_interval_halving_density(unit):
    half = PiecewiseAffineMap.make([((0, 1), F(1, 2), 0)])
    h = radon_nikodym(unit, half, 1)
    # mu T^{-1}(dx) = 2 dx on the image (0, 1/2), zero beyond
    assert h.at(F(1, 4)) == 2
    assert h.at(F(3, 4)) == 0
    assert zero_set(unit, h).ae_equal(IntervalUnion.interval(F(1, 2), 1))


def test_fold_density_adds_branches():
    space = IntervalSpace.lebesgue(IntervalUnion.interval(-1, 1))
    T = PiecewiseAffineMap.make([((-1, 0), F(-1, 2), 0), ((0, 1), F(1, 2), 0)])
    h = radon_nikodym(space, T, 1)
    assert h.at(F(1, 4)) == 4  # two branches, each stretching by 2
    assert h.at(F(3, 4)) == 0
    assert h.at(F(-1, 2)) == 0
    assert zero_set(space, h).ae_equal(
        IntervalUnion.make([(-1, 0), (F(1, 2), 1)])
    )


def test_identity_maps_report_themselves():
    assert TailResidueMap.identity().is_identity()
    assert PiecewiseAffineMap.identity(IntervalUnion.interval(0, 1)).is_identity()
    assert AtomMap.of({"a": "a"}).is_identity()
    assert not AtomMap.of({"a": "b", "b": "a"}).is_identity()
