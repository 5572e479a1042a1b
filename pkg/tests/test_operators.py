"""Weights, operator application, and the boundedness screen."""

from fractions import Fraction as F

import pytest

from lorentz_ops.lorentz import SimpleFunction
from lorentz_ops.operators import (
    AffineWeight,
    FiniteWeight,
    NonSimpleResult,
    OperatorSpec,
    TailWeight,
    apply_operator,
    boundedness_report,
    compose_weight,
    constant_weight,
    ess_inf2,
    ess_sup2,
    superlevel_set,
    weight_bounded_away,
    weight_in_Linf,
    weight_nonzero_ae,
    weight_zero_set,
)
from lorentz_ops.rational import INF, QQi
from lorentz_ops.sets import AtomSet, IntervalUnion, StructuredSet
from lorentz_ops.spaces import (
    AtomMap,
    CountableAtomicSpace,
    FiniteAtomicSpace,
    IntervalSpace,
    PiecewiseAffineMap,
    TailResidueMap,
)


class TestFiniteEngine:
    space = FiniteAtomicSpace.of({"a": 1, "b": 2, "c": 1})
    u = FiniteWeight.of({"a": 2, "b": 0, "c": QQi.of(0, 1)})
    T = AtomMap.of({"a": "b", "b": "c", "c": "c"})

    def test_weight_predicates(self):
        sp, u = self.space, self.u
        assert weight_zero_set(sp, u) == AtomSet.of(["b"])
        assert not weight_nonzero_ae(sp, u)
        assert ess_sup2(sp, u) == 4 and ess_inf2(sp, u) == 0
        assert weight_in_Linf(sp, u) and not weight_bounded_away(sp, u)
        assert superlevel_set(sp, u, F(1)) == AtomSet.of(["a"])

    def test_apply_all_four_kinds(self):
        sp, u, T = self.space, self.u, self.T
        f = SimpleFunction.indicator(sp, AtomSet.of(["c"]))
        g = apply_operator(OperatorSpec.weighted(sp, u, T), f)
        assert g.value_at_atom("b") == QQi.of(0, 1)
        assert g.value_at_atom("c") == QQi.of(0, 1)
        assert g.value_at_atom("a").is_zero()
        g2 = apply_operator(OperatorSpec.weighted_inner(sp, u, T), f)
        assert g2.value_at_atom("c") == QQi.of(0, 1)
        assert g2.value_at_atom("b").is_zero()
        g3 = apply_operator(OperatorSpec.multiplication(sp, u), f)
        assert g3.value_at_atom("c") == QQi.of(0, 1)
        g4 = apply_operator(OperatorSpec.composition(sp, T), f, power=2)
        assert all(g4.value_at_atom(x) == QQi.of(1) for x in "abc")

    def test_bounded(self):
        rep = boundedness_report(OperatorSpec.weighted(self.space, self.u, self.T))
        assert rep.verdict == "bounded"


class TestCountableEngine:
    space = CountableAtomicSpace.counting()

    def test_unbounded_index_weight(self):
        u = TailWeight.identity_index()
        assert u.at(7) == QQi.of(7)
        assert weight_zero_set(self.space, u).is_empty()
        assert not weight_in_Linf(self.space, u)
        assert weight_bounded_away(self.space, u)
        assert ess_inf2(self.space, u) == 1

    def test_affine_class_roots(self):
        # u(n) = n - 6 on evens, 3 on odds: vanishes exactly at n = 6
        u = TailWeight.make(0, {}, 2, [(-6, 1), (3, 0)])
        zs = weight_zero_set(self.space, u)
        assert zs.contains(6) and not zs.contains(4) and not zs.contains(8)
        assert ess_inf2(self.space, u) == 0
        evens_past = StructuredSet.make(2, 7, set(), {0})
        assert ess_inf2(self.space, u, evens_past) == 4
        slv = superlevel_set(self.space, u, 9)
        assert slv.contains(2) and slv.contains(10)
        assert not slv.contains(4) and not slv.contains(6) and not slv.contains(3)

    def test_compose_and_apply(self):
        u = TailWeight.make(0, {}, 2, [(-6, 1), (3, 0)])
        T = TailResidueMap.make(0, {}, 1, [2])  # n -> n + 2
        cw = compose_weight(self.space, u, T)
        assert cw.at(4) == QQi.of(0) and cw.at(6) == QQi.of(2) and cw.at(3) == QQi.of(3)
        spec = OperatorSpec.weighted(self.space, u, T)
        evens = StructuredSet.residue_class(2, 0)
        with pytest.raises(NonSimpleResult):
            # u(n+2) is genuinely affine over an infinite set
            apply_operator(spec, SimpleFunction.indicator(self.space, evens))
        g = apply_operator(spec, SimpleFunction.indicator(self.space, StructuredSet.of([6, 7])))
        assert g.value_at_atom(5) == QQi.of(3)
        assert g.value_at_atom(4).is_zero()

    def test_boundedness_screen(self):
        uid = TailWeight.identity_index()
        u_const = TailWeight.make(0, {}, 2, [(2, 0), (7, 0)])
        u_affine = TailWeight.make(0, {}, 2, [(-6, 1), (3, 0)])
        T = TailResidueMap.make(0, {}, 1, [2])
        assert boundedness_report(
            OperatorSpec.multiplication(self.space, uid)).verdict == "not_bounded"
        assert boundedness_report(
            OperatorSpec.weighted(self.space, u_affine, T)).verdict == "inconclusive"
        assert boundedness_report(
            OperatorSpec.weighted(self.space, u_const, T)).verdict == "bounded"


class TestIntervalEngine:
    space = IntervalSpace.lebesgue(IntervalUnion.interval(0, 4))
    u = AffineWeight.make([((0, 1), 0, 1), ((1, 3), 2, 0)])

    def test_values_and_predicates(self):
        sp, u = self.space, self.u
        assert u.at(F(1, 2)) == F(1, 2) and u.at(2) == 2 and u.at(F(7, 2)) == 0
        assert weight_zero_set(sp, u).ae_equal(IntervalUnion.interval(3, 4))
        assert ess_sup2(sp, u) == 4 and ess_inf2(sp, u) == 0
        assert weight_in_Linf(sp, u)
        assert superlevel_set(sp, u, 1).ae_equal(IntervalUnion.interval(1, 3))

    def test_unbounded_weight(self):
        ray = IntervalSpace.lebesgue(IntervalUnion.interval(0, None))
        ux = AffineWeight.make([((0, None), 0, 1)])
        assert not weight_in_Linf(ray, ux)
        assert ess_sup2(ray, ux) is INF
        assert boundedness_report(
            OperatorSpec.multiplication(ray, ux)).verdict == "not_bounded"

    def test_compose_and_apply_via_halving(self):
        half = PiecewiseAffineMap.make([((0, 4), F(1, 2), 0)])
        cw = compose_weight(self.space, self.u, half)
        assert cw.at(1) == F(1, 2) and cw.at(3) == 2
        spec = OperatorSpec.weighted(self.space, self.u, half)
        with pytest.raises(NonSimpleResult):
            apply_operator(spec, SimpleFunction.indicator(
                self.space, IntervalUnion.interval(0, 1)))
        g = apply_operator(spec, SimpleFunction.indicator(
            self.space, IntervalUnion.interval(1, 2)))
        (value, region), = g.pieces
        assert value == QQi.of(2)
        assert region.ae_equal(IntervalUnion.interval(2, 4))
        assert boundedness_report(spec).verdict == "bounded"

    def test_singular_branch_is_inconclusive(self):
        flat = PiecewiseAffineMap.make([((0, 4), 0, 1)])
        rep = boundedness_report(OperatorSpec.composition(self.space, flat))
        assert rep.verdict == "inconclusive"
        assert "singular" in rep.reason

    def test_constant_weight(self):
        assert constant_weight(self.space).at(2) == 1
