"""Kernel chains: exact matrix oracle and set-identity membership."""

import random
from fractions import Fraction as F

from lorentz_ops.chains import (
    Matrix,
    OrderVerdict,
    finite_ascent_descent,
    horizon_chain,
    kernel_basis_functions,
    kernel_dimension,
    kernel_membership,
    operator_matrix,
    rank_chain,
)
from lorentz_ops.lorentz import SimpleFunction
from lorentz_ops.operators import AffineWeight, FiniteWeight, OperatorSpec, TailWeight
from lorentz_ops.rational import QQi
from lorentz_ops.sets import AtomSet, IntervalUnion
from lorentz_ops.spaces import (
    AtomMap,
    CountableAtomicSpace,
    FiniteAtomicSpace,
    IntervalSpace,
    PiecewiseAffineMap,
    TailResidueMap,
)


def test_matrix_rank_and_null_space():
    A = Matrix.of([[0, 1, 0], [0, 0, 1], [0, 0, 1]])
    assert A.rank() == 2
    assert A.power(2).rank() == 1
    assert A.power(5) == A.power(2)
    I3 = Matrix.identity(3)
    assert I3 * A == A and A * I3 == A
    (v,) = A.null_space()
    assert all(x.is_zero() for x in A.apply(v))


def test_complex_matrix_rank():
    C = Matrix.of([[QQi.of(0, 1), QQi.of(1)], [QQi.of(1), QQi.of(0, -1)]])
    assert C.rank() == 1
    (v,) = C.null_space()
    assert all(x.is_zero() for x in C.apply(v))


def test_finite_ascent_descent_on_a_chain():
    sp = FiniteAtomicSpace.of({"a": 1, "b": 2, "c": 1})
    T = AtomMap.of({"a": "b", "b": "c", "c": "c"})
    asc, desc = finite_ascent_descent(OperatorSpec.composition(sp, T))
    assert (asc.kind, asc.value) == ("exact", 2)
    assert (desc.kind, desc.value) == ("exact", 2)
    assert rank_chain(OperatorSpec.composition(sp, T)).stabilization() == 2


def test_finite_multiplication_orders():
    sp = FiniteAtomicSpace.of({"a": 1, "b": 2, "c": 1})
    with_zero = FiniteWeight.of({"a": 0, "b": 2, "c": 3})
    asc, desc = finite_ascent_descent(OperatorSpec.multiplication(sp, with_zero))
    assert asc.value == 1 and desc.value == 1
    no_zero = FiniteWeight.of({"a": 1, "b": 2, "c": 3})
    asc0, desc0 = finite_ascent_descent(OperatorSpec.multiplication(sp, no_zero))
    assert asc0.value == 0 and desc0.value == 0


def test_kernel_basis_matches_membership():
    sp = FiniteAtomicSpace.of({"a": 1, "b": 2, "c": 1})
    T = AtomMap.of({"a": "b", "b": "c", "c": "c"})
    u = FiniteWeight.of({"a": 0, "b": 2, "c": 3})
    spec = OperatorSpec.weighted(sp, u, T)
    for k in range(4):
        basis = kernel_basis_functions(spec, k)
        assert len(basis) == kernel_dimension(spec, k)
        for f in basis:
            assert kernel_membership(spec, f, k)


def test_matrix_route_equals_set_route_on_indicators():
    rng = random.Random(7)
    for trial in range(200):
        n = rng.randint(1, 5)
        atoms = [f"x{i}" for i in range(n)]
        sp = FiniteAtomicSpace.of({a: rng.randint(1, 3) for a in atoms})
        T = AtomMap.of({a: rng.choice(atoms) for a in atoms})
        u = FiniteWeight.of({a: rng.choice([0, 0, 1, 2]) for a in atoms})
        kind = rng.choice(["mu", "ct", "wut", "wut_hat"])
        if kind == "mu":
            spec = OperatorSpec.multiplication(sp, u)
        elif kind == "ct":
            spec = OperatorSpec.composition(sp, T)
        elif kind == "wut":
            spec = OperatorSpec.weighted(sp, u, T)
        else:
            spec = OperatorSpec.weighted_inner(sp, u, T)
        k = rng.randint(0, 3)
        Mk = operator_matrix(spec).power(k)
        chosen = rng.sample(atoms, rng.randint(1, n))
        f = SimpleFunction.indicator(sp, AtomSet.of(chosen))
        vec = tuple(QQi.of(1) if a in chosen else QQi.of(0) for a in atoms)
        matrix_zero = all(v.is_zero() for v in Mk.apply(vec))
        assert matrix_zero == kernel_membership(spec, f, k), (trial, kind, k)


def test_horizon_probe_on_weighted_shift():
    csp = CountableAtomicSpace.counting()
    shift = TailResidueMap.make(0, {}, 1, [1])
    u = TailWeight.make(1, {1: 0}, 1, [(1, 0)])
    rep = horizon_chain(OperatorSpec.weighted(csp, u, shift), horizon=5)
    assert rep.verdict.kind == "at_least" and rep.verdict.value == 5
    assert [s.k for s in rep.separations] == [0, 1, 2, 3, 4]
    assert rep.separations[0].witness_set.contains(1)


def test_horizon_probe_identity_finds_nothing():
    csp = CountableAtomicSpace.counting()
    rep = horizon_chain(
        OperatorSpec.composition(csp, TailResidueMap.identity()), horizon=3
    )
    assert rep.verdict.kind == "unknown"
    assert not rep.separations


def test_horizon_probe_dyadic_witnesses():
    isp = IntervalSpace.lebesgue(IntervalUnion.interval(0, 1))
    half = PiecewiseAffineMap.make([((0, 1), F(1, 2), 0)])
    rep = horizon_chain(OperatorSpec.composition(isp, half), horizon=4)
    assert rep.verdict.value == 4
    for s in rep.separations:
        scale = IntervalUnion.interval(F(1, 2 ** (s.k + 1)), F(1, 2 ** s.k))
        assert s.witness_set.ae_equal(scale)


def test_horizon_probe_dead_weight_stops_at_one():
    isp = IntervalSpace.lebesgue(IntervalUnion.interval(0, 1))
    half = PiecewiseAffineMap.make([((0, 1), F(1, 2), 0)])
    u = AffineWeight.make([((F(1, 2), 1), 1, 0)])
    rep = horizon_chain(OperatorSpec.weighted(isp, u, half), horizon=4)
    assert rep.verdict.kind == "at_least" and rep.verdict.value == 1
    assert [s.k for s in rep.separations] == [0]


def test_verdict_comparisons():
    assert OrderVerdict("at_least", 2).agrees_with_exact(3)
    assert not OrderVerdict("at_least", 2).agrees_with_exact(1)
    assert str(OrderVerdict("exact", 2, "why")) == "exactly 2: why"
