import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adjent.fpla import FpMat, FpPoly, FpVec, poly_apply
from adjent.intlat import FgEndo, FgGroup, IntMat
from adjent.operators import (BlockDiag, DirectSum, FiniteDim, Functional, IndexTagError, IntEndo,
                              InvalidOperator, LeftShift, PolyOf, Power, RightShift, TwoSidedShift, apply,
                              dual_operator, from_json, pullback, space_tag, to_json, truncate, validate)
from adjent.suites import random_rows, random_sequence_op

seeds = st.integers(0, 2 ** 32 - 1)


def e(i, p=2, tag="N"):
    return FpVec.unit(p, i, tag)


def f(i, p=2, tag="N"):
    return Functional.unit(p, i, tag)


def test_shift_actions():
    assert apply(RightShift(2), e(0)) == e(1)
    assert apply(LeftShift(2), e(0)).is_zero()
    assert apply(TwoSidedShift(2), e(-1, tag="Z")) == e(0, tag="Z")


def test_shift_pullbacks():
    assert pullback(LeftShift(2), f(0)) == f(1)
    assert pullback(RightShift(2), f(0)).is_zero()


def test_finite_dim_pullback_is_row_times_matrix():
    m = FpMat.from_rows(3, [[1, 2], [0, 1]])
    a = Functional.from_dense(3, [1, 1])
    assert pullback(FiniteDim(m), a).to_dense(2) == list(m.vec_mul([1, 1]))


def test_index_tag_mismatch():
    with pytest.raises(IndexTagError):
        apply(RightShift(2), e(0, tag="Z"))
    with pytest.raises(IndexTagError):
        apply(TwoSidedShift(2), e(0))
    with pytest.raises(IndexTagError):
        apply(RightShift(3), e(0))


def test_validate():
    validate(LeftShift(2))
    with pytest.raises(InvalidOperator):
        validate(DirectSum((LeftShift(2), LeftShift(3))))
    with pytest.raises(InvalidOperator) as info:
        validate(IntEndo(FgEndo(FgGroup(0, (4, 2)), IntMat.from_rows([[0, 1], [0, 0]]))))
    assert info.value.problems
    with pytest.raises(InvalidOperator):
        validate(BlockDiag(2, (FpPoly(2, (1, 0, 1)), FpPoly(2, (1,)))))
    with pytest.raises(InvalidOperator):
        validate(Power(0, LeftShift(2)))
    with pytest.raises(InvalidOperator):
        validate(DirectSum(()))


def test_truncations():
    assert truncate(RightShift(2), 3).tolist() == [[0, 0, 0], [1, 0, 0], [0, 1, 0]]
    assert truncate(LeftShift(2), 3).tolist() == [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
    c = FpPoly(2, (1, 1, 1))
    assert truncate(BlockDiag(2, (c,)), 2) == FpMat.companion(c)
    with pytest.raises(ValueError):
        truncate(IntEndo(FgEndo.identity(FgGroup(1))), 2)


def test_block_diag_grow_rule():
    op = BlockDiag(2, (), "grow_linear")
    assert [op.block_poly(n).degree() for n in range(4)] == [1, 2, 3, 4]
    assert str(op.block_poly(1)) == "X^2 + 1"
    # X acts on the second block F_2[X]/(X^2 - 1): e_1 -> e_2 -> e_1
    assert apply(op, e(1)) == e(2)
    assert apply(op, e(2)) == e(1)


def test_json_schema_examples():
    assert from_json({"p": 2, "kind": "left_shift"}) == LeftShift(2)
    op = from_json({"kind": "block_diag", "p": 2, "blocks": [[1, 1, 1]], "repeat": "grow_linear"})
    assert op.repeat == "grow_linear"
    ds = from_json({"kind": "direct_sum", "p": 3, "parts": [{"kind": "left_shift"}, {"kind": "right_shift"}]})
    assert ds.parts == (LeftShift(3), RightShift(3))
    ie = from_json({"kind": "int_endo", "free_rank": 2, "torsion": [4, 2], "matrix": [[1, 0, 0, 0]] * 4})
    assert isinstance(ie, IntEndo)
    pw = from_json({"kind": "power", "k": 2, "inner": {"kind": "poly_of", "p": 5, "poly": [1, 1],
                                                       "inner": {"kind": "finite_dim", "matrix": [[2]]}}})
    assert pw.inner.inner.p == 5
    with pytest.raises(InvalidOperator):
        from_json({"kind": "left_shift"})


@given(seeds)
def test_json_round_trip(seed):
    op = random_sequence_op(random.Random(seed))
    assert from_json(to_json(op)) == op


@given(seeds)
def test_adjunction(seed):
    # a(op v) = (a o op)(v)
    rng = random.Random(seed)
    op = random_sequence_op(rng)
    for _ in range(3):
        (a,) = random_rows(rng, op, max_rows=1)
        (v,) = random_rows(rng, op, max_rows=1)
        a = Functional(a.p, a.support, a.tag)
        assert a(apply(op, v)) == pullback(op, a)(v)


@given(seeds)
def test_dual_operator_forward_equals_pullback(seed):
    rng = random.Random(seed)
    op = random_sequence_op(rng)
    (a,) = random_rows(rng, op, max_rows=1)
    fa = Functional(a.p, a.support, a.tag)
    assert apply(dual_operator(op), a).support == pullback(op, fa).support


@given(seeds, st.integers(1, 4))
def test_power_pullback_iterates(seed, k):
    rng = random.Random(seed)
    op = random_sequence_op(rng)
    (a,) = random_rows(rng, op, max_rows=1)
    a = Functional(a.p, a.support, a.tag)
    it = a
    for _ in range(k):
        it = pullback(op, it)
    assert pullback(Power(k, op), a) == it


@given(seeds)
def test_poly_of_matches_poly_apply(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5])
    d = rng.randrange(1, 5)
    m = FpMat.from_rows(p, [[rng.randrange(p) for _ in range(d)] for _ in range(d)], d)
    g = FpPoly(p, tuple(rng.randrange(p) for _ in range(rng.randrange(1, 4))))
    v = FpVec.from_dense(p, [rng.randrange(p) for _ in range(d)])
    assert apply(PolyOf(g, FiniteDim(m)), v) == poly_apply(g, m, v)


def test_direct_sum_keys():
    op = DirectSum((LeftShift(2), RightShift(2)))
    assert space_tag(op) == "sum"
    v = FpVec.from_dict(2, {(0, 0): 1, (1, 0): 1}, "sum")
    assert apply(op, v) == FpVec.unit(2, (1, 1), "sum")
