import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adjent.classify import (AlgebraicCert, NonAlgebraicCert, QuasiPeriodicCert, cert_from_json, cert_to_json,
                             classify_ent_star, consistency_probe, quasi_periodic, reduction_certificates,
                             verify_certificate, verify_reduction)
from adjent.engine import EntropyValue, FiniteSubgroup, cotraj_orders, h, kernel_of
from adjent.fpla import FpMat, FpPoly, FpVec, min_poly
from adjent.intlat import FgEndo, FgGroup
from adjent.operators import (BlockDiag, DirectSum, DivisibleTrivial, FiniteDim, IntEndo, LeftShift, PolyOf,
                              Power, RightShift, TwoSidedShift)
from adjent.suites import random_int_endo, random_matrix, random_rows, random_sequence_op, random_zoo_op

seeds = st.integers(0, 2 ** 32 - 1)

SHIFTS = [RightShift(2), LeftShift(3), TwoSidedShift(5), TwoSidedShift(2, -1)]


def grow(p=2):
    return BlockDiag(p, (), "grow_linear")


@pytest.mark.parametrize("op", SHIFTS + [grow(), grow(3)], ids=lambda o: o.kind)
def test_infinite_with_verified_certificate(op):
    value, cert = classify_ent_star(op)
    assert value == EntropyValue.infinite()
    assert isinstance(cert, NonAlgebraicCert) and verify_certificate(cert, op)


@pytest.mark.parametrize("op", [
    FiniteDim(FpMat.from_rows(2, [[0, 1], [1, 1]])),
    FiniteDim(FpMat.identity(3, 4)),
    IntEndo(FgEndo.multiplication(FgGroup(2, (4,)), 3)),
    DivisibleTrivial(),
    BlockDiag(2, (FpPoly(2, (1, 1)), FpPoly(2, (1, 1, 1))), "repeat_last"),
    PolyOf(FpPoly(2, (1, 1)), FiniteDim(FpMat.identity(2, 2))),
    DirectSum((FiniteDim(FpMat.identity(2, 2)), BlockDiag(2, (FpPoly(2, (0, 1)),), "repeat_last"))),
], ids=lambda o: o.kind)
def test_zero_with_verified_certificate(op):
    value, cert = classify_ent_star(op)
    assert value.is_zero and verify_certificate(cert, op)


def test_mixed_direct_sum_is_infinite():
    op = DirectSum((FiniteDim(FpMat.identity(2, 1)), LeftShift(2)))
    value, cert = classify_ent_star(op)
    assert value.kind == "infinite" and verify_certificate(cert, op)


def test_verify_examples():
    m = FpMat.from_rows(2, [[1, 1], [0, 1]])
    assert verify_certificate(AlgebraicCert(2, min_poly(m), "min poly"), FiniteDim(m))
    assert verify_certificate(QuasiPeriodicCert(0, 1), FiniteDim(FpMat.identity(2, 3)))
    assert verify_certificate(NonAlgebraicCert(2, "right_shift", (FpPoly(2, (1, 0, 1)),)), RightShift(2))


def test_bad_certificates_rejected():
    m = FpMat.from_rows(2, [[1, 1], [0, 1]])
    assert not verify_certificate(AlgebraicCert(2, FpPoly(2, (1, 1)), "wrong"), FiniteDim(m))
    assert not verify_certificate(QuasiPeriodicCert(0, 1), FiniteDim(m))
    assert not verify_certificate(NonAlgebraicCert(2, "right_shift"), FiniteDim(m))
    assert not verify_certificate(NonAlgebraicCert(2, "left_shift", (FpPoly(2, (1, 1)),)), RightShift(2))
    _, cert = classify_ent_star(RightShift(2))
    assert not verify_certificate(cert, FiniteDim(FpMat.identity(2, 2)))


def test_certificate_json_round_trip():
    ops = SHIFTS + [grow(), FiniteDim(FpMat.identity(2, 2)), DivisibleTrivial(),
                    IntEndo(FgEndo.identity(FgGroup(1))), Power(2, LeftShift(2)),
                    DirectSum((LeftShift(2), FiniteDim(FpMat.identity(2, 1))))]
    for op in ops:
        _, cert = classify_ent_star(op)
        back = cert_from_json(cert_to_json(cert))
        assert back == cert and verify_certificate(back, op)
    with pytest.raises(ValueError):
        cert_from_json({"kind": "nope"})


def test_quasi_periodic_examples():
    assert quasi_periodic(FpMat.identity(2, 3)) == (0, 1)
    assert quasi_periodic(FpMat.from_rows(2, [[0, 1], [0, 0]])) == (2, 3)
    c = FpMat.companion(FpPoly(2, (1, 1, 1)))
    s, t = quasi_periodic(c)
    assert c.power(4) == c and (s, t) == (0, 3)
    with pytest.raises(ValueError):
        quasi_periodic(FpMat.from_rows(2, [[1, 0]], 2))


@given(seeds)
def test_quasi_periodic_is_least(seed):
    rng = random.Random(seed)
    m = random_matrix(rng, rng.choice([2, 3]), rng.randrange(1, 4))
    s, t = quasi_periodic(m)
    assert m.power(s) == m.power(t)
    powers = [m.power(k) for k in range(t)]
    assert len(set(powers)) == t
    assert verify_certificate(QuasiPeriodicCert(s, t), FiniteDim(m))


def test_consistency_probe_examples():
    rep = consistency_probe(FiniteDim(FpMat.identity(2, 3)), budget=10)
    assert rep.ok and set(rep.member_values) == {"0"}
    rep = consistency_probe(DirectSum((LeftShift(2),) * 4), budget=4)
    assert rep.ok and rep.lower_bound == EntropyValue.lower_bound(16)
    rep = consistency_probe(RightShift(2), budget=6)
    assert rep.ok and rep.value.kind == "infinite" and rep.note


@given(seeds)
def test_zoo_agreement(seed):
    rng = random.Random(seed)
    op = random_zoo_op(rng)
    value, cert = classify_ent_star(op)
    assert value.kind in ("zero", "infinite")
    assert verify_certificate(cert, op)
    assert consistency_probe(op, budget=3, seed=seed).ok


@given(seeds)
def test_reduction_path_agrees(seed):
    rng = random.Random(seed)
    op = random_int_endo(rng)
    for cert in reduction_certificates(op, [2, 3, 5]):
        assert verify_reduction(op, cert)
    assert classify_ent_star(op)[0].is_zero


@given(seeds)
def test_poly_of_counting_bound(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3])
    op = random_sequence_op(rng, p=p)
    f = FpPoly(p, tuple(rng.randrange(p) for _ in range(rng.randrange(1, 3))) + (1,))
    k = f.degree()
    rows = random_rows(rng, op)
    n = 5
    lhs = cotraj_orders(PolyOf(f, op), kernel_of(rows), n)
    rhs = cotraj_orders(op, kernel_of(rows), k * n)
    assert all(lhs[i] <= rhs[k * (i + 1) - 1] for i in range(n))


def test_positive_trajectory_entropy_forces_infinite():
    op = RightShift(2)
    assert h(op, FiniteSubgroup((FpVec.unit(2, 0),))).value.kind == "log"
    assert classify_ent_star(op)[0].kind == "infinite"
