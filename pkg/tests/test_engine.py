import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adjent import oracle
from adjent.engine import (Config, EntropyValue, FiniteSubgroup, GrowthLawViolation, GrowthTrace,
                           InconclusiveError, Lattice, WholeGroup, check_growth_laws, check_inverse_identity,
                           check_power_identity, cotraj_init, cotraj_orders, cotraj_step, cotraj_subgroup, h,
                           hstar, kernel_of, sup_over_family)
from adjent.fpla import FpMat, FpPoly, FpVec
from adjent.intlat import FgEndo, FgGroup, LatticeSub
from adjent.operators import (BlockDiag, DirectSum, DivisibleTrivial, FiniteDim, IntEndo, LeftShift, Power,
                              RightShift, TwoSidedShift)
from adjent.suites import (random_compatible, random_invertible, random_matrix, random_rows,
                           random_sequence_op)

seeds = st.integers(0, 2 ** 32 - 1)


def ker(*idx, p=2, tag="N"):
    return kernel_of([FpVec.unit(p, i, tag) for i in idx])


def test_identity_fixpoint_at_once():
    op = FiniteDim(FpMat.identity(3, 3))
    st0 = cotraj_init(op, ker(0, p=3))
    st1 = cotraj_step(op, ker(0, p=3), st0)
    assert st1.c == [3, 3] and st1.fixpoint
    assert st0.c == [3]  # the step is functional


def test_left_shift_chain():
    assert cotraj_orders(LeftShift(2), ker(0), 6) == [2 ** n for n in range(1, 7)]
    assert cotraj_subgroup(LeftShift(2), ker(0), 3) == ker(0, 1, 2)


def test_right_shift_chain_constant():
    assert cotraj_orders(RightShift(2), ker(0), 6) == [2] * 6


def test_hstar_examples():
    r = hstar(LeftShift(2), ker(0))
    assert r.value == EntropyValue.log(2) and r.exact
    r = hstar(RightShift(2), ker(0))
    assert r.value.is_zero and r.exact
    assert r.trace.c[:16] == oracle.truncated_shift_probe(RightShift(2), [FpVec.unit(2, 0)], 16, len(r.trace.c))[:16]
    z = FgGroup(1)
    r = hstar(IntEndo(FgEndo.multiplication(z, 3)), Lattice(LatticeSub.multiples(z, 5)))
    assert r.value.is_zero and r.trace.n_stab == 1


@given(seeds)
def test_finite_dim_always_zero_exact(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5])
    op = FiniteDim(random_matrix(rng, p, rng.randrange(1, 7)))
    r = hstar(op, kernel_of(random_rows(rng, op)))
    assert r.value.is_zero and r.exact


def test_trajectory_examples():
    e0 = FiniteSubgroup((FpVec.unit(2, 0),))
    r = h(RightShift(2), e0)
    assert r.value == EntropyValue.log(2) and r.exact
    assert h(LeftShift(2), e0).value.is_zero
    assert h(FiniteDim(FpMat.identity(2, 2)), FiniteSubgroup((FpVec.unit(2, 1),))).value.is_zero
    g = FgGroup(0, (4, 2))
    assert h(IntEndo(FgEndo.identity(g)), FiniteSubgroup(((1, 1),), g)).value.is_zero


def test_family_bounds():
    ds = DirectSum((LeftShift(2),) * 3)
    fam = [kernel_of([FpVec.unit(2, (i, 0), "sum") for i in range(j)]) for j in range(1, 4)]
    assert sup_over_family(ds, fam) == EntropyValue.lower_bound(8)
    ident = FiniteDim(FpMat.identity(2, 2))
    assert sup_over_family(ident, [ker(0), ker(1)]).text() == ">= 0"
    assert sup_over_family(LeftShift(2), [ker(0)]) == EntropyValue.lower_bound(2)
    with pytest.raises(ValueError):
        sup_over_family(ident, [])


def test_power_identity_examples():
    assert check_power_identity(LeftShift(2), ker(0), 2, 3)
    assert cotraj_orders(LeftShift(2), ker(0), 6)[-1] == 2 ** 6
    assert check_power_identity(FiniteDim(FpMat.identity(2, 3)), ker(0), 3, 2)
    rng = random.Random(5)
    op = FiniteDim(random_matrix(rng, 3, 4))
    assert check_power_identity(op, kernel_of(random_rows(rng, op)), 3, 2)


def test_inverse_identity_examples():
    assert check_inverse_identity(TwoSidedShift(2), ker(0, tag="Z"), 4)
    assert cotraj_orders(TwoSidedShift(2), ker(0, tag="Z"), 4)[-1] == 16
    assert check_inverse_identity(FiniteDim(FpMat.identity(2, 2)), ker(0), 5)
    with pytest.raises(ValueError):
        check_inverse_identity(LeftShift(2), ker(0), 2)


def test_inconclusive_carries_trace():
    with pytest.raises(InconclusiveError) as info:
        hstar(LeftShift(2), ker(30), Config(max_steps=5))
    assert info.value.trace.c == [2, 4, 8, 16, 32]


def test_power_of_shift_is_exact():
    r = hstar(Power(2, LeftShift(2)), ker(0))
    assert r.value == EntropyValue.log(2) and r.exact
    r = hstar(Power(1, RightShift(2)), ker(10, 11))
    assert r.value.is_zero and r.exact


def test_window_heuristic_flagged_inexact():
    op = Power(2, DirectSum((LeftShift(2), LeftShift(2))))
    r = hstar(op, kernel_of([FpVec.unit(2, (0, 0), "sum")]))
    assert r.value == EntropyValue.log(2) and not r.exact


def test_mixed_direct_sum_rows_exact():
    op = DirectSum((FiniteDim(FpMat.identity(2, 2)), TwoSidedShift(2)))
    rows = [FpVec.from_dict(2, {(0, 0): 1, (1, -6): 1}, "sum"), FpVec.from_dict(2, {(1, 5): 1}, "sum")]
    r = hstar(op, kernel_of(rows))
    assert r.exact and r.value == EntropyValue.log(2)


def test_growth_law_checker_rejects_bad_traces():
    with pytest.raises(GrowthLawViolation):
        check_growth_laws(GrowthTrace([2, 3]))
    with pytest.raises(GrowthLawViolation):
        check_growth_laws(GrowthTrace([2, 4, 16]))  # alpha grows
    check_growth_laws(GrowthTrace([4, 8, 16, 32]))


def test_divisible_whole_group():
    r = hstar(DivisibleTrivial(), WholeGroup())
    assert r.value.is_zero and r.trace.c == [1, 1]


@given(seeds)
def test_growth_laws_on_random_runs(seed):
    rng = random.Random(seed)
    op = random_sequence_op(rng)
    r = hstar(op, kernel_of(random_rows(rng, op)), Config(max_steps=128))
    check_growth_laws(r.trace)
    assert r.value.kind in ("zero", "log")


@given(seeds)
def test_anti_monotonicity(seed):
    rng = random.Random(seed)
    op = random_sequence_op(rng)
    small = random_rows(rng, op)
    big = small + random_rows(rng, op)
    cn = cotraj_orders(op, kernel_of(big), 10)
    cm = cotraj_orders(op, kernel_of(small), 10)
    assert all(a >= b for a, b in zip(cn, cm))


@given(seeds)
def test_conjugation_invariance(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5])
    d = rng.randrange(1, 5)
    m = random_matrix(rng, p, d)
    xi = random_invertible(rng, p, d)
    from adjent.fpla import inverse
    xi_inv = inverse(xi)
    rows = random_rows(rng, FiniteDim(m))
    # xi N = ker(a xi^-1)
    moved = [FpVec.from_dense(p, xi_inv.transpose().mul_vec(r.to_dense(d))) for r in rows]
    a = cotraj_orders(FiniteDim(m), kernel_of(rows), 8)
    b = cotraj_orders(FiniteDim(xi @ m @ xi_inv), kernel_of(moved), 8)
    assert a == b


@given(seeds)
def test_direct_sum_multiplicative(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5])
    a, b = random_sequence_op(rng, p=p, kind="left_shift"), random_sequence_op(rng, p=p)
    if isinstance(b, DirectSum):
        return
    ra, rb = random_rows(rng, a), random_rows(rng, b)
    rs = [FpVec.from_dict(p, {(0, k): c for k, c in r.support}, "sum") for r in ra]
    rs += [FpVec.from_dict(p, {(1, k): c for k, c in r.support}, "sum") for r in rb]
    s = DirectSum((a, b))
    ca, cb, cs = (cotraj_orders(o, kernel_of(r), 8) for o, r in ((a, ra), (b, rb), (s, rs)))
    assert cs == [x * y for x, y in zip(ca, cb)]


@given(seeds)
def test_quasi_periodic_ops_are_zero(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3])
    blocks = tuple(FpPoly(p, tuple(rng.randrange(p) for _ in range(rng.randrange(1, 3))) + (1,))
                   for _ in range(rng.randrange(1, 3)))
    op = Power(rng.randrange(1, 4), BlockDiag(p, blocks, "repeat_last"))
    r = hstar(op, kernel_of(random_rows(rng, op)))
    assert r.value.is_zero and r.exact


@given(seeds)
def test_commuting_pair_inclusion(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3])
    d = rng.randrange(1, 5)
    m = random_matrix(rng, p, d)
    g = FpPoly(p, tuple(rng.randrange(p) for _ in range(3)))
    psi = g(m)
    phi, psi_op = FiniteDim(m), FiniteDim(psi)
    N = kernel_of(random_rows(rng, phi))
    stable = cotraj_subgroup(psi_op, N, d + 2)
    lhs = cotraj_orders(FiniteDim(m @ psi), N, 6)
    rhs = cotraj_orders(phi, stable, 6)
    assert all(a <= b for a, b in zip(lhs, rhs))


def _finite_instance(rng):
    g = FgGroup(0, tuple(rng.choice([2, 3, 4, 6]) for _ in range(rng.randrange(1, 3))))
    return g, random_compatible(rng, g)


@given(seeds)
def test_lattice_matches_brute_force(seed):
    rng = random.Random(seed)
    g, phi = _finite_instance(rng)
    gens = [tuple(rng.randrange(d) for d in g.torsion) for _ in range(rng.randrange(0, 3))]
    N = LatticeSub.from_generators(g, gens)
    assert cotraj_orders(IntEndo(phi), Lattice(N), 6) == oracle.brute_cotrajectory(
        g.torsion, phi.matrix.tolist(), gens, 6)


def _cosets(elems, H):
    return {x: frozenset(tuple((a + b) % d for a, b, d in zip(x, h, H[1])) for h in H[0]) for x in elems}


@given(seeds)
def test_quotient_and_finite_index_bounds(seed):
    rng = random.Random(seed)
    g, phi = _finite_instance(rng)
    G = oracle.ExplicitGroup(g.torsion)
    mat = phi.matrix.tolist()
    subs = oracle.enumerate_subgroups(g.torsion)
    invariant = [H for H in subs if all(G.apply(mat, x) in H for x in H)]
    H = rng.choice(invariant)
    over = [N for N in subs if H <= N]
    N = rng.choice(over)
    c = oracle.brute_cotrajectory(g.torsion, mat, oracle.generators_of(g.torsion, N), 6)
    # quotient: cotrajectory of phi-bar on G/H, on cosets
    cos = _cosets(G.elements, (H, g.torsion))
    Nq = {cos[x] for x in N}
    Bq, cq = set(Nq), []
    img = {cos[x]: cos[G.apply(mat, x)] for x in G.elements}
    for _ in range(6):
        cq.append(len(set(cos.values())) // len(Bq))
        Bq = {y for y in Nq if img[y] in Bq}
    assert all(a <= b for a, b in zip(cq, c))
    # restriction to H: c_n / c'_n <= [G:H]
    NH = [x for x in H if x in N]
    B, cr = set(NH), []
    for _ in range(6):
        cr.append(len(H) // len(B))
        B = {x for x in NH if G.apply(mat, x) in B}
    assert all(a <= b * (G.order // len(H)) for a, b in zip(c, cr))


@given(seeds)
def test_invariant_subgroup_fixpoint_at_one(seed):
    rng = random.Random(seed)
    g, phi = _finite_instance(rng)
    mat = phi.matrix.tolist()
    G = oracle.ExplicitGroup(g.torsion)
    subs = [H for H in oracle.enumerate_subgroups(g.torsion) if all(G.apply(mat, x) in H for x in H)]
    H = rng.choice(subs)
    N = LatticeSub.from_generators(g, oracle.generators_of(g.torsion, H))
    r = hstar(IntEndo(phi), Lattice(N))
    assert r.value.is_zero and r.trace.n_stab == 1
    assert oracle.brute_cotrajectory(g.torsion, mat, list(H), 4) == [G.order // len(H)] * 4


@given(seeds)
def test_truncated_probe_agrees_with_engine(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3])
    op = rng.choice([LeftShift(p), RightShift(p), TwoSidedShift(p, rng.choice([1, -1])),
                     BlockDiag(p, (FpPoly(p, (1, 1, 1)),), "repeat_last")])
    tag = "Z" if isinstance(op, TwoSidedShift) else "N"
    lo = 20 if tag == "Z" else 0
    rows = [FpVec.from_dict(p, {lo + rng.randrange(6): rng.randrange(1, p) for _ in range(2)}, tag)
            for _ in range(rng.randrange(1, 3))]
    n = 8
    brute = oracle.truncated_shift_probe(op, rows, 40, n)
    assert cotraj_orders(op, kernel_of(rows), n) == brute



@given(seeds)
def test_exact_results_survive_longer_runs(seed):
    rng = random.Random(seed)
    op = random_sequence_op(rng)
    N = kernel_of(random_rows(rng, op, max_terms=2))
    r = hstar(op, N)
    if not r.exact:
        return
    c = cotraj_orders(op, N, len(r.trace.c) + 24)
    alpha = r.value.alpha if r.value.kind == "log" else 1
    assert c[:len(r.trace.c)] == r.trace.c
    assert all(b == a * alpha for a, b in zip(c[len(r.trace.c) - 1:], c[len(r.trace.c):]))
