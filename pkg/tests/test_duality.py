import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adjent import oracle
from adjent.duality import (FiniteAbGroup, adjoint, annihilator, check_duality_theorem, check_perp_identity,
                            dual_of_shift, pairing, perp_chain_ok)
from adjent.fpla import FpMat, FpVec
from adjent.intlat import FgEndo, IntMat, LatticeSub, add, intersect
from adjent.operators import FiniteDim, LeftShift, RightShift, TwoSidedShift
from adjent.suites import compatible_matrices, random_compatible, random_rows, random_sequence_op

seeds = st.integers(0, 2 ** 32 - 1)
GROUPS = [(8,), (4, 2), (2, 2, 2), (9, 3), (6,), (4, 4)]


def sub(G, gens):
    return LatticeSub.from_generators(G.fg, gens)


def elems(H):
    return {tuple(x) for x in H.ambient.elements() if H.contains(x)}


def test_group_basics():
    G = FiniteAbGroup((4, 1, 2))
    assert G.moduli == (4, 2) and G.order == 8 and G.exponent == 4
    assert FiniteAbGroup((2, 3)).invariant_factors() == [6]
    with pytest.raises(ValueError):
        FiniteAbGroup((0,))


def test_pairing_values():
    G = FiniteAbGroup((4, 2))
    assert pairing(G, (1, 1), (1, 1)) == Fraction(3, 4)
    assert pairing(G, (2, 0), (2, 1)) == 0


def test_annihilator_small():
    G = FiniteAbGroup((4,))
    assert elems(annihilator([(2,)], G)) == {(0,), (2,)}
    G8 = FiniteAbGroup((8,))
    assert elems(annihilator([(4,)], G8)) == {(k,) for k in range(0, 8, 2)}
    assert elems(annihilator([], G8)) == set(G8.elements())


def test_adjoint_example():
    G = FiniteAbGroup((4, 2))
    phi = FgEndo(G.fg, IntMat.from_rows([[1, 2], [1, 1]]))
    star = adjoint(phi)
    for x in G.elements():
        for y in G.elements():
            assert pairing(G, phi(x), y) == pairing(G, x, star(y))
    assert adjoint(star).reduced() == phi.reduced()
    with pytest.raises(ValueError):
        adjoint([[1, 1], [0, 1]], FiniteAbGroup((4, 2)))


def test_perp_identity_cyclic():
    G = FiniteAbGroup((8,))
    phi = FgEndo(G.fg, IntMat.from_rows([[2]]))
    H = sub(G, [(4,)])
    for n in range(5):
        assert check_perp_identity(phi, H, n)
    with pytest.raises(ValueError):
        check_perp_identity(phi, H, -1)


def test_perp_identity_exhaustive_small():
    G = FiniteAbGroup((4, 2))
    subs = [sub(G, oracle.generators_of(G.moduli, H)) for H in oracle.enumerate_subgroups(G.moduli)]
    for m in compatible_matrices(G):
        phi = FgEndo(G.fg, IntMat.from_rows(m))
        for H in subs:
            assert perp_chain_ok(phi, H, 3)


@pytest.mark.parametrize("moduli", GROUPS)
def test_perp_lattice_laws(moduli):
    G = FiniteAbGroup(moduli)
    subs = [sub(G, oracle.generators_of(moduli, H)) for H in oracle.enumerate_subgroups(moduli)]
    rng = random.Random(sum(moduli))
    for _ in range(30):
        a, b = rng.choice(subs), rng.choice(subs)
        pa, pb = annihilator(a, G), annihilator(b, G)
        assert annihilator(add(a, b), G) == intersect(pa, pb)
        assert annihilator(intersect(a, b), G) == add(pa, pb)
        assert annihilator(pa, G) == a
        assert len(elems(a)) * len(elems(pa)) == G.order


@given(seeds)
def test_adjoint_is_involutive_and_adjoint(seed):
    rng = random.Random(seed)
    G = FiniteAbGroup(rng.choice(GROUPS))
    phi = random_compatible(rng, G.fg)
    star = adjoint(phi)
    assert adjoint(star).reduced() == phi.reduced()
    x = tuple(rng.randrange(d) for d in G.moduli)
    y = tuple(rng.randrange(d) for d in G.moduli)
    assert pairing(G, phi(x), y) == pairing(G, x, star(y))


def test_duality_theorem_examples():
    assert check_duality_theorem(LeftShift(2), [FpVec.unit(2, 0)], 8)
    assert check_duality_theorem(RightShift(3), [FpVec.unit(3, 2)], 8)
    assert check_duality_theorem(TwoSidedShift(2), [FpVec.unit(2, 0, "Z")], 8)
    assert check_duality_theorem(FiniteDim(FpMat.from_rows(2, [[0, 1], [1, 1]])), [FpVec.unit(2, 0)], 6)
    with pytest.raises(ValueError):
        check_duality_theorem(LeftShift(2), [], 3)


@given(seeds)
def test_duality_theorem_random(seed):
    rng = random.Random(seed)
    op = random_sequence_op(rng)
    assert check_duality_theorem(op, random_rows(rng, op), 12)


def test_dual_of_shift_table():
    assert dual_of_shift(RightShift(2)) == LeftShift(2)
    assert dual_of_shift(LeftShift(5)) == RightShift(5)
    assert dual_of_shift(TwoSidedShift(3)) == TwoSidedShift(3, -1)
    with pytest.raises(ValueError):
        dual_of_shift(FiniteDim(FpMat.identity(2, 1)))
