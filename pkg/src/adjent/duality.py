"""Duality for finite abelian groups and its sequence-space counterpart.

A finite group ``Z/d_1 + ... + Z/d_s`` is identified with its character
group through the pairing ``<x, y> = sum x_i y_i / d_i  (mod 1)``, so
annihilators and adjoints are subgroups and matrices of the same group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

from .engine import FiniteSubgroup, cotraj_orders, kernel_of, traj_orders
from .fpla import FpVec
from .intlat import (FgEndo, FgGroup, IntMat, LatticeSub, image, integer_kernel, invariant_factors,
                     is_invariant, preimage)
from .operators import LeftShift, RightShift, TwoSidedShift, dual_operator


@dataclass(frozen=True)
class FiniteAbGroup:
    """Z/d_1 + ... + Z/d_s with elements as residue tuples.

    The moduli need not form a divisibility chain; `invariant_factors`
    gives the canonical chain.
    """

    moduli: tuple

    def __post_init__(self):
        if any(int(d) < 1 for d in self.moduli):
            raise ValueError("moduli must be positive")
        object.__setattr__(self, "moduli", tuple(int(d) for d in self.moduli if int(d) > 1))

    @property
    def fg(self) -> FgGroup:
        return FgGroup(0, self.moduli)

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.moduli) if self.moduli else 1

    def invariant_factors(self) -> List[int]:
        return [d for d in invariant_factors(IntMat.diag(list(self.moduli))) if d > 1] if self.moduli else []

    def elements(self):
        return self.fg.elements()

    def reduce(self, x):
        return tuple(a % d for a, d in zip(x, self.moduli))


def _fg(G) -> FgGroup:
    if isinstance(G, FiniteAbGroup):
        return G.fg
    if isinstance(G, FgGroup) and G.is_finite():
        return G
    raise ValueError("duality needs a finite abelian group")


def pairing(G, x: Sequence[int], y: Sequence[int]) -> Fraction:
    """<x, y> as an exact rational in [0, 1)."""
    g = _fg(G)
    return sum((Fraction(a * b, d) for a, b, d in zip(x, y, g.torsion)), Fraction(0)) % 1


def _sub(G, H) -> LatticeSub:
    g = _fg(G)
    if isinstance(H, LatticeSub):
        if H.ambient != g:
            raise ValueError("subgroup of a different group")
        return H
    return LatticeSub.from_generators(g, [tuple(h) for h in H])


def annihilator(H, G) -> LatticeSub:
    """H-perp = {y : <h, y> = 0 for every h in H}.

    Solves ``sum_i h_i (L / d_i) y_i = 0 mod L`` (L the exponent) for each
    generator h as an integer kernel.
    """
    g = _fg(G)
    H = _sub(G, H)
    s = g.dim
    if s == 0:
        return LatticeSub.zero(g)
    L = math.lcm(*g.torsion)
    gens = [g.reduce(r) for r in H.basis]
    gens = [x for x in gens if any(x)]
    if not gens:
        return LatticeSub.whole(g)
    # unknowns y_1..y_s and one slack per generator
    rows = [[x[i] * (L // g.torsion[i]) for i in range(s)] + [L if j == k else 0 for j in range(len(gens))]
            for k, x in enumerate(gens)]
    kern = integer_kernel(IntMat.from_rows(rows, s + len(gens)))
    return LatticeSub.from_generators(g, [tuple(z[:s]) for z in kern])


def adjoint(phi, G=None) -> FgEndo:
    """phi* with <phi x, y> = <x, phi* y>: M*_(ji) = M_ij d_j / d_i mod d_j."""
    if isinstance(phi, FgEndo):
        endo = phi
    else:
        endo = FgEndo(_fg(G), IntMat.from_rows(phi))
    errs = endo.compatibility_errors()
    if errs:
        raise ValueError("incompatible endomorphism: " + "; ".join(errs))
    g = _fg(endo.group)
    d = g.torsion
    s = g.dim
    m = endo.matrix.data
    star = [[0] * s for _ in range(s)]
    for i in range(s):
        for j in range(s):
            star[j][i] = (m[i][j] * d[j] // d[i]) % d[j]
    return FgEndo(g, IntMat.from_rows(star, s))


def preimage_power(phi: FgEndo, H: LatticeSub, n: int) -> LatticeSub:
    for _ in range(n):
        H = preimage(phi, H)
    return H


def image_power(phi: FgEndo, H: LatticeSub, n: int) -> LatticeSub:
    for _ in range(n):
        H = image(phi, H)
    return H


def check_perp_identity(phi, H, n: int, G=None) -> bool:
    """(phi^-n H)-perp = (phi*)^n H-perp, and H invariant iff H-perp is phi*-invariant."""
    if n < 0:
        raise ValueError("n >= 0")
    endo = phi if isinstance(phi, FgEndo) else FgEndo(_fg(G), IntMat.from_rows(phi))
    H = _sub(endo.group, H)
    star = adjoint(endo)
    hp = annihilator(H, endo.group)
    left = annihilator(preimage_power(endo, H, n), endo.group)
    right = image_power(star, hp, n)
    return left == right and is_invariant(endo, H) == is_invariant(star, hp)


def check_duality_theorem(op, rows: Sequence[FpVec], n_max: int) -> bool:
    """|C_n(op, ker rows)| = |T_n(dual op, span rows)| for every n <= n_max.

    Left side: cotrajectory engine pulling functionals back through op.
    Right side: trajectory engine pushing the same rows forward through
    the separately built dual operator.
    """
    if not rows:
        raise ValueError("rows must be nonempty")
    left = cotraj_orders(op, kernel_of(rows), n_max)
    gens = tuple(FpVec(r.p, r.support, r.tag) for r in rows)
    right = traj_orders(dual_operator(op), FiniteSubgroup(gens), n_max)
    return left == right


def dual_of_shift(op):
    """Right shift -> left shift, left shift -> right shift, two-sided -> its inverse."""
    if not isinstance(op, (RightShift, LeftShift, TwoSidedShift)):
        raise ValueError(f"{getattr(op, 'kind', op)} is not a shift")
    return dual_operator(op)


def perp_chain_ok(phi: FgEndo, H: LatticeSub, n_max: int) -> bool:
    """`check_perp_identity` for every n in 0..n_max, iterating both sides once."""
    star = adjoint(phi)
    hp = annihilator(H, phi.group)
    if is_invariant(phi, H) != is_invariant(star, hp):
        return False
    pre, img = H, hp
    for n in range(n_max + 1):
        if annihilator(pre, phi.group) != img:
            return False
        pre, img = preimage(phi, pre), image(star, img)
    return True
