"""Brute-force references for tiny instances.

Nothing here shares code with the engines beyond group arithmetic:
subgroups are explicit element sets and truncated operators are dense
matrices built from the forward action alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Tuple

from .fpla import FpMat, rank
from .operators import apply_coeffs, op_prime, space_tag

MAX_ORDER = 512
MAX_WINDOW = 64

Element = Tuple[int, ...]


class OracleBoundError(ValueError):
    pass


@dataclass(frozen=True)
class ExplicitGroup:
    """Z/d_1 + ... + Z/d_s listed element by element (order at most 512)."""

    moduli: Tuple[int, ...]

    def __post_init__(self):
        order = 1
        for d in self.moduli:
            order *= d
        if order > MAX_ORDER:
            raise OracleBoundError(f"group order {order} exceeds {MAX_ORDER}")

    @property
    def elements(self) -> List[Element]:
        return list(itertools.product(*[range(d) for d in self.moduli]))

    @property
    def order(self) -> int:
        return len(self.elements)

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.moduli))

    def zero(self) -> Element:
        return tuple(0 for _ in self.moduli)

    def apply(self, matrix: Sequence[Sequence[int]], x: Element) -> Element:
        return tuple(sum(r[j] * x[j] for j in range(len(x))) % d for r, d in zip(matrix, self.moduli))

    def closure(self, gens) -> FrozenSet[Element]:
        """Subgroup generated by ``gens``, by saturation under addition."""
        seen = {self.zero()}
        frontier = [self.zero()]
        gens = [tuple(g[i] % d for i, d in enumerate(self.moduli)) for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.add(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)


def _group(G) -> ExplicitGroup:
    if isinstance(G, ExplicitGroup):
        return G
    moduli = getattr(G, "moduli", None)
    if moduli is None:
        moduli = G
    if any(d == 0 for d in moduli):
        raise OracleBoundError("infinite group")
    return ExplicitGroup(tuple(moduli))


def enumerate_subgroups(G) -> List[FrozenSet[Element]]:
    """Every subgroup as an element set, sorted by (order, elements)."""
    g = _group(G)
    found = {g.closure([])}
    frontier = list(found)
    elems = g.elements
    while frontier:
        nxt = []
        for s in frontier:
            for x in elems:
                if x not in s:
                    t = _join(g, s, x)
                    if t not in found:
                        found.add(t)
                        nxt.append(t)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _join(g: ExplicitGroup, s: FrozenSet[Element], x: Element) -> FrozenSet[Element]:
    out = set(s)
    y = x
    while y not in s:
        out.update(g.add(y, z) for z in s)
        y = g.add(y, x)
    return frozenset(out)


def generators_of(G, subgroup: FrozenSet[Element]) -> List[Element]:
    """A small generating set for an element set (greedy)."""
    g = _group(G)
    gens: List[Element] = []
    cur = g.closure([])
    for x in sorted(subgroup):
        if x not in cur:
            gens.append(x)
            cur = g.closure(gens)
    return gens


def brute_cotrajectory(G, matrix: Sequence[Sequence[int]], N_gens, n_max: int) -> List[int]:
    """[|C_1|, ..., |C_(n_max)|] from literal element-set preimages."""
    g = _group(G)
    elems = g.elements
    N = g.closure(N_gens)
    image = {x: g.apply(matrix, x) for x in elems}
    out = []
    B = set(N)
    for n in range(1, n_max + 1):
        out.append(g.order // len(B))
        B = {x for x in N if image[x] in B}
    return out


def brute_trajectory(G, matrix: Sequence[Sequence[int]], F_gens, n_max: int) -> List[int]:
    g = _group(G)
    cur = [tuple(x) for x in F_gens]
    acc = list(cur)
    out = []
    for _ in range(n_max):
        out.append(len(g.closure(acc)))
        cur = [g.apply(matrix, x) for x in cur]
        acc += cur
    return out


def truncated_shift_probe(op, rows, d: int, n_max: int) -> List[int]:
    """[|C_1|, ..., |C_(n_max)|] computed in F_p^d from dense matrices.

    Pullbacks are computed as row-times-matrix with a matrix assembled from
    the forward action on a margin around the window; any pullback that
    leaves coordinates 0..d-1 raises OracleBoundError.
    """
    if d < 1 or d > MAX_WINDOW:
        raise OracleBoundError(f"window {d} outside 1..{MAX_WINDOW}")
    tag = space_tag(op)
    if tag not in ("N", "Z"):
        raise OracleBoundError("probe needs a natural- or integer-indexed operator")
    p = op_prime(op)
    lo = -d if tag == "Z" else 0
    hi = 2 * d
    dim = getattr(op, "dim", None)
    if dim is None and hasattr(op, "dimension"):
        dim = op.dimension()
    if dim is not None:
        hi = min(hi, dim)
    span = range(lo, hi)
    # column k of the margin matrix is op(e_k)
    cols = {k: apply_coeffs(op, {k: 1}) for k in span}

    def pull(a: dict) -> dict:
        out = {}
        for k in span:
            s = sum(a.get(i, 0) * c for i, c in cols[k].items()) % p
            if s:
                out[k] = s
        return out

    current = []
    for r in rows:
        a = dict(r.support)
        if any(not (0 <= k < d) for k in a):
            raise OracleBoundError(f"row support {sorted(a)} outside the window 0..{d - 1}")
        current.append(a)
    stacked: List[List[int]] = []
    out = []
    for n in range(1, n_max + 1):
        for a in current:
            if any(not (0 <= k < d) for k in a):
                raise OracleBoundError(f"pullback at step {n} leaves the window 0..{d - 1}")
            stacked.append([a.get(k, 0) for k in range(d)])
        out.append(p ** rank(FpMat.from_rows(p, stacked, d)))
        current = [pull(a) for a in current]
    return out
