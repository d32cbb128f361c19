"""Integer matrices, Hermite/Smith normal forms and finitely generated groups.

A finitely generated abelian group is presented as
``G = Z^r + Z/d_1 + ... + Z/d_s`` on coordinates ``0..r+s-1``.  A subgroup
``N`` is stored as the full preimage lattice ``L`` in ``Z^(r+s)``; it always
contains the relation lattice spanned by ``d_i e_(r+i)``, and
``G/N = Z^(r+s)/L``.  Lattice bases are kept in Hermite normal form so two
subgroups are equal exactly when their stored bases are equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .fpla import FpMat, check_prime

Vector = Tuple[int, ...]


class UndecidableError(ValueError):
    """Raised when the narrow test has no rule for a group descriptor."""


# ---------------------------------------------------------------------------
# Integer matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntMat:
    rows: int
    cols: int
    data: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMat":
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        if any(len(r) != cols for r in data):
            raise ValueError("ragged integer matrix")
        return cls(len(data), cols, data)

    @classmethod
    def identity(cls, n: int) -> "IntMat":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def diag(cls, entries: Sequence[int]) -> "IntMat":
        n = len(entries)
        return cls.from_rows([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def scalar(cls, n: int, m: int) -> "IntMat":
        return cls.diag([m] * n)

    def transpose(self) -> "IntMat":
        if not self.rows:
            return IntMat(self.cols, 0, tuple(() for _ in range(self.cols)))
        return IntMat(self.cols, self.rows, tuple(zip(*self.data)))

    def __matmul__(self, other: "IntMat") -> "IntMat":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        cols_t = list(zip(*other.data)) if other.rows else [()] * other.cols
        return IntMat(self.rows, other.cols, tuple(
            tuple(sum(a * b for a, b in zip(r, c)) for c in cols_t) for r in self.data))

    def mul_vec(self, v: Sequence[int]) -> Vector:
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.data)

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.data)

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def power(self, k: int) -> "IntMat":
        out = IntMat.identity(self.rows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def tolist(self) -> List[List[int]]:
        return [list(r) for r in self.data]


def det(m: IntMat) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    n = m.rows
    a = [list(r) for r in m.data]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hnf_rows(gens: Sequence[Sequence[int]], ncols: int) -> List[Vector]:
    """Row-style Hermite normal form of the lattice spanned by ``gens``.

    Output rows are in echelon form with positive pivots, entries above each
    pivot reduced into ``[0, pivot)``, zero rows dropped.
    """
    a = [list(g) for g in gens if any(g)]
    r = 0
    for c in range(ncols):
        if r == len(a):
            break
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, len(a)):
            if a[i][c]:
                x, y = a[r][c], a[i][c]
                g, s, t = _xgcd(x, y)
                u, v = x // g, y // g
                top = [s * p + t * q for p, q in zip(a[r], a[i])]
                bot = [-v * p + u * q for p, q in zip(a[r], a[i])]
                a[r], a[i] = top, bot
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
        pv = a[r][c]
        for i in range(r):
            q = a[i][c] // pv
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return [tuple(row) for row in a[:r] if any(row)]


def hnf(m: IntMat) -> IntMat:
    """Column-style HNF: the returned columns are a canonical basis of the
    lattice spanned by the columns of ``m`` (lower triangular, positive
    pivots, entries left of each pivot reduced modulo it)."""
    rows = hnf_rows(m.columns(), m.rows)
    if not rows:
        return IntMat(m.rows, 0, tuple(() for _ in range(m.rows)))
    return IntMat.from_rows(rows).transpose()


def integer_kernel(a: IntMat) -> List[Vector]:
    """Basis (HNF rows) of {x in Z^n : a x = 0}."""
    m, n = a.rows, a.cols
    aug = [list(a.column(j)) + [int(i == j) for i in range(n)] for j in range(n)]
    out = hnf_rows(aug, m + n)
    return [tuple(r[m:]) for r in out if not any(r[:m])]


def snf(m: IntMat) -> Tuple[List[int], IntMat, IntMat]:
    """Smith normal form ``(d, U, V)`` with ``U m V = diag(d)``, ``d_i | d_(i+1)``."""
    rows, cols = m.rows, m.cols
    a = [list(r) for r in m.data]
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, q):  # row_dst += q row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):
        for r in a:
            r[dst] += q * r[src]
        for r in v:
            r[dst] += q * r[src]

    for t in range(min(rows, cols)):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not nz:
            break
        _, i0, j0 = min(nz)
        swap_rows(t, i0)
        swap_cols(t, j0)
        while True:
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(t, i, -(a[i][t] // a[t][t]))
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(t, j, -(a[t][j] // a[t][t]))
            rest = [(abs(a[i][t]), i, t) for i in range(t + 1, rows) if a[i][t]]
            rest += [(abs(a[t][j]), t, j) for j in range(t + 1, cols) if a[t][j]]
            if rest:
                _, i1, j1 = min(rest)
                if j1 == t:
                    swap_rows(t, i1)
                else:
                    swap_cols(t, j1)
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % a[t][t]), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    d = [a[i][i] for i in range(min(rows, cols))]
    return d, IntMat.from_rows(u, rows), IntMat.from_rows(v, cols)


def invariant_factors(m: IntMat) -> List[int]:
    return snf(m)[0]


# ---------------------------------------------------------------------------
# Finitely generated groups and their subgroups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FgGroup:
    """``Z^free_rank + Z/torsion[0] + ... + Z/torsion[-1]``.

    Any cyclic decomposition is accepted (each modulus >= 2); the divisibility
    chain is available from :meth:`canonical`.
    """

    free_rank: int = 0
    torsion: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(d) for d in self.torsion))
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        if any(d < 2 for d in self.torsion):
            raise ValueError(f"torsion moduli must be >= 2, got {self.torsion}")

    @property
    def dim(self) -> int:
        return self.free_rank + len(self.torsion)

    @property
    def moduli(self) -> Tuple[int, ...]:
        """Per-coordinate modulus, 0 on free coordinates."""
        return (0,) * self.free_rank + self.torsion

    def is_finite(self) -> bool:
        return self.free_rank == 0

    def order(self) -> Union[int, float]:
        return math.prod(self.torsion) if self.is_finite() else math.inf

    def exponent(self) -> int:
        return math.lcm(*self.torsion) if self.torsion else 1

    def relations(self) -> List[Vector]:
        n = self.dim
        return [tuple(d if k == self.free_rank + i else 0 for k in range(n))
                for i, d in enumerate(self.torsion)]

    def reduce(self, x: Sequence[int]) -> Vector:
        return tuple(v % d if d else v for v, d in zip(x, self.moduli))

    def canonical(self) -> "FgGroup":
        """Same group with torsion rewritten as invariant factors d_1 | d_2 | ..."""
        if not self.torsion:
            return self
        d = [x for x in invariant_factors(IntMat.diag(self.torsion)) if x > 1]
        return FgGroup(self.free_rank, tuple(d))

    def elements(self) -> List[Vector]:
        if not self.is_finite():
            raise ValueError("infinite group has no element list")
        out: List[Vector] = [()]
        for d in self.torsion:
            out = [e + (k,) for e in out for k in range(d)]
        return out


@dataclass(frozen=True)
class LatticeSub:
    """Subgroup of ``ambient`` stored as its HNF preimage lattice (rows)."""

    ambient: FgGroup
    basis: Tuple[Vector, ...]

    @classmethod
    def from_generators(cls, ambient: FgGroup, gens: Sequence[Sequence[int]]) -> "LatticeSub":
        n = ambient.dim
        for g in gens:
            if len(g) != n:
                raise ValueError(f"generator {tuple(g)} has wrong length for rank {n}")
        rows = hnf_rows(list(gens) + ambient.relations(), n)
        return cls(ambient, tuple(rows))

    @classmethod
    def whole(cls, ambient: FgGroup) -> "LatticeSub":
        n = ambient.dim
        return cls.from_generators(ambient, [tuple(int(i == j) for j in range(n)) for i in range(n)])

    @classmethod
    def zero(cls, ambient: FgGroup) -> "LatticeSub":
        return cls.from_generators(ambient, [])

    @classmethod
    def multiples(cls, ambient: FgGroup, m: int) -> "LatticeSub":
        """The fully invariant subgroup mG."""
        n = ambient.dim
        return cls.from_generators(ambient, [tuple(m if i == j else 0 for j in range(n)) for i in range(n)])

    def matrix(self) -> IntMat:
        """Basis as columns (column-style HNF)."""
        if not self.basis:
            return IntMat(self.ambient.dim, 0, tuple(() for _ in range(self.ambient.dim)))
        return IntMat.from_rows(self.basis).transpose()

    def is_full_rank(self) -> bool:
        return len(self.basis) == self.ambient.dim

    def contains(self, x: Sequence[int]) -> bool:
        v = list(x)
        for row in self.basis:
            c = next(i for i, a in enumerate(row) if a)
            if v[c] % row[c]:
                return False
            q = v[c] // row[c]
            v = [a - q * b for a, b in zip(v, row)]
        return not any(v)

    def contains_sub(self, other: "LatticeSub") -> bool:
        return all(self.contains(r) for r in other.basis)

    def generators(self) -> List[Vector]:
        """Reduced, nonzero basis vectors as group elements."""
        out = []
        for r in self.basis:
            e = self.ambient.reduce(r)
            if any(e) and e not in out:
                out.append(e)
        return out

    def order(self) -> Union[int, float]:
        """|N| for a subgroup of a finite group."""
        if not self.ambient.is_finite():
            raise ValueError("order of a subgroup of an infinite group")
        return self.ambient.order() // subgroup_index(self)


def subgroup_index(n: LatticeSub) -> Union[int, float]:
    """[G:N]; ``math.inf`` when N has infinite index."""
    if not n.is_full_rank():
        return math.inf
    return math.prod(row[i] for i, row in enumerate(n.basis))


def _check_same(a: LatticeSub, b: LatticeSub):
    if a.ambient != b.ambient:
        raise ValueError("subgroups of different groups")


def intersect(n: LatticeSub, m: LatticeSub) -> LatticeSub:
    """N cap M, from the kernel of the stacked bases [B_N | -B_M]."""
    _check_same(n, m)
    k = n.ambient.dim
    bn, bm = list(n.basis), list(m.basis)
    if not bn or not bm:
        return LatticeSub.from_generators(n.ambient, [])
    cols = [list(r) for r in bn] + [[-x for x in r] for r in bm]
    a = IntMat.from_rows(cols, k).transpose()
    gens = []
    for z in integer_kernel(a):
        coeff = z[:len(bn)]
        gens.append(tuple(sum(c * r[i] for c, r in zip(coeff, bn)) for i in range(k)))
    return LatticeSub.from_generators(n.ambient, gens)


def add(n: LatticeSub, m: LatticeSub) -> LatticeSub:
    _check_same(n, m)
    return LatticeSub.from_generators(n.ambient, list(n.basis) + list(m.basis))


# ---------------------------------------------------------------------------
# Endomorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FgEndo:
    """Endomorphism x -> M x of a f.g. group (column j is the image of e_j)."""

    group: FgGroup
    matrix: IntMat

    def __post_init__(self):
        n = self.group.dim
        if self.matrix.rows != n or self.matrix.cols != n:
            raise ValueError(f"matrix must be {n}x{n}")

    def compatibility_errors(self) -> List[str]:
        mods = self.group.moduli
        errs = []
        for i, di in enumerate(mods):
            for j, dj in enumerate(mods):
                if not dj:
                    continue
                v = self.matrix.data[i][j] * dj
                if (di and v % di) or (not di and v):
                    errs.append(
                        f"entry ({i},{j})={self.matrix.data[i][j]}: image of an order-{dj} generator "
                        f"needs M_ij*{dj} = 0 mod {di or 'infinity'}")
        return errs

    def is_compatible(self) -> bool:
        return not self.compatibility_errors()

    def __call__(self, x: Sequence[int]) -> Vector:
        return self.group.reduce(self.matrix.mul_vec(x))

    def reduced(self) -> "FgEndo":
        """Same map with row i reduced mod d_i; equal maps give equal reduced forms."""
        mods = self.group.moduli
        rows = [[a % d if d else a for a in row] for row, d in zip(self.matrix.data, mods)]
        return FgEndo(self.group, IntMat.from_rows(rows, self.group.dim))

    def compose(self, other: "FgEndo") -> "FgEndo":
        """self after other."""
        return FgEndo(self.group, self.matrix @ other.matrix).reduced()

    def power(self, k: int) -> "FgEndo":
        return FgEndo(self.group, self.matrix.power(k)).reduced()

    @classmethod
    def multiplication(cls, group: FgGroup, m: int) -> "FgEndo":
        return cls(group, IntMat.scalar(group.dim, m))

    @classmethod
    def identity(cls, group: FgGroup) -> "FgEndo":
        return cls(group, IntMat.identity(group.dim))


def preimage(phi: FgEndo, n: LatticeSub) -> LatticeSub:
    """phi^-1 N = {x : M x in L}, from the kernel of [M | -B_N]."""
    if phi.group != n.ambient:
        raise ValueError("endomorphism and subgroup live on different groups")
    k = phi.group.dim
    bn = list(n.basis)
    a = IntMat.from_rows([list(phi.matrix.data[i]) + [-r[i] for r in bn] for i in range(k)], k + len(bn))
    gens = [tuple(z[:k]) for z in integer_kernel(a)]
    return LatticeSub.from_generators(n.ambient, gens)


def image(phi: FgEndo, n: LatticeSub) -> LatticeSub:
    """phi N."""
    return LatticeSub.from_generators(n.ambient, [phi.matrix.mul_vec(r) for r in n.basis])


def is_invariant(phi: FgEndo, n: LatticeSub) -> bool:
    return all(n.contains(phi.matrix.mul_vec(r)) for r in n.basis)


def subgroup_order_of(ambient: FgGroup, gens: Sequence[Sequence[int]]) -> int:
    """Order of the subgroup generated by finite-order elements ``gens``."""
    r = ambient.free_rank
    for g in gens:
        if any(g[:r]):
            raise ValueError(f"element {tuple(g)} has infinite order")
    torsion = FgGroup(0, ambient.torsion)
    sub = LatticeSub.from_generators(torsion, [tuple(g[r:]) for g in gens])
    return sub.order()


# ---------------------------------------------------------------------------
# Narrow groups and reduction mod p
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Divisible:
    """Marker for a divisible group (no proper finite-index subgroups)."""

    name: str = "D"


@dataclass(frozen=True)
class FpSequenceSpace:
    """Marker for F_p^(N), the countable direct sum of copies of Z/p."""

    p: int


@dataclass(frozen=True)
class NarrowVerdict:
    narrow: bool
    reason: str

    def __bool__(self):
        return self.narrow


def narrow_test(group) -> NarrowVerdict:
    """Decide narrowness by whether G/pG is finite for every prime p."""
    if isinstance(group, FgGroup):
        return NarrowVerdict(True, f"finitely generated: G/pG has order at most p^{group.dim} for every prime p")
    if isinstance(group, Divisible):
        return NarrowVerdict(True, "divisible: G = pG, so G/pG = 0 for every prime p")
    if isinstance(group, FpSequenceSpace):
        return NarrowVerdict(False, f"G/{group.p}G = G is an infinite {group.p}-bounded group")
    raise UndecidableError(f"undecidable for this descriptor: {group!r}")


def surviving_coordinates(group: FgGroup, p: int) -> List[int]:
    r = group.free_rank
    return list(range(r)) + [r + i for i, d in enumerate(group.torsion) if d % p == 0]


def reduce_mod_p(phi: FgEndo, p: int) -> FpMat:
    """Matrix of the map induced by phi on G/pG = F_p^k."""
    check_prime(p)
    keep = surviving_coordinates(phi.group, p)
    return FpMat.from_rows(p, [[phi.matrix.data[i][j] for j in keep] for i in keep], len(keep))
