"""Exact linear algebra over prime fields F_p.

Dense matrices (`FpMat`), sparse finitely supported vectors (`FpVec`),
polynomials (`FpPoly`) and an incremental fully reduced echelon basis for
sparse rows (`SparseEchelon`).  Over F_2 the elimination kernels pack each
row into a Python int and eliminate with XOR.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

MAX_PRIME = 2**31

Index = Hashable


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool):
        raise TypeError(f"modulus must be an int, got {type(p).__name__}")
    if p >= MAX_PRIME or not is_prime(p):
        raise ValueError(f"{p} is not a prime below 2^31")
    return p


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class FpScalar:
    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        if not 0 <= self.value < self.p:
            raise ValueError(f"{self.value} is not reduced mod {self.p}")

    @classmethod
    def of(cls, value: int, p: int) -> "FpScalar":
        return cls(value % p, p)

    def __add__(self, other: "FpScalar") -> "FpScalar":
        return FpScalar((self.value + other.value) % self.p, self.p)

    def __mul__(self, other: "FpScalar") -> "FpScalar":
        return FpScalar(self.value * other.value % self.p, self.p)

    def inverse(self) -> "FpScalar":
        return FpScalar(inv_mod(self.value, self.p), self.p)


# ---------------------------------------------------------------------------
# Sparse vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FpVec:
    """Finitely supported vector over F_p.

    ``support`` is a sorted tuple of ``(index, coefficient)`` pairs with no
    zero coefficients.  ``tag`` names the index set: ``"N"`` (naturals),
    ``"Z"`` (integers) or ``"sum"`` (pairs ``(part, inner_index)`` of a
    direct sum).
    """

    p: int
    support: Tuple[Tuple[Index, int], ...] = ()
    tag: str = "N"

    @classmethod
    def from_dict(cls, p: int, coeffs: Dict[Index, int], tag: str = "N"):
        items = [(k, v % p) for k, v in coeffs.items() if v % p]
        return cls(p, tuple(sorted(items, key=_sort_key)), tag)

    @classmethod
    def unit(cls, p: int, index: Index, tag: str = "N", coeff: int = 1):
        return cls.from_dict(p, {index: coeff}, tag)

    @classmethod
    def zero(cls, p: int, tag: str = "N"):
        return cls(p, (), tag)

    @classmethod
    def from_dense(cls, p: int, values: Sequence[int], tag: str = "N"):
        return cls.from_dict(p, dict(enumerate(values)), tag)

    def as_dict(self) -> Dict[Index, int]:
        return dict(self.support)

    def to_dense(self, dim: int) -> List[int]:
        out = [0] * dim
        for k, v in self.support:
            if not (isinstance(k, int) and 0 <= k < dim):
                raise IndexError(f"index {k!r} outside 0..{dim - 1}")
            out[k] = v
        return out

    def is_zero(self) -> bool:
        return not self.support

    def indices(self) -> List[Index]:
        return [k for k, _ in self.support]

    def _like(self, coeffs: Dict[Index, int]):
        return type(self).from_dict(self.p, coeffs, self.tag)

    def __add__(self, other):
        _same_space(self, other)
        out = self.as_dict()
        for k, v in other.support:
            out[k] = (out.get(k, 0) + v) % self.p
        return self._like(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c: int):
        c %= self.p
        return self._like({k: v * c for k, v in self.support})

    def dot(self, other) -> int:
        _same_space(self, other)
        small, big = (self, other) if len(self.support) <= len(other.support) else (other, self)
        b = dict(big.support)
        return sum(v * b.get(k, 0) for k, v in small.support) % self.p

    def __len__(self):
        return len(self.support)


def _same_space(a: FpVec, b: FpVec):
    if a.p != b.p:
        raise ValueError(f"mixed primes {a.p} and {b.p}")
    if a.tag != b.tag:
        raise ValueError(f"mixed index sets {a.tag!r} and {b.tag!r}")


def _sort_key(item):
    return _key_order(item[0])


# ---------------------------------------------------------------------------
# Dense matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FpMat:
    p: int
    rows: int
    cols: int
    data: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise ValueError("entry count does not match shape")

    @classmethod
    def from_rows(cls, p: int, rows: Sequence[Sequence[int]], cols: Optional[int] = None):
        check_prime(p)
        data = tuple(tuple(int(x) % p for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(p, len(data), cols, data)

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int):
        return cls(p, rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, p: int, n: int):
        return cls(p, n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def companion(cls, f: "FpPoly") -> "FpMat":
        """Matrix of multiplication by X on F_p[X]/(f) in the basis 1, X, ..., X^(d-1)."""
        f = f.monic()
        d = f.degree()
        if d < 1:
            raise ValueError("companion matrix needs degree >= 1")
        p = f.p
        rows = [[0] * d for _ in range(d)]
        for j in range(d - 1):
            rows[j + 1][j] = 1
        for i in range(d):
            rows[i][d - 1] = (-f.coeffs[i]) % p
        return cls.from_rows(p, rows)

    @classmethod
    def jordan_nilpotent(cls, p: int, n: int):
        return cls.from_rows(p, [[int(i == j + 1) for j in range(n)] for i in range(n)], n)

    @classmethod
    def block_diag(cls, blocks: Sequence["FpMat"]):
        p = blocks[0].p
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        out = [[0] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i, row in enumerate(b.data):
                out[r0 + i][c0:c0 + b.cols] = row
            r0 += b.rows
            c0 += b.cols
        return cls.from_rows(p, out, m)

    @classmethod
    def random(cls, p: int, rows: int, cols: int, rng: random.Random):
        return cls.from_rows(p, [[rng.randrange(p) for _ in range(cols)] for _ in range(rows)], cols)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.data)

    def transpose(self) -> "FpMat":
        return FpMat(self.p, self.cols, self.rows, tuple(zip(*self.data)) if self.rows else tuple(() for _ in range(self.cols)))

    def __add__(self, other: "FpMat") -> "FpMat":
        self._check(other)
        p = self.p
        return FpMat(p, self.rows, self.cols, tuple(
            tuple((a + b) % p for a, b in zip(r, s)) for r, s in zip(self.data, other.data)))

    def __sub__(self, other: "FpMat") -> "FpMat":
        return self + other.scale(-1)

    def scale(self, c: int) -> "FpMat":
        p = self.p
        return FpMat(p, self.rows, self.cols, tuple(tuple(a * c % p for a in r) for r in self.data))

    def __matmul__(self, other: "FpMat") -> "FpMat":
        if self.p != other.p:
            raise ValueError("mixed primes")
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        p = self.p
        cols_t = list(zip(*other.data)) if other.rows else [()] * other.cols
        out = []
        for r in self.data:
            out.append(tuple(sum(a * b for a, b in zip(r, c)) % p for c in cols_t))
        return FpMat(p, self.rows, other.cols, tuple(out))

    def mul_vec(self, v: Sequence[int]) -> Tuple[int, ...]:
        p = self.p
        return tuple(sum(a * b for a, b in zip(r, v)) % p for r in self.data)

    def vec_mul(self, v: Sequence[int]) -> Tuple[int, ...]:
        """Row vector times matrix."""
        p = self.p
        out = [0] * self.cols
        for a, row in zip(v, self.data):
            if a:
                for j, b in enumerate(row):
                    if b:
                        out[j] += a * b
        return tuple(x % p for x in out)

    def power(self, k: int) -> "FpMat":
        if not self.is_square():
            raise ValueError("power of a non-square matrix")
        if k < 0:
            return inverse(self).power(-k)
        result = FpMat.identity(self.p, self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "FpMat":
        return FpMat(self.p, len(rows), len(cols), tuple(tuple(self.data[i][j] for j in cols) for i in rows))

    def _check(self, other):
        if self.p != other.p or self.shape != other.shape:
            raise ValueError("mismatched matrices")

    def tolist(self) -> List[List[int]]:
        return [list(r) for r in self.data]


# -- elimination kernels -----------------------------------------------------


def _pack(row: Sequence[int]) -> int:
    x = 0
    for j, a in enumerate(row):
        if a:
            x |= 1 << j
    return x


def _unpack(x: int, n: int) -> Tuple[int, ...]:
    return tuple((x >> j) & 1 for j in range(n))


def _rref_gf2(rows: Sequence[Sequence[int]], ncols: int) -> Tuple[List[int], List[int]]:
    """RREF over F_2 on bit-packed rows; returns (packed rows, pivot columns)."""
    work = [_pack(r) for r in rows]
    basis: List[int] = []
    pivots: List[int] = []
    for x in work:
        for b, c in zip(basis, pivots):
            if (x >> c) & 1:
                x ^= b
        if x:
            c = (x & -x).bit_length() - 1
            for i, b in enumerate(basis):
                if (b >> c) & 1:
                    basis[i] = b ^ x
            basis.append(x)
            pivots.append(c)
    order = sorted(range(len(pivots)), key=pivots.__getitem__)
    return [basis[i] for i in order], [pivots[i] for i in order]


def _rref_modp(rows: Sequence[Sequence[int]], ncols: int, p: int) -> Tuple[List[List[int]], List[int]]:
    a = [list(r) for r in rows]
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = inv_mod(a[r][c], p)
        a[r] = [x * inv % p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def _rref(m: FpMat) -> Tuple[List[Tuple[int, ...]], List[int]]:
    if m.p == 2:
        packed, piv = _rref_gf2(m.data, m.cols)
        return [_unpack(x, m.cols) for x in packed], piv
    rows, piv = _rref_modp(m.data, m.cols, m.p)
    return [tuple(r) for r in rows], piv


def rref_rank(m: FpMat) -> Tuple[int, FpMat]:
    """Rank and reduced row-echelon basis of the row space of ``m``."""
    rows, _ = _rref(m)
    return len(rows), FpMat(m.p, len(rows), m.cols, tuple(rows))


def rank(m: FpMat) -> int:
    return rref_rank(m)[0]


def kernel_basis(m: FpMat) -> FpMat:
    """Rows spanning the right null space {x : m x = 0}."""
    rows, pivots = _rref(m)
    p = m.p
    free = [j for j in range(m.cols) if j not in set(pivots)]
    out = []
    for f in free:
        x = [0] * m.cols
        x[f] = 1
        for r, c in zip(rows, pivots):
            x[c] = (-r[f]) % p
        out.append(tuple(x))
    return FpMat(p, len(out), m.cols, tuple(out))


def row_space_equal(a: FpMat, b: FpMat) -> bool:
    return rref_rank(a)[1].data == rref_rank(b)[1].data


def inverse(m: FpMat) -> FpMat:
    if not m.is_square():
        raise ValueError("inverse of a non-square matrix")
    n = m.rows
    aug = FpMat.from_rows(m.p, [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(m.data)], 2 * n)
    rows, pivots = _rref(aug)
    if pivots[:n] != list(range(n)) or len(rows) < n:
        raise ValueError("matrix is singular")
    return FpMat.from_rows(m.p, [r[n:] for r in rows[:n]], n)


def is_invertible(m: FpMat) -> bool:
    return m.is_square() and rank(m) == m.rows


def column_space(m: FpMat) -> FpMat:
    """RREF rows spanning the column space of ``m``."""
    return rref_rank(m.transpose())[1]


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FpPoly:
    """Polynomial over F_p, coefficients in ascending degree."""

    p: int
    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        c = [x % self.p for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def x(cls, p: int) -> "FpPoly":
        return cls(p, (0, 1))

    @classmethod
    def const(cls, p: int, c: int) -> "FpPoly":
        return cls(p, (c,))

    @classmethod
    def monomial(cls, p: int, k: int, c: int = 1) -> "FpPoly":
        return cls(p, (0,) * k + (c,))

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_monic(self) -> bool:
        return self.lead() == 1

    def monic(self) -> "FpPoly":
        if self.is_zero():
            return self
        inv = inv_mod(self.lead(), self.p)
        return FpPoly(self.p, tuple(c * inv for c in self.coeffs))

    def __add__(self, other: "FpPoly") -> "FpPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return FpPoly(self.p, tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> "FpPoly":
        return FpPoly(self.p, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "FpPoly") -> "FpPoly":
        return self + (-other)

    def __mul__(self, other) -> "FpPoly":
        if isinstance(other, int):
            return FpPoly(self.p, tuple(c * other for c in self.coeffs))
        if not self.coeffs or not other.coeffs:
            return FpPoly(self.p)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return FpPoly(self.p, tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "FpPoly":
        out = FpPoly.const(self.p, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __divmod__(self, other: "FpPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        p = self.p
        r = list(self.coeffs)
        d = other.degree()
        inv = inv_mod(other.lead(), p)
        q = [0] * max(0, len(r) - d)
        for i in range(len(r) - 1, d - 1, -1):
            c = r[i] * inv % p
            if c:
                q[i - d] = c
                for j, b in enumerate(other.coeffs):
                    r[i - d + j] = (r[i - d + j] - c * b) % p
        return FpPoly(p, tuple(q)), FpPoly(p, tuple(r[:d]))

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def gcd(self, other: "FpPoly") -> "FpPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def lcm(self, other: "FpPoly") -> "FpPoly":
        if self.is_zero() or other.is_zero():
            return FpPoly(self.p)
        return ((self * other) // self.gcd(other)).monic()

    def divides(self, other: "FpPoly") -> bool:
        return (other % self).is_zero()

    def compose(self, inner: "FpPoly") -> "FpPoly":
        out = FpPoly(self.p)
        for c in reversed(self.coeffs):
            out = out * inner + FpPoly.const(self.p, c)
        return out

    def eval_matrix(self, m: FpMat) -> FpMat:
        """f(m) by Horner's rule."""
        n = m.rows
        out = FpMat.zeros(m.p, n, n)
        ident = FpMat.identity(m.p, n)
        for c in reversed(self.coeffs):
            out = out @ m + ident.scale(c)
        return out

    def __call__(self, m: FpMat) -> FpMat:
        return self.eval_matrix(m)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else ("X" if k == 1 else f"X^{k}")
            if k == 0:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms)


def characteristic_poly(m: FpMat) -> FpPoly:
    """det(X I - m), as the product of relative Krylov annihilators.

    Each new standard vector outside the current invariant span S generates a
    cyclic piece of V/S whose characteristic polynomial is the annihilator of
    the vector modulo S.
    """
    p, n = m.p, m.rows
    char = FpPoly.const(p, 1)
    span = SparseEchelon(p)
    for i in range(n):
        if span.rank == n:
            break
        vec = [0] * n
        vec[i] = 1
        if not span.reduce(dict(enumerate(vec))):
            continue
        local = SparseEchelon(p)
        chain = []
        while True:
            rel = local.reduce_tracking(span.reduce(dict(enumerate(vec))), len(chain))
            if rel is not None:
                coeffs = [0] * (len(chain) + 1)
                for k, c in rel.items():
                    coeffs[k] = c
                char = char * FpPoly(p, tuple(coeffs)).monic()
                break
            chain.append(vec)
            vec = list(m.mul_vec(vec))
        for v in chain:
            span.add(dict(enumerate(v)))
    return char


def krylov_annihilator(m: FpMat, v: Sequence[int]) -> FpPoly:
    """Minimal monic g with g(m) v = 0."""
    p = m.p
    ech = SparseEchelon(p)
    vec = list(v)
    k = 0
    while True:
        rel = ech.reduce_tracking(dict(enumerate(vec)), k)
        if rel is not None:
            coeffs = [0] * (k + 1)
            for i, c in rel.items():
                coeffs[i] = c
            return FpPoly(p, tuple(coeffs)).monic()
        k += 1
        vec = list(m.mul_vec(vec))


def min_poly(m: FpMat, seed: int = 0) -> FpPoly:
    """Minimal polynomial of a square matrix.

    A Krylov annihilator of a seeded random vector always divides the minimal
    polynomial; if it already kills ``m`` it is the answer.  Otherwise fall
    back to the lcm of the annihilators of the standard basis vectors, which
    is exactly the minimal polynomial.
    """
    if not m.is_square():
        raise ValueError("min_poly needs a square matrix")
    p, n = m.p, m.rows
    if n == 0:
        return FpPoly.const(p, 1)
    rng = random.Random(seed)
    v = [rng.randrange(p) for _ in range(n)]
    if any(v):
        g = krylov_annihilator(m, v)
        if g.eval_matrix(m).is_zero():
            return g
    f = FpPoly.const(p, 1)
    for i in range(n):
        e = [0] * n
        e[i] = 1
        f = f.lcm(krylov_annihilator(m, e))
    return f


def stable_kernel_image(m: FpMat) -> Tuple[FpMat, FpMat]:
    """(ker m^d, im m^d) for a d x d matrix, each as RREF spanning rows."""
    if not m.is_square():
        raise ValueError("stable_kernel_image needs a square matrix")
    md = m.power(m.rows)
    return rref_rank(kernel_basis(md))[1], column_space(md)


def poly_apply(f: FpPoly, m: FpMat, v: FpVec) -> FpVec:
    """f(m) v by Horner's rule on the vector."""
    dense = v.to_dense(m.cols)
    acc = [0] * m.rows
    for c in reversed(f.coeffs):
        acc = [(a + c * x) % m.p for a, x in zip(m.mul_vec(acc), dense)]
    return FpVec.from_dense(m.p, acc, v.tag)


# ---------------------------------------------------------------------------
# Sparse incremental echelon basis
# ---------------------------------------------------------------------------


class SparseEchelon:
    """Fully reduced echelon basis of a subspace spanned by sparse rows.

    Rows are dicts ``index -> residue``.  Each stored row has coefficient 1
    at its pivot and no other row carries that pivot, so the row set is a
    canonical form of the span (compare with :meth:`canonical`).
    """

    def __init__(self, p: int):
        self.p = p
        self._rows: Dict[Index, Dict[Index, int]] = {}
        self._tracks: Dict[Index, Dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self._rows)

    def copy(self) -> "SparseEchelon":
        other = SparseEchelon(self.p)
        other._rows = {k: dict(v) for k, v in self._rows.items()}
        other._tracks = {k: dict(v) for k, v in self._tracks.items()}
        return other

    def reduce(self, row: Dict[Index, int]) -> Dict[Index, int]:
        p = self.p
        out = {k: v % p for k, v in row.items() if v % p}
        for k in [k for k in out if k in self._rows]:
            c = out.get(k, 0)
            if c:
                for j, b in self._rows[k].items():
                    nv = (out.get(j, 0) - c * b) % p
                    if nv:
                        out[j] = nv
                    else:
                        out.pop(j, None)
        return out

    def add(self, row: Dict[Index, int]) -> bool:
        """Insert a row; True if the span grew."""
        return self._insert(self.reduce(row), None)

    def _insert(self, v: Dict[Index, int], track: Optional[Dict[int, int]]) -> bool:
        if not v:
            return False
        p = self.p
        piv = min(v, key=_key_order)
        inv = inv_mod(v[piv], p)
        v = {k: c * inv % p for k, c in v.items()}
        if track is not None:
            track = {k: c * inv % p for k, c in track.items()}
        for k, r in self._rows.items():
            c = r.get(piv, 0)
            if c:
                for j, b in v.items():
                    nv = (r.get(j, 0) - c * b) % p
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
                if track is not None and k in self._tracks:
                    t = self._tracks[k]
                    for j, b in track.items():
                        t[j] = (t.get(j, 0) - c * b) % p
        self._rows[piv] = v
        if track is not None:
            self._tracks[piv] = track
        return True

    def reduce_tracking(self, row: Dict[Index, int], label: int) -> Optional[Dict[int, int]]:
        """Reduce ``row`` (labelled ``label``) keeping combination records.

        Returns None and stores the row if it is independent; otherwise
        returns the dependency ``{label: coeff}`` summing to zero.  Only
        valid if every stored row was inserted through this method.
        """
        p = self.p
        out = {k: v % p for k, v in row.items() if v % p}
        track = {label: 1}
        for k in [k for k in out if k in self._rows]:
            c = out.get(k, 0)
            if c:
                for j, b in self._rows[k].items():
                    nv = (out.get(j, 0) - c * b) % p
                    if nv:
                        out[j] = nv
                    else:
                        out.pop(j, None)
                for j, b in self._tracks[k].items():
                    track[j] = (track.get(j, 0) - c * b) % p
        if out:
            self._insert(out, track)
            return None
        return {k: v for k, v in track.items() if v}

    def contains(self, row: Dict[Index, int]) -> bool:
        return not self.reduce(row)

    def rows(self) -> List[Dict[Index, int]]:
        return [dict(self._rows[k]) for k in sorted(self._rows, key=_key_order)]

    def canonical(self) -> Tuple:
        return tuple(
            (k, tuple(sorted(self._rows[k].items(), key=lambda kv: _key_order(kv[0]))))
            for k in sorted(self._rows, key=_key_order)
        )


def _key_order(k):
    # ints and tuples of ints both order naturally; keep them apart if mixed
    return (1, k) if isinstance(k, tuple) else (0, k)


def span_rank(p: int, rows: Iterable[Dict[Index, int]]) -> int:
    ech = SparseEchelon(p)
    for r in rows:
        ech.add(r)
    return ech.rank
