"""Finite descriptions of endomorphisms and their action.

Sequence-space operators act on finitely supported vectors over F_p
(`apply`) and, dually, on finitely supported row functionals by
precomposition ``a -> a o op`` (`pullback`).  Index sets:

* ``right_shift``, ``left_shift``, ``block_diag``, ``finite_dim``: naturals
* ``two_sided_shift``: integers
* ``direct_sum``: pairs ``(part, inner_index)``
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .fpla import FpMat, FpPoly, FpVec, check_prime, inverse, is_invertible, is_prime
from .intlat import FgEndo, FgGroup, IntMat

REPEAT_RULES = (None, "repeat_last", "grow_linear")


class InvalidOperator(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class IndexTagError(ValueError):
    """A vector or functional does not live on the operator's index set."""


class Functional(FpVec):
    """Finitely supported row functional ``x -> sum a_i x_i``."""

    def __call__(self, v: FpVec) -> int:
        return self.dot(v)


# ---------------------------------------------------------------------------
# Descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteDim:
    matrix: FpMat
    kind = "finite_dim"

    @property
    def p(self) -> int:
        return self.matrix.p

    @property
    def dim(self) -> int:
        return self.matrix.rows


@dataclass(frozen=True)
class RightShift:
    p: int
    kind = "right_shift"


@dataclass(frozen=True)
class LeftShift:
    p: int
    kind = "left_shift"


@dataclass(frozen=True)
class TwoSidedShift:
    """x_n -> x_(n-step); step=-1 is the inverse shift."""

    p: int
    step: int = 1
    kind = "two_sided_shift"


@dataclass(frozen=True)
class BlockDiag:
    """Multiplication by X on a direct sum of F_p[X]/(f_n).

    ``blocks`` gives f_0, f_1, ...; ``repeat`` extends the list forever:
    ``"repeat_last"`` repeats the last block, ``"grow_linear"`` continues
    with f_n = X^d - 1 for degrees d growing by one per block.  With
    ``repeat=None`` only the listed blocks exist.  ``transpose`` switches
    each block to the transposed companion matrix (the dual action).
    """

    p: int
    blocks: Tuple[FpPoly, ...]
    repeat: Optional[str] = None
    transpose: bool = False
    kind = "block_diag"

    def block_poly(self, n: int) -> FpPoly:
        if n < len(self.blocks):
            return self.blocks[n]
        if self.repeat == "repeat_last":
            return self.blocks[-1]
        if self.repeat == "grow_linear":
            base = self.blocks[-1].degree() if self.blocks else 0
            d = base + n - len(self.blocks) + 1
            return FpPoly.monomial(self.p, d) - FpPoly.const(self.p, 1)
        raise IndexError(f"block {n} does not exist")

    def n_blocks(self) -> Optional[int]:
        return len(self.blocks) if self.repeat is None else None

    def dimension(self) -> Optional[int]:
        if self.repeat is not None:
            return None
        return sum(f.degree() for f in self.blocks)


@dataclass(frozen=True)
class DirectSum:
    parts: Tuple["OperatorDesc", ...]
    kind = "direct_sum"

    @property
    def p(self) -> Optional[int]:
        return op_prime(self.parts[0]) if self.parts else None


@dataclass(frozen=True)
class PolyOf:
    poly: FpPoly
    inner: "OperatorDesc"
    kind = "poly_of"

    @property
    def p(self) -> int:
        return self.poly.p


@dataclass(frozen=True)
class Power:
    k: int
    inner: "OperatorDesc"
    kind = "power"

    @property
    def p(self) -> Optional[int]:
        return op_prime(self.inner)


@dataclass(frozen=True)
class IntEndo:
    endo: FgEndo
    kind = "int_endo"


@dataclass(frozen=True)
class DivisibleTrivial:
    """An endomorphism of a divisible group; only N = G is cofinite."""

    name: str = "D"
    kind = "divisible_trivial"


OperatorDesc = Union[FiniteDim, RightShift, LeftShift, TwoSidedShift, BlockDiag,
                     DirectSum, PolyOf, Power, IntEndo, DivisibleTrivial]

SHIFT_KINDS = (RightShift, LeftShift, TwoSidedShift)
FP_KINDS = (FiniteDim, RightShift, LeftShift, TwoSidedShift, BlockDiag, DirectSum, PolyOf, Power)


def op_prime(op) -> Optional[int]:
    if isinstance(op, (IntEndo, DivisibleTrivial)):
        return None
    return op.p


def space_tag(op) -> str:
    if isinstance(op, TwoSidedShift):
        return "Z"
    if isinstance(op, DirectSum):
        return "sum"
    if isinstance(op, (PolyOf, Power)):
        return space_tag(op.inner)
    if isinstance(op, IntEndo):
        return "int"
    if isinstance(op, DivisibleTrivial):
        return "divisible"
    return "N"


def is_sequence_kind(op) -> bool:
    return isinstance(op, FP_KINDS)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(op) -> None:
    """Raise `InvalidOperator` listing every violated structural invariant."""
    problems = _problems(op, "op")
    if problems:
        raise InvalidOperator(problems)


def _prime_problem(p, where) -> List[str]:
    if not isinstance(p, int) or not is_prime(p) or p >= 2**31:
        return [f"{where}: p={p!r} is not a prime below 2^31"]
    return []


def _problems(op, where: str) -> List[str]:
    out: List[str] = []
    if isinstance(op, FiniteDim):
        out += _prime_problem(op.p, where)
        if not op.matrix.is_square():
            out.append(f"{where}: finite_dim matrix must be square, got {op.matrix.shape}")
    elif isinstance(op, (RightShift, LeftShift)):
        out += _prime_problem(op.p, where)
    elif isinstance(op, TwoSidedShift):
        out += _prime_problem(op.p, where)
        if op.step not in (1, -1):
            out.append(f"{where}: two_sided_shift step must be +1 or -1, got {op.step}")
    elif isinstance(op, BlockDiag):
        out += _prime_problem(op.p, where)
        if op.repeat not in REPEAT_RULES:
            out.append(f"{where}: unknown repeat rule {op.repeat!r}")
        if op.repeat != "grow_linear" and not op.blocks:
            out.append(f"{where}: block_diag needs at least one block")
        for i, f in enumerate(op.blocks):
            if f.p != op.p:
                out.append(f"{where}.blocks[{i}]: prime {f.p} differs from {op.p}")
            elif f.degree() < 1:
                out.append(f"{where}.blocks[{i}]: degree must be >= 1")
            elif not f.is_monic():
                out.append(f"{where}.blocks[{i}]: polynomial {f} is not monic")
    elif isinstance(op, DirectSum):
        if not op.parts:
            out.append(f"{where}: direct_sum must be nonempty")
        primes = set()
        for i, part in enumerate(op.parts):
            w = f"{where}.parts[{i}]"
            if not is_sequence_kind(part):
                out.append(f"{w}: direct_sum parts must be F_p operators, got {part.kind}")
                continue
            out += _problems(part, w)
            primes.add(op_prime(part))
        if len(primes) > 1:
            out.append(f"{where}: direct_sum mixes primes {sorted(primes)}")
    elif isinstance(op, PolyOf):
        if not is_sequence_kind(op.inner):
            out.append(f"{where}: poly_of needs an F_p operator, got {op.inner.kind}")
        else:
            out += _problems(op.inner, f"{where}.inner")
            if op.poly.p != op_prime(op.inner):
                out.append(f"{where}: polynomial over F_{op.poly.p} applied to an F_{op_prime(op.inner)} operator")
    elif isinstance(op, Power):
        if not isinstance(op.k, int) or op.k < 1:
            out.append(f"{where}: power exponent must be >= 1, got {op.k}")
        if not is_sequence_kind(op.inner):
            out.append(f"{where}: power needs an F_p operator, got {op.inner.kind}")
        else:
            out += _problems(op.inner, f"{where}.inner")
    elif isinstance(op, IntEndo):
        out += [f"{where}: {e}" for e in op.endo.compatibility_errors()]
    elif isinstance(op, DivisibleTrivial):
        pass
    else:
        out.append(f"{where}: unknown operator {op!r}")
    return out


# ---------------------------------------------------------------------------
# Block layout for block_diag
# ---------------------------------------------------------------------------

_layouts: Dict[BlockDiag, List[int]] = {}


def _starts(op: BlockDiag, upto: int) -> List[int]:
    """Block start offsets, extended until the last start exceeds ``upto``."""
    starts = _layouts.setdefault(op, [0])
    n_max = op.n_blocks()
    while starts[-1] <= upto and (n_max is None or len(starts) <= n_max):
        n = len(starts) - 1
        starts.append(starts[-1] + op.block_poly(n).degree())
    return starts


def locate(op: BlockDiag, i: int) -> Tuple[int, int, int]:
    """(block number, block start, block degree) of coordinate ``i``."""
    if not isinstance(i, int) or i < 0:
        raise IndexTagError(f"block_diag index must be a natural number, got {i!r}")
    starts = _starts(op, i)
    lo, hi = 0, len(starts) - 1
    if i >= starts[-1]:
        raise IndexTagError(f"index {i} beyond the last block")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if starts[mid] <= i:
            lo = mid
        else:
            hi = mid
    return lo, starts[lo], starts[lo + 1] - starts[lo]


@lru_cache(maxsize=None)
def _companion(f: FpPoly, transpose: bool) -> FpMat:
    c = FpMat.companion(f)
    return c.transpose() if transpose else c


# ---------------------------------------------------------------------------
# Action on vectors and functionals
# ---------------------------------------------------------------------------

Coeffs = Dict[object, int]


def _nat(i, kind):
    if not isinstance(i, int) or isinstance(i, bool) or i < 0:
        raise IndexTagError(f"{kind} acts on natural-number indices, got {i!r}")
    return i


def _int(i, kind):
    if not isinstance(i, int) or isinstance(i, bool):
        raise IndexTagError(f"{kind} acts on integer indices, got {i!r}")
    return i


def _acc(out: Coeffs, k, v: int, p: int):
    nv = (out.get(k, 0) + v) % p
    if nv:
        out[k] = nv
    else:
        out.pop(k, None)


def _act(op, d: Coeffs, dual: bool) -> Coeffs:
    """Forward action (dual=False) or pullback a -> a o op (dual=True)."""
    if isinstance(op, RightShift):
        if dual:
            return {_nat(i, op.kind) - 1: v for i, v in d.items() if _nat(i, op.kind) > 0}
        return {_nat(i, op.kind) + 1: v for i, v in d.items()}
    if isinstance(op, LeftShift):
        if dual:
            return {_nat(i, op.kind) + 1: v for i, v in d.items()}
        return {_nat(i, op.kind) - 1: v for i, v in d.items() if _nat(i, op.kind) > 0}
    if isinstance(op, TwoSidedShift):
        s = -op.step if dual else op.step
        return {_int(i, op.kind) + s: v for i, v in d.items()}
    if isinstance(op, FiniteDim):
        n, p, m = op.dim, op.p, op.matrix
        dense = [0] * n
        for i, v in d.items():
            if _nat(i, op.kind) >= n:
                raise IndexTagError(f"index {i} outside finite_dim of dimension {n}")
            dense[i] = v
        res = m.vec_mul(dense) if dual else m.mul_vec(dense)
        return {i: v for i, v in enumerate(res) if v}
    if isinstance(op, BlockDiag):
        p = op.p
        grouped: Dict[int, Tuple[int, int, Dict[int, int]]] = {}
        for i, v in d.items():
            b, start, deg = locate(op, i)
            grouped.setdefault(b, (start, deg, {}))[2][i - start] = v
        out: Coeffs = {}
        for b, (start, deg, local) in grouped.items():
            c = _companion(op.block_poly(b), op.transpose)
            dense = [local.get(j, 0) for j in range(deg)]
            res = c.vec_mul(dense) if dual else c.mul_vec(dense)
            for j, v in enumerate(res):
                if v:
                    out[start + j] = v
        return out
    if isinstance(op, DirectSum):
        split: Dict[int, Coeffs] = {}
        for key, v in d.items():
            if not (isinstance(key, tuple) and len(key) == 2 and isinstance(key[0], int)
                    and 0 <= key[0] < len(op.parts)):
                raise IndexTagError(f"direct_sum index must be (part, index), got {key!r}")
            split.setdefault(key[0], {})[key[1]] = v
        out = {}
        for part, sub in split.items():
            for k, v in _act(op.parts[part], sub, dual).items():
                out[(part, k)] = v
        return out
    if isinstance(op, Power):
        for _ in range(op.k):
            d = _act(op.inner, d, dual)
        return d
    if isinstance(op, PolyOf):
        p = op.p
        acc: Coeffs = {}
        for c in reversed(op.poly.coeffs):
            acc = _act(op.inner, acc, dual) if acc else {}
            if c:
                for k, v in d.items():
                    _acc(acc, k, c * v, p)
        return acc
    raise IndexTagError(f"{getattr(op, 'kind', op)!r} does not act on F_p vectors")


def _check_tag(op, x: FpVec):
    if x.p != op_prime(op):
        raise IndexTagError(f"vector over F_{x.p} given to an operator over F_{op_prime(op)}")
    if x.tag != space_tag(op):
        raise IndexTagError(f"index set {x.tag!r} does not match operator index set {space_tag(op)!r}")


def apply(op, v):
    """Image of a finitely supported vector (or, for int_endo, a coordinate tuple)."""
    if isinstance(op, IntEndo):
        return op.endo(v)
    if isinstance(op, DivisibleTrivial):
        raise IndexTagError("divisible_trivial has no finite coordinate model")
    _check_tag(op, v)
    p = op_prime(op)
    return FpVec.from_dict(p, {k: c % p for k, c in _act(op, v.as_dict(), False).items()}, v.tag)


def pullback(op, a: FpVec) -> Functional:
    """The functional a o op."""
    if isinstance(op, (IntEndo, DivisibleTrivial)):
        raise IndexTagError(f"{op.kind} has no F_p functionals; use lattice subgroups")
    _check_tag(op, a)
    p = op_prime(op)
    return Functional.from_dict(p, {k: c % p for k, c in _act(op, a.as_dict(), True).items()}, a.tag)


def pullback_coeffs(op, d: Coeffs) -> Coeffs:
    p = op_prime(op)
    return {k: c % p for k, c in _act(op, d, True).items() if c % p}


def apply_coeffs(op, d: Coeffs) -> Coeffs:
    p = op_prime(op)
    return {k: c % p for k, c in _act(op, d, False).items() if c % p}


def truncate(op, d: int) -> FpMat:
    """d x d matrix of op compressed to coordinates 0..d-1.

    Coordinates leaving the window are dropped, so truncation does not
    commute with `apply` in general.  Oracle use only.
    """
    if d < 1:
        raise ValueError("window must be >= 1")
    if not is_sequence_kind(op) or space_tag(op) not in ("N", "Z"):
        raise ValueError(f"{getattr(op, 'kind', op)} has no sequence structure to truncate")
    if isinstance(op, FiniteDim) and d > op.dim:
        raise ValueError(f"window {d} larger than dimension {op.dim}")
    if isinstance(op, BlockDiag) and op.dimension() is not None and d > op.dimension():
        raise ValueError(f"window {d} larger than dimension {op.dimension()}")
    p = op_prime(op)
    cols = [apply_coeffs(op, {j: 1}) for j in range(d)]
    return FpMat.from_rows(p, [[cols[j].get(i, 0) for j in range(d)] for i in range(d)], d)


def inverse_op(op):
    """Inverse of an invertible zoo member."""
    if isinstance(op, TwoSidedShift):
        return TwoSidedShift(op.p, -op.step)
    if isinstance(op, FiniteDim):
        if not is_invertible(op.matrix):
            raise ValueError("finite_dim matrix is singular")
        return FiniteDim(inverse(op.matrix))
    raise ValueError(f"{getattr(op, 'kind', op)} has no inverse in the zoo")


def dual_operator(op):
    """Operator whose forward action on vectors equals the pullback of ``op``.

    Built kind by kind (shifts swap direction, matrices transpose), so it is
    an independent code path from `pullback`.
    """
    if isinstance(op, RightShift):
        return LeftShift(op.p)
    if isinstance(op, LeftShift):
        return RightShift(op.p)
    if isinstance(op, TwoSidedShift):
        return TwoSidedShift(op.p, -op.step)
    if isinstance(op, FiniteDim):
        return FiniteDim(op.matrix.transpose())
    if isinstance(op, BlockDiag):
        return BlockDiag(op.p, op.blocks, op.repeat, not op.transpose)
    if isinstance(op, DirectSum):
        return DirectSum(tuple(dual_operator(x) for x in op.parts))
    if isinstance(op, Power):
        return Power(op.k, dual_operator(op.inner))
    if isinstance(op, PolyOf):
        return PolyOf(op.poly, dual_operator(op.inner))
    raise ValueError(f"{getattr(op, 'kind', op)} has no F_p dual in the zoo")


# ---------------------------------------------------------------------------
# JSON descriptors
# ---------------------------------------------------------------------------


def _poly(p: int, coeffs) -> FpPoly:
    return FpPoly(p, tuple(int(c) for c in coeffs))


def from_json(obj, p: Optional[int] = None):
    """Parse a descriptor dict; ``p`` is inherited by nested operators."""
    if isinstance(obj, str):
        obj = {"kind": obj}
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidOperator([f"descriptor must be an object with a 'kind', got {obj!r}"])
    kind = obj["kind"]
    p = obj.get("p", p)
    needs_p = kind in ("right_shift", "left_shift", "two_sided_shift", "finite_dim", "block_diag", "poly_of")
    if needs_p and p is None:
        if kind == "poly_of":
            p = op_prime(from_json(obj["inner"], None))
        else:
            raise InvalidOperator([f"{kind}: missing prime 'p'"])
    try:
        if kind == "right_shift":
            return RightShift(int(p))
        if kind == "left_shift":
            return LeftShift(int(p))
        if kind == "two_sided_shift":
            return TwoSidedShift(int(p), int(obj.get("step", 1)))
        if kind == "finite_dim":
            rows = obj["matrix"]
            return FiniteDim(FpMat.from_rows(check_prime(int(p)), rows, len(rows[0]) if rows else 0))
        if kind == "block_diag":
            return BlockDiag(int(p), tuple(_poly(int(p), b) for b in obj.get("blocks", [])),
                             obj.get("repeat"), bool(obj.get("transpose", False)))
        if kind == "direct_sum":
            return DirectSum(tuple(from_json(x, p) for x in obj["parts"]))
        if kind == "poly_of":
            inner = from_json(obj["inner"], p)
            return PolyOf(_poly(int(p), obj["poly"]), inner)
        if kind == "power":
            return Power(int(obj["k"]), from_json(obj["inner"], p))
        if kind == "int_endo":
            g = FgGroup(int(obj.get("free_rank", 0)), tuple(obj.get("torsion", ())))
            if "mult" in obj:
                return IntEndo(FgEndo.multiplication(g, int(obj["mult"])))
            return IntEndo(FgEndo(g, IntMat.from_rows(obj["matrix"], g.dim)))
        if kind == "divisible_trivial":
            return DivisibleTrivial(obj.get("name", "D"))
    except InvalidOperator:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidOperator([f"{kind}: {exc}"]) from exc
    raise InvalidOperator([f"unknown kind {kind!r}"])


def to_json(op) -> dict:
    if isinstance(op, (RightShift, LeftShift)):
        return {"kind": op.kind, "p": op.p}
    if isinstance(op, TwoSidedShift):
        out = {"kind": op.kind, "p": op.p}
        if op.step != 1:
            out["step"] = op.step
        return out
    if isinstance(op, FiniteDim):
        return {"kind": op.kind, "p": op.p, "matrix": op.matrix.tolist()}
    if isinstance(op, BlockDiag):
        out = {"kind": op.kind, "p": op.p, "blocks": [list(f.coeffs) for f in op.blocks], "repeat": op.repeat}
        if op.transpose:
            out["transpose"] = True
        return out
    if isinstance(op, DirectSum):
        return {"kind": op.kind, "parts": [to_json(x) for x in op.parts]}
    if isinstance(op, PolyOf):
        return {"kind": op.kind, "p": op.p, "poly": list(op.poly.coeffs), "inner": to_json(op.inner)}
    if isinstance(op, Power):
        return {"kind": op.kind, "k": op.k, "inner": to_json(op.inner)}
    if isinstance(op, IntEndo):
        g = op.endo.group
        return {"kind": op.kind, "free_rank": g.free_rank, "torsion": list(g.torsion),
                "matrix": op.endo.matrix.tolist()}
    if isinstance(op, DivisibleTrivial):
        return {"kind": op.kind, "name": op.name}
    raise TypeError(f"cannot serialise {op!r}")


def index_from_json(x):
    if isinstance(x, list):
        return tuple(index_from_json(y) for y in x)
    return int(x)


def index_to_json(x):
    if isinstance(x, tuple):
        return [index_to_json(y) for y in x]
    return x


def functional_from_json(op, pairs) -> Functional:
    """``[[index, coeff], ...]`` -> Functional on the operator's index set."""
    p = op_prime(op)
    coeffs: Dict[object, int] = {}
    for idx, c in pairs:
        k = index_from_json(idx)
        coeffs[k] = (coeffs.get(k, 0) + int(c)) % p
    return Functional.from_dict(p, coeffs, space_tag(op))


def vector_from_json(op, pairs) -> FpVec:
    f = functional_from_json(op, pairs)
    return FpVec(f.p, f.support, f.tag)


def sparse_to_json(v: FpVec) -> list:
    return [[index_to_json(k), c] for k, c in v.support]
