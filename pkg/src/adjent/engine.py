"""Growth engines for cotrajectories and trajectories.

For a cofinite subgroup N the cotrajectory chain is
``B_1 = N`` and ``B_(n+1) = N cap op^-1 B_n``; ``c_n = [G : B_n]``.
On sequence spaces N = ker(rows) and ``B_n = ker W_n`` with
``W_n = span{a o op^j : a in rows, j < n}``, so ``c_n = p^dim W_n``.
For a finite subgroup F the trajectory is ``T_n = F + op F + ... + op^(n-1) F``.

A one-step fixpoint of either chain is permanent, which makes it a sound
certificate that the growth rate is zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .fpla import FpVec, SparseEchelon
from .intlat import (FgEndo, FgGroup, LatticeSub, intersect, preimage, subgroup_index,
                     subgroup_order_of)
from .operators import (BlockDiag, DirectSum, DivisibleTrivial, FiniteDim, Functional, IntEndo,
                        LeftShift, PolyOf, Power, RightShift, TwoSidedShift, apply_coeffs, dual_operator,
                        inverse_op, is_sequence_kind, op_prime, pullback_coeffs, space_tag)

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 512


class InconclusiveError(RuntimeError):
    """No fixpoint and no stable growth ratio within the step budget."""

    def __init__(self, message: str, trace: "GrowthTrace", partial: Optional[list] = None):
        super().__init__(message)
        self.trace = trace
        self.partial = partial or []


class GrowthLawViolation(AssertionError):
    pass


# ---------------------------------------------------------------------------
# Subgroups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FpKernel:
    """N = common kernel of finitely many functionals."""

    rows: Tuple[Functional, ...]

    def __post_init__(self):
        if self.rows:
            p, tag = self.rows[0].p, self.rows[0].tag
            for r in self.rows:
                if r.p != p or r.tag != tag:
                    raise ValueError("kernel rows must share prime and index set")

    @property
    def p(self) -> Optional[int]:
        return self.rows[0].p if self.rows else None


@dataclass(frozen=True)
class Lattice:
    """N given as a finite-index subgroup of a finitely generated group."""

    sub: LatticeSub

    def __post_init__(self):
        if subgroup_index(self.sub) == float("inf"):
            raise ValueError("lattice subgroup must have finite index")


@dataclass(frozen=True)
class WholeGroup:
    """N = G; the only cofinite subgroup of a divisible group."""


CofiniteSubgroup = Union[FpKernel, Lattice, WholeGroup]


@dataclass(frozen=True)
class FiniteSubgroup:
    """Subgroup generated by finitely many finite-order elements.

    Generators are FpVec on sequence spaces, or coordinate tuples of
    ``ambient`` for finitely generated groups.
    """

    gens: Tuple
    ambient: Optional[FgGroup] = None


def kernel_of(rows: Sequence[FpVec]) -> FpKernel:
    return FpKernel(tuple(Functional(r.p, r.support, r.tag) for r in rows))


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyValue:
    """Symbolic entropy: 0, log(alpha), infinity, or a lower bound log(alpha)."""

    kind: str  # zero | log | infinite | lower_bound
    alpha: Optional[int] = None

    @classmethod
    def zero(cls) -> "EntropyValue":
        return cls("zero")

    @classmethod
    def log(cls, alpha: int) -> "EntropyValue":
        return cls("zero") if alpha == 1 else cls("log", alpha)

    @classmethod
    def infinite(cls) -> "EntropyValue":
        return cls("infinite")

    @classmethod
    def lower_bound(cls, alpha: int) -> "EntropyValue":
        return cls("lower_bound", alpha)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def text(self) -> str:
        if self.kind == "zero":
            return "0"
        if self.kind == "log":
            return f"log {self.alpha}"
        if self.kind == "infinite":
            return "infinity"
        return ">= 0" if self.alpha == 1 else f">= log {self.alpha}"

    __str__ = text

    def to_json(self) -> dict:
        out = {"kind": self.kind, "text": self.text()}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "EntropyValue":
        return cls(obj["kind"], obj.get("alpha"))


@dataclass
class GrowthTrace:
    """Orders c_1, c_2, ... of a cotrajectory or trajectory.

    ``base`` is p when the orders are powers of p (then ``log_c`` holds the
    exponents), else None.  ``alpha[i] = c[i+1] / c[i]``.
    """

    c: List[int] = field(default_factory=list)
    base: Optional[int] = None
    stabilized: bool = False
    n_stab: Optional[int] = None
    alpha_final: Optional[int] = None
    a0: Optional[int] = None
    exact: bool = False

    @property
    def alpha(self) -> List[int]:
        return [b // a for a, b in zip(self.c, self.c[1:])]

    @property
    def log_c(self) -> Optional[List[int]]:
        if self.base is None:
            return None
        return [_ilog(x, self.base) for x in self.c]

    def to_json(self) -> dict:
        out: dict = {}
        if self.base is not None:
            out["p"] = self.base
            out["c_log_p"] = self.log_c
        else:
            out["c"] = list(self.c)
        out["alpha"] = self.alpha
        out.update({"stabilized": self.stabilized, "n_stab": self.n_stab,
                    "alpha_final": self.alpha_final, "a0": self.a0, "exact": self.exact})
        return out


def _ilog(x: int, p: int) -> int:
    k = 0
    while x > 1:
        x, r = divmod(x, p)
        if r:
            raise ValueError("not a power of the base")
        k += 1
    return k


@dataclass(frozen=True)
class SubgroupEntropy:
    value: EntropyValue
    trace: GrowthTrace
    exact: bool

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "exact": self.exact, "trace": self.trace.to_json()}


@dataclass(frozen=True)
class Config:
    max_steps: int = DEFAULT_MAX_STEPS
    window: Optional[int] = None  # None -> derived from the subgroup
    check_laws: bool = True


# ---------------------------------------------------------------------------
# Cotrajectory state
# ---------------------------------------------------------------------------


@dataclass
class CotrajState:
    """B_n in canonical form plus the orders c_1..c_n seen so far.

    F_p side: ``span`` is the reduced echelon basis of W_n and ``fresh``
    spans a complement of W_(n-1) in W_n; since
    ``W_(n+1) = W_n + (fresh) o op`` only fresh rows need pulling back.
    Lattice side: ``lattice`` is B_n in HNF.
    """

    n: int
    c: List[int]
    span: Optional[SparseEchelon] = None
    fresh: List[Dict] = field(default_factory=list)
    lattice: Optional[LatticeSub] = None
    fixpoint: bool = False
    tag: str = "N"

    def copy(self) -> "CotrajState":
        return CotrajState(self.n, list(self.c), self.span.copy() if self.span else None,
                           [dict(r) for r in self.fresh], self.lattice, self.fixpoint, self.tag)

    def subgroup(self) -> CofiniteSubgroup:
        if self.lattice is not None:
            return Lattice(self.lattice)
        if self.span is None:
            return WholeGroup()
        return FpKernel(tuple(Functional.from_dict(self.span.p, r, self.tag) for r in self.span.rows()))


def _check_pair(op, N: CofiniteSubgroup):
    if isinstance(N, WholeGroup):
        return
    if isinstance(N, Lattice):
        if not isinstance(op, IntEndo):
            raise ValueError("lattice subgroups need an int_endo operator")
        if N.sub.ambient != op.endo.group:
            raise ValueError("subgroup and operator live on different groups")
        return
    if not is_sequence_kind(op):
        raise ValueError(f"{op.kind} needs a lattice subgroup, not functionals")
    for r in N.rows:
        if r.p != op_prime(op) or r.tag != space_tag(op):
            raise ValueError("kernel rows do not live on the operator's space")


def cotraj_init(op, N: CofiniteSubgroup) -> CotrajState:
    """State for B_1 = N."""
    _check_pair(op, N)
    if isinstance(N, WholeGroup):
        return CotrajState(1, [1])
    if isinstance(N, Lattice):
        return CotrajState(1, [subgroup_index(N.sub)], lattice=N.sub)
    p = op_prime(op)
    span = SparseEchelon(p)
    fresh = []
    for r in N.rows:
        red = span.reduce(r.as_dict())
        if red:
            span.add(red)
            fresh.append(red)
    return CotrajState(1, [p ** span.rank], span=span, fresh=fresh, tag=space_tag(op))


def _advance(op, N: CofiniteSubgroup, st: CotrajState) -> None:
    if isinstance(N, WholeGroup) or st.fixpoint:
        st.fixpoint = True
        st.c.append(st.c[-1])
    elif st.lattice is not None:
        nxt = intersect(N.sub, preimage(op.endo, st.lattice))
        if not st.lattice.contains_sub(nxt):
            raise GrowthLawViolation("B_(n+1) is not contained in B_n")
        st.fixpoint = nxt == st.lattice
        st.lattice = nxt
        st.c.append(subgroup_index(nxt))
    else:
        p = st.span.p
        fresh = []
        for r in st.fresh:
            red = st.span.reduce(pullback_coeffs(op, r))
            if red:
                st.span.add(red)
                fresh.append(red)
        st.fresh = fresh
        st.fixpoint = not fresh
        st.c.append(p ** st.span.rank)
    st.n += 1


def cotraj_step(op, N: CofiniteSubgroup, state: CotrajState) -> CotrajState:
    """B_n -> B_(n+1); returns a new state and leaves ``state`` untouched."""
    nxt = state.copy()
    _advance(op, N, nxt)
    return nxt


def cotraj_orders(op, N: CofiniteSubgroup, n_max: int) -> List[int]:
    """[c_1, ..., c_(n_max)] exactly."""
    st = cotraj_init(op, N)
    while st.n < n_max:
        _advance(op, N, st)
    return st.c[:n_max]


def cotraj_subgroup(op, N: CofiniteSubgroup, n: int) -> CofiniteSubgroup:
    """B_n(op, N) as a cofinite subgroup in canonical form."""
    if n < 1:
        raise ValueError("n >= 1")
    st = cotraj_init(op, N)
    while st.n < n:
        _advance(op, N, st)
    return st.subgroup()


# ---------------------------------------------------------------------------
# Exactness bounds
# ---------------------------------------------------------------------------


def _extent(keys) -> Tuple[int, int]:
    keys = list(keys)
    return min(keys), max(keys)


def _invariant_dim(op, keys) -> Optional[int]:
    """Dimension of a finite op-invariant subspace holding all ``keys`` (pullback side)."""
    if isinstance(op, FiniteDim):
        return op.dim
    if isinstance(op, RightShift):
        return max(keys) + 1 if keys else 0
    if isinstance(op, (Power, PolyOf)):
        # invariant under the inner pullback, hence under any polynomial in it
        return _invariant_dim(op.inner, keys)
    if isinstance(op, BlockDiag):
        from .operators import locate
        blocks = {}
        for k in keys:
            b, _, deg = locate(op, k)
            blocks[b] = deg
        return sum(blocks.values())
    return None


def _shift_base(op):
    """The left/two-sided shift under a tower of powers and polynomials, if any.

    Pullback through g(shift) multiplies a row by g(t); F_p[t] is free of
    finite rank over F_p[g(t)], so the shift argument carries over with the
    same degree bound.
    """
    while isinstance(op, (Power, PolyOf)):
        op = op.inner
    return op if isinstance(op, (LeftShift, TwoSidedShift)) else None


def exact_bound(op, rows: Sequence[Dict]) -> Optional[int]:
    """n0 with alpha_(n+1) = alpha_(n0+1) for every n >= n0, or None.

    Finite invariant subspace: the chain W_n stops growing by n = its
    dimension.  Pure left/two-sided shift (pullback multiplies by t or
    t^-1): W_n is the image of the polynomials of degree < n under
    (h_i) -> sum h_i a_i, whose kernel has a minimal basis of total degree
    at most the support extent; past it the increment is exactly one.
    Direct sums with rows spread over several parts combine both: the
    shift extents plus the finite invariant dimensions.
    """
    rows = [r for r in rows if r]
    if not rows:
        return 1
    if isinstance(op, DirectSum):
        per_part: Dict[int, List[Dict]] = {}
        if any(len({k[0] for k in r}) != 1 for r in rows):
            # mixed rows: syzygies of the shift-like projections have degree at
            # most their extents, and the finite parts absorb at most D more steps
            keys: Dict[int, List] = {}
            for r in rows:
                for i, k in r:
                    keys.setdefault(i, []).append(k)
            extent = dim_total = 0
            for i, ks in keys.items():
                part = op.parts[i]
                d = _invariant_dim(part, ks)
                if d is not None:
                    dim_total += d
                    continue
                base = _shift_base(part)
                if base is None:
                    return None
                lo, hi = _extent(ks)
                extent += hi if isinstance(base, LeftShift) else hi - lo
            return extent + dim_total + len(rows) + 1
        for r in rows:
            parts = {k[0] for k in r}
            (part,) = parts
            per_part.setdefault(part, []).append({k[1]: v for k, v in r.items()})
        bounds = [exact_bound(op.parts[i], rs) for i, rs in per_part.items()]
        return None if any(b is None for b in bounds) else max(bounds)
    keys = [k for r in rows for k in r]
    base = _shift_base(op)
    if base is not None:
        lo, hi = _extent(keys)
        span = hi if isinstance(base, LeftShift) else hi - lo
        return span + len(rows) + 1
    dim = _invariant_dim(op, keys)
    return None if dim is None else dim + 1


def default_window(rows: Sequence[Dict]) -> int:
    keys = [k for r in rows for k in r]
    if keys and all(isinstance(k, int) for k in keys):
        lo, hi = _extent(keys)
        extent = hi - lo + 1
    else:
        extent = len(set(keys))
    return max(8, 2 * (extent + len(rows)))


# ---------------------------------------------------------------------------
# Stabilization protocol
# ---------------------------------------------------------------------------


def _finish(trace: GrowthTrace, alpha: int, exact: bool) -> SubgroupEntropy:
    c = trace.c
    # earliest n from which the recorded tail is geometric with ratio alpha
    n0 = len(c)
    while n0 > 1 and c[n0 - 1] == c[n0 - 2] * alpha:
        n0 -= 1
    trace.stabilized = True
    trace.n_stab = n0
    trace.alpha_final = alpha
    trace.a0 = c[n0 - 1]
    trace.exact = exact
    return SubgroupEntropy(EntropyValue.log(alpha), trace, exact)


def _run(advance, c: List[int], base, fixpoint, bound: Optional[int], window: int,
         cfg: Config, what: str) -> SubgroupEntropy:
    trace = GrowthTrace(c, base)
    while True:
        n = len(c)
        if n >= 2 and fixpoint():
            if cfg.check_laws:
                check_growth_laws(trace)
            return _finish(trace, 1, True)
        if bound is not None and n >= bound + 1:
            if cfg.check_laws:
                check_growth_laws(trace)
            return _finish(trace, c[-1] // c[-2], True)
        if bound is None and n > window:
            tail = [b // a for a, b in zip(c[-window - 1:], c[-window:])]
            if len(set(tail)) == 1:
                if cfg.check_laws:
                    check_growth_laws(trace)
                return _finish(trace, tail[0], False)
        if n >= cfg.max_steps:
            if cfg.check_laws:
                check_growth_laws(trace)
            raise InconclusiveError(f"{what}: no fixpoint or stable ratio within {cfg.max_steps} steps", trace)
        advance()


def hstar(op, N: CofiniteSubgroup, config: Optional[Config] = None) -> SubgroupEntropy:
    """H*(op, N): growth rate of |G / B_n(op, N)|."""
    cfg = config or Config()
    st = cotraj_init(op, N)
    if st.span is not None:
        rows = st.span.rows()
        bound = exact_bound(op, rows)
        window = cfg.window or default_window(rows)
    else:
        # narrow ambient: the chain must reach a fixpoint, so never guess
        bound, window = None, cfg.max_steps + 1
    base = op_prime(op) if st.span is not None else None
    res = _run(lambda: _advance(op, N, st), st.c, base, lambda: st.fixpoint, bound, window, cfg, "hstar")
    log.debug("hstar %s -> %s", getattr(op, "kind", op), res.value)
    return res


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


class _TrajFp:
    """T_n on a sequence space; every generator image is re-inserted."""

    def __init__(self, op, gens: Sequence[FpVec]):
        p = op_prime(op)
        self.op = op
        self.span = SparseEchelon(p)
        self.frontier = [g.as_dict() for g in gens]
        for g in self.frontier:
            self.span.add(g)
        self.c = [p ** self.span.rank]
        self.p = p
        self.grew = True

    def advance(self):
        self.frontier = [apply_coeffs(self.op, g) for g in self.frontier]
        before = self.span.rank
        for g in self.frontier:
            self.span.add(g)
        self.grew = self.span.rank > before
        self.c.append(self.p ** self.span.rank)


class _TrajGroup:
    """T_n inside a finite part of a f.g. group, via subgroup closure."""

    def __init__(self, endo: FgEndo, gens: Sequence[Sequence[int]]):
        self.endo = endo
        self.group = endo.group
        self.frontier = [self.group.reduce(g) for g in gens]
        self.all = list(self.frontier)
        self.c = [subgroup_order_of(self.group, self.all)]
        self.grew = True

    def advance(self):
        self.frontier = [self.group.reduce(self.endo(g)) for g in self.frontier]
        self.all.extend(self.frontier)
        self.c.append(subgroup_order_of(self.group, self.all))
        self.grew = self.c[-1] != self.c[-2]


def _traj(op, F: FiniteSubgroup):
    if isinstance(op, IntEndo):
        return _TrajGroup(op.endo, F.gens)
    if isinstance(op, DivisibleTrivial):
        raise ValueError("divisible_trivial has no coordinate model for trajectories")
    for g in F.gens:
        if g.p != op_prime(op) or g.tag != space_tag(op):
            raise ValueError("generators do not live on the operator's space")
    return _TrajFp(op, F.gens)


def traj_orders(op, F: FiniteSubgroup, n_max: int) -> List[int]:
    """[|T_1|, ..., |T_(n_max)|] with no early exit."""
    t = _traj(op, F)
    while len(t.c) < n_max:
        t.advance()
    return t.c[:n_max]


def h(op, F: FiniteSubgroup, config: Optional[Config] = None) -> SubgroupEntropy:
    """H(op, F): growth rate of |T_n(op, F)|."""
    cfg = config or Config()
    t = _traj(op, F)
    if isinstance(t, _TrajFp):
        gens = [g for g in t.frontier if g]
        try:
            bound = exact_bound(dual_operator(op), gens)
        except ValueError:
            bound = None
        window = cfg.window or default_window(gens)
        base = t.p
    else:
        # finite ambient: the chain must reach a fixpoint
        bound, window, base = None, cfg.max_steps + 1, None
    return _run(t.advance, t.c, base, lambda: not t.grew, bound, window, cfg, "h")


# ---------------------------------------------------------------------------
# Families and identities
# ---------------------------------------------------------------------------


def evaluate_family(op, family: Sequence[CofiniteSubgroup],
                    config: Optional[Config] = None) -> List[SubgroupEntropy]:
    if not family:
        raise ValueError("family must be nonempty")
    done: List[SubgroupEntropy] = []
    for N in family:
        try:
            done.append(hstar(op, N, config))
        except InconclusiveError as exc:
            raise InconclusiveError(str(exc), exc.trace, done) from exc
    return done


def sup_over_family(op, family: Sequence[CofiniteSubgroup],
                    config: Optional[Config] = None) -> EntropyValue:
    """Lower bound for ent*(op): the largest H* over the family."""
    results = evaluate_family(op, family, config)
    best = 1
    for r in results:
        if r.value.kind == "log":
            best = max(best, r.value.alpha)
    return EntropyValue.lower_bound(best)


def _power_of(op, k: int):
    if isinstance(op, IntEndo):
        return IntEndo(op.endo.power(k))
    if isinstance(op, WholeGroup):
        return op
    return op if k == 1 else Power(k, op)


def check_power_identity(op, N: CofiniteSubgroup, k: int, n: int) -> bool:
    """|C_(nk)(op, N)| = |C_n(op^k, B_k(op, N))|."""
    if k < 1 or n < 1:
        raise ValueError("k, n >= 1")
    left = cotraj_orders(op, N, n * k)[-1]
    if isinstance(op, DivisibleTrivial):
        return left == 1
    bk = cotraj_subgroup(op, N, k)
    right = cotraj_orders(_power_of(op, k), bk, n)[-1]
    return left == right


def check_inverse_identity(op, N: CofiniteSubgroup, n: int) -> bool:
    """|C_n(op, N)| = |C_n(op^-1, N)| for an invertible operator."""
    inv = inverse_op(op)
    return cotraj_orders(op, N, n)[-1] == cotraj_orders(inv, N, n)[-1]


def check_growth_laws(trace: GrowthTrace) -> None:
    """Raise GrowthLawViolation unless every recorded growth law holds."""
    c = trace.c
    for n in range(len(c) - 1):
        if c[n + 1] % c[n]:
            raise GrowthLawViolation(f"c_{n + 1}={c[n]} does not divide c_{n + 2}={c[n + 1]}")
    # alpha_1 = c_1, alpha_(n+1) = c_(n+1)/c_n
    alpha = [c[0]] + trace.alpha
    for n in range(1, len(alpha) - 1):
        if alpha[n] % alpha[n + 1]:
            raise GrowthLawViolation(f"alpha_{n + 2}={alpha[n + 1]} does not divide alpha_{n + 1}={alpha[n]}")
    m = len(c)
    for i in range(1, m + 1):
        for j in range(1, m + 1 - i):
            if c[i + j - 1] > c[i - 1] * c[j - 1]:
                raise GrowthLawViolation(f"c_{i + j} > c_{i} * c_{j}")
    if trace.stabilized:
        n0, a = trace.n_stab, trace.alpha_final
        for n in range(n0, m + 1):
            if c[n - 1] != trace.a0 * a ** (n - n0):
                raise GrowthLawViolation(f"tail not geometric at n={n}")
