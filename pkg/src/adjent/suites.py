"""Randomized instance generators and the property suites run by ``adjent verify``."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from . import oracle
from .classify import (classify_ent_star, consistency_probe, reduction_certificates, sample_indices,
                       verify_certificate, verify_reduction)
from .duality import FiniteAbGroup, adjoint, annihilator, check_duality_theorem, perp_chain_ok
from .engine import (Config, Lattice, check_growth_laws, check_inverse_identity,
                     check_power_identity, cotraj_orders, hstar, kernel_of, sup_over_family)
from .fpla import FpMat, FpPoly, FpVec, is_invertible
from .intlat import FgEndo, FgGroup, IntMat, LatticeSub
from .operators import (BlockDiag, DirectSum, DivisibleTrivial, FiniteDim, IntEndo, LeftShift, PolyOf,
                        Power, RightShift, TwoSidedShift, op_prime, space_tag)

PRIMES = (2, 3, 5)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def random_poly(rng: random.Random, p: int, deg: int, monic: bool = True) -> FpPoly:
    coeffs = [rng.randrange(p) for _ in range(deg)] + [1 if monic else rng.randrange(1, p)]
    return FpPoly(p, tuple(coeffs))


def random_matrix(rng: random.Random, p: int, d: int) -> FpMat:
    return FpMat.from_rows(p, [[rng.randrange(p) for _ in range(d)] for _ in range(d)], d)


def random_invertible(rng: random.Random, p: int, d: int) -> FpMat:
    while True:
        m = random_matrix(rng, p, d)
        if is_invertible(m):
            return m


def random_simple(rng: random.Random, p: int, kind: Optional[str] = None):
    kind = kind or rng.choice(["finite_dim", "right_shift", "left_shift", "two_sided_shift", "block_diag"])
    if kind == "finite_dim":
        return FiniteDim(random_matrix(rng, p, rng.randrange(1, 6)))
    if kind == "right_shift":
        return RightShift(p)
    if kind == "left_shift":
        return LeftShift(p)
    if kind == "two_sided_shift":
        return TwoSidedShift(p, rng.choice([1, -1]))
    blocks = tuple(random_poly(rng, p, rng.randrange(1, 4)) for _ in range(rng.randrange(1, 4)))
    return BlockDiag(p, blocks, rng.choice([None, "repeat_last", "grow_linear"]))


SEQUENCE_KINDS = ("finite_dim", "right_shift", "left_shift", "two_sided_shift", "block_diag",
                  "direct_sum", "poly_of", "power")


def random_sequence_op(rng: random.Random, kind: Optional[str] = None, p: Optional[int] = None):
    p = p or rng.choice(PRIMES)
    kind = kind or rng.choice(SEQUENCE_KINDS)
    if kind == "direct_sum":
        return DirectSum(tuple(random_simple(rng, p) for _ in range(rng.randrange(2, 4))))
    if kind == "poly_of":
        return PolyOf(random_poly(rng, p, rng.randrange(0, 3), monic=False), random_simple(rng, p))
    if kind == "power":
        return Power(rng.randrange(1, 4), random_simple(rng, p))
    return random_simple(rng, p, kind)


def random_group(rng: random.Random, max_free: int = 2, moduli=(2, 3, 4, 6, 8, 9), max_torsion: int = 2) -> FgGroup:
    torsion = tuple(rng.choice(moduli) for _ in range(rng.randrange(0, max_torsion + 1)))
    free = rng.randrange(0, max_free + 1)
    if free == 0 and not torsion:
        free = 1
    return FgGroup(free, torsion)


def random_compatible(rng: random.Random, g: FgGroup, bound: int = 6) -> FgEndo:
    """Random matrix with M_ij d_j = 0 mod d_i (exactly 0 on free rows)."""
    d = g.moduli
    k = g.dim
    m = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            if d[i] == 0:
                m[i][j] = rng.randrange(-bound, bound + 1) if d[j] == 0 else 0
            elif d[j] == 0:
                m[i][j] = rng.randrange(d[i])
            else:
                step = d[i] // math.gcd(d[i], d[j])
                m[i][j] = step * rng.randrange(d[i] // step)
    return FgEndo(g, IntMat.from_rows(m, k))


def random_int_endo(rng: random.Random, **kw) -> IntEndo:
    return IntEndo(random_compatible(rng, random_group(rng, **kw)))


def random_zoo_op(rng: random.Random):
    r = rng.random()
    if r < 0.15:
        return random_int_endo(rng)
    if r < 0.2:
        return DivisibleTrivial()
    return random_sequence_op(rng)


def random_rows(rng: random.Random, op, max_rows: int = 3, max_terms: int = 3) -> List[FpVec]:
    p, tag = op_prime(op), space_tag(op)
    rows = []
    for _ in range(rng.randrange(1, max_rows + 1)):
        idx = sample_indices(op, rng, rng.randrange(1, max_terms + 1))
        v = FpVec.from_dict(p, {k: rng.randrange(1, p) for k in idx}, tag)
        if not v.is_zero():
            rows.append(v)
    return rows or [FpVec.unit(p, sample_indices(op, rng, 1)[0], tag)]


def random_lattice(rng: random.Random, g: FgGroup) -> LatticeSub:
    m = rng.randrange(1, 7)
    gens = [tuple(m if i == j else 0 for j in range(g.dim)) for i in range(g.dim)]
    gens += [tuple(rng.randrange(-4, 5) for _ in range(g.dim)) for _ in range(rng.randrange(3))]
    return LatticeSub.from_generators(g, gens)


# ---------------------------------------------------------------------------
# Suite plumbing
# ---------------------------------------------------------------------------


@dataclass
class PropertyTally:
    passed: int = 0
    failed: int = 0
    counterexample: Optional[str] = None

    def record(self, ok: bool, describe: Callable[[], str]):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            text = describe()
            # keep the smallest description as the minimized counterexample
            if self.counterexample is None or len(text) < len(self.counterexample):
                self.counterexample = text


@dataclass
class SuiteResult:
    suite: str
    seed: int
    budget: int
    properties: Dict[str, PropertyTally] = field(default_factory=dict)

    def tally(self, name: str) -> PropertyTally:
        return self.properties.setdefault(name, PropertyTally())

    @property
    def ok(self) -> bool:
        return all(t.failed == 0 for t in self.properties.values())

    def to_json(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "budget": self.budget, "ok": self.ok,
                "properties": {k: {"passed": t.passed, "failed": t.failed,
                                   **({"counterexample": t.counterexample} if t.counterexample else {})}
                               for k, t in sorted(self.properties.items())}}


def _desc(op) -> str:
    from .operators import to_json
    import json
    return json.dumps(to_json(op), sort_keys=True)


def _rows_desc(rows) -> str:
    return str([list(r.support) for r in rows])


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def suite_duality(seed: int = 0, budget: int = 50) -> SuiteResult:
    rng = random.Random(seed)
    res = SuiteResult("duality", seed, budget)
    t = res.tally("cotrajectory_equals_dual_trajectory")
    for i in range(budget):
        op = random_sequence_op(rng, SEQUENCE_KINDS[i % len(SEQUENCE_KINDS)])
        rows = random_rows(rng, op)
        t.record(check_duality_theorem(op, rows, 32), lambda: f"{_desc(op)} rows={_rows_desc(rows)}")
    inv = res.tally("adjoint_involution_and_reversal")
    size = res.tally("annihilator_order_and_double_perp")
    for _ in range(budget):
        g = random_group(rng, max_free=0, max_torsion=3)
        if not g.torsion:
            continue
        G = FiniteAbGroup(g.torsion)
        a, b = random_compatible(rng, G.fg), random_compatible(rng, G.fg)
        sa, sb = adjoint(a), adjoint(b)
        ok = adjoint(sa) == a.reduced() and adjoint(a.compose(b)) == sb.compose(sa)
        inv.record(ok, lambda: f"G={g.torsion} a={a.matrix.tolist()} b={b.matrix.tolist()}")
        H = LatticeSub.from_generators(G.fg, [tuple(rng.randrange(d) for d in g.torsion)])
        hp = annihilator(H, G)
        size.record(hp.order() * H.order() == G.order and annihilator(hp, G) == H,
                    lambda: f"G={g.torsion} H={H.generators()}")
    return res


def suite_dichotomy(seed: int = 0, budget: int = 50) -> SuiteResult:
    rng = random.Random(seed)
    res = SuiteResult("dichotomy", seed, budget)
    val = res.tally("value_is_zero_or_infinite")
    cert = res.tally("certificate_verifies")
    cons = res.tally("engine_agrees_with_classifier")
    red = res.tally("mod_p_reduction_agrees")
    for _ in range(budget):
        op = random_zoo_op(rng)
        v, c = classify_ent_star(op)
        val.record(v.kind in ("zero", "infinite"), lambda: _desc(op))
        cert.record(verify_certificate(c, op), lambda: _desc(op))
        rep = consistency_probe(op, 4, rng.randrange(2 ** 32), Config(max_steps=256))
        cons.record(not rep.contradictions, lambda: f"{_desc(op)}: {rep.contradictions}")
        if isinstance(op, IntEndo):
            certs = reduction_certificates(op, (2, 3, 5))
            red.record(v.is_zero and all(verify_reduction(op, x) for x in certs), lambda: _desc(op))
    return res


def suite_addition(seed: int = 0, budget: int = 50) -> SuiteResult:
    rng = random.Random(seed)
    res = SuiteResult("addition", seed, budget)
    pattern = res.tally("sum_classification_pattern")
    mult = res.tally("cotrajectory_orders_multiply")
    for _ in range(budget):
        p = rng.choice(PRIMES)
        a, b = random_simple(rng, p), random_simple(rng, p)
        s = DirectSum((a, b))
        va, vb, vs = (classify_ent_star(x)[0] for x in (a, b, s))
        expect = "infinite" if "infinite" in (va.kind, vb.kind) else "zero"
        pattern.record(vs.kind == expect, lambda: f"{_desc(s)}: {va} + {vb} -> {vs}")
        ra, rb = random_rows(rng, a), random_rows(rng, b)
        rs = [FpVec.from_dict(p, {(0, k): c for k, c in r.support}, "sum") for r in ra]
        rs += [FpVec.from_dict(p, {(1, k): c for k, c in r.support}, "sum") for r in rb]
        n = 8
        ca = cotraj_orders(a, kernel_of(ra), n)
        cb = cotraj_orders(b, kernel_of(rb), n)
        cs = cotraj_orders(s, kernel_of(rs), n)
        mult.record(cs == [x * y for x, y in zip(ca, cb)], lambda: f"{_desc(s)}")
    wit = res.tally("left_shift_sums_grow_without_bound")
    for k in range(1, 7):
        for p in PRIMES:
            s = DirectSum(tuple(LeftShift(p) for _ in range(k)))
            fam = [kernel_of([FpVec.unit(p, (i, 0), "sum") for i in range(j)]) for j in range(1, k + 1)]
            lb = sup_over_family(s, fam)
            wit.record(lb.alpha == p ** k, lambda: f"k={k} p={p} got {lb}")
    return res


def suite_growth_laws(seed: int = 0, budget: int = 50) -> SuiteResult:
    rng = random.Random(seed)
    res = SuiteResult("growth-laws", seed, budget)
    laws = res.tally("growth_laws")
    runs = max(budget, 1)
    for _ in range(runs):
        if rng.random() < 0.2:
            op = random_int_endo(rng, max_free=2)
            N = Lattice(random_lattice(rng, op.endo.group))
        else:
            op = random_sequence_op(rng)
            N = kernel_of(random_rows(rng, op))
        try:
            r = hstar(op, N, Config(max_steps=128, check_laws=False))
            check_growth_laws(r.trace)
            laws.record(True, str)
        except Exception as exc:  # noqa: BLE001 - any failure is a counterexample
            laws.record(False, lambda: f"{_desc(op)}: {exc}")
    power = res.tally("power_identity")
    inv = res.tally("inverse_identity")
    for _ in range(max(1, budget // 5)):
        p = rng.choice(PRIMES)
        for op in (LeftShift(p), RightShift(p), TwoSidedShift(p), FiniteDim(random_matrix(rng, p, 4))):
            rows = random_rows(rng, op)
            k, n = rng.randrange(1, 5), rng.randrange(1, 9)
            power.record(check_power_identity(op, kernel_of(rows), k, n), lambda: f"{_desc(op)} k={k} n={n}")
        for op in (TwoSidedShift(p), FiniteDim(random_invertible(rng, p, 4))):
            rows = random_rows(rng, op)
            n = rng.randrange(1, 9)
            inv.record(check_inverse_identity(op, kernel_of(rows), n), lambda: f"{_desc(op)} n={n}")
    mono = res.tally("anti_monotonicity")
    invariant = res.tally("invariant_subgroup_vanishes")
    for _ in range(budget):
        op = random_sequence_op(rng)
        small = random_rows(rng, op)
        big = small + random_rows(rng, op)
        cn, cm = cotraj_orders(op, kernel_of(big), 8), cotraj_orders(op, kernel_of(small), 8)
        mono.record(all(x >= y for x, y in zip(cn, cm)), lambda: f"{_desc(op)}")
        # W + W o op + ... closed under pullback gives an invariant kernel
        closed = _closure_rows(op, small, 40)
        if closed is not None:
            r = hstar(op, kernel_of(closed))
            invariant.record(r.value.is_zero and r.trace.n_stab == 1, lambda: f"{_desc(op)}")
    return res


def _closure_rows(op, rows, limit):
    from .fpla import SparseEchelon
    from .operators import pullback_coeffs
    p = op_prime(op)
    ech = SparseEchelon(p)
    todo = [r.as_dict() for r in rows]
    while todo:
        r = ech.reduce(todo.pop())
        if r:
            ech.add(r)
            if ech.rank > limit:
                return None
            todo.append(pullback_coeffs(op, r))
    tag = space_tag(op)
    return [FpVec.from_dict(p, r, tag) for r in ech.rows()] or [FpVec.zero(p, tag)]


PERP_GROUPS = ((8,), (4, 2), (2, 2, 2), (9, 3))


def compatible_matrices(G: FiniteAbGroup):
    """All compatible matrices with entries below the exponent."""
    d = G.moduli
    e = G.exponent
    k = len(d)
    choices = []
    for i in range(k):
        for j in range(k):
            step = d[i] // math.gcd(d[i], d[j])
            choices.append(range(0, e, step))
    for flat in itertools.product(*choices):
        yield [list(flat[i * k:(i + 1) * k]) for i in range(k)]


def perp_instances(G: FiniteAbGroup, cap: int, rng: random.Random):
    mats = list(compatible_matrices(G))
    if len(mats) > cap:
        mats = rng.sample(mats, cap)
    return mats


def suite_perp(seed: int = 0, budget: int = 500) -> SuiteResult:
    rng = random.Random(seed)
    res = SuiteResult("perp", seed, budget)
    t = res.tally("perp_identity")
    o = res.tally("oracle_cotrajectory")
    for moduli in PERP_GROUPS:
        G = FiniteAbGroup(moduli)
        subs = [LatticeSub.from_generators(G.fg, oracle.generators_of(moduli, s))
                for s in oracle.enumerate_subgroups(moduli)]
        for m in perp_instances(G, budget, rng):
            endo = FgEndo(G.fg, IntMat.from_rows(m, len(moduli)))
            for H in subs:
                t.record(perp_chain_ok(endo, H, 3), lambda: f"G={moduli} phi={m} H={H.generators()}")
        for m in perp_instances(G, 20, rng):
            endo = IntEndo(FgEndo(G.fg, IntMat.from_rows(m, len(moduli))))
            for H in subs:
                brute = oracle.brute_cotrajectory(moduli, m, H.generators(), 6)
                o.record(cotraj_orders(endo, Lattice(H), 6) == brute, lambda: f"G={moduli} phi={m}")
    return res


SUITES = {
    "duality": suite_duality,
    "dichotomy": suite_dichotomy,
    "addition": suite_addition,
    "growth-laws": suite_growth_laws,
    "perp": suite_perp,
}


def run_suite(name: str, seed: int = 0, budget: Optional[int] = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    fn = SUITES[name]
    return fn(seed) if budget is None else fn(seed, budget)
