"""Zero-or-infinity classification of adjoint entropy with certificates.

Over F_p an operator has adjoint entropy zero exactly when some nonzero
polynomial annihilates it; otherwise it is infinite.  Every answer comes
with a certificate that `verify_certificate` re-checks from scratch.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from .engine import (Config, EntropyValue, InconclusiveError, Lattice, WholeGroup, hstar, kernel_of,
                     sup_over_family)
from .fpla import FpMat, FpPoly, FpVec, min_poly
from .intlat import LatticeSub, narrow_test, reduce_mod_p
from .operators import (BlockDiag, DirectSum, DivisibleTrivial, FiniteDim, IntEndo, LeftShift, PolyOf,
                        Power, RightShift, TwoSidedShift, apply, op_prime, space_tag)

# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraicCert:
    """f(op) = 0 for the monic polynomial f; ``parts`` certify sub-operators."""

    p: int
    f: FpPoly
    evidence: str
    parts: Tuple["Certificate", ...] = ()
    kind = "algebraic"


@dataclass(frozen=True)
class NonAlgebraicCert:
    """No nonzero polynomial annihilates op; ``witness`` names the argument."""

    p: int
    witness: str
    probes: Tuple[FpPoly, ...] = ()
    part: Optional[int] = None
    inner: Optional["Certificate"] = None
    kind = "non_algebraic"


@dataclass(frozen=True)
class NarrowCert:
    reason: str
    kind = "narrow"


@dataclass(frozen=True)
class DivisibleCert:
    kind = "divisible"


@dataclass(frozen=True)
class QuasiPeriodicCert:
    s: int
    t: int
    kind = "quasi_periodic"


Certificate = Union[AlgebraicCert, NonAlgebraicCert, NarrowCert, DivisibleCert, QuasiPeriodicCert]


def cert_to_json(cert) -> dict:
    if isinstance(cert, AlgebraicCert):
        return {"kind": cert.kind, "p": cert.p, "f": list(cert.f.coeffs), "f_text": str(cert.f),
                "evidence": cert.evidence, "parts": [cert_to_json(c) for c in cert.parts]}
    if isinstance(cert, NonAlgebraicCert):
        out = {"kind": cert.kind, "p": cert.p, "witness": cert.witness,
               "probes": [list(f.coeffs) for f in cert.probes]}
        if cert.part is not None:
            out["part"] = cert.part
        if cert.inner is not None:
            out["inner"] = cert_to_json(cert.inner)
        return out
    if isinstance(cert, NarrowCert):
        return {"kind": cert.kind, "reason": cert.reason}
    if isinstance(cert, DivisibleCert):
        return {"kind": cert.kind}
    if isinstance(cert, QuasiPeriodicCert):
        return {"kind": cert.kind, "s": cert.s, "t": cert.t}
    raise TypeError(f"not a certificate: {cert!r}")


def cert_from_json(obj: dict):
    kind = obj.get("kind")
    if kind == "algebraic":
        p = int(obj["p"])
        return AlgebraicCert(p, FpPoly(p, tuple(obj["f"])), obj.get("evidence", ""),
                             tuple(cert_from_json(c) for c in obj.get("parts", [])))
    if kind == "non_algebraic":
        p = int(obj["p"])
        inner = obj.get("inner")
        return NonAlgebraicCert(p, obj["witness"], tuple(FpPoly(p, tuple(f)) for f in obj.get("probes", [])),
                                obj.get("part"), cert_from_json(inner) if inner else None)
    if kind == "narrow":
        return NarrowCert(obj.get("reason", ""))
    if kind == "divisible":
        return DivisibleCert()
    if kind == "quasi_periodic":
        return QuasiPeriodicCert(int(obj["s"]), int(obj["t"]))
    raise ValueError(f"unknown certificate kind {kind!r}")


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def _default_probes(p: int) -> Tuple[FpPoly, ...]:
    return tuple(FpPoly(p, c) for c in [(1, 0, 1), (0, 1), (1, 1), (1, 1, 0, 1), (p - 1, 0, 0, 0, 1)])


def _algebraic(op) -> Optional[AlgebraicCert]:
    """Annihilating polynomial with its derivation, or None when none exists."""
    p = op_prime(op)
    if isinstance(op, FiniteDim):
        return AlgebraicCert(p, min_poly(op.matrix), "minimal polynomial of the matrix")
    if isinstance(op, BlockDiag):
        if op.repeat == "grow_linear":
            return None
        f = FpPoly.const(p, 1)
        for g in set(op.blocks):
            f = f.lcm(g)
        return AlgebraicCert(p, f, "lcm of the block polynomials; each companion block is annihilated by its own")
    if isinstance(op, DirectSum):
        parts = [_algebraic(x) for x in op.parts]
        if any(c is None for c in parts):
            return None
        f = FpPoly.const(p, 1)
        for c in parts:
            f = f.lcm(c.f)
        return AlgebraicCert(p, f, "lcm of the parts' annihilators", tuple(parts))
    if isinstance(op, PolyOf):
        inner = _algebraic(op.inner)
        if inner is None:
            if op.poly.degree() >= 1:
                return None
            c = op.poly.coeffs[0] if op.poly.coeffs else 0
            return AlgebraicCert(p, FpPoly(p, (-c % p, 1)), "constant polynomial of an operator is a scalar")
        h = min_poly(op.poly(FpMat.companion(inner.f)))
        return AlgebraicCert(p, h, "h(f(X)) vanishes modulo the inner annihilator", (inner,))
    if isinstance(op, Power):
        inner = _algebraic(op.inner)
        if inner is None:
            return None
        h = min_poly(FpMat.companion(inner.f).power(op.k))
        return AlgebraicCert(p, h, "h(X^k) vanishes modulo the inner annihilator", (inner,))
    return None


def _non_algebraic(op) -> NonAlgebraicCert:
    p = op_prime(op)
    if isinstance(op, (RightShift, LeftShift, TwoSidedShift)):
        return NonAlgebraicCert(p, op.kind, _default_probes(p))
    if isinstance(op, BlockDiag):
        return NonAlgebraicCert(p, "unbounded_blocks", _default_probes(p))
    if isinstance(op, DirectSum):
        for i, part in enumerate(op.parts):
            if _algebraic(part) is None:
                return NonAlgebraicCert(p, "direct_sum_part", part=i, inner=_non_algebraic(part))
    if isinstance(op, PolyOf):
        return NonAlgebraicCert(p, "poly_of_nonconstant", inner=_non_algebraic(op.inner))
    if isinstance(op, Power):
        return NonAlgebraicCert(p, "power", inner=_non_algebraic(op.inner))
    raise ValueError(f"no non-algebraicity witness for {getattr(op, 'kind', op)}")


def classify_ent_star(op) -> Tuple[EntropyValue, Certificate]:
    """ent*(op) as Zero or Infinite with a certificate."""
    if isinstance(op, DivisibleTrivial):
        return EntropyValue.zero(), DivisibleCert()
    if isinstance(op, IntEndo):
        return EntropyValue.zero(), NarrowCert(narrow_test(op.endo.group).reason)
    cert = _algebraic(op)
    if cert is not None:
        return EntropyValue.zero(), cert
    return EntropyValue.infinite(), _non_algebraic(op)


def reduction_certificates(op: IntEndo, primes) -> List[AlgebraicCert]:
    """Per prime p, a monic f_p with f_p(phi)(G) inside pG."""
    out = []
    for p in primes:
        m = reduce_mod_p(op.endo, p)
        f = min_poly(m) if m.rows else FpPoly.const(p, 1)
        out.append(AlgebraicCert(p, f, f"minimal polynomial of phi on G/{p}G"))
    return out


def verify_reduction(op: IntEndo, cert: AlgebraicCert) -> bool:
    m = reduce_mod_p(op.endo, cert.p)
    return cert.f.is_monic() and (m.rows == 0 or cert.f(m).is_zero())


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _block_polys(op: BlockDiag) -> List[FpPoly]:
    return list(dict.fromkeys(op.blocks))


def _verify_algebraic(cert: AlgebraicCert, op) -> bool:
    p = op_prime(op)
    if cert.p != p or cert.f.is_zero() or not cert.f.is_monic():
        return False
    f = cert.f
    if isinstance(op, FiniteDim):
        return f(op.matrix).is_zero()
    if isinstance(op, BlockDiag):
        if op.repeat == "grow_linear":
            return False
        return all(f(FpMat.companion(g)).is_zero() for g in _block_polys(op))
    if isinstance(op, DirectSum):
        return (len(cert.parts) == len(op.parts)
                and all(verify_certificate(c, x) and isinstance(c, AlgebraicCert) and c.f.divides(f)
                        for c, x in zip(cert.parts, op.parts)))
    if isinstance(op, PolyOf):
        if cert.parts:
            (inner,) = cert.parts
            if not (isinstance(inner, AlgebraicCert) and verify_certificate(inner, op.inner)):
                return False
            return (f.compose(op.poly) % inner.f).is_zero()
        if op.poly.degree() >= 1:
            return False
        return f.compose(op.poly).is_zero()
    if isinstance(op, Power):
        if len(cert.parts) != 1:
            return False
        (inner,) = cert.parts
        if not (isinstance(inner, AlgebraicCert) and verify_certificate(inner, op.inner)):
            return False
        return (f.compose(FpPoly.monomial(p, op.k)) % inner.f).is_zero()
    return False


def _shift_probe_ok(op, f: FpPoly) -> bool:
    """f(op) applied to one basis vector equals f's coefficient pattern."""
    p = op.p
    d = f.degree()
    tag = space_tag(op)
    if isinstance(op, RightShift):
        start, expected = 0, {k: c for k, c in enumerate(f.coeffs) if c}
    elif isinstance(op, LeftShift):
        start, expected = d, {d - k: c for k, c in enumerate(f.coeffs) if c}
    else:
        start, expected = 0, {k * op.step: c for k, c in enumerate(f.coeffs) if c}
    got = apply(PolyOf(f, op), FpVec.unit(p, start, tag))
    return got.as_dict() == expected and not got.is_zero()


def _verify_non_algebraic(cert: NonAlgebraicCert, op) -> bool:
    p = op_prime(op)
    if cert.p != p:
        return False
    w = cert.witness
    if w in ("right_shift", "left_shift", "two_sided_shift"):
        if getattr(op, "kind", None) != w or not cert.probes:
            return False
        # f(op) e carries the coefficients of f, so no nonzero f kills op
        return all(not f.is_zero() and _shift_probe_ok(op, f) for f in cert.probes)
    if w == "unbounded_blocks":
        if not isinstance(op, BlockDiag) or op.repeat != "grow_linear":
            return False
        # a companion block's minimal polynomial is its block polynomial, so an
        # annihilator has degree at least every block degree; these grow
        first = len(op.blocks)
        degs = [op.block_poly(n).degree() for n in range(first, first + 6)]
        if any(b <= a for a, b in zip(degs, degs[1:])):
            return False
        for f in cert.probes:
            # a block of larger degree than f: f(op) is nonzero on its first vector
            n = next(n for n in range(10 ** 6) if op.block_poly(n).degree() > f.degree())
            start = sum(op.block_poly(i).degree() for i in range(n))
            if apply(PolyOf(f, op), FpVec.unit(p, start)).is_zero():
                return False
        return True
    if w == "direct_sum_part":
        return (isinstance(op, DirectSum) and cert.part is not None and 0 <= cert.part < len(op.parts)
                and cert.inner is not None and verify_certificate(cert.inner, op.parts[cert.part]))
    if w == "poly_of_nonconstant":
        return (isinstance(op, PolyOf) and op.poly.degree() >= 1 and cert.inner is not None
                and isinstance(cert.inner, NonAlgebraicCert) and verify_certificate(cert.inner, op.inner))
    if w == "power":
        return (isinstance(op, Power) and op.k >= 1 and cert.inner is not None
                and isinstance(cert.inner, NonAlgebraicCert) and verify_certificate(cert.inner, op.inner))
    return False


def verify_certificate(cert, op) -> bool:
    """Re-check a certificate against an operator; False on any mismatch."""
    try:
        if isinstance(cert, DivisibleCert):
            return isinstance(op, DivisibleTrivial)
        if isinstance(cert, NarrowCert):
            return isinstance(op, IntEndo) and op.endo.is_compatible() and bool(narrow_test(op.endo.group))
        if isinstance(cert, QuasiPeriodicCert):
            return _verify_quasi_periodic(cert, op)
        if isinstance(cert, AlgebraicCert):
            return _verify_algebraic(cert, op)
        if isinstance(cert, NonAlgebraicCert):
            return _verify_non_algebraic(cert, op)
    except (ValueError, IndexError, TypeError):
        return False
    return False


def _verify_quasi_periodic(cert: QuasiPeriodicCert, op) -> bool:
    s, t = cert.s, cert.t
    if not 0 <= s < t:
        return False
    if isinstance(op, FiniteDim):
        return op.matrix.power(s) == op.matrix.power(t)
    if isinstance(op, BlockDiag) and op.repeat != "grow_linear":
        return all(FpMat.companion(g).power(s) == FpMat.companion(g).power(t) for g in _block_polys(op))
    return False


def quasi_periodic(m: FpMat) -> Tuple[int, int]:
    """Least (s, t), s < t, with m^s = m^t (Brent cycle detection on powers)."""
    if not m.is_square():
        raise ValueError("matrix must be square")
    x0 = FpMat.identity(m.p, m.rows)
    step = lambda x: m @ x  # noqa: E731
    power = lam = 1
    tortoise, hare = x0, step(x0)
    while tortoise != hare:
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare = step(hare)
        lam += 1
    tortoise = hare = x0
    for _ in range(lam):
        hare = step(hare)
    mu = 0
    while tortoise != hare:
        tortoise, hare = step(tortoise), step(hare)
        mu += 1
    return mu, mu + lam


# ---------------------------------------------------------------------------
# Cross-check against the engine
# ---------------------------------------------------------------------------


@dataclass
class ProbeReport:
    value: EntropyValue
    certificate: Certificate
    certificate_ok: bool
    member_values: List[str] = field(default_factory=list)
    lower_bound: Optional[EntropyValue] = None
    contradictions: List[str] = field(default_factory=list)
    inconclusive: int = 0
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.certificate_ok and not self.contradictions

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "certificate": cert_to_json(self.certificate),
                "certificate_ok": self.certificate_ok, "member_values": self.member_values,
                "lower_bound": self.lower_bound.to_json() if self.lower_bound else None,
                "contradictions": self.contradictions, "inconclusive": self.inconclusive,
                "note": self.note}


def sample_indices(op, rng: random.Random, count: int) -> List:
    """Valid coordinate indices of a sequence-space operator."""
    if isinstance(op, FiniteDim):
        return [rng.randrange(op.dim) for _ in range(count)] if op.dim else []
    if isinstance(op, BlockDiag):
        dim = op.dimension()
        hi = 12 if dim is None else dim
        return [rng.randrange(hi) for _ in range(count)]
    if isinstance(op, TwoSidedShift):
        return [rng.randrange(-6, 6) for _ in range(count)]
    if isinstance(op, DirectSum):
        out = []
        for _ in range(count):
            i = rng.randrange(len(op.parts))
            out += [(i, k) for k in sample_indices(op.parts[i], rng, 1)]
        return out
    if isinstance(op, (PolyOf, Power)):
        return sample_indices(op.inner, rng, count)
    return [rng.randrange(12) for _ in range(count)]


def probe_family(op, budget: int, seed: int = 0) -> list:
    """Deterministic list of cofinite subgroups suited to op."""
    rng = random.Random(seed)
    if isinstance(op, DivisibleTrivial):
        return [WholeGroup()]
    if isinstance(op, IntEndo):
        g = op.endo.group
        fam = []
        for _ in range(budget):
            m = rng.randrange(1, 7)
            gens = [tuple(m if i == j else 0 for j in range(g.dim)) for i in range(g.dim)]
            gens += [tuple(rng.randrange(-3, 4) for _ in range(g.dim)) for _ in range(rng.randrange(3))]
            fam.append(Lattice(LatticeSub.from_generators(g, gens)))
        return fam
    p = op_prime(op)
    tag = space_tag(op)
    fam = []
    for _ in range(budget):
        rows = []
        for _ in range(rng.randrange(1, 3)):
            idx = sample_indices(op, rng, rng.randrange(1, 4))
            rows.append(FpVec.from_dict(p, {k: rng.randrange(1, p) for k in idx}, tag))
        rows = [r for r in rows if not r.is_zero()] or [FpVec.zero(p, tag)]
        fam.append(kernel_of(rows))
    return fam


def witness_family(op) -> Optional[list]:
    """N_j = kernel of the first coordinate functional of parts 0..j-1."""
    if not isinstance(op, DirectSum):
        return None
    p = op_prime(op)
    fam = []
    for j in range(1, len(op.parts) + 1):
        fam.append(kernel_of([FpVec.unit(p, (i, 0), "sum") for i in range(j)]))
    return fam


def consistency_probe(op, budget: int = 10, seed: int = 0, config: Optional[Config] = None) -> ProbeReport:
    """Compare the classifier with engine runs on generated subgroups."""
    cfg = config or Config()
    value, cert = classify_ent_star(op)
    rep = ProbeReport(value, cert, verify_certificate(cert, op))
    family = probe_family(op, budget, seed)
    best = 1
    for N in family:
        try:
            r = hstar(op, N, cfg)
        except InconclusiveError:
            rep.inconclusive += 1
            continue
        rep.member_values.append(r.value.text())
        if r.value.kind == "log":
            best = max(best, r.value.alpha)
            if value.is_zero:
                rep.contradictions.append(f"classifier says 0 but H* = {r.value.text()}")
    if value.kind == "infinite":
        fam = witness_family(op)
        if fam:
            try:
                lb = sup_over_family(op, fam, cfg)
                best = max(best, lb.alpha)
            except InconclusiveError:
                rep.inconclusive += 1
        else:
            rep.note = "finitely supported functionals cannot witness the supremum; infinity rests on the certificate"
    rep.lower_bound = EntropyValue.lower_bound(best)
    if not rep.certificate_ok:
        rep.contradictions.append("certificate failed verification")
    return rep
