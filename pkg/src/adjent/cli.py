"""``adjent`` command line: compute, classify, verify.

Exit codes: 0 success, 1 malformed input, 2 inconclusive run, 3 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from typing import List, Optional

from . import __version__
from .classify import classify_ent_star, cert_from_json, cert_to_json, verify_certificate
from .engine import (Config, FiniteSubgroup, InconclusiveError, Lattice, WholeGroup, h, hstar,
                     kernel_of, sup_over_family)
from .fpla import FpVec
from .intlat import LatticeSub
from .operators import (DivisibleTrivial, IntEndo, InvalidOperator, IndexTagError, from_json,
                        functional_from_json, op_prime, space_tag, to_json, validate, vector_from_json)
from .suites import SUITES, run_suite

SCHEMA = "adjent.report/1"
EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("adjent")


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------


def _load_json(text: str, what: str):
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"{what}: cannot read {text[1:]}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON: {exc}") from exc


def parse_operator(text: str, p: int):
    """JSON descriptor, ``@file``, a path to a JSON file, or a bare kind name."""
    stripped = text.strip()
    if stripped.startswith("{") or stripped.startswith("@"):
        obj = _load_json(stripped, "--op")
    elif stripped.endswith(".json"):
        obj = _load_json("@" + stripped, "--op")
    else:
        obj = {"kind": stripped}
    if isinstance(obj, dict) and "p" not in obj and obj.get("kind") in (
            "right_shift", "left_shift", "two_sided_shift", "finite_dim", "block_diag"):
        obj = dict(obj, p=p)
    try:
        op = from_json(obj, p)
        validate(op)
    except InvalidOperator as exc:
        raise InputError("invalid operator: " + "; ".join(exc.problems)) from exc
    return op


def parse_subgroup(text: str, op):
    """Cofinite subgroup: ``e0``, ``{"kind":"kernel","rows":...}``, lattice, or whole."""
    if text.strip() == "e0":
        if isinstance(op, DivisibleTrivial):
            return WholeGroup()
        if isinstance(op, IntEndo):
            raise InputError("e0 shorthand needs a sequence-space operator")
        index = (0, 0) if space_tag(op) == "sum" else 0
        return kernel_of([FpVec.unit(op_prime(op), index, space_tag(op))])
    obj = _load_json(text.strip(), "--subgroup")
    kind = obj.get("kind") if isinstance(obj, dict) else None
    try:
        if kind == "kernel":
            return kernel_of([functional_from_json(op, row) for row in obj["rows"]])
        if kind == "lattice":
            if not isinstance(op, IntEndo):
                raise InputError("lattice subgroups need an int_endo operator")
            return Lattice(LatticeSub.from_generators(op.endo.group, [tuple(g) for g in obj["generators"]]))
        if kind == "whole":
            return WholeGroup()
    except (KeyError, TypeError, ValueError, IndexTagError) as exc:
        raise InputError(f"--subgroup: {exc}") from exc
    raise InputError(f"--subgroup: unknown kind {kind!r}")


def parse_finite_subgroup(text: str, op) -> FiniteSubgroup:
    if text.strip() == "e0":
        if isinstance(op, (IntEndo, DivisibleTrivial)):
            raise InputError("e0 shorthand needs a sequence-space operator")
        index = (0, 0) if space_tag(op) == "sum" else 0
        return FiniteSubgroup((FpVec.unit(op_prime(op), index, space_tag(op)),))
    obj = _load_json(text.strip(), "--finite-subgroup")
    try:
        if isinstance(op, IntEndo):
            return FiniteSubgroup(tuple(tuple(g) for g in obj["elements"]), op.endo.group)
        return FiniteSubgroup(tuple(vector_from_json(op, g) for g in obj["gens"]))
    except (KeyError, TypeError, ValueError, IndexTagError) as exc:
        raise InputError(f"--finite-subgroup: {exc}") from exc


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def make_report(command: dict, results, started: Optional[float]) -> dict:
    rep = {"schema": SCHEMA, "version": __version__, "command": command,
           "input_digest": _digest(command), "results": results}
    if started is not None:
        rep["timing_s"] = round(time.perf_counter() - started, 6)
    return rep


def _text(report: dict) -> str:
    cmd = report["command"]
    res = report["results"]
    lines = [f"adjent {cmd['command']} (version {report['version']})"]
    if cmd["command"] == "compute":
        for i, r in enumerate(res.get("members", [])):
            tr = r["trace"]
            lines.append(f"  subgroup {i}: {r['value']['text']}  exact={r['exact']}  "
                         f"n_stab={tr['n_stab']}  alpha_final={tr['alpha_final']}")
        if "family_bound" in res:
            lines.append(f"  family lower bound: {res['family_bound']['text']}")
        if "error" in res:
            lines.append(f"  inconclusive: {res['error']}")
    elif cmd["command"] == "classify":
        lines.append(f"  ent* = {res['value']['text']}")
        lines.append(f"  certificate: {res['certificate']['kind']}  verified={res['verified']}")
    elif cmd["command"] == "verify":
        if "certificate" in res:
            lines.append(f"  certificate {res['certificate']['kind']}: verified={res['verified']}")
        else:
            lines.append(f"  suite {res['suite']}: {'pass' if res['ok'] else 'FAIL'}")
            for name, t in res["properties"].items():
                extra = f"  counterexample: {t['counterexample']}" if "counterexample" in t else ""
                lines.append(f"    {name}: {t['passed']} passed, {t['failed']} failed{extra}")
    return "\n".join(lines)


def _emit(report: dict, fmt: str):
    if fmt == "text":
        print(_text(report))
    else:
        print(json.dumps(report, sort_keys=True, indent=2))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_compute(args) -> int:
    started = time.perf_counter() if args.timing else None
    op = parse_operator(args.op, args.p)
    cfg = Config(max_steps=args.max_steps, window=args.window)
    command = {"command": "compute", "op": to_json(op), "mode": args.mode,
               "max_steps": args.max_steps, "window": args.window}
    members: List[dict] = []
    results: dict = {"members": members}
    code = EXIT_OK
    try:
        if args.mode == "hstar":
            if not args.subgroup:
                raise InputError("--mode hstar needs at least one --subgroup")
            family = [parse_subgroup(s, op) for s in args.subgroup]
            command["subgroups"] = list(args.subgroup)
            for N in family:
                log.info("hstar on subgroup %d", len(members))
                members.append(hstar(op, N, cfg).to_json())
            if len(family) > 1:
                results["family_bound"] = sup_over_family(op, family, cfg).to_json()
        else:
            if not args.finite_subgroup:
                raise InputError("--mode h needs at least one --finite-subgroup")
            command["finite_subgroups"] = list(args.finite_subgroup)
            for s in args.finite_subgroup:
                members.append(h(op, parse_finite_subgroup(s, op), cfg).to_json())
    except InconclusiveError as exc:
        results["error"] = str(exc)
        results["trace"] = exc.trace.to_json()
        code = EXIT_INCONCLUSIVE
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc)) from exc
    _emit(make_report(command, results, started), args.format)
    return code


def cmd_classify(args) -> int:
    started = time.perf_counter() if args.timing else None
    op = parse_operator(args.op, args.p)
    value, cert = classify_ent_star(op)
    ok = verify_certificate(cert, op)
    results = {"value": value.to_json(), "certificate": cert_to_json(cert), "verified": ok}
    _emit(make_report({"command": "classify", "op": to_json(op)}, results, started), args.format)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_verify(args) -> int:
    started = time.perf_counter() if args.timing else None
    if args.certificate:
        if not args.op:
            raise InputError("--certificate needs --op")
        op = parse_operator(args.op, args.p)
        try:
            cert = cert_from_json(_load_json("@" + args.certificate, "--certificate"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"--certificate: {exc}") from exc
        ok = verify_certificate(cert, op)
        command = {"command": "verify", "op": to_json(op), "certificate": cert_to_json(cert)}
        _emit(make_report(command, {"certificate": cert_to_json(cert), "verified": ok}, started), args.format)
        return EXIT_OK if ok else EXIT_VERIFY
    if not args.suite:
        raise InputError("verify needs a suite name or --certificate")
    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    res = run_suite(args.suite, args.seed, args.budget)
    command = {"command": "verify", "suite": args.suite, "seed": args.seed, "budget": args.budget}
    _emit(make_report(command, res.to_json(), started), args.format)
    return EXIT_OK if res.ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adjent", description="Adjoint algebraic entropy of group endomorphisms.")
    parser.add_argument("--version", action="version", version=f"adjent {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
        sp.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    c = sub.add_parser("compute", help="H*(op, N) or H(op, F) for given subgroups")
    c.add_argument("--op", required=True, help="JSON descriptor, @file, or bare kind name")
    c.add_argument("--p", type=int, default=2, help="prime for descriptors that omit it")
    c.add_argument("--subgroup", action="append", help="cofinite subgroup (JSON or e0); repeat for a family")
    c.add_argument("--finite-subgroup", action="append", help="finite subgroup (JSON or e0)")
    c.add_argument("--mode", choices=("hstar", "h"), default="hstar")
    c.add_argument("--max-steps", type=int, default=512)
    c.add_argument("--window", type=int, default=None)
    common(c)
    c.set_defaults(func=cmd_compute)

    k = sub.add_parser("classify", help="decide ent*(op) in {0, infinity} with a certificate")
    k.add_argument("--op", required=True)
    k.add_argument("--p", type=int, default=2)
    common(k)
    k.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify", help="run a property suite or re-check a certificate")
    v.add_argument("suite", nargs="?", help=f"one of: {', '.join(SUITES)}")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--budget", type=int, default=None)
    v.add_argument("--certificate", help="certificate JSON file to re-check against --op")
    v.add_argument("--op")
    v.add_argument("--p", type=int, default=2)
    common(v)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if not 0 <= args.__dict__.get("seed", 0) < 2 ** 64:
        print("adjent: error: --seed must fit in 64 bits", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"adjent: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
