"""Batch driver: every constructor and checker over the JSON formats.

Reports are machine-readable JSON on stdout and deterministic for a fixed
argv and seed (wall-clock timing goes to stderr). Exit codes: 0 when every
requested check passes, 1 when a check fails, 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from typing import Any, Optional

from .foundations import Ordinal, OMEGA_NAT, ProfileViolation
from .aposet import THETA, PathDescriptor, check_antichain, is_bad
from .amalgam import HypothesisViolated, NotUniformTail, amalgamate
from .conditions import (
    Condition, InvalidBeta, WrongVariant, check_condition, eta_nu, leq_s,
    one_step_extension,
)
from .fixtures import bad_path_conditions, uniform_path
from .game import check_run_invariants, onestep_opponent, play_game, random_opponent
from .nodes import node
from .sealing import (
    OracleHit, OracleMismatch, SealTripleInvalid, absorb_node, identity_triple,
    seal_step, transposition_triple,
)
from .surgery import BadPi, branch_surgery
from .trees import NoCatalog, vanishing_levels
from . import serialize as sz


class InputError(ValueError):
    pass


def parse_ordinal(s: str) -> Ordinal:
    if re.fullmatch(r"\d+", s):
        return Ordinal(0, int(s))
    m = re.fullmatch(r"w(\d*)(?:n(\d+))?", s)
    if not m:
        raise InputError(f"bad ordinal {s!r}; use forms like 5, w1, w1n4")
    return Ordinal(int(m.group(1) or 1), int(m.group(2) or 0))


def fmt_ordinal(o: Ordinal) -> str:
    return f"w{o.w}n{o.n}" if o.w else str(o.n)


def _load(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}")


def _load_condition(path: str, x_arg: Optional[str]) -> Condition:
    cond = sz.dec_condition(_load(path))
    if x_arg and x_arg != "default":
        x = sz.dec_x(_load(x_arg))
        cond = Condition(cond.tree, cond.path, cond.variant, x)
    return cond


def _write(path: Optional[str], payload: Any) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")


def _emit(report: dict, ok: bool) -> int:
    print(json.dumps(report, indent=1, sort_keys=True))
    return 0 if ok else 1


VARIANT_NAMES = {"sx": "sx", "sf": "sf", "stheta": "stheta"}


def cmd_validate(args) -> int:
    cond = _load_condition(args.condition, args.x_sequence)
    rep = check_condition(cond, args.variant)
    report = {
        "command": "validate",
        "variant": rep.variant,
        "clauses": {cid: v for cid, v in rep.clauses},
        "violations": list(rep.violations),
        "checked_heights": [fmt_ordinal(h) for h in rep.checked_heights],
        "eta": fmt_ordinal(cond.eta),
        "nu": "omega" if eta_nu(cond)[1] == OMEGA_NAT else eta_nu(cond)[1],
    }
    return _emit(report, rep.ok)


def cmd_extend(args) -> int:
    cond = _load_condition(args.condition, args.x_sequence)
    beta = parse_ordinal(args.beta)
    nu = OMEGA_NAT if args.nu == "omega" else int(args.nu)
    out = one_step_extension(cond, beta, nu, label_base=args.label_base)
    _write(args.out, sz.enc_condition(out))
    from .ascent import supp
    from .foundations import FULL_SET
    s_old = supp(cond.level(beta), cond.top)
    s_new = supp(cond.top, out.top)
    report = {
        "command": "extend",
        "eta": fmt_ordinal(out.eta),
        "support_carried": s_old.is_subset(s_new),
        "beta_support_full": supp(cond.level(beta), out.top) == FULL_SET,
        "valid": check_condition(out).ok,
    }
    return _emit(report, report["support_carried"] and report["beta_support_full"]
                 and report["valid"])


def cmd_amalgamate(args) -> int:
    ch = sz.dec_chain(_load(args.chain))
    out, z = amalgamate(ch)
    _write(args.out, sz.enc_condition(out))
    if args.z_out:
        _write(args.z_out, sz.enc_zmap(z))
    van = vanishing_levels(out.tree, "full")
    report = {
        "command": "amalgamate",
        "eta": fmt_ordinal(out.eta),
        "z_keys": [fmt_ordinal(k) for k, _ in z.entries],
        "vanishing": sorted(fmt_ordinal(h) for h in van.levels),
        "closed": van.closed,
        "valid": check_condition(out).ok,
    }
    return _emit(report, report["valid"] and report["closed"])


def cmd_game(args) -> int:
    mu = parse_ordinal(args.mu)
    opp = onestep_opponent() if args.opponent == "onestep" else random_opponent(args.seed)
    t = play_game(mu, opp, args.xi)
    _write(args.out, sz.enc_transcript(t))
    inv = check_run_invariants(t)
    report = {
        "command": "game",
        "mu": fmt_ordinal(mu),
        "xi": args.xi,
        "opponent": opp.name,
        "verdict": t.verdict,
        "stages_played": [fmt_ordinal(m.stage) for m in t.moves],
        "notes": list(t.notes),
        "invariants_ok": inv.ok,
        "invariant_failures": list(inv.failures),
    }
    return _emit(report, t.verdict == "II_completed" and inv.ok)


def cmd_vlevels(args) -> int:
    cond = _load_condition(args.condition, args.x_sequence)
    rep = vanishing_levels(cond.tree, args.mode)
    report = {
        "command": "vlevels",
        "mode": args.mode,
        "levels": sorted(fmt_ordinal(h) for h in rep.levels),
        "closed": rep.closed,
        "top_limit_in": rep.top_limit_in,
    }
    return _emit(report, rep.closed)


def cmd_demo_bad(args) -> int:
    conds, bads = bad_path_conditions(args.count, args.pad)
    path = PathDescriptor(conds[-1])
    rep = check_antichain(path, THETA, bads, path.base.eta)
    incompatible = sum(1 for p in rep.pairs if not p.compatible)
    report = {
        "command": "demo-bad-antichain",
        "bad_heights": [fmt_ordinal(b) for b in bads],
        "badness_witnessed": all(is_bad(path, b, (0, 1)) for b in bads),
        "pairwise_incompatible": f"{incompatible}/{len(rep.pairs)}",
        "certificates": [
            {"a": fmt_ordinal(p.a), "b": fmt_ordinal(p.b), "certificate": p.certificate}
            for p in rep.pairs],
    }
    return _emit(report, rep.all_incompatible and report["badness_witnessed"])


def _parse_triple(spec: str, cond: Condition):
    if spec == "identity":
        return identity_triple(cond)
    m = re.fullmatch(r"transpose:(\d+),(\d+)", spec)
    if m:
        return transposition_triple(cond, int(m.group(1)), int(m.group(2)))
    raise InputError(f"unknown triple spec {spec!r}; use identity or transpose:a,b")


def cmd_seal(args) -> int:
    from .sealing import build_intermediate
    cond = _load_condition(args.condition, args.x_sequence)
    if args.triple_file:
        triple = sz.dec_triple(_load(args.triple_file))
    else:
        triple = _parse_triple(args.triple, cond)
    # synthesize the oracle hit: extend the intermediate step by plain
    # one-steps, whose full supports satisfy any filter guarantee
    hit_cond = build_intermediate(cond, triple)
    for _ in range(args.hit_steps):
        hit_cond = one_step_extension(hit_cond, hit_cond.eta)
    out, alpha = seal_step(cond, triple, args.xi, OracleHit(hit_cond, hit_cond.eta))
    _write(args.out, sz.enc_condition(out))
    report = {
        "command": "seal",
        "alpha": fmt_ordinal(alpha),
        "eta": fmt_ordinal(out.eta),
        "guarantees_verified": True,
        "valid": check_condition(out).ok,
        "extends_input": leq_s(out, cond),
    }
    return _emit(report, report["valid"] and report["extends_input"])


def cmd_absorb(args) -> int:
    cond = _load_condition(args.condition, args.x_sequence)
    try:
        entries = json.loads(args.node)
        target = node(*[int(e) for e in entries])
    except (json.JSONDecodeError, TypeError) as e:
        raise InputError(f"bad node spec {args.node!r}: {e}")
    out, alpha, tau = absorb_node(cond, target, args.xi)
    _write(args.out, sz.enc_condition(out))
    report = {
        "command": "absorb",
        "alpha": fmt_ordinal(alpha),
        "tau": tau,
        "tau_in_filter_set": tau in cond.x.entry(args.xi),
        "absorbed": out.top.at(tau).restrict(target.dom) == target if not target.dom.is_zero else True,
        "valid": check_condition(out).ok,
    }
    return _emit(report, report["absorbed"] and report["valid"] and report["tau_in_filter_set"])


def _load_path(args) -> PathDescriptor:
    if args.path:
        return sz.dec_path_descriptor(_load(args.path))
    return uniform_path(args.fixture_prefix)


def cmd_surgery(args) -> int:
    path = _load_path(args)
    out = branch_surgery(path, args.n0)
    _write(args.out, sz.enc_condition(out))
    van = vanishing_levels(out.tree, "full")
    report = {
        "command": "surgery",
        "n0": args.n0,
        "eta": fmt_ordinal(out.eta),
        "vanishing": sorted(fmt_ordinal(h) for h in van.levels),
        "valid": check_condition(out).ok,
        "extends_path": leq_s(out, path.base),
    }
    return _emit(report, report["valid"] and report["extends_path"])


def cmd_derive_branches(args) -> int:
    from .aposet import derive_branches
    path = _load_path(args)
    fam = derive_branches(path, "all", args.xi)
    me = fam.me_report()
    samples = {}
    for n in path.base.x.x0.members(12):
        samples[str(n)] = sz.enc_node(fam.branch(n))
    report = {
        "command": "derive-branches",
        "height": fmt_ordinal(fam.height),
        "coherent_head_set": path.base.x.x0.is_subset(fam.coherent),
        "mutually_exclusive": me.ok,
        "branches": samples,
    }
    return _emit(report, me.ok and report["coherent_head_set"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ascentlab",
                                 description="symbolic forcing-condition laboratory")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, condition=True):
        p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
        p.add_argument("--x-sequence", default="default",
                       help="default or a JSON file with {x0, base}")
        if condition:
            p.add_argument("condition", help="condition JSON file")
        p.add_argument("-o", "--out", help="write the resulting condition here")

    p = sub.add_parser("validate", help="check a condition clause by clause")
    p.add_argument("--variant", choices=sorted(VARIANT_NAMES), default=None)
    common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("extend", help="one-step extension")
    p.add_argument("--beta", required=True, help="graft height, e.g. 2 or w1n0")
    p.add_argument("--nu", default="0", help="requested top size (a natural or omega)")
    p.add_argument("--label-base", type=int, default=0)
    common(p)
    p.set_defaults(fn=cmd_extend)

    p = sub.add_parser("amalgamate", help="limit lower bound of a described chain")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("chain", help="chain JSON file")
    p.add_argument("-o", "--out")
    p.add_argument("--z-out", help="write the z union map here")
    p.set_defaults(fn=cmd_amalgamate)

    p = sub.add_parser("game", help="play the descending game")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    p.add_argument("--mu", required=True, help="run length, e.g. 6 or w1n4")
    p.add_argument("--opponent", choices=["onestep", "random"], default="onestep")
    p.add_argument("--xi", type=int, default=0)
    p.add_argument("-o", "--out", help="write the transcript here")
    p.set_defaults(fn=cmd_game)

    p = sub.add_parser("vlevels", help="vanishing levels of a condition's tree")
    p.add_argument("--mode", choices=["full", "homogeneous"], default="full")
    common(p)
    p.set_defaults(fn=cmd_vlevels)

    p = sub.add_parser("demo-bad-antichain", help="the naive poset's antichain")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--pad", type=int, default=1, help="plain steps between bad ones")
    p.add_argument("--search-bound", type=int, default=32)
    p.set_defaults(fn=cmd_demo_bad)

    p = sub.add_parser("seal", help="one sealing round for a triple")
    p.add_argument("--triple", default="identity", help="identity or transpose:a,b")
    p.add_argument("--triple-file", help="triple JSON file (overrides --triple)")
    p.add_argument("--xi", type=int, default=1)
    p.add_argument("--hit-steps", type=int, default=1)
    common(p)
    p.set_defaults(fn=cmd_seal)

    p = sub.add_parser("absorb", help="absorb a finite node into the filter set")
    p.add_argument("--node", required=True, help="JSON list of entries, e.g. [5]")
    p.add_argument("--xi", type=int, default=1)
    common(p)
    p.set_defaults(fn=cmd_absorb)

    p = sub.add_parser("surgery", help="branch surgery over a path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--path", help="path descriptor JSON file")
    p.add_argument("--fixture-prefix", type=int, default=4)
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_surgery)

    p = sub.add_parser("derive-branches", help="cofinal branches along a path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--xi", type=int, default=0)
    p.add_argument("--path", help="path descriptor JSON file")
    p.add_argument("--fixture-prefix", type=int, default=4)
    p.set_defaults(fn=cmd_derive_branches)

    return ap


RECOVERABLE = (InputError, sz.FormatError, ProfileViolation, WrongVariant,
               InvalidBeta, NoCatalog, NotUniformTail, HypothesisViolated,
               SealTripleInvalid, OracleMismatch, BadPi, KeyError)


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    started = time.monotonic()
    try:
        code = args.fn(args)
    except RECOVERABLE as e:
        print(json.dumps({"command": args.cmd, "error": str(e)}, sort_keys=True))
        return 2
    finally:
        print(f"[{args.cmd}] {time.monotonic() - started:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
