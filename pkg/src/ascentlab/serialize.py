"""JSON encodings for every on-disk object: conditions, chains, paths,
triples, transcripts. Decoding goes through the canonical constructors, so
a round-trip reproduces structurally identical values."""

from __future__ import annotations

from typing import Any, Optional

from .foundations import AP, Ordinal, UPSet, XSequence, DEFAULT_X
from .ascent import AppendScheme, AscentLevel, Cell, MapPiece, PiecewiseMap
from .nodes import BlockWord, Entry, Ramp, SymNode
from .conditions import AscentPath, Condition, TailRule
from .trees import BranchCatalog, CatalogFamily, CatalogSingle, SymTree
from .amalgam import ChainDescriptor, ChainMember, ChainTail, ZMap
from .aposet import PathDescriptor
from .sealing import SealTriple
from .game import Move, Transcript

FORMAT = 1


class FormatError(ValueError):
    pass


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise FormatError(msg)


# -- scalars -----------------------------------------------------------------

def enc_ordinal(o: Ordinal) -> dict:
    return {"w": o.w, "n": o.n}

def dec_ordinal(d: Any) -> Ordinal:
    _expect(isinstance(d, dict) and "w" in d and "n" in d, f"bad ordinal {d!r}")
    return Ordinal(int(d["w"]), int(d["n"]))


def enc_upset(u: UPSet) -> dict:
    periodic_low = {k for k in range(u.threshold) if k % u.period in u.residues}
    return {"threshold": u.threshold, "period": u.period,
            "residues": sorted(u.residues),
            "patch_add": sorted(set(u.low) - periodic_low),
            "patch_remove": sorted(periodic_low - set(u.low))}

def dec_upset(d: Any) -> UPSet:
    _expect(isinstance(d, dict) and "period" in d, f"bad set {d!r}")
    t, p = int(d["threshold"]), int(d["period"])
    residues = frozenset(int(r) for r in d["residues"])
    low = {k for k in range(t) if k % p in residues}
    low |= {int(k) for k in d.get("patch_add", ())}
    low -= {int(k) for k in d.get("patch_remove", ())}
    return UPSet.make(t, p, residues, frozenset(low))


def enc_entry(e: Entry) -> dict:
    if isinstance(e, int):
        return {"const": e}
    return {"ramp": {"a": e.a, "b": e.b}}

def dec_entry(d: Any, ap: Optional[AP] = None) -> Entry:
    if isinstance(d, int):
        return d
    _expect(isinstance(d, dict), f"bad entry {d!r}")
    if "const" in d:
        return int(d["const"])
    if "ramp" in d:
        return Ramp(int(d["ramp"]["a"]), int(d["ramp"]["b"]))
    if d.get("param"):
        _expect(ap is not None, "param entry outside a cell")
        return Ramp(ap.step, ap.start)
    raise FormatError(f"bad entry {d!r}")


# -- nodes -------------------------------------------------------------------

def enc_node(s: SymNode) -> dict:
    return {"dom": enc_ordinal(s.dom),
            "blocks": [{"prefix": [enc_entry(e) for e in b.prefix],
                        "period": len(b.tail),
                        "tail": [enc_entry(e) for e in b.tail]} for b in s.blocks],
            "final": [enc_entry(e) for e in s.final]}

def dec_node(d: Any, ap: Optional[AP] = None) -> SymNode:
    _expect(isinstance(d, dict) and "blocks" in d, f"bad node {d!r}")
    blocks = tuple(BlockWord.make([dec_entry(e, ap) for e in b["prefix"]],
                                  [dec_entry(e, ap) for e in b["tail"]])
                   for b in d["blocks"])
    node = SymNode(blocks, tuple(dec_entry(e, ap) for e in d["final"]))
    if "dom" in d:
        _expect(node.dom == dec_ordinal(d["dom"]),
                f"node domain mismatch: {node.dom} vs {d['dom']}")
    return node


def enc_cell(c: Cell) -> dict:
    return {"start": c.ap.start, "step": c.ap.step, "template": enc_node(c.template)}

def dec_cell(d: Any) -> Cell:
    ap = AP(int(d["start"]), int(d["step"]))
    return Cell(ap, dec_node(d["template"], ap))


def enc_level(lvl: AscentLevel) -> dict:
    return {"height": enc_ordinal(lvl.height),
            "cells": [enc_cell(c) for c in lvl.cells],
            "exceptions": {str(k): enc_node(v) for k, v in lvl.exceptions}}

def dec_level(d: Any) -> AscentLevel:
    return AscentLevel.make(dec_ordinal(d["height"]),
                            [dec_cell(c) for c in d["cells"]],
                            {int(k): dec_node(v) for k, v in d.get("exceptions", {}).items()})


def enc_scheme(s: AppendScheme) -> dict:
    return {"cell_entries": [enc_entry(e) for e in s.cell_entries],
            "exception_labels": {str(k): v for k, v in s.exception_labels.items()}}

def dec_scheme(d: Any) -> AppendScheme:
    return AppendScheme(tuple(dec_entry(e) for e in d["cell_entries"]),
                        {int(k): int(v) for k, v in d.get("exception_labels", {}).items()})


def enc_tail_rule(r: TailRule) -> dict:
    return {"start": r.start, "base": enc_level(r.base),
            "schemes": [enc_scheme(s) for s in r.schemes]}

def dec_tail_rule(d: Any) -> TailRule:
    return TailRule(int(d["start"]), dec_level(d["base"]),
                    tuple(dec_scheme(s) for s in d["schemes"]))


def enc_path(p: AscentPath) -> dict:
    return {"levels": [{"height": enc_ordinal(h), "level": enc_level(lvl)}
                       for h, lvl in p.levels],
            "tails": [{"block": w, "rule": enc_tail_rule(r)} for w, r in p.tails]}

def dec_path(d: Any) -> AscentPath:
    return AscentPath.make(
        {dec_ordinal(e["height"]): dec_level(e["level"]) for e in d["levels"]},
        {int(e["block"]): dec_tail_rule(e["rule"]) for e in d.get("tails", ())})


# -- trees ---------------------------------------------------------------------

def enc_catalog(cat: BranchCatalog) -> dict:
    return {"families": [{"cells": [enc_cell(c) for c in f.cells], "admitted": f.admitted}
                         for f in cat.families],
            "singles": [{"tag": s.tag, "node": enc_node(s.node), "admitted": s.admitted}
                        for s in cat.singles]}

def dec_catalog(d: Any) -> BranchCatalog:
    return BranchCatalog(
        tuple(CatalogFamily(tuple(dec_cell(c) for c in f["cells"]), bool(f["admitted"]))
              for f in d.get("families", ())),
        tuple(CatalogSingle(str(s["tag"]), dec_node(s["node"]), bool(s["admitted"]))
              for s in d.get("singles", ())))


def enc_tree(t: SymTree) -> dict:
    return {"height": enc_ordinal(t.height),
            "explicit": [{"height": enc_ordinal(h), "nodes": [enc_node(n) for n in ns]}
                         for h, ns in t.explicit],
            "catalogs": [{"height": enc_ordinal(h), "catalog": enc_catalog(c)}
                         for h, c in t.catalogs]}

def dec_tree(d: Any) -> SymTree:
    return SymTree.make(
        dec_ordinal(d["height"]),
        {dec_ordinal(e["height"]): tuple(dec_node(n) for n in e["nodes"])
         for e in d.get("explicit", ())},
        {dec_ordinal(e["height"]): dec_catalog(e["catalog"])
         for e in d.get("catalogs", ())})


# -- the big composites ----------------------------------------------------------

def enc_x(x: XSequence) -> dict:
    if x == DEFAULT_X:
        return {"kind": "default"}
    return {"x0": enc_upset(x.x0), "base": x.base}

def dec_x(d: Any) -> XSequence:
    if d is None or d.get("kind") == "default":
        return DEFAULT_X
    return XSequence(dec_upset(d["x0"]), int(d.get("base", 4)))


def enc_condition(c: Condition) -> dict:
    return {"format": FORMAT, "variant": c.variant, "x": enc_x(c.x),
            "tree": enc_tree(c.tree), "path": enc_path(c.path)}

def dec_condition(d: Any) -> Condition:
    _expect(isinstance(d, dict) and d.get("format") == FORMAT, "unknown condition format")
    return Condition(dec_tree(d["tree"]), dec_path(d["path"]),
                     str(d["variant"]), dec_x(d.get("x")))


def enc_zmap(z: ZMap) -> dict:
    return {"lo": enc_ordinal(z.lo), "hi": enc_ordinal(z.hi), "closed_hi": z.closed_hi,
            "cells": [{"block": w, "cell": enc_cell(c)} for w, c in z.cells],
            "entries": [{"key": enc_ordinal(k), "node": enc_node(v)} for k, v in z.entries]}

def dec_zmap(d: Any) -> ZMap:
    return ZMap.make(dec_ordinal(d["lo"]), dec_ordinal(d["hi"]), bool(d["closed_hi"]),
                     tuple((int(e["block"]), dec_cell(e["cell"])) for e in d.get("cells", ())),
                     {dec_ordinal(e["key"]): dec_node(e["node"]) for e in d.get("entries", ())})


def enc_chain_tail(t: ChainTail) -> dict:
    return {"beta_step": t.beta_step, "schemes": [enc_scheme(s) for s in t.schemes],
            "z_tokens": [list(tok) for tok in t.z_tokens]}

def dec_chain_tail(d: Any) -> ChainTail:
    return ChainTail(int(d["beta_step"]),
                     tuple(dec_scheme(s) for s in d["schemes"]),
                     tuple(tuple(tok) for tok in d["z_tokens"]))


def enc_chain(ch: ChainDescriptor) -> dict:
    return {"format": FORMAT, "gamma": enc_ordinal(ch.gamma), "delta": enc_ordinal(ch.delta),
            "closed_delta": ch.closed_delta,
            "members": [{"beta": enc_ordinal(m.beta), "condition": enc_condition(m.cond),
                         "z": enc_zmap(m.z)} for m in ch.members],
            "tail": enc_chain_tail(ch.tail) if ch.tail else None}

def dec_chain(d: Any) -> ChainDescriptor:
    _expect(d.get("format") == FORMAT, "unknown chain format")
    return ChainDescriptor(
        tuple(ChainMember(dec_ordinal(m["beta"]), dec_condition(m["condition"]),
                          dec_zmap(m["z"])) for m in d["members"]),
        dec_chain_tail(d["tail"]) if d.get("tail") else None,
        dec_ordinal(d["gamma"]), dec_ordinal(d["delta"]), bool(d.get("closed_delta", False)))


def enc_path_descriptor(p: PathDescriptor) -> dict:
    return {"format": FORMAT, "base": enc_condition(p.base),
            "rule": enc_tail_rule(p.rule) if p.rule else None}

def dec_path_descriptor(d: Any) -> PathDescriptor:
    _expect(d.get("format") == FORMAT, "unknown path format")
    return PathDescriptor(dec_condition(d["base"]),
                          dec_tail_rule(d["rule"]) if d.get("rule") else None)


def enc_map(m: PiecewiseMap) -> dict:
    return {"pieces": [{"start": p.ap.start, "step": p.ap.step, "a": p.a, "b": p.b}
                       for p in m.pieces],
            "points": [[k, v] for k, v in m.points]}

def dec_map(d: Any) -> PiecewiseMap:
    return PiecewiseMap(
        tuple(MapPiece(AP(int(p["start"]), int(p["step"])), int(p["a"]), int(p["b"]))
              for p in d.get("pieces", ())),
        tuple((int(k), int(v)) for k, v in d.get("points", ())))


def enc_triple(t: SealTriple) -> dict:
    return {"format": FORMAT, "x_family": enc_level(t.x_family),
            "y": enc_upset(t.y), "pi": enc_map(t.pi)}

def dec_triple(d: Any) -> SealTriple:
    _expect(d.get("format") == FORMAT, "unknown triple format")
    return SealTriple(dec_level(d["x_family"]), dec_upset(d["y"]), dec_map(d["pi"]))


def enc_transcript(t: Transcript) -> dict:
    conds = []
    index: dict[int, int] = {}
    moves = []
    for mv in t.moves:
        key = id(mv.cond)
        if key not in index:
            index[key] = len(conds)
            conds.append(enc_condition(mv.cond))
        moves.append({"stage": enc_ordinal(mv.stage), "mover": mv.mover,
                      "condition_ref": index[key],
                      "z": enc_zmap(mv.z) if mv.z else None})
    return {"format": FORMAT, "mu": enc_ordinal(t.mu), "xi": t.xi,
            "verdict": t.verdict,
            "illegal_stage": enc_ordinal(t.illegal_stage) if t.illegal_stage else None,
            "notes": list(t.notes), "moves": moves, "conditions": conds}

def dec_transcript(d: Any) -> Transcript:
    _expect(d.get("format") == FORMAT, "unknown transcript format")
    conds = [dec_condition(c) for c in d["conditions"]]
    moves = tuple(Move(dec_ordinal(m["stage"]), str(m["mover"]),
                       conds[int(m["condition_ref"])],
                       dec_zmap(m["z"]) if m.get("z") else None)
                  for m in d["moves"])
    return Transcript(dec_ordinal(d["mu"]), int(d["xi"]), moves, str(d["verdict"]),
                      dec_ordinal(d["illegal_stage"]) if d.get("illegal_stage") else None,
                      tuple(d.get("notes", ())))
