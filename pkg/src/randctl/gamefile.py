"""Line-oriented text format for games and reliability instances.

::

    # comment
    game fig1a
    init v0
    objective reachability target=top
    node v0 toss=1/2
    node top
    edge v0 top

``objective parity`` reads ``priority=`` from node lines and
``objective energy credit=<int>`` reads ``weight=``. Nodes without a toss
get 1/2. A reliability instance uses ``terminal <s> <t>`` and
``edgeprob <num>/<den>`` instead of ``init``/``objective``. Numbers are
integers or ``num/den`` fractions; decimals are rejected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .core import (
    Energy,
    GameGraph,
    Objective,
    Parity,
    Reachability,
    ValidationError,
    validate,
    validate_toss,
)
from .reductions import ReliabilityInstance

DEFAULT_TOSS = Fraction(1, 2)

_IDENT = re.compile(r"^[^\s=#,]+$")
_INT = re.compile(r"^[+-]?\d+$")
_FRAC = re.compile(r"^[+-]?\d+(/\d+)?$")


class GameFileError(ValidationError):
    """Syntax or invariant violation, tagged with the offending line when known."""

    def __init__(self, message: str, line: Optional[int] = None, node=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message, node)


@dataclass
class GameFile:
    name: str
    graph: GameGraph
    toss: Dict[str, Fraction]
    objective: Objective


def _fraction(text: str, line: int) -> Fraction:
    if not _FRAC.match(text):
        raise GameFileError(f"expected an integer or num/den fraction, got {text!r}", line)
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise GameFileError("zero denominator", line)
    return Fraction(int(num), int(den) if den else 1)


def _int(text: str, line: int) -> int:
    if not _INT.match(text):
        raise GameFileError(f"expected an integer, got {text!r}", line)
    return int(text)


def _ident(text: str, line: int) -> str:
    if not _IDENT.match(text):
        raise GameFileError(f"invalid identifier {text!r}", line)
    return text


def _options(tokens: List[str], allowed, line: int) -> Dict[str, str]:
    opts: Dict[str, str] = {}
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq or not val:
            raise GameFileError(f"expected key=value, got {tok!r}", line)
        if key not in allowed:
            raise GameFileError(f"unknown option {key!r}", line)
        if key in opts:
            raise GameFileError(f"option {key!r} given twice", line)
        opts[key] = val
    return opts


@dataclass
class _Raw:
    name: Optional[str] = None
    init: Optional[Tuple[str, int]] = None
    objective: Optional[Tuple[str, Dict[str, str], int]] = None
    nodes: List[str] = field(default_factory=list)
    node_line: Dict[str, int] = field(default_factory=dict)
    node_opts: Dict[str, Dict[str, str]] = field(default_factory=dict)
    edges: List[Tuple[str, str, int]] = field(default_factory=list)
    terminal: Optional[Tuple[str, str, int]] = None
    edgeprob: Optional[Tuple[Fraction, int]] = None


def _scan(text: str) -> _Raw:
    raw = _Raw()
    for lineno, full in enumerate(text.splitlines(), 1):
        line = full.split("#", 1)[0].strip()
        if not line:
            continue
        kw, *rest = line.split()
        if kw == "game":
            if len(rest) != 1:
                raise GameFileError("usage: game <name>", lineno)
            if raw.name is not None:
                raise GameFileError("duplicate game line", lineno)
            raw.name = _ident(rest[0], lineno)
        elif kw == "init":
            if len(rest) != 1:
                raise GameFileError("usage: init <node>", lineno)
            if raw.init is not None:
                raise GameFileError("duplicate init line", lineno)
            raw.init = (_ident(rest[0], lineno), lineno)
        elif kw == "objective":
            if not rest:
                raise GameFileError("usage: objective reachability|parity|energy ...", lineno)
            if raw.objective is not None:
                raise GameFileError("duplicate objective line", lineno)
            kind = rest[0]
            allowed = {"reachability": {"target"}, "parity": set(), "energy": {"credit"}}.get(kind)
            if allowed is None:
                raise GameFileError(f"unknown objective {kind!r}", lineno)
            raw.objective = (kind, _options(rest[1:], allowed, lineno), lineno)
        elif kw == "node":
            if not rest:
                raise GameFileError("usage: node <id> [toss=n/d] [priority=k] [weight=k]", lineno)
            v = _ident(rest[0], lineno)
            if v in raw.node_line:
                raise GameFileError(f"node {v} declared twice (first on line {raw.node_line[v]})", lineno, v)
            raw.nodes.append(v)
            raw.node_line[v] = lineno
            raw.node_opts[v] = _options(rest[1:], {"toss", "priority", "weight"}, lineno)
        elif kw == "edge":
            if len(rest) != 2:
                raise GameFileError("usage: edge <u> <v>", lineno)
            raw.edges.append((_ident(rest[0], lineno), _ident(rest[1], lineno), lineno))
        elif kw == "terminal":
            if len(rest) != 2:
                raise GameFileError("usage: terminal <s> <t>", lineno)
            if raw.terminal is not None:
                raise GameFileError("duplicate terminal line", lineno)
            raw.terminal = (_ident(rest[0], lineno), _ident(rest[1], lineno), lineno)
        elif kw == "edgeprob":
            if len(rest) != 1:
                raise GameFileError("usage: edgeprob <num>/<den>", lineno)
            if raw.edgeprob is not None:
                raise GameFileError("duplicate edgeprob line", lineno)
            raw.edgeprob = (_fraction(rest[0], lineno), lineno)
        else:
            raise GameFileError(f"unknown directive {kw!r}", lineno)
    for u, v, lineno in raw.edges:
        for end in (u, v):
            if end not in raw.node_line:
                raise GameFileError(f"edge endpoint {end} is not a declared node", lineno, end)
    return raw


def _adjacency(raw: _Raw) -> Dict[str, List[str]]:
    adj: Dict[str, List[str]] = {v: [] for v in raw.nodes}
    for u, v, lineno in raw.edges:
        if v in adj[u]:
            raise GameFileError(f"duplicate edge {u} {v}", lineno, u)
        adj[u].append(v)
    return adj


def parse_game(text: str) -> GameFile:
    raw = _scan(text)
    if raw.terminal is not None or raw.edgeprob is not None:
        raise GameFileError("terminal/edgeprob belong to reliability files; use parse_reliability")
    if raw.init is None:
        raise GameFileError("missing init line")
    if raw.objective is None:
        raise GameFileError("missing objective line")
    if not raw.nodes:
        raise GameFileError("no nodes declared")
    kind, opts, oline = raw.objective

    toss: Dict[str, Fraction] = {}
    pri: Dict[str, int] = {}
    weight: Dict[str, int] = {}
    for v in raw.nodes:
        line = raw.node_line[v]
        o = raw.node_opts[v]
        toss[v] = _fraction(o["toss"], line) if "toss" in o else DEFAULT_TOSS
        if "priority" in o:
            if kind != "parity":
                raise GameFileError("priority given for a non-parity objective", line, v)
            pri[v] = _int(o["priority"], line)
        if "weight" in o:
            if kind != "energy":
                raise GameFileError("weight given for a non-energy objective", line, v)
            weight[v] = _int(o["weight"], line)

    if kind == "reachability":
        if "target" not in opts:
            raise GameFileError("reachability objective needs target=<node>[,<node>...]", oline)
        targets = [t for t in opts["target"].split(",")]
        if any(not t for t in targets):
            raise GameFileError("empty target name", oline)
        objective: Objective = Reachability(frozenset(targets))
    elif kind == "parity":
        objective = Parity(pri)
    else:
        if "credit" not in opts:
            raise GameFileError("energy objective needs credit=<int>", oline)
        credit = _int(opts["credit"], oline)
        objective = Energy(weight, credit)

    graph = GameGraph(tuple(raw.nodes), _adjacency(raw), raw.init[0])
    try:
        validate(graph, objective)
        validate_toss(graph, toss)
    except GameFileError:
        raise
    except ValidationError as err:
        line = raw.node_line.get(err.node) if err.node is not None else None
        if line is None and "init" in str(err):
            line = raw.init[1]
        raise GameFileError(str(err), line, err.node) from None
    return GameFile(raw.name or "game", graph, toss, objective)


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def serialize_game(graph: GameGraph, toss, objective: Objective, name: str = "game") -> str:
    lines = [f"game {name}", f"init {graph.init}"]
    if isinstance(objective, Reachability):
        lines.append("objective reachability target=" + ",".join(v for v in graph.nodes if v in objective.targets))
    elif isinstance(objective, Parity):
        lines.append("objective parity")
    else:
        lines.append(f"objective energy credit={objective.credit}")
    for v in graph.nodes:
        parts = [f"node {v}", f"toss={_fmt(Fraction(toss[v]))}"]
        if isinstance(objective, Parity):
            parts.append(f"priority={objective.priority[v]}")
        elif isinstance(objective, Energy):
            parts.append(f"weight={objective.weight[v]}")
        lines.append(" ".join(parts))
    for v in graph.nodes:
        for w in graph.edges[v]:
            lines.append(f"edge {v} {w}")
    return "\n".join(lines) + "\n"


def parse_reliability(text: str) -> ReliabilityInstance:
    raw = _scan(text)
    if raw.terminal is None:
        raise GameFileError("missing terminal line")
    if raw.edgeprob is None:
        raise GameFileError("missing edgeprob line")
    if raw.init is not None or raw.objective is not None:
        raise GameFileError("init/objective do not belong in a reliability file")
    s, t, tline = raw.terminal
    for end in (s, t):
        if end not in raw.node_line:
            raise GameFileError(f"terminal {end} is not a declared node", tline, end)
    for v in raw.nodes:
        if raw.node_opts[v]:
            raise GameFileError("node options are not used in reliability files", raw.node_line[v], v)
    edges = []
    seen = set()
    for u, v, lineno in raw.edges:
        if (u, v) in seen:
            raise GameFileError(f"duplicate edge {u} {v}", lineno, u)
        seen.add((u, v))
        edges.append((u, v))
    inst = ReliabilityInstance(tuple(raw.nodes), tuple(edges), s, t, raw.edgeprob[0])
    try:
        inst.validate()
    except ValidationError as err:
        line = raw.edgeprob[1] if "probability" in str(err) else tline
        raise GameFileError(str(err), line) from None
    return inst


def serialize_reliability(inst: ReliabilityInstance, name: str = "reliability") -> str:
    lines = [f"game {name}", f"terminal {inst.s} {inst.t}", f"edgeprob {_fmt(inst.p)}"]
    lines += [f"node {v}" for v in inst.nodes]
    lines += [f"edge {u} {v}" for u, v in inst.edges]
    return "\n".join(lines) + "\n"


def load_game(path) -> GameFile:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())


def load_reliability(path) -> ReliabilityInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_reliability(fh.read())
