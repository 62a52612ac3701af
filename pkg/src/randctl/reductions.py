"""Hardness constructions and objective transformations.

* QBF (strictly alternating prefix) to a toss-as-you-go reachability game
  with a known threshold.
* Adjusted two-terminal reliability to a toss-at-start reachability game.
* Reachability to parity or energy objectives, preserving Max's winner on
  every ownership assignment.

Both source problems come with exhaustive oracles.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .core import (
    Energy,
    GameGraph,
    Parity,
    Reachability,
    ValidationError,
    as_fraction,
    uniform_toss,
    validate,
)
from .solvers import GuardExceeded

TOP = "top"
BOT = "bot"


# ---------------------------------------------------------------------------
# QBF


@dataclass(frozen=True)
class Pcnf:
    """forall x1 exists y1 ... forall xn exists yn . clauses

    Variables are numbered as in QDIMACS with the prefix order fixed:
    variable ``2i-1`` is ``x_i`` and ``2i`` is ``y_i``. A literal is a
    nonzero signed variable number.
    """

    n: int
    clauses: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))

    def validate(self) -> None:
        if self.n < 1:
            raise ValidationError("a formula needs at least one quantifier pair")
        if not self.clauses:
            raise ValidationError("a formula needs at least one clause")
        for j, clause in enumerate(self.clauses, 1):
            if not clause:
                raise ValidationError(f"clause {j} is empty")
            for lit in clause:
                if lit == 0 or abs(lit) > 2 * self.n:
                    raise ValidationError(f"clause {j} mentions unknown variable {lit}")


def _var_name(var: int) -> str:
    i = (var + 1) // 2
    return f"x{i}" if var % 2 else f"y{i}"


def _lit_node(lit: int) -> str:
    name = _var_name(abs(lit))
    return name if lit > 0 else f"~{name}"


def parse_qdimacs(text: str) -> Pcnf:
    """Read the alternating fragment of QDIMACS.

    Each quantifier line must bind exactly one variable, the lines must
    alternate ``a``/``e`` starting with ``a``, and variables are renumbered
    in prefix order.
    """
    prefix: List[Tuple[str, int]] = []
    clauses: List[Tuple[int, ...]] = []
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tokens = line.split()
        if tokens[0] == "p":
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise ValidationError(f"line {lineno}: malformed header")
            header = True
            continue
        if not header:
            raise ValidationError(f"line {lineno}: missing 'p cnf' header")
        body = tokens[1:] if tokens[0] in ("a", "e") else tokens
        try:
            nums = [int(t) for t in body]
        except ValueError:
            raise ValidationError(f"line {lineno}: expected integers") from None
        if not nums or nums[-1] != 0:
            raise ValidationError(f"line {lineno}: missing terminating 0")
        nums = nums[:-1]
        if tokens[0] in ("a", "e"):
            if clauses:
                raise ValidationError(f"line {lineno}: quantifier after clauses")
            if len(nums) != 1:
                raise ValidationError(f"line {lineno}: each quantifier block must bind one variable")
            expected = "a" if len(prefix) % 2 == 0 else "e"
            if tokens[0] != expected:
                raise ValidationError(f"line {lineno}: prefix must alternate a/e starting with a")
            prefix.append((tokens[0], nums[0]))
        else:
            clauses.append(tuple(nums))
    if len(prefix) % 2:
        raise ValidationError("prefix must end with an existential block")
    renumber = {v: i for i, (_, v) in enumerate(prefix, 1)}
    out = []
    for clause in clauses:
        lits = []
        for lit in clause:
            if abs(lit) not in renumber:
                raise ValidationError(f"free variable {abs(lit)} in matrix")
            lits.append(renumber[abs(lit)] * (1 if lit > 0 else -1))
        out.append(tuple(lits))
    pcnf = Pcnf(len(prefix) // 2, tuple(out))
    pcnf.validate()
    return pcnf


def format_qdimacs(pcnf: Pcnf) -> str:
    lines = [f"p cnf {2 * pcnf.n} {len(pcnf.clauses)}"]
    for i in range(1, pcnf.n + 1):
        lines.append(f"a {2 * i - 1} 0")
        lines.append(f"e {2 * i} 0")
    for clause in pcnf.clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"


def qbf_oracle(pcnf: Pcnf, max_pairs: int = 8) -> bool:
    """Evaluate the formula by minimax over the full assignment tree."""
    pcnf.validate()
    if pcnf.n > max_pairs:
        raise GuardExceeded(f"qbf_oracle limited to {max_pairs} quantifier pairs")
    nvars = 2 * pcnf.n

    def sat(assign: Sequence[bool]) -> bool:
        return all(any(assign[abs(l) - 1] == (l > 0) for l in c) for c in pcnf.clauses)

    def value(assign: List[bool]) -> bool:
        k = len(assign)
        if k == nvars:
            return sat(assign)
        branches = (value(assign + [b]) for b in (False, True))
        # odd variable numbers (even k) are universal
        return all(branches) if k % 2 == 0 else any(branches)

    return value([])


def pair_probabilities(n: int) -> Tuple[Fraction, Fraction]:
    """Probability p of Max winning before a clause, and q of reaching one in Max's hands."""
    if n < 1:
        raise ValueError("n must be at least 1")
    p, q = Fraction(0), Fraction(1)
    step = Fraction(1, 2) + Fraction(1, 4) + Fraction(1, 64)
    for _ in range(n):
        p, q = p + q * step, q / 64
    return p + q / 2, q / 4


def qbf_threshold(n: int) -> Fraction:
    p, q = pair_probabilities(n)
    return p + q / 2


def qbf_to_game(pcnf: Pcnf):
    """Game graph, toss (all 1/2), reachability objective and threshold for ``pcnf``.

    Max wins with probability at least the threshold iff the formula is true.
    """
    pcnf.validate()
    n = pcnf.n
    nodes: List[str] = []
    edges: Dict[str, List[str]] = {}

    def add(v: str):
        nodes.append(v)
        edges[v] = []

    def edge(u: str, v: str):
        if v not in edges[u]:
            edges[u].append(v)

    for i in range(1, n + 1):
        for v in (f"Ax{i}", f"x{i}", f"~x{i}"):
            add(v)
        for v in (f"Ey{i}", f"y{i}''", f"~y{i}''", f"y{i}'", f"~y{i}'", f"y{i}", f"~y{i}"):
            add(v)
    clause_nodes = [f"C{j}" for j in range(1, len(pcnf.clauses) + 1)]
    for c in clause_nodes:
        add(c)
    for v in ("and", TOP, BOT):
        add(v)

    for i in range(1, n + 1):
        edge(f"Ax{i}", f"x{i}")
        edge(f"Ax{i}", f"~x{i}")
        edge(f"Ey{i}", f"y{i}''")
        edge(f"Ey{i}", f"~y{i}''")
        edge(f"y{i}''", f"y{i}'")
        edge(f"~y{i}''", f"~y{i}'")
        edge(f"y{i}'", f"y{i}")
        edge(f"~y{i}'", f"~y{i}")
        edge(f"x{i}", f"Ey{i}")
        edge(f"~x{i}", f"Ey{i}")
        nxt = f"Ax{i + 1}" if i < n else "and"
        edge(f"y{i}", nxt)
        edge(f"~y{i}", nxt)
    for c in clause_nodes:
        edge("and", c)
    for c, clause in zip(clause_nodes, pcnf.clauses):
        for lit in clause:
            edge(c, _lit_node(-lit))
    for i in range(1, n + 1):
        for v in (f"x{i}", f"~x{i}", f"y{i}", f"~y{i}", f"Ax{i}"):
            edge(v, TOP)
        for v in (f"Ey{i}", f"y{i}'", f"~y{i}'", f"y{i}''", f"~y{i}''"):
            edge(v, BOT)
    edge("and", TOP)
    for c in clause_nodes:
        edge(c, BOT)
    edge(TOP, TOP)
    edge(BOT, BOT)

    graph = GameGraph(tuple(nodes), edges, "Ax1")
    objective = Reachability({TOP})
    return graph, uniform_toss(graph), objective, qbf_threshold(n)


# ---------------------------------------------------------------------------
# adjusted two-terminal reliability


@dataclass(frozen=True)
class ReliabilityInstance:
    """Directed graph with terminals; each edge, and a virtual edge into s, is present with probability p."""

    nodes: Tuple[str, ...]
    edges: Tuple[Tuple[str, str], ...]
    s: str
    t: str
    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "p", as_fraction(self.p))

    def validate(self) -> None:
        known = set(self.nodes)
        if self.s not in known or self.t not in known:
            raise ValidationError("terminals must be nodes of the graph")
        if self.s == self.t:
            raise ValidationError("terminals must differ")
        if not 0 < self.p < 1:
            raise ValidationError(f"edge probability {self.p} must lie strictly between 0 and 1")
        if len(set(self.edges)) != len(self.edges):
            raise ValidationError("duplicate edge")
        for u, v in self.edges:
            if u not in known or v not in known:
                raise ValidationError(f"edge {u}->{v} has an unknown endpoint", u)


def edge_node(u: str, v: str) -> str:
    return f"e_{u}_{v}"


def reliability_to_game(inst: ReliabilityInstance):
    """One node per edge plus ``init``, ``top`` and ``bot``; toss is p everywhere.

    A Max-owned edge node means the edge is present: Max can move on along
    it, while a Min-owned one is sent to ``bot``.
    """
    inst.validate()
    e_nodes = [edge_node(u, v) for u, v in inst.edges]
    nodes = ["init"] + e_nodes + [TOP, BOT]
    edges: Dict[str, List[str]] = {v: [] for v in nodes}
    for u, v in inst.edges:
        if u == inst.s:
            edges["init"].append(edge_node(u, v))
    for u, v in inst.edges:
        for v2, w in inst.edges:
            if v2 == v:
                edges[edge_node(u, v)].append(edge_node(v, w))
        if v == inst.t:
            edges[edge_node(u, v)].append(TOP)
    for v in nodes:
        if v != TOP:
            edges[v].append(BOT)
    edges[TOP].append(TOP)
    graph = GameGraph(tuple(nodes), edges, "init")
    return graph, uniform_toss(graph, inst.p), Reachability({TOP})


def reliability_oracle(inst: ReliabilityInstance, max_edges: int = 24) -> Fraction:
    """p times the s-t connection probability, by enumerating edge subsets."""
    inst.validate()
    m = len(inst.edges)
    if m > max_edges:
        raise GuardExceeded(f"reliability_oracle limited to {max_edges} edges")
    p = inst.p
    alpha = Fraction(0)
    for present in itertools.product((True, False), repeat=m):
        adj: Dict[str, List[str]] = {}
        k = 0
        for (u, v), keep in zip(inst.edges, present):
            if keep:
                adj.setdefault(u, []).append(v)
                k += 1
        seen = {inst.s}
        queue = deque([inst.s])
        while queue:
            x = queue.popleft()
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if inst.t in seen:
            alpha += p ** k * (1 - p) ** (m - k)
    return p * alpha


# ---------------------------------------------------------------------------
# objective transformations


def _check_self_loops(graph: GameGraph, objective: Reachability) -> None:
    validate(graph, objective)
    for t in sorted(objective.targets):
        if t not in graph.edges[t]:
            raise ValidationError(f"target {t} has no self-loop", t)


def reach_to_parity(graph: GameGraph, objective: Reachability) -> Parity:
    """Targets get priority 2, everything else 1."""
    _check_self_loops(graph, objective)
    return Parity({v: 2 if v in objective.targets else 1 for v in graph.nodes})


def reach_to_energy(graph: GameGraph, objective: Reachability, context: str = "two") -> Energy:
    """Targets weigh +1, everything else -1, with enough credit to reach a target.

    ``context`` is ``"one"`` (toss-as-you-go: credit (|V|+1)(|V|+2)/2) or
    ``"two"`` (toss-at-start: credit |V|+1).
    """
    _check_self_loops(graph, objective)
    n = len(graph.nodes)
    if context == "one":
        credit = (n + 1) * (n + 2) // 2
    elif context == "two":
        credit = n + 1
    else:
        raise ValueError(f"context must be 'one' or 'two', got {context!r}")
    return Energy({v: 1 if v in objective.targets else -1 for v in graph.nodes}, credit)
