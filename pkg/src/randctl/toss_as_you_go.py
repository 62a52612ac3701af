"""Exact values of toss-as-you-go games.

A node's owner is tossed the first time the token reaches it. The game is
unfolded into explicit states ``(ownership, token)``. Ownership only grows,
so states are solved layer by layer, most-assigned ownerships first. Inside
one ownership the game is deterministic; its values come from strong/weak
p-games whose sinks are the states that toss a still unassigned node.

Energy objectives run on a product with the current energy level; every
energy copy of a node shares that node's single toss.
"""
from __future__ import annotations

import logging
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from .core import (
    MAX,
    MIN,
    Energy,
    GameGraph,
    Objective,
    Parity,
    Player,
    Reachability,
    TossFunction,
    ValidationError,
    as_fraction,
    decode_ownership,
    relevant_nodes,
    validate,
    validate_toss,
)
from .solvers import GuardExceeded, attractor_indices, _preds, _zielonka

log = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 2_000_000
DEAD = -1


class CapNotStable(RuntimeError):
    """The energy cap kept changing the value after the allowed number of doublings."""


def explicit_state_count(graph: GameGraph, literal: bool = False) -> int:
    """Size of the explicit game: 3**k ownerships times |V| token positions.

    ``k`` counts relevant nodes only; ``literal=True`` uses every node.
    """
    k = len(graph.nodes) if literal else len(relevant_nodes(graph))
    return 3 ** k * len(graph.nodes)


@dataclass(frozen=True)
class EnergyProduct:
    """Product of a graph with clamped energy levels, plus an absorbing dead node.

    ``labels[i]`` is ``(node index, energy)``; the dead node is ``(DEAD, DEAD)``.
    """

    graph: GameGraph
    labels: Tuple[Tuple[int, int], ...]
    succ: Tuple[Tuple[int, ...], ...]
    init: int
    dead: int
    cap: int

    def node(self, i: int) -> Optional[str]:
        v = self.labels[i][0]
        return None if v == DEAD else self.graph.nodes[v]


def energy_product(graph: GameGraph, weight, credit: int, cap: int) -> EnergyProduct:
    """Track the energy level alongside the token.

    Entering node v from level e gives level e + w(v), clamped to ``cap``;
    a negative level goes to the dead node. Max's objective becomes never
    reaching dead.
    """
    if cap < credit:
        raise ValueError(f"cap {cap} below initial credit {credit}")
    w = [weight[v] for v in graph.nodes]
    g_succ = graph.succ
    labels: List[Tuple[int, int]] = [(DEAD, DEAD)]
    index = {(DEAD, DEAD): 0}
    succ: List[List[int]] = [[0]]

    def enter(v: int, level: int) -> int:
        level += w[v]
        key = (DEAD, DEAD) if level < 0 else (v, min(level, cap))
        i = index.get(key)
        if i is None:
            i = len(labels)
            index[key] = i
            labels.append(key)
            succ.append(None)
            todo.append(i)
        return i

    todo: List[int] = []
    init = enter(graph.init_index, credit)
    while todo:
        i = todo.pop()
        v, e = labels[i]
        out = []
        for u in g_succ[v]:
            j = enter(u, e)
            if j not in out:
                out.append(j)
        succ[i] = out
    return EnergyProduct(graph, tuple(labels), tuple(tuple(s) for s in succ), init, 0, cap)


class _Model:
    """The token graph the explicit game runs on, with one toss variable per token node."""

    def __init__(self, graph: GameGraph, succ, var, init, kind, data, labels):
        self.graph = graph
        self.succ = [tuple(s) for s in succ]
        self.var = list(var)
        self.init = init
        self.kind = kind  # "reach" | "parity" | "safety"
        self.data = data
        self.labels = labels


def _plain_model(graph: GameGraph, objective: Objective) -> _Model:
    rel = relevant_nodes(graph)
    var = [i if v in rel else -1 for i, v in enumerate(graph.nodes)]
    labels = [(i, None) for i in range(len(graph.nodes))]
    if isinstance(objective, Reachability):
        data = {graph.index[t] for t in objective.targets}
        return _Model(graph, graph.succ, var, graph.init_index, "reach", data, labels)
    pri = [objective.priority[v] for v in graph.nodes]
    return _Model(graph, graph.succ, var, graph.init_index, "parity", pri, labels)


def _energy_model(graph: GameGraph, objective: Energy, cap: int) -> _Model:
    prod = energy_product(graph, objective.weight, objective.credit, cap)
    rel = relevant_nodes(graph)
    var = []
    for v, _ in prod.labels:
        var.append(v if v != DEAD and graph.nodes[v] in rel else -1)
    labels = [(v, e) for v, e in prod.labels]
    return _Model(graph, prod.succ, var, prod.init, "safety", {prod.dead}, labels)


@dataclass
class ExplicitSolution:
    """Values of every reachable explicit state.

    Keys are ``(ownership code, node index, energy)``; ``energy`` is ``None``
    outside energy games and the dead state is ``(code, -1, -1)``.
    """

    graph: GameGraph
    toss: TossFunction
    values: Dict[Tuple[int, int, Optional[int]], Fraction]
    init_key: Tuple[int, int, Optional[int]]
    layers: int = 0
    p_game_solves: int = 0

    @property
    def value(self) -> Fraction:
        return self.values[self.init_key]

    def unassigned(self, code: int) -> List[str]:
        """Relevant nodes left unassigned by ownership ``code``."""
        rel = relevant_nodes(self.graph)
        own = decode_ownership(self.graph, code)
        return [v for v in self.graph.nodes if v in rel and v not in own]

    def denominator_bound(self, code: int) -> int:
        d = 1
        for v in self.unassigned(code):
            d *= as_fraction(self.toss[v]).denominator
        return d

    def is_random(self, key) -> bool:
        code, v, _ = key
        if v == DEAD:
            return False
        return self.graph.nodes[v] in self.unassigned(code)


def _digit(code: int, pw: int) -> int:
    return code // pw % 3


class _Solver:
    def __init__(self, model: _Model, toss, max_states: int, check: bool):
        self.m = model
        graph = model.graph
        self.pow3 = [3 ** i for i in range(len(graph.nodes))]
        self.toss = [as_fraction(toss[v]) for v in graph.nodes]
        self.max_states = max_states
        self.check = check
        self.p_game_solves = 0

    def initial_code(self) -> int:
        # nodes with a single successor are never tossed: they belong to Max
        rel = relevant_nodes(self.m.graph)
        return sum(p for v, p in zip(self.m.graph.nodes, self.pow3) if v not in rel)

    def is_unassigned(self, code: int, tok: int) -> bool:
        v = self.m.var[tok]
        return v >= 0 and _digit(code, self.pow3[v]) == 0

    def explore(self) -> Dict[int, Tuple[Set[int], Set[int]]]:
        """Forward search; returns per ownership code (random tokens, assigned tokens)."""
        m = self.m
        start = (self.initial_code(), m.init)
        layers: Dict[int, Tuple[Set[int], Set[int]]] = defaultdict(lambda: (set(), set()))
        seen = {start}
        stack = [start]
        terminal = m.data if m.kind == "reach" else ()
        while stack:
            code, tok = stack.pop()
            rnd, asg = layers[code]
            if tok in terminal:
                asg.add(tok)
                continue
            if self.is_unassigned(code, tok):
                rnd.add(tok)
                pw = self.pow3[m.var[tok]]
                children = ((code + pw, tok), (code + 2 * pw, tok))
            else:
                asg.add(tok)
                children = ((code, w) for w in m.succ[tok])
            for c in children:
                if c not in seen:
                    seen.add(c)
                    if len(seen) > self.max_states:
                        raise GuardExceeded(
                            f"explicit game exceeds {self.max_states} reachable states"
                        )
                    stack.append(c)
        return dict(layers)

    def _assigned_count(self, code: int) -> int:
        n = 0
        while code:
            code, d = divmod(code, 3)
            n += d != 0
        return n

    def solve(self) -> Dict[Tuple[int, int], Fraction]:
        m = self.m
        layers = self.explore()
        val: Dict[Tuple[int, int], Fraction] = {}
        terminal = m.data if m.kind == "reach" else ()
        order = sorted(layers, key=self._assigned_count, reverse=True)
        for code in order:
            rnd, asg = layers[code]
            for tok in rnd:
                if tok in terminal:
                    val[code, tok] = Fraction(1)
                    continue
                pw = self.pow3[m.var[tok]]
                t = self.toss[m.var[tok]]
                val[code, tok] = t * val[code + pw, tok] + (1 - t) * val[code + 2 * pw, tok]
            todo = [tok for tok in asg if tok not in terminal]
            for tok in asg:
                if tok in terminal:
                    val[code, tok] = Fraction(1)
            if todo:
                self._solve_layer(code, rnd, todo, val)
        self.layer_count = len(order)
        return val

    def _solve_layer(self, code, rnd, todo, val):
        m = self.m
        n = len(m.succ)
        terminal = m.data if m.kind == "reach" else ()
        # unassigned targets stay targets: their value is 1 whoever owns them
        boundary = {x for x in range(n) if x not in terminal and self.is_unassigned(code, x)}
        is_max = []
        for x in range(n):
            v = m.var[x]
            is_max.append(v < 0 or _digit(code, self.pow3[v]) != 2)
        succ = [((x,) if x in boundary else m.succ[x]) for x in range(n)]
        pred = _preds(succ)
        bvals = {x: val[code, x] for x in rnd}
        cands = sorted(set(bvals.values()) | {Fraction(0), Fraction(1)})
        cache: Dict[Tuple[Fraction, str], Set[int]] = {}

        def region(p: Fraction, mode: str) -> Set[int]:
            key = (p, mode)
            r = cache.get(key)
            if r is None:
                if mode == "strong":
                    win = {x for x, q in bvals.items() if q >= p}
                else:
                    win = {x for x, q in bvals.items() if q > p}
                r = self._p_region(succ, pred, is_max, boundary, win)
                cache[key] = r
                self.p_game_solves += 1
            return r

        for tok in todo:
            lo, hi = 0, len(cands) - 1
            if tok not in region(cands[0], "strong"):
                p = cands[0]
            else:
                # largest index whose strong game is won; regions shrink as p grows
                while lo < hi:
                    mid = (lo + hi + 1) // 2
                    if tok in region(cands[mid], "strong"):
                        lo = mid
                    else:
                        hi = mid - 1
                p = cands[lo]
            if self.check and p < 1 and tok in region(p, "weak"):
                raise AssertionError(
                    f"Min does not win the weak {p}-game at token {tok}, ownership {code}"
                )
            val[code, tok] = p

    def _p_region(self, succ, pred, is_max, boundary, win) -> Set[int]:
        m = self.m
        n = len(succ)
        if m.kind == "reach":
            targets = (set(m.data) - boundary) | win
            return attractor_indices(succ, pred, is_max, targets, True)
        if m.kind == "safety":
            bad = set(m.data) | (boundary - win)
            return set(range(n)) - attractor_indices(succ, pred, is_max, bad, False)
        pri = list(m.data)
        for x in boundary:
            pri[x] = 0 if x in win else 1
        return _zielonka(set(range(n)), succ, pred, is_max, pri, False)[0]


def _solve_model(model: _Model, toss, max_states: int, check: bool) -> ExplicitSolution:
    solver = _Solver(model, toss, max_states, check)
    raw = solver.solve()
    values = {}
    for (code, tok), q in raw.items():
        v, e = model.labels[tok]
        values[code, v, e] = q
    v0, e0 = model.labels[model.init]
    sol = ExplicitSolution(
        model.graph, toss, values, (solver.initial_code(), v0, e0), solver.layer_count, solver.p_game_solves
    )
    log.debug(
        "explicit game: %d states, %d layers, %d p-game solves",
        len(values), sol.layers, sol.p_game_solves,
    )
    return sol


def explicit_solution(
    graph: GameGraph,
    toss: TossFunction,
    objective: Objective,
    *,
    cap: Optional[int] = None,
    max_states: int = DEFAULT_MAX_STATES,
    check: bool = True,
) -> ExplicitSolution:
    """Solve every reachable explicit state.

    For energy objectives ``cap`` bounds the tracked energy level (default:
    credit + |V| * max|w|).
    """
    validate(graph, objective)
    validate_toss(graph, toss)
    if isinstance(objective, Energy):
        if cap is None:
            cap = _default_cap(graph, objective)
        model = _energy_model(graph, objective, cap)
    else:
        model = _plain_model(graph, objective)
    return _solve_model(model, toss, max_states, check)


def _default_cap(graph: GameGraph, objective: Energy) -> int:
    w_max = max((abs(w) for w in objective.weight.values()), default=0)
    return objective.credit + len(graph.nodes) * w_max


def value_one_energy(
    graph: GameGraph,
    toss: TossFunction,
    weight,
    credit: int,
    *,
    max_doublings: int = 5,
    max_states: int = DEFAULT_MAX_STATES,
    check: bool = True,
) -> Fraction:
    """Energy value via the product, doubling the cap until two caps agree."""
    objective = Energy(weight, credit)
    cap = _default_cap(graph, objective)
    prev = explicit_solution(graph, toss, objective, cap=cap, max_states=max_states, check=check).value
    for _ in range(max_doublings):
        if cap == 0:
            return prev
        cap *= 2
        cur = explicit_solution(graph, toss, objective, cap=cap, max_states=max_states, check=check).value
        if cur == prev:
            return cur
        prev = cur
    raise CapNotStable(f"energy value still changing at cap {cap}")


def value_one(
    graph: GameGraph,
    toss: TossFunction,
    objective: Objective,
    *,
    max_states: int = DEFAULT_MAX_STATES,
    check: bool = True,
) -> Fraction:
    """Max's optimal winning probability in the toss-as-you-go game."""
    if isinstance(objective, Energy):
        return value_one_energy(
            graph, toss, objective.weight, objective.credit, max_states=max_states, check=check
        )
    return explicit_solution(graph, toss, objective, max_states=max_states, check=check).value


def threshold_one(graph: GameGraph, toss: TossFunction, objective: Objective, theta, **kw) -> bool:
    theta = as_fraction(theta)
    if not 0 <= theta <= 1:
        raise ValueError(f"threshold {theta} outside [0, 1]")
    return value_one(graph, toss, objective, **kw) >= theta
