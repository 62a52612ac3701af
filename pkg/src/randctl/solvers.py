"""Solvers for two-player games on a fixed arena.

The public functions take an :class:`~randctl.core.Arena` and return a
:class:`SolveResult` keyed by node names. The ``*_region`` helpers work on
integer node indices and skip strategy extraction; the enumeration and
sampling code calls those in its inner loop.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

from .core import (
    MAX,
    MIN,
    Arena,
    Energy,
    GameGraph,
    Objective,
    Parity,
    Player,
    Reachability,
    ValidationError,
)

INF = None  # marker for "no finite credit suffices" in min_credit results

Succ = Sequence[Sequence[int]]


class GuardExceeded(RuntimeError):
    """An exhaustive procedure was asked to handle an instance above its size guard."""


@dataclass(frozen=True)
class SolveResult:
    max_region: frozenset
    max_strategy: Mapping[str, str] = field(default_factory=dict)
    min_strategy: Mapping[str, str] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    def winner(self, node: str) -> Player:
        return MAX if node in self.max_region else MIN


@dataclass(frozen=True)
class BoundaryRule:
    """Nodes turned into sinks whose status depends on a value and threshold.

    In strong mode a boundary node is a winning sink iff its value is at
    least ``threshold``; in weak mode iff it is strictly above.
    """

    values: Mapping[str, Fraction]
    mode: str = "strong"
    threshold: Fraction = Fraction(0)

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.mode not in ("strong", "weak"):
            raise ValueError(f"unknown p-game mode {self.mode!r}")
        if not 0 <= self.threshold <= 1:
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")

    def winning(self, node: str) -> bool:
        value = self.values[node]
        return value >= self.threshold if self.mode == "strong" else value > self.threshold


# ---------------------------------------------------------------------------
# index-level primitives


def _preds(succ: Succ) -> List[List[int]]:
    pred: List[List[int]] = [[] for _ in succ]
    for u, vs in enumerate(succ):
        for v in vs:
            pred[v].append(u)
    return pred


def attractor_indices(
    succ: Succ,
    pred: Succ,
    is_max: Sequence[bool],
    target: Set[int],
    player_max: bool,
    within: Optional[Set[int]] = None,
    strategy: Optional[Dict[int, int]] = None,
) -> Set[int]:
    """Attractor of ``target`` for one player inside the subgame ``within``.

    When ``strategy`` is given, it receives, for each attracted node of the
    player, the successor through which it was attracted.
    """
    if within is None:
        within = set(range(len(succ)))
    attr = set(target) & within
    count = {}
    queue = deque(attr)
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            if u in attr or u not in within:
                continue
            if is_max[u] == player_max:
                attr.add(u)
                if strategy is not None:
                    strategy[u] = v
                queue.append(u)
            else:
                c = count.get(u)
                if c is None:
                    c = sum(1 for w in succ[u] if w in within)
                c -= 1
                count[u] = c
                if c == 0:
                    attr.add(u)
                    queue.append(u)
    return attr


def reach_region(succ: Succ, pred: Succ, is_max: Sequence[bool], targets: Set[int]) -> Set[int]:
    return attractor_indices(succ, pred, is_max, targets, True)


def safety_region(succ: Succ, pred: Succ, is_max: Sequence[bool], bad: Set[int]) -> Set[int]:
    """Nodes from which Max can avoid ``bad`` forever."""
    lost = attractor_indices(succ, pred, is_max, bad, False)
    return set(range(len(succ))) - lost


def _zielonka(
    nodes: Set[int],
    succ: Succ,
    pred: Succ,
    is_max: Sequence[bool],
    pri: Sequence[int],
    strategies: bool,
) -> Tuple[Set[int], Set[int], Dict[int, int], Dict[int, int]]:
    """Return (Max region, Min region, Max strategy, Min strategy) on ``nodes``."""
    if not nodes:
        return set(), set(), {}, {}
    d = max(pri[v] for v in nodes)
    p_max = d % 2 == 0
    top = {v for v in nodes if pri[v] == d}
    s_attr: Dict[int, int] = {} if strategies else None
    a = attractor_indices(succ, pred, is_max, top, p_max, nodes, s_attr)
    w_max, w_min, s_max, s_min = _zielonka(nodes - a, succ, pred, is_max, pri, strategies)
    w_opp = w_min if p_max else w_max
    if not w_opp:
        # the player of parity d wins everywhere
        own_strat = {}
        if strategies:
            own_strat.update(s_max if p_max else s_min)
            own_strat.update(s_attr)
            for v in sorted(top):
                if is_max[v] == p_max:
                    own_strat[v] = next(w for w in succ[v] if w in nodes)
        if p_max:
            return set(nodes), set(), own_strat, {}
        return set(), set(nodes), {}, own_strat
    s_b: Dict[int, int] = {} if strategies else None
    b = attractor_indices(succ, pred, is_max, w_opp, not p_max, nodes, s_b)
    w2_max, w2_min, s2_max, s2_min = _zielonka(nodes - b, succ, pred, is_max, pri, strategies)
    opp_strat: Dict[int, int] = {}
    if strategies:
        opp_strat.update(s2_min if p_max else s2_max)
        opp_strat.update(s_b)
        old = s_min if p_max else s_max
        opp_strat.update({v: w for v, w in old.items() if v in w_opp})
    if p_max:
        return w2_max, w2_min | b, (s2_max if strategies else {}), opp_strat
    return w2_max | b, w2_min, opp_strat, (s2_min if strategies else {})


def parity_region(succ: Succ, pred: Succ, is_max: Sequence[bool], pri: Sequence[int]) -> Set[int]:
    return _zielonka(set(range(len(succ))), succ, pred, is_max, pri, False)[0]


def min_credit_indices(
    succ: Succ, pred: Succ, is_max: Sequence[bool], weight: Sequence[int]
) -> List[Optional[int]]:
    """Least fixpoint of f(v) = max(0, best successor value - w(v)).

    Values above ``len(succ) * max|w|`` are reported as ``None`` (infinite).
    """
    n = len(succ)
    cap = n * max((abs(w) for w in weight), default=0)
    top = cap + 1
    f = [0] * n

    def lift(v: int) -> int:
        vals = [f[u] for u in succ[v]]
        best = min(vals) if is_max[v] else max(vals)
        if best >= top:
            return top
        val = max(0, best - weight[v])
        return top if val > cap else val

    queue = deque(range(n))
    queued = [True] * n
    while queue:
        v = queue.popleft()
        queued[v] = False
        new = lift(v)
        if new > f[v]:
            f[v] = new
            for u in pred[v]:
                if not queued[u]:
                    queued[u] = True
                    queue.append(u)
    return [None if x >= top else x for x in f]


def energy_region(
    succ: Succ, pred: Succ, is_max: Sequence[bool], weight: Sequence[int], credit: int
) -> Set[int]:
    f = min_credit_indices(succ, pred, is_max, weight)
    return {v for v, x in enumerate(f) if x is not None and x <= credit}


# ---------------------------------------------------------------------------
# public API on arenas


def _names(graph: GameGraph, idx) -> frozenset:
    return frozenset(graph.nodes[i] for i in idx)


def _strategy_names(graph: GameGraph, strat: Mapping[int, int]) -> Dict[str, str]:
    return {graph.nodes[v]: graph.nodes[w] for v, w in sorted(strat.items())}


def attractor(arena: Arena, target, player: Player) -> frozenset:
    """Least set containing ``target`` from which ``player`` can force a visit to it."""
    g = arena.graph
    tgt = {g.index[v] for v in target}
    region = attractor_indices(g.succ, g.pred, arena.is_max, tgt, player is MAX)
    return _names(g, region)


def solve_reachability(arena: Arena, targets) -> SolveResult:
    g = arena.graph
    tgt = {g.index[v] for v in targets}
    s_max: Dict[int, int] = {}
    region = attractor_indices(g.succ, g.pred, arena.is_max, tgt, True, None, s_max)
    # targets themselves need no move; keep the witness edge inside the region
    for v in tgt:
        if arena.is_max[v]:
            s_max[v] = g.succ[v][0]
    s_min = {}
    for v in range(len(g.nodes)):
        if v not in region and not arena.is_max[v]:
            s_min[v] = next(w for w in g.succ[v] if w not in region)
    return SolveResult(_names(g, region), _strategy_names(g, s_max), _strategy_names(g, s_min))


def solve_parity(arena: Arena, priority: Mapping[str, int]) -> SolveResult:
    """Zielonka's recursive algorithm with memoryless strategy extraction."""
    g = arena.graph
    pri = [priority[v] for v in g.nodes]
    w_max, _, s_max, s_min = _zielonka(set(range(len(g.nodes))), g.succ, g.pred, arena.is_max, pri, True)
    s_max = {v: w for v, w in s_max.items() if v in w_max and arena.is_max[v]}
    s_min = {v: w for v, w in s_min.items() if v not in w_max and not arena.is_max[v]}
    return SolveResult(_names(g, w_max), _strategy_names(g, s_max), _strategy_names(g, s_min))


def min_credit(arena: Arena, weight: Mapping[str, int]) -> Dict[str, Optional[int]]:
    """Minimal initial credit for Max from each node (``None`` means infinite).

    The node's own weight counts, so a node of weight -1 needs credit 1.
    """
    g = arena.graph
    w = [weight[v] for v in g.nodes]
    f = min_credit_indices(g.succ, g.pred, arena.is_max, w)
    return {v: f[i] for i, v in enumerate(g.nodes)}


def solve_energy(arena: Arena, weight: Mapping[str, int], credit: int) -> SolveResult:
    g = arena.graph
    w = [weight[v] for v in g.nodes]
    succ, pred, is_max = g.succ, g.pred, arena.is_max
    f = min_credit_indices(succ, pred, is_max, w)
    region = {v for v, x in enumerate(f) if x is not None and x <= credit}

    big = float("inf")
    fv = [big if x is None else x for x in f]
    # energy accumulates, so plays leave the starting region; Max needs a
    # move wherever some finite credit suffices
    s_max = {}
    for v in range(len(succ)):
        if is_max[v] and f[v] is not None:
            s_max[v] = min(succ[v], key=lambda u: fv[u])

    # Min: fix one choice at a time, keeping Min's region intact; a
    # positional winning strategy survives each such restriction.
    s_min = {}
    losing = set(range(len(succ))) - region
    restricted = [list(s) for s in succ]
    for v in range(len(succ)) if losing else ():
        if is_max[v]:
            continue
        for u in succ[v]:
            trial = list(restricted)
            trial[v] = [u]
            f2 = min_credit_indices(trial, _preds(trial), is_max, w)
            if all(f2[x] is None or f2[x] > credit for x in losing):
                restricted = trial
                s_min[v] = u
                break
        else:  # pragma: no cover - positional determinacy makes this unreachable
            raise AssertionError(f"no positional Min choice found at node {g.nodes[v]}")
    return SolveResult(_names(g, region), _strategy_names(g, s_max), _strategy_names(g, s_min))


def solve(arena: Arena, objective: Objective) -> SolveResult:
    if isinstance(objective, Reachability):
        return solve_reachability(arena, objective.targets)
    if isinstance(objective, Parity):
        return solve_parity(arena, objective.priority)
    if isinstance(objective, Energy):
        return solve_energy(arena, objective.weight, objective.credit)
    raise ValidationError(f"unknown objective {objective!r}")


def solve_p_game(arena: Arena, objective: Objective, boundary: BoundaryRule) -> SolveResult:
    """Solve the game in which boundary nodes are replaced by sinks.

    A winning sink is an absorbing target (reachability), an even-priority
    self-loop (parity) or a self-loop of weight +1 (energy); losing sinks are
    the duals. Ownership of boundary nodes is irrelevant.
    """
    g = arena.graph
    win = {v for v in boundary.values if boundary.winning(v)}
    edges = {v: ((v,) if v in boundary.values else g.edges[v]) for v in g.nodes}
    sunk = Arena(GameGraph(g.nodes, edges, g.init), arena.owner)
    if isinstance(objective, Reachability):
        targets = (set(objective.targets) - set(boundary.values)) | win
        return solve_reachability(sunk, targets)
    if isinstance(objective, Parity):
        pri = dict(objective.priority)
        for v in boundary.values:
            pri[v] = 0 if v in win else 1
        return solve_parity(sunk, pri)
    if isinstance(objective, Energy):
        weight = dict(objective.weight)
        for v in boundary.values:
            weight[v] = 1 if v in win else -1
        return solve_energy(sunk, weight, objective.credit)
    raise ValidationError(f"unknown objective {objective!r}")


# ---------------------------------------------------------------------------
# exhaustive oracle

BRUTE_FORCE_MAX_NODES = 12


def lasso_from(succ_choice: Sequence[int], start: int) -> Tuple[List[int], int]:
    """Follow a positional profile from ``start`` until a node repeats.

    Returns the visited nodes and the index where the cycle begins.
    """
    seen: Dict[int, int] = {}
    path: List[int] = []
    v = start
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = succ_choice[v]
    return path, seen[v]


def lasso_wins(objective: Objective, nodes: Sequence[str], path: Sequence[int], loop: int) -> bool:
    """Winner of the eventually periodic play ``path[:loop] (path[loop:])^omega``."""
    if isinstance(objective, Reachability):
        return any(nodes[v] in objective.targets for v in path)
    if isinstance(objective, Parity):
        return max(objective.priority[nodes[v]] for v in path[loop:]) % 2 == 0
    if isinstance(objective, Energy):
        level = objective.credit
        for v in path:
            level += objective.weight[nodes[v]]
            if level < 0:
                return False
        return sum(objective.weight[nodes[v]] for v in path[loop:]) >= 0
    raise ValidationError(f"unknown objective {objective!r}")


def brute_force_solve(arena: Arena, objective: Objective) -> SolveResult:
    """Decide every node by trying all memoryless strategy pairs.

    Max wins from v iff some positional Max strategy beats every positional
    Min strategy, which is exact for the three objectives here.
    """
    g = arena.graph
    n = len(g.nodes)
    if n > BRUTE_FORCE_MAX_NODES:
        raise GuardExceeded(f"brute force limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}")
    max_nodes = [v for v in range(n) if arena.is_max[v]]
    min_nodes = [v for v in range(n) if not arena.is_max[v]]
    max_profiles = list(itertools.product(*(g.succ[v] for v in max_nodes)))
    min_profiles = list(itertools.product(*(g.succ[v] for v in min_nodes)))
    choice = [g.succ[v][0] for v in range(n)]

    def beats_all(mine, my_profile, theirs, their_profiles, starts, max_side):
        """Starts from which ``my_profile`` wins against every opposing profile."""
        for v, w in zip(mine, my_profile):
            choice[v] = w
        alive = set(starts)
        for their in their_profiles:
            for v, w in zip(theirs, their):
                choice[v] = w
            for s in list(alive):
                path, loop = lasso_from(choice, s)
                if lasso_wins(objective, g.nodes, path, loop) != max_side:
                    alive.discard(s)
            if not alive:
                break
        return alive

    region: Set[int] = set()
    for prof in max_profiles:
        region |= beats_all(max_nodes, prof, min_nodes, min_profiles, set(range(n)) - region, True)
        if len(region) == n:
            break
    losing = set(range(n)) - region

    # uniform positional witnesses exist for both players
    max_strategy: Dict[str, str] = {}
    if region:
        for prof in max_profiles:
            if beats_all(max_nodes, prof, min_nodes, min_profiles, region, True) == region:
                max_strategy = {
                    g.nodes[v]: g.nodes[w] for v, w in zip(max_nodes, prof) if v in region
                }
                break
    min_strategy: Dict[str, str] = {}
    if losing:
        for prof in min_profiles:
            if beats_all(min_nodes, prof, max_nodes, max_profiles, losing, False) == losing:
                min_strategy = {
                    g.nodes[v]: g.nodes[w] for v, w in zip(min_nodes, prof) if v in losing
                }
                break
    return SolveResult(_names(g, region), max_strategy, min_strategy)
