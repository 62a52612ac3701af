"""Sure and almost-sure winning, and the random-turn to stochastic translation.

Sure winning is the same question for all three ownership mechanisms: Max
fails to win surely exactly when some lasso path from the initial node
violates the objective, since Min may end up owning every node on it.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (
    Energy,
    GameGraph,
    Objective,
    Parity,
    Reachability,
    StochasticArena,
    TossFunction,
    ValidationError,
)


@dataclass(frozen=True)
class LassoWitness:
    """A path ``stem`` from init followed by a closed walk ``cycle``.

    ``stem[-1] == cycle[0] == cycle[-1]``; the play repeats ``cycle`` forever.
    """

    stem: Tuple[str, ...]
    cycle: Tuple[str, ...]

    def play_prefix(self) -> Tuple[str, ...]:
        """Stem followed by one traversal of the cycle."""
        return self.stem + self.cycle[1:]


@dataclass(frozen=True)
class SureResult:
    surely_wins: bool
    witness: Optional[LassoWitness] = None

    def __bool__(self) -> bool:
        return self.surely_wins


def _reachable(succ, start: int, allowed=None) -> List[int]:
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w not in seen and (allowed is None or w in allowed):
                seen.add(w)
                order.append(w)
                queue.append(w)
    return order


def _bfs_path(succ, src: int, dst_set, allowed=None) -> Optional[List[int]]:
    """Shortest path from ``src`` to any node of ``dst_set`` (src itself counts)."""
    if src in dst_set:
        return [src]
    parent = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w in parent or (allowed is not None and w not in allowed):
                continue
            parent[w] = v
            if w in dst_set:
                path = [w]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(w)
    return None


def _find_cycle_dfs(succ, start: int, allowed) -> Optional[Tuple[List[int], List[int]]]:
    """DFS from ``start`` inside ``allowed``; return (stem, cycle) for the first back edge."""
    if start not in allowed:
        return None
    color: Dict[int, int] = {}
    stack_path: List[int] = []

    def visit(v: int):
        color[v] = 1
        stack_path.append(v)
        for w in succ[v]:
            if w not in allowed:
                continue
            c = color.get(w, 0)
            if c == 1:
                i = stack_path.index(w)
                return stack_path[: i + 1], stack_path[i:] + [w]
            if c == 0:
                found = visit(w)
                if found:
                    return found
        color[v] = 2
        stack_path.pop()
        return None

    return visit(start)


def _extend_to_lasso(succ, path: List[int]) -> Tuple[List[int], List[int]]:
    """Keep following first successors from the end of ``path`` until a node repeats."""
    path = list(path)
    pos = {v: i for i, v in enumerate(path)}
    while True:
        w = succ[path[-1]][0]
        if w in pos:
            i = pos[w]
            return path[: i + 1], path[i:] + [w]
        pos[w] = len(path)
        path.append(w)


def _names(graph: GameGraph, idx: Sequence[int]) -> Tuple[str, ...]:
    return tuple(graph.nodes[i] for i in idx)


def _bad_lasso(graph: GameGraph, objective: Objective) -> Optional[LassoWitness]:
    succ = graph.succ
    init = graph.init_index
    nodes = graph.nodes
    if isinstance(objective, Reachability):
        free = {i for i, v in enumerate(nodes) if v not in objective.targets}
        found = _find_cycle_dfs(succ, init, free)
        if found:
            return LassoWitness(_names(graph, found[0]), _names(graph, found[1]))
        return None
    if isinstance(objective, Parity):
        pri = [objective.priority[v] for v in nodes]
        reach = set(_reachable(succ, init))
        for d in sorted({pri[v] for v in reach if pri[v] % 2 == 1}):
            low = {v for v in range(len(nodes)) if pri[v] <= d}
            for u in sorted(v for v in reach if pri[v] == d):
                # a cycle through u staying at priorities <= d
                back = _bfs_cycle(succ, u, low)
                if back is not None:
                    stem = _bfs_path(succ, init, {u})
                    return LassoWitness(_names(graph, stem), _names(graph, back))
        return None
    if isinstance(objective, Energy):
        return _energy_bad_lasso(graph, objective)
    raise ValidationError(f"unknown objective {objective!r}")


def _bfs_cycle(succ, u: int, allowed) -> Optional[List[int]]:
    """Shortest closed walk u -> ... -> u inside ``allowed``."""
    parent = {}
    queue = deque()
    for w in succ[u]:
        if w == u:
            return [u, u]
        if w in allowed and w not in parent:
            parent[w] = u
            queue.append(w)
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w == u:
                path = [v]
                while path[-1] != u:
                    path.append(parent[path[-1]])
                return path[::-1] + [u]
            if w in allowed and w not in parent:
                parent[w] = v
                queue.append(w)
    return None


def _energy_bad_lasso(graph: GameGraph, objective: Energy) -> Optional[LassoWitness]:
    """Bellman-Ford over node weights: lowest prefix sums from init."""
    succ = graph.succ
    nodes = graph.nodes
    init = graph.init_index
    w = [objective.weight[v] for v in nodes]
    reach = _reachable(succ, init)
    dist = {init: w[init]}
    parent: Dict[int, Optional[int]] = {init: None}
    changed_at = None
    for _ in range(len(reach) + 1):
        changed_at = None
        for u in reach:
            if u not in dist:
                continue
            for v in succ[u]:
                nd = dist[u] + w[v]
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    parent[v] = u
                    changed_at = v
        if changed_at is None:
            break
    if changed_at is not None:
        # walk back |V| parents to land on the negative cycle
        v = changed_at
        for _ in range(len(nodes)):
            v = parent[v]
        cyc = [v]
        x = parent[v]
        while x != v:
            cyc.append(x)
            x = parent[x]
        cyc.append(v)
        cyc.reverse()
        stem = _bfs_path(succ, init, {v})
        return LassoWitness(_names(graph, stem), _names(graph, cyc))
    low = min(dist, key=lambda v: (dist[v], v))
    if objective.credit + dist[low] < 0:
        path = [low]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        stem, cyc = _extend_to_lasso(succ, path[::-1])
        return LassoWitness(_names(graph, stem), _names(graph, cyc))
    return None


def check_lasso(graph: GameGraph, objective: Objective, witness: LassoWitness) -> bool:
    """True iff ``witness`` is a well-formed lasso whose play violates the objective."""
    stem, cycle = witness.stem, witness.cycle
    if not stem or stem[0] != graph.init or len(cycle) < 2:
        return False
    if stem[-1] != cycle[0] or cycle[0] != cycle[-1]:
        return False
    if len(set(cycle[:-1])) != len(cycle) - 1:
        return False
    walk = stem + cycle[1:]
    for a, b in zip(walk, walk[1:]):
        if b not in graph.edges.get(a, ()):
            return False
    if isinstance(objective, Reachability):
        return not any(v in objective.targets for v in walk)
    if isinstance(objective, Parity):
        return max(objective.priority[v] for v in cycle) % 2 == 1
    if isinstance(objective, Energy):
        level = objective.credit
        for v in walk:
            level += objective.weight[v]
            if level < 0:
                return True
        return sum(objective.weight[v] for v in cycle[1:]) < 0
    return False


def sure_win(graph: GameGraph, objective: Objective) -> SureResult:
    """Does Max win whatever the ownership tosses produce?"""
    witness = _bad_lasso(graph, objective)
    if witness is None:
        return SureResult(True)
    return SureResult(False, witness)


def almost_sure_rtg_reach(graph: GameGraph, targets) -> bool:
    """Almost-sure winning of the random-turn reachability game.

    Holds iff no node reachable from init has lost every path to a target.
    """
    if not isinstance(targets, (set, frozenset)):
        if isinstance(targets, Reachability):
            targets = targets.targets
        else:
            raise ValidationError("almost-sure random-turn analysis needs a reachability objective")
    succ, pred = graph.succ, graph.pred
    tgt = {graph.index[t] for t in targets}
    can_win = set(tgt)
    queue = deque(tgt)
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            if u not in can_win:
                can_win.add(u)
                queue.append(u)
    return all(v in can_win for v in _reachable(succ, graph.init_index))


@dataclass(frozen=True)
class Qualitative:
    sure: bool
    almost_sure: bool


def qualitative_one_two(graph: GameGraph, objective: Objective) -> Qualitative:
    """Sure and almost-sure winning coincide for toss-as-you-go and toss-at-start."""
    sure = sure_win(graph, objective).surely_wins
    return Qualitative(sure, sure)


def translate_rtg_to_stochastic(
    graph: GameGraph, toss: TossFunction, objective: Objective
) -> Tuple[StochasticArena, Objective]:
    """Three copies per non-target node: random ``v``, Max ``v+`` and Min ``v-``.

    Random copies keep the original priority and get weight 0; the owned
    copies carry the original weight.
    """
    targets = objective.targets if isinstance(objective, Reachability) else frozenset()
    max_nodes, min_nodes, random_nodes = set(), set(), set()
    edges: Dict[str, Tuple[str, ...]] = {}
    dist: Dict[str, Tuple[Tuple[str, Fraction], ...]] = {}
    for v in graph.nodes:
        if v in targets:
            max_nodes.add(v)
            edges[v] = graph.edges[v]
            continue
        plus, minus = f"{v}+", f"{v}-"
        random_nodes.add(v)
        max_nodes.add(plus)
        min_nodes.add(minus)
        edges[v] = (plus, minus)
        dist[v] = ((plus, toss[v]), (minus, 1 - toss[v]))
        edges[plus] = graph.edges[v]
        edges[minus] = graph.edges[v]
    arena = StochasticArena(
        frozenset(max_nodes), frozenset(min_nodes), frozenset(random_nodes), edges, dist, graph.init
    )
    if isinstance(objective, Reachability):
        lifted: Objective = objective
    elif isinstance(objective, Parity):
        pri = {}
        for v in graph.nodes:
            for c in (v, f"{v}+", f"{v}-"):
                pri[c] = objective.priority[v]
        lifted = Parity(pri)
    else:
        weight = {}
        for v in graph.nodes:
            weight[v] = 0
            weight[f"{v}+"] = objective.weight[v]
            weight[f"{v}-"] = objective.weight[v]
        lifted = Energy(weight, objective.credit)
    return arena, lifted
