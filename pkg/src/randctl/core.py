"""Game graphs, objectives, toss functions and ownership assignments.

Probabilities are kept as :class:`fractions.Fraction` throughout, so every
value computed by the package is exact.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

Rational = Fraction


class ValidationError(ValueError):
    """An input violates a model constraint.

    ``node`` names the offending node when there is one.
    """

    def __init__(self, message: str, node: Optional[str] = None):
        super().__init__(message)
        self.node = node


class Player(enum.IntEnum):
    # values double as the base-3 digits of the ownership encoding
    MAX = 1
    MIN = 2

    @property
    def opponent(self) -> "Player":
        return Player.MIN if self is Player.MAX else Player.MAX


MAX = Player.MAX
MIN = Player.MIN


@dataclass(frozen=True, eq=True)
class GameGraph:
    """Directed graph with ordered successor lists and an initial node.

    Successor order is the canonical tie-breaking order used by every solver.
    """

    nodes: Tuple[str, ...]
    edges: Mapping[str, Tuple[str, ...]]
    init: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "edges", {u: tuple(vs) for u, vs in dict(self.edges).items()}
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_edges(cls, nodes: Sequence[str], edges: Sequence[Tuple[str, str]], init: str) -> "GameGraph":
        adj: Dict[str, List[str]] = {u: [] for u in nodes}
        for u, v in edges:
            succ = adj.setdefault(u, [])
            if v not in succ:
                succ.append(v)
        return cls(tuple(nodes), adj, init)

    def successors(self, node: str) -> Tuple[str, ...]:
        return self.edges.get(node, ())

    def __len__(self) -> int:
        return len(self.nodes)

    # index-based views; only meaningful once validate() has passed

    @cached_property
    def index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def succ(self) -> Tuple[Tuple[int, ...], ...]:
        idx = self.index
        return tuple(tuple(idx[w] for w in self.edges.get(v, ())) for v in self.nodes)

    @cached_property
    def pred(self) -> Tuple[Tuple[int, ...], ...]:
        pred: List[List[int]] = [[] for _ in self.nodes]
        for u, vs in enumerate(self.succ):
            for v in vs:
                pred[v].append(u)
        return tuple(tuple(p) for p in pred)

    @property
    def init_index(self) -> int:
        return self.index[self.init]


@dataclass(frozen=True)
class Reachability:
    targets: frozenset

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))


@dataclass(frozen=True)
class Parity:
    priority: Mapping[str, int]

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Energy:
    weight: Mapping[str, int]
    credit: int = 0

    __hash__ = None  # type: ignore[assignment]


Objective = Union[Reachability, Parity, Energy]

TossFunction = Mapping[str, Fraction]
Ownership = Mapping[str, Player]


@dataclass(frozen=True)
class Arena:
    """A game graph together with a total ownership partition."""

    graph: GameGraph
    owner: Mapping[str, Player]

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self):
        missing = [v for v in self.graph.nodes if v not in self.owner]
        if missing:
            raise ValidationError(f"ownership is not total: {missing[0]} unowned", missing[0])

    @cached_property
    def is_max(self) -> Tuple[bool, ...]:
        return tuple(self.owner[v] is MAX for v in self.graph.nodes)

    @property
    def max_nodes(self) -> frozenset:
        return frozenset(v for v in self.graph.nodes if self.owner[v] is MAX)

    @property
    def min_nodes(self) -> frozenset:
        return frozenset(v for v in self.graph.nodes if self.owner[v] is MIN)


@dataclass(frozen=True)
class StochasticArena:
    max_nodes: frozenset
    min_nodes: frozenset
    random_nodes: frozenset
    edges: Mapping[str, Tuple[str, ...]]
    dist: Mapping[str, Tuple[Tuple[str, Fraction], ...]]
    init: str

    __hash__ = None  # type: ignore[assignment]

    @property
    def nodes(self) -> frozenset:
        return self.max_nodes | self.min_nodes | self.random_nodes


def check_stochastic_arena(arena: StochasticArena) -> None:
    """Raise :class:`ValidationError` unless the arena's invariants hold."""
    sets = (arena.max_nodes, arena.min_nodes, arena.random_nodes)
    for a, b in itertools.combinations(sets, 2):
        if a & b:
            v = sorted(a & b)[0]
            raise ValidationError(f"node {v} is in two player sets", v)
    nodes = arena.nodes
    if arena.init not in nodes:
        raise ValidationError("init is not a node", arena.init)
    for v in nodes:
        succ = arena.edges.get(v, ())
        if not succ:
            raise ValidationError(f"dead end at {v}", v)
        for w in succ:
            if w not in nodes:
                raise ValidationError(f"edge {v}->{w} leaves the arena", v)
    for v in arena.random_nodes:
        dist = arena.dist.get(v)
        if not dist:
            raise ValidationError(f"random node {v} has no distribution", v)
        if any(p <= 0 for _, p in dist):
            raise ValidationError(f"non-positive probability at {v}", v)
        if sum(p for _, p in dist) != 1:
            raise ValidationError(f"distribution at {v} does not sum to 1", v)
        if {w for w, _ in dist} != set(arena.edges[v]):
            raise ValidationError(f"distribution support at {v} differs from its edges", v)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # floats go through their shortest repr so 0.05 means 1/20
        return Fraction(repr(x))
    return Fraction(x)


def validate_graph(graph: GameGraph) -> None:
    seen = set()
    for v in graph.nodes:
        if v in seen:
            raise ValidationError(f"duplicate node {v}", v)
        seen.add(v)
    if not graph.nodes:
        raise ValidationError("graph has no nodes")
    if graph.init not in seen:
        raise ValidationError(f"init {graph.init} is not a node", graph.init)
    for u in graph.edges:
        if u not in seen:
            raise ValidationError(f"edge source {u} is not a node", u)
    for v in graph.nodes:
        succ = graph.edges.get(v, ())
        if not succ:
            raise ValidationError(f"dead end: {v} has no successor", v)
        if len(set(succ)) != len(succ):
            raise ValidationError(f"duplicate successor at {v}", v)
        for w in succ:
            if w not in seen:
                raise ValidationError(f"dangling edge {v}->{w}", v)


def validate(graph: GameGraph, objective: Objective) -> None:
    """Check every graph and objective invariant.

    Raises :class:`ValidationError` naming the first violation found.
    """
    validate_graph(graph)
    if isinstance(objective, Reachability):
        if not objective.targets:
            raise ValidationError("reachability objective has no target")
        for t in sorted(objective.targets, key=str):
            if t not in graph.index:
                raise ValidationError(f"target {t} is not a node", t)
        for v in graph.nodes:
            if v in objective.targets:
                for w in graph.edges[v]:
                    if w not in objective.targets:
                        raise ValidationError(f"target {v} has non-target successor {w}", v)
    elif isinstance(objective, Parity):
        for v in graph.nodes:
            pri = objective.priority.get(v)
            if pri is None:
                raise ValidationError(f"missing priority for {v}", v)
            if int(pri) != pri or pri < 0:
                raise ValidationError(f"priority of {v} is not a nonnegative integer", v)
    elif isinstance(objective, Energy):
        if objective.credit < 0:
            raise ValidationError("initial credit is negative")
        for v in graph.nodes:
            if v not in objective.weight:
                raise ValidationError(f"missing weight for {v}", v)
    else:
        raise ValidationError(f"unknown objective {objective!r}")


def validate_toss(graph: GameGraph, toss: TossFunction) -> None:
    for v in graph.nodes:
        if v not in toss:
            raise ValidationError(f"missing toss probability for {v}", v)
        p = toss[v]
        if not 0 < p < 1:
            raise ValidationError(f"toss probability of {v} must lie strictly between 0 and 1, got {p}", v)


def uniform_toss(graph: GameGraph, p=Fraction(1, 2)) -> Dict[str, Fraction]:
    p = as_fraction(p)
    return {v: p for v in graph.nodes}


def normalize_targets(graph: GameGraph, objective: Reachability) -> GameGraph:
    """Replace the out-edges of every target by a self-loop."""
    edges = {
        v: ((v,) if v in objective.targets else graph.edges[v]) for v in graph.nodes
    }
    return GameGraph(graph.nodes, edges, graph.init)


def relevant_nodes(graph: GameGraph) -> frozenset:
    """Nodes whose owner actually has a choice (two or more successors)."""
    return frozenset(v for v in graph.nodes if len(set(graph.edges[v])) >= 2)


def relevant_indices(graph: GameGraph) -> Tuple[int, ...]:
    rel = relevant_nodes(graph)
    return tuple(i for i, v in enumerate(graph.nodes) if v in rel)


def assignment_probability(graph: GameGraph, toss: TossFunction, ownership: Ownership) -> Fraction:
    """Probability that the tosses on the relevant nodes produce ``ownership``."""
    prob = Fraction(1)
    for v in graph.nodes:
        if len(set(graph.edges[v])) < 2:
            continue
        owner = ownership.get(v)
        if owner is None:
            raise ValidationError(f"ownership is not total on relevant node {v}", v)
        prob *= toss[v] if owner is MAX else 1 - toss[v]
    return prob


def complete_ownership(graph: GameGraph, partial: Ownership) -> Dict[str, Player]:
    """Extend ``partial`` to all nodes, giving unlisted nodes to Max."""
    return {v: partial.get(v, MAX) for v in graph.nodes}


def enumerate_assignments(graph: GameGraph) -> Iterator[Tuple[Dict[str, Player], int]]:
    """Yield every total ownership of the relevant nodes with its canonical index.

    Non-relevant nodes are owned by Max. Indices ascend.
    """
    rel = relevant_indices(graph)
    items = [(i, 3 ** i) for i in rel]
    # Max=1 < Min=2 per digit, so counting in binary with bit j for the
    # j-th relevant node (most significant = highest node index) ascends.
    k = len(rel)
    base = {v: MAX for v in graph.nodes}
    for bits in range(2 ** k):
        own = dict(base)
        code = 0
        for j, (i, w) in enumerate(items):
            if bits >> j & 1:
                own[graph.nodes[i]] = MIN
                code += 2 * w
            else:
                code += w
        for i, v in enumerate(graph.nodes):
            if i not in rel:
                code += 3 ** i
        yield own, code


def encode_ownership(graph: GameGraph, ownership: Ownership) -> int:
    """Base-3 code: node ``i`` contributes digit 0/1/2 (unassigned/Max/Min) at 3**i."""
    code = 0
    for i, v in enumerate(graph.nodes):
        p = ownership.get(v)
        if p is not None:
            code += int(p) * 3 ** i
    for v in ownership:
        if v not in graph.index:
            raise ValidationError(f"ownership mentions unknown node {v}", v)
    return code


def decode_ownership(graph: GameGraph, code: int) -> Dict[str, Player]:
    if code < 0 or code >= 3 ** len(graph.nodes):
        raise ValidationError(f"ownership code {code} out of range")
    own = {}
    for v in graph.nodes:
        code, digit = divmod(code, 3)
        if digit:
            own[v] = Player(digit)
    return own
