"""Fixture games and seeded random instances."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from .core import Energy, GameGraph, Objective, Parity, Reachability, as_fraction, uniform_toss

TOP = "top"


def fig1a() -> Tuple[GameGraph, Dict[str, Fraction], Reachability]:
    """v0 <-> v1, v0 <-> v2, v1 -> top, v2 -> top, top self-loop; fair tosses."""
    graph = GameGraph(
        ("v0", "v1", "v2", TOP),
        {"v0": ("v1", "v2"), "v1": ("v0", TOP), "v2": ("v0", TOP), TOP: (TOP,)},
        "v0",
    )
    return graph, uniform_toss(graph), Reachability({TOP})


def chain_game(n: int) -> Tuple[GameGraph, Dict[str, Fraction], Reachability]:
    """n blocks ``i -> {ia, ib}``, each of ``ia``/``ib`` looping or moving on; then ``top``.

    Max wins each block with probability 1/2 under fair tosses.
    """
    if n < 1:
        raise ValueError("chain needs at least one block")
    nodes: List[str] = []
    edges: Dict[str, Tuple[str, ...]] = {}
    for i in range(1, n + 1):
        nxt = str(i + 1) if i < n else TOP
        a, b = f"{i}a", f"{i}b"
        nodes += [str(i), a, b]
        edges[str(i)] = (a, b)
        edges[a] = (nxt, a)
        edges[b] = (nxt, b)
    nodes.append(TOP)
    edges[TOP] = (TOP,)
    graph = GameGraph(tuple(nodes), edges, "1")
    return graph, uniform_toss(graph), Reachability({TOP})


KINDS = ("reachability", "parity", "energy")


@dataclass(frozen=True)
class GeneratorParams:
    nodes: int = 12
    max_outdegree: int = 12
    kind: str = "reachability"
    priorities: int = 6
    weight_bound: int = 10
    credit: int = 0
    toss: Fraction = Fraction(1, 2)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "toss", as_fraction(self.toss))

    def validate(self) -> None:
        if self.nodes < 1:
            raise ValueError("node count must be at least 1")
        if self.max_outdegree < 1:
            raise ValueError("max outdegree must be at least 1")
        if self.weight_bound < 0:
            raise ValueError("weight bound must be nonnegative")
        if self.priorities < 1:
            raise ValueError("priority bound must be at least 1")
        if self.credit < 0:
            raise ValueError("credit must be nonnegative")
        if self.kind not in KINDS:
            raise ValueError(f"objective kind must be one of {', '.join(KINDS)}")
        if not 0 < self.toss < 1:
            raise ValueError("toss must lie strictly between 0 and 1")


def generate_random_game(params: GeneratorParams) -> Tuple[GameGraph, Dict[str, Fraction], Objective]:
    """Seeded random game: nodes ``v0..v{n-1}``, init ``v0``.

    Each node gets a uniform outdegree in [1, min(max_outdegree, n)] and that
    many distinct successors (self-loops allowed). For reachability the last
    node is an absorbing target.
    """
    params.validate()
    rng = random.Random(params.seed)
    n = params.nodes
    names = [f"v{i}" for i in range(n)]
    edges: Dict[str, Tuple[str, ...]] = {}
    reach = params.kind == "reachability"
    for i, v in enumerate(names):
        if reach and i == n - 1:
            edges[v] = (v,)
            continue
        k = rng.randint(1, min(params.max_outdegree, n))
        picked = sorted(rng.sample(range(n), k))
        edges[v] = tuple(names[j] for j in picked)
    graph = GameGraph(tuple(names), edges, names[0])
    if reach:
        objective: Objective = Reachability({names[-1]})
    elif params.kind == "parity":
        objective = Parity({v: rng.randrange(params.priorities) for v in names})
    else:
        w = params.weight_bound
        objective = Energy({v: rng.randint(-w, w) for v in names}, params.credit)
    return graph, uniform_toss(graph, params.toss), objective
