"""Independent reference implementations used only by the tests.

None of these call the package's solvers; they re-derive answers from the
winning conditions by exhaustive enumeration.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from randctl.core import Energy, GameGraph, Parity, Reachability


# ---------------------------------------------------------------------------
# random small instances


def random_graph(rng: random.Random, n: int, max_out: int = 3, self_loops: bool = True) -> GameGraph:
    names = [f"n{i}" for i in range(n)]
    edges = {}
    for v in names:
        pool = list(range(n)) if self_loops else [j for j in range(n) if names[j] != v] or [names.index(v)]
        k = rng.randint(1, min(max_out, len(pool)))
        edges[v] = tuple(names[j] for j in sorted(rng.sample(pool, k)))
    return GameGraph(tuple(names), edges, names[0])


def random_reach_game(rng: random.Random, n: int, max_out: int = 3) -> Tuple[GameGraph, Reachability]:
    """Random graph whose last node is an absorbing target."""
    names = [f"n{i}" for i in range(n)]
    top = names[-1]
    edges = {}
    for v in names[:-1]:
        k = rng.randint(1, min(max_out, n))
        edges[v] = tuple(names[j] for j in sorted(rng.sample(range(n), k)))
    edges[top] = (top,)
    return GameGraph(tuple(names), edges, names[0]), Reachability({top})


def random_ownership(rng: random.Random, graph: GameGraph):
    from randctl.core import MAX, MIN

    return {v: rng.choice((MAX, MIN)) for v in graph.nodes}


# ---------------------------------------------------------------------------
# plays


def lasso_outcome(objective, walk: Sequence[str], loop_at: int) -> bool:
    """Max's win on the play ``walk[:loop_at] (walk[loop_at:])^omega``."""
    cycle = walk[loop_at:]
    if isinstance(objective, Reachability):
        return any(v in objective.targets for v in walk)
    if isinstance(objective, Parity):
        return max(objective.priority[v] for v in cycle) % 2 == 0
    level = objective.credit
    for v in walk:
        level += objective.weight[v]
        if level < 0:
            return False
    return sum(objective.weight[v] for v in cycle) >= 0


def play(graph: GameGraph, choice: Dict[str, str], start: str) -> Tuple[List[str], int]:
    walk = [start]
    seen = {start: 0}
    while True:
        nxt = choice[walk[-1]] if walk[-1] in choice else graph.edges[walk[-1]][0]
        if nxt in seen:
            return walk, seen[nxt]
        seen[nxt] = len(walk)
        walk.append(nxt)


def profile_winner(graph, owner, objective, start) -> bool:
    """Max wins from ``start`` iff some Max profile beats every Min profile (positional)."""
    from randctl.core import MAX

    maxn = [v for v in graph.nodes if owner[v] == MAX]
    minn = [v for v in graph.nodes if owner[v] != MAX]
    for mp in itertools.product(*(graph.edges[v] for v in maxn)):
        choice = dict(zip(maxn, mp))
        ok = True
        for np_ in itertools.product(*(graph.edges[v] for v in minn)):
            choice.update(zip(minn, np_))
            walk, loop = play(graph, choice, start)
            if not lasso_outcome(objective, walk, loop):
                ok = False
                break
        if ok:
            return True
    return False


# ---------------------------------------------------------------------------
# toss-at-start by enumeration over every node


def value_two_all_nodes(graph: GameGraph, toss, objective) -> Fraction:
    """Toss every node, including single-successor ones, and decide each arena by profiles."""
    from randctl.core import MAX, MIN

    total = Fraction(0)
    for bits in itertools.product((MAX, MIN), repeat=len(graph.nodes)):
        owner = dict(zip(graph.nodes, bits))
        prob = Fraction(1)
        for v in graph.nodes:
            prob *= toss[v] if owner[v] == MAX else 1 - toss[v]
        if profile_winner(graph, owner, objective, graph.init):
            total += prob
    return total


# ---------------------------------------------------------------------------
# toss-as-you-go by ownership recursion with positional max-min per ownership


def value_one_oracle(graph: GameGraph, toss, objective) -> Fraction:
    """Every node (relevant or not) is tossed on first arrival.

    For a fixed partial ownership the game is deterministic until the token
    enters an unowned node, so each ownership is solved by max-min over
    positional profiles of the owned nodes, with recursively computed values
    at the exits.
    """
    if isinstance(objective, Energy):
        raise NotImplementedError
    nodes = graph.nodes

    @lru_cache(maxsize=None)
    def enter(owned: Tuple[Tuple[str, bool], ...], v: str) -> Fraction:
        own = dict(owned)
        if v in own:
            return layer(owned, v)
        t = toss[v]
        as_max = tuple(sorted(owned + ((v, True),)))
        as_min = tuple(sorted(owned + ((v, False),)))
        return t * layer(as_max, v) + (1 - t) * layer(as_min, v)

    @lru_cache(maxsize=None)
    def layer(owned: Tuple[Tuple[str, bool], ...], start: str) -> Fraction:
        own = dict(owned)
        maxn = [v for v in nodes if own.get(v) is True]
        minn = [v for v in nodes if own.get(v) is False]
        best = Fraction(-1)
        for mp in itertools.product(*(graph.edges[v] for v in maxn)):
            worst = Fraction(2)
            for np_ in itertools.product(*(graph.edges[v] for v in minn)):
                choice = dict(zip(maxn, mp))
                choice.update(zip(minn, np_))
                worst = min(worst, outcome(owned, own, choice, start))
                if worst <= best:
                    break
            best = max(best, worst)
        return best

    def outcome(owned, own, choice, start) -> Fraction:
        walk = [start]
        seen = {start: 0}
        while True:
            v = walk[-1]
            if isinstance(objective, Reachability) and v in objective.targets:
                return Fraction(1)
            nxt = choice[v]
            if nxt not in own:
                if isinstance(objective, Reachability) and nxt in objective.targets:
                    return Fraction(1)
                return enter(owned, nxt)
            if nxt in seen:
                cyc = walk[seen[nxt]:]
                if isinstance(objective, Reachability):
                    return Fraction(0)
                return Fraction(int(max(objective.priority[u] for u in cyc) % 2 == 0))
            seen[nxt] = len(walk)
            walk.append(nxt)

    init = graph.init
    if isinstance(objective, Reachability) and init in objective.targets:
        return Fraction(1)
    return enter((), init)


# ---------------------------------------------------------------------------
# sure winning via simple lassos


def simple_lassos(graph: GameGraph):
    """All (walk, loop index) with a simple path from init closed by a back edge."""

    def extend(path, pos):
        v = path[-1]
        for w in graph.edges[v]:
            if w in pos:
                yield list(path), pos[w]
            else:
                pos[w] = len(path)
                path.append(w)
                yield from extend(path, pos)
                path.pop()
                del pos[w]

    yield from extend([graph.init], {graph.init: 0})


def sure_win_oracle(graph: GameGraph, objective) -> bool:
    return all(lasso_outcome(objective, walk, loop) for walk, loop in simple_lassos(graph))


# ---------------------------------------------------------------------------
# arithmetic


def pair_recurrence(n: int) -> Tuple[Fraction, Fraction]:
    """Same recurrences as the reduction, unrolled into closed-form partial sums."""
    step = Fraction(1, 2) + Fraction(1, 4) + Fraction(1, 64)
    p_next = step * sum(Fraction(1, 64) ** i for i in range(n))
    q_next = Fraction(1, 2 ** (6 * n))
    return p_next + q_next / 2, q_next / 4


def ln_ceiling(numer: int, denom: int, eps: Fraction) -> int:
    """ceil(ln(numer/denom) / (2 eps^2)) with the decimal module at 60 digits."""
    import decimal

    ctx = decimal.Context(prec=60)
    x = ctx.divide(decimal.Decimal(numer), decimal.Decimal(denom)).ln(ctx)
    y = ctx.divide(x * eps.denominator ** 2, decimal.Decimal(2 * eps.numerator ** 2))
    return int(y.to_integral_value(rounding=decimal.ROUND_CEILING))
