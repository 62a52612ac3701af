"""Toss-at-start games: every owner is tossed before play begins.

The exact value is a weighted count over ownership assignments; the
Monte-Carlo estimator samples assignments and uses Hoeffding's bound for
the number of samples.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

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
    relevant_indices,
    validate,
    validate_toss,
)
from .rng import sample_rng
from .solvers import GuardExceeded, energy_region, parity_region, reach_region

DEFAULT_GUARD = 24


class WinnerOracle:
    """Decides whether Max wins from init for a given Max/Min owner vector.

    Results are memoised by ownership bit pattern over the relevant nodes
    (bit j set = j-th relevant node owned by Min).
    """

    def __init__(self, graph: GameGraph, objective: Objective, memo: bool = True):
        validate(graph, objective)
        self.graph = graph
        self.objective = objective
        self.relevant = relevant_indices(graph)
        self.succ = graph.succ
        self.pred = graph.pred
        self.init = graph.init_index
        self.memo: Optional[Dict[int, bool]] = {} if memo else None
        nodes = graph.nodes
        if isinstance(objective, Reachability):
            self._targets = {graph.index[t] for t in objective.targets}
        elif isinstance(objective, Parity):
            self._pri = [objective.priority[v] for v in nodes]
        else:
            self._weight = [objective.weight[v] for v in nodes]

    def wins(self, bits: int) -> bool:
        if self.memo is not None:
            r = self.memo.get(bits)
            if r is not None:
                return r
        is_max = [True] * len(self.succ)
        for j, i in enumerate(self.relevant):
            if bits >> j & 1:
                is_max[i] = False
        obj = self.objective
        if isinstance(obj, Reachability):
            r = self.init in reach_region(self.succ, self.pred, is_max, self._targets)
        elif isinstance(obj, Parity):
            r = self.init in parity_region(self.succ, self.pred, is_max, self._pri)
        else:
            r = self.init in energy_region(self.succ, self.pred, is_max, self._weight, obj.credit)
        if self.memo is not None:
            self.memo[bits] = r
        return r

    def ownership(self, bits: int) -> Dict[str, Player]:
        own = {v: MAX for v in self.graph.nodes}
        for j, i in enumerate(self.relevant):
            if bits >> j & 1:
                own[self.graph.nodes[i]] = MIN
        return own


def _bits_probability(relevant_toss: Sequence[Fraction], bits: int) -> Fraction:
    p = Fraction(1)
    for j, t in enumerate(relevant_toss):
        p *= (1 - t) if bits >> j & 1 else t
    return p


def _count_chunk(args) -> Tuple[Fraction, int]:
    graph, toss, objective, lo, hi = args
    oracle = WinnerOracle(graph, objective, memo=False)
    rt = [as_fraction(toss[graph.nodes[i]]) for i in oracle.relevant]
    total = Fraction(0)
    wins = 0
    for bits in range(lo, hi):
        if oracle.wins(bits):
            wins += 1
            total += _bits_probability(rt, bits)
    return total, wins


def exact_value_two(
    graph: GameGraph,
    toss: TossFunction,
    objective: Objective,
    *,
    guard: int = DEFAULT_GUARD,
    workers: int = 1,
    oracle: Optional[WinnerOracle] = None,
) -> Fraction:
    """Sum of assignment probabilities over the assignments Max wins."""
    validate(graph, objective)
    validate_toss(graph, toss)
    k = len(relevant_indices(graph))
    if k > guard:
        raise GuardExceeded(f"{k} relevant nodes exceed the enumeration guard {guard}")
    n = 2 ** k
    if workers > 1 and n >= 1024:
        step = -(-n // (workers * 4))
        chunks = [(graph, toss, objective, lo, min(n, lo + step)) for lo in range(0, n, step)]
        with ProcessPoolExecutor(workers) as pool:
            return sum((t for t, _ in pool.map(_count_chunk, chunks)), Fraction(0))
    if oracle is None:
        oracle = WinnerOracle(graph, objective, memo=False)
    rt = [as_fraction(toss[graph.nodes[i]]) for i in oracle.relevant]
    uniform = all(t == Fraction(1, 2) for t in rt)
    wins = 0
    total = Fraction(0)
    for bits in range(n):
        if oracle.wins(bits):
            wins += 1
            if not uniform:
                total += _bits_probability(rt, bits)
    if uniform:
        return Fraction(wins, n)
    return total


def winning_assignment_count(graph: GameGraph, objective: Objective) -> Tuple[int, int]:
    """(winning assignments, all assignments) over the relevant nodes."""
    oracle = WinnerOracle(graph, objective, memo=False)
    n = 2 ** len(oracle.relevant)
    return sum(oracle.wins(b) for b in range(n)), n


# ---------------------------------------------------------------------------
# Hoeffding sample count


def sample_count(epsilon, delta) -> int:
    """Least n with n >= ln(2/delta) / (2 epsilon^2), rounded with certified intervals."""
    eps = as_fraction(epsilon)
    dlt = as_fraction(delta)
    if not (0 < eps < 1 and 0 < dlt < 1):
        raise ValueError("epsilon and delta must lie strictly between 0 and 1")
    ratio = 2 / dlt
    iv = mpmath.iv
    saved = iv.prec
    prec = 64
    try:
        while True:
            iv.prec = prec
            q = iv.mpf(ratio.numerator) / iv.mpf(ratio.denominator)
            x = iv.log(q) * iv.mpf(eps.denominator ** 2) / iv.mpf(2 * eps.numerator ** 2)
            lo, hi = int(mpmath.ceil(x.a)), int(mpmath.ceil(x.b))
            # ln of a rational other than 1 is irrational, so this terminates
            if lo == hi and x.a != x.b:
                return max(1, lo)
            prec *= 2
            if prec > 1 << 16:  # pragma: no cover
                raise ArithmeticError("could not certify the Hoeffding sample count")
    finally:
        iv.prec = saved


def hoeffding_epsilon(n: int, delta) -> float:
    """Additive error guaranteed with confidence 1 - delta after n samples."""
    return math.sqrt(math.log(2 / float(as_fraction(delta))) / (2 * n))


# ---------------------------------------------------------------------------
# sampling

_TWO64 = 1 << 64


def sample_bits(relevant_toss: Sequence[Fraction], rng) -> int:
    """One 64-bit draw u per relevant node; Max iff u / 2**64 < t, compared exactly."""
    bits = 0
    for j, t in enumerate(relevant_toss):
        u = rng.next64()
        if u * t.denominator >= t.numerator * _TWO64:
            bits |= 1 << j
    return bits


def sample_assignment(graph: GameGraph, toss: TossFunction, rng) -> Dict[str, Player]:
    """Independent Bernoulli ownership for each relevant node (others go to Max)."""
    rel = relevant_indices(graph)
    bits = sample_bits([as_fraction(toss[graph.nodes[i]]) for i in rel], rng)
    own = {v: MAX for v in graph.nodes}
    for j, i in enumerate(rel):
        if bits >> j & 1:
            own[graph.nodes[i]] = MIN
    return own


@dataclass(frozen=True)
class EstimateReport:
    estimate: Fraction
    samples: int
    epsilon: Fraction
    delta: Fraction
    seed: int
    trace: Tuple[Tuple[int, Fraction], ...] = field(default_factory=tuple)
    wins: int = 0


def _sample_chunk(args) -> List[bool]:
    graph, toss, objective, seed, lo, hi = args
    oracle = WinnerOracle(graph, objective)
    rt = [as_fraction(toss[graph.nodes[i]]) for i in oracle.relevant]
    return [oracle.wins(sample_bits(rt, sample_rng(seed, i))) for i in range(lo, hi)]


def sample_outcomes(
    graph: GameGraph,
    toss: TossFunction,
    objective: Objective,
    seed: int,
    start: int,
    stop: int,
    *,
    workers: int = 1,
    oracle: Optional[WinnerOracle] = None,
) -> List[bool]:
    """Win/lose outcome of samples ``start..stop-1`` (1-based sample i uses index i-1)."""
    if workers > 1 and stop - start >= 256:
        step = -(-(stop - start) // (workers * 4))
        chunks = [
            (graph, toss, objective, seed, lo, min(stop, lo + step)) for lo in range(start, stop, step)
        ]
        with ProcessPoolExecutor(workers) as pool:
            out: List[bool] = []
            for part in pool.map(_sample_chunk, chunks):
                out.extend(part)
            return out
    if oracle is None:
        oracle = WinnerOracle(graph, objective)
    rt = [as_fraction(toss[graph.nodes[i]]) for i in oracle.relevant]
    return [oracle.wins(sample_bits(rt, sample_rng(seed, i))) for i in range(start, stop)]


def estimate_value_two(
    graph: GameGraph,
    toss: TossFunction,
    objective: Objective,
    epsilon,
    delta,
    seed: int,
    trace_stride: Optional[int] = None,
    *,
    workers: int = 1,
    oracle: Optional[WinnerOracle] = None,
) -> EstimateReport:
    """Additive (epsilon, delta) estimate of the toss-at-start value."""
    validate(graph, objective)
    validate_toss(graph, toss)
    eps, dlt = as_fraction(epsilon), as_fraction(delta)
    n = sample_count(eps, dlt)
    stride = trace_stride or n
    if stride < 1:
        raise ValueError("trace stride must be positive")
    outcomes = sample_outcomes(graph, toss, objective, seed, 0, n, workers=workers, oracle=oracle)
    trace = []
    wins = 0
    for i, won in enumerate(outcomes, 1):
        wins += won
        if i % stride == 0 or i == n:
            trace.append((i, Fraction(wins, i)))
    return EstimateReport(Fraction(wins, n), n, eps, dlt, seed, tuple(trace), wins)
