"""Convergence of the sampled toss-at-start estimate towards the exact value.

For each game the exact value E is computed by enumeration, then a running
estimate O is traced over a fixed number of samples. Per-game tables carry
``|O/E - 1|`` (or ``|O - E|`` when E is 0) and an aggregate table averages
the error over games next to the Hoeffding reference ``sqrt(ln(2/delta)/(2n))``.
"""
from __future__ import annotations

import csv
import os
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core import GameGraph, Objective, as_fraction
from .generators import GeneratorParams, generate_random_game
from .rng import sample_seed
from .toss_at_start import (
    WinnerOracle,
    exact_value_two,
    hoeffding_epsilon,
    sample_count,
    sample_outcomes,
)

PER_GAME_HEADER = ["samples", "estimate", "ratio_error"]
AGGREGATE_HEADER = ["samples", "mean_error", "variance", "hoeffding_eps"]

_KIND_SALT = {"reachability": 1, "parity": 2, "energy": 3}


@dataclass(frozen=True)
class ExperimentGame:
    name: str
    graph: GameGraph
    toss: Dict[str, Fraction]
    objective: Objective


@dataclass
class GameTrace:
    name: str
    exact: Fraction
    rows: List[Tuple[int, Fraction, float]]  # (samples, running estimate, error)
    seed: int

    @property
    def absolute(self) -> bool:
        """True when E = 0 and the error column is the absolute error."""
        return self.exact == 0


@dataclass
class ExperimentResult:
    seed: int
    delta: Fraction
    traces: List[GameTrace]
    aggregate: List[Tuple[int, float, float, float]] = field(default_factory=list)

    def mean_error_at(self, n: int) -> float:
        for row in self.aggregate:
            if row[0] == n:
                return row[1]
        raise KeyError(n)


def profile_games(kind: str, count: int, nodes: int, seed: int, *, max_outdegree=None,
                  priorities: int = 6, weight_bound: int = 10, credit: int = 0) -> List[ExperimentGame]:
    """``count`` seeded random games of one objective kind; per-game seeds derive from ``seed``."""
    games = []
    for g in range(count):
        gseed = sample_seed(seed, _KIND_SALT[kind] << 32 | g)
        params = GeneratorParams(
            nodes=nodes,
            max_outdegree=max_outdegree or nodes,
            kind=kind,
            priorities=priorities,
            weight_bound=weight_bound,
            credit=credit,
            seed=gseed,
        )
        graph, toss, objective = generate_random_game(params)
        games.append(ExperimentGame(f"{kind}-{g:02d}", graph, toss, objective))
    return games


def _error(estimate: Fraction, exact: Fraction) -> float:
    if exact == 0:
        return float(abs(estimate))
    return float(abs(estimate / exact - 1))


def run_convergence_experiment(
    games: Sequence[ExperimentGame],
    epsilon,
    delta,
    total: Optional[int],
    stride: int,
    seed: int,
    *,
    workers: int = 1,
) -> ExperimentResult:
    """Trace estimates every ``stride`` samples up to ``total`` (default: the Hoeffding count)."""
    dlt = as_fraction(delta)
    if total is None:
        total = sample_count(epsilon, dlt)
    if total < 1 or stride < 1:
        raise ValueError("sample total and stride must be positive")
    traces = []
    for g, game in enumerate(games):
        oracle = WinnerOracle(game.graph, game.objective)
        exact = exact_value_two(game.graph, game.toss, game.objective, oracle=oracle)
        gseed = sample_seed(seed, g)
        outcomes = sample_outcomes(
            game.graph, game.toss, game.objective, gseed, 0, total,
            workers=workers, oracle=oracle,
        )
        rows = []
        wins = 0
        for i, won in enumerate(outcomes, 1):
            wins += won
            if i % stride == 0 or i == total:
                est = Fraction(wins, i)
                rows.append((i, est, _error(est, exact)))
        traces.append(GameTrace(game.name, exact, rows, gseed))
    result = ExperimentResult(seed, dlt, traces)
    if traces:
        for k, (n, _, _) in enumerate(traces[0].rows):
            errs = [t.rows[k][2] for t in traces]
            result.aggregate.append(
                (n, statistics.fmean(errs), statistics.pvariance(errs), hoeffding_epsilon(n, dlt))
            )
    return result


def _fmt_float(x: float) -> str:
    return f"{x:.10g}"


def write_csvs(result: ExperimentResult, outdir: str, prefix: str = "") -> List[str]:
    """One CSV per game plus ``<prefix>aggregate.csv``; returns the paths written."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for trace in result.traces:
        path = os.path.join(outdir, f"{prefix}{trace.name}.csv")
        header = PER_GAME_HEADER + (["abs_error_flag"] if trace.absolute else [])
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# seed={result.seed} game_seed={trace.seed} exact={trace.exact}\n")
            w = csv.writer(fh)
            w.writerow(header)
            for n, est, err in trace.rows:
                row = [n, f"{est.numerator}/{est.denominator}", _fmt_float(err)]
                if trace.absolute:
                    row.append(1)
                w.writerow(row)
        paths.append(path)
    path = os.path.join(outdir, f"{prefix}aggregate.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# seed={result.seed} games={len(result.traces)} delta={result.delta}\n")
        w = csv.writer(fh)
        w.writerow(AGGREGATE_HEADER)
        for n, mean, var, eps in result.aggregate:
            w.writerow([n, _fmt_float(mean), _fmt_float(var), _fmt_float(eps)])
    paths.append(path)
    return paths


def read_csv(path: str) -> Tuple[List[str], List[List[str]]]:
    """Header and rows of a CSV written by :func:`write_csvs` (comment lines skipped)."""
    with open(path, encoding="utf-8") as fh:
        lines = [l for l in fh if not l.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]
