"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from importlib import resources

import pytest

from randctl.core import MAX, Arena, Energy, Parity, Reachability, decode_ownership, enumerate_assignments, relevant_nodes
from randctl.experiment import profile_games, run_convergence_experiment
from randctl.gamefile import parse_reliability
from randctl.generators import chain_game, fig1a
from randctl.qualitative import almost_sure_rtg_reach, sure_win
from randctl.reductions import (
    Pcnf,
    ReliabilityInstance,
    pair_probabilities,
    qbf_oracle,
    qbf_threshold,
    qbf_to_game,
    reach_to_energy,
    reach_to_parity,
    reliability_oracle,
    reliability_to_game,
)
from randctl.solvers import brute_force_solve, solve, solve_energy, solve_parity
from randctl.toss_as_you_go import explicit_solution, value_one
from randctl.toss_at_start import (
    estimate_value_two,
    exact_value_two,
    sample_count,
    winning_assignment_count,
)

from oracles import pair_recurrence, random_graph, random_ownership, random_reach_game, value_two_all_nodes


@pytest.fixture
def gate(capsys):
    @contextmanager
    def run(number, label, budget):
        start = time.perf_counter()
        status = "FAIL"
        detail = ""
        try:
            yield
            elapsed = time.perf_counter() - start
            status = "PASS" if elapsed <= budget else "FAIL"
            if elapsed > budget:
                detail = f" (over the {budget:g}s budget)"
        except AssertionError as err:
            detail = f" ({err})".split("\n")[0]
            raise
        finally:
            elapsed = time.perf_counter() - start
            with capsys.disabled():
                print(f"\n{status} criterion {number}: {label} [{elapsed:.2f}s]{detail}")
        assert elapsed <= budget, f"criterion {number} took {elapsed:.1f}s, budget {budget}s"

    return run


def test_criterion_01_example_triple(gate):
    with gate(1, "four-node example: values 1/2 and 5/8, rtg almost-sure, not sure", 1.0):
        g, t, obj = fig1a()
        assert exact_value_two(g, t, obj) == Fraction(1, 2)
        assert value_one(g, t, obj) == Fraction(5, 8)
        assert almost_sure_rtg_reach(g, obj) is True
        assert sure_win(g, obj).surely_wins is False


def test_criterion_02_assignment_count(gate):
    with gate(2, "4 of 8 assignments win for Max", 1.0):
        g, _, obj = fig1a()
        assert winning_assignment_count(g, obj) == (4, 8)


def test_criterion_03_chain(gate):
    with gate(3, "chain games n=1..4 have value 2^-n, matched by brute force", 10.0):
        for n in range(1, 5):
            g, t, obj = chain_game(n)
            v = exact_value_two(g, t, obj)
            assert v == Fraction(1, 2 ** n), n
            assert value_two_all_nodes(g, t, obj) == v, n


def random_acyclic_reliability(rng):
    n = rng.randint(2, 6)
    names = [str(i) for i in range(n)]
    pairs = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n)]
    edges = rng.sample(pairs, rng.randint(1, min(8, len(pairs))))
    p = rng.choice([Fraction(1, 2), Fraction(1, 3), Fraction(3, 7)])
    return ReliabilityInstance(tuple(names), tuple(edges), names[0], names[-1], p)


def test_criterion_04_reliability(gate):
    with gate(4, "reliability game value equals adjusted reliability (bridge instance = 15/64, 50 random)", 60.0):
        inst = parse_reliability(resources.files("randctl").joinpath("data", "bridge.game").read_text())
        g, t, obj = reliability_to_game(inst)
        assert exact_value_two(g, t, obj) == Fraction(15, 64) == reliability_oracle(inst)
        rng = random.Random(404)
        for _ in range(50):
            inst = random_acyclic_reliability(rng)
            g, t, obj = reliability_to_game(inst)
            assert exact_value_two(g, t, obj) == reliability_oracle(inst), inst


def test_criterion_05_coverage(gate):
    with gate(5, ">= 92% of 200 estimates within 0.05 of 1/2", 60.0):
        g, t, obj = fig1a()
        eps = delta = Fraction(1, 20)
        hits = 0
        for seed in range(200):
            rep = estimate_value_two(g, t, obj, eps, delta, seed)
            assert rep.samples == 738
            hits += abs(rep.estimate - Fraction(1, 2)) <= eps
        assert hits >= 184, f"{hits}/200 within epsilon"


def test_criterion_06_sample_count(gate):
    with gate(6, "sample_count(0.005, 0.05) = 73778, sample_count(1/2, 1/2) = 3", 1.0):
        assert sample_count(0.005, 0.05) == 73778
        assert sample_count(Fraction(1, 2), Fraction(1, 2)) == 3


def test_criterion_07_pair_recurrence(gate):
    with gate(7, "pair recurrence closed form for n <= 64 and threshold 397/512", 1.0):
        for n in range(1, 65):
            p, q = pair_probabilities(n)
            assert (p, q) == pair_recurrence(n)
            # before the closing clause step: q = 2^-6n and p telescopes to 49/64 * sum of 2^-6k
            raw_q = q * 4
            raw_p = p - raw_q / 2
            assert raw_q == Fraction(1, 2 ** (6 * n))
            assert raw_p == Fraction(49, 64) * sum(Fraction(1, 2 ** (6 * k)) for k in range(n))
        assert qbf_threshold(1) == Fraction(397, 512)


QBF_CASES = [
    (((1, 2), (-1, -2)), True),
    (((2,),), True),
    (((1, 2), (-1, 2)), True),
    (((1,),), False),
    (((1,), (-1,)), False),
    (((2,), (-2,)), False),
]


@pytest.mark.slow
def test_criterion_08_qbf(gate):
    with gate(8, "six single-pair formulas separate at the threshold", 900.0):
        p, q = pair_probabilities(1)
        theta = qbf_threshold(1)
        for clauses, truth in QBF_CASES:
            pcnf = Pcnf(1, clauses)
            assert qbf_oracle(pcnf) is truth
            g, t, obj, th = qbf_to_game(pcnf)
            assert th == theta
            v = value_one(g, t, obj)
            if truth:
                assert v >= theta, (clauses, v)
            else:
                assert v < theta and v <= p + q / 4, (clauses, v)


def _winners_agree(g, obj, arenas):
    par = reach_to_parity(g, obj)
    en_two = reach_to_energy(g, obj, "two")
    en_one = reach_to_energy(g, obj, "one")
    for arena in arenas:
        base = g.init in solve(arena, obj).max_region
        for other in (par, en_two, en_one):
            if (g.init in solve(arena, other).max_region) != base:
                return False
    return True


def test_criterion_09_transforms(gate):
    with gate(9, "reachability, parity and both energy winners agree on every assignment", 120.0):
        rng = random.Random(909)
        done = 0
        while done < 100:
            g, obj = random_reach_game(rng, rng.randint(1, 8))
            if len(relevant_nodes(g)) > 8:
                continue
            arenas = []
            for own, _ in enumerate_assignments(g):
                arenas.append(Arena(g, {v: own.get(v, MAX) for v in g.nodes}))
            assert _winners_agree(g, obj, arenas)
            done += 1


def test_criterion_10_solvers(gate):
    with gate(10, "parity and energy solvers match brute force on 100 arenas each", 60.0):
        rng = random.Random(1010)
        for _ in range(100):
            g = random_graph(rng, 5)
            a = Arena(g, random_ownership(rng, g))
            pri = {v: rng.randrange(5) for v in g.nodes}
            assert solve_parity(a, pri).max_region == brute_force_solve(a, Parity(pri)).max_region
        for _ in range(100):
            g = random_graph(rng, 5)
            a = Arena(g, random_ownership(rng, g))
            w = {v: rng.randint(-4, 4) for v in g.nodes}
            c = rng.randint(0, 6)
            assert solve_energy(a, w, c).max_region == brute_force_solve(a, Energy(w, c)).max_region


def test_criterion_11_denominators(gate):
    with gate(11, "explicit-game denominators divide the unassigned toss denominators", 300.0):
        rng = random.Random(1111)
        for _ in range(50):
            n = rng.randint(1, 5)
            if rng.random() < 0.5:
                g, obj = random_reach_game(rng, n)
            else:
                g = random_graph(rng, n)
                obj = Parity({v: rng.randrange(4) for v in g.nodes})
            toss = {}
            for v in g.nodes:
                d = rng.choice([2, 3, 5, 7])
                toss[v] = Fraction(rng.randint(1, d - 1), d)
            sol = explicit_solution(g, toss, obj)
            rel = relevant_nodes(g)
            for (code, _, _), value in sol.values.items():
                own = decode_ownership(g, code)
                bound = 1
                for v in g.nodes:
                    if v in rel and v not in own:
                        bound *= toss[v].denominator
                assert bound % value.denominator == 0


@pytest.mark.slow
def test_criterion_12_convergence(gate):
    with gate(12, "mean ratio error shrinks and stays under the Hoeffding curve", 1800.0):
        delta = Fraction(1, 20)
        for kind in ("reachability", "parity", "energy"):
            games = profile_games(kind, 10, 12, seed=2024)
            res = run_convergence_experiment(games, Fraction(1, 200), delta, 20000, 1000, seed=2024)
            final = res.aggregate[-1]
            assert final[0] == 20000
            assert final[1] < res.mean_error_at(1000), kind
            for n, mean, _, eps in res.aggregate:
                if n >= 2000:
                    assert mean < eps, (kind, n, mean, eps)
