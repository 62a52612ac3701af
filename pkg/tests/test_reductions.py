import random
from fractions import Fraction
from importlib import resources

import pytest

from randctl.core import GameGraph, Reachability, ValidationError, validate
from randctl.gamefile import parse_reliability
from randctl.reductions import (
    BOT,
    TOP,
    Pcnf,
    ReliabilityInstance,
    edge_node,
    format_qdimacs,
    pair_probabilities,
    parse_qdimacs,
    qbf_oracle,
    qbf_threshold,
    qbf_to_game,
    reach_to_energy,
    reach_to_parity,
    reliability_oracle,
    reliability_to_game,
)
from randctl.generators import fig1a
from randctl.toss_as_you_go import value_one
from randctl.toss_at_start import exact_value_two

from oracles import pair_recurrence, random_reach_game


def bundled(name):
    return resources.files("randctl").joinpath("data", name).read_text()


class TestQdimacs:
    def test_example(self):
        pcnf = parse_qdimacs(bundled("example2.qdimacs"))
        assert pcnf == Pcnf(2, ((1, 2, -4), (-3, 2), (3, 4)))
        assert parse_qdimacs(format_qdimacs(pcnf)) == pcnf

    def test_renumbering(self):
        text = "p cnf 9 1\na 7 0\ne 3 0\n-7 3 0\n"
        assert parse_qdimacs(text) == Pcnf(1, ((-1, 2),))

    @pytest.mark.parametrize("text", [
        "a 1 0\ne 2 0\n1 0\n",
        "p cnf 2 1\ne 1 0\na 2 0\n1 0\n",
        "p cnf 2 1\na 1 2 0\n1 0\n",
        "p cnf 2 1\na 1 0\n1 0\n",
        "p cnf 2 1\na 1 0\ne 2 0\n1 3 0\n",
        "p cnf 2 1\na 1 0\ne 2 0\n1 2\n",
        "p cnf 2 1\na 1 0\ne 2 0\n1 x 0\n",
        "p cnf 2 1\na 1 0\ne 2 0\n0\n",
        "p cnf 2 0\na 1 0\ne 2 0\n",
    ])
    def test_rejects(self, text):
        with pytest.raises(ValidationError):
            parse_qdimacs(text)


class TestQbfOracle:
    def test_examples(self):
        assert qbf_oracle(parse_qdimacs(bundled("example2.qdimacs")))
        assert qbf_oracle(Pcnf(1, ((1, 2), (-1, -2))))
        assert not qbf_oracle(Pcnf(1, ((1,),)))
        assert not qbf_oracle(Pcnf(1, ((2,), (-2,))))

    def test_universal_then_existential(self):
        # y may depend on x: forall x exists y . x <-> y
        assert qbf_oracle(Pcnf(1, ((1, -2), (-1, 2))))
        # with the order swapped the same matrix is false: exists y forall x
        assert not qbf_oracle(Pcnf(2, ((2, -3), (-2, 3))))


class TestPairProbabilities:
    def test_small(self):
        p, q = pair_probabilities(1)
        assert (p, q) == (Fraction(99, 128), Fraction(1, 256))
        assert qbf_threshold(1) == Fraction(397, 512)

    def test_closed_form(self):
        for n in range(1, 65):
            assert pair_probabilities(n) == pair_recurrence(n)
            p, q = pair_probabilities(n)
            assert 0 < q < p < 1 and p + q < 1

    def test_range(self):
        with pytest.raises(ValueError):
            pair_probabilities(0)


class TestQbfGame:
    def test_example_shape(self):
        g, t, obj, theta = qbf_to_game(parse_qdimacs(bundled("example2.qdimacs")))
        validate(g, obj)
        assert len(g.nodes) == 26 and g.init == "Ax1"
        assert set(t.values()) == {Fraction(1, 2)}
        assert theta == qbf_threshold(2)
        assert set(g.edges["C1"]) == {"~x1", "~y1", "y2", BOT}

    def test_single_pair_shape(self):
        g, _, _, _ = qbf_to_game(Pcnf(1, ((1,),)))
        assert len(g.nodes) == 14

    def test_sinks(self):
        g, _, _, _ = qbf_to_game(Pcnf(1, ((1, 2),)))
        to_top = {v for v in g.nodes if TOP in g.edges[v]}
        to_bot = {v for v in g.nodes if BOT in g.edges[v]}
        assert to_top == {"Ax1", "x1", "~x1", "y1", "~y1", "and", TOP}
        assert to_bot == {"Ey1", "y1'", "~y1'", "y1''", "~y1''", "C1", BOT}
        assert g.edges[TOP] == (TOP,) and g.edges[BOT] == (BOT,)

    @pytest.mark.slow
    def test_threshold_separates(self):
        for clauses, truth in [(((2,),), True), (((1,),), False)]:
            pcnf = Pcnf(1, clauses)
            g, t, obj, theta = qbf_to_game(pcnf)
            assert qbf_oracle(pcnf) is truth
            assert (value_one(g, t, obj) >= theta) is truth


def random_reliability(rng, nodes, edges):
    names = [str(i) for i in range(1, nodes + 1)]
    pairs = [(u, v) for u in names for v in names if u != v]
    chosen = tuple(rng.sample(pairs, min(edges, len(pairs))))
    p = Fraction(rng.randint(1, 4), 5)
    return ReliabilityInstance(tuple(names), chosen, names[0], names[-1], p)


class TestReliability:
    def test_bridge(self):
        inst = parse_reliability(bundled("bridge.game"))
        g, t, obj = reliability_to_game(inst)
        assert set(g.nodes) == {"init", "e_1_2", "e_1_3", "e_2_3", "e_2_4", "e_3_4", TOP, BOT}
        assert set(g.edges["e_2_4"]) == {TOP, BOT}
        assert set(g.edges["e_1_2"]) == {"e_2_3", "e_2_4", BOT}
        assert reliability_oracle(inst) == Fraction(15, 64)
        assert exact_value_two(g, t, obj) == Fraction(15, 64)

    def test_single_edge(self):
        for p in (Fraction(1, 2), Fraction(1, 3), Fraction(4, 5)):
            inst = ReliabilityInstance(("s", "t"), (("s", "t"),), "s", "t", p)
            g, t, obj = reliability_to_game(inst)
            assert edge_node("s", "t") in g.nodes
            assert exact_value_two(g, t, obj) == reliability_oracle(inst) == p * p

    def test_disconnected(self):
        inst = ReliabilityInstance(("s", "a", "t"), (("s", "a"),), "s", "t", Fraction(1, 2))
        g, t, obj = reliability_to_game(inst)
        assert exact_value_two(g, t, obj) == reliability_oracle(inst) == 0

    def test_random_agreement(self):
        rng = random.Random(8)
        for _ in range(50):
            inst = random_reliability(rng, rng.randint(2, 4), rng.randint(1, 6))
            g, t, obj = reliability_to_game(inst)
            validate(g, obj)
            assert len(g.nodes) == len(inst.edges) + 3
            assert exact_value_two(g, t, obj) == reliability_oracle(inst)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            ReliabilityInstance(("s",), (), "s", "s", Fraction(1, 2)).validate()
        with pytest.raises(ValidationError):
            ReliabilityInstance(("s", "t"), (), "s", "t", Fraction(1)).validate()
        with pytest.raises(ValidationError):
            ReliabilityInstance(("s", "t"), (("s", "x"),), "s", "t", Fraction(1, 2)).validate()


class TestTransforms:
    def test_fig1a_credits(self):
        g, _, obj = fig1a()
        assert reach_to_energy(g, obj, "two").credit == 5
        assert reach_to_energy(g, obj, "one").credit == 15
        par = reach_to_parity(g, obj)
        assert par.priority == {"v0": 1, "v1": 1, "v2": 1, "top": 2}

    def test_missing_self_loop(self):
        g = GameGraph(("a", "t"), {"a": ("t",), "t": ("a", "t")}, "a")
        with pytest.raises(ValidationError):
            reach_to_parity(g, Reachability({"t"}))

    def test_bad_context(self):
        g, _, obj = fig1a()
        with pytest.raises(ValueError):
            reach_to_energy(g, obj, "three")

    def test_value_preserved(self):
        rng = random.Random(21)
        for _ in range(40):
            g, obj = random_reach_game(rng, rng.randint(1, 6))
            t = {v: Fraction(rng.randint(1, 4), 5) for v in g.nodes}
            base = exact_value_two(g, t, obj)
            assert exact_value_two(g, t, reach_to_parity(g, obj)) == base
            assert exact_value_two(g, t, reach_to_energy(g, obj, "two")) == base
