import logging
import time
from fractions import Fraction

from .helpers import *
from qparity.energyparity import (NotAlternatingError, NotNormalizedError, gadgetize, mdp_cap,
                                  minimal_credit, parity_to_buchi_copies,
                                  solve_energy_buchi_mdp, solve_energy_mdp,
                                  solve_energy_parity)
from qparity.model import ModelError, Objective, validate
from qparity.oracles import product_energy_oracle
from qparity.simulate import random_instance, simulate
from qparity.transforms import make_alternating

log = logging.getLogger(__name__)


def uniform_distributions(m):
    changed = {}
    for q in range(len(m)):
        if m.is_probabilistic(q):
            succ = m.successor_states(q)
            changed[q] = dict((d, Fraction(1, len(succ))) for d in succ)
    return m.with_distributions(changed)


def small_instance(seed):
    return random_instance(states=4 + seed % 2, max_weight=2, max_priority=3, seed=seed)


class TestGadget(object):

    def test_leak_gadget_matches_the_bundled_game(self):
        gadget = gadgetize(leak())
        g = gadget.graph
        assert_equal(validate(g), [])
        assert_equal(sorted(s.name for s in g.states), sorted(s.name for s in leak_gadget().states))
        assert_true(g.is_player2(g.index('a')))
        assert_equal(g.weight(g.index('a:L'), g.index('a')), -1)
        assert_equal(gadget.original(g.index('a')), 0)
        assert_equal(gadget.original(g.index('a:R')), None)
        assert_equal(gadget.provenance[g.index('a:R')], ('right', 0))

    def test_needs_a_normalized_mdp(self):
        m = build([('a', PROB, 2), ('b', P1, 0)],
                  [('a', 'a', 0, '1/2'), ('a', 'b', 0, '1/2'), ('b', 'b', 0)])
        assert_raises(NotNormalizedError, gadgetize, m)


class TestEnergyBuchiMdp(object):

    def test_leak(self):
        assert_equal(solve_energy_buchi_mdp(leak()).credits, [None, 0])

    def test_charge(self):
        assert_equal(solve_energy_buchi_mdp(charge()).credits, [0, 10, 10])

    def test_energy_alone(self):
        assert_equal(solve_energy_mdp(charge()).credits, [0, 10, 10])
        assert_equal(solve_energy_mdp(leak()).credits, [None, 0])

    def test_rejects_parity_priorities(self):
        m = build([('a', P1, 2)], [('a', 'a', 0)])
        assert_raises(ModelError, solve_energy_buchi_mdp, m)


class TestCopies(object):

    def test_layout(self):
        alt, _ = make_alternating(charge())
        copies = parity_to_buchi_copies(alt)
        assert_equal(copies.evens, (0,))
        assert_equal(len(copies.mdp), 2 * len(alt) + 1)
        assert_equal(copies.sink, len(copies.mdp) - 1)
        assert_equal(copies.copy(2, 0), len(alt) + 2)
        assert_equal(copies.provenance(len(alt) + 2), ('copy', 2, 0))
        assert_equal(copies.provenance(1), ('original', 1))
        assert_equal(copies.provenance(copies.sink), ('sink',))
        assert_equal(validate(copies.mdp), [])
        # only copies of priority-0 states are Büchi
        buchi = [v for v in range(len(copies.mdp)) if copies.mdp.priority(v) == 0]
        assert_equal(sorted(copies.provenance(v)[1] for v in buchi),
                     sorted(q for q in range(len(alt)) if alt.priority(q) == 0))

    def test_copy_drops_to_sink_on_smaller_priority(self):
        m = build([('a', P1, 2), ('b', PROB, 2), ('c', P1, 1)],
                  [('a', 'b', 0), ('b', 'a', 0, '1/2'), ('b', 'c', 0, '1/2'), ('c', 'b', 0)])
        copies = parity_to_buchi_copies(m)
        assert_equal(copies.evens, (0, 2))
        assert_equal(copies.mdp.successor_states(copies.copy(1, 2)), (copies.sink,))
        assert_equal(len(copies.mdp.successor_states(copies.copy(1, 0))), 2)

    def test_needs_an_alternating_mdp(self):
        assert_raises(NotAlternatingError, parity_to_buchi_copies, charge())


class TestSolveEnergyParity(object):

    def test_charge(self):
        result = solve_energy_parity(charge())
        assert_equal(result.winning, frozenset([0, 1, 2]))
        assert_equal(result.credits, [0, 10, 10])
        assert_equal(result.cap, mdp_cap(charge()))
        assert_equal(result.copy, {0: 0, 1: 0, 2: 0})

    def test_leak(self):
        # a drains with positive probability whatever the credit
        result = solve_energy_parity(leak())
        assert_equal(result.credits, [None, 0])
        assert_equal(result.winning, frozenset([1]))

    def test_odd_loop_loses(self):
        m = build([('a', P1, 1)], [('a', 'a', 5)])
        assert_equal(solve_energy_parity(m).credits, [None])

    def test_even_loop_wins(self):
        m = build([('a', P1, 2)], [('a', 'a', 0)])
        assert_equal(solve_energy_parity(m).credits, [0])

    def test_engines_agree(self):
        assert_equal(solve_energy_parity(charge(), method='unfold').credits, [0, 10, 10])

    def test_minimal_credit(self):
        assert_equal(minimal_credit(charge(), 'q1'), 10)
        assert_equal(minimal_credit(charge(), 0), 0)
        assert_equal(minimal_credit(leak(), 'a'), None)
        assert_raises(ModelError, minimal_credit, charge(), 'zz')
        assert_raises(ModelError, minimal_credit, charge(), 9)

    def test_rejects_games(self):
        assert_raises(ModelError, solve_energy_parity, leak_gadget())

    def test_matches_product_oracle(self):
        for seed in range(runs(500)):
            m = small_instance(seed)
            oracle = product_energy_oracle(m)
            result = solve_energy_parity(m)
            assert_equal(result.credits, oracle.credits)
            assert_true(result.transducer.size <= result.memory_bound)

    def test_support_invariance(self):
        for seed in range(runs(100)):
            m = small_instance(seed)
            assert_equal(solve_energy_parity(m).credits,
                         solve_energy_parity(uniform_distributions(m)).credits)

    def test_winning_sets_grow_with_weights(self):
        for seed in range(runs(50)):
            m = small_instance(seed)
            richer = m.replace(edges=[e._replace(weight=e.weight + 1) for e in m.edges])
            assert_true(solve_energy_parity(m).winning <= solve_energy_parity(richer).winning)


class TestEnergyParityStrategy(object):

    def test_charge_transducer(self):
        m = charge()
        result = solve_energy_parity(m)
        table = result.transducer
        assert_equal(table.check(m), [])
        assert_true(table.size <= result.memory_bound)
        assert_equal(result.memory_bound, 2 * 4 * 10)

    def test_leak_transducer(self):
        result = solve_energy_parity(leak())
        assert_true(result.transducer.size <= result.memory_bound)

    def test_charge_runs(self):
        m = charge()
        result = solve_energy_parity(m)
        for q in range(len(m)):
            objective = Objective.energy_parity(result.credits[q])
            for seed in range(runs(10)):
                run = simulate(m, result.strategy, seed=seed, horizon=2000, start=q,
                               credit=result.credits[q])
                assert_true(objective.satisfied_by(run))

    def test_energy_never_goes_negative(self):
        for seed in range(runs(60)):
            m = small_instance(seed)
            result = solve_energy_parity(m)
            assert_equal(result.transducer.check(m), [])
            for q in sorted(result.winning):
                run = simulate(m, result.strategy, seed=seed, horizon=3000, start=q,
                               credit=result.credits[q])
                assert_true(run.min_energy >= 0)
                assert_equal(run.tail_min_priority % 2, 0)


class TestPseudoPolynomialScaling(object):

    def test_hundred_states(self):
        m = random_instance(states=100, max_weight=50, max_priority=4, density=0.03, seed=0)
        elapsed = []
        for model in (m, m.scaled(2)):
            started = time.time()
            solve_energy_parity(model)
            elapsed.append(time.time() - started)
            assert_true(elapsed[-1] < 60)
        log.info('energy-parity on %d states: %.2fs at W=%d, %.2fs at W=%d (ratio %.2f)',
                 len(m), elapsed[0], m.max_weight, elapsed[1], 2 * m.max_weight,
                 elapsed[1] / max(elapsed[0], 1e-6))
