from fractions import Fraction

from .helpers import *
from qparity.model import ModelError, validate
from qparity.simulate import random_instance
from qparity.transforms import (fresh_name, is_alternating, is_normalized, make_alternating,
                                normalize_for_energy, relays)


class TestFreshName(object):

    def test_primes_until_free(self):
        taken = set(['a', "a'"])
        assert_equal(fresh_name(taken, 'a'), "a''")
        assert_in("a''", taken)
        assert_equal(fresh_name(taken, 'b'), 'b')


class TestMakeAlternating(object):

    def test_charge_gets_two_relays(self):
        m = charge()
        alt, state_map = make_alternating(m)
        assert_equal(state_map, [0, 1, 2])
        # q0 -> q0 and q2 -> q0 join two player-1 states
        assert_equal(len(alt), 5)
        assert_true(is_alternating(alt))
        assert_equal(validate(alt), [])
        assert_equal(sorted(relays(alt, len(m)).values()), [(0, 0), (2, 0)])

    def test_relay_keeps_weight_on_the_first_edge(self):
        alt, _ = make_alternating(charge())
        relay = alt.index('q2>q0')
        assert_equal(alt.weight(2, relay), -10)
        assert_equal(alt.weight(relay, 0), 0)
        assert_true(alt.is_probabilistic(relay))
        assert_equal(alt.priority(relay), 0)

    def test_probabilistic_chain_gets_player1_relay(self):
        m = build([('a', PROB, 1), ('b', PROB, 2), ('c', P1, 0)],
                  [('a', 'b', 3, '1/3'), ('a', 'c', 0, '2/3'), ('b', 'c', 0, '1'), ('c', 'a', 0)])
        alt, _ = make_alternating(m)
        relay = alt.index('a>b')
        assert_true(alt.is_player1(relay))
        assert_equal(alt.edge(0, relay).prob, Fraction(1, 3))
        assert_equal(alt.weight(0, relay), 3)

    def test_already_alternating_is_unchanged(self):
        m = leak()
        alt, _ = make_alternating(m)
        assert_equal(len(alt), len(m) + 2)
        assert_true(is_alternating(alt))

    def test_rejects_games(self):
        assert_raises(ModelError, make_alternating, leak_gadget())

    def test_random_instances(self):
        for seed in range(runs(30)):
            m = random_instance(states=6, seed=seed)
            alt, _ = make_alternating(m)
            assert_true(is_alternating(alt))
            assert_equal(validate(alt), [])
            assert_equal(alt.states[:len(m)], m.states)


class TestNormalizeForEnergy(object):

    def test_splits_three_way_distribution(self):
        m = build([('a', PROB, 1), ('x', P1, 0), ('y', P1, 0), ('z', P1, 0)],
                  [('a', 'x', 1, '1/2'), ('a', 'y', 2, '1/4'), ('a', 'z', 3, '1/4'),
                   ('x', 'a', 0), ('y', 'a', 0), ('z', 'a', 0)])
        norm, state_map = normalize_for_energy(m)
        assert_equal(state_map, [0, 1, 2, 3])
        assert_true(is_normalized(norm))
        assert_equal(validate(norm), [])
        chain = norm.index('a~s')
        assert_equal(norm.distribution(0), {1: Fraction(1, 2), chain: Fraction(1, 2)})
        assert_equal(norm.distribution(chain), {2: Fraction(1, 2), 3: Fraction(1, 2)})
        assert_equal(norm.weight(chain, 3), 3)
        assert_equal(norm.weight(0, chain), 0)

    def test_hoists_low_priority_probabilistic_state(self):
        m = build([('a', PROB, 0), ('b', P1, 1)],
                  [('a', 'a', 0, '1/2'), ('a', 'b', -1, '1/2'), ('b', 'a', 0)])
        norm, _ = normalize_for_energy(m)
        assert_true(is_normalized(norm))
        assert_true(norm.is_player1(0))
        assert_equal(norm.priority(0), 0)
        hoisted = norm.index('a~p')
        assert_equal(norm.successor_states(0), (hoisted,))
        assert_equal(norm.priority(hoisted), 1)
        assert_equal(norm.weight(hoisted, 1), -1)

    def test_single_successor_becomes_player1(self):
        m = build([('a', PROB, 1), ('b', P1, 0)], [('a', 'b', 2, '1'), ('b', 'a', 0)])
        norm, _ = normalize_for_energy(m)
        assert_equal(len(norm), 2)
        assert_true(norm.is_player1(0))
        assert_equal(norm.weight(0, 1), 2)

    def test_leak_is_already_normalized(self):
        assert_true(is_normalized(leak()))
        norm, _ = normalize_for_energy(leak())
        assert_equal(norm, leak())

    def test_random_instances(self):
        for seed in range(runs(30)):
            m = random_instance(states=6, max_priority=1, seed=seed)
            norm, _ = normalize_for_energy(m)
            assert_true(is_normalized(norm))
            assert_equal(validate(norm), [])
