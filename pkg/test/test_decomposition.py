from fractions import Fraction

from .helpers import *
from qparity.decomposition import (EndComponent, NotClosedError, almost_sure_reach, can_reach,
                                   mec_decompose, random_attractor, reach_strategy,
                                   reach_value, restrict)
from qparity.model import ModelError
from qparity.simulate import random_instance, random_strategy, simulate


def two_rooms():
    """Room {a, b} leaks to room {c} with probability 1/2 from b."""
    return build([('a', P1, 1), ('b', PROB, 1), ('c', P1, 0), ('d', P1, 2)],
                 [('a', 'b', 0), ('a', 'd', 0), ('b', 'a', 0, '1/2'), ('b', 'c', 0, '1/2'),
                  ('c', 'c', 1), ('d', 'a', 0)])


def closed(m, states):
    for q in states:
        succ = m.successor_states(q)
        if m.is_probabilistic(q):
            if any(d not in states for d in succ):
                return False
        elif not any(d in states for d in succ):
            return False
    return True


class TestMecDecompose(object):

    def test_charge_is_one_component(self):
        mecs = mec_decompose(charge())
        assert_equal(len(mecs), 1)
        assert_equal(mecs[0], set([0, 1, 2]))

    def test_leak(self):
        mecs = mec_decompose(leak())
        assert_equal([c.states for c in mecs], [frozenset([1])])
        assert_equal(mecs.component_of(0), None)
        assert_equal(mecs.component_of(1), 0)

    def test_leaking_room_splits(self):
        m = two_rooms()
        mecs = mec_decompose(m)
        # b leaks, so a keeps only the loop through d
        assert_equal([sorted(c.states) for c in mecs], [[0, 3], [2]])
        assert_equal(mecs.states(), frozenset([0, 2, 3]))
        assert_equal(mecs[0].retained, {0: (3,), 3: (0,)})

    def test_restricted_to_a_subset(self):
        m = two_rooms()
        mecs = mec_decompose(m, [0, 1, 2])
        assert_equal([sorted(c.states) for c in mecs], [[2]])

    def test_rejects_games(self):
        assert_raises(ModelError, mec_decompose, leak_gadget())

    def test_random_instances(self):
        for seed in range(runs(100)):
            m = random_instance(states=7, seed=seed)
            mecs = mec_decompose(m)
            seen = set()
            for c in mecs:
                assert_true(closed(m, c.states))
                assert_true(seen.isdisjoint(c.states))
                seen |= c.states
                # a component is its own decomposition
                assert_equal(list(mec_decompose(m, c.states)), [c])


class TestEndComponent(object):

    def test_equality_with_sets(self):
        c = EndComponent(charge(), [0, 1, 2])
        assert_equal(c, set([0, 1, 2]))
        assert_equal(len(c), 3)
        assert_in(1, c)
        assert_equal(list(c), [0, 1, 2])
        assert_equal(c.min_priority(charge()), 0)


class TestAttractor(object):

    def test_probabilistic_states_join_on_one_successor(self):
        m = two_rooms()
        assert_equal(random_attractor(m, [2]), set([1, 2]))

    def test_player1_states_join_when_forced(self):
        m = two_rooms()
        assert_equal(random_attractor(m, [1, 3]), set([0, 1, 3]))

    def test_within(self):
        m = two_rooms()
        assert_equal(random_attractor(m, [2], within=[0, 2, 3]), set([2]))


class TestReachability(object):

    def test_can_reach(self):
        m = two_rooms()
        assert_equal(can_reach(m, [2]), set([0, 1, 2, 3]))
        assert_equal(can_reach(m, [3]), set([0, 1, 3]))

    def test_almost_sure_reach(self):
        m = two_rooms()
        assert_equal(almost_sure_reach(m, [2]), set([0, 1, 2, 3]))
        assert_equal(almost_sure_reach(m, [3]), set([0, 3]))

    def test_leak_reaches_b_almost_surely(self):
        assert_equal(almost_sure_reach(leak(), [1]), set([0, 1]))

    def test_reach_strategy(self):
        m = two_rooms()
        assert_equal(reach_strategy(m, [2]), {0: 1, 3: 0})
        assert_equal(reach_strategy(m, [3]), {0: 3})

    def test_reach_strategy_outside_the_set(self):
        m = two_rooms()
        assert_raises(NotClosedError, reach_strategy, m, [3], within=[0, 1, 2, 3])

    def test_reach_value(self):
        m = build([('a', PROB, 0), ('b', P1, 0), ('c', P1, 0)],
                  [('a', 'b', 0, '1/3'), ('a', 'c', 0, '2/3'), ('b', 'b', 0), ('c', 'c', 0)])
        assert_equal(reach_value(m, [1]), [Fraction(1, 3), Fraction(1), Fraction(0)])

    def test_reach_value_takes_the_better_gamble(self):
        m = build([('s', P1, 0), ('x', PROB, 0), ('y', PROB, 0), ('g', P1, 0), ('f', P1, 0)],
                  [('s', 'x', 0), ('s', 'y', 0),
                   ('x', 'g', 0, '1/4'), ('x', 'f', 0, '3/4'),
                   ('y', 'g', 0, '3/4'), ('y', 'f', 0, '1/4'),
                   ('g', 'g', 0), ('f', 'f', 0)])
        values = reach_value(m, [3])
        assert_equal(values[0], Fraction(3, 4))
        assert_equal(values[1], Fraction(1, 4))


class TestRestrict(object):

    def test_restrict_to_a_component(self):
        m = two_rooms()
        sub, index = restrict(m, [0, 3])
        assert_equal(index, {0: 0, 3: 1})
        assert_equal(sub.names(range(len(sub))), ['a', 'd'])
        assert_equal(len(sub.edges), 2)

    def test_restrict_rejects_leaks(self):
        assert_raises(NotClosedError, restrict, two_rooms(), [0, 1])
        assert_raises(NotClosedError, restrict, two_rooms(), [1, 2])


class TestRandomProperties(object):

    def test_attractor_is_monotone_and_idempotent(self):
        for seed in range(runs(100)):
            m = random_instance(states=7, seed=seed)
            small = set(q for q in range(len(m)) if m.priority(q) == 0)
            large = small | set([seed % len(m)])
            attr = random_attractor(m, small)
            assert_true(small <= attr)
            assert_true(attr <= random_attractor(m, large))
            assert_equal(random_attractor(m, attr), attr)

    def test_removing_an_attractor_leaves_the_other_components(self):
        for seed in range(runs(100)):
            m = random_instance(states=7, seed=seed)
            mecs = list(mec_decompose(m))
            for c in mecs:
                rest = set(range(len(m))) - random_attractor(m, c.states)
                assert_true(closed(m, rest))
                assert_equal(sorted(sorted(d.states) for d in mec_decompose(m, rest)),
                             sorted(sorted(d.states) for d in mecs if d != c))

    def test_reach_value_is_a_fixpoint(self):
        for seed in range(runs(100)):
            m = random_instance(states=6, seed=seed)
            target = set([0, seed % len(m)])
            value = reach_value(m, target)
            for q in range(len(m)):
                if q in target:
                    assert_equal(value[q], 1)
                elif m.is_probabilistic(q):
                    assert_equal(value[q], sum(p * value[d] for d, p in m.distribution(q).items()))
                else:
                    assert_equal(value[q], max(value[d] for d in m.successor_states(q)))
            assert_equal(set(q for q in range(len(m)) if value[q] == 1),
                         almost_sure_reach(m, target))

    def test_runs_settle_inside_one_component(self):
        for seed in range(runs(50)):
            m = random_instance(states=6, seed=seed)
            mecs = mec_decompose(m)
            for k in range(3):
                run = simulate(m, random_strategy(m, 10 * seed + k), seed=k, horizon=2000)
                assert_true(any(run.tail_states <= c.states for c in mecs))
