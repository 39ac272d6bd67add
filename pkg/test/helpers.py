import contextlib
import os
from fractions import Fraction

from nose.tools import assert_equal, assert_false, assert_in, assert_raises, assert_true
from mock import call, patch, MagicMock

from qparity.model import Edge, GameGraph, Mdp, Owner, State
from qparity.modelio import load_model

P1, PROB, P2 = Owner.PLAYER1, Owner.PROBABILISTIC, Owner.PLAYER2


@contextlib.contextmanager
def fake_timeout_fail(*args, **kwargs):
    from qparity.timeout import TimeoutError
    raise TimeoutError()


def runs(default):
    """Instance count for randomized suites, lowered by QPARITY_TEST_RUNS."""
    value = os.environ.get('QPARITY_TEST_RUNS', '')
    return min(default, int(value)) if value.isdigit() else default


def charge():
    return load_model('charge')


def leak():
    return load_model('leak')


def leak_gadget():
    return load_model('leak-gadget')


def build(states, edges, kind=Mdp, name=None):
    """

    states - list of (name, owner, priority)
    edges  - list of (src name, dst name, weight) or (src, dst, weight, prob)

    """
    index = dict((s[0], q) for q, s in enumerate(states))
    return kind([State(*s) for s in states],
                [Edge(index[e[0]], index[e[1]], e[2],
                      Fraction(e[3]) if len(e) > 3 else None) for e in edges],
                name=name)


def game(states, edges, name=None):
    return build(states, edges, kind=GameGraph, name=name)
