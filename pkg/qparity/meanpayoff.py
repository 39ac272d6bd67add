"""
Expected mean-payoff values inside end-components.

An end-component induces a communicating sub-MDP, so its optimal expected
mean payoff (the gain) is the same from every state. ``mec_value`` finds it
by policy iteration with exact rational policy evaluation; the returned bias
vector certifies optimality through the average-reward optimality equations,
which ``certify_gain`` re-checks.
"""
import logging
from collections import namedtuple
from fractions import Fraction

import networkx as nx

from . import linalg
from .decomposition import EndComponent
from .model import Mdp, ModelError, require_valid
from .strategy import FiniteMemoryStrategy

log = logging.getLogger(__name__)


class NotEndComponentError(ModelError):
    pass


MecValue = namedtuple('MecValue', 'gain strategy bias')
MecValue.__doc__ = """
gain     - optimal expected mean payoff, constant over the component
strategy - mapping player-1 state -> successor (pure, memoryless, inside)
bias     - mapping state -> Fraction solving the optimality equations
"""


def end_component(m, states):
    """Checks that ``states`` is an end-component of ``m`` and returns it as one."""
    require_valid(m, Mdp)
    inside = frozenset(states.states if isinstance(states, EndComponent) else states)
    if not inside:
        raise NotEndComponentError('empty set of states')
    for q in sorted(inside):
        if not 0 <= q < len(m):
            raise NotEndComponentError('%r is not a state' % (q,))
        succ = m.successor_states(q)
        if m.is_probabilistic(q) and any(d not in inside for d in succ):
            raise NotEndComponentError('probabilistic state %s leaves the set' % m.name_of(q))
        if not any(d in inside for d in succ):
            raise NotEndComponentError('state %s has no edge inside the set' % m.name_of(q))
    if not nx.is_strongly_connected(m.digraph(inside)):
        raise NotEndComponentError('%s is not strongly connected' % m.names(inside))
    return EndComponent(m, inside)


def uniform_strategy(m, component):
    """Memoryless strategy playing every internal edge of ``component`` uniformly."""
    component = end_component(m, component)
    choices = {}
    for q, succ in component.retained.items():
        p = Fraction(1, len(succ))
        choices[q] = dict((d, p) for d in succ)
    return FiniteMemoryStrategy.memoryless(choices)


def _chain(m, component, policy):
    """Transition rows and expected one-step rewards of the chain a policy induces."""
    rows, reward = {}, {}
    for q in component:
        if m.is_probabilistic(q):
            rows[q] = m.distribution(q)
            reward[q] = sum(e.prob * e.weight for e in m.successors(q))
        else:
            rows[q] = {policy[q]: Fraction(1)}
            reward[q] = Fraction(m.weight(q, policy[q]))
    return rows, reward


def evaluate(m, component, policy):
    """

    Gain and bias of a memoryless policy restricted to ``component``.

    Works for multichain policies: each closed class gets its own gain and
    a bias pinned by its stationary distribution; transient states inherit
    both through their transition equations.

    Returns (gain, bias) as mappings state -> Fraction.

    """
    rows, reward = _chain(m, component, policy)
    graph = nx.DiGraph()
    graph.add_nodes_from(rows)
    graph.add_edges_from((q, d) for q, row in rows.items() for d in row)

    gain, bias = {}, {}
    recurrent = set()
    for cls in sorted((sorted(c) for c in nx.attracting_components(graph)), key=lambda c: c[0]):
        pi = linalg.stationary(cls, rows)
        g = sum(pi[q] * reward[q] for q in cls)
        pos = dict((q, i) for i, q in enumerate(cls))
        equations, rhs = [], []
        for q in cls[1:]:
            row = {pos[q]: Fraction(1)}
            for d, p in rows[q].items():
                row[pos[d]] = row.get(pos[d], Fraction(0)) - p
            equations.append(row)
            rhs.append(reward[q] - g)
        equations.append(dict((pos[q], pi[q]) for q in cls))
        rhs.append(Fraction(0))
        for q, h in zip(cls, linalg.solve(equations, rhs)):
            gain[q], bias[q] = g, h
        recurrent.update(cls)

    transient = sorted(set(rows) - recurrent)
    if transient:
        pos = dict((q, i) for i, q in enumerate(transient))
        equations, g_rhs = [], []
        for q in transient:
            row = {pos[q]: Fraction(1)}
            const = Fraction(0)
            for d, p in rows[q].items():
                if d in pos:
                    row[pos[d]] = row.get(pos[d], Fraction(0)) - p
                else:
                    const += p * gain[d]
            equations.append(row)
            g_rhs.append(const)
        for q, g in zip(transient, linalg.solve(equations, g_rhs)):
            gain[q] = g
        h_rhs = []
        for q in transient:
            const = reward[q] - gain[q]
            for d, p in rows[q].items():
                if d not in pos:
                    const += p * bias[d]
            h_rhs.append(const)
        for q, h in zip(transient, linalg.solve(equations, h_rhs)):
            bias[q] = h
    return gain, bias


def mec_value(m, component):
    """

    Optimal gain of an end-component, with a pure memoryless optimal
    strategy and its bias vector.

    Policy iteration: improve on gain first, then on bias among the
    gain-maximal successors; a choice only changes when strictly improved,
    and then to the smallest maximizing successor.

    """
    component = end_component(m, component)
    policy = dict((q, succ[0]) for q, succ in component.retained.items())

    iterations = 0
    while True:
        iterations += 1
        gain, bias = evaluate(m, component, policy)
        switched = False
        for q in sorted(policy):
            succ = component.retained[q]
            best = max(gain[d] for d in succ)
            if gain[policy[q]] < best:
                policy[q] = min(d for d in succ if gain[d] == best)
                switched = True
        if not switched:
            for q in sorted(policy):
                succ = [d for d in component.retained[q] if gain[d] == gain[policy[q]]]
                score = dict((d, m.weight(q, d) + bias[d]) for d in succ)
                best = max(score.values())
                if score[policy[q]] < best:
                    policy[q] = min(d for d in succ if score[d] == best)
                    switched = True
        if not switched:
            break
        log.debug('mec_value: iteration %d switched the policy', iterations)

    gains = set(gain.values())
    if len(gains) != 1:
        raise ModelError('gain is not uniform over %s' % m.names(component.states))
    value = MecValue(gains.pop(), dict(policy), dict(bias))
    log.debug('mec_value: gain %s on %d states after %d iterations',
              value.gain, len(component), iterations)
    return value


def certify_gain(m, component, value):
    """True iff ``value`` satisfies the optimality equations on ``component``."""
    try:
        component = end_component(m, component)
    except NotEndComponentError:
        return False
    g, h = value.gain, value.bias
    if any(q not in h for q in component):
        return False
    for q in component:
        if m.is_probabilistic(q):
            if g + h[q] != sum(e.prob * (e.weight + h[e.dst]) for e in m.successors(q)):
                return False
            continue
        chosen = value.strategy.get(q)
        if chosen not in component.retained[q]:
            return False
        for d in component.retained[q]:
            if g + h[q] < m.weight(q, d) + h[d]:
                return False
        if g + h[q] != m.weight(q, chosen) + h[chosen]:
            return False
    return True


def optimal_strategy(value):
    return FiniteMemoryStrategy.memoryless(value.strategy)
