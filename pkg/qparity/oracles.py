"""
Brute-force checks for small instances.

None of these reuse the solvers' code paths: the product oracle decides
almost-sure parity with its own end-component and reachability routines,
and the mean-payoff oracles enumerate policies or state subsets outright.
They refuse instances beyond their size guards with ``GuardRefused``.
"""
import itertools
import logging
from fractions import Fraction

import networkx as nx

from . import linalg
from .energy import CreditVector
from .model import Mdp, require_valid
from .timeout import guard

log = logging.getLogger(__name__)

PRODUCT_LIMIT = 10 ** 5
POLICY_LIMIT = 10 ** 4
SUBSET_LIMIT = 12


class _Arena(object):
    """A bare MDP: successor distributions and priorities, keyed by node."""

    def __init__(self):
        self.dist = {}
        self.priority = {}
        self.player1 = set()

    def add(self, node, priority, player1):
        self.priority[node] = priority
        self.dist[node] = {}
        if player1:
            self.player1.add(node)

    def edge(self, src, dst, p):
        self.dist[src][dst] = self.dist[src].get(dst, Fraction(0)) + p


def _sure_reach(arena, target):
    """Nested fixpoint: the largest X such that player 1 reaches ``target`` inside X."""
    target = set(target)
    x = set(arena.dist)
    while True:
        y = set(target & x)
        grew = True
        while grew:
            grew = False
            for node in x - y:
                succ = arena.dist[node]
                if node in arena.player1:
                    ok = any(d in y for d in succ)
                else:
                    ok = all(d in x for d in succ) and any(d in y for d in succ)
                if ok:
                    y.add(node)
                    grew = True
        if y == x:
            return x
        x = y


def _end_components(arena, nodes):
    """Maximal end-components inside ``nodes`` by repeated pruning of leaking states."""
    nodes = set(nodes)
    while True:
        graph = nx.DiGraph()
        graph.add_nodes_from(nodes)
        graph.add_edges_from((s, d) for s in nodes for d in arena.dist[s] if d in nodes)
        sccs = [set(c) for c in nx.strongly_connected_components(graph)]
        home = {}
        for i, c in enumerate(sccs):
            for s in c:
                home[s] = i
        leaking = set()
        for s in nodes:
            inside = [d for d in arena.dist[s] if d in nodes and home[d] == home[s]]
            if s in arena.player1:
                if not inside:
                    leaking.add(s)
            elif len(inside) != len(arena.dist[s]):
                leaking.add(s)
        if not leaking:
            return sccs
        nodes -= leaking


def _almost_sure_parity(arena):
    good = set()
    top = max(arena.priority.values())
    for p in range(0, top + 1, 2):
        pool = [s for s, k in arena.priority.items() if k >= p]
        for c in _end_components(arena, pool):
            if any(arena.priority[s] == p for s in c):
                good |= c
    return _sure_reach(arena, good)


class ProductOracle(object):
    """

    wins(q, c) - energy-parity almost-sure status from q with credit c
    credits    - ``CreditVector`` of the least winning credits

    """

    def __init__(self, m, cap, winning):
        self.model = m
        self.cap = cap
        self.table = dict((q, [(q, c) in winning for c in range(cap + 1)]) for q in range(len(m)))
        self.credits = CreditVector(row.index(True) if True in row else None
                                    for _, row in sorted(self.table.items()))

    def wins(self, q, c):
        return self.table[q][min(c, self.cap)]


def product_energy_oracle(m, cap=None):
    """

    Energy-parity by brute force over (state, saturated credit) pairs.

    cap - default 2·|Q|·W + 2

    """
    require_valid(m, Mdp)
    cap = 2 * len(m) * m.max_weight + 2 if cap is None else cap
    guard((cap + 2) * len(m), PRODUCT_LIMIT, 'product size')

    arena = _Arena()
    sink = 'sink'
    arena.add(sink, 1, True)
    arena.edge(sink, sink, Fraction(1))
    for q in range(len(m)):
        for c in range(cap + 1):
            arena.add((q, c), m.priority(q), not m.is_probabilistic(q))
    for q in range(len(m)):
        for c in range(cap + 1):
            for e in m.successors(q):
                level = c + e.weight
                dst = sink if level < 0 else (e.dst, min(cap, level))
                arena.edge((q, c), dst, e.prob if m.is_probabilistic(q) else Fraction(1))

    winning = _almost_sure_parity(arena)
    log.debug('product_energy_oracle: %d product states, %d winning', len(arena.dist), len(winning))
    return ProductOracle(m, cap, winning)


def product_disjunction_oracle(m, cap=None):
    """

    Parity OR energy by brute force. Solvent (state, saturated credit) pairs
    all carry priority 0; an overdraft moves the play for good into a copy
    of the model that keeps the original priorities.

    cap - default 2·|Q|·W + 2

    """
    require_valid(m, Mdp)
    cap = 2 * len(m) * m.max_weight + 2 if cap is None else cap
    guard((cap + 2) * len(m), PRODUCT_LIMIT, 'product size')

    arena = _Arena()
    for q in range(len(m)):
        arena.add(('broke', q), m.priority(q), not m.is_probabilistic(q))
        for c in range(cap + 1):
            arena.add((q, c), 0, not m.is_probabilistic(q))
    for q in range(len(m)):
        for e in m.successors(q):
            p = e.prob if m.is_probabilistic(q) else Fraction(1)
            arena.edge(('broke', q), ('broke', e.dst), p)
            for c in range(cap + 1):
                level = c + e.weight
                dst = ('broke', e.dst) if level < 0 else (e.dst, min(cap, level))
                arena.edge((q, c), dst, p)

    winning = _almost_sure_parity(arena)
    log.debug('product_disjunction_oracle: %d product states, %d winning',
              len(arena.dist), len(winning))
    return ProductOracle(m, cap, winning)


def _policies(m, states):
    inside = set(states)
    options = []
    for q in sorted(inside):
        if not m.is_probabilistic(q):
            options.append((q, [d for d in m.successor_states(q) if d in inside]))
    count = 1
    for _, succ in options:
        count *= len(succ)
    guard(count, POLICY_LIMIT, 'number of memoryless policies')
    for combo in itertools.product(*[succ for _, succ in options]):
        yield dict(zip([q for q, _ in options], combo))


def _best_gain(m, states):
    """Largest gain of a closed class over all pure memoryless policies inside ``states``."""
    states = sorted(states)
    best = None
    for policy in _policies(m, states):
        rows = {}
        for q in states:
            rows[q] = m.distribution(q) if m.is_probabilistic(q) else {policy[q]: Fraction(1)}
        graph = nx.DiGraph()
        graph.add_nodes_from(states)
        graph.add_edges_from((q, d) for q in states for d in rows[q])
        for cls in nx.attracting_components(graph):
            cls = sorted(cls)
            pi = linalg.stationary(cls, rows)
            gain = sum(pi[q] * sum(p * m.weight(q, d) for d, p in rows[q].items()) for q in cls)
            if best is None or gain > best:
                best = gain
    return best


def policy_enum_mp_oracle(m, component):
    """Optimal gain of an end-component by enumerating its pure memoryless policies."""
    require_valid(m, Mdp)
    states = component.states if hasattr(component, 'states') else component
    return _best_gain(m, states)


def _is_end_component(m, states):
    inside = set(states)
    for q in inside:
        succ = m.successor_states(q)
        if m.is_probabilistic(q):
            if any(d not in inside for d in succ):
                return False
        elif not any(d in inside for d in succ):
            return False
    return nx.is_strongly_connected(m.digraph(inside))


def definition_mp_parity(m, threshold, strict=False):
    """

    Mean-payoff parity by the definition: every end-component (by subset
    enumeration) whose least priority is even and whose best gain meets the
    threshold is winning; the answer is almost-sure reachability of their
    union.

    """
    require_valid(m, Mdp)
    guard(len(m), SUBSET_LIMIT, 'states for subset enumeration')
    threshold = Fraction(threshold)
    winning = set()
    for size in range(1, len(m) + 1):
        for subset in itertools.combinations(range(len(m)), size):
            if set(subset) <= winning or not _is_end_component(m, subset):
                continue
            if min(m.priority(q) for q in subset) % 2:
                continue
            gain = _best_gain(m, subset)
            if (gain > threshold) if strict else (gain >= threshold):
                winning.update(subset)

    arena = _Arena()
    for q in range(len(m)):
        arena.add(q, m.priority(q), not m.is_probabilistic(q))
        for e in m.successors(q):
            arena.edge(q, e.dst, e.prob if m.is_probabilistic(q) else Fraction(1))
    return frozenset(_sure_reach(arena, winning))

