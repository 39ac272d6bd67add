"""
End-component machinery: maximal end-component decomposition, random
attractors, restriction to δ-closed sets and reachability (qualitative and
quantitative).
"""
import logging
from collections import deque
from fractions import Fraction

import networkx as nx

from . import linalg
from .model import Mdp, ModelError, require_valid

log = logging.getLogger(__name__)


class NotClosedError(ModelError):
    pass


class EndComponent(object):
    """

    A δ-closed, strongly connected set of states in which every state keeps
    an internal edge.

    states   - frozenset of state indices
    retained - mapping player-1 state -> tuple of its successors inside

    """

    def __init__(self, m, states):
        self.states = frozenset(states)
        self.retained = dict(
            (q, tuple(d for d in m.successor_states(q) if d in self.states))
            for q in sorted(self.states) if not m.is_probabilistic(q))

    def __contains__(self, q):
        return q in self.states

    def __iter__(self):
        return iter(sorted(self.states))

    def __len__(self):
        return len(self.states)

    def __eq__(self, other):
        if isinstance(other, EndComponent):
            other = other.states
        return self.states == frozenset(other)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.states)

    def __repr__(self):
        return 'EndComponent(%s)' % sorted(self.states)

    def min_priority(self, m):
        return min(m.priority(q) for q in self.states)


class MecDecomposition(object):
    """Maximal end-components, ordered by their smallest state."""

    def __init__(self, components):
        self.components = sorted(components, key=lambda c: min(c.states))
        self._member = {}
        for i, c in enumerate(self.components):
            for q in c.states:
                self._member[q] = i

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def component_of(self, q):
        """Index of the component containing ``q``, or None."""
        return self._member.get(q)

    def states(self):
        return frozenset(self._member)


def random_attractor(m, target, within=None):
    """

    Least set containing ``target`` and closed under adding player-1 states
    whose successors all lie inside and probabilistic states with some
    successor inside.

    within - optional set of states inducing the sub-MDP to work in

    """
    return _attractor(m, target, within, blocked=())


def _attractor(m, target, within, blocked):
    arena = set(range(len(m))) if within is None else set(within)
    attr = set(target) & arena
    remaining = {}
    for q in arena:
        if not m.is_probabilistic(q):
            remaining[q] = sum(1 for d in m.successor_states(q) if d in arena)

    queue = deque(sorted(attr))
    while queue:
        q = queue.popleft()
        for e in m.predecessors(q):
            p = e.src
            if p not in arena or p in attr or p in blocked:
                continue
            if not m.is_probabilistic(p):
                remaining[p] -= 1
                if remaining[p] > 0:
                    continue
            attr.add(p)
            queue.append(p)
    return attr


def _escapes(m, q, inside):
    if m.is_probabilistic(q):
        return any(d not in inside for d in m.successor_states(q))
    return not any(d in inside for d in m.successor_states(q))


def mec_decompose(m, states=None):
    """

    Maximal end-component decomposition by iterated SCC refinement.

    states - optional subset; the result is then the maximal end-components
             contained in it

    Each candidate set is split into its strongly connected components; a
    component whose states all stay inside (probabilistic states) or can
    stay inside (player-1 states) is an end-component, otherwise the
    escaping states and their random attractor are dropped and the rest is
    refined again.

    """
    require_valid(m, Mdp)
    pool = frozenset(range(len(m)) if states is None else states)
    found = []
    work = [pool] if pool else []
    rounds = 0
    while work:
        rounds += 1
        candidate = work.pop()
        for scc in nx.strongly_connected_components(m.digraph(candidate)):
            scc = set(scc)
            bad = set(q for q in scc if _escapes(m, q, scc))
            if not bad:
                found.append(EndComponent(m, scc))
                continue
            rest = scc - random_attractor(m, bad, within=scc)
            if rest:
                work.append(frozenset(rest))

    log.debug('mec_decompose: %d components after %d refinements', len(found), rounds)
    return MecDecomposition(found)


def restrict(m, states):
    """

    Sub-model induced by a δ-closed set in which every state keeps an
    internal edge.

    Returns (sub-model, index) where index maps old state -> new state; new
    states keep the relative order of the old ones.

    """
    inside = sorted(set(states))
    members = set(inside)
    for q in inside:
        if not 0 <= q < len(m):
            raise NotClosedError('%r is not a state' % (q,))
        if m.is_probabilistic(q):
            for d in m.successor_states(q):
                if d not in members:
                    raise NotClosedError('probabilistic state %s escapes to %s' % (
                        m.name_of(q), m.name_of(d)))
        elif not any(d in members for d in m.successor_states(q)):
            raise NotClosedError('state %s has no edge inside the set' % m.name_of(q))

    index = dict((q, i) for i, q in enumerate(inside))
    edges = [e._replace(src=index[e.src], dst=index[e.dst]) for e in m.edges
             if e.src in members and e.dst in members]
    return m.replace(states=[m.states[q] for q in inside], edges=edges), index


def can_reach(m, target, within=None):
    """States with a path to ``target`` staying inside ``within``."""
    arena = set(range(len(m))) if within is None else set(within)
    reached = set(target) & arena
    queue = deque(sorted(reached))
    while queue:
        q = queue.popleft()
        for e in m.predecessors(q):
            if e.src in arena and e.src not in reached:
                reached.add(e.src)
                queue.append(e.src)
    return reached


def almost_sure_reach(m, target):
    """

    States from which some strategy reaches ``target`` with probability 1.

    Repeatedly drops the states that cannot reach the target inside the
    current arena, together with their random attractor (target states are
    never dropped: arriving there already wins).

    """
    require_valid(m, Mdp)
    target = set(target)
    alive = set(range(len(m)))
    while True:
        doomed = alive - can_reach(m, target, alive)
        if not doomed:
            break
        alive -= _attractor(m, doomed, alive, blocked=target)
    return alive


def reach_strategy(m, target, within=None):
    """

    Memoryless choices reaching ``target`` almost surely from every state of
    ``within`` (by default the almost-sure set of ``target``).

    ``within`` must be closed for probabilistic states. Player-1 states pick
    the smallest successor one BFS layer closer to the target.

    Returns a mapping player-1 state -> successor for the states of
    ``within`` outside ``target``.

    """
    target = set(target)
    if within is None:
        within = almost_sure_reach(m, target)
    within = set(within)
    distance = dict((q, 0) for q in target & within)
    queue = deque(sorted(distance))
    while queue:
        q = queue.popleft()
        for e in m.predecessors(q):
            if e.src in within and e.src not in distance:
                distance[e.src] = distance[q] + 1
                queue.append(e.src)

    choices = {}
    for q in sorted(within - target):
        if m.is_probabilistic(q):
            continue
        if q not in distance:
            raise NotClosedError('%s cannot reach the target inside the set' % m.name_of(q))
        choices[q] = min(d for d in m.successor_states(q)
                         if distance.get(d) == distance[q] - 1)
    return choices


def reach_value(m, target):
    """

    Maximal probability of reaching ``target``, per state, as exact rationals.

    States reaching the target almost surely get 1 and states with no path
    get 0; the rest are solved by policy iteration over memoryless choices,
    starting from a policy that shortens the graph distance to the target.

    """
    require_valid(m, Mdp)
    target = set(target)
    n = len(m)
    ones = almost_sure_reach(m, target)
    positive = can_reach(m, target)
    unknown = sorted(positive - ones)
    value = [Fraction(1) if q in ones else Fraction(0) for q in range(n)]
    if not unknown:
        return value

    distance = _distances(m, target)
    policy = {}
    for q in unknown:
        if not m.is_probabilistic(q):
            policy[q] = min(d for d in m.successor_states(q)
                            if distance.get(d, n + 1) == distance[q] - 1)

    pos = dict((q, i) for i, q in enumerate(unknown))
    iterations = 0
    while True:
        iterations += 1
        rows, rhs = [], []
        for q in unknown:
            if m.is_probabilistic(q):
                dist = m.distribution(q)
            else:
                dist = {policy[q]: Fraction(1)}
            row = {pos[q]: Fraction(1)}
            const = Fraction(0)
            for d, p in dist.items():
                if d in pos:
                    row[pos[d]] = row.get(pos[d], Fraction(0)) - p
                elif d in ones:
                    const += p
            rows.append(row)
            rhs.append(const)
        for q, v in zip(unknown, linalg.solve(rows, rhs)):
            value[q] = v

        changed = False
        for q in sorted(policy):
            best = max(value[d] for d in m.successor_states(q))
            if value[policy[q]] < best:
                policy[q] = min(d for d in m.successor_states(q) if value[d] == best)
                changed = True
        if not changed:
            break

    log.debug('reach_value: %d undecided states, %d policy iterations', len(unknown), iterations)
    return value


def _distances(m, target):
    """Backward BFS layers: player-1 and probabilistic states alike need one successor closer."""
    distance = dict((q, 0) for q in target)
    queue = deque(sorted(target))
    while queue:
        q = queue.popleft()
        for e in m.predecessors(q):
            if e.src not in distance:
                distance[e.src] = distance[q] + 1
                queue.append(e.src)
    return distance
