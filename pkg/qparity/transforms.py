"""
Structural normalizations of MDPs used before the energy reductions.

Both transforms keep every original state at its index and append the
states they insert, so the returned state map is the identity on the
original states. It is returned anyway so callers do not depend on that.

"""
import logging
from fractions import Fraction

from .model import Edge, Mdp, Owner, State, require_valid

log = logging.getLogger(__name__)


def fresh_name(taken, base):
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def make_alternating(m):
    """

    Inserts a relay state on every edge joining two states of the same
    owner, so that player-1 and probabilistic states alternate along every
    play.

    The relay takes the other owner, the priority of the edge's source and
    a single weight-0 edge to the old target; the original weight (and
    probability) stays on the edge into the relay.

    """
    require_valid(m, Mdp)
    states = list(m.states)
    taken = set(s.name for s in states)
    edges = []
    for e in m.edges:
        owner = m.owner(e.src)
        if owner is not m.owner(e.dst):
            edges.append(e)
            continue
        if owner is Owner.PLAYER1:
            relay_owner, relay_prob = Owner.PROBABILISTIC, Fraction(1)
        else:
            relay_owner, relay_prob = Owner.PLAYER1, None
        relay = len(states)
        name = fresh_name(taken, '%s>%s' % (m.name_of(e.src), m.name_of(e.dst)))
        states.append(State(name, relay_owner, m.priority(e.src)))
        edges.append(Edge(e.src, relay, e.weight, e.prob))
        edges.append(Edge(relay, e.dst, 0, relay_prob))

    log.debug('make_alternating: %d relays inserted', len(states) - len(m))
    return Mdp(states, edges, name=m.name), list(range(len(m)))


def is_alternating(m):
    return all(m.owner(e.src) is not m.owner(e.dst) for e in m.edges)


def relays(alternating, original_size):
    """Maps each relay of an alternating model to its (source, target) pair."""
    found = {}
    for r in range(original_size, len(alternating)):
        (into,) = alternating.predecessors(r)
        (out,) = alternating.successors(r)
        found[r] = (into.src, out.dst)
    return found


def normalize_for_energy(m):
    """

    Rewrites probabilistic states into binary, maximum-priority form.

    - a probabilistic state with a single successor becomes a player-1
      state (its move is forced);
    - a probabilistic state whose priority is not the target priority
      max(1, d) becomes a player-1 state keeping its priority, with a single
      weight-0 edge to a fresh probabilistic state at the target priority;
    - a distribution with k > 2 successors is split into a chain of k - 1
      binary probabilistic nodes: each node sends the conditional mass of the
      next successor there and the rest down the chain. Chain edges weigh 0,
      the edge reaching an original successor carries its original weight.

    """
    require_valid(m, Mdp)
    target = max(1, m.max_priority)
    states = list(m.states)
    taken = set(s.name for s in states)
    edges = [e for e in m.edges if not m.is_probabilistic(e.src)]

    def new_state(base):
        states.append(State(fresh_name(taken, base), Owner.PROBABILISTIC, target))
        return len(states) - 1

    for q in range(len(m)):
        if not m.is_probabilistic(q):
            continue
        name, out = m.name_of(q), list(m.successors(q))
        if len(out) == 1:
            states[q] = State(name, Owner.PLAYER1, m.priority(q))
            edges.append(Edge(q, out[0].dst, out[0].weight))
            continue

        head = q
        if m.priority(q) != target:
            states[q] = State(name, Owner.PLAYER1, m.priority(q))
            head = new_state('%s~p' % name)
            edges.append(Edge(q, head, 0))

        mass = Fraction(1)
        while len(out) > 2:
            first = out.pop(0)
            share = first.prob / mass
            nxt = new_state('%s~s' % name)
            edges.append(Edge(head, first.dst, first.weight, share))
            edges.append(Edge(head, nxt, 0, 1 - share))
            mass -= first.prob
            head = nxt
        for e in out:
            edges.append(Edge(head, e.dst, e.weight, e.prob / mass))

    log.debug('normalize_for_energy: %d -> %d states', len(m), len(states))
    return Mdp(states, edges, name=m.name), list(range(len(m)))


def is_normalized(m):
    """True when every probabilistic state is binary with priority 1 and priorities are Büchi."""
    if any(s.priority not in (0, 1) for s in m.states):
        return False
    for q in range(len(m)):
        if m.is_probabilistic(q) and (m.priority(q) != 1 or len(m.successors(q)) != 2):
            return False
    return True
