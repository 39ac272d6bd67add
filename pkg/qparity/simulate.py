"""
Seeded Monte-Carlo plays and random instances.

Randomness comes from numpy's counter-based Philox generator. Successors
are drawn exactly: the raw 64-bit draws are reduced modulo the common
denominator of the distribution (with rejection of the biased top range),
so no floating point is involved in choosing a move.
"""
import logging
from collections import Counter, namedtuple
from fractions import Fraction
from functools import reduce
from math import gcd

import numpy as np

from .model import Edge, GameGraph, Mdp, ModelError, Owner, State, require_valid
from .strategy import FiniteMemoryStrategy

log = logging.getLogger(__name__)


RunStats = namedtuple('RunStats', [
    'seed', 'horizon', 'start', 'credit',
    'min_energy', 'final_energy', 'running_mean',
    'tail_priorities', 'tail_min_priority', 'tail_states',
    'buchi_visits', 'max_buchi_gap', 'final_memory',
])
RunStats.__doc__ = """
min_energy      - least energy level along the run, the initial credit included
running_mean    - total weight over the horizon, exact
tail_priorities - histogram {priority: visits} over the last tenth of the run
tail_states     - states visited in that window
buchi_visits    - visits to priority-0 states
max_buchi_gap   - longest stretch of steps without a priority-0 state
"""


def _lcm(a, b):
    return a * b // gcd(a, b)


class Sampler(object):
    """Exact sampling of rational distributions from a Philox stream."""

    BLOCK = 512
    RANGE = 1 << 64

    def __init__(self, seed):
        self.bits = np.random.Philox(seed)
        self._buffer = []

    def raw(self):
        if not self._buffer:
            self._buffer = [int(x) for x in self.bits.random_raw(self.BLOCK)]
            self._buffer.reverse()
        return self._buffer.pop()

    def pick(self, dist):
        items = sorted(dist.items())
        if len(items) == 1:
            return items[0][0]
        denominator = reduce(_lcm, (Fraction(p).denominator for _, p in items), 1)
        limit = (self.RANGE // denominator) * denominator
        u = self.raw()
        while u >= limit:
            u = self.raw()
        r = u % denominator
        acc = 0
        for dst, p in items:
            p = Fraction(p)
            acc += p.numerator * (denominator // p.denominator)
            if r < acc:
                return dst
        raise ModelError('distribution sums to %s, not 1' % (sum(p for _, p in items),))


def _uniform(m, q):
    succ = m.successor_states(q)
    return dict((d, Fraction(1, len(succ))) for d in succ)


def simulate(m, strategy=None, seed=0, horizon=1000, start=0, credit=0,
             opponent=None, observer=None):
    """

    Plays ``horizon`` steps from ``start`` and summarizes the run.

    strategy - player-1 strategy (uniform choices when None)
    opponent - player-2 strategy for games (uniform when None)
    observer - called as observer(step, state, memory) at step 0 and after
               every move

    """
    require_valid(m)
    if horizon <= 0:
        raise ModelError('horizon must be positive, got %r' % (horizon,))
    if not 0 <= start < len(m):
        raise ModelError('%r is not a state' % (start,))

    sampler = Sampler(seed)
    memory = strategy.initial_memory(start, credit) if strategy is not None else None
    opposing = opponent.initial_memory(start, 0) if opponent is not None else None
    window = max(1, horizon // 10)
    tail = Counter()
    tail_states = set()

    q = start
    energy = credit
    lowest = credit
    visits, last, gap = 0, 0, 0
    if m.priority(q) == 0:
        visits = 1
    if observer is not None:
        observer(0, q, memory)

    for step in range(1, horizon + 1):
        if m.is_probabilistic(q):
            dist = m.distribution(q)
        elif m.is_player1(q):
            dist = strategy.choose(memory, q) if strategy is not None else _uniform(m, q)
        else:
            dist = opponent.choose(opposing, q) if opponent is not None else _uniform(m, q)
        dst = sampler.pick(dist)
        energy += m.weight(q, dst)
        lowest = min(lowest, energy)
        if strategy is not None:
            memory = strategy.update(memory, q, dst)
        if opponent is not None:
            opposing = opponent.update(opposing, q, dst)
        q = dst

        if m.priority(q) == 0:
            visits += 1
            gap = max(gap, step - last)
            last = step
        if step > horizon - window:
            tail[m.priority(q)] += 1
            tail_states.add(q)
        if observer is not None:
            observer(step, q, memory)

    gap = max(gap, horizon - last)
    return RunStats(seed, horizon, start, credit, lowest, energy,
                    Fraction(energy - credit, horizon), dict(tail), min(tail),
                    frozenset(tail_states), visits, gap, memory)


def random_strategy(m, seed, memory_size=2, owner=Owner.PLAYER1):
    """

    A random finite-memory strategy with ``memory_size`` memory values, for
    the states of ``owner`` (player 2 gives an opponent for games).

    """
    rng = np.random.Generator(np.random.Philox(seed))
    memory = list(range(memory_size))
    moves, updates = {}, {}
    for q in range(len(m)):
        succ = m.successor_states(q)
        for mem in memory:
            if m.owner(q) is owner:
                moves[(mem, q)] = {succ[int(rng.integers(len(succ)))]: Fraction(1)}
            for d in succ:
                nxt = int(rng.integers(memory_size))
                if nxt != mem:
                    updates[(mem, q, d)] = nxt
    return FiniteMemoryStrategy(memory, {None: 0}, moves, updates)


def random_instance(states=6, max_weight=3, max_priority=4, density=0.4,
                    prob_fraction=0.5, kind='mdp', seed=0):
    """

    A random valid model, reproducible per seed.

    states        - number of states
    max_weight    - weights are drawn from [-max_weight, max_weight]
    max_priority  - priorities are drawn from [0, max_priority]
    density       - probability of each ordered pair being an edge
    prob_fraction - share of probabilistic (or player-2) states
    kind          - 'mdp' or 'game'

    States left without an edge get a weight-0 self-loop and priority
    ``max_priority``.

    """
    if kind not in ('mdp', 'game'):
        raise ModelError('unknown model kind %r' % (kind,))
    if states < 1 or max_weight < 0 or max_priority < 0:
        raise ModelError('need at least one state and non-negative bounds')
    if not (0 <= density <= 1 and 0 <= prob_fraction <= 1):
        raise ModelError('density and prob_fraction must lie in [0, 1]')

    rng = np.random.Generator(np.random.Philox(seed))
    other = Owner.PROBABILISTIC if kind == 'mdp' else Owner.PLAYER2
    owners = [other if rng.random() < prob_fraction else Owner.PLAYER1 for _ in range(states)]
    priorities = [int(rng.integers(0, max_priority + 1)) for _ in range(states)]

    edges = []
    for q in range(states):
        out = [(d, int(rng.integers(-max_weight, max_weight + 1)))
               for d in range(states) if rng.random() < density]
        if not out:
            out = [(q, 0)]
            priorities[q] = max_priority
        if owners[q] is Owner.PROBABILISTIC:
            shares = [int(rng.integers(1, 5)) for _ in out]
            total = sum(shares)
            edges.extend(Edge(q, d, w, Fraction(k, total)) for (d, w), k in zip(out, shares))
        else:
            edges.extend(Edge(q, d, w) for d, w in out)

    model = Mdp if kind == 'mdp' else GameGraph
    result = model([State('q%d' % q, owners[q], priorities[q]) for q in range(states)],
                   edges, name='random-%d' % seed)
    log.debug('random_instance: seed %d, %d states, %d edges', seed, states, len(edges))
    return result
