"""
Strategies as transducers.

Every strategy object in the package speaks the same three-call protocol,
which is what ``simulate`` drives:

    memory = strategy.initial_memory(state, credit)
    dist = strategy.choose(memory, state)       # at player-1 states
    memory = strategy.update(memory, src, dst)  # after every move

``choose`` returns a mapping successor -> Fraction. The memory update runs
on the edge just taken, so strategies that track the energy level need no
extra register for the previous state.

``FiniteMemoryStrategy`` is the explicit, table-driven form that reports
carry. Programmatic strategies (energy-based, round-based) can be
tabulated into it with ``tabulate``.

"""
import logging
from collections import deque
from fractions import Fraction

from .model import ModelError

log = logging.getLogger(__name__)


class FiniteMemoryStrategy(object):
    """

    memory   - tuple of hashable memory labels; size is its length
    initial  - mapping start state -> initial memory label; the key None
               gives the default for any other start
    moves    - mapping (memory, state) -> {successor: Fraction}
    updates  - mapping (memory, src, dst) -> memory; a missing entry keeps
               the memory unchanged

    """

    def __init__(self, memory, initial, moves, updates=None):
        self.memory = tuple(memory)
        self.initial = dict(initial)
        self.moves = dict((k, dict((d, Fraction(p)) for d, p in v.items()))
                          for k, v in moves.items())
        self.updates = dict(updates or {})

    @classmethod
    def memoryless(cls, choices):
        """

        choices - mapping state -> successor, or state -> {successor: prob}

        """
        moves = {}
        for q, choice in choices.items():
            if isinstance(choice, dict):
                moves[(0, q)] = choice
            else:
                moves[(0, q)] = {choice: Fraction(1)}
        return cls((0,), {None: 0}, moves)

    @property
    def size(self):
        return len(self.memory)

    def initial_memory(self, state, credit=0):
        if state in self.initial:
            return self.initial[state]
        if None in self.initial:
            return self.initial[None]
        raise ModelError('strategy has no initial memory for state %r' % (state,))

    def choose(self, memory, state):
        try:
            return self.moves[(memory, state)]
        except KeyError:
            raise ModelError('strategy undefined at memory %r, state %r' % (memory, state))

    def update(self, memory, src, dst):
        return self.updates.get((memory, src, dst), memory)

    def check(self, m):
        """Lists the table entries that do not respect the model's edges."""
        problems = []
        labels = set(self.memory)
        for (mem, q), dist in sorted(self.moves.items(), key=_entry_key):
            if mem not in labels:
                problems.append('unknown memory %r' % (mem,))
            if not (0 <= q < len(m)) or not m.is_player1(q):
                problems.append('move at %r which is not a player-1 state' % (q,))
                continue
            for dst, p in dist.items():
                if m.edge(q, dst) is None:
                    problems.append('move %s -> %r is not an edge' % (m.name_of(q), dst))
                if not 0 < p <= 1:
                    problems.append('move %s -> %r has probability %s' % (m.name_of(q), dst, p))
            if sum(dist.values()) != 1:
                problems.append('moves at %s do not sum to 1' % m.name_of(q))
        for (mem, src, dst), nxt in sorted(self.updates.items(), key=_entry_key):
            if m.edge(src, dst) is None:
                problems.append('update on %r -> %r which is not an edge' % (src, dst))
            if mem not in labels or nxt not in labels:
                problems.append('update uses unknown memory')
        for state, mem in self.initial.items():
            if mem not in labels:
                problems.append('initial memory %r unknown' % (mem,))
        return problems

    def to_json(self, m):
        index = dict((mem, i) for i, mem in enumerate(self.memory))
        name = m.name_of
        return {
            'type': 'transducer',
            'memory': [_label(mem) for mem in self.memory],
            'initial': dict(('*' if q is None else name(q), index[mem])
                            for q, mem in self.initial.items()),
            'moves': [[index[mem], name(q), dict((name(d), str(p)) for d, p in sorted(dist.items()))]
                      for (mem, q), dist in sorted(self.moves.items(), key=_entry_key)],
            'updates': [[index[mem], name(src), name(dst), index[nxt]]
                        for (mem, src, dst), nxt in sorted(self.updates.items(), key=_entry_key)],
        }

    @classmethod
    def from_json(cls, doc, m):
        if doc.get('type') != 'transducer':
            raise ModelError('not a transducer table: %r' % (doc.get('type'),))
        memory = list(range(len(doc['memory'])))
        initial = dict((None if k == '*' else m.index(k), v) for k, v in doc['initial'].items())
        moves = dict(((mem, m.index(q)), dict((m.index(d), Fraction(p)) for d, p in dist.items()))
                     for mem, q, dist in doc['moves'])
        updates = dict(((mem, m.index(src), m.index(dst)), nxt)
                       for mem, src, dst, nxt in doc['updates'])
        return cls(memory, initial, moves, updates)


def tabulate(m, strategy, starts):
    """

    Explores a programmatic strategy from the given (state, credit) starts
    and records the reachable part as a ``FiniteMemoryStrategy``.

    Probabilistic (and player-2) states branch over every successor; player-1
    states follow the strategy's support.

    """
    initial = {}
    seen = set()
    queue = deque()
    for state, credit in starts:
        mem = strategy.initial_memory(state, credit)
        initial[state] = mem
        if (mem, state) not in seen:
            seen.add((mem, state))
            queue.append((mem, state))

    moves, updates = {}, {}
    while queue:
        mem, q = queue.popleft()
        if m.is_player1(q):
            dist = strategy.choose(mem, q)
            moves[(mem, q)] = dist
            targets = sorted(dist)
        else:
            targets = list(m.successor_states(q))
        for dst in targets:
            nxt = strategy.update(mem, q, dst)
            if nxt != mem:
                updates[(mem, q, dst)] = nxt
            if (nxt, dst) not in seen:
                seen.add((nxt, dst))
                queue.append((nxt, dst))

    memory = sorted(set(mem for mem, _ in seen), key=_sort_key)
    log.debug('tabulated strategy: %d memory values, %d moves', len(memory), len(moves))
    return FiniteMemoryStrategy(memory, initial, moves, updates)


def _label(mem):
    if isinstance(mem, tuple):
        return ':'.join(str(x) for x in mem)
    return str(mem)


def _sort_key(mem):
    if isinstance(mem, tuple):
        return tuple((0, x) if isinstance(x, int) else (1, str(x)) for x in mem)
    return ((0, mem) if isinstance(mem, int) else (1, str(mem)),)


def _entry_key(item):
    key = item[0]
    return tuple(_sort_key(k) for k in key)
