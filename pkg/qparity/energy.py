"""
Two-player energy Büchi games.

Player 1 must keep the energy level (initial credit plus the weights seen
so far) non-negative and visit priority-0 states infinitely often. Energy
is saturated at a cap C: levels above C are recorded as C. With C at least
2·|Q|·W the saturation loses nothing and the minimal credits are exact.

Two engines compute the same credit vector:

    fixpoint  iterates per-state credit thresholds directly (default)
    unfold    builds the (state, level) game explicitly and runs the
              classical Büchi attractor algorithm on it

Both hand back an ``EnergyBuchiSolution`` whose winning moves depend only
on the current state and energy level.
"""
import bisect
import logging
from collections import deque, namedtuple
from fractions import Fraction

from .model import Edge, GameGraph, ModelError, Owner, State, require_valid
from .transforms import fresh_name

log = logging.getLogger(__name__)

INF = float('inf')


def default_cap(m):
    return max(1, 2 * len(m) * m.max_weight)


class CreditVector(object):
    """Minimal initial credit per state; None marks an unwinnable state."""

    def __init__(self, values):
        self.values = tuple(None if v is None else int(v) for v in values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, q):
        return self.values[q]

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        if isinstance(other, CreditVector):
            other = other.values
        return self.values == tuple(other)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        return 'CreditVector(%r)' % (list(self.values),)

    def winning(self):
        return frozenset(q for q, c in enumerate(self.values) if c is not None)

    def restricted(self, states):
        """The vector over ``states`` (a sequence of indices), in that order."""
        return CreditVector(self.values[q] for q in states)

    def to_json(self, m):
        return dict((m.name_of(q), c) for q, c in enumerate(self.values) if c is not None)


def _require_buchi(g):
    bad = [g.name_of(q) for q in range(len(g)) if g.priority(q) not in (0, 1)]
    if bad:
        raise ModelError('Büchi priorities must be 0 or 1, not at %s' % ', '.join(bad))


class UnfoldedGame(object):
    """

    The game over (state, energy level) pairs, levels 0..cap, plus an
    absorbing losing sink.

    Node (q, c) has index q·(cap+1) + c. Moving along an edge of weight w
    leads to (q', min(cap, c + w)) when c + w >= 0 and to the sink otherwise.
    All unfolded edges weigh 0; the energy lives in the node.

    """

    def __init__(self, game, cap):
        if cap < 1:
            raise ModelError('credit cap must be at least 1, got %r' % (cap,))
        self.game = game
        self.cap = cap
        width = cap + 1
        self.sink = len(game) * width

        taken = set()
        states = []
        for q in range(len(game)):
            s = game.states[q]
            for c in range(width):
                states.append(State(fresh_name(taken, '%s#%d' % (s.name, c)), s.owner, s.priority))
        states.append(State(fresh_name(taken, 'sink'), Owner.PLAYER2, 1))

        pairs = set([(self.sink, self.sink)])
        for e in game.edges:
            for c in range(width):
                level = c + e.weight
                dst = self.sink if level < 0 else self.node(e.dst, min(cap, level))
                pairs.add((self.node(e.src, c), dst))
        self.graph = GameGraph(states, [Edge(s, d, 0) for s, d in sorted(pairs)], name=game.name)
        log.debug('unfold_energy: %d nodes, %d edges at cap %d',
                  len(self.graph), len(self.graph.edges), cap)

    def __len__(self):
        return len(self.graph)

    def node(self, q, c):
        return q * (self.cap + 1) + c

    def state_of(self, node):
        """(state, level) of a node, or None for the sink."""
        if node == self.sink:
            return None
        return divmod(node, self.cap + 1)

    @property
    def buchi(self):
        return frozenset(v for v in range(len(self.graph)) if self.graph.priority(v) == 0)


def unfold_energy(g, cap):
    require_valid(g, GameGraph)
    _require_buchi(g)
    return UnfoldedGame(g, cap)


BuchiSolution = namedtuple('BuchiSolution', 'winning strategy')


def _game_attractor(g, target, arena, player):
    """Attractor of ``player`` to ``target`` inside ``arena``, with attracting moves."""
    attr = set(target) & arena
    choice = {}
    remaining = {}
    for q in arena:
        if g.owner(q) is not player:
            remaining[q] = sum(1 for d in g.successor_states(q) if d in arena)
    queue = deque(sorted(attr))
    while queue:
        q = queue.popleft()
        for e in g.predecessors(q):
            p = e.src
            if p not in arena or p in attr:
                continue
            if g.owner(p) is player:
                choice[p] = q
            else:
                remaining[p] -= 1
                if remaining[p] > 0:
                    continue
            attr.add(p)
            queue.append(p)
    return attr, choice


def solve_buchi_game(g):
    """

    Winning region of player 1 for the Büchi objective (visit priority 0
    infinitely often) and a memoryless winning strategy on it.

    g - a ``GameGraph`` with priorities in {0, 1}, or an ``UnfoldedGame``

    """
    graph = g.graph if isinstance(g, UnfoldedGame) else g
    _require_buchi(graph)
    buchi = set(q for q in range(len(graph)) if graph.priority(q) == 0)
    arena = set(range(len(graph)))
    rounds = 0
    while True:
        rounds += 1
        reach, choice = _game_attractor(graph, buchi & arena, arena, Owner.PLAYER1)
        trap = arena - reach
        if not trap:
            break
        lost, _ = _game_attractor(graph, trap, arena, Owner.PLAYER2)
        arena -= lost

    strategy = {}
    for q in sorted(arena):
        if not graph.is_player1(q):
            continue
        if q in choice:
            strategy[q] = choice[q]
        else:
            strategy[q] = min(d for d in graph.successor_states(q) if d in arena)
    log.debug('solve_buchi_game: %d of %d states winning after %d rounds',
              len(arena), len(graph), rounds)
    return BuchiSolution(frozenset(arena), strategy)


class _CreditIteration(object):
    """

    Credit thresholds computed without unfolding.

    The inner loop finds, for every state, the least credit that reaches a
    Büchi state in at least one step with an arrival level no smaller than
    that Büchi state's threshold. Rounds are synchronous and start from
    INF, so values only decrease; the round at which a state first gets a
    value <= c is its rank at level c. The outer loop raises the Büchi
    thresholds to the inner values until they are stable.

    """

    def __init__(self, game, cap):
        self.game = game
        self.cap = cap
        self.buchi = frozenset(q for q in range(len(game)) if game.priority(q) == 0)
        self.threshold = dict((b, 0) for b in self.buchi)
        outer = 0
        while True:
            outer += 1
            self._iterate()
            raised = dict((b, self.values[b]) for b in self.buchi)
            if raised == self.threshold:
                break
            self.threshold = raised
        log.debug('credit iteration: %d outer rounds, %d inner rounds at cap %d',
                  outer, self.rounds, cap)

    def _need(self, e, target):
        need = max(0, target - e.weight)
        return INF if need > self.cap else need

    def _target(self, q, values):
        return self.threshold[q] if q in self.buchi else values[q]

    def _evaluate(self, q, values):
        needs = [self._need(e, self._target(e.dst, values)) for e in self.game.successors(q)]
        return min(needs) if self.game.is_player1(q) else max(needs)

    def _iterate(self):
        game = self.game
        n = len(game)
        values = [INF] * n
        history = [[(0, INF)] for _ in range(n)]
        dirty = set(range(n))
        rounds = 0
        while dirty:
            rounds += 1
            changed = []
            for q in sorted(dirty):
                v = self._evaluate(q, values)
                if v != values[q]:
                    changed.append((q, v))
            if not changed:
                break
            dirty = set()
            for q, v in changed:
                values[q] = v
                history[q].append((rounds, v))
                if q not in self.buchi:
                    dirty.update(e.src for e in game.predecessors(q))
        self.values = values
        self.history = history
        self.rounds = rounds

    def value_at(self, q, k):
        entries = self.history[q]
        i = bisect.bisect_right([r for r, _ in entries], k) - 1
        return entries[i][1]

    def rank(self, q, level):
        for r, v in self.history[q]:
            if v <= level:
                return r
        return None

    def credits(self):
        return CreditVector(None if v == INF else v for v in self.values)

    def successor(self, q, level):
        level = min(level, self.cap)
        k = self.rank(q, level)
        if k is None:
            return None
        for e in self.game.successors(q):
            if e.dst in self.buchi:
                target = self.threshold[e.dst]
            else:
                target = self.value_at(e.dst, k - 1)
            if self._need(e, target) <= level:
                return e.dst
        return None


class EnergyBuchiSolution(object):
    """

    credits - ``CreditVector`` of the game
    cap     - the saturation cap used
    method  - 'fixpoint' or 'unfold'

    ``successor(q, level)`` is the winning move of player 1 at state q with
    energy level ``level`` (None when (q, level) is losing).

    """

    def __init__(self, game, cap, method, credits, successor):
        self.game = game
        self.cap = cap
        self.method = method
        self.credits = credits
        self._successor = successor

    def successor(self, q, level):
        if level < 0:
            return None
        return self._successor(q, min(level, self.cap))

    def strategy(self, model=None):
        return EnergyStrategy(self.game if model is None else model, self)


class EnergyStrategy(object):
    """Energy-based strategy: the memory is the current saturated energy level."""

    def __init__(self, model, solution):
        self.model = model
        self.solution = solution
        self.cap = solution.cap

    @property
    def size(self):
        return self.cap + 1

    def initial_memory(self, state, credit=0):
        return min(self.cap, credit)

    def choose(self, memory, state):
        dst = self.solution.successor(state, memory)
        if dst is None:
            raise ModelError('no winning move at %s with energy %r' % (
                self.model.name_of(state), memory))
        return {dst: Fraction(1)}

    def update(self, memory, src, dst):
        return min(self.cap, memory + self.model.weight(src, dst))


def solve_energy_buchi_game(g, cap=None, method='fixpoint'):
    """

    Minimal initial credits for the energy Büchi objective in a two-player
    game with priorities in {0, 1}.

    cap    - saturation cap, default max(1, 2·|Q|·W)
    method - 'fixpoint' or 'unfold'

    """
    require_valid(g, GameGraph)
    _require_buchi(g)
    cap = default_cap(g) if cap is None else cap
    if cap < 1:
        raise ModelError('credit cap must be at least 1, got %r' % (cap,))

    if method == 'fixpoint':
        iteration = _CreditIteration(g, cap)
        solution = EnergyBuchiSolution(g, cap, method, iteration.credits(), iteration.successor)
    elif method == 'unfold':
        unfolded = UnfoldedGame(g, cap)
        buchi = solve_buchi_game(unfolded)
        credits = []
        for q in range(len(g)):
            winning = [c for c in range(cap + 1) if unfolded.node(q, c) in buchi.winning]
            credits.append(winning[0] if winning else None)

        def successor(q, level):
            move = buchi.strategy.get(unfolded.node(q, level))
            if move is None:
                return None
            return unfolded.state_of(move)[0]

        solution = EnergyBuchiSolution(g, cap, method, CreditVector(credits), successor)
    else:
        raise ModelError('unknown energy engine %r' % (method,))

    log.debug('solve_energy_buchi_game: %d of %d states winnable (%s, cap %d)',
              len(solution.credits.winning()), len(g), method, cap)
    return solution
