"""
Almost-sure energy-parity in MDPs.

The pipeline reduces energy parity to energy Büchi and energy Büchi to a
two-player energy Büchi game:

    make_alternating -> parity_to_buchi_copies -> normalize_for_energy
        -> gadgetize -> solve_energy_buchi_game

``solve_energy_parity`` runs this one-shot route and a two-phase route
(solve every even-priority copy, then an energy-reach towards the copies)
and insists that they agree. The witness strategy is assembled from the
two-phase solution.
"""
import logging
import time
from fractions import Fraction

from .decomposition import restrict
from .energy import EnergyStrategy, solve_energy_buchi_game
from .model import Edge, GameGraph, Mdp, ModelError, Owner, State, require_valid
from .strategy import tabulate
from .transforms import (fresh_name, is_alternating, is_normalized, make_alternating,
                         normalize_for_energy, relays)

log = logging.getLogger(__name__)

REACH = 'reach'


class NotNormalizedError(ModelError):
    pass


class NotAlternatingError(ModelError):
    pass


class RouteMismatchError(Exception):
    pass


def mdp_cap(m):
    """Saturation cap for the energy objectives of an MDP: 2·|Q|·W, at least 1."""
    return max(1, 2 * len(m) * max(m.max_weight, 1))


class GadgetGame(object):
    """

    graph      - the ``GameGraph``
    provenance - per node: ('original', q), ('left', q) or ('right', q)

    Original states keep their indices.

    """

    def __init__(self, graph, provenance):
        self.graph = graph
        self.provenance = list(provenance)

    def original(self, node):
        kind, q = self.provenance[node]
        return q if kind == 'original' else None


def gadgetize(m):
    """

    Replaces every probabilistic state q of a normalized MDP by a player-2
    state choosing between (q, L), a player-1 state of priority 1, and
    (q, R), a player-2 state of priority 0. Both lead to the successors of
    q with the original weights; the edges into them weigh 0.

    """
    require_valid(m, Mdp)
    if not is_normalized(m):
        raise NotNormalizedError('gadgetize needs binary probabilistic states of priority 1 '
                                 'and priorities in {0, 1}')
    taken = set(s.name for s in m.states)
    states, provenance, edges = [], [], []
    for q, s in enumerate(m.states):
        owner = Owner.PLAYER2 if s.owner is Owner.PROBABILISTIC else Owner.PLAYER1
        states.append(State(s.name, owner, s.priority))
        provenance.append(('original', q))

    for q in range(len(m)):
        if not m.is_probabilistic(q):
            edges.extend(m.successors(q))
            continue
        left, right = len(states), len(states) + 1
        states.append(State(fresh_name(taken, '%s:L' % m.name_of(q)), Owner.PLAYER1, 1))
        states.append(State(fresh_name(taken, '%s:R' % m.name_of(q)), Owner.PLAYER2, 0))
        provenance.extend([('left', q), ('right', q)])
        edges.append(Edge(q, left, 0))
        edges.append(Edge(q, right, 0))
        for e in m.successors(q):
            edges.append(Edge(left, e.dst, e.weight))
            edges.append(Edge(right, e.dst, e.weight))
    return GadgetGame(GameGraph(states, edges, name=m.name), provenance)


class MdpEnergySolution(object):
    """

    Energy Büchi solution of an MDP, read back from its gadget game.

    credits - ``CreditVector`` over the MDP's states
    cap     - saturation cap

    """

    def __init__(self, m, gadget, game_solution):
        self.model = m
        self.gadget = gadget
        self.game_solution = game_solution
        self.cap = game_solution.cap
        self.credits = game_solution.credits.restricted(range(len(m)))

    def successor(self, q, level):
        return self.game_solution.successor(q, level)

    def strategy(self):
        return EnergyStrategy(self.model, self.game_solution)


def _require_buchi(m):
    if any(s.priority not in (0, 1) for s in m.states):
        raise ModelError('energy Büchi needs priorities in {0, 1}')


def solve_energy_buchi_mdp(m, cap=None, method='fixpoint'):
    """

    Almost-sure energy Büchi credits of an MDP with priorities in {0, 1}.

    cap    - saturation cap, default ``mdp_cap(m)``
    method - energy game engine, 'fixpoint' or 'unfold'

    """
    require_valid(m, Mdp)
    _require_buchi(m)
    cap = mdp_cap(m) if cap is None else cap
    normalized, _ = normalize_for_energy(m)
    gadget = gadgetize(normalized)
    solution = solve_energy_buchi_game(gadget.graph, cap=cap, method=method)
    return MdpEnergySolution(m, gadget, solution)


def solve_energy_mdp(m, cap=None, method='fixpoint'):
    """Almost-sure energy objective alone: energy Büchi with every state Büchi."""
    require_valid(m, Mdp)
    return solve_energy_buchi_mdp(m.with_priorities([0] * len(m)), cap=cap, method=method)


class CopiedMdp(object):
    """

    Energy Büchi MDP built from an alternating MDP with priorities up to d.

    Layout: the original states, then one block of n copies for each even
    priority i in 0, 2, ..., then the sink. Copy (q, i) is Büchi iff the
    priority of q is i.

    """

    def __init__(self, mdp, size, evens):
        self.mdp = mdp
        self.size = size
        self.evens = tuple(evens)
        self.sink = len(mdp) - 1

    def copy(self, q, i):
        return self.size + self.evens.index(i) * self.size + q

    def block(self, i):
        start = self.copy(0, i)
        return list(range(start, start + self.size))

    def provenance(self, node):
        if node == self.sink:
            return ('sink',)
        if node < self.size:
            return ('original', node)
        k, q = divmod(node - self.size, self.size)
        return ('copy', q, self.evens[k])


def parity_to_buchi_copies(m):
    """

    Player 1 commits, at one of its moves, to a copy i and must then see
    priority i infinitely often while never seeing a smaller one.

    - original edges stay;
    - a player-1 state (original or copy) may drop to the sink, and may move
      along each of its edges into copy i whenever the target's priority is
      at least i;
    - a probabilistic copy (q, i) keeps its distribution inside copy i when
      all successors have priority at least i, and goes to the sink
      otherwise.

    Every state but the Büchi copies gets priority 1; the sink loops with
    weight 0.

    """
    require_valid(m, Mdp)
    if not is_alternating(m):
        raise NotAlternatingError('parity_to_buchi_copies needs an alternating MDP')
    n = len(m)
    evens = list(range(0, m.max_priority + 1, 2))
    taken = set(s.name for s in m.states)

    states = [s._replace(priority=1) for s in m.states]
    for i in evens:
        for s in m.states:
            states.append(State(fresh_name(taken, '%s@%d' % (s.name, i)), s.owner,
                                0 if s.priority == i else 1))
    sink = len(states)
    states.append(State(fresh_name(taken, 'sink'), Owner.PLAYER1, 1))

    def copy(q, i):
        return n + evens.index(i) * n + q

    edges = list(m.edges)
    edges.append(Edge(sink, sink, 0))
    for q in range(n):
        if m.is_probabilistic(q):
            for i in evens:
                if all(m.priority(d) >= i for d in m.successor_states(q)):
                    edges.extend(Edge(copy(q, i), copy(e.dst, i), e.weight, e.prob)
                                 for e in m.successors(q))
                else:
                    edges.append(Edge(copy(q, i), sink, 0, Fraction(1)))
            continue
        edges.append(Edge(q, sink, 0))
        for i in evens:
            edges.append(Edge(copy(q, i), sink, 0))
            for e in m.successors(q):
                if m.priority(e.dst) >= i:
                    edges.append(Edge(q, copy(e.dst, i), e.weight))
                    edges.append(Edge(copy(q, i), copy(e.dst, i), e.weight))

    copies = CopiedMdp(Mdp(states, edges, name=m.name), n, evens)
    log.debug('parity_to_buchi_copies: %d -> %d states, copies %s', n, len(states), evens)
    return copies


class _Phase(object):
    """One solved phase of the two-phase route, in its own coordinates."""

    def __init__(self, model, solution, index=None):
        self.model = model
        self.solution = solution
        self.index = dict(index or {})
        self.inverse = dict((v, k) for k, v in self.index.items())
        self.cap = solution.cap


def _least_cap(m, solution, method):
    """Re-solves ``m`` at the least cap that reproduces the credits of ``solution``."""
    credits = solution.credits
    lo = max([c for c in credits if c is not None] + [1])
    hi = solution.cap
    best = solution
    while lo < hi:
        mid = (lo + hi) // 2
        attempt = solve_energy_buchi_mdp(m, cap=mid, method=method)
        if attempt.credits == credits:
            hi, best = mid, attempt
        else:
            lo = mid + 1
    if best.cap != lo:
        best = solve_energy_buchi_mdp(m, cap=lo, method=method)
    return best


class EnergyParityStrategy(object):
    """

    Witness strategy on the original MDP.

    Memory is (phase, level): the phase is REACH until player 1 commits to
    an even-priority copy i, and i afterwards; the level is the energy
    saturated at that phase's cap. Relay states of the alternating model are
    walked inside ``update``.

    """

    def __init__(self, m, alternating, copies, reach, goal, commit, phases):
        self.model = m
        self.alternating = alternating
        self.copies = copies
        self.reach = reach
        self.goal = goal
        self.commit = commit
        self.phases = phases
        self.relays = relays(alternating, len(m))
        self.relay_of = dict((pair, r) for r, pair in self.relays.items())

    def _cap(self, phase):
        return self.reach.cap if phase == REACH else self.phases[phase].cap

    def _landing(self, v):
        return self.relays[v][1] if v in self.relays else v

    def initial_memory(self, state, credit=0):
        return (REACH, min(self.reach.cap, credit))

    def _next(self, phase, level, q):
        """Successor in the alternating model, and the phase it enters."""
        if phase == REACH:
            s = self.reach.solution.successor(q, level)
            if s == self.goal:
                return self.commit[q]
            return s, REACH
        sub = self.phases[phase]
        node = sub.solution.successor(sub.index[self.copies.copy(q, phase)], level)
        if node is None:
            return None, phase
        return self.copies.provenance(sub.inverse[node])[1], phase

    def choose(self, memory, state):
        phase, level = memory
        v, _ = self._next(phase, level, state)
        if v is None:
            raise ModelError('no winning move at %s with memory %r' % (
                self.model.name_of(state), memory))
        return {self._landing(v): Fraction(1)}

    def update(self, memory, src, dst):
        alt = self.alternating
        if alt.edge(src, dst) is not None:
            path = [src, dst]
        else:
            path = [src, self.relay_of[(src, dst)], dst]
        for u, v in zip(path, path[1:]):
            phase, level = memory
            w = alt.weight(u, v)
            if phase == REACH and alt.is_player1(u):
                target, entered = self._next(phase, level, u)
                if entered != REACH and target == v:
                    memory = (entered, min(self._cap(entered), level + w))
                    continue
            memory = (phase, min(self._cap(phase), level + w))
        return memory


class EnergyParityResult(object):
    """

    winning  - almost-sure winning set Z (states of the input MDP)
    credits  - ``CreditVector`` over the input MDP
    copy     - per state of the projected copy winning sets, the smallest
               even priority whose copy wins there
    cap      - saturation cap shared by every solve
    strategy - ``EnergyParityStrategy`` (built on first use)

    """

    def __init__(self, m, credits, copy, cap, build):
        self.model = m
        self.credits = credits
        self.winning = credits.winning()
        self.copy = copy
        self.cap = cap
        self._build = build
        self._strategy = None
        self._transducer = None

    @property
    def strategy(self):
        if self._strategy is None:
            self._strategy = self._build()
        return self._strategy

    @property
    def transducer(self):
        """The witness tabulated from every winning state at its minimal credit."""
        if self._transducer is None:
            starts = [(q, self.credits[q]) for q in sorted(self.winning)]
            self._transducer = tabulate(self.model, self.strategy, starts)
        return self._transducer

    @property
    def memory_bound(self):
        return 2 * (len(self.winning) + 1) * max(self.model.max_weight, 1)


def solve_energy_parity(m, cap=None, method='fixpoint'):
    """

    Almost-sure winning set, minimal credits and a witness strategy for the
    energy-parity objective.

    cap    - saturation cap shared by every solve, default ``mdp_cap(m)``
    method - energy game engine

    Raises ``RouteMismatchError`` if the one-shot and two-phase routes
    disagree.

    """
    started = time.time()
    require_valid(m, Mdp)
    cap = mdp_cap(m) if cap is None else cap
    n = len(m)
    alternating, _ = make_alternating(m)
    copies = parity_to_buchi_copies(alternating)

    one_shot = solve_energy_buchi_mdp(copies.mdp, cap=cap, method=method)
    credits = one_shot.credits.restricted(range(n))

    phases, copy_credits = {}, {}
    for i in copies.evens:
        sub, index = restrict(copies.mdp, copies.block(i) + [copies.sink])
        solution = solve_energy_buchi_mdp(sub, cap=cap, method=method)
        phases[i] = _Phase(sub, solution, index)
        copy_credits[i] = [solution.credits[index[copies.copy(q, i)]]
                           for q in range(len(alternating))]

    reach_model, goal, commit = _reach_phase(alternating, copies.evens, copy_credits)
    two_phase = solve_energy_buchi_mdp(reach_model, cap=cap, method=method)
    if two_phase.credits.restricted(range(n)) != credits:
        raise RouteMismatchError('one-shot credits %r differ from two-phase credits %r' % (
            list(credits), list(two_phase.credits.restricted(range(n)))))
    log.debug('solve_energy_parity: routes agree on %d states', n)

    copy = {}
    for q in range(n):
        for i in copies.evens:
            if copy_credits[i][q] is not None:
                copy[q] = i
                break

    def build():
        reach = _Phase(reach_model, _least_cap(reach_model, two_phase, method))
        tight = dict((i, _Phase(phase.model, _least_cap(phase.model, phase.solution, method),
                                phase.index))
                     for i, phase in phases.items())
        return EnergyParityStrategy(m, alternating, copies, reach, goal, commit, tight)

    result = EnergyParityResult(m, credits, copy, cap, build)
    log.info('energy-parity: %d states, %d winning, cap %d, %.3fs',
             n, len(result.winning), cap, time.time() - started)
    return result


def _reach_phase(alternating, evens, copy_credits):
    """

    The alternating model with every priority 1 plus an absorbing Büchi goal.

    Each player-1 state that can commit into a winning copy gets an edge to
    the goal weighing the best w(q, q') - credit((q', i)); the commit target
    (q', i) it stands for is recorded.

    """
    taken = set(s.name for s in alternating.states)
    states = [s._replace(priority=1) for s in alternating.states]
    goal = len(states)
    states.append(State(fresh_name(taken, 'goal'), Owner.PLAYER1, 0))
    edges = list(alternating.edges)
    edges.append(Edge(goal, goal, 0))
    commit = {}
    for q in range(len(alternating)):
        if not alternating.is_player1(q):
            continue
        options = []
        for e in alternating.successors(q):
            for i in evens:
                c = copy_credits[i][e.dst]
                if alternating.priority(e.dst) >= i and c is not None:
                    options.append((c - e.weight, i, e.dst))
        if options:
            cost, i, dst = min(options)
            edges.append(Edge(q, goal, -cost))
            commit[q] = (dst, i)
    return Mdp(states, edges, name=alternating.name), goal, commit


def minimal_credit(m, state, cap=None):
    """Energy-parity credit of one state (index or name); None if it is losing."""
    q = m.index(state) if not isinstance(state, int) else state
    if not 0 <= q < len(m):
        raise ModelError('%r is not a state' % (state,))
    return solve_energy_parity(m, cap=cap).credits[q]
