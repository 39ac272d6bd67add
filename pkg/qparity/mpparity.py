"""
Almost-sure mean-payoff parity in MDPs, and the two disjunctive objectives.

An end-component is winning for mean-payoff parity when its least priority
is even and its optimal gain meets the threshold. ``winning_end_components``
collects them priority by priority, removing the random attractor of what
it found before moving to the next even priority; the almost-sure set is
then the almost-sure reachability set of their union.
"""
import logging
import time
from collections import namedtuple
from fractions import Fraction

from .decomposition import (almost_sure_reach, mec_decompose, random_attractor, reach_strategy,
                            reach_value, restrict)
from .energy import CreditVector
from .energyparity import mdp_cap, solve_energy_buchi_mdp, solve_energy_mdp
from .meanpayoff import end_component, mec_value
from .model import Edge, Mdp, ModelError, Owner, State, require_valid
from .strategy import FiniteMemoryStrategy
from .transforms import fresh_name

log = logging.getLogger(__name__)


class NotQualifiedError(ModelError):
    pass


def meets(gain, threshold, strict=False):
    return gain > threshold if strict else gain >= threshold


Iteration = namedtuple('Iteration', 'priority candidates gains qualified win attractor remaining')
Iteration.__doc__ = """
priority   - the even priority 2i handled in this iteration
candidates - end-components of the current sub-MDP inside priorities >= 2i
             that contain priority 2i
gains      - optimal gain of each candidate
qualified  - the candidates whose gain meets the threshold
win        - union of the qualified candidates
attractor  - random attractor of ``win`` inside the current sub-MDP
remaining  - states of the next sub-MDP
"""


class WinningEcReport(object):

    def __init__(self, threshold, strict, iterations):
        self.threshold = threshold
        self.strict = strict
        self.iterations = list(iterations)
        self.win = frozenset().union(*[it.win for it in self.iterations])

    @property
    def components(self):
        return [u for it in self.iterations for u in it.qualified]


def winning_end_components(m, threshold, strict=False):
    """

    threshold - rational ν
    strict    - require gain > ν instead of gain >= ν

    Iteration i looks at the states of the current sub-MDP with priority at
    least 2i; its maximal end-components that contain priority 2i are the
    candidates, and those with enough gain are winning. Their random
    attractor is removed before the next iteration.

    """
    require_valid(m, Mdp)
    threshold = Fraction(threshold)
    alive = frozenset(range(len(m)))
    iterations = []
    for p in range(0, m.max_priority + 1, 2):
        pool = [q for q in alive if m.priority(q) >= p]
        candidates = [u for u in mec_decompose(m, pool)
                      if any(m.priority(q) == p for q in u)]
        gains = [mec_value(m, u).gain for u in candidates]
        qualified = [u for u, g in zip(candidates, gains) if meets(g, threshold, strict)]
        win = frozenset().union(*[u.states for u in qualified])
        attractor = frozenset(random_attractor(m, win, within=alive))
        remaining = alive - attractor
        iterations.append(Iteration(p, candidates, gains, qualified, win, attractor, remaining))
        log.debug('winning_end_components: priority %d, %d candidates, %d qualified, %d removed',
                  p, len(candidates), len(qualified), len(attractor))
        alive = remaining
    return WinningEcReport(threshold, strict, iterations)


MpParityResult = namedtuple('MpParityResult', 'report almost_sure values')


def solve_mp_parity(m, threshold, strict=False, values=False):
    """

    Almost-sure winning set of the mean-payoff parity objective.

    values - also compute the maximal probability of the objective per state

    """
    started = time.time()
    report = winning_end_components(m, threshold, strict)
    sure = frozenset(almost_sure_reach(m, report.win))
    probabilities = reach_value(m, report.win) if values else None
    log.info('mp-parity: %d states, %d almost-sure, %.3fs', len(m), len(sure), time.time() - started)
    return MpParityResult(report, sure, probabilities)


SEEK, PLAY = 'seek', 'play'

RoundStrategyState = namedtuple('RoundStrategyState', 'round stage steps k length eps')


def cube(i):
    return i ** 3


class RoundStrategy(object):
    """

    Infinite-memory strategy inside a winning end-component.

    Round i first plays ``seek`` until a state of the component's least
    priority is reached, taking k_i steps, then plays ``play`` (an optimal
    gain strategy) for ℓ_i = max(schedule(i), i·k_i·W) steps.

    """

    def __init__(self, m, component, priority, seek, play, schedule=cube):
        self.model = m
        self.component = component
        self.priority = priority
        self.seek = seek
        self.play = play
        self.schedule = schedule
        self.weight = m.max_weight

    def initial_memory(self, state, credit=0):
        return RoundStrategyState(1, SEEK, 0, 0, 0, Fraction(1))

    def _advance(self, memory, state):
        while True:
            if memory.stage == SEEK and self.model.priority(state) == self.priority:
                i = memory.round
                length = max(self.schedule(i), i * memory.steps * self.weight)
                memory = memory._replace(stage=PLAY, k=memory.steps, steps=0, length=length)
            elif memory.stage == PLAY and memory.steps >= memory.length:
                i = memory.round + 1
                memory = RoundStrategyState(i, SEEK, 0, 0, 0, Fraction(1, i))
            else:
                return memory

    def choose(self, memory, state):
        if state not in self.component:
            raise ModelError('%s is outside the end-component' % self.model.name_of(state))
        memory = self._advance(memory, state)
        table = self.seek if memory.stage == SEEK else self.play
        return {table[state]: Fraction(1)}

    def update(self, memory, src, dst):
        memory = self._advance(memory, src)
        return memory._replace(steps=memory.steps + 1)


def round_strategy(m, component, threshold, strict=False, schedule=cube):
    component = end_component(m, component)
    least = component.min_priority(m)
    if least % 2:
        raise NotQualifiedError('least priority %d of %s is odd' % (least, m.names(component.states)))
    value = mec_value(m, component)
    if not meets(value.gain, Fraction(threshold), strict):
        raise NotQualifiedError('gain %s of %s does not meet %s' % (
            value.gain, m.names(component.states), threshold))
    targets = set(q for q in component if m.priority(q) == least)
    seek = reach_strategy(m, targets, within=component.states)
    return RoundStrategy(m, component, least, seek, value.strategy, schedule)


def good_end_components(m, within=None):
    """

    End-components that are almost-sure winning for parity alone: for each
    even priority p, the maximal end-components of the states with priority
    at least p that contain priority p.

    Returns a list of (p, EndComponent).

    """
    alive = set(range(len(m)) if within is None else within)
    found = []
    for p in range(0, m.max_priority + 1, 2):
        pool = [q for q in alive if m.priority(q) >= p]
        for u in mec_decompose(m, pool):
            if any(m.priority(q) == p for q in u):
                found.append((p, u))
    return found


DisjunctionResult = namedtuple('DisjunctionResult', 'parity mean_payoff win almost_sure strategy')


def solve_disjunction_mp_parity(m, threshold, strict=False):
    """

    Almost-sure winning set of parity OR mean payoff >= ν (> ν if strict),
    with a memoryless randomized witness.

    """
    require_valid(m, Mdp)
    threshold = Fraction(threshold)
    parity = good_end_components(m)
    mean_payoff = []
    for u in mec_decompose(m):
        value = mec_value(m, u)
        if meets(value.gain, threshold, strict):
            mean_payoff.append((u, value))
    win = frozenset().union(*[u.states for _, u in parity] + [u.states for u, _ in mean_payoff])
    sure = frozenset(almost_sure_reach(m, win))

    choices = {}
    for _, u in parity:
        for q, succ in u.retained.items():
            if q not in choices:
                choices[q] = dict((d, Fraction(1, len(succ))) for d in succ)
    for u, value in mean_payoff:
        for q in u.retained:
            if q not in choices:
                choices[q] = value.strategy[q]
    for q, d in reach_strategy(m, win, within=sure).items():
        choices.setdefault(q, d)
    strategy = FiniteMemoryStrategy.memoryless(choices)
    log.info('disjunction mp-parity: %d states, %d almost-sure', len(m), len(sure))
    return DisjunctionResult(frozenset().union(*[u.states for _, u in parity]),
                             frozenset().union(*[u.states for u, _ in mean_payoff]),
                             win, sure, strategy)


EnergyDisjunctionResult = namedtuple('EnergyDisjunctionResult',
                                     'parity energy parity_route winning credits')
EnergyDisjunctionResult.__doc__ = """
parity      - W1, union of the end-components winning parity almost surely
energy      - W2, in-component energy credits of the end-component states
              winning the energy objective (state -> credit)
parity_route - states reaching W1 almost surely (credit 0)
winning     - almost-sure winning set
credits     - ``CreditVector``, the least credit over both routes
"""


def solve_disjunction_energy_parity(m, cap=None):
    """

    Almost-sure winning set of parity OR energy, with minimal credits.

    Parity route: almost-sure reachability of W1, at credit 0. Once a play is
    there the energy no longer matters, so in the energy route every move
    into that region wins outright, even one that overdraws. Otherwise the
    energy route must reach a W2 state with at least its in-component credit
    without the energy ever going negative.

    """
    require_valid(m, Mdp)
    cap = mdp_cap(m) if cap is None else cap
    parity = frozenset().union(*[u.states for _, u in good_end_components(m)])
    parity_route = frozenset(almost_sure_reach(m, parity))

    energy = {}
    for u in mec_decompose(m):
        sub, index = restrict(m, u.states)
        credits = solve_energy_mdp(sub, cap=cap).credits
        for q, k in index.items():
            if credits[k] is not None:
                energy[q] = credits[k]

    thresholds = dict((q, c) for q, c in energy.items() if q not in parity_route)
    reach_credits = _energy_reach(m, thresholds, parity_route, cap)

    credits = []
    for q in range(len(m)):
        options = [c for c in (0 if q in parity_route else None, reach_credits[q]) if c is not None]
        credits.append(min(options) if options else None)
    credits = CreditVector(credits)
    log.info('disjunction energy-parity: %d states, %d winning', len(m), len(credits.winning()))
    return EnergyDisjunctionResult(parity, energy, parity_route, credits.winning(), credits)


def _energy_reach(m, thresholds, safe, cap):
    """

    Least credits to reach, keeping the energy non-negative, either a state
    of ``safe`` (the move into it may overdraw) or some target t with level
    at least thresholds[t].

    Moves into ``safe`` go to an absorbing Büchi goal with weight 0. Each
    target t becomes a player-1 state choosing between settling (an edge of
    weight -thresholds[t] to the goal) and carrying on through a copy of t
    with t's outgoing edges. Every other priority is 1.

    """
    if not thresholds and not safe:
        return CreditVector([None] * len(m))
    n = len(m)
    taken = set(s.name for s in m.states)
    states = [State(s.name, Owner.PLAYER1 if q in thresholds else s.owner, 1)
              for q, s in enumerate(m.states)]
    goal = len(states)
    states.append(State(fresh_name(taken, 'goal'), Owner.PLAYER1, 0))
    edges = [Edge(goal, goal, 0)]
    carry = {}
    for q in sorted(thresholds):
        carry[q] = len(states)
        states.append(State(fresh_name(taken, '%s+' % m.name_of(q)), m.owner(q), 1))
        edges.append(Edge(q, goal, -thresholds[q]))
        edges.append(Edge(q, carry[q], 0))

    into_goal = {}
    for e in m.edges:
        src = carry.get(e.src, e.src)
        if e.dst in safe:
            into_goal[src] = into_goal.get(src, 0) + (e.prob or 0)
        else:
            edges.append(e._replace(src=src))
    for src, p in sorted(into_goal.items()):
        probabilistic = states[src].owner is Owner.PROBABILISTIC
        edges.append(Edge(src, goal, 0, Fraction(p) if probabilistic else None))

    reach = Mdp(states, edges, name=m.name)
    return solve_energy_buchi_mdp(reach, cap=cap).credits.restricted(range(n))
