"""
Finite Markov decision processes and two-player game graphs.

States are dense integer indices into ``Model.states``; every state has an
owner, a natural-number priority (min-parity: the least priority seen
infinitely often must be even) and a name used by the text format and the
reports. Edges carry integer weights and, when they leave a probabilistic
state, an exact rational probability.

Models are immutable. Every transform in the package builds a new model.

"""
import enum
import logging
from collections import namedtuple
from fractions import Fraction

import networkx as nx

log = logging.getLogger(__name__)


class ModelError(ValueError):
    pass


class InvalidModelError(ModelError):

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super(InvalidModelError, self).__init__(
            '; '.join(str(d) for d in self.diagnostics))


class InvalidPrefixError(ModelError):
    pass


class Owner(enum.Enum):
    PLAYER1 = 'p1'
    PROBABILISTIC = 'prob'
    PLAYER2 = 'p2'


State = namedtuple('State', 'name owner priority')

Edge = namedtuple('Edge', 'src dst weight prob', defaults=(None,))


class Diagnostic(namedtuple('Diagnostic', 'invariant where message')):

    def __str__(self):
        return '%s at %s: %s' % (self.invariant, self.where, self.message)


class Model(object):
    """

    Common base of ``Mdp`` and ``GameGraph``.

    states  - sequence of ``State``; the position is the state index
    edges   - sequence of ``Edge`` between state indices
    name    - optional model name, carried through transforms and reports

    The constructor does not validate; call ``validate`` (or let any solver
    do it through ``require_valid``) before relying on the invariants.

    """

    kind = None
    owners = ()

    def __init__(self, states, edges, name=None):
        self.states = tuple(State(*s) for s in states)
        self.edges = tuple(sorted((Edge(*e) for e in edges),
                                  key=lambda e: (e.src, e.dst)))
        self.name = name

        n = len(self.states)
        succ = [[] for _ in range(n)]
        pred = [[] for _ in range(n)]
        lookup = {}
        for e in self.edges:
            if 0 <= e.src < n:
                succ[e.src].append(e)
            if 0 <= e.dst < n:
                pred[e.dst].append(e)
            lookup.setdefault((e.src, e.dst), e)
        self._succ = tuple(tuple(s) for s in succ)
        self._pred = tuple(tuple(p) for p in pred)
        self._lookup = lookup
        self._index = {}
        for q, s in enumerate(self.states):
            self._index.setdefault(s.name, q)

    def __len__(self):
        return len(self.states)

    def __eq__(self, other):
        return (type(self) is type(other) and self.states == other.states
                and self.edges == other.edges and self.name == other.name)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.kind, self.states, self.edges, self.name))

    def __repr__(self):
        return '<%s %s: %d states, %d edges>' % (
            type(self).__name__, self.name or '-', len(self), len(self.edges))

    @property
    def max_weight(self):
        return max([abs(e.weight) for e in self.edges] or [0])

    @property
    def max_priority(self):
        return max([s.priority for s in self.states] or [0])

    def successors(self, q):
        return self._succ[q]

    def predecessors(self, q):
        return self._pred[q]

    def successor_states(self, q):
        return tuple(e.dst for e in self._succ[q])

    def edge(self, src, dst):
        return self._lookup.get((src, dst))

    def weight(self, src, dst):
        e = self._lookup.get((src, dst))
        if e is None:
            raise InvalidPrefixError('no edge %s -> %s' % (self._label(src), self._label(dst)))
        return e.weight

    def owner(self, q):
        return self.states[q].owner

    def priority(self, q):
        return self.states[q].priority

    def name_of(self, q):
        return self.states[q].name

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise ModelError('unknown state %r' % (name,))

    def names(self, states):
        return [self.states[q].name for q in sorted(states)]

    def is_player1(self, q):
        return self.states[q].owner is Owner.PLAYER1

    def is_probabilistic(self, q):
        return self.states[q].owner is Owner.PROBABILISTIC

    def is_player2(self, q):
        return self.states[q].owner is Owner.PLAYER2

    def replace(self, states=None, edges=None, name=None):
        return type(self)(self.states if states is None else states,
                          self.edges if edges is None else edges,
                          name=self.name if name is None else name)

    def scaled(self, k):
        """Returns the model with every weight multiplied by ``k``."""
        return self.replace(edges=[e._replace(weight=e.weight * k) for e in self.edges])

    def with_priorities(self, priorities):
        return self.replace(states=[s._replace(priority=p)
                                    for s, p in zip(self.states, priorities)])

    def digraph(self, states=None):
        """The underlying graph as a ``networkx.DiGraph``, optionally induced by ``states``."""
        g = nx.DiGraph()
        if states is None:
            g.add_nodes_from(range(len(self)))
            g.add_edges_from((e.src, e.dst) for e in self.edges)
        else:
            inside = set(states)
            g.add_nodes_from(inside)
            g.add_edges_from((e.src, e.dst) for e in self.edges
                             if e.src in inside and e.dst in inside)
        return g

    def _label(self, q):
        if isinstance(q, int) and 0 <= q < len(self.states):
            return self.states[q].name
        return repr(q)


class Mdp(Model):
    kind = 'mdp'
    owners = (Owner.PLAYER1, Owner.PROBABILISTIC)

    def distribution(self, q):
        return dict((e.dst, e.prob) for e in self._succ[q])

    def with_distributions(self, distributions):
        """

        Replaces the probabilities of the given probabilistic states.

        distributions - mapping state -> {successor: Fraction}; the support
                        must be the existing one

        """
        edges = []
        for e in self.edges:
            if e.src in distributions:
                e = e._replace(prob=Fraction(distributions[e.src][e.dst]))
            edges.append(e)
        return self.replace(edges=edges)


class GameGraph(Model):
    kind = 'game'
    owners = (Owner.PLAYER1, Owner.PLAYER2)


def validate(m):
    """

    Checks the model invariants and returns a list of ``Diagnostic``; the
    list is empty iff the model is well formed.

    """
    found = []

    def report(invariant, where, message):
        found.append(Diagnostic(invariant, where, message))

    n = len(m.states)
    seen_names = set()
    for q, s in enumerate(m.states):
        where = 'state %s' % (s.name,)
        if not s.name or any(c.isspace() for c in str(s.name)) or '=' in str(s.name):
            report('name', 'state #%d' % q, 'state names must be non-empty tokens')
        elif s.name in seen_names:
            report('name', where, 'duplicate state name')
        seen_names.add(s.name)
        if s.owner not in m.owners:
            report('owner', where, '%s states are not allowed in a %s' % (
                getattr(s.owner, 'value', s.owner), m.kind))
        if isinstance(s.priority, bool) or not isinstance(s.priority, int) or s.priority < 0:
            report('priority', where, 'priority must be a natural number, got %r' % (s.priority,))

    pairs = set()
    for e in m.edges:
        where = 'edge %s -> %s' % (m._label(e.src), m._label(e.dst))
        if not (isinstance(e.src, int) and 0 <= e.src < n and isinstance(e.dst, int) and 0 <= e.dst < n):
            report('edge-endpoint', where, 'edge endpoint is not a state')
            continue
        if (e.src, e.dst) in pairs:
            report('duplicate-edge', where, 'edge declared more than once')
        pairs.add((e.src, e.dst))
        if isinstance(e.weight, bool) or not isinstance(e.weight, int):
            report('weight', where, 'weight must be an integer, got %r' % (e.weight,))
        if m.states[e.src].owner is Owner.PROBABILISTIC:
            if e.prob is None:
                report('distribution', where, 'edge from a probabilistic state needs a probability')
            elif not (0 < e.prob <= 1):
                report('distribution', where, 'probability %s outside (0, 1]' % (e.prob,))
        elif e.prob is not None:
            report('distribution', where, 'only probabilistic states carry probabilities')

    for q in range(n):
        out = m.successors(q)
        if not out:
            report('totality', 'state %s' % m.name_of(q), 'no outgoing edge')
        elif m.states[q].owner is Owner.PROBABILISTIC:
            probs = [e.prob for e in out]
            if None not in probs and sum(probs) != 1:
                report('distribution', 'state %s' % m.name_of(q),
                       'probabilities sum to %s, not 1' % (sum(probs),))
    return found


def require_valid(m, kind=None):
    if kind is not None and not isinstance(m, kind):
        raise ModelError('expected a %s, got a %s' % (kind.kind, type(m).kind))
    problems = validate(m)
    if problems:
        raise InvalidModelError(problems)
    return m


def energy_level(m, prefix, weights=None):
    """

    Sum of the edge weights along a play prefix.

    weights - optional mapping (src, dst) -> weight overriding the model's

    """
    prefix = list(prefix)
    if not prefix:
        raise InvalidPrefixError('empty play prefix')
    for q in prefix:
        if not (isinstance(q, int) and 0 <= q < len(m)):
            raise InvalidPrefixError('%r is not a state' % (q,))
    total = 0
    for src, dst in zip(prefix, prefix[1:]):
        w = m.weight(src, dst)
        if weights is not None and (src, dst) in weights:
            w = weights[(src, dst)]
        total += w
    return total


def running_mean(m, prefix):
    prefix = list(prefix)
    if len(prefix) < 2:
        raise InvalidPrefixError('running mean needs at least one step')
    return Fraction(energy_level(m, prefix), len(prefix) - 1)


class Objective(namedtuple('Objective', 'kind credit threshold strict parts')):
    """

    Objectives as data, with an empirical check against a simulated run.

    Use the constructors (``Objective.parity()``, ``Objective.energy(c0)``,
    ``Objective.mean_payoff(nu, strict)``, ``Objective.energy_parity(c0)``,
    ``Objective.mean_payoff_parity(nu, strict)``, ``Objective.disjunction(...)``)
    rather than the raw tuple.

    """

    KINDS = ('parity', 'energy', 'mean-payoff', 'energy-parity',
             'mean-payoff-parity', 'disjunction')

    @classmethod
    def parity(cls):
        return cls('parity', None, None, False, ())

    @classmethod
    def energy(cls, credit):
        return cls('energy', _credit(credit), None, False, ())

    @classmethod
    def mean_payoff(cls, threshold, strict=False):
        return cls('mean-payoff', None, Fraction(threshold), bool(strict), ())

    @classmethod
    def energy_parity(cls, credit):
        return cls('energy-parity', _credit(credit), None, False, ())

    @classmethod
    def mean_payoff_parity(cls, threshold, strict=False):
        return cls('mean-payoff-parity', None, Fraction(threshold), bool(strict), ())

    @classmethod
    def disjunction(cls, *parts):
        if len(parts) < 2:
            raise ModelError('a disjunction needs at least two objectives')
        return cls('disjunction', None, None, False, tuple(parts))

    def satisfied_by(self, stats):
        """Evaluates the objective on the finite evidence of a ``RunStats``."""
        if self.kind == 'disjunction':
            return any(part.satisfied_by(stats) for part in self.parts)
        checks = []
        if self.kind in ('parity', 'energy-parity', 'mean-payoff-parity'):
            checks.append(stats.tail_min_priority % 2 == 0)
        if self.kind in ('energy', 'energy-parity'):
            checks.append(stats.min_energy - stats.credit + self.credit >= 0)
        if self.kind in ('mean-payoff', 'mean-payoff-parity'):
            if self.strict:
                checks.append(stats.running_mean > self.threshold)
            else:
                checks.append(stats.running_mean >= self.threshold)
        return all(checks)


def _credit(credit):
    if isinstance(credit, bool) or not isinstance(credit, int) or credit < 0:
        raise ModelError('initial credit must be a natural number, got %r' % (credit,))
    return credit
