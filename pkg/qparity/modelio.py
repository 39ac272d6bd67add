"""
The line-based model format, and DOT export.

    mdp                                   # or: game
    name two-loops
    state q0 owner=p1 priority=1
    state q1 owner=prob priority=1
    edge q0 q1 weight=-10
    edge q1 q0 weight=0 prob=1/2

'#' starts a comment. States must be declared before edges use them;
``prob`` is required exactly on edges leaving probabilistic states.
Semantic checks (distributions summing to 1, totality) are left to
``validate``.
"""
import io
import logging
import os
import re
from fractions import Fraction

from .model import Edge, GameGraph, Mdp, ModelError, Owner, State

log = logging.getLogger(__name__)

DATA = os.path.join(os.path.dirname(__file__), 'data')

BUNDLED = {
    'charge': 'charge.mdp',
    'leak': 'leak.mdp',
    'leak-gadget': 'leak_gadget.game',
}

KINDS = {'mdp': Mdp, 'game': GameGraph}

state_regex = re.compile(r'^state\s+(\S+)\s+owner=(\S+)\s+priority=(\d+)$')
edge_regex = re.compile(r'^edge\s+(\S+)\s+(\S+)\s+weight=([+-]?\d+)(?:\s+prob=(\d+(?:/\d+)?))?$')
name_regex = re.compile(r'^name\s+(.+)$')


class ParseError(ModelError):

    def __init__(self, message, line):
        self.line = line
        super(ParseError, self).__init__('line %d: %s' % (line, message))


def parse_model(text):
    kind = None
    name = None
    states, edges = [], []
    index = {}
    seen = set()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if kind is None:
            if line not in KINDS:
                raise ParseError('expected "mdp" or "game", got %r' % line, lineno)
            kind = KINDS[line]
            continue

        m = state_regex.match(line)
        if m:
            ident, owner, priority = m.groups()
            if '=' in ident:
                raise ParseError('state names cannot contain "="', lineno)
            if ident in index:
                raise ParseError('state %s declared twice' % ident, lineno)
            try:
                owner = Owner(owner)
            except ValueError:
                raise ParseError('unknown owner %r' % owner, lineno)
            if owner not in kind.owners:
                raise ParseError('%s states are not allowed in a %s' % (owner.value, kind.kind), lineno)
            index[ident] = len(states)
            states.append(State(ident, owner, int(priority)))
            continue

        m = edge_regex.match(line)
        if m:
            src, dst, weight, prob = m.groups()
            for ident in (src, dst):
                if ident not in index:
                    raise ParseError('state %s used before its declaration' % ident, lineno)
            src, dst = index[src], index[dst]
            if (src, dst) in seen:
                raise ParseError('duplicate edge %s -> %s' % (states[src].name, states[dst].name), lineno)
            seen.add((src, dst))
            probabilistic = states[src].owner is Owner.PROBABILISTIC
            if prob is not None and not probabilistic:
                raise ParseError('prob on an edge leaving non-probabilistic state %s'
                                 % states[src].name, lineno)
            if prob is None and probabilistic:
                raise ParseError('edge leaving probabilistic state %s needs a prob'
                                 % states[src].name, lineno)
            try:
                prob = None if prob is None else Fraction(prob)
            except ZeroDivisionError:
                raise ParseError('probability %s has a zero denominator' % m.group(4), lineno)
            edges.append(Edge(src, dst, int(weight), prob))
            continue

        m = name_regex.match(line)
        if m and name is None:
            name = m.group(1).strip()
            continue

        raise ParseError('cannot parse %r' % line, lineno)

    if kind is None:
        raise ParseError('empty document', 1)
    log.debug('parse_model: %s with %d states, %d edges', kind.kind, len(states), len(edges))
    return kind(states, edges, name=name)


def write_model(m):
    out = io.StringIO()
    out.write('%s\n' % m.kind)
    if m.name:
        out.write('name %s\n' % m.name)
    for s in m.states:
        out.write('state %s owner=%s priority=%d\n' % (s.name, s.owner.value, s.priority))
    for e in sorted(m.edges, key=lambda e: (e.src, e.dst)):
        out.write('edge %s %s weight=%d' % (m.name_of(e.src), m.name_of(e.dst), e.weight))
        if e.prob is not None:
            out.write(' prob=%s' % e.prob)
        out.write('\n')
    return out.getvalue()


SHAPES = {
    Owner.PLAYER1: 'circle',
    Owner.PROBABILISTIC: 'diamond',
    Owner.PLAYER2: 'box',
}


def _escape(text):
    return str(text).replace('\\', '\\\\').replace('"', '\\"')


def _quote(*parts):
    """Quoted DOT string whose parts are separated by line breaks."""
    return '"%s"' % '\\n'.join(_escape(p) for p in parts)


def export_dot(m, highlight=None, annotations=None):
    """

    Graphviz rendering: owners as shapes, priorities (and any annotation)
    in node labels, weights and probabilities on edges.

    highlight   - states to fill (e.g. a winning set)
    annotations - optional mapping state -> extra label text

    """
    highlight = set(highlight or ())
    annotations = annotations or {}
    out = io.StringIO()
    out.write('digraph %s {\n' % _quote(m.name or m.kind))
    out.write('  rankdir=LR;\n')
    for q, s in enumerate(m.states):
        parts = [s.name, 'p=%d' % s.priority]
        if q in annotations:
            parts.append(annotations[q])
        attrs = ['shape="%s"' % SHAPES[s.owner], 'label=%s' % _quote(*parts)]
        if q in highlight:
            attrs.append('style="filled" fillcolor="lightblue"')
        out.write('  %s [%s];\n' % (_quote(s.name), ' '.join(attrs)))
    for e in m.edges:
        label = str(e.weight) if e.prob is None else '%d : %s' % (e.weight, e.prob)
        out.write('  %s -> %s [label=%s];\n' % (_quote(m.name_of(e.src)), _quote(m.name_of(e.dst)),
                                                _quote(label)))
    out.write('}\n')
    return out.getvalue()


def load_model(source):
    """Reads a model file, or one of the bundled instances by name."""
    path = os.path.join(DATA, BUNDLED[source]) if source in BUNDLED else source
    try:
        with io.open(path, encoding='utf-8') as f:
            text = f.read()
    except (IOError, OSError) as e:
        raise ModelError('cannot read %s: %s' % (source, e))
    return parse_model(text)
