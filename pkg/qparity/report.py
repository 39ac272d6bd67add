"""
JSON result reports.

A report is a plain dict:

    {"schema": "qparity-report/1",
     "command": "solve energy-parity",
     "model": {"name": ..., "kind": ..., "states": [...], "max_weight": W, "max_priority": d},
     "result": {...}}

Sets of states are lists of names in index order, rationals are "a/b"
strings, and ``dumps`` sorts keys, so equal inputs give equal bytes.
"""
import json
import logging
from fractions import Fraction

import psutil

from .model import ModelError
from .strategy import FiniteMemoryStrategy

log = logging.getLogger(__name__)

SCHEMA = 'qparity-report/1'

# Result keys holding sets of states.
SET_KEYS = ('winning', 'almost_sure', 'win', 'parity', 'mean_payoff', 'parity_route',
            'attractor', 'target', 'component', 'tail_states')

# Result keys holding a per-state credit that only winning states may carry.
CREDIT_KEYS = ('credits',)


def rational(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else '%d/%d' % (x.numerator, x.denominator)


def per_state(m, mapping, convert=rational):
    return dict((m.name_of(q), convert(v)) for q, v in mapping.items())


def transducer(m, strategy):
    doc = strategy.to_json(m)
    doc['size'] = strategy.size
    return doc


def resources():
    proc = psutil.Process()
    times = proc.cpu_times()
    return {
        'rss': proc.memory_info().rss,
        'cpu_user': round(times.user, 3),
        'cpu_system': round(times.system, 3),
    }


def make_report(command, m, result, with_resources=False):
    report = {
        'schema': SCHEMA,
        'command': command,
        'model': {
            'name': m.name,
            'kind': m.kind,
            'states': [s.name for s in m.states],
            'max_weight': m.max_weight,
            'max_priority': m.max_priority,
        },
        'result': result,
    }
    if with_resources:
        report['resources'] = resources()
    return report


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2, separators=(',', ': ')) + '\n'


def loads(text):
    try:
        report = json.loads(text)
    except ValueError as e:
        raise ModelError('not a JSON report: %s' % e)
    if not isinstance(report, dict) or report.get('schema') != SCHEMA:
        raise ModelError('not a %s report' % SCHEMA)
    return report


def check_report(report, m):
    """

    Re-validates a report against its model and returns a list of problems
    (empty when the report is consistent): every set of states is a subset
    of the model's states, credits only appear on winning states, and every
    strategy table respects the model's edges.

    """
    problems = []
    if report.get('schema') != SCHEMA:
        problems.append('schema is %r' % (report.get('schema'),))
    known = set(s.name for s in m.states)
    result = report.get('result', {})

    for key in SET_KEYS:
        if key in result:
            extra = set(result[key]) - known
            if extra:
                problems.append('%s names unknown states %s' % (key, sorted(extra)))

    for key in CREDIT_KEYS:
        if key not in result:
            continue
        credits = result[key]
        extra = set(credits) - known
        if extra:
            problems.append('%s names unknown states %s' % (key, sorted(extra)))
        if 'winning' in result:
            outside = set(credits) - set(result['winning'])
            if outside:
                problems.append('credits on losing states %s' % sorted(outside))
        negative = sorted(q for q, c in credits.items() if c is None or c < 0)
        if negative:
            problems.append('credits are not natural numbers at %s' % negative)

    doc = result.get('strategy')
    if isinstance(doc, dict) and doc.get('type') == 'transducer':
        try:
            strategy = FiniteMemoryStrategy.from_json(doc, m)
        except (ModelError, KeyError, ValueError, TypeError) as e:
            problems.append('strategy table does not load: %s' % e)
        else:
            problems.extend('strategy: %s' % p for p in strategy.check(m))

    log.debug('check_report: %d problems', len(problems))
    return problems
