import argparse
import contextlib
import io
import logging
import os
import sys
from fractions import Fraction

from . import __version__
from . import report as reports
from .decomposition import mec_decompose, random_attractor
from .energy import solve_energy_buchi_game
from .energyparity import (RouteMismatchError, minimal_credit, solve_energy_buchi_mdp,
                           solve_energy_parity)
from .meanpayoff import mec_value
from .model import GameGraph, ModelError, Objective, validate
from .modelio import export_dot, load_model, write_model
from .mpparity import (round_strategy, solve_disjunction_energy_parity,
                       solve_disjunction_mp_parity, solve_mp_parity)
from .oracles import definition_mp_parity, product_energy_oracle
from .simulate import random_instance, simulate
from .strategy import FiniteMemoryStrategy, tabulate
from .timeout import GuardRefused, timeout

log = logging.getLogger(__name__)


def rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError('%r is not a rational number' % (text,))


parser = argparse.ArgumentParser(prog='qparity',
                                 description='Solve energy-parity and mean-payoff-parity MDPs.')

parser.add_argument('-v', '--version', action='version', version=__version__)
parser.add_argument('--time-limit', default=None, type=int, metavar='SECONDS', dest='time_limit',
                    help='Give up (exit 3) after this many seconds')
parser.add_argument('--resources', action='store_true',
                    help='Add memory and CPU usage to the report')

commands = parser.add_subparsers(dest='command', metavar='COMMAND')
commands.required = True

p = commands.add_parser('validate', help='Check a model and list what is wrong with it')
p.add_argument('model', help='Model file, or a bundled instance name')

p = commands.add_parser('mec', help='Maximal end-component decomposition')
p.add_argument('model')

p = commands.add_parser('attractor', help='Random attractor of a set of states')
p.add_argument('model')
p.add_argument('--target', action='append', required=True, metavar='STATE',
               help='A target state (repeat for more)')

p = commands.add_parser('mp-value', help='Optimal gain of an end-component')
p.add_argument('model')
p.add_argument('--component', action='append', required=True, metavar='STATE',
               help='A state of the end-component (repeat for more)')

p = commands.add_parser('solve', help='Almost-sure winning sets')
objectives = p.add_subparsers(dest='objective', metavar='OBJECTIVE')
objectives.required = True

o = objectives.add_parser('mp-parity', help='Mean-payoff parity')
o.add_argument('model')
o.add_argument('--threshold', type=rational, required=True, metavar='RAT')
o.add_argument('--strict', action='store_true', help='Require mean payoff > threshold')
o.add_argument('--values', action='store_true', help='Also report winning probabilities')

o = objectives.add_parser('energy-parity', help='Energy parity, with minimal credits')
o.add_argument('model')
o.add_argument('--cap', type=int, default=None, help='Credit saturation cap')
o.add_argument('--method', default='fixpoint', choices=['fixpoint', 'unfold'],
               help='Energy game engine')

o = objectives.add_parser('energy-buchi', help='Energy Büchi (priorities 0 and 1), MDP or game')
o.add_argument('model')
o.add_argument('--cap', type=int, default=None)
o.add_argument('--method', default='fixpoint', choices=['fixpoint', 'unfold'])

o = objectives.add_parser('disjunction-mp-parity', help='Parity or mean payoff')
o.add_argument('model')
o.add_argument('--threshold', type=rational, required=True, metavar='RAT')
o.add_argument('--strict', action='store_true')

o = objectives.add_parser('disjunction-energy-parity', help='Parity or energy')
o.add_argument('model')
o.add_argument('--cap', type=int, default=None)

p = commands.add_parser('min-credit', help='Energy-parity credit of one state')
p.add_argument('model')
p.add_argument('--state', required=True)
p.add_argument('--cap', type=int, default=None)

p = commands.add_parser('oracle', help='Brute-force answers for small instances')
oracles = p.add_subparsers(dest='oracle', metavar='ORACLE')
oracles.required = True
o = oracles.add_parser('energy', help='Energy parity over the (state, credit) product')
o.add_argument('model')
o.add_argument('--cap', type=int, default=None)
o = oracles.add_parser('mp', help='Mean-payoff parity by end-component enumeration')
o.add_argument('model')
o.add_argument('--threshold', type=rational, required=True, metavar='RAT')
o.add_argument('--strict', action='store_true')

p = commands.add_parser('simulate', help='Monte-Carlo runs of a reported strategy')
p.add_argument('model')
p.add_argument('--strategy-from', default=None, metavar='REPORT', dest='strategy_from',
               help='A report carrying a strategy (uniform choices without one)')
p.add_argument('--seed', type=int, default=0)
p.add_argument('--horizon', type=int, default=1000)
p.add_argument('--runs', type=int, default=10)
p.add_argument('--state', default=None, help='Start state (default: the first state)')
p.add_argument('--credit', type=int, default=None,
               help='Initial credit (default: the reported credit of the start state)')

p = commands.add_parser('gen', help='Print a random model')
p.add_argument('--seed', type=int, default=0)
p.add_argument('--states', type=int, default=6)
p.add_argument('--max-weight', type=int, default=3, dest='max_weight')
p.add_argument('--max-priority', type=int, default=4, dest='max_priority')
p.add_argument('--density', type=float, default=0.4)
p.add_argument('--prob-fraction', type=float, default=0.5, dest='prob_fraction')
p.add_argument('--game', action='store_true', help='Two-player game instead of an MDP')

p = commands.add_parser('export-dot', help='Graphviz rendering of a model')
p.add_argument('model')
p.add_argument('--highlight', action='append', default=[], metavar='STATE')
p.add_argument('--highlight-from', default=None, metavar='REPORT', dest='highlight_from',
               help='Fill the winning set of a report and label its credits')


def configure_logger():
    format = '%(asctime)-15s  %(levelname)-8s  %(message)s'
    logging.basicConfig(format=format, level=logging.WARNING)

    log = logging.getLogger('qparity')

    level = os.environ.get('QPARITY_LOGLEVEL', '').upper()
    valid_levels = ['CRITICAL', 'FATAL', 'ERROR', 'WARN',
                    'WARNING', 'INFO', 'DEBUG']

    if level in valid_levels:
        log.setLevel(getattr(logging, level))


def _states(m, names):
    return set(m.index(n) for n in names)


def _read_report(path):
    try:
        with io.open(path, encoding='utf-8') as f:
            return reports.loads(f.read())
    except (IOError, OSError) as e:
        raise ModelError('cannot read %s: %s' % (path, e))


def _trace(m, report):
    names = m.names
    return [{
        'priority': it.priority,
        'candidates': [names(u.states) for u in it.candidates],
        'gains': [reports.rational(g) for g in it.gains],
        'qualified': [names(u.states) for u in it.qualified],
        'win': names(it.win),
        'attractor': names(it.attractor),
        'remaining': names(it.remaining),
    } for it in report.iterations]


def cmd_validate(args, m):
    diagnostics = validate(m)
    return {'valid': not diagnostics, 'diagnostics': [str(d) for d in diagnostics]}


def cmd_mec(args, m):
    return {'components': [{'states': m.names(u.states), 'min_priority': u.min_priority(m)}
                           for u in mec_decompose(m)]}


def cmd_attractor(args, m):
    target = _states(m, args.target)
    return {'target': m.names(target), 'attractor': m.names(random_attractor(m, target))}


def cmd_mp_value(args, m):
    component = _states(m, args.component)
    value = mec_value(m, component)
    return {
        'component': m.names(component),
        'gain': reports.rational(value.gain),
        'bias': reports.per_state(m, value.bias),
        'strategy': reports.transducer(m, FiniteMemoryStrategy.memoryless(value.strategy)),
    }


def cmd_solve_mp_parity(args, m):
    result = solve_mp_parity(m, args.threshold, strict=args.strict, values=args.values)
    out = {
        'threshold': reports.rational(args.threshold),
        'strict': args.strict,
        'almost_sure': m.names(result.almost_sure),
        'win': m.names(result.report.win),
        'components': [{'states': m.names(u.states), 'priority': u.min_priority(m)}
                       for u in result.report.components],
        'trace': _trace(m, result.report),
    }
    if result.values is not None:
        out['values'] = reports.per_state(m, dict(enumerate(result.values)))
    return out


def cmd_solve_energy_parity(args, m):
    result = solve_energy_parity(m, cap=args.cap, method=args.method)
    strategy = result.transducer
    return {
        'winning': m.names(result.winning),
        'credits': result.credits.to_json(m),
        'copy': dict((m.name_of(q), i) for q, i in result.copy.items()),
        'cap': result.cap,
        'strategy': reports.transducer(m, strategy),
        'memory_bound': result.memory_bound,
    }


def cmd_solve_energy_buchi(args, m):
    if isinstance(m, GameGraph):
        solution = solve_energy_buchi_game(m, cap=args.cap, method=args.method)
    else:
        solution = solve_energy_buchi_mdp(m, cap=args.cap, method=args.method)
    winning = solution.credits.winning()
    out = {
        'winning': m.names(winning),
        'credits': solution.credits.to_json(m),
        'cap': solution.cap,
    }
    if isinstance(m, GameGraph):
        starts = [(q, solution.credits[q]) for q in sorted(winning)]
        out['strategy'] = reports.transducer(m, tabulate(m, solution.strategy(), starts))
    return out


def cmd_solve_disjunction_mp_parity(args, m):
    result = solve_disjunction_mp_parity(m, args.threshold, strict=args.strict)
    return {
        'threshold': reports.rational(args.threshold),
        'strict': args.strict,
        'parity': m.names(result.parity),
        'mean_payoff': m.names(result.mean_payoff),
        'win': m.names(result.win),
        'almost_sure': m.names(result.almost_sure),
        'strategy': reports.transducer(m, result.strategy),
    }


def cmd_solve_disjunction_energy_parity(args, m):
    result = solve_disjunction_energy_parity(m, cap=args.cap)
    return {
        'parity': m.names(result.parity),
        'energy': dict((m.name_of(q), c) for q, c in result.energy.items()),
        'parity_route': m.names(result.parity_route),
        'winning': m.names(result.winning),
        'credits': result.credits.to_json(m),
    }


def cmd_min_credit(args, m):
    credit = minimal_credit(m, args.state, cap=args.cap)
    return {'state': args.state, 'credit': credit, 'winnable': credit is not None}


def cmd_oracle_energy(args, m):
    oracle = product_energy_oracle(m, cap=args.cap)
    return {
        'cap': oracle.cap,
        'winning': m.names(oracle.credits.winning()),
        'credits': oracle.credits.to_json(m),
    }


def cmd_oracle_mp(args, m):
    return {
        'threshold': reports.rational(args.threshold),
        'strict': args.strict,
        'almost_sure': m.names(definition_mp_parity(m, args.threshold, strict=args.strict)),
    }


def _objective(source, credit):
    command, result = source['command'], source['result']
    if command == 'solve energy-parity':
        return Objective.energy_parity(credit)
    if command == 'solve mp-parity':
        return Objective.mean_payoff_parity(Fraction(result['threshold']), result['strict'])
    if command == 'solve disjunction-mp-parity':
        return Objective.disjunction(
            Objective.parity(),
            Objective.mean_payoff(Fraction(result['threshold']), result['strict']))
    if command == 'mp-value':
        return Objective.mean_payoff(Fraction(result['gain']))
    return None


def _strategy_from(source, m, start):
    result = source['result']
    if source['command'] == 'solve mp-parity':
        for component in result['components']:
            if m.name_of(start) in component['states']:
                return round_strategy(m, _states(m, component['states']),
                                      Fraction(result['threshold']), strict=result['strict'])
        raise ModelError('%s is in no winning end-component of the report' % m.name_of(start))
    if 'strategy' not in result:
        raise ModelError('a %r report carries no strategy' % (source['command'],))
    return FiniteMemoryStrategy.from_json(result['strategy'], m)


def cmd_simulate(args, m):
    if args.runs < 1:
        raise ModelError('need at least one run, got %r' % (args.runs,))
    start = m.index(args.state) if args.state is not None else 0
    source = _read_report(args.strategy_from) if args.strategy_from else None
    credit = args.credit
    if credit is None:
        credit = 0
        if source is not None:
            credit = source['result'].get('credits', {}).get(m.name_of(start)) or 0
    strategy = _strategy_from(source, m, start) if source is not None else None
    objective = _objective(source, credit) if source is not None else None

    runs = []
    for r in range(args.runs):
        stats = simulate(m, strategy, seed=args.seed + r, horizon=args.horizon,
                         start=start, credit=credit)
        run = {
            'seed': stats.seed,
            'min_energy': stats.min_energy,
            'final_energy': stats.final_energy,
            'running_mean': reports.rational(stats.running_mean),
            'tail_min_priority': stats.tail_min_priority,
            'tail_states': m.names(stats.tail_states),
            'buchi_visits': stats.buchi_visits,
            'max_buchi_gap': stats.max_buchi_gap,
        }
        if objective is not None:
            run['satisfied'] = objective.satisfied_by(stats)
        runs.append(run)

    out = {
        'source': source['command'] if source is not None else None,
        'start': m.name_of(start),
        'credit': credit,
        'horizon': args.horizon,
        'runs': runs,
    }
    if objective is not None:
        out['satisfied'] = sum(1 for run in runs if run['satisfied'])
    return out


def cmd_gen(args):
    m = random_instance(states=args.states, max_weight=args.max_weight,
                        max_priority=args.max_priority, density=args.density,
                        prob_fraction=args.prob_fraction,
                        kind='game' if args.game else 'mdp', seed=args.seed)
    return write_model(m)


def cmd_export_dot(args, m):
    highlight = _states(m, args.highlight)
    annotations = {}
    if args.highlight_from:
        result = _read_report(args.highlight_from)['result']
        for key in ('winning', 'almost_sure'):
            if key in result:
                highlight |= _states(m, result[key])
                break
        for name, c in result.get('credits', {}).items():
            annotations[m.index(name)] = 'c=%d' % c
    return export_dot(m, highlight=highlight, annotations=annotations)


SOLVERS = {
    'mp-parity': cmd_solve_mp_parity,
    'energy-parity': cmd_solve_energy_parity,
    'energy-buchi': cmd_solve_energy_buchi,
    'disjunction-mp-parity': cmd_solve_disjunction_mp_parity,
    'disjunction-energy-parity': cmd_solve_disjunction_energy_parity,
}

ORACLES = {
    'energy': cmd_oracle_energy,
    'mp': cmd_oracle_mp,
}

HANDLERS = {
    'validate': cmd_validate,
    'mec': cmd_mec,
    'attractor': cmd_attractor,
    'mp-value': cmd_mp_value,
    'min-credit': cmd_min_credit,
    'simulate': cmd_simulate,
}


def run(args):
    """Runs one parsed command and returns (exit code, text for stdout)."""
    if args.command == 'gen':
        return 0, cmd_gen(args)

    m = load_model(args.model)
    if args.command == 'export-dot':
        return 0, cmd_export_dot(args, m)

    if args.command == 'solve':
        name = 'solve %s' % args.objective
        result = SOLVERS[args.objective](args, m)
    elif args.command == 'oracle':
        name = 'oracle %s' % args.oracle
        result = ORACLES[args.oracle](args, m)
    else:
        name = args.command
        result = HANDLERS[args.command](args, m)

    report = reports.make_report(name, m, result, with_resources=args.resources)
    problems = reports.check_report(report, m)
    if problems:
        for problem in problems:
            log.error('report check failed: %s', problem)
        return 1, ''
    code = 2 if args.command == 'validate' and not result['valid'] else 0
    return code, reports.dumps(report)


def main(argv=None):
    configure_logger()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code or 0

    try:
        limit = timeout(args.time_limit) if args.time_limit else contextlib.nullcontext()
        with limit:
            code, text = run(args)
    except RouteMismatchError as e:
        log.error('internal inconsistency: %s', e)
        return 1
    except GuardRefused as e:
        log.error('%s', e)
        return 3
    except ModelError as e:
        log.error('%s', e)
        return 2

    sys.stdout.write(text)
    return code

if __name__ == '__main__':
    sys.exit(main())
