import contextlib
import io
import json
import tempfile

from .helpers import *
from qparity.command import main
from qparity.model import validate
from qparity.modelio import parse_model

BROKEN = 'mdp\nstate a owner=prob priority=0\nedge a a weight=0 prob=1/2\n'


def qparity(*argv):
    with patch('sys.stdout', new_callable=io.StringIO) as out:
        with patch('sys.stderr', new_callable=io.StringIO):
            code = main(list(argv))
    return code, out.getvalue()


def result_of(*argv):
    code, out = qparity(*argv)
    assert_equal(code, 0)
    return json.loads(out)['result']


@contextlib.contextmanager
def written(text, suffix='.json'):
    with tempfile.NamedTemporaryFile(mode='w', suffix=suffix) as f:
        f.write(text)
        f.flush()
        yield f.name


class TestSolve(object):

    def test_energy_parity_on_charge(self):
        code, out = qparity('solve', 'energy-parity', 'charge')
        assert_equal(code, 0)
        doc = json.loads(out)
        assert_equal(doc['command'], 'solve energy-parity')
        assert_equal(doc['result']['credits'], {'q0': 0, 'q1': 10, 'q2': 10})
        assert_equal(doc['result']['winning'], ['q0', 'q1', 'q2'])

    def test_same_input_same_bytes(self):
        assert_equal(qparity('solve', 'energy-parity', 'leak'), qparity('solve', 'energy-parity', 'leak'))

    def test_mp_parity_on_leak(self):
        assert_equal(result_of('solve', 'mp-parity', 'leak', '--threshold', '0')['almost_sure'],
                     ['a', 'b'])
        assert_equal(result_of('solve', 'mp-parity', 'leak', '--threshold', '0',
                               '--strict')['almost_sure'], [])

    def test_mp_parity_values_and_trace(self):
        result = result_of('solve', 'mp-parity', 'leak', '--threshold', '1/2', '--values')
        assert_equal(result['threshold'], '1/2')
        assert_equal(result['values'], {'a': '0', 'b': '0'})
        assert_equal([it['priority'] for it in result['trace']], [0])

    def test_energy_buchi_game(self):
        result = result_of('solve', 'energy-buchi', 'leak-gadget')
        assert_equal(result['winning'], ['a:L', 'b'])
        assert_equal(result['strategy']['type'], 'transducer')

    def test_disjunctions(self):
        result = result_of('solve', 'disjunction-energy-parity', 'leak')
        assert_equal(result['credits'], {'a': 0, 'b': 0})
        result = result_of('solve', 'disjunction-mp-parity', 'leak', '--threshold', '0')
        assert_equal(result['almost_sure'], ['a', 'b'])

    def test_min_credit(self):
        result = result_of('min-credit', 'charge', '--state', 'q1')
        assert_equal(result['credit'], 10)
        assert_true(result['winnable'])

    def test_resources(self):
        code, out = qparity('--resources', 'solve', 'energy-parity', 'leak')
        assert_in('rss', json.loads(out)['resources'])


class TestAnalysis(object):

    def test_mec(self):
        assert_equal(result_of('mec', 'charge')['components'],
                     [{'states': ['q0', 'q1', 'q2'], 'min_priority': 0}])

    def test_attractor(self):
        assert_equal(result_of('attractor', 'leak', '--target', 'b')['attractor'], ['a', 'b'])

    def test_mp_value(self):
        result = result_of('mp-value', 'charge', '--component', 'q0', '--component', 'q1',
                           '--component', 'q2')
        assert_equal(result['gain'], '1')

    def test_oracles(self):
        assert_equal(result_of('oracle', 'energy', 'charge')['credits'],
                     {'q0': 0, 'q1': 10, 'q2': 10})
        assert_equal(result_of('oracle', 'mp', 'leak', '--threshold', '0')['almost_sure'],
                     ['a', 'b'])


class TestValidate(object):

    def test_valid(self):
        assert_true(result_of('validate', 'charge')['valid'])

    def test_invalid(self):
        with written(BROKEN, suffix='.mdp') as path:
            code, out = qparity('validate', path)
        assert_equal(code, 2)
        assert_equal(len(json.loads(out)['result']['diagnostics']), 1)


class TestExitCodes(object):

    def test_solving_an_invalid_model(self):
        with written(BROKEN, suffix='.mdp') as path:
            assert_equal(qparity('solve', 'energy-parity', path), (2, ''))

    def test_missing_model(self):
        assert_equal(qparity('mec', '/nonexistent.mdp')[0], 2)

    def test_usage_error(self):
        assert_equal(qparity('solve', 'mp-parity', 'leak')[0], 2)

    def test_version(self):
        assert_equal(qparity('--version')[0], 0)

    def test_guard_refused(self):
        assert_equal(qparity('oracle', 'energy', 'charge', '--cap', '100000'), (3, ''))

    @patch('qparity.command.timeout', fake_timeout_fail)
    def test_time_limit(self):
        assert_equal(qparity('--time-limit', '1', 'solve', 'energy-parity', 'charge'), (3, ''))

    def test_time_limit_failing_when_armed(self):
        from qparity.timeout import TimeoutError
        with patch('qparity.command.timeout', side_effect=TimeoutError('expired')):
            assert_equal(qparity('--time-limit', '1', 'mec', 'charge'), (3, ''))

    def test_route_mismatch(self):
        from qparity.energyparity import RouteMismatchError
        with patch('qparity.command.solve_energy_parity', side_effect=RouteMismatchError('differ')):
            assert_equal(qparity('solve', 'energy-parity', 'charge'), (1, ''))

    @patch('qparity.command.reports.check_report')
    def test_inconsistent_report(self, check_mock):
        check_mock.return_value = ['credits on losing states']
        assert_equal(qparity('solve', 'energy-parity', 'leak'), (1, ''))


class TestSimulate(object):

    def test_energy_parity_strategy(self):
        with written(qparity('solve', 'energy-parity', 'charge')[1]) as path:
            result = result_of('simulate', 'charge', '--strategy-from', path, '--state', 'q1',
                               '--horizon', '2000', '--runs', '2')
        assert_equal(result['credit'], 10)
        assert_equal(result['satisfied'], 2)
        assert_true(all(run['min_energy'] >= 0 for run in result['runs']))

    def test_mp_parity_strategy(self):
        with written(qparity('solve', 'mp-parity', 'leak', '--threshold', '0')[1]) as path:
            result = result_of('simulate', 'leak', '--strategy-from', path, '--state', 'b',
                               '--horizon', '100', '--runs', '2')
            assert_equal(result['satisfied'], 2)
            assert_equal(qparity('simulate', 'leak', '--strategy-from', path)[0], 2)

    def test_uniform_choices(self):
        result = result_of('simulate', 'leak', '--runs', '3', '--horizon', '200')
        assert_equal(result['source'], None)
        assert_equal(len(result['runs']), 3)
        assert_true('satisfied' not in result)


class TestGenAndExport(object):

    def test_gen(self):
        code, out = qparity('gen', '--seed', '3', '--states', '5')
        assert_equal(code, 0)
        assert_equal(validate(parse_model(out)), [])
        assert_equal(qparity('gen', '--seed', '3', '--states', '5')[1], out)

    def test_export_highlights_a_report(self):
        with written(qparity('solve', 'energy-parity', 'leak')[1]) as path:
            code, dot = qparity('export-dot', 'leak', '--highlight-from', path)
        assert_equal(code, 0)
        assert_equal(dot.count('fillcolor'), 1)
        assert_in('c=0', dot)
