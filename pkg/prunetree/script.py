"""The ``prunetree`` command line.

The subcommands live on :class:`CommandLineEnvironment`;
:class:`GenericArgparseImplementation` parses ``argv`` and maps the
outcome to an exit code. The Django management command reuses the same
implementation.
"""

import argparse
import json
import logging
import sys

import numpy as np

from prunetree import formats
from prunetree.annihilation import evolve, shock_tree
from prunetree.env import get_env
from prunetree.exceptions import PruneTreeError
from prunetree.gw import ClosedForm, GwParams, sample_exp_excursion, sample_gw
from prunetree.harris import harris_path, level_set_tree
from prunetree.potential import Potential
from prunetree.pruning import prune, prune_mass_equipped
from prunetree.sinks import simulate_sinks
from prunetree.svg import render_svg
from prunetree.tree import trees_close
from prunetree.verify import SUITES, run_suites


__all__ = ('CommandError', 'UsageError', 'VerificationFailed',
           'CommandLineEnvironment', 'GenericArgparseImplementation', 'run',
           'main', 'EXIT_OK', 'EXIT_ERROR', 'EXIT_VERIFY', 'EXIT_USAGE',
           'VERBOSITY')


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY = 2
EXIT_USAGE = 64

FORMATS = ('json', 'csv', 'newick', 'svg')
FORMULAS = ('ell', 'p-length', 'p-height', 'p-horton', 'xi', 'mu')
EMITS = ('potential', 'masstree', 'trajectories', 'shocktree-svg')
PHIS = ('height', 'horton', 'length', 'leaves')
VERBOSITY = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG}


class CommandError(Exception):
    pass


class UsageError(CommandError):
    pass


class VerificationFailed(CommandError):
    pass


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting, so usage errors get their own code."""

    def error(self, message):
        raise UsageError('%s\n%s' % (self.format_usage().rstrip(), message))


def _open_input(name):
    if name == '-':
        return sys.stdin.read()
    try:
        with open(name) as fp:
            return fp.read()
    except OSError as e:
        raise CommandError('cannot read %s: %s' % (name, e))


def _load_json(text, name):
    try:
        return json.loads(text)
    except ValueError as e:
        raise CommandError('%s is not valid JSON: %s' % (name, e))


def _parse_sample_spec(text):
    """``sample:lambda=1.5[,seed=3]`` into a dict of floats/ints."""
    values = {}
    for item in filter(None, text[len('sample:'):].split(',')):
        key, sep, value = item.partition('=')
        if not sep:
            raise UsageError('malformed potential source %r' % text)
        values[key.strip()] = value.strip()
    try:
        lam = float(values.pop('lambda'))
        seed = int(values.pop('seed')) if 'seed' in values else None
    except (KeyError, ValueError):
        raise UsageError('potential source %r needs lambda=<real>' % text)
    if values:
        raise UsageError('unknown keys in potential source: %s' %
                         ', '.join(sorted(values)))
    return lam, seed


def _grid(text):
    try:
        start, stop, num = text.split(':')
        return np.linspace(float(start), float(stop), int(num))
    except ValueError:
        raise UsageError('--grid expects start:stop:count, got %r' % text)


class CommandLineEnvironment(object):
    """Implements the subcommands.

    ``env`` is a :class:`~prunetree.env.Environment`; output goes to
    ``out`` and messages to ``log``.
    """

    def __init__(self, env, log, out=None):
        self.environment = env
        self.log = log
        self.out = out if out is not None else sys.stdout
        self.commands = {
            'sample-gw': self.sample_gw,
            'prune': self.prune,
            'annihilate': self.annihilate,
            'eval': self.eval,
            'verify': self.verify,
            'roundtrip': self.roundtrip,
        }

    def invoke(self, command, args):
        try:
            function = self.commands[command]
        except KeyError:
            raise UsageError('unknown command: %s' % command)
        return function(**args)

    def _write(self, text):
        self.out.write(text if text.endswith('\n') else text + '\n')

    def _params(self, lam, stream=0):
        env = self.environment
        return GwParams(lam, env.seed, stream, env.node_cap)

    def _require(self, fmt, allowed, command):
        fmt = fmt or allowed[0]
        if fmt not in allowed:
            raise UsageError('%s cannot write %s output (use %s)' % (
                command, fmt, ' or '.join(allowed)))
        return fmt

    def sample_gw(self, lam, n=1, format=None):
        """Sample ``n`` trees, one per line; tree ``i`` uses stream ``i``."""
        fmt = self._require(format, ('json', 'newick'), 'sample-gw')
        for i in range(n):
            tree = sample_gw(self._params(lam, i))
            if fmt == 'json':
                self._write(json.dumps(formats.tree_to_dict(tree),
                                       sort_keys=True))
            else:
                self._write(formats.to_newick(tree))
            self.log.debug('Sampled tree %d with %d edges', i, len(tree))

    def prune(self, phi, t, input='-', format=None, cuts=None):
        fmt = self._require(format, ('json', 'newick'), 'prune')
        text = _open_input(input)
        if text.lstrip().startswith('{'):
            tree = formats.tree_from_dict(_load_json(text, input))
        else:
            tree = formats.from_newick(text)
        pruned, cut_set = prune(tree, phi, t)
        self.log.info('Pruned %d edges down to %d with %d cuts',
                      len(tree), len(pruned), len(cut_set))
        if fmt == 'json':
            self._write(json.dumps(formats.tree_to_dict(pruned),
                                   sort_keys=True))
        else:
            self._write(formats.to_newick(pruned))
        if cuts:
            with open(cuts, 'w') as fp:
                json.dump(cut_set.to_list(), fp, sort_keys=True)

    def _potential(self, source):
        if source.startswith('sample:'):
            lam, seed = _parse_sample_spec(source)
            params = self._params(lam)
            if seed is not None:
                params = GwParams(lam, seed, 0, params.node_cap)
            return Potential.from_excursion(sample_exp_excursion(params))
        return formats.potential_from_dict(
            _load_json(_open_input(source), source))

    def annihilate(self, potential, emit, t=None, format=None):
        psi0 = self._potential(potential)
        self.log.info('Potential on [%r, %r] with %d local minima',
                      psi0.a, psi0.b, len(psi0.local_minima()))
        if emit in ('potential', 'masstree') and t is None:
            raise UsageError('--emit %s needs --t' % emit)

        if emit == 'potential':
            self._require(format, ('json',), 'annihilate')
            self._write(json.dumps(evolve(psi0, t).to_dict(),
                                   sort_keys=True))
        elif emit == 'masstree':
            fmt = self._require(format, ('json', 'newick'), 'annihilate')
            mt = prune_mass_equipped(level_set_tree(psi0.to_excursion()), t)
            if fmt == 'json':
                self._write(json.dumps(formats.mass_tree_to_dict(mt),
                                       sort_keys=True))
            else:
                self._write(formats.to_newick(mt.base,
                                              mt.newick_annotations()))
        elif emit == 'trajectories':
            fmt = self._require(format, ('csv', 'json'), 'annihilate')
            trajectories = simulate_sinks(psi0)
            if fmt == 'csv':
                self._write(formats.trajectories_to_csv(trajectories))
            else:
                self._write(json.dumps([
                    {'sink_id': tr.sink_id, 'parent': tr.parent,
                     'breakpoints': [list(p) for p in tr.breakpoints]}
                    for tr in trajectories], sort_keys=True))
        else:
            self._require(format, ('svg',), 'annihilate')
            self._write(render_svg(shock_tree(psi0)))

    def eval(self, formula, lam, t=None, x=None, grid=None, format=None):
        """Print one value, or a CSV table when ``grid`` is given.

        The formulas of one variable take it from ``x`` or, failing that,
        from ``t``; ``mu`` needs both.
        """
        closed = ClosedForm(lam)
        if grid is not None:
            self._require(format, ('csv',), 'eval')
            xs = _grid(grid)
            self._write(formats.table_to_csv(
                formula, xs, closed.evaluate(formula, xs, t)))
            return
        self._require(format, ('json', 'csv'), 'eval')
        if formula == 'mu':
            if x is None or t is None:
                raise UsageError('mu needs both --x and --t')
            value = closed.evaluate(formula, x, t)
        else:
            argument = x if x is not None else t
            if argument is None:
                raise UsageError('%s needs --t or --x' % formula)
            value = closed.evaluate(formula, argument)
        self._write('%.6f' % value)

    def verify(self, suite, lam=None, t=None, n=None, format=None):
        self._require(format, ('json',), 'verify')
        cfg = self.environment.mc_config(lam=lam, t=t, n=n)
        report = run_suites(suite, cfg)
        for line in report.render_text().splitlines():
            self.log.info(line)
        self._write(report.to_json())
        if not report.passed:
            raise VerificationFailed('%d of %d checks failed' % (
                len(report.failures), len(report.checks)))

    def roundtrip(self, lam, n=100, format=None):
        """Check ``level_set_tree(harris_path(T)) == T`` on ``n`` samples."""
        self._require(format, ('json',), 'roundtrip')
        failures = []
        tolerance = self.environment.tolerance
        for i in range(n):
            tree = sample_gw(self._params(lam, i))
            back = level_set_tree(harris_path(tree))
            if not trees_close(tree, back, tolerance):
                failures.append(i)
        self._write(json.dumps({'n': n, 'failures': failures},
                               sort_keys=True))
        if failures:
            raise VerificationFailed('round trip failed for streams %s' %
                                     failures[:10])


class GenericArgparseImplementation(object):
    """Parses ``argv`` and drives a :class:`CommandLineEnvironment`."""

    def __init__(self, env=None, log=None, prog=None, stdout=None,
                 stderr=None):
        self.env = env
        self.log = log
        self.stdout = stdout if stdout is not None else sys.stdout
        self.stderr = stderr if stderr is not None else sys.stderr
        self._construct_parser(prog)

    def _construct_parser(self, prog=None):
        self.parser = parser = _Parser(
            prog=prog, description='Generalized dynamical pruning and '
                                   'ballistic annihilation.')

        shared = _Parser(add_help=False)
        shared.add_argument('--seed', type=int,
                            help='master seed (default: PRUNETREE_SEED)')
        shared.add_argument('--out', help='write output to this file')
        shared.add_argument('--format', choices=FORMATS)
        shared.add_argument('--workers', type=int,
                            help='worker processes for Monte Carlo runs')
        shared.add_argument('-v', '--verbose', action='store_true',
                            help='be more verbose')
        shared.add_argument('-q', '--quiet', action='store_true',
                            help='be quiet')

        subparsers = parser.add_subparsers(dest='command',
                                           parser_class=_Parser)
        subparsers.required = True

        p = subparsers.add_parser('sample-gw', parents=[shared],
                                  help='sample GW(lambda) trees')
        p.add_argument('--lambda', dest='lam', type=float, required=True)
        p.add_argument('--n', type=int, default=1)

        p = subparsers.add_parser('prune', parents=[shared],
                                  help='prune a tree')
        p.add_argument('--phi', choices=PHIS, required=True)
        p.add_argument('--t', type=float, required=True)
        p.add_argument('--input', default='-',
                       help='JSON or Newick tree (default: stdin)')
        p.add_argument('--cuts', help='write the cut set as JSON here')

        p = subparsers.add_parser('annihilate', parents=[shared],
                                  help='evolve a potential')
        p.add_argument('--potential', required=True,
                       help='a JSON file or sample:lambda=<real>')
        p.add_argument('--t', type=float)
        p.add_argument('--emit', choices=EMITS, default='potential')

        p = subparsers.add_parser('eval', parents=[shared],
                                  help='evaluate a closed form')
        p.add_argument('--formula', choices=FORMULAS, required=True)
        p.add_argument('--lambda', dest='lam', type=float, required=True)
        p.add_argument('--t', type=float)
        p.add_argument('--x', type=float)
        p.add_argument('--grid', help='start:stop:count, prints CSV')

        p = subparsers.add_parser('verify', parents=[shared],
                                  help='run Monte Carlo checks')
        p.add_argument('--suite', choices=SUITES, default='all')
        p.add_argument('--lambda', dest='lam', type=float)
        p.add_argument('--t', type=float)
        p.add_argument('--n', type=int)

        p = subparsers.add_parser('roundtrip', parents=[shared],
                                  help='Harris path round trip on samples')
        p.add_argument('--lambda', dest='lam', type=float, required=True)
        p.add_argument('--n', type=int, default=100)

    def _setup_logging(self, ns):
        if self.log:
            return self.log
        log = logging.getLogger('prunetree')
        if not log.handlers:
            log.addHandler(logging.StreamHandler(self.stderr))
        log.setLevel(VERBOSITY[1 + ns.verbose - ns.quiet])
        return log

    def run_with_ns(self, ns):
        log = self._setup_logging(ns)
        env = (self.env or get_env()).with_overrides(
            seed=ns.seed, workers=ns.workers)
        args = {k: v for k, v in vars(ns).items()
                if k not in ('command', 'seed', 'out', 'workers', 'verbose',
                             'quiet')}
        resolved = dict(env.resolved(), command=ns.command)
        self.stderr.write(json.dumps(resolved, sort_keys=True) + '\n')

        if ns.out:
            with open(ns.out, 'w') as out:
                cmd = CommandLineEnvironment(env, log, out)
                return cmd.invoke(ns.command, args)
        cmd = CommandLineEnvironment(env, log, self.stdout)
        return cmd.invoke(ns.command, args)

    def run_with_argv(self, argv):
        try:
            ns = self.parser.parse_args(argv)
        except UsageError as e:
            self.stderr.write('%s\n' % e)
            return EXIT_USAGE
        except SystemExit as e:
            # --help
            return e.code or EXIT_OK
        try:
            self.run_with_ns(ns)
        except UsageError as e:
            self.stderr.write('%s\n' % e)
            return EXIT_USAGE
        except VerificationFailed as e:
            self.stderr.write('verification failed: %s\n' % e)
            return EXIT_VERIFY
        except (PruneTreeError, CommandError) as e:
            self.stderr.write('error: %s\n' % e)
            return EXIT_ERROR
        return EXIT_OK

    def main(self, argv):
        return self.run_with_argv(argv)


def run(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    return GenericArgparseImplementation(prog='prunetree').run_with_argv(argv)


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
