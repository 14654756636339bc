#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Command line front end: runs the Monte Carlo experiments and writes their
tables, combines initial estimates read from a file and prints optimal
weights.
"""

from __future__ import (division, print_function, absolute_import,
                        unicode_literals)

import os
import sys
import json
import argparse
import numpy as np
from astropy.table import Table
from . import tools, quantile, kernel
from .combiner import (InitialEstimateSet, WeightVector, combine_known_scale,
                       combine_unknown_scale, optimal_tilde_weights)
from .simulation import ExperimentConfig, read_settings, run_monte_carlo


__all__ = ["RunSpec", "parse_args", "emit_report", "main"]


EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_ESTIMATION = 4

EPILOG = ('Exit status: 0 on success, 1 when a file cannot be read or '
          'written, 2 on usage errors, 3 on configuration errors and 4 when '
          'estimation fails or too many replications fail.')

# Command line option -> configuration key
OVERRIDES = {'n': 'n', 'reps': 'replications', 'seed': 'master_seed',
             'weights': 'weight_mode', 'density': 'density',
             'qr_tau': 'qr_tau', 'eta': 'eta', 'kernel': 'kernel',
             'ace': 'ace_variant', 'xi': 'xi_mode', 'method': 'method',
             'a': 'a', 'x_mean': 'x_mean', 'c': 'c',
             'window_exponent': 'window_exponent',
             'keep_failures': 'keep_failures', 'burn_in': 'burn_in',
             'closed_form': 'closed_form', 'noise_scale': 'noise_scale',
             'search': 'search'}


class ArgumentParser(argparse.ArgumentParser):
    """
    Parser that raises ``UsageError`` instead of exiting.
    """
    def error(self, message):
        raise tools.UsageError(message)


class RunSpec(object):
    """
    A parsed command line.

    Args:

        subcommand (``str``): ``'exp1'``, ``'exp2'``, ``'exp3'``,
            ``'combine'`` or ``'weights'``.

        config (``ExperimentConfig``, optional): Experiment to run, for the
            experiment subcommands. Default is ``None``.

        config_path (``str``, optional): Configuration file the experiment
            was read from. Default is ``None``.

        out (``str``, optional): Output path. Default is ``None`` (nothing
            is written).

        workers (``int``, optional): Size of the process pool. Default is
            ``None``.

        quiet (``bool``, optional): Suppress the summary printed to stdout.
            Default is ``False``.

        options (``dict``, optional): Remaining options of the ``combine``
            and ``weights`` subcommands. Default is ``None``.
    """
    def __init__(self, subcommand, config=None, config_path=None, out=None,
                 workers=None, quiet=False, options=None):
        self.subcommand = subcommand
        self.config = config
        self.config_path = config_path
        self.out = out
        self.workers = workers
        self.quiet = quiet
        self.options = options or {}

    def __repr__(self):
        return 'RunSpec(%s, out=%r)' % (self.subcommand, self.out)

    @property
    def sidecar(self):
        if self.out is None:
            return None
        return os.path.splitext(self.out)[0] + '.json'


def _experiment_parser(subparsers, name, help_text):
    parser = subparsers.add_parser(name, help=help_text)
    parser.add_argument('--config', help='Flat JSON configuration file; '
                        'command line options override its values.')
    parser.add_argument('--out', help='CSV output path; the configuration '
                        'is written next to it with a .json suffix.')
    parser.add_argument('--n', type=int, nargs='+', help='Sample sizes.')
    parser.add_argument('--reps', type=int, help='Replications.')
    parser.add_argument('--seed', type=int, help='Master seed.')
    parser.add_argument('--weights', help='Weight mode.')
    parser.add_argument('--noise-scale', type=float, dest='noise_scale',
                        help='Error scale; 0 gives noiseless data.')
    parser.add_argument('--workers', type=int, help='Worker processes.')
    parser.add_argument('--quiet', action='store_true',
                        help='Do not print the summary table.')
    return parser


def _build_parser():
    parser = ArgumentParser(prog='acrpy', description='Asymptotic composite '
                            'regression estimators and their Monte Carlo '
                            'study.', epilog=EPILOG)
    subparsers = parser.add_subparsers(dest='subcommand')

    exp1 = _experiment_parser(subparsers, 'exp1', 'Composite quantile '
                              'regression experiment.')
    exp1.add_argument('--density', choices=('known', 'kde'))
    exp1.add_argument('--qr-tau', type=float, dest='qr_tau')

    exp2 = _experiment_parser(subparsers, 'exp2', 'Composite kernel '
                              'regression experiment.')
    exp2.add_argument('--eta', type=float)
    exp2.add_argument('--kernel', choices=('epanechnikov', 'gaussian'))
    exp2.add_argument('--ace', choices=('r1', 'r2'))
    exp2.add_argument('--xi', choices=('loo', 'plugin'))

    exp3 = _experiment_parser(subparsers, 'exp3', 'Composite blockwise '
                              'empirical likelihood experiment.')
    exp3.add_argument('--method', type=int, choices=(1, 2))
    exp3.add_argument('--a', type=float)
    exp3.add_argument('--x-mean', type=float, dest='x_mean')
    exp3.add_argument('--c', type=float)
    exp3.add_argument('--window-exponent', type=float,
                      dest='window_exponent')
    exp3.add_argument('--burn-in', type=int, dest='burn_in')
    exp3.add_argument('--closed-form', action='store_const', const=True,
                      dest='closed_form')
    exp3.add_argument('--search', choices=('scan', 'plain'),
                      help='Likelihood search: grid scan then Brent, or one '
                      'Brent pass over the bracket (default: scan for '
                      'method 1, plain for method 2).')
    keep = exp3.add_mutually_exclusive_group()
    keep.add_argument('--keep-failures', action='store_const', const=True,
                      dest='keep_failures')
    keep.add_argument('--drop-failures', action='store_const', const=False,
                      dest='keep_failures')

    combine = subparsers.add_parser('combine', help='Combine initial '
                                    'estimates read from a file.')
    combine.add_argument('input', help='CSV with columns tau, theta, xi or '
                         'JSON with lists taus, theta_hats, xi_hats.')
    combine.add_argument('--weights', type=float, nargs='+')
    combine.add_argument('--phi', type=float, help='Known scale; the scale '
                         'is estimated when omitted.')
    combine.add_argument('--out', help='JSON output path.')
    combine.add_argument('--quiet', action='store_true')

    weights = subparsers.add_parser('weights', help='Optimal weights for a '
                                    'grid of tuning parameters.')
    weights.add_argument('--model', choices=('quantile', 'kernel'),
                         default='quantile')
    weights.add_argument('--taus', type=float, nargs='+', required=True)
    weights.add_argument('--fq', type=float, nargs='+',
                         help='Error density at each quantile; default is '
                         'the unit exponential.')
    weights.add_argument('--kernel', choices=('epanechnikov', 'gaussian'),
                         default='epanechnikov')
    weights.add_argument('--out', help='JSON output path.')
    weights.add_argument('--quiet', action='store_true')
    return parser


def _experiment_config(args):
    experiment = int(args.subcommand[-1])
    settings = {}
    if args.config is not None:
        settings = read_settings(args.config)
        if settings.get('experiment', experiment) != experiment:
            raise tools.ConfigError('%s holds a configuration of experiment '
                                    '%r.' % (args.config,
                                             settings['experiment']))
    settings['experiment'] = experiment
    for option, key in OVERRIDES.items():
        value = getattr(args, option, None)
        if value is not None:
            settings[key] = value
    return ExperimentConfig.from_dict(settings)


def _check_weight_grid(args):
    taus = np.array(args.taus)
    if args.model == 'quantile':
        if np.any(taus <= 0) or np.any(taus >= 1):
            raise tools.UsageError('--taus must be quantile levels in (0, 1).')
    elif np.any(taus <= 0):
        raise tools.UsageError('--taus must be positive.')
    if args.fq is None:
        return
    if args.model != 'quantile':
        raise tools.UsageError('--fq applies to the quantile model only.')
    if len(args.fq) != len(args.taus):
        raise tools.UsageError('--fq has %i values but --taus has %i.'
                               % (len(args.fq), len(args.taus)))
    if any(f <= 0 for f in args.fq):
        raise tools.UsageError('--fq values must be positive.')


def parse_args(argv):
    """
    Parses and validates a command line.

    Args:

        argv (``list``): Arguments without the program name.

    Returns:

        spec (``RunSpec``): The validated command.
    """
    args = _build_parser().parse_args(argv)
    if args.subcommand is None:
        raise tools.UsageError('A subcommand is required: exp1, exp2, exp3, '
                               'combine or weights.')
    if args.subcommand == 'weights':
        _check_weight_grid(args)
    if args.subcommand in ('combine', 'weights'):
        options = dict((key, value) for key, value in vars(args).items()
                       if key not in ('subcommand', 'out', 'quiet'))
        return RunSpec(args.subcommand, out=args.out, quiet=args.quiet,
                       options=options)
    if args.workers is not None and args.workers < 1:
        raise tools.UsageError('--workers must be positive.')
    return RunSpec(args.subcommand, _experiment_config(args), args.config,
                   args.out, args.workers, args.quiet)


def _formatted(table):
    table = table.copy()
    for name in ('bias', 'mse', 'mise'):
        if name in table.colnames:
            table[name].format = '%.6g'
    return table


def _write_json(path, payload):
    try:
        with open(path, 'w') as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write('\n')
    except (OSError, IOError) as exc:
        raise tools.IoError('Cannot write %s: %s' % (path, exc))


def emit_report(report, spec):
    """
    Writes the report table as CSV to ``spec.out`` and the configuration
    next to it as JSON, then prints the table unless ``spec.quiet``.

    Args:

        report (``MonteCarloReport``): Results of the experiment.

        spec (``RunSpec``): The command that produced them.
    """
    if len(report.table) == 0:
        raise tools.ConfigError('The report is empty.')
    table = _formatted(report.table)
    if spec.out is not None:
        try:
            table.write(spec.out, format='ascii.csv', overwrite=True)
        except (OSError, IOError) as exc:
            raise tools.IoError('Cannot write %s: %s' % (spec.out, exc))
        _write_json(spec.sidecar, report.config.to_dict())
    if not spec.quiet:
        table.pprint(max_lines=-1, max_width=-1)
        print('%i replications in %.1f s; largest failure share %.1f%%.'
              % (report.replications, report.wall_time,
                 100 * report.failure_rate()))


def _read_estimates(path):
    if not os.path.isfile(path):
        raise tools.IoError('Cannot read %s: no such file.' % path)
    if path.endswith('.json'):
        try:
            with open(path) as f:
                payload = json.load(f)
        except ValueError as exc:
            raise tools.ConfigError('%s is not valid JSON: %s' % (path, exc))
        try:
            return InitialEstimateSet(payload['taus'], payload['theta_hats'],
                                      payload['xi_hats'])
        except (KeyError, TypeError):
            raise tools.ConfigError('%s must hold the lists taus, '
                                    'theta_hats and xi_hats.' % path)
    table = Table.read(path, format='ascii.csv')
    missing = set(('tau', 'theta', 'xi')) - set(table.colnames)
    if missing:
        raise tools.ConfigError('%s lacks the column(s) %s.'
                                % (path, ', '.join(sorted(missing))))
    return InitialEstimateSet(table['tau'], table['theta'], table['xi'])


def _combine(spec):
    options = spec.options
    try:
        estimates = _read_estimates(options['input'])
        w = None if options['weights'] is None else \
            WeightVector(options['weights'])
        if w is not None and len(w) != len(estimates.taus):
            raise tools.UsageError('--weights has %i values for %i '
                                   'estimates.' % (len(w),
                                                   len(estimates.taus)))
    except tools.ACRError:
        raise
    except ValueError as exc:
        raise tools.ConfigError(str(exc))
    if options['phi'] is None:
        result = combine_unknown_scale(estimates, w)
    else:
        result = combine_known_scale(estimates, w, options['phi'])
    payload = {'theta_tilde': result.theta_tilde,
               'phi_hat': result.phi_hat,
               'regenerated_weights': list(result.regenerated.values)}
    if not spec.quiet:
        print('theta_tilde = %.6g' % result.theta_tilde)
        print('phi_hat = %.6g' % result.phi_hat)
        print('regenerated weights: %s'
              % ' '.join('%.6g' % v for v in result.regenerated.values))
    if spec.out is not None:
        _write_json(spec.out, payload)


def _weights(spec):
    options = spec.options
    taus = np.array(options['taus'])
    payload = {'taus': list(taus)}
    if options['model'] == 'quantile':
        if options['fq'] is None:
            # Unit exponential density at its tau quantile
            fq = 1 - taus
        else:
            fq = np.array(options['fq'])
        a0 = quantile.a0_matrix(taus, fq)
        schemes = {'optimal': quantile.optimal_qr_weights(a0),
                   'zou_yuan': quantile.zou_yuan_weights(fq)}
        for name, w in schemes.items():
            payload[name] = {'weights': list(w.values),
                             'variance': quantile.limiting_variance(a0, w)}
    else:
        k = kernel.KernelSpec.from_name(options['kernel'])
        a1, a2 = kernel.a_matrices(taus, k)
        for name, matrix in (('r1', a1), ('r2', a2)):
            w = optimal_tilde_weights(matrix)
            payload[name] = {'weights': list(w.values),
                             'variance': w.variance}
        if len(np.unique(taus)) > 1:
            w = kernel.extrapolation_weights(taus, k)
            payload['r1_exact'] = {'weights': list(w.values),
                                   'variance': w.variance}
    if not spec.quiet:
        for name in sorted(key for key in payload if key != 'taus'):
            print('%-9s %s  (variance %.6g)'
                  % (name, ' '.join('%.6g' % v
                                    for v in payload[name]['weights']),
                     payload[name]['variance']))
    if spec.out is not None:
        _write_json(spec.out, payload)


def main(argv=None):
    """
    Entry point of the ``acrpy`` command; returns the exit status: 0 on
    success, 1 when a file cannot be read or written, 2 on usage errors, 3 on
    configuration errors and 4 when estimation fails or too many replications
    fail.
    """
    if argv is None:
        argv = sys.argv[1:]
    try:
        spec = parse_args(argv)
    except tools.UsageError as exc:
        print('acrpy: error: %s' % exc, file=sys.stderr)
        return EXIT_USAGE
    except tools.ConfigError as exc:
        print('acrpy: configuration error: %s' % exc, file=sys.stderr)
        return EXIT_CONFIG

    try:
        if spec.subcommand == 'combine':
            _combine(spec)
            return EXIT_OK
        elif spec.subcommand == 'weights':
            _weights(spec)
            return EXIT_OK
        report = run_monte_carlo(spec.config, spec.workers,
                                 verbose=not spec.quiet)
        emit_report(report, spec)
    except tools.IoError as exc:
        print('acrpy: %s' % exc, file=sys.stderr)
        return EXIT_IO
    except tools.UsageError as exc:
        print('acrpy: error: %s' % exc, file=sys.stderr)
        return EXIT_USAGE
    except tools.ConfigError as exc:
        print('acrpy: configuration error: %s' % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (tools.ACRError, ValueError) as exc:
        print('acrpy: estimation failed: %s' % exc, file=sys.stderr)
        return EXIT_ESTIMATION

    if report.exceeds_failure_threshold():
        print('acrpy: %.1f%% of the replications failed (threshold %.1f%%).'
              % (100 * report.failure_rate(),
                 100 * report.config.failure_threshold), file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
