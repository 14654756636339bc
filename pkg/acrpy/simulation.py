#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Monte Carlo study of the composite estimators: seeded data generators for the
quantile, kernel and dependent-data experiments, the replication driver and
the bias, MSE and MISE summaries.
"""

from __future__ import (division, print_function, absolute_import,
                        unicode_literals)

import os
import json
import time
import warnings
import numpy as np
import scipy.linalg
from astropy.table import Table
from multiprocessing import Pool
from scipy.signal import lfilter
from . import tools
from . import quantile, kernel
from . import empirical_likelihood as bel
from .combiner import WeightVector


__all__ = ["RngStream", "ExperimentConfig", "MonteCarloReport",
           "exp1_sigma", "regression_function", "gen_experiment1",
           "gen_experiment2", "gen_experiment3", "read_settings",
           "run_monte_carlo"]


# True slopes of the quantile experiment
EXPERIMENT1_BETA = np.array([3., 2., 1., -1., -2.])

# Points where integrated squared errors are averaged
EVALUATION_GRID = np.linspace(0.01, 0.99, 99)

DEFAULT_ESTIMATORS = {1: ('ACE', 'CQR', 'QR'), 2: ('LC', 'CLC', 'ACE'),
                      3: ('BELE', 'ACE')}

WEIGHT_MODES = {1: ('equal', 'optimal', 'zou_yuan'),
                2: ('equal', 'optimal', 'suboptimal'),
                3: ('equal', )}

MULTIPLIERS = (0.6, 0.8, 1.0, 1.2, 1.4)

# Kernel bandwidths as multiples of the cross-validated bandwidth
KERNEL_MULTIPLIERS = (1.0, 1.25, 1.5, 1.75, 2.0)


class RngStream(object):
    """
    Random stream ``stream_index`` of the family seeded by ``master_seed``:
    a PCG64 generator whose state comes from
    ``SeedSequence(master_seed, spawn_key=(stream_index, ))``.

    Args:

        master_seed (``int``): Seed of the experiment.

        stream_index (``int``): Index of the stream (the replication).
    """
    algorithm = 'PCG64/SeedSequence'

    def __init__(self, master_seed, stream_index):
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        sequence = np.random.SeedSequence(self.master_seed,
                                          spawn_key=(self.stream_index, ))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def random(self, size=None):
        return self.generator.random(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    # Unit exponential draws by inversion
    def exponential(self, size=None):
        return -np.log1p(-self.generator.random(size))


def exp1_sigma(p=5, rho=0.5):
    """
    Covariance ``rho**|i - j|`` of the covariates of the quantile experiment.
    """
    index = np.arange(p)
    return rho ** np.abs(np.subtract.outer(index, index)).astype(float)


def regression_function(x):
    """
    Regression function ``sin(2 pi x)`` of the kernel experiment.
    """
    return np.sin(2 * np.pi * np.asarray(x))


def _check_size(n):
    if n < 10:
        raise ValueError('Experiments need at least 10 observations.')


def gen_experiment1(n, rng, noise_scale=1.0):
    """
    Linear model with correlated normal covariates and exponential errors.

    Args:

        n (``int``): Sample size.

        rng (``RngStream``): Random stream.

        noise_scale (``float``, optional): Scale of the exponential errors;
            0 gives noiseless data. Default is 1.

    Returns:

        data (``quantile.DesignData``): The sample.
    """
    _check_size(n)
    factor = scipy.linalg.cholesky(exp1_sigma(), lower=True)
    x = rng.normal(size=(n, len(EXPERIMENT1_BETA))).dot(factor.T)
    errors = noise_scale * rng.exponential(n)
    return quantile.DesignData(x, x.dot(EXPERIMENT1_BETA) + errors)


def gen_experiment2(n, rng, noise_scale=0.5):
    """
    Uniform design on (0, 1), ``y = sin(2 pi x) + N(0, noise_scale**2)``.
    """
    _check_size(n)
    xs = rng.random(n)
    ys = regression_function(xs) + noise_scale * rng.normal(size=n)
    return kernel.RegressionSample(xs, ys)


def gen_experiment3(n, a, x_mean, rng, theta=5.0, noise_scale=1.0,
                    burn_in=0):
    """
    Series ``y_i = theta x_i + e_i`` with ``x_i ~ N(x_mean, 1)`` and AR(1)
    errors ``e_i = a e_{i-1} + noise_scale z_i`` started at ``e_1 = z_1``.

    Args:

        n (``int``): Series length.

        a (``float``): Autoregressive coefficient, ``|a| < 1``.

        x_mean (``float``): Mean of the covariates.

        rng (``RngStream``): Random stream.

        theta (``float``, optional): Slope. Default is 5.

        noise_scale (``float``, optional): Scale of the innovations. Default
            is 1.

        burn_in (``int``, optional): Error values generated and discarded
            before the series starts. Default is 0.

    Returns:

        sample (``empirical_likelihood.DependentSample``): The series.
    """
    _check_size(n)
    if not abs(a) < 1:
        raise ValueError('The autoregressive coefficient must satisfy '
                         '|a| < 1.')
    xs = rng.normal(x_mean, 1.0, size=n)
    innovations = noise_scale * rng.normal(size=n + burn_in)
    errors = lfilter([1.0], [1.0, -a], innovations)[burn_in:]
    return bel.DependentSample(xs, theta * xs + errors, a=a)


def _integer(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise tools.ConfigError('`%s` must be an integer, got %r.'
                                % (name, value))
    if value < minimum:
        raise tools.ConfigError('`%s` must be at least %i, got %i.'
                                % (name, minimum, value))
    return int(value)


def _number(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float,
                                                         np.number)):
        raise tools.ConfigError('`%s` must be a number, got %r.'
                                % (name, value))
    return float(value)


def _numbers(name, values):
    if isinstance(values, (int, float)):
        values = [values]
    try:
        return tuple(_number(name, v) for v in values)
    except TypeError:
        raise tools.ConfigError('`%s` must be a list of numbers.' % name)


def _choice(name, value, options):
    if value not in options:
        raise tools.ConfigError('`%s` must be one of %s, got %r.'
                                % (name, ', '.join(map(str, options)), value))
    return value


def read_settings(path):
    """
    Reads the flat JSON object of a configuration file without validating
    its settings.
    """
    try:
        with open(path) as f:
            settings = json.load(f)
    except (OSError, IOError) as exc:
        raise tools.ConfigError('Cannot read configuration %s: %s'
                                % (path, exc))
    except ValueError as exc:
        raise tools.ConfigError('Configuration %s is not valid JSON: %s'
                                % (path, exc))
    if not isinstance(settings, dict):
        raise tools.ConfigError('Configuration %s must hold a JSON object.'
                                % path)
    return settings


class ExperimentConfig(object):
    """
    Settings of one Monte Carlo experiment. Unset fields take the defaults of
    the experiment; fields that do not apply to it must stay unset.

    Args:

        experiment (``int``): 1 (quantile regression), 2 (kernel regression)
            or 3 (blockwise empirical likelihood).

        n (``int`` or ``list``, optional): Sample sizes. Default is
            (100, 200, 400), or (100, 200, 300) for method 2 of experiment 3.

        replications (``int``, optional): Replications per sample size.
            Default is 200.

        master_seed (``int``, optional): Seed of the random streams. Default
            is 20240501.

        estimators (``list``, optional): Estimators to evaluate. Default is
            every estimator of the experiment.

        weight_mode (``str``, optional): Weights of the composite estimator;
            ``'equal'``, ``'optimal'``, (experiment 1) ``'zou_yuan'`` or
            (experiment 2) ``'suboptimal'``, the weights minimizing the
            weight-free approximation of the variance. Default is
            ``'optimal'`` for experiments 1 and 2 and ``'equal'`` for
            experiment 3.

        noise_scale (``float``, optional): Error scale; 0 gives noiseless
            data. Default is 1, or 0.5 for experiment 2.

        failure_threshold (``float``, optional): Largest tolerated share of
            failed replications. Default is 0.05.

        **fields: Experiment-specific settings: ``taus``, ``qr_tau``,
            ``density`` (experiment 1); ``eta``, ``multipliers``,
            ``kernel``, ``cv_folds``, ``cv_grid``, ``ace_variant``,
            ``xi_mode`` (experiment 2); ``method``, ``c``, ``theta``, ``a``,
            ``x_mean``, ``taus``, ``multipliers``, ``use_s``,
            ``window_exponent``, ``keep_failures``, ``burn_in``,
            ``closed_form``, ``search`` (experiment 3).
    """
    common = ('experiment', 'n', 'replications', 'master_seed', 'estimators',
              'weight_mode', 'noise_scale', 'failure_threshold')
    specific = {1: ('taus', 'qr_tau', 'density'),
                2: ('eta', 'multipliers', 'kernel', 'cv_folds', 'cv_grid',
                    'ace_variant', 'xi_mode'),
                3: ('method', 'c', 'theta', 'a', 'x_mean', 'taus',
                    'multipliers', 'use_s', 'window_exponent',
                    'keep_failures', 'burn_in', 'closed_form', 'search')}

    def __init__(self, experiment, n=None, replications=200,
                 master_seed=20240501, estimators=None, weight_mode=None,
                 noise_scale=None, failure_threshold=0.05, **fields):
        self.experiment = _choice('experiment', experiment, (1, 2, 3))
        unknown = set(fields) - set(self.specific[experiment])
        if unknown:
            raise tools.ConfigError('Unknown setting(s) for experiment %i: '
                                    '%s.' % (experiment,
                                             ', '.join(sorted(unknown))))
        self.replications = _integer('replications', replications, 1)
        self.master_seed = _integer('master_seed', master_seed, 0)
        self.failure_threshold = _number('failure_threshold',
                                         failure_threshold)
        if not 0 <= self.failure_threshold < 1:
            raise tools.ConfigError('`failure_threshold` must lie in [0, 1).')

        if experiment == 1:
            self._experiment1(**fields)
        elif experiment == 2:
            self._experiment2(**fields)
        else:
            self._experiment3(**fields)

        if n is None:
            if experiment == 3 and self.method == 2:
                n = (100, 200, 300)
            else:
                n = (100, 200, 400)
        elif isinstance(n, (int, np.integer)) and not isinstance(n, bool):
            n = (n, )
        try:
            self.n = tuple(_integer('n', size, 10) for size in n)
        except TypeError:
            raise tools.ConfigError('`n` must be an integer or a list of '
                                    'integers.')

        options = DEFAULT_ESTIMATORS[experiment]
        if estimators is None:
            estimators = options
        self.estimators = tuple(_choice('estimators', name, options)
                                for name in estimators)
        if len(self.estimators) == 0:
            raise tools.ConfigError('At least one estimator is required.')

        if weight_mode is None:
            weight_mode = 'equal' if experiment == 3 else 'optimal'
        self.weight_mode = _choice('weight_mode', weight_mode,
                                   WEIGHT_MODES[experiment])
        if noise_scale is None:
            noise_scale = 0.5 if experiment == 2 else 1.0
        self.noise_scale = _number('noise_scale', noise_scale)
        if self.noise_scale < 0:
            raise tools.ConfigError('`noise_scale` must be nonnegative.')

    def _experiment1(self, taus=None, qr_tau=0.5, density='known'):
        if taus is None:
            taus = np.arange(1, 10) / 10.
        self.taus = _numbers('taus', taus)
        if any(not 0 < t < 1 for t in self.taus) or \
                list(self.taus) != sorted(set(self.taus)):
            raise tools.ConfigError('`taus` must be increasing levels in '
                                    '(0, 1).')
        self.qr_tau = _number('qr_tau', qr_tau)
        if not 0 < self.qr_tau < 1:
            raise tools.ConfigError('`qr_tau` must lie in (0, 1).')
        self.density = _choice('density', density, ('known', 'kde'))

    def _experiment2(self, eta=0.2, multipliers=KERNEL_MULTIPLIERS,
                     kernel='epanechnikov', cv_folds=2, cv_grid=None,
                     ace_variant='r1', xi_mode='loo'):
        self.eta = _number('eta', eta)
        if not 0 < self.eta < 1:
            raise tools.ConfigError('`eta` must lie in (0, 1).')
        self.multipliers = _numbers('multipliers', multipliers)
        if any(m <= 0 for m in self.multipliers) or \
                len(set(self.multipliers)) != len(self.multipliers):
            raise tools.ConfigError('`multipliers` must be distinct and '
                                    'positive.')
        self.kernel = _choice('kernel', kernel, ('epanechnikov', 'gaussian'))
        self.cv_folds = _integer('cv_folds', cv_folds, 2)
        self.cv_grid = None if cv_grid is None else _numbers('cv_grid',
                                                             cv_grid)
        self.ace_variant = _choice('ace_variant', ace_variant, ('r1', 'r2'))
        self.xi_mode = _choice('xi_mode', xi_mode, ('loo', 'plugin'))

    def _experiment3(self, method=1, c=None, theta=None, a=0.1, x_mean=0.0,
                     taus=(0.4, 0.6, 0.8, 1.0), multipliers=MULTIPLIERS,
                     use_s=None, window_exponent=None, keep_failures=None,
                     burn_in=0, closed_form=False, search=None):
        self.method = _choice('method', method, (1, 2))
        self.c = _number('c', c if c is not None else
                         (1 / 3. if method == 1 else 0.5))
        if not 0 < self.c <= 1:
            raise tools.ConfigError('`c` must lie in (0, 1].')
        self.theta = _number('theta', theta if theta is not None else
                             (5.0 if method == 1 else 2.5))
        self.a = _number('a', a)
        if not abs(self.a) < 1:
            raise tools.ConfigError('`a` must satisfy |a| < 1.')
        self.x_mean = _number('x_mean', x_mean)
        self.taus = _numbers('taus', taus)
        if any(not 0 < t <= 1 for t in self.taus):
            raise tools.ConfigError('`taus` must lie in (0, 1].')
        self.multipliers = _numbers('multipliers', multipliers)
        if any(m <= 0 for m in self.multipliers):
            raise tools.ConfigError('`multipliers` must be positive.')
        self.use_s = (method == 1) if use_s is None else bool(use_s)
        self.window_exponent = None if window_exponent is None else \
            _number('window_exponent', window_exponent)
        self.keep_failures = (method == 2) if keep_failures is None else \
            bool(keep_failures)
        self.burn_in = _integer('burn_in', burn_in, 0)
        self.closed_form = bool(closed_form)
        if search is None:
            search = 'scan' if method == 1 else 'plain'
        self.search = _choice('search', search, bel.SEARCHES)

    def __repr__(self):
        return 'ExperimentConfig(%s)' % json.dumps(self.to_dict(),
                                                   sort_keys=True)

    def to_dict(self):
        """
        Flat dictionary of every setting, suitable for ``from_dict``.
        """
        result = {}
        for name in self.common + self.specific[self.experiment]:
            value = getattr(self, name)
            if isinstance(value, tuple):
                value = list(value)
            result[name] = value
        return result

    @classmethod
    def from_dict(cls, settings):
        """
        Builds a configuration from a flat dictionary.
        """
        settings = dict(settings)
        if 'experiment' not in settings:
            raise tools.ConfigError('The configuration must name its '
                                    '`experiment`.')
        experiment = settings.pop('experiment')
        try:
            return cls(experiment, **settings)
        except TypeError as exc:
            raise tools.ConfigError('Invalid configuration: %s' % exc)

    @classmethod
    def from_json(cls, path):
        """
        Reads a configuration from a flat JSON file.
        """
        return cls.from_dict(read_settings(path))


class MonteCarloReport(object):
    """
    Summary of a Monte Carlo experiment. Parametric experiments report the
    bias and MSE of every coefficient; the kernel experiment reports the
    MISE.

    Args:

        config (``ExperimentConfig``): The experiment.

        table (``astropy.table.Table``): One row per estimator, sample size
            and (parametric experiments) coefficient.

        failures (``dict``): Dropped replications per ``(estimator, n)``.

        kept (``dict``): Failed replications whose best iterate was kept,
            per ``(estimator, n)``.

        wall_time (``float``): Elapsed seconds.
    """
    def __init__(self, config, table, failures, kept, wall_time):
        self.config = config
        self.table = table
        self.failures = failures
        self.kept = kept
        self.wall_time = wall_time

    @property
    def replications(self):
        return self.config.replications

    @property
    def parametric(self):
        return 'mse' in self.table.colnames

    def _rows(self, estimator, n):
        mask = (self.table['estimator'] == estimator) & \
            (self.table['n'] == n)
        if not np.any(mask):
            raise KeyError('No rows for estimator %s at n = %i.'
                           % (estimator, n))
        return self.table[mask]

    def bias(self, estimator, n):
        return np.array(self._rows(estimator, n)['bias'])

    def mse(self, estimator, n):
        return np.array(self._rows(estimator, n)['mse'])

    def mise(self, estimator, n):
        return float(self._rows(estimator, n)['mise'][0])

    # Largest share of dropped replications over all cells
    def failure_rate(self):
        if len(self.failures) == 0:
            return 0.0
        return max(self.failures.values()) / float(self.replications)

    def exceeds_failure_threshold(self):
        return self.failure_rate() > self.config.failure_threshold


def _attempt(estimate, keep_failures, clip=None):
    """
    Runs ``estimate``; returns ``(value, status)`` where status is ``'ok'``,
    ``'kept'`` (best iterate of a failed solver) or ``'failed'``.
    """
    try:
        return estimate(), 'ok'
    except tools.NoConvergence as exc:
        if keep_failures and exc.best is not None and \
                np.all(np.isfinite(exc.best)):
            best = np.asarray(exc.best, dtype=float)
            if clip is not None:
                best = np.clip(best, clip[0], clip[1])
            return best, 'kept'
        return None, 'failed'
    except tools.ACRError:
        return None, 'failed'


def _experiment1(cfg, n, rng):
    data = gen_experiment1(n, rng, cfg.noise_scale)
    taus = np.asarray(cfg.taus)

    def ace():
        fits = [quantile.fit_quantile(data, tau) for tau in taus]
        if cfg.density == 'kde':
            fe = quantile.kde_density(data)
        elif cfg.noise_scale > 0:
            fe = quantile.ErrorDensity.exponential(1 / cfg.noise_scale)
        else:
            raise tools.ZeroDensity('Noiseless data have no error density.')
        if cfg.weight_mode == 'equal':
            w = WeightVector.equal(len(taus))
        else:
            fq = np.array([fe(fit.intercept) for fit in fits])
            if np.any(fq <= 1E-12):
                raise tools.ZeroDensity('Error density vanishes at a fitted '
                                        'intercept.')
            if cfg.weight_mode == 'optimal':
                w = quantile.optimal_qr_weights(quantile.a0_matrix(taus, fq))
            else:
                w = quantile.zou_yuan_weights(fq)
        return quantile.ace_quantile(data, taus, w, fe, fits=fits)

    estimators = {'ACE': ace,
                  'CQR': lambda: quantile.fit_cqr(data, taus)[0],
                  'QR': lambda: quantile.fit_quantile(data, cfg.qr_tau).beta}
    return dict((name, _attempt(estimators[name], False))
                for name in cfg.estimators)


def _kernel_weights(cfg, taus, k):
    if cfg.weight_mode == 'equal':
        return None
    elif cfg.ace_variant == 'r2':
        return kernel.kernel_weight_vectors(taus, k)[1]
    elif cfg.weight_mode == 'optimal':
        return kernel.extrapolation_weights(taus, k)
    else:
        return kernel.kernel_weight_vectors(taus, k)[0]


def _experiment2(cfg, n, rng):
    sample = gen_experiment2(n, rng, cfg.noise_scale)
    k = kernel.KernelSpec.from_name(cfg.kernel)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            h = kernel.cv_bandwidth(sample, cfg.cv_folds, cfg.cv_grid, k)
        sched = kernel.BandwidthSchedule.from_bandwidth(h, n, cfg.eta,
                                                        cfg.multipliers)
    except tools.ACRError:
        return dict((name, (None, 'failed')) for name in cfg.estimators)

    failed = set()
    w = None
    if 'ACE' in cfg.estimators:
        try:
            w = _kernel_weights(cfg, sched.taus, k)
        except tools.ACRError:
            failed.add('ACE')

    def ace(x):
        if cfg.ace_variant == 'r1':
            return kernel.ace_r1(sample, x, sched, w, k)
        else:
            return kernel.ace_r2(sample, x, sched, w, k,
                                 leave_one_out=cfg.xi_mode == 'loo')

    curves = {'LC': lambda x: kernel.nw_estimate(sample, x, h, k),
              'CLC': lambda x: kernel.clc_estimate(sample, x,
                                                   sched.bandwidths, k),
              'ACE': ace}
    truth = regression_function(EVALUATION_GRID)
    errors = dict((name, np.full(len(EVALUATION_GRID), np.nan))
                  for name in cfg.estimators)
    for j, x in enumerate(EVALUATION_GRID):
        for name in cfg.estimators:
            if name in failed:
                continue
            try:
                errors[name][j] = (curves[name](x) - truth[j]) ** 2
            except tools.EmptyWindow:
                pass
            except tools.ACRError:
                failed.add(name)

    # Points missed by any surviving estimator are dropped for all of them
    alive = [name for name in cfg.estimators if name not in failed]
    valid = np.ones(len(EVALUATION_GRID), dtype=bool)
    for name in alive:
        valid &= np.isfinite(errors[name])
    result = dict((name, (None, 'failed')) for name in cfg.estimators)
    if np.any(valid):
        for name in alive:
            result[name] = (np.mean(errors[name][valid]), 'ok')
    return result


def _ace_separations(cfg, n, tau_cv):
    taus = np.unique(np.clip(tau_cv * np.asarray(cfg.multipliers), None, 1.0))
    valid = []
    for tau in taus:
        try:
            bel.make_blocks(n, cfg.c, tau, cfg.window_exponent)
        except tools.InvalidScheme:
            continue
        valid.append(tau)
    return valid


def _experiment3(cfg, n, rng):
    sample = gen_experiment3(n, cfg.a, cfg.x_mean, rng, cfg.theta,
                             cfg.noise_scale, cfg.burn_in)
    try:
        bracket = bel.default_bracket(sample)
        tau_cv = bel.cv_block_tau(sample, cfg.c, cfg.taus,
                                  cfg.window_exponent)
    except tools.ACRError:
        return dict((name, (None, 'failed')) for name in cfg.estimators)

    def bele():
        scheme = bel.make_blocks(n, cfg.c, tau_cv, cfg.window_exponent)
        return bel.bele_fit(bel.block_moments(sample, scheme), bracket,
                            cfg.use_s, cfg.closed_form, search=cfg.search)

    def ace():
        taus = _ace_separations(cfg, n, tau_cv)
        if len(taus) < 2:
            raise tools.InvalidScheme('Fewer than two valid separation '
                                      'factors around %g.' % tau_cv)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            return bel.ace_bel(sample, cfg.c, taus, None, bracket, cfg.use_s,
                               cfg.closed_form, cfg.window_exponent,
                               search=cfg.search,
                               keep_failures=cfg.keep_failures)

    estimators = {'BELE': bele, 'ACE': ace}
    return dict((name, _attempt(estimators[name], cfg.keep_failures,
                                clip=bracket))
                for name in cfg.estimators)


def _replicate(args):
    """
    One replication; module level so that the worker pool can pickle it.
    """
    cfg, n, index = args
    rng = RngStream(cfg.master_seed, index)
    if cfg.experiment == 1:
        return _experiment1(cfg, n, rng)
    elif cfg.experiment == 2:
        return _experiment2(cfg, n, rng)
    else:
        return _experiment3(cfg, n, rng)


def _worker_count(workers):
    cap = os.environ.get('ACR_THREADS')
    if cap is None:
        cap = os.cpu_count() or 1
    else:
        try:
            cap = int(cap)
        except ValueError:
            raise tools.ConfigError('ACR_THREADS must be an integer, got %r.'
                                    % cap)
        if cap < 1:
            raise tools.ConfigError('ACR_THREADS must be positive.')
    if workers is None:
        return cap
    return max(1, min(int(workers), cap))


def _truth(cfg):
    if cfg.experiment == 1:
        return EXPERIMENT1_BETA
    else:
        return np.array([cfg.theta])


def _summarize(cfg, results):
    """
    Table rows, dropped and kept counts from the per-replication results of
    every sample size, merged in replication order.
    """
    rows = []
    failures = {}
    kept = {}
    for n in cfg.n:
        for name in cfg.estimators:
            outcomes = [replication[name] for replication in results[n]]
            values = [value for value, status in outcomes
                      if status != 'failed']
            failures[(name, n)] = sum(status == 'failed'
                                      for _, status in outcomes)
            kept[(name, n)] = sum(status == 'kept' for _, status in outcomes)
            if cfg.experiment == 2:
                mise = np.mean(values) if len(values) > 0 else np.nan
                rows.append((name, n, mise))
                continue
            truth = _truth(cfg)
            if len(values) > 0:
                errors = np.array([np.atleast_1d(v) for v in values]) - truth
                bias = np.mean(errors, axis=0)
                mse = np.mean(errors ** 2, axis=0)
            else:
                bias = mse = np.full(len(truth), np.nan)
            for coef in range(len(truth)):
                rows.append((name, n, coef + 1, bias[coef], mse[coef]))

    if cfg.experiment == 2:
        names = ('estimator', 'n', 'mise')
    else:
        names = ('estimator', 'n', 'coef', 'bias', 'mse')
    return Table(rows=rows, names=names), failures, kept


def run_monte_carlo(cfg, workers=None, verbose=False):
    """
    Runs the experiment described by ``cfg``. Replication ``r`` draws from
    ``RngStream(cfg.master_seed, r)``, so results do not depend on the
    number of workers. Replications where an estimator fails are dropped
    (or, with ``keep_failures``, replaced by the solver's best iterate) and
    counted.

    Args:

        cfg (``ExperimentConfig``): The experiment.

        workers (``int``, optional): Size of the process pool, capped by the
            ``ACR_THREADS`` environment variable; 1 runs in-process. Default
            is ``None`` (the cap).

        verbose (``bool``, optional): Print one line per sample size.
            Default is ``False``.

    Returns:

        report (``MonteCarloReport``): Bias and MSE (or MISE) per estimator.
    """
    workers = _worker_count(workers)
    start = time.time()
    results = {}
    pool = Pool(workers) if workers > 1 else None
    try:
        for n in cfg.n:
            tasks = [(cfg, n, index) for index in range(cfg.replications)]
            if pool is None:
                results[n] = [_replicate(task) for task in tasks]
            else:
                chunk = max(1, len(tasks) // (4 * workers))
                results[n] = pool.map(_replicate, tasks, chunksize=chunk)
            if verbose:
                dropped = sum(status == 'failed' for replication in results[n]
                              for _, status in replication.values())
                print('Experiment %i, n = %i: %i replications, %i failed '
                      'estimates' % (cfg.experiment, n, cfg.replications,
                                     dropped))
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    table, failures, kept = _summarize(cfg, results)
    report = MonteCarloReport(cfg, table, failures, kept, time.time() - start)
    if any(failures.values()):
        warnings.warn('%i estimates failed and were dropped (largest share '
                      '%.1f%% of the replications).'
                      % (sum(failures.values()), 100 * report.failure_rate()))
    return report
