#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Kernel regression: the local constant (Nadaraya-Watson) smoother, its
composite version, the two composite estimators that remove the smoothing
bias across a schedule of bandwidths, cross-validated bandwidth selection and
the limiting covariance matrices used to build optimal weights.
"""

import warnings
import numpy as np
from . import tools
from .combiner import (InitialEstimateSet, WeightVector,
                       combine_unknown_scale, optimal_tilde_weights,
                       solve_original_weights)


__all__ = ["KernelSpec", "BandwidthSchedule", "RegressionSample",
           "KernelMatrices", "nw_estimate", "clc_estimate", "xi_hat_nw",
           "ace_r1", "ace_r2", "cv_scores", "cv_bandwidth", "a_matrices",
           "kernel_weight_vectors", "extrapolation_weights",
           "nw_limiting_variance"]


# Half-width used to truncate kernels with infinite support
GAUSSIAN_TRUNCATION = 12.0


class KernelSpec(object):
    """
    Symmetric second-order kernel.

    Args:

        kind (``str``): Name of the kernel.

        function (callable): Vectorized kernel ``K(u)``.

        support (``float``, optional): Half-width of the support, ``numpy.inf``
            for kernels positive everywhere. Default is ``numpy.inf``.

        validate (``bool``, optional): Check by quadrature that ``K``
            integrates to one, and check symmetry on a grid. Default is
            ``True``.
    """
    def __init__(self, kind, function, support=np.inf, validate=True):
        self.kind = kind
        self.function = function
        self.support = support
        if validate:
            total = self.integrate(self.function)
            if abs(total - 1) > 1E-8:
                raise ValueError('Kernel "%s" integrates to %.10g, not 1.'
                                 % (kind, total))
            u = np.linspace(0, self.half_width, 101)
            if not np.allclose(self.function(u), self.function(-u),
                               rtol=0, atol=1E-14):
                raise ValueError('Kernel "%s" is not symmetric.' % kind)
        self.mu2 = self.integrate(lambda u: u ** 2 * self.function(u))

    def __call__(self, u):
        return self.function(u)

    def __repr__(self):
        return 'KernelSpec(%s)' % self.kind

    @property
    def half_width(self):
        if np.isfinite(self.support):
            return self.support
        else:
            return GAUSSIAN_TRUNCATION

    # Integral of f over the (truncated) support
    def integrate(self, f):
        return tools.integrate(f, -self.half_width, self.half_width)

    @classmethod
    def epanechnikov(cls):
        return cls('epanechnikov', lambda u: np.where(
            np.abs(u) <= 1, 0.75 * (1 - np.asarray(u) ** 2), 0.0), support=1.0)

    @classmethod
    def gaussian(cls):
        return cls('gaussian', tools.gaussian)

    # Looks a kernel up by name
    @classmethod
    def from_name(cls, name):
        if name == 'epanechnikov':
            return cls.epanechnikov()
        elif name == 'gaussian':
            return cls.gaussian()
        else:
            raise ValueError('Kernel "%s" is not implemented.' % name)


def _kernel(k):
    if k is None:
        return KernelSpec.epanechnikov()
    else:
        return k


class BandwidthSchedule(object):
    """
    Bandwidths ``h_k = tau_k n^-eta`` of the initial smoothers.

    Args:

        eta (``float``): Rate exponent in (0, 1).

        taus (array-like): Positive, strictly increasing scale factors.

        n (``int``): Sample size.
    """
    def __init__(self, eta, taus, n):
        if not 0 < eta < 1:
            raise ValueError('`eta` must lie in (0, 1), got %r.' % eta)
        self.eta = eta
        self.taus = tools.as_vector(taus, 'taus')
        if len(self.taus) < 1 or np.any(self.taus <= 0):
            raise ValueError('Scale factors must be positive.')
        if np.any(np.diff(self.taus) <= 0):
            raise ValueError('Scale factors must be strictly increasing.')
        if n < 1:
            raise ValueError('Sample size must be positive.')
        self.n = int(n)

    @property
    def bandwidths(self):
        return self.taus * self.n ** (-self.eta)

    @property
    def m(self):
        return len(self.taus)

    # Schedule whose bandwidths are multiples of a pilot bandwidth
    @classmethod
    def from_bandwidth(cls, h, n, eta=0.2,
                       multipliers=(0.6, 0.8, 1.0, 1.2, 1.4)):
        if h <= 0:
            raise ValueError('Pilot bandwidth must be positive.')
        taus = np.sort(np.asarray(multipliers, dtype=float)) * h * n ** eta
        return cls(eta, taus, n)


class RegressionSample(object):
    """
    Observations ``(x_i, y_i)`` of a nonparametric regression with design
    points in the unit interval.
    """
    def __init__(self, xs, ys):
        self.xs = tools.as_vector(xs, 'xs')
        self.ys = tools.as_vector(ys, 'ys')
        if len(self.xs) != len(self.ys):
            raise ValueError('`xs` and `ys` must have the same length.')
        if len(self.xs) == 0:
            raise ValueError('The sample is empty.')
        if np.any(self.xs < 0) or np.any(self.xs > 1):
            raise ValueError('Design points must lie in [0, 1].')
        self.n = len(self.xs)


def _check_schedule(s, sched):
    span = np.ptp(s.xs)
    if span > 0 and np.any(sched.bandwidths >= span):
        raise tools.InvalidScheme('Bandwidths must be smaller than the range '
                                  'of the design points (%.4g).' % span)


def _window(s, x, h, k):
    weights = k((s.xs - x) / h)
    total = np.sum(weights)
    if total <= 1E-300:
        raise tools.EmptyWindow('No design point within the kernel window at '
                                'x = %.6g, h = %.6g.' % (x, h))
    return weights, total


def nw_estimate(s, x, h, k=None):
    """
    Nadaraya-Watson estimate of the regression function at ``x``.

    Args:

        s (``RegressionSample``): Observations.

        x (``float``): Evaluation point.

        h (``float``): Bandwidth.

        k (``KernelSpec``, optional): Kernel. Default is Epanechnikov.

    Returns:

        estimate (``float``): Kernel-weighted mean of the responses.
    """
    if h <= 0:
        raise ValueError('Bandwidth must be positive.')
    weights, total = _window(s, x, h, _kernel(k))
    return float(np.dot(weights, s.ys) / total)


def clc_estimate(s, x, hs, k=None):
    """
    Composite local constant estimate: the kernel weights of all bandwidths
    in ``hs`` are pooled before taking the weighted mean.
    """
    k = _kernel(k)
    hs = tools.as_vector(hs, 'hs')
    if np.any(hs <= 0):
        raise ValueError('Bandwidths must be positive.')
    weights = np.sum([k((s.xs - x) / h) for h in hs], axis=0)
    total = np.sum(weights)
    if total <= 1E-300:
        raise tools.EmptyWindow('No design point within any kernel window at '
                                'x = %.6g.' % x)
    return float(np.dot(weights, s.ys) / total)


def xi_hat_nw(s, x, tau, sched, k=None, leave_one_out=True):
    """
    Estimated bias function of the smoother at bandwidth
    ``h = tau n^-eta``: the kernel-weighted mean residual in the window, with
    the local density estimated by ``n^-1 sum K_h(x_i - x)``.

    Args:

        s (``RegressionSample``): Observations.

        x (``float``): Evaluation point.

        tau (``float``): Scale factor of the bandwidth.

        sched (``BandwidthSchedule``): Supplies ``n`` and ``eta``.

        k (``KernelSpec``, optional): Kernel. Default is Epanechnikov.

        leave_one_out (``bool``, optional): Residuals against the fit that
            leaves the point out. With the full-sample fit the weighted
            residuals sum to zero and the estimate vanishes identically.
            Default is ``True``.

    Returns:

        xi_hat (``float``): Estimated bias function.
    """
    h = tau * sched.n ** (-sched.eta)
    weights, total = _window(s, x, h, _kernel(k))
    weighted_sum = np.dot(weights, s.ys)
    if not leave_one_out:
        fitted = weighted_sum / total
        return float(np.dot(weights, s.ys - fitted) / total)

    inside = weights > 0
    others = total - weights
    if np.any(others[inside] <= 1E-300):
        raise tools.EmptyWindow('Leave-one-out fit needs two design points '
                                'in the window at x = %.6g, h = %.6g.'
                                % (x, h))
    fitted = np.zeros(s.n)
    fitted[inside] = (weighted_sum - weights[inside] * s.ys[inside]) / \
        others[inside]
    return float(np.dot(weights[inside], s.ys[inside] - fitted[inside]) /
                 total)


def _weight_values(w, m):
    if w is None:
        w = WeightVector.equal(m)
    elif not isinstance(w, WeightVector):
        w = WeightVector(w)
    if len(w) != m:
        raise ValueError('Got %i weights for %i bandwidths.' % (len(w), m))
    return w


def ace_r1(s, x, sched, w=None, k=None):
    """
    Composite estimate with unknown bias scale: the Nadaraya-Watson fits at
    all bandwidths of ``sched`` are regressed on ``tau_k**2`` and the
    intercept is returned.
    """
    k = _kernel(k)
    _check_schedule(s, sched)
    w = _weight_values(w, sched.m)
    r_hats = [nw_estimate(s, x, h, k) for h in sched.bandwidths]
    estimates = InitialEstimateSet(sched.taus, r_hats, sched.taus ** 2)
    return combine_unknown_scale(estimates, w).theta_tilde


def ace_r2(s, x, sched, w=None, k=None, leave_one_out=True):
    """
    Composite estimate with known bias scale ``n^-(1 - eta)/2``: every fit
    is corrected by its estimated bias function before averaging.
    """
    k = _kernel(k)
    _check_schedule(s, sched)
    w = _weight_values(w, sched.m)
    phi = sched.n ** (-(1 - sched.eta) / 2.)
    corrected = [nw_estimate(s, x, h, k) -
                 phi * xi_hat_nw(s, x, tau, sched, k, leave_one_out)
                 for tau, h in zip(sched.taus, sched.bandwidths)]
    return float(np.dot(w.values, corrected))


def _folds(xs, folds):
    order = np.argsort(xs, kind='stable')
    assignment = np.empty(len(xs), dtype=int)
    assignment[order] = np.arange(len(xs)) % folds
    return assignment


def cv_scores(s, folds=2, grid=None, k=None):
    """
    Out-of-fold mean squared prediction error of the Nadaraya-Watson
    smoother for every bandwidth in ``grid``. Folds alternate along the
    sorted design points. Test points with an empty window are skipped; a
    bandwidth that predicts no point at all scores ``numpy.inf``.

    Args:

        s (``RegressionSample``): Observations.

        folds (``int``, optional): Number of folds. Default is 2.

        grid (array-like, optional): Candidate bandwidths. Default is 30
            log-spaced values between 0.02 and 0.5.

        k (``KernelSpec``, optional): Kernel. Default is Epanechnikov.

    Returns:

        grid (``numpy.ndarray``): Sorted candidate bandwidths.

        scores (``numpy.ndarray``): Cross-validation error of each.
    """
    k = _kernel(k)
    if folds < 2:
        raise ValueError('At least two folds are required.')
    if grid is None:
        grid = np.geomspace(0.02, 0.5, 30)
    grid = np.sort(tools.as_vector(grid, 'grid'))
    if len(grid) == 0 or np.any(grid <= 0):
        raise ValueError('The bandwidth grid must be nonempty and positive.')
    assignment = _folds(s.xs, folds)

    scores = np.full(len(grid), np.inf)
    for j, h in enumerate(grid):
        squares = 0.0
        count = 0
        for fold in range(folds):
            test = assignment == fold
            train = ~test
            weights = k((s.xs[test][:, None] - s.xs[train][None, :]) / h)
            totals = np.sum(weights, axis=1)
            ok = totals > 1E-300
            prediction = weights[ok].dot(s.ys[train]) / totals[ok]
            squares += np.sum((s.ys[test][ok] - prediction) ** 2)
            count += np.sum(ok)
        if count > 0:
            scores[j] = squares / count
    return grid, scores


def cv_bandwidth(s, folds=2, grid=None, k=None):
    """
    Bandwidth minimizing the cross-validation error of ``cv_scores``; ties go
    to the smaller bandwidth.
    """
    grid, scores = cv_scores(s, folds, grid, k)
    empty = np.isinf(scores)
    if np.all(empty):
        raise tools.AllWindowsEmpty('No bandwidth in the grid predicts any '
                                    'out-of-fold point.')
    elif np.any(empty):
        warnings.warn('%i of %i bandwidths predicted no out-of-fold point '
                      'and were skipped.' % (np.sum(empty), len(grid)))
    return float(grid[np.argmin(scores)])


class KernelMatrices(object):
    """
    Limiting covariance factors of the Nadaraya-Watson fits across a
    schedule. Unpacks as ``a1, a2``.

    Attributes:

        a2 (``numpy.ndarray``): Covariance factor of the raw fits.

        a1 (``numpy.ndarray``): ``s_k s_j a2`` with the weight-free ``s``.

        s (``numpy.ndarray``): Weight-free bias-removal factors.

        a1w, s_w, g (``numpy.ndarray``): Weighted counterparts, ``None``
            unless weights were supplied; ``g = w * s_w``.
    """
    def __init__(self, a2, s, s_w=None, w=None):
        self.a2 = a2
        self.s = s
        self.a1 = np.outer(s, s) * a2
        self.s_w = s_w
        if s_w is not None:
            self.a1w = np.outer(s_w, s_w) * a2
            self.g = w * s_w
        else:
            self.a1w = None
            self.g = None

    def __iter__(self):
        return iter((self.a1, self.a2))


def _removal_factors(t2, w=None):
    if w is None:
        center = np.mean(t2)
        deviation = t2 - center
        spread = np.sum(deviation ** 2)
    else:
        center = np.dot(w, t2)
        deviation = t2 - center
        spread = np.dot(w, deviation ** 2)
    if spread <= 1E-12 * np.max(t2 ** 2):
        return np.ones(len(t2))
    return 1 - center * deviation / spread


def a_matrices(taus, k=None, w=None, closed_form=True):
    """
    Limiting covariance factors of the fits at scale factors ``taus``:
    ``a2[k, j] = (tau_k tau_j)^-1 int K(u / tau_k) K(u / tau_j) du``, and
    ``a1 = s s' * a2`` with ``s_k = 1 - mean(tau^2) (tau_k^2 - mean(tau^2))
    / sum (tau_j^2 - mean(tau^2))^2``.

    Args:

        taus (array-like): Positive scale factors.

        k (``KernelSpec``, optional): Kernel. Default is Epanechnikov.

        w (``WeightVector`` or array-like, optional): Weights; when given
            the weighted factors ``s_w``, ``a1w`` and ``g`` are also
            computed. Default is ``None``.

        closed_form (``bool``, optional): Use the closed form of the
            Gaussian kernel instead of quadrature. Default is ``True``.

    Returns:

        matrices (``KernelMatrices``): Unpacks as ``a1, a2``.
    """
    k = _kernel(k)
    taus = tools.as_vector(taus, 'taus')
    if len(taus) == 0 or np.any(taus <= 0):
        raise ValueError('Scale factors must be positive.')
    m = len(taus)

    a2 = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            a2[i, j] = a2[j, i] = _a2_entry(taus[i], taus[j], k, closed_form)

    t2 = taus ** 2
    s = _removal_factors(t2)
    if w is None:
        return KernelMatrices(a2, s)
    w = _weight_values(w, m).values
    return KernelMatrices(a2, s, _removal_factors(t2, w), w)


def _a2_entry(tau_k, tau_j, k, closed_form):
    if closed_form and k.kind == 'gaussian':
        return (2 * np.pi) ** -0.5 * (tau_k ** 2 + tau_j ** 2) ** -0.5

    def product(u):
        return k(u / tau_k) * k(u / tau_j) / (tau_k * tau_j)

    if np.isfinite(k.support):
        limit = k.support * min(tau_k, tau_j)
    else:
        limit = GAUSSIAN_TRUNCATION * tau_k * tau_j / np.hypot(tau_k, tau_j)
    return tools.integrate(product, -limit, limit)


def kernel_weight_vectors(taus, k=None):
    """
    Optimal weights of the two composite kernel estimators: ``w1`` minimizes
    ``w' a1 w`` and ``w2`` minimizes ``w' a2 w``. The attained factors are
    attached as ``variance``.
    """
    a1, a2 = a_matrices(taus, k)
    return optimal_tilde_weights(a1), optimal_tilde_weights(a2)


def extrapolation_weights(taus, k=None, closed_form=True):
    """
    Exact variance-optimal weights of ``ace_r1``. The regenerated weights of
    ``ace_r1`` always sum to one and are orthogonal to ``tau**2``; among such
    vectors the minimizer of ``v' a2 v`` is
    ``a2^-1 C (C' a2^-1 C)^-1 e1`` with ``C = (1, tau**2)``. The original
    weights that regenerate it are returned.

    Args:

        taus (array-like): At least two distinct positive scale factors.

        k (``KernelSpec``, optional): Kernel. Default is Epanechnikov.

        closed_form (``bool``, optional): Passed to ``a_matrices``. Default
            is ``True``.

    Returns:

        w (``WeightVector``): Original weights, with the attained factor
            ``v' a2 v`` attached as ``variance``.
    """
    taus = tools.as_vector(taus, 'taus')
    if len(np.unique(taus)) < 2:
        raise tools.DegenerateDesign('At least two distinct scale factors '
                                     'are required.')
    a2 = a_matrices(taus, k, closed_form=closed_form).a2
    t2 = taus ** 2
    constraints = np.column_stack([np.ones(len(taus)), t2])
    solved = np.column_stack([tools.solve_spd(a2, column)
                              for column in constraints.T])
    gram = constraints.T.dot(solved)
    tilde = solved.dot(np.linalg.solve(gram, [1.0, 0.0]))
    w0 = solve_original_weights(tilde, t2)
    return WeightVector(w0.values, variance=float(tilde.dot(a2).dot(tilde)))


def nw_limiting_variance(k=None):
    """
    Variance factor ``int K^2`` of a single Nadaraya-Watson fit.
    """
    k = _kernel(k)
    return k.integrate(lambda u: k(u) ** 2)
