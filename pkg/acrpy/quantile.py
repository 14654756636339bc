#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Linear quantile regression, the composite quantile regression baseline and
the composite estimator that debiases a set of quantile fits with a one-step
correction and combines them with (possibly optimal) weights.
"""

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.optimize import linprog
from scipy.stats import gaussian_kde
from . import tools
from .combiner import WeightVector, optimal_tilde_weights


__all__ = ["DesignData", "QuantileFit", "ErrorDensity", "check_loss",
           "fit_quantile", "fit_cqr", "ace_quantile", "a0_matrix",
           "optimal_qr_weights", "zou_yuan_weights", "kde_density",
           "limiting_variance"]


class DesignData(object):
    """
    Covariates and responses of a linear model ``y = b + x beta + e``.

    Args:

        x (array-like): Covariates, shape (n, p). A 1-d array is taken as a
            single covariate; shape (n, 0) fits an intercept only.

        y (array-like): Responses, shape (n, ).
    """
    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        self.x = tools.as_matrix(x, 'x')
        self.y = tools.as_vector(y, 'y')
        self.n, self.p = self.x.shape
        if len(self.y) != self.n:
            raise ValueError('`x` has %i rows but `y` has %i entries.'
                             % (self.n, len(self.y)))
        if self.n <= self.p:
            raise ValueError('At least p + 1 = %i observations are required.'
                             % (self.p + 1))

    # Design matrix with a leading column of ones
    def design(self):
        return np.hstack([np.ones((self.n, 1)), self.x])


class QuantileFit(object):
    """
    Result of a linear quantile regression.

    Args:

        tau (``float``): Quantile level.

        intercept (``float``): Fitted intercept.

        beta (``numpy.ndarray``): Fitted slopes.

        objective (``float``): Sum of check losses at the solution.

        iterations (``int``): Solver iterations.
    """
    def __init__(self, tau, intercept, beta, objective, iterations):
        self.tau = tau
        self.intercept = intercept
        self.beta = beta
        self.objective = objective
        self.iterations = iterations

    def __repr__(self):
        return 'QuantileFit(tau=%g, intercept=%.6g, beta=%s)' % (
            self.tau, self.intercept, np.array2string(self.beta, precision=6))


class ErrorDensity(object):
    """
    Density of the regression errors, used to estimate ``f(Q(tau))`` at the
    fitted intercepts.

    Args:

        density (callable): Function returning the density at a point.
    """
    def __init__(self, density):
        self.density = density

    def __call__(self, u):
        value = float(self.density(u))
        if not np.isfinite(value) or value < 0:
            raise ValueError('Error density must be finite and nonnegative, '
                             'got %r at %r.' % (value, u))
        return value

    # Exponential density; zero on the non-positive half line
    @classmethod
    def exponential(cls, rate=1.0):
        def density(u):
            return rate * np.exp(-rate * u) if u > 0 else 0.0
        return cls(density)


def _check_tau(tau):
    if not 0 < tau < 1:
        raise ValueError('Quantile level must lie in (0, 1), got %r.' % tau)


def check_loss(t, tau):
    """
    Check function ``tau * max(t, 0) + (1 - tau) * max(-t, 0)``.

    Args:
        t (scalar or ``numpy.array``): Residuals.
        tau (``float``): Quantile level in (0, 1).

    Returns:
        loss (scalar or ``numpy.array``): Loss of each residual.
    """
    _check_tau(tau)
    t = np.asarray(t, dtype=float)
    loss = np.where(t >= 0, tau * t, (tau - 1) * t)
    if loss.ndim == 0:
        return float(loss)
    return loss


def _objective(z, coef, y, tau_rows):
    r = y - z.dot(coef)
    return float(np.sum(np.where(r >= 0, tau_rows * r, (tau_rows - 1) * r)))


def _solve_highs(z, y, tau_rows):
    n_rows, q = z.shape
    identity = scipy.sparse.identity(n_rows, format='csr')
    a_eq = scipy.sparse.hstack([scipy.sparse.csr_matrix(z), identity,
                                -identity], format='csr')
    cost = np.concatenate([np.zeros(q), tau_rows, 1 - tau_rows])
    bounds = [(None, None)] * q + [(0, None)] * (2 * n_rows)
    result = linprog(cost, A_eq=a_eq, b_eq=y, bounds=bounds, method='highs')
    if result.status != 0:
        best = None if result.x is None else result.x[:q]
        raise tools.NoConvergence('Linear program failed: %s'
                                  % result.message, best=best)
    return result.x[:q], int(result.nit)


def _polish(z, y, tau_rows, coef, objective):
    # Interpolate the q smallest residuals and keep the vertex if better
    q = z.shape[1]
    basis = np.argsort(np.abs(y - z.dot(coef)))[:q]
    try:
        vertex = scipy.linalg.solve(z[basis], y[basis])
    except (scipy.linalg.LinAlgError, ValueError):
        return coef, objective
    vertex_objective = _objective(z, vertex, y, tau_rows)
    if np.all(np.isfinite(vertex)) and vertex_objective <= objective:
        return vertex, vertex_objective
    else:
        return coef, objective


def _solve_irls(z, y, tau_rows, eps=1E-8, max_iter=500):
    coef = scipy.linalg.lstsq(z, y)[0]
    best, best_objective = coef, _objective(z, coef, y, tau_rows)
    previous = np.inf
    for iteration in range(1, max_iter + 1):
        r = y - z.dot(coef)
        weights = np.where(r >= 0, tau_rows, 1 - tau_rows) / \
            np.maximum(np.abs(r), eps)
        root = np.sqrt(weights)
        coef = scipy.linalg.lstsq(z * root[:, None], y * root)[0]
        objective = _objective(z, coef, y, tau_rows)
        if objective < best_objective:
            best, best_objective = coef, objective
        if abs(previous - objective) <= 1E-10 * (1 + objective):
            best, best_objective = _polish(z, y, tau_rows, best,
                                           best_objective)
            return best, iteration
        previous = objective
    raise tools.NoConvergence('Reweighted least squares did not converge in '
                              '%i iterations.' % max_iter, best=best,
                              residual=best_objective)


def _fit(z, y, tau_rows, method):
    if np.linalg.matrix_rank(z) < z.shape[1]:
        raise tools.RankDeficient('The design with intercept is rank '
                                  'deficient.')
    if method == 'highs':
        coef, iterations = _solve_highs(z, y, tau_rows)
    elif method == 'irls':
        coef, iterations = _solve_irls(z, y, tau_rows)
    else:
        raise ValueError('Quantile regression method "%s" is not '
                         'implemented.' % method)
    return coef, _objective(z, coef, y, tau_rows), iterations


def fit_quantile(data, tau, method='highs'):
    """
    Linear quantile regression by minimizing the sum of check losses.

    Args:

        data (``DesignData``): Covariates and responses.

        tau (``float``): Quantile level in (0, 1).

        method (``str``, optional): ``'highs'`` solves the exact linear
            program with ``scipy.optimize.linprog``; ``'irls'`` uses
            iteratively reweighted least squares on a smoothed loss, followed
            by a vertex polish. Default is ``'highs'``.

    Returns:

        fit (``QuantileFit``): Intercept and slopes at level ``tau``.
    """
    _check_tau(tau)
    z = data.design()
    coef, objective, iterations = _fit(z, data.y, np.full(data.n, tau),
                                       method)
    return QuantileFit(tau, float(coef[0]), coef[1:], objective, iterations)


def fit_cqr(data, taus, method='highs'):
    """
    Composite quantile regression: one intercept per level, slopes shared.

    Args:

        data (``DesignData``): Covariates and responses.

        taus (array-like): Distinct quantile levels in (0, 1).

        method (``str``, optional): Solver, as in ``fit_quantile``. Default
            is ``'highs'``.

    Returns:

        beta (``numpy.ndarray``): Shared slopes.

        intercepts (``numpy.ndarray``): Intercept of each level.
    """
    taus = tools.as_vector(taus, 'taus')
    for tau in taus:
        _check_tau(tau)
    if len(np.unique(taus)) != len(taus):
        raise ValueError('Quantile levels must be distinct.')
    m, n = len(taus), data.n

    if np.linalg.matrix_rank(data.design()) < data.p + 1:
        raise tools.RankDeficient('The design with intercept is rank '
                                  'deficient.')
    z = np.hstack([np.kron(np.eye(m), np.ones((n, 1))),
                   np.tile(data.x, (m, 1))])
    coef, objective, iterations = _fit(z, np.tile(data.y, m),
                                       np.repeat(taus, n), method)
    return coef[m:], coef[:m]


def ace_quantile(data, taus, w, fe, fits=None, method='highs'):
    """
    Composite quantile estimator of the slopes. Every quantile fit is
    debiased with the one-step correction

        ``(f(Q(tau)) n)^-1 D^-1 sum_i x_i (tau - I(y_i <= b + beta' x_i))``

    where ``D = x'x / n`` and ``f(Q(tau))`` is ``fe`` at the fitted
    intercept, and the corrected slopes are averaged with ``w``.

    Args:

        data (``DesignData``): Covariates and responses, ``p >= 1``.

        taus (array-like): Quantile levels.

        w (``WeightVector`` or array-like): Weights of the levels.

        fe (``ErrorDensity`` or callable): Error density.

        fits (``list``, optional): Precomputed ``QuantileFit`` objects, one
            per level. Default is ``None`` (fit them here).

        method (``str``, optional): Solver used when fitting. Default is
            ``'highs'``.

    Returns:

        beta_tilde (``numpy.ndarray``): Composite slopes.
    """
    taus = tools.as_vector(taus, 'taus')
    if not isinstance(w, WeightVector):
        w = WeightVector(w)
    if len(w) != len(taus):
        raise ValueError('Got %i weights for %i quantile levels.'
                         % (len(w), len(taus)))
    if data.p < 1:
        raise ValueError('The composite estimator needs at least one '
                         'covariate.')
    if fits is None:
        fits = [fit_quantile(data, tau, method) for tau in taus]

    n = data.n
    d_hat = data.x.T.dot(data.x) / n
    tie = 1E-10 * (1 + np.max(np.abs(data.y)))
    corrected = []
    for tau, fit in zip(taus, fits):
        density = fe(fit.intercept)
        if density <= 1E-12:
            raise tools.ZeroDensity('Error density vanishes at the fitted '
                                    'intercept %.6g (tau = %g).'
                                    % (fit.intercept, tau))
        residual = data.y - fit.intercept - data.x.dot(fit.beta)
        score = data.x.T.dot(tau - (residual <= tie))
        step = tools.solve_spd(d_hat, score) / (density * n)
        corrected.append(fit.beta - step)
    return np.dot(w.values, np.array(corrected))


def a0_matrix(taus, fq):
    """
    Limiting covariance factor of the corrected quantile estimates,
    ``min(tau_k, tau_j) (1 - max(tau_k, tau_j)) / (f_k f_j)``.

    Args:
        taus (array-like): Quantile levels.
        fq (array-like): Error density at each quantile, all positive.

    Returns:
        a0 (``numpy.ndarray``): Symmetric matrix, shape (m, m).
    """
    taus = tools.as_vector(taus, 'taus')
    fq = tools.as_vector(fq, 'fq')
    if len(fq) != len(taus):
        raise ValueError('`taus` and `fq` must have the same length.')
    if np.any(fq <= 0):
        raise ValueError('Densities at the quantiles must be positive.')
    lower = np.minimum.outer(taus, taus)
    upper = np.maximum.outer(taus, taus)
    return lower * (1 - upper) / np.outer(fq, fq)


def optimal_qr_weights(a0):
    """
    Weights minimizing ``w' a0 w`` subject to summing to one.
    """
    return optimal_tilde_weights(a0)


def zou_yuan_weights(fq):
    """
    Weights proportional to the error density at each quantile. With these
    weights the composite estimator has the limiting covariance of composite
    quantile regression.
    """
    fq = tools.as_vector(fq, 'fq')
    if np.any(fq <= 0):
        raise ValueError('Densities at the quantiles must be positive.')
    return WeightVector(fq / np.sum(fq))


def limiting_variance(a0, w):
    """
    Quadratic form ``w' a0 w``: the variance factor of the composite
    estimator with weights ``w``.
    """
    a0 = tools.as_matrix(a0, 'a0')
    if not isinstance(w, WeightVector):
        w = WeightVector(w)
    return float(w.values.dot(a0).dot(w.values))


def kde_density(data, tau=0.5, method='highs'):
    """
    Estimates the error density for the case where it is unknown: the errors
    are recovered as ``y - x beta`` from a quantile fit at ``tau`` and
    smoothed with a Gaussian kernel density estimate using Silverman's
    bandwidth.

    Args:

        data (``DesignData``): Covariates and responses.

        tau (``float``, optional): Level of the pilot fit. Default is 0.5.

        method (``str``, optional): Solver of the pilot fit. Default is
            ``'highs'``.

    Returns:

        fe (``ErrorDensity``): Estimated density.
    """
    fit = fit_quantile(data, tau, method)
    errors = data.y - data.x.dot(fit.beta)
    if np.ptp(errors) == 0:
        raise tools.DegenerateDesign('All recovered errors are equal; no '
                                     'density can be estimated.')
    kde = gaussian_kde(errors, bw_method='silverman')
    return ErrorDensity(lambda u: kde.evaluate(u)[0])
