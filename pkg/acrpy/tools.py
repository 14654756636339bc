#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Various general numerical tools used by the code: dense symmetric positive
definite solves, adaptive quadrature, bounded scalar minimization and a damped
Newton root finder, plus the exceptions raised across the package.
"""

import warnings
import numpy as np
import scipy.linalg
from scipy.integrate import quad, IntegrationWarning
from scipy.optimize import minimize_scalar as _bounded_minimize


__all__ = ["ACRError", "NotPositiveDefinite", "NoConvergence",
           "DegenerateDesign", "RankDeficient", "ZeroDensity", "EmptyWindow",
           "AllWindowsEmpty", "InvalidScheme", "DegenerateVariance",
           "ConfigError", "UsageError", "IoError", "as_vector", "as_matrix",
           "solve_spd", "integrate", "minimize_scalar", "solve_nonlinear",
           "gaussian"]


class ACRError(Exception):
    """
    Base class of every error raised by ``acrpy``.
    """
    pass


class NotPositiveDefinite(ACRError, ValueError):
    pass


class NoConvergence(ACRError, RuntimeError):
    """
    An iterative method stopped before meeting its tolerance.

    Args:

        message (``str``): Description of the failure.

        best (optional): Best iterate found before giving up. Default is
            ``None``.

        residual (``float``, optional): Residual of ``best``. Default is
            ``None``.
    """
    def __init__(self, message, best=None, residual=None):
        super(NoConvergence, self).__init__(message)
        self.best = best
        self.residual = residual


class DegenerateDesign(ACRError, ValueError):
    pass


class RankDeficient(ACRError, ValueError):
    pass


class ZeroDensity(ACRError, ValueError):
    pass


class EmptyWindow(ACRError, ValueError):
    pass


class AllWindowsEmpty(ACRError, ValueError):
    pass


class InvalidScheme(ACRError, ValueError):
    pass


class DegenerateVariance(ACRError, ArithmeticError):
    pass


class ConfigError(ACRError, ValueError):
    pass


class UsageError(ACRError, ValueError):
    pass


class IoError(ACRError, OSError):
    pass


def as_vector(values, name='vector'):
    """
    Converts ``values`` into a 1-d float array with finite entries.

    Args:
        values (array-like): Input entries.
        name (``str``, optional): Name used in error messages.

    Returns:
        vector (``numpy.ndarray``): Float64 copy of ``values``.
    """
    vector = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(vector)):
        raise ValueError('All entries of `%s` must be finite.' % name)
    return vector


def as_matrix(values, name='matrix'):
    """
    Converts ``values`` into a 2-d float array with finite entries.

    Args:
        values (array-like): Input entries, shape (rows, cols).
        name (``str``, optional): Name used in error messages.

    Returns:
        matrix (``numpy.ndarray``): Float64 copy of ``values``.
    """
    matrix = np.array(values, dtype=float)
    if matrix.ndim != 2:
        raise ValueError('`%s` must be two-dimensional, got shape %s.'
                         % (name, matrix.shape))
    if not np.all(np.isfinite(matrix)):
        raise ValueError('All entries of `%s` must be finite.' % name)
    return matrix


def solve_spd(a, b, pivot_tol=1E-12):
    """
    Solves ``a x = b`` for a symmetric positive definite ``a`` through its
    Cholesky factor, followed by one step of iterative refinement.

    Args:

        a (array-like): Symmetric positive definite matrix, shape (m, m).

        b (array-like): Right-hand side, shape (m, ).

        pivot_tol (``float``, optional): A Cholesky pivot smaller than
            ``pivot_tol`` times the largest diagonal entry of ``a`` is treated
            as a loss of definiteness. Default is 1E-12.

    Returns:

        x (``numpy.ndarray``): Solution vector.
    """
    a = as_matrix(a, 'a')
    b = as_vector(b, 'b')
    m = a.shape[0]
    if a.shape[1] != m or len(b) != m:
        raise ValueError('Dimensions of `a` %s and `b` (%i, ) do not agree.'
                         % (a.shape, len(b)))
    scale = np.max(np.abs(a)) if m > 0 else 0.0
    if not np.allclose(a, a.T, rtol=0.0, atol=1E-12 * max(scale, 1E-300)):
        raise ValueError('`a` must be symmetric.')

    max_diagonal = np.max(np.diag(a))
    if max_diagonal <= 0:
        raise NotPositiveDefinite('Matrix has no positive diagonal entry.')
    try:
        factor = scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite('Cholesky factorization failed; the matrix '
                                  'is not positive definite.')
    pivots = np.diag(factor) ** 2
    if np.any(pivots <= pivot_tol * max_diagonal):
        raise NotPositiveDefinite(
            'Cholesky pivot %.3e is below %.1e times the largest diagonal '
            'entry.' % (np.min(pivots), pivot_tol))

    x = scipy.linalg.cho_solve((factor, True), b, check_finite=False)
    # One refinement step
    residual = b - a.dot(x)
    x += scipy.linalg.cho_solve((factor, True), residual, check_finite=False)
    return x


def integrate(f, lo, hi, tol=1E-10, points=None, max_subdivisions=50):
    """
    Adaptive quadrature of ``f`` on ``[lo, hi]``.

    Args:

        f (callable): Integrand, continuous on the interval.

        lo (``float``): Lower limit.

        hi (``float``): Upper limit, must be larger than ``lo``.

        tol (``float``, optional): Absolute error target. Default is 1E-10.

        points (array-like, optional): Interior break points (kinks of the
            integrand). Default is ``None``.

        max_subdivisions (``int``, optional): Subdivision limit. Default is
            50.

    Returns:

        value (``float``): The integral.
    """
    if not lo < hi:
        raise ValueError('Integration limits must satisfy lo < hi.')
    with warnings.catch_warnings():
        warnings.simplefilter('error', IntegrationWarning)
        try:
            value, error = quad(f, lo, hi, epsabs=tol, epsrel=0.0,
                                limit=max_subdivisions, points=points)
        except IntegrationWarning as exc:
            raise NoConvergence('Quadrature did not reach the requested '
                                'tolerance: %s' % exc)
    if error > tol:
        raise NoConvergence('Quadrature error estimate %.3e exceeds %.3e.'
                            % (error, tol), best=value, residual=error)
    return value


def minimize_scalar(f, lo, hi, tol=1E-8, max_iter=200, strict=False):
    """
    Bounded minimization of a unimodal scalar function with Brent's method
    (golden-section steps with parabolic refinement). The end points are
    compared against the interior minimum, so a minimum sitting on the
    boundary is returned exactly.

    Args:

        f (callable): Function to minimize.

        lo (``float``): Lower end of the bracket.

        hi (``float``): Upper end of the bracket.

        tol (``float``, optional): Absolute tolerance in ``x``. Default is
            1E-8.

        max_iter (``int``, optional): Iteration cap. Default is 200.

        strict (``bool``, optional): Raise ``NoConvergence``, with the
            iterate attached, when the iteration cap is hit or the search
            ends on the boundary of the bracket, instead of returning the
            best point. Default is ``False``.

    Returns:

        x (``float``): Best point found.
    """
    if not lo < hi:
        raise ValueError('The bracket must satisfy lo < hi.')
    result = _bounded_minimize(f, bounds=(lo, hi), method='bounded',
                               options={'xatol': tol, 'maxiter': max_iter})
    if strict:
        x = float(result.x)
        if not result.success or not np.isfinite(result.fun):
            raise NoConvergence('Brent iterations stopped after %i steps.'
                                % result.nfev, best=x, residual=result.fun)
        edge = max(10 * tol, 1E-6 * (hi - lo))
        if x - lo <= edge or hi - x <= edge:
            raise NoConvergence('The search ended on the boundary of '
                                '[%.6g, %.6g].' % (lo, hi), best=x,
                                residual=result.fun)
        return x
    candidates = [(float(result.fun), float(result.x)),
                  (float(f(lo)), float(lo)), (float(f(hi)), float(hi))]
    finite = [c for c in candidates if np.isfinite(c[0])]
    if len(finite) == 0:
        return float(result.x)
    return min(finite)[1]


def _finite_difference_jacobian(g, x, gx, step):
    jacobian = np.empty((len(gx), len(x)))
    for j in range(len(x)):
        h = step * max(1.0, abs(x[j]))
        shifted = np.copy(x)
        shifted[j] += h
        jacobian[:, j] = (np.asarray(g(shifted), dtype=float) - gx) / h
    return jacobian


def solve_nonlinear(g, x0, tol=1E-9, step=1E-6, max_iter=100):
    """
    Solves ``g(x) = 0`` by damped Newton iterations on a forward-difference
    Jacobian. The step length is halved until the sup-norm of the residual
    decreases.

    Args:

        g (callable): Map from m-vectors to m-vectors.

        x0 (array-like): Starting point.

        tol (``float``, optional): Target for the sup-norm of ``g(x)``.
            Default is 1E-9.

        step (``float``, optional): Relative finite-difference step. Default
            is 1E-6.

        max_iter (``int``, optional): Newton iteration cap. Default is 100.

    Returns:

        x (``numpy.ndarray``): Root of ``g``.
    """
    x = as_vector(x0, 'x0')
    try:
        gx = np.asarray(g(x), dtype=float)
    except (ACRError, FloatingPointError, ZeroDivisionError) as exc:
        raise NoConvergence('The starting point cannot be evaluated: %s'
                            % exc)
    if not np.all(np.isfinite(gx)):
        raise NoConvergence('The function is not finite at the starting '
                            'point.')
    residual = np.max(np.abs(gx)) if len(gx) > 0 else 0.0

    for _ in range(max_iter):
        if residual <= tol:
            return x
        jacobian = _finite_difference_jacobian(g, x, gx, step)
        if not np.all(np.isfinite(jacobian)):
            break
        delta = scipy.linalg.lstsq(jacobian, -gx)[0]

        damping = 1.0
        improved = False
        while damping > 2.0 ** -30:
            trial = x + damping * delta
            try:
                g_trial = np.asarray(g(trial), dtype=float)
            except (ACRError, FloatingPointError, ZeroDivisionError):
                g_trial = None
            if g_trial is not None and np.all(np.isfinite(g_trial)):
                trial_residual = np.max(np.abs(g_trial))
                if trial_residual < residual:
                    improved = True
                    break
            damping /= 2
        if not improved:
            break
        x, gx, residual = trial, g_trial, trial_residual

    if residual <= tol:
        return x
    raise NoConvergence('Newton iterations stalled with residual %.3e.'
                        % residual, best=x, residual=residual)


def gaussian(x, center=0.0, width=1.0):
    """
    Normalized Gaussian density.

    Args:
        x (scalar or ``numpy.array``): Evaluation points.
        center (``float``, optional): Mean. Default is 0.
        width (``float``, optional): Standard deviation. Default is 1.

    Returns:
        density (scalar or ``numpy.array``): Density values.
    """
    term_1 = 1 / width / (2 * np.pi) ** 0.5
    term_2 = np.exp(-0.5 * ((np.asarray(x) - center) / width) ** 2)
    return term_1 * term_2
