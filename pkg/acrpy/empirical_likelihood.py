#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Blockwise empirical Euclidean likelihood for a scalar parameter of a weakly
dependent series. Overlapping blocks of ``M`` consecutive observations,
``L`` apart, are averaged through an estimating function; the likelihood
ratio is maximized over a bracket, and fits at several separations are
combined into a composite estimate.
"""

import warnings
import numpy as np
from . import tools
from .combiner import (InitialEstimateSet, WeightVector,
                       combine_unknown_scale)


__all__ = ["BlockScheme", "DependentSample", "BlockMoments", "make_blocks",
           "block_moments", "el_ratio", "bele_fit", "default_bracket",
           "bel_initial_estimates", "ace_bel", "cv_block_tau", "SEARCHES"]

SEARCHES = ('scan', 'plain')

# Relative accuracy of a bounded Brent search in x
_BRENT_RELATIVE = np.sqrt(np.finfo(float).eps)


class BlockScheme(object):
    """
    Layout of the overlapping blocks.

    Args:

        n (``int``): Series length, at least 4.

        c (``float``): Window exponent parameter in (0, 1]; the window width
            is ``M = floor(n**(1 - c))``.

        tau (``float``): Separation factor in (0, 1]; blocks start
            ``L = floor(tau * n**(1 - c))`` observations apart.

        window_exponent (``float``, optional): Replaces ``1 - c`` in both
            ``M`` and ``L``. Default is ``None``.
    """
    def __init__(self, n, c, tau, window_exponent=None):
        if n < 4:
            raise tools.InvalidScheme('At least 4 observations are required.')
        if not 0 < c <= 1:
            raise ValueError('`c` must lie in (0, 1], got %r.' % c)
        if not 0 < tau <= 1:
            raise ValueError('`tau` must lie in (0, 1], got %r.' % tau)
        self.n = int(n)
        self.c = c
        self.tau = tau
        if window_exponent is None:
            exponent = 1 - c
        else:
            exponent = window_exponent
        # Guard against n**e landing just below an integer
        width = n ** exponent * (1 + 1E-12)
        self.M = int(np.floor(width))
        self.L = int(np.floor(tau * width))
        if self.M < 1 or self.L < 1:
            raise tools.InvalidScheme(
                'Window width %i and separation %i must both be positive '
                '(n = %i, c = %g, tau = %g).' % (self.M, self.L, n, c, tau))
        self.Q = (self.n - self.M) // self.L + 1
        if self.Q < 2:
            raise tools.InvalidScheme('Only %i block fits in %i observations.'
                                      % (self.Q, n))

    def __repr__(self):
        return 'BlockScheme(n=%i, M=%i, L=%i, Q=%i)' % (self.n, self.M,
                                                       self.L, self.Q)

    # 0-based indices of every block, shape (Q, M)
    def block_indices(self):
        return np.arange(self.Q)[:, None] * self.L + np.arange(self.M)


def make_blocks(n, c, tau, window_exponent=None):
    """
    Shortcut for ``BlockScheme(n, c, tau, window_exponent)``.
    """
    return BlockScheme(n, c, tau, window_exponent)


class DependentSample(object):
    """
    Pairs ``(x_i, y_i)`` observed in time order.

    Args:

        xs (array-like): Covariates.

        ys (array-like): Responses.

        a (``float``, optional): Autoregressive coefficient of the errors,
            kept as metadata. Default is ``None``.
    """
    def __init__(self, xs, ys, a=None):
        self.xs = tools.as_vector(xs, 'xs')
        self.ys = tools.as_vector(ys, 'ys')
        if len(self.xs) != len(self.ys):
            raise ValueError('`xs` and `ys` must have the same length.')
        if a is not None and not abs(a) < 1:
            raise ValueError('The autoregressive coefficient must satisfy '
                             '|a| < 1.')
        self.a = a
        self.n = len(self.xs)


class BlockMoments(object):
    """
    Block averages ``U_i(theta)`` of an estimating function.

    Args:

        s (``DependentSample``): The series.

        scheme (``BlockScheme``): Block layout, built for ``s.n``.

        estimating_function (callable, optional): Vectorized ``u(x, y,
            theta)``. Default is ``None``, meaning ``x (y - theta x)``, which
            is handled through its two block averages.
    """
    def __init__(self, s, scheme, estimating_function=None):
        if scheme.n != s.n:
            raise ValueError('Scheme built for n = %i, sample has %i points.'
                             % (scheme.n, s.n))
        self.scheme = scheme
        self.q = scheme.Q
        indices = scheme.block_indices()
        self.linear = estimating_function is None
        if self.linear:
            self.a_blocks = np.mean(s.xs[indices] * s.ys[indices], axis=1)
            self.b_blocks = np.mean(s.xs[indices] ** 2, axis=1)
        else:
            self._u = estimating_function
            self._x_blocks = s.xs[indices]
            self._y_blocks = s.ys[indices]

    def block_values(self, theta):
        if self.linear:
            return self.a_blocks - theta * self.b_blocks
        else:
            u = self._u(self._x_blocks, self._y_blocks, theta)
            return np.mean(u, axis=1)

    def u_bar(self, theta):
        return float(np.mean(self.block_values(theta)))

    def s(self, theta):
        return float(np.var(self.block_values(theta)))

    # d U_bar / d theta, by central differences for a generic function
    def slope(self, theta):
        if self.linear:
            return -float(np.mean(self.b_blocks))
        h = 1E-6 * (1 + abs(theta))
        return (self.u_bar(theta + h) - self.u_bar(theta - h)) / (2 * h)

    # Exact root of u_bar for the linear estimating function
    def root(self):
        if not self.linear:
            raise ValueError('A closed-form root exists only for the linear '
                             'estimating function.')
        b_bar = np.mean(self.b_blocks)
        if b_bar <= 0:
            raise tools.DegenerateDesign('All covariates are zero.')
        return float(np.mean(self.a_blocks) / b_bar)


def block_moments(s, scheme, estimating_function=None):
    """
    Shortcut for ``BlockMoments(s, scheme, estimating_function)``.
    """
    return BlockMoments(s, scheme, estimating_function)


def el_ratio(bm, theta, use_s=True):
    """
    Blockwise Euclidean log-likelihood ratio ``-(Q / 2) U_bar^2 / S``, or
    ``-(Q / 2) U_bar^2`` when the variance ``S`` is ignored.

    Args:

        bm (``BlockMoments``): Block averages.

        theta (``float``): Parameter value.

        use_s (``bool``, optional): Divide by the block variance. Default is
            ``True``.

    Returns:

        l (``float``): Non-positive log-likelihood ratio.
    """
    u_bar = bm.u_bar(theta)
    if not use_s:
        return -0.5 * bm.q * u_bar ** 2
    variance = bm.s(theta)
    if variance <= 1E-12 * u_bar ** 2 + 1E-300:
        raise tools.DegenerateVariance('Block variance %.3e vanishes at '
                                       'theta = %.6g.' % (variance, theta))
    return -0.5 * bm.q * u_bar ** 2 / variance


def bele_fit(bm, bracket, use_s=True, closed_form=False, tol=1E-8,
             grid_points=64, search='scan'):
    """
    Blockwise empirical likelihood estimate: maximizes ``el_ratio`` over
    ``bracket``. With ``search='scan'`` a coarse scan locates the best cell
    of an equispaced grid and Brent's method refines it. With
    ``search='plain'`` a single Brent pass covers the whole bracket, and a
    search that stalls or ends on the boundary raises ``NoConvergence``
    with its last iterate attached.

    Args:

        bm (``BlockMoments``): Block averages.

        bracket (``tuple``): Finite search interval ``(lo, hi)``.

        use_s (``bool``, optional): Divide by the block variance. Default is
            ``True``.

        closed_form (``bool``, optional): Return the exact root of the
            linear estimating function, clipped to the bracket. Default is
            ``False``.

        tol (``float``, optional): Tolerance in ``theta``. Default is 1E-8.

        grid_points (``int``, optional): Size of the coarse scan. Default is
            64.

        search (``str``, optional): ``'scan'`` or ``'plain'``. Default is
            ``'scan'``.

    Returns:

        theta_hat (``float``): The estimate.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError('The bracket must be finite with lo < hi.')
    if search not in SEARCHES:
        raise ValueError('`search` must be one of %s, got %r.'
                         % (', '.join(SEARCHES), search))
    if closed_form:
        return float(np.clip(bm.root(), lo, hi))

    def objective(theta):
        return -el_ratio(bm, theta, use_s)

    if search == 'plain':
        return tools.minimize_scalar(objective, lo, hi, tol=tol, strict=True)
    grid = np.linspace(lo, hi, grid_points)
    best = int(np.argmin([objective(theta) for theta in grid]))
    cell = (grid[max(best - 1, 0)], grid[min(best + 1, grid_points - 1)])
    return tools.minimize_scalar(objective, cell[0], cell[1], tol=tol)


def default_bracket(s):
    """
    Search interval centred at the least squares slope through the origin,
    ``theta_ols +- 10 (1 + |theta_ols|)``.
    """
    sxx = np.dot(s.xs, s.xs)
    if sxx <= 0:
        raise tools.DegenerateDesign('All covariates are zero.')
    theta = np.dot(s.xs, s.ys) / sxx
    half_width = 10 * (1 + abs(theta))
    return theta - half_width, theta + half_width


def _initial_fits(s, c, taus, bracket, use_s, closed_form, window_exponent,
                  estimating_function, search, keep_failures, tol=1E-8):
    if bracket is None:
        bracket = default_bracket(s)
    lo, hi = float(bracket[0]), float(bracket[1])
    taus = tools.as_vector(taus, 'taus')
    theta_hats = []
    xi_hats = []
    floors = []
    root_n = np.sqrt(s.n)
    for tau in taus:
        bm = block_moments(s, make_blocks(s.n, c, tau, window_exponent),
                           estimating_function)
        try:
            theta = bele_fit(bm, (lo, hi), use_s, closed_form, tol=tol,
                             search=search)
        except tools.NoConvergence as exc:
            if not keep_failures or exc.best is None:
                raise
            # A stalled fit keeps its iterate; xi then measures its distance
            # from the root
            theta = float(np.clip(exc.best, lo, hi))
        theta_hats.append(theta)
        xi_hats.append(root_n * bm.u_bar(theta))
        floors.append(10 * root_n * abs(bm.slope(theta)) *
                      (tol + _BRENT_RELATIVE * (1 + abs(theta))))
    return InitialEstimateSet(taus, theta_hats, xi_hats), np.array(floors)


def bel_initial_estimates(s, c, taus, bracket=None, use_s=True,
                          closed_form=False, window_exponent=None,
                          estimating_function=None, search='scan',
                          keep_failures=True):
    """
    Fits at every separation factor in ``taus`` together with their bias
    functions ``sqrt(n) U_bar(theta_hat)``. With ``keep_failures`` a fit
    whose search does not converge contributes its last iterate, clipped to
    the bracket.

    Returns:

        estimates (``InitialEstimateSet``): One entry per separation factor.
    """
    return _initial_fits(s, c, taus, bracket, use_s, closed_form,
                         window_exponent, estimating_function, search,
                         keep_failures)[0]


def _combine(estimates, w, floors=None):
    if w is None:
        w = WeightVector.equal(estimates.m)
    elif not isinstance(w, WeightVector):
        w = WeightVector(w)
    least = 1E-10 * (1 + np.max(np.abs(estimates.theta_hats)))
    if floors is None:
        floors = least
    else:
        floors = np.maximum(floors, least)
    if np.all(np.abs(estimates.xi_hats) <= floors):
        warnings.warn('Every fit solves its estimating equation to solver '
                      'precision; returning the weighted mean of the fits.')
        return float(np.dot(w.values, estimates.theta_hats))
    return combine_unknown_scale(estimates, w).theta_tilde


def ace_bel(s, c, taus, w=None, bracket=None, use_s=True, closed_form=False,
            window_exponent=None, estimating_function=None, search='scan',
            keep_failures=True):
    """
    Composite blockwise empirical likelihood estimate: the fits at the
    separation factors ``taus`` are regressed on their bias functions
    ``sqrt(n) U_bar(theta_hat)`` and the intercept is returned.

    A fit whose search stalls or ends on the bracket boundary keeps its last
    iterate. Its bias function is then far from zero and the regression
    moves the composite estimate back towards the roots. When every bias
    function is within the accuracy of the search (ten times the Brent
    tolerance, mapped through the slope of ``U_bar``) the correction is pure
    solver noise, and the weighted mean of the fits is returned with a
    warning.

    Args:

        s (``DependentSample``): The series.

        c (``float``): Window exponent parameter.

        taus (array-like): Strictly increasing separation factors.

        w (``WeightVector`` or array-like, optional): Weights. Default is
            equal weights.

        bracket (``tuple``, optional): Search interval. Default is
            ``default_bracket(s)``.

        use_s (``bool``, optional): Divide by the block variance. Default is
            ``True``.

        closed_form (``bool``, optional): Use exact roots of the linear
            estimating function. Default is ``False``.

        window_exponent (``float``, optional): Overrides ``1 - c``. Default
            is ``None``.

        estimating_function (callable, optional): ``u(x, y, theta)``.
            Default is ``x (y - theta x)``.

        search (``str``, optional): Search used by every fit, see
            ``bele_fit``. Default is ``'scan'``.

        keep_failures (``bool``, optional): Keep the last iterate of fits
            that do not converge instead of raising. Default is ``True``.

    Returns:

        theta_tilde (``float``): The composite estimate.
    """
    estimates, floors = _initial_fits(s, c, taus, bracket, use_s,
                                      closed_form, window_exponent,
                                      estimating_function, search,
                                      keep_failures)
    return _combine(estimates, w, floors)


def cv_block_tau(s, c, grid=(0.4, 0.6, 0.8, 1.0), window_exponent=None):
    """
    Chooses the separation factor by leave-block-out prediction error: each
    block in turn is predicted with the root of the estimating equation of
    the remaining blocks. Factors giving an invalid scheme are skipped; ties
    go to the smaller factor.

    Args:

        s (``DependentSample``): The series.

        c (``float``): Window exponent parameter.

        grid (array-like, optional): Candidate factors. Default is
            (0.4, 0.6, 0.8, 1.0).

        window_exponent (``float``, optional): Overrides ``1 - c``. Default
            is ``None``.

    Returns:

        tau (``float``): Selected factor.
    """
    best_tau, best_error = None, np.inf
    for tau in np.sort(tools.as_vector(grid, 'grid')):
        try:
            scheme = make_blocks(s.n, c, tau, window_exponent)
        except tools.InvalidScheme:
            continue
        bm = block_moments(s, scheme)
        a_total = np.sum(bm.a_blocks)
        b_total = np.sum(bm.b_blocks)
        indices = scheme.block_indices()
        errors = []
        for i in range(scheme.Q):
            b_rest = b_total - bm.b_blocks[i]
            if b_rest <= 0:
                continue
            theta = (a_total - bm.a_blocks[i]) / b_rest
            block = indices[i]
            errors.append(np.mean((s.ys[block] - theta * s.xs[block]) ** 2))
        if len(errors) > 0 and np.mean(errors) < best_error:
            best_tau, best_error = float(tau), np.mean(errors)
    if best_tau is None:
        raise tools.InvalidScheme('No separation factor in the grid gives a '
                                  'valid block scheme.')
    return best_tau
