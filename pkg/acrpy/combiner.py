#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Asymptotic composite regression combiner. Given initial estimates that share
the target but carry an asymptotic bias proportional to a known function of
their tuning parameter, the combiner removes the bias by a weighted regression
of the estimates on that function.
"""

import numpy as np
from . import tools


__all__ = ["InitialEstimateSet", "WeightVector", "CombineResult",
           "equal_weights", "combine_unknown_scale", "combine_known_scale",
           "regenerated_weights", "optimal_tilde_weights",
           "solve_original_weights"]


class WeightVector(object):
    """
    Weights of a composite estimator. They must sum to one but may be
    negative.

    Args:

        values (array-like): The weights.

        variance (``float``, optional): Limiting variance factor attached by
            the functions that compute optimal weights. Default is ``None``.
    """
    def __init__(self, values, variance=None):
        self.values = tools.as_vector(values, 'weights')
        if len(self.values) < 1:
            raise ValueError('At least one weight is required.')
        total = np.sum(self.values)
        if abs(total - 1) > 1E-12 * max(1.0, np.sum(np.abs(self.values))):
            raise ValueError('Weights must sum to 1, got %.15g.' % total)
        self.variance = variance

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return 'WeightVector(%s)' % np.array2string(self.values,
                                                    precision=6)

    # Equal weights of length m
    @classmethod
    def equal(cls, m):
        if m < 1:
            raise ValueError('`m` must be positive.')
        return cls(np.full(m, 1.0 / m))


def equal_weights(m):
    """
    Shortcut for ``WeightVector.equal(m)``.
    """
    return WeightVector.equal(m)


def _weight_values(w, m):
    if w is None:
        w = WeightVector.equal(m)
    elif not isinstance(w, WeightVector):
        w = WeightVector(w)
    if len(w) != m:
        raise ValueError('Got %i weights for %i initial estimates.'
                         % (len(w), m))
    return w.values


class InitialEstimateSet(object):
    """
    Set of ``m >= 2`` initial estimates of the same target, indexed by the
    tuning parameters ``taus``, with their bias-function values ``xi_hats``.

    Args:

        taus (array-like): Strictly increasing tuning parameters.

        theta_hats (array-like): Initial estimates.

        xi_hats (array-like): Bias-function value of each estimate.
    """
    def __init__(self, taus, theta_hats, xi_hats):
        self.taus = tools.as_vector(taus, 'taus')
        self.theta_hats = tools.as_vector(theta_hats, 'theta_hats')
        self.xi_hats = tools.as_vector(xi_hats, 'xi_hats')
        self.m = len(self.taus)
        if self.m < 2:
            raise ValueError('At least two initial estimates are required.')
        if len(self.theta_hats) != self.m or len(self.xi_hats) != self.m:
            raise ValueError('`taus`, `theta_hats` and `xi_hats` must have '
                             'the same length.')
        if np.any(np.diff(self.taus) <= 0):
            raise ValueError('`taus` must be strictly increasing.')


class CombineResult(object):
    """
    Output of the combiner.

    Args:

        theta_tilde (``float``): The composite estimate.

        phi_hat (``float``): Estimated (or supplied) bias scale.

        regenerated (``WeightVector``): Effective weights on the initial
            estimates, ``theta_tilde = sum(regenerated * theta_hats)``.
    """
    def __init__(self, theta_tilde, phi_hat, regenerated):
        self.theta_tilde = theta_tilde
        self.phi_hat = phi_hat
        self.regenerated = regenerated

    def __repr__(self):
        return 'CombineResult(theta_tilde=%.10g, phi_hat=%.10g)' % (
            self.theta_tilde, self.phi_hat)


def _xi_spread(w, xi):
    xi_bar = np.dot(w, xi)
    deviation = xi - xi_bar
    spread = np.dot(w, deviation ** 2)
    # Signed weights can make the spread negative
    if abs(spread) <= 1E-12 * np.max(xi ** 2):
        raise tools.DegenerateDesign(
            'The bias-function values do not vary under the weights '
            '(weighted spread %.3e).' % spread)
    return xi_bar, deviation, spread


def _regenerate(w, xi):
    xi_bar, deviation, spread = _xi_spread(w, xi)
    return w - xi_bar * w * deviation / spread


def combine_unknown_scale(estimates, w=None):
    """
    Composite estimate when the scale of the bias is unknown: the weighted
    least squares fit of ``theta_hats`` on ``(1, xi_hats)``, whose intercept
    is the debiased estimate.

    Args:

        estimates (``InitialEstimateSet``): Initial estimates.

        w (``WeightVector`` or array-like, optional): Weights of the
            regression. Default is equal weights.

    Returns:

        result (``CombineResult``): Composite estimate, bias scale and
            regenerated weights.
    """
    w = _weight_values(w, estimates.m)
    theta = estimates.theta_hats
    xi = estimates.xi_hats
    xi_bar, deviation, spread = _xi_spread(w, xi)

    phi_hat = np.dot(w * theta, deviation) / spread
    theta_tilde = np.dot(w, theta) - phi_hat * xi_bar
    regenerated = WeightVector(w - xi_bar * w * deviation / spread)
    return CombineResult(float(theta_tilde), float(phi_hat), regenerated)


def _known_scale(theta, xi, w, phi):
    return float(np.dot(w, theta - phi * xi))


def combine_known_scale(estimates, w=None, phi=1.0):
    """
    Composite estimate when the bias of each initial estimate is
    ``phi * xi_hat`` with ``phi`` known: each estimate is corrected and the
    corrected values are averaged with ``w``.

    Args:

        estimates (``InitialEstimateSet``): Initial estimates.

        w (``WeightVector`` or array-like, optional): Weights. Default is
            equal weights.

        phi (``float``, optional): Known bias scale. Default is 1.

    Returns:

        result (``CombineResult``): The regenerated weights equal ``w``.
    """
    w = _weight_values(w, estimates.m)
    theta_tilde = _known_scale(estimates.theta_hats, estimates.xi_hats, w,
                               phi)
    return CombineResult(theta_tilde, float(phi), WeightVector(w))


def regenerated_weights(w, xi):
    """
    Maps regression weights ``w`` to the effective weights they put on the
    initial estimates in ``combine_unknown_scale``. The result sums to one and
    is orthogonal to ``xi``.

    Args:

        w (``WeightVector`` or array-like): Original weights.

        xi (array-like): Bias-function values.

    Returns:

        w_tilde (``WeightVector``): Regenerated weights.
    """
    xi = tools.as_vector(xi, 'xi')
    w = _weight_values(w, len(xi))
    return WeightVector(_regenerate(w, xi))


def optimal_tilde_weights(sigma):
    """
    Minimum-variance regenerated weights for the limiting covariance ``sigma``
    of the initial estimates, ``(1' sigma^-1 1)^-1 sigma^-1 1``.

    Args:

        sigma (array-like): Symmetric positive definite matrix, shape (m, m).

    Returns:

        w_star (``WeightVector``): Optimal weights, with the attained variance
            ``(1' sigma^-1 1)^-1`` as ``variance``.
    """
    sigma = tools.as_matrix(sigma, 'sigma')
    direction = tools.solve_spd(sigma, np.ones(sigma.shape[0]))
    total = np.sum(direction)
    return WeightVector(direction / total, variance=float(1 / total))


def solve_original_weights(w_tilde_star, xi, tol=1E-10):
    """
    Finds original weights ``w`` whose regenerated weights are
    ``w_tilde_star``. The last weight is eliminated through the sum-to-one
    constraint and the remaining system is solved by damped Newton iterations
    started at ``w_tilde_star``. The solutions form a one-parameter family;
    when Newton stalls a member of it is built in closed form, and whichever
    candidate reproduces the target more closely is returned.

    Args:

        w_tilde_star (``WeightVector`` or array-like): Target regenerated
            weights. Must be orthogonal to ``xi``.

        xi (array-like): Bias-function values, not all equal.

        tol (``float``, optional): Newton residual target. Default is 1E-10.

    Returns:

        w0 (``WeightVector``): Original weights.
    """
    xi = tools.as_vector(xi, 'xi')
    m = len(xi)
    target = _weight_values(w_tilde_star, m)
    if m < 2 or np.ptp(xi) <= 1E-12 * np.max(np.abs(xi)):
        raise tools.DegenerateDesign('All bias-function values are equal.')

    def residual(free):
        full = np.append(free, 1 - np.sum(free))
        return (_regenerate(full, xi) - target)[:-1]

    candidates = []
    try:
        free = tools.solve_nonlinear(residual, target[:-1], tol=tol)
        candidates.append(np.append(free, 1 - np.sum(free)))
    except tools.NoConvergence:
        pass
    try:
        candidates.append(_closed_form_original(target, xi))
    except tools.NoConvergence:
        pass
    if len(candidates) == 0:
        raise tools.NoConvergence('No original weights reproduce the '
                                  'requested regenerated weights.')

    misses = [np.max(np.abs(_regenerate(w0, xi) - target))
              for w0 in candidates]
    best = int(np.argmin(misses))
    if misses[best] > 1E-8:
        raise tools.NoConvergence('Regenerated weights missed the target by '
                                  '%.3e.' % misses[best],
                                  best=candidates[best],
                                  residual=misses[best])
    return WeightVector(candidates[best])


def _closed_form_original(target, xi):
    # w = t / (F (1 - r xi)) with F = sum t / (1 - r xi) regenerates t for
    # every r when t sums to one and is orthogonal to xi
    scale = np.max(np.abs(xi))
    if abs(np.dot(target, xi)) > 1E-8 * scale:
        raise tools.NoConvergence('The target weights are not orthogonal to '
                                  'the bias-function values.')
    for r in (-0.5 / scale, 0.5 / scale, -0.25 / scale, 0.25 / scale):
        denominator = 1 - r * xi
        total = np.sum(target / denominator)
        if abs(total - 1) > 1E-10 and abs(total) > 1E-10:
            return target / (total * denominator)
    raise tools.NoConvergence('No closed-form original weights exist for '
                              'these targets.')
