#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Tests for the composite regression combiner.
"""

import itertools
import numpy as np
import pytest
from acrpy import combiner, tools


def estimates(theta, xi):
    return combiner.InitialEstimateSet(np.arange(1, len(theta) + 1), theta,
                                       xi)


def test_constant_estimates_have_no_bias():
    result = combiner.combine_unknown_scale(estimates([1.7] * 3,
                                                      [0.2, 0.9, 3.1]),
                                            [0.2, 0.5, 0.3])
    assert result.theta_tilde == pytest.approx(1.7, abs=1E-12)
    assert result.phi_hat == pytest.approx(0, abs=1E-12)


@pytest.mark.parametrize("theta, xi, phi, theta_tilde", [
    ([2, 4], [1, 3], 1, 1),
    ([1, -1], [1, -1], 1, 0),
])
def test_unknown_scale_hand_values(theta, xi, phi, theta_tilde):
    result = combiner.combine_unknown_scale(estimates(theta, xi), [0.5, 0.5])
    assert result.phi_hat == pytest.approx(phi, abs=1E-12)
    assert result.theta_tilde == pytest.approx(theta_tilde, abs=1E-12)


def test_equal_xi_is_degenerate():
    with pytest.raises(tools.DegenerateDesign):
        combiner.combine_unknown_scale(estimates([1, 2, 3], [0.4] * 3))
    with pytest.raises(tools.DegenerateDesign):
        combiner.combine_unknown_scale(estimates([1, 2], [0, 0]))


def test_known_scale():
    est = estimates([2, 4], [1, 3])
    assert combiner.combine_known_scale(est, [0.5, 0.5], 1).theta_tilde == 1
    assert combiner.combine_known_scale(est, [0.25, 0.75], 0).theta_tilde == \
        pytest.approx(3.5)
    est = estimates([1.5, 1.5], [0.2, 0.2])
    assert combiner.combine_known_scale(est, [0.9, 0.1], 2.0).theta_tilde == \
        pytest.approx(1.1)


def test_regenerated_weights_examples():
    np.testing.assert_allclose(
        combiner.regenerated_weights([0.5, 0.5], [1, -1]).values, [0.5, 0.5])
    np.testing.assert_allclose(
        combiner.regenerated_weights([0.5, 0.5], [1, 3]).values, [1.5, -0.5])


def signed_weights(rng, m):
    # Sum-to-one weights with some negative entries
    raw = rng.normal(0.5, 1.0, m)
    return raw + (1 - raw.sum()) / m


def test_combiner_algebra_fuzz():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 1000:
        m = int(rng.integers(2, 8))
        w = signed_weights(rng, m) if checked % 2 else \
            rng.dirichlet(np.ones(m))
        xi = rng.normal(size=m) * rng.uniform(0.1, 10)
        xi_bar = np.dot(w, xi)
        spread = np.dot(w, (xi - xi_bar) ** 2)
        if abs(spread) < 0.05 * np.max(xi ** 2):
            continue
        theta = rng.normal(size=m) * rng.uniform(0.1, 10)
        result = combiner.combine_unknown_scale(estimates(theta, xi), w)
        theta_tilde, phi = result.theta_tilde, result.phi_hat
        w_tilde = combiner.regenerated_weights(w, xi).values
        size = np.sum(np.abs(w)) ** 3

        assert np.sum(w_tilde) == pytest.approx(
            1, abs=1E-12 * max(1, np.sum(np.abs(w_tilde))))
        magnitude = np.sum(np.abs(w_tilde * theta)) + \
            np.sum(np.abs(w * theta)) + abs(phi * xi_bar)
        assert theta_tilde == pytest.approx(np.dot(w_tilde, theta),
                                            abs=1E-10 * magnitude)

        residual = theta - theta_tilde - xi * phi
        magnitude = np.sum(np.abs(w) * (np.abs(theta) + abs(theta_tilde) +
                                        np.abs(xi * phi)))
        assert abs(np.dot(w, residual)) <= 1E-10 * magnitude
        assert abs(np.dot(w * xi, residual)) <= \
            1E-10 * magnitude * np.max(np.abs(xi))

        shift = rng.normal() * 5
        shifted = combiner.combine_unknown_scale(estimates(theta + shift, xi),
                                                 w)
        assert shifted.theta_tilde == pytest.approx(
            theta_tilde + shift, abs=1E-10 * size * (magnitude + abs(shift)))

        constant = combiner.combine_unknown_scale(
            estimates(np.full(m, shift), xi), w)
        assert constant.theta_tilde == pytest.approx(
            shift, abs=1E-10 * size * (1 + abs(shift)))
        checked += 1


def test_signed_weights_are_not_degenerate():
    # w = (1.5, -0.5) on xi = (1, 3) has a negative weighted spread
    est = estimates([2, 4], [1, 3])
    result = combiner.combine_unknown_scale(est, [1.5, -0.5])
    assert result.phi_hat == pytest.approx(1)
    assert result.theta_tilde == pytest.approx(1)
    w_tilde = combiner.regenerated_weights([1.5, -0.5], [1, 3]).values
    np.testing.assert_allclose(w_tilde, [1.5, -0.5])


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        combiner.WeightVector([0.5, 0.6])
    assert len(combiner.WeightVector([1.5, -0.5])) == 2


def test_optimal_tilde_weights():
    np.testing.assert_allclose(combiner.optimal_tilde_weights(np.eye(3))
                               .values, [1 / 3.] * 3)
    w = combiner.optimal_tilde_weights(np.diag([1., 4.]))
    np.testing.assert_allclose(w.values, [0.8, 0.2])
    assert w.variance == pytest.approx(0.8)


def simplex_grid(m, step=0.01):
    ticks = np.linspace(0, 1, int(round(1 / step)) + 1)
    free = np.array(list(itertools.product(ticks, repeat=m - 1))) \
        if m > 2 else ticks[:, None]
    free = free[free.sum(axis=1) <= 1 + 1E-12]
    return np.column_stack([free, 1 - free.sum(axis=1)])


def test_optimal_tilde_weights_beat_simplex_grid():
    rng = np.random.default_rng(23)
    grids = dict((m, simplex_grid(m)) for m in (2, 3, 4))
    for _ in range(50):
        m = int(rng.integers(2, 5))
        g = rng.normal(size=(m, m))
        sigma = g.dot(g.T) + 0.5 * np.eye(m)
        best = combiner.optimal_tilde_weights(sigma)
        best_variance = best.values.dot(sigma).dot(best.values)
        assert best_variance == pytest.approx(best.variance)
        grid = grids[m]
        variances = np.einsum('ij,jk,ik->i', grid, sigma, grid)
        assert best_variance <= np.min(variances) + 1E-12
        assert np.all(best_variance <= np.diag(sigma) + 1E-12)


def test_solve_original_weights_fixed_point():
    w0 = combiner.solve_original_weights([0.5, 0.5], [1, -1])
    np.testing.assert_allclose(w0.values, [0.5, 0.5], atol=1E-9)


@pytest.mark.parametrize("planted, xi", [
    ([0.3, 0.7], [1, 3]),
    ([0.2, 0.3, 0.5], [0.5, 1.0, 2.0]),
])
def test_solve_original_weights_planted(planted, xi):
    target = combiner.regenerated_weights(planted, xi)
    w0 = combiner.solve_original_weights(target, xi)
    achieved = combiner.regenerated_weights(w0, xi).values
    np.testing.assert_allclose(achieved, target.values, atol=1E-8)
    assert np.sum(w0.values) == pytest.approx(1, abs=1E-12)


def test_solve_original_weights_round_trip_fuzz():
    rng = np.random.default_rng(31)
    for _ in range(100):
        m = int(rng.integers(2, 6))
        planted = rng.dirichlet(np.ones(m)) * 0.8 + 0.2 / m
        xi = rng.normal() + np.cumsum(rng.uniform(0.5, 1.5, m))
        target = combiner.regenerated_weights(planted, xi)
        w0 = combiner.solve_original_weights(target, xi)
        achieved = combiner.regenerated_weights(w0, xi).values
        np.testing.assert_allclose(achieved, target.values, atol=1E-8)


def test_solve_original_weights_signed_target():
    # Extrapolating weights with several negative entries
    xi = np.array([1.0, 1.5625, 2.25, 3.0625, 4.0])
    tail = np.array([-0.2, -0.5, -0.3])
    # First two entries fixed by sum one and orthogonality to xi
    head = np.linalg.solve([[1.0, 1.0], xi[:2]],
                           [1 - np.sum(tail), -np.dot(tail, xi[2:])])
    target = np.concatenate([head, tail])
    w0 = combiner.solve_original_weights(target, xi)
    achieved = combiner.regenerated_weights(w0, xi).values
    np.testing.assert_allclose(achieved, target, atol=1E-8)


def test_solve_original_weights_unreachable_target():
    # Regenerated weights are always orthogonal to xi
    with pytest.raises(tools.NoConvergence):
        combiner.solve_original_weights([0.5, 0.5], [1, 2])


def test_solve_original_weights_degenerate():
    with pytest.raises(tools.DegenerateDesign):
        combiner.solve_original_weights([0.5, 0.5], [2, 2])
