#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Tests for the numerical tools.
"""

import numpy as np
import pytest
from acrpy import tools


def epanechnikov(u):
    return 0.75 * (1 - u ** 2) if abs(u) <= 1 else 0.0


@pytest.mark.parametrize("a, b, expected", [
    (np.eye(2), [3, -1], [3, -1]),
    (np.diag([1., 4.]), [1, 1], [1, 0.25]),
    ([[2., 1.], [1., 2.]], [3, 3], [1, 1]),
])
def test_solve_spd_small_systems(a, b, expected):
    np.testing.assert_allclose(tools.solve_spd(a, b), expected, atol=1E-14)


@pytest.mark.parametrize("dim", [1, 3, 8, 20])
def test_solve_spd_relative_residual(dim):
    rng = np.random.default_rng(dim)
    m = rng.normal(size=(dim, dim))
    a = m.T.dot(m) + np.eye(dim)
    b = rng.normal(size=dim)
    x = tools.solve_spd(a, b)
    residual = np.max(np.abs(a.dot(x) - b)) / np.max(np.abs(b))
    assert residual <= 1E-10


def test_solve_spd_rejects_indefinite_and_singular():
    with pytest.raises(tools.NotPositiveDefinite):
        tools.solve_spd([[1., 2.], [2., 1.]], [1, 1])
    with pytest.raises(tools.NotPositiveDefinite):
        tools.solve_spd([[1., 1.], [1., 1.]], [1, 1])
    with pytest.raises(ValueError):
        tools.solve_spd([[1., 0.5], [0., 1.]], [1, 1])


def test_integrate_reference_values():
    assert tools.integrate(lambda u: 1.0, 0, 1) == pytest.approx(1, abs=1E-10)
    assert tools.integrate(epanechnikov, -1, 1) == pytest.approx(1, abs=1E-10)
    value = tools.integrate(lambda u: u ** 2 * epanechnikov(u), -1, 1)
    assert value == pytest.approx(0.2, abs=1E-10)


def test_integrate_cubic_exact():
    value = tools.integrate(lambda u: 4 * u ** 3 - u + 2, -0.5, 1.5)
    assert value == pytest.approx(8.0, abs=1E-10)


def test_integrate_rejects_empty_interval():
    with pytest.raises(ValueError):
        tools.integrate(np.cos, 1.0, 1.0)


def test_minimize_scalar_quadratic_and_kink():
    assert tools.minimize_scalar(lambda x: (x - 2) ** 2, 0, 5) == \
        pytest.approx(2, abs=1E-6)
    assert tools.minimize_scalar(abs, -1, 3) == pytest.approx(0, abs=1E-6)


def test_minimize_scalar_boundary_minimum():
    assert tools.minimize_scalar(lambda x: x, 1, 2) == 1.0


def test_minimize_scalar_matches_grid_scan():
    # Ratio of a squared mean to its variance for three blocks
    a = np.array([1.0, 1.4, 0.7])
    b = np.array([0.5, 0.6, 0.45])

    def negative_likelihood(theta):
        u = a - theta * b
        return 1.5 * np.mean(u) ** 2 / (np.var(u) + 1.0)

    grid = np.linspace(-2, 6, 10000)
    scan = grid[np.argmin([negative_likelihood(t) for t in grid])]
    found = tools.minimize_scalar(negative_likelihood, -2, 6)
    assert abs(found - scan) <= grid[1] - grid[0]


def test_minimize_scalar_strict_interior():
    x = tools.minimize_scalar(lambda t: (t - 0.7) ** 2, -3, 5, strict=True)
    assert x == pytest.approx(0.7, abs=1E-6)


def test_minimize_scalar_strict_boundary():
    with pytest.raises(tools.NoConvergence) as info:
        tools.minimize_scalar(lambda t: (t - 9.0) ** 2, -3, 5, strict=True)
    assert info.value.best == pytest.approx(5, abs=1E-5)
    assert tools.minimize_scalar(lambda t: (t - 9.0) ** 2, -3, 5) == 5


def test_minimize_scalar_strict_iteration_cap():
    with pytest.raises(tools.NoConvergence) as info:
        tools.minimize_scalar(lambda t: np.abs(t - 0.3) ** 0.5, -3, 5,
                              tol=1E-12, max_iter=3, strict=True)
    assert -3 <= info.value.best <= 5


def test_solve_nonlinear_examples():
    c = np.array([0.3, -2.0, 7.0])
    np.testing.assert_allclose(tools.solve_nonlinear(lambda x: x - c,
                                                     np.zeros(3)), c,
                               atol=1E-9)
    root = tools.solve_nonlinear(
        lambda x: np.array([x[0] ** 2 - 1, x[1] - 2]), [2.0, 0.0])
    np.testing.assert_allclose(root, [1, 2], atol=1E-9)


def test_solve_nonlinear_reports_best_iterate():
    with pytest.raises(tools.NoConvergence) as info:
        tools.solve_nonlinear(lambda x: x ** 2 + 1, [0.5])
    assert info.value.best is not None
    assert info.value.residual >= 1


def test_solve_nonlinear_unevaluable_start():
    def g(x):
        if x[0] == 0:
            raise tools.DegenerateDesign('singular')
        return x - 1

    with pytest.raises(tools.NoConvergence):
        tools.solve_nonlinear(g, [0.0])
    with pytest.raises(tools.NoConvergence):
        tools.solve_nonlinear(lambda x: np.full(1, np.nan), [0.0])
    np.testing.assert_allclose(tools.solve_nonlinear(g, [3.0]), [1.0],
                               atol=1E-9)


def test_gaussian_is_normalized():
    value = tools.integrate(tools.gaussian, -12, 12)
    assert value == pytest.approx(1, abs=1E-10)
