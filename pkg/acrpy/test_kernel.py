#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
Tests for kernel regression and the composite kernel estimators.
"""

import itertools
import numpy as np
import pytest
from acrpy import combiner, kernel, tools

EPANECHNIKOV = kernel.KernelSpec.epanechnikov()
GAUSSIAN = kernel.KernelSpec.gaussian()


def hand_sample():
    return kernel.RegressionSample([0.2, 0.5, 0.8], [1., 2., 4.])


def sine_sample(n, seed):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(size=n)
    return kernel.RegressionSample(xs, np.sin(2 * np.pi * xs) +
                                   0.5 * rng.normal(size=n))


def test_kernel_moments():
    assert EPANECHNIKOV.mu2 == pytest.approx(0.2, abs=1E-10)
    assert GAUSSIAN.mu2 == pytest.approx(1.0, abs=1E-8)
    assert kernel.nw_limiting_variance(EPANECHNIKOV) == pytest.approx(0.6)
    assert kernel.nw_limiting_variance(GAUSSIAN) == \
        pytest.approx(1 / (2 * np.sqrt(np.pi)))


def test_kernel_validation():
    with pytest.raises(ValueError):
        kernel.KernelSpec('doubled', lambda u: 2 * tools.gaussian(u))
    with pytest.raises(ValueError):
        kernel.KernelSpec.from_name('triweight')
    assert kernel.KernelSpec.from_name('gaussian').kind == 'gaussian'


def test_nw_hand_case():
    estimate = kernel.nw_estimate(hand_sample(), 0.5, 0.4, EPANECHNIKOV)
    expected = (0.328125 * 1 + 0.75 * 2 + 0.328125 * 4) / 1.40625
    assert estimate == pytest.approx(expected, abs=1E-12)


def test_nw_constant_and_single_point():
    s = kernel.RegressionSample([0.1, 0.4, 0.9], [3., 3., 3.])
    assert kernel.nw_estimate(s, 0.33, 0.2, GAUSSIAN) == pytest.approx(3)
    assert kernel.nw_estimate(hand_sample(), 0.21, 0.05) == pytest.approx(1)


def test_nw_empty_window():
    with pytest.raises(tools.EmptyWindow):
        kernel.nw_estimate(hand_sample(), 0.35, 0.1, EPANECHNIKOV)


def test_nw_invariant_to_kernel_scale():
    doubled = kernel.KernelSpec('doubled', lambda u: 2 * EPANECHNIKOV(u),
                                support=1.0, validate=False)
    s = sine_sample(50, 0)
    assert kernel.nw_estimate(s, 0.4, 0.15, doubled) == \
        pytest.approx(kernel.nw_estimate(s, 0.4, 0.15, EPANECHNIKOV))


def test_clc_hand_case():
    estimate = kernel.clc_estimate(hand_sample(), 0.5, [0.4, 0.6])
    weights = np.array([0.328125 + 0.5625, 0.75 + 0.75, 0.328125 + 0.5625])
    expected = np.dot(weights, [1, 2, 4]) / np.sum(weights)
    assert estimate == pytest.approx(expected, abs=1E-12)


def test_clc_reductions():
    s = sine_sample(80, 1)
    assert kernel.clc_estimate(s, 0.3, [0.1]) == \
        pytest.approx(kernel.nw_estimate(s, 0.3, 0.1))
    pooled = kernel.clc_estimate(s, 0.3, [0.05, 0.1, 0.2])
    window = np.abs(s.xs - 0.3) <= 0.2
    assert s.ys[window].min() <= pooled <= s.ys[window].max()


def test_xi_hat_plugin_vanishes():
    sched = kernel.BandwidthSchedule(0.5, [0.8], 4)
    xi = kernel.xi_hat_nw(hand_sample(), 0.5, 0.8, sched,
                          leave_one_out=False)
    assert xi == pytest.approx(0, abs=1E-14)


def test_xi_hat_leave_one_out_hand_case():
    # n = 4 and eta = 1/2 turn tau = 0.8 into h = 0.4
    sched = kernel.BandwidthSchedule(0.5, [0.8], 4)
    xi = kernel.xi_hat_nw(hand_sample(), 0.5, 0.8, sched)
    weights = np.array([0.328125, 0.75, 0.328125])
    ys = np.array([1., 2., 4.])
    total = weights.sum()
    fitted = (np.dot(weights, ys) - weights * ys) / (total - weights)
    expected = np.dot(weights, ys - fitted) / total
    assert xi == pytest.approx(expected, abs=1E-12)
    assert abs(xi) > 0.05


def test_xi_hat_constant_response():
    s = kernel.RegressionSample([0.1, 0.2, 0.3, 0.4], [2.] * 4)
    sched = kernel.BandwidthSchedule(0.2, [0.3], 4)
    assert kernel.xi_hat_nw(s, 0.25, 0.3, sched) == pytest.approx(0)


def test_ace_r1_reproduces_constants():
    xs = np.linspace(0.01, 0.99, 60)
    s = kernel.RegressionSample(xs, np.full(60, -1.25))
    sched = kernel.BandwidthSchedule(0.2, [0.1, 0.2, 0.3], 60)
    for x in [0.1, 0.5, 0.9]:
        assert kernel.ace_r1(s, x, sched) == pytest.approx(-1.25)


def test_ace_r1_matches_combiner():
    s = sine_sample(200, 2)
    sched = kernel.BandwidthSchedule.from_bandwidth(0.1, 200)
    w = [0.1, 0.2, 0.4, 0.2, 0.1]
    r_hats = [kernel.nw_estimate(s, 0.3, h) for h in sched.bandwidths]
    estimates = combiner.InitialEstimateSet(sched.taus, r_hats,
                                            sched.taus ** 2)
    expected = combiner.combine_unknown_scale(estimates, w).theta_tilde
    assert kernel.ace_r1(s, 0.3, sched, w) == \
        pytest.approx(expected, rel=1E-12, abs=1E-12)


def test_ace_r2_reductions():
    s = sine_sample(200, 3)
    sched = kernel.BandwidthSchedule.from_bandwidth(0.1, 200)
    fits = [kernel.nw_estimate(s, 0.6, h) for h in sched.bandwidths]
    plugin = kernel.ace_r2(s, 0.6, sched, leave_one_out=False)
    assert plugin == pytest.approx(np.mean(fits), abs=1E-12)

    single = kernel.BandwidthSchedule(0.2, [0.5], 200)
    phi = 200 ** -0.4
    expected = kernel.nw_estimate(s, 0.6, single.bandwidths[0]) - \
        phi * kernel.xi_hat_nw(s, 0.6, 0.5, single)
    assert kernel.ace_r2(s, 0.6, single, [1.0]) == pytest.approx(expected)


def test_ace_r2_hand_case():
    sched = kernel.BandwidthSchedule(0.5, [0.8], 4)
    xi = kernel.xi_hat_nw(hand_sample(), 0.5, 0.8, sched)
    nw = kernel.nw_estimate(hand_sample(), 0.5, 0.4)
    assert kernel.ace_r2(hand_sample(), 0.5, sched) == \
        pytest.approx(nw - 4 ** -0.25 * xi, abs=1E-12)


def test_schedule_from_bandwidth():
    sched = kernel.BandwidthSchedule.from_bandwidth(0.1, 32, eta=0.2)
    np.testing.assert_allclose(sched.bandwidths,
                               [0.06, 0.08, 0.1, 0.12, 0.14])
    with pytest.raises(ValueError):
        kernel.BandwidthSchedule(0.2, [0.3, 0.2], 10)


def test_cv_single_candidate():
    assert kernel.cv_bandwidth(sine_sample(40, 4), grid=[0.17]) == 0.17


def test_cv_matches_recomputation():
    xs = np.random.default_rng(5).uniform(size=60)
    s = kernel.RegressionSample(xs, 1 + 3 * xs)
    grid = np.geomspace(0.05, 0.5, 12)
    order = np.argsort(xs)
    folds = [order[0::2], order[1::2]]
    scores = []
    for h in grid:
        errors = []
        for test, train in [(folds[0], folds[1]), (folds[1], folds[0])]:
            for i in test:
                weights = EPANECHNIKOV((xs[train] - xs[i]) / h)
                if weights.sum() > 0:
                    errors.append((s.ys[i] - np.dot(weights, s.ys[train]) /
                                   weights.sum()) ** 2)
        scores.append(np.mean(errors))
    _, computed = kernel.cv_scores(s, grid=grid)
    np.testing.assert_allclose(computed, scores, rtol=1E-10)
    assert kernel.cv_bandwidth(s, grid=grid) == grid[np.argmin(scores)]


def test_cv_sine_smoke():
    grid, scores = kernel.cv_scores(sine_sample(200, 6))
    assert np.all(np.isfinite(scores))
    h = kernel.cv_bandwidth(sine_sample(200, 6))
    assert grid[0] <= h <= grid[-1]


def test_cv_all_windows_empty():
    s = kernel.RegressionSample([0.0, 1.0], [1., 2.])
    with pytest.raises(tools.AllWindowsEmpty):
        kernel.cv_bandwidth(s, grid=[0.1, 0.2])


def test_a_matrices_reference_values():
    a1, a2 = kernel.a_matrices([1.0], GAUSSIAN)
    np.testing.assert_allclose(a2, [[1 / (2 * np.sqrt(np.pi))]])
    np.testing.assert_allclose(a1, a2)
    _, a2 = kernel.a_matrices([1.0, 1.0], EPANECHNIKOV)
    np.testing.assert_allclose(a2, 0.6, atol=1E-10)


@pytest.mark.parametrize("taus", [[1.0, 2.0], [0.6, 0.8, 1.0, 1.2, 1.4],
                                  [0.3, 2.5]])
def test_gaussian_closed_form_matches_quadrature(taus):
    _, closed = kernel.a_matrices(taus, GAUSSIAN)
    _, numeric = kernel.a_matrices(taus, GAUSSIAN, closed_form=False)
    np.testing.assert_allclose(closed, numeric, atol=1E-8)
    if taus == [1.0, 2.0]:
        assert closed[0, 1] == pytest.approx((2 * np.pi) ** -0.5 * 5 ** -0.5)


def test_a2_symmetric_psd():
    _, a2 = kernel.a_matrices([0.6, 0.8, 1.0, 1.2, 1.4], EPANECHNIKOV)
    np.testing.assert_allclose(a2, a2.T)
    assert np.all(np.linalg.eigvalsh(a2) > -1E-12)


def test_weighted_factors():
    taus = np.array([0.6, 0.8, 1.0, 1.2, 1.4])
    w = [0.1, 0.3, 0.2, 0.25, 0.15]
    matrices = kernel.a_matrices(taus, EPANECHNIKOV, w=w)
    assert np.sum(matrices.g) == pytest.approx(1)
    assert np.dot(matrices.g, taus ** 2) == pytest.approx(0, abs=1E-12)
    np.testing.assert_allclose(matrices.a1w, np.outer(matrices.s_w,
                                                      matrices.s_w) *
                               matrices.a2)


def test_kernel_weight_vectors():
    w1, w2 = kernel.kernel_weight_vectors([1.0], GAUSSIAN)
    np.testing.assert_allclose(w1.values, [1.0])
    assert w2.variance == pytest.approx(1 / (2 * np.sqrt(np.pi)))
    _, w2 = kernel.kernel_weight_vectors([0.8, 1.25], GAUSSIAN)
    assert w2.variance < 1 / (2 * np.sqrt(np.pi))


def test_w2_beats_simplex_grid():
    taus = [0.8, 1.0, 1.3]
    _, a2 = kernel.a_matrices(taus, EPANECHNIKOV)
    _, w2 = kernel.kernel_weight_vectors(taus, EPANECHNIKOV)
    best = w2.values.dot(a2).dot(w2.values)
    steps = np.linspace(0, 1, 101)
    for a, b in itertools.product(steps, steps):
        if a + b <= 1:
            w = np.array([a, b, 1 - a - b])
            assert best <= w.dot(a2).dot(w) + 1E-12


def test_extrapolation_weights_two_bandwidths():
    w = kernel.extrapolation_weights([1.0, 2.0], GAUSSIAN)
    tilde = combiner.regenerated_weights(w, [1.0, 4.0]).values
    np.testing.assert_allclose(tilde, [4 / 3., -1 / 3.], atol=1E-8)
    _, a2 = kernel.a_matrices([1.0, 2.0], GAUSSIAN)
    assert w.variance == pytest.approx(tilde.dot(a2).dot(tilde), rel=1E-6)


@pytest.mark.parametrize("multipliers", [(0.6, 0.8, 1.0, 1.2, 1.4),
                                         (1.0, 1.25, 1.5, 1.75, 2.0)])
def test_extrapolation_weights_minimize_variance(multipliers):
    taus = 0.4 * np.array(multipliers)
    t2 = taus ** 2
    _, a2 = kernel.a_matrices(taus, EPANECHNIKOV)
    w = kernel.extrapolation_weights(taus, EPANECHNIKOV)
    tilde = combiner.regenerated_weights(w, t2).values
    assert np.sum(tilde) == pytest.approx(1, abs=1E-10)
    assert np.dot(tilde, t2) == pytest.approx(0, abs=1E-10)
    assert w.variance == pytest.approx(tilde.dot(a2).dot(tilde), rel=1E-6)

    w1, _ = kernel.kernel_weight_vectors(taus, EPANECHNIKOV)
    for other in (combiner.equal_weights(len(taus)), w1):
        v = combiner.regenerated_weights(other, t2).values
        assert w.variance <= v.dot(a2).dot(v) * (1 + 1E-9)


def test_extrapolation_weights_wider_schedule_has_less_variance():
    narrow = kernel.extrapolation_weights([0.6, 0.8, 1.0, 1.2, 1.4])
    wide = kernel.extrapolation_weights([1.0, 1.25, 1.5, 1.75, 2.0])
    assert wide.variance < narrow.variance
