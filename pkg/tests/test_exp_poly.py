"""Algebra esponenziale-polinomio confrontata con quadrature adattive"""

import math

import numpy as np
import pandas as pd
import pytest
from scipy.integrate import quad

from grad_halfspace.error_handler import DegreeLimitError, DivergentSourceError, ValidationError
from grad_halfspace.exp_poly import ExpPolyVec, SampledVec, check_poincare
from helpers import random_exp_poly

A_WEIGHT = 0.25


def _scalar(f: ExpPolyVec, i: int):
    return lambda y: float(f(y)[i])


def _rel_close(value, reference, rtol=1e-9, atol=1e-12):
    return abs(value - reference) <= rtol * abs(reference) + atol


def test_weighted_norm_of_single_exponential():
    f = ExpPolyVec.exponential(1.0, [1.0])
    assert f.weighted_norm(0.5) == pytest.approx(1.0, rel=1e-14)
    g = ExpPolyVec.exponential(2.0, [0.0, 3.0], degree=1)
    # int_0^inf 9 y^2 e^{-4y} dy = 9 * 2 / 64
    assert g.weighted_norm(0.0) == pytest.approx(math.sqrt(18.0 / 64.0), rel=1e-14)


def test_transforms_match_quadrature_oracles(rng):
    for _ in range(200):
        f = random_exp_poly(rng, 2, A_WEIGHT, terms=3, max_degree=2, rate_high=4.0)
        lam_pos = rng.uniform(0.2, 2.0, size=2)
        lam_neg = -rng.uniform(0.2, 2.0, size=2)
        r = f.integrate_tail()
        g = f.convolve_decay(lam_pos)
        z = f.convolve_growth_tail(lam_neg)

        total = quad(lambda y: math.exp(2 * A_WEIGHT * y) * float(f(y) @ f(y)), 0, np.inf,
                     epsabs=1e-14, epsrel=1e-12, limit=400)[0]
        assert _rel_close(f.weighted_norm(A_WEIGHT), math.sqrt(total), rtol=1e-8)

        y = float(rng.uniform(0.0, 3.0))
        for i in range(2):
            fi = _scalar(f, i)
            tail = -quad(fi, y, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
            assert _rel_close(r(y)[i], tail, atol=1e-11)
            mu = 1.0 / lam_pos[i]
            decay = mu * quad(lambda s: math.exp(mu * (s - y)) * fi(s), 0, y,
                              epsabs=1e-14, epsrel=1e-12, limit=200)[0]
            assert _rel_close(g(y)[i], decay, atol=1e-11)
            kappa = -1.0 / lam_neg[i]
            growth = -kappa * quad(lambda s: math.exp(-kappa * (s - y)) * fi(s), y, np.inf,
                                   epsabs=1e-14, epsrel=1e-12, limit=200)[0]
            assert _rel_close(z(y)[i], growth, atol=1e-11)


def test_poincare_and_trace_inequalities(rng):
    for _ in range(200):
        f = random_exp_poly(rng, 3, A_WEIGHT)
        report = check_poincare(f, A_WEIGHT)
        assert report["lhs"] <= report["bound"] * (1 + 1e-12)
        assert report["trace"] <= report["trace_bound"] * (1 + 1e-12)


def test_convolutions_solve_their_characteristic_equations(rng):
    f = random_exp_poly(rng, 2, A_WEIGHT)
    lam = np.array([0.7, 1.3])
    g = f.convolve_decay(lam)
    ys = np.linspace(0.0, 6.0, 25)
    # lambda g' + g = f con g(0) = 0
    lhs = g.derivative().evaluate(ys) * lam + g.evaluate(ys)
    np.testing.assert_allclose(lhs, f.evaluate(ys), atol=1e-12)
    np.testing.assert_allclose(g(0.0), 0.0, atol=1e-14)
    z = f.convolve_growth_tail(-lam)
    lhs = -z.derivative().evaluate(ys) * lam + z.evaluate(ys)
    np.testing.assert_allclose(lhs, f.evaluate(ys), atol=1e-12)


def test_resonant_convolution_gains_a_degree():
    f = ExpPolyVec.exponential(2.0, [1.0])
    g = f.convolve_decay(0.5)
    ys = np.linspace(0.0, 5.0, 11)
    np.testing.assert_allclose(g.evaluate(ys)[:, 0], 2.0 * ys * np.exp(-2.0 * ys), atol=1e-14)
    assert g.degree == 1


@pytest.mark.parametrize("rel", [0.0, 1e-3, 1e-6, 1e-9, 1e-11, 1e-13])
def test_convolution_close_to_resonance(rel):
    mu = 1.3
    f = ExpPolyVec(1, [(mu * (1.0 + rel), np.array([[0.7, -1.2, 0.4]]))])
    g = f.convolve_decay(1.0 / mu)
    fi = _scalar(f, 0)
    for y in (0.1, 1.0, 4.0, 15.0):
        oracle = mu * quad(lambda s: math.exp(mu * (s - y)) * fi(s), 0, y,
                           epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        assert _rel_close(g(y)[0], oracle, atol=1e-12)
    ys = np.linspace(0.0, 30.0, 301)
    np.testing.assert_allclose(g.derivative().evaluate(ys) / mu + g.evaluate(ys), f.evaluate(ys), atol=1e-12)
    assert abs(g(0.0)[0]) <= 1e-15


def test_derivative_and_tail_integral_are_inverse(rng):
    f = random_exp_poly(rng, 2, A_WEIGHT)
    ys = np.linspace(0.0, 4.0, 9)
    np.testing.assert_allclose(f.integrate_tail().derivative().evaluate(ys), f.evaluate(ys), atol=1e-12)


def test_equal_rates_are_merged_and_zeros_trimmed():
    f = ExpPolyVec(1, [(1.0, [[1.0, 0.0, 0.0]]), (1.0, [[-1.0]]), (2.0, [[3.0]])])
    assert f.rates == [2.0]
    assert f.degree == 0


def test_divergent_norm_and_tail_are_rejected():
    f = ExpPolyVec.exponential(0.2, [1.0])
    with pytest.raises(DivergentSourceError):
        f.weighted_norm(0.25)
    with pytest.raises(DivergentSourceError):
        ExpPolyVec(1, [(0.0, [[1.0]])]).integrate_tail()


def test_finite_weighted_norm_precondition():
    f = ExpPolyVec.scalar([(0.5, [1.0]), (2.0, [1.0, 1.0])])
    assert f.finite_a_norm(0.4)
    assert not f.finite_a_norm(0.5)
    with pytest.raises(DivergentSourceError):
        f.weighted_norm(0.5)
    assert ExpPolyVec.zeros(2).finite_a_norm(10.0)
    assert SampledVec.sample(f, np.linspace(0.0, 10.0, 101)).finite_a_norm(0.5)


def test_degree_limit():
    with pytest.raises(DegreeLimitError):
        ExpPolyVec(1, [(1.0, np.ones((1, 40)))], max_degree=32)


def test_convolution_sign_preconditions():
    f = ExpPolyVec.exponential(1.0, [1.0])
    with pytest.raises(ValidationError):
        f.convolve_decay(-1.0)
    with pytest.raises(ValidationError):
        f.convolve_growth_tail(1.0)


def test_empty_projection_gives_zero_dimensional_function():
    f = ExpPolyVec.exponential(1.0, [1.0, 2.0])
    empty = f.apply(np.zeros((0, 2)))
    assert empty.dim == 0
    assert empty.evaluate([0.0, 1.0]).shape == (2, 0)
    back = empty.apply(np.zeros((3, 0)))
    assert back.dim == 3 and back.is_zero


def test_json_document_is_reloaded_exactly(rng):
    f = random_exp_poly(rng, 3, A_WEIGHT)
    g = ExpPolyVec.from_dict(f.to_dict())
    assert g.weighted_norm(A_WEIGHT) == f.weighted_norm(A_WEIGHT)


# ===== MODALITA' A GRIGLIA =====

def _sampled_exponential(rate=1.0, y_max=40.0, points=8001):
    grid = np.linspace(0.0, y_max, points)
    return SampledVec(grid, np.exp(-rate * grid)[:, None])


def test_sampled_tail_integral_and_convolutions():
    f = _sampled_exponential()
    ys = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(f.integrate_tail().evaluate(ys)[:, 0], -np.exp(-ys), atol=1e-5)
    exact = ExpPolyVec.exponential(1.0, [1.0])
    np.testing.assert_allclose(f.convolve_decay(0.5).evaluate(ys), exact.convolve_decay(0.5).evaluate(ys),
                               atol=1e-5)
    np.testing.assert_allclose(f.convolve_growth_tail(-0.5).evaluate(ys),
                               exact.convolve_growth_tail(-0.5).evaluate(ys), atol=1e-5)
    assert f.weighted_norm(0.5) == pytest.approx(1.0, rel=1e-4)


def test_sampled_source_from_csv(tmp_path):
    grid = np.linspace(0.0, 10.0, 101)
    frame = pd.DataFrame({"y": grid, "h0": np.exp(-grid), "h1": 2 * np.exp(-grid)})
    path = tmp_path / "h.csv"
    frame.iloc[::-1].to_csv(path, index=False)
    f = SampledVec.from_csv(str(path))
    assert f.dim == 2
    np.testing.assert_allclose(f(0.0), [1.0, 2.0])
    assert list(f.to_frame(["a", "b"]).columns) == ["y", "a", "b"]


def test_sampled_grid_must_start_at_zero():
    with pytest.raises(ValidationError):
        SampledVec(np.array([0.5, 1.0]), np.ones((2, 1)))
