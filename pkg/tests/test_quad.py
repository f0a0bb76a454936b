from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from zetaladder.errors import DomainError
from zetaladder.jacobi_basis import jacobi_all, jacobi_norm, weight_mass
from zetaladder.quad import gauss_jacobi, integrate_reference, integrate_t_space


def test_two_point_legendre():
    rule = gauss_jacobi(0.0, 0.0, 2)
    assert np.allclose(np.sort(rule.nodes), [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    assert np.allclose(rule.weights, [1.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("order", [1, 5, 40, 200])
def test_chebyshev_masses(order):
    assert gauss_jacobi(-0.5, -0.5, order).weights.sum() == pytest.approx(math.pi, rel=1e-13)
    assert gauss_jacobi(0.5, 0.5, order).weights.sum() == pytest.approx(math.pi / 2, rel=1e-13)


@given(st.floats(-0.99, 5.0), st.floats(-0.99, 5.0), st.integers(1, 120))
def test_mass_identity(alpha, beta, order):
    rule = gauss_jacobi(alpha, beta, order)
    assert rule.weights.sum() == pytest.approx(weight_mass(alpha, beta), rel=1e-12)
    assert np.all(rule.weights > 0)
    assert np.all(np.abs(rule.nodes) < 1)


def _moment(alpha, beta, k):
    # int x^k (1-x)^a (1+x)^b dx via binomial expansion of x = (1+x) - 1, in 40 digits
    with mpmath.workdps(40):
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        total = mpmath.mpf(0)
        for j in range(k + 1):
            total += mpmath.binomial(k, j) * (-1) ** (k - j) * 2 ** (a + b + j + 1) * mpmath.beta(a + 1, b + j + 1)
        return float(total)


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (-0.5, -0.5), (0.5, 0.5), (0.3, -0.4)])
def test_moment_exactness(alpha, beta):
    order = 8
    rule = gauss_jacobi(alpha, beta, order)
    for k in range(2 * order):
        ref = _moment(alpha, beta, k)
        got = rule.integrate(lambda x: x**k)
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-13)


def test_moment_gaps_by_orthogonality_high_order():
    # exactness at order 100 checked through the orthogonality of P_99 * P_100-ish products
    rule = gauss_jacobi(0.3, -0.4, 100)
    p = jacobi_all(0.3, -0.4, 99, rule.nodes)
    gram = (p * rule.weights) @ p.T
    norms = np.array([jacobi_norm(0.3, -0.4, n) for n in range(100)])
    scaled = gram / np.sqrt(np.outer(norms, norms))
    assert np.max(np.abs(scaled - np.eye(100))) < 1e-11


def test_order_limits():
    with pytest.raises(ValueError):
        gauss_jacobi(0.0, 0.0, 0)
    with pytest.raises(ValueError):
        gauss_jacobi(0.0, 0.0, 501)
    with pytest.raises(ValueError):
        gauss_jacobi(-1.0, 0.0, 3)
    assert gauss_jacobi(0.2, 0.1, 500).order == 500


def test_rule_is_immutable():
    rule = gauss_jacobi(0.0, 0.0, 4)
    with pytest.raises(ValueError):
        rule.weights[0] = 1.0


def test_reference_examples():
    from zetaladder.jacobi_basis import classical_all
    for n in range(11):
        leg = integrate_reference(lambda x: classical_all("legendre", n, x)[n] ** 2, 0.0, 0.0, 12)
        assert leg == pytest.approx(2 / (2 * n + 1), rel=1e-12)
        if n >= 1:
            t = integrate_reference(lambda x: classical_all("chebyshev_t", n, x)[n] ** 2, -0.5, -0.5, 12)
            assert t == pytest.approx(math.pi / 2, rel=1e-12)
    off = integrate_reference(lambda x: jacobi_all(0.3, -0.4, 10, x)[3] * jacobi_all(0.3, -0.4, 10, x)[7], 0.3, -0.4, 12)
    assert abs(off) < 1e-12


def test_t_space_singular_endpoints():
    res = integrate_t_space(lambda t: t**-0.5, 0.0, 2.0, 1e-12, singular=(True, False))
    assert res.value == pytest.approx(2 * math.sqrt(2), rel=1e-13)
    assert not res.flagged
    res = integrate_t_space(lambda t: (2.0 - t) ** -0.5, 0.0, 2.0, 1e-12, singular=(False, True))
    assert res.value == pytest.approx(2 * math.sqrt(2), rel=1e-13)
    ref = 2**0.9 * special.beta(0.6, 1.3)
    g = lambda t: t**-0.4 * (2.0 - t) ** 0.3
    res = integrate_t_space(g, 0.0, 2.0, 1e-12, singular=(True, True), powers=(5, 10))
    assert res.value == pytest.approx(ref, rel=1e-13)


def test_t_space_distance_mode():
    res = integrate_t_space(lambda t, dl, dr: dl**-0.5 * dr**-0.5, 10.0, 11.0, 1e-12,
                            singular=(True, True), pass_distance=True)
    assert res.value == pytest.approx(math.pi, rel=1e-12)


def test_t_space_vector_and_flag():
    res = integrate_t_space(lambda t: np.stack([np.cos(t), t**2]), 0.0, 3.0, 1e-12)
    assert np.allclose(res.value, [math.sin(3.0), 9.0], rtol=1e-13)
    rough = integrate_t_space(lambda t: np.sin(1.0 / (t + 1e-3)), 0.0, 1.0, 1e-14, max_panels=50)
    assert rough.flagged
    with pytest.raises(DomainError):
        integrate_t_space(np.cos, 1.0, 1.0)


def test_t_space_panel_cap_uses_zero_gap():
    from zetaladder.zeta_engine import mean_zero_gap
    res = integrate_t_space(np.ones_like, 0.0, 4.0, 1.0, origin=1e4)
    assert res.panels >= math.ceil(4.0 / (mean_zero_gap(1e4 + 4.0) / 8))


def test_refinement_convergence():
    g = lambda t: np.exp(np.sin(7 * t)) * (3.0 - t) ** -0.5
    prev = integrate_t_space(g, 0.0, 3.0, 1e-4, singular=(False, True))
    for tol in (5e-5, 2.5e-5, 1.25e-5, 6e-6):
        cur = integrate_t_space(g, 0.0, 3.0, tol, singular=(False, True))
        assert abs(cur.value - prev.value) <= max(prev.error, 1e-15)
        prev = cur


def test_t_space_deterministic():
    g = lambda t: np.cos(40 * t) ** 2 * np.exp(-t)
    a = integrate_t_space(g, 0.0, 5.0, 1e-10)
    b = integrate_t_space(g, 0.0, 5.0, 1e-10)
    assert a.value == b.value and a.panels == b.panels
