"""Polynomial, rational transfer function and resolvent arithmetic."""

import numpy as np
import pytest

from adrclab.ratpoly import (PoleOnAxisError, Polynomial, PolyMatrix,
                             RationalTf, eval_tf, freq_response, resolvent)


def test_polynomial_trim_and_degree():
    assert Polynomial((1.0, 2.0, 0.0)).coeffs == (1.0, 2.0)
    assert Polynomial((0.0, 0.0)).is_zero
    assert Polynomial().degree == -1
    assert Polynomial((5.0,)).degree == 0
    # relative trim kills cancellation residue in the leading coefficient
    assert Polynomial((1.0, 1e-14)).coeffs == (1.0,)


def test_polynomial_arithmetic_matches_numpy():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.standard_normal(rng.integers(1, 6))
        b = rng.standard_normal(rng.integers(1, 6))
        pa, pb = Polynomial(tuple(a)), Polynomial(tuple(b))
        prod = np.polymul(a[::-1], b[::-1])[::-1]
        assert np.allclose((pa * pb).coeffs, np.trim_zeros(prod, "b"), atol=1e-12)
        s = 0.3 + 1.7j
        ref = np.polyval(a[::-1], s) + np.polyval(b[::-1], s)
        assert abs((pa + pb)(s) - ref) < 1e-12


def test_polynomial_monomial_shift_coeff():
    p = Polynomial.monomial(3, 2.0)
    assert p.coeffs == (0.0, 0.0, 0.0, 2.0)
    assert p.shift(2).coeffs == (0.0,) * 5 + (2.0,)
    assert p.coeff(3) == 2.0 and p.coeff(7) == 0.0


def test_rationaltf_canonical_monic_denominator():
    g = RationalTf.from_coeffs([2.0], [4.0, 2.0])
    assert g.den.coeffs == (2.0, 1.0)
    assert g.num.coeffs == (1.0,)


def test_rationaltf_properness_and_degrees():
    assert RationalTf.from_coeffs([1.0], [1.0, 1.0]).properness == "strictly proper"
    assert RationalTf.from_coeffs([1.0, 1.0], [1.0, 1.0]).properness == "proper"
    assert RationalTf.from_coeffs([0.0, 0.0, 1.0], [1.0, 1.0]).properness == "improper"
    assert RationalTf.from_coeffs([1.0], [1.0, 2.0, 1.0]).degrees == (0, 2)


def test_rationaltf_validation():
    with pytest.raises(ValueError):
        RationalTf.from_coeffs([1.0], [0.0])
    with pytest.raises(ValueError):
        RationalTf.from_coeffs([1.0], [1.0], delay=-0.1)


def test_rationaltf_product_adds_delays():
    a = RationalTf.from_coeffs([1.0], [1.0, 1.0], delay=0.2)
    b = RationalTf.from_coeffs([2.0], [1.0, 0.0, 1.0], delay=0.1)
    c = a * b
    assert c.delay == pytest.approx(0.3)
    assert c.den.degree == 3 and c.num.coeffs == (2.0,)


def test_rationaltf_dict_roundtrip():
    g = RationalTf.from_coeffs([1.0, 2.0], [3.0, 0.0, 1.0], delay=0.5)
    assert RationalTf.from_dict(g.to_dict()) == g


def test_eval_tf_first_order_lag_with_dead_time():
    # 1/(s+1) with 0.2 s dead time at omega = 1: |G| = 1/sqrt(2),
    # arg G = -pi/4 - 0.2 rad
    g = RationalTf.from_coeffs([1.0], [1.0, 1.0], delay=0.2)
    v = eval_tf(g, 1.0)
    assert abs(v) == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-12)
    assert np.angle(v) == pytest.approx(-np.pi / 4 - 0.2, rel=1e-12)


def test_freq_response_matches_pointwise_eval():
    g = RationalTf.from_coeffs([1.0, 0.5], [2.0, 1.0, 1.0], delay=0.3)
    w = np.logspace(-2, 2, 50)
    vec = freq_response(g, w)
    for i in (0, 17, 49):
        assert vec[i] == pytest.approx(eval_tf(g, w[i]), rel=1e-13)


def test_eval_on_pole_raises():
    g = RationalTf.from_coeffs([1.0], [0.0, 1.0])  # 1/s
    with pytest.raises(PoleOnAxisError):
        eval_tf(g, 0.0)
    with pytest.raises(PoleOnAxisError):
        freq_response(g, np.array([1.0, 0.0]))


def test_resolvent_det_matches_numpy_charpoly():
    rng = np.random.default_rng(1)
    for dim in (1, 2, 4):
        m = rng.standard_normal((dim, dim))
        _, det = resolvent(m)
        ref = np.poly(m)[::-1]  # ascending
        assert np.allclose(det.coeffs, ref, atol=1e-10)


def test_resolvent_adjugate_identity():
    # adj(sI - m) must equal det(sI - m) * inv(sI - m) at any regular point
    rng = np.random.default_rng(2)
    m = rng.standard_normal((4, 4))
    adj, det = resolvent(m)
    s = 0.7 + 1.3j
    inv = np.linalg.inv(s * np.eye(4) - m)
    ref = det(s) * inv
    got = np.array([[adj[i, j](s) for j in range(4)] for i in range(4)])
    assert np.allclose(got, ref, rtol=1e-10)


def test_resolvent_rejects_nonsquare():
    with pytest.raises(ValueError):
        resolvent(np.zeros((2, 3)))


def test_polymatrix_vecmul_and_bilinear():
    one = Polynomial((1.0,))
    s = Polynomial((0.0, 1.0))
    m = PolyMatrix([[one, s], [s, one]])
    out = m.vecmul([2.0, 3.0])
    assert out[0].coeffs == (2.0, 3.0)
    assert out[1].coeffs == (3.0, 2.0)
    # [1 1] M [2 3]^T = (2 + 3s) + (3 + 2s) = 5 + 5s
    assert m.bilinear([1.0, 1.0], [2.0, 3.0]).coeffs == (5.0, 5.0)
