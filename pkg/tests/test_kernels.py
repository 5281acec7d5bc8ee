import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intertwine import DivergenceError, InvalidArgument, PoleError
from intertwine.htype import GroupPoint, dilate, structure_for
from intertwine.kernels import (FracOrder, abs_gamma_neg, const_C, euclid_ext_kernel,
                                euclid_fundsol, euclid_heat_kernel, ext_kernel_q, fundsol_closed,
                                fundsol_subordinate, gamma_ratio, ghc_heat_kernel, log_xsinh,
                                q_general, thin_kernel_K, xcoth)
from intertwine.quad import integrate_semiinfinite

# Reference values computed with mpmath at 30 digits: Gamma closed forms and
# direct quadrature of the lambda-integrals.
C_PLUS_HALF = 0.121396986752918622920701265482
C_MINUS_HALF = 0.265669974979210912795622548776
E_PLUS_HALF = 0.0606984933764593114603506327412       # e_(1/2)(e, 1) on H^1
E_MINUS_HALF = 0.021141344874520785282695406222       # e_(-1/2)(e, 1) on H^1
GAMMA_RATIO_H1 = 0.547109903806619159709192485176
Q_PLUS_E = 0.0138553387191455221064629630402          # q_(1/2)(e, 1, 0)
Q_PLUS_SAMPLE = 0.0145129466877311866747867742678     # q_(1/2)(((1,0),0.3), 0.7, 0.5)
Q_MINUS_SAMPLE = 0.00142632227245284616811326792322   # q_(-1/2) at the same point

H1 = structure_for(2, 1)
QH = structure_for(4, 3)
E = GroupPoint.identity(H1)
G = GroupPoint([1.0, 0.0], [0.3])


def test_fracorder():
    assert FracOrder.minus(0.3).signed == -0.3
    assert FracOrder.plus(0.3).flipped() == FracOrder.minus(0.3)
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(InvalidArgument):
            FracOrder(bad)
    with pytest.raises(InvalidArgument):
        FracOrder(0.5, 0)


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.9])
def test_abs_gamma_neg(s):
    assert abs_gamma_neg(s) == pytest.approx(abs(float(mpmath.gamma(-s))), rel=1e-13)


def test_gamma_half_integers():
    for n in range(1, 8):
        assert math.gamma(n + 0.5) == pytest.approx(float(mpmath.gamma(n + 0.5)), rel=1e-14)


def test_constants():
    assert const_C(2, 1, FracOrder.plus(0.5)) == pytest.approx(C_PLUS_HALF, rel=1e-13)
    assert const_C(2, 1, FracOrder.minus(0.5)) == pytest.approx(C_MINUS_HALF, rel=1e-13)
    assert gamma_ratio(2, 1, 0.5) == pytest.approx(GAMMA_RATIO_H1, rel=1e-13)


@pytest.mark.parametrize("m,k", [(2, 1), (4, 1), (4, 3)])
def test_gamma_ratio_limit(m, k):
    assert gamma_ratio(m, k, 1 - 1e-9) == pytest.approx(m / 4 * (m + 2 * k - 2) / 4, rel=1e-7)


def test_euclid_examples():
    o = FracOrder.plus(0.5)
    assert euclid_ext_kernel(2, o, [0, 0], 0.0, 1.0) == pytest.approx((4 * math.pi) ** -1.5, rel=1e-14)
    assert euclid_ext_kernel(2, o.flipped(), [0, 0], 0.0, 1.0) == pytest.approx((4 * math.pi) ** -2.5, rel=1e-14)
    t = np.array([0.1, 1.0, 7.0])
    np.testing.assert_allclose(euclid_ext_kernel(2, o, [0, 0], 0.0, t) * (4 * np.pi * t) ** 1.5, 1.0)
    assert euclid_ext_kernel(3, o, [1, 2, 0], 0.3, 0.7) == pytest.approx(
        euclid_ext_kernel(3, o, [0, 0, math.sqrt(5)], 0.3, 0.7), rel=1e-15)
    assert euclid_fundsol(2, o, [0, 0], 1.0) == pytest.approx(1 / (4 * math.pi), rel=1e-14)
    assert euclid_fundsol(2, FracOrder.minus(0.5), [0, 0], 1.0) == pytest.approx(
        math.gamma(1.5) / (4 * math.pi ** 2.5), rel=1e-14)
    with pytest.raises(PoleError):
        euclid_fundsol(2, o, [0, 0], 0.0)
    with pytest.raises(InvalidArgument):
        euclid_ext_kernel(2, o, [0, 0], 1.0, 0.0)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("o", [FracOrder.plus(0.3), FracOrder.minus(0.7)])
def test_euclid_subordination(n, o):
    x, y = np.array([0.5] + [0.0] * (n - 1)), 0.8
    v = integrate_semiinfinite(lambda t: euclid_ext_kernel(n, o, x, y, t), 1.0).value
    assert v == pytest.approx(euclid_fundsol(n, o, x, y), rel=1e-10)


def test_log_xsinh_accuracy():
    mpmath.mp.dps = 50
    for x in [0.0, 1e-12, 1e-5, 0.1, 0.49, 0.5, 0.51, 2.0, 30.0, 800.0]:
        ref = float(mpmath.log(x / mpmath.sinh(x))) if x else 0.0
        assert float(log_xsinh(x)) == pytest.approx(ref, rel=1e-14, abs=1e-300)
    assert float(xcoth(0.0)) == 1.0
    assert float(xcoth(2.0)) == pytest.approx(2 / math.tanh(2), rel=1e-15)


def test_ghc_origin():
    assert float(ghc_heat_kernel(H1, E, 1.0)) == pytest.approx(1 / 16, rel=1e-10)
    np.testing.assert_allclose(ghc_heat_kernel(H1, E, np.array([0.5, 1.0, 2.0])),
                               [1 / 4, 1 / 16, 1 / 64], rtol=1e-10)


def test_ext_kernel_oracles():
    assert float(ext_kernel_q(H1, FracOrder.plus(0.5), E, 1.0)) == pytest.approx(Q_PLUS_E, rel=1e-9)
    assert float(ext_kernel_q(H1, FracOrder.plus(0.5), G, 0.7, 0.5)) == pytest.approx(Q_PLUS_SAMPLE, rel=1e-9)
    assert float(ext_kernel_q(H1, FracOrder.minus(0.5), G, 0.7, 0.5)) == pytest.approx(Q_MINUS_SAMPLE, rel=1e-9)


@pytest.mark.parametrize("o", [FracOrder.plus(0.5), FracOrder.minus(0.5)])
def test_two_forms_agree(o):
    a = float(ext_kernel_q(H1, o, G, 0.7, 0.5))
    b = ext_kernel_q(H1, o, G, 0.7, 0.5, form="original")
    assert a == pytest.approx(b, rel=1e-9)


def test_unit_order_limit_is_heat_kernel():
    # at order 1 the exponent m/2 + 1 - s reduces to m/2
    g = GroupPoint([0.4, -0.2], [0.1])
    assert float(q_general(H1, H1.m / 2, g, 0.8)) == float(ghc_heat_kernel(H1, g, 0.8))
    assert float(thin_kernel_K(H1, FracOrder.plus(0.5), g, 0.8)) > 0


def test_sign_of_sigma_is_immaterial():
    a = float(ghc_heat_kernel(H1, GroupPoint([0.3, 0.1], [0.7]), 0.4))
    b = float(ghc_heat_kernel(H1, GroupPoint([0.3, 0.1], [-0.7]), 0.4))
    assert a == b


@pytest.mark.parametrize("st_", [H1, QH], ids=["H1", "quaternionic"])
def test_kernels_positive(st_):
    rng = np.random.default_rng(0)
    for _ in range(10):
        g = GroupPoint(rng.normal(size=st_.m), rng.normal(size=st_.k))
        assert float(ghc_heat_kernel(st_, g, 0.5)) > 0
        assert float(ext_kernel_q(st_, FracOrder.minus(0.4), g, 0.5, 0.3)) > 0


@settings(max_examples=15)
@given(lam=st.floats(0.5, 2.0), zx=st.floats(-1, 1), sig=st.floats(-0.5, 0.5),
       t=st.floats(0.3, 2.0), y=st.floats(0.0, 1.0), sign=st.sampled_from([1, -1]))
def test_parabolic_homogeneity(lam, zx, sig, t, y, sign):
    o = FracOrder(0.4, sign)
    g = GroupPoint([zx, 0.5], [sig])
    lhs = float(ext_kernel_q(H1, o, dilate(g, lam), lam * lam * t, lam * y))
    rhs = lam ** -(H1.Q + 2 - 2 * o.signed) * float(ext_kernel_q(H1, o, g, t, y))
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_fundsol_anchors():
    assert fundsol_closed(H1, FracOrder.plus(0.5), E, 1.0) == pytest.approx(E_PLUS_HALF, rel=1e-13)
    assert fundsol_closed(H1, FracOrder.minus(0.5), E, 1.0) == pytest.approx(E_MINUS_HALF, rel=1e-13)
    assert fundsol_subordinate(H1, FracOrder.plus(0.5), E, 1.0) == pytest.approx(E_PLUS_HALF, rel=1e-8)


THEOREM_A_GRID = [(s, y, r) for s in (0.3, 0.5, 0.7) for y in (0.5, 1.0, 2.0) for r in (0.0, 1.0)]


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("st_", [H1, QH], ids=["H1", "quaternionic"])
def test_theorem_a_grid(st_, sign):
    for s, y, r in THEOREM_A_GRID:
        o = FracOrder(s, sign)
        g = GroupPoint([r] + [0.0] * (st_.m - 1), np.zeros(st_.k))
        assert fundsol_subordinate(st_, o, g, y) == pytest.approx(fundsol_closed(st_, o, g, y), rel=1e-5)


def test_pole_handling():
    o = FracOrder.plus(0.5)
    with pytest.raises(PoleError):
        fundsol_closed(H1, o, E, 0.0)
    with pytest.raises(DivergenceError):
        fundsol_subordinate(H1, o, E, 1e-8)
