"""Fractional operators on the fundamental-solution families.

Time derivatives are taken by finite differences on a batch of stencil
times that share one set of quadrature nodes, so the quadrature error is a
smooth function of t and does not pollute the difference quotient.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import (BlockedPrecondition, InvalidArgument, PrecisionError, QuadratureError,
                     UnsupportedDimension)
from .htype import GroupPoint, HTypeStructure, jmap, mul_arrays
from .kernels import (FracOrder, _check_k, euclid_heat_kernel, fundsol_closed, gauge,
                      ghc_heat_kernel, log_kernel_factor, log_xsinh, q_general, xcoth)
from .quad import (DEFAULT_SPEC, QuadratureSpec, integrate_box, integrate_semiinfinite,
                   radial_fourier)

FD_MIN_STEP = 1e-4
FD_REL_STEP = 1e-3
T_CHUNK = 16          # stencil times per inner batch; bounds the (lam, tau, t) working set
DIFF_ABS_FLOOR = 1e-30  # inner absolute tolerance of the difference route, relative to scale


@dataclass(frozen=True)
class Euclidean:
    """R^n with the Gaussian heat kernel."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument("Euclidean dimension must be >= 1")


def _check_s(s: float):
    if not 0.0 < s < 1.0:
        raise InvalidArgument(f"need 0 < s < 1, got {s}")


def _check_pos(**kw):
    for name, v in kw.items():
        if not np.all(np.asarray(v) > 0):
            raise InvalidArgument(f"{name} must be positive")


def heat_kernel(domain, point, t, spec: QuadratureSpec = DEFAULT_SPEC):
    if isinstance(domain, Euclidean):
        return euclid_heat_kernel(domain.n, point, t)
    if isinstance(domain, HTypeStructure):
        return ghc_heat_kernel(domain, point, t, spec)
    raise InvalidArgument(f"unknown domain {domain!r}")


def _point_scale(domain, point, y: float) -> float:
    if isinstance(domain, Euclidean):
        x = np.atleast_1d(np.asarray(point, float))
        return max(float(x @ x) + y * y, 1e-6)
    return max(gauge(point, y) ** 2, 1e-6)


def _chunked(fn, t, size: int = T_CHUNK):
    flat = np.asarray(t, float).ravel()
    out = [np.atleast_1d(fn(flat[i:i + size])) for i in range(0, len(flat), size)]
    return np.concatenate(out).reshape(np.shape(t))


# ---------------------------------------------------------------- time derivative

def fd_stencil(t):
    """Stencil times (N, 4), steps and the central/forward selector."""
    t = np.atleast_1d(np.asarray(t, float))
    h = np.maximum(FD_MIN_STEP, FD_REL_STEP * t)
    central = t > 2 * h
    offs = np.where(central[:, None], [-1.0, -0.5, 0.5, 1.0], [0.0, 0.5, 1.0, 2.0])
    return t[:, None] + h[:, None] * offs, h, central


def time_derivative(F, t):
    """dF/dt by one Richardson level on central differences.

    Where t - h would come too close to 0 a one-sided three-point rule is
    extrapolated instead. ``F`` maps a 1-D array of times to values.
    """
    pts, h, central = fd_stencil(t)
    v = np.asarray(F(pts.ravel()), float).reshape(pts.shape)
    cen = (4 * (v[:, 2] - v[:, 1]) / h - (v[:, 3] - v[:, 0]) / (2 * h)) / 3
    f1 = (-3 * v[:, 0] + 4 * v[:, 2] - v[:, 3]) / (2 * h)
    f2 = (-3 * v[:, 0] + 4 * v[:, 1] - v[:, 2]) / h
    return np.where(central, cen, (4 * f2 - f1) / 3)


def balakrishnan_derivative(F, s: float, spec: QuadratureSpec = DEFAULT_SPEC,
                            scale: float = 1.0) -> float:
    """-(1/Gamma(1-s)) int_0^inf t^-s F'(t) dt."""
    _check_s(s)
    res = integrate_semiinfinite(lambda t: t ** -s * time_derivative(F, t), 1.0 - s, spec, scale)
    return -res.value / math.gamma(1.0 - s)


def balakrishnan_difference(D, s: float, spec: QuadratureSpec = DEFAULT_SPEC, scale: float = 1.0,
                            cancel_bound: float = 0.0, tol: float | None = None) -> float:
    """-(s/Gamma(1-s)) int_0^inf t^(-1-s) D(t) dt with D(t) = P_t u - u.

    ``cancel_bound`` is the absolute error of one evaluation of D. Its effect
    near the left end of the truncation window, where t^(-1-s) is largest, is
    bounded and, if it exceeds ``tol`` relative to the result, PrecisionError
    is raised.
    """
    _check_s(s)
    res = integrate_semiinfinite(lambda t: t ** (-1 - s) * D(t), 1.0 - s, spec, scale)
    c = s / math.gamma(1.0 - s)
    value = -c * res.value
    if cancel_bound > 0:
        t_lo = res.window[0]
        propagated = cancel_bound * t_lo ** -s / math.gamma(1.0 - s)
        limit = (tol if tol is not None else 10 * spec.rel_tol) * abs(value)
        if propagated > limit:
            raise PrecisionError(
                f"small-t cancellation: bound {propagated:.3g} exceeds {limit:.3g} "
                f"(window starts at t={t_lo:.3g})")
    return value


# ---------------------------------------------------------------- non-geometric chain

def semigroup_on_fundsol(domain, s: float, point, y: float, t,
                         spec: QuadratureSpec = DEFAULT_SPEC):
    """P_t applied to the subordinated (+s) fundamental solution; vectorised in t."""
    _check_s(s)
    _check_pos(y=y, t=t)
    if isinstance(domain, HTypeStructure):
        _check_k(domain, point)

    def block(tb):
        def integrand(tau):
            w = np.exp((s - 1) * np.log(4 * np.pi * tau) - y * y / (4 * tau))
            return w[:, None] * heat_kernel(domain, point, tb[None, :] + tau[:, None], spec)
        return integrate_semiinfinite(integrand, 1.0, spec, scale=y * y).value

    size = len(np.ravel(t)) if isinstance(domain, Euclidean) else T_CHUNK
    return _chunked(block, t, max(size, 1))[()]


def nongeom_fundsol(domain, o, point, y: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Time integral of (4 pi t)^-(1 -+ s) exp(-y^2/4t) p(point, t)."""
    sv = o.signed
    if isinstance(domain, HTypeStructure):
        _check_k(domain, point)

    def integrand(t):
        return np.exp(-(1 - sv) * np.log(4 * np.pi * t) - y * y / (4 * t)) * heat_kernel(domain, point, t, spec)

    return integrate_semiinfinite(integrand, 1.0, spec, scale=_point_scale(domain, point, y)).value


def frac_power_on_fundsol(domain, s: float, point, y: float, spec: QuadratureSpec = DEFAULT_SPEC,
                          inner_spec: QuadratureSpec | None = None) -> float:
    """Spectral power of the sub-Laplacian applied to the (+s) fundamental solution."""
    inner = spec if inner_spec is None else inner_spec
    F = lambda t: semigroup_on_fundsol(domain, s, point, y, t, inner)
    return balakrishnan_derivative(F, s, spec, scale=_point_scale(domain, point, y))


# ---------------------------------------------------------------- spectral convolution

def _exponents(s: float, mirrored: bool):
    """(t exponent, tau exponent) of the composed lambda-profile."""
    return (1 - s, 1 + s) if mirrored else (1 + s, 1 - s)


def _log_conv(r, t, tau, s, m, z2, y2, mirrored, t_normalised):
    e_t, e_tau = _exponents(s, mirrored)
    v = t + tau
    lp = (e_tau * log_kernel_factor(r, tau, 1.0, 0.0)
          + e_t * log_kernel_factor(r, t, 1.0, 0.0)
          + log_kernel_factor(r, v, m / 2, z2)
          - y2 / (4 * tau) * xcoth(2 * np.pi * tau * r))
    if t_normalised:
        lp = lp + e_t * np.log(4 * np.pi * t)
    return lp


def conv_lemma_spectral(st: HTypeStructure, s: float, g: GroupPoint, y: float, t, tau,
                        spec: QuadratureSpec = DEFAULT_SPEC, mirrored: bool = False):
    """Spectral side of the (q_(-s) at t, q_(s) at tau) group convolution.

    ``mirrored`` interchanges the roles of +s and -s. Broadcasts over t, tau.
    """
    _check_s(s)
    _check_k(st, g)
    _check_pos(t=t, tau=tau)
    if y < 0:
        raise InvalidArgument("y must be non-negative")
    t, tau = np.broadcast_arrays(np.asarray(t, float), np.asarray(tau, float))
    z2, y2 = g.znorm ** 2, y * y

    def profile(r):
        rr = np.asarray(r, float).reshape((-1,) + (1,) * t.ndim)
        return np.exp(_log_conv(rr, t, tau, s, st.m, z2, y2, mirrored, False))

    return radial_fourier(profile, g.signorm, st.k, spec).value


def _log_sinh(x):
    return np.log(x) - log_xsinh(x)


def _shift_log_xsinh(x, d):
    """log_xsinh(x + d) - log_xsinh(x) without cancellation for small d."""
    small = d < 1.0
    ds = np.where(small, d, 0.0)
    near = np.log1p(d / x) - np.log1p(2 * np.sinh(ds / 2) ** 2 + np.sinh(ds) / np.tanh(x))
    far = log_xsinh(x + d) - log_xsinh(x)
    return np.where(small, near, far)


def _log_ratio_to_fundsol(r, t, tau, s, m, z2):
    """log of the composed (t-normalised) profile over the (+s) kernel profile at tau.

    The tau and y factors cancel exactly; what remains vanishes like t and is
    assembled from increments so it keeps full relative precision as t -> 0.
    """
    xt = 2 * np.pi * t * r
    xa = 2 * np.pi * tau * r
    # r coth(x + d) - r coth(x) = -r sinh d / (sinh x sinh(x + d))
    dcoth = -np.exp(np.log(r) + _log_sinh(xt) - _log_sinh(xa) - _log_sinh(xa + xt))
    return ((1 + s) * log_xsinh(xt)
            + m / 2 * (_shift_log_xsinh(xa, xt) - np.log1p(t / tau))
            - z2 * np.pi / 2 * dcoth)


def _composed_tau_integral(st, s, g, y, tb, spec, mirrored, subtract):
    """(4 pi t)^e_t times the tau-integral of the spectral convolution, for a batch of t.

    With ``subtract`` the (+s) kernel at tau is taken off pointwise, as
    B expm1(log A - log B), which gives P_(-s),t u - u.
    """
    z2, y2 = g.znorm ** 2, y * y
    a_u = st.m / 2 + 1 - s

    def f_tau(tau):
        tt = tb[None, :]
        ta = tau[:, None]

        def profile(r):
            rr = np.asarray(r, float).reshape(-1, 1, 1)
            if subtract:
                log_b = log_kernel_factor(rr, ta, a_u, z2 + y2)
                lr = _log_ratio_to_fundsol(rr, tt, ta, s, st.m, z2)
                # expm1 only where it matters; elsewhere exp(log_b) may underflow while lr is large
                near = np.abs(lr) < 1.0
                with np.errstate(over="ignore"):
                    far = np.exp(log_b + lr) - np.exp(log_b)
                return np.where(near, np.exp(log_b) * np.expm1(np.where(near, lr, 0.0)), far)
            return np.exp(_log_conv(rr, tt, ta, s, st.m, z2, y2, mirrored, True))

        return radial_fourier(profile, g.signorm, st.k, spec).value

    return integrate_semiinfinite(f_tau, 1.0, spec, scale=y2).value


def conformal_apply(st: HTypeStructure, s: float, g: GroupPoint, y: float,
                    spec: QuadratureSpec = DEFAULT_SPEC, method: str = "derivative",
                    inner_spec: QuadratureSpec | None = None, tol: float | None = None) -> float:
    """Conformal fractional operator applied to the geometric (+s) fundamental solution.

    ``method="derivative"`` integrates t^-s against the time derivative of
    P_(-s),t u; ``method="difference"`` integrates t^(-1-s)(P_(-s),t u - u)
    with the two integrands subtracted pointwise under the shared
    (tau, lambda) quadrature.
    """
    _check_s(s)
    _check_k(st, g)
    _check_pos(y=y)
    inner = spec if inner_spec is None else inner_spec
    scale = gauge(g, y) ** 2
    if method == "derivative":
        F = lambda t: _chunked(lambda tb: _composed_tau_integral(st, s, g, y, tb, inner, False, False), t)
        return balakrishnan_derivative(F, s, spec, scale)
    if method == "difference":
        u = fundsol_closed(st, FracOrder(s, +1), g, y)
        # the log-space subtraction keeps D(t) relatively accurate, so the only
        # absolute error left is the inner quadrature floor, tied to the
        # lambda-mass of the subtracted integrand
        taus = y * y * np.logspace(-2, 2, 41)
        mass = q_general(st, st.m / 2 + 1 - s, GroupPoint(g.z, np.zeros_like(g.sigma)), taus, y, inner)
        bound = DIFF_ABS_FLOOR * max(abs(u), float(np.max(mass)))
        inner = replace(inner, abs_tol=bound)
        D = lambda t: _chunked(lambda tb: _composed_tau_integral(st, s, g, y, tb, inner, False, True), t)
        return balakrishnan_difference(D, s, spec, scale, cancel_bound=bound, tol=tol)
    raise InvalidArgument(f"unknown method {method!r}")


# ---------------------------------------------------------------- direct convolution

@dataclass(frozen=True, eq=False)
class KernelTable:
    """Bicubic table of a radial kernel in (|z|, |sigma|), zero outside its box."""

    zmax: float
    smax: float
    spline: RectBivariateSpline = field(repr=False)

    def __call__(self, zn, sn):
        zn = np.asarray(zn, float)
        sn = np.asarray(sn, float)
        inside = (zn <= self.zmax) & (sn <= self.smax)
        v = self.spline.ev(np.minimum(zn, self.zmax), np.minimum(sn, self.smax))
        return np.where(inside, v, 0.0)


@lru_cache(maxsize=64)
def kernel_table(k: int, a: float, t: float, y: float, n_z: int, n_s: int, cut: float,
                 spec: QuadratureSpec) -> KernelTable:
    """Tabulate the rescaled kernel of exponent ``a`` at time t and extension height y."""
    log_cut = math.log(1.0 / cut)
    zmax = math.sqrt(4 * t * log_cut)
    smax = t * (log_cut + 10.0) / math.pi
    zg = np.linspace(0.0, zmax, n_z)
    sg = np.linspace(0.0, smax, n_s)
    r2 = zg ** 2 + y * y
    vals = np.empty((n_z, n_s))
    for j, sj in enumerate(sg):
        prof = lambda r: np.exp(log_kernel_factor(np.asarray(r, float)[:, None], t, a, r2[None, :]))
        vals[:, j] = radial_fourier(prof, sj, k, spec).value
    # mirror so the spline sees an even function in both variables
    zf = np.concatenate([-zg[:0:-1], zg])
    sf = np.concatenate([-sg[:0:-1], sg])
    vf = np.concatenate([vals[:0:-1], vals])
    vf = np.concatenate([vf[:, :0:-1], vf], axis=1)
    return KernelTable(zmax, smax, RectBivariateSpline(zf, sf, vf, kx=3, ky=3))


@dataclass(frozen=True)
class TableGrid:
    """Resolution of the kernel tables used by the 3-D convolution checks."""

    n_z: int = 121
    n_s: int = 161
    cut: float = 1e-10


def _require_h1(st: HTypeStructure):
    if st.m + st.k > 3:
        raise UnsupportedDimension("direct group convolution is implemented for m + k <= 3 only")


def _convolve_tables(st, A: KernelTable, B: KernelTable, g: GroupPoint, spec) -> float:
    z0 = g.z
    s0 = g.sigma

    def f(pts):
        zp = pts[:, :2]
        sp = pts[:, 2:]
        zq, sq = mul_arrays(st, -zp, -sp, np.broadcast_to(z0, zp.shape), np.broadcast_to(s0, sp.shape))
        return A(np.hypot(zq[:, 0], zq[:, 1]), np.abs(sq[:, 0])) * B(np.hypot(zp[:, 0], zp[:, 1]), np.abs(sp[:, 0]))

    return integrate_box(f, 3, spec, half_width=(B.zmax, B.zmax, B.smax)).value


def conv_direct(st: HTypeStructure, s: float, g: GroupPoint, y: float, t: float, tau: float,
                spec: QuadratureSpec = DEFAULT_SPEC, mirrored: bool = False,
                grid: TableGrid = TableGrid(), table_spec: QuadratureSpec | None = None) -> float:
    """Group convolution of q_(-s)(., t, 0) with q_(s)(., tau, y) by 3-D cubature."""
    _check_s(s)
    _check_k(st, g)
    _require_h1(st)
    _check_pos(t=t, tau=tau)
    tspec = table_spec or spec
    e_t, e_tau = _exponents(s, mirrored)
    A = kernel_table(st.k, st.m / 2 + e_t, float(t), 0.0, grid.n_z, grid.n_s, grid.cut, tspec)
    B = kernel_table(st.k, st.m / 2 + e_tau, float(tau), float(y), grid.n_z, grid.n_s, grid.cut, tspec)
    return _convolve_tables(st, A, B, g, spec)


def chapman(st: HTypeStructure, g: GroupPoint, t: float, tau: float,
            spec: QuadratureSpec = DEFAULT_SPEC, grid: TableGrid = TableGrid(),
            table_spec: QuadratureSpec | None = None) -> float:
    """Group convolution of two heat kernels, p(., t) * p(., tau) evaluated at g."""
    _check_k(st, g)
    _require_h1(st)
    _check_pos(t=t, tau=tau)
    tspec = table_spec or spec
    A = kernel_table(st.k, st.m / 2, float(t), 0.0, grid.n_z, grid.n_s, grid.cut, tspec)
    B = kernel_table(st.k, st.m / 2, float(tau), 0.0, grid.n_z, grid.n_s, grid.cut, tspec)
    return _convolve_tables(st, A, B, g, spec)


def group_integral(st: HTypeStructure, a: float, t: float, spec: QuadratureSpec = DEFAULT_SPEC,
                   grid: TableGrid = TableGrid(), table_spec: QuadratureSpec | None = None) -> float:
    """Integral over the group of the rescaled kernel of exponent ``a`` at time t."""
    _require_h1(st)
    _check_pos(t=t)
    T = kernel_table(st.k, a, float(t), 0.0, grid.n_z, grid.n_s, grid.cut, table_spec or spec)

    def f(pts):
        return T(np.hypot(pts[:, 0], pts[:, 1]), np.abs(pts[:, 2]))

    return integrate_box(f, 3, spec, half_width=(T.zmax, T.zmax, T.smax)).value


def heat_mass(st: HTypeStructure, t: float, spec: QuadratureSpec = DEFAULT_SPEC, **kw) -> float:
    return group_integral(st, st.m / 2, t, spec, **kw)


def thin_kernel_mass(st: HTypeStructure, s: float, t: float, spec: QuadratureSpec = DEFAULT_SPEC,
                     **kw) -> float:
    """Integral over the group of K_(-s)(., t)."""
    _check_s(s)
    return (4 * np.pi * t) ** (1 + s) * group_integral(st, st.m / 2 + 1 + s, t, spec, **kw)


# ---------------------------------------------------------------- inverse operator

_VALIDATION_POINT = dict(z=(0.5, 0.0), sigma=(0.1,), y=0.5, t=0.5, tau=0.5)
_VALIDATION_TOL = 5e-3


@lru_cache(maxsize=16)
def validate_mirrored(st: HTypeStructure, s: float) -> tuple[float, float]:
    """Compare both sides of the mirrored convolution identity at one sample point.

    Returns (direct, spectral); raises BlockedPrecondition if they disagree or
    the direct side cannot be computed for this structure.
    """
    p = _VALIDATION_POINT
    g = GroupPoint(np.array(p["z"][:st.m] + (0.0,) * (st.m - 2)), np.array(p["sigma"] + (0.0,) * (st.k - 1)))
    try:
        direct = conv_direct(st, s, g, p["y"], p["t"], p["tau"], QuadratureSpec(rel_tol=1e-5, abs_tol=1e-14),
                             mirrored=True)
    except UnsupportedDimension as exc:
        raise BlockedPrecondition(f"mirrored identity cannot be validated here: {exc}") from exc
    except QuadratureError as exc:
        raise BlockedPrecondition(f"mirrored identity validation failed: {exc}") from exc
    spectral = conv_lemma_spectral(st, s, g, p["y"], p["t"], p["tau"], mirrored=True)
    if abs(direct - spectral) > _VALIDATION_TOL * abs(spectral):
        raise BlockedPrecondition(
            f"mirrored identity not confirmed: direct {direct:.8g} vs spectral {spectral:.8g}")
    return direct, spectral


def riesz_apply(st: HTypeStructure, s: float, g: GroupPoint, y: float,
                spec: QuadratureSpec = DEFAULT_SPEC, scale: float = 1.0,
                inner_spec: QuadratureSpec | None = None) -> float:
    """Conformal Riesz potential of ``scale * (2 pi y)^(2s)`` times the (-s) fundamental solution."""
    _check_s(s)
    _check_k(st, g)
    _check_pos(y=y)
    validate_mirrored(st, s)
    inner = spec if inner_spec is None else inner_spec

    def integrand(t):
        G = _chunked(lambda tb: _composed_tau_integral(st, s, g, y, tb, inner, True, False), t, 4 * T_CHUNK)
        return t ** (s - 1) * G

    res = integrate_semiinfinite(integrand, s, spec, scale=gauge(g, y) ** 2)
    return scale * (2 * np.pi * y) ** (2 * s) * res.value / math.gamma(s)


# ---------------------------------------------------------------- auxiliary functions

def _dlog_xsinh(x):
    """d/dx log(x / sinh x) = 1/x - coth x, stable near 0."""
    x = np.asarray(x, float)
    small = x < 1e-4
    xs = np.where(small, 1.0, x)
    return np.where(small, -x / 3.0, (1.0 - xcoth(xs)) / xs)


def h_func(s: float, mu: float, rho):
    """The auxiliary function h_{s,mu}(rho)."""
    _check_s(s)
    _check_pos(mu=mu, rho=rho)
    rho = np.asarray(rho, float)
    a = rho * mu / (1 + rho)
    b = mu / (1 + rho)
    log_ratio = _log_sinh(a) - _log_sinh(b)
    lx = log_xsinh(mu)
    # the bracket equals (a/sinh a)(b/sinh b)(sinh mu/mu) - 1 since a + b = mu;
    # assembled from increments it stays accurate when one of a, b is tiny
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    bracket = np.expm1(log_xsinh(lo) - _shift_log_xsinh(hi, lo))
    return (np.exp(lx + s * log_ratio) * bracket)[()]


def h_func_deriv(s: float, mu: float, rho):
    """rho^s d/drho [ (a/sinh a)^(1-s) (b/sinh b)^(1+s) ], a = rho mu/(1+rho), b = mu/(1+rho)."""
    _check_s(s)
    _check_pos(mu=mu, rho=rho)
    rho = np.asarray(rho, float)
    a = rho * mu / (1 + rho)
    b = mu / (1 + rho)
    da = mu / (1 + rho) ** 2
    phi = np.exp((1 - s) * log_xsinh(a) + (1 + s) * log_xsinh(b))
    dlog = (1 - s) * _dlog_xsinh(a) * da - (1 + s) * _dlog_xsinh(b) * da
    return (rho ** s * phi * dlog)[()]


def cowboy_lhs(s: float, B: float, mu: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    _check_s(s)
    _check_pos(B=B, mu=mu)

    # (1 + rho)/rho * a coth a = mu coth a >= mu coth mu, so exp(-B mu coth mu)
    # is factored out and the integrand stays O(1) however large B is
    base = B * float(xcoth(mu))

    def integrand(rho):
        a = rho * mu / (1 + rho)
        b = mu / (1 + rho)
        la, lb = _log_sinh(a), _log_sinh(b)
        lg = (2 * (math.log(mu) - np.log1p(rho) - la) + s * (la - lb)
              - (B * (1 + rho) / rho * xcoth(a) - base))
        return np.exp(lg)

    return math.exp(-base) * integrate_semiinfinite(integrand, 1.0, spec, scale=1.0).value


def cowboy_rhs(s: float, B: float, mu: float) -> float:
    _check_s(s)
    _check_pos(B=B, mu=mu)
    return math.exp((s - 1) * math.log(B) + s * float(log_xsinh(mu)) + math.lgamma(1 - s)
                    - B * float(xcoth(mu)))


def jtwisted_gaussian(st: HTypeStructure, lam, z, t: float, tau: float,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> tuple[float, float]:
    """The J-twisted Gaussian integral over R^m: (cubature, factored closed form)."""
    if st.m > 4:
        raise UnsupportedDimension("J-twisted Gaussian cubature is implemented for m <= 4")
    lam = np.atleast_1d(np.asarray(lam, float))
    z = np.atleast_1d(np.asarray(z, float))
    if lam.shape != (st.k,) or z.shape != (st.m,):
        raise InvalidArgument("lam and z must have lengths k and m")
    L = float(np.linalg.norm(lam))
    if L == 0:
        raise InvalidArgument("lam must be nonzero")
    _check_pos(t=t, tau=tau)
    u, v = 2 * np.pi * t * L, 2 * np.pi * tau * L
    A = float(xcoth(u)) / (4 * t)
    Bc = float(xcoth(v)) / (4 * tau)
    w = jmap(st, lam, z)
    center = A * z / (A + Bc)

    def f(pts):
        d = pts - z
        return np.cos(np.pi * pts @ w) * np.exp(-A * np.einsum("ij,ij->i", d, d)
                                                 - Bc * np.einsum("ij,ij->i", pts, pts))

    hw = math.sqrt(math.log(1.0 / spec.tail_cut) / (A + Bc))
    cub = integrate_box(f, st.m, spec, half_width=hw, center=center).value
    log_pref = st.m / 2 * (math.log(2.0) + float(_log_sinh(u)) + float(_log_sinh(v))
                           - math.log(L) - float(_log_sinh(u + v)))
    closed = math.exp(log_pref - float(z @ z) * float(xcoth(u + v)) / (4 * (t + tau)))
    return cub, closed
