"""Heat kernels, extension kernels, fundamental solutions and their constants.

The canonical normalisation for the H-type kernels is the one with the
2*pi in the vertical frequency,

    q_(+-s)((z, sigma), t, y) = int_{R^k} exp(2 pi i <sigma, lam>)
        (|lam| / (2 sinh(2 pi t |lam|)))^(m/2 + 1 -+ s)
        exp(-(pi/2)(|z|^2 + y^2) |lam| coth(2 pi t |lam|)) d lam,

because the oscillation frequency |sigma| does not depend on t. The form
with exp(-(i/t)<sigma, lam>) is kept as ``form="original"`` for cross-checks.
All lambda-profiles are evaluated in log space so that sinh never overflows.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import DivergenceError, InvalidArgument, PoleError
from .htype import GroupPoint, HTypeStructure
from .quad import DEFAULT_SPEC, QuadratureSpec, integrate_semiinfinite, radial_fourier

POLE_RADIUS = 1e-6
_SMALL = 1e-8
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class FracOrder:
    """Fractional order ``sign * s`` with 0 < s < 1."""

    s: float
    sign: int = +1

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise InvalidArgument(f"fractional order must satisfy 0 < s < 1, got {self.s}")
        if self.sign not in (+1, -1):
            raise InvalidArgument(f"sign must be +1 or -1, got {self.sign}")

    @classmethod
    def plus(cls, s: float) -> "FracOrder":
        return cls(s, +1)

    @classmethod
    def minus(cls, s: float) -> "FracOrder":
        return cls(s, -1)

    @property
    def signed(self) -> float:
        return self.sign * self.s

    def flipped(self) -> "FracOrder":
        return FracOrder(self.s, -self.sign)

    def __str__(self):
        return f"{'+' if self.sign > 0 else '-'}{self.s:g}"


# ---------------------------------------------------------------- Gamma constants

def abs_gamma_neg(s: float) -> float:
    """|Gamma(-s)| for 0 < s < 1, by reflection."""
    return math.pi / (s * math.sin(math.pi * s) * math.gamma(s))


def _gamma_weight(o: FracOrder) -> float:
    return math.gamma(o.s) if o.sign > 0 else abs_gamma_neg(o.s)


def const_C(m: int, k: int, o: FracOrder) -> float:
    sv = o.signed
    num = (2.0 ** (m / 2 + 2 * k - 3 * sv - 1)
           * math.gamma(0.5 * (m / 2 + 1 - sv)) * math.gamma(0.5 * (m / 2 + k - sv)))
    return num / (math.pi ** ((m + k + 1) / 2) * _gamma_weight(o))


def gamma_ratio(m: int, k: int, s: float) -> float:
    if not 0.0 < s < 1.0:
        raise InvalidArgument("gamma_ratio needs 0 < s < 1")
    g = math.lgamma
    return math.exp(g((m + 2 + 2 * s) / 4) + g((m + 2 * k + 2 * s) / 4)
                    - g((m + 2 - 2 * s) / 4) - g((m + 2 * k - 2 * s) / 4))


# ---------------------------------------------------------------- Euclidean space

def _sq(x) -> float:
    x = np.atleast_1d(np.asarray(x, float))
    return float(x @ x)


def euclid_ext_kernel(n: int, o: FracOrder, x, y: float, t):
    """(4 pi t)^-(n/2 + 1 -+ s) exp(-(|x|^2 + y^2) / 4t); vectorised in t."""
    t = np.asarray(t, float)
    if np.any(t <= 0):
        raise InvalidArgument("t must be positive")
    a = n / 2 + 1 - o.signed
    return np.exp(-a * np.log(4 * np.pi * t) - (_sq(x) + y * y) / (4 * t))[()]


def euclid_heat_kernel(n: int, x, t):
    t = np.asarray(t, float)
    return np.exp(-n / 2 * np.log(4 * np.pi * t) - _sq(x) / (4 * t))[()]


def euclid_fundsol(n: int, o: FracOrder, x, y: float) -> float:
    if n < 2:
        raise InvalidArgument("euclid_fundsol needs n >= 2")
    r2 = _sq(x) + y * y
    if math.sqrt(r2) < POLE_RADIUS:
        raise PoleError("Euclidean fundamental solution evaluated at its pole")
    e = (n - 2 * o.signed) / 2
    return math.gamma(e) / (4 * math.pi ** (n / 2 + 1 - o.signed)) * r2 ** (-e)


# ---------------------------------------------------------------- lambda profiles

# sinh(x)/x - 1 = sum_j x^(2j) / (2j+1)!, j >= 1; seven terms suffice below 1/2
_SINHC_COEF = [1.0 / math.factorial(2 * j + 1) for j in range(7, 0, -1)]


def log_xsinh(x):
    """log(x / sinh x) for x >= 0, accurate to relative precision for small x."""
    x = np.asarray(x, float)
    small = x < 0.5
    xs = np.where(small, 1.0, x)
    big = np.log(xs) + _LOG2 - xs - np.log1p(-np.exp(-2 * xs))
    x2 = np.where(small, x * x, 0.0)
    series = np.polyval(_SINHC_COEF + [0.0], x2)
    return np.where(small, -np.log1p(series), big)


def xcoth(x):
    """x coth x for x >= 0 (limit 1 at 0)."""
    x = np.asarray(x, float)
    small = x < _SMALL
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 3.0, xs / np.tanh(xs))


def log_kernel_factor(r, t, a, r2):
    """log of (r / (2 sinh 2 pi t r))^a exp(-(pi/2) r2 r coth(2 pi t r))."""
    x = 2 * np.pi * t * r
    return a * (log_xsinh(x) - np.log(4 * np.pi * t)) - r2 / (4 * t) * xcoth(x)


def _bcast(r, *params):
    """Reshape radial nodes (N,) against parameter arrays of a common batch shape."""
    shape = np.broadcast_shapes(*(np.shape(p) for p in params))
    r = np.asarray(r, float).reshape((-1,) + (1,) * len(shape))
    return r, shape


def _check_k(s: HTypeStructure, g: GroupPoint):
    if g.z.shape != (s.m,) or g.sigma.shape != (s.k,):
        raise InvalidArgument("group point does not conform to the structure")


def q_general(s: HTypeStructure, a: float, g: GroupPoint, t, y: float = 0.0,
              spec: QuadratureSpec = DEFAULT_SPEC):
    """Rescaled-form kernel with arbitrary exponent ``a``; vectorised in t."""
    _check_k(s, g)
    t = np.asarray(t, float)
    if np.any(t <= 0):
        raise InvalidArgument("t must be positive")
    r2 = g.znorm ** 2 + y * y

    def profile(r):
        rr, _ = _bcast(r, t)
        return np.exp(log_kernel_factor(rr, t, a, r2))

    return radial_fourier(profile, g.signorm, s.k, spec).value


def q_original(s: HTypeStructure, a: float, g: GroupPoint, t: float, y: float = 0.0,
               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Same kernel in the unscaled variable with phase exp(-(i/t)<sigma, mu>)."""
    _check_k(s, g)
    t = float(t)
    if t <= 0:
        raise InvalidArgument("t must be positive")
    r2 = g.znorm ** 2 + y * y

    def profile(mu):
        return np.exp(a * log_xsinh(mu) - r2 / (4 * t) * xcoth(mu))

    # exp(-(i/t)<sigma, mu>) = exp(2 pi i <sigma', mu>) with |sigma'| = |sigma| / (2 pi t)
    val = radial_fourier(profile, g.signorm / (2 * np.pi * t), s.k, spec).value
    return 2.0 ** s.k * math.exp(-(a + s.k) * math.log(4 * np.pi * t)) * val


def ghc_heat_kernel(s: HTypeStructure, g: GroupPoint, t, spec: QuadratureSpec = DEFAULT_SPEC):
    """Heat kernel p(g, e, t) of the horizontal Laplacian; vectorised in t."""
    return q_general(s, s.m / 2, g, t, 0.0, spec)


def ext_kernel_q(s: HTypeStructure, o: FracOrder, g: GroupPoint, t, y: float = 0.0,
                 spec: QuadratureSpec = DEFAULT_SPEC, form: str = "rescaled"):
    if y < 0:
        raise InvalidArgument("y must be non-negative")
    a = s.m / 2 + 1 - o.signed
    if form == "rescaled":
        return q_general(s, a, g, t, y, spec)
    if form == "original":
        return q_original(s, a, g, t, y, spec)
    raise InvalidArgument(f"unknown form {form!r}")


def thin_kernel_K(s: HTypeStructure, o: FracOrder, g: GroupPoint, t,
                  spec: QuadratureSpec = DEFAULT_SPEC):
    t = np.asarray(t, float)
    return (4 * np.pi * t) ** (1 - o.signed) * ext_kernel_q(s, o, g, t, 0.0, spec)


def gauge(g: GroupPoint, y: float) -> float:
    """((|z|^2 + y^2)^2 + 16 |sigma|^2)^(1/4), the scaled distance to the pole."""
    return ((g.znorm ** 2 + y * y) ** 2 + 16 * g.signorm ** 2) ** 0.25


def fundsol_subordinate(s: HTypeStructure, o: FracOrder, g: GroupPoint, y: float,
                        spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Time integral of the extension kernel over (0, inf)."""
    _check_k(s, g)
    if 0 < gauge(g, y) < POLE_RADIUS:
        raise DivergenceError("fundamental solution requested inside the pole radius")
    scale = max(gauge(g, y) ** 2, 1e-6)
    res = integrate_semiinfinite(lambda t: ext_kernel_q(s, o, g, t, y, spec), 1.0, spec, scale=scale)
    return res.value


def fundsol_closed(s: HTypeStructure, o: FracOrder, g: GroupPoint, y: float) -> float:
    _check_k(s, g)
    d = gauge(g, y)
    if d < POLE_RADIUS:
        raise PoleError("fundamental solution evaluated at its pole")
    m, k, sv = s.m, s.k, o.signed
    pref = _gamma_weight(o) * (4 * math.pi) ** (sv - 1)
    return pref * const_C(m, k, o) * d ** (-2 * (m / 2 + k - sv))
