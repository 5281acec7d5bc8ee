"""Quadrature engine.

Every integrand in the package goes through here. Integrands are vectorised:
``f(x)`` receives a 1-D array of nodes of length N and returns an array of
shape ``(N,)`` or ``(N, *batch)``. A batched integrand is integrated
component-wise on one shared set of panels, which is what makes nested
integrals and finite differences under the integral sign cheap and smooth.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import (ConvergenceError, DivergenceError, EvaluationError,
                     InvalidArgument, UnsupportedDimension)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_cut: float = 1e-16

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidArgument("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise InvalidArgument("max_subdivisions must be >= 1")
        if not (0 < self.tail_cut < 1):
            raise InvalidArgument("tail_cut must lie in (0, 1)")

    def tightened(self, factor: float) -> "QuadratureSpec":
        """Copy with both tolerances divided by ``factor``."""
        return replace(self, abs_tol=self.abs_tol / factor, rel_tol=self.rel_tol / factor)


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float | np.ndarray
    err_estimate: float | np.ndarray
    evaluations: int
    window: tuple[float, float] | None = None


# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])           # ascending, 15 nodes
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(15)
GAUSS_W[[1, 3, 5]] = _WG[:3]
GAUSS_W[[9, 11, 13]] = _WG[2::-1]
GAUSS_W[7] = _WG[3]


def _eval(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape[:1] != x.shape:
        raise EvaluationError(f"integrand returned shape {y.shape} for {x.shape[0]} nodes")
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y).reshape(len(x), -1).all(axis=1)]
        raise EvaluationError(f"non-finite integrand value near x={bad[0]:.6g}")
    return y


def _gk_panels(f, lo, hi):
    """K15 value and |K15 - G7| for each panel [lo_i, hi_i]."""
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    x = (c[:, None] + h[:, None] * NODES[None, :]).ravel()
    y = _eval(f, x)
    y = y.reshape((len(lo), 15) + y.shape[1:])
    hb = h.reshape((-1,) + (1,) * (y.ndim - 2))
    k = np.tensordot(y, KRONROD_W, axes=([1], [0])) if y.ndim == 2 else np.einsum("pn...,n->p...", y, KRONROD_W)
    g = np.tensordot(y, GAUSS_W, axes=([1], [0])) if y.ndim == 2 else np.einsum("pn...,n->p...", y, GAUSS_W)
    return k * hb, np.abs(k - g) * hb


def integrate_adaptive(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC,
                       breakpoints=None) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of ``f`` over [a, b].

    Converged when, for every batch component, the summed panel error is below
    ``max(abs_tol, rel_tol * |value|)``. Panels whose error exceeds their
    share of the budget are bisected together each sweep, so the refinement
    order (and hence the result) is fully deterministic.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise InvalidArgument(f"need a < b, got [{a}, {b}]")
    edges = [a]
    if breakpoints is not None:
        edges += sorted(float(p) for p in np.unique(breakpoints) if a < p < b)
    edges.append(b)
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    vals, errs = _gk_panels(f, lo, hi)
    nevals = 15 * len(lo)
    while True:
        total = vals.sum(axis=0)
        err = errs.sum(axis=0)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(err <= tol):
            break
        npanel = len(lo)
        score = errs / tol
        if score.ndim > 1:
            score = score.reshape(npanel, -1).max(axis=1)
        split = score > 0.5 / npanel
        if npanel + int(split.sum()) > spec.max_subdivisions:
            raise ConvergenceError(
                f"no convergence within {spec.max_subdivisions} subdivisions "
                f"(error {np.max(err):.3g} > tolerance {np.min(tol):.3g})",
                best=total, err=err)
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        nv, ne = _gk_panels(f, new_lo, new_hi)
        nevals += 15 * len(new_lo)
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        order = np.argsort(lo, kind="stable")
        lo, hi, vals, errs = lo[order], hi[order], vals[order], errs[order]
    if np.ndim(total) == 0:
        return QuadResult(float(total), float(err), nevals)
    return QuadResult(total, err, nevals)


def _envelope(y):
    y = np.abs(y)
    if y.ndim > 1:
        y = y.reshape(len(y), -1)
    else:
        y = y[:, None]
    return y


# Largest |log t| reached by the logarithmic map; keeps t and 1/t finite.
_LOG_LIMIT = 690.0
_PROBE_STEP = 2.0
_PROBE_CHUNK = 6


def _tail_span(g, spec, w_min, w_max):
    """Smallest probe-grid window outside which |g| < tail_cut * peak."""
    ws = np.arange(-8.0, 8.0 + 1e-9, _PROBE_STEP)
    ws = ws[(ws >= w_min) & (ws <= w_max)]
    if ws.size == 0:
        ws = np.array([0.5 * (w_min + w_max)])

    def probe(w):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            y = np.asarray(g(w), dtype=float)
        return _envelope(y)

    env = probe(ws)
    # march outwards until the last two probes on each side are below the cut
    for side in (-1, +1):
        limit = w_min if side < 0 else w_max
        while True:
            peak = np.max(np.where(np.isfinite(env), env, np.inf), axis=0)
            edge = env[:2] if side < 0 else env[-2:]
            if np.all(np.isfinite(edge)) and np.all(edge <= spec.tail_cut * peak):
                break
            w_end = ws[0] if side < 0 else ws[-1]
            if abs(w_end - limit) < 1e-12:
                raise DivergenceError(
                    f"integrand envelope not below tail_cut={spec.tail_cut:g} "
                    f"at the {'lower' if side < 0 else 'upper'} end of the mapped domain")
            new = w_end + side * _PROBE_STEP * np.arange(1, _PROBE_CHUNK + 1)
            new = np.append(new[(new > w_min) & (new < w_max)], limit)[:_PROBE_CHUNK]
            new_env = probe(new)
            if side < 0:
                ws = np.concatenate([new[::-1], ws])
                env = np.concatenate([new_env[::-1], env])
            else:
                ws = np.concatenate([ws, new])
                env = np.concatenate([env, new_env])
    if not np.all(np.isfinite(env)):
        raise EvaluationError("non-finite integrand value inside the integration window")
    peak = env.max(axis=0)
    above = np.any(env > spec.tail_cut * peak, axis=1)
    if not above.any():
        return ws, ws[0], ws[-1]
    i0 = max(int(np.argmax(above)) - 1, 0)
    i1 = min(len(ws) - 1 - int(np.argmax(above[::-1])) + 1, len(ws) - 1)
    return ws, ws[i0], ws[i1]


def integrate_semiinfinite(f, alpha: float = 1.0, spec: QuadratureSpec = DEFAULT_SPEC,
                           scale: float = 1.0) -> QuadResult:
    """Integral of ``f`` over (0, inf).

    ``alpha`` is the endpoint exponent (f ~ c t^(alpha-1) as t -> 0+). With
    t = scale * exp(w / alpha) the mapped integrand decays like e^w at the
    left end and exponentially at the right for any algebraic or faster
    decay, so the window is found by marching outwards until the envelope
    drops below ``tail_cut`` times its peak.
    """
    if not alpha > 0:
        raise InvalidArgument("alpha must be positive")
    alpha = float(alpha)
    log_scale = math.log(scale)

    def g(w):
        u = w / alpha + log_scale
        t = np.exp(u)
        y = np.asarray(f(t), dtype=float)
        jac = (t / alpha).reshape((-1,) + (1,) * (y.ndim - 1))
        return y * jac

    w_lim = alpha * (_LOG_LIMIT - abs(log_scale))
    ws, w_lo, w_hi = _tail_span(g, spec, -w_lim, w_lim)
    if w_hi <= w_lo:
        w_hi = w_lo + _PROBE_STEP
    bps = np.arange(w_lo, w_hi, 2 * _PROBE_STEP)
    res = integrate_adaptive(g, w_lo, w_hi, spec, breakpoints=bps)
    t_lo = math.exp(w_lo / alpha + log_scale)
    t_hi = math.exp(w_hi / alpha + log_scale)
    return replace(res, window=(t_lo, t_hi))


def _radial_weight(k, r_out):
    if k == 1:
        return lambda lam: 2.0 * np.cos(2.0 * np.pi * r_out * lam)
    if k == 3:
        # 4 pi lam^2 sin(2 pi r lam) / (2 pi r lam), regular at r_out = 0
        return lambda lam: 4.0 * np.pi * lam * lam * np.sinc(2.0 * r_out * lam)
    raise UnsupportedDimension(f"radial Fourier transform implemented for k in (1, 3), got k={k}")


_LAM_PROBE = np.concatenate([[0.0], np.logspace(-10, 7, 171)])


def radial_fourier(f, r_out: float, k: int, spec: QuadratureSpec = DEFAULT_SPEC,
                   lam_max: float | None = None) -> QuadResult:
    """Fourier transform over R^k of the radial function f(|lam|), at |sigma| = r_out.

    Returns the (real) value of the integral of exp(2 pi i <sigma, lam>) f(|lam|)
    over R^k. The radial integral is truncated where the envelope
    lam^(k-1) |f(lam)| falls below ``tail_cut`` of its peak and subdivided at
    the half-periods of the oscillating factor.
    """
    weight = _radial_weight(k, r_out)
    r_out = abs(float(r_out))
    if lam_max is None:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            y = np.asarray(f(_LAM_PROBE[1:]), dtype=float)
        env = _envelope(y) * (_LAM_PROBE[1:] ** (k - 1))[:, None]
        env = np.where(np.isfinite(env), env, np.inf)
        peak = env.max(axis=0)
        peak = np.where(peak > 0, peak, np.inf)
        above = np.any(env > spec.tail_cut * peak, axis=1)
        if above[-1]:
            raise DivergenceError("radial profile does not decay within the probe range")
        if not above.any():
            lam_max = _LAM_PROBE[1]
        else:
            lam_max = _LAM_PROBE[1 + len(above) - int(np.argmax(above[::-1]))]
    bps = [lam_max * 2.0 ** -j for j in range(1, 9)]
    if r_out > 0:
        half = 0.5 / r_out
        n = int(lam_max / half)
        if n > 4000:
            raise InvalidArgument("oscillation too fast for the truncated domain")
        bps += list(half * np.arange(1, n + 1))

    def integrand(lam):
        y = np.asarray(f(lam), dtype=float)
        w = weight(lam)
        return y * w.reshape((-1,) + (1,) * (y.ndim - 1))

    return integrate_adaptive(integrand, 0.0, lam_max, spec, breakpoints=bps)


_GL_N = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_N)
_BOX_MAX_NODES = 17_000_000
_BOX_CHUNK = 500_000


def _composite_gl(lo, hi, panels):
    edges = np.linspace(lo, hi, panels + 1)
    c = 0.5 * (edges[:-1] + edges[1:])
    h = 0.5 * (edges[1:] - edges[:-1])
    x = (c[:, None] + h[:, None] * _GL_X[None, :]).ravel()
    w = (h[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _box_sum(f, lows, highs, panels):
    axes = [_composite_gl(lo, hi, panels) for lo, hi in zip(lows, highs)]
    xs = [a[0] for a in axes]
    ws = [a[1] for a in axes]
    # iterate over the first axis in slabs to bound memory
    rest = np.stack(np.meshgrid(*xs[1:], indexing="ij"), axis=-1).reshape(-1, len(xs) - 1)
    wrest = ws[1]
    for w in ws[2:]:
        wrest = np.multiply.outer(wrest, w)
    wrest = wrest.ravel()
    total = 0.0
    slab = max(1, _BOX_CHUNK // len(rest))
    for i in range(0, len(xs[0]), slab):
        x0 = xs[0][i:i + slab]
        pts = np.concatenate([np.repeat(x0, len(rest))[:, None],
                              np.tile(rest, (len(x0), 1))], axis=1)
        y = np.asarray(f(pts), dtype=float)
        if y.shape != (len(pts),):
            raise EvaluationError(f"box integrand returned shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise EvaluationError("non-finite box integrand value")
        total += float(np.dot(ws[0][i:i + slab], y.reshape(len(x0), -1) @ wrest))
    return total


def _box_half_width(envelope, spec):
    e0 = abs(float(envelope(0.0)))
    if not e0 > 0:
        raise InvalidArgument("envelope must be positive at the origin")
    r = 1.0
    for _ in range(200):
        if abs(float(envelope(r))) < spec.tail_cut * e0:
            # refine the crossing by bisection on [r/2, r]
            lo, hi = r / 2, r
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if abs(float(envelope(mid))) < spec.tail_cut * e0:
                    hi = mid
                else:
                    lo = mid
            return hi
        r *= 2.0
    raise DivergenceError("box envelope does not fall below tail_cut")


def integrate_box(f, d: int, spec: QuadratureSpec = DEFAULT_SPEC, *, envelope=None,
                  half_width=None, center=None) -> QuadResult:
    """Integral of ``f`` over R^d for d in 2..4.

    ``f`` maps an (N, d) array of points to N values. The domain is truncated
    to a box, either of the given ``half_width`` (scalar or per axis) or where
    the radial ``envelope`` drops below ``tail_cut`` of its value at 0. The
    box integral uses tensor composite Gauss-Legendre rules, refining the
    panel count until two successive estimates agree.
    """
    if d not in (2, 3, 4):
        raise UnsupportedDimension(f"box integration supports d in 2..4, got {d}")
    if half_width is None:
        if envelope is None:
            raise InvalidArgument("need an envelope or explicit half_width")
        half_width = _box_half_width(envelope, spec)
    hw = np.broadcast_to(np.asarray(half_width, float), (d,))
    c = np.zeros(d) if center is None else np.asarray(center, float)
    lows, highs = c - hw, c + hw
    # panel counts 4, 6, 8, 12, 16, ...: refinement by ~1.5x keeps 4-D affordable
    seq = [4 * 2 ** (j // 2) * (3 if j % 2 else 2) // 2 for j in range(40)]
    panels = seq[0]
    prev = _box_sum(f, lows, highs, panels)
    nevals = (panels * _GL_N) ** d
    for panels in seq[1:]:
        if (panels * _GL_N) ** d > _BOX_MAX_NODES:
            raise ConvergenceError("box quadrature exceeded its node budget", best=prev)
        cur = _box_sum(f, lows, highs, panels)
        nevals += (panels * _GL_N) ** d
        err = abs(cur - prev)
        if err <= max(spec.abs_tol, spec.rel_tol * abs(cur)):
            return QuadResult(cur, err, nevals)
        prev = cur
