"""Registry of named identity checks.

Each check evaluates one side by the operator path (quadrature, cubature or
finite differences) and the other side by an independent closed form, and
reports the residual as a :class:`CheckResult`.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
import csv
import io
import json
import math
import time
from typing import Callable

import numpy as np

from .errors import BlockedPrecondition, IntertwineError, QuadratureError, UsageError
from .fracops import (Euclidean, TableGrid, chapman, conformal_apply, conv_direct,
                      conv_lemma_spectral, cowboy_lhs, cowboy_rhs, frac_power_on_fundsol,
                      h_func, h_func_deriv, heat_mass, jtwisted_gaussian, nongeom_fundsol,
                      thin_kernel_mass)
from .htype import GroupPoint, structure_for
from .kernels import (FracOrder, abs_gamma_neg, const_C, euclid_fundsol, fundsol_closed,
                      fundsol_subordinate, gamma_ratio, gauge, ghc_heat_kernel)
from .quad import QuadratureSpec

REL_EPS = 1e-300
VECTOR_PARAMS = ("z", "sigma", "lam")
INT_PARAMS = ("n", "m", "k", "sign")


@dataclass(frozen=True)
class CheckInfo:
    check_id: str
    summary: str
    required: tuple[str, ...]
    tol: float
    mode: str = "rel"                      # "rel" or "abs"
    optional: dict = field(default_factory=dict)
    spec: QuadratureSpec = QuadratureSpec()
    inner_spec: QuadratureSpec | None = None

    @property
    def param_names(self) -> tuple[str, ...]:
        return self.required + tuple(self.optional)


@dataclass
class CheckResult:
    check_id: str
    params: dict
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    tol: float
    passed: bool
    runtime: float
    mode: str = "rel"
    note: str = ""
    spec: QuadratureSpec | None = None
    inner_spec: QuadratureSpec | None = None

    def to_dict(self) -> dict:
        d = {"check": self.check_id, "params": {k: _jsonable(v) for k, v in self.params.items()},
             "lhs": self.lhs, "rhs": self.rhs, "abs_err": self.abs_err, "rel_err": self.rel_err,
             "tol": self.tol, "mode": self.mode, "pass": self.passed, "runtime_s": self.runtime,
             "note": self.note}
        d["quad_spec"] = asdict(self.spec) if self.spec else None
        d["inner_quad_spec"] = asdict(self.inner_spec) if self.inner_spec else None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=True)


def _jsonable(v):
    return list(v) if isinstance(v, tuple) else v


def judge(lhs: float, rhs: float, tol: float, mode: str = "rel") -> tuple[float, float, bool]:
    """(abs_err, rel_err, passed); absolute comparison for mode "abs" or rhs == 0."""
    abs_err = abs(lhs - rhs)
    rel_err = abs_err / max(abs(rhs), REL_EPS)
    err = abs_err if (mode == "abs" or rhs == 0) else rel_err
    return abs_err, rel_err, bool(err <= tol)


# ---------------------------------------------------------------- helpers

def _group(p):
    st = structure_for(p["m"], p["k"])
    z, sigma = np.asarray(p["z"], float), np.asarray(p["sigma"], float)
    if z.shape != (st.m,) or sigma.shape != (st.k,):
        raise UsageError(f"z needs {st.m} and sigma needs {st.k} components")
    return st, GroupPoint(z, sigma)


def _euclid_point(p):
    x = np.asarray(p["z"], float)
    if x.shape != (p["n"],):
        raise UsageError(f"z needs n = {p['n']} components")
    return Euclidean(p["n"]), x


def _power_gneu(st, s, g, y) -> float:
    """gamma_ratio (4y)^(2s) ((|z|^2 + y^2)^2 + 16|sigma|^2)^(-(Q + 2s)/4)."""
    return gamma_ratio(st.m, st.k, s) * (4 * y) ** (2 * s) * gauge(g, y) ** (-(st.Q + 2 * s))


def _conformal_prefactor(st, s) -> float:
    return (4 * math.pi) ** (1 - s) / (math.gamma(s) * const_C(st.m, st.k, FracOrder.plus(s)))


def constant_chain(m: int, k: int, s: float) -> tuple[float, float]:
    """|Gamma(-s)| C_(-s) / (Gamma(s) C_(s)) and 4^(3s) gamma_ratio."""
    lhs = (abs_gamma_neg(s) * const_C(m, k, FracOrder.minus(s))
           / (math.gamma(s) * const_C(m, k, FracOrder.plus(s))))
    return lhs, 4.0 ** (3 * s) * gamma_ratio(m, k, s)


# ---------------------------------------------------------------- check bodies

def _euclid_intertwine(p, spec, inner):
    n, s, y = p["n"], p["s"], p["y"]
    dom, x = _euclid_point(p)
    r2 = float(x @ x) + y * y
    lhs = 4 * math.pi ** (n / 2 + 1 - s) / math.gamma((n - 2 * s) / 2) * frac_power_on_fundsol(dom, s, x, y, spec, inner)
    rhs = math.gamma(n / 2 + s) / math.gamma(n / 2 - s) * (2 * y) ** (2 * s) * r2 ** (-(n + 2 * s) / 2)
    return lhs, rhs


def _euclid_dimfree(p, spec, inner):
    s, y = p["s"], p["y"]
    dom, x = _euclid_point(p)
    lhs = frac_power_on_fundsol(dom, s, x, y, spec, inner)
    return lhs, (2 * math.pi * y) ** (2 * s) * euclid_fundsol(p["n"], FracOrder.minus(s), x, y)


def _nongeom(p, spec, inner):
    st, g = _group(p)
    s, y = p["s"], p["y"]
    lhs = frac_power_on_fundsol(st, s, g, y, spec, inner)
    return lhs, (2 * math.pi * y) ** (2 * s) * nongeom_fundsol(st, FracOrder.minus(s), g, y, inner)


def _theorem_a(p, spec, inner):
    st, g = _group(p)
    o = FracOrder(p["s"], p["sign"])
    return fundsol_subordinate(st, o, g, p["y"], spec), fundsol_closed(st, o, g, p["y"])


def _lemma_conv(p, spec, inner):
    st, g = _group(p)
    lhs = conv_direct(st, p["s"], g, p["y"], p["t"], p["tau"], spec)
    return lhs, conv_lemma_spectral(st, p["s"], g, p["y"], p["t"], p["tau"], inner)


def _cowboy(p, spec, inner):
    return cowboy_lhs(p["s"], p["B"], p["mu"], spec), cowboy_rhs(p["s"], p["B"], p["mu"])


_H_STEP = 1e-3


def _h_deriv(p, spec, inner):
    s, mu, rho = p["s"], p["mu"], p["rho"]
    h = _H_STEP * rho
    f = lambda r: float(h_func(s, mu, r))
    fd = (8 * (f(rho + h) - f(rho - h)) - (f(rho + 2 * h) - f(rho - 2 * h))) / (12 * h)
    return fd, float(h_func_deriv(s, mu, rho))


def _conformal(p, spec, inner):
    st, g = _group(p)
    s, y = p["s"], p["y"]
    lhs = conformal_apply(st, s, g, y, spec, method=p["method"], inner_spec=inner,
                          tol=CHECKS["CONFORMAL"].tol)
    return lhs, (2 * math.pi * y) ** (2 * s) * fundsol_closed(st, FracOrder.minus(s), g, y)


def _gneu(p, spec, inner):
    st, g = _group(p)
    s, y = p["s"], p["y"]
    lhs = _conformal_prefactor(st, s) * conformal_apply(st, s, g, y, spec, inner_spec=inner)
    return lhs, _power_gneu(st, s, g, y)


def _yamabe(p, spec, inner):
    st, g = _group(p)
    s, y, Q = p["s"], p["y"], st.Q
    R = gamma_ratio(st.m, st.k, s)
    c = R ** ((Q - 2 * s) / (4 * s)) * (16 * y * y) ** ((Q - 2 * s) / 4)
    u = c * gauge(g, y) ** (-(Q - 2 * s))
    lhs = c * _conformal_prefactor(st, s) * conformal_apply(st, s, g, y, spec, inner_spec=inner)
    return lhs, u ** ((Q + 2 * s) / (Q - 2 * s))


def _chapman(p, spec, inner):
    st, g = _group(p)
    return chapman(st, g, p["t"], p["tau"], spec), float(ghc_heat_kernel(st, g, p["t"] + p["tau"], inner))


def _mass(p, spec, inner):
    st = structure_for(p["m"], p["k"])
    return heat_mass(st, p["t"], spec), 1.0


_KNORM_GRID = TableGrid(241, 321, 1e-12)


def _knorm(p, spec, inner):
    st = structure_for(p["m"], p["k"])
    return thin_kernel_mass(st, p["s"], p["t"], spec, grid=_KNORM_GRID), 1.0


def _jgauss(p, spec, inner):
    st = structure_for(p["m"], p["k"])
    return jtwisted_gaussian(st, p["lam"], p["z"], p["t"], p["tau"], spec)


# ---------------------------------------------------------------- registry

_G = ("m", "k", "s", "z", "sigma", "y")
_FAST = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-15, tail_cut=1e-14)
_CUBATURE = QuadratureSpec(rel_tol=5e-5, abs_tol=1e-14, tail_cut=1e-10)
_CONF_OUTER = QuadratureSpec(rel_tol=1e-5, abs_tol=1e-16, tail_cut=1e-10)
_CONF_INNER = QuadratureSpec(rel_tol=1e-7, abs_tol=1e-18, tail_cut=1e-12)

CHECKS: dict[str, CheckInfo] = {c.check_id: c for c in (
    CheckInfo("EUCLID_INTERTWINE", "Euclidean intertwining formula for the fractional Laplacian",
              ("n", "s", "z", "y"), 1e-6),
    CheckInfo("EUCLID_DIMFREE", "Euclidean fractional power maps the +s to the -s fundamental solution",
              ("n", "s", "z", "y"), 1e-6),
    CheckInfo("NONGEOM_HTYPE", "spectral power of the sub-Laplacian on the non-geometric +s family",
              _G, 1e-3, spec=QuadratureSpec(rel_tol=1e-6, abs_tol=1e-16, tail_cut=1e-12),
              inner_spec=QuadratureSpec(rel_tol=1e-8, abs_tol=1e-18, tail_cut=1e-13)),
    CheckInfo("THEOREM_A", "subordinated fundamental solution against its Gamma closed form",
              _G, 1e-5, optional={"sign": 1}, spec=_FAST),
    CheckInfo("LEMMA_CONV", "group convolution of extension kernels against the spectral formula",
              _G + ("t", "tau"), 5e-3, spec=_CUBATURE, inner_spec=QuadratureSpec()),
    CheckInfo("COWBOY", "the rho-integral closed form", ("s", "B", "mu"), 1e-8),
    CheckInfo("H_DERIV", "finite-difference derivative of h against its formula",
              ("s", "mu", "rho"), 1e-6, mode="abs"),
    CheckInfo("CONFORMAL", "conformal fractional operator on the +s fundamental solution",
              _G, 1e-3, optional={"method": "derivative"}, spec=_CONF_OUTER, inner_spec=_CONF_INNER),
    CheckInfo("GNONEU", "conformal operator on the +s power of the gauge",
              _G, 1e-3, spec=_CONF_OUTER, inner_spec=_CONF_INNER),
    CheckInfo("YAMABE", "fractional CR Yamabe equation for the bubble u_y",
              _G, 1e-3, spec=_CONF_OUTER, inner_spec=_CONF_INNER),
    CheckInfo("CHAPMAN", "semigroup composition of heat kernels",
              ("m", "k", "z", "sigma", "t", "tau"), 5e-3, spec=_CUBATURE, inner_spec=QuadratureSpec()),
    CheckInfo("MASS", "heat kernel has unit mass", ("m", "k", "t"), 5e-3, spec=_CUBATURE),
    CheckInfo("KNORM", "thin-space kernel K_(-s) has unit mass", ("m", "k", "s", "t"), 1e-4,
              spec=QuadratureSpec(rel_tol=1e-6, abs_tol=1e-16, tail_cut=1e-12)),
    CheckInfo("JGAUSS", "J-twisted Gaussian integral against the factored closed form",
              ("m", "k", "lam", "z", "t", "tau"), 1e-6,
              spec=QuadratureSpec(rel_tol=1e-8, abs_tol=1e-15, tail_cut=1e-12)),
)}

_BODIES: dict[str, Callable] = {
    "EUCLID_INTERTWINE": _euclid_intertwine, "EUCLID_DIMFREE": _euclid_dimfree,
    "NONGEOM_HTYPE": _nongeom, "THEOREM_A": _theorem_a, "LEMMA_CONV": _lemma_conv,
    "COWBOY": _cowboy, "H_DERIV": _h_deriv, "CONFORMAL": _conformal, "GNONEU": _gneu,
    "YAMABE": _yamabe, "CHAPMAN": _chapman, "MASS": _mass, "KNORM": _knorm, "JGAUSS": _jgauss,
}


def list_checks() -> list[CheckInfo]:
    return list(CHECKS.values())


def lookup(check_id: str) -> CheckInfo:
    try:
        return CHECKS[check_id.upper()]
    except KeyError:
        raise UsageError(f"unknown check {check_id!r}; valid ids: {', '.join(CHECKS)}") from None


def normalize_params(info: CheckInfo, params: dict) -> dict:
    """Complete ``params`` with optional defaults and coerce types; UsageError if incomplete."""
    missing = [k for k in info.required if params.get(k) is None]
    if missing:
        raise UsageError(f"{info.check_id} needs parameter(s): {', '.join(missing)}")
    out = {}
    for name in info.param_names:
        v = params.get(name)
        if v is None:
            v = info.optional[name]
        try:
            if name in VECTOR_PARAMS:
                v = tuple(float(x) for x in np.atleast_1d(v))
            elif name in INT_PARAMS:
                if float(v) != int(float(v)):
                    raise ValueError(v)
                v = int(float(v))
            elif name != "method":
                v = float(v)
        except (TypeError, ValueError):
            raise UsageError(f"parameter {name} has an invalid value {v!r}") from None
        out[name] = v
    return out


def run_check(check_id: str, params: dict, spec: QuadratureSpec | None = None,
              tol: float | None = None, inner_spec: QuadratureSpec | None = None) -> CheckResult:
    """Run one check. Quadrature failures become failed results; bad parameters raise UsageError."""
    info = lookup(check_id)
    p = normalize_params(info, params)
    spec = spec or info.spec
    inner = inner_spec or info.inner_spec or spec
    tol = info.tol if tol is None else tol
    t0 = time.perf_counter()
    note = ""
    try:
        lhs, rhs = _BODIES[info.check_id](p, spec, inner)
        lhs, rhs = float(lhs), float(rhs)
    except (QuadratureError, BlockedPrecondition) as exc:
        lhs = rhs = math.nan
        note = f"{type(exc).__name__}: {exc}"
    except UsageError:
        raise
    except IntertwineError as exc:
        raise UsageError(f"{info.check_id}: {exc}") from exc
    runtime = time.perf_counter() - t0
    abs_err, rel_err, passed = judge(lhs, rhs, tol, info.mode)
    return CheckResult(info.check_id, p, lhs, rhs, abs_err, rel_err, tol, passed, runtime,
                       info.mode, note, spec, inner)


# ---------------------------------------------------------------- CSV output

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)  # shortest round-trip form, independent of locale
    if isinstance(v, tuple):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def csv_header(info: CheckInfo) -> list[str]:
    return (["check"] + [f"param:{n}" for n in info.param_names]
            + ["lhs", "rhs", "abs_err", "rel_err", "tol", "pass", "runtime_s"])


def csv_row(r: CheckResult) -> list[str]:
    return ([r.check_id] + [_fmt(v) for v in r.params.values()]
            + [_fmt(x) for x in (r.lhs, r.rhs, r.abs_err, r.rel_err, r.tol, r.passed)]
            + [format(r.runtime, ".3f")])


def to_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def with_rel_tol(spec: QuadratureSpec, inner: QuadratureSpec | None, rel: float | None,
                 abs_: float | None) -> tuple[QuadratureSpec, QuadratureSpec | None]:
    """Override the outer tolerances, scaling the inner spec by the same factor."""
    out = spec
    if rel is not None:
        out = replace(out, rel_tol=rel)
    if abs_ is not None:
        out = replace(out, abs_tol=abs_)
    if inner is not None:
        inner = replace(inner, rel_tol=inner.rel_tol * out.rel_tol / spec.rel_tol,
                        abs_tol=inner.abs_tol * out.abs_tol / spec.abs_tol)
    return out, inner
