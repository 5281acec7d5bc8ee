import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from intertwine import UsageError
from intertwine.htype import GroupPoint, structure_for
from intertwine.kernels import FracOrder, fundsol_closed
from intertwine.quad import QuadratureSpec
from intertwine.verify import (CHECKS, REL_EPS, _conformal_prefactor, _power_gneu, constant_chain,
                               csv_header, csv_row, judge, list_checks, lookup, run_check,
                               with_rel_tol)

GAMMA_RATIO_H1 = 0.547109903806619159709192485176  # mpmath
IDS = ["EUCLID_INTERTWINE", "EUCLID_DIMFREE", "NONGEOM_HTYPE", "THEOREM_A", "LEMMA_CONV", "COWBOY",
       "H_DERIV", "CONFORMAL", "GNONEU", "YAMABE", "CHAPMAN", "MASS", "KNORM", "JGAUSS"]

# cheap parameter sets, one per check that finishes in about a second
FAST = {
    "EUCLID_INTERTWINE": dict(n=2, s=0.5, z=(0, 0), y=1),
    "EUCLID_DIMFREE": dict(n=3, s=0.25, z=(1, 0, 0), y=1),
    "THEOREM_A": dict(m=2, k=1, s=0.3, sign=-1, z=(0.5, 0), sigma=(0.2,), y=0.7),
    "COWBOY": dict(s=0.5, B=1, mu=1),
    "H_DERIV": dict(s=0.5, mu=1, rho=1),
    "JGAUSS": dict(m=2, k=1, lam=(1,), z=(1, 0), t=0.25, tau=0.25),
    "MASS": dict(m=2, k=1, t=1),
}


def test_registry():
    infos = list_checks()
    assert [c.check_id for c in infos] == IDS
    for c in infos:
        assert c.required and c.tol > 0 and c.mode in ("rel", "abs")
    assert list_checks() == infos


def test_lookup_case_insensitive():
    assert lookup("cowboy") is CHECKS["COWBOY"]
    with pytest.raises(UsageError, match="valid ids"):
        lookup("nosuch")


def test_euclid_anchor():
    r = run_check("EUCLID_INTERTWINE", FAST["EUCLID_INTERTWINE"])
    assert r.rhs == pytest.approx(1.0, rel=1e-15)
    assert r.passed and r.tol == 1e-6


def test_cowboy_anchor():
    r = run_check("COWBOY", FAST["COWBOY"])
    assert r.passed and r.tol == 1e-8
    assert r.rhs == pytest.approx(0.439819869513872634, rel=1e-13)


@pytest.mark.parametrize("m,k,z,sigma,y", [(2, 1, (0, 0), (0,), 1.0), (2, 1, (1, 0), (0.2,), 0.8),
                                            (4, 3, (1, 0, 0.5, 0), (0.3, 0, 0.1), 0.5)])
@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
def test_gneu_constant_chain_matches_conformal(m, k, z, sigma, y, s):
    # GNONEU is CONFORMAL rescaled by an exact constant, so their residuals coincide
    st_ = structure_for(m, k)
    g = GroupPoint(z, sigma)
    conformal_rhs = (2 * math.pi * y) ** (2 * s) * fundsol_closed(st_, FracOrder.minus(s), g, y)
    assert _conformal_prefactor(st_, s) * conformal_rhs == pytest.approx(_power_gneu(st_, s, g, y), rel=1e-12)


def test_gneu_rhs_value():
    g = GroupPoint.identity(structure_for(2, 1))
    assert _power_gneu(structure_for(2, 1), 0.5, g, 1.0) == pytest.approx(4 * GAMMA_RATIO_H1, rel=1e-13)


@pytest.mark.parametrize("s", np.round(np.arange(0.1, 1.0, 0.1), 1))
def test_constant_chain(s):
    lhs, rhs = constant_chain(2, 1, s)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_missing_and_bad_params():
    with pytest.raises(UsageError, match="mu"):
        run_check("COWBOY", dict(s=0.5, B=1))
    with pytest.raises(UsageError):
        run_check("THEOREM_A", dict(m=2, k=1, s=0.5, z=(0, 0, 0), sigma=(0,), y=1))
    with pytest.raises(UsageError):
        run_check("THEOREM_A", dict(m=3, k=1, s=0.5, z=(0, 0, 0), sigma=(0,), y=1))
    with pytest.raises(UsageError):
        run_check("COWBOY", dict(s=1.5, B=1, mu=1))


def test_quadrature_failure_is_a_failed_row():
    r = run_check("THEOREM_A", dict(m=2, k=1, s=0.5, z=(0, 0), sigma=(0,), y=1e-8))
    assert not r.passed and math.isnan(r.lhs)
    assert r.note.startswith("DivergenceError")


@pytest.mark.parametrize("check", sorted(FAST))
def test_determinism(check):
    a, b = run_check(check, FAST[check]), run_check(check, FAST[check])
    assert (a.lhs, a.rhs, a.abs_err, a.rel_err, a.passed) == (b.lhs, b.rhs, b.abs_err, b.rel_err, b.passed)


@pytest.mark.parametrize("check", sorted(FAST))
def test_tolerance_hierarchy(check):
    info = CHECKS[check]
    spec, inner = with_rel_tol(info.spec, info.inner_spec, info.spec.rel_tol / 2, None)
    assert run_check(check, FAST[check]).passed
    assert run_check(check, FAST[check], spec, inner_spec=inner).passed


def test_with_rel_tol_scales_inner():
    outer, inner = with_rel_tol(QuadratureSpec(rel_tol=1e-5), QuadratureSpec(rel_tol=1e-7), 1e-6, None)
    assert outer.rel_tol == 1e-6 and inner.rel_tol == pytest.approx(1e-8)


@given(lhs=st.floats(-1e6, 1e6), rhs=st.floats(-1e6, 1e6), tol=st.floats(1e-12, 1.0),
       mode=st.sampled_from(["rel", "abs"]))
def test_judge_invariant(lhs, rhs, tol, mode):
    abs_err, rel_err, passed = judge(lhs, rhs, tol, mode)
    assert abs_err == abs(lhs - rhs)
    assert rel_err == abs_err / max(abs(rhs), REL_EPS)
    if mode == "abs" or rhs == 0:
        assert passed == (abs_err <= tol)
    else:
        assert passed == (rel_err <= tol)


def test_judge_nan_fails():
    assert judge(math.nan, 1.0, 1.0)[2] is False


def test_csv_and_json():
    r = run_check("COWBOY", FAST["COWBOY"])
    header = csv_header(CHECKS["COWBOY"])
    assert header == ["check", "param:s", "param:B", "param:mu", "lhs", "rhs", "abs_err", "rel_err",
                      "tol", "pass", "runtime_s"]
    row = csv_row(r)
    assert len(row) == len(header) and row[0] == "COWBOY" and row[-2] == "true"
    assert float(row[4]) == r.lhs
    d = json.loads(r.to_json())
    assert d["pass"] is True and d["quad_spec"]["rel_tol"] == r.spec.rel_tol
    assert d["params"] == {"s": 0.5, "B": 1.0, "mu": 1.0}
