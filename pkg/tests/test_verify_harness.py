from __future__ import annotations

import json
import math

import numpy as np
import pytest

from zetaladder.jacobi_basis import JacobiSpec, weight_mass
from zetaladder.verify_harness import (
    SCHEMA_VERSION,
    AsymptoticScan,
    GramReport,
    WindowFrame,
    asymptotic_scan,
    default_spec,
    endpoint_power,
    gram_transformed,
    substitution_check,
    window_distance_check,
    write_csv,
)
from zetaladder.ladder import ladder_for_window, window_preimage


@pytest.fixture(scope="module")
def table():
    return ladder_for_window(3000.0)


def test_endpoint_power():
    assert endpoint_power(0.0) == (False, 1)
    assert endpoint_power(-0.5) == (True, 2)
    assert endpoint_power(0.5) == (True, 2)
    assert endpoint_power(-0.4) == (True, 5)
    assert endpoint_power(0.3) == (True, 10)


def test_frame_coordinates(table):
    frame = WindowFrame(table, window_preimage(table, 3000.0))
    tau = np.linspace(frame.tau0, frame.tau1, 31)
    x, plus, minus = frame.coords(tau)
    assert x[0] == -1.0 and x[-1] == pytest.approx(1.0, abs=1e-13)
    assert np.all(np.diff(x) >= 0)
    assert np.allclose(plus + minus, 2.0, atol=1e-15)
    phi = table.phi1(table.t_lo + tau)
    assert np.allclose(phi - 3001.0, x, atol=1e-10)


@pytest.mark.parametrize("family", ["legendre", "chebyshev_t", "chebyshev_u", "general"])
def test_nmax_zero_is_weight_mass(table, family):
    rep = gram_transformed(table, family, T=3000.0, nmax=0)
    spec = default_spec(family)
    assert rep.gram.shape == (1, 1)
    assert rep.gram[0, 0] == pytest.approx(weight_mass(spec.alpha, spec.beta), rel=1e-9)


def test_legendre_report(table):
    rep = gram_transformed(table, "legendre", T=3000.0, nmax=5)
    assert np.array_equal(rep.gram, rep.gram.T)
    assert np.max(np.abs(rep.gram_route_b - rep.gram_route_b.T)) <= 1e-12
    off = rep.gram - np.diag(np.diag(rep.gram))
    assert rep.max_offdiag == np.max(np.abs(off))
    assert rep.max_offdiag <= 1e-5 and rep.max_diag_reldev <= 1e-5
    assert rep.route_disagreement <= 1e-5 and rep.passed and not rep.degraded
    d = json.loads(rep.to_json())
    assert d["schema_version"] == SCHEMA_VERSION and d["kind"] == "gram_report"
    assert len(rep.csv_rows()) == 36
    text = write_csv(GramReport.CSV_HEADER, rep.csv_rows())
    assert text.splitlines()[0].startswith("schema_version,family")


def test_chebyshev_t_report(table):
    rep = gram_transformed(table, "chebyshev_t", T=3000.0, nmax=5)
    diag = np.diag(rep.gram)
    assert diag[0] == pytest.approx(math.pi, abs=1e-4)
    assert np.allclose(diag[1:], math.pi / 2, atol=1e-4)
    assert rep.tolerance == 1e-4


def test_degraded_flag_on_budget(table):
    rep = gram_transformed(table, "general", T=3000.0, nmax=3, tol=1e-30)
    assert rep.degraded and not rep.passed


def test_nmax_cap(table):
    with pytest.raises(ValueError):
        gram_transformed(table, "legendre", T=3000.0, nmax=13)


def test_substitution_identity_bump(table):
    bump = lambda x: np.exp(-((x - 3001.3) ** 2) / 0.02)
    chk = substitution_check(table, 3000.0, bump)
    assert chk.difference <= 1e-6


def test_scan_definitions():
    spec = JacobiSpec.of("legendre", 0)
    scan = asymptotic_scan(None, spec, [1e3, 2e3])
    for r, d in zip(scan.ratios, scan.reldev):
        assert d == abs(r / scan.limit - 1)
    assert scan.within_envelope
    assert scan.limit == 2.0
    assert len(scan.csv_rows()) == 2
    d = scan.to_dict()
    assert d["kind"] == "asymptotic_scan" and d["schema_version"] == SCHEMA_VERSION
    with pytest.raises(AssertionError):
        AsymptoticScan(spec=spec, T_values=[1.0], T_bar=[1.0], integrals=[1.0], integrals_route_b=[1.0],
                       ratios=[2.0], limit=2.0, reldev=[0.5], envelope=[1.0])
    with pytest.raises(ValueError):
        asymptotic_scan(None, spec, [2e3, 1e3])


def test_window_distance_rows(table):
    rows = window_distance_check(table, [2999.0, 3000.0])
    for T, tb, ratio, length in rows:
        assert tb > T and ratio == tb / T and length > 0
