from __future__ import annotations

import math

import mpmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zetaladder.errors import DomainError, OutOfRangeError, ResolutionError
from zetaladder.ladder import (
    GAP_CONSTANT,
    LADDER_CSV_HEADER,
    build_ladder,
    export_csv,
    invert,
    ladder_for_window,
    load_ladder,
    save_ladder,
    tilde_z_sq,
    window_preimage,
)
from zetaladder.special_fn import prime_pi
from zetaladder.zeta_engine import GridPolicy, hardy_z_rs, hardy_z_rs_array


@pytest.fixture(scope="module")
def long_table():
    return build_ladder(1e4, 1e4 + 200)


@pytest.fixture(scope="module")
def short_table():
    return build_ladder(1e4, 1e4 + 8)


def test_build_over_two_hundred(long_table):
    tb = long_table
    assert np.all(np.diff(tb.phi1_knots) > 0)
    assert 100 < tb.total_rise < 300
    assert np.mean(tb.dphi1) == pytest.approx(1.0, rel=0.25)


def test_anchor(long_table):
    t0, phi0 = long_table.anchor
    assert t0 == 1e4
    assert prime_pi(1e4) == 1229
    assert t0 - phi0 == pytest.approx((1 - 0.5772156649) * 1229, rel=1e-10)
    assert t0 - phi0 == pytest.approx(0.4227843351 * 1229, rel=1e-10)


def test_invariants(long_table):
    rep = long_table.invariant_report()
    assert rep["strictly_increasing"] and rep["dphi1_nonnegative"] and rep["below_diagonal"]
    assert rep["gap_within_band"]


def test_knot_triples(short_table):
    knots = short_table.knots
    assert knots.shape == (len(short_table), 3)
    for i in range(0, len(knots), max(1, len(knots) // 12)):
        t = knots[i, 0]
        z = float(mpmath.siegelz(mpmath.mpf(t)))
        assert knots[i, 2] * math.log(t) == pytest.approx(z * z, rel=1e-9, abs=1e-24)


def test_degenerate_and_floor():
    with pytest.raises(DomainError):
        build_ladder(1e4, 1e4)
    with pytest.raises(DomainError):
        build_ladder(20.0, 100.0)


def test_resolution_error():
    with pytest.raises(ResolutionError):
        build_ladder(1e4, 1e4 + 60, knot_spacing=20.0)


def test_invert_endpoint(short_table):
    tb = short_table
    assert invert(tb, tb.phi1(tb.t_lo)) == tb.t_lo
    assert tb.locate(tb.total_rise)[0] == tb.tau[-1]
    # absolute image carries one ulp of rounding, amplified by 1/phi1'
    slack = 4 * np.spacing(tb.phi_anchor + tb.total_rise) / tb.tilde_z_sq(tb.t_hi)
    assert abs(tb.invert(tb.phi_anchor + tb.total_rise) - tb.t_hi) <= slack
    with pytest.raises(OutOfRangeError):
        tb.invert(tb.phi_anchor - 1.0)
    with pytest.raises(OutOfRangeError):
        tb.phi1(tb.t_hi + 1.0)


def test_image_round_trip(short_table):
    tb = short_table
    rng = np.random.default_rng(11)
    y = tb.phi_anchor + rng.uniform(0, tb.total_rise, 100)
    assert np.max(np.abs(tb.phi1(tb.invert(y)) - y)) <= 1e-9


def test_t_round_trip_conditioning(short_table):
    # t -> phi1 -> t in local units; accuracy is limited by rounding of the rise over phi1'
    tb = short_table
    rng = np.random.default_rng(12)
    tau = rng.uniform(0, tb.tau[-1], 100)
    back = tb.locate(tb.rise_at(tau))
    slope = tb.tilde_z_sq_local(tau)
    bound = np.maximum(1e-8, 8e-15 / np.maximum(slope, 1e-300))
    assert np.all(np.abs(back - tau) <= bound)


@given(st.floats(0.0, 1.0))
def test_increment_matches_rise_difference(frac):
    tb = ladder_for_window(2000.0)
    a = frac * tb.tau[-1] * 0.5
    b = a + 0.37 * frac + 1e-3
    inc = tb.increment(a, b)
    assert inc == pytest.approx(tb.rise_at(b) - tb.rise_at(a), abs=1e-13)
    assert inc > 0


def test_tilde_z_sq_at_zero(short_table):
    tb = short_table
    ts = tb.t
    z = hardy_z_rs_array(ts)
    k = int(np.flatnonzero(np.sign(z[:-1]) != np.sign(z[1:]))[0])
    lo, hi = ts[k], ts[k + 1]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if np.sign(hardy_z_rs(mid).z) == np.sign(z[k]):
            lo = mid
        else:
            hi = mid
    # the bisection uses the unshifted evaluator, good to about 1e-11 here
    assert tilde_z_sq(tb, lo) < 1e-20
    assert tilde_z_sq(tb, 0.5 * (ts[0] + ts[1])) >= 0


def test_window_pair_invariants():
    T = 1e4
    tb = ladder_for_window(T)
    w = window_preimage(tb, T)
    assert abs(tb.phi1(w.preimage[0]) - T) <= 1e-9
    assert abs(tb.phi1(w.preimage[1]) - (T + 2)) <= 1e-9
    assert w.T_bar > T
    assert 0 < w.length <= 10 * T / math.log(T)
    assert 0.9 <= w.T_bar / T <= 1.1
    assert w.gap_ratio == pytest.approx((w.T_bar - T) / (T / math.log(T)))
    # log-window bound
    xi = np.linspace(*w.preimage, 50)
    assert np.all(np.abs(np.log(xi) - math.log(w.T_bar)) <= 5 / math.log(w.T_bar))
    # the window rise is exactly its image length
    assert tb.increment(*w.tau) == pytest.approx(2.0, abs=1e-12)


def test_window_at_image_midpoint(short_table):
    tb = short_table
    mid = tb.phi_anchor + 0.5 * tb.total_rise - 1.0
    w = tb.window_preimage(mid)
    assert w.preimage[0] < w.preimage[1]


def test_ladder_for_window_covers():
    for T in (1e3, 5e4):
        tb = ladder_for_window(T, pad=3.0)
        assert tb.phi_anchor <= T - 2.5
        assert tb.phi_anchor + tb.total_rise >= T + 5.0
        assert tb.invariant_report()["gap_within_band"]


def test_gap_law_along_table(long_table):
    r = long_table.gap_ratios(stride=50)
    assert np.all((0.8 <= r) & (r <= 1.2))
    assert GAP_CONSTANT == pytest.approx(0.4227843351, rel=1e-10)


def test_save_load_csv(tmp_path, short_table):
    path = tmp_path / "t.zll"
    save_ladder(short_table, path)
    back = load_ladder(path)
    assert np.array_equal(back.knots, short_table.knots)
    assert np.array_equal(back.rise, short_table.rise)
    assert back.phi1(1e4 + 3.3) == short_table.phi1(1e4 + 3.3)
    path.write_bytes(path.read_bytes()[:40])
    with pytest.raises(OSError):
        load_ladder(path)
    csv_path = tmp_path / "t.csv"
    export_csv(short_table, csv_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(LADDER_CSV_HEADER)
    assert len(lines) == len(short_table) + 1


def test_policy_density_changes_knots():
    a = build_ladder(2000.0, 2010.0, GridPolicy(samples_per_gap=8))
    b = build_ladder(2000.0, 2010.0, GridPolicy(samples_per_gap=32))
    assert len(b) > len(a)
    assert a.total_rise == pytest.approx(b.total_rise, abs=1e-12)
