"""Surrogate ladder phi1 with phi1' = Z(t)^2 / ln t, tabulated and invertible.

All accurate arithmetic happens in the local coordinate ``tau = t - t_lo``.
The table stores the anchor value ``phi1(t_lo)`` once and the cumulative
rise ``phi1(t_lo + tau) - phi1(t_lo)`` at uniformly spaced knots, so window
quantities of size O(1) never pass through numbers of size t.
"""

from __future__ import annotations

import csv
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, OutOfRangeError, ResolutionError
from .special_fn import EULER_GAMMA, prime_pi, prime_pi_many
from .zeta_engine import DEFAULT_TERMS, GridPolicy, hardy_z_rs_array

LADDER_MIN_T = 50.0
GAP_CONSTANT = 1.0 - EULER_GAMMA
RESOLUTION_TOL = 1e-8
INVERSION_TOL = 1e-9

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def tilde_z_sq_at(t, terms: int = DEFAULT_TERMS, offset: float = 0.0) -> np.ndarray:
    """Z(t)^2 / ln t at ordinate ``offset + t``, evaluated directly (no table)."""
    t = np.asarray(t, dtype=float)
    z = hardy_z_rs_array(t.ravel(), terms, offset=offset).reshape(t.shape)
    return z * z / np.log(offset + t)


def _gauss_local(t_lo: float, a, b, terms: int) -> np.ndarray:
    """Integral of Z^2/ln t over t_lo + [a, b], 20-point Gauss rule, elementwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * _GL_X
    return half * (tilde_z_sq_at(nodes, terms, offset=t_lo) @ _GL_W)


def _monotone_slopes(x: np.ndarray, y: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Fritsch-Carlson limiting of Hermite slopes so the cubic stays monotone."""
    delta = np.diff(y) / np.diff(x)
    d = d.copy()
    for k, dk in enumerate(delta):
        if dk <= 0.0:
            d[k] = d[k + 1] = 0.0
            continue
        a, b = d[k] / dk, d[k + 1] / dk
        s = a * a + b * b
        if s > 9.0:
            r = 3.0 / math.sqrt(s)
            d[k], d[k + 1] = r * a * dk, r * b * dk
    return d


@dataclass(frozen=True)
class WindowPair:
    """Image window [T, T+2] and its preimage, with local-coordinate ends."""

    T: float
    image: tuple[float, float]
    preimage: tuple[float, float]
    gap_ratio: float
    tau: tuple[float, float]
    offset: float  # T - phi1(t_lo), the window start in rise units

    @property
    def T_bar(self) -> float:
        return self.preimage[0]

    @property
    def length(self) -> float:
        return self.tau[1] - self.tau[0]


class LadderTable:
    """Tabulated surrogate ladder on [t_lo, t_hi].

    ``rise[k]`` is the integral of phi1' from t_lo to knot k.  Values between
    knots are completed with a 20-point Gauss rule on the partial panel, so
    every query is accurate to rounding in local units.
    """

    def __init__(self, t_lo: float, tau: np.ndarray, rise: np.ndarray, dphi1: np.ndarray,
                 phi_anchor: float, terms: int = DEFAULT_TERMS):
        self.t_lo = float(t_lo)
        self.tau = np.asarray(tau, dtype=float)
        self.rise = np.asarray(rise, dtype=float)
        self.dphi1 = np.asarray(dphi1, dtype=float)
        self.phi_anchor = float(phi_anchor)
        self.terms = int(terms)
        for arr in (self.tau, self.rise, self.dphi1):
            arr.setflags(write=False)
        self.interp = CubicHermiteSpline(self.tau, self.rise,
                                         _monotone_slopes(self.tau, self.rise, self.dphi1))

    # -- basic geometry -------------------------------------------------
    @property
    def t_hi(self) -> float:
        return self.t_lo + float(self.tau[-1])

    @property
    def t_range(self) -> tuple[float, float]:
        return self.t_lo, self.t_hi

    @property
    def t(self) -> np.ndarray:
        return self.t_lo + self.tau

    @property
    def anchor(self) -> tuple[float, float]:
        return self.t_lo, self.phi_anchor

    @property
    def phi1_knots(self) -> np.ndarray:
        return self.phi_anchor + self.rise

    @property
    def knots(self) -> np.ndarray:
        """(t, phi1, dphi1) triples, one row per knot."""
        return np.column_stack([self.t, self.phi1_knots, self.dphi1])

    @property
    def total_rise(self) -> float:
        return float(self.rise[-1])

    def __len__(self) -> int:
        return self.tau.size

    # -- local evaluation -----------------------------------------------
    def _check_tau(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        span = float(self.tau[-1])
        slack = 1e-12 * max(1.0, span)
        if np.any(tau < -slack) or np.any(tau > span + slack):
            raise OutOfRangeError(f"query outside ladder range [{self.t_lo}, {self.t_hi}]")
        return np.clip(tau, 0.0, span)

    def tilde_z_sq_local(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        return tilde_z_sq_at(tau, self.terms, offset=self.t_lo)

    def _gauss(self, a, b) -> np.ndarray:
        return _gauss_local(self.t_lo, a, b, self.terms)

    def _gauss_span(self, start, length) -> np.ndarray:
        """Integral of phi1' over the span of signed ``length`` from ``start`` (always >= 0)."""
        start = np.asarray(start, dtype=float)
        length = np.asarray(length, dtype=float)
        half = 0.5 * length
        nodes = start[..., None] + half[..., None] * (_GL_X + 1.0)
        return np.abs(half) * (self.tilde_z_sq_local(nodes) @ _GL_W)

    def _panel(self, tau: np.ndarray) -> np.ndarray:
        k = np.searchsorted(self.tau, tau, side="right") - 1
        return np.clip(k, 0, self.tau.size - 2)

    def rise_at(self, tau) -> np.ndarray:
        """phi1(t_lo + tau) - phi1(t_lo)."""
        tau = self._check_tau(tau)
        k = self._panel(tau)
        return self.rise[k] + self._gauss(self.tau[k], tau)

    def increment(self, tau0, tau1) -> np.ndarray:
        """phi1(t_lo + tau1) - phi1(t_lo + tau0) for tau0 <= tau1, as a sum of positive parts."""
        tau0 = self._check_tau(tau0)
        tau1 = self._check_tau(tau1)
        tau0, tau1 = np.broadcast_arrays(tau0, tau1)
        if np.any(tau1 < tau0):
            raise DomainError("increment needs tau0 <= tau1")
        k0 = self._panel(tau0)
        k1 = self._panel(tau1)
        same = k0 == k1
        end0 = np.where(same, tau1, self.tau[np.minimum(k0 + 1, self.tau.size - 1)])
        first = self._gauss(tau0, end0)
        body = np.where(same, 0.0, self.rise[k1] - self.rise[np.minimum(k0 + 1, self.tau.size - 1)])
        last = np.where(same, 0.0, self._gauss(self.tau[k1], tau1))
        return first + body + last

    def phi1(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = self.phi_anchor + self.rise_at(t - self.t_lo)
        return float(out) if out.ndim == 0 else out

    def tilde_z_sq(self, t):
        t = np.asarray(t, dtype=float)
        self._check_tau(t - self.t_lo)
        out = tilde_z_sq_at(t, self.terms)
        return float(out) if out.ndim == 0 else out

    # -- inversion ------------------------------------------------------
    def locate(self, target, tol: float = 1e-15) -> np.ndarray:
        """Local tau with rise_at(tau) = target (vectorised safeguarded Newton)."""
        target = np.atleast_1d(np.asarray(target, dtype=float))
        top = self.total_rise
        slack = 1e-12 * max(1.0, top)
        if np.any(target < -slack) or np.any(target > top + slack):
            raise OutOfRangeError("value outside the ladder image; extend the table")
        target = np.clip(target, 0.0, top)
        k = np.clip(np.searchsorted(self.rise, target, side="right") - 1, 0, self.tau.size - 2)
        lo = self.tau[k].copy()
        hi = self.tau[k + 1].copy()
        base = self.tau[k]
        need = target - self.rise[k]
        x = np.clip(_hermite_guess(self, k, target), lo, hi)
        active = np.ones(x.shape, dtype=bool)
        scale = tol * (np.abs(target) + 1.0)
        for _ in range(80):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            xi = x[idx]
            f = self._gauss(base[idx], xi) - need[idx]
            d = self.tilde_z_sq_local(xi)
            neg = f < 0
            lo[idx] = np.where(neg, xi, lo[idx])
            hi[idx] = np.where(neg, hi[idx], xi)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(d > 0, xi - f / d, np.nan)
            bad = ~np.isfinite(step) | (step <= lo[idx]) | (step >= hi[idx])
            step = np.where(bad, 0.5 * (lo[idx] + hi[idx]), step)
            done = (np.abs(f) <= scale[idx]) | (hi[idx] - lo[idx] <= 4e-16 * (np.abs(xi) + 1.0))
            x[idx] = np.where(done, xi, step)
            active[idx] = ~done
        # exact knot images map back to the knot
        x = np.where(need == 0.0, base, x)
        return np.where(target == self.rise[k + 1], self.tau[k + 1], x)

    def invert(self, y):
        """t with phi1(t) = y to within INVERSION_TOL."""
        y = np.asarray(y, dtype=float)
        tau = self.locate(y.ravel() - self.phi_anchor).reshape(y.shape)
        out = self.t_lo + tau
        return float(out) if out.ndim == 0 else out

    # -- invariants ----------------------------------------------------
    def gap_ratios(self, stride: int = 1) -> np.ndarray:
        """(t - phi1(t)) / ((1-c) pi(t)) at every ``stride``-th knot."""
        t = self.t[::stride]
        gap = (self.t_lo - self.phi_anchor) + (self.tau[::stride] - self.rise[::stride])
        return gap / (GAP_CONSTANT * prime_pi_many(t))

    def invariant_report(self) -> dict:
        steps = np.diff(self.rise)
        ratios = self.gap_ratios()
        return {
            "strictly_increasing": bool(np.all(steps > 0.0)),
            "dphi1_nonnegative": bool(np.all(self.dphi1 >= 0.0)),
            "below_diagonal": bool(np.all(self.t > self.phi1_knots)),
            "gap_ratio_min": float(ratios.min()),
            "gap_ratio_max": float(ratios.max()),
            "gap_within_band": bool(ratios.min() >= 0.8 and ratios.max() <= 1.2),
        }

    def window_preimage(self, T: float) -> "WindowPair":
        return window_preimage(self, T)


def _hermite_guess(table: LadderTable, k: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Linear guess inside panel k polished by one Newton step on the monotone spline."""
    step = table.rise[k + 1] - table.rise[k]
    frac = np.where(step > 0, (target - table.rise[k]) / np.where(step > 0, step, 1.0), 0.5)
    x = table.tau[k] + np.clip(frac, 0.0, 1.0) * (table.tau[k + 1] - table.tau[k])
    slope = table.interp(x, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        x1 = x - (table.interp(x) - target) / slope
    return np.where(np.isfinite(x1), x1, x)


def build_ladder(t_lo: float, t_hi: float, grid: GridPolicy = GridPolicy(), *,
                 knot_spacing: float | None = None) -> LadderTable:
    """Tabulate the surrogate ladder on [t_lo, t_hi].

    Knots are uniform at the grid policy's spacing (``knot_spacing``
    overrides it).  Each panel integral is the sum of 20-point rules on its
    two halves; a single 20-point rule on the whole panel must agree to
    ``RESOLUTION_TOL`` or the grid is rejected as too coarse.
    """
    t_lo, t_hi = float(t_lo), float(t_hi)
    if not t_lo >= LADDER_MIN_T:
        raise DomainError(f"ladder needs t_lo >= {LADDER_MIN_T:g}")
    if not t_hi > t_lo:
        raise DomainError("ladder needs t_lo < t_hi")
    h = grid.spacing(t_hi) if knot_spacing is None else float(knot_spacing)
    count = max(1, int(math.ceil((t_hi - t_lo) / h)))
    tau = (t_hi - t_lo) * np.arange(count + 1) / count
    a, b = tau[:-1], tau[1:]
    mid = 0.5 * (a + b)
    fine = _gauss_local(t_lo, a, mid, grid.terms) + _gauss_local(t_lo, mid, b, grid.terms)
    coarse = _gauss_local(t_lo, a, b, grid.terms)
    worst = float(np.max(np.abs(fine - coarse)))
    if worst > RESOLUTION_TOL:
        raise ResolutionError(f"knot spacing {b[0] - a[0]:.3g} too coarse (refinement gap {worst:.2e})")
    rise = np.concatenate([[0.0], np.cumsum(fine)])
    dphi1 = tilde_z_sq_at(tau, grid.terms, offset=t_lo)
    anchor = t_lo - GAP_CONSTANT * prime_pi(t_lo)
    return LadderTable(t_lo, tau, rise, dphi1, anchor, grid.terms)


def invert(table: LadderTable, y):
    return table.invert(y)


def tilde_z_sq(table: LadderTable, t):
    return table.tilde_z_sq(t)


def window_preimage(table: LadderTable, T: float) -> WindowPair:
    """Preimage of [T, T+2] under phi1."""
    T = float(T)
    offset = T - table.phi_anchor
    tau0, tau1 = table.locate([offset, offset + 2.0])
    t0, t1 = table.t_lo + tau0, table.t_lo + tau1
    return WindowPair(
        T=T,
        image=(T, T + 2.0),
        preimage=(float(t0), float(t1)),
        gap_ratio=float((t0 - T) / (T / math.log(T))),
        tau=(float(tau0), float(tau1)),
        offset=float(offset),
    )


def anchor_for_image(y: float, max_iter: int = 60) -> float:
    """t with t - (1-c) pi(t) close to y (fixed-point iteration on pi)."""
    t = float(y)
    for _ in range(max_iter):
        nxt = y + GAP_CONSTANT * prime_pi(t)
        if nxt == t:
            break
        t = nxt
    return t


def ladder_for_window(T: float, pad: float = 4.0, grid: GridPolicy = GridPolicy()) -> LadderTable:
    """A short table whose image covers [T - pad, T + 2 + pad]."""
    t_lo = max(LADDER_MIN_T, anchor_for_image(T - pad))
    length = 2.0 * pad + 4.0
    for _ in range(30):
        table = build_ladder(t_lo, t_lo + length, grid)
        if table.phi_anchor <= T and table.phi_anchor + table.total_rise >= T + 2.0 + pad:
            return table
        length *= 1.5
    raise OutOfRangeError(f"could not cover window at T={T}")


# ---------------------------------------------------------------------------
# serialisation

LADDER_MAGIC = b"ZLLADDER"
LADDER_VERSION = 1
_LADDER_HEADER = struct.Struct("<8sHddQddH")


def save_ladder(table: LadderTable, path: str | os.PathLike) -> None:
    """Versioned binary: header, (t, phi1, dphi1) triples, then the local rise block."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _LADDER_HEADER.pack(LADDER_MAGIC, LADDER_VERSION, table.t_lo, table.t_hi, len(table),
                                 table.t_lo, table.phi_anchor, table.terms)
    body = table.knots.astype("<f8").tobytes() + table.tau.astype("<f8").tobytes() \
        + table.rise.astype("<f8").tobytes()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def load_ladder(path: str | os.PathLike) -> LadderTable:
    raw = Path(path).read_bytes()
    if len(raw) < _LADDER_HEADER.size:
        raise OSError(f"{path}: truncated ladder file")
    magic, version, t_lo, _t_hi, count, _t0, phi_anchor, terms = _LADDER_HEADER.unpack_from(raw)
    if magic != LADDER_MAGIC or version != LADDER_VERSION:
        raise OSError(f"{path}: not a version-{LADDER_VERSION} ladder file")
    body = np.frombuffer(raw, dtype="<f8", offset=_LADDER_HEADER.size)
    if body.size != 5 * count:
        raise OSError(f"{path}: body length does not match header count")
    triples = body[: 3 * count].reshape(count, 3)
    tau = body[3 * count: 4 * count]
    rise = body[4 * count:]
    return LadderTable(t_lo, tau.copy(), rise.copy(), triples[:, 2].copy(), phi_anchor, terms)


LADDER_CSV_HEADER = ("t", "phi1", "dphi1")


def export_csv(table: LadderTable, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LADDER_CSV_HEADER)
        for row in table.knots:
            w.writerow([repr(float(v)) for v in row])
