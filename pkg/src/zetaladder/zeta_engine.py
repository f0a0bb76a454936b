"""Hardy Z(t) on the critical line.

Two independent evaluators: the Riemann-Siegel expansion with up to five
remainder coefficients (the production path) and an Euler-Maclaurin sum for
zeta(1/2 + it) rotated by exp(i theta) (the oracle, O(t) per point).
"""

from __future__ import annotations

import functools
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Literal

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError
from .special_fn import _BERNOULLI_2K, theta_asymptotic, theta_exact

RS_MIN_T = 10.0
EM_MAX_T = 1e5
CROSSOVER_T = 50.0
DEFAULT_TERMS = 12
MAX_TERMS = 14


@dataclass(frozen=True)
class HardyEval:
    t: float
    z: float
    theta: float
    zeta_sq: float
    method: Literal["riemann_siegel", "euler_maclaurin"]

    def __post_init__(self):
        if self.zeta_sq != self.z * self.z:
            raise ValueError("zeta_sq must equal z**2 exactly")


def mean_zero_gap(t):
    """Average spacing 2 pi / ln(t / 2 pi) of critical-line zeros near t."""
    return 2.0 * math.pi / np.log(np.asarray(t, dtype=float) / (2.0 * math.pi))


# ---------------------------------------------------------------------------
# Riemann-Siegel
#
# Production path: the remainder is written as
#   2 (-1)^(N-1) a^(-1/2) Re( exp(i delta) sum_n G_n(q) a^(-n) ),
# a = sqrt(t / 2 pi), q = 1 - 2 (a - N), delta = theta(t) - theta_0(t), with
#   G_n(q) = sum_k d[n, k] F^(3n - 2k)(q) / (pi^(2n - k) (2i)^k),
#   F(z) = (exp(i pi (z^2 / 2 + 3/8)) - i sqrt(2) cos(pi z / 2)) / (2 cos(pi z)).
# The d[n, k] recurrence and F are those of Arias de Reyna's formulation
# for sigma = 1/2.  Each G_n is tabulated once as a Taylor polynomial in q.

_F_DEGREE = 260


def _rs_d_table(orders: int) -> dict:
    d = {(0, 0): mpmath.mpf(1)}

    def get(n, k):
        return d.get((n, k), mpmath.mpf(0))

    for n in range(1, orders + 1):
        for k in range(0, 3 * n // 2 + 1):
            m = 3 * n - 2 * k
            if m:
                d[n, k] = -(m + 1) * get(n - 1, k - 2) + get(n - 1, k) / (4 * m)
            else:
                d[n, k] = -sum(
                    (-1) ** (k - r) * get(n, r) * mpmath.factorial(2 * k - 2 * r) / mpmath.factorial(k - r)
                    for r in range(k)
                )
    return d


@functools.cache
def _rs_order_polys(orders: int = MAX_TERMS) -> tuple[np.ndarray, ...]:
    """Complex Taylor coefficients (ascending, in q) of G_0 .. G_orders."""
    deg = _F_DEGREE
    with mpmath.workdps(150):
        pi = mpmath.pi
        e38 = mpmath.expjpi(mpmath.mpf(3) / 8)
        num = [mpmath.mpc(0)] * (deg + 1)
        for j in range(deg // 2 + 1):
            num[2 * j] += e38 * (1j * pi / 2) ** j / mpmath.factorial(j)
            num[2 * j] -= 1j * mpmath.sqrt(2) * (-1) ** j * (pi / 2) ** (2 * j) / mpmath.factorial(2 * j)
        sec = [mpmath.mpf(0)] * (deg + 1)
        for k in range(deg // 2 + 1):
            sec[2 * k] = abs(mpmath.eulernum(2 * k)) * pi ** (2 * k) / mpmath.factorial(2 * k)
        f = [sum(num[i] * sec[n - i] for i in range(n + 1)) / 2 for n in range(deg + 1)]
        d = _rs_d_table(orders)
        polys = []
        for n in range(orders + 1):
            acc = [mpmath.mpc(0)] * (deg + 1)
            for k in range(3 * n // 2 + 1):
                m = 3 * n - 2 * k
                scale = d[n, k] / (pi ** (2 * n - k) * (2j) ** k)
                for j in range(deg + 1 - m):
                    acc[j] += scale * f[j + m] * mpmath.factorial(j + m) / mpmath.factorial(j)
            coeffs = np.array([complex(v) for v in acc])
            tail = np.cumsum(np.abs(coeffs)[::-1])[::-1]
            polys.append(coeffs[: max(1, int(np.count_nonzero(tail > 1e-20)))])
        return tuple(polys)


@functools.cache
def _psi_derivative_polys(degree: int = 80) -> tuple[np.ndarray, ...]:
    """Taylor coefficients in u = p - 1/2 of Psi and its derivatives 0..12.

    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) = -cos(2 pi u^2 - 5 pi / 8) / cos(2 pi u).
    """
    with mpmath.workprec(400):
        pi = mpmath.pi
        two_pi = 2 * pi
        num = [mpmath.mpf(0)] * (degree + 1)
        c, s = mpmath.cos(5 * pi / 8), mpmath.sin(5 * pi / 8)
        j = 0
        while 4 * j <= degree:
            num[4 * j] += c * (-1) ** j * two_pi ** (2 * j) / mpmath.factorial(2 * j)
            if 4 * j + 2 <= degree:
                num[4 * j + 2] += s * (-1) ** j * two_pi ** (2 * j + 1) / mpmath.factorial(2 * j + 1)
            j += 1
        sec = [mpmath.mpf(0)] * (degree + 1)
        for k in range(degree // 2 + 1):
            sec[2 * k] = abs(mpmath.eulernum(2 * k)) * two_pi ** (2 * k) / mpmath.factorial(2 * k)
        psi = [-sum(num[i] * sec[n - i] for i in range(n + 1)) for n in range(degree + 1)]
        return tuple(
            np.array(
                [float(psi[n + r] * mpmath.factorial(n + r) / mpmath.factorial(n)) for n in range(degree + 1 - r)]
            )
            for r in range(13)
        )


# C_k = sum over (scale, derivative order) of scale * Psi^(order) / pi^power
_CLASSICAL_C = (
    ((1.0, 0, 0),),
    ((-1.0 / 96, 3, 2),),
    ((1.0 / 64, 2, 2), (1.0 / 18432, 6, 4)),
    ((-1.0 / 64, 1, 2), (-1.0 / 3840, 5, 4), (-1.0 / 5308416, 9, 6)),
    ((1.0 / 128, 0, 2), (19.0 / 24576, 4, 4), (11.0 / 5898240, 8, 6), (1.0 / 2038431744, 12, 8)),
)


def classical_rs_coefficients(p, terms: int = 4) -> np.ndarray:
    """Edwards-form C_0(p) .. C_terms(p) (``terms <= 4``) from derivatives of Psi.

    ``p`` is the fractional part of ``sqrt(t / 2 pi)``.  Kept as an
    independent check on the general-order tables used by :func:`hardy_z_rs`.
    """
    if not 0 <= terms <= 4:
        raise ValueError("classical coefficients are tabulated for terms <= 4")
    u = np.asarray(p, dtype=float) - 0.5
    dpsi = _psi_derivative_polys()
    rows = []
    for parts in _CLASSICAL_C[: terms + 1]:
        rows.append(sum(sc * np.polynomial.polynomial.polyval(u, dpsi[r]) / math.pi**pw for sc, r, pw in parts))
    return np.stack(rows)


def _theta_tail(t: np.ndarray) -> np.ndarray:
    inv = 1.0 / t
    acc = np.zeros_like(t)
    for k in range(8, 0, -1):
        c = (1.0 - 2.0 ** (1 - 2 * k)) * abs(_BERNOULLI_2K[k - 1]) / (4 * k * (2 * k - 1))
        acc = acc * inv * inv + c
    return acc * inv


_POLY_BOUND: list[float] | None = None
_PI_LD = np.longdouble("3.14159265358979323846264338327950288")
_TWO_PI_LD = 2 * _PI_LD


def _rs_z(t: np.ndarray, terms: int, chunk: int = 4096, offset: float = 0.0) -> np.ndarray:
    global _POLY_BOUND
    polys = _rs_order_polys()[: terms + 1]
    if _POLY_BOUND is None:
        _POLY_BOUND = [float(np.abs(p).sum()) for p in _rs_order_polys()]
    tl = np.longdouble(offset) + t.astype(np.longdouble)
    t = tl.astype(float)
    a = np.sqrt(t / (2.0 * math.pi))
    n_main = np.floor(a).astype(int)
    q = 1.0 - 2.0 * (a - n_main)
    delta = _theta_tail(t)
    # main-sum phases are large (~ t ln t); form them in extended precision
    # and reduce mod 2 pi before dropping back to double
    th = 0.5 * tl * np.log(tl / _TWO_PI_LD) - 0.5 * tl - _PI_LD / 8 + delta
    out = np.empty_like(t)
    for lo in range(0, t.size, chunk):
        sl = slice(lo, lo + chunk)
        tt, nn = t[sl], n_main[sl]
        n = np.arange(1, int(nn.max()) + 1, dtype=float)
        mask = n[None, :] <= nn[:, None]
        phase = th[sl][:, None] - tl[sl][:, None] * np.log(n.astype(np.longdouble))[None, :]
        phase = (phase - _TWO_PI_LD * np.round(phase / _TWO_PI_LD)).astype(float)
        main = 2.0 * np.sum(np.where(mask, np.cos(phase) / np.sqrt(n)[None, :], 0.0), axis=1)
        inv_a = 1.0 / a[sl]
        # orders whose worst case |G_n| a^-n is below 1e-18 are skipped
        a_min = float(a[sl].min())
        used = [poly for n, poly in enumerate(polys) if n == 0 or _POLY_BOUND[n] * a_min**-n > 1e-18]
        series = np.zeros(tt.size, dtype=complex)
        for poly in reversed(used):
            series = series * inv_a + np.polynomial.polynomial.polyval(q[sl], poly)
        sign = np.where(nn % 2 == 1, 1.0, -1.0)
        rem = 2.0 * sign * np.sqrt(inv_a) * np.real(np.exp(1j * delta[sl]) * series)
        out[sl] = main + rem
    return out


def hardy_z_rs_array(t, terms: int = DEFAULT_TERMS, *, offset: float = 0.0) -> np.ndarray:
    """Vectorised Riemann-Siegel Z(offset + t) for ``offset + t >= 10``.

    A nonzero ``offset`` lets callers pass small local coordinates; the
    sum is then formed in extended precision so nearby points are not
    blurred by rounding of offset + t in double.
    """
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tarr + offset < RS_MIN_T):
        raise DomainError("Riemann-Siegel evaluation needs t >= 10; use the Euler-Maclaurin oracle")
    if not 0 <= terms <= MAX_TERMS:
        raise ValueError(f"terms must lie in [0, {MAX_TERMS}]")
    return _rs_z(tarr.ravel(), terms, offset=float(offset)).reshape(tarr.shape)


def hardy_z_rs(t: float, terms: int = DEFAULT_TERMS) -> HardyEval:
    """Z(t) by Riemann-Siegel with remainder orders 0 .. ``terms``.

    Truncation error behaves like ``t**(-(2*terms + 3)/4)`` while the
    expansion still converges; at t = 10 the default of 12 orders is good to
    about 1e-8.
    """
    z = float(hardy_z_rs_array(float(t), terms)[0])
    return HardyEval(t=float(t), z=z, theta=float(theta_asymptotic(float(t), 8)), zeta_sq=z * z,
                     method="riemann_siegel")


# ---------------------------------------------------------------------------
# Euler-Maclaurin oracle


@functools.cache
def _em_bernoulli_ratios(count: int = 120) -> np.ndarray:
    """B_2k / (2k)! for k = 1 .. count."""
    return np.array(
        [float(mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k)) for k in range(1, count + 1)]
    )


def zeta_critical_em(t: float, precision_target: float = 1e-12) -> complex:
    """zeta(1/2 + it) by Euler-Maclaurin summation.

    The cut ``N ~ t/2`` makes successive Bernoulli terms shrink by roughly
    ``(1/pi)^2``; summation stops once the standard remainder bound
    ``|T_(k+1)| |s + 2k + 1| / (sigma + 2k + 1)`` drops below the target.
    """
    t = float(t)
    if not 0.0 < t <= EM_MAX_T:
        raise DomainError("Euler-Maclaurin oracle is limited to 0 < t <= 1e5")
    s = complex(0.5, t)
    n_cut = int(t / 2.0) + 20
    logn = np.log(np.arange(1, n_cut, dtype=float))
    head = complex(np.sum(np.exp(-0.5 * logn) * np.exp(-1j * t * logn)))
    n_pow = complex(np.exp(-s * math.log(n_cut)))  # N^{-s}
    total = head + n_cut * n_pow / (s - 1.0) + 0.5 * n_pow
    ratios = _em_bernoulli_ratios()
    term = ratios[0] * s * n_pow / n_cut  # k = 1
    inv_n2 = 1.0 / (n_cut * n_cut)
    for k in range(1, ratios.size):
        total += term
        nxt = term * (ratios[k] / ratios[k - 1]) * (s + 2 * k - 1) * (s + 2 * k) * inv_n2
        if abs(nxt) * abs(s + 2 * k + 1) / (0.5 + 2 * k + 1) < precision_target:
            return total
        term = nxt
    raise ConvergenceError(f"Euler-Maclaurin tail at t={t} cannot reach {precision_target}")


def hardy_z_em(t: float, precision_target: float = 1e-12) -> HardyEval:
    """Z(t) = exp(i theta(t)) zeta(1/2 + it) via the Euler-Maclaurin oracle."""
    zeta = zeta_critical_em(t, precision_target)
    th = theta_exact(float(t))
    rotated = complex(np.exp(1j * th) * zeta)
    if abs(rotated.imag) >= 1e-8:
        raise ConvergenceError(f"imaginary residue {rotated.imag:.3e} at t={t} is not negligible")
    z = rotated.real
    return HardyEval(t=float(t), z=z, theta=th, zeta_sq=z * z, method="euler_maclaurin")


def hardy_z(t) -> np.ndarray:
    """Production Z(t): Euler-Maclaurin below t = 50, Riemann-Siegel above."""
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(tarr)
    low = tarr < CROSSOVER_T
    if np.any(low):
        out[low] = [hardy_z_em(v).z for v in tarr[low]]
    if np.any(~low):
        out[~low] = hardy_z_rs_array(tarr[~low], DEFAULT_TERMS)
    return out


# ---------------------------------------------------------------------------
# Grids


@dataclass(frozen=True)
class GridPolicy:
    """Uniform sampling at ``samples_per_gap`` points per mean zero gap.

    The gap is taken at the right end of the range, where it is smallest.
    """

    samples_per_gap: int = 16
    terms: int = DEFAULT_TERMS

    def __post_init__(self):
        if self.samples_per_gap < 8:
            raise ValueError("samples_per_gap must be at least 8")
        if not 0 <= self.terms <= MAX_TERMS:
            raise ValueError(f"terms must lie in [0, {MAX_TERMS}]")

    def spacing(self, t_hi: float) -> float:
        return float(mean_zero_gap(t_hi)) / self.samples_per_gap


@dataclass(frozen=True)
class HardyGrid:
    """Bulk Z evaluations; iterating yields :class:`HardyEval` records."""

    t: np.ndarray
    z: np.ndarray
    method: Literal["riemann_siegel", "euler_maclaurin"] = "riemann_siegel"

    @property
    def zeta_sq(self) -> np.ndarray:
        return self.z * self.z

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i: int) -> HardyEval:
        t = float(self.t[i])
        z = float(self.z[i])
        return HardyEval(t=t, z=z, theta=float(theta_asymptotic(t, 8)), zeta_sq=z * z, method=self.method)

    def __iter__(self) -> Iterator[HardyEval]:
        return (self[i] for i in range(len(self)))


def zsq_grid(t_lo: float, t_hi: float, policy: GridPolicy = GridPolicy()) -> HardyGrid:
    """Riemann-Siegel samples of Z on a uniform grid covering [t_lo, t_hi]."""
    if not (RS_MIN_T <= t_lo < t_hi):
        raise DomainError("zsq_grid needs 10 <= t_lo < t_hi")
    count = int(math.ceil((t_hi - t_lo) / policy.spacing(t_hi))) + 1
    t = np.linspace(t_lo, t_hi, count)
    return HardyGrid(t=t, z=hardy_z_rs_array(t, policy.terms))


# ---------------------------------------------------------------------------
# Binary grid cache

GRID_MAGIC = b"ZLGRID\x00\x00"
GRID_VERSION = 1
_GRID_HEADER = struct.Struct("<8sHddIIQ")


def grid_cache_name(t_lo: float, t_hi: float, policy: GridPolicy) -> str:
    return f"zgrid_{t_lo!r}_{t_hi!r}_s{policy.samples_per_gap}_k{policy.terms}.bin"


def write_grid(path: str | os.PathLike, grid: HardyGrid, t_lo: float, t_hi: float, policy: GridPolicy) -> None:
    """Atomically write a versioned header and packed little-endian (t, z) pairs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _GRID_HEADER.pack(GRID_MAGIC, GRID_VERSION, t_lo, t_hi,
                               policy.samples_per_gap, policy.terms, len(grid))
    body = np.column_stack([grid.t, grid.z]).astype("<f8").tobytes()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def read_grid(path: str | os.PathLike) -> tuple[HardyGrid, dict]:
    raw = Path(path).read_bytes()
    if len(raw) < _GRID_HEADER.size:
        raise OSError(f"{path}: truncated grid cache")
    magic, version, t_lo, t_hi, spg, terms, count = _GRID_HEADER.unpack_from(raw)
    if magic != GRID_MAGIC or version != GRID_VERSION:
        raise OSError(f"{path}: not a version-{GRID_VERSION} grid cache")
    body = np.frombuffer(raw, dtype="<f8", offset=_GRID_HEADER.size)
    if body.size != 2 * count:
        raise OSError(f"{path}: body length does not match header count")
    pairs = body.reshape(count, 2)
    meta = {"t_lo": t_lo, "t_hi": t_hi, "samples_per_gap": spg, "terms": terms}
    return HardyGrid(t=pairs[:, 0].astype(float), z=pairs[:, 1].astype(float)), meta


def cached_zsq_grid(t_lo: float, t_hi: float, policy: GridPolicy = GridPolicy(),
                    cache_dir: str | os.PathLike | None = None) -> HardyGrid:
    """:func:`zsq_grid` backed by an on-disk cache when ``cache_dir`` is given."""
    if cache_dir is None:
        return zsq_grid(t_lo, t_hi, policy)
    path = Path(cache_dir) / grid_cache_name(t_lo, t_hi, policy)
    if path.exists():
        grid, _ = read_grid(path)
        return grid
    grid = zsq_grid(t_lo, t_hi, policy)
    write_grid(path, grid, t_lo, t_hi, policy)
    return grid
