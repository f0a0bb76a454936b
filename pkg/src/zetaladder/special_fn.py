"""Scalar special functions: complex log-gamma, Riemann-Siegel theta,
prime counting and double factorials."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.special
from scipy.special import expi

from .errors import CapExceededError, DomainError

EULER_GAMMA = 0.57721566490153286061

# Bernoulli numbers B_2, B_4, ..., B_24.
_BERNOULLI_2K = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
)
_STIRLING_RADIUS = 8.0
_STIRLING_COEFFS = tuple(
    b / ((2 * k) * (2 * k - 1)) for k, b in enumerate(_BERNOULLI_2K, start=1)
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
# ln Gamma(1 + u) = -gamma u + sum_k (-1)^k zeta(k) u^k / k, used near the zeros at 1 and 2
_NEAR_ZERO_RADIUS = 0.5
_LG1P_COEFFS = tuple((-1.0) ** k * float(scipy.special.zeta(k)) / k for k in range(2, 64))


def _log_gamma_1p(u: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(u)
    for c in reversed(_LG1P_COEFFS):
        acc = acc * u + c
    return u * (acc * u - EULER_GAMMA)


def log_gamma_complex(z):
    """Principal branch of ln Gamma(z) for Re z > 0.

    Uses the recurrence to shift the argument out to ``|z| >= 8`` and then
    the Stirling series with twelve Bernoulli terms; inside the discs of
    radius 1/2 about the zeros at 1 and 2 a Taylor series avoids cancellation.  Accepts scalars or arrays;
    scalars come back as Python ``complex``.
    """
    zarr = np.asarray(z, dtype=complex)
    if np.any(~(zarr.real > 0.0)):
        raise DomainError("log_gamma_complex requires Re z > 0")
    shift = np.where(
        np.abs(zarr) >= _STIRLING_RADIUS,
        0,
        np.ceil(np.sqrt(np.maximum(_STIRLING_RADIUS**2 - zarr.imag**2, 0.0)) - zarr.real),
    ).astype(int)
    shift = np.maximum(shift, 0)
    acc = np.zeros_like(zarr)
    for j in range(int(shift.max(initial=0))):
        acc = acc + np.where(j < shift, np.log(zarr + j), 0.0)
    w = zarr + shift
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for c in reversed(_STIRLING_COEFFS):
        series = series * inv2 + c
    out = (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series * inv - acc
    # near z = 1 and z = 2 the value is small; avoid the cancellation above
    out = np.atleast_1d(out)
    zflat = np.atleast_1d(zarr)
    near1 = np.abs(zflat - 1.0) <= _NEAR_ZERO_RADIUS
    near2 = np.abs(zflat - 2.0) <= _NEAR_ZERO_RADIUS
    if np.any(near1):
        out[near1] = _log_gamma_1p(zflat[near1] - 1.0)
    if np.any(near2):
        v = zflat[near2] - 2.0
        out[near2] = np.log1p(v) + _log_gamma_1p(v)
    if zarr.ndim == 0:
        return complex(out[0])
    return out


@dataclass(frozen=True)
class ThetaEval:
    t: float
    theta: float
    method: Literal["exact_loggamma", "asymptotic"]


def _check_t(t):
    tarr = np.asarray(t, dtype=float)
    if np.any(~(tarr > 0.0)):
        raise DomainError("theta is defined here only for t > 0")
    return tarr


def theta_exact(t):
    """Vectorised theta(t) = Im ln Gamma(1/4 + it/2) - (t/2) ln pi."""
    tarr = _check_t(t)
    out = np.imag(log_gamma_complex(0.25 + 0.5j * tarr)) - 0.5 * tarr * math.log(math.pi)
    return float(out) if np.ndim(out) == 0 else out


def theta_asymptotic(t, terms: int = 1):
    """Asymptotic theta: main term plus ``terms`` inverse-odd-power corrections.

    ``terms=0`` is the bare ``(t/2) ln(t/2pi) - t/2 - pi/8``; ``terms=1`` adds
    the familiar ``1/(48 t)``.  Coefficients follow
    ``(1 - 2^(1-2k)) |B_2k| / (4k (2k-1))``.
    """
    if not 0 <= terms <= len(_BERNOULLI_2K):
        raise ValueError(f"terms must lie in [0, {len(_BERNOULLI_2K)}]")
    tarr = _check_t(t)
    main = 0.5 * tarr * np.log(tarr / (2.0 * math.pi)) - 0.5 * tarr - math.pi / 8.0
    inv = 1.0 / tarr
    corr = np.zeros_like(tarr)
    for k in range(terms, 0, -1):
        c = (1.0 - 2.0 ** (1 - 2 * k)) * abs(_BERNOULLI_2K[k - 1]) / (4 * k * (2 * k - 1))
        corr = corr * inv * inv + c
    out = main + corr * inv if terms else main
    return float(out) if np.ndim(out) == 0 else out


def theta(t: float, method: Literal["exact_loggamma", "asymptotic"] = "exact_loggamma") -> ThetaEval:
    """Riemann-Siegel theta at a single ordinate ``t > 0``."""
    if method == "exact_loggamma":
        value = theta_exact(float(t))
    elif method == "asymptotic":
        value = theta_asymptotic(float(t), terms=1)
    else:
        raise ValueError(f"unknown theta method {method!r}")
    return ThetaEval(t=float(t), theta=float(value), method=method)


PRIME_PI_CAP = 10**8


class PrimeCounter:
    """Segmented sieve of Eratosthenes answering pi(x) queries up to ``cap``.

    Per-segment prime counts are appended lazily; the table only grows and
    is guarded by a lock during growth.
    """

    def __init__(self, cap: int = PRIME_PI_CAP, segment: int = 1 << 18):
        self.cap = int(cap)
        self.segment = int(segment)
        base_limit = math.isqrt(self.cap) + 1
        flags = np.ones(base_limit + 1, dtype=bool)
        flags[:2] = False
        for p in range(2, math.isqrt(base_limit) + 1):
            if flags[p]:
                flags[p * p :: p] = False
        self._base = np.flatnonzero(flags)
        self._cum = [0]  # primes below segment k * self.segment
        self._lock = threading.Lock()

    def _sieve(self, lo: int, hi: int) -> np.ndarray:
        flags = np.ones(hi - lo, dtype=bool)
        for p in self._base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            flags[start - lo :: p] = False
        if lo < 2:
            flags[: 2 - lo] = False
        return flags

    def __call__(self, x: float) -> int:
        n = math.floor(x)
        if n > self.cap:
            raise CapExceededError(f"pi({x}) exceeds the sieve cap {self.cap}")
        if n < 2:
            return 0
        k = n // self.segment
        with self._lock:
            while len(self._cum) <= k:
                j = len(self._cum) - 1
                lo = j * self.segment
                self._cum.append(self._cum[-1] + int(self._sieve(lo, lo + self.segment).sum()))
        lo = k * self.segment
        return self._cum[k] + int(self._sieve(lo, n + 1).sum())


    def many(self, xs) -> np.ndarray:
        """pi(x) for an array of x using a single sieve over their span."""
        xs = np.floor(np.asarray(xs, dtype=float)).astype(np.int64)
        if xs.size == 0:
            return xs.copy()
        lo, hi = int(xs.min()), int(xs.max())
        if hi > self.cap:
            raise CapExceededError(f"pi({hi}) exceeds the sieve cap {self.cap}")
        base = self(lo) if lo >= 2 else 0
        start = max(lo + 1, 0)
        if hi < start:
            return np.full(xs.shape, base)
        counts = np.cumsum(self._sieve(start, hi + 1))
        idx = xs - start
        return np.where(idx >= 0, base + counts[np.clip(idx, 0, None)], np.where(xs < 2, 0, base))


_DEFAULT_COUNTER: PrimeCounter | None = None


def _counter() -> PrimeCounter:
    global _DEFAULT_COUNTER
    if _DEFAULT_COUNTER is None:
        _DEFAULT_COUNTER = PrimeCounter()
    return _DEFAULT_COUNTER


def prime_pi(t: float, *, allow_approximation: bool = False) -> int:
    """Number of primes ``<= t``.

    Exact up to ``PRIME_PI_CAP``.  Above the cap a rounded logarithmic
    integral is returned when ``allow_approximation`` is set, otherwise
    :class:`CapExceededError` is raised.
    """
    if not t > 0:
        raise DomainError("prime_pi requires t > 0")
    if t > PRIME_PI_CAP:
        if allow_approximation:
            return int(round(float(expi(math.log(t)))))
        raise CapExceededError(f"pi({t}) exceeds the sieve cap {PRIME_PI_CAP}")
    return _counter()(t)


def prime_pi_many(ts) -> np.ndarray:
    """Vectorised exact :func:`prime_pi` (no approximation fallback)."""
    ts = np.asarray(ts, dtype=float)
    if np.any(~(ts > 0)):
        raise DomainError("prime_pi requires t > 0")
    return _counter().many(ts)


DOUBLE_FACTORIAL_MAX_N = 300


def double_factorial(n: int) -> int:
    """Exact n!! with (-1)!! = 0!! = 1.

    Raises :class:`OverflowError` for ``n > 300`` (the result would no longer
    fit a double); use :func:`log_double_factorial` there.
    """
    n = int(n)
    if n < -1:
        raise DomainError("double_factorial requires n >= -1")
    if n > DOUBLE_FACTORIAL_MAX_N:
        raise OverflowError(f"{n}!! is outside the exact range; use log_double_factorial")
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def log_double_factorial(n: int) -> float:
    n = int(n)
    if n < -1:
        raise DomainError("log_double_factorial requires n >= -1")
    if n <= 0:
        return 0.0
    if n % 2 == 0:
        k = n // 2
        return k * math.log(2.0) + math.lgamma(k + 1)
    k = (n + 1) // 2
    # (2k-1)!! = (2k)! / (2^k k!)
    return math.lgamma(2 * k + 1) - k * math.log(2.0) - math.lgamma(k + 1)
