"""Jacobi polynomials and their Legendre / Chebyshev specialisations."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special_fn import log_double_factorial, log_gamma_complex

LOG_SPACE_ABOVE_N = 150


class Family(str, enum.Enum):
    GENERAL = "general"
    LEGENDRE = "legendre"
    CHEBYSHEV_T = "chebyshev_t"
    CHEBYSHEV_U = "chebyshev_u"


_FAMILY_EXPONENT = {
    Family.LEGENDRE: 0.0,
    Family.CHEBYSHEV_T: -0.5,
    Family.CHEBYSHEV_U: 0.5,
}


@dataclass(frozen=True)
class JacobiSpec:
    """One basis function: degree ``n`` of a family with weight exponents.

    For the classical families ``alpha``/``beta`` are implied and checked;
    the polynomial evaluated is then the classical one (P_n, T_n, U_n).
    """

    alpha: float
    beta: float
    n: int
    family: Family = Family.GENERAL

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (self.alpha > -1 and self.beta > -1):
            raise DomainError("Jacobi exponents must satisfy alpha, beta > -1")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError("degree n must be a non-negative integer")
        if self.family is not Family.GENERAL:
            e = _FAMILY_EXPONENT[self.family]
            if self.alpha != e or self.beta != e:
                raise DomainError(f"{self.family.value} requires alpha = beta = {e}")

    @classmethod
    def of(cls, family: Family | str, n: int, alpha: float | None = None, beta: float | None = None) -> "JacobiSpec":
        """Build a spec, filling in the exponents implied by a classical family."""
        family = Family(family)
        if family is Family.GENERAL:
            if alpha is None or beta is None:
                raise DomainError("general family needs explicit alpha and beta")
            return cls(float(alpha), float(beta), int(n), family)
        e = _FAMILY_EXPONENT[family]
        return cls(e, e, int(n), family)

    def with_degree(self, n: int) -> "JacobiSpec":
        return JacobiSpec(self.alpha, self.beta, int(n), self.family)


def _check_x(x) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0):
        raise DomainError("Jacobi evaluation is restricted to -1 <= x <= 1")
    return xa


def jacobi_all(alpha: float, beta: float, nmax: int, x) -> np.ndarray:
    """P_0 .. P_nmax of P^(alpha, beta) at ``x``, stacked on a new first axis."""
    xa = _check_x(x)
    out = np.empty((nmax + 1,) + xa.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    ab = alpha + beta
    out[1] = (alpha + 1.0) + 0.5 * (ab + 2.0) * (xa - 1.0)
    for n in range(2, nmax + 1):
        c = 2 * n + ab
        a1 = 2.0 * n * (n + ab) * (c - 2.0)
        a2 = (c - 1.0) * (alpha * alpha - beta * beta)
        a3 = (c - 2.0) * (c - 1.0) * c
        a4 = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * c
        out[n] = ((a2 + a3 * xa) * out[n - 1] - a4 * out[n - 2]) / a1
    return out


def classical_all(family: Family | str, nmax: int, x) -> np.ndarray:
    """Classical P_n, T_n or U_n for n = 0 .. nmax by their own recurrences."""
    family = Family(family)
    xa = _check_x(x)
    out = np.empty((nmax + 1,) + xa.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    if family is Family.LEGENDRE:
        out[1] = xa
        for n in range(2, nmax + 1):
            out[n] = ((2 * n - 1) * xa * out[n - 1] - (n - 1) * out[n - 2]) / n
    elif family in (Family.CHEBYSHEV_T, Family.CHEBYSHEV_U):
        out[1] = xa if family is Family.CHEBYSHEV_T else 2.0 * xa
        for n in range(2, nmax + 1):
            out[n] = 2.0 * xa * out[n - 1] - out[n - 2]
    else:
        raise ValueError("classical_all needs a classical family")
    return out


def basis_all(spec: JacobiSpec, x) -> np.ndarray:
    """Degrees 0 .. spec.n of the spec's family at ``x``."""
    if spec.family is Family.GENERAL:
        return jacobi_all(spec.alpha, spec.beta, spec.n, x)
    return classical_all(spec.family, spec.n, x)


def evaluate(spec: JacobiSpec, x):
    """Value of the spec's polynomial at ``x`` in [-1, 1]."""
    val = basis_all(spec, x)[spec.n]
    return float(val) if np.ndim(val) == 0 else val


def chebyshev_trig(family: Family | str, n: int, x):
    """T_n(cos t) = cos(n t) and U_n(cos t) = sin((n + 1) t) / sin t."""
    family = Family(family)
    xa = _check_x(x)
    ang = np.arccos(xa)
    if family is Family.CHEBYSHEV_T:
        return np.cos(n * ang)
    if family is Family.CHEBYSHEV_U:
        s = np.sin(ang)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = np.sin((n + 1) * ang) / s
        edge = np.isclose(s, 0.0, atol=1e-12)
        return np.where(edge, np.where(xa > 0, n + 1.0, (-1.0) ** n * (n + 1)), val)
    raise ValueError("chebyshev_trig needs a Chebyshev family")


def _lgamma(v: float) -> float:
    return log_gamma_complex(v).real


def weight_mass(alpha: float, beta: float) -> float:
    """Integral of (1-x)^alpha (1+x)^beta over [-1, 1]."""
    return math.exp(
        (alpha + beta + 1.0) * math.log(2.0) + _lgamma(alpha + 1.0) + _lgamma(beta + 1.0) - _lgamma(alpha + beta + 2.0)
    )


def jacobi_norm(alpha: float, beta: float, n: int) -> float:
    """Squared weighted norm of P_n^(alpha, beta), evaluated in log space.

    The n = 0 case uses the total weight mass, which is the limit of the
    general formula and stays finite at alpha + beta = -1.
    """
    if n == 0:
        return weight_mass(alpha, beta)
    log_val = (
        (alpha + beta + 1.0) * math.log(2.0)
        - math.log(2 * n + alpha + beta + 1.0)
        + _lgamma(n + alpha + 1.0)
        + _lgamma(n + beta + 1.0)
        - _lgamma(n + 1.0)
        - _lgamma(n + alpha + beta + 1.0)
    )
    return math.exp(log_val)


def norm_constant(spec: JacobiSpec) -> float:
    """Weighted squared norm of the polynomial the spec evaluates."""
    n = spec.n
    if spec.family is Family.GENERAL:
        return jacobi_norm(spec.alpha, spec.beta, n)
    if spec.family is Family.LEGENDRE:
        return 2.0 / (2 * n + 1)
    if spec.family is Family.CHEBYSHEV_T:
        return math.pi if n == 0 else math.pi / 2
    return math.pi / 2


def specialization_prefactor(spec: JacobiSpec) -> float:
    """lambda_n with P_n^(a, a) = lambda_n * (classical polynomial).

    Chebyshev T: (2n-1)!! / (2n)!!.  Chebyshev U: 2 (2n+1)!! / (2n+2)!!,
    which is P_n^(1/2,1/2)(1) / (n + 1).
    """
    n = spec.n
    if spec.family is Family.CHEBYSHEV_T:
        num, den, scale = 2 * n - 1, 2 * n, 1.0
    elif spec.family is Family.CHEBYSHEV_U:
        num, den, scale = 2 * n + 1, 2 * n + 2, 2.0
    else:
        raise ValueError("prefactor is defined for the Chebyshev families only (it is 1 otherwise)")
    if n > LOG_SPACE_ABOVE_N:
        return scale * math.exp(log_double_factorial(num) - log_double_factorial(den))
    from .special_fn import double_factorial

    return scale * double_factorial(num) / double_factorial(den)
