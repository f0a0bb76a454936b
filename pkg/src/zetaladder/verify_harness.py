"""Executable checks of the ladder-transformed orthogonality identities.

Two routes evaluate every transformed integral over a window preimage:

* route A integrates the pulled-back integrand directly in t with
  :func:`integrate_t_space`;
* route B pushes Gauss-Jacobi nodes through the inverse ladder.

Everything is computed in the table's local coordinate, so the window
variable x = phi1(t) - T - 1 and the distances 1 +- x keep full relative
precision right up to the window ends.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .jacobi_basis import Family, JacobiSpec, basis_all, norm_constant
from .ladder import LadderTable, WindowPair, ladder_for_window, window_preimage
from .quad import gauss_jacobi, integrate_t_space

SCHEMA_VERSION = 1
SMOOTH_TOL = 1e-5
SINGULAR_TOL = 1e-4
GENERAL_EXPONENTS = (0.3, -0.4)
NMAX_CAP = 12
ROUTE_B_ORDER = 48
GRAM_QUAD_TOL = 1e-8
SCAN_QUAD_TOL = 1e-10

_GL_X, _GL_W = np.polynomial.legendre.leggauss(60)


def endpoint_power(exponent: float) -> tuple[bool, int]:
    """(singular?, q) so that the map distance = h v^q makes (distance)^e smooth.

    q is the denominator of e + 1, which turns v^(q(e+1)-1) into an integer power.
    """
    frac = Fraction(exponent + 1.0).limit_denominator(1000)
    if frac.denominator == 1:
        return False, 1
    return True, frac.denominator


def is_singular_weight(alpha: float, beta: float) -> bool:
    return alpha < 0 or beta < 0


def default_spec(family: Family | str, n: int = 0, alpha: float | None = None,
                 beta: float | None = None) -> JacobiSpec:
    family = Family(family)
    if family is Family.GENERAL:
        alpha = GENERAL_EXPONENTS[0] if alpha is None else alpha
        beta = GENERAL_EXPONENTS[1] if beta is None else beta
    return JacobiSpec.of(family, n, alpha, beta)


class WindowFrame:
    """Window coordinates x, 1 + x and 1 - x as functions of local tau."""

    def __init__(self, table: LadderTable, pair: WindowPair):
        self.table = table
        self.pair = pair
        self.tau0, self.tau1 = pair.tau
        self.mid = 0.5 * (self.tau0 + self.tau1)
        self._k0 = int(table._panel(np.asarray(self.tau0)))
        self._k1 = int(table._panel(np.asarray(self.tau1)))
        k0n = min(self._k0 + 1, len(table) - 1)
        self._head = float(table._gauss(self.tau0, table.tau[k0n]))
        self._tail = float(table._gauss(table.tau[self._k1], self.tau1))

    def _one_plus(self, tau: np.ndarray, dist: np.ndarray) -> np.ndarray:
        tb = self.table
        k = tb._panel(tau)
        same = k == self._k0
        k0n = min(self._k0 + 1, len(tb) - 1)
        near = np.where(same, tb._gauss_span(self.tau0, dist), tb._gauss(tb.tau[k], tau))
        return np.where(same, near, self._head + (tb.rise[k] - tb.rise[k0n]) + near)

    def _one_minus(self, tau: np.ndarray, dist: np.ndarray) -> np.ndarray:
        tb = self.table
        k = tb._panel(tau)
        same = k == self._k1
        kn = np.minimum(k + 1, len(tb) - 1)
        near = np.where(same, tb._gauss_span(self.tau1, -dist), tb._gauss(tau, tb.tau[kn]))
        return np.where(same, near, near + (tb.rise[self._k1] - tb.rise[kn]) + self._tail)

    def coords(self, tau, d_left=None, d_right=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(x, 1 + x, 1 - x) at local tau inside the preimage.

        ``d_left``/``d_right`` are exact distances to the preimage ends when
        the caller has them; otherwise they are formed from ``tau``.
        """
        tau = np.clip(np.asarray(tau, dtype=float), self.tau0, self.tau1)
        d_left = tau - self.tau0 if d_left is None else np.asarray(d_left, dtype=float)
        d_right = self.tau1 - tau if d_right is None else np.asarray(d_right, dtype=float)
        left = d_left <= d_right
        plus = np.empty_like(tau)
        minus = np.empty_like(tau)
        if np.any(left):
            plus[left] = self._one_plus(tau[left], d_left[left])
            minus[left] = 2.0 - plus[left]
        if np.any(~left):
            minus[~left] = self._one_minus(tau[~left], d_right[~left])
            plus[~left] = 2.0 - minus[~left]
        plus = np.clip(plus, 0.0, 2.0)
        minus = np.clip(minus, 0.0, 2.0)
        x = np.where(left, plus - 1.0, 1.0 - minus)
        return x, plus, minus

    def integrate(self, g: Callable, tol: float, alpha: float = 0.0, beta: float = 0.0):
        """Route A for an integrand g(x, 1+x, 1-x, tau) (vector-valued allowed), times Z~^2."""
        sing_l, q_l = endpoint_power(beta)
        sing_r, q_r = endpoint_power(alpha)

        def integrand(tau, d_left, d_right):
            x, plus, minus = self.coords(tau, d_left, d_right)
            return g(x, plus, minus, tau) * self.table.tilde_z_sq_local(tau)

        return integrate_t_space(integrand, self.tau0, self.tau1, tol, origin=self.table.t_lo,
                                 singular=(sing_l, sing_r), powers=(q_l, q_r), pass_distance=True)

    def pull_nodes(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Local tau_k with phi1 = T + 1 + x_k, and the recovered x_k."""
        tau = self.table.locate(self.pair.offset + 1.0 + np.asarray(x, dtype=float))
        return tau, self.coords(tau)[0]


def _weight(alpha: float, beta: float, plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    return minus**alpha * plus**beta


# ---------------------------------------------------------------------------
# Gram matrices

@dataclass
class GramReport:
    family: str
    alpha: float
    beta: float
    T: float
    nmax: int
    gram: np.ndarray
    gram_route_b: np.ndarray
    closed_form_diag: np.ndarray
    max_offdiag: float
    max_diag_reldev: float
    route_disagreement: float
    tolerance: float
    degraded: bool
    quad_error: float
    panels: int
    T_bar: float
    T2_bar: float
    t_lo: float

    @property
    def passed(self) -> bool:
        return (not self.degraded and self.max_offdiag <= self.tolerance
                and self.max_diag_reldev <= self.tolerance and self.route_disagreement <= SMOOTH_TOL)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("gram", "gram_route_b", "closed_form_diag"):
            d[key] = np.asarray(d[key]).tolist()
        d["schema_version"] = SCHEMA_VERSION
        d["kind"] = "gram_report"
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    CSV_HEADER = ("schema_version", "family", "alpha", "beta", "T", "m", "n", "route_a", "route_b", "expected")

    def csv_rows(self) -> list[tuple]:
        rows = []
        for m in range(self.nmax + 1):
            for n in range(self.nmax + 1):
                expected = self.closed_form_diag[m] if m == n else 0.0
                rows.append((SCHEMA_VERSION, self.family, self.alpha, self.beta, self.T, m, n,
                             float(self.gram[m, n]), float(self.gram_route_b[m, n]), float(expected)))
        return rows


def _max_deviations(gram: np.ndarray, diag: np.ndarray) -> tuple[float, float]:
    off = gram - np.diag(np.diag(gram))
    max_off = float(np.max(np.abs(off))) if gram.shape[0] > 1 else 0.0
    return max_off, float(np.max(np.abs(np.diag(gram) / diag - 1.0)))


def gram_transformed(table: LadderTable, family: Family | str, alpha: float | None = None,
                     beta: float | None = None, T: float = 0.0, nmax: int = 5, *,
                     tol: float = GRAM_QUAD_TOL, route_b_order: int = ROUTE_B_ORDER) -> GramReport:
    """Transformed Gram matrix on the preimage of [T, T+2], both routes."""
    if not 0 <= nmax <= NMAX_CAP:
        raise ValueError(f"nmax must lie in [0, {NMAX_CAP}]")
    spec = default_spec(family, nmax, alpha, beta)
    a, b = spec.alpha, spec.beta
    frame = WindowFrame(table, window_preimage(table, T))
    iu = np.triu_indices(nmax + 1)

    def g(x, plus, minus, tau):
        p = basis_all(spec, x)
        return (p[iu[0]] * p[iu[1]]) * _weight(a, b, plus, minus)

    res = frame.integrate(g, tol, a, b)
    gram = np.zeros((nmax + 1, nmax + 1))
    gram[iu] = res.value
    gram.T[iu] = res.value

    rule = gauss_jacobi(a, b, max(route_b_order, nmax + 1))
    _, xk = frame.pull_nodes(rule.nodes)
    pk = basis_all(spec, np.clip(xk, -1.0, 1.0))
    gram_b = (pk * rule.weights) @ pk.T
    gram_b = 0.5 * (gram_b + gram_b.T)

    diag = np.array([norm_constant(spec.with_degree(n)) for n in range(nmax + 1)])
    max_off, diag_dev = _max_deviations(gram, diag)
    return GramReport(
        family=spec.family.value, alpha=a, beta=b, T=float(T), nmax=nmax,
        gram=gram, gram_route_b=gram_b, closed_form_diag=diag,
        max_offdiag=max_off, max_diag_reldev=diag_dev,
        route_disagreement=float(np.max(np.abs(gram - gram_b))),
        tolerance=SINGULAR_TOL if is_singular_weight(a, b) else SMOOTH_TOL,
        degraded=bool(res.flagged), quad_error=float(res.error), panels=res.panels,
        T_bar=frame.pair.preimage[0], T2_bar=frame.pair.preimage[1], t_lo=table.t_lo,
    )


# ---------------------------------------------------------------------------
# substitution identity

@dataclass(frozen=True)
class SubstitutionCheck:
    T: float
    t_space: float
    x_space: float
    error: float
    flagged: bool

    @property
    def difference(self) -> float:
        return abs(self.t_space - self.x_space)


def substitution_check(table: LadderTable, T: float, f: Callable, *, tol: float = 1e-10,
                       rel_tol: float = 1e-13) -> SubstitutionCheck:
    """Compare the t-space integral of f(phi1(t)) Z~^2 with the x-space integral of f over [T, T+2].

    ``f`` receives absolute image values phi1(t) = T + 1 + x.  The
    quadrature target is ``max(tol, rel_tol * integral of |f|)``.
    """
    frame = WindowFrame(table, window_preimage(table, T))
    centre = float(T) + 1.0
    fx = f(centre + _GL_X)
    x_space = float(np.dot(_GL_W, fx))
    target = max(tol, rel_tol * float(np.dot(_GL_W, np.abs(fx))))
    res = frame.integrate(lambda x, plus, minus, tau: f(centre + x), target)
    return SubstitutionCheck(T=float(T), t_space=float(res.value), x_space=x_space,
                             error=float(res.error), flagged=bool(res.flagged))


# ---------------------------------------------------------------------------
# asymptotic scans

@dataclass
class AsymptoticScan:
    spec: JacobiSpec
    T_values: list
    T_bar: list
    integrals: list
    integrals_route_b: list
    ratios: list
    limit: float
    reldev: list
    envelope: list
    flagged: list = field(default_factory=list)

    def __post_init__(self):
        for r, d in zip(self.ratios, self.reldev):
            assert d == abs(r / self.limit - 1.0)

    @property
    def within_envelope(self) -> bool:
        return all(d <= e for d, e in zip(self.reldev, self.envelope))

    @property
    def non_increasing(self) -> bool:
        return all(b <= a for a, b in zip(self.reldev, self.reldev[1:]))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "asymptotic_scan",
            "family": self.spec.family.value,
            "alpha": self.spec.alpha,
            "beta": self.spec.beta,
            "n": self.spec.n,
            "T_values": list(self.T_values),
            "T_bar": list(self.T_bar),
            "integrals": list(self.integrals),
            "integrals_route_b": list(self.integrals_route_b),
            "ratios": list(self.ratios),
            "limit": self.limit,
            "reldev": list(self.reldev),
            "envelope": list(self.envelope),
            "flagged": list(self.flagged),
            "within_envelope": self.within_envelope,
            "non_increasing": self.non_increasing,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    CSV_HEADER = ("schema_version", "family", "alpha", "beta", "n", "T", "T_bar",
                  "integral", "integral_route_b", "ratio", "limit", "reldev", "envelope")

    def csv_rows(self) -> list[tuple]:
        s = self.spec
        return [
            (SCHEMA_VERSION, s.family.value, s.alpha, s.beta, s.n, T, tb, i, ib, r, self.limit, d, e)
            for T, tb, i, ib, r, d, e in zip(self.T_values, self.T_bar, self.integrals,
                                              self.integrals_route_b, self.ratios, self.reldev, self.envelope)
        ]


@functools.lru_cache(maxsize=16)
def cached_window_ladder(T: float) -> LadderTable:
    return ladder_for_window(T)


def asymptotic_scan(builder: Callable[[float], LadderTable] | None, spec: JacobiSpec,
                    T_values: Sequence[float], *, tol: float = SCAN_QUAD_TOL,
                    route_b_order: int = ROUTE_B_ORDER) -> AsymptoticScan:
    """|zeta|^2-weighted integrals of P_n^2 w over window preimages, against norm * ln T_bar."""
    T_values = [float(T) for T in T_values]
    if any(b <= a for a, b in zip(T_values, T_values[1:])):
        raise ValueError("T_values must be increasing")
    builder = builder or cached_window_ladder
    a, b, n = spec.alpha, spec.beta, spec.n
    limit = norm_constant(spec)
    rule = gauss_jacobi(a, b, max(route_b_order, n + 1))
    rows = []
    for T in T_values:
        table = builder(T)
        frame = WindowFrame(table, window_preimage(table, T))

        def g(x, plus, minus, tau, table=table):
            p = basis_all(spec, x)[n]
            return p * p * _weight(a, b, plus, minus) * np.log(table.t_lo + tau)

        res = frame.integrate(g, tol, a, b)
        tau_k, xk = frame.pull_nodes(rule.nodes)
        pk = basis_all(spec, np.clip(xk, -1.0, 1.0))[n]
        route_b = float(np.dot(rule.weights, pk * pk * np.log(table.t_lo + tau_k)))
        t_bar = frame.pair.preimage[0]
        ratio = float(res.value) / math.log(t_bar)
        rows.append((t_bar, float(res.value), route_b, ratio, abs(ratio / limit - 1.0),
                     8.0 / math.log(t_bar), bool(res.flagged)))
    cols = list(zip(*rows))
    return AsymptoticScan(spec=spec, T_values=T_values, T_bar=list(cols[0]), integrals=list(cols[1]),
                          integrals_route_b=list(cols[2]), ratios=list(cols[3]), limit=limit,
                          reldev=list(cols[4]), envelope=list(cols[5]), flagged=list(cols[6]))


# ---------------------------------------------------------------------------
# window distance

WINDOW_CSV_HEADER = ("T", "T_bar", "T_bar_over_T", "length_lnT_over_T")


def window_distance_check(table: LadderTable | Callable[[float], LadderTable] | None,
                          T_values: Iterable[float]) -> list[tuple[float, float, float, float]]:
    """Rows (T, T_bar, T_bar / T, preimage length * ln T / T)."""
    rows = []
    for T in T_values:
        T = float(T)
        tb = table if isinstance(table, LadderTable) else (table or cached_window_ladder)(T)
        pair = window_preimage(tb, T)
        rows.append((T, pair.T_bar, pair.T_bar / T, pair.length * math.log(T) / T))
    return rows


def write_csv(header: Sequence[str], rows: Iterable[Sequence], fh: io.TextIOBase | None = None) -> str:
    buf = fh or io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue() if fh is None else ""
