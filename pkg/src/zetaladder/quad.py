"""Gauss-Jacobi rules on [-1, 1] and adaptive panel quadrature in t."""

from __future__ import annotations

import functools
import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ConvergenceError, DomainError
from .jacobi_basis import weight_mass
from .zeta_engine import mean_zero_gap

MAX_ORDER = 500


@dataclass(frozen=True)
class QuadRule:
    alpha: float
    beta: float
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _jacobi_matrix(alpha: float, beta: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the symmetric monic Jacobi recurrence matrix."""
    ab = alpha + beta
    n = np.arange(order, dtype=float)
    c = 2.0 * n + ab
    diag = np.empty(order)
    diag[0] = (beta - alpha) / (ab + 2.0)
    if order > 1:
        cc = c[1:]
        diag[1:] = (beta * beta - alpha * alpha) / (cc * (cc + 2.0))
    m = np.arange(1, order, dtype=float)
    cm = 2.0 * m + ab
    with np.errstate(invalid="ignore", divide="ignore"):
        b2 = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (cm * cm * (cm + 1.0) * (cm - 1.0))
    if order > 1:
        # m = 1 simplifies; avoids 0/0 at alpha + beta = -1
        b2[0] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) ** 2 * (3.0 + ab))
    return diag, np.sqrt(b2)


@functools.lru_cache(maxsize=256)
def gauss_jacobi(alpha: float, beta: float, order: int) -> QuadRule:
    """Golub-Welsch Gauss rule for the weight (1-x)^alpha (1+x)^beta.

    Nodes are eigenvalues of the Jacobi matrix; weights are the total mass
    times the squared first eigenvector components.
    """
    if not (alpha > -1 and beta > -1):
        raise DomainError("Gauss-Jacobi needs alpha, beta > -1")
    if not 1 <= order <= MAX_ORDER:
        raise DomainError(f"order must lie in [1, {MAX_ORDER}]")
    diag, off = _jacobi_matrix(float(alpha), float(beta), int(order))
    try:
        nodes, vecs = eigh_tridiagonal(diag, off)
    except LinAlgError as exc:
        raise ConvergenceError(f"eigen-solver failed for order {order}") from exc
    weights = weight_mass(alpha, beta) * vecs[0] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadRule(float(alpha), float(beta), nodes, weights, int(order))


def integrate_reference(f: Callable, alpha: float, beta: float, order: int):
    """sum_k w_k f(x_k); ``f`` may return extra leading axes."""
    rule = gauss_jacobi(alpha, beta, order)
    vals = np.asarray(f(rule.nodes))
    out = vals @ rule.weights
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# t-space adaptive quadrature

_GL_HI_X, _GL_HI_W = np.polynomial.legendre.leggauss(20)
_GL_LO_X, _GL_LO_W = np.polynomial.legendre.leggauss(10)
_NODES = np.concatenate([_GL_HI_X, _GL_LO_X])


@dataclass(frozen=True)
class TSpaceResult:
    value: float | np.ndarray
    error: float
    flagged: bool
    panels: int


@dataclass(frozen=True)
class _Panel:
    kind: int  # 0 plain in t, -1 left-end map, +1 right-end map
    lo: float
    hi: float


class _Mapper:
    def __init__(self, a: float, b: float, h_left: float, h_right: float, q_left: int, q_right: int):
        self.a, self.b = a, b
        self.h_left, self.h_right = h_left, h_right
        self.q_left, self.q_right = q_left, q_right

    def nodes(self, panel: _Panel):
        """Nodes, Jacobian factors and exact distances to both ends."""
        half = 0.5 * (panel.hi - panel.lo)
        v = panel.lo + half * (_NODES + 1.0)
        if panel.kind == 0:
            return v, np.full_like(v, half), v - self.a, self.b - v
        # t = a + h v^q  or  t = b - h v^q on v in [0, 1]
        h, q = (self.h_left, self.q_left) if panel.kind < 0 else (self.h_right, self.q_right)
        jac = half * h * q * v ** (q - 1)
        d = h * v**q
        if panel.kind < 0:
            return self.a + d, jac, d, (self.b - self.a) - d
        return self.b - d, jac, (self.b - self.a) - d, d


def integrate_t_space(
    g: Callable,
    a: float,
    b: float,
    tol: float = 1e-6,
    *,
    max_panel: float | None = None,
    origin: float = 0.0,
    singular: tuple[bool, bool] = (False, False),
    powers: tuple[int, int] = (2, 2),
    max_panels: int = 20000,
    pass_distance: bool = False,
) -> TSpaceResult:
    """Globally adaptive integral of ``g`` over [a, b].

    ``g`` is vectorised over its last axis and may return extra leading
    axes (all components share the subdivision; the error is the max over
    components).  Panels never exceed ``max_panel``; by default that is an
    eighth of the mean zero gap of Z at ``origin + b`` (``origin`` lets the
    caller integrate in a shifted coordinate).  An end flagged in
    ``singular`` gets a one-sided map ``distance = h v^q`` on its first
    panel, ``q`` taken from ``powers``; q = 2 is the square-root
    substitution and cancels inverse-square-root endpoint behaviour.

    Each panel is a 20-point Gauss rule with the 10-point rule as error
    estimate.  ``flagged`` is set when the tolerance was not met before
    ``max_panels``; the best estimate is still returned.

    With ``pass_distance`` the integrand is called as ``g(t, t - a, b - t)``
    where the distances come straight from the endpoint maps, so they keep
    full relative precision however close the node is to an end.
    """
    if not a < b:
        raise DomainError("integrate_t_space needs a < b")
    width = b - a
    if max_panel is None:
        ordinate = origin + b
        max_panel = float(mean_zero_gap(ordinate)) / 8.0 if ordinate > 2.0 * math.pi * math.e else width
    count = max(1, int(math.ceil(width / max_panel)))
    if all(singular) and count < 2:
        count = 2
    edges = a + width * np.arange(count + 1) / count
    edges[-1] = b
    h = width / count
    mapper = _Mapper(a, b, h, h, int(powers[0]), int(powers[1]))
    panels = []
    for i in range(count):
        if i == 0 and singular[0]:
            panels.append(_Panel(-1, 0.0, 1.0))
        elif i == count - 1 and singular[1]:
            panels.append(_Panel(1, 0.0, 1.0))
        else:
            panels.append(_Panel(0, float(edges[i]), float(edges[i + 1])))

    def evaluate(batch: list[_Panel]):
        ts, jacs, dls, drs = zip(*(mapper.nodes(p) for p in batch))
        t = np.concatenate(ts)
        if pass_distance:
            vals = np.asarray(g(t, np.concatenate(dls), np.concatenate(drs)), dtype=float)
        else:
            vals = np.asarray(g(t), dtype=float)
        vals = vals * np.concatenate(jacs)
        vals = vals.reshape(vals.shape[:-1] + (len(batch), _NODES.size))
        hi = vals[..., : _GL_HI_X.size] @ _GL_HI_W
        lo = vals[..., _GL_HI_X.size :] @ _GL_LO_W
        err = np.abs(hi - lo)
        err = err.reshape(-1, len(batch)).max(axis=0)
        return hi, err

    values, errs = evaluate(panels)
    store = {i: (values[..., i], float(errs[i]), p) for i, p in enumerate(panels)}
    heap = [(-e, i) for i, (_, e, _) in store.items()]
    heapq.heapify(heap)
    next_id = len(panels)
    total_err = float(sum(e for _, e, _ in store.values()))
    while total_err > tol and len(store) < max_panels:
        # split the worst panels in batches of up to 16 (deterministic order)
        take = [heapq.heappop(heap)[1] for _ in range(min(len(heap), 16))]
        kids = []
        for pid in take:
            _, _, p = store.pop(pid)
            mid = 0.5 * (p.lo + p.hi)
            kids += [_Panel(p.kind, p.lo, mid), _Panel(p.kind, mid, p.hi)]
        vals, errs = evaluate(kids)
        for j, kid in enumerate(kids):
            store[next_id] = (vals[..., j], float(errs[j]), kid)
            heapq.heappush(heap, (-float(errs[j]), next_id))
            next_id += 1
        total_err = float(sum(e for _, e, _ in store.values()))
    value = sum(store[i][0] for i in sorted(store))
    if np.ndim(value) == 0:
        value = float(value)
    return TSpaceResult(value=value, error=total_err, flagged=total_err > tol, panels=len(store))
