"""Quadrature and dense linear-algebra primitives used throughout the package.

Every integral in this package is one-dimensional and falls into one of two
families:

* smooth integrands, possibly with integrable endpoint singularities
  (logs, x**(n-1) with n >= 1/2), handled by globally adaptive panel
  bisection with fixed-order Gauss-Legendre nodes and geometric panel
  grading toward a singular endpoint;
* oscillatory integrands f(k) * exp(i*mu*k) with |mu| up to ~1e5, where the
  initial panel count grows linearly with the number of oscillation periods
  so that every period receives a full set of nodes.

Gauss-Legendre nodes are interior points, so integrable endpoint
singularities are never evaluated at the endpoint itself.

The eigenvalue and inverse routines wrap LAPACK (through ``numpy.linalg``)
behind the checks the rest of the package relies on: Hermiticity is verified
and enforced by symmetrization before ``eigvalsh``, and inverses are checked
against an explicit residual.  Only eigenvalues are ever needed, never
eigenvectors.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "NumericsError",
    "NonConvergence",
    "NotHermitian",
    "Singular",
    "integrate",
    "integrate_oscillatory",
    "integrate_oscillatory_batch",
    "eig_hermitian",
    "eig_general",
    "mat_mul",
    "mat_inverse",
]


class NumericsError(Exception):
    """Base class for numerical failures in this module."""


class NonConvergence(NumericsError):
    """Raised when the panel budget is exhausted above the error target."""


class NotHermitian(NumericsError):
    """Raised when a matrix fails the Hermiticity check."""


class Singular(NumericsError):
    """Raised when a matrix is numerically singular."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Error targets and budget for the adaptive quadrature.

    abs_tol is the absolute error target, rel_tol the relative one; the
    effective target is max(abs_tol, rel_tol * |estimate|).
    """

    abs_tol: float = 1e-10
    rel_tol: float = 0.0
    max_panels: int = 20000
    nodes_per_panel: int = 16

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be non-negative")
        if self.nodes_per_panel < 4:
            raise ValueError("nodes_per_panel must be at least 4")
        if self.max_panels < 1:
            raise ValueError("max_panels must be at least 1")


DEFAULT_SPEC = QuadratureSpec()

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    rule = _GAUSS_CACHE.get(order)
    if rule is None:
        x, w = np.polynomial.legendre.leggauss(order)
        rule = (x, w)
        _GAUSS_CACHE[order] = rule
    return rule


def _eval_panels(f, lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
    """Gauss-Legendre estimates for a batch of panels, one f call total."""
    x, w = _gauss_rule(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=complex).reshape(nodes.shape)
    return (vals @ w) * half


def _graded_edges(a: float, b: float, left: bool, right: bool, levels: int = 44) -> np.ndarray:
    """Panel edges geometrically refined toward singular endpoints.

    Each level halves the distance to the endpoint; 44 levels push the
    innermost panel to ~6e-14 of the range, deep enough for the tolerances
    in use while keeping nodes representable away from the endpoint.
    """
    if not (left or right):
        return np.array([a, b])
    if left and right:
        m = 0.5 * (a + b)
        lo = _graded_edges(a, m, True, False, levels)
        hi = _graded_edges(m, b, False, True, levels)
        return np.concatenate([lo, hi[1:]])
    frac = np.concatenate([[0.0], 2.0 ** np.arange(-levels, 1, dtype=float)])
    if left:
        return a + (b - a) * frac
    return b - (b - a) * frac[::-1]


def _adaptive(f, edges: np.ndarray, spec: QuadratureSpec) -> complex:
    """Globally adaptive refinement over an initial panel partition.

    The per-panel error estimate is the difference between the full-order
    and half-order Gauss-Legendre rules.  The worst panel is bisected until
    the summed error estimate meets the target or the budget runs out.
    """
    order_hi = spec.nodes_per_panel
    order_lo = max(4, spec.nodes_per_panel // 2)
    lo, hi = edges[:-1], edges[1:]
    est_hi = _eval_panels(f, lo, hi, order_hi)
    est_lo = _eval_panels(f, lo, hi, order_lo)
    if not (np.all(np.isfinite(est_hi)) and np.all(np.isfinite(est_lo))):
        raise NonConvergence("integrand evaluated to a non-finite value")
    errs = np.abs(est_hi - est_lo)

    heap: list[tuple[float, int, float, float, complex, float]] = []
    seq = 0
    total = complex(0.0)
    total_err = 0.0
    for a, b, v, e in zip(lo, hi, est_hi, errs):
        heapq.heappush(heap, (-e, seq, a, b, v, e))
        seq += 1
        total += v
        total_err += e
    n_panels = len(heap)

    while True:
        target = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= target:
            return total
        if n_panels + 1 > spec.max_panels or not heap:
            raise NonConvergence(
                f"quadrature stalled at {n_panels} panels, "
                f"error {total_err:.3e} > target {target:.3e}"
            )
        _, _, a, b, v, e = heapq.heappop(heap)
        m = 0.5 * (a + b)
        sub_lo = np.array([a, m])
        sub_hi = np.array([m, b])
        child_hi = _eval_panels(f, sub_lo, sub_hi, order_hi)
        child_lo = _eval_panels(f, sub_lo, sub_hi, order_lo)
        if not (np.all(np.isfinite(child_hi)) and np.all(np.isfinite(child_lo))):
            raise NonConvergence("integrand evaluated to a non-finite value")
        child_err = np.abs(child_hi - child_lo)
        total += child_hi.sum() - v
        total_err += child_err.sum() - e
        for i in range(2):
            heapq.heappush(heap, (-child_err[i], seq, sub_lo[i], sub_hi[i], child_hi[i], child_err[i]))
            seq += 1
        n_panels += 1


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    *,
    singular_left: bool = False,
    singular_right: bool = False,
) -> complex:
    """Integral of f over [a, b].

    f must accept a numpy array of abscissae and return values elementwise
    (real or complex).  Set singular_left / singular_right when the
    integrand has an integrable singularity at that endpoint; the initial
    partition is then geometrically graded toward it.
    """
    if a > b:
        raise ValueError("integrate requires a <= b")
    if a == b:
        return 0.0 + 0.0j
    edges = _graded_edges(a, b, singular_left, singular_right)
    return _adaptive(f, edges, spec)


def integrate_oscillatory(
    f_smooth: Callable[[np.ndarray], np.ndarray],
    phase_rate: float,
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Integral of f_smooth(k) * exp(i * phase_rate * k) over [a, b].

    The initial partition assigns at least one panel (hence nodes_per_panel
    nodes) per oscillation period, after which the usual adaptive refinement
    applies.  Falls back to plain integration when the phase is slow.
    """
    if a > b:
        raise ValueError("integrate_oscillatory requires a <= b")
    if a == b:
        return 0.0 + 0.0j
    periods = abs(phase_rate) * (b - a) / (2.0 * np.pi)
    n0 = int(np.ceil(periods)) + 1
    if n0 > spec.max_panels:
        raise NonConvergence(
            f"phase rate {phase_rate:g} needs {n0} panels, budget is {spec.max_panels}"
        )
    if phase_rate == 0.0:
        return _adaptive(f_smooth, np.array([a, b]), spec)

    def g(k: np.ndarray) -> np.ndarray:
        return np.asarray(f_smooth(k), dtype=complex) * np.exp(1j * phase_rate * k)

    edges = np.linspace(a, b, n0 + 1)
    return _adaptive(g, edges, spec)


def _fixed_grid(a: float, b: float, n_panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a uniform composite Gauss-Legendre rule."""
    x, w = _gauss_rule(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_oscillatory_batch(
    f_smooth: Callable[[np.ndarray], np.ndarray],
    phase_rates,
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> np.ndarray:
    """Integrals of f_smooth(k) * exp(i * rate * k) for a batch of rates.

    All rates share one composite Gauss-Legendre grid sized for the fastest
    phase (so every rate gets at least nodes_per_panel nodes per period) and
    a single evaluation of f_smooth; each integral is then a weighted phase
    sum.  Agreement between the grid and its twice-refined version is
    required to the spec tolerance, doubling further until the budget runs
    out.  Equivalent to calling integrate_oscillatory per rate, at a small
    fraction of the cost when the batch is large.
    """
    rates = np.asarray(phase_rates, dtype=float)
    if rates.size == 0:
        return np.zeros(0, dtype=complex)
    if a > b:
        raise ValueError("integrate_oscillatory_batch requires a <= b")
    if a == b:
        return np.zeros(rates.shape, dtype=complex)
    rate_max = float(np.abs(rates).max())
    n0 = int(np.ceil(rate_max * (b - a) / (2.0 * np.pi))) + 1

    def eval_on(n_panels: int) -> np.ndarray:
        nodes, weights = _fixed_grid(a, b, n_panels, spec.nodes_per_panel)
        base = np.asarray(f_smooth(nodes), dtype=complex) * weights
        out = np.empty(rates.shape, dtype=complex)
        for start in range(0, rates.size, 64):
            chunk = rates[start : start + 64]
            out[start : start + 64] = np.exp(1j * np.outer(chunk, nodes)) @ base
        return out

    if 2 * n0 > spec.max_panels:
        raise NonConvergence(
            f"batch with max rate {rate_max:g} needs {2 * n0} panels, budget is {spec.max_panels}"
        )
    coarse = eval_on(n0)
    while True:
        fine = eval_on(2 * n0)
        err = np.abs(fine - coarse)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(fine))
        if bool(np.all(err <= tol)):
            return fine
        n0 *= 2
        if 2 * n0 > spec.max_panels:
            raise NonConvergence(
                f"batch error {float(err.max()):.3e} above target with {n0} panels"
            )
        coarse = fine


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError("expected a square matrix of dimension >= 1")
    return a


def eig_hermitian(m, herm_tol: float = 1e-10) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    The matrix must satisfy ||M - M^dag||_max <= herm_tol * max(1, ||M||_max);
    it is symmetrized to (M + M^dag)/2 before solving, since quadrature noise
    breaks exact Hermiticity at the 1e-12 level.
    """
    a = _as_matrix(m)
    scale = max(1.0, float(np.abs(a).max()))
    dev = float(np.abs(a - a.conj().T).max())
    if dev > herm_tol * scale:
        raise NotHermitian(f"Hermiticity deviation {dev:.3e} exceeds {herm_tol * scale:.3e}")
    sym = 0.5 * (a + a.conj().T)
    return np.linalg.eigvalsh(sym)


def eig_general(m) -> np.ndarray:
    """Eigenvalue multiset of a general complex matrix (unordered)."""
    a = _as_matrix(m)
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NonConvergence(f"eigenvalue iteration failed: {exc}") from exc


def mat_mul(a, b) -> np.ndarray:
    x = _as_matrix(a)
    y = _as_matrix(b)
    if x.shape[1] != y.shape[0]:
        raise ValueError("incompatible shapes for matrix product")
    return x @ y


def mat_inverse(m) -> np.ndarray:
    """Inverse with an explicit residual check: ||M M^-1 - I||_max <= 1e-9 * dim."""
    a = _as_matrix(m)
    dim = a.shape[0]
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise Singular(f"matrix is singular: {exc}") from exc
    residual = float(np.abs(a @ inv - np.eye(dim)).max())
    if not np.isfinite(residual) or residual > 1e-9 * dim:
        raise Singular(f"inverse residual {residual:.3e} exceeds {1e-9 * dim:.3e}")
    return inv
