"""Entanglement measures of Gaussian fermion states from correlation matrices.

For a non-interacting state every reduced density matrix is Gaussian, so all
measures follow from the eigenvalues nu of the restricted correlation matrix:

    Renyi:        S_n = 1/(1-n) * sum ln[nu^n + (1-nu)^n]
    von Neumann:  S   = -sum [nu ln nu + (1-nu) ln(1-nu)]

Mutual information is S(A_L) + S(A_R) - S(A) and the coherent information is
fixed to the direction I(A_L > A_R) = S(A_R) - S(A).

The fermionic negativity uses the partial time-reversal of one block.  With
C_A = [[C_LL, C_LR], [C_RL, C_RR]] one forms

    Gamma_pm = [[2 C_LL - I, -/+ 2i C_LR], [-/+ 2i C_RL, I - 2 C_RR]]
    C_X = (I - (I + Gamma_+ Gamma_-)^(-1) (Gamma_+ + Gamma_-)) / 2

and the moments

    E_n = ln det[C_X^(n/2) + (I - C_X)^(n/2)]
        + (n/2) ln det[C_A^2 + (I - C_A)^2].

The negativity itself is E_1, evaluated directly with principal-branch square
roots rather than by extrapolating even moments; even n stays available for
oracle tests.  C_X is not Hermitian, so its spectrum is taken with the
general eigensolver; the imaginary residue of the result is asserted small
and reported in the diagnostics instead of being silently discarded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationMatrix
from .numerics import NumericsError, Singular, eig_general, eig_hermitian, mat_inverse

__all__ = [
    "SpectrumError",
    "SingularResolvent",
    "ImaginaryResidue",
    "EntanglementReport",
    "occupation_spectrum",
    "renyi_entropy",
    "von_neumann_entropy",
    "entropy",
    "entropy_from_spectrum",
    "correlation_moments",
    "measures",
    "fermionic_negativity",
]

#: eigenvalues may stray outside [0, 1] by at most this much before erroring
CLAMP_SLACK = 1e-8

#: tolerated imaginary part of the negativity and of C_X eigenvalues
IMAG_TOL = 1e-7


class SpectrumError(ValueError):
    """Correlation-matrix spectrum outside [0, 1] beyond the clamping slack."""


class SingularResolvent(NumericsError):
    """I + Gamma_+ Gamma_- is numerically singular."""


class ImaginaryResidue(NumericsError):
    """Imaginary part of the negativity exceeded the tolerance."""


@dataclass
class EntanglementReport:
    """Measures of one parameter point, plus numerical diagnostics."""

    renyi_order: float | str
    s_al: float
    s_ar: float
    s_a: float
    mutual_info: float
    coherent_info: float
    negativity: float | None = None
    max_imag_residue: float = 0.0
    clamp_count: int = 0


def _matrix_of(c) -> np.ndarray:
    if isinstance(c, CorrelationMatrix):
        return c.matrix
    return np.asarray(c, dtype=complex)


def occupation_spectrum(c, clamp_slack: float = CLAMP_SLACK) -> tuple[np.ndarray, int]:
    """Eigenvalues of a correlation matrix clamped to [0, 1].

    Values within clamp_slack of the interval are clamped; anything further
    out raises SpectrumError, since log(negative) must be impossible yet a
    genuine spectral violation has to surface.
    """
    nu = eig_hermitian(_matrix_of(c))
    low = nu < 0.0
    high = nu > 1.0
    if np.any(nu < -clamp_slack) or np.any(nu > 1.0 + clamp_slack):
        worst = nu.min() if -nu.min() > nu.max() - 1.0 else nu.max()
        raise SpectrumError(f"correlation eigenvalue {worst} outside [0, 1] beyond slack")
    clamped = int(low.sum() + high.sum())
    return np.clip(nu, 0.0, 1.0), clamped


def renyi_entropy(c, n: float) -> float:
    """Order-n Renyi entropy from the correlation spectrum (n > 0, n != 1)."""
    if not n > 0 or n == 1:
        raise ValueError("Renyi order must be positive and different from 1")
    nu, _ = occupation_spectrum(c)
    interior = nu[(nu > 0.0) & (nu < 1.0)]
    if interior.size == 0:
        return 0.0
    return float(np.log(interior**n + (1.0 - interior) ** n).sum() / (1.0 - n))


def von_neumann_entropy(c) -> float:
    nu, _ = occupation_spectrum(c)
    interior = nu[(nu > 0.0) & (nu < 1.0)]
    if interior.size == 0:
        return 0.0
    return float(-(interior * np.log(interior) + (1.0 - interior) * np.log1p(-interior)).sum())


def entropy(c, order: float | str) -> float:
    """Renyi entropy of the given order, or von Neumann for order "vn"."""
    if order == "vn" or order == 1:
        return von_neumann_entropy(c)
    return renyi_entropy(c, float(order))


def entropy_from_spectrum(nu: np.ndarray, order: float | str) -> float:
    """Entropy evaluated directly on a clamped occupation spectrum."""
    interior = nu[(nu > 0.0) & (nu < 1.0)]
    if interior.size == 0:
        return 0.0
    if order == "vn" or order == 1:
        return float(-(interior * np.log(interior) + (1 - interior) * np.log1p(-interior)).sum())
    n = float(order)
    if not n > 0 or n == 1:
        raise ValueError("Renyi order must be positive and different from 1")
    return float(np.log(interior**n + (1.0 - interior) ** n).sum() / (1.0 - n))


def correlation_moments(c, p: int) -> float:
    """Tr[C^p] by repeated matrix multiplication."""
    if p < 1:
        raise ValueError("moment order must be a positive integer")
    a = _matrix_of(c)
    power = a.copy()
    for _ in range(p - 1):
        power = power @ a
    return float(np.trace(power).real)


#: imaginary parts below this are floating-point noise, not spectrum content
IMAG_NOISE_FLOOR = 1e-12


def _cleaned_spectrum(xi: np.ndarray) -> np.ndarray:
    """Drop machine-noise imaginary parts and clamp tiny negatives to 0.

    Fractional powers amplify noise around the branch point: an eigenvalue
    that is really 0 but comes back as -1e-13 or +1e-16j would contribute
    sqrt-of-that, 1e-7 in the worst case.  Only sub-noise-floor imaginary
    parts are discarded; anything larger flows through to the residue check.
    """
    z = xi.astype(complex).copy()
    real = np.abs(z.imag) < IMAG_NOISE_FLOOR
    z[real] = z[real].real
    fix = real & (z.real > -CLAMP_SLACK) & (z.real < 0.0)
    z[fix] = 0.0
    return z


def _principal_power(z: np.ndarray, exponent: float) -> np.ndarray:
    return z.astype(complex) ** exponent


def _negativity_detail(c: CorrelationMatrix, n: float) -> tuple[float, float, float]:
    """(value, max |Im| of C_X spectrum, |Im| of the raw result)."""
    if c.n_left == 0 or c.n_right == 0:
        raise ValueError("fermionic negativity needs both blocks non-empty")
    if n != 1 and (n < 2 or int(n) != n or int(n) % 2 != 0):
        raise ValueError("negativity order must be 1 or an even integer")
    a = c.matrix
    nl = c.n_left
    dim = a.shape[0]
    cll, clr = a[:nl, :nl], a[:nl, nl:]
    crl, crr = a[nl:, :nl], a[nl:, nl:]
    eye = np.eye(dim, dtype=complex)

    def gamma(sign: float) -> np.ndarray:
        g = np.zeros((dim, dim), dtype=complex)
        g[:nl, :nl] = 2.0 * cll - np.eye(nl)
        g[nl:, nl:] = np.eye(dim - nl) - 2.0 * crr
        g[:nl, nl:] = sign * 2j * clr
        g[nl:, :nl] = sign * 2j * crl
        return g

    g_plus = gamma(-1.0)
    g_minus = gamma(+1.0)
    try:
        resolvent = mat_inverse(eye + g_plus @ g_minus)
    except Singular as exc:
        raise SingularResolvent(str(exc)) from exc
    c_x = 0.5 * (eye - resolvent @ (g_plus + g_minus))

    xi = eig_general(c_x)
    max_imag_eig = float(np.abs(xi.imag).max()) if xi.size else 0.0
    half = n / 2.0
    xi_lo = _cleaned_spectrum(xi)
    xi_hi = _cleaned_spectrum(1.0 - xi)
    first = np.log(_principal_power(xi_lo, half) + _principal_power(xi_hi, half)).sum()

    nu, _ = occupation_spectrum(c)
    second = half * np.log(nu**2 + (1.0 - nu) ** 2).sum()

    total = first + second
    imag_residue = abs(float(total.imag))
    if imag_residue > IMAG_TOL:
        raise ImaginaryResidue(f"negativity imaginary residue {imag_residue:.3e}")
    return float(total.real), max_imag_eig, imag_residue


def fermionic_negativity(c: CorrelationMatrix, n: float = 1) -> float:
    """Logarithmic fermionic negativity (n = 1) or the even moment E_n."""
    value, _, _ = _negativity_detail(c, n)
    return value


def measures(
    c: CorrelationMatrix,
    order: float | str = "vn",
    with_negativity: bool = False,
) -> EntanglementReport:
    """Entropies of the two blocks and of the union, assembled into MI and CI.

    The coherent information direction is I(A_L > A_R) = S(A_R) - S(A).
    """
    if c.n_left == 0 or c.n_right == 0:
        raise ValueError("measures needs both blocks in the partition")
    nu_a, clamp_a = occupation_spectrum(c)
    nu_l, clamp_l = occupation_spectrum(c.block_left())
    nu_r, clamp_r = occupation_spectrum(c.block_right())
    s_al = entropy_from_spectrum(nu_l, order)
    s_ar = entropy_from_spectrum(nu_r, order)
    s_a = entropy_from_spectrum(nu_a, order)
    report = EntanglementReport(
        renyi_order=order,
        s_al=s_al,
        s_ar=s_ar,
        s_a=s_a,
        mutual_info=s_al + s_ar - s_a,
        coherent_info=s_ar - s_a,
        clamp_count=clamp_a + clamp_l + clamp_r,
    )
    if with_negativity:
        value, max_imag_eig, imag_residue = _negativity_detail(c, 1)
        report.negativity = value
        report.max_imag_residue = max(max_imag_eig, imag_residue)
    return report
