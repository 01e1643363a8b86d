"""Two-point correlation matrices of the biased steady state.

The steady state fills left-incoming scattering states up to k_fl and
right-incoming ones up to k_fr, so the two-point function is

    <c_j^dag c_m> = int_{-k_fr}^{k_fl} dk/2pi  u_j(k)^* u_m(k),

with u_m(k) the scattering-state amplitudes.  Expanding the product of
amplitudes gives a handful of terms of the form f(k) * exp(i*x*k) with x an
integer combination of the site indices; each term is evaluated with the
oscillatory quadrature at its exact phase rate.  Identical (window, factor,
phase) triples recur across matrix entries, so both builders memoize them.

Two regimes are implemented:

* ``FiniteDistance``: the integral above, entry by entry.
* ``FarLimit``: the limit d_i/ell_i -> infinity at fixed d_l - d_r, where
  all terms whose phase grows with d_i average out (Riemann-Lebesgue) and
  the matrix becomes block-Toeplitz.  With indices counted outward from the
  scatterer on both sides, and writing W_T(x) and W_X(x) for the signed
  voltage-window integrals of T(k) e^{ikx} and t_l(k)^* r_l(k) e^{ikx},

      within A_R:  sea(k_fr, j-m) + W_T(m-j)
      within A_L:  sea(k_fl, j-m) - W_T(m-j)
      A_R row j, A_L column m:  W_X(d_l - d_r - j + m)

  where sea(kf, x) = sin(kf x)/(pi x) is the filled-sea kernel.  Only the
  voltage window contributes to the cross block; for k_fl = k_fr it vanishes
  identically.  The signed convention makes the same expressions valid for
  either sign of k_fl - k_fr.

Index convention: within each block, row/column 1 is the site nearest the
scatterer and indices ascend away from it.  A flipped convention would
silently conjugate the cross block.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .numerics import QuadratureSpec, integrate_oscillatory, integrate_oscillatory_batch
from .scattering import BiasState, ScatteringModel

__all__ = [
    "SubsystemGeometry",
    "CorrelationMatrix",
    "mirror_overlap",
    "correlation_entry_finite",
    "correlation_matrix_finite",
    "correlation_matrix_far",
    "CorrelationBuilder",
    "FarLimitBuilder",
    "write_matrix_dump",
    "read_matrix_dump",
]

#: entries need to resolve 1/d^2 tails of the measures, so they are computed
#: a few digits tighter than the default
ENTRY_SPEC = QuadratureSpec(abs_tol=1e-11, rel_tol=0.0, max_panels=60000, nodes_per_panel=16)

Subsystem = Literal["A_L", "A_R", "A"]


@dataclass(frozen=True)
class SubsystemGeometry:
    """Distances and lengths of the two intervals, counted from the scatterer.

    A_L holds the sites -(m0+d_l+1) .. -(m0+d_l+ell_l) and A_R the sites
    +(m0+d_r+1) .. +(m0+d_r+ell_r).
    """

    m0: int = 0
    d_l: int = 0
    ell_l: int = 1
    d_r: int = 0
    ell_r: int = 1

    def __post_init__(self) -> None:
        if self.m0 < 0 or self.d_l < 0 or self.d_r < 0:
            raise ValueError("m0 and distances must be non-negative")
        if self.ell_l < 1 or self.ell_r < 1:
            raise ValueError("interval lengths must be at least 1")

    @property
    def ell_mirror(self) -> int:
        """Number of site pairs (-m, m) with one member in each interval."""
        lo = max(self.d_l, self.d_r)
        hi = min(self.d_l + self.ell_l, self.d_r + self.ell_r)
        return max(hi - lo, 0)

    @property
    def delta_ell_l(self) -> int:
        return self.ell_l - self.ell_mirror

    @property
    def delta_ell_r(self) -> int:
        return self.ell_r - self.ell_mirror

    @property
    def sorted_lengths(self) -> tuple[int, int, int, int]:
        """d_l, d_l+ell_l, d_r, d_r+ell_r in ascending order."""
        return tuple(sorted((self.d_l, self.d_l + self.ell_l, self.d_r, self.d_r + self.ell_r)))

    @property
    def is_symmetric(self) -> bool:
        return self.d_l == self.d_r and self.ell_l == self.ell_r

    def sites_left(self) -> tuple[int, ...]:
        base = self.m0 + self.d_l
        return tuple(-(base + j) for j in range(1, self.ell_l + 1))

    def sites_right(self) -> tuple[int, ...]:
        base = self.m0 + self.d_r
        return tuple(base + j for j in range(1, self.ell_r + 1))


def mirror_overlap(geom: SubsystemGeometry) -> tuple[int, int, int]:
    """(ell_mirror, delta_ell_l, delta_ell_r) of the geometry."""
    return geom.ell_mirror, geom.delta_ell_l, geom.delta_ell_r


@dataclass(frozen=True)
class CorrelationMatrix:
    """Correlation matrix restricted to A_L u A_R, with partition metadata.

    Rows/columns run over sites_left then sites_right, each ordered outward
    from the scatterer.  Either site list may be empty.
    """

    matrix: np.ndarray
    sites_left: tuple[int, ...] = ()
    sites_right: tuple[int, ...] = ()
    regime: str = "finite"

    def __post_init__(self) -> None:
        dim = len(self.sites_left) + len(self.sites_right)
        if self.matrix.shape != (dim, dim):
            raise ValueError("matrix shape does not match the site partition")

    @property
    def n_left(self) -> int:
        return len(self.sites_left)

    @property
    def n_right(self) -> int:
        return len(self.sites_right)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def block_left(self) -> "CorrelationMatrix":
        n = self.n_left
        return CorrelationMatrix(self.matrix[:n, :n], self.sites_left, (), self.regime)

    def block_right(self) -> "CorrelationMatrix":
        n = self.n_left
        return CorrelationMatrix(self.matrix[n:, n:], (), self.sites_right, self.regime)

    def cross_block(self) -> np.ndarray:
        """<c_L^dag c_R> block (rows A_L, columns A_R)."""
        n = self.n_left
        return self.matrix[:n, n:]


# ---------------------------------------------------------------------------
# finite-distance regime


class CorrelationBuilder:
    """Entrywise evaluator of <c_j^dag c_m> with memoized window integrals.

    Each wavefunction product splits into terms f(k) exp(i*x*k) over the two
    occupied windows (0, k_fl) and (0, k_fr); the integral of every distinct
    (window, factor, phase) triple is computed once and cached, which makes
    assembling a full matrix cheap since entries share phases through j - m
    and j + m.
    """

    def __init__(self, model: ScatteringModel, bias: BiasState, spec: QuadratureSpec = ENTRY_SPEC):
        self.model = model
        self.bias = bias
        self.spec = spec
        self._cache: dict[tuple[str, str, int], complex] = {}

    # smooth prefactors by key; arrays in, arrays out
    def _factor(self, key: str, k: np.ndarray) -> np.ndarray:
        r_l, t_r, t_l, r_r = self.model.amplitudes(k)
        if key == "one":
            return np.ones_like(k, dtype=complex)
        if key == "T":
            return np.abs(t_l) ** 2
        if key == "R":
            return 1.0 - np.abs(t_l) ** 2
        if key == "rL":
            return r_l
        if key == "rLc":
            return np.conj(r_l)
        if key == "rR":
            return r_r
        if key == "rRc":
            return np.conj(r_r)
        if key == "tLc":
            return np.conj(t_l)
        if key == "tLc_rL":
            return np.conj(t_l) * r_l
        if key == "tR":
            return t_r
        if key == "tR_rRc":
            return t_r * np.conj(r_r)
        raise KeyError(key)

    def window_integral(self, window: str, key: str, rate: int) -> complex:
        """(1/2pi) * int_0^K f_key(k) exp(i*rate*k) dk with K = k_fl or k_fr."""
        memo_key = (window, key, rate)
        val = self._cache.get(memo_key)
        if val is None:
            upper = self.bias.k_fl if window == "L" else self.bias.k_fr
            val = integrate_oscillatory(
                lambda k: self._factor(key, k), rate, 0.0, upper, self.spec
            ) / (2.0 * np.pi)
            self._cache[memo_key] = val
        return val

    def prefetch(self, terms) -> None:
        """Batch-evaluate any uncached (window, key, rate) triples.

        Groups the terms by integrand family, so one f evaluation on a shared
        panel grid covers every phase in the family; assembling a matrix this
        way costs a few batched integrals instead of thousands of scalar ones.
        """
        grouped: dict[tuple[str, str], set[int]] = {}
        for window, key, rate in terms:
            if (window, key, rate) not in self._cache:
                grouped.setdefault((window, key), set()).add(rate)
        for (window, key), rates in grouped.items():
            upper = self.bias.k_fl if window == "L" else self.bias.k_fr
            ordered = sorted(rates)
            vals = integrate_oscillatory_batch(
                lambda k: self._factor(key, k), ordered, 0.0, upper, self.spec
            ) / (2.0 * np.pi)
            for rate, val in zip(ordered, vals):
                self._cache[(window, key, rate)] = complex(val)

    def _terms(self, j: int, m: int) -> list[tuple[str, str, int]]:
        """Decomposition of u_j(k)^* u_m(k) integrated over the filled state.

        Window "L" covers left-incoming states on (0, k_fl); window "R"
        covers right-incoming states after the substitution k -> -k, which
        conjugates every exponent.
        """
        m0 = self.model.m0
        j_right = j > m0
        m_right = m > m0
        if j_right and m_right:
            return [
                ("L", "T", m - j),
                ("R", "one", j - m),
                ("R", "rR", j + m),
                ("R", "rRc", -(j + m)),
                ("R", "R", m - j),
            ]
        if not j_right and not m_right:
            return [
                ("L", "one", m - j),
                ("L", "rL", -(j + m)),
                ("L", "rLc", j + m),
                ("L", "R", j - m),
                ("R", "T", j - m),
            ]
        # j on the right, m on the left
        return [
            ("L", "tLc", m - j),
            ("L", "tLc_rL", -(j + m)),
            ("R", "tR", j - m),
            ("R", "tR_rRc", -(j + m)),
        ]

    def entry(self, j: int, m: int) -> complex:
        m0 = self.model.m0
        if abs(j) <= m0 or abs(m) <= m0:
            raise ValueError(f"sites must satisfy |site| > m0={m0}")
        if j < -m0 and m > m0:
            return np.conj(self.entry(m, j))
        return sum(self.window_integral(*term) for term in self._terms(j, m))


def correlation_entry_finite(
    model: ScatteringModel,
    bias: BiasState,
    j: int,
    m: int,
    spec: QuadratureSpec = ENTRY_SPEC,
) -> complex:
    """Steady-state <c_j^dag c_m> for sites outside the scattering region."""
    return CorrelationBuilder(model, bias, spec).entry(j, m)


def _partition_sites(geom: SubsystemGeometry, which: Subsystem) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if which == "A_L":
        return geom.sites_left(), ()
    if which == "A_R":
        return (), geom.sites_right()
    if which == "A":
        return geom.sites_left(), geom.sites_right()
    raise ValueError(f"unknown subsystem {which!r}")


def correlation_matrix_finite(
    model: ScatteringModel,
    bias: BiasState,
    geom: SubsystemGeometry,
    which: Subsystem = "A",
    spec: QuadratureSpec = ENTRY_SPEC,
    builder: CorrelationBuilder | None = None,
) -> CorrelationMatrix:
    """Finite-distance correlation matrix of the selected subsystem.

    The upper triangle is computed and mirrored by conjugation, so the result
    is Hermitian by construction.  Passing a shared ``builder`` reuses its
    integral cache across matrices (useful for sweeps over nearby distances).
    """
    left, right = _partition_sites(geom, which)
    sites = left + right
    n = len(sites)
    if builder is None:
        builder = CorrelationBuilder(model, bias, spec)
    needed = []
    for a in range(n):
        for b in range(a, n):
            j, m = sites[a], sites[b]
            if j < -model.m0 and m > model.m0:
                j, m = m, j
            needed.extend(builder._terms(j, m))
    builder.prefetch(needed)
    out = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(a, n):
            val = builder.entry(sites[a], sites[b])
            out[a, b] = val
            if b != a:
                out[b, a] = np.conj(val)
            else:
                out[a, a] = val.real
    return CorrelationMatrix(out, left, right, regime="finite")


# ---------------------------------------------------------------------------
# far limit


def _sea_kernel(kf: float, x: int) -> float:
    """Filled-sea kernel sin(kf x)/(pi x), with the x = 0 limit kf/pi."""
    if x == 0:
        return kf / np.pi
    return np.sin(kf * x) / (np.pi * x)


class FarLimitBuilder:
    """Memoized voltage-window integrals of the far-limit block entries."""

    def __init__(self, model: ScatteringModel, bias: BiasState, spec: QuadratureSpec = ENTRY_SPEC):
        self.model = model
        self.bias = bias
        self.spec = spec
        # signed window: integrals run from k_fr to k_fl
        self._sign = 1.0 if bias.k_fl >= bias.k_fr else -1.0
        self._wt: dict[int, complex] = {}
        self._wx: dict[int, complex] = {}

    def _window(self, f, rate: int) -> complex:
        lo, hi = self.bias.k_minus, self.bias.k_plus
        if hi == lo:
            return 0.0 + 0.0j
        val = integrate_oscillatory(f, rate, lo, hi, self.spec) / (2.0 * np.pi)
        return self._sign * val

    def transmission_integral(self, x: int) -> complex:
        """W_T(x): signed window integral of T(k) exp(i k x) / 2pi."""
        val = self._wt.get(x)
        if val is None:
            val = self._window(lambda k: np.abs(self.model.amplitudes(k)[2]) ** 2, x)
            self._wt[x] = val
        return val

    def cross_integral(self, x: int) -> complex:
        """W_X(x): signed window integral of t_l(k)^* r_l(k) exp(i k x) / 2pi."""
        val = self._wx.get(x)
        if val is None:

            def f(k):
                r_l, _, t_l, _ = self.model.amplitudes(k)
                return np.conj(t_l) * r_l

            val = self._window(f, x)
            self._wx[x] = val
        return val

    def entry_left(self, j: int, m: int) -> complex:
        """Within A_L, indices counted outward from the scatterer."""
        return _sea_kernel(self.bias.k_fl, j - m) - self.transmission_integral(m - j)

    def entry_right(self, j: int, m: int) -> complex:
        """Within A_R, indices counted outward from the scatterer."""
        return _sea_kernel(self.bias.k_fr, j - m) + self.transmission_integral(m - j)

    def entry_cross(self, j: int, m: int, d_l: int, d_r: int) -> complex:
        """<c^dag_(A_R site j) c_(A_L site m)>; depends on d_l - d_r only."""
        return self.cross_integral(d_l - d_r - j + m)


def correlation_matrix_far(
    model: ScatteringModel,
    bias: BiasState,
    geom: SubsystemGeometry,
    which: Subsystem = "A",
    spec: QuadratureSpec = ENTRY_SPEC,
    builder: FarLimitBuilder | None = None,
) -> CorrelationMatrix:
    """Far-limit correlation matrix (d_i / ell_i -> infinity, d_l - d_r fixed).

    Within-block entries are Toeplitz; the cross block carries the phase
    exp(i k (d_l - d_r)) through its shifted argument and vanishes when the
    voltage window is empty.
    """
    left, right = _partition_sites(geom, which)
    nl, nr = len(left), len(right)
    if builder is None:
        builder = FarLimitBuilder(model, bias, spec)

    out = np.zeros((nl + nr, nl + nr), dtype=complex)
    if nl:
        col = np.array([builder.entry_left(j, 1) for j in range(1, nl + 1)])
        row = np.conj(col)
        block = _toeplitz(col, row)
        block[np.diag_indices(nl)] = block.diagonal().real
        out[:nl, :nl] = block
    if nr:
        col = np.array([builder.entry_right(j, 1) for j in range(1, nr + 1)])
        block = _toeplitz(col, np.conj(col))
        block[np.diag_indices(nr)] = block.diagonal().real
        out[nl:, nl:] = block
    if nl and nr:
        rl = np.array(
            [[builder.entry_cross(j, m, geom.d_l, geom.d_r) for m in range(1, nl + 1)]
             for j in range(1, nr + 1)]
        )
        out[nl:, :nl] = rl
        out[:nl, nl:] = rl.conj().T
    return CorrelationMatrix(out, left, right, regime="far")


def _toeplitz(col: np.ndarray, row: np.ndarray) -> np.ndarray:
    """Toeplitz matrix from first column and first row (row[0] ignored)."""
    n = len(col)
    idx = np.subtract.outer(np.arange(n), np.arange(n))
    vals = np.concatenate([row[:0:-1], col])
    return vals[idx + n - 1].copy()


# ---------------------------------------------------------------------------
# debugging dump: dim as uint64 LE, then row-major complex pairs as float64 LE


def write_matrix_dump(cm: CorrelationMatrix, path) -> None:
    a = np.ascontiguousarray(cm.matrix, dtype=complex)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", a.shape[0]))
        pairs = np.empty((a.size, 2), dtype="<f8")
        pairs[:, 0] = a.real.ravel()
        pairs[:, 1] = a.imag.ravel()
        fh.write(pairs.tobytes())


def read_matrix_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (dim,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(16 * dim * dim), dtype="<f8").reshape(dim * dim, 2)
    return (data[:, 0] + 1j * data[:, 1]).reshape(dim, dim)
