"""Phase-space ensembles, doubled-coordinate kernels and coefficient matrices.

Conventions
-----------
The momentum transform is ``f(x, p) = int dy exp(-i p y) f(x, y)``, with
inverse ``f(x, y) = (1/2pi) int dp exp(i p y) f(x, p)``.  The doubled
coordinates are ``Q = x + y/2`` and ``q = x - y/2``.  Phase-space integrals
carry the measure ``dx dp / 2pi``, so a normalized ensemble has a kernel of
unit trace.

The kernel lives on the spatial grid in both arguments.  Entries with
``Q_a + q_b`` on a grid node (``a + b`` even) need no interpolation; the
others sit at mid-nodes in ``x`` and use the four-point midpoint stencil.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionMismatch, GridError, HermiticityError,
                     NonHermitianError, TruncationWarning, ZeroMassError)
from .spectral import SpatialGrid, SpectralBasis

HERMITIAN_TOL = 1e-10


def _trapz_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform momentum grid; not bound by the 64-point rule of positions."""

    p_min: float
    p_max: float
    n_points: int

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_points)

    @property
    def h(self) -> float:
        return (self.p_max - self.p_min) / (self.n_points - 1)

    @property
    def weights(self) -> np.ndarray:
        return _trapz_weights(self.n_points, self.h)


def momentum_grid(xgrid: SpatialGrid, p_max: float, n_points: int | None = None) -> MomentumGrid:
    """Symmetric momentum grid fine enough for ``xgrid``'s extent.

    The spacing obeys ``dp * (x_max - x_min) <= pi`` so the discrete momentum
    integral does not alias separations up to the full grid width.
    """
    if n_points is None:
        n_points = int(math.ceil(2 * p_max * xgrid.length / math.pi)) + 1
        n_points += 1 - n_points % 2
    return MomentumGrid(-float(p_max), float(p_max), int(n_points))


@dataclass(frozen=True, eq=False)
class PhaseSpaceDistribution:
    xgrid: SpatialGrid
    pgrid: MomentumGrid
    values: np.ndarray          # shape (nx, np), real

    def integrate(self, weight=None) -> float:
        """``int dx dp / 2pi  weight(x, p) f(x, p)`` by the trapezoidal rule."""
        f = self.values
        if weight is not None:
            f = f * weight
        wx = self.xgrid.weights
        wp = self.pgrid.weights
        return float(wx @ f @ wp) / (2 * math.pi)

    def mean(self, kind: str) -> float:
        """Direct phase-space average of ``x``, ``p`` or ``x p``."""
        X, P = np.meshgrid(self.xgrid.x, self.pgrid.p, indexing="ij")
        weight = {"x": X, "p": P, "xp": X * P}[kind]
        return self.integrate(weight)

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        """Position and momentum marginals (each integrates to one)."""
        fx = self.values @ self.pgrid.weights / (2 * math.pi)
        fp = self.xgrid.weights @ self.values / (2 * math.pi)
        return fx, fp


def normalize(f: PhaseSpaceDistribution) -> PhaseSpaceDistribution:
    mass = f.integrate()
    if abs(mass) < 1e-14:
        raise ZeroMassError("distribution integrates to zero")
    if mass == 1.0:
        return f
    return PhaseSpaceDistribution(f.xgrid, f.pgrid, f.values / mass)


def gaussian_distribution(xgrid: SpatialGrid, pgrid: MomentumGrid, x0=0.0, p0=0.0,
                          sx=math.sqrt(0.5), sp=math.sqrt(0.5), correlation=0.0):
    """Normalized bivariate Gaussian ensemble with the given moments."""
    if not -1 < correlation < 1:
        raise ValueError("correlation must lie in (-1, 1)")
    X, P = np.meshgrid(xgrid.x - x0, pgrid.p - p0, indexing="ij")
    u, v = X / sx, P / sp
    r = correlation
    expo = -(u * u - 2 * r * u * v + v * v) / (2 * (1 - r * r))
    return normalize(PhaseSpaceDistribution(xgrid, pgrid, np.exp(expo)))


def read_distribution_csv(path) -> PhaseSpaceDistribution:
    """Load a tensor-grid ensemble from CSV columns ``x, p, f``."""
    with open(path, newline="") as fh:
        rows = [(float(r["x"]), float(r["p"]), float(r["f"])) for r in csv.DictReader(fh)]
    arr = np.array(rows)
    xs = np.unique(arr[:, 0])
    ps = np.unique(arr[:, 1])
    if len(xs) * len(ps) != len(arr):
        raise GridError("CSV does not describe a full tensor grid")
    values = np.zeros((len(xs), len(ps)))
    values[np.searchsorted(xs, arr[:, 0]), np.searchsorted(ps, arr[:, 1])] = arr[:, 2]
    xgrid = SpatialGrid(float(xs[0]), float(xs[-1]), len(xs))
    pgrid = MomentumGrid(float(ps[0]), float(ps[-1]), len(ps))
    if not (np.allclose(np.diff(xs), xgrid.h) and np.allclose(np.diff(ps), pgrid.h)):
        raise GridError("CSV grid is not uniform")
    return PhaseSpaceDistribution(xgrid, pgrid, values)


@dataclass(frozen=True, eq=False)
class DoubledKernel:
    grid: SpatialGrid
    values: np.ndarray          # shape (n, n), complex; [a, b] <-> (Q_a, q_b)

    def hermiticity_residual(self) -> float:
        return float(np.abs(self.values - self.values.conj().T).max())

    def trace(self) -> complex:
        return complex(self.grid.weights @ np.diag(self.values))


def _midpoints(F: np.ndarray) -> np.ndarray:
    """Values halfway between consecutive columns of ``F``."""
    mid = 0.5 * (F[:, :-1] + F[:, 1:])
    if F.shape[1] >= 4:
        mid[:, 1:-1] = (-F[:, :-3] + 9 * F[:, 1:-2] + 9 * F[:, 2:-1] - F[:, 3:]) / 16
    return mid


def to_doubled(f: PhaseSpaceDistribution) -> DoubledKernel:
    """Momentum transform followed by the substitution to ``(Q, q)``.

    Raises
    ------
    GridError
        If the momentum spacing would alias separations across the grid.
    """
    xg, pg = f.xgrid, f.pgrid
    if pg.h * xg.length > math.pi * (1 + 1e-12):
        raise GridError(
            f"momentum spacing {pg.h:.4g} aliases separations up to {xg.length:.4g}")
    n, h = xg.n_points, xg.h
    m = np.arange(-(n - 1), n)
    y = m * h
    phase = np.exp(1j * np.outer(y, pg.p)) * (pg.weights / (2 * math.pi))
    fy = phase @ f.values.T                     # [m, x_i]
    fy_mid = _midpoints(fy)                     # [m, x_{i+1/2}]

    a = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    s = a + b
    mi = (a - b) + (n - 1)
    even = (s % 2) == 0
    K = np.where(even, fy[mi, np.minimum(s // 2, n - 1)],
                 fy_mid[mi, np.minimum((s - 1) // 2, n - 2)])
    return DoubledKernel(xg, K)


def from_doubled(k: DoubledKernel, pgrid: MomentumGrid) -> PhaseSpaceDistribution:
    """Inverse substitution and momentum transform back to ``f(x, p)``.

    Only kernel entries with ``Q + q`` on a grid node are used, so the
    separations are even multiples of ``h`` and momenta are unique up to
    ``|p| <= pi/(2h)``.
    """
    if k.hermiticity_residual() > 1e-6 * max(1.0, float(np.abs(k.values).max())):
        raise HermiticityError(f"kernel Hermiticity residual {k.hermiticity_residual():.3e}")
    g = k.grid
    n, h = g.n_points, g.h
    if max(abs(pgrid.p_min), abs(pgrid.p_max)) > math.pi / (2 * h) * (1 + 1e-12):
        raise GridError("momentum grid exceeds the band limit pi/(2h) of the kernel")
    ms = np.arange(-(n - 1) // 2 - 1, (n - 1) // 2 + 2)
    i = np.arange(n)[:, None]
    qa = i + ms[None, :]
    qb = i - ms[None, :]
    ok = (qa >= 0) & (qa < n) & (qb >= 0) & (qb < n)
    samples = np.where(ok, k.values[np.clip(qa, 0, n - 1), np.clip(qb, 0, n - 1)], 0.0)
    phase = np.exp(-1j * np.outer(2 * h * ms, pgrid.p)) * (2 * h)
    fxp = samples @ phase
    scale = max(1e-300, float(np.abs(fxp).max()))
    if float(np.abs(fxp.imag).max()) > 1e-8 * max(1.0, scale):
        raise HermiticityError("back-transformed distribution is not real")
    return PhaseSpaceDistribution(g, pgrid, fxp.real.copy())


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """Hermitian expansion coefficients ``f_jk`` in a spectral basis."""

    matrix: np.ndarray
    basis_tag: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_residual(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def eigen_range(self) -> tuple[float, float]:
        """Smallest and largest eigenvalue; not confined to ``[0, 1]``."""
        ev = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))
        return float(ev[0]), float(ev[-1])

    def diagnostics(self) -> dict:
        lo, hi = self.eigen_range()
        return {"trace": self.trace(), "min_eig": lo, "max_eig": hi,
                "nonstandard": bool(lo < -1e-12 or hi > 1 + 1e-12),
                "hermiticity_residual": self.hermiticity_residual()}

    def normalized(self) -> "CoefficientMatrix":
        tr = self.trace()
        if abs(tr) < 1e-14:
            raise ZeroMassError("coefficient matrix has zero trace")
        return CoefficientMatrix(self.matrix / tr.real, self.basis_tag, dict(self.metadata))


def expand(k: DoubledKernel, basis: SpectralBasis, check_truncation: bool = True) -> CoefficientMatrix:
    """``f_jk = int dQ dq g_j(Q) k(Q, q) g_k(q)`` by trapezoidal quadrature.

    Emits :class:`TruncationWarning` when the basis reproduces the kernel
    with a relative error above 1%.
    """
    if k.grid != basis.grid:
        raise DimensionMismatch("kernel and basis live on different grids")
    Gw = basis.functions * basis.grid.weights
    F = Gw @ k.values @ Gw.T
    meta = {"trace": complex(np.trace(F))}
    if check_truncation:
        norm = float(np.linalg.norm(k.values))
        if norm > 0:
            rec = reconstruct(CoefficientMatrix(F, basis.tag), basis, 0.0)
            err = float(np.linalg.norm(k.values - rec.values)) / norm
            meta["truncation_error"] = err
            if err > 0.01:
                warnings.warn(f"basis of dimension {basis.dim} misses {err:.1%} of the kernel",
                              TruncationWarning, stacklevel=2)
    return CoefficientMatrix(F, basis.tag, meta)


def reconstruct(m: CoefficientMatrix, basis: SpectralBasis, t: float = 0.0) -> DoubledKernel:
    """``k(Q, q; t) = sum_jk f_jk exp(-i (E_j - E_k) t) g_j(Q) g_k(q)``."""
    if m.dim != basis.dim:
        raise DimensionMismatch("matrix and basis dimensions differ")
    ph = np.exp(-1j * basis.energies * t)
    F = m.matrix * np.outer(ph, ph.conj())
    G = basis.functions
    return DoubledKernel(basis.grid, G.T @ F @ G)


def operator_matrix(kind: str, basis: SpectralBasis, order: int = 4) -> np.ndarray:
    """Matrix of ``X``, ``P`` or ``XP + PX`` in the basis.

    ``P`` applies an antisymmetric central-difference stencil (``order`` 2 or
    4) through shifted overlaps ``C_s = sum_i g_j(i) g_k(i+s)``, so the matrix
    is exactly Hermitian.
    """
    G = basis.functions
    w = basis.grid.weights
    if kind == "X":
        return ((G * (w * basis.grid.x)) @ G.T).astype(complex)
    C1 = G[:, :-1] @ G[:, 1:].T
    if order == 2:
        M = 0.5 * (C1 - C1.T)
    elif order == 4:
        C2 = G[:, :-2] @ G[:, 2:].T
        M = (8 * (C1 - C1.T) - (C2 - C2.T)) / 12
    else:
        raise ValueError("stencil order must be 2 or 4")
    P = -1j * M
    if kind == "P":
        return P
    if kind == "XP_sym":
        X = operator_matrix("X", basis)
        return X @ P + P @ X
    raise ValueError(f"unknown operator kind {kind!r}")


def expectation(m: CoefficientMatrix, op: np.ndarray, tol: float = 1e-8) -> float:
    """``Tr(op f)`` for Hermitian inputs; the imaginary residue is checked."""
    op = np.asarray(op)
    if op.shape != m.matrix.shape:
        raise DimensionMismatch("operator and matrix dimensions differ")
    scale_m = max(1.0, float(np.abs(m.matrix).max()))
    scale_o = max(1.0, float(np.abs(op).max()))
    if m.hermiticity_residual() > tol * scale_m:
        raise NonHermitianError("coefficient matrix is not Hermitian")
    if float(np.abs(op - op.conj().T).max()) > tol * scale_o:
        raise NonHermitianError("operator is not Hermitian")
    val = np.trace(op @ m.matrix)
    if abs(val.imag) > tol * scale_m * scale_o * m.dim:
        raise NonHermitianError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def pure_state(basis: SpectralBasis, amplitudes) -> CoefficientMatrix:
    """Coefficient matrix ``|psi><psi|`` for basis amplitudes ``psi``."""
    a = np.asarray(amplitudes, dtype=complex)
    a = a / np.linalg.norm(a)
    return CoefficientMatrix(np.outer(a, a.conj()), basis.tag)
