"""Potentials and truncated eigenbases of the one-coordinate Hamiltonian.

The operator is ``H = -1/2 d^2/dx^2 + V(x)`` in natural units.  It is
discretized with the central second difference on a uniform grid whose end
points act as hard walls, and the lowest ``d`` eigenpairs are retained.

All quadratures use the trapezoidal rule on the uniform grid.  Because every
retained function vanishes at the walls, the trapezoidal weights reduce to
``h`` on every node that carries weight, so discrete orthonormality of the
eigenvectors and continuum orthonormality under the quadrature coincide.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import eigh_tridiagonal

from .errors import ResolutionError, TruncationError

POLYNOMIAL_KINDS = ("harmonic", "quartic", "double_well", "polynomial")
KINDS = POLYNOMIAL_KINDS + ("box",)

ORTHONORMALITY_TOL = 1e-8
RESIDUAL_TOL = 1e-6
BOUNDARY_TOL = 1e-6


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Potential:
    """A confining potential in one of a few parametric families.

    Use the constructors (``Potential.harmonic(1.0)`` ...) or
    :meth:`from_mapping` for config records.  ``params`` is stored as a
    sorted tuple of ``(name, value)`` pairs so instances hash and compare.
    """

    kind: str
    params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def harmonic(cls, omega: float = 1.0) -> "Potential":
        return cls("harmonic", (("omega", float(omega)),))

    @classmethod
    def quartic(cls, g: float = 1.0) -> "Potential":
        return cls("quartic", (("g", float(g)),))

    @classmethod
    def double_well(cls, a: float = 1.0, b: float = 1.0) -> "Potential":
        """``V = a x^4 - b x^2``."""
        return cls("double_well", (("a", float(a)), ("b", float(b))))

    @classmethod
    def box(cls, L: float) -> "Potential":
        """Infinite square well on ``|x| < L``."""
        return cls("box", (("L", float(L)),))

    @classmethod
    def polynomial(cls, coefficients) -> "Potential":
        """``V = sum_k c_k x^k`` with ``coefficients = (c_0, ..., c_K)``."""
        c = tuple(float(v) for v in coefficients)
        if not c:
            raise ValueError("polynomial needs at least one coefficient")
        return cls("polynomial", (("c", c),))

    @classmethod
    def from_mapping(cls, spec: dict) -> "Potential":
        spec = dict(spec)
        kind = spec.pop("kind", None)
        builders = {
            "harmonic": lambda: cls.harmonic(spec.pop("omega", 1.0)),
            "quartic": lambda: cls.quartic(spec.pop("g", 1.0)),
            "double_well": lambda: cls.double_well(spec.pop("a", 1.0), spec.pop("b", 1.0)),
            "box": lambda: cls.box(spec.pop("L")),
            "polynomial": lambda: cls.polynomial(spec.pop("c")),
        }
        if kind not in builders:
            raise ValueError(f"unknown potential kind {kind!r}")
        try:
            pot = builders[kind]()
        except KeyError as exc:
            raise ValueError(f"{kind} potential needs parameter {exc}") from None
        if spec:
            raise ValueError(f"unexpected {kind} parameters: {sorted(spec)}")
        return pot

    def to_mapping(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        for k, v in self.params:
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    def param(self, name: str):
        return dict(self.params)[name]

    @property
    def coefficients(self) -> np.ndarray:
        """Power-series coefficients ``c_0..c_K`` (polynomial kinds only)."""
        if self.kind == "harmonic":
            w = self.param("omega")
            return np.array([0.0, 0.0, 0.5 * w * w])
        if self.kind == "quartic":
            return np.array([0.0, 0.0, 0.0, 0.0, self.param("g")])
        if self.kind == "double_well":
            return np.array([0.0, 0.0, -self.param("b"), 0.0, self.param("a")])
        if self.kind == "polynomial":
            return np.array(self.param("c"), dtype=float)
        raise ValueError("box potential has no polynomial form")

    @property
    def is_confining(self) -> bool:
        if self.kind == "box":
            return True
        c = np.trim_zeros(self.coefficients, "b")
        return len(c) >= 3 and (len(c) - 1) % 2 == 0 and c[-1] > 0

    def __str__(self):
        inner = ", ".join(f"{k}={v}" for k, v in self.params)
        return f"{self.kind}({inner})"


def evaluate_potential(pot: Potential, x):
    """Return ``(V(x), V'(x))`` using the analytic derivative.

    The box potential is ``+inf`` on and outside its walls; its derivative is
    reported as zero everywhere.
    """
    x = np.asarray(x, dtype=float)
    if pot.kind == "box":
        L = pot.param("L")
        V = np.where(np.abs(x) < L, 0.0, np.inf)
        return V, np.zeros_like(x)
    c = pot.coefficients
    return npoly.polyval(x, c), npoly.polyval(x, npoly.polyder(c))


@dataclass(frozen=True)
class SpatialGrid:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError("a spatial grid needs at least 64 points")
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max")

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "SpatialGrid":
        return cls(-float(half_width), float(half_width), int(n_points))

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_points, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def digest(self) -> str:
        key = f"{self.x_min!r}:{self.x_max!r}:{self.n_points}"
        return hashlib.sha256(key.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Lowest ``d`` eigenpairs of the discretized Hamiltonian.

    ``functions`` has shape ``(d, n_points)``; row ``j`` is ``g_j`` sampled on
    ``grid.x``.  Arrays are read-only.
    """

    potential: Potential
    grid: SpatialGrid
    energies: np.ndarray
    functions: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def tag(self) -> str:
        """Identifier tying derived objects to this basis."""
        return f"{self.potential}|d={self.dim}|grid={self.grid.digest()}"

    def overlap(self) -> np.ndarray:
        G = self.functions
        return (G * self.grid.weights) @ G.T

    def to_dict(self) -> dict:
        return {
            "potential": self.potential.to_mapping(),
            "grid": {"xmin": self.grid.x_min, "xmax": self.grid.x_max,
                     "n": self.grid.n_points},
            "energies": self.energies.tolist(),
            "functions": self.functions.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralBasis":
        g = data["grid"]
        grid = SpatialGrid(float(g["xmin"]), float(g["xmax"]), int(g["n"]))
        E = np.asarray(data["energies"], dtype=float)
        G = np.asarray(data["functions"], dtype=float).reshape(len(E), grid.n_points)
        pot = Potential.from_mapping(data["potential"])
        return cls(pot, grid, _frozen(E), _frozen(G), {})


def _laplacian_bands(V_interior: np.ndarray, h: float):
    diag = 1.0 / h**2 + V_interior
    off = np.full(len(V_interior) - 1, -0.5 / h**2)
    return diag, off


def apply_hamiltonian(pot: Potential, grid: SpatialGrid, g: np.ndarray) -> np.ndarray:
    """Apply the discrete Hamiltonian to grid functions vanishing at the walls.

    Nodes where the potential is infinite, and the two grid ends, are held at
    zero; the returned array is zero there as well.
    """
    g = np.atleast_2d(g)
    h = grid.h
    V, _ = evaluate_potential(pot, grid.x)
    active = np.isfinite(V)
    active[[0, -1]] = False
    padded = np.where(active, g, 0.0)
    lap = np.zeros_like(padded)
    lap[:, 1:-1] = (padded[:, 2:] - 2 * padded[:, 1:-1] + padded[:, :-2]) / h**2
    out = -0.5 * lap + np.where(active, V, 0.0) * padded
    return np.where(active, out, 0.0)


def _first_extremum(g: np.ndarray) -> int:
    a = np.abs(g)
    floor = 1e-3 * a.max()
    inner = (a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:]) & (a[1:-1] > floor)
    idx = np.flatnonzero(inner)
    return int(idx[0] + 1) if idx.size else int(np.argmax(a))


def build_basis(pot: Potential, grid: SpatialGrid, d: int,
                boundary_tol: float = BOUNDARY_TOL) -> SpectralBasis:
    """Construct the ``d`` lowest orthonormal eigenfunctions of ``H``.

    Raises
    ------
    ResolutionError
        If ``d > n_points/4`` or an eigen-residual exceeds its tolerance.
    TruncationError
        If the grid ends are artificial walls (finite potential there) and a
        retained function is not below ``boundary_tol`` near them.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if d > grid.n_points // 4:
        raise ResolutionError(f"d={d} exceeds n_points/4 = {grid.n_points // 4}")

    x, h = grid.x, grid.h
    V, _ = evaluate_potential(pot, x)
    active = np.isfinite(V)
    active[[0, -1]] = False
    idx = np.flatnonzero(active)
    if idx.size == 0 or np.any(np.diff(idx) != 1):
        raise ResolutionError("allowed region of the potential is not one interval")
    if d > idx.size // 4:
        raise ResolutionError("allowed region too small for the requested d")

    diag, off = _laplacian_bands(V[idx], h)
    E, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, d - 1))
    G = np.zeros((d, grid.n_points))
    G[:, idx] = vecs.T / np.sqrt(h)

    meta: dict[str, Any] = {"degenerate_pairs": []}
    scale = max(1.0, float(np.max(np.abs(E))))
    for j in range(d - 1):
        if E[j + 1] - E[j] < 1e-10 * scale:
            meta["degenerate_pairs"].append((j, j + 1))
    if meta["degenerate_pairs"]:
        # re-orthonormalize degenerate blocks under the quadrature
        q, _ = np.linalg.qr((G * np.sqrt(grid.weights)).T)
        G = q.T / np.sqrt(grid.weights)
        G[:, ~active] = 0.0

    for j in range(d):
        if G[j, _first_extremum(G[j])] < 0:
            G[j] = -G[j]

    resid = apply_hamiltonian(pot, grid, G) - E[:, None] * G
    rnorm = np.sqrt((resid**2 * grid.weights).sum(axis=1))
    rel = rnorm / np.where(np.abs(E) > 0, np.abs(E), 1.0)
    if np.any(rel > RESIDUAL_TOL):
        raise ResolutionError(f"eigen-residual {rel.max():.3e} exceeds {RESIDUAL_TOL}")

    artificial = np.isfinite(V[0]) and np.isfinite(V[-1])
    edge_max = 0.0
    if artificial:
        width = max(2, grid.n_points // 50)
        edge = np.abs(np.concatenate([G[:, 1:1 + width], G[:, -1 - width:-1]], axis=1))
        edge_max = float(edge.max())
        if edge_max > boundary_tol:
            j = int(np.argmax(edge.max(axis=1)))
            raise TruncationError(
                f"mode {j} reaches {edge_max:.2e} near the grid wall; widen the grid")

    ov = (G * grid.weights) @ G.T
    meta.update(
        residuals=rel.tolist(),
        orthonormality_error=float(np.abs(ov - np.eye(d)).max()),
        boundary_max=edge_max,
        artificial_walls=bool(artificial),
    )
    return SpectralBasis(pot, grid, _frozen(E), _frozen(G), meta)


def refine(grid: SpatialGrid) -> SpatialGrid:
    """Same extent with the spacing halved."""
    return dataclasses.replace(grid, n_points=2 * grid.n_points - 1)
