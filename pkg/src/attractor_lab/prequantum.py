"""Deterministic eigenvalue flows and their emergent quantum phases.

A rotor ``(phi, omega)`` with ``dphi/dt = omega`` and a dissipative
``d omega/dt = -kappa f(omega) f'(omega)``, ``f(omega) = det(H - omega)``,
settles on an eigenvalue of ``H`` while ``phi`` keeps rotating with period
``2 pi / E``.  ``N`` commuting beables give ``N`` such rotors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotConverged, PeriodUndefined
from .ode import integrate

TWO_PI = 2 * math.pi


def det_poly(eigenvalues, omega):
    """``f(omega) = prod_i (E_i - omega)`` and its derivative, by a running product."""
    omega = np.asarray(omega, dtype=float)
    p = np.ones_like(omega)
    dp = np.zeros_like(omega)
    for e in np.asarray(eigenvalues, dtype=float):
        r = e - omega
        dp = dp * r - p
        p = p * r
    return p, dp


@dataclass(frozen=True, eq=False)
class FiniteQuantumSystem:
    """A Hamiltonian reduced to its ascending eigenvalues."""

    eigenvalues: np.ndarray
    hamiltonian: np.ndarray

    @classmethod
    def from_matrix(cls, H) -> "FiniteQuantumSystem":
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatch("Hamiltonian must be square")
        if np.abs(H - H.conj().T).max() > 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        return cls(np.linalg.eigvalsh(H), H)

    @classmethod
    def from_eigenvalues(cls, values) -> "FiniteQuantumSystem":
        E = np.sort(np.asarray(values, dtype=float))
        return cls(E, np.diag(E).astype(complex))

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def f(self, omega):
        return det_poly(self.eigenvalues, omega)[0]

    def repellers(self) -> np.ndarray:
        """Zeros of ``f'`` between neighbouring eigenvalues (basin boundaries)."""
        E = np.unique(self.eigenvalues)
        if len(E) < 2:
            return np.empty(0)
        roots = np.roots(np.polyder(np.poly(self.eigenvalues)))
        roots = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
        return roots[(roots > E[0]) & (roots < E[-1])]


@dataclass(frozen=True)
class FlowState:
    phi: float
    omega: float
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)


@dataclass(eq=False)
class FlowTrajectory:
    """Stored flow: wrapped angles, frequencies and the descent functional.

    ``phi`` and ``omega`` have shape ``(n_times, N)``; the scalar flow has
    ``N = 1``.  ``phi_unwrapped`` keeps the continuous angle used to measure
    periods.
    """

    times: np.ndarray
    phi: np.ndarray
    phi_unwrapped: np.ndarray
    omega: np.ndarray
    F_squared: np.ndarray
    rates: np.ndarray                    # d omega / dt at each stored time
    eigenvalues: list
    metadata: dict = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return self.omega.shape[1]

    def final_state(self) -> FlowState:
        return FlowState(self.phi[-1, 0], self.omega[-1, 0], self.times[-1])

    def rows(self):
        for i, t in enumerate(self.times):
            yield (float(t), *self.phi[i], *self.omega[i], float(self.F_squared[i]))

    def columns(self):
        n = self.n_components
        if n == 1:
            return ("t", "phi", "omega", "F_squared")
        return (("t",) + tuple(f"phi_{k + 1}" for k in range(n))
                + tuple(f"omega_{k + 1}" for k in range(n)) + ("F_squared",))


def _flow(eig_lists, gains, omega0, phi0, times, rtol, atol, squared=False):
    """Integrate ``N`` rotors; each ``omega_n`` descends its own ``f_n^2``."""
    N = len(eig_lists)
    times = np.asarray(times, dtype=float)
    if times[0] != 0:
        times = np.concatenate([[0.0], times])
        drop_first = True
    else:
        drop_first = False

    def rates(omega):
        vals = [det_poly(e, w) for e, w in zip(eig_lists, omega)]
        f = np.array([v[0] for v in vals])
        fp = np.array([v[1] for v in vals])
        if squared:
            # gradient of (sum_n f_n^2)^2 couples all components
            return -gains * 4 * np.sum(f**2) * f * fp
        return -gains * f * fp

    def rhs(t, y):
        return np.concatenate([y[N:], rates(y[N:])])

    y0 = np.concatenate([phi0, omega0])
    Y = integrate(rhs, y0, times, rtol=rtol, atol=atol, norm="max")
    if drop_first:
        Y, times = Y[1:], times[1:]
    phi_u, omega = Y[:, :N], Y[:, N:]
    F = np.array([sum(det_poly(e, w)[0] ** 2 for e, w in zip(eig_lists, row)) for row in omega])
    R = np.array([rates(row) for row in omega])
    return times, np.mod(phi_u, TWO_PI), phi_u, omega, F**2, R


def thooft_flow(sys: FiniteQuantumSystem, kappa: float, init: FlowState, times,
                rtol: float = 1e-10, atol: float = 1e-12) -> FlowTrajectory:
    """Scalar flow ``d omega/dt = -kappa f f'`` with ``f = det(H - omega)``.

    Raises
    ------
    StiffnessError
        If the adaptive step collapses.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    t, phi, phiu, om, F2, R = _flow([sys.eigenvalues], np.array([kappa]),
                                    np.array([init.omega]), np.array([init.phi]),
                                    times, rtol, atol)
    # the scalar descent functional is f^2 itself
    f2 = sys.f(om[:, 0]) ** 2
    return FlowTrajectory(t, phi, phiu, om, f2, R, [sys.eigenvalues.copy()],
                          {"kappa": kappa, "model": "thooft"})


def flow_fixed_point(traj: FlowTrajectory, component: int = 0, rate_tol: float = 1e-10):
    """Eigenvalue reached by one component and its limit-cycle period.

    Returns ``(E, T, T_measured)`` with ``T = 2 pi / E`` and ``T_measured``
    from the late-time slope of the unwrapped angle.

    Raises
    ------
    NotConverged
        If ``|d omega/dt| >= rate_tol`` at the last stored time.
    PeriodUndefined
        If the eigenvalue is zero within ``1e-12``.
    """
    rate = abs(traj.rates[-1, component])
    if not rate < rate_tol:
        raise NotConverged(f"|d omega/dt| = {rate:.3e} at t = {traj.times[-1]:.6g}")
    E_list = np.asarray(traj.eigenvalues[component])
    w = traj.omega[-1, component]
    E = float(E_list[np.argmin(np.abs(E_list - w))])
    if abs(E) < 1e-12:
        raise PeriodUndefined("fixed point at zero frequency has no period")
    k = max(2, len(traj.times) // 4)
    slope = np.polyfit(traj.times[-k:], traj.phi_unwrapped[-k:, component], 1)[0]
    return E, TWO_PI / E, TWO_PI / slope


@dataclass(eq=False)
class BasinMap:
    omega0: np.ndarray
    fixed_point_index: np.ndarray        # -1 marks starts that stay on a repeller
    convergence_time: np.ndarray
    final_omega: np.ndarray
    eigenvalues: np.ndarray
    times: np.ndarray | None = None
    paths: np.ndarray | None = None      # omega(t) per start, shape (n_times, n_starts)

    def f_squared(self) -> np.ndarray:
        return det_poly(self.eigenvalues, self.paths)[0] ** 2

    def rows(self):
        for w, i, t in zip(self.omega0, self.fixed_point_index, self.convergence_time):
            yield float(w), int(i), float(t)


def basin_map(sys: FiniteQuantumSystem, kappa: float, omega0, t_max: float,
              n_times: int = 801, tol: float = 1e-8) -> BasinMap:
    """Run the scalar flow from every start and record where it lands.

    All starts are integrated as one batch with per-component error control,
    which is exact because the rotors do not interact.  The convergence time
    is the first stored time after which ``|omega - E|`` stays below ``tol``.
    """
    omega0 = np.asarray(omega0, dtype=float)
    times = np.linspace(0.0, t_max, n_times)
    n = len(omega0)
    E = sys.eigenvalues

    def rhs(t, w):
        f, fp = det_poly(E, w)
        return -kappa * f * fp

    W = integrate(rhs, omega0, times, rtol=1e-10, atol=1e-12, norm="max")
    final = W[-1]
    dist = np.abs(final[:, None] - E[None, :])
    index = np.argmin(dist, axis=1)
    ok = dist[np.arange(n), index] <= tol
    conv = np.full(n, np.nan)
    for i in np.flatnonzero(ok):
        bad = np.flatnonzero(np.abs(W[:, i] - E[index[i]]) > tol)
        conv[i] = times[bad[-1] + 1] if bad.size else 0.0
    index = np.where(ok, index, -1)
    return BasinMap(omega0, index, conv, final, E.copy(), times, W)


@dataclass(frozen=True, eq=False)
class BeablesModel:
    """``N`` commuting beables given by their eigenvalue lists ``A[n, j]``.

    The default flow descends each component's squared determinant,
    ``d omega_n/dt = -kappa d/d omega_n sum_m det_m^2``, which separates into
    ``N`` scalar flows.  ``squared=True`` descends ``(sum_m det_m^2)^2``
    instead, coupling all components through a common factor.
    """

    eigenvalues: np.ndarray
    kappa: float
    squared: bool = False

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.eigenvalues, dtype=float))
        object.__setattr__(self, "eigenvalues", A)
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    @property
    def N(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def d(self) -> int:
        return self.eigenvalues.shape[1]

    def lattice(self) -> np.ndarray:
        """All ``d^N`` candidate fixed vectors."""
        grids = np.meshgrid(*self.eigenvalues, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def F(self, omega) -> float:
        return float(sum(det_poly(a, w)[0] ** 2 for a, w in zip(self.eigenvalues, omega)))

    def component_system(self, n: int) -> FiniteQuantumSystem:
        return FiniteQuantumSystem.from_eigenvalues(self.eigenvalues[n])

    def scalar_gain(self) -> float:
        """``kappa`` of the equivalent scalar flow for one component."""
        return 2 * self.kappa


def beables_flow(model: BeablesModel, init_omega, times, init_phi=None,
                 rtol: float = 1e-10, atol: float = 1e-12) -> FlowTrajectory:
    init_omega = np.asarray(init_omega, dtype=float)
    if init_omega.shape != (model.N,):
        raise DimensionMismatch(f"need {model.N} initial frequencies")
    phi0 = np.zeros(model.N) if init_phi is None else np.asarray(init_phi, dtype=float)
    gains = np.full(model.N, model.kappa if model.squared else model.scalar_gain())
    t, phi, phiu, om, F2, R = _flow(list(model.eigenvalues), gains, init_omega, phi0,
                                    times, rtol, atol, squared=model.squared)
    return FlowTrajectory(t, phi, phiu, om, F2, R, list(model.eigenvalues),
                          {"kappa": model.kappa, "model": "beables",
                           "squared": model.squared})


def nearest_lattice_point(model: BeablesModel, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    return np.array([a[np.argmin(np.abs(a - w))] for a, w in zip(model.eigenvalues, omega)])


@dataclass(frozen=True)
class SuperselectionSector:
    n: tuple

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.n))
        if not np.issubdtype(vals.dtype, np.integer):
            if not np.all(vals == np.round(vals)):
                raise ValueError("sector labels must be integers")
        object.__setattr__(self, "n", tuple(int(v) for v in vals))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.n, dtype=float)

    def scaled(self, k: int) -> "SuperselectionSector":
        return SuperselectionSector(tuple(k * v for v in self.n))


@dataclass(frozen=True)
class EmergentEnergy:
    case: int
    energy: float
    time_scale: float          # t' = time_scale * t
    dominance_ratio: float


def emergent_hamiltonian(sector: SuperselectionSector, omega_star,
                         ratio: float = 1e3) -> EmergentEnergy:
    """Classify the sector and return the emergent energy.

    Case 1: all labels equal, ``E = sum omega`` with ``t' = n t``.
    Case 2: one label exceeds ``ratio`` times all others in magnitude,
    ``E = omega_k`` with ``t' = n_k t``.
    Case 3: otherwise ``E = n . omega`` with ``t' = t``.
    """
    n = sector.vector
    w = np.asarray(omega_star, dtype=float)
    if n.shape != w.shape:
        raise DimensionMismatch("sector and fixed vector lengths differ")
    if np.all(n == n[0]):
        return EmergentEnergy(1, float(w.sum()), float(n[0]), ratio)
    k = int(np.argmax(np.abs(n)))
    others = np.abs(np.delete(n, k))
    if abs(n[k]) >= ratio * others.max():
        return EmergentEnergy(2, float(w[k]), float(n[k]), ratio)
    return EmergentEnergy(3, float(n @ w), 1.0, ratio)


@dataclass(frozen=True)
class PrequantumPhase:
    phase: complex
    case: int
    energy: float
    t_prime: float

    @property
    def factorized(self) -> complex:
        """``exp(-i E t')``; equals :attr:`phase` except in case 2, where it approximates it."""
        return complex(np.exp(-1j * self.energy * self.t_prime))


def prequantum_phase(sector: SuperselectionSector, omega_star, t: float,
                     ratio: float = 1e3) -> PrequantumPhase:
    """Phase ``exp(-i n . omega t)`` with its ``(E, t')`` factorization."""
    w = np.asarray(omega_star, dtype=float)
    em = emergent_hamiltonian(sector, w, ratio)
    phase = complex(np.exp(-1j * float(sector.vector @ w) * t))
    return PrequantumPhase(phase, em.case, em.energy, em.time_scale * t)
