"""Coefficient-matrix dynamics: conservative, dissipative and the source law.

The conservative generator is the coupling superoperator ``S`` (real
symmetric, ``d^2 x d^2``).  It is diagonalized once per tensor and reused for
every output time.  The dissipative model adds a homogeneous scalar noise
``dH`` and a unit-trace source ``g(t)``:

    i df/dt = (Delta + dH) (f - g).

Averaging the noise replaces the propagator ``exp(-i(Delta + dH) u)`` by
``exp(-(i Delta + eps) u)``.  The source obeys a nonlinear law whose closed
form is the normalized matrix exponential of ``f(0) t / tau``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coupling import DeltaTensor
from .errors import (AsymptoticWindowWarning, DegenerateTopEigenvalue,
                     DimensionMismatch)
from .phasespace import CoefficientMatrix, reconstruct
from .quadrature import adaptive_simpson
from .spectral import SpectralBasis


def _as_matrix(f) -> np.ndarray:
    return np.asarray(f.matrix if isinstance(f, CoefficientMatrix) else f, dtype=complex)


def diagonalize(m: np.ndarray):
    """Eigen-decomposition ``m = W diag(mu) W^H`` with ascending ``mu``.

    Exactly diagonal input returns its diagonal and the identity, in basis
    order, so that equal inputs give bit-identical downstream results.
    """
    m = np.asarray(m, dtype=complex)
    off = m - np.diag(np.diag(m))
    if not np.any(off):
        return np.diag(m).real.copy(), np.eye(m.shape[0], dtype=complex)
    mu, W = np.linalg.eigh(0.5 * (m + m.conj().T))
    return mu, W


def frobenius(a) -> float:
    return float(np.linalg.norm(a))


# -- sources --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SourceState:
    """Source matrix at one time, with its eigen-weights."""

    matrix: np.ndarray
    weights: np.ndarray
    tau: float
    t: float
    driver: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class ExponentialSource:
    """``g(t) = exp(A t / tau) / Tr exp(A t / tau)`` for a Hermitian driver ``A``.

    Everything is evaluated in the eigenbasis of ``A`` with the largest
    eigenvalue factored out, so large ``t / tau`` cannot overflow.
    """

    def __init__(self, driver, tau: float):
        if not tau > 0:
            raise ValueError("tau must be positive")
        self.driver = _as_matrix(driver)
        self.tau = float(tau)
        self.mu, self.W = diagonalize(self.driver)
        self.dim = len(self.mu)
        # projectors onto the driver eigenvectors, shape (d, d, d)
        self.projectors = np.einsum("ai,bi->iab", self.W, self.W.conj())

    def weights(self, t: float) -> np.ndarray:
        e = np.exp((self.mu - self.mu.max()) * (t / self.tau))
        return e / e.sum()

    def weight_rates(self, t: float) -> np.ndarray:
        w = self.weights(t)
        return w * (self.mu - w @ self.mu) / self.tau

    def _assemble(self, w: np.ndarray) -> np.ndarray:
        if np.all(w == w[0]):
            return w[0] * np.eye(self.dim, dtype=complex)
        return (self.W * w) @ self.W.conj().T

    def matrix(self, t: float) -> np.ndarray:
        return self._assemble(self.weights(t))

    def rate(self, t: float) -> np.ndarray:
        """Analytic time derivative of :meth:`matrix`."""
        return (self.W * self.weight_rates(t)) @ self.W.conj().T

    def state(self, t: float) -> SourceState:
        w = self.weights(t)
        return SourceState(self._assemble(w), w, self.tau, float(t), self.driver)

    def limit(self) -> np.ndarray:
        return attractor(self.driver, self.tau, warn=False).g_inf

    @property
    def stationary(self) -> bool:
        return bool(np.all(self.mu == self.mu[0]))


class ConstantSource:
    """A time-independent source, e.g. an already converged projector."""

    def __init__(self, matrix):
        self.value = _as_matrix(matrix)
        self.dim = self.value.shape[0]
        self.tau = math.inf
        self.stationary = True

    def matrix(self, t: float) -> np.ndarray:
        return self.value

    def rate(self, t: float) -> np.ndarray:
        return np.zeros_like(self.value)

    def limit(self) -> np.ndarray:
        return self.value


def source_solution(f0, tau: float, t: float) -> SourceState:
    """Closed-form source ``g(t)`` driven by the initial matrix ``f0``."""
    return ExponentialSource(f0, tau).state(t)


def source_ode_check(f0, tau: float, t: float, dt: float) -> float:
    """Max entry of ``dg/dt - (f0 - <f0>_g) g / tau`` with a central difference."""
    src = ExponentialSource(f0, tau)
    A = src.driver
    g = src.matrix(t)
    fd = (src.matrix(t + dt) - src.matrix(t - dt)) / (2 * dt)
    mean = np.trace(A @ g) / np.trace(g)
    rhs = (A - mean * np.eye(src.dim)) @ g / tau
    return float(np.abs(fd - rhs).max())


# -- attractor ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AttractorResult:
    U: np.ndarray              # U f0 U^H = diag(eigenvalues)
    eigenvalues: np.ndarray
    top: float
    position: int
    projector: np.ndarray
    g_inf: np.ndarray
    degenerate: bool
    rate: float                # (top - second) / tau


def attractor(f0, tau: float, warn: bool = True) -> AttractorResult:
    """Limit ``U^H P U`` of the source driven by ``f0``.

    Ties for the largest eigenvalue (within ``1e-10``) resolve to the lowest
    index and raise a :class:`DegenerateTopEigenvalue` warning.
    """
    m = _as_matrix(f0)
    mu, W = diagonalize(m)
    d = len(mu)
    top = float(mu.max())
    near = np.flatnonzero(top - mu < 1e-10)
    position = int(near[0])
    degenerate = near.size > 1
    if degenerate and warn:
        warnings.warn("largest eigenvalue of f(0) is degenerate; lowest index kept",
                      DegenerateTopEigenvalue, stacklevel=2)
    P = np.zeros((d, d), dtype=complex)
    P[position, position] = 1.0
    U = W.conj().T
    v = W[:, position]
    g_inf = np.outer(v, v.conj()) + 0.0       # +0.0 clears negative zeros
    rest = np.delete(mu, position)
    second = float(rest.max()) if rest.size else -math.inf
    return AttractorResult(U, mu, top, position, P, g_inf, degenerate,
                           (top - second) / tau)


# -- propagation ----------------------------------------------------------


class SuperPropagator:
    """Cached eigen-decomposition of the coupling superoperator."""

    def __init__(self, tensor: DeltaTensor):
        self.dim = tensor.dim
        S = tensor.superoperator
        self.eigenvalues, self.V = np.linalg.eigh(0.5 * (S + S.T))

    def to_modes(self, m: np.ndarray) -> np.ndarray:
        return self.V.T @ np.asarray(m).reshape(-1)

    def from_modes(self, c: np.ndarray) -> np.ndarray:
        d = self.dim
        return (c @ self.V.T).reshape(c.shape[:-1] + (d, d))

    def factors(self, t, eps: float = 0.0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(-(1j * self.eigenvalues + eps) * t[..., None])

    def propagate(self, m: np.ndarray, t: float, eps: float = 0.0) -> np.ndarray:
        return self.from_modes(self.factors(t, eps) * self.to_modes(m))


# -- trajectories ---------------------------------------------------------

CSV_COLUMNS = ("t", "trace_re", "trace_im", "min_eig", "max_eig",
               "dist_to_source", "dist_to_limit", "vn_residual")


@dataclass(eq=False)
class TrajectoryRecord:
    times: np.ndarray
    matrices: np.ndarray                 # (n_times, d, d) complex
    diagnostics: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    stderr: np.ndarray | None = None     # entrywise Monte-Carlo errors (complex: re/im)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def traces(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)

    def hermiticity_residual(self) -> float:
        m = self.matrices
        return float(np.abs(m - np.conj(np.swapaxes(m, 1, 2))).max())

    def rows(self):
        dg = self.diagnostics
        for i, t in enumerate(self.times):
            tr = dg["trace"][i]
            yield (float(t), tr.real, tr.imag, dg["min_eig"][i], dg["max_eig"][i],
                   dg["dist_to_source"][i], dg["dist_to_limit"][i], dg["vn_residual"][i])


def von_neumann_residual(traj: TrajectoryRecord, basis: SpectralBasis | None = None) -> np.ndarray:
    """``||df/dt||`` by finite differences along the stored times.

    In the rotating frame of the energy eigenbasis the von Neumann equation
    is ``df/dt = 0``, so this is the distance from a quantum solution.
    """
    if basis is not None and basis.dim != traj.dim:
        raise DimensionMismatch("trajectory and basis dimensions differ")
    if len(traj.times) < 3:
        raise ValueError("need at least three time points")
    deriv = np.gradient(traj.matrices, traj.times, axis=0)
    return np.linalg.norm(deriv, axis=(1, 2))


def _finish(times, mats, source=None, limit=None, metadata=None, stderr=None):
    mats = np.asarray(mats)
    herm = 0.5 * (mats + np.conj(np.swapaxes(mats, 1, 2)))
    ev = np.linalg.eigvalsh(herm)
    nan = np.full(len(times), np.nan)
    diag = {
        "trace": np.trace(mats, axis1=1, axis2=2),
        "min_eig": ev[:, 0],
        "max_eig": ev[:, -1],
        "dist_to_source": (np.array([frobenius(m - source.matrix(t)) for t, m in zip(times, mats)])
                           if source is not None else nan),
        "dist_to_limit": (np.linalg.norm(mats - limit, axis=(1, 2))
                          if limit is not None else nan),
    }
    rec = TrajectoryRecord(np.asarray(times, dtype=float), mats, diag, dict(metadata or {}), stderr)
    diag["vn_residual"] = von_neumann_residual(rec) if len(times) >= 3 else nan
    return rec


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be non-negative and strictly increasing")
    return times


def _check_initial(f0, tensor):
    m = _as_matrix(f0)
    if m.shape != (tensor.dim, tensor.dim):
        raise DimensionMismatch(f"f0 has shape {m.shape}, tensor has d={tensor.dim}")
    if abs(np.trace(m) - 1) > 1e-8:
        raise ValueError("f0 must have unit trace")
    return m


def evolve_conservative(f0, tensor: DeltaTensor, times, basis: SpectralBasis | None = None,
                        frame: str = "coefficient") -> TrajectoryRecord:
    """``f(t) = exp(-i Delta t) f(0)`` evaluated through the cached modes.

    ``frame="interaction"`` instead keeps the phases ``exp(i(w_jk - w_lm)t)``
    that the coefficient equation drops: it propagates with the full static
    Liouvillian and rotates back to coefficients (needs ``basis``).
    """
    m0 = _check_initial(f0, tensor)
    times = _check_times(times)
    if frame == "coefficient":
        prop = SuperPropagator(tensor)
        c0 = prop.to_modes(m0)
        mats = prop.from_modes(prop.factors(times) * c0)
    elif frame == "interaction":
        if basis is None or basis.dim != tensor.dim:
            raise DimensionMismatch("interaction frame needs the matching basis")
        E = basis.energies
        w = (E[:, None] - E[None, :]).ravel()
        lam, V = np.linalg.eigh(np.diag(w) + tensor.superoperator)
        c = (np.exp(-1j * np.outer(times, lam)) * (V.T @ m0.reshape(-1))) @ V.T
        mats = (c * np.exp(1j * np.outer(times, w))).reshape(len(times), tensor.dim, tensor.dim)
    else:
        raise ValueError(f"unknown frame {frame!r}")
    return _finish(times, mats, metadata={"mode": "conservative", "frame": frame})


@dataclass(frozen=True)
class NoiseModel:
    """Homogeneous Gaussian noise of energy scale ``epsilon``.

    ``mode="averaged"`` evaluates the noise-averaged solution.  ``"sampled"``
    draws ``n_draws`` realizations (antithetic pairs) and averages them.

    ``path="brownian"`` treats the noise as white with intensity ``2 eps``:
    its running time average up to ``t`` is Gaussian with variance
    ``2 eps / t``, and the propagator from ``s`` to ``t`` picks up the
    increment of the path over ``[s, t]``.  ``path="frozen"`` instead draws a
    single constant ``dH`` with variance ``2 eps / t`` per evaluation time and
    applies it to the whole solution; its mean is not the averaged solution
    wherever the source still changes.
    """

    epsilon: float
    mode: str = "averaged"
    n_draws: int = 4096
    seed: int | None = None
    path: str = "brownian"
    node_spacing: float = 0.01

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.mode not in ("averaged", "sampled"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.path not in ("brownian", "frozen"):
            raise ValueError(f"unknown noise path {self.path!r}")
        if self.mode == "sampled" and (self.n_draws < 2 or self.n_draws % 2):
            raise ValueError("sampled mode needs an even number of draws (antithetic pairs)")

    def variance(self, t: float) -> float:
        return 2 * self.epsilon / t


def _segments(times: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], times]) if times[0] > 0 else times.copy()


def _source_modes(prop: SuperPropagator, source, s: float) -> np.ndarray:
    return prop.to_modes(source.rate(s))


def _averaged(m0, prop, eps, source, times, quad_tol):
    knots = _segments(times)
    h0 = prop.to_modes(m0 - source.matrix(0.0))
    lam = prop.eigenvalues
    memory = np.zeros_like(h0)
    out = {}
    evals = 0
    span = knots[-1] if knots[-1] > 0 else 1.0
    moving = not getattr(source, "stationary", False)
    for a, b in zip(knots[:-1], knots[1:]):
        memory = memory * np.exp(-(1j * lam + eps) * (b - a))
        if moving:
            def integrand(s, b=b):
                return np.exp(-(1j * lam + eps) * (b - s)) * _source_modes(prop, source, s)
            piece, n = adaptive_simpson(integrand, a, b, tol=quad_tol * (b - a) / span)
            memory = memory + piece
            evals += n
        out[b] = memory.copy()
    out[knots[0]] = np.zeros_like(h0)
    mats = []
    for t in times:
        modes = np.exp(-(1j * lam + eps) * t) * h0 - out[t]
        mats.append(source.matrix(t) + prop.from_modes(modes))
    return np.array(mats), {"quadrature_evaluations": evals}


def _nodes(knots: np.ndarray, spacing: float):
    """Simpson nodes refining every segment; returns nodes, per-segment slices/weights."""
    nodes = [knots[0]]
    segs = []
    for a, b in zip(knots[:-1], knots[1:]):
        n = max(2, int(math.ceil((b - a) / spacing)))
        n += n % 2
        s = np.linspace(a, b, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2], w[2:-1:2] = 4.0, 2.0
        w *= (b - a) / (3 * n)
        start = len(nodes) - 1
        nodes.extend(s[1:])
        segs.append((start, start + n + 1, w))
    return np.array(nodes), segs


def _sampled(m0, prop, noise, source, times, rng):
    eps = noise.epsilon
    lam = prop.eigenvalues
    knots = _segments(times)
    nodes, segs = _nodes(knots, noise.node_spacing)
    h0 = prop.to_modes(m0 - source.matrix(0.0))
    moving = not getattr(source, "stationary", False)
    beta = (np.array([_source_modes(prop, source, s) for s in nodes]) if moving
            else np.zeros((len(nodes), len(lam)), dtype=complex))
    A = np.exp(1j * np.outer(nodes, lam)) * beta          # (K, d^2)
    knot_index = {t: i for i, t in enumerate(knots)}
    t_index = [knot_index[t] for t in times]
    g_t = np.array([source.matrix(t) for t in times])
    decay_t = np.exp(-1j * np.outer(times, lam))           # (T, d^2)

    n_pairs = noise.n_draws // 2
    chunk = max(1, min(n_pairs, 2_000_000 // max(1, len(nodes))))
    T, d = len(times), prop.dim
    total = np.zeros((T, d, d), dtype=complex)
    total_sq_re = np.zeros((T, d, d))
    total_sq_im = np.zeros((T, d, d))
    done = 0
    while done < n_pairs:
        B = min(chunk, n_pairs - done)
        if noise.path == "brownian":
            incr = rng.standard_normal((B, len(nodes) - 1)) * np.sqrt(2 * eps * np.diff(nodes))
            W = np.concatenate([np.zeros((B, 1)), np.cumsum(incr, axis=1)], axis=1)
            per_sign = []
            for sign in (1.0, -1.0):
                E = np.exp(1j * sign * W)                        # (B, K)
                seg_sums = [E[:, i0:i1] @ (w[:, None] * A[i0:i1]) for i0, i1, w in segs]
                cum = np.cumsum(np.stack(seg_sums, axis=1), axis=1)   # (B, n_seg, d^2)
                cum = np.concatenate([np.zeros((B, 1, len(lam)), dtype=complex), cum], axis=1)
                Wt = W[:, [segs[i - 1][1] - 1 if i > 0 else 0 for i in t_index]]  # (B, T)
                phase_t = np.exp(-1j * sign * Wt)[..., None]
                modes = phase_t * decay_t[None] * (h0[None, None] - cum[:, t_index])
                per_sign.append(prop.from_modes(modes) + g_t[None])
        else:
            z = rng.standard_normal((B, T))
            per_sign = []
            for sign in (1.0, -1.0):
                dH = sign * z * np.sqrt(2 * eps / np.maximum(times, 1e-300))[None]
                modes = np.empty((B, T, len(lam)), dtype=complex)
                for n, t in enumerate(times):
                    k_end = segs[t_index[n] - 1][1] if t_index[n] > 0 else 1
                    wts = np.zeros(k_end)
                    for i0, i1, w in segs[:t_index[n]]:
                        wts[i0:i1] += w
                    E = np.exp(1j * np.outer(dH[:, n], nodes[:k_end]))
                    mem = E @ (wts[:, None] * A[:k_end])
                    modes[:, n] = (np.exp(-1j * dH[:, n] * t)[:, None] * decay_t[n]
                                   * (h0[None] - mem))
                per_sign.append(prop.from_modes(modes) + g_t[None])
        pair = 0.5 * (per_sign[0] + per_sign[1])
        total += pair.sum(axis=0)
        total_sq_re += (pair.real ** 2).sum(axis=0)
        total_sq_im += (pair.imag ** 2).sum(axis=0)
        done += B
    mean = total / n_pairs
    var_re = np.maximum(total_sq_re / n_pairs - mean.real ** 2, 0.0)
    var_im = np.maximum(total_sq_im / n_pairs - mean.imag ** 2, 0.0)
    scale = math.sqrt(n_pairs / max(1, n_pairs - 1) / n_pairs)
    stderr = np.sqrt(var_re) * scale + 1j * np.sqrt(var_im) * scale
    return mean, stderr, {"n_nodes": len(nodes), "n_pairs": n_pairs}


def crossover_time(source, eps: float, times) -> float:
    """Earliest listed time from which ``||dg/dt|| < eps ||g||`` holds throughout.

    Returns ``nan`` if the condition fails at the last time.
    """
    ok = [frobenius(source.rate(t)) < eps * frobenius(source.matrix(t)) for t in times]
    if not ok[-1]:
        return math.nan
    i = len(ok) - 1
    while i > 0 and ok[i - 1]:
        i -= 1
    return float(times[i])


def noise_phase_average(noise: NoiseModel, t: float, rng: np.random.Generator):
    """Monte-Carlo mean of ``exp(-i dH t)`` and its standard error.

    The exact average is ``exp(-eps t)`` for both path models.
    """
    z = rng.standard_normal(noise.n_draws // 2)
    phase = np.cos(z * math.sqrt(2 * noise.epsilon * t))   # antithetic pair mean
    return float(phase.mean()), float(phase.std(ddof=1) / math.sqrt(len(phase)))


def evolve_dissipative(f0, tensor: DeltaTensor, noise: NoiseModel, times, source=None,
                       tau: float | None = None, rng: np.random.Generator | None = None,
                       quad_tol: float = 1e-7) -> TrajectoryRecord:
    """Evolve ``f`` under the dissipative model with a given source.

    ``source`` defaults to :class:`ExponentialSource` driven by ``f0`` with
    time scale ``tau``.  Sampled mode takes its draws from ``rng``, which
    the caller owns.

    Raises
    ------
    ConvergenceError
        If the memory integral in averaged mode does not converge.
    """
    m0 = _check_initial(f0, tensor)
    times = _check_times(times)
    if source is None:
        if tau is None:
            raise ValueError("give either a source or tau")
        source = ExponentialSource(m0, tau)
    if source.dim != tensor.dim:
        raise DimensionMismatch("source and tensor dimensions differ")
    prop = SuperPropagator(tensor)
    meta = {"mode": noise.mode, "epsilon": noise.epsilon, "tau": source.tau}
    stderr = None
    if noise.mode == "averaged":
        mats, info = _averaged(m0, prop, noise.epsilon, source, times, quad_tol)
    else:
        if rng is None:
            raise ValueError("sampled mode needs a random generator")
        mats, stderr, info = _sampled(m0, prop, noise, source, times, rng)
        meta["path"] = noise.path
    meta.update(info)
    tc = crossover_time(source, noise.epsilon, times)
    meta["crossover_time"] = tc
    if math.isnan(tc):
        warnings.warn("source never became quasi-stationary before the last time",
                      AsymptoticWindowWarning, stacklevel=2)
    return _finish(times, mats, source=source, limit=source.limit(), metadata=meta,
                   stderr=stderr)


def fit_decay_rate(times, values, t_start: float, t_stop: float | None = None) -> float:
    """Least-squares slope of ``-log(values)`` over ``[t_start, t_stop]``."""
    times = np.asarray(times)
    values = np.asarray(values)
    sel = (times >= t_start) & (values > 0)
    if t_stop is not None:
        sel &= times <= t_stop
    if sel.sum() < 2:
        raise ValueError("fewer than two points in the fit window")
    slope = np.polyfit(times[sel], np.log(values[sel]), 1)[0]
    return float(-slope)


# -- classification -------------------------------------------------------


@dataclass(frozen=True)
class StateReport:
    stationary: bool
    pure: bool
    purity: float
    off_diagonal_norm: float
    min_eig: float
    max_eig: float
    position: int | None


def classify_state(m, basis: SpectralBasis | None = None, tol: float = 1e-8) -> StateReport:
    """Decide whether a unit-trace matrix is stationary and/or pure."""
    a = _as_matrix(m)
    if basis is not None and basis.dim != a.shape[0]:
        raise DimensionMismatch("matrix and basis dimensions differ")
    if abs(np.trace(a) - 1) > 1e-8:
        raise ValueError("state must have unit trace")
    off = frobenius(a - np.diag(np.diag(a)))
    purity = float(np.trace(a @ a).real)
    ev = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    stationary = off <= tol
    position = int(np.argmax(np.diag(a).real)) if stationary else None
    return StateReport(stationary, abs(purity - 1) <= tol, purity, off,
                       float(ev[0]), float(ev[-1]), position)


def limit_kernel(result: AttractorResult, basis: SpectralBasis, t: float = 0.0):
    """Doubled kernel of the limit state in the given basis."""
    return reconstruct(CoefficientMatrix(result.g_inf, basis.tag), basis, t)


def random_initial_state(d: int, rng: np.random.Generator, spread: float = 0.3,
                         min_gap: float = 0.0) -> np.ndarray:
    """Random unit-trace Hermitian matrix whose top eigenvalue gap exceeds ``min_gap``."""
    for _ in range(1000):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = spread * (a + a.conj().T) / (2 * math.sqrt(2 * d))
        h = h - np.trace(h) / d * np.eye(d) + np.eye(d) / d
        ev = np.linalg.eigvalsh(h)
        if ev[-1] - ev[-2] >= min_gap:
            return h
    raise RuntimeError("could not draw a matrix with the requested gap")
