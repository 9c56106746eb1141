"""Bra-ket coupling kernel and its four-index basis representation.

The classical Liouville operator in doubled coordinates differs from a
von Neumann generator by the kernel

    Delta(Q, q) = (Q - q) V'((Q + q)/2) - V(Q) + V(q),

which is antisymmetric under ``Q <-> q`` and vanishes identically for
potentials of degree at most two.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IdentityViolation, MismatchError
from .spectral import Potential, SpectralBasis, evaluate_potential

IDENTITY_TOL = 1e-6


@dataclass(frozen=True)
class DeltaKernel:
    """Pointwise evaluator of the coupling for one potential.

    For polynomial potentials the kernel is summed term by term; terms of
    degree 0, 1 and 2 cancel algebraically and are skipped, so the harmonic
    kernel is exactly zero.  Each evaluation is written so that swapping the
    arguments flips the sign bit for bit.
    """

    potential: Potential

    def __call__(self, Q, q):
        Q = np.asarray(Q, dtype=float)
        q = np.asarray(q, dtype=float)
        pot = self.potential
        if pot.kind == "box":
            VQ, _ = evaluate_potential(pot, Q)
            Vq, _ = evaluate_potential(pot, q)
            inside = np.isfinite(VQ) & np.isfinite(Vq)
            return np.where(inside, 0.0, np.nan)
        c = pot.coefficients
        y = Q - q
        mid = 0.5 * (Q + q)
        out = np.zeros(np.broadcast(Q, q).shape)
        for k in range(3, len(c)):
            if c[k] == 0.0:
                continue
            out = out + c[k] * (k * y * mid ** (k - 1) - (Q**k - q**k))
        return out


def delta_kernel(pot: Potential) -> DeltaKernel:
    return DeltaKernel(pot)


@dataclass(frozen=True, eq=False)
class DeltaTensor:
    """Real tensor ``entries[j, k, l, m]`` of the coupling in a basis.

    The superoperator view maps row-major ``vec(f)`` (index ``l*d + m``) to
    row-major output index ``j*d + k``.
    """

    entries: np.ndarray
    basis_tag: str
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def superoperator(self) -> np.ndarray:
        d = self.dim
        return self.entries.reshape(d * d, d * d)

    def apply(self, m: np.ndarray) -> np.ndarray:
        return np.einsum("jklm,lm->jk", self.entries, m)

    def antisymmetry_residual(self) -> float:
        return float(np.abs(self.entries + self.entries.transpose(1, 0, 3, 2)).max())

    def trace_residual(self) -> float:
        return float(np.abs(np.einsum("jjlm->lm", self.entries)).max())


def _pair_products(basis: SpectralBasis, nodes: np.ndarray) -> np.ndarray:
    G = basis.functions[:, nodes]
    w = basis.grid.weights[nodes]
    d = basis.dim
    return (G[:, None, :] * G[None, :, :]).reshape(d * d, -1) * w


def restore_trace(entries: np.ndarray) -> np.ndarray:
    """Project the tensor onto the trace-annihilating, antisymmetric set.

    With a finite basis the completeness relation behind ``sum_j D_jjlm = 0``
    is missing, so the raw quadrature leaves a residual concentrated on the
    highest retained modes.  Writing ``u = vec(1)`` and ``P = 1 - u u^T/d``,
    the superoperator is replaced by ``P S P``: this keeps it real symmetric,
    keeps the ``(jk) <-> (kj)`` antisymmetry (``P`` commutes with the swap),
    and makes the identity matrix a null vector on both sides.
    """
    d = entries.shape[0]
    S = entries.reshape(d * d, d * d)
    u = np.eye(d).ravel()
    c = u @ S
    r = S @ u
    S = S - np.outer(u, c) / d - np.outer(r, u) / d + np.outer(u, u) * (u @ S @ u) / d**2
    return S.reshape(d, d, d, d)


def build_delta_tensor(kernel: DeltaKernel, basis: SpectralBasis,
                       restore: bool = True) -> DeltaTensor:
    """Quadrature of the coupling against products of basis functions.

    ``restore=True`` applies :func:`restore_trace`; the raw truncation defect
    is kept in ``metadata['raw_trace_residual']`` either way.

    Raises
    ------
    IdentityViolation
        If antisymmetry (always) or the trace identity (when restored) fails
        beyond ``1e-6``.
    """
    if kernel.potential != basis.potential:
        raise MismatchError("kernel and basis were built from different potentials")
    x = basis.grid.x
    V, _ = evaluate_potential(basis.potential, x)
    nodes = np.flatnonzero(np.isfinite(V))
    d = basis.dim
    A = _pair_products(basis, nodes)
    K = kernel(x[nodes][:, None], x[nodes][None, :])
    T = (A @ K @ A.T).reshape(d, d, d, d)      # [j, l, k, m]
    raw = np.ascontiguousarray(T.transpose(0, 2, 1, 3))

    tensor = DeltaTensor(raw, basis.tag)
    anti = tensor.antisymmetry_residual()
    raw_trace = tensor.trace_residual()
    entries = restore_trace(raw) if restore else raw
    tensor = DeltaTensor(entries, basis.tag)
    entries.setflags(write=False)
    anti_final = tensor.antisymmetry_residual()
    trace_final = tensor.trace_residual()
    if max(anti, anti_final) > IDENTITY_TOL:
        raise IdentityViolation(f"antisymmetry residual {max(anti, anti_final):.3e}")
    if restore and trace_final > IDENTITY_TOL:
        raise IdentityViolation(f"trace residual {trace_final:.3e}")
    meta = {
        "potential": basis.potential.to_mapping(),
        "d": d,
        "grid_hash": basis.grid.digest(),
        "raw_trace_residual": raw_trace,
        "raw_antisymmetry_residual": anti,
        "antisymmetry_residual": anti_final,
        "trace_residual": trace_final,
        "trace_restored": bool(restore),
    }
    return DeltaTensor(entries, basis.tag, meta)


def hermiticity_probe(tensor: DeltaTensor, n_probes: int, rng: np.random.Generator) -> float:
    """Largest anti-Hermitian part of ``i Delta M`` over random Hermitian ``M``."""
    d = tensor.dim
    worst = 0.0
    for _ in range(n_probes):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        M = a + a.conj().T
        out = 1j * tensor.apply(M)
        worst = max(worst, float(np.abs(out - out.conj().T).max()))
    return worst


@dataclass(frozen=True)
class ParityReport:
    eigenvalues: np.ndarray
    pairing_residual: float
    zero_mode_gap: float

    @property
    def symmetric(self) -> bool:
        return self.pairing_residual <= 1e-6


def liouvillian(basis: SpectralBasis, tensor: DeltaTensor) -> np.ndarray:
    """``L_(jk),(lm) = (E_j - E_k) d_jl d_km + Delta_jklm`` as a dense matrix."""
    if basis.dim != tensor.dim:
        raise DimensionMismatch("basis and tensor dimensions differ")
    E = basis.energies
    diff = (E[:, None] - E[None, :]).ravel()
    return np.diag(diff) + tensor.superoperator


def parity_spectrum(basis: SpectralBasis, tensor: DeltaTensor) -> ParityReport:
    """Spectrum of the static Liouvillian and its mirror-pairing residual.

    The sorted spectrum is paired with its own reversal, so each eigenvalue is
    matched to a distinct negated partner.
    """
    L = liouvillian(basis, tensor)
    lam = np.linalg.eigvalsh(L)
    residual = float(np.abs(lam + lam[::-1]).max())
    return ParityReport(lam, residual, float(np.abs(lam).min()))


def tensor_to_dict(tensor: DeltaTensor) -> dict:
    d = tensor.dim
    return {
        "metadata": {k: tensor.metadata[k] for k in ("potential", "d", "grid_hash")},
        "basis_tag": tensor.basis_tag,
        "superoperator": tensor.superoperator.ravel().tolist(),
        "shape": [d * d, d * d],
    }


def tensor_from_dict(data: dict, basis: SpectralBasis) -> DeltaTensor:
    meta = data["metadata"]
    if (meta["d"] != basis.dim or meta["grid_hash"] != basis.grid.digest()
            or Potential.from_mapping(meta["potential"]) != basis.potential):
        raise MismatchError("tensor metadata does not match the basis")
    d = basis.dim
    S = np.asarray(data["superoperator"], dtype=float).reshape(d, d, d, d)
    S.setflags(write=False)
    return DeltaTensor(S, basis.tag, dict(meta))


def save_tensor(tensor: DeltaTensor, path) -> None:
    """JSON for ``.json`` paths, compressed ``.npz`` otherwise."""
    path = str(path)
    if path.endswith(".json"):
        with open(path, "w") as fh:
            json.dump(tensor_to_dict(tensor), fh)
        return
    meta = {k: tensor.metadata[k] for k in ("potential", "d", "grid_hash")}
    np.savez_compressed(path, superoperator=tensor.superoperator,
                        metadata=json.dumps(meta), basis_tag=tensor.basis_tag)


def load_tensor(path, basis: SpectralBasis) -> DeltaTensor:
    path = str(path)
    if path.endswith(".json"):
        with open(path) as fh:
            return tensor_from_dict(json.load(fh), basis)
    with np.load(path) as z:
        data = {"metadata": json.loads(str(z["metadata"])),
                "superoperator": z["superoperator"].ravel(),
                "basis_tag": str(z["basis_tag"])}
    return tensor_from_dict(data, basis)


def refinement_change(pot: Potential, basis_coarse: SpectralBasis,
                      basis_fine: SpectralBasis) -> float:
    """Largest entry change between tensors on a grid and its refinement."""
    k = delta_kernel(pot)
    a = build_delta_tensor(k, basis_coarse).entries
    b = build_delta_tensor(k, basis_fine).entries
    return float(np.abs(a - b).max())
