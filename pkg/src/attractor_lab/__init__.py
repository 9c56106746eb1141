"""Phase-space ensembles, their energy-basis coefficient dynamics, and emergent quantum limits."""

from .coupling import (DeltaKernel, DeltaTensor, build_delta_tensor, delta_kernel,
                       hermiticity_probe, parity_spectrum)
from .dynamics import (ConstantSource, ExponentialSource, NoiseModel, attractor,
                       classify_state, evolve_conservative, evolve_dissipative,
                       source_solution, von_neumann_residual)
from .phasespace import (CoefficientMatrix, DoubledKernel, PhaseSpaceDistribution, expand,
                         expectation, from_doubled, operator_matrix, reconstruct, to_doubled)
from .prequantum import (BeablesModel, FiniteQuantumSystem, FlowState, SuperselectionSector,
                         basin_map, beables_flow, emergent_hamiltonian, flow_fixed_point,
                         prequantum_phase, thooft_flow)
from .spectral import Potential, SpatialGrid, SpectralBasis, build_basis

__version__ = "0.1.0"
