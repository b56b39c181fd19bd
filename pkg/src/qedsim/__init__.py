"""Cavity-QED simulator for Jahn-Teller models in the quadrature representation.

Submodules: :mod:`~qedsim.operators` (truncated Fock spaces, states),
:mod:`~qedsim.models` (Hamiltonians, surfaces, gauge potentials),
:mod:`~qedsim.geometry` (Berry phases, intersections, forces),
:mod:`~qedsim.dynamics` (Schrodinger/Lindblad propagation, presets) and
:mod:`~qedsim.cli` (config-driven runner).
"""
__version__ = "0.1.0"

from .operators import (
    OperatorMatrix,
    QuantumState,
    SpaceDescriptor,
    SpaceError,
    basis_ket,
    coherent_ket,
    commutator,
    make_annihilator,
    make_atomic_projector,
    make_number,
    make_quadratures,
    product_ket,
)
from .models import (
    ModelError,
    ModelSpec,
    adiabatic_surfaces,
    build_hamiltonian,
    diabatic_surfaces,
    dirac_oscillator_jc_match,
    extract_gauge_potentials,
    gauge_rewrite_residual,
    jahn_teller_threshold,
    locate_minima,
)
from .geometry import LoopSpec, berry_phase, classify_intersection, heisenberg_force
from .dynamics import (
    EvolutionConfig,
    LossSpec,
    NumericalAbort,
    TrajectoryRecord,
    evolve,
    evolve_lindblad,
    evolve_schrodinger,
    run_hall_experiment,
    run_nonabelian_loop,
    zitterbewegung_probe,
)
