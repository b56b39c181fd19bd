"""Berry phases, intersection classification and the Heisenberg force.

Berry phases are taken on the momentum-parametrised atomic eigenvectors, the
same objects whose eigenvalues form the adiabatic surfaces.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelSpec, _atomic_structure, _check_space, atomic_matrix, build_hamiltonian
from .operators import OperatorMatrix, SpaceDescriptor, commutator, pauli, quadratures

GAP_TOL = 1e-8


class DegeneracyError(ValueError):
    """The transported branch touches another branch on the loop."""


@dataclass(frozen=True)
class LoopSpec:
    """Circle in the ``(P_x, P_y)`` plane, traversed anticlockwise."""

    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    n_points: int = 512
    branch: int = 0
    start_angle: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("loop radius must be positive")
        if self.n_points < 16:
            raise ValueError("loop needs at least 16 points")

    def points(self, n: int | None = None) -> np.ndarray:
        n = self.n_points if n is None else n
        theta = self.start_angle + 2 * np.pi * np.arange(n) / n
        return np.column_stack(
            [self.center[0] + self.radius * np.cos(theta), self.center[1] + self.radius * np.sin(theta)]
        )


def _wrap(phase: float) -> float:
    """Map onto (-pi, pi]; values within rounding of -pi go to +pi."""
    out = float(np.pi - np.mod(np.pi - phase, 2 * np.pi))
    if out <= -np.pi + 1e-12:
        out += 2 * np.pi
    return out


def wilson_loop_phase(states: np.ndarray) -> float:
    """``-arg prod_i <psi_i|psi_{i+1}>`` over a closed chain of states (rows).

    Each state appears once as a bra and once as a ket, so the result does
    not depend on the phase of any individual state.
    """
    states = np.asarray(states)
    overlaps = np.einsum("ij,ij->i", states.conj(), np.roll(states, -1, axis=0))
    return _wrap(-float(np.sum(np.angle(overlaps))))


def loop_eigenvectors(spec: ModelSpec, loop: LoopSpec, n: int | None = None) -> np.ndarray:
    """Eigenvectors of ``loop.branch`` at each loop point, shape ``(n, levels)``."""
    pts = loop.points(n)
    h_atom, couplings = _atomic_structure(spec)
    stack = h_atom + sum(c * p[:, None, None] for c, p in zip(couplings, pts.T))
    vals, vecs = np.linalg.eigh(stack)
    b = loop.branch
    if not 0 <= b < vals.shape[1]:
        raise ValueError(f"branch {b} outside 0..{vals.shape[1] - 1}")
    gaps = np.full(pts.shape[0], np.inf)
    if b > 0:
        gaps = np.minimum(gaps, vals[:, b] - vals[:, b - 1])
    if b < vals.shape[1] - 1:
        gaps = np.minimum(gaps, vals[:, b + 1] - vals[:, b])
    bad = np.nonzero(gaps <= GAP_TOL)[0]
    if bad.size:
        i = int(bad[0])
        raise DegeneracyError(
            f"branch {b} is degenerate at loop sample {i} (P = {tuple(pts[i])}, gap {gaps[i]:.2e})"
        )
    return vecs[:, :, b]


@dataclass(frozen=True)
class BerryPhase:
    """Discrete Berry phase at ``n_points`` with a Richardson estimate from ``2 n_points``.

    ``error`` bounds the change of ``phase`` under doubling of the sampling.
    """

    phase: float
    extrapolated: float
    error: float
    n_points: int


def berry_phase(spec: ModelSpec, loop: LoopSpec) -> BerryPhase:
    if spec.variant not in ("EpsilonE", "RennerTeller"):
        raise ValueError(f"berry_phase supports EpsilonE and RennerTeller, not {spec.variant}")
    n = loop.n_points
    coarse = wilson_loop_phase(loop_eigenvectors(spec, loop, n))
    fine = wilson_loop_phase(loop_eigenvectors(spec, loop, 2 * n))
    diff = _wrap(fine - coarse)
    # leading discretisation error is O(n^-2)
    extrapolated = _wrap(fine + diff / 3)
    err = float(4 * abs(diff) / 3 + 4 * np.finfo(float).eps * n)
    return BerryPhase(coarse, extrapolated, err, n)


# ---------------------------------------------------------------------------
# intersections


@dataclass(frozen=True)
class IntersectionReport:
    kind: str
    gap_at_origin: float
    exponent: float | None
    branches: tuple[int, int]


def classify_intersection(spec: ModelSpec, rho_range=(1e-4, 1e-2), n_samples: int = 21) -> IntersectionReport:
    """Conical (linear splitting), glancing (quadratic) or avoided at ``P = 0``.

    The two branches closest at the origin are compared; their splitting is
    fitted as ``c rho^k`` by log-log least squares over ``rho_range``.
    """
    if spec.variant not in ("EpsilonE", "RennerTeller"):
        raise ValueError(f"classify_intersection supports EpsilonE and RennerTeller, not {spec.variant}")
    e0 = np.linalg.eigvalsh(atomic_matrix(spec, (0.0, 0.0)))
    b = int(np.argmin(np.diff(e0)))
    pair = (b, b + 1)
    gap0 = float(e0[b + 1] - e0[b])
    if gap0 > 1e-10:
        return IntersectionReport("Avoided", gap0, None, pair)
    rho = np.geomspace(*rho_range, n_samples)
    splits = []
    for theta in (0.3, 0.3 + np.pi / 2, 0.3 + np.pi, 0.3 + 3 * np.pi / 2):
        e = np.array([np.linalg.eigvalsh(atomic_matrix(spec, (r * np.cos(theta), r * np.sin(theta)))) for r in rho])
        splits.append(e[:, b + 1] - e[:, b])
    split = np.mean(splits, axis=0)
    if np.any(split <= 0) or np.any(np.diff(split) <= 0):
        raise ValueError("branch splitting is not monotone near the origin; cannot fit an exponent")
    k = float(np.polyfit(np.log(rho), np.log(split), 1)[0])
    if abs(k - 1) <= 0.05:
        kind = "Conical"
    elif abs(k - 2) <= 0.05:
        kind = "Glancing"
    else:
        raise ValueError(f"splitting exponent {k:.3f} is neither conical nor glancing")
    return IntersectionReport(kind, gap0, k, pair)


# ---------------------------------------------------------------------------
# Heisenberg force


@dataclass(frozen=True)
class ForceReport:
    """``F = -[H, [H, r]]`` for ``r = (X, Y)`` and its operator decomposition.

    ``coefficients["x"]`` expands ``F_x`` in ``X``, ``sigma_y``, ``P_y sigma_z``;
    ``coefficients["y"]`` expands ``F_y`` in ``Y``, ``sigma_x``, ``P_x sigma_z``.
    Fits use only the Fock block at least two levels below each cutoff.
    """

    fx: OperatorMatrix
    fy: OperatorMatrix
    coefficients: dict[str, dict[str, float]]
    interior_residual: float


FORCE_BASIS = {
    "x": ("X", "sigma_y", "P_y sigma_z"),
    "y": ("Y", "sigma_x", "P_x sigma_z"),
}


def heisenberg_force(spec: ModelSpec, space: SpaceDescriptor) -> ForceReport:
    if spec.variant != "EpsilonE":
        raise ValueError("heisenberg_force needs the EpsilonE model")
    _check_space(spec, space)
    h = build_hamiltonian(spec, space)
    s = pauli()
    quad = {lab: quadratures(space.cutoff(lab)) for lab in ("x", "y")}
    basis = {
        "X": space.embed({"x": quad["x"][0]}),
        "Y": space.embed({"y": quad["y"][0]}),
        "sigma_x": space.embed(atom=s["x"]),
        "sigma_y": space.embed(atom=s["y"]),
        "P_y sigma_z": space.embed({"y": quad["y"][1]}, atom=s["z"]),
        "P_x sigma_z": space.embed({"x": quad["x"][1]}, atom=s["z"]),
    }
    inner = ~space.edge_mask(depth=2)
    block = np.ix_(inner, inner)
    forces, coeffs, resid = {}, {}, 0.0
    for comp, pos in (("x", "X"), ("y", "Y")):
        r = OperatorMatrix(space, basis[pos], hermitian=True)
        f = -commutator(h, commutator(h, r))
        forces[comp] = f
        names = FORCE_BASIS[comp]
        design = np.column_stack([basis[nm][block].ravel() for nm in names])
        target = f.matrix[block].ravel()
        c, *_ = np.linalg.lstsq(design, target, rcond=None)
        resid = max(resid, float(np.max(np.abs(design @ c - target))))
        coeffs[comp] = {nm: float(v.real) for nm, v in zip(names, c)}
        resid = max(resid, float(np.max(np.abs(c.imag))))
    return ForceReport(forces["x"], forces["y"], coeffs, resid)
