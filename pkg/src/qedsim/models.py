"""Model Hamiltonians, potential surfaces and effective gauge potentials.

All models share the structure

    H = sum_k w_k (P_k^2 + X_k^2)/2 + H_atom + sum_k C_k P_k

where ``C_k`` is a matrix on the atom.  In the "momentum as coordinate"
picture the atomic matrix ``H_atom + sum_k C_k P_k`` plus ``sum_k w_k P_k^2/2``
defines the adiabatic surfaces, and ``A_k = -C_k / w_k`` are the vector
potentials of the rewritten form ``sum_k w_k ((P_k - A_k)^2 + X_k^2)/2 + ...``.

The Dirac-limit model keeps only the harmonic ``w (X^2 + Y^2)/2`` part of the
free field.  The spin-less Dirac oscillator is built separately, see
:func:`build_hamiltonian`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Sequence

import numpy as np
from scipy import optimize

from .operators import (
    OperatorMatrix,
    SpaceDescriptor,
    SpaceError,
    destroy,
    gell_mann,
    level_projector,
    pauli,
    quadratures,
)

VARIANTS = ("BetaE", "EpsilonE", "RennerTeller", "DiracLimit", "DiracOscillator")
_REQUIRED = {
    "BetaE": ("g", "Omega"),
    "EpsilonE": ("g", "Omega"),
    "DiracLimit": ("g", "Omega"),
    "RennerTeller": ("g", "E3"),
    "DiracOscillator": ("c", "m"),
}
_OPTIONAL = ("g", "Omega", "E3", "c", "m")

COMMUTE_TOL = 1e-12


class ModelError(ValueError):
    """Invalid model parameters or an unsupported variant/space combination."""


@dataclass(frozen=True)
class ModelSpec:
    """Hamiltonian variant plus its physical parameters (hbar = 1).

    ``omega`` is either one frequency shared by all modes or one per mode.
    Only the parameters a variant uses may be set; the rest stay ``None``.
    """

    variant: str
    omega: float | tuple[float, ...] = 1.0
    g: float | None = None
    Omega: float | None = None
    E3: float | None = None
    c: float | None = None
    m: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ModelError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        om = self.omega
        om = tuple(float(w) for w in om) if np.ndim(om) else float(om)
        object.__setattr__(self, "omega", om)
        if np.ndim(om) and len(om) != len(self.mode_labels):
            raise ModelError(
                f"{self.variant} has {len(self.mode_labels)} modes but {len(om)} frequencies"
            )
        if np.any(np.asarray(om) <= 0):
            raise ModelError(f"omega must be positive, got {om}")
        need = _REQUIRED[self.variant]
        for name in _OPTIONAL:
            val = getattr(self, name)
            if name in need and val is None:
                raise ModelError(f"{self.variant} requires parameter {name!r}")
            if name not in need and val is not None:
                raise ModelError(f"{self.variant} does not take parameter {name!r}")
            if val is not None:
                if not np.isfinite(val) or np.iscomplexobj(val):
                    raise ModelError(f"parameter {name!r} must be a finite real number")
                object.__setattr__(self, name, float(val))
        if self.variant == "DiracOscillator" and (self.c <= 0 or self.m <= 0):
            raise ModelError("DiracOscillator needs c > 0 and m > 0")

    @property
    def mode_labels(self) -> tuple[str, ...]:
        return ("x",) if self.variant == "BetaE" else ("x", "y")

    @property
    def atom_levels(self) -> int:
        return 3 if self.variant == "RennerTeller" else 2

    @property
    def omegas(self) -> tuple[float, ...]:
        if isinstance(self.omega, tuple):
            return self.omega
        return (self.omega,) * len(self.mode_labels)

    def replace(self, **changes) -> "ModelSpec":
        kw = {k: getattr(self, k) for k in ("variant", "omega", "g", "Omega", "E3", "c", "m")}
        kw.update(changes)
        return ModelSpec(**kw)

    def space(self, cutoff: int | Sequence[int]) -> SpaceDescriptor:
        """Space with the variant's mode labels and the given cutoff(s)."""
        cut = [cutoff] * len(self.mode_labels) if np.ndim(cutoff) == 0 else list(cutoff)
        return SpaceDescriptor(tuple(zip(self.mode_labels, cut)), self.atom_levels)


def _atomic_structure(spec: ModelSpec) -> tuple[np.ndarray, list[np.ndarray]]:
    """Bare atomic energy matrix and one coupling matrix per mode."""
    g = spec.g
    if spec.variant in ("BetaE", "EpsilonE", "DiracLimit"):
        s = pauli()
        h_atom = 0.5 * spec.Omega * s["z"]
        couplings = [g * s["x"]] if spec.variant == "BetaE" else [g * s["x"], g * s["y"]]
        return h_atom, couplings
    if spec.variant == "RennerTeller":
        h_atom = spec.E3 * level_projector(3, 3, 3)
        return h_atom, [g * gell_mann(4), g * gell_mann(6)]
    raise ModelError(f"{spec.variant} has no momentum-parametrised atomic matrix")


def _check_space(spec: ModelSpec, space: SpaceDescriptor):
    if space.labels != spec.mode_labels or space.atom_levels != spec.atom_levels:
        raise SpaceError(
            f"{spec.variant} needs modes {spec.mode_labels} and {spec.atom_levels} atomic levels; "
            f"got modes {space.labels} with {space.atom_levels} levels"
        )


def build_hamiltonian(spec: ModelSpec, space: SpaceDescriptor) -> OperatorMatrix:
    """Dense Hamiltonian of ``spec`` on ``space``.

    The free-field term uses the truncated quadratures squared, so
    ``(P^2 + X^2)/2`` differs from ``a^+a + 1/2`` only in the top Fock level.

    For the spin-less Dirac oscillator ``c sigma.(p - i m w sigma_z r) + m c^2 sigma_z``
    the quadratures enter through the oscillator length ``1/sqrt(m w)``:
    ``r = X/sqrt(m w)`` and ``p = sqrt(m w) P``.
    """
    _check_space(spec, space)
    if spec.variant == "DiracOscillator":
        return _dirac_oscillator(spec, space)
    h_atom, couplings = _atomic_structure(spec)
    mat = space.embed(atom=h_atom)
    for lab, w, c in zip(spec.mode_labels, spec.omegas, couplings):
        x, p = quadratures(space.cutoff(lab))
        if spec.variant == "DiracLimit":
            free = 0.5 * w * (x @ x)
        else:
            free = 0.5 * w * (p @ p + x @ x)
        mat = mat + space.embed({lab: free}) + space.embed({lab: p}, atom=c)
    return OperatorMatrix(space, mat, hermitian=True)


def _dirac_oscillator(spec: ModelSpec, space: SpaceDescriptor) -> OperatorMatrix:
    s = pauli()
    w = spec.omegas[0]
    scale = spec.c * sqrt(spec.m * w)
    xx, px = quadratures(space.cutoff("x"))
    xy, py = quadratures(space.cutoff("y"))
    # sigma.(p - i m w sigma_z r) = sigma_x (p_x + m w y) + sigma_y (p_y - m w x)
    mat = scale * (
        space.embed({"x": px}, atom=s["x"])
        + space.embed({"y": xy}, atom=s["x"])
        + space.embed({"y": py}, atom=s["y"])
        - space.embed({"x": xx}, atom=s["y"])
    )
    mat = mat + spec.m * spec.c**2 * space.embed(atom=s["z"])
    return OperatorMatrix(space, mat, hermitian=True)


# ---------------------------------------------------------------------------
# potential surfaces


@dataclass(frozen=True)
class SurfaceGrid:
    """Potential branches on a 1-d (``P``) or 2-d (``P_x`` x ``P_y``) momentum grid.

    ``branches`` has shape ``(n_branches, *grid_shape)``; 2-d grids use ``ij``
    indexing, so ``branches[b, i, j]`` sits at ``(axes[0][i], axes[1][j])``.
    """

    axes: tuple[np.ndarray, ...]
    branches: np.ndarray
    kind: str


def _grid_points(spec: ModelSpec, grid) -> tuple[tuple[np.ndarray, ...], list[np.ndarray]]:
    ndim = len(spec.mode_labels)
    if ndim == 1:
        axes = (np.atleast_1d(np.asarray(grid, dtype=float)),)
        if axes[0].ndim != 1:
            raise ModelError("a one-mode model takes a 1-d momentum grid")
    else:
        if isinstance(grid, np.ndarray) or len(grid) != 2:
            raise ModelError("a two-mode model takes a pair (P_x axis, P_y axis)")
        axes = tuple(np.atleast_1d(np.asarray(a, dtype=float)) for a in grid)
    for a in axes:
        if a.size < 3:
            raise ModelError("momentum grid needs at least 3 points per axis")
        if not np.all(np.isfinite(a)):
            raise ModelError("momentum grid contains non-finite values")
    mesh = np.meshgrid(*axes, indexing="ij")
    return axes, mesh


def atomic_matrix(spec: ModelSpec, momenta: Sequence[float]) -> np.ndarray:
    """Momentum-dependent atomic matrix ``H_atom + sum_k C_k P_k`` at one point."""
    h_atom, couplings = _atomic_structure(spec)
    return h_atom + sum(c * p for c, p in zip(couplings, momenta))


def _kinetic_analog(spec: ModelSpec, mesh) -> np.ndarray:
    if spec.variant == "DiracLimit":
        return np.zeros_like(mesh[0])
    return sum(0.5 * w * p**2 for w, p in zip(spec.omegas, mesh))


def adiabatic_surfaces(spec: ModelSpec, grid) -> SurfaceGrid:
    """Eigenvalues of the atomic matrix at each grid point plus ``sum w P^2/2``.

    Branches come out sorted ascending pointwise.
    """
    axes, mesh = _grid_points(spec, grid)
    h_atom, couplings = _atomic_structure(spec)
    stack = h_atom + sum(c * p[..., None, None] for c, p in zip(couplings, mesh))
    vals = np.linalg.eigvalsh(stack)
    branches = np.moveaxis(vals, -1, 0) + _kinetic_analog(spec, mesh)
    return SurfaceGrid(axes, branches, "adiabatic")


def diabatic_surfaces(spec: ModelSpec, grid) -> SurfaceGrid:
    """Diagonal (uncoupled) counterparts of the adiabatic surfaces.

    For BetaE the diabatic states are the ``sigma_x`` eigenstates, giving
    ``w P^2/2 -/+ g P`` in that order.  Other variants use the diagonal of the
    atomic matrix in the level basis, in level order.
    """
    axes, mesh = _grid_points(spec, grid)
    h_atom, couplings = _atomic_structure(spec)
    stack = h_atom + sum(c * p[..., None, None] for c, p in zip(couplings, mesh))
    if spec.variant == "BetaE":
        _, u = np.linalg.eigh(pauli()["x"])
        stack = u.conj().T @ stack @ u
    diag = np.real(np.diagonal(stack, axis1=-2, axis2=-1))
    branches = np.moveaxis(diag, -1, 0) + _kinetic_analog(spec, mesh)
    return SurfaceGrid(axes, branches, "diabatic")


# ---------------------------------------------------------------------------
# Jahn-Teller minima


@dataclass(frozen=True)
class MinimaReport:
    """Minima of the lower adiabatic branch.

    For EpsilonE in the sombrero regime the minima form a ring of radius
    ``ring_radius``; ``minima`` then holds the representative point on the
    positive ``P_x`` axis.
    """

    minima: list[tuple[tuple[float, ...], float]]
    regime: str
    threshold: float
    threshold_printed: float
    ring_radius: float | None = None


def _lower_branch_radial(spec: ModelSpec, rho):
    w = spec.omegas[0]
    return 0.5 * w * rho**2 - np.sqrt(0.25 * spec.Omega**2 + spec.g**2 * rho**2)


def locate_minima(spec: ModelSpec) -> MinimaReport:
    """Analytic stationary points of the lower branch, cross-checked on a grid.

    The lower branch ``w rho^2/2 - sqrt(Omega^2/4 + g^2 rho^2)`` has minima
    away from the origin iff ``g^2 > w |Omega| / 2``.
    """
    if spec.variant not in ("BetaE", "EpsilonE"):
        raise ModelError("locate_minima supports BetaE and EpsilonE")
    if len(set(spec.omegas)) != 1:
        raise ModelError("locate_minima needs degenerate mode frequencies")
    w, g, om = spec.omegas[0], abs(spec.g), abs(spec.Omega)
    threshold = sqrt(w * om / 2)
    printed = sqrt(w * om) / 2
    if g > 0 and g * g > 0.5 * w * om:
        rho0 = sqrt(g * g / (w * w) - om * om / (4 * g * g))
    else:
        rho0 = 0.0
    vmin = float(_lower_branch_radial(spec, rho0))
    _grid_check(spec, rho0, vmin)

    two_d = spec.variant == "EpsilonE"
    pad = (0.0,) if two_d else ()
    if rho0 == 0.0:
        return MinimaReport([((0.0,) + pad, vmin)], "SingleWell", threshold, printed)
    if two_d:
        return MinimaReport([((rho0, 0.0), vmin)], "Sombrero", threshold, printed, ring_radius=rho0)
    return MinimaReport([((-rho0,), vmin), ((rho0,), vmin)], "DoubleWell", threshold, printed)


def _grid_check(spec: ModelSpec, rho0: float, vmin: float):
    w, g = spec.omegas[0], abs(spec.g)
    span = 2 * rho0 + 2 * g / w + 1.0
    p = np.linspace(-span, span, 2001)
    grid = p if spec.variant == "BetaE" else (p, np.array([-1e-3, 0.0, 1e-3]))
    lower = adiabatic_surfaces(spec, grid).branches[0]
    if lower.ndim == 2:
        lower = lower[:, 1]
    i = int(np.argmin(lower))
    lo, hi = p[max(i - 1, 0)], p[min(i + 1, p.size - 1)]
    res = optimize.minimize_scalar(
        lambda x: float(_lower_branch_radial(spec, abs(x))), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-10},
    )
    if res.fun < vmin - 1e-9 * max(1.0, abs(vmin)) or abs(lower[i] - vmin) > 1e-3 * max(1.0, abs(vmin)):
        raise RuntimeError(
            f"grid minimum {res.fun!r} disagrees with stationary-point value {vmin!r}"
        )


@dataclass(frozen=True)
class ThresholdReport:
    """Coupling at which the lower branch turns from single to double well."""

    bisection: float
    closed_form: float
    printed: float


def jahn_teller_threshold(omega: float = 1.0, Omega: float = 1.0, tol: float = 1e-7) -> ThresholdReport:
    """Bisect the BetaE regime change in ``g``.

    ``closed_form`` is ``sqrt(w Omega / 2)``; ``printed`` is ``sqrt(w Omega)/2``,
    carried along for comparison.
    """
    def double(g):
        spec = ModelSpec("BetaE", omega=omega, g=g, Omega=Omega)
        return locate_minima(spec).regime == "DoubleWell"

    lo, hi = 0.0, 1.0
    while not double(hi):
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if double(mid) else (mid, hi)
    return ThresholdReport(0.5 * (lo + hi), sqrt(omega * abs(Omega) / 2), sqrt(omega * abs(Omega)) / 2)


# ---------------------------------------------------------------------------
# gauge potentials


@dataclass(frozen=True)
class GaugeReport:
    """Vector potentials per mode, scalar potential and their algebra."""

    components: dict[str, np.ndarray]
    scalar_potential: np.ndarray
    commutators: dict[tuple[str, str], np.ndarray]
    classification: str
    rewrite_residual: float | None = None

    @property
    def max_commutator(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.commutators.values()), default=0.0)


def extract_gauge_potentials(spec: ModelSpec, space: SpaceDescriptor | None = None) -> GaugeReport:
    """``A_k = -C_k / w_k`` and ``Phi = -(1/2) sum_k w_k A_k^2`` on the atomic subspace.

    With ``space`` given, the rewrite residual is evaluated as well.
    """
    if spec.variant not in ("BetaE", "EpsilonE", "RennerTeller"):
        raise ModelError(f"gauge potentials are defined for BetaE, EpsilonE, RennerTeller, not {spec.variant}")
    _, couplings = _atomic_structure(spec)
    comps = {lab: -c / w for lab, c, w in zip(spec.mode_labels, couplings, spec.omegas)}
    phi = -0.5 * sum(w * a @ a for w, a in zip(spec.omegas, comps.values()))
    labels = list(comps)
    comms = {
        (k, l): comps[k] @ comps[l] - comps[l] @ comps[k]
        for i, k in enumerate(labels)
        for l in labels[i + 1:]
    }
    abelian = all(np.max(np.abs(c)) <= COMMUTE_TOL for c in comms.values())
    resid = gauge_rewrite_residual(spec, space) if space is not None else None
    return GaugeReport(comps, phi, comms, "abelian" if abelian else "non-abelian", resid)


def gauge_rewrite_residual(spec: ModelSpec, space: SpaceDescriptor) -> float:
    """Max-norm distance between the minimal-coupling form and :func:`build_hamiltonian`.

    The rewritten Hamiltonian ``sum_k w_k ((P_k - A_k)^2 + X_k^2)/2 + H_atom + Phi``
    is assembled from full-space matrices, squaring ``P_k - A_k`` explicitly.
    """
    _check_space(spec, space)
    report = extract_gauge_potentials(spec)
    h_atom, _ = _atomic_structure(spec)
    mat = space.embed(atom=h_atom + report.scalar_potential)
    for lab, w in zip(spec.mode_labels, spec.omegas):
        x, p = quadratures(space.cutoff(lab))
        shifted = space.embed({lab: p}) - space.embed(atom=report.components[lab])
        xx = space.embed({lab: x @ x})
        mat = mat + 0.5 * w * (shifted @ shifted + xx)
    return float(np.max(np.abs(mat - build_hamiltonian(spec, space).matrix)))


# ---------------------------------------------------------------------------
# Dirac oscillator <-> Jaynes-Cummings


def _distinct(vals: np.ndarray, cluster_tol: float) -> np.ndarray:
    vals = np.sort(vals)
    if vals.size == 0:
        return vals
    gaps = np.diff(vals) > cluster_tol * np.maximum(1.0, np.abs(vals[1:]))
    groups = np.split(vals, np.nonzero(gaps)[0] + 1)
    return np.array([g.mean() for g in groups])


def _by_magnitude(vals: np.ndarray) -> np.ndarray:
    return vals[np.lexsort((vals, np.round(np.abs(vals), 8)))]


def interior_levels(h: np.ndarray, edge: np.ndarray, cluster_tol: float = 1e-9) -> np.ndarray:
    """Distinct eigenvalues of ``h`` whose eigenspace holds a vector free of ``edge`` states.

    An eigenvector with no weight on the truncation edge is an eigenvector of
    the untruncated operator, so these levels carry no truncation artifacts.
    Returned sorted by ``|E|``, negative first within a +/- pair.
    """
    vals, vecs = np.linalg.eigh(h)
    keep = []
    start = 0
    for stop in range(1, vals.size + 1):
        if stop < vals.size and vals[stop] - vals[stop - 1] <= cluster_tol * max(1.0, abs(vals[stop])):
            continue
        v = vecs[edge, start:stop]
        if np.linalg.eigvalsh(v.conj().T @ v)[0] <= 1e-10:
            keep.append(float(np.mean(vals[start:stop])))
        start = stop
    return _by_magnitude(np.array(keep))


def jaynes_cummings_hamiltonian(detuning: float, coupling: float, cutoff: int) -> np.ndarray:
    """``(detuning/2) sigma_z + coupling (sigma_+ b + sigma_- b^+)`` on qubit (x) one mode."""
    s = pauli()
    b = destroy(cutoff)
    sp = level_projector(2, 1, 2)
    return 0.5 * detuning * np.kron(s["z"], np.eye(cutoff)) + coupling * (
        np.kron(sp, b) + np.kron(sp.T, b.conj().T)
    )


@dataclass(frozen=True)
class JCMatch:
    matched_levels: int
    max_dev: float
    dirac_levels: np.ndarray
    jc_levels: np.ndarray
    coupling: float


def dirac_oscillator_jc_match(spec: ModelSpec, space: SpaceDescriptor, tol: float = 1e-8) -> JCMatch:
    """Compare the Dirac-oscillator spectrum with its Jaynes-Cummings image.

    The spin-less 2+1 Dirac oscillator equals ``2 c sqrt(m w) (sigma_+ b^+ + sigma_- b)
    + m c^2 sigma_z`` with ``b = (a_y - i a_x)/sqrt2``; swapping the two atomic
    levels turns this into Jaynes-Cummings form with detuning ``-2 m c^2``.
    Both sides are diagonalised densely; only truncation-free levels are compared.
    """
    if spec.variant != "DiracOscillator":
        raise ModelError("dirac_oscillator_jc_match needs the DiracOscillator variant")
    h_do = build_hamiltonian(spec, space).matrix
    coupling = 2 * spec.c * sqrt(spec.m * spec.omegas[0])
    n = min(space.cutoffs)
    # H_Do only moves one photon at a time while flipping the atom, so the
    # photon-number-bounded sector n_x + n_y < N is closed up to its top
    # shell and sigma_z (-1)^(n_x + n_y) splits it in two.
    total = space.occupation("x") + space.occupation("y")
    sign = np.where(space.atomic_level() == 1, 1, -1) * (-1) ** total
    parts = []
    for parity in (1, -1):
        idx = np.nonzero((total < n) & (sign == parity))[0]
        parts.append(interior_levels(h_do[np.ix_(idx, idx)], total[idx] == n - 1))
    e_do = _by_magnitude(_distinct(np.concatenate(parts), 1e-9))
    h_jc = jaynes_cummings_hamiltonian(-2 * spec.m * spec.c**2, coupling, n)
    e_jc = interior_levels(h_jc, np.tile(np.arange(n) == n - 1, 2))
    k = min(e_do.size, e_jc.size)
    dev = np.abs(e_do[:k] - e_jc[:k])
    bad = np.nonzero(dev > tol)[0]
    matched = int(bad[0]) if bad.size else k
    max_dev = float(dev[:matched].max()) if matched else float("nan")
    return JCMatch(matched, max_dev, e_do, e_jc, coupling)
