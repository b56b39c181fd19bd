"""Truncated Fock-space operator algebra for one atom coupled to cavity modes.

Basis ordering is fixed: the atomic index varies slowest, then the modes in
reverse listed order, so that mode 0 is the fastest index.  The Kronecker
layout is therefore ``atom (x) mode[K-1] (x) ... (x) mode[0]``.  Every other
module goes through :class:`SpaceDescriptor` for index maps and embeddings.

Atomic levels are numbered from 1, so ``|1><2|`` is ``projector(space, 1, 2)``.
Units have hbar = 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import lgamma, log, sqrt
from typing import Mapping

import numpy as np
from scipy import stats

HERMITIAN_RTOL = 1e-12
KET_NORM_TOL = 1e-10
DM_TRACE_TOL = 1e-10
DM_MIN_EIG = -1e-8
# Poisson tail mass allowed beyond the cutoff for a coherent state.
COHERENT_TAIL_TOL = 1e-10


class SpaceError(ValueError):
    """Raised for inconsistent spaces, labels, or indices."""


# ---------------------------------------------------------------------------
# single-slot matrices


def destroy(n: int) -> np.ndarray:
    """Lowering operator on an ``n``-level truncated Fock space."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def quadratures(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X, P)`` with ``X = (a + a^+)/sqrt2`` and ``P = i(a^+ - a)/sqrt2``.

    This sign of ``P`` gives ``[X, P] = +i`` away from the cutoff.
    """
    a = destroy(n)
    ad = a.conj().T
    return (a + ad) / sqrt(2.0), 1j * (ad - a) / sqrt(2.0)


def level_projector(m: int, i: int, j: int) -> np.ndarray:
    """``|i><j|`` on an ``m``-level atom (1-based levels)."""
    if not (1 <= i <= m and 1 <= j <= m):
        raise SpaceError(f"atomic indices ({i}, {j}) outside 1..{m}")
    out = np.zeros((m, m), dtype=complex)
    out[i - 1, j - 1] = 1.0
    return out


def pauli() -> dict[str, np.ndarray]:
    """Pauli matrices in the level basis with ``sigma_z = |1><1| - |2><2|``."""
    return {
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "z": np.array([[1, 0], [0, -1]], dtype=complex),
    }


def gell_mann(k: int) -> np.ndarray:
    """Gell-Mann matrix ``lambda_k`` (k = 1..8), standard normalisation."""
    l = np.zeros((3, 3), dtype=complex)
    if k == 1:
        l[0, 1] = l[1, 0] = 1
    elif k == 2:
        l[0, 1], l[1, 0] = -1j, 1j
    elif k == 3:
        l[0, 0], l[1, 1] = 1, -1
    elif k == 4:
        l[0, 2] = l[2, 0] = 1
    elif k == 5:
        l[0, 2], l[2, 0] = -1j, 1j
    elif k == 6:
        l[1, 2] = l[2, 1] = 1
    elif k == 7:
        l[1, 2], l[2, 1] = -1j, 1j
    elif k == 8:
        l[0, 0] = l[1, 1] = 1 / sqrt(3)
        l[2, 2] = -2 / sqrt(3)
    else:
        raise ValueError(f"no Gell-Mann matrix with index {k}")
    return l


def coherent_amplitudes(n: int, alpha: complex) -> np.ndarray:
    """Fock amplitudes ``exp(-|a|^2/2) a^k / sqrt(k!)`` for ``k < n`` (not renormalised)."""
    k = np.arange(n)
    if alpha == 0:
        out = np.zeros(n, dtype=complex)
        out[0] = 1.0
        return out
    r, phi = abs(alpha), np.angle(alpha)
    logmag = -0.5 * r * r + k * log(r) - 0.5 * np.array([lgamma(j + 1.0) for j in k])
    return np.exp(logmag) * np.exp(1j * phi * k)


def required_cutoff(alpha: complex) -> int:
    """Smallest cutoff admitted by :func:`coherent_ket` for amplitude ``alpha``."""
    mean = abs(alpha) ** 2
    n = max(2, int(np.ceil(4 * mean)))
    while stats.poisson.sf(n - 1, mean) > COHERENT_TAIL_TOL:
        n += 1
    return n


# ---------------------------------------------------------------------------
# space


@dataclass(frozen=True)
class SpaceDescriptor:
    """Bosonic modes with Fock cutoffs plus an ``atom_levels``-level atom.

    ``modes`` is an ordered sequence of ``(label, cutoff)`` pairs.
    """

    modes: tuple[tuple[str, int], ...]
    atom_levels: int = 2

    def __post_init__(self):
        modes = tuple((str(lab), int(n)) for lab, n in self.modes)
        object.__setattr__(self, "modes", modes)
        labels = [lab for lab, _ in modes]
        if len(set(labels)) != len(labels):
            raise SpaceError(f"mode labels must be unique, got {labels}")
        for lab, n in modes:
            if n < 2:
                raise SpaceError(f"mode {lab!r}: cutoff must be >= 2, got {n}")
        if self.atom_levels not in (2, 3):
            raise SpaceError(f"atom_levels must be 2 or 3, got {self.atom_levels}")
        if self.dim < 4:
            raise SpaceError(f"total dimension {self.dim} < 4")

    @classmethod
    def build(cls, atom_levels: int = 2, **cutoffs: int) -> "SpaceDescriptor":
        """Convenience form: ``SpaceDescriptor.build(2, x=12, y=12)``."""
        return cls(tuple(cutoffs.items()), atom_levels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.modes)

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return tuple(n for _, n in self.modes)

    @property
    def dim(self) -> int:
        return self.atom_levels * int(np.prod(self.cutoffs, dtype=int))

    def mode_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SpaceError(
                f"unknown mode {label!r}; space has modes {list(self.labels)}"
            ) from None

    def cutoff(self, label: str) -> int:
        return self.modes[self.mode_index(label)][1]

    def embed(
        self,
        local: Mapping[str, np.ndarray] | None = None,
        atom: np.ndarray | None = None,
    ) -> np.ndarray:
        """Tensor product of local factors, identity on every slot not given."""
        local = dict(local or {})
        for lab in local:
            self.mode_index(lab)
        factors = [atom if atom is not None else np.eye(self.atom_levels)]
        for lab, n in reversed(self.modes):
            factors.append(local.get(lab, np.eye(n)))
        out = factors[0]
        for f in factors[1:]:
            out = np.kron(out, f)
        return np.asarray(out, dtype=complex)

    def embed_vector(self, level: int, mode_vectors: Mapping[str, np.ndarray] | None = None) -> np.ndarray:
        """Product ket ``|level> (x) modes``; modes not given are in vacuum."""
        if not 1 <= level <= self.atom_levels:
            raise SpaceError(f"atomic level {level} outside 1..{self.atom_levels}")
        mode_vectors = dict(mode_vectors or {})
        out = np.zeros(self.atom_levels, dtype=complex)
        out[level - 1] = 1.0
        for lab, n in reversed(self.modes):
            v = mode_vectors.get(lab)
            if v is None:
                v = np.zeros(n, dtype=complex)
                v[0] = 1.0
            elif len(v) != n:
                raise SpaceError(f"mode {lab!r} vector has length {len(v)}, cutoff is {n}")
            out = np.kron(out, v)
        return out

    @cached_property
    def index_table(self) -> np.ndarray:
        """Integer array ``(dim, 1 + K)``: atomic level (1-based) then occupations per mode."""
        shape = [self.atom_levels] + [n for _, n in reversed(self.modes)]
        grid = np.indices(shape).reshape(len(shape), -1).T
        table = np.empty_like(grid)
        table[:, 0] = grid[:, 0] + 1
        table[:, 1:] = grid[:, :0:-1]  # back to listed mode order
        return table

    def occupation(self, label: str) -> np.ndarray:
        return self.index_table[:, 1 + self.mode_index(label)]

    def atomic_level(self) -> np.ndarray:
        return self.index_table[:, 0]

    def edge_mask(self, depth: int = 1) -> np.ndarray:
        """True for basis states within ``depth`` levels of any mode's cutoff."""
        occ = self.index_table[:, 1:]
        return np.any(occ >= np.array(self.cutoffs) - depth, axis=1)


# ---------------------------------------------------------------------------
# operators


def _check_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> float:
    """Anti-Hermitian defect if it exceeds ``rtol * max|m|``, else 0."""
    dev = float(np.max(np.abs(m - m.conj().T)))
    return dev if dev > rtol * float(np.max(np.abs(m))) else 0.0


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense ``D x D`` complex matrix bound to a :class:`SpaceDescriptor`."""

    space: SpaceDescriptor
    matrix: np.ndarray
    hermitian: bool | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise SpaceError(f"operator shape {m.shape} does not match space dimension {d}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if self.hermitian and _check_hermitian(m) > 0:
            raise ValueError("operator flagged hermitian is not Hermitian within tolerance")

    def _same_space(self, other: "OperatorMatrix"):
        if other.space != self.space:
            raise SpaceError("operators live on different spaces")

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.matrix.conj().T, self.hermitian)

    def is_hermitian(self) -> bool:
        return _check_hermitian(self.matrix) == 0.0

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            self._same_space(other)
            herm = True if (self.hermitian and other.hermitian) else None
            return OperatorMatrix(self.space, self.matrix + other.matrix, herm)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OperatorMatrix):
            return self + (-other)
        return NotImplemented

    def __neg__(self):
        return OperatorMatrix(self.space, -self.matrix, self.hermitian)

    def __mul__(self, c):
        if np.isscalar(c):
            herm = True if (self.hermitian and np.isreal(c)) else None
            return OperatorMatrix(self.space, c * self.matrix, herm)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._same_space(other)
            return OperatorMatrix(self.space, self.matrix @ other.matrix)
        return NotImplemented

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix)))


def identity(space: SpaceDescriptor) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.dim), True)


def embedded(space: SpaceDescriptor, local=None, atom=None, hermitian=None) -> OperatorMatrix:
    """Operator from local factors, see :meth:`SpaceDescriptor.embed`."""
    return OperatorMatrix(space, space.embed(local, atom), hermitian)


def make_annihilator(space: SpaceDescriptor, mode_label: str) -> OperatorMatrix:
    n = space.cutoff(mode_label)
    return embedded(space, {mode_label: destroy(n)})


def make_number(space: SpaceDescriptor, mode_label: str) -> OperatorMatrix:
    n = space.cutoff(mode_label)
    return embedded(space, {mode_label: np.diag(np.arange(n, dtype=complex))}, hermitian=True)


def make_quadratures(space: SpaceDescriptor, mode_label: str) -> tuple[OperatorMatrix, OperatorMatrix]:
    x, p = quadratures(space.cutoff(mode_label))
    return (
        embedded(space, {mode_label: x}, hermitian=True),
        embedded(space, {mode_label: p}, hermitian=True),
    )


def make_atomic_projector(space: SpaceDescriptor, i: int, j: int) -> OperatorMatrix:
    """``|i><j|`` on the atom, identity on the modes."""
    return embedded(space, atom=level_projector(space.atom_levels, i, j), hermitian=(i == j) or None)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    if a.space != b.space:
        raise SpaceError("commutator of operators on different spaces")
    return OperatorMatrix(a.space, a.matrix @ b.matrix - b.matrix @ a.matrix)


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A ket (1-d ``data``) or density matrix (2-d ``data``) on ``space``."""

    space: SpaceDescriptor
    data: np.ndarray

    def __post_init__(self):
        d = self.space.dim
        v = np.array(self.data, dtype=complex)
        if v.ndim == 1:
            if v.shape != (d,):
                raise SpaceError(f"ket length {v.shape[0]} != space dimension {d}")
            norm = np.linalg.norm(v)
            if abs(norm - 1.0) > KET_NORM_TOL:
                raise ValueError(f"ket norm {norm!r} deviates from 1")
        elif v.ndim == 2:
            if v.shape != (d, d):
                raise SpaceError(f"density matrix shape {v.shape} != ({d}, {d})")
            if np.max(np.abs(v - v.conj().T)) > HERMITIAN_RTOL * max(1.0, np.max(np.abs(v))):
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(v).real
            if abs(tr - 1.0) > DM_TRACE_TOL:
                raise ValueError(f"density matrix trace {tr!r} deviates from 1")
            lo = np.linalg.eigvalsh(v)[0]
            if lo < DM_MIN_EIG:
                raise ValueError(f"density matrix has negative eigenvalue {lo!r}")
        else:
            raise ValueError("state data must be 1-d (ket) or 2-d (density matrix)")
        v.flags.writeable = False
        object.__setattr__(self, "data", v)

    @property
    def is_ket(self) -> bool:
        return self.data.ndim == 1

    def density(self) -> "QuantumState":
        if not self.is_ket:
            return self
        return QuantumState(self.space, np.outer(self.data, self.data.conj()))

    def expect(self, op: OperatorMatrix) -> complex:
        if op.space != self.space:
            raise SpaceError("operator and state live on different spaces")
        if self.is_ket:
            return complex(np.vdot(self.data, op.matrix @ self.data))
        return complex(np.trace(op.matrix @ self.data))

    def norm(self) -> float:
        if self.is_ket:
            return float(np.linalg.norm(self.data))
        return float(np.trace(self.data).real)


def basis_ket(space: SpaceDescriptor, level: int, occupations: Mapping[str, int] | None = None) -> QuantumState:
    """Fock product state ``|level; n_1, n_2, ...>``."""
    vecs = {}
    for lab, k in (occupations or {}).items():
        n = space.cutoff(lab)
        if not 0 <= k < n:
            raise SpaceError(f"occupation {k} outside 0..{n - 1} for mode {lab!r}")
        v = np.zeros(n, dtype=complex)
        v[k] = 1.0
        vecs[lab] = v
    return QuantumState(space, space.embed_vector(level, vecs))


def product_ket(
    space: SpaceDescriptor,
    level: int,
    mode_vectors: Mapping[str, np.ndarray] | None = None,
) -> QuantumState:
    """Normalised product ket from per-mode amplitude vectors."""
    v = space.embed_vector(level, mode_vectors)
    return QuantumState(space, v / np.linalg.norm(v))


def coherent_ket(
    space: SpaceDescriptor,
    mode_label: str,
    alpha: complex,
    level: int = 1,
    *,
    allow_truncation: bool = False,
) -> QuantumState:
    """Truncated, renormalised coherent state ``|alpha>`` in one mode.

    Other modes are in vacuum and the atom in ``level``.  The cutoff must
    satisfy ``|alpha|^2 <= N/4`` and leave a Poisson tail below 1e-10;
    ``allow_truncation=True`` skips that check for deliberately small
    desk-scale spaces.
    """
    n = space.cutoff(mode_label)
    need = required_cutoff(alpha)
    if n < need and not allow_truncation:
        raise SpaceError(
            f"coherent amplitude |alpha|={abs(alpha):.4g} needs a cutoff of at least "
            f"{need} for mode {mode_label!r} (has {n})"
        )
    return product_ket(space, level, {mode_label: coherent_amplitudes(n, alpha)})


def truncation_loss(n: int, alpha: complex) -> float:
    """Probability mass of ``|alpha>`` beyond an ``n``-level cutoff."""
    return float(stats.poisson.sf(n - 1, abs(alpha) ** 2))
