"""Closed and open time evolution with observable recording.

Closed systems integrate ``d psi/dt = -i H psi`` and open systems the Lindblad
equation

    d rho/dt = -i[H, rho] + sum_k kappa_k D[a_k] rho + gamma D[sigma_-] rho,
    D[L] rho = L rho L^+ - {L^+ L, rho}/2.

The default integrator is classical fixed-step RK4; ``method="adaptive"``
hands the same right-hand side to scipy's DOP853.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from .models import ModelSpec, build_hamiltonian
from .operators import (
    OperatorMatrix,
    QuantumState,
    SpaceDescriptor,
    SpaceError,
    coherent_ket,
    level_projector,
    quadratures,
    truncation_loss,
)

NEGATIVE_EIG_ABORT = -1e-6
DEFAULT_OBSERVABLES = ("W", "X", "Y", "n_x", "n_y", "trace")


class NumericalAbort(RuntimeError):
    """Non-finite values appeared during propagation."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} at step {step}")
        self.step = step


@dataclass(frozen=True)
class LossSpec:
    """Cavity decay per mode and spontaneous emission ``gamma D[|lower><upper|]``.

    ``kappa`` is a single rate for every mode or a mapping label -> rate.
    """

    kappa: float | Mapping[str, float] = 0.0
    gamma: float = 0.0
    lowering: tuple[int, int] = (2, 1)

    def __post_init__(self):
        rates = self.kappa.values() if isinstance(self.kappa, Mapping) else [self.kappa]
        if any(r < 0 for r in rates) or self.gamma < 0:
            raise ValueError("loss rates must be non-negative")

    def kappa_for(self, label: str) -> float:
        if isinstance(self.kappa, Mapping):
            return float(self.kappa.get(label, 0.0))
        return float(self.kappa)

    def jump_operators(self, space: SpaceDescriptor) -> list[np.ndarray]:
        """Rate-weighted jump operators ``sqrt(rate) L``."""
        ops = []
        for lab in space.labels:
            k = self.kappa_for(lab)
            if k > 0:
                n = space.cutoff(lab)
                ops.append(np.sqrt(k) * space.embed({lab: np.diag(np.sqrt(np.arange(1, n)), 1)}))
        if self.gamma > 0:
            lo, up = self.lowering
            ops.append(np.sqrt(self.gamma) * space.embed(atom=level_projector(space.atom_levels, lo, up)))
        return ops

    @property
    def lossless(self) -> bool:
        return self.gamma == 0 and all(
            r == 0 for r in (self.kappa.values() if isinstance(self.kappa, Mapping) else [self.kappa])
        )


@dataclass(frozen=True)
class EvolutionConfig:
    """Propagation settings.

    ``n_steps`` fixes the RK4 step ``t_max / n_steps``; the adaptive method
    uses it only to place record points.  ``tol`` is the accuracy claimed for
    recorded observables.
    """

    t_max: float
    n_steps: int
    method: str = "rk4"
    record_every: int = 1
    observables: tuple[str, ...] = DEFAULT_OBSERVABLES
    tol: float = 1e-8
    atol: float = 1e-12
    rtol: float = 1e-10

    def __post_init__(self):
        if not self.t_max >= 0:
            raise ValueError("t_max must be non-negative")
        if self.n_steps < 1 or self.record_every < 1:
            raise ValueError("n_steps and record_every must be >= 1")
        if self.method not in ("rk4", "adaptive"):
            raise ValueError(f"unknown method {self.method!r}")
        if min(self.tol, self.atol, self.rtol) <= 0:
            raise ValueError("tolerances must be positive")
        object.__setattr__(self, "observables", tuple(self.observables))

    @property
    def dt(self) -> float:
        return self.t_max / self.n_steps


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    series: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)
    final_state: QuantumState | None = None


# ---------------------------------------------------------------------------
# observables


def observable_operators(
    space: SpaceDescriptor, names: Sequence[str], skip_missing: bool = False
) -> dict[str, np.ndarray | None]:
    """Matrices for named observables; ``purity``/``trace``/``norm`` map to None.

    With ``skip_missing`` observables of modes the space lacks are dropped
    instead of raising; the default observable set relies on this.

    ``W`` is ``|1><1| - |2><2|``, ``X``/``Y`` are the X-quadratures of the
    first and second mode, ``P_<label>`` the P-quadrature and ``n_<label>``
    the photon number of a mode.
    """
    out = {}
    labels = space.labels
    for name in names:
        if skip_missing and (
            (name == "Y" and len(labels) < 2) or (name[:2] in ("n_", "P_") and name[2:] not in labels)
        ):
            continue
        if name in ("purity", "trace", "norm"):
            out[name] = None
        elif name == "W":
            m = space.atom_levels
            out[name] = space.embed(atom=level_projector(m, 1, 1) - level_projector(m, 2, 2))
        elif name in ("X", "Y"):
            k = 0 if name == "X" else 1
            if k >= len(labels):
                raise SpaceError(f"observable {name!r} needs at least {k + 1} modes")
            out[name] = space.embed({labels[k]: quadratures(space.cutoff(labels[k]))[0]})
        elif name.startswith("n_") or name.startswith("P_"):
            lab = name[2:]
            n = space.cutoff(lab)
            local = np.diag(np.arange(n, dtype=complex)) if name[0] == "n" else quadratures(n)[1]
            out[name] = space.embed({lab: local})
        else:
            raise ValueError(f"unknown observable {name!r}")
    return out


def _measure(ops, psi=None, rho=None) -> dict[str, float]:
    vals = {}
    for name, op in ops.items():
        if psi is not None:
            if op is None:
                vals[name] = float(np.vdot(psi, psi).real)
            else:
                vals[name] = float(np.vdot(psi, op @ psi).real)
        else:
            if name == "purity":
                vals[name] = float(np.vdot(rho, rho).real)
            elif op is None:
                vals[name] = float(np.trace(rho).real)
            else:
                vals[name] = float(np.einsum("ij,ji->", op, rho).real)
    return vals


def _fast(m: np.ndarray):
    """CSR copy for sparse-enough matrices, the dense array otherwise."""
    if np.count_nonzero(m) < 0.1 * m.size:
        return sparse.csr_matrix(m)
    return m


def _rk4(rhs: Callable, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _record_steps(cfg: EvolutionConfig) -> np.ndarray:
    steps = np.arange(0, cfg.n_steps + 1, cfg.record_every)
    if steps[-1] != cfg.n_steps:
        steps = np.append(steps, cfg.n_steps)
    return steps


def _propagate(y0, rhs, cfg, measure, post=None, check=None):
    """Shared driver: returns times, recorded values, final y, stats."""
    steps = _record_steps(cfg)
    times = steps * cfg.dt
    rows = [measure(y0)]
    stats = {"method": cfg.method, "dt": cfg.dt, "n_steps": cfg.n_steps, "aborted": False}
    y = y0
    if cfg.t_max == 0:
        return times[:1], rows, y, stats
    if cfg.method == "rk4":
        step = 0
        for target in steps[1:]:
            while step < target:
                # overflow is caught below as a non-finite state
                with np.errstate(over="ignore", invalid="ignore"):
                    y = _rk4(rhs, y, cfg.dt)
                step += 1
                if post is not None:
                    y = post(y)
                if not np.all(np.isfinite(y)):
                    raise NumericalAbort("non-finite state", step)
            rows.append(measure(y))
            if check is not None and (reason := check(y)):
                stats.update(aborted=True, abort_reason=reason, abort_step=step)
                return times[: len(rows)], rows, y, stats
        stats["rhs_evaluations"] = 4 * cfg.n_steps
    else:
        shape = y0.shape
        sol = solve_ivp(
            lambda t, v: rhs(v.reshape(shape)).ravel(),
            (0.0, cfg.t_max), y0.ravel(), method="DOP853",
            t_eval=times, atol=cfg.atol, rtol=cfg.rtol,
        )
        if not sol.success or not np.all(np.isfinite(sol.y)):
            raise NumericalAbort(f"adaptive integrator failed: {sol.message}", int(sol.nfev))
        stats["rhs_evaluations"] = int(sol.nfev)
        for i in range(1, times.size):
            y = sol.y[:, i].reshape(shape)
            if post is not None:
                y = post(y)
            rows.append(measure(y))
            if check is not None and (reason := check(y)):
                stats.update(aborted=True, abort_reason=reason, abort_step=int(steps[i]))
                return times[: len(rows)], rows, y, stats
    return times, rows, y, stats


def _collect(times, rows) -> dict[str, np.ndarray]:
    return {k: np.array([r[k] for r in rows]) for k in rows[0]}


def evolve_schrodinger(h: OperatorMatrix, psi0: QuantumState, cfg: EvolutionConfig) -> TrajectoryRecord:
    """Propagate a ket under ``h`` and record ``cfg.observables``."""
    if not psi0.is_ket:
        raise ValueError("evolve_schrodinger needs a ket")
    if psi0.space != h.space:
        raise SpaceError("state and Hamiltonian live on different spaces")
    ops = observable_operators(h.space, cfg.observables, cfg.observables == DEFAULT_OBSERVABLES)
    # shifting by the mean energy only changes a global phase but keeps RK4 accurate
    e_ref = float(np.vdot(psi0.data, h.matrix @ psi0.data).real)
    hs = _fast(h.matrix - e_ref * np.eye(h.space.dim))

    def rhs(psi):
        return -1j * (hs @ psi)

    times, rows, psi, stats = _propagate(
        psi0.data.copy(), rhs, cfg, lambda v: _measure(ops, psi=v)
    )
    psi = psi * np.exp(-1j * e_ref * times[-1])
    stats["norm_drift"] = abs(float(np.linalg.norm(psi)) - 1.0)
    final = QuantumState(h.space, psi / np.linalg.norm(psi))
    return TrajectoryRecord(times, _collect(times, rows), stats, final)


def evolve_lindblad(
    h: OperatorMatrix,
    rho0: QuantumState,
    losses: LossSpec,
    cfg: EvolutionConfig,
) -> TrajectoryRecord:
    """Propagate a density matrix (kets are promoted) under the Lindblad equation.

    ``rho`` is re-symmetrised after every step.  If its smallest eigenvalue
    at a record point drops below -1e-6 the run stops early and
    ``metadata["aborted"]`` is set.
    """
    if rho0.space != h.space:
        raise SpaceError("state and Hamiltonian live on different spaces")
    space = h.space
    rho_init = rho0.density().data.copy()
    ops = observable_operators(space, cfg.observables, cfg.observables == DEFAULT_OBSERVABLES)
    dense_jumps = losses.jump_operators(space)
    decay = sum((l.conj().T @ l for l in dense_jumps), start=np.zeros((space.dim,) * 2))
    jumps = [_fast(l) for l in dense_jumps]
    jumps_dag = [l.conj().T for l in jumps]
    h_eff = _fast(h.matrix - 0.5j * decay)
    h_eff_dag = h_eff.conj().T

    def rhs(rho):
        out = -1j * (h_eff @ rho) + 1j * (h_eff_dag.T @ rho.T).T
        for l, ld in zip(jumps, jumps_dag):
            out = out + l @ (ld.T @ rho.T).T
        return out

    def post(rho):
        return 0.5 * (rho + rho.conj().T)

    min_eig = [np.inf]

    def check(rho):
        lo = float(np.linalg.eigvalsh(rho)[0])
        min_eig[0] = min(min_eig[0], lo)
        if lo < NEGATIVE_EIG_ABORT:
            return f"negative eigenvalue {lo:.3e}"
        return None

    times, rows, rho, stats = _propagate(
        rho_init, rhs, cfg, lambda r: _measure(ops, rho=r), post=post, check=check
    )
    stats["min_eigenvalue"] = min_eig[0]
    stats["trace_drift"] = abs(float(np.trace(rho).real) - 1.0)
    rho = 0.5 * (rho + rho.conj().T)
    try:
        final = QuantumState(space, rho)
    except ValueError:
        final = None
    return TrajectoryRecord(times, _collect(times, rows), stats, final)


def evolve(h, state, losses, cfg) -> TrajectoryRecord:
    """Closed propagation for kets without losses, Lindblad otherwise."""
    if state.is_ket and (losses is None or losses.lossless):
        return evolve_schrodinger(h, state, cfg)
    return evolve_lindblad(h, state, losses or LossSpec(), cfg)


# ---------------------------------------------------------------------------
# preset experiments


# Initial coherent-state phase per circulation sense.  The pair +/- pi/4 are
# time-reversal partners; +/- pi/2 would be related by the parity symmetry of
# the EpsilonE model and give identical traces.
LOOP_PHASES = {"ccw": np.pi / 4, "cw": -np.pi / 4}


def _two_mode_space(spec: ModelSpec, space: SpaceDescriptor | None, cutoff: int) -> SpaceDescriptor:
    if spec.variant != "EpsilonE":
        raise ValueError(f"this experiment needs the EpsilonE model, got {spec.variant}")
    return space if space is not None else spec.space(cutoff)


def run_nonabelian_loop(
    spec: ModelSpec,
    direction: str,
    alpha_mag: float,
    losses: LossSpec | None,
    cfg: EvolutionConfig,
    *,
    space: SpaceDescriptor | None = None,
    phase: float | None = None,
    allow_truncation: bool = True,
) -> TrajectoryRecord:
    """Coherent state in mode x boosted clockwise or anticlockwise, y empty, atom in level 2.

    ``phase`` overrides the coherent-state phase that encodes the direction.
    """
    direction = direction.lower()
    if direction not in LOOP_PHASES:
        raise ValueError("direction must be 'cw' or 'ccw'")
    space = _two_mode_space(spec, space, 12)
    phi = LOOP_PHASES[direction] if phase is None else phase
    alpha = alpha_mag * np.exp(1j * phi)
    psi0 = coherent_ket(space, "x", alpha, level=2, allow_truncation=allow_truncation)
    rec = evolve(build_hamiltonian(spec, space), psi0, losses, cfg)
    rec.metadata.update(
        direction=direction, phase=phi, alpha=[alpha.real, alpha.imag],
        truncation_loss=truncation_loss(space.cutoff("x"), alpha),
    )
    return rec


def swept_area(x: np.ndarray, y: np.ndarray) -> float:
    """Signed area ``(1/2) integral (x dy - y dx)`` swept by the polyline about the origin."""
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def run_hall_experiment(
    spec: ModelSpec,
    atom_level: int,
    alpha_mag: float,
    losses: LossSpec | None,
    cfg: EvolutionConfig,
    *,
    space: SpaceDescriptor | None = None,
    allow_truncation: bool = True,
    sense_periods: float = 4.0,
) -> TrajectoryRecord:
    """Real coherent amplitude in mode x, vacuum in y, atom in ``atom_level``.

    Adds to the metadata ``swept_area``, the signed area swept by
    ``(<X>, <Y>)`` over the first ``sense_periods`` trap periods (its sign is
    the rotation sense), ``swept_area_total`` over the whole run and
    ``transfer_ratio = max <n_y> / <n_x>(0)``.  Over long runs the
    oscillation plane keeps precessing and the total area can change sign,
    so only the early window is a stable rotation-sense indicator.
    """
    if atom_level not in (1, 2):
        raise ValueError("atom_level must be 1 or 2")
    space = _two_mode_space(spec, space, 12)
    need = {"X", "Y", "n_x", "n_y"}
    obs = tuple(cfg.observables) + tuple(sorted(need - set(cfg.observables)))
    cfg = EvolutionConfig(**{**cfg.__dict__, "observables": obs})
    psi0 = coherent_ket(space, "x", complex(alpha_mag), level=atom_level, allow_truncation=allow_truncation)
    rec = evolve(build_hamiltonian(spec, space), psi0, losses, cfg)
    s = rec.series
    window = rec.times <= sense_periods * 2 * np.pi / spec.omegas[0] + 1e-12
    rec.metadata.update(
        atom_level=atom_level,
        sense_window=float(rec.times[window][-1]),
        swept_area=swept_area(s["X"][window], s["Y"][window]),
        swept_area_total=swept_area(s["X"], s["Y"]),
        transfer_ratio=float(np.max(s["n_y"]) / s["n_x"][0]),
        truncation_loss=truncation_loss(space.cutoff("x"), alpha_mag),
    )
    return rec


@dataclass
class ZitterResult:
    trajectory: TrajectoryRecord
    frequency: float
    gap: float
    energies: tuple[float, float]


def dominant_frequency(times: np.ndarray, signal: np.ndarray, pad: int = 16) -> float:
    """Angular frequency of the strongest peak of the mean-removed signal.

    Zero-padded FFT followed by a parabolic fit through the peak bin and its
    neighbours on the log magnitude.
    """
    sig = np.asarray(signal) - np.mean(signal)
    n = sig.size
    dt = times[1] - times[0]
    spec = np.abs(np.fft.rfft(sig * np.hanning(n), n=pad * n))
    freqs = np.fft.rfftfreq(pad * n, dt)
    k = int(np.argmax(spec[1:])) + 1
    if 1 <= k < spec.size - 1:
        a, b, c = np.log(spec[k - 1: k + 2] + 1e-300)
        shift = 0.5 * (a - c) / (a - 2 * b + c)
    else:
        shift = 0.0
    return 2 * np.pi * (freqs[k] + shift * (freqs[1] - freqs[0]))


def zitterbewegung_probe(
    spec: ModelSpec,
    seed_alpha: complex,
    cfg: EvolutionConfig,
    *,
    space: SpaceDescriptor | None = None,
    observable: str = "X",
) -> ZitterResult:
    """Interference of one upper- and one lower-branch eigenvector of the Dirac limit.

    The two eigenvectors are those with the largest overlap with the seed
    ``|seed_alpha>_x |0>_y`` combined with atomic level 1 (upper) or 2
    (lower).  The dominant frequency of ``<X>(t)`` is compared with their
    energy gap.
    """
    if spec.variant != "DiracLimit":
        raise ValueError("zitterbewegung_probe needs the DiracLimit model")
    space = space if space is not None else spec.space(12)
    h = build_hamiltonian(spec, space)
    vals, vecs = np.linalg.eigh(h.matrix)
    picks = []
    for level in (1, 2):
        seed = coherent_ket(space, "x", seed_alpha, level=level).data
        picks.append(int(np.argmax(np.abs(vecs.conj().T @ seed))))
    up, lo = picks
    gap = abs(vals[up] - vals[lo])
    if up == lo or gap <= 1e-8:
        raise ValueError("upper and lower seeds select degenerate eigenvectors")
    psi = (vecs[:, up] + vecs[:, lo]) / np.sqrt(2)
    obs = tuple(dict.fromkeys((observable,) + tuple(cfg.observables)))
    cfg = EvolutionConfig(**{**cfg.__dict__, "observables": obs})
    rec = evolve_schrodinger(h, QuantumState(space, psi), cfg)
    freq = dominant_frequency(rec.times, rec.series[observable])
    rec.metadata.update(frequency=freq, gap=gap)
    return ZitterResult(rec, freq, float(gap), (float(vals[up]), float(vals[lo])))
