"""Gauge potentials, Berry phases and intersection types.

Completing the square in P turns each coupling into a matrix vector
potential A_k = -C_k / w_k.  For the two-mode EpsilonE model the components
do not commute, and the conical intersection at P = 0 gives a Berry phase of
pi.  The Renner-Teller model has a glancing intersection and no phase.
"""
import numpy as np

from qedsim import LoopSpec, ModelSpec, berry_phase, classify_intersection, extract_gauge_potentials

models = {
    "BetaE": ModelSpec("BetaE", g=1.0, Omega=1.0),
    "EpsilonE": ModelSpec("EpsilonE", g=1.0, Omega=0.0),
    "RennerTeller": ModelSpec("RennerTeller", g=1.0, E3=1.0),
}
for name, spec in models.items():
    rep = extract_gauge_potentials(spec, spec.space(8))
    print(f"{name:13s} {rep.classification:12s} max|[A_x,A_y]| = {rep.max_commutator:.3f}"
          f"  rewrite residual {rep.rewrite_residual:.1e}")

print()
for name in ("EpsilonE", "RennerTeller"):
    rep = classify_intersection(models[name])
    print(f"{name:13s} intersection {rep.kind} (splitting ~ rho^{rep.exponent:.3f})")
print(f"EpsilonE, Omega = 0.5: {classify_intersection(models['EpsilonE'].replace(Omega=0.5)).kind}")

print()
loops = [
    ("EpsilonE around the cone", models["EpsilonE"], LoopSpec(radius=1.0)),
    ("EpsilonE beside the cone", models["EpsilonE"], LoopSpec(center=(2.0, 0.0), radius=1.0)),
    ("RennerTeller around P = 0", models["RennerTeller"], LoopSpec(radius=1.0)),
    ("EpsilonE, Omega = 0.5", models["EpsilonE"].replace(Omega=0.5), LoopSpec(radius=1.0)),
]
for label, spec, loop in loops:
    bp = berry_phase(spec, loop)
    print(f"{label:28s} phase {bp.phase:+.6f} (= {bp.phase / np.pi:+.4f} pi), error {bp.error:.1e}")
