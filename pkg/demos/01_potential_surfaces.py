"""Adiabatic surfaces of the one-mode BetaE model and the Jahn-Teller transition.

The atom couples to the field momentum P through g sigma_x P.  Treating P as
a parameter, the atomic matrix has eigenvalues -/+ sqrt(Omega^2/4 + g^2 P^2);
adding the kinetic analog w P^2/2 gives two potential surfaces.  Once
g^2 > w Omega / 2 the lower one develops two symmetric minima.
"""
import numpy as np

from qedsim import ModelSpec, adiabatic_surfaces, build_hamiltonian, jahn_teller_threshold, locate_minima

thr = jahn_teller_threshold(omega=1.0, Omega=1.0)
print(f"single -> double well at g* = {thr.bisection:.6f} (closed form {thr.closed_form:.6f})")

p = np.linspace(-2.5, 2.5, 11)
for g in (0.5, 1.0):
    spec = ModelSpec("BetaE", omega=1.0, g=g, Omega=1.0)
    lower = adiabatic_surfaces(spec, p).branches[0]
    rep = locate_minima(spec)
    print(f"\ng = {g}: {rep.regime}")
    print("  P      V_minus")
    for x, v in zip(p, lower):
        print(f"  {x:+.2f}  {v:+.4f}")
    for point, v in rep.minima:
        print(f"  minimum at P = {point[0]:+.6f}, V = {v:.6f}")

    # the quantum ground state follows the surfaces: it is lowered and
    # carries photons once the double well forms
    space = spec.space(60)
    vals, vecs = np.linalg.eigh(build_hamiltonian(spec, space).matrix)
    n = np.vdot(vecs[:, 0], np.diag(space.occupation("x")) @ vecs[:, 0]).real
    print(f"  ground energy {vals[0]:.6f}, photons {n:.4f}")
