"""Direction-dependent dynamics from a non-Abelian gauge potential.

A coherent state in mode x with the atom in level 2 is launched with phase
+pi/4 or -pi/4, so the field circulates one way or the other.  With
non-commuting A_x, A_y the atomic inversion W(t) depends on the sense of
circulation; with g = 0 both traces coincide.
"""
import numpy as np

from qedsim import EvolutionConfig, ModelSpec, run_nonabelian_loop

cfg = EvolutionConfig(t_max=40.0, n_steps=8000, record_every=400, observables=("W", "X", "Y"))
for g in (0.3, 0.0):
    spec = ModelSpec("EpsilonE", omega=1.0, g=g, Omega=1.0)
    cw = run_nonabelian_loop(spec, "cw", 2.0, None, cfg)
    ccw = run_nonabelian_loop(spec, "ccw", 2.0, None, cfg)
    print(f"g = {g}")
    print("   t      W_cw     W_ccw")
    for t, a, b in zip(cw.times, cw.series["W"], ccw.series["W"]):
        print(f"  {t:5.1f}  {a:+.4f}  {b:+.4f}")
    print(f"  max |W_cw - W_ccw| = {np.max(np.abs(cw.series['W'] - ccw.series['W'])):.3e}\n")
