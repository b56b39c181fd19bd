"""Relativistic analogs: the Dirac oscillator and Zitterbewegung.

The spin-less Dirac oscillator in 2+1 dimensions maps onto a Jaynes-Cummings
Hamiltonian; its levels E^2 = m^2 c^4 + 4 m c^2 w n are compared below.
Dropping the P^2 term of the EpsilonE model gives a Dirac-like Hamiltonian
whose positive and negative branches interfere, making <X> tremble at the
branch gap.
"""
import numpy as np

from qedsim import EvolutionConfig, ModelSpec, dirac_oscillator_jc_match, zitterbewegung_probe

do = ModelSpec("DiracOscillator", omega=1.0, c=1.0, m=1.0)
match = dirac_oscillator_jc_match(do, do.space(20))
print(f"{match.matched_levels} levels agree (max deviation {match.max_dev:.1e})")
print("  Dirac osc.   Jaynes-Cummings   sqrt(1 + 4n)")
for e_do, e_jc in zip(match.dirac_levels[:10], match.jc_levels[:10]):
    n = round((e_do**2 - 1) / 4)
    print(f"  {e_do:+.8f}  {e_jc:+.8f}       {np.sqrt(1 + 4 * n):.8f}")

spec = ModelSpec("DiracLimit", omega=1.0, g=0.2, Omega=1.0)
res = zitterbewegung_probe(spec, 0.3, EvolutionConfig(t_max=200.0, n_steps=40000, record_every=10))
print(f"\nbranch energies {res.energies[0]:+.6f}, {res.energies[1]:+.6f}")
print(f"gap {res.gap:.6f}, <X> oscillates at {res.frequency:.6f}")
