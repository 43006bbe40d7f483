"""
When does the qubit keep a bound state?
=======================================

A qubit of frequency omega0 = 1 sits in an Ohmic-family reservoir
J(w) = eta w^s omega_c^(1-s) exp(-w/omega_c).  A bound state below the
band edge exists once omega0 < int J(w)/w dw = eta omega_c Gamma(s).
"""
import math

import numpy as np

from reservoir_qfi import SpectralDensity, bound_state_threshold, discretized_spectrum, find_bound_state
from reservoir_qfi import locate_threshold

# The criterion is a single integral, known in closed form for this family.
J = SpectralDensity.ohmic(eta=0.1, s=1.0, omega_c=30.0)
print(f"eta omega_c Gamma(s) = {bound_state_threshold(J):.6f}  (omega0 = 1)")

# Bisection on the cutoff recovers the closed-form boundary 1/(eta Gamma(s)).
star = locate_threshold(J, 1.0, "omega_c")
print(f"omega_c threshold    = {star:.9f}  closed form {1 / (0.1 * math.gamma(1.0)):.9f}")

# Either side of it: no pole below the band, then a pole with residue Z.
for omega_c in (7.0, 8.0, 20.0, 30.0):
    bs = find_bound_state(SpectralDensity.ohmic(0.1, 1.0, omega_c))
    if bs is None:
        print(f"omega_c = {omega_c:5.1f}: no bound state")
    else:
        print(f"omega_c = {omega_c:5.1f}: E_b = {bs.E_b:+.6f}  Z = {bs.Z:.6f}")

# The same pole appears as the lowest eigenvalue of a finely discretized
# single-excitation Hamiltonian; it converges as the mode count grows.
bs = find_bound_state(J)
for n in (250, 500, 1000):
    ground = discretized_spectrum(J, 1.0, n_modes=n).eigenvalues[0]
    print(f"{n:5d} modes: lowest eigenvalue {ground:+.6f}  (pole {bs.E_b:+.6f}, gap {abs(ground - bs.E_b):.1e})")

# Without a bound state the spectrum starts at the band edge.
low = discretized_spectrum(SpectralDensity.ohmic(0.1, 1.0, 8.0), 1.0, n_modes=500).eigenvalues
print(f"omega_c = 8: lowest eigenvalue {low[0]:+.2e}, all >= 0: {bool(np.all(low > -1e-9))}")
