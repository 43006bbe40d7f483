"""
Sensing with a GHZ state
========================

The GHZ probe (|e>^N + |g>^N)/sqrt 2 splits into a 2x2 coherence block and a
diagonal block of binomial populations.  With a bound state the diagonal
block carries a time-independent QFI, 2 N Z'^2 / (1 - Z^2) for large N,
so the information saturates instead of vanishing.  For small N the
coherence block still contributes and the QFI keeps growing.
"""
import numpy as np

from reservoir_qfi import EstimandSelector, SpectralDensity, TimeGrid, asymptote_ghz
from reservoir_qfi import bound_state_sensitivity, find_bound_state, qfi_series

sel = EstimandSelector("eta")
J = SpectralDensity.ohmic(0.1, 1.0, 30.0)
grid = TimeGrid.default(J, 200.0)
bs = find_bound_state(J)
dZ = bound_state_sensitivity(J, 1.0, sel).dZ
late = grid.times >= 100

for N in (5, 100, 200):
    F = qfi_series(J, 1.0, grid, sel, "ghz", N, "exact").F
    plateau = asymptote_ghz(bs, dZ, N)
    line = f"N = {N:3d}: F(50) = {F[int(50 / grid.dt)]:.4e}  F(200) = {F[-1]:.4e}"
    if N >= 100:
        line += f"  late mean / plateau formula = {F[late].mean() / plateau:.4f}"
    else:
        line += f"  still growing, plateau formula only {plateau:.4e}"
    print(line)

# Without a bound state every column decays to zero.
J6 = SpectralDensity.ohmic(0.1, 1.0, 6.0)
grid6 = TimeGrid.default(J6, 200.0)
F6 = qfi_series(J6, 1.0, grid6, sel, "ghz", 5, "exact").F
print(f"omega_c = 6, N = 5: peak F = {F6.max():.3e}, F(200) = {F6[-1]:.3e}")
