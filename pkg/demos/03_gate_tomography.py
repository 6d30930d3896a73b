"""Average gate fidelity and chi-matrix tomography, closed and open.

The open-system runs integrate the master equation on the 0-2 excitation
space (1 + 9 + 39 states for five cavities) and take about a minute.
"""

import numpy as np

from cavitybus.effective import gate_time, ideal_sqrt_swap
from cavitybus.model import ModelParams
from cavitybus.tomography import (
    average_fidelity,
    chi_overlap,
    chi_tomography,
    reconstruct_channel,
    residual_phase_11,
    unitary_channel,
)

ideal = chi_tomography(unitary_channel(ideal_sqrt_swap()))

for omega in (0.01, 0.03, 0.05):
    params = ModelParams.for_gate(5, omega)
    ch = reconstruct_channel(params, gate_time(params))
    print(
        f"closed, omega={omega}: F={average_fidelity(ch):.5f}  leakage={ch.leakage():.2e}"
        f"  |11> phase={residual_phase_11(params, gate_time(params)):+.2e}"
    )

# decay rates from (g, gamma, kappa) = (2.5e9, 1.6e7, 4e5) Hz with j = g
params = ModelParams.for_gate(5, 0.03, gamma=1.6e7 / 2.5e9, kappa=4e5 / 2.5e9)
ch = reconstruct_channel(params, gate_time(params), open_system=True)
chi = chi_tomography(ch)
print(f"open, experimental rates: F={average_fidelity(ch):.5f}  chi overlap={chi_overlap(chi, ideal):.5f}")

largest = np.argsort(-np.abs(chi.matrix).ravel())[:4]
for flat in largest:
    a, b = divmod(flat, 16)
    print(f"  chi[{chi.labels[a]},{chi.labels[b]}] = {chi.matrix[a, b]:.4f}")
