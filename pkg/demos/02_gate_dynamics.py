"""Full versus effective dynamics of the sqrt(swap) gate.

The end atoms exchange an excitation through the cavity array. At the gate
time ``T = pi delta / (2 omega**2)`` the state |01> has become
``(1+i)/2 |01> + (1-i)/2 |10>`` for any odd number of cavities.
"""

import numpy as np

from cavitybus.dynamics import fidelity_peak, transfer_fidelity
from cavitybus.effective import build_effective, evolve_effective, gate_time, sqrt_swap_target
from cavitybus.model import ModelParams

for n in (3, 5, 29, 99):
    params = ModelParams.for_gate(n, 0.03)
    t_gate = gate_time(params)
    t_peak, f_peak = fidelity_peak(params)
    f_gate = transfer_fidelity(params, [t_gate])[0]
    print(f"N={n:3d}  T={t_gate:.1f}  F(T)={f_gate:.4f}  peak {f_peak:.4f} at {t_peak / t_gate:.4f} T")

params = ModelParams.for_gate(5, 0.03)
model = build_effective(params)
amps = np.array(evolve_effective(model, 1.0, 0.0, gate_time(params)))
print("effective model overlap with target:", abs(np.vdot(sqrt_swap_target(), amps)) ** 2)
