"""Boundary-impurity chain: spectrum, bound states and the end-site sums.

Run with ``python3 demos/01_chain_spectrum.py``.
"""

import numpy as np

from cavitybus.lattice import (
    ChainSpec,
    coupling_sums,
    direct_diagonalize,
    dispersion_scan,
    find_spectrum_by_poles,
    identity_targets,
)

# Seven sites with impurities at both ends. For large detuning the two end
# sites split off as a nearly degenerate pair of bound states above the band.
table = dispersion_scan(7, np.array([0.0, 2.0, 10.0]))
for row in table:
    print(f"delta={row[0]:5.1f}  energies:", np.array2string(row[1:], precision=4))

# The same spectrum from the zeros of the dressed Green's function.
chain = ChainSpec.symmetric(7, 10.0)
roots, flagged = find_spectrum_by_poles(chain, full_output=True)
print("pole finder vs dense:", np.abs(roots - direct_diagonalize(chain).energies).max())
print("bound-pair splitting:", roots[-1] - roots[-2])

# The end-to-end sum does not depend on the chain length.
for m in (3, 11, 51, 101):
    chain = ChainSpec.symmetric(m, 2.0)
    cross, local, _ = coupling_sums(direct_diagonalize(chain))
    print(f"m={m:3d}  s_cross={cross:+.12f}  s_local={local:.12f}  closed form={identity_targets(chain)}")
