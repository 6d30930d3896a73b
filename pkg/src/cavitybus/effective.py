"""Effective two-state model of the end atoms and the ideal sqrt(swap) gate.

Eliminating the cavity array and the excited levels in second order leaves
an exchange coupling between ``|01>`` and ``|10>`` plus a Stark shift on
each. The coefficients follow from the end-site coupling sums of the chain
(see :mod:`cavitybus.lattice`), which are independent of the array length:

* odd ``N``: coupling ``(-1)**((N+1)/2) omega1 omega2 / (2 delta)``,
  shifts ``omega_i**2 / (2 delta)``;
* even ``N``: coupling ``(-1)**((N+2)/2) omega1 omega2 j / (delta**2 - j**2)``,
  shifts ``omega_i**2 delta / (delta**2 - j**2)``.

:class:`EffectiveModel` stores the coefficients with these signs. The
dynamics generated by second-order elimination is the negative of that
matrix (levels coupled to the far-detuned ``|e>`` are pushed away from it),
and :meth:`EffectiveModel.hamiltonian` returns the generator with that sign.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConditionViolated, EvenChainResonance, ZeroDetuning

__all__ = [
    "EffectiveModel",
    "build_effective",
    "gate_time",
    "evolve_effective",
    "ideal_sqrt_swap",
    "sqrt_swap_target",
]


@dataclass(frozen=True)
class EffectiveModel:
    coupling: float
    stark1: float
    stark2: float
    n_cavities: int

    @property
    def parity(self):
        return self.n_cavities % 2

    def hamiltonian(self):
        """2x2 generator on ``(|01>, |10>)``.

        ``|01>`` has atom 2 in ``|1>``, so it carries the Stark shift of
        drive 2.
        """
        return -np.array([[self.stark2, self.coupling], [self.coupling, self.stark1]])


def build_effective(params):
    if params.delta == 0:
        raise ZeroDetuning("effective model needs a nonzero detuning")
    n, d, j = params.n_cavities, params.delta, params.j
    o1, o2 = params.omega1, params.omega2
    if n % 2:
        cross = (-1.0) ** ((n + 1) // 2) / (2.0 * d)
        local = 1.0 / (2.0 * d)
    else:
        den = d * d - j * j
        if abs(den) < 1e-10:
            raise EvenChainResonance("even N with delta**2 == j**2")
        cross = (-1.0) ** ((n + 2) // 2) * j / den
        local = d / den
    return EffectiveModel(
        coupling=o1 * o2 * cross, stark1=o1 * o1 * local, stark2=o2 * o2 * local, n_cavities=n
    )


def gate_time(params):
    """Gate duration ``pi delta / (2 omega**2)`` in units of ``1/j``."""
    o1, o2 = abs(params.omega1), abs(params.omega2)
    if abs(o1 - o2) > 1e-12:
        raise ConditionViolated(f"|omega1| = {o1} differs from |omega2| = {o2}")
    if o1 == 0:
        raise ConditionViolated("drive amplitude is zero")
    if params.delta == 0:
        raise ZeroDetuning("gate time needs a nonzero detuning")
    return np.pi * params.delta / (2.0 * o1 * o1)


def evolve_effective(model, amp01, amp10, t):
    """Propagate ``amp01 |01> + amp10 |10>`` for time ``t``."""
    w, v = np.linalg.eigh(model.hamiltonian())
    psi = np.array([amp01, amp10], dtype=complex)
    out = v @ (np.exp(-1j * w * t) * (v.T @ psi))
    return complex(out[0]), complex(out[1])


def ideal_sqrt_swap():
    """Ideal gate on ``(|00>, |01>, |10>, |11>)``."""
    u = np.eye(4, dtype=complex)
    a, b = (1 + 1j) / 2, (1 - 1j) / 2
    u[1:3, 1:3] = [[a, b], [b, a]]
    return u


def sqrt_swap_target():
    """``(amp01, amp10)`` of the gate applied to ``|01>``."""
    return (1 + 1j) / 2, (1 - 1j) / 2
