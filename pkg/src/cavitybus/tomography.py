"""Two-qubit channel of the end atoms, average gate fidelity and chi matrix.

Channels act on 4x4 operators over ``(|00>, |01>, |10>, |11>)`` and are
stored as 16x16 superoperators on row-major ``vec``, so
``vec(A X B) = kron(A, B.T) vec(X)``. Population that ends outside the
computational states with empty cavities is lost from the channel, which is
therefore trace-decreasing in general.
"""

import functools
from dataclasses import dataclass

import numpy as np

from .dynamics import LindbladSolver, evolve_unitary, jump_operators
from .effective import ideal_sqrt_swap
from .errors import DimensionMismatch, ZeroTrace
from .model import (
    COMPUTATIONAL_LABELS,
    build_hamiltonian,
    computational_indices,
    direct_sum_basis,
    embed_computational_state,
    enumerate_sector,
)

__all__ = [
    "GateChannel",
    "ChiMatrix",
    "PAULI",
    "MODIFIED_PAULI",
    "operator_basis",
    "unitary_channel",
    "unitary_kraus_channel",
    "depolarizing_channel",
    "closed_gate_matrix",
    "reconstruct_channel",
    "channel_trajectory",
    "average_fidelity",
    "chi_tomography",
    "chi_to_superoperator",
    "chi_overlap",
    "residual_phase_11",
]

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)

PAULI = (("I", _I), ("X", _X), ("Y", _Y), ("Z", _Z))
# Y -> -iY makes every basis element real
MODIFIED_PAULI = (("I", _I), ("X", _X), ("Yt", -1j * _Y), ("Z", _Z))


def operator_basis(kind="modified"):
    """16 two-qubit tensor products, row-major (``II, IX, ..., ZZ``).

    Returns ``(labels, matrices)``.
    """
    single = {"modified": MODIFIED_PAULI, "pauli": PAULI}[kind]
    labels = [a + b for a, _ in single for b, _ in single]
    mats = [np.kron(p, q) for _, p in single for _, q in single]
    return labels, np.array(mats)


@dataclass(frozen=True)
class GateChannel:
    superoperator: np.ndarray

    def __post_init__(self):
        if self.superoperator.shape != (16, 16):
            raise DimensionMismatch(f"superoperator shape {self.superoperator.shape}")

    def apply(self, x):
        """Image of any 4x4 operator (linear extension to non-Hermitian input)."""
        return (self.superoperator @ np.asarray(x, dtype=complex).reshape(16)).reshape(4, 4)

    def choi(self):
        """``sum_ij |i><j| (x) channel(|i><j|)``."""
        s = self.superoperator.reshape(4, 4, 4, 4)  # [k, l, i, j]
        return s.transpose(2, 0, 3, 1).reshape(16, 16)

    def min_choi_eigenvalue(self):
        c = self.choi()
        return float(np.linalg.eigvalsh((c + c.conj().T) / 2).min())

    def leakage(self):
        """Population lost for the maximally mixed input, ``1 - tr E(I/4)``."""
        return float(1.0 - np.trace(self.apply(np.eye(4) / 4)).real)

    def output_traces(self):
        """``tr E(|i><i|)`` for each computational basis state."""
        return np.array([np.trace(self.apply(np.diag(np.eye(4)[i]))).real for i in range(4)])


def unitary_channel(u):
    u = np.asarray(u, dtype=complex)
    return GateChannel(np.kron(u, u.conj()))


def depolarizing_channel():
    """``X -> tr(X) I / 4``."""
    s = np.zeros((16, 16), dtype=complex)
    s[np.arange(4) * 5, :] = np.eye(4).reshape(16)[np.newaxis, :] / 4
    return GateChannel(s)


def closed_gate_matrix(params, t):
    """Amplitudes ``<b, vac| U(t) |a, vac>`` for computational ``a``, ``b``.

    ``t`` may be an array; the result then has shape ``(len(t), 4, 4)``.
    Columns are inputs. Entries between different sectors vanish.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    k = np.zeros((len(times), 4, 4), dtype=complex)
    n = params.n_cavities
    for sector in (0, 1, 2):
        labels = [lab for lab in COMPUTATIONAL_LABELS if embed_computational_state(lab, n)[0] == sector]
        basis = enumerate_sector(n, sector)
        h = build_hamiltonian(params, basis)
        rows = {lab: basis.index[embed_computational_state(lab, n)[1]] for lab in labels}
        for a in labels:
            psi0 = np.zeros(len(basis), dtype=complex)
            psi0[rows[a]] = 1.0
            states = evolve_unitary(h, psi0, times)
            for b in labels:
                k[:, COMPUTATIONAL_LABELS.index(b), COMPUTATIONAL_LABELS.index(a)] = states[:, rows[b]]
    return k[0] if np.ndim(t) == 0 else k


def channel_trajectory(params, times, open_system=False, tol=1e-8):
    """:class:`GateChannel` at each of ``times``.

    Closed systems propagate the four computational states in their
    sectors. Open systems propagate the sixteen ``|i><j|`` inputs under the
    master equation on the 0-2 excitation space.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if not open_system:
        return [unitary_kraus_channel(k) for k in closed_gate_matrix(params, times)]
    basis = direct_sum_basis(params.n_cavities)
    solver = LindbladSolver(
        build_hamiltonian(params, basis), jump_operators(params, basis), tol=tol
    )
    ci = computational_indices(basis)
    d = len(basis)
    inputs = np.zeros((16, d, d), dtype=complex)
    for a in range(4):
        for b in range(4):
            inputs[4 * a + b, ci[a], ci[b]] = 1.0
    out = solver.propagate(inputs, times)
    block = out[:, :, ci][:, :, :, ci]  # (time, input, 4, 4)
    return [GateChannel(block[i].reshape(16, 16).T.copy()) for i in range(len(times))]


def unitary_kraus_channel(k):
    """Channel ``X -> K X K^dagger`` for a single (possibly non-unitary) ``K``."""
    return GateChannel(np.kron(k, np.conj(k)))


def reconstruct_channel(params, t, open_system=False, tol=1e-8):
    return channel_trajectory(params, [t], open_system=open_system, tol=tol)[0]


def average_fidelity(channel, ideal=None):
    """Average gate fidelity against the unitary ``ideal`` (default: sqrt(swap)).

    ``(sum_j tr[U P_j^dagger U^dagger E(P_j)] + d**2) / (d**2 (d + 1))``
    over the sixteen two-qubit Pauli products ``P_j``, ``d = 4``.
    """
    u = ideal_sqrt_swap() if ideal is None else np.asarray(ideal, dtype=complex)
    _, paulis = operator_basis("pauli")
    d = 4
    total = sum(np.trace(u @ p.conj().T @ u.conj().T @ channel.apply(p)) for p in paulis)
    return float(((total + d * d) / (d * d * (d + 1))).real)


@functools.lru_cache(maxsize=None)
def _chi_design(kind):
    _, mats = operator_basis(kind)
    # column (m, n) holds vec of the superoperator of X -> E_m X E_n^dagger
    cols = [np.kron(em, en.conj()).reshape(-1) for em in mats for en in mats]
    return np.array(cols).T


@dataclass(frozen=True)
class ChiMatrix:
    matrix: np.ndarray
    labels: tuple
    kind: str = "modified"

    @property
    def trace(self):
        return float(np.trace(self.matrix).real)


def chi_tomography(channel, kind="modified"):
    """Process matrix with ``E(X) = sum_mn chi_mn E_m X E_n^dagger``."""
    labels, _ = operator_basis(kind)
    coeffs = np.linalg.solve(_chi_design(kind), channel.superoperator.reshape(-1))
    chi = coeffs.reshape(16, 16)
    return ChiMatrix((chi + chi.conj().T) / 2, tuple(labels), kind)


def chi_to_superoperator(chi):
    return (_chi_design(chi.kind) @ chi.matrix.reshape(-1)).reshape(16, 16)


def chi_overlap(a, b):
    """``tr(a b) / (tr a tr b)``."""
    ta, tb = a.trace, b.trace
    if abs(ta) < 1e-15 or abs(tb) < 1e-15:
        raise ZeroTrace("chi matrix with zero trace")
    return float(np.trace(a.matrix @ b.matrix).real / (ta * tb))


def residual_phase_11(params, t):
    """Phase of ``|11>`` relative to ``|00>`` after closed evolution for ``t``."""
    k = closed_gate_matrix(params, t)
    return float(np.angle(k[3, 3] / k[0, 0]))
