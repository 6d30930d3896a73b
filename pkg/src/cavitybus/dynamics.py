"""Closed and open time evolution on the few-excitation space.

Unitary propagation uses a full eigendecomposition up to dimension 2000 and
a Krylov-type ``expm_multiply`` above that. Open dynamics integrate the
Lindblad master equation with cavity loss ``sqrt(kappa) a_i`` and atomic
decay ``sqrt(gamma/2) |0><e|``, ``sqrt(gamma/2) |1><e|`` on both atoms.

The Lindblad integrator is classical fixed-step RK4. For a time-independent
generator one RK4 step is the degree-4 Taylor polynomial of ``h L``, so
``2**k`` steps are composed by ``k`` squarings of that polynomial, which is
much cheaper than stepping when the block is small enough to hold densely.
The step is halved until two successive runs agree to ``tol`` in trace norm.
"""

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import expm_multiply

from .effective import gate_time, sqrt_swap_target
from .errors import DimensionMismatch, IntegratorDrift, ToleranceNotMet
from .model import (
    BasisState,
    SparseHermitian,
    build_hamiltonian,
    direct_sum_basis,
    embed_computational_state,
    enumerate_sector,
)

__all__ = [
    "evolve_unitary",
    "state_fidelity",
    "jump_operators",
    "liouvillian",
    "LindbladSolver",
    "evolve_lindblad",
    "transfer_state",
    "transfer_fidelity",
    "fidelity_peak",
    "default_time_grid",
]

log = logging.getLogger(__name__)

EIGH_LIMIT = 2000


def _as_sparse(h):
    if isinstance(h, SparseHermitian):
        return h.matrix
    return sp.csr_array(h)


def evolve_unitary(h, psi0, t):
    """``exp(-i H t) psi0`` for a scalar ``t`` or an array of times.

    With an array of times the result has one row per time.
    """
    mat = _as_sparse(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (mat.shape[0],):
        raise DimensionMismatch(f"state has shape {psi0.shape}, H is {mat.shape}")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if mat.shape[0] <= EIGH_LIMIT:
        w, v = np.linalg.eigh(mat.toarray())
        coeff = v.conj().T @ psi0
        out = (np.exp(-1j * np.outer(times, w)) * coeff) @ v.T
    else:
        gen = (-1j * mat).tocsc()
        out = np.stack([expm_multiply(gen * ti, psi0) for ti in times])
    return out[0] if np.ndim(t) == 0 else out


def state_fidelity(psi, target):
    """``|<target|psi>|**2``."""
    psi = np.asarray(psi)
    target = np.asarray(target)
    if psi.shape != target.shape:
        raise DimensionMismatch(f"{psi.shape} vs {target.shape}")
    return float(abs(np.vdot(target, psi)) ** 2)


def jump_operators(params, basis):
    """Lindblad operators on ``basis`` as ``(label, sparse matrix)`` pairs.

    Zero-rate channels are omitted. The basis must be closed under the
    lowering operators, i.e. a direct sum of consecutive sectors from 0.
    """
    d = len(basis)
    index = basis.index
    ops = []

    def build(label, rate, mapping):
        rows, cols, vals = [], [], []
        for col, state in enumerate(basis.states):
            hit = mapping(state)
            if hit is None:
                continue
            target, amp = hit
            if target not in index:
                raise DimensionMismatch(f"{label} maps {state.label()} outside the basis")
            rows.append(index[target])
            cols.append(col)
            vals.append(np.sqrt(rate) * amp)
        ops.append((label, sp.csr_array((vals, (rows, cols)), shape=(d, d))))

    if params.kappa > 0:
        for c in range(params.n_cavities):

            def lower(state, c=c):
                occ = state.photons
                if not occ[c]:
                    return None
                new = list(occ)
                new[c] -= 1
                return BasisState(state.atom1, state.atom2, tuple(new)), np.sqrt(occ[c])

            build(f"a{c + 1}", params.kappa, lower)
    if params.gamma > 0:
        for atom in (0, 1):
            for level in ("0", "1"):

                def decay(state, atom=atom, level=level):
                    atoms = [state.atom1, state.atom2]
                    if atoms[atom] != "e":
                        return None
                    atoms[atom] = level
                    return BasisState(atoms[0], atoms[1], state.photons), 1.0

                build(f"sigma{level}e_{atom + 1}", params.gamma / 2, decay)
    return ops


def liouvillian(h, jumps):
    """Sparse generator acting on row-major ``vec(rho)``."""
    h = _as_sparse(h)
    d = h.shape[0]
    eye = sp.identity(d, format="csr")
    gen = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    for _, a in jumps:
        a = sp.csr_array(a)
        ada = (a.conj().T @ a).tocsr()
        gen = gen + sp.kron(a, a.conj()) - 0.5 * sp.kron(ada, eye) - 0.5 * sp.kron(eye, ada.T)
    return sp.csr_array(gen)


def _trace_norms(diff):
    return np.linalg.svd(diff, compute_uv=False).sum(axis=-1)


class LindbladSolver:
    """Fixed-step RK4 integrator for a time-independent Lindblad generator.

    The generator splits into blocks that never exchange amplitude (for the
    few-excitation space: blocks of fixed excitation-number difference
    between ket and bra). Blocks up to ``dense_limit`` in size use composed
    dense step maps; larger ones step with sparse products.
    """

    def __init__(self, hamiltonian, jumps, tol=1e-8, dense_limit=2500, max_level=26):
        self.dim = _as_sparse(hamiltonian).shape[0]
        self.generator = liouvillian(hamiltonian, jumps)
        self.tol = tol
        self.dense_limit = dense_limit
        self.max_level = max_level
        pattern = self.generator.copy()
        pattern.data = np.ones_like(pattern.data, dtype=float)
        _, self._labels = connected_components(pattern, directed=False)
        self._blocks = {}
        self._maps = {}
        self.last_steps = None

    def _block(self, label):
        if label not in self._blocks:
            idx = np.flatnonzero(self._labels == label)
            sub = self.generator[idx][:, idx]
            norm = float(abs(sub).sum(axis=0).max()) if sub.nnz else 0.0
            dense = sub.toarray() if len(idx) <= self.dense_limit else None
            self._blocks[label] = (idx, sub.tocsr(), dense, norm)
        return self._blocks[label]

    def _step_map(self, label, dt, level):
        key = (label, dt, level)
        if key not in self._maps:
            _, _, gen, _ = self._block(label)
            h = dt / 2**level
            hl = h * gen
            eye = np.eye(len(gen))
            r = eye + hl @ (eye + hl @ (eye + hl @ (eye + hl / 4) / 3) / 2)
            for _ in range(level):
                r = r @ r
            self._maps[key] = r
        return self._maps[key]

    def _advance(self, label, x, dt, level):
        if dt == 0.0:
            return x
        _, sub, dense, _ = self._block(label)
        if dense is not None:
            return self._step_map(label, dt, level) @ x
        h = dt / 2**level
        for _ in range(2**level):
            k1 = sub @ x
            k2 = sub @ (x + 0.5 * h * k1)
            k3 = sub @ (x + 0.5 * h * k2)
            k4 = sub @ (x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return x

    def _run(self, vecs, steps, labels, levels):
        out = np.zeros((len(steps),) + vecs.shape, dtype=complex)
        for label in labels:
            idx = self._block(label)[0]
            x = vecs[idx]
            for i, dt in enumerate(steps):
                x = self._advance(label, x, dt, levels[label])
                out[i][idx] = x
        return out

    def _start_level(self, label, steps):
        norm = self._block(label)[3]
        longest = max(steps) if len(steps) else 0.0
        if norm == 0.0 or longest == 0.0:
            return 0
        h0 = 0.25 * (self.tol / 1e-8) ** 0.25 / norm
        return max(0, int(np.ceil(np.log2(longest / h0))))

    def propagate(self, rho0, times, steps=None):
        """States at each of ``times`` (non-decreasing, starting from 0).

        ``rho0`` is one ``(D, D)`` operator or a stack ``(B, D, D)``; the
        result has shape ``(len(times),) + rho0.shape``. Passing ``steps``
        fixes the number of RK4 steps per interval (a power of two) and skips
        the convergence loop.
        """
        rho0 = np.asarray(rho0, dtype=complex)
        single = rho0.ndim == 2
        stack = rho0[np.newaxis] if single else rho0
        d = self.dim
        if stack.shape[1:] != (d, d):
            raise DimensionMismatch(f"operator shape {stack.shape[1:]} vs dimension {d}")
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0) or np.any(np.diff(times) < 0):
            raise ValueError("times must be non-negative and non-decreasing")
        # equal intervals (up to round-off) share one cached step map
        steps_dt = [float(f"{x:.12g}") for x in np.diff(np.concatenate([[0.0], times]))]

        vecs = stack.reshape(len(stack), d * d).T
        labels = np.unique(self._labels[np.any(vecs != 0, axis=1)])

        def shaped(out):
            res = out.T.reshape(len(stack), d, d, len(times))
            res = np.moveaxis(res, -1, 0)
            return res[:, 0] if single else res

        if steps is not None:
            level = int(np.log2(steps))
            if 2**level != steps:
                raise ValueError("steps must be a power of two")
            self.last_steps = steps
            return shaped(self._run(vecs, steps_dt, labels, {lab: level for lab in labels}))

        levels = {lab: self._start_level(lab, steps_dt) for lab in labels}
        prev = self._run(vecs, steps_dt, labels, levels)
        while True:
            levels = {lab: lvl + 1 for lab, lvl in levels.items()}
            if max(levels.values(), default=0) > self.max_level:
                raise ToleranceNotMet(f"no convergence to {self.tol} by 2**{self.max_level} steps")
            cur = self._run(vecs, steps_dt, labels, levels)
            a = shaped(prev).reshape(-1, d, d)
            b = shaped(cur).reshape(-1, d, d)
            change = float(_trace_norms(a - b).max()) if len(a) else 0.0
            log.debug("lindblad levels=%s change=%.3e", levels, change)
            if change < self.tol:
                self.last_steps = {lab: 2**lvl for lab, lvl in levels.items()}
                return shaped(cur)
            prev = cur


def _check_density(rho, trace0):
    herm = np.abs(rho - rho.conj().T).max()
    if herm > 1e-10:
        raise IntegratorDrift(f"lost Hermiticity: {herm:.2e}")
    tr = np.trace(rho).real
    if abs(tr - trace0) > 1e-8:
        raise IntegratorDrift(f"trace drifted from {trace0} to {tr}")
    low = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if low < -1e-6:
        raise IntegratorDrift(f"negative eigenvalue {low:.2e}")


def evolve_lindblad(params, rho0, t, tol=1e-8):
    """Density operator on the 0-2 excitation space after time ``t``.

    ``rho0`` is indexed by :func:`cavitybus.model.direct_sum_basis`. ``t``
    may be an array, in which case one operator per time is returned.
    """
    basis = direct_sum_basis(params.n_cavities)
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (len(basis), len(basis)):
        raise DimensionMismatch(f"rho0 has shape {rho0.shape}, space has dimension {len(basis)}")
    solver = LindbladSolver(
        build_hamiltonian(params, basis), jump_operators(params, basis), tol=tol
    )
    out = solver.propagate(rho0, np.atleast_1d(t))
    trace0 = np.trace(rho0).real
    for rho in out:
        _check_density(rho, trace0)
    return out[0] if np.ndim(t) == 0 else out


def transfer_state(params, t, start="01"):
    """Sector-1 state at ``t`` starting from ``|start>`` with empty cavities."""
    basis = enumerate_sector(params.n_cavities, 1)
    h = build_hamiltonian(params, basis)
    psi0 = np.zeros(len(basis), dtype=complex)
    psi0[basis.index[embed_computational_state(start, params.n_cavities)[1]]] = 1.0
    return basis, evolve_unitary(h, psi0, t)


def _target_vector(basis):
    amp01, amp10 = sqrt_swap_target()
    target = np.zeros(len(basis), dtype=complex)
    n = basis.n_cavities
    target[basis.index[embed_computational_state("01", n)[1]]] = amp01
    target[basis.index[embed_computational_state("10", n)[1]]] = amp10
    return target


def transfer_fidelity(params, times):
    """Fidelity of ``|01>`` evolved under the full sector-1 Hamiltonian to
    ``(1+i)/2 |01> + (1-i)/2 |10>``, at each of ``times``."""
    basis, states = transfer_state(params, np.atleast_1d(times))
    target = _target_vector(basis)
    return np.abs(states @ target.conj()) ** 2


def fidelity_peak(params, window=(0.8, 1.2)):
    """Time of maximal :func:`transfer_fidelity` inside ``window`` (in units
    of the gate time) and the fidelity there.

    The curve carries small fast oscillations from off-resonant excitation,
    so it is sampled at a quarter of the fastest period before refining.
    """
    basis = enumerate_sector(params.n_cavities, 1)
    h = build_hamiltonian(params, basis).toarray()
    w, v = np.linalg.eigh(h)
    psi0 = np.zeros(len(basis))
    psi0[basis.index[embed_computational_state("01", params.n_cavities)[1]]] = 1.0
    amps = (_target_vector(basis).conj() @ v) * (v.T @ psi0)

    def fid(t):
        return np.abs(np.exp(-1j * np.multiply.outer(t, w)) @ amps) ** 2

    gate = gate_time(params)
    lo, hi = window[0] * gate, window[1] * gate
    spacing = np.pi / (2.0 * max(np.ptp(w), 1e-12))
    grid = np.linspace(lo, hi, int(np.ceil((hi - lo) / spacing)) + 1)
    values = fid(grid)
    best = int(np.argmax(values))
    a, b = grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
    fine = np.linspace(a, b, 201)
    fine_values = fid(fine)
    i = int(np.argmax(fine_values))
    return fine[i], float(fine_values[i])


def default_time_grid(params, t_max=1.2, samples=200):
    """Uniform grid over ``[0, t_max * T]``; returns ``(t / T, t)``."""
    scaled = np.linspace(0.0, t_max, samples)
    return scaled, scaled * gate_time(params)
