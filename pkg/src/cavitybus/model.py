"""Two Lambda atoms at the ends of an N-cavity array, restricted to
excitation-number sectors 0, 1 and 2.

Atom 1 sits in cavity 1 and atom 2 in cavity N. Each atom has levels
``0``, ``1`` and ``e``; the ``e <-> 0`` transition couples to the local
cavity mode with strength ``g``, the ``e <-> 1`` transition is driven
classically with Rabi frequency ``omega_i``, and photons hop between
neighbouring cavities with strength ``j``. Atoms in ``1`` or ``e`` count as
one excitation each, as does every photon, and the Hamiltonian conserves the
total.

All energies are in units of the hopping ``j``.
"""

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, UnsupportedSector

__all__ = [
    "ModelParams",
    "BasisState",
    "SectorBasis",
    "SparseHermitian",
    "enumerate_sector",
    "direct_sum_basis",
    "sector_dimension",
    "build_hamiltonian",
    "embed_computational_state",
    "computational_indices",
    "COMPUTATIONAL_LABELS",
    "dump_coo",
]

LEVELS = ("0", "1", "e")
COMPUTATIONAL_LABELS = ("00", "01", "10", "11")
_EXCITED = {"0": 0, "1": 1, "e": 1}


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration, every rate and energy in units of ``j``.

    ``gamma`` is the total decay rate of ``|e>``; it branches equally into
    ``|0>`` and ``|1>``.
    """

    n_cavities: int = 5
    g: float = 1.0
    j: float = 1.0
    delta: float = 1.0
    omega1: float = 0.03
    omega2: float = 0.03
    kappa: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        problems = self.validation_errors()
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "n_cavities", int(self.n_cavities))
        for name in ("g", "j", "delta", "omega1", "omega2", "kappa", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def validation_errors(self):
        errors = []
        n = self.n_cavities
        if isinstance(n, bool) or not float(n).is_integer() or n < 1:
            errors.append(f"n_cavities must be an integer >= 1, got {n!r}")
        for name in ("g", "j", "delta", "omega1", "omega2", "kappa", "gamma"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                errors.append(f"{name} must be a real number, got {value!r}")
            elif not np.isfinite(value):
                errors.append(f"{name} must be finite, got {value!r}")
        if not errors:
            if self.g < 0:
                errors.append(f"g must be >= 0, got {self.g!r}")
            if self.j <= 0:
                errors.append(f"j must be positive, got {self.j!r}")
            if self.kappa < 0:
                errors.append(f"kappa must be >= 0, got {self.kappa!r}")
            if self.gamma < 0:
                errors.append(f"gamma must be >= 0, got {self.gamma!r}")
        return errors

    @classmethod
    def for_gate(cls, n_cavities=5, omega=0.03, **kwargs):
        """Drive amplitudes satisfying the shortest-time gate condition.

        ``omega1 = omega`` and ``omega2 = (-1)**((N - 1) / 2) * omega`` for
        odd ``N``; for even ``N`` both drives equal ``omega``.
        """
        sign = (-1.0) ** ((n_cavities - 1) // 2) if n_cavities % 2 else 1.0
        return cls(n_cavities=n_cavities, omega1=omega, omega2=sign * omega, **kwargs)

    def single_excitation_block(self):
        """The ``(N + 2)``-square matrix on ``(e,0), photon@1..N, (0,e)``."""
        n = self.n_cavities
        h = np.zeros((n + 2, n + 2))
        h[0, 0] = h[-1, -1] = self.delta
        h[0, 1] = h[1, 0] = self.g
        h[-1, -2] = h[-2, -1] = self.g
        for k in range(1, n):
            h[k, k + 1] = h[k + 1, k] = self.j
        return h

    @cached_property
    def weak_drive(self):
        """Whether both drives are below a tenth of every ``|E_k|`` and
        ``|E_k - E_k'|`` of the undriven single-excitation block."""
        e = np.linalg.eigvalsh(self.single_excitation_block())
        gaps = np.abs(np.diff(e))
        scale = min(np.min(np.abs(e)), np.min(gaps) if len(gaps) else np.inf)
        return max(abs(self.omega1), abs(self.omega2)) < 0.1 * scale

    def replace(self, **changes):
        fields = {name: getattr(self, name) for name in self.__dataclass_fields__}
        fields.update(changes)
        return type(self)(**fields)

    def as_dict(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True, order=True)
class BasisState:
    atom1: str
    atom2: str
    photons: tuple

    @property
    def excitations(self):
        return _EXCITED[self.atom1] + _EXCITED[self.atom2] + sum(self.photons)

    def label(self):
        occ = "".join(str(p) for p in self.photons)
        return f"{self.atom1}{self.atom2}|{occ}"


@dataclass(frozen=True)
class SectorBasis:
    """Ordered basis of a fixed-excitation sector (or a direct sum of them).

    ``sector`` is ``None`` for a direct sum; ``offsets`` then maps each
    contained sector to the position of its first state.
    """

    n_cavities: int
    sector: object
    states: tuple
    offsets: tuple = ()

    @cached_property
    def index(self):
        return {s: i for i, s in enumerate(self.states)}

    @property
    def dimension(self):
        return len(self.states)

    def __len__(self):
        return len(self.states)

    def sector_slice(self, n):
        if self.sector is not None:
            if n != self.sector:
                raise UnsupportedSector(f"basis holds sector {self.sector}, not {n}")
            return slice(0, len(self.states))
        for sector, start, stop in self.offsets:
            if sector == n:
                return slice(start, stop)
        raise UnsupportedSector(f"sector {n} not part of this basis")


def sector_dimension(n_cavities, n):
    return {0: 1, 1: n_cavities + 4, 2: 4 + 4 * n_cavities + n_cavities * (n_cavities + 1) // 2}[n]


def enumerate_sector(n_cavities, n):
    """Canonical basis of the ``n``-excitation sector.

    Sector 1: ``(1,0), (e,0), photon@1..N, (0,e), (0,1)``. Sector 2: atom
    pairs ``(1,1), (e,1), (1,e), (e,e)``; then one photon in cavity ``c``
    for atom configs ``(1,0), (e,0), (0,e), (0,1)`` (config-major); then two
    photons, occupation tuples in ascending lexicographic order.
    """
    if n_cavities < 1:
        raise ValueError("n_cavities must be >= 1")
    vac = (0,) * n_cavities

    def photon(*cavities):
        occ = [0] * n_cavities
        for c in cavities:
            occ[c] += 1
        return tuple(occ)

    if n == 0:
        states = [BasisState("0", "0", vac)]
    elif n == 1:
        states = [BasisState("1", "0", vac), BasisState("e", "0", vac)]
        states += [BasisState("0", "0", photon(c)) for c in range(n_cavities)]
        states += [BasisState("0", "e", vac), BasisState("0", "1", vac)]
    elif n == 2:
        states = [BasisState(a, b, vac) for a, b in (("1", "1"), ("e", "1"), ("1", "e"), ("e", "e"))]
        for a, b in (("1", "0"), ("e", "0"), ("0", "e"), ("0", "1")):
            states += [BasisState(a, b, photon(c)) for c in range(n_cavities)]
        two = sorted(
            {photon(c1, c2) for c1, c2 in itertools.combinations_with_replacement(range(n_cavities), 2)}
        )
        states += [BasisState("0", "0", occ) for occ in two]
    else:
        raise UnsupportedSector(f"sector {n} not supported (only 0, 1, 2)")
    return SectorBasis(n_cavities, n, tuple(states))


def direct_sum_basis(n_cavities, sectors=(0, 1, 2)):
    states, offsets = [], []
    for n in sectors:
        block = enumerate_sector(n_cavities, n).states
        offsets.append((n, len(states), len(states) + len(block)))
        states.extend(block)
    return SectorBasis(n_cavities, None, tuple(states), tuple(offsets))


class SparseHermitian:
    """Sparse Hermitian matrix; Hermiticity is checked exactly on entry."""

    def __init__(self, matrix):
        matrix = sp.csr_array(matrix)
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch(f"matrix is not square: {matrix.shape}")
        if (matrix - matrix.conj().T).count_nonzero():
            raise ValueError("matrix is not exactly Hermitian")
        self.matrix = matrix

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self):
        return self.matrix.toarray()

    def entries(self):
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[i]), int(coo.col[i]), complex(coo.data[i])) for i in order]


def _hamiltonian_terms(params, state):
    """Yield ``(target_state, amplitude)`` for ``H |state>``."""
    n = params.n_cavities
    atoms = [state.atom1, state.atom2]
    occ = state.photons
    cavity = (0, n - 1)
    drive = (params.omega1, params.omega2)

    def with_atom(i, level, photons=occ):
        new = list(atoms)
        new[i] = level
        return BasisState(new[0], new[1], photons)

    diag = params.delta * (atoms.count("e"))
    if diag:
        yield state, diag
    for i, level in enumerate(atoms):
        c = cavity[i]
        if level == "1" and drive[i]:
            yield with_atom(i, "e"), drive[i]
        elif level == "e":
            if drive[i]:
                yield with_atom(i, "1"), drive[i]
            raised = list(occ)
            raised[c] += 1
            yield with_atom(i, "0", tuple(raised)), params.g * np.sqrt(raised[c])
        elif level == "0" and occ[c] > 0:
            lowered = list(occ)
            lowered[c] -= 1
            yield with_atom(i, "e", tuple(lowered)), params.g * np.sqrt(occ[c])
    for k in range(n - 1):
        for src, dst in ((k, k + 1), (k + 1, k)):
            if occ[src]:
                moved = list(occ)
                moved[src] -= 1
                moved[dst] += 1
                amp = params.j * np.sqrt(occ[src] * (occ[dst] + 1))
                yield BasisState(state.atom1, state.atom2, tuple(moved)), amp


def build_hamiltonian(params, basis):
    """Interaction-picture Hamiltonian on ``basis`` as a :class:`SparseHermitian`.

    Terms whose image falls outside ``basis`` would break excitation
    conservation and raise.
    """
    if basis.n_cavities != params.n_cavities:
        raise DimensionMismatch(
            f"basis built for N={basis.n_cavities}, params have N={params.n_cavities}"
        )
    rows, cols, vals = [], [], []
    index = basis.index
    for col, state in enumerate(basis.states):
        for target, amp in _hamiltonian_terms(params, state):
            rows.append(index[target])
            cols.append(col)
            vals.append(amp)
    d = len(basis)
    h = sp.coo_array((np.array(vals, dtype=float), (rows, cols)), shape=(d, d)).tocsr()
    return SparseHermitian(h)


def embed_computational_state(label, n_cavities):
    """``(sector, BasisState)`` of a computational label with empty cavities."""
    if label not in COMPUTATIONAL_LABELS:
        raise ValueError(f"label must be one of {COMPUTATIONAL_LABELS}, got {label!r}")
    state = BasisState(label[0], label[1], (0,) * n_cavities)
    return state.excitations, state


def computational_indices(basis):
    """Positions of ``|00>, |01>, |10>, |11>`` (empty cavities) in ``basis``;
    ``None`` where a state is absent."""
    out = []
    for label in COMPUTATIONAL_LABELS:
        _, state = embed_computational_state(label, basis.n_cavities)
        out.append(basis.index.get(state))
    return out


def dump_coo(hamiltonian, fh):
    """Write ``row col real imag`` lines, row-major, 17 significant digits."""
    for r, c, v in hamiltonian.entries():
        fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")
