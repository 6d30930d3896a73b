"""Tight-binding chain with diagonal impurities on its two end sites.

The chain Hamiltonian is the real symmetric tridiagonal matrix with
diagonal ``(delta1, 0, ..., 0, delta2)`` and constant off-diagonal ``j``.
Two independent routes to its spectrum live here:

* :func:`direct_diagonalize`, a LAPACK tridiagonal eigensolver used as the
  oracle, and
* the Green's-function route: the free-chain resolvent in its sine
  eigenbasis (:func:`free_resolvent`), two rank-one Dyson updates for the
  impurities (:func:`dressed_resolvent`), a secular-equation root finder for
  the poles (:func:`find_spectrum_by_poles`) and Lippmann-Schwinger
  eigenvectors (:func:`lippmann_schwinger_vector`).

:func:`coupling_sums` evaluates the end-to-end sums that set the strength of
the effective two-atom interaction; :func:`identity_targets` gives their
closed forms, which do not depend on the chain length.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import (
    EvenChainResonance,
    PoleProximity,
    ResonanceDenominator,
    RootCountMismatch,
    SingularSystem,
    ZeroEigenvalue,
)

__all__ = [
    "ChainSpec",
    "ChainSpectrum",
    "direct_diagonalize",
    "free_energies",
    "free_vector",
    "free_resolvent",
    "dressed_resolvent",
    "find_spectrum_by_poles",
    "lippmann_schwinger_vector",
    "coupling_sums",
    "identity_targets",
    "dispersion_scan",
    "dispersion_csv",
]

POLE_TOL = 1e-12
# poles must be accurate well inside the 1e-13 bracket offset used around them
ROOT_XTOL = 1e-15
DEGENERACY_TOL = 1e-12
# below this relative gap LAPACK eigenvectors mix at >1e-10 (error ~ eps/gap)
MIXING_TOL = 1e-5


@dataclass(frozen=True)
class ChainSpec:
    """``m``-site chain, hopping ``j``, impurities ``delta1`` (site 1) and
    ``delta2`` (site ``m``)."""

    m: int
    j: float = 1.0
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m!r}")
        if not self.j > 0:
            raise ValueError(f"j must be positive, got {self.j!r}")
        object.__setattr__(self, "m", int(self.m))
        for name in ("j", "delta1", "delta2"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @classmethod
    def symmetric(cls, m, delta, j=1.0):
        return cls(m=m, j=j, delta1=delta, delta2=delta)

    @property
    def is_symmetric(self):
        return self.delta1 == self.delta2

    def diagonal(self):
        d = np.zeros(self.m)
        d[0] += self.delta1
        d[-1] += self.delta2
        return d

    def offdiagonal(self):
        return np.full(self.m - 1, self.j)

    def matrix(self):
        return (
            np.diag(self.diagonal())
            + np.diag(self.offdiagonal(), 1)
            + np.diag(self.offdiagonal(), -1)
        )


@dataclass(frozen=True)
class ChainSpectrum:
    """Ascending energies and matching orthonormal eigenvectors.

    ``vectors[:, k]`` is the eigenvector of ``energies[k]``; its entry ``i``
    is the amplitude on site ``i + 1``.
    """

    chain: ChainSpec
    energies: np.ndarray
    vectors: np.ndarray = field(repr=False)

    def amplitude(self, site, k):
        """Amplitude of eigenvector ``k`` (0-based) on ``site`` (1-based)."""
        return self.vectors[site - 1, k]


def _fix_sign(vectors, rel_tol=1e-10):
    """Flip columns so the first non-negligible entry is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        big = np.flatnonzero(np.abs(col) > rel_tol * np.abs(col).max())
        if col[big[0]] < 0:
            vectors[:, k] = -col
    return vectors


def _degenerate_clusters(energies, tol):
    clusters, start = [], 0
    for i in range(1, len(energies) + 1):
        if i == len(energies) or energies[i] - energies[i - 1] > tol * max(
            1.0, abs(energies[i])
        ):
            if i - start > 1:
                clusters.append(np.arange(start, i))
            start = i
    return clusters


def _mirror_parities(m):
    # Ascending index k (0-based) of a symmetric chain with j > 0 has parity
    # (-1)**(m - 1 - k): the top state is nodeless.
    return np.array([(-1.0) ** (m - 1 - k) for k in range(m)])


def direct_diagonalize(chain):
    """Full spectrum of ``chain`` by dense tridiagonal diagonalization.

    For mirror-symmetric chains, nearly degenerate clusters (the bound pair
    at large impurity strength, whose splitting shrinks exponentially with
    ``m``) are rotated back onto mirror-parity eigenvectors, which removes
    the mixing a generic solver introduces and makes the output
    deterministic.
    """
    energies, vectors = eigh_tridiagonal(chain.diagonal(), chain.offdiagonal())
    if chain.is_symmetric:
        mirror = np.eye(chain.m)[::-1]
        parity = _mirror_parities(chain.m)
        for idx in _degenerate_clusters(energies, MIXING_TOL):
            block = vectors[:, idx]
            r = block.T @ mirror @ block
            w, u = np.linalg.eigh((r + r.T) / 2)
            rotated = block @ u
            # eigh sorts parities ascending; place them in the expected order
            order = [int(np.argmin(np.abs(w - p))) for p in parity[idx]]
            if sorted(order) == list(range(len(idx))):
                vectors[:, idx] = rotated[:, order]
    return ChainSpectrum(chain, energies, _fix_sign(vectors))


def free_energies(m, j=1.0):
    """Band energies ``2 j cos(k pi / (m + 1))`` for ``k = 1..m``, ascending."""
    k = np.arange(m, 0, -1)
    return 2.0 * j * np.cos(k * np.pi / (m + 1))


def free_vector(m, k):
    """Normalized sine eigenvector ``k`` (1-based) of the defect-free chain."""
    i = np.arange(1, m + 1)
    return np.sqrt(2.0 / (m + 1)) * np.sin(i * k * np.pi / (m + 1))


def _sine_basis(m):
    i = np.arange(1, m + 1)
    return np.sqrt(2.0 / (m + 1)) * np.sin(np.outer(i, i) * np.pi / (m + 1))


def free_resolvent(m, z, j=1.0, entries=None):
    """Resolvent ``(z - H0)^-1`` of the ``m``-site defect-free chain.

    Evaluated as a sum over the sine eigenbasis. Returns the full matrix, or
    the values at the requested 1-based ``(row, col)`` pairs.
    """
    k = np.arange(1, m + 1)
    band = 2.0 * j * np.cos(k * np.pi / (m + 1))
    gap = z - band
    if np.min(np.abs(gap)) <= POLE_TOL:
        raise PoleProximity(f"z={z!r} is within {POLE_TOL} of a free-chain eigenvalue")
    s = _sine_basis(m)
    if entries is None:
        return (s / gap) @ s.T
    rows = np.array([r - 1 for r, _ in entries])
    cols = np.array([c - 1 for _, c in entries])
    return np.einsum("pk,pk->p", s[rows] / gap, s[cols])


def _dyson(g, site, strength):
    """Rank-one update ``g + g|s> strength/(1 - strength g_ss) <s|g``."""
    denom = 1.0 - strength * g[site, site]
    if abs(denom) < POLE_TOL:
        raise ResonanceDenominator(f"|1 - delta G({site + 1},{site + 1})| < {POLE_TOL}")
    return g + np.outer(g[:, site], g[site, :]) * (strength / denom)


def dressed_resolvent(chain, z, entries=None):
    """Resolvent of the impurity chain built from the free one.

    The impurity at site ``m`` is added first, then the one at site 1, each
    as a rank-one Dyson update.
    """
    g = free_resolvent(chain.m, z, chain.j)
    if chain.delta2 != 0.0:
        g = _dyson(g, chain.m - 1, chain.delta2)
    if chain.delta1 != 0.0:
        g = _dyson(g, 0, chain.delta1)
    if entries is None:
        return g
    return np.array([g[r - 1, c - 1] for r, c in entries])


def _g0_diag_end(m, j, e):
    # G0(m, m) = G0(1, 1) by mirror symmetry of the free chain
    k = np.arange(1, m + 1)
    w = (2.0 / (m + 1)) * np.sin(k * np.pi / (m + 1)) ** 2
    return np.sum(w / (e - 2.0 * j * np.cos(k * np.pi / (m + 1))))


def _g0m_11(chain, e):
    """``G_0M(1, 1)`` at real ``e``: free chain plus the site-``m`` impurity.

    Free modes are split by mirror parity into sums ``A+`` and ``A-``. Near
    a free pole the Dyson expression is regrouped as
    ``(A+ + A- - 4 d A+ A-) / (1 - d (A+ + A-))`` so the double poles of the
    free resolvent cancel analytically instead of numerically.
    """
    m, j, d2 = chain.m, chain.j, chain.delta2
    k = np.arange(1, m + 1)
    with np.errstate(divide="ignore"):
        a = (2.0 / (m + 1)) * np.sin(k * np.pi / (m + 1)) ** 2 / (
            e - 2.0 * j * np.cos(k * np.pi / (m + 1))
        )
    # sin(m k pi / (m + 1)) = (-1)**(k + 1) sin(k pi / (m + 1))
    a_sym, a_anti = np.sum(a[k % 2 == 1]), np.sum(a[k % 2 == 0])
    if d2 == 0.0:
        return a_sym + a_anti
    big, small = (a_sym, a_anti) if abs(a_sym) >= abs(a_anti) else (a_anti, a_sym)
    if abs(big) > 1.0:
        return ((1.0 - 4.0 * d2 * small) + small / big) / ((1.0 - d2 * small) / big - d2)
    # away from free poles keep the squared cross term: an exponentially small
    # end-to-end propagator then enters at its own (squared) precision
    total = a_sym + a_anti
    return total + d2 * (a_sym - a_anti) ** 2 / (1.0 - d2 * total)


def _secular_roots(func, poles, strength, lower, upper):
    """Roots of ``1 - strength * g(E)`` where ``g`` has simple poles.

    ``func(E)`` returns ``1 - strength g(E)``. Between consecutive poles the
    function is monotone, so each interval holds one root; one more root lies
    outside the outermost pole on the side given by the sign of ``strength``.
    Returns ``(roots, flagged)``; a root that cannot be separated from a pole
    (splitting below double precision) is reported at the pole and flagged.
    """
    poles = np.sort(np.asarray(poles, dtype=float))
    brackets = list(zip(poles[:-1], poles[1:]))
    if strength > 0:
        brackets.append((poles[-1], upper))
    else:
        brackets.insert(0, (lower, poles[0]))
    roots, flagged = [], []
    for a, b in brackets:
        eps_a = 1e-13 * max(1.0, abs(a))
        eps_b = 1e-13 * max(1.0, abs(b))
        lo, hi = a + eps_a, b - eps_b
        if hi <= lo:
            roots.append(0.5 * (a + b))
            flagged.append(len(roots) - 1)
            continue
        f_lo, f_hi = func(lo), func(hi)
        if np.sign(f_lo) == np.sign(f_hi):
            # root pinned within eps of a pole: pick the side whose value is
            # closest to crossing
            roots.append(a if abs(f_lo) < abs(f_hi) else b)
            flagged.append(len(roots) - 1)
            continue
        roots.append(brentq(func, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps))
    return np.array(roots), flagged


def find_spectrum_by_poles(chain, full_output=False):
    """Spectrum of ``chain`` as the zeros of ``1 - delta1 G_0M(E)(1, 1)``.

    The poles of ``G_0M`` are found first from ``1 - delta2 G0(E)(m, m)``,
    whose poles are the known free-band energies. Each stage brackets one
    root between consecutive poles plus one bound state in the out-of-band
    window padded by ``|delta1| + |delta2| + j``.

    With ``full_output=True`` also returns the indices of roots that were
    pinned to a pole because the splitting fell below double precision.
    """
    m, j = chain.m, chain.j
    pad = 2.0 * j + abs(chain.delta1) + abs(chain.delta2) + j
    lower, upper = -pad, pad

    poles = free_energies(m, j)
    flagged_inner = []
    if chain.delta2 != 0.0:
        d2 = chain.delta2
        poles, flagged_inner = _secular_roots(
            lambda e: 1.0 - d2 * _g0_diag_end(m, j, e), poles, d2, lower, upper
        )
    if chain.delta1 == 0.0:
        roots, flagged = poles, flagged_inner
    else:
        d1 = chain.delta1
        roots, flagged = _secular_roots(
            lambda e: 1.0 - d1 * _g0m_11(chain, e), poles, d1, lower, upper
        )
    if len(roots) != m or not np.all(np.isfinite(roots)):
        raise RootCountMismatch(f"isolated {len(roots)} roots, expected {m}")
    order = np.argsort(roots, kind="stable")
    roots = roots[order]
    if full_output:
        flagged = sorted(int(np.flatnonzero(order == f)[0]) for f in flagged)
        return roots, flagged
    return roots


def lippmann_schwinger_vector(chain, energy, k=None):
    """Eigenvector at a dressed eigenvalue from ``[1 - G0(E) V]^-1 |E0_k>``.

    ``V`` carries the two impurities. At an exact eigenvalue the system is
    singular by construction and the solution diverges along the null
    direction of ``1 - G0 V``; that direction, normalized, is the
    eigenvector. ``k`` is
    the 0-based ascending band index used to pick the seed free vector of
    matching energy rank (and, for symmetric chains, matching parity).

    When ``energy`` also lies on the free band (within 1e-10), the seed is
    the free eigenvector at that energy and the singular term is dropped from
    ``G0``, leaving ``|E) = |E0_q> + G0'(E) V |E)`` with the reduced
    resolvent ``G0'``.
    """
    m = chain.m
    band = free_energies(m, chain.j)
    v = np.zeros(m)
    v[0] += chain.delta1
    v[-1] += chain.delta2
    gap = energy - band
    hit = int(np.argmin(np.abs(gap)))
    if abs(gap[hit]) < 1e-10:
        return _reduced_ls_vector(chain, band, gap, hit, v)

    g0 = free_resolvent(m, energy, chain.j)
    a = np.eye(m) - g0 * v[np.newaxis, :]
    # free_energies is ascending in rank; sine index m - rank matches it
    rank = k if k is not None else hit
    seed = free_vector(m, m - rank)
    u, s, vt = np.linalg.svd(a)
    if np.abs(u[:, -1] @ seed) < 1e-8:
        # seed orthogonal to the left null vector; use the best-overlapping one
        overlaps = [abs(u[:, -1] @ free_vector(m, q)) for q in range(1, m + 1)]
        seed = free_vector(m, int(np.argmax(overlaps)) + 1)
    null = np.flatnonzero(s < 1e-8 * s[0])
    if len(null) == 0:
        x = vt.T @ ((u.T @ seed) / s)
    elif len(null) == 1:
        # limit of the solve as E approaches the pole: the null direction,
        # oriented like the diverging coefficient <u_null|seed> / s_null
        x = vt[-1] * np.sign(u[:, -1] @ seed)
    elif chain.is_symmetric:
        # quasi-degenerate bound pair: pick the combination with the seed's
        # mirror parity
        span = vt[null].T
        r = span.T @ span[::-1]
        w, c = np.linalg.eigh((r + r.T) / 2)
        parity = np.sign(seed @ seed[::-1])
        x = span @ c[:, int(np.argmin(np.abs(w - parity)))]
    else:
        raise SingularSystem(f"E={energy!r}: degenerate null space without mirror symmetry")
    if chain.is_symmetric:
        # exact solutions carry the seed's parity; a nearby partner state
        # (bound pair split by ~(j/delta)**m) leaks in at round-off level
        x = 0.5 * (x + np.sign(seed @ seed[::-1]) * x[::-1])
    x = x / np.linalg.norm(x)
    return _fix_sign(x[:, np.newaxis])[:, 0]


def _reduced_ls_vector(chain, band, gap, hit, v):
    m = chain.m
    # band[hit] is sine index m - hit
    basis = np.stack([free_vector(m, m - r) for r in range(m)], axis=1)
    keep = np.arange(m) != hit
    g0_reduced = (basis[:, keep] / gap[keep]) @ basis[:, keep].T
    a = np.eye(m) - g0_reduced * v[np.newaxis, :]
    u, s, vt = np.linalg.svd(a)
    if s[-1] < 1e-10 * s[0]:
        if len(s) > 1 and s[-2] < 1e-10 * s[0]:
            raise SingularSystem(
                f"E={band[hit]!r}: reduced Lippmann-Schwinger system has a degenerate null space"
            )
        # eigenvector has no weight on the free mode at this energy
        x = vt[-1]
    else:
        x = vt.T @ ((u.T @ basis[:, hit]) / s)
    x = x / np.linalg.norm(x)
    return _fix_sign(x[:, np.newaxis])[:, 0]


def coupling_sums(spectrum):
    """End-site sums ``(sum f1 fM / E, sum f1^2 / E, sum fM^2 / E)``."""
    chain = spectrum.chain
    if (
        chain.m % 2 == 0
        and chain.is_symmetric
        and abs(chain.delta1**2 - chain.j**2) < 1e-10
    ):
        raise EvenChainResonance("even chain with delta**2 == j**2")
    e = spectrum.energies
    if np.min(np.abs(e)) < 1e-10:
        raise ZeroEigenvalue("chain has a zero eigenvalue; sums undefined")
    f1 = spectrum.vectors[0]
    fm = spectrum.vectors[-1]
    return (
        float(np.sum(f1 * fm / e)),
        float(np.sum(f1 * f1 / e)),
        float(np.sum(fm * fm / e)),
    )


def identity_targets(chain):
    """Closed-form ``(s_cross, s_local)`` for a symmetric chain.

    Odd ``m``: ``(-1)**((m-1)/2) / (2 delta)`` and ``1 / (2 delta)``.
    Even ``m``: ``(-1)**(m/2) j / (delta**2 - j**2)`` and
    ``delta / (delta**2 - j**2)``.
    """
    if not chain.is_symmetric:
        raise ValueError("closed forms hold for equal impurities only")
    m, j, d = chain.m, chain.j, chain.delta1
    if m % 2:
        if d == 0.0:
            raise ZeroEigenvalue("delta = 0 on an odd chain gives a zero eigenvalue")
        return (-1.0) ** ((m - 1) // 2) / (2.0 * d), 1.0 / (2.0 * d)
    den = d * d - j * j
    if abs(den) < 1e-10:
        raise EvenChainResonance("even chain with delta**2 == j**2")
    return (-1.0) ** (m // 2) * j / den, d / den


def dispersion_scan(m, deltas, j=1.0):
    """Ascending spectra of the symmetric chain, one row per impurity value.

    Returns an array of shape ``(len(deltas), m + 1)`` whose first column is
    the impurity strength.
    """
    deltas = np.asarray(deltas, dtype=float)
    table = np.empty((len(deltas), m + 1))
    table[:, 0] = deltas
    for row, d in enumerate(deltas):
        table[row, 1:] = direct_diagonalize(ChainSpec.symmetric(m, d, j)).energies
    return table


def dispersion_csv(table):
    """Render a :func:`dispersion_scan` table as CSV text (17 significant digits)."""
    m = table.shape[1] - 1
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["delta"] + [f"E{k}" for k in range(1, m + 1)])
    for row in table:
        writer.writerow([f"{x:.17g}" for x in row])
    return buf.getvalue()
