"""Finite-index relaxation of periodicity and the ultrarigidity probe.

A finite-index sublattice is kept in the canonical triangular form with
generators a*g1 + b*g2 and d*g2 (0 <= b < d), enumerated so that index k
yields exactly sigma_1(k) = sum of divisors distinct sublattices.  Unfolding
multiplies the quotient data by the index while realizing the identical
infinite point set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FrameworkError, PeriodicFramework
from .rigidity import check_periodic_stress, flex_space

def _ext_gcd(p, q):
    """g = gcd(p, q) >= 0 together with x, y such that x*p + y*q = g."""
    old_r, r = p, q
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_x, x = x, old_x - quot * x
        old_y, y = y, old_y - quot * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


__all__ = [
    "Sublattice",
    "sublattices_of_index",
    "sublattices_up_to",
    "UnfoldedFramework",
    "relax",
    "copy_stress",
    "stress_persists",
    "UltraProbeEntry",
    "UltrarigidityReport",
    "ultrarigidity_probe",
]


@dataclass(frozen=True)
class Sublattice:
    """Canonical index-(a*d) sublattice with generators (a, b) and (0, d)
    in the coordinates of the current lattice basis."""

    a: int
    b: int
    d: int

    def __post_init__(self):
        if self.a < 1 or self.d < 1 or not 0 <= self.b < self.d:
            raise FrameworkError(
                "sublattice (a=%d, b=%d, d=%d) is not in canonical form"
                % (self.a, self.b, self.d))

    @property
    def index(self):
        return self.a * self.d

    @property
    def matrix(self):
        """2x2 integer matrix whose columns are the new generators."""
        return np.array([[self.a, 0], [self.b, self.d]], dtype=int)

    @classmethod
    def from_matrix(cls, mat):
        """Canonicalize an arbitrary nonsingular integer generator matrix.

        Columns of ``mat`` span the sublattice; unimodular column
        operations reduce it to the canonical triangular form.
        """
        M = np.array(mat, dtype=int)
        if M.shape != (2, 2):
            raise FrameworkError("sublattice matrix must be 2x2")
        det = int(M[0, 0]) * int(M[1, 1]) - int(M[0, 1]) * int(M[1, 0])
        if det == 0:
            raise FrameworkError("sublattice matrix is singular")
        g, x, y = _ext_gcd(int(M[0, 0]), int(M[0, 1]))
        a = g
        d = abs(det) // g
        b = (x * int(M[1, 0]) + y * int(M[1, 1])) % d
        return cls(a, b, d)

    def reduce(self, z1, z2):
        """Coset representative and quotient of an integer vector.

        Returns (r1, r2, k1, k2) with (z1, z2) = (r1, r2) + k1*(a, b) +
        k2*(0, d), 0 <= r1 < a and 0 <= r2 < d; all arithmetic exact.
        """
        r1 = z1 % self.a
        k1 = (z1 - r1) // self.a
        z2p = z2 - k1 * self.b
        r2 = z2p % self.d
        k2 = (z2p - r2) // self.d
        return r1, r2, k1, k2

    def coset_index(self, r1, r2):
        return r1 * self.d + r2

    def cosets(self):
        return [(r1, r2) for r1 in range(self.a) for r2 in range(self.d)]


def sublattices_of_index(k):
    """All canonical sublattices of index k (there are sigma_1(k) of them)."""
    if k < 1:
        raise FrameworkError("index must be >= 1")
    out = []
    for a in range(1, k + 1):
        if k % a:
            continue
        d = k // a
        for b in range(d):
            out.append(Sublattice(a, b, d))
    return out


def sublattices_up_to(max_index):
    """Canonical sublattices of every index from 1 to max_index."""
    out = []
    for k in range(1, max_index + 1):
        out.extend(sublattices_of_index(k))
    return out


class UnfoldedFramework(PeriodicFramework):
    """A framework with periodicity relaxed to a finite-index sublattice.

    Vertex orbit (i, r) of the original framework becomes orbit
    i * index + coset_index(r); ``parent_vertex`` and ``parent_edge`` map
    unfolded orbits back to the original ones.
    """

    def __init__(self, lattice, positions, edges, sublattice, parent_vertex,
                 parent_edge):
        super().__init__(lattice, positions, edges)
        self.sublattice = sublattice
        self.parent_vertex = np.asarray(parent_vertex, dtype=int)
        self.parent_edge = np.asarray(parent_edge, dtype=int)


def relax(fw, sub):
    """Unfold a framework to the given sublattice of its periodicity.

    The realized infinite point set is unchanged; the quotient grows by the
    index.
    """
    rho = sub.index
    cosets = sub.cosets()
    lat = fw.lattice

    positions = np.empty((fw.n * rho, 2))
    parent_vertex = np.empty(fw.n * rho, dtype=int)
    for i in range(fw.n):
        for (r1, r2) in cosets:
            vid = i * rho + sub.coset_index(r1, r2)
            positions[vid] = fw.positions[i] + lat @ np.array([r1, r2], dtype=float)
            parent_vertex[vid] = i

    edges = []
    parent_edge = []
    for k in range(fw.m):
        t, h = int(fw.tails[k]), int(fw.heads[k])
        c1, c2 = int(fw.shifts[k, 0]), int(fw.shifts[k, 1])
        for (r1, r2) in cosets:
            z1, z2 = r1 + c1, r2 + c2
            q1, q2, k1, k2 = sub.reduce(z1, z2)
            tail_id = t * rho + sub.coset_index(r1, r2)
            head_id = h * rho + sub.coset_index(q1, q2)
            edges.append((tail_id, head_id, (k1, k2)))
            parent_edge.append(k)

    new_lattice = lat @ sub.matrix.astype(float)
    return UnfoldedFramework(new_lattice, positions, edges, sub,
                             parent_vertex, parent_edge)


def copy_stress(unfolded, s):
    """Extend a stress of the original framework to the unfolded one by
    repeating its value on every coset copy of each orbit."""
    s = np.asarray(s, dtype=float)
    return s[unfolded.parent_edge]


def stress_persists(fw, s, sub):
    """Whether a periodic stress stays periodic after relaxing to ``sub``."""
    unfolded = relax(fw, sub)
    return check_periodic_stress(unfolded, copy_stress(unfolded, s)).ok


@dataclass
class UltraProbeEntry:
    sublattice: Sublattice
    phi: int
    sigma: int


@dataclass
class UltrarigidityReport:
    """Bounded falsifier: rigidity verified for every relaxation of index
    up to ``max_index`` only, not a proof for all indices."""

    max_index: int
    ultrarigid: bool
    entries: list
    first_failure: UltraProbeEntry | None


def ultrarigidity_probe(fw, max_index=4):
    """Compute the flex dimension of every relaxation up to max_index."""
    if max_index < 1:
        raise FrameworkError("max_index must be >= 1")
    entries = []
    first_failure = None
    for sub in sublattices_up_to(max_index):
        _, spectral = flex_space(relax(fw, sub))
        entry = UltraProbeEntry(sub, spectral.phi, spectral.sigma)
        entries.append(entry)
        if spectral.phi != 0 and first_failure is None:
            first_failure = entry
    return UltrarigidityReport(max_index, first_failure is None, entries,
                               first_failure)
