"""Shared test fixtures and independent oracles.

The oracles here deliberately avoid the library code paths they check:
patch enumeration is brute force over explicit copies, segment crossing is
a from-scratch parametric intersection, nullspaces come straight from
numpy's SVD, and derivatives are central finite differences.
"""

from __future__ import annotations

import numpy as np
import pytest

from perimax import PeriodicFramework


# -- extra fixtures --------------------------------------------------------


def subdivided_grid():
    """Square grid with a midpoint vertex on every horizontal line.

    Carries a one-dimensional periodic stress (opposite values on the two
    vertical line orbits) and same-sign invariant equilibrium stresses that
    are not periodic; the aligned-path falsifier fixture.
    """
    return PeriodicFramework(
        [[2.0, 0.0], [0.0, 1.0]],
        [[0.0, 0.0], [1.0, 0.0]],
        [(0, 1, (0, 0)), (0, 1, (-1, 0)), (0, 0, (0, 1)), (1, 1, (0, 1))],
    )


def right_angle_pair():
    """Two edge orbits meeting at one vertex at 0 and 90 degrees."""
    return PeriodicFramework(
        np.eye(2),
        [[0.0, 0.0], [1.0, 0.0]],
        [(0, 1, (0, 0)), (0, 1, (-1, 1))],
    )


def crossed_grid():
    """Square grid plus both diagonals of one cell (a crossing pair)."""
    return PeriodicFramework(
        np.eye(2),
        [[0.0, 0.0]],
        [(0, 0, (1, 0)), (0, 0, (0, 1)), (0, 0, (1, 1)), (0, 0, (1, -1))],
    )


def single_edge():
    """Two orbits joined by one unshifted edge."""
    return PeriodicFramework(
        np.eye(2), [[0.0, 0.0], [1.0, 0.0]], [(0, 1, (0, 0))])


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_connected_framework(rng, max_n=6, max_m=14):
    """Random connected framework with a well-conditioned lattice."""
    n = int(rng.integers(1, max_n + 1))
    while True:
        lattice = np.eye(2) + 0.4 * rng.standard_normal((2, 2))
        if abs(np.linalg.det(lattice)) > 0.3:
            break
    positions = rng.standard_normal((n, 2))
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(0, v))
        shift = (int(rng.integers(-1, 2)), int(rng.integers(-1, 2)))
        edges[(u, v, shift)] = None
    target_m = int(rng.integers(max(n - 1, 1), max_m + 1))
    guard = 0
    while len(edges) < target_m and guard < 200:
        guard += 1
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        shift = (int(rng.integers(-2, 3)), int(rng.integers(-2, 3)))
        if u > v:
            u, v, shift = v, u, (-shift[0], -shift[1])
        if u == v:
            if shift == (0, 0):
                continue
            if shift[0] < 0 or (shift[0] == 0 and shift[1] < 0):
                shift = (-shift[0], -shift[1])
        if (u, v, shift) in edges:
            continue
        edges[(u, v, shift)] = None
    if not edges:
        edges[(0, 0, (1, 0))] = None
    return PeriodicFramework(lattice, positions, list(edges))


# -- oracles ---------------------------------------------------------------


def oracle_patch_counts(fw, rows, cols):
    """Brute-force enumeration of vertex and edge copies inside a box."""
    copies = {(i, s1, s2)
              for i in range(fw.n) for s1 in range(rows) for s2 in range(cols)}
    n_edges = 0
    for k in range(fw.m):
        t, h = int(fw.tails[k]), int(fw.heads[k])
        c1, c2 = int(fw.shifts[k, 0]), int(fw.shifts[k, 1])
        for s1 in range(rows):
            for s2 in range(cols):
                if (t, s1, s2) in copies and (h, s1 + c1, s2 + c2) in copies:
                    n_edges += 1
    return len(copies), n_edges


def _xcross(a, b):
    return float(a[0] * b[1] - a[1] * b[0])


def _oracle_segments_intersect(p1, p2, q1, q2, eps=1e-12):
    """Parametric closed-segment intersection (independent of the library
    predicate)."""
    d = np.array([p2 - p1, q1 - q2]).T
    rhs = q1 - p1
    det = np.linalg.det(d)
    if abs(det) > eps:
        st = np.linalg.solve(d, rhs)
        return bool(np.all(st >= -eps) and np.all(st <= 1 + eps))
    # parallel: check collinearity then 1D overlap
    u = p2 - p1
    if abs(_xcross(u, rhs)) > eps * max(1.0, np.linalg.norm(u)):
        return False
    t_axis = np.argmax(np.abs(u)) if np.abs(u).max() > 0 else 0
    a0, a1 = sorted((p1[t_axis], p2[t_axis]))
    b0, b1 = sorted((q1[t_axis], q2[t_axis]))
    return min(a1, b1) - max(a0, b0) >= -eps


def oracle_noncrossing(fw, halfwidth=1):
    """Brute-force crossing scan over an explicit patch of copies."""
    segs = []
    for k in range(fw.m):
        t, h = int(fw.tails[k]), int(fw.heads[k])
        c = fw.shifts[k]
        for s1 in range(-halfwidth, halfwidth + 1):
            for s2 in range(-halfwidth, halfwidth + 1):
                p = fw.positions[t] + fw.lattice @ np.array([s1, s2], float)
                q = fw.positions[h] + fw.lattice @ np.array(
                    [s1 + c[0], s2 + c[1]], float)
                ids = frozenset([(t, s1, s2), (h, s1 + int(c[0]), s2 + int(c[1]))])
                segs.append((p, q, ids))
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            p1, p2, ia = segs[i]
            q1, q2, ib = segs[j]
            shared = ia & ib
            if len(shared) == 2:
                continue
            if not _oracle_segments_intersect(p1, p2, q1, q2):
                continue
            if len(shared) == 1:
                # allowed contact point; flag only a genuine overlap
                u = p2 - p1
                v = q2 - q1
                if abs(_xcross(u, v)) > 1e-9 * np.linalg.norm(u) * np.linalg.norm(v):
                    continue
                (sv, ss1, ss2), = shared
                base = fw.positions[sv] + fw.lattice @ np.array([ss1, ss2], float)
                a = p2 - base if np.allclose(p1, base, atol=1e-9) else p1 - base
                b = q2 - base if np.allclose(q1, base, atol=1e-9) else q1 - base
                if float(a @ b) <= 1e-12:
                    continue
            return False
    return True


def oracle_nullspace(matrix, rtol=1e-9):
    """Kernel basis straight from numpy's SVD."""
    matrix = np.atleast_2d(np.asarray(matrix, float))
    u, s, vt = np.linalg.svd(matrix)
    if s.size == 0 or s[0] == 0.0:
        return vt.T
    rank = int((s > rtol * s[0]).sum())
    return vt[rank:].T


def oracle_rank(matrix, rtol=1e-9):
    matrix = np.atleast_2d(np.asarray(matrix, float))
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > rtol * s[0]).sum())


def oracle_gram_rate_fd(cfg_of_tau, tau, h=1e-5):
    """Central-difference derivative of the lattice Gram matrix."""
    gp = cfg_of_tau(tau + h).gram()
    gm = cfg_of_tau(tau - h).gram()
    return (gp - gm) / (2 * h)


def oracle_sublattices(index, box=None):
    """All index-k sublattices of Z^2 by brute force over generator pairs,
    deduplicated by their point sets in a box that contains a generating
    set of every index-k sublattice (halfwidth k suffices; coefficients up
    to 2*box reach every box point)."""
    k = index
    box = box if box is not None else k
    coeff = 2 * box
    found = {}
    for a11 in range(-k, k + 1):
        for a21 in range(-k, k + 1):
            for a12 in range(-k, k + 1):
                for a22 in range(-k, k + 1):
                    if a11 * a22 - a12 * a21 not in (k, -k):
                        continue
                    pts = frozenset(
                        (x * a11 + y * a12, x * a21 + y * a22)
                        for x in range(-coeff, coeff + 1)
                        for y in range(-coeff, coeff + 1)
                        if abs(x * a11 + y * a12) <= box
                        and abs(x * a21 + y * a22) <= box
                    )
                    found.setdefault(pts, ((a11, a12), (a21, a22)))
    return list(found.values())
