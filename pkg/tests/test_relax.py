"""Sublattice enumeration, unfolding, stress persistence, ultrarigidity."""

import numpy as np
import pytest

from perimax import (
    FrameworkError,
    check_periodic_stress,
    copy_stress,
    fixture,
    flex_space,
    periodic_stress_space,
    relax,
    stress_persists,
    sublattices_of_index,
    sublattices_up_to,
    ultrarigidity_probe,
)
from perimax.relax import Sublattice

from conftest import oracle_sublattices, subdivided_grid

FIXTURE_NAMES = ("square_grid", "kagome", "reentrant", "ppt3", "cubes",
                 "ultrarigid")


def test_enumeration_counts_match_divisor_sums():
    # sigma_1(k) for k = 1..6
    assert [len(sublattices_of_index(k)) for k in range(1, 7)] == \
        [1, 3, 4, 7, 6, 12]


def test_enumeration_matches_bruteforce_oracle():
    for k in (1, 2, 3, 4):
        gens = oracle_sublattices(k)
        assert len(gens) == len(sublattices_of_index(k))
        # every brute-force lattice canonicalizes to a distinct enumerated form
        enum = {(s.a, s.b, s.d) for s in sublattices_of_index(k)}
        canon = set()
        for rows in gens:
            sub = Sublattice.from_matrix(np.array(rows))
            canon.add((sub.a, sub.b, sub.d))
        assert canon == enum, k


def test_index_two_forms():
    forms = {(s.a, s.b, s.d) for s in sublattices_of_index(2)}
    assert forms == {(2, 0, 1), (1, 0, 2), (1, 1, 2)}


def test_canonicalization_invariance(rng):
    for _ in range(200):
        while True:
            M = rng.integers(-5, 6, size=(2, 2))
            det = int(round(np.linalg.det(M)))
            if det != 0:
                break
        sub = Sublattice.from_matrix(M)
        assert sub.index == abs(det)
        # multiplying by a unimodular matrix does not change the sublattice
        U = np.array([[1, int(rng.integers(-3, 4))], [0, 1]])
        V = np.array([[1, 0], [int(rng.integers(-3, 4)), 1]])
        sub2 = Sublattice.from_matrix(M @ U @ V)
        assert (sub.a, sub.b, sub.d) == (sub2.a, sub2.b, sub2.d)


def test_reduce_roundtrip(rng):
    sub = Sublattice(3, 2, 4)
    for _ in range(100):
        z1, z2 = int(rng.integers(-20, 21)), int(rng.integers(-20, 21))
        r1, r2, k1, k2 = sub.reduce(z1, z2)
        assert 0 <= r1 < sub.a and 0 <= r2 < sub.d
        assert (z1, z2) == (r1 + k1 * sub.a, r2 + k1 * sub.b + k2 * sub.d)


def test_relax_identity():
    fw = fixture("cubes")
    unf = relax(fw, Sublattice(1, 0, 1))
    assert (unf.n, unf.m) == (fw.n, fw.m)
    assert np.allclose(unf.positions, fw.positions)
    assert [unf.edge_key(k) for k in range(unf.m)] == \
        [fw.edge_key(k) for k in range(fw.m)]


def test_relax_square_grid_two_columns():
    fw = fixture("square_grid")
    unf = relax(fw, Sublattice(2, 0, 1))
    assert (unf.n, unf.m) == (2, 4)
    _, rep = flex_space(unf)
    assert (rep.sigma, rep.phi) == (1, 2)
    # copied non-periodic stress stays non-periodic
    assert not check_periodic_stress(unf, copy_stress(unf, np.array([1.0, 0.0]))).ok


def test_relax_point_set_identical():
    # unfolded copies realize exactly the original infinite point set
    fw = fixture("ppt3")
    sub = Sublattice(2, 1, 2)
    unf = relax(fw, sub)
    assert (unf.n, unf.m) == (fw.n * 4, fw.m * 4)
    for vid in range(unf.n):
        i = int(unf.parent_vertex[vid])
        diff = np.linalg.solve(fw.lattice, unf.positions[vid] - fw.positions[i])
        assert np.abs(diff - np.round(diff)).max() < 1e-9
    # edge length multiset scales with the index
    la = np.sort(np.linalg.norm(unf.edge_vectors(), axis=1))
    lb = np.sort(np.tile(np.linalg.norm(fw.edge_vectors(), axis=1), 4))
    assert np.abs(la - lb).max() < 1e-9


def test_relax_kagome_keeps_certificate():
    from perimax import certify_ppt
    unf = relax(fixture("kagome"), Sublattice(2, 0, 2))
    assert (unf.n, unf.m) == (12, 24)
    cert = certify_ppt(unf)
    assert cert.valid and cert.flex_dim == 1


def test_stress_persistence():
    cb = fixture("cubes")
    s = periodic_stress_space(cb)[0].values
    assert stress_persists(cb, np.zeros(cb.m), Sublattice(1, 1, 2))
    for sub in sublattices_up_to(4):
        assert stress_persists(cb, s, sub), sub

    sg = subdivided_grid()
    sp = periodic_stress_space(sg)[0].values
    for sub in sublattices_of_index(2):
        assert stress_persists(sg, sp, sub), sub


def test_sigma_nondecreasing_under_relaxation():
    for name in FIXTURE_NAMES:
        fw = fixture(name)
        base = flex_space(fw)[1].sigma
        for sub in sublattices_up_to(4):
            assert flex_space(relax(fw, sub))[1].sigma >= base, (name, sub)


def test_count_identity_on_unfoldings():
    from perimax import count_identity_check
    for name in ("kagome", "cubes", "reentrant"):
        fw = fixture(name)
        for sub in sublattices_up_to(3):
            rep = count_identity_check(relax(fw, sub))
            assert rep.stress_flex_identity
            assert (rep.n, rep.m) == (fw.n * sub.index, fw.m * sub.index)


def test_relax_composition_isomorphism():
    fw = fixture("kagome")
    s1 = Sublattice.from_matrix([[2, 1], [0, 1]])
    s2 = Sublattice.from_matrix([[1, 0], [1, 2]])
    a = relax(relax(fw, s1), s2)
    b = relax(fw, Sublattice.from_matrix(s1.matrix @ s2.matrix))
    ra, rb = flex_space(a)[1], flex_space(b)[1]
    assert (a.n, a.m, ra.sigma, ra.delta) == (b.n, b.m, rb.sigma, rb.delta)
    la = np.sort(np.linalg.norm(a.edge_vectors(), axis=1))
    lb = np.sort(np.linalg.norm(b.edge_vectors(), axis=1))
    assert np.abs(la - lb).max() < 1e-9


def test_ultrarigidity_probe_examples():
    rep = ultrarigidity_probe(fixture("ultrarigid"), 4)
    assert rep.ultrarigid
    assert len(rep.entries) == 1 + 3 + 4 + 7
    assert all(e.phi == 0 for e in rep.entries)

    rep = ultrarigidity_probe(fixture("square_grid"), 2)
    assert not rep.ultrarigid
    assert rep.first_failure.sublattice.index == 1
    assert rep.first_failure.phi == 1

    with pytest.raises(FrameworkError):
        ultrarigidity_probe(fixture("square_grid"), 0)
