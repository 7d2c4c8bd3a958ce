"""Pointedness, certification, insertions and rigidifying candidates."""

import math

import pytest

from perimax import (
    FrameworkError,
    certify_ppt,
    find_rigidifying_edges,
    fixture,
    flex_space,
    insert_edge_orbit,
    is_pointed,
    periodic_stress_space,
    pointedness_margin,
)
from perimax.pseudotri import candidate_pairs, oriented_flex, pair_length_derivative
from perimax.relax import relax, sublattices_up_to

from conftest import right_angle_pair

PPT_NAMES = ("kagome", "ppt3")


def test_right_angle_vertex_pointed():
    fw = right_angle_pair()
    # edges at 0 and 90 degrees: the reflex gap is 270 degrees
    assert abs(pointedness_margin(fw, 0) - math.pi / 2) < 1e-12
    assert is_pointed(fw, 0)


def test_kagome_pointedness_by_angle():
    k0 = fixture("kagome", theta=0.0)
    # edges at 0, 60, 180, 240 degrees: largest gap 120 degrees
    assert abs(pointedness_margin(k0, 0) - (2 * math.pi / 3 - math.pi)) < 1e-12
    assert not is_pointed(k0, 0)
    k = fixture("kagome", theta=math.pi / 2)
    assert all(is_pointed(k, v) for v in range(3))


def test_certify_examples():
    cert = certify_ppt(fixture("ppt3"))
    assert cert.valid and cert.counts == (3, 6, 3)
    assert cert.stress_free and cert.flex_dim == 1

    cert = certify_ppt(fixture("square_grid"))
    assert not cert.valid
    assert any("corners" in f for f in cert.failures)
    assert "edge count" not in " ".join(cert.failures)  # m = 2n holds (2 = 2)

    cert = certify_ppt(fixture("reentrant"))
    assert not cert.valid
    assert any("edge count 3 != 2n = 4" in f for f in cert.failures)


def test_ppt_counts_identity():
    for name in PPT_NAMES:
        fw = fixture(name)
        cert = certify_ppt(fw)
        assert cert.valid
        n, m, n_star = cert.counts
        assert m == 2 * n and n_star == n
        assert int(fw.degrees().sum()) == n + 3 * n_star


def test_insertion_rigidifies():
    fw = fixture("ppt3")
    cands = find_rigidifying_edges(fw)
    assert cands and abs(cands[0].derivative) > 1e-3
    fw1 = insert_edge_orbit(fw, cands[0])
    _, rep = flex_space(fw1)
    assert (rep.sigma, rep.phi) == (0, 0)

    # a second independent insertion creates a one-dimensional stress
    for cand in cands[1:]:
        try:
            fw2 = insert_edge_orbit(fw1, cand)
        except FrameworkError:
            continue
        _, rep2 = flex_space(fw2)
        assert (rep2.sigma, rep2.phi) == (1, 0)
        break
    else:
        raise AssertionError("no compatible second insertion")


def test_insert_duplicate_rejected():
    fw = fixture("ppt3")
    with pytest.raises(FrameworkError, match="duplicate orbit"):
        insert_edge_orbit(fw, fw.edge_key(0))


def test_insert_crossing_rejected():
    # kagome at theta=pi/2: the pair (1, 2, (1, 0)) cuts through the fixed
    # triangle's surroundings
    fw = fixture("kagome", theta=math.pi / 2)
    crossing = None
    for key in candidate_pairs(fw, 2):
        try:
            insert_edge_orbit(fw, key)
        except FrameworkError as exc:
            if "crossing insertion" in str(exc):
                crossing = key
                break
    assert crossing is not None


def test_rigidify_requires_certificate():
    with pytest.raises(FrameworkError, match="not a certified"):
        find_rigidifying_edges(fixture("ultrarigid"))
    with pytest.raises(FrameworkError, match="not a certified"):
        find_rigidifying_edges(fixture("reentrant"))


def test_candidates_sorted_and_oriented():
    fw = fixture("ppt3")
    cands = find_rigidifying_edges(fw)
    mags = [abs(c.derivative) for c in cands]
    assert mags == sorted(mags, reverse=True)
    assert cands[0].derivative > 0  # orientation: top candidate expands


def test_double_insertion_sign_properties(rng):
    """Opposite stress signs on two inserted orbits; same-sign length rates."""
    for name in PPT_NAMES:
        fw = fixture(name)
        gauged, tangent, pairs, derivs = oriented_flex(fw, 2)
        cands = find_rigidifying_edges(fw)
        checked = 0
        guard = 0
        while checked < 20 and guard < 400:
            guard += 1
            i, j = rng.integers(0, len(cands), size=2)
            if i == j:
                continue
            a, b = cands[int(i)], cands[int(j)]
            try:
                fw2 = insert_edge_orbit(insert_edge_orbit(fw, a), b)
            except FrameworkError:
                continue
            basis = periodic_stress_space(fw2)
            assert len(basis) == 1, name
            s = basis[0].values
            sa, sb = s[fw2.m - 2], s[fw2.m - 1]
            assert sa * sb < 0, (name, a.key, b.key)
            # distance rates under the mechanism share a sign (or vanish)
            da = pair_length_derivative(gauged, tangent, a.tail, a.head, a.shift)
            db = pair_length_derivative(gauged, tangent, b.tail, b.head, b.shift)
            assert da * db >= -1e-12, (name, a.key, b.key)
            checked += 1
        assert checked == 20, name


def test_ppt_certificates_survive_relaxation():
    for name in PPT_NAMES:
        fw = fixture(name)
        for sub in sublattices_up_to(4):
            cert = certify_ppt(relax(fw, sub))
            assert cert.valid and cert.flex_dim == 1, (name, sub)


def test_insertion_order_of_new_orbit():
    fw = fixture("ppt3")
    cand = find_rigidifying_edges(fw)[0]
    fw1 = insert_edge_orbit(fw, cand)
    assert fw1.m == fw.m + 1
    assert fw1.edge_key(fw1.m - 1) == cand.key
