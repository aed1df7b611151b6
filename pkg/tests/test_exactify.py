"""Exact lifting pipeline: symmetry structure, orbit polynomials,
coefficient-field recovery, Galois alignment, certificates, and both
verification modes.

Oracles: group-theoretic counts recomputed through the matrix layer, exact
identities checked in pure rational arithmetic (no numerics can fake a zero),
and embedding cross-checks against the refined fiducial each certificate came
from. The d=4 path exercises the even-dimension bookkeeping (doubled index
modulus) and the alignment degeneracy where several bijections tie on score.
"""

import json
from fractions import Fraction

import mpmath as mp
import pytest

from siclift.errors import LiftError, PrecisionError
from siclift.exactify import (ExactFiducialCertificate, _distinct_values,
                              _fraction_rank, _generates_over_rationals,
                              _group_isomorphisms, _poly_from_roots,
                              _tau_order, build_orbit_polynomials,
                              galois_transport, lift_coefficients,
                              method1_exactify, method2_exactify,
                              orbit_coefficient_values, symmetry_structure,
                              typea_orbit_group, verify_certified,
                              verify_exact)
from siclift.fidsearch import refine, seed_search
from siclift.heisenberg import overlaps
from siclift.modring import h2_group
from siclift.numfield import FieldTower, adjoin, recognize


# ---------------------------------------------------------------------------
# pipeline fixtures (one search + lift per dimension, shared module-wide)


@pytest.fixture(scope="module")
def fid5():
    return refine(seed_search(5, "fz", attempts=24, seed=11), 320)


@pytest.fixture(scope="module")
def cert5(fid5):
    return method2_exactify(fid5)


@pytest.fixture(scope="module")
def report5(cert5):
    return verify_exact(cert5)


@pytest.fixture(scope="module")
def fid4():
    return refine(seed_search(4, "fz", attempts=24, seed=11), 320)


@pytest.fixture(scope="module")
def cert4(fid4):
    return method2_exactify(fid4)


# ---------------------------------------------------------------------------
# small exact helpers


def test_tau_order_values():
    # order of -exp(i pi / d): odd d gives d, even d gives 2d
    assert _tau_order(4) == 8
    assert _tau_order(5) == 5
    assert _tau_order(6) == 12
    assert _tau_order(7) == 7
    assert _tau_order(8) == 16
    assert _tau_order(9) == 9


def test_distinct_values_clusters():
    with mp.workdps(340):
        vals = [mp.mpf(1), mp.mpf(1) + mp.mpf(10) ** -200, mp.mpf("0.5"),
                mp.mpf(1) + mp.mpf(10) ** -190]
        reps, assign = _distinct_values(vals, 320)
    assert len(reps) == 2
    assert assign == [0, 0, 1, 0]


def test_distinct_values_ambiguity_band_aborts():
    with mp.workdps(340):
        vals = [mp.mpf(1), mp.mpf(1) + mp.mpf(10) ** -100]
        with pytest.raises(PrecisionError):
            _distinct_values(vals, 320)


def test_poly_from_roots():
    with mp.workdps(50):
        coeffs = _poly_from_roots([mp.mpf(1), mp.mpf(2)])
        # (x-1)(x-2) = 2 - 3x + x^2, ascending
        assert len(coeffs) == 3
        assert abs(coeffs[0] - 2) < 1e-40
        assert abs(coeffs[1] + 3) < 1e-40
        assert abs(coeffs[2] - 1) < 1e-40


# ---------------------------------------------------------------------------
# abstract-group matching (used to pair Galois rows with index cosets)


def _cyclic_table(n):
    return tuple(tuple((i + j) % n for j in range(n)) for i in range(n))


def _klein_table():
    return tuple(tuple(i ^ j for j in range(4)) for i in range(4))


def _s3_table():
    import itertools
    perms = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    comp = lambda a, b: tuple(a[b[k]] for k in range(3))
    return tuple(tuple(idx[comp(perms[i], perms[j])] for j in range(6))
                 for i in range(6))


def test_isomorphisms_cyclic4():
    maps = _group_isomorphisms(_cyclic_table(4), _cyclic_table(4))
    assert len(maps) == 2        # x -> x and x -> 3x
    for f in maps:
        assert f[0] == 0


def test_isomorphisms_klein():
    maps = _group_isomorphisms(_klein_table(), _klein_table())
    assert len(maps) == 6        # GL(2, F2)


def test_isomorphisms_distinguish_groups():
    assert _group_isomorphisms(_cyclic_table(4), _klein_table()) == []
    assert _group_isomorphisms(_cyclic_table(6), _s3_table()) == []


def test_isomorphisms_s3_automorphisms():
    # all six automorphisms of S3 are inner
    assert len(_group_isomorphisms(_s3_table(), _s3_table())) == 6


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def test_fraction_rank():
    assert _fraction_rank([[Fraction(1), Fraction(2)],
                           [Fraction(2), Fraction(4)]]) == 1
    assert _fraction_rank([[Fraction(1), Fraction(0)],
                           [Fraction(0), Fraction(1)]]) == 2
    assert _fraction_rank([[Fraction(0), Fraction(0)]]) == 0


def test_generates_over_rationals():
    K = adjoin(FieldTower.rationals(80), [-2, 0, 1], 1.4, tag="s")
    assert _generates_over_rationals(K.generator(1))
    assert not _generates_over_rationals(K.one())


# ---------------------------------------------------------------------------
# shifted-search orbit group for the divisible-by-9 family


def test_typea_orbit_group_matches_matrix_layer():
    G = typea_orbit_group(21)
    H = h2_group(21)
    assert set(G.elements) == set(H.elements)
    els = list(G.elements)
    assert all(a * b == b * a for a in els[:6] for b in els[:6])


def test_typea_orbit_group_rejects_other_dimensions():
    with pytest.raises(ValueError):
        typea_orbit_group(5)


# ---------------------------------------------------------------------------
# d = 5 pipeline


def test_structure_d5(fid5):
    st = symmetry_structure(fid5)
    assert st.dp == 5
    assert len(st.s_pi) == 3
    assert len(st.cent) == 24
    assert sorted(len(o) for o in st.orbit_list) == [1, 24]


def test_orbit_polynomials_d5(fid5):
    st = symmetry_structure(fid5)
    table = overlaps(fid5)
    polys = build_orbit_polynomials(table, st.cent)
    by_deg = sorted(p.degree for p in polys)
    assert by_deg == [1, 8]   # identity orbit, and 24/|S| distinct values
    triv = next(p for p in polys if p.degree == 1)
    with mp.workdps(330):
        # identity-orbit overlap is 1, so its polynomial is x - 1
        assert abs(triv.coefficients[0] + 1) < mp.mpf(10) ** -300
        assert abs(triv.values[0] - 1) < mp.mpf(10) ** -300
    big = next(p for p in polys if p.degree == 8)
    assert big.imag_defect < mp.mpf(10) ** -160
    assert big.rep in [tuple(o[0]) for o in
                       (tuple(map(tuple, ob)) for ob in st.orbit_list)]


def test_orbit_coefficient_values_d5(fid5):
    vals = orbit_coefficient_values(fid5)
    assert vals
    assert all(mp.isfinite(v) for v in vals)


def test_lift_is_stable_under_relift_d5(fid5):
    st = symmetry_structure(fid5)
    table = overlaps(fid5)
    polys = build_orbit_polynomials(table, st.cent)
    e0 = lift_coefficients(polys)
    first = [[fr for c in p.exact for fr in c.coefficients] for p in polys]
    e0b = lift_coefficients(polys, e0_hint=e0)
    second = [[fr for c in p.exact for fr in c.coefficients] for p in polys]
    assert first == second
    assert e0b.degree == e0.degree


def test_certificate_shape_d5(cert5):
    assert cert5.d == 5 and cert5.method == 2
    assert cert5.tower.degree == 32
    assert len(cert5.all_overlaps()) == 25
    assert cert5.galois.candidates >= 1
    # scoring was decisive by many orders of magnitude
    assert cert5.galois.separation > mp.mpf(10) ** 20
    assert cert5.galois.score < 10


def test_e0_contains_sqrt_disc_d5(cert5):
    conj = cert5.conjectures
    assert conj["discriminant_squarefree"] == 3
    assert conj["coefficient_field_contains_sqrt_disc"] is True
    assert conj["nonconforming"] == []
    e0 = FieldTower(cert5.tower.levels[:cert5.e0_levels],
                    cert5.tower.precision)
    assert recognize(e0, mp.mpf(3) ** mp.mpf("0.5")) is not None


def test_verify_exact_d5(report5):
    assert report5["pass"] is True
    assert report5["offending"] is None
    for name in ("conjugation_closed", "lattice_overlaps_are_one",
                 "conjugation_negates_indices", "equiangularity",
                 "tau_is_the_phase", "trace_is_one", "hermitian",
                 "idempotent"):
        assert report5["checks"][name] is True, name


def test_certificate_roundtrip_d5(cert5, report5, tmp_path):
    path = tmp_path / "d5.cert"
    cert5.save(str(path))
    back = ExactFiducialCertificate.load(str(path))
    assert back.d == cert5.d
    assert back.e1_levels == cert5.e1_levels
    assert [lv.minpoly for lv in back.tower.levels] == \
           [lv.minpoly for lv in cert5.tower.levels]
    ours = cert5.all_overlaps()
    theirs = back.all_overlaps()
    assert set(ours) == set(theirs)
    for q in ours:
        assert ours[q].coefficients == theirs[q].coefficients
    # verification report travels with the file
    assert back.verification and back.verification["pass"] is True


def test_embeddings_match_numeric_table_d5(cert5, fid5):
    table = overlaps(fid5)
    with mp.workdps(330):
        tol = mp.mpf(10) ** -280
        for q, val in cert5.all_overlaps().items():
            assert abs(val.embed() - table.chi(q)) < tol


def test_galois_transport_d5(cert5):
    rows = cert5.galois_rows()
    g = rows[1]
    out = galois_transport(cert5, g)
    assert set(out) == set(cert5.all_overlaps())
    G = cert5.galois.matrices[1]
    q = cert5.generator_rep
    target = cert5.all_overlaps()[cert5._norm(G.apply(q))]
    assert (out[q] - target).is_zero()


def test_method_agreement_d5(fid5, cert5):
    cert1 = method1_exactify(fid5)
    assert cert1.method == 1
    assert [lv.minpoly for lv in cert1.tower.levels] == \
           [lv.minpoly for lv in cert5.tower.levels]
    ours = cert5.all_overlaps()
    theirs = cert1.all_overlaps()
    for q in ours:
        assert ours[q].coefficients == theirs[q].coefficients, q
    assert verify_exact(cert1)["pass"] is True


def test_verify_certified_shrinks_d5(cert5):
    r1 = verify_certified(cert5, digits=100)
    r2 = verify_certified(cert5, digits=200)
    assert r1["pass"] is True and r2["pass"] is True
    assert mp.mpf(r2["max_radius"]) < mp.mpf(r1["max_radius"]) * mp.mpf(10) ** -20


def _tampered(cert, bump):
    obj = json.loads(cert.to_json())
    key = sorted(k for k in obj["overlaps"] if k != "0,0")[0]
    val = Fraction(obj["overlaps"][key][0]) + bump
    obj["overlaps"][key][0] = str(val)
    obj["verification"] = None
    return ExactFiducialCertificate.from_json(json.dumps(obj))


def test_tampered_certificate_fails_exact_d5(cert5):
    bad = _tampered(cert5, Fraction(1, 7))
    rep = verify_exact(bad)
    assert rep["pass"] is False
    assert rep["offending"]


def test_tampered_certificate_fails_certified_d5(cert5):
    bad = _tampered(cert5, Fraction(1, 7))
    rep = verify_certified(bad, digits=80)
    assert rep["pass"] is False
    # a visible perturbation is provably nonzero, not merely unresolved
    assert "provably nonzero" in rep["reason"]


def test_precision_guards_d5(fid5):
    with pytest.raises(PrecisionError):
        method2_exactify(fid5, digits=150)
    with pytest.raises(PrecisionError):
        method2_exactify(fid5, digits=fid5.precision + 100)


# ---------------------------------------------------------------------------
# d = 4 pipeline (even dimension: doubled index modulus, tied scores)


def test_certificate_d4(cert4):
    assert cert4.d == 4
    from siclift.modring import dprime
    assert dprime(4) == 8
    assert len(cert4.all_overlaps()) == 64
    conj = cert4.conjectures
    assert conj["discriminant_squarefree"] == 5
    assert conj["coefficient_field_contains_sqrt_disc"] is True
    assert conj["nonconforming"] == []


def test_verify_exact_d4(cert4):
    rep = verify_exact(cert4)
    assert rep["pass"] is True, rep["offending"]


def test_alignment_degeneracy_is_recorded_d4(cert4):
    # several bijections tie near the floor; the exact cross-check decides,
    # and the certificate keeps the honest score record rather than a gap
    assert cert4.galois.candidates >= 2
    assert cert4.galois.score < 10


def test_method1_agrees_d4(fid4, cert4):
    cert1 = method1_exactify(fid4)
    ours = cert4.all_overlaps()
    theirs = cert1.all_overlaps()
    for q in ours:
        assert ours[q].coefficients == theirs[q].coefficients, q


# ---------------------------------------------------------------------------
# scope guards


def test_method1_rejects_dimension_multiple_of_three():
    class _Stub:
        d = 6
    with pytest.raises(LiftError):
        method1_exactify(_Stub())
