import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from spine3.errors import BadPermutation, NonOrientable, SelfFaceGluing, UngluedFace, ValidationError
from spine3.triangulation import (
    all_one_tet_specs,
    fixture,
    from_spec,
    parse_and_validate,
    perm_sign,
    random_spec,
)


def test_fig8_counts():
    tri = fixture("fig8")
    assert tri.counts() == {"V": 1, "E": 2, "F": 4, "T": 2, "chi": 1}
    assert sorted(tri.edge_degree(e) for e in range(2)) == [6, 6]
    # the single vertex link is a torus
    assert tri.link_euler == [0]


def test_s3_2tet_counts():
    tri = fixture("s3_2tet")
    c = tri.counts()
    assert (c["V"], c["E"], c["T"], c["chi"]) == (1, 3, 2, 0)
    assert tri.link_euler == [2]


def test_p1_is_one_tet():
    c = fixture("p1").counts()
    assert c["T"] == 1 and c["chi"] == 0


def _one_tet(gluings):
    return {"tets": 1, "gluings": gluings}


def test_unglued_face():
    spec = _one_tet([{"tet": 0, "face": 0, "to_tet": 0, "to_face": 1, "perm": [1, 0, 2, 3]}])
    with pytest.raises(UngluedFace):
        from_spec(spec)


def test_bad_permutation_not_a_permutation():
    spec = _one_tet([{"tet": 0, "face": 0, "to_tet": 0, "to_face": 1, "perm": [1, 1, 2, 3]}])
    with pytest.raises(BadPermutation):
        from_spec(spec)


def test_bad_permutation_wrong_face():
    spec = _one_tet([{"tet": 0, "face": 0, "to_tet": 0, "to_face": 1, "perm": [2, 0, 1, 3]}])
    with pytest.raises(BadPermutation):
        from_spec(spec)


def test_conflicting_duplicate():
    g = {"tet": 0, "face": 0, "to_tet": 0, "to_face": 1, "perm": [1, 0, 2, 3]}
    h = {"tet": 0, "face": 1, "to_tet": 0, "to_face": 0, "perm": [1, 0, 3, 2]}
    with pytest.raises(BadPermutation):
        from_spec(_one_tet([g, h]))


def test_consistent_duplicate_accepted():
    spec = fixture("fig8").to_spec()
    doubled = dict(spec)
    extra = []
    for g in spec["gluings"]:
        inv = [0] * 4
        for a, b in enumerate(g["perm"]):
            inv[b] = a
        extra.append({"tet": g["to_tet"], "face": g["to_face"], "to_tet": g["tet"], "to_face": g["face"], "perm": inv})
    doubled["gluings"] = spec["gluings"] + extra
    assert from_spec(doubled).counts() == fixture("fig8").counts()


def test_self_face_gluing():
    spec = _one_tet([{"tet": 0, "face": 0, "to_tet": 0, "to_face": 0, "perm": [0, 2, 1, 3]}])
    with pytest.raises(SelfFaceGluing):
        from_spec(spec)


def test_non_orientable():
    # an even permutation on a self-gluing of one tet cannot reverse orientation
    spec = _one_tet(
        [
            {"tet": 0, "face": 0, "to_tet": 0, "to_face": 1, "perm": [1, 0, 3, 2]},
            {"tet": 0, "face": 2, "to_tet": 0, "to_face": 3, "perm": [1, 0, 3, 2]},
        ]
    )
    with pytest.raises(NonOrientable):
        from_spec(spec)


def test_malformed_json():
    with pytest.raises(ValidationError):
        parse_and_validate("{not json")
    with pytest.raises(ValidationError):
        parse_and_validate(json.dumps({"tets": 1}))


def test_one_tet_enumeration():
    specs = all_one_tet_specs()
    assert specs
    for s in specs:
        tri = from_spec(s)
        assert tri.num_tets == 1
        assert tri.euler_characteristic == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_random_specs_are_valid(n, seed):
    tri = from_spec(random_spec(n, random.Random(seed)))
    assert tri.num_faces == 2 * n
    # every edge slot belongs to exactly one class
    assert sum(len(s) for s in tri.edge_slots) == 6 * n
    # each quad is disjoint from exactly two edge slots
    for q in range(tri.num_quads):
        assert sum(row[q] for row in tri.incidence) == 2
    # gluings reverse the orientation
    for (t, f), (t2, f2, p) in tri.gluings.items():
        assert tri.orientation[t2] == -perm_sign(p) * tri.orientation[t]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_round_trip(n, seed):
    tri = from_spec(random_spec(n, random.Random(seed)))
    again = from_spec(tri.to_spec())
    assert again.counts() == tri.counts()
    assert again.incidence == tri.incidence


def test_arc_classes_have_two_slots(fixtures):
    for tri in fixtures.values():
        assert tri.num_arcs == 6 * tri.num_tets
        for a in range(tri.num_arcs):
            assert len(tri.arc_slots[a]) == 2


def test_normal_disk_types():
    tri = fixture("p1")
    assert tri.num_triangles == 4 and tri.num_quads == 3
    assert len(tri.opposite_edge_pairs(0)) == 3
