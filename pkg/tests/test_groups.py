import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gdft.groups import (CapExceeded, GroupError, PrimeIndexCase, TripleCase, all_subgroups, coset_reps,
                         direct_product, find_triple, group_from_generators, group_from_named_family, is_normal,
                         normal_subgroups, quotient, subgroup_from_elements, subgroup_generated, translate_cover)

from conftest import group


def brute_subgroups(G):
    """Every subgroup by closing each subset of size <= 2 of generators (enough for the small groups used)."""
    found = set()
    for a, b in itertools.combinations_with_replacement(range(G.order), 2):
        found.add(subgroup_generated(G, [a, b]).elements)
    return found


def test_permutation_closure_orders():
    assert group_from_generators(3, [[1, 2, 0], [1, 0, 2]]).order == 6
    assert group_from_generators(5, [[1, 2, 3, 4, 0], [1, 2, 0, 3, 4]]).order == 60
    assert group_from_generators(2, [[0, 1]]).order == 1


def test_cap_enforced():
    with pytest.raises(CapExceeded, match="group too large"):
        group_from_named_family("cyclic", 6000)
    with pytest.raises(CapExceeded):
        group_from_generators(8, [[1, 2, 3, 4, 5, 6, 7, 0], [1, 0, 2, 3, 4, 5, 6, 7]])


@pytest.mark.parametrize("spec,order,abelian", [
    ("cyclic:8", 8, True), ("dihedral:6", 12, False), ("heisenberg_p:3", 27, False),
    ("symmetric:4", 24, False), ("alternating:5", 60, False), ("quaternion8", 8, False),
    ("sl2:5", 120, False), ("cyclic:2*alternating:5", 120, False), ("cyclic:3*symmetric:3", 18, False),
])
def test_named_families_are_groups(spec, order, abelian):
    G = group(spec)
    assert G.order == order
    assert G.is_abelian == abelian
    G.check()


def test_unknown_family():
    with pytest.raises(GroupError):
        group_from_named_family("mathieu", 11)


def test_bfs_element_order_is_stable():
    a = group_from_named_family("symmetric", 4)
    b = group_from_named_family("symmetric", 4)
    assert np.array_equal(a.mult, b.mult)
    assert a.key == b.key


def test_direct_product_indexing():
    A, B = group("cyclic:2"), group("symmetric:3")
    P = direct_product(A, B)
    for a1, b1, a2, b2 in itertools.product(range(2), range(6), range(2), range(6)):
        assert P.mult[a1 * 6 + b1, a2 * 6 + b2] == A.mult[a1, a2] * 6 + B.mult[b1, b2]


@pytest.mark.parametrize("spec,count", [("symmetric:3", 6), ("quaternion8", 6), ("cyclic:7", 2),
                                        ("symmetric:4", 30), ("alternating:4", 10), ("dihedral:6", 16)])
def test_subgroup_counts(spec, count):
    G = group(spec)
    subs = all_subgroups(G)
    assert len(subs) == count
    assert {s.elements for s in subs} == brute_subgroups(G) if G.order <= 24 else True


def test_subgroups_closed_under_conjugation():
    G = group("symmetric:4")
    listed = {s.elements for s in all_subgroups(G)}
    for s in all_subgroups(G):
        for g in range(G.order):
            conj = tuple(sorted(int(x) for x in G.conj[g, list(s.elements)]))
            assert conj in listed


def test_subgroup_invariants():
    G = group("alternating:5")
    for s in all_subgroups(G):
        assert s.elements[0] == 0
        assert G.order % s.order == 0
        el = list(s.elements)
        assert s.member[G.mult[np.ix_(el, el)]].all()
        assert s.member[G.inv[el]].all()


def test_search_cap():
    with pytest.raises(CapExceeded):
        all_subgroups(group("cyclic:1024"))


def test_max_index_filter():
    G = group("symmetric:4")
    assert all(G.order // s.order <= 4 for s in all_subgroups(G, max_index=4))


def test_subgroup_from_elements_rejects_non_subgroup():
    with pytest.raises(GroupError):
        subgroup_from_elements(group("symmetric:3"), [0, 1, 2])


def test_abelian_subgroups_all_normal():
    G = group("cyclic:12")
    assert len(normal_subgroups(G)) == len(all_subgroups(G)) == 6


def test_coset_reps():
    G = group("symmetric:3")
    C3 = next(s for s in all_subgroups(G) if s.order == 3)
    for side in ("left", "right"):
        reps = coset_reps(G, C3, side)
        assert len(reps) == 2 and reps[0] == 0


def test_quotient_s4_by_v4_is_s3():
    G = group("symmetric:4")
    V4 = next(s for s in normal_subgroups(G) if s.order == 4)
    q = quotient(G, V4)
    Q = q.quotient
    assert Q.order == 6 and not Q.is_abelian
    # projection is a homomorphism with kernel V4
    assert np.array_equal(q.projection[G.mult], Q.mult[np.ix_(q.projection, q.projection)])
    assert set(np.flatnonzero(q.projection == 0)) == set(V4.elements)
    assert all(q.projection[s] == i for i, s in enumerate(q.section))
    # isomorphic to S3: same element-order multiset and a table isomorphism exists
    S3 = group("symmetric:3")
    assert sorted(Q.element_order(g) for g in range(6)) == sorted(S3.element_order(g) for g in range(6))


def test_quotient_requires_normal():
    G = group("symmetric:3")
    C2 = next(s for s in all_subgroups(G) if s.order == 2)
    assert not is_normal(G, C2)
    with pytest.raises(GroupError):
        quotient(G, C2)


def test_find_triple_examples():
    case = find_triple(group("symmetric:4"))
    assert isinstance(case, PrimeIndexCase) and case.N.order == 12 and case.p == 2
    case = find_triple(group("alternating:5"))
    assert isinstance(case, TripleCase)
    assert (case.N.order, case.H.order, case.K.order, case.hk_order) == (1, 12, 5, 60)
    case = find_triple(group("cyclic:2*alternating:5"))
    assert (case.N.order, case.H.order, case.K.order, case.hk_order) == (2, 24, 10, 120)
    case = find_triple(group("sl2:5"))
    assert (case.N.order, case.H.order, case.K.order) == (2, 24, 10)


@pytest.mark.parametrize("spec", ["alternating:5", "sl2:5", "cyclic:2*alternating:5", "dihedral:6"])
def test_triple_properties(spec):
    G = group(spec)
    case = find_triple(G, mode="triple")
    N, H, K = case.N, case.H, case.K
    assert set(H.elements) & set(K.elements) == set(N.elements)
    assert is_normal(G, N)
    products = {int(G.mult[h, k]) for h in H.elements for k in K.elements}
    assert len(products) == H.order * K.order // N.order


def test_find_triple_deterministic():
    a = find_triple(group("sl2:5"))
    b = find_triple(group_from_named_family("sl2", 5))
    assert (a.N.elements, a.H.elements, a.K.elements) == (b.N.elements, b.H.elements, b.K.elements)


def test_no_triple_in_prime_cyclic():
    with pytest.raises(GroupError, match="naive"):
        find_triple(group("cyclic:7"), mode="triple")


def test_translate_cover_examples():
    G = group("cyclic:6")
    assert translate_cover(G, range(6)) == [0]
    assert len(translate_cover(G, [0, 1, 2])) == 2
    A5 = group("alternating:5")
    case = find_triple(A5)
    hk = {int(A5.mult[h, k]) for h in case.H.elements for k in case.K.elements}
    assert translate_cover(A5, sorted(hk)) == [0]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["symmetric:4", "dihedral:10", "alternating:5", "quaternion8"]), st.data())
def test_translate_cover_property(spec, data):
    G = group(spec)
    S = data.draw(st.sets(st.integers(0, G.order - 1), min_size=1, max_size=G.order))
    cover = translate_cover(G, sorted(S))
    covered = np.zeros(G.order, dtype=bool)
    for g in cover:
        covered[G.mult[sorted(S), g]] = True
    assert covered.all()
    assert len(cover) <= math.ceil(G.order / len(S) * (math.log(G.order) + 1))
