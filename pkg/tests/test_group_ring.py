import json
from collections import Counter

import pytest
from sympy.combinatorics import Permutation, PermutationGroup

from perfectoid_tc.errors import PrecisionError, ProfileError
from perfectoid_tc.group_ring import (
    BOUNDARY_FLAG,
    FiniteGroup,
    alternating4,
    aut_cp_semidirect,
    cofiber_multiplicity,
    cofiber_table,
    conjugacy_classes,
    cyclic,
    groups_up_to_order_12,
    homotopy_orbit_groups,
    load_table,
    loop_decomposition,
    rees_construction,
    relation_consistency,
    semidirect_split,
    symmetric,
)

GROUPS = groups_up_to_order_12()


def _commuting_pairs_count(G):
    """Burnside: the number of classes is #{(g, h): gh = hg} / |G|."""
    n = G.order
    pairs = sum(1 for a in range(n) for b in range(n) if G.mul(a, b) == G.mul(b, a))
    assert pairs % n == 0
    return pairs // n


def test_group_counts_by_order():
    counts = Counter(G.order for G in GROUPS)
    assert [counts[n] for n in range(1, 13)] == [1, 1, 1, 2, 1, 2, 1, 5, 2, 2, 1, 5]


def test_groups_are_pairwise_non_isomorphic():
    def invariant(G):
        orders = sorted(G.element_order(a) for a in range(G.order))
        sizes = sorted(len(c.elements) for c in conjugacy_classes(G).classes)
        return G.order, tuple(orders), tuple(sizes)

    assert len({invariant(G) for G in GROUPS}) == len(GROUPS)


@pytest.mark.parametrize("G", GROUPS, ids=lambda G: G.name)
def test_class_equation_and_class_number(G):
    decomp = conjugacy_classes(G)
    assert decomp.class_equation_holds()
    assert len(decomp.classes) == _commuting_pairs_count(G)


@pytest.mark.parametrize("G,gens", [
    (symmetric(3), [[1, 0, 2], [1, 2, 0]]),
    (symmetric(4), [[1, 0, 2, 3], [1, 2, 3, 0]]),
    (alternating4(), [[1, 2, 0, 3], [1, 0, 3, 2]]),
])
def test_class_sizes_against_sympy(G, gens):
    ref = PermutationGroup([Permutation(g) for g in gens])
    want = sorted(len(c) for c in ref.conjugacy_classes())
    assert sorted(len(c.elements) for c in conjugacy_classes(G).classes) == want


def test_invalid_tables_are_rejected():
    with pytest.raises(ProfileError):
        FiniteGroup([[0, 1], [1, 1]])
    with pytest.raises(ProfileError):
        FiniteGroup([[0, 1, 2], [1, 2, 0]])
    with pytest.raises(ProfileError):
        FiniteGroup([[0, 3], [1, 0]])
    # a Latin square with identity 0 that is not associative
    loop = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(ProfileError):
        FiniteGroup(loop)


def test_loop_decomposition():
    G = symmetric(3)
    summands = loop_decomposition(G)
    assert len(summands) == 3
    assert sorted(len(s.centralizer) for s in summands) == [2, 3, 6]
    for s in summands:
        assert s.trivial_twist == (s.representative == G.identity)
        assert s.twist(G, s.twist_order) == G.identity
        assert s.twist(G, 1) == s.representative


@pytest.mark.parametrize("p,cents", [(2, [2, 2]), (3, [2, 3, 6]), (5, [4, 4, 4, 5, 20])])
def test_semidirect_centralizers(p, cents):
    G = aut_cp_semidirect(p)
    assert G.order == p * (p - 1)
    assert sorted(len(c.centralizer) for c in conjugacy_classes(G).classes) == sorted(cents)
    assert G.labels[G.identity] == "(1,0)"


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_split_multiplicities(p):
    rees = rees_construction(("perfect", p, 1), 4)
    table = semidirect_split(rees, p, 2)
    row = table.row(3)
    assert row["thh_multiplicity"] == 1
    assert row["split_multiplicity"] == p - 2
    assert cofiber_multiplicity(p) == p - 1
    assert BOUNDARY_FLAG in table.notes


def test_rees_tower():
    rees = rees_construction(("perfect", 3, 2), 5)
    for m in range(5):
        assert rees.quotient(m).rank == m + 1
        assert rees.surjection_kernel_rank(m) == 1
    with pytest.raises(PrecisionError):
        rees.quotient(6)
    F, mul = rees.truncated_ring(3)
    y = [0, 1, 0, 0]
    assert mul(mul(y, y), mul(y, y)) == [0, 0, 0, 0]
    a = [2, 0, 0, 0]
    assert mul(a, [F.inv(2), 0, 0, 0]) == [1, 0, 0, 0]
    oc = rees_construction(("oc", 2, 1), 3)
    assert oc.base == "R" and oc.quotient(2).pieces == ["xi_p^0", "xi_p^1", "xi_p^2"]
    with pytest.raises(ProfileError):
        oc.truncated_ring(1)
    assert relation_consistency()


def test_homotopy_orbit_and_cofiber_tables():
    rees = rees_construction(("perfect", 3, 1), 6)
    orbit = homotopy_orbit_groups(rees, 3)
    for n in range(8):
        assert orbit.row(n)["rank"] == (n // 2 + 1 if n % 2 == 0 else 0)
    cof = cofiber_table(rees, 3)
    for n in range(1, 9):
        assert cof.row(n)["rank"] == 2 * orbit.row(n - 1)["rank"]
    assert cof.notes == [BOUNDARY_FLAG]


def test_load_table_round_trip(tmp_path):
    G = cyclic(6)
    path = tmp_path / "c6.json"
    path.write_text(json.dumps(G.to_json()))
    H = load_table(path)
    assert (H.table == G.table).all()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"order": 3, "table": [[0, 1], [1, 0]]}))
    with pytest.raises(ProfileError):
        load_table(bad)
