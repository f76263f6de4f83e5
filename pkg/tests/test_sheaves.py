import pytest

from conftest import bottom, partition_lattice, top
from orbitcoh.intlinalg import IntMatrix
from orbitcoh.posets import (
    GradedPoset,
    PosetMorphism,
    build_poset,
    chain_poset,
    identity_morphism,
    join_morphism,
    product_poset,
)
from orbitcoh.sheaves import (
    Copresheaf,
    FHom,
    Incompatible,
    NotConvex,
    NotExtremal,
    Presheaf,
    canonical_fhom,
    constant_sheaf,
    delta_sheaf,
    product_sheaf,
    pullback,
    star_fhom,
    validate_fhom,
)


def diamond():
    return build_poset(["bot", "l", "r", "top"],
                       [("bot", "l"), ("bot", "r"), ("l", "top"), ("r", "top")],
                       {"bot": 0, "l": 1, "r": 1, "top": 2})


def test_delta_point():
    p = chain_poset(2)
    s = delta_sheaf(p, ["x1"], 1, "co")
    assert s.rank_of("x1") == 1
    assert s.rank_of("x0") == 0 and s.rank_of("x2") == 0


def test_delta_whole_poset_is_constant():
    p = diamond()
    s = delta_sheaf(p, p.labels, 1, "co")
    for lo, hi in p.covers:
        assert s.maps[(lo, hi)] == IntMatrix.identity(1)


def test_delta_not_convex():
    p = chain_poset(2)
    with pytest.raises(NotConvex):
        delta_sheaf(p, ["x0", "x2"], 1, "pre")


def test_functoriality_checked():
    p = diamond()
    bad_maps = {}
    for lo, hi in p.covers:
        bad_maps[(lo, hi)] = IntMatrix(1, 1, [[1]])
    bad_maps[(p.index["l"], p.index["top"])] = IntMatrix(1, 1, [[2]])
    with pytest.raises(ValueError):
        Copresheaf(p, [1, 1, 1, 1], bad_maps)


def test_composed_maps_along_chain():
    p = chain_poset(2)
    maps = {
        (p.index["x0"], p.index["x1"]): IntMatrix(1, 1, [[2]]),
        (p.index["x1"], p.index["x2"]): IntMatrix(1, 1, [[3]]),
    }
    g = Copresheaf(p, [1, 1, 1], maps)
    assert g.extension("x0", "x2") == IntMatrix(1, 1, [[6]])
    f = Presheaf(p, [1, 1, 1], maps)
    assert f.restriction("x0", "x2") == IntMatrix(1, 1, [[6]])


def test_pullback_identity_and_point():
    p = diamond()
    s = constant_sheaf(p, 2, "pre")
    ident = identity_morphism(p)
    back = pullback(ident, s)
    assert back.ranks == s.ranks
    point = build_poset(["*"], [], {"*": 0})
    to_point = PosetMorphism(p, point, {lab: "*" for lab in p.labels})
    r = pullback(to_point, constant_sheaf(point, 3, "co"))
    assert all(x == 3 for x in r.ranks)


def test_star_fhom_at_join_minimum():
    p3 = partition_lattice(3)
    vee = join_morphism(p3)
    a = ((1, 2), (3,))
    b = ((1, 3), (2,))
    # (a, b) is minimal in the fiber of the join over top
    s = star_fhom(vee, top(3), (a, b), "pre")
    validate_fhom(s)
    # (top, top) lies above (bot, top) in the same fiber: not minimal
    with pytest.raises(NotExtremal):
        star_fhom(vee, top(3), (top(3), top(3)), "pre")


def test_star_fhom_identity_case():
    p = chain_poset(1)
    ident = identity_morphism(p)
    s = star_fhom(ident, "x0", "x0", "pre")
    assert s.component("x0").data == [[1]]


def test_star_fhom_copresheaf_maximal():
    p3 = partition_lattice(3)
    vee = join_morphism(p3)
    t = top(3)
    bot = bottom(3)
    # fiber over bottom is the single pair (bot, bot): maximal there
    s = star_fhom(vee, bot, (bot, bot), "co")
    validate_fhom(s)
    # (bot, a) is not maximal in the fiber over a
    a = ((1, 2), (3,))
    with pytest.raises(NotExtremal):
        star_fhom(vee, a, (bot, a), "co")
    assert star_fhom(vee, t, (t, t), "co") is not None


def test_canonical_fhom_validates():
    p3 = partition_lattice(3)
    vee = join_morphism(p3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    can = canonical_fhom(vee, g)
    validate_fhom(can)


def test_zero_fhom_ok_and_mismatch_detected():
    p = diamond()
    s = constant_sheaf(p, 1, "co")
    ident = identity_morphism(p)
    zero = FHom(ident, s, s, {i: IntMatrix(1, 1, [[0]]) for i in range(p.n)})
    validate_fhom(zero)
    comps = {i: IntMatrix(1, 1, [[1]]) for i in range(p.n)}
    comps[p.index["l"]] = IntMatrix(1, 1, [[5]])
    with pytest.raises(Incompatible):
        FHom(ident, s, s, comps)


def test_product_sheaf_ranks():
    p = chain_poset(1)
    prod = product_poset(p, p)
    s = constant_sheaf(p, 2, "co")
    sp = product_sheaf(s, s, prod)
    assert all(r == 4 for r in sp.ranks)


def test_pullback_preserves_functoriality():
    p3 = partition_lattice(3)
    point = build_poset(["*"], [], {"*": 0})
    chain = chain_poset(2)
    rank_map = PosetMorphism(p3, chain,
                             {lab: f"x{p3.rank_of(lab)}" for lab in p3.labels})
    maps = {
        (chain.index["x0"], chain.index["x1"]): IntMatrix(1, 1, [[2]]),
        (chain.index["x1"], chain.index["x2"]): IntMatrix(1, 1, [[-3]]),
    }
    g = Copresheaf(chain, [1, 1, 1], maps)
    pulled = pullback(rank_map, g)
    # re-validating the pulled data runs the full functoriality check
    Copresheaf(p3, pulled.ranks, pulled.maps)
