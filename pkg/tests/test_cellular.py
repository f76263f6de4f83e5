import pytest

from conftest import bottom, partition_lattice, top
from orbitcoh.cellular import (
    CellularForm,
    FormViolation,
    NotCellular,
    PreconditionFailed,
    cellular_chain,
    construct_cellular_form,
    form_morphism,
    product_form,
    verify_cellular_form,
)
from orbitcoh.intlinalg import IntMatrix, homology
from orbitcoh.oracle import TorComplex
from orbitcoh.posets import (
    PosetMorphism,
    build_poset,
    chain_poset,
    identity_morphism,
    join_morphism,
    product_poset,
)
from orbitcoh.sheaves import FHom, canonical_fhom, constant_sheaf, delta_sheaf


def star_poset(num_atoms):
    """Atoms below a single top element (the one-block coloring poset)."""
    labels = [f"a{i}" for i in range(num_atoms)] + ["top"]
    covers = [(f"a{i}", "top") for i in range(num_atoms)]
    rank = {lab: 0 for lab in labels}
    rank["top"] = 1
    return build_poset(labels, covers, rank)


def test_star_poset_form():
    # one undefined entry over a 2-element block with k = 2: two colorings
    p = star_poset(2)
    g = constant_sheaf(p, 1, "co")
    form = construct_cellular_form(p, g)
    assert isinstance(form, CellularForm)
    assert form.rank_of("top") == 1
    assert form.rank_of("a0") == 1 and form.rank_of("a1") == 1
    verify_cellular_form(form)
    verify_cellular_form(form, slow=True)


def test_star_poset_form_k3():
    p = star_poset(3)
    g = constant_sheaf(p, 1, "co")
    form = construct_cellular_form(p, g)
    assert form.rank_of("top") == 2


def test_partition_lattice_piece_ranks():
    # the form of (Pi_n, delta^bottom Z) has OS-algebra piece ranks |mu|
    for n in (3, 4):
        pn = partition_lattice(n)
        g = delta_sheaf(pn, [bottom(n)], 1, "co")
        form = construct_cellular_form(pn, g)
        assert isinstance(form, CellularForm)
        for lab in pn.labels:
            mu = pn.mobius_index(pn.index[bottom(n)], pn.index[lab])
            assert form.rank_of(lab) == abs(mu)
        verify_cellular_form(form)
    p4 = partition_lattice(4)
    g4 = delta_sheaf(p4, [bottom(4)], 1, "co")
    form4 = construct_cellular_form(p4, g4)
    by_rank = [0] * 4
    for lab in p4.labels:
        by_rank[p4.rank_of(lab)] += form4.rank_of(lab)
    assert by_rank == [1, 6, 11, 6]


def test_two_diamond_is_cellular():
    # Tor(delta_x, const Z) is concentrated at rank(x) for every x here, so
    # the algorithm must succeed (cross-checked against the brute force)
    p = build_poset(
        ["a", "b", "c", "d", "T"],
        [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "T"), ("d", "T")],
        {"a": 0, "b": 0, "c": 1, "d": 1, "T": 2})
    g = constant_sheaf(p, 1, "co")
    form = construct_cellular_form(p, g)
    assert isinstance(form, CellularForm)
    assert form.rank_of("T") == 1
    verify_cellular_form(form, slow=True)


def test_disjoint_supports_not_cellular():
    # c and d have disjoint rank-0 supports: the kernel below T is not
    # generated by the rank-1 kernels, and brute-force Tor is off-rank
    p = build_poset(["a", "b", "c", "d", "T"],
                    [("a", "c"), ("b", "d"), ("c", "T"), ("d", "T")],
                    {"a": 0, "b": 0, "c": 1, "d": 1, "T": 2})
    g = constant_sheaf(p, 1, "co")
    verdict = construct_cellular_form(p, g)
    assert isinstance(verdict, NotCellular)
    assert verdict.element == "T" and verdict.step == "kernel-sum"
    f = delta_sheaf(p, ["T"], 1, "pre")
    h = TorComplex(p, g, f).homology()
    assert h.betti(1) == 1  # nonzero off rank 2: verdicts agree


def test_surjectivity_failure():
    p = chain_poset(1)
    g = delta_sheaf(p, ["x1"], 1, "co")
    verdict = construct_cellular_form(p, g)
    assert isinstance(verdict, NotCellular)
    assert verdict.step == "surjectivity"


def test_verify_rejects_perturbed_form():
    p3 = partition_lattice(3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    form = construct_cellular_form(p3, g)
    key = next(k for k, m in form.diff.items() if m.rows and m.cols)
    bad_diff = dict(form.diff)
    perturbed = bad_diff[key].copy()
    perturbed.data[0][0] += 1
    bad_diff[key] = perturbed
    bad = CellularForm(p3, g, form.piece_ranks, bad_diff)
    with pytest.raises(FormViolation):
        verify_cellular_form(bad)


def test_cellular_chain_delta_concentrates():
    # coefficients delta_x: Tor is the piece at x, in degree rank(x)
    p3 = partition_lattice(3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    form = construct_cellular_form(p3, g)
    x = top(3)
    f = delta_sheaf(p3, [x], 1, "pre")
    h = homology(cellular_chain(form, f))
    assert h.betti(2) == form.rank_of(x) == 2
    assert sum(h.betti_vector()) == 2


def test_cellular_chain_jstar_matches_downset():
    # with coefficients j_x* Z the chain is the form below x, whose homology
    # is G(x) in degree zero
    p3 = partition_lattice(3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    form = construct_cellular_form(p3, g)
    for x in (((1, 2), (3,)), bottom(3), top(3)):
        f = delta_sheaf(p3, p3.below(x), 1, "pre")
        h = homology(cellular_chain(form, f))
        assert h.betti(0) == g.rank_of(x)
        assert sum(h.betti_vector()) == g.rank_of(x) and h.is_free()


def test_cellular_chain_matches_oracle_constant():
    p3 = partition_lattice(3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    form = construct_cellular_form(p3, g)
    f = constant_sheaf(p3, 1, "pre")
    h_cell = homology(cellular_chain(form, f))
    h_k = TorComplex(p3, g, f).homology()
    for n in range(max(len(h_cell.groups), len(h_k.groups))):
        assert h_cell.betti(n) == h_k.betti(n)
        assert h_cell.torsion(n) == h_k.torsion(n)


def test_form_morphism_identity():
    p3 = partition_lattice(3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    form = construct_cellular_form(p3, g)
    ident = identity_morphism(p3)
    t = FHom(ident, g, g, {i: IntMatrix.identity(g.ranks[i]) for i in range(p3.n)})
    phi = form_morphism(ident, t, form, form)
    for lab in p3.labels:
        assert phi.component(lab) == IntMatrix.identity(form.rank_of(lab))
    phi.check_commutes()


def test_form_morphism_rank_increase_rejected():
    p = chain_poset(1)
    q = chain_poset(2)
    up = PosetMorphism(p, q, {"x0": "x0", "x1": "x2"})
    g = constant_sheaf(p, 1, "co")
    gq = constant_sheaf(q, 1, "co")
    fp = construct_cellular_form(p, g)
    fq = construct_cellular_form(q, gq)
    t = FHom(up, g, gq, {i: IntMatrix.identity(1) for i in range(p.n)})
    with pytest.raises(PreconditionFailed):
        form_morphism(up, t, fp, fq)


def test_product_form_verifies():
    p = star_poset(2)
    g = constant_sheaf(p, 1, "co")
    form = construct_cellular_form(p, g)
    prod = product_form(form, form)
    assert prod.rank_of(("top", "top")) == 1
    assert prod.rank_of(("a0", "top")) == 1
    verify_cellular_form(prod)
    verify_cellular_form(prod, slow=True)


def test_product_with_point_form():
    p3 = partition_lattice(3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    form = construct_cellular_form(p3, g)
    point = build_poset(["*"], [], {"*": 0})
    pform = construct_cellular_form(point, constant_sheaf(point, 1, "co"))
    prod = product_form(form, pform)
    for lab in p3.labels:
        assert prod.rank_of((lab, "*")) == form.rank_of(lab)


def test_two_forms_mutually_inverse():
    # uniqueness: identity-associated morphisms between a form and a
    # relabel-built form compose to the identity
    p3 = partition_lattice(3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    a = construct_cellular_form(p3, g)
    b = construct_cellular_form(p3, g)
    ident = identity_morphism(p3)
    t = FHom(ident, g, g, {i: IntMatrix.identity(g.ranks[i]) for i in range(p3.n)})
    phi = form_morphism(ident, t, a, b)
    psi = form_morphism(ident, t, b, a)
    for lab in p3.labels:
        m = phi.component(lab).mul(psi.component(lab))
        assert m == IntMatrix.identity(a.rank_of(lab))


def test_join_morphism_of_forms_commutes():
    # the morphism associated with the join and the star homomorphism exists
    # and commutes with differentials on all pieces
    p3 = partition_lattice(3)
    g = delta_sheaf(p3, [bottom(3)], 1, "co")
    form = construct_cellular_form(p3, g)
    prod = product_form(form, form)
    vee = join_morphism(p3)
    from orbitcoh.sheaves import star_fhom
    t = star_fhom(vee, bottom(3), (bottom(3), bottom(3)), "co")
    phi = form_morphism(vee, t, prod, form)
    phi.check_commutes()
