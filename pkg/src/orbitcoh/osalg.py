"""Orlik-Solomon algebras of geometric lattices via the nbc basis.

Independent of the cellular machinery: monomials are straightened with
explicit circuit relations, so the structure constants obtained here
serve as a cross-check oracle for the form-morphism route.
"""

from __future__ import annotations

from itertools import combinations

from .cellular import (
    CellularForm,
    construct_cellular_form,
    form_morphism,
    product_form,
    verify_cellular_form,
)
from .intlinalg import IntMatrix, unimodular_inverse
from .posets import GradedPoset, join_morphism
from .sheaves import FHom, delta_sheaf, star_fhom


class NotGeometric(Exception):
    """The lattice is not geometric (atomic and semimodular)."""


class Mismatch(Exception):
    """The nbc and cellular routes disagree; the implementation is wrong."""


def _merge_sign(left: tuple, right: tuple):
    """Sort the concatenation of two increasing tuples, tracking the sign.

    Returns (sorted tuple, sign) or None when an atom repeats.
    """
    if set(left) & set(right):
        return None
    merged = left + right
    items = list(merged)
    sign = 1
    # insertion sort; each swap of adjacent entries flips the sign
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    return tuple(items), sign


class OSAlgebra:
    """nbc basis and products of the OS-algebra of a geometric lattice.

    ``atom_order`` fixes the total order on atoms (default: label order);
    the nbc basis depends on it.  Monomials are increasing tuples of
    atom positions in that order; elements are dicts from monomials to
    integers, and each graded piece collects the monomials whose join
    is the given lattice element.
    """

    def __init__(self, lattice: GradedPoset, atom_order=None):
        self.lattice = lattice
        self._check_geometric()
        if atom_order is None:
            self.atoms = tuple(i for i in range(lattice.n)
                               if lattice.rank[i] == 1)
        else:
            self.atoms = tuple(lattice.index[a] for a in atom_order)
            if sorted(self.atoms) != [i for i in range(lattice.n)
                                      if lattice.rank[i] == 1]:
                raise ValueError("atom_order must list every atom once")
        self.atom_pos = {a: i for i, a in enumerate(self.atoms)}
        self.circuits = self._circuits()
        self.broken = sorted({c[1:] for c in self.circuits})
        self.nbc: dict[object, list[tuple[int, ...]]] = {}
        self._nbc_index: dict[tuple[int, ...], tuple[object, int]] = {}
        self._enumerate_nbc()
        self._straighten_cache: dict[tuple[int, ...], dict] = {}

    # -- lattice structure --------------------------------------------------

    def _check_geometric(self):
        lat = self.lattice
        mins = [i for i in range(lat.n) if lat.rank[i] == 0]
        if len(mins) != 1:
            raise NotGeometric("no unique rank-0 element")
        self.bottom = mins[0]
        lat.require_join_semilattice()
        atoms = [i for i in range(lat.n) if lat.rank[i] == 1]
        for x in range(lat.n):
            below = [a for a in atoms if lat.leq(a, x)]
            acc = self.bottom if not below else below[0]
            for a in below[1:]:
                acc = lat.join_index(acc, a)
            if acc != x and lat.rank[x] > 0:
                raise NotGeometric(
                    f"{lat.labels[x]} is not a join of atoms")
            for a in atoms:
                if not lat.leq(a, x):
                    up = lat.join_index(x, a)
                    if lat.rank[up] != lat.rank[x] + 1:
                        raise NotGeometric(
                            f"semimodularity fails at {lat.labels[x]}")

    def _join_of(self, positions) -> int:
        acc = self.bottom
        for p in positions:
            acc = self.lattice.join_index(acc, self.atoms[p])
        return acc

    def _independent(self, subset) -> bool:
        return self.lattice.rank[self._join_of(subset)] == len(subset)

    def _circuits(self) -> list[tuple[int, ...]]:
        """Minimal dependent atom sets as increasing position tuples."""
        out = []
        found: list[set] = []
        max_size = max(self.lattice.rank) + 1
        for size in range(2, max_size + 1):
            for comb in combinations(range(len(self.atoms)), size):
                s = set(comb)
                if any(f <= s for f in found):
                    continue
                if not self._independent(comb):
                    out.append(comb)
                    found.append(s)
        return out

    def _contains_broken(self, subset: tuple[int, ...]) -> bool:
        s = set(subset)
        return any(set(b) <= s for b in self.broken)

    def _enumerate_nbc(self):
        lat = self.lattice
        for x in lat.labels:
            self.nbc[x] = []
        stack = [()]
        while stack:
            cur = stack.pop()
            x = lat.labels[self._join_of(cur)]
            self.nbc[x].append(cur)
            start = cur[-1] + 1 if cur else 0
            for p in range(len(self.atoms) - 1, start - 1, -1):
                cand = cur + (p,)
                if self._independent(cand) and not self._contains_broken(cand):
                    stack.append(cand)
        for x in self.nbc:
            self.nbc[x].sort()
            for i, mono in enumerate(self.nbc[x]):
                self._nbc_index[mono] = (x, i)

    def piece_rank(self, x) -> int:
        return len(self.nbc[x])

    def total_rank(self) -> int:
        return sum(len(v) for v in self.nbc.values())

    def grading_of(self, mono: tuple[int, ...]):
        return self.lattice.labels[self._join_of(mono)]

    def monomial_labels(self, mono: tuple[int, ...]):
        return tuple(self.lattice.labels[self.atoms[p]] for p in mono)

    # -- straightening ------------------------------------------------------

    def straighten(self, mono: tuple[int, ...]) -> dict[tuple[int, ...], int]:
        """Rewrite an increasing independent monomial into the nbc basis."""
        if mono in self._nbc_index:
            return {mono: 1}
        cached = self._straighten_cache.get(mono)
        if cached is not None:
            return cached
        s = set(mono)
        broken = next(b for b in self.broken if set(b) <= s)
        circuit = next(c for c in self.circuits if c[1:] == broken)
        rest = tuple(a for a in mono if a not in set(broken))
        _, unshuffle = _merge_sign(rest, broken)
        out: dict[tuple[int, ...], int] = {}
        # e_{C minus c_0} = sum_{l >= 2} (-1)^l e_{C minus c_l}
        for l in range(1, len(circuit)):
            sign_l = -1 if (l + 1) % 2 else 1
            repl = circuit[:l] + circuit[l + 1:]
            merged = _merge_sign(rest, repl)
            if merged is None:
                continue
            new_mono, msign = merged
            if not self._independent(new_mono):
                continue
            for k, v in self.straighten(new_mono).items():
                coeff = v * sign_l * msign * unshuffle
                out[k] = out.get(k, 0) + coeff
        out = {k: v for k, v in out.items() if v}
        self._straighten_cache[mono] = out
        return out

    def multiply_monomials(self, a: tuple[int, ...], b: tuple[int, ...]):
        """Product of two nbc monomials, expanded in the nbc basis."""
        merged = _merge_sign(a, b)
        if merged is None:
            return {}
        mono, sign = merged
        if not self._independent(mono):
            return {}
        return {k: sign * v for k, v in self.straighten(mono).items()}

    def multiply(self, x: dict, y: dict) -> dict:
        """Bilinear product of nbc-basis combinations."""
        out: dict[tuple[int, ...], int] = {}
        for a, ca in x.items():
            for b, cb in y.items():
                for k, v in self.multiply_monomials(a, b).items():
                    out[k] = out.get(k, 0) + ca * cb * v
        return {k: v for k, v in out.items() if v}

    # -- the nbc differential and cellular comparison ------------------------

    def nbc_form(self) -> CellularForm:
        """The nbc presentation packaged as a cellular form of (L, delta^0 Z)."""
        lat = self.lattice
        g = delta_sheaf(lat, [lat.labels[self.bottom]], 1, "co")
        ranks = [self.piece_rank(lab) for lab in lat.labels]
        diff: dict[tuple[int, int], IntMatrix] = {}
        for x in lat.labels:
            xi = lat.index[x]
            for col, mono in enumerate(self.nbc[x]):
                for pos in range(len(mono)):
                    sub = mono[:pos] + mono[pos + 1:]
                    sign = -1 if pos % 2 else 1
                    y, row_nbc = self._nbc_index[sub]
                    yi = lat.index[y]
                    block = diff.get((yi, xi))
                    if block is None:
                        block = IntMatrix(ranks[yi], ranks[xi])
                        diff[(yi, xi)] = block
                    block.data[row_nbc][col] += sign
        # differentials of nbc monomials only hit lower covers
        cover_set = set(lat.covers)
        for key in diff:
            if key not in cover_set:
                raise Mismatch("nbc differential escapes the cover relation")
        return CellularForm(lat, g, ranks, diff)


def nbc_basis(lattice: GradedPoset, atom_order=None) -> OSAlgebra:
    """Build the OS-algebra of a geometric lattice; nbc depends on the order."""
    return OSAlgebra(lattice, atom_order)


def os_multiply(alg: OSAlgebra, a, b) -> dict:
    """Product in the OS-algebra; inputs are monomials or dicts."""
    if isinstance(a, tuple):
        a = {a: 1}
    if isinstance(b, tuple):
        b = {b: 1}
    return alg.multiply(a, b)


class ComparisonReport:
    """Outcome of checking the cellular route against the nbc oracle."""

    def __init__(self, lattice, rank_match, product_pairs, change_of_basis):
        self.lattice = lattice
        self.rank_match = rank_match
        self.product_pairs = product_pairs
        self.change_of_basis = change_of_basis

    def __str__(self):
        return (f"ranks match: {self.rank_match}; "
                f"{self.product_pairs} product pairs verified")


def os_vs_cellular(lattice: GradedPoset, check_products: bool = True,
                   atom_order=None):
    """Compare the constructed cellular form against the nbc presentation.

    Builds the form of (L, delta^0 Z) by the generic algorithm, the
    unique comparison isomorphism onto the nbc form, and (optionally)
    the join/star form morphism, then checks every product against nbc
    straightening.  Raises Mismatch if anything disagrees.
    """
    alg = OSAlgebra(lattice, atom_order)
    lat = lattice
    g = delta_sheaf(lat, [lat.labels[alg.bottom]], 1, "co")
    built = construct_cellular_form(lat, g)
    if isinstance(built, CellularForm):
        verify_cellular_form(built)
    else:
        raise Mismatch(f"construction failed: {built}")
    nbcform = alg.nbc_form()
    verify_cellular_form(nbcform)
    for lab in lat.labels:
        if built.rank_of(lab) != alg.piece_rank(lab):
            raise Mismatch(f"piece rank differs at {lab}")

    from .posets import identity_morphism
    ident = identity_morphism(lat)
    t_id = FHom(ident, g, g,
                {i: IntMatrix.identity(g.ranks[i]) for i in range(lat.n)})
    compare = form_morphism(ident, t_id, built, nbcform)
    for lab in lat.labels:
        comp = compare.component(lab)
        if comp.rows != comp.cols:
            raise Mismatch(f"comparison not square at {lab}")
        unimodular_inverse(comp)  # raises if not invertible over Z

    pairs = 0
    if check_products:
        prod = product_form(built, built)
        vee = join_morphism(lat)
        bot = lat.labels[alg.bottom]
        t_star = star_fhom(vee, bot, (bot, bot), "co")
        phi = form_morphism(vee, t_star, prod, built)
        inverse = {lab: unimodular_inverse(compare.component(lab))
                   for lab in lat.labels}
        for x in lat.labels:
            for y in lat.labels:
                got = _cellular_products(alg, lat, compare, inverse, phi, x, y)
                for (a, b), expect in got:
                    if expect != alg.multiply_monomials(a, b):
                        raise Mismatch(
                            f"product {a} * {b} disagrees with nbc")
                    pairs += 1
    return ComparisonReport(lat, True, pairs, compare)


def _cellular_products(alg, lat, compare, inverse, phi, x, y):
    """Products of all nbc basis pairs in pieces x, y via the form route."""
    xi, yi = lat.index[x], lat.index[y]
    nx, ny = alg.nbc[x], alg.nbc[y]
    if not nx or not ny:
        return []
    join_lab = lat.labels[lat.join_index(xi, yi)]
    phi_comp = phi.components[phi.f.source.index[(x, y)]]
    out = []
    for ia, a in enumerate(nx):
        va = inverse[x].column(ia)
        for ib, b in enumerate(ny):
            vb = inverse[y].column(ib)
            tensor = [ca * cb for ca in va for cb in vb]
            image = phi_comp.apply(tensor)
            back = compare.component(join_lab).apply(image)
            expect = {}
            for idx, coeff in enumerate(back):
                if coeff:
                    expect[alg.nbc[join_lab][idx]] = coeff
            out.append(((a, b), expect))
    return out
