"""Cellular forms on graded posets and their morphisms.

A cellular form of a pair (P, G) is a P-graded free module with a
rank-decreasing differential whose restriction below any element has
homology concentrated in degree zero, where it reproduces G.  It exists
iff Tor(delta_x Z, G) is concentrated in degree rank(x) for every x,
and it is unique.  The constructor below decides existence and builds
the form in polynomial time, working up the ranks; morphisms of forms
are produced by the inverse-differential recursion, which pins them
uniquely.
"""

from __future__ import annotations

from dataclasses import dataclass

from .intlinalg import (
    ChainComplex,
    IntMatrix,
    SNFSolver,
    elementary_divisors,
    homology,
    hstack,
    kernel_basis,
    kron,
    same_lattice,
)
from .posets import GradedPoset, PosetMorphism, product_poset
from .sheaves import Copresheaf, FHom, Presheaf, product_sheaf, validate_fhom


class FormViolation(Exception):
    """A claimed cellular form fails one of the defining conditions."""


class PreconditionFailed(Exception):
    """The poset map increases rank somewhere, so no form morphism exists."""


@dataclass(frozen=True)
class NotCellular:
    """Verdict that (P, G) admits no cellular form, with the failing spot.

    ``step`` is one of 'surjectivity', 'kernel-sum', 'positive-homology'.
    """

    element: object
    step: str
    detail: str = ""

    def __bool__(self):
        return False


class CellularForm:
    """P-graded free module with differential components on covers.

    ``piece_ranks[i]`` is the rank of the piece at element i;
    ``diff[(y, x)]`` is the component of the differential from the piece
    at x into the piece at the lower cover y.
    """

    def __init__(self, poset: GradedPoset, copresheaf: Copresheaf,
                 piece_ranks, diff):
        self.poset = poset
        self.copresheaf = copresheaf
        self.piece_ranks = tuple(piece_ranks)
        self.diff = dict(diff)
        for (y, x), m in self.diff.items():
            if m.rows != self.piece_ranks[y] or m.cols != self.piece_ranks[x]:
                raise ValueError("differential block has wrong shape")

    def rank_of(self, label) -> int:
        return self.piece_ranks[self.poset.index[label]]

    def diff_block(self, y: int, x: int) -> IntMatrix:
        m = self.diff.get((y, x))
        if m is None:
            m = IntMatrix(self.piece_ranks[y], self.piece_ranks[x])
        return m

    def lower_offsets(self, x: int):
        """Sorted lower covers of x with offsets into their direct sum."""
        lowers = sorted(self.poset.lower[x])
        offsets = []
        total = 0
        for y in lowers:
            offsets.append(total)
            total += self.piece_ranks[y]
        return lowers, offsets, total

    def stacked_diff(self, x: int) -> IntMatrix:
        """The differential of the piece at x into the sum of its covers."""
        lowers, _, total = self.lower_offsets(x)
        if not lowers:
            return IntMatrix(0, self.piece_ranks[x])
        return vstack_blocks([self.diff_block(y, x) for y in lowers])

    def restricted_complex(self, mask: int) -> ChainComplex:
        """Chain complex of the pieces on a down-closed set of elements."""
        poset = self.poset
        members = [i for i in poset.mask_elements(mask) if self.piece_ranks[i]]
        if not members:
            return ChainComplex([0], {}, check=False)
        by_rank: dict[int, list[int]] = {}
        for i in members:
            by_rank.setdefault(poset.rank[i], []).append(i)
        top = max(by_rank)
        ranks = [sum(self.piece_ranks[i] for i in by_rank.get(r, []))
                 for r in range(top + 1)]
        bounds = {}
        for r in range(1, top + 1):
            uppers = sorted(by_rank.get(r, []))
            lowers = sorted(by_rank.get(r - 1, []))
            lo_off = {}
            total = 0
            for y in lowers:
                lo_off[y] = total
                total += self.piece_ranks[y]
            mat = IntMatrix(ranks[r - 1], ranks[r])
            col = 0
            for x in uppers:
                for y in poset.lower[x]:
                    block = self.diff.get((y, x))
                    if block is None or y not in lo_off:
                        continue
                    off = lo_off[y]
                    for a in range(block.rows):
                        row = mat.data[off + a]
                        brow = block.data[a]
                        for b in range(block.cols):
                            if brow[b]:
                                row[col + b] = brow[b]
                col += self.piece_ranks[x]
            bounds[r] = mat
        return ChainComplex(ranks, bounds, check=False)

    def to_json_dict(self) -> dict:
        poset = self.poset
        return {
            "piece_ranks": {str(poset.labels[i]): r
                            for i, r in enumerate(self.piece_ranks)},
            "differentials": {
                f"{poset.labels[y]}->{poset.labels[x]}": m.data
                for (y, x), m in sorted(self.diff.items())
                if m.rows and m.cols
            },
        }


def vstack_blocks(blocks: list[IntMatrix]) -> IntMatrix:
    from .intlinalg import vstack
    return vstack(blocks)


def _rank0_map(poset: GradedPoset, g: Copresheaf, x: int):
    """Extension matrices from all rank-0 elements below x, stacked."""
    zeros = [y for y in poset.mask_elements(poset.down[x])
             if poset.rank[y] == 0 and y != x]
    zeros.sort()
    offsets = []
    total = 0
    for y in zeros:
        offsets.append(total)
        total += g.ranks[y]
    if zeros:
        mat = hstack([g.map_index(y, x) for y in zeros]) if total else \
            IntMatrix(g.ranks[x], 0)
    else:
        mat = IntMatrix(g.ranks[x], 0)
    return zeros, offsets, total, mat


def construct_cellular_form(poset: GradedPoset, g: Copresheaf):
    """Decide cellularity of (P, G) and build the form when it exists.

    Returns a CellularForm, or a NotCellular verdict naming the first
    element (in rank then label order) where the construction breaks
    and which condition broke: the rank-0 surjectivity test, the
    kernel-sum test, or positive homology strictly below the element.
    """
    if not poset.graded:
        raise ValueError("cellular forms need a genuinely graded poset")
    order = sorted(range(poset.n), key=lambda i: (poset.rank[i], i))

    for x in order:
        if poset.rank[x] == 0 or g.ranks[x] == 0:
            continue
        _, _, _, mat = _rank0_map(poset, g, x)
        if elementary_divisors(mat) != [1] * g.ranks[x]:
            return NotCellular(poset.labels[x], "surjectivity",
                               "rank-0 values do not surject onto the value here")

    piece_ranks = [0] * poset.n
    diff: dict[tuple[int, int], IntMatrix] = {}
    kernels: dict[int, list[list[int]]] = {}  # rank-1 kernels in rank-0 coords

    for x in order:
        r = poset.rank[x]
        if r == 0:
            piece_ranks[x] = g.ranks[x]
            continue
        if r == 1:
            zeros, offsets, total, mat = _rank0_map(poset, g, x)
            ker = kernel_basis(mat)
            kernels[x] = ker
            piece_ranks[x] = len(ker)
            for pos, y in enumerate(zeros):
                block = IntMatrix(g.ranks[y], len(ker))
                for col, vec in enumerate(ker):
                    for a in range(g.ranks[y]):
                        block.data[a][col] = vec[offsets[pos] + a]
                if block.rows:
                    diff[(y, x)] = block
            continue

        # kernel-sum condition: rank-1 kernels below x must generate the
        # full kernel of the rank-0 map, as a lattice
        zeros, offsets, total, mat = _rank0_map(poset, g, x)
        pos_of = {y: off for y, off in zip(zeros, offsets)}
        gens = []
        for x1 in poset.mask_elements(poset.down[x]):
            if poset.rank[x1] != 1 or x1 == x:
                continue
            z1, off1, _, _ = _rank0_map(poset, g, x1)
            for vec in kernels.get(x1, []):
                emb = [0] * total
                for p, y in enumerate(z1):
                    base = pos_of[y]
                    for a in range(g.ranks[y]):
                        emb[base + a] = vec[off1[p] + a]
                gens.append(emb)
        big = kernel_basis(mat)
        if not same_lattice(gens, big, total):
            return NotCellular(poset.labels[x], "kernel-sum",
                               "rank-1 kernels do not generate the full kernel")

        # positive homology of the part strictly below x must vanish in
        # degrees 1..r-2 (degree r-1 cycles become the new piece)
        below = poset.down[x] & ~(1 << x)
        partial = CellularForm(poset, g, piece_ranks, diff)
        cx = partial.restricted_complex(below)
        h = homology(cx)
        for i in range(1, r - 1):
            b, tors = h.groups[i] if i < len(h.groups) else (0, ())
            if b or tors:
                return NotCellular(poset.labels[x], "positive-homology",
                                   f"homology below is nonzero in degree {i}")

        lowers = sorted(poset.lower[x])
        lo_off = {}
        tot = 0
        for y in lowers:
            lo_off[y] = tot
            tot += piece_ranks[y]
        rows_elems = sorted(z for z in poset.mask_elements(below)
                            if poset.rank[z] == r - 2)
        z_off = {}
        ztot = 0
        for z in rows_elems:
            z_off[z] = ztot
            ztot += piece_ranks[z]
        dmat = IntMatrix(ztot, tot)
        for y in lowers:
            for z in poset.lower[y]:
                block = diff.get((z, y))
                if block is None:
                    continue
                for a in range(block.rows):
                    row = dmat.data[z_off[z] + a]
                    for b in range(block.cols):
                        if block.data[a][b]:
                            row[lo_off[y] + b] = block.data[a][b]
        ker = kernel_basis(dmat)
        piece_ranks[x] = len(ker)
        for y in lowers:
            block = IntMatrix(piece_ranks[y], len(ker))
            for col, vec in enumerate(ker):
                for a in range(piece_ranks[y]):
                    block.data[a][col] = vec[lo_off[y] + a]
            if block.rows:
                diff[(y, x)] = block

    return CellularForm(poset, g, piece_ranks, diff)


def verify_cellular_form(form: CellularForm, g: Copresheaf | None = None,
                         slow: bool = False):
    """Check a claimed form; raise FormViolation with the offending spot.

    The default check is the three-condition shortcut (rank-0 pieces,
    rank-1 kernels, three-term integral exactness), which characterizes
    the form once the pair is known to be cellular.  ``slow=True`` runs
    the full definition instead: trivial positive homology below every
    element and degree-zero homology reproducing G.
    """
    if g is None:
        g = form.copresheaf
    poset = form.poset
    if slow:
        for x in range(poset.n):
            cx = form.restricted_complex(poset.down[x])
            h = homology(cx)
            for i in range(1, len(h.groups)):
                b, tors = h.groups[i]
                if b or tors:
                    raise FormViolation(
                        f"positive homology below {poset.labels[x]} in degree {i}")
            zeros, offsets, total, mat = _rank0_map(poset, g, x)
            if poset.rank[x] == 0:
                if form.piece_ranks[x] != g.ranks[x]:
                    raise FormViolation(f"rank-0 piece at {poset.labels[x]}")
                continue
            # H_0 below x must be G(x) via the extension maps: the kernel of
            # the summed extension map equals the image of the differential
            img = []
            pos_of = {y: off for y, off in zip(zeros, offsets)}
            for y1 in poset.mask_elements(poset.down[x]):
                if poset.rank[y1] != 1:
                    continue
                stack = form.stacked_diff(y1)
                for col in range(stack.cols):
                    emb = [0] * total
                    row0 = 0
                    for y in sorted(poset.lower[y1]):
                        for a in range(form.piece_ranks[y]):
                            emb[pos_of[y] + a] = stack.data[row0 + a][col]
                        row0 += form.piece_ranks[y]
                    img.append(emb)
            if elementary_divisors(mat) != [1] * g.ranks[x]:
                raise FormViolation(f"values below {poset.labels[x]} do not surject")
            if not same_lattice(img, kernel_basis(mat), total):
                raise FormViolation(
                    f"degree-0 homology below {poset.labels[x]} is not G there")
        return True

    for x in range(poset.n):
        r = poset.rank[x]
        if r == 0:
            if form.piece_ranks[x] != g.ranks[x]:
                raise FormViolation(f"rank-0 piece at {poset.labels[x]}")
            continue
        if r == 1:
            zeros, offsets, total, mat = _rank0_map(poset, g, x)
            stack = form.stacked_diff(x)
            cols = [stack.column(j) for j in range(stack.cols)]
            if not same_lattice(cols, kernel_basis(mat), total):
                raise FormViolation(
                    f"rank-1 piece at {poset.labels[x]} is not the kernel")
            if len(elementary_divisors(stack)) != form.piece_ranks[x]:
                raise FormViolation(
                    f"differential not injective at {poset.labels[x]}")
            continue
        stack = form.stacked_diff(x)
        lowers, _, tot = form.lower_offsets(x)
        below = poset.down[x] & ~(1 << x)
        rows_elems = sorted(z for z in poset.mask_elements(below)
                            if poset.rank[z] == r - 2)
        z_off = {}
        ztot = 0
        for z in rows_elems:
            z_off[z] = ztot
            ztot += form.piece_ranks[z]
        nxt = IntMatrix(ztot, tot)
        off = 0
        for y in lowers:
            for z in poset.lower[y]:
                block = form.diff.get((z, y))
                if block is None:
                    continue
                for a in range(block.rows):
                    for b in range(block.cols):
                        if block.data[a][b]:
                            nxt.data[z_off[z] + a][off + b] = block.data[a][b]
            off += form.piece_ranks[y]
        if not nxt.mul(stack).is_zero():
            raise FormViolation(f"d o d nonzero above {poset.labels[x]}")
        if len(elementary_divisors(stack)) != form.piece_ranks[x]:
            raise FormViolation(f"differential not injective at {poset.labels[x]}")
        cols = [stack.column(j) for j in range(stack.cols)]
        if not same_lattice(cols, kernel_basis(nxt), tot):
            raise FormViolation(
                f"three-term sequence not exact at {poset.labels[x]}")
    return True


def cellular_chain(form: CellularForm, f: Presheaf) -> ChainComplex:
    """The cellular chain complex of the form with presheaf coefficients."""
    poset = form.poset
    if f.base is not poset:
        raise ValueError("presheaf lives on a different poset")
    top = max(poset.rank) if poset.n else 0
    by_rank: dict[int, list[int]] = {}
    for i in range(poset.n):
        by_rank.setdefault(poset.rank[i], []).append(i)
    sizes = {}
    offs: dict[int, dict[int, int]] = {}
    for r in range(top + 1):
        total = 0
        offs[r] = {}
        for x in sorted(by_rank.get(r, [])):
            offs[r][x] = total
            total += form.piece_ranks[x] * f.ranks[x]
        sizes[r] = total
    ranks = [sizes[r] for r in range(top + 1)]
    bounds = {}
    for r in range(1, top + 1):
        mat = IntMatrix(ranks[r - 1], ranks[r])
        for x in sorted(by_rank.get(r, [])):
            for y in poset.lower[x]:
                block = form.diff.get((y, x))
                if block is None or form.piece_ranks[y] == 0:
                    continue
                piece = kron(block, f.map_index(y, x))
                ro, co = offs[r - 1][y], offs[r][x]
                for a in range(piece.rows):
                    prow = piece.data[a]
                    mrow = mat.data[ro + a]
                    for b in range(piece.cols):
                        if prow[b]:
                            mrow[co + b] = prow[b]
        bounds[r] = mat
    return ChainComplex(ranks, bounds, check=True)


class FormMorphism:
    """The unique graded map between forms associated with (f, t)."""

    def __init__(self, f: PosetMorphism, source: CellularForm,
                 target: CellularForm, components: dict):
        self.f = f
        self.source = source
        self.target = target
        self.components = components

    def component(self, label) -> IntMatrix:
        return self.components[self.f.source.index[label]]

    def check_commutes(self):
        """Phi commutes with the differential on every piece (any rank drop)."""
        src, tgt, f = self.source, self.target, self.f
        poset = f.source
        for x in range(poset.n):
            fx = f.image[x]
            acc: dict[int, IntMatrix] = {}
            for y in poset.lower[x]:
                block = src.diff.get((y, x))
                if block is None:
                    continue
                contrib = self.components[y].mul(block)
                fy = f.image[y]
                if fy in acc:
                    add_into(acc[fy], contrib)
                else:
                    acc[fy] = contrib.copy()
            lhs: dict[int, IntMatrix] = {}
            phi = self.components[x]
            for yq in tgt.poset.lower[fx]:
                block = tgt.diff.get((yq, fx))
                if block is None:
                    continue
                lhs[yq] = block.mul(phi)
            keys = set(acc) | set(lhs)
            for z in keys:
                a = acc.get(z)
                b = lhs.get(z)
                if a is None:
                    if not b.is_zero():
                        raise FormViolation(
                            f"morphism fails to commute at {poset.labels[x]}")
                elif b is None:
                    if not a.is_zero():
                        raise FormViolation(
                            f"morphism fails to commute at {poset.labels[x]}")
                elif a != b:
                    raise FormViolation(
                        f"morphism fails to commute at {poset.labels[x]}")
        return True


def add_into(a: IntMatrix, b: IntMatrix):
    for i in range(a.rows):
        ra, rb = a.data[i], b.data[i]
        for j in range(a.cols):
            ra[j] += rb[j]


def form_morphism(f: PosetMorphism, t: FHom, source: CellularForm,
                  target: CellularForm) -> FormMorphism:
    """Construct the unique morphism of cellular forms for (f, t).

    ``f`` must not increase rank; ``t`` is an f-homomorphism between the
    underlying copresheaves.  Components are built up the ranks by
    solving Phi = d^-1 Phi d, which has a unique integer solution.
    """
    poset = f.source
    tgt_poset = f.target
    for x in range(poset.n):
        if tgt_poset.rank[f.image[x]] > poset.rank[x]:
            raise PreconditionFailed(
                f"map increases rank at {poset.labels[x]}")
    if t.kind != "co":
        raise ValueError("t must be a copresheaf f-homomorphism")
    validate_fhom(t)

    solvers: dict[int, SNFSolver] = {}
    components: dict[int, IntMatrix] = {}
    for x in sorted(range(poset.n), key=lambda i: (poset.rank[i], i)):
        fx = f.image[x]
        r, fr = poset.rank[x], tgt_poset.rank[fx]
        if r == 0:
            components[x] = t.components[x]
            continue
        if fr < r:
            components[x] = IntMatrix(target.piece_ranks[fx],
                                      source.piece_ranks[x])
            continue
        # rank-preserving piece: solve the commuting square column by column
        lowers_q, _, tot_q = target.lower_offsets(fx)
        q_off = {}
        off = 0
        for y in lowers_q:
            q_off[y] = off
            off += target.piece_ranks[y]
        rhs_cols = []
        for col in range(source.piece_ranks[x]):
            rhs = [0] * tot_q
            for y in poset.lower[x]:
                block = source.diff.get((y, x))
                if block is None:
                    continue
                fy = f.image[y]
                if tgt_poset.rank[fy] != poset.rank[y]:
                    continue  # Phi vanishes on the piece at y
                comp = components[y]
                base = q_off[fy]
                for a in range(comp.rows):
                    s = 0
                    for b in range(comp.cols):
                        if block.data[b][col] and comp.data[a][b]:
                            s += comp.data[a][b] * block.data[b][col]
                    rhs[base + a] += s
            rhs_cols.append(rhs)
        if fx not in solvers:
            solvers[fx] = SNFSolver(target.stacked_diff(fx))
        solver = solvers[fx]
        if target.piece_ranks[fx] == 0:
            if any(any(rhs) for rhs in rhs_cols):
                raise FormViolation(
                    f"no room for the image of the piece at {poset.labels[x]}")
            components[x] = IntMatrix(0, source.piece_ranks[x])
            continue
        sol_cols = [solver.solve(rhs) for rhs in rhs_cols]
        components[x] = IntMatrix.from_cols(sol_cols, target.piece_ranks[fx]) \
            if sol_cols else IntMatrix(target.piece_ranks[fx], 0)
    return FormMorphism(f, source, target, components)


def product_form(form_p: CellularForm, form_q: CellularForm) -> CellularForm:
    """Cellular form of the Cartesian product pair, with Koszul signs."""
    p, q = form_p.poset, form_q.poset
    prod = product_poset(p, q)
    g = product_sheaf(form_p.copresheaf, form_q.copresheaf, prod)
    ranks = []
    for lab in prod.labels:
        a, b = lab
        ranks.append(form_p.rank_of(a) * form_q.rank_of(b))
    diff = {}
    for lo, hi in prod.covers:
        (a1, b1) = prod.labels[lo]
        (a2, b2) = prod.labels[hi]
        if a1 != a2:
            block = form_p.diff.get((p.index[a1], p.index[a2]))
            if block is None:
                continue
            mat = kron(block, IntMatrix.identity(form_q.rank_of(b1)))
        else:
            block = form_q.diff.get((q.index[b1], q.index[b2]))
            if block is None:
                continue
            mat = kron(IntMatrix.identity(form_p.rank_of(a1)), block)
            if p.rank_of(a1) % 2:
                for row in mat.data:
                    for j in range(mat.cols):
                        row[j] = -row[j]
        if mat.rows and mat.cols:
            diff[(lo, hi)] = mat
    return CellularForm(prod, g, ranks, diff)
