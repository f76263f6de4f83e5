"""Presheaves and copresheaves of free abelian groups on a poset.

Values are free with explicit ordered bases; maps are integer matrices
stored on covers only, composed on demand along the Hasse diagram.
Functoriality (path independence of composites) is validated at
construction by propagating composites from every source element.
"""

from __future__ import annotations

from .intlinalg import IntMatrix
from .posets import GradedPoset, PosetMorphism


class NotConvex(Exception):
    """The subset is not convex, so the delta sheaf is undefined."""


class NotExtremal(Exception):
    """The chosen element is not minimal/maximal in its fiber."""


class Incompatible(Exception):
    """An f-homomorphism square fails to commute."""


class _SheafBase:
    """Shared storage for presheaves and copresheaves.

    ``maps`` is keyed by cover pairs (lo, hi) of element indices.  For a
    copresheaf the matrix is the extension G(lo) -> G(hi); for a
    presheaf it is the restriction F(hi) -> F(lo).
    """

    __slots__ = ("base", "ranks", "maps", "_composed")

    kind = "sheaf"

    def __init__(self, base: GradedPoset, ranks, maps, check: bool = True):
        self.base = base
        if callable(ranks):
            self.ranks = tuple(int(ranks(lab)) for lab in base.labels)
        elif isinstance(ranks, dict):
            self.ranks = tuple(int(ranks[lab]) for lab in base.labels)
        else:
            self.ranks = tuple(int(r) for r in ranks)
        if len(self.ranks) != base.n or any(r < 0 for r in self.ranks):
            raise ValueError("bad rank vector")
        self.maps = {}
        for lo, hi in base.covers:
            m = maps[(lo, hi)] if not callable(maps) else maps(lo, hi)
            nrows, ncols = self._shape(lo, hi)
            if m.rows != nrows or m.cols != ncols:
                raise ValueError(
                    f"map on cover {base.labels[lo]} -> {base.labels[hi]} "
                    f"has shape {m.rows}x{m.cols}, expected {nrows}x{ncols}")
            self.maps[(lo, hi)] = m
        self._composed: dict[tuple[int, int], IntMatrix] = {}
        if check:
            self._check_functorial()

    def rank_at(self, i: int) -> int:
        return self.ranks[i]

    def rank_of(self, label) -> int:
        return self.ranks[self.base.index[label]]

    def _cover_source_target(self, lo: int, hi: int) -> tuple[int, int]:
        raise NotImplementedError

    def _shape(self, lo: int, hi: int) -> tuple[int, int]:
        src, dst = self._cover_source_target(lo, hi)
        return self.ranks[dst], self.ranks[src]

    def _check_functorial(self):
        base = self.base
        for x in range(base.n):
            comp: dict[int, IntMatrix] = {x: IntMatrix.identity(self.ranks[x])}
            # walk upward from x in topological order
            for y in base.topo:
                if y == x or not base.leq(x, y):
                    continue
                for lo in base.lower[y]:
                    if lo not in comp:
                        continue
                    step = self._step_matrix(lo, y, comp[lo])
                    if y in comp:
                        if comp[y] != step:
                            raise ValueError(
                                f"functoriality fails between {base.labels[x]} "
                                f"and {base.labels[y]}")
                    else:
                        comp[y] = step
        # cache nothing here; composites are rebuilt lazily by map()

    def _step_matrix(self, lo: int, hi: int, acc: IntMatrix) -> IntMatrix:
        raise NotImplementedError

    def map(self, x, y) -> IntMatrix:
        """Composed structure map for a comparable pair x <= y (labels)."""
        i, j = self.base.index[x], self.base.index[y]
        return self.map_index(i, j)

    def map_index(self, i: int, j: int) -> IntMatrix:
        if not self.base.leq(i, j):
            raise ValueError("elements are not comparable")
        key = (i, j)
        cached = self._composed.get(key)
        if cached is not None:
            return cached
        if i == j:
            out = IntMatrix.identity(self.ranks[i])
        else:
            # follow one saturated chain; legal by validated functoriality
            for lo in self.base.lower[j]:
                if self.base.leq(i, lo):
                    out = self._step_matrix(lo, j, self.map_index(i, lo))
                    break
            else:  # pragma: no cover - unreachable on validated posets
                raise ValueError("no path found")
        self._composed[key] = out
        return out


class Copresheaf(_SheafBase):
    """Covariant assignment; extension matrices go up covers."""

    kind = "co"

    def _cover_source_target(self, lo, hi):
        return lo, hi

    def _step_matrix(self, lo, hi, acc):
        return self.maps[(lo, hi)].mul(acc)

    def extension(self, x, y) -> IntMatrix:
        return self.map(x, y)


class Presheaf(_SheafBase):
    """Contravariant assignment; restriction matrices go down covers."""

    kind = "pre"

    def _cover_source_target(self, lo, hi):
        return hi, lo

    def _step_matrix(self, lo, hi, acc):
        # acc: F(lo) -> F(target of walk); extend to F(hi) by precomposing
        return acc.mul(self.maps[(lo, hi)])

    def restriction(self, x, y) -> IntMatrix:
        """Restriction F(y) -> F(x) for x <= y."""
        i, j = self.base.index[x], self.base.index[y]
        if not self.base.leq(i, j):
            raise ValueError("elements are not comparable")
        return self._restrict_index(i, j)

    def _restrict_index(self, i: int, j: int) -> IntMatrix:
        key = (j, i)
        cached = self._composed.get(key)
        if cached is not None:
            return cached
        if i == j:
            out = IntMatrix.identity(self.ranks[i])
        else:
            for lo in self.base.lower[j]:
                if self.base.leq(i, lo):
                    out = self._restrict_index(i, lo).mul(self.maps[(lo, j)])
                    break
            else:  # pragma: no cover
                raise ValueError("no path found")
        self._composed[key] = out
        return out

    def map_index(self, i: int, j: int) -> IntMatrix:
        # orient presheaf.map(x, y) as the restriction F(y) -> F(x)
        if not self.base.leq(i, j):
            raise ValueError("elements are not comparable")
        return self._restrict_index(i, j)


def delta_sheaf(base: GradedPoset, subset, rank: int, kind: str,
                check_convex: bool = True):
    """Sheaf with constant value Z^rank on a convex subset, zero outside."""
    idx = {base.index[lab] for lab in subset}
    if check_convex:
        for i in idx:
            for j in idx:
                if base.leq(i, j):
                    between = base.interval_mask(i, j)
                    for z in base.mask_elements(between):
                        if z not in idx:
                            raise NotConvex(
                                f"{base.labels[z]} lies between two subset "
                                f"elements but is missing")
    ranks = [rank if i in idx else 0 for i in range(base.n)]
    maps = {}
    for lo, hi in base.covers:
        if lo in idx and hi in idx:
            maps[(lo, hi)] = IntMatrix.identity(rank)
        else:
            if kind == "co":
                maps[(lo, hi)] = IntMatrix(ranks[hi], ranks[lo])
            else:
                maps[(lo, hi)] = IntMatrix(ranks[lo], ranks[hi])
    cls = Copresheaf if kind == "co" else Presheaf
    return cls(base, ranks, maps, check=False)


def constant_sheaf(base: GradedPoset, rank: int, kind: str):
    return delta_sheaf(base, base.labels, rank, kind, check_convex=False)


def pullback(f: PosetMorphism, sheaf):
    """f^*S, the composition of S with f; value at x is S(f(x))."""
    base = f.source
    ranks = [sheaf.ranks[f.image[i]] for i in range(base.n)]
    maps = {}
    for lo, hi in base.covers:
        maps[(lo, hi)] = sheaf.map_index(f.image[lo], f.image[hi])
    cls = Copresheaf if sheaf.kind == "co" else Presheaf
    return cls(base, ranks, maps, check=False)


def product_sheaf(s1, s2, prod_base: GradedPoset):
    """Cartesian product sheaf on a product poset; values are tensor products.

    Basis pairing is row-major with the first factor major, matching
    :func:`orbitcoh.intlinalg.kron`.
    """
    if s1.kind != s2.kind:
        raise ValueError("mixed sheaf kinds")
    p, q = s1.base, s2.base
    ranks = {}
    for a in p.labels:
        for b in q.labels:
            ranks[(a, b)] = s1.rank_of(a) * s2.rank_of(b)
    from .intlinalg import kron
    maps = {}
    for lo, hi in prod_base.covers:
        (a1, b1) = prod_base.labels[lo]
        (a2, b2) = prod_base.labels[hi]
        maps[(lo, hi)] = kron(s1.map(a1, a2), s2.map(b1, b2))
    cls = Copresheaf if s1.kind == "co" else Presheaf
    return cls(prod_base, [ranks[lab] for lab in prod_base.labels], maps, check=False)


class FHom:
    """Collection of maps F(x) -> E(f(x)) compatible with the structure maps."""

    __slots__ = ("f", "source", "target", "components", "kind")

    def __init__(self, f: PosetMorphism, source, target, components,
                 check: bool = True):
        if source.kind != target.kind:
            raise ValueError("mixed sheaf kinds")
        self.kind = source.kind
        self.f = f
        self.source = source
        self.target = target
        self.components = {}
        for i in range(f.source.n):
            m = components[i] if not callable(components) else components(i)
            want_rows = target.ranks[f.image[i]]
            want_cols = source.ranks[i]
            if m.rows != want_rows or m.cols != want_cols:
                raise ValueError(f"component at {f.source.labels[i]} has wrong shape")
            self.components[i] = m
        if check:
            validate_fhom(self)

    def component(self, label) -> IntMatrix:
        return self.components[self.f.source.index[label]]


def validate_fhom(k: FHom):
    """Check every cover square commutes; raise Incompatible otherwise."""
    f = k.f
    src_poset = f.source
    for lo, hi in src_poset.covers:
        a, b = f.image[lo], f.image[hi]
        if k.kind == "co":
            # t_hi . ext_source = ext_target . t_lo
            left = k.components[hi].mul(k.source.maps[(lo, hi)])
            right = k.target.map_index(a, b).mul(k.components[lo])
        else:
            # k_lo . restr_source = restr_target . k_hi
            left = k.components[lo].mul(k.source.maps[(lo, hi)])
            right = k.target.map_index(a, b).mul(k.components[hi])
        if left != right:
            raise Incompatible(
                f"square at cover {src_poset.labels[lo]} -> "
                f"{src_poset.labels[hi]} does not commute")


def canonical_fhom(f: PosetMorphism, sheaf) -> FHom:
    """The identity-component f-homomorphism f^*S -> S."""
    pulled = pullback(f, sheaf)
    comps = {i: IntMatrix.identity(pulled.ranks[i]) for i in range(f.source.n)}
    return FHom(f, pulled, sheaf, comps, check=False)


def star_fhom(f: PosetMorphism, y, x, kind: str) -> FHom:
    """The special f-homomorphism on one-point delta sheaves.

    For presheaves x must be minimal in the fiber f^-1(y); for
    copresheaves x must be maximal there.  The component is the identity
    at x and zero elsewhere.
    """
    src_poset, dst_poset = f.source, f.target
    xi, yi = src_poset.index[x], dst_poset.index[y]
    if f.image[xi] != yi:
        raise NotExtremal(f"{x} does not map to {y}")
    fiber = [i for i in range(src_poset.n) if f.image[i] == yi]
    if kind == "pre":
        extremal = all(not src_poset.lt(i, xi) for i in fiber)
    else:
        extremal = all(not src_poset.lt(xi, i) for i in fiber)
    if not extremal:
        which = "minimal" if kind == "pre" else "maximal"
        raise NotExtremal(f"{x} is not {which} in the fiber over {y}")
    src = delta_sheaf(src_poset, [x], 1, kind)
    dst = delta_sheaf(dst_poset, [y], 1, kind)
    comps = {}
    for i in range(src_poset.n):
        rows = dst.ranks[f.image[i]]
        cols = src.ranks[i]
        m = IntMatrix(rows, cols)
        if i == xi:
            m.data[0][0] = 1
        comps[i] = m
    return FHom(f, src, dst, comps, check=True)
