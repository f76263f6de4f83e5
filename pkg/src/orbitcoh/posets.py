"""Finite graded posets: construction, Möbius function, joins, products, chains.

Elements carry opaque sortable labels; internally everything is indexed
by position in the sorted label list, and the order relation is
materialized as one bitmask per element, so chain enumeration and
interval tests are cheap.
"""

from __future__ import annotations


class Cyclic(Exception):
    """The cover relation contains a directed cycle."""


class NotGraded(Exception):
    """Some cover jumps rank by a value other than one."""


class NotComparable(Exception):
    """The two elements are not related in the poset."""


class NotSemilattice(Exception):
    """Some pair of elements has no least upper bound."""


class GradedPoset:
    """Finite poset with a rank function, given by labels and cover pairs.

    With ``strict=True`` every cover must raise rank by exactly 1.  A few
    posets in this package (the orbit lattice for n >= 4) carry a rank
    that is only used as bookkeeping; they are built with
    ``strict=False``.
    """

    __slots__ = ("labels", "index", "rank", "covers", "n", "up", "down",
                 "upper", "lower", "graded", "topo", "_mobius", "_join")

    def __init__(self, labels, covers, rank, strict: bool = True):
        self.labels = tuple(sorted(labels))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels")
        self.n = len(self.labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        if callable(rank):
            self.rank = tuple(int(rank(lab)) for lab in self.labels)
        else:
            self.rank = tuple(int(rank[lab]) for lab in self.labels)
        if any(r < 0 for r in self.rank):
            raise ValueError("ranks must be nonnegative")
        cov = sorted({(self.index[lo], self.index[hi]) for lo, hi in covers})
        for lo, hi in cov:
            if lo == hi:
                raise Cyclic(f"self-cover at {self.labels[lo]}")
        self.covers = tuple(cov)
        self.upper = [[] for _ in range(self.n)]
        self.lower = [[] for _ in range(self.n)]
        for lo, hi in self.covers:
            self.upper[lo].append(hi)
            self.lower[hi].append(lo)

        order = self._toposort()
        self.topo = tuple(order)
        self.graded = all(self.rank[hi] == self.rank[lo] + 1 for lo, hi in self.covers)
        if strict and not self.graded:
            bad = next((lo, hi) for lo, hi in self.covers
                       if self.rank[hi] != self.rank[lo] + 1)
            raise NotGraded(
                f"cover {self.labels[bad[0]]} -> {self.labels[bad[1]]} "
                f"jumps rank {self.rank[bad[0]]} -> {self.rank[bad[1]]}")

        down = [1 << i for i in range(self.n)]
        for v in order:
            for lo in self.lower[v]:
                down[v] |= down[lo]
        up = [1 << i for i in range(self.n)]
        for v in reversed(order):
            for hi in self.upper[v]:
                up[v] |= up[hi]
        self.up = up
        self.down = down
        self._mobius: dict[tuple[int, int], int] = {}
        self._join: dict[tuple[int, int], int] = {}

    def _toposort(self) -> list[int]:
        indeg = [len(self.lower[v]) for v in range(self.n)]
        stack = [v for v in range(self.n) if indeg[v] == 0]
        order = []
        while stack:
            v = stack.pop()
            order.append(v)
            for hi in self.upper[v]:
                indeg[hi] -= 1
                if indeg[hi] == 0:
                    stack.append(hi)
        if len(order) != self.n:
            raise Cyclic("cover relation contains a cycle")
        return order

    # -- order queries (index based) --------------------------------------

    def leq(self, i: int, j: int) -> bool:
        return bool((self.up[i] >> j) & 1)

    def lt(self, i: int, j: int) -> bool:
        return i != j and self.leq(i, j)

    def interval_mask(self, i: int, j: int) -> int:
        return self.up[i] & self.down[j]

    def mask_elements(self, mask: int) -> list[int]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(i)
            mask >>= 1
            i += 1
        return out

    def minimum(self) -> int:
        mins = [v for v in range(self.n) if not self.lower[v]]
        full = (1 << self.n) - 1
        for v in mins:
            if self.up[v] == full:
                return v
        raise ValueError("poset has no minimum element")

    # -- label based API ---------------------------------------------------

    def rank_of(self, label) -> int:
        return self.rank[self.index[label]]

    def below(self, label) -> list:
        i = self.index[label]
        return [self.labels[j] for j in self.mask_elements(self.down[i])]

    def join_index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        cached = self._join.get((i, j))
        if cached is not None:
            return cached
        mask = self.up[i] & self.up[j]
        if not mask:
            raise NotSemilattice(
                f"{self.labels[i]} and {self.labels[j]} have no upper bound")
        for z in self.mask_elements(mask):
            if self.up[z] & mask == mask:
                self._join[(i, j)] = z
                return z
        raise NotSemilattice(
            f"{self.labels[i]} and {self.labels[j]} have no least upper bound")

    def require_join_semilattice(self):
        for i in range(self.n):
            for j in range(i, self.n):
                self.join_index(i, j)

    def mobius_index(self, x: int, y: int) -> int:
        if not self.leq(x, y):
            raise NotComparable(f"{self.labels[x]} is not below {self.labels[y]}")
        key = (x, y)
        cached = self._mobius.get(key)
        if cached is not None:
            return cached
        if x == y:
            val = 1
        else:
            val = -sum(self.mobius_index(x, z)
                       for z in self.mask_elements(self.interval_mask(x, y))
                       if z != y)
        self._mobius[key] = val
        return val

    def chain_tuples(self, length: int) -> list[tuple[int, ...]]:
        """All chains i_0 < i_1 < ... < i_length as index tuples."""
        if length < 0:
            return []
        out: list[tuple[int, ...]] = []

        def extend(chain: list[int]):
            if len(chain) == length + 1:
                out.append(tuple(chain))
                return
            last = chain[-1]
            for j in self.mask_elements(self.up[last]):
                if j != last:
                    chain.append(j)
                    extend(chain)
                    chain.pop()

        for i in range(self.n):
            extend([i])
        return out


def build_poset(elements, covers, rank, strict: bool = True) -> GradedPoset:
    """Validated poset from labels, cover pairs and a rank list or map.

    ``rank`` may be a mapping label -> int or a sequence parallel to
    ``elements``.
    """
    if not isinstance(rank, dict) and not callable(rank):
        rank = dict(zip(elements, rank))
    return GradedPoset(elements, covers, rank, strict=strict)


def moebius(poset: GradedPoset, x, y) -> int:
    """Möbius function mu(x, y), by the recursive defining sum."""
    return poset.mobius_index(poset.index[x], poset.index[y])


def join(poset: GradedPoset, x, y):
    """Least upper bound of x and y."""
    return poset.labels[poset.join_index(poset.index[x], poset.index[y])]


def product_poset(p: GradedPoset, q: GradedPoset) -> GradedPoset:
    """Componentwise order on pairs; rank adds."""
    labels = [(a, b) for a in p.labels for b in q.labels]
    rank = {(a, b): p.rank_of(a) + q.rank_of(b) for a, b in labels}
    covers = []
    for lo, hi in p.covers:
        for b in q.labels:
            covers.append(((p.labels[lo], b), (p.labels[hi], b)))
    for lo, hi in q.covers:
        for a in p.labels:
            covers.append(((a, q.labels[lo]), (a, q.labels[hi])))
    return GradedPoset(labels, covers, rank, strict=p.graded and q.graded)


def enumerate_chains(poset: GradedPoset, length: int) -> list[tuple]:
    """All chains p_0 < ... < p_length as label tuples, in index order."""
    return [tuple(poset.labels[i] for i in chain)
            for chain in poset.chain_tuples(length)]


def chain_poset(length: int) -> GradedPoset:
    """The chain x0 < x1 < ... < x_length."""
    labels = [f"x{i}" for i in range(length + 1)]
    covers = [(labels[i], labels[i + 1]) for i in range(length)]
    return GradedPoset(labels, covers, {lab: i for i, lab in enumerate(labels)})


class PosetMorphism:
    """Order-preserving map between posets, stored label to label."""

    __slots__ = ("source", "target", "mapping", "image")

    def __init__(self, source: GradedPoset, target: GradedPoset, mapping: dict):
        self.source = source
        self.target = target
        self.mapping = dict(mapping)
        if set(self.mapping) != set(source.labels):
            raise ValueError("morphism must be defined on every element")
        self.image = [target.index[self.mapping[lab]] for lab in source.labels]
        for lo, hi in source.covers:
            if not target.leq(self.image[lo], self.image[hi]):
                raise ValueError(
                    f"map does not preserve order on cover "
                    f"{source.labels[lo]} -> {source.labels[hi]}")

    def __call__(self, label):
        return self.mapping[label]

    def apply_index(self, i: int) -> int:
        return self.image[i]


def identity_morphism(p: GradedPoset) -> PosetMorphism:
    return PosetMorphism(p, p, {lab: lab for lab in p.labels})


def join_morphism(p: GradedPoset) -> PosetMorphism:
    """The join map P x P -> P as a poset morphism."""
    p.require_join_semilattice()
    prod = product_poset(p, p)
    mapping = {(a, b): p.labels[p.join_index(p.index[a], p.index[b])]
               for a in p.labels for b in p.labels}
    return PosetMorphism(prod, p, mapping)
