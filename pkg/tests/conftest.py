"""Shared helpers: an independent partition-lattice builder used as an oracle.

Built directly from set partitions and refinement, with no imports from
the package's lattice code, so cross-checks against it are meaningful.
"""

from orbitcoh.posets import GradedPoset


def set_partitions(n: int):
    """All partitions of {1..n} as sorted tuples of sorted tuples."""
    if n == 0:
        yield ()
        return
    for rest in set_partitions(n - 1):
        yield tuple(sorted(rest + ((n,),)))
        for i, block in enumerate(rest):
            merged = rest[:i] + (tuple(sorted(block + (n,))),) + rest[i + 1:]
            yield tuple(sorted(merged))


def refines(p, q) -> bool:
    """True when every block of p is contained in a block of q."""
    lookup = {}
    for block in q:
        for v in block:
            lookup[v] = block
    return all(set(b) <= set(lookup[b[0]]) for b in p)


def partition_lattice(n: int) -> GradedPoset:
    """The partition lattice Pi_n ordered by refinement."""
    parts = sorted(set(set_partitions(n)))
    rank = {p: n - len(p) for p in parts}
    covers = []
    for p in parts:
        for q in parts:
            if rank[q] == rank[p] + 1 and refines(p, q):
                covers.append((p, q))
    return GradedPoset(parts, covers, rank)


def bottom(n: int):
    return tuple((i,) for i in range(1, n + 1))


def top(n: int):
    return (tuple(range(1, n + 1)),)
