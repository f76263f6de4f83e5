"""Exact linear algebra over the integers.

Dense matrices of Python ints (arbitrary precision), Smith and Hermite
normal forms, integer kernels, exact solves, and homology of chain
complexes of free abelian groups.  No floating point anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass


class NoIntegerSolution(Exception):
    """A·x = b has no integer solution."""


class NonUnique(Exception):
    """A has a nontrivial kernel, so A·x = b cannot be solved uniquely."""


class InvalidComplex(Exception):
    """Composite of consecutive boundary maps is nonzero."""


class IntMatrix:
    """Dense integer matrix stored as a list of row lists."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data=None):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimension")
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = [[0] * cols for _ in range(rows)]
        else:
            if len(data) != rows or any(len(r) != cols for r in data):
                raise ValueError("data does not match matrix shape")
            self.data = [list(map(int, r)) for r in data]

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        m = cls(n, n)
        for i in range(n):
            m.data[i][i] = 1
        return m

    @classmethod
    def from_rows(cls, rows, cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise ValueError("cols required for a matrix with no rows")
            cols = len(rows[0])
        return cls(len(rows), cols, rows)

    @classmethod
    def from_cols(cls, cols, rows: int | None = None) -> "IntMatrix":
        cols = [list(c) for c in cols]
        if rows is None:
            if not cols:
                raise ValueError("rows required for a matrix with no columns")
            rows = len(cols[0])
        data = [[c[i] for c in cols] for i in range(rows)]
        return cls(rows, len(cols), data)

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, self.data)

    def column(self, j: int) -> list[int]:
        return [row[j] for row in self.data]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows,
                         [[self.data[i][j] for i in range(self.rows)]
                          for j in range(self.cols)])

    def is_zero(self) -> bool:
        return all(all(x == 0 for x in row) for row in self.data)

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        out = IntMatrix(self.rows, other.cols)
        odata = other.data
        for i, arow in enumerate(self.data):
            orow = out.data[i]
            for k, a in enumerate(arow):
                if a:
                    brow = odata[k]
                    for j, b in enumerate(brow):
                        if b:
                            orow[j] += a * b
        return out

    def apply(self, vec: list[int]) -> list[int]:
        """Matrix-vector product A·v."""
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        return [sum(a * v for a, v in zip(row, vec) if a and v) for row in self.data]

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}x{self.cols}, {self.data!r})"


def hstack(blocks: list[IntMatrix]) -> IntMatrix:
    """Concatenate matrices with equal row counts side by side."""
    if not blocks:
        raise ValueError("empty hstack")
    rows = blocks[0].rows
    if any(b.rows != rows for b in blocks):
        raise ValueError("row count mismatch in hstack")
    data = [sum((b.data[i] for b in blocks), []) for i in range(rows)]
    return IntMatrix(rows, sum(b.cols for b in blocks), data)


def vstack(blocks: list[IntMatrix]) -> IntMatrix:
    if not blocks:
        raise ValueError("empty vstack")
    cols = blocks[0].cols
    if any(b.cols != cols for b in blocks):
        raise ValueError("column count mismatch in vstack")
    data = [row for b in blocks for row in b.data]
    return IntMatrix(sum(b.rows for b in blocks), cols, data)


def kron(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """Kronecker product; row-major pairing of bases (a-index major)."""
    out = IntMatrix(a.rows * b.rows, a.cols * b.cols)
    for i, arow in enumerate(a.data):
        for j, x in enumerate(arow):
            if x:
                for p, brow in enumerate(b.data):
                    orow = out.data[i * b.rows + p]
                    off = j * b.cols
                    for q, y in enumerate(brow):
                        if y:
                            orow[off + q] = x * y
    return out


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def smith_normal_form(a: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with U·A·V = D, U and V unimodular.

    D is diagonal with nonnegative entries satisfying d1 | d2 | ... .
    """
    m, n = a.rows, a.cols
    d = [row[:] for row in a.data]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_op(i, k, q):
        # row_i -= q * row_k
        di, dk = d[i], d[k]
        for j in range(n):
            if dk[j]:
                di[j] -= q * dk[j]
        ui, uk = u[i], u[k]
        for j in range(m):
            if uk[j]:
                ui[j] -= q * uk[j]

    def col_op(j, k, q):
        # col_j -= q * col_k
        for row in d:
            if row[k]:
                row[j] -= q * row[k]
        for row in v:
            if row[k]:
                row[j] -= q * row[k]

    def swap_rows(i, k):
        d[i], d[k] = d[k], d[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j, k):
        for row in d:
            row[j], row[k] = row[k], row[j]
        for row in v:
            row[j], row[k] = row[k], row[j]

    t = 0
    while t < m and t < n:
        # pick a nonzero pivot of minimal absolute value in the lower block
        piv = None
        best = 0
        for i in range(t, m):
            row = d[i]
            for j in range(t, n):
                x = row[j]
                if x:
                    if piv is None or abs(x) < best:
                        piv, best = (i, j), abs(x)
                        if best == 1:
                            break
            if best == 1:
                break
        if piv is None:
            break
        if piv != (t, t):
            if piv[0] != t:
                swap_rows(t, piv[0])
            if piv[1] != t:
                swap_cols(t, piv[1])
        while True:
            p = d[t][t]
            dirty = False
            for i in range(t + 1, m):
                x = d[i][t]
                if x:
                    q = x // p
                    row_op(i, t, q)
                    if d[i][t]:
                        swap_rows(i, t)  # remainder is a smaller pivot
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(t + 1, n):
                x = d[t][j]
                if x:
                    q = x // p
                    col_op(j, t, q)
                    if d[t][j]:
                        swap_cols(j, t)
                        dirty = True
                        break
            if dirty:
                continue
            # pivot divides its whole row and column, now zeroed; enforce
            # divisibility against the remaining block
            p = d[t][t]
            witness = None
            for i in range(t + 1, m):
                row = d[i]
                for j in range(t + 1, n):
                    if row[j] % p:
                        witness = i
                        break
                if witness is not None:
                    break
            if witness is None:
                break
            row_op(t, witness, -1)  # fold the offending row into row t
        t += 1

    um = IntMatrix(m, m, u)
    vm = IntMatrix(n, n, v)
    dm = IntMatrix(m, n, d)
    for i in range(min(m, n)):
        if dm.data[i][i] < 0:
            for j in range(m):
                um.data[i][j] = -um.data[i][j]
            dm.data[i][i] = -dm.data[i][i]
    return um, dm, vm


def _sparse_unit_eliminate(rows: dict[int, dict[int, int]]):
    """Eliminate +-1 pivots in place; return how many were eliminated.

    Pivots are chosen Markowitz-style to limit fill-in.  Only row
    operations with integer multipliers of +-1 pivots are used, so the
    invariant factors of the input are 1^k followed by those of the
    residual matrix.
    """
    cols: dict[int, set[int]] = {}
    for i, row in rows.items():
        for j in row:
            cols.setdefault(j, set()).add(i)
    eliminated = 0
    while True:
        piv = None
        best = None
        for i, row in rows.items():
            li = len(row)
            for j, x in row.items():
                if x == 1 or x == -1:
                    cost = (li - 1) * (len(cols[j]) - 1)
                    if best is None or cost < best:
                        piv, best = (i, j), cost
                        if cost == 0:
                            break
            if best == 0:
                break
        if piv is None:
            return eliminated
        pi, pj = piv
        prow = rows.pop(pi)
        pval = prow[pj]
        for j in prow:
            cols[j].discard(pi)
        for i in list(cols[pj]):
            row = rows[i]
            q = row[pj] * pval  # pval in {1,-1}: exact multiplier
            for j, x in prow.items():
                cur = row.get(j, 0) - q * x
                if cur:
                    row[j] = cur
                    cols.setdefault(j, set()).add(i)
                else:
                    if j in row:
                        del row[j]
                        cols[j].discard(i)
            if not row:
                del rows[i]
        del cols[pj]
        eliminated += 1


def elementary_divisors(a: IntMatrix) -> list[int]:
    """Nonzero diagonal of the Smith form, in divisibility order.

    Transform matrices are not tracked, which allows a sparse
    unit-pivot sweep before the dense elimination; this is the fast
    path used for homology ranks of big incidence-like boundaries.
    """
    rows: dict[int, dict[int, int]] = {}
    for i, row in enumerate(a.data):
        r = {j: x for j, x in enumerate(row) if x}
        if r:
            rows[i] = r
    ones = _sparse_unit_eliminate(rows)
    if not rows:
        return [1] * ones
    rindex = sorted(rows)
    cindex = sorted({j for row in rows.values() for j in row})
    cpos = {j: p for p, j in enumerate(cindex)}
    core = IntMatrix(len(rindex), len(cindex))
    for p, i in enumerate(rindex):
        for j, x in rows[i].items():
            core.data[p][cpos[j]] = x
    _, dm, _ = smith_normal_form(core)
    divisors = [dm.data[i][i] for i in range(min(dm.rows, dm.cols)) if dm.data[i][i]]
    return [1] * ones + divisors


def matrix_rank(a: IntMatrix) -> int:
    return len(elementary_divisors(a))


def rank_mod2(a: IntMatrix) -> int:
    """Rank over GF(2), rows packed into Python int bitmasks."""
    masks = []
    for row in a.data:
        b = 0
        for j, x in enumerate(row):
            if x & 1:
                b |= 1 << j
        if b:
            masks.append(b)
    rank = 0
    while masks:
        piv = masks.pop()
        rank += 1
        low = piv & -piv
        masks = [(m ^ piv) if m & low else m for m in masks]
        masks = [m for m in masks if m]
    return rank


def row_hermite(vectors, ncols: int) -> list[list[int]]:
    """Canonical basis (row Hermite form) of the lattice spanned by `vectors`.

    Rows are echelon with positive pivots, entries above each pivot
    reduced into [0, pivot).  Zero rows are dropped.  Two generating
    sets span the same lattice iff their Hermite bases are equal.
    """
    basis: list[list[int]] = []  # kept sorted by pivot column
    pivots: list[int] = []

    def first_nonzero(v):
        for j, x in enumerate(v):
            if x:
                return j
        return None

    for vec in vectors:
        v = list(vec)
        if len(v) != ncols:
            raise ValueError("vector length mismatch")
        while True:
            j = first_nonzero(v)
            if j is None:
                break
            import bisect
            pos = bisect.bisect_left(pivots, j)
            if pos < len(pivots) and pivots[pos] == j:
                row = basis[pos]
                aa, bb = row[j], v[j]
                if bb % aa == 0:
                    q = bb // aa
                    for jj in range(j, ncols):
                        v[jj] -= q * row[jj]
                else:
                    x, y, g = _xgcd(aa, bb)
                    new_row = [x * a + y * b for a, b in zip(row, v)]
                    coef_a, coef_b = aa // g, bb // g
                    v = [coef_a * b - coef_b * a for a, b in zip(row, v)]
                    basis[pos] = new_row
            else:
                if v[j] < 0:
                    v = [-x for x in v]
                basis.insert(pos, v)
                pivots.insert(pos, j)
                break
    # back-reduce entries above pivots
    for idx in range(len(basis) - 1, -1, -1):
        j = pivots[idx]
        p = basis[idx][j]
        for above in range(idx):
            row = basis[above]
            q = row[j] // p
            if q:
                for jj in range(j, ncols):
                    row[jj] -= q * basis[idx][jj]
    return basis


def lattice_contains(hermite_basis: list[list[int]], vec) -> bool:
    """Membership of an integer vector in a lattice given by its Hermite basis."""
    v = list(vec)
    for row in hermite_basis:
        j = next(k for k, x in enumerate(row) if x)
        if v[j]:
            q, r = divmod(v[j], row[j])
            if r:
                return False
            for jj in range(j, len(v)):
                v[jj] -= q * row[jj]
    return not any(v)


def same_lattice(gens_a, gens_b, ncols: int) -> bool:
    return row_hermite(gens_a, ncols) == row_hermite(gens_b, ncols)


def kernel_basis(a: IntMatrix) -> list[list[int]]:
    """Basis of the integer kernel lattice {x : A·x = 0}.

    The kernel of an integer matrix is automatically saturated; the
    basis is returned in canonical Hermite form (echelon, first nonzero
    entry of each vector positive).
    """
    _, dm, vm = smith_normal_form(a)
    r = sum(1 for i in range(min(dm.rows, dm.cols)) if dm.data[i][i])
    vecs = [vm.column(j) for j in range(r, a.cols)]
    return row_hermite(vecs, a.cols)


class SNFSolver:
    """Factor A once and solve A·x = b repeatedly (exact, unique solves)."""

    def __init__(self, a: IntMatrix):
        self.a = a
        self.u, self.d, self.v = smith_normal_form(a)
        self.rank = sum(1 for i in range(min(a.rows, a.cols)) if self.d.data[i][i])

    def solve(self, b: list[int]) -> list[int]:
        a = self.a
        if len(b) != a.rows:
            raise ValueError("rhs length mismatch")
        if self.rank < a.cols:
            raise NonUnique("matrix has nontrivial kernel")
        c = self.u.apply(b)
        y = []
        for i in range(a.cols):
            di = self.d.data[i][i]
            q, r = divmod(c[i], di)
            if r:
                raise NoIntegerSolution(f"no integer solution at row {i}")
            y.append(q)
        for i in range(a.cols, a.rows):
            if c[i]:
                raise NoIntegerSolution("rhs outside the column span")
        return self.v.apply(y)


def solve_unique(a: IntMatrix, b: list[int]) -> list[int]:
    """Solve A·x = b when the solution exists and is unique over Z."""
    return SNFSolver(a).solve(b)


def unimodular_inverse(a: IntMatrix) -> IntMatrix:
    """Inverse of a unimodular square matrix (U·A·V = I gives A^-1 = V·U)."""
    if a.rows != a.cols:
        raise ValueError("not square")
    u, d, v = smith_normal_form(a)
    if any(d.data[i][i] != 1 for i in range(a.rows)):
        raise ValueError("matrix is not unimodular")
    return v.mul(u)


class ChainComplex:
    """Complex of free abelian groups with integer boundary maps.

    `ranks[i]` is the rank in degree i; `boundary[i]` maps degree i to
    degree i-1 (for 1 <= i < len(ranks)).  The composite of consecutive
    boundaries must vanish.
    """

    __slots__ = ("ranks", "boundaries")

    def __init__(self, ranks: list[int], boundaries: dict[int, IntMatrix], check: bool = True):
        self.ranks = list(ranks)
        self.boundaries = dict(boundaries)
        top = len(self.ranks)
        for i in range(1, top):
            d = self.boundaries.get(i)
            if d is None:
                d = IntMatrix(self.ranks[i - 1], self.ranks[i])
                self.boundaries[i] = d
            if d.rows != self.ranks[i - 1] or d.cols != self.ranks[i]:
                raise ValueError(f"boundary {i} has wrong shape")
        for i in list(self.boundaries):
            if not 1 <= i < top:
                raise ValueError(f"boundary index {i} out of range")
        if check:
            self.validate()

    def boundary(self, i: int) -> IntMatrix:
        d = self.boundaries.get(i)
        if d is None:
            lower = self.ranks[i - 1] if 1 <= i <= len(self.ranks) else 0
            upper = self.ranks[i] if 0 <= i < len(self.ranks) else 0
            d = IntMatrix(lower, upper)
        return d

    def validate(self):
        """Check del o del = 0, exploiting sparsity of the boundaries."""
        for i in range(2, len(self.ranks)):
            hi, lo = self.boundaries[i], self.boundaries[i - 1]
            lo_cols = [
                [(r, x) for r, x in enumerate(lo.column(c)) if x]
                for c in range(lo.cols)
            ]
            for j in range(hi.cols):
                acc: dict[int, int] = {}
                for r in range(hi.rows):
                    x = hi.data[r][j]
                    if x:
                        for rr, y in lo_cols[r]:
                            acc[rr] = acc.get(rr, 0) + x * y
                if any(acc.values()):
                    raise InvalidComplex(f"boundary composite nonzero in degree {i}")


@dataclass(frozen=True)
class HomologySummary:
    """Per-degree integral homology: free rank and invariant factors > 1."""

    groups: tuple[tuple[int, tuple[int, ...]], ...]

    def betti(self, n: int) -> int:
        return self.groups[n][0] if 0 <= n < len(self.groups) else 0

    def torsion(self, n: int) -> tuple[int, ...]:
        return self.groups[n][1] if 0 <= n < len(self.groups) else ()

    def betti_vector(self) -> list[int]:
        return [g[0] for g in self.groups]

    def is_free(self) -> bool:
        return all(not g[1] for g in self.groups)

    def __str__(self) -> str:
        parts = []
        for n, (b, tors) in enumerate(self.groups):
            terms = ([f"Z^{b}"] if b > 1 else ["Z"] if b == 1 else [])
            terms += [f"Z/{t}" for t in tors]
            parts.append(f"H_{n}={'+'.join(terms) if terms else '0'}")
        return " ".join(parts)


def homology(complex_: ChainComplex) -> HomologySummary:
    """Integral homology via Smith normal form of the boundaries."""
    top = len(complex_.ranks)
    divisors = {i: elementary_divisors(complex_.boundary(i)) for i in range(1, top + 1)}
    groups = []
    for n in range(top):
        r_out = len(divisors.get(n, []))
        div_in = divisors.get(n + 1, [])
        betti = complex_.ranks[n] - r_out - len(div_in)
        torsion = tuple(t for t in div_in if t > 1)
        groups.append((betti, torsion))
    return HomologySummary(tuple(groups))


def homology_mod2(complex_: ChainComplex) -> list[int]:
    """Dimensions of homology with Z/2 coefficients."""
    top = len(complex_.ranks)
    ranks2 = {i: rank_mod2(complex_.boundary(i)) for i in range(1, top + 1)}
    ranks2[0] = 0
    return [
        complex_.ranks[n] - ranks2.get(n, 0) - ranks2.get(n + 1, 0)
        for n in range(top)
    ]
