"""Brute-force Tor over a poset and the arrangement-cohomology oracle.

The chain K_*(P, G; F) has degree-n basis (p_0 < ... < p_n, b (x) c)
with b a basis vector of G(p_0) and c one of F(p_n); its homology is
Tor^P_*(F, G).  On top of it sit induced maps of f-homomorphisms, the
shuffle cross product, the Goresky-MacPherson sum over an intersection
lattice, and the cup product computed as cross-then-star.  Everything
here exists to verify the closed-form ring elsewhere in the package,
so it favors transparency over speed and refuses oversized posets.
"""

from __future__ import annotations

from functools import lru_cache

from .intlinalg import (
    ChainComplex,
    IntMatrix,
    SNFSolver,
    homology,
    homology_mod2,
    kernel_basis,
    HomologySummary,
)
from .posets import GradedPoset
from .sheaves import Copresheaf, FHom, Presheaf, delta_sheaf


class OracleTooLarge(Exception):
    """The poset exceeds the configured brute-force size limit."""


class NotCycle(Exception):
    """A chain offered as a homology class representative is not closed."""


DEFAULT_ORACLE_LIMIT = 100


class TorComplex:
    """K_*(P, G; F) with a deterministic basis keyed by label chains."""

    def __init__(self, poset: GradedPoset, g: Copresheaf, f: Presheaf,
                 limit: int | None = DEFAULT_ORACLE_LIMIT):
        if limit is not None and poset.n > limit:
            raise OracleTooLarge(
                f"poset has {poset.n} elements, oracle limit is {limit}")
        self.poset = poset
        self.g = g
        self.f = f
        self.chains: list[list[tuple[int, ...]]] = []
        self._enumerate_chains()
        self.keys: list[list[tuple]] = []
        self.position: list[dict] = []
        for n, chs in enumerate(self.chains):
            keys = []
            for c in chs:
                lab = tuple(poset.labels[i] for i in c)
                for gi in range(g.ranks[c[0]]):
                    for fi in range(f.ranks[c[-1]]):
                        keys.append((lab, gi, fi))
            self.keys.append(keys)
            self.position.append({k: i for i, k in enumerate(keys)})
        self.ranks = [len(k) for k in self.keys]
        self._boundaries: dict[int, IntMatrix] = {}
        self._complex: ChainComplex | None = None
        self._tor: dict[int, TorDegree] = {}
        self._homology: HomologySummary | None = None

    # -- basis -------------------------------------------------------------

    def _enumerate_chains(self):
        poset, g, f = self.poset, self.g, self.f
        fmask = 0
        for i in range(poset.n):
            if f.ranks[i]:
                fmask |= 1 << i
        chains: list[list[tuple[int, ...]]] = []

        def record(chain):
            n = len(chain) - 1
            while len(chains) <= n:
                chains.append([])
            chains[n].append(tuple(chain))

        def extend(chain):
            last = chain[-1]
            if f.ranks[last]:
                record(chain)
            higher = poset.up[last] & ~(1 << last)
            for j in poset.mask_elements(higher):
                if poset.up[j] & fmask:  # j can still reach the F-support
                    chain.append(j)
                    extend(chain)
                    chain.pop()

        for start in range(poset.n):
            if g.ranks[start]:
                extend([start])
        for lst in chains:
            lst.sort()
        self.chains = chains

    def top_degree(self) -> int:
        return len(self.ranks) - 1

    def rank(self, n: int) -> int:
        return self.ranks[n] if 0 <= n < len(self.ranks) else 0

    # -- boundary ----------------------------------------------------------

    def boundary(self, n: int) -> IntMatrix:
        """The map from degree n to degree n-1."""
        cached = self._boundaries.get(n)
        if cached is not None:
            return cached
        rows = self.rank(n - 1)
        cols = self.rank(n)
        mat = IntMatrix(rows, cols)
        if rows and cols:
            pos_lo = self.position[n - 1]
            for col, (lab, gi, fi) in enumerate(self.keys[n]):
                c = tuple(self.poset.index[x] for x in lab)
                deg = len(c) - 1
                # face 0: drop p_0, extend the copresheaf part
                ext = self.g.map_index(c[0], c[1])
                sub = lab[1:]
                for gp in range(ext.rows):
                    v = ext.data[gp][gi]
                    if v:
                        mat.data[pos_lo[(sub, gp, fi)]][col] += v
                # interior faces
                for i in range(1, deg):
                    sub = lab[:i] + lab[i + 1:]
                    sign = -1 if i % 2 else 1
                    mat.data[pos_lo[(sub, gi, fi)]][col] += sign
                # face n: drop p_n, restrict the presheaf part
                restr = self.f.map_index(c[-2], c[-1])
                sub = lab[:-1]
                sign = -1 if deg % 2 else 1
                for fp in range(restr.rows):
                    v = restr.data[fp][fi]
                    if v:
                        mat.data[pos_lo[(sub, gi, fp)]][col] += sign * v
        self._boundaries[n] = mat
        return mat

    def chain_complex(self) -> ChainComplex:
        if self._complex is None:
            bounds = {n: self.boundary(n) for n in range(1, len(self.ranks))}
            self._complex = ChainComplex(self.ranks or [0], bounds, check=False)
        return self._complex

    def homology(self) -> HomologySummary:
        if self._homology is None:
            self._homology = homology(self.chain_complex())
        return self._homology

    def homology_mod2(self) -> list[int]:
        return homology_mod2(self.chain_complex())

    # -- vectors and formal chains ------------------------------------------

    def vector(self, formal: dict, n: int) -> list[int]:
        vec = [0] * self.rank(n)
        pos = self.position[n] if n < len(self.position) else {}
        for key, coeff in formal.items():
            if coeff:
                vec[pos[key]] += coeff
        return vec

    def formal(self, vec: list[int], n: int) -> dict:
        return {k: v for k, v in zip(self.keys[n], vec) if v}

    def is_cycle(self, vec: list[int], n: int) -> bool:
        return all(x == 0 for x in self.boundary(n).apply(vec))

    def tor(self, n: int) -> "TorDegree":
        if n not in self._tor:
            self._tor[n] = TorDegree(self, n)
        return self._tor[n]


class TorDegree:
    """Homology of K_* in one degree, with class arithmetic.

    Classes are compared through canonical coordinates: cycle
    coefficients over the (saturated) kernel lattice, normalized modulo
    the boundary image via Smith form.
    """

    def __init__(self, complex_: TorComplex, n: int):
        self.complex = complex_
        self.n = n
        self.kernel = kernel_basis(complex_.boundary(n)) if complex_.rank(n) else []
        self._solver = None
        if self.kernel:
            kmat = IntMatrix.from_cols(self.kernel, complex_.rank(n))
            self._solver = SNFSolver(kmat)
        z = len(self.kernel)
        bnd = complex_.boundary(n + 1)
        img_coords = []
        for j in range(bnd.cols):
            col = bnd.column(j)
            if any(col):
                img_coords.append(self._kernel_coords(col))
        if img_coords:
            y = IntMatrix.from_rows([list(c) for c in zip(*img_coords)], len(img_coords)) \
                if z else IntMatrix(0, len(img_coords))
            from .intlinalg import smith_normal_form
            u, d, _ = smith_normal_form(y)
            self._u = u
            self.invariants = [d.data[i][i] for i in range(min(d.rows, d.cols))
                               if d.data[i][i]]
        else:
            self._u = IntMatrix.identity(z)
            self.invariants = []
        self.betti = z - len(self.invariants)
        self.torsion = tuple(t for t in self.invariants if t > 1)

    def _kernel_coords(self, vec: list[int]) -> list[int]:
        if not self.kernel:
            if any(vec):
                raise NotCycle("nonzero vector in a degree with no cycles")
            return []
        return self._solver.solve(vec)

    def class_coords(self, vec: list[int]) -> tuple[int, ...]:
        """Canonical coordinates of a cycle's homology class."""
        if not self.complex.is_cycle(vec, self.n):
            raise NotCycle(f"representative in degree {self.n} is not closed")
        y = self._kernel_coords(vec)
        w = self._u.apply(y)
        out = []
        for i, x in enumerate(w):
            if i < len(self.invariants):
                out.append(x % self.invariants[i])
            else:
                out.append(x)
        return tuple(out)

    def is_boundary(self, vec: list[int]) -> bool:
        return all(x == 0 for x in self.class_coords(vec))

    def free_generators(self) -> list[list[int]]:
        """Cycle representatives of a basis of the free part."""
        from .intlinalg import unimodular_inverse
        z = len(self.kernel)
        if z == 0:
            return []
        uinv = unimodular_inverse(self._u)
        gens = []
        for j in range(len(self.invariants), z):
            col = uinv.column(j)
            vec = [0] * self.complex.rank(self.n)
            for coeff, basis_vec in zip(col, self.kernel):
                if coeff:
                    for i, x in enumerate(basis_vec):
                        vec[i] += coeff * x
            gens.append(vec)
        return gens


# -- induced maps ------------------------------------------------------------


def induced_chain_map(src: TorComplex, dst: TorComplex, k: FHom, t: FHom):
    """The chain map (k, t)_# of Tor: kills chains with repeated images.

    ``k`` is the presheaf f-homomorphism, ``t`` the copresheaf one, both
    over the same poset morphism.  Returns a function mapping a formal
    chain of ``src`` to a formal chain of ``dst``.
    """
    if k.f.mapping != t.f.mapping:
        raise ValueError("presheaf and copresheaf parts live over different maps")
    fmap = k.f.mapping
    src_poset = src.poset

    def push(formal: dict) -> dict:
        out: dict = {}
        for (lab, gi, fi), coeff in formal.items():
            image = tuple(fmap[x] for x in lab)
            if len(set(image)) != len(image):
                continue
            tmat = t.components[src_poset.index[lab[0]]]
            kmat = k.components[src_poset.index[lab[-1]]]
            for gp in range(tmat.rows):
                tv = tmat.data[gp][gi]
                if not tv:
                    continue
                for fp in range(kmat.rows):
                    kv = kmat.data[fp][fi]
                    if kv:
                        key = (image, gp, fp)
                        out[key] = out.get(key, 0) + coeff * tv * kv
        return {k2: v for k2, v in out.items() if v}

    return push


def induced_homology_matrix(src: TorComplex, dst: TorComplex, k: FHom, t: FHom,
                            n: int) -> IntMatrix:
    """Matrix of Tor^f_n(k, t) on free-part generators (torsion-free use)."""
    push = induced_chain_map(src, dst, k, t)
    src_tor = src.tor(n)
    dst_tor = dst.tor(n)
    cols = []
    for gen in src_tor.free_generators():
        image = dst.vector(push(src.formal(gen, n)), n)
        cols.append(list(dst_tor.class_coords(image)))
    return IntMatrix.from_cols(cols, dst_tor.betti + len(dst_tor.invariants)) \
        if cols else IntMatrix(dst_tor.betti + len(dst_tor.invariants), 0)


# -- shuffles and cross products ---------------------------------------------


@lru_cache(maxsize=None)
def shuffles(p: int, q: int) -> tuple[tuple[tuple[tuple[int, int], ...], int], ...]:
    """All (p, q)-shuffles as lattice paths with their signs.

    A shuffle is the strictly increasing map [p+q] -> [p] x [q]; its
    sign counts inversions between first-coordinate and
    second-coordinate steps.
    """
    out = []

    def rec(a, b, path, sign, plus_seen):
        if a == p and b == q:
            out.append((tuple(path), sign))
            return
        if a < p:
            path.append((a + 1, b))
            rec(a + 1, b, path, sign * (-1 if plus_seen % 2 else 1), plus_seen)
            path.pop()
        if b < q:
            path.append((a, b + 1))
            rec(a, b + 1, path, sign, plus_seen + 1)
            path.pop()

    rec(0, 0, [(0, 0)], 1, 0)
    return tuple(out)


def cross_formal(x: dict, y: dict, g2, f2) -> dict:
    """Shuffle cross product of formal K-chains.

    ``g2`` and ``f2`` are the sheaves of the second factor, needed to
    flatten tensor-basis indices row-major (first factor major).
    """
    out: dict = {}
    for (lab1, g1i, f1i), c1 in x.items():
        p = len(lab1) - 1
        for (lab2, g2i, f2i), c2 in y.items():
            q = len(lab2) - 1
            gflat = g1i * g2.rank_of(lab2[0]) + g2i
            fflat = f1i * f2.rank_of(lab2[-1]) + f2i
            base = c1 * c2
            for path, sign in shuffles(p, q):
                chain = tuple((lab1[a], lab2[b]) for a, b in path)
                key = (chain, gflat, fflat)
                out[key] = out.get(key, 0) + base * sign
    return {k: v for k, v in out.items() if v}


# -- Goresky-MacPherson oracle ------------------------------------------------


class GMOracle:
    """Cohomology of an arrangement complement from its intersection poset.

    ``codim`` maps element labels to complex codimension in complex
    mode, or to real codimension in real mode (coefficients Z/2).  The
    minimum element is the ambient space.
    """

    def __init__(self, lattice: GradedPoset, codim: dict, mode: str = "complex",
                 limit: int | None = DEFAULT_ORACLE_LIMIT):
        if limit is not None and lattice.n > limit:
            raise OracleTooLarge(
                f"intersection poset has {lattice.n} elements, limit {limit}")
        if mode not in ("complex", "real"):
            raise ValueError("mode must be 'complex' or 'real'")
        self.lattice = lattice
        self.codim = dict(codim)
        self.mode = mode
        self.limit = limit
        self.ambient = lattice.labels[lattice.minimum()]
        self.delta_m = delta_sheaf(lattice, [self.ambient], 1, "co")
        self._complexes: dict = {}
        self._star_checked: set = set()

    def complex_at(self, x) -> TorComplex:
        if x not in self._complexes:
            f = delta_sheaf(self.lattice, [x], 1, "pre")
            self._complexes[x] = TorComplex(self.lattice, self.delta_m, f,
                                            limit=self.limit)
        return self._complexes[x]

    def cohomology(self):
        """H^* of the complement, assembled over all lattice elements.

        Complex mode returns {degree: (betti, torsion)}; real mode
        returns {degree: dim over Z/2}.
        """
        if self.mode == "real":
            dims: dict[int, int] = {}
            for x in self.lattice.labels:
                kc = self.complex_at(x)
                for n, d in enumerate(kc.homology_mod2()):
                    if d:
                        deg = self.codim[x] - n
                        dims[deg] = dims.get(deg, 0) + d
            return dict(sorted(dims.items()))
        groups: dict[int, tuple[int, list[int]]] = {}
        for x in self.lattice.labels:
            kc = self.complex_at(x)
            summary = kc.homology()
            for n, (betti, torsion) in enumerate(summary.groups):
                if betti or torsion:
                    deg = 2 * self.codim[x] - n
                    b, tors = groups.get(deg, (0, []))
                    groups[deg] = (b + betti, sorted(tors + list(torsion)))
        return {d: (b, tuple(t)) for d, (b, t) in sorted(groups.items())}

    # -- cup product ---------------------------------------------------------

    def _check_star_minimal(self, x, y, xy):
        """(x, y) must be minimal in the join fiber; forced by codimensions."""
        key = (x, y)
        if key in self._star_checked:
            return
        lat = self.lattice
        xi, yi = lat.index[x], lat.index[y]
        xyi = lat.index[xy]
        for a in lat.mask_elements(lat.down[xi]):
            for b in lat.mask_elements(lat.down[yi]):
                if (a, b) != (xi, yi) and lat.join_index(a, b) == xyi:
                    raise ValueError(
                        "star homomorphism undefined: join fiber has a "
                        f"smaller element below ({x}, {y})")
        self._star_checked.add(key)

    def cup(self, x, nx: int, vx: list[int], y, ny: int, vy: list[int]):
        """Cross-then-star cup product of two Tor classes.

        Inputs are cycle vectors in the complexes at x and y; the result
        is (x v y, degree, cycle vector) with the zero vector when the
        codimension condition fails.
        """
        kx, ky = self.complex_at(x), self.complex_at(y)
        if not kx.is_cycle(vx, nx):
            raise NotCycle("first argument is not a cycle")
        if not ky.is_cycle(vy, ny):
            raise NotCycle("second argument is not a cycle")
        lat = self.lattice
        xy = lat.labels[lat.join_index(lat.index[x], lat.index[y])]
        target = self.complex_at(xy)
        n = nx + ny
        if self.codim[x] + self.codim[y] != self.codim[xy]:
            return xy, n, [0] * target.rank(n)
        self._check_star_minimal(x, y, xy)
        cross = cross_formal(kx.formal(vx, nx), ky.formal(vy, ny),
                             self.delta_m, self.complex_at(y).f)
        out: dict = {}
        for (chain, gi, fi), coeff in cross.items():
            image = []
            ok = True
            prev = None
            for a, b in chain:
                z = lat.labels[lat.join_index(lat.index[a], lat.index[b])]
                if z == prev:
                    ok = False
                    break
                image.append(z)
                prev = z
            if not ok or len(set(image)) != len(image):
                continue
            # star components are the identity at ((M, M)) and ((x, y))
            key = (tuple(image), gi, fi)
            out[key] = out.get(key, 0) + coeff
        vec = target.vector({k: v for k, v in out.items() if v}, n)
        if not target.is_cycle(vec, n):
            raise NotCycle("cup image failed to be a cycle")
        return xy, n, vec

    def class_coords(self, x, n: int, vec: list[int]) -> tuple[int, ...]:
        return self.complex_at(x).tor(n).class_coords(vec)


def gm_cohomology(lattice: GradedPoset, codim: dict, mode: str = "complex",
                  limit: int | None = DEFAULT_ORACLE_LIMIT):
    """Goresky-MacPherson cohomology of the complement; see GMOracle."""
    return GMOracle(lattice, codim, mode=mode, limit=limit).cohomology()
