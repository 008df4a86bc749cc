"""Perversities, allowability and intersection homology of filtered complexes.

An ``i``-simplex ``s`` is allowable for ``p`` when, for every codimension
``k`` with ``s`` meeting ``X_{n-k}``,

    dim(s ∩ X_{n-k}) <= i - k + p(k).

Skeleta are full, so ``s ∩ X_{n-k}`` is the face spanned by the vertices of
``s`` lying in ``X_{n-k}``.  The intersection chains ``IC_i`` are the chains
on allowable ``i``-simplices whose boundary is carried by allowable
``(i-1)``-simplices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence

from .algebra import (
    AlgebraError,
    ChainComplex,
    HomologyResult,
    Subquotient,
    homology,
    integer_subquotient_homology,
    lattice_homology,
    simplex_image,
    simplicial_chain_complex,
    simplicial_chain_map,
)
from .linalg import Echelon, SparseVec, _axpy, _xgcd, apply_sparse, integer_kernel, kernel_and_image, to_field
from .rings import Q, Ring, Z
from .simplicial import (
    FilteredComplex,
    Simplex,
    SimplicialComplex,
    Subcomplex,
    connected_components,
    cone,
    faces,
    filtered_from_vertex_sets,
    prism_decomposition,
    product_with_interval,
)


class PerversityError(ValueError):
    pass


# -- perversities ----------------------------------------------------------------------

@dataclass(frozen=True)
class Perversity:
    """Values ``p(0..n)``."""

    values: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def __call__(self, k: int) -> int:
        return self.values[k]

    def __le__(self, other: "Perversity") -> bool:
        return self.n == other.n and all(a <= b for a, b in zip(self.values, other.values))

    def __str__(self) -> str:
        return ",".join(map(str, self.values))

    def extend(self, n: int) -> "Perversity":
        """Same perversity read in a larger formal dimension (growth by zero steps)."""
        if n < self.n:
            return Perversity(self.values[: n + 1])
        return Perversity(self.values + (self.values[-1],) * (n - self.n))


def validate_perversity(values: Sequence[int]) -> Perversity:
    """Check ``p(0)=p(1)=p(2)=0`` and ``p(k) <= p(k+1) <= p(k)+1``."""
    vals = tuple(int(v) for v in values)
    if not vals:
        raise PerversityError("empty perversity")
    for k in range(min(3, len(vals))):
        if vals[k] != 0:
            raise PerversityError(f"p({k}) must be 0, got {vals[k]} (first failing k = {k})")
    for k in range(len(vals) - 1):
        if not vals[k] <= vals[k + 1] <= vals[k] + 1:
            raise PerversityError(
                f"growth condition fails between k = {k} and k = {k + 1}: {vals[k]} -> {vals[k + 1]} (first failing k = {k + 1})"
            )
    return Perversity(vals)


ALIASES = ("zero", "lower-middle", "upper-middle", "top")


def named_perversity(name: str, n: int) -> Perversity:
    if name in ("zero", "0"):
        vals = [0] * (n + 1)
    elif name in ("lower-middle", "m"):
        vals = [0, 0] + [(k - 2) // 2 for k in range(2, n + 1)]
    elif name in ("upper-middle", "n"):
        vals = [0, 0] + [(k - 1) // 2 for k in range(2, n + 1)]
    elif name in ("top", "t"):
        vals = [0, 0] + [k - 2 for k in range(2, n + 1)]
    else:
        raise PerversityError(f"unknown perversity name {name!r}")
    return validate_perversity(vals[: n + 1])


def parse_perversity(text: str, n: int) -> Perversity:
    """Comma list ``p(0),...,p(n)`` or a named alias expanded against ``n``."""
    t = text.strip()
    if t in ALIASES or t in ("m", "n", "t"):
        return named_perversity(t, n)
    try:
        vals = [int(x) for x in t.split(",") if x.strip()]
    except ValueError:
        raise PerversityError(f"cannot parse perversity {text!r}") from None
    if len(vals) != n + 1:
        raise PerversityError(f"perversity {text!r} has {len(vals)} values; need p(0..{n}), i.e. {n + 1}")
    return validate_perversity(vals)


def all_perversities(n: int) -> list[Perversity]:
    """Every valid perversity of formal dimension ``n``, in lexicographic order."""
    out = []
    steps = max(0, n - 2)
    for incs in iproduct((0, 1), repeat=steps):
        vals = [0] * min(n + 1, 3)
        for inc in incs:
            vals.append(vals[-1] + inc)
        out.append(Perversity(tuple(vals)))
    return sorted(out, key=lambda p: p.values)


# -- allowability -------------------------------------------------------------------------

def _skeleton_counts(F: FilteredComplex, s: Simplex) -> tuple[int, ...]:
    """``counts[j]`` = number of vertices of ``s`` in ``X_j``."""
    lv = F.vertex_level
    counts = [0] * (F.n + 1)
    for v in s:
        counts[lv[v]] += 1
    acc = 0
    for j in range(F.n + 1):
        acc += counts[j]
        counts[j] = acc
    return tuple(counts)


def _allowable_from_counts(i: int, counts: Sequence[int], p: Perversity, n: int) -> bool:
    for k in range(1, n + 1):
        c = counts[n - k]
        if c and c - 1 > i - k + p(k):
            return False
    return True


def _check_dims(F: FilteredComplex, p: Perversity) -> None:
    if p.n != F.n:
        raise PerversityError(f"perversity has formal dimension {p.n}, complex has {F.n}")


def allowable(s: Simplex, p: Perversity, F: FilteredComplex) -> bool:
    if s not in F.complex:
        raise PerversityError(f"{s} is not a simplex of the complex")
    _check_dims(F, p)
    return _allowable_from_counts(len(s) - 1, _skeleton_counts(F, s), p, F.n)


class AllowabilityTable:
    """Raw allowability of every simplex, for one or more perversities."""

    def __init__(self, F: FilteredComplex, perversities: Iterable[Perversity]):
        self.F = F
        self.perversities = list(perversities)
        for p in self.perversities:
            _check_dims(F, p)
        cache: dict = {}
        self.table: dict[Simplex, tuple[bool, ...]] = {}
        for s in F.complex:
            key = (len(s) - 1, _skeleton_counts(F, s))
            row = cache.get(key)
            if row is None:
                row = tuple(_allowable_from_counts(key[0], key[1], p, F.n) for p in self.perversities)
                cache[key] = row
            self.table[s] = row

    def __getitem__(self, item) -> bool:
        s, p = item
        return self.table[s][self.perversities.index(p)]

    def allowable_simplices(self, p: Perversity, d: int) -> list[Simplex]:
        j = self.perversities.index(p)
        return [s for s in self.F.complex.simplices_of_dim(d) if self.table[s][j]]


def allowable_mask(F: FilteredComplex, p: Perversity, labels: Sequence[Sequence[Simplex]]) -> list[list[bool]]:
    _check_dims(F, p)
    cache: dict = {}
    out = []
    for d, level in enumerate(labels):
        row = []
        for lab in level:
            s = lab[0] if isinstance(lab[0], tuple) else lab
            key = _skeleton_counts(F, s)
            a = cache.get((d, key))
            if a is None:
                a = _allowable_from_counts(d, key, p, F.n)
                cache[(d, key)] = a
            row.append(a)
        out.append(row)
    return out


# -- intersection chains -------------------------------------------------------------------

@dataclass
class IntersectionComplex:
    """``IC_*`` as a subcomplex of the simplicial chains ``ambient``.

    ``basis[d]`` spans ``IC_d`` in ambient coordinates.  Over a field the basis
    is in echelon form with pivots on distinct allowable simplices; over the
    integers it is a basis of a saturated lattice.
    """

    F: FilteredComplex
    p: Perversity
    ring: Ring
    ambient: ChainComplex
    allowable: list[list[bool]]
    basis: list[list[SparseVec]]

    def ranks(self) -> list[int]:
        return [len(b) for b in self.basis]

    def homology(self) -> HomologyResult:
        if self.ring.kind == "Z":
            return lattice_homology(self.ambient, self.basis)
        return Subquotient(self.ambient, self.basis, None, self.ring, check=False).result()

    def subquotient(self, U=None, ring: Ring | None = None) -> Subquotient:
        return Subquotient(self.ambient, self.basis, U, ring or self.ring, check=False)

    def contains(self, d: int, v: SparseVec) -> bool:
        """Whether an ambient chain lies in ``IC_d``."""
        if any(not self.allowable[d][j] for j in v):
            return False
        if d == 0:
            return True
        bd = self.ambient.apply(d, v, Z if self.ring.kind == "Z" else self.ring)
        return all(self.allowable[d - 1][j] for j in bd)

    def boundary_stable(self) -> bool:
        """The projection of ``∂ IC_d`` onto non-allowable simplices vanishes."""
        return all(self.contains(d, v) for d in range(len(self.basis)) for v in self.basis[d])

    def as_chain_complex(self) -> ChainComplex:
        """``IC_*`` as a standalone chain complex in the coordinates of ``basis``."""
        labels, boundary = [], []
        for d, vecs in enumerate(self.basis):
            labels.append(list(range(len(vecs))))
            if d == 0:
                boundary.append([{} for _ in vecs])
                continue
            prev = self.basis[d - 1]
            if self.ring.kind == "Z":
                solve_basis = _integer_solver(prev)
            else:
                solve_basis = _field_solver(prev, self.ring)
            cols = []
            for v in vecs:
                bv = self.ambient.apply(d, v, Z if self.ring.kind == "Z" else self.ring)
                cols.append(solve_basis(bv))
            boundary.append(cols)
        return ChainComplex(labels, boundary, self.ring, check=False)


def _field_solver(vecs: list[SparseVec], ring: Ring):
    e = Echelon(ring, track=True)
    for j, v in enumerate(vecs):
        if e.add(v, {j: ring.one}) is None:
            raise AlgebraError("basis vectors are dependent")

    def solve(x: SparseVec) -> SparseVec:
        rem, combo = e.reduce(x, {})
        if rem:
            raise AlgebraError("vector is not in the span")
        return {j: ring.norm(-c) for j, c in combo.items() if c}

    return solve


def _integer_solver(vecs: list[SparseVec]):
    """Integer coordinates on a lattice basis via an echelon form of the basis with tracked combinations."""
    # Unimodular column echelon of the basis, tracking combinations of the original vectors.
    axpy = _axpy(Z)
    pivots: dict[int, tuple[SparseVec, SparseVec]] = {}
    for j, v0 in enumerate(vecs):
        v, c = dict(v0), {j: 1}
        while v:
            low = max(v)
            if low not in pivots:
                if v[low] < 0:
                    v = {k: -a for k, a in v.items()}
                    c = {k: -a for k, a in c.items()}
                pivots[low] = (v, c)
                break
            b, cb = pivots[low]
            a, piv = v[low], b[low]
            if a % piv == 0:
                q = a // piv
                axpy(v, -q, b)
                axpy(c, -q, cb)
                continue
            g, x, y = _xgcd(piv, a)
            nb, nc = {}, {}
            axpy(nb, x, b); axpy(nb, y, v)
            axpy(nc, x, cb); axpy(nc, y, c)
            rv, rc = {}, {}
            axpy(rv, a // g, b); axpy(rv, -(piv // g), v)
            axpy(rc, a // g, cb); axpy(rc, -(piv // g), c)
            pivots[low] = (nb, nc)
            v, c = rv, rc
        else:
            raise AlgebraError("basis vectors are dependent")

    def solve(x: SparseVec) -> SparseVec:
        x = dict(x)
        out: SparseVec = {}
        while x:
            low = max(x)
            if low not in pivots or x[low] % pivots[low][0][low]:
                raise AlgebraError("vector is not in the lattice")
            b, cb = pivots[low]
            q = x[low] // b[low]
            axpy(x, -q, b)
            axpy(out, q, cb)
        return out

    return solve


def intersection_chain_complex(F: FilteredComplex, p: Perversity, ring: Ring = Z, ambient: ChainComplex | None = None) -> IntersectionComplex:
    """Intersection chains of ``F`` as a subcomplex of the simplicial chains.

    ``ambient`` may supply the simplicial chain complex with a custom
    ordering of simplices (its labels must be the simplices of ``F``).
    """
    _check_dims(F, p)
    C = ambient if ambient is not None else simplicial_chain_complex(F.complex, ring)
    mask = allowable_mask(F, p, C.labels)
    one = ring.one
    basis = []
    for d in range(C.top + 1):
        allowed = mask[d]
        vecs: list[SparseVec] = []
        if d == 0:
            vecs = [{j: one} for j, a in enumerate(allowed) if a]
            basis.append(vecs)
            continue
        below = mask[d - 1]
        cols = C.cols(d)
        bad_idx, bad_cols = [], []
        good = []
        for j, a in enumerate(allowed):
            if not a:
                continue
            proj = {r: c for r, c in cols[j].items() if not below[r]}
            if proj:
                bad_idx.append(j)
                bad_cols.append(proj)
            else:
                good.append(j)
        if ring.kind == "Z":
            kernel = integer_kernel(bad_cols)
        else:
            kernel, _ = kernel_and_image([to_field(c, ring) for c in bad_cols], ring)
        vecs = [{j: one} for j in good]
        for combo in kernel:
            vecs.append({bad_idx[k]: c for k, c in combo.items()})
        vecs.sort(key=lambda v: max(v))
        basis.append(vecs)
    return IntersectionComplex(F, p, ring, C, mask, basis)


def IH(F: FilteredComplex, p: Perversity, ring: Ring = Z) -> HomologyResult:
    return intersection_chain_complex(F, p, ring).homology()


def IH_oracle(F: FilteredComplex, p: Perversity, ring: Ring = Z) -> HomologyResult:
    """Brute force: full normal form of the standalone ``IC_*`` complex."""
    return homology(intersection_chain_complex(F, p, ring).as_chain_complex())


def _embed(sub: IntersectionComplex, big: ChainComplex) -> list[list[SparseVec]]:
    index = [{s: i for i, s in enumerate(l)} for l in big.labels]
    out = []
    for d, vecs in enumerate(sub.basis):
        labels = sub.ambient.labels[d]
        out.append([{index[d][labels[j]]: c for j, c in v.items()} for v in vecs])
    while len(out) < big.top + 1:
        out.append([])
    return out


def relative_IH(F: FilteredComplex, A: Subcomplex | FilteredComplex, p: Perversity, ring: Ring = Z) -> HomologyResult:
    """``H(IC(F) / IC(A))`` for a subcomplex ``A`` with the inherited filtration."""
    FA = A if isinstance(A, FilteredComplex) else F.restrict(A)
    if FA.n != F.n:
        raise PerversityError("subcomplex has a different formal dimension")
    for v, lv in FA.vertex_level.items():
        if F.vertex_level.get(v) != lv:
            raise PerversityError("subcomplex strata are not those of the ambient complex")
    for s in FA.complex:
        if s not in F.complex:
            raise PerversityError(f"{s} is not a simplex of the ambient complex")
    icF = intersection_chain_complex(F, p, ring)
    if not len(FA.complex):
        return icF.homology()
    icA = intersection_chain_complex(FA, p, ring)
    U = _embed(icA, icF.ambient)
    if ring.kind == "Z":
        return integer_subquotient_homology(icF.ambient, icF.basis, U)
    return icF.subquotient(U).result()


# -- induced maps ---------------------------------------------------------------------

def check_stratum_preserving(f: Mapping[int, int], F: FilteredComplex, G: FilteredComplex) -> None:
    """Raise unless ``f`` is simplicial and sends each stratum into the stratum of equal codimension."""
    for s in F.complex:
        img = tuple(sorted({f[v] for v in s}))
        if img not in G.complex:
            raise PerversityError(f"image of {s} is not a simplex")
        if F.n - F.simplex_level(s) != G.n - G.simplex_level(img):
            raise PerversityError(f"{s} lies in a stratum of codimension {F.n - F.simplex_level(s)} but its image does not")


@dataclass
class InducedIHMap:
    matrices: list[list[list]]
    source: HomologyResult
    target: HomologyResult
    ring: Ring


def induced_IH_map(f: Mapping[int, int], F: FilteredComplex, G: FilteredComplex, p: Perversity, ring: Ring = Q, q: Perversity | None = None) -> InducedIHMap:
    """Matrices of ``f_*`` on intersection homology in canonical bases.

    ``q`` is the perversity used on ``G`` (default: ``p`` read in ``G``'s
    formal dimension).  Over the integers the matrices are computed over the
    rationals (free parts).
    """
    check_stratum_preserving(f, F, G)
    field = Q if ring.kind == "Z" else ring
    q = q or p.extend(G.n)
    icF = intersection_chain_complex(F, p, field)
    icG = intersection_chain_complex(G, q, field)
    chain = simplicial_chain_map(f, icF.ambient, icG.ambient)
    for d, vecs in enumerate(icF.basis):
        for v in vecs:
            img = chain.apply(d, v, field)
            if not icG.contains(d, img):
                raise PerversityError(f"image of an intersection {d}-chain is not allowable")
    src, tgt = icF.subquotient(), icG.subquotient()
    mats = []
    for d in range(icF.ambient.top + 1):
        cols = chain.columns[d]
        mats.append(src.map_to(tgt, d, lambda v, cols=cols: apply_sparse([to_field(c, field) for c in cols], v, field)))
    return InducedIHMap(mats, src.result(), tgt.result(), field)


# -- cone formula ------------------------------------------------------------------------

@dataclass
class ConeFormulaReport:
    ok: bool
    perversity: Perversity
    threshold: int
    cone: HomologyResult
    link: HomologyResult
    predicted: HomologyResult
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "perversity": list(self.perversity.values),
            "threshold": self.threshold,
            "cone": self.cone.to_json(),
            "link": self.link.to_json(),
            "predicted": self.predicted.to_json(),
            "notes": list(self.notes),
        }


def cone_formula_check(L: FilteredComplex, p: Perversity, ring: Ring = Z) -> ConeFormulaReport:
    """Compare ``IH(c̄L)`` with the truncation of ``IH(L)``.

    ``p`` is a perversity of the cone's formal dimension ``n = L.n + 1``.
    Both sides are computed from their own intersection chain complexes.
    """
    n = L.n + 1
    if p.n != n:
        raise PerversityError(f"need a perversity of formal dimension {n}")
    cL = cone(L)
    lhs = IH(cL, p, ring)
    rhs = IH(L, p.extend(L.n), ring)
    t = n - 1 - p(n)
    betti, torsion = [], []
    for i in range(max(len(rhs.betti), n + 1)):
        if i < t:
            betti.append(rhs.betti_at(i))
            torsion.append(list(rhs.torsion_at(i)))
        elif i == 0 and p(n) >= n - 1:
            betti.append(1)
            torsion.append([])
        else:
            betti.append(0)
            torsion.append([])
    predicted = HomologyResult(ring, betti, torsion)
    notes = []
    comps = connected_components(L.complex)
    if len(comps) > 1:
        notes.append(f"link has {len(comps)} components; degree 0 read literally from the formula")
    if p(n) >= n - 1:
        notes.append("degree-0 clause for p(n) >= n-1 applied")
    return ConeFormulaReport(lhs == predicted, p, t, lhs, rhs, predicted, notes)


# -- prism homotopies ---------------------------------------------------------------------

@dataclass
class PrismReport:
    ok: bool
    checked_simplices: int
    checked_chains: int
    failures: list[str] = field(default_factory=list)


def cylinder(F: FilteredComplex) -> tuple[FilteredComplex, dict]:
    """``F × I`` with filtration ``X_i × I`` (formal dimension ``n + 1``, codimensions kept)."""
    P, point = product_with_interval(F.complex)
    strata = {i + 1: [point[(v, t)] for v in F.skeleton_vertices(i) for t in (0, 1)] for i in range(F.n + 1)}
    return filtered_from_vertex_sets(P, F.n + 1, strata), point


def prism_chain(s: Simplex, H: Mapping[tuple[int, int], int]) -> dict[Simplex, int]:
    """``Σ_l (-1)^l H[v_0..v_l, w_l..w_i]`` for a simplicial homotopy given on vertices ``(v, 0|1)``."""
    out: dict[Simplex, int] = {}
    for sign, pr in prism_decomposition(len(s) - 1):
        verts = {("v", k): H[(s[k], 0)] for k in range(len(s))}
        verts.update({("w", k): H[(s[k], 1)] for k in range(len(s))})
        img = {x: verts[x] for x in pr}
        sgn, t = simplex_image(img, pr)
        if sgn:
            out[t] = out.get(t, 0) + sign * sgn
    return {t: c for t, c in out.items() if c}


def _chain_boundary(chain: Mapping[Simplex, int]) -> dict[Simplex, int]:
    out: dict[Simplex, int] = {}
    for s, c in chain.items():
        for j, f in enumerate(faces(s)):
            out[f] = out.get(f, 0) + (-c if j % 2 else c)
    return {t: c for t, c in out.items() if c}


def prism_check(F: FilteredComplex, p: Perversity, max_dim: int = 4, homotopy: Mapping | None = None, target: FilteredComplex | None = None) -> PrismReport:
    """Check the prism identity and allowability of prism simplices.

    The homotopy ``H`` maps vertices ``(v, t)`` of ``F × I`` into ``target``
    (default: the cylinder itself with ``H`` the identity, i.e. the homotopy
    from the bottom inclusion to the top inclusion).  For every simplex
    ``s`` of dimension at most ``max_dim`` the chain identity
    ``∂P(s) + P(∂s) = H_1(s) - H_0(s)`` is checked exactly; for allowable
    ``s`` every simplex of ``P(s)`` must be allowable in the target; and for
    every intersection cycle basis element the reduced identity
    ``∂P(c) = H_1(c) - H_0(c)`` is checked with ``P(c)`` allowable.
    """
    if target is None:
        target, point = cylinder(F)
        H = point
    else:
        H = homotopy
    # the cylinder has formal dimension n+1 and the same codimensions, so p reads unchanged
    q = p.extend(target.n)
    failures = []
    checked = 0
    for d in range(min(max_dim, F.complex.dim) + 1):
        for s in F.complex.simplices_of_dim(d):
            P = prism_chain(s, H)
            lhs = _chain_boundary(P)
            for f, c in (_chain_boundary({s: 1}).items() if d else []):
                for t, e in prism_chain(f, H).items():
                    lhs[t] = lhs.get(t, 0) + c * e
            rhs: dict[Simplex, int] = {}
            for tt, sign in ((1, 1), (0, -1)):
                sg, img = simplex_image({v: H[(v, tt)] for v in s}, s)
                if sg:
                    rhs[img] = rhs.get(img, 0) + sign * sg
            lhs = {t: c for t, c in lhs.items() if c}
            rhs = {t: c for t, c in rhs.items() if c}
            if lhs != rhs:
                failures.append(f"prism identity fails on {s}")
            if allowable(s, p, F):
                for t in P:
                    if not allowable(t, q, target):
                        failures.append(f"prism simplex {t} over allowable {s} is not allowable")
            checked += 1
    # intersection cycles: ∂P(c) = H1(c) - H0(c)
    ic = intersection_chain_complex(F, p, Q)
    sq = ic.subquotient()
    chains = 0
    for d in range(min(max_dim, F.complex.dim) + 1):
        labels = ic.ambient.labels[d]
        for rep in sq.reps(d):
            c = {labels[j]: a for j, a in rep.items()}
            P: dict = {}
            for s, a in c.items():
                for t, e in prism_chain(s, H).items():
                    P[t] = P.get(t, 0) + a * e
            P = {t: a for t, a in P.items() if a}
            for t in P:
                if not allowable(t, q, target):
                    failures.append(f"prism simplex {t} of an intersection cycle is not allowable")
            bd = _chain_boundary(P)
            want: dict = {}
            for s, a in c.items():
                for tt, sign in ((1, 1), (0, -1)):
                    sg, img = simplex_image({v: H[(v, tt)] for v in s}, s)
                    if sg:
                        want[img] = want.get(img, 0) + sign * sg * a
            if {t: a for t, a in bd.items() if a} != {t: a for t, a in want.items() if a}:
                failures.append(f"prism identity fails on an intersection {d}-cycle")
            chains += 1
    return PrismReport(not failures, checked, chains, failures)
