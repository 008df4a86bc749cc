"""Spectral sequences of filtered intersection chain complexes.

The filtration of a regular neighborhood ``N`` of the bottom stratum ``Y``
comes from the retraction ``r: N -> Y``: a vertex of ``N`` is the barycenter
``b(t)`` of a simplex ``t`` meeting ``Y`` and ``r(b(t)) = b(t ∩ Y)``.  A
simplex of ``N`` (a flag of such ``t``) has level ``s`` when its largest
member meets ``Y`` in a simplex of dimension ``s``.  ``J^s`` (level ``<= s``)
is the preimage under ``r`` of the part of the subdivided base lying over
the ``s``-skeleton of ``Y``.

Pages are computed over a field from the textbook formulas

    Z^r_p = {x in F_p : ∂x in F_{p-r}},
    E^r_p = Z^r_p / (Z^{r-1}_{p-1} + ∂ Z^{r-1}_{p+r-1}),

using one left-to-right reduction of the boundary per degree.  With
coordinates sorted by filtration level, every echelon basis is adapted to
the filtration, and classes get canonical representatives (see
:mod:`ihss.algebra`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .algebra import (
    ChainComplex,
    HomologyResult,
    Subquotient,
    _columns_to_rows,
    _mat_mul,
    _mat_rank,
    connecting_between,
    simplicial_chain_complex,
)
from .linalg import Echelon, SparseVec, _axpy, apply_sparse, rref
from .localsys import StalkSystem, _identity, polygon, stalk_system_from_gluing, twisted_cellular_complex
from .perverse import IntersectionComplex, Perversity, induced_IH_map, intersection_chain_complex, relative_IH
from .rings import Q, Ring
from .simplicial import (
    FilteredComplex,
    RegularNeighborhood,
    SimplicialComplex,
    Subcomplex,
    check_retraction,
    close,
    cone,
    regular_neighborhood,
)


class SpectralError(ValueError):
    pass


# -- filtered chain complexes ------------------------------------------------------------

@dataclass
class FilteredChainComplex:
    """Subcomplex ``V`` of ``ambient`` filtered by the level of ambient coordinates.

    ``basis[d]`` is an echelon basis of ``V_d`` (distinct largest indices) and
    ``coord_level[d][j]`` the level of coordinate ``j``; levels must be
    nondecreasing in ``j``.  ``F_p V`` is spanned by basis vectors whose
    largest index has level at most ``p``.
    """

    ambient: ChainComplex
    basis: list[list[SparseVec]]
    coord_level: list[list[int]]
    ring: Ring = Q

    def __post_init__(self):
        if not self.ring.is_field:
            raise SpectralError("spectral sequences are computed over a field")
        for d, lv in enumerate(self.coord_level):
            if any(a > b for a, b in zip(lv, lv[1:])):
                raise SpectralError(f"coordinate levels are not sorted in degree {d}")
        self.basis = [sorted(b, key=max) for b in self.basis]

    @property
    def top(self) -> int:
        return self.ambient.top

    def vector_level(self, d: int, v: SparseVec) -> int:
        return self.coord_level[d][max(v)]

    @property
    def levels(self) -> range:
        all_levels = [l for lv in self.coord_level for l in lv]
        return range(0, (max(all_levels) if all_levels else 0) + 1)

    def F(self, p: int) -> list[list[SparseVec]]:
        return [[v for v in self.basis[d] if self.vector_level(d, v) <= p] for d in range(self.top + 1)]


def filter_by_levels(C: ChainComplex, levels: Sequence[Sequence[int]], basis: Sequence[Sequence[SparseVec]] | None = None, ring: Ring = Q) -> FilteredChainComplex:
    """Reorder coordinates of ``C`` by level (stable) and build the filtered complex.

    ``basis`` defaults to all of ``C`` (coordinate vectors).
    """
    perms = []
    for d in range(C.top + 1):
        order = sorted(range(C.rank(d)), key=lambda j: (levels[d][j], j))
        perms.append(order)
    new_index = [{old: new for new, old in enumerate(order)} for order in perms]
    labels = [[C.labels[d][j] for j in perms[d]] for d in range(C.top + 1)]
    boundary = []
    for d in range(C.top + 1):
        cols = []
        for j in perms[d]:
            col = C.cols(d)[j]
            cols.append({new_index[d - 1][i]: a for i, a in col.items()} if d else {})
        boundary.append(cols)
    D = ChainComplex(labels, boundary, C.ring, check=False)
    lv = [[levels[d][j] for j in perms[d]] for d in range(C.top + 1)]
    if basis is None:
        one = ring.one
        vecs = [[{j: one} for j in range(D.rank(d))] for d in range(D.top + 1)]
    else:
        vecs = []
        for d in range(C.top + 1):
            e = Echelon(ring)
            for v in basis[d]:
                e.add({new_index[d][i]: ring.elem(a) for i, a in v.items()})
            vecs.append(e.basis())
    return FilteredChainComplex(D, vecs, lv, ring)


# -- pages ------------------------------------------------------------------------------

@dataclass
class _Column:
    level: int            # filtration level of the basis vector
    vec: SparseVec        # v'_j in ambient coordinates
    image: SparseVec      # ∂ v'_j after reduction (distinct lows), empty for cycles
    death: int | None     # level of the leading entry of image


@dataclass
class PageGroup:
    reps: list[SparseVec]
    pivots: list[int]
    denominator: Echelon

    @property
    def dim(self) -> int:
        return len(self.reps)


@dataclass
class SpectralSequence:
    ring: Ring
    pmax: int
    top: int
    dims: dict          # r -> {(p, q): dim}
    differentials: dict  # r -> {(p, q): matrix}  (d^r out of (p, q))
    groups: dict        # r -> {(p, d): PageGroup}
    abutment: dict      # degree -> list of dims by p
    homology: list[int]
    r_max: int

    def E(self, r: int, p: int, q: int) -> int:
        r = min(r, self.r_max)
        return self.dims[r].get((p, q), 0)

    def E_inf(self, p: int, q: int) -> int:
        return self.dims[self.r_max].get((p, q), 0)

    def nonzero(self, r: int) -> dict:
        return {k: v for k, v in self.dims[min(r, self.r_max)].items() if v}

    def to_json(self, ring: Ring | None = None) -> dict:
        ring = ring or self.ring
        pages = []
        for r in sorted(self.dims):
            cells = [{"p": p, "q": q, "dim": dim} for (p, q), dim in sorted(self.dims[r].items())]
            diffs = [
                {"r": r, "p": p, "q": q, "matrix": [[ring.to_json(x) for x in row] for row in M]}
                for (p, q), M in sorted(self.differentials.get(r, {}).items())
                if M and any(x for row in M for x in row)
            ]
            pages.append({"page": r, "cells": cells, "differentials": diffs})
        return {
            "ring": ring.name,
            "r_max": self.r_max,
            "pages": pages,
            "abutment": [{"degree": d, "dims_by_p": dims} for d, dims in sorted(self.abutment.items())],
            "homology": list(self.homology),
        }


def _reduce_degree(fc: FilteredChainComplex, d: int) -> list[_Column]:
    """Left-to-right reduction of ``∂`` on the filtered basis of degree ``d``."""
    ring = fc.ring
    vecs = fc.basis[d]
    out = []
    if d == 0:
        return [_Column(fc.vector_level(0, v), v, {}, None) for v in vecs]
    cols = fc.ambient.field_cols(d, ring)
    pivots: dict[int, int] = {}      # low -> index into out
    axpy = _axpy(ring)
    lv_prev = fc.coord_level[d - 1]
    for v in vecs:
        img = apply_sparse(cols, v, ring)
        w = dict(v)
        while img:
            low = max(img)
            k = pivots.get(low)
            if k is None:
                break
            other = out[k]
            c = ring.norm(-img[low] * ring.inv(other.image[low]))
            axpy(img, c, other.image)
            axpy(w, c, other.vec)
        if img:
            pivots[max(img)] = len(out)
            out.append(_Column(fc.vector_level(d, v), w, img, lv_prev[max(img)]))
        else:
            out.append(_Column(fc.vector_level(d, v), w, {}, None))
    return out


def _Z(cols: list[_Column], p: int, r: int) -> list[SparseVec]:
    """``Z^r_p``: vectors of level ``<= p`` whose boundary has level ``<= p - r``."""
    return [c.vec for c in cols if c.level <= p and (c.death is None or c.death <= p - r)]


def _dZ(cols: list[_Column], p: int, r: int) -> list[SparseVec]:
    """``∂ Z^{r-1}_{p+r-1}`` (lands in level ``<= p``)."""
    return [c.image for c in cols if c.image and c.level <= p + r - 1 and c.death <= p]


def _group(num: list[SparseVec], den: list[SparseVec], ring: Ring) -> PageGroup:
    e = Echelon(ring)
    for v in den:
        e.add(v)
    reduced = []
    for z in num:
        r, _ = e.full_reduce(z)
        if r:
            reduced.append(r)
    reps = rref(reduced, ring)
    return PageGroup(reps, [max(r) for r in reps], e)


def _coords(g: PageGroup, z: SparseVec, ring: Ring) -> list:
    r, _ = g.denominator.full_reduce(z)
    coords = [r.get(p, ring.zero) for p in g.pivots]
    check = dict(r)
    axpy = _axpy(ring)
    for c, rep in zip(coords, g.reps):
        if c:
            axpy(check, ring.norm(-c), rep)
    if check:
        raise SpectralError("element does not lie in the page's numerator")
    return coords


def compute_pages(fc: FilteredChainComplex, r_max: int | None = None) -> SpectralSequence:
    ring = fc.ring
    top = fc.top
    P = max(fc.levels)
    R = r_max if r_max is not None else P + 2
    reduced = [_reduce_degree(fc, d) for d in range(top + 1)]
    empty: list[_Column] = []
    dims, diffs, groups = {}, {}, {}
    for r in range(1, R + 1):
        dims[r], diffs[r], groups[r] = {}, {}, {}
        for p in range(0, P + 1):
            for d in range(0, top + 1):
                num = _Z(reduced[d], p, r)
                den = _Z(reduced[d], p - 1, r - 1) + _dZ(reduced[d + 1] if d + 1 <= top else empty, p, r)
                g = _group(num, den, ring)
                groups[r][(p, d)] = g
                dims[r][(p, d - p)] = g.dim
        for (p, d), g in groups[r].items():
            tgt = groups[r].get((p - r, d - 1))
            if tgt is None:
                diffs[r][(p, d - p)] = []
                continue
            cols = [_coords(tgt, fc.ambient.apply(d, rep, ring), ring) for rep in g.reps]
            diffs[r][(p, d - p)] = _columns_to_rows(cols, tgt.dim)
    # abutment computed from the filtered homology directly
    full = Subquotient(fc.ambient, fc.basis, None, ring, check=False)
    hom = full.betti()
    abut = {}
    for d in range(top + 1):
        bech = full.group(d).boundaries
        prev = 0
        row = []
        for p in range(0, P + 1):
            Fp = Subquotient(fc.ambient, fc.F(p), None, ring, check=False)
            e = Echelon(ring)
            e.pivots = dict(bech.pivots)
            for z in Fp._reduce(d)[0]:
                e.add(z)
            dim_p = e.dim - bech.dim
            row.append(dim_p - prev)
            prev = dim_p
        abut[d] = row
    return SpectralSequence(ring, P, top, dims, diffs, groups, abut, hom, R)


@dataclass
class LawReport:
    ok: bool
    failures: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "failures": list(self.failures)}


def check_laws(ss: SpectralSequence, first_quadrant: bool = True) -> LawReport:
    """``d∘d = 0``, ``E^{r+1} = H(E^r, d^r)``, first-quadrant support and abutment.

    Pass ``first_quadrant=False`` for filtrations that are not skeletal,
    where a class may sit at a level above its degree.
    """
    ring = ss.ring
    fails = []
    for r in range(1, ss.r_max + 1):
        D = ss.differentials[r]
        for (p, q), M in D.items():
            nxt = D.get((p - r, q + r - 1))
            if M and nxt and M[0] and nxt[0]:
                comp = _mat_mul(nxt, M, ring, len(M))
                if any(x for row in comp for x in row):
                    fails.append(f"d^{r} d^{r} != 0 at ({p},{q})")
        if r < ss.r_max:
            for (p, q), dim in ss.dims[r].items():
                out = D.get((p, q))
                inc = D.get((p + r, q - r + 1))
                rk_out = _mat_rank(out, ring) if out and out[0] else 0
                rk_in = _mat_rank(inc, ring) if inc and inc[0] else 0
                want = dim - rk_out - rk_in
                if ss.dims[r + 1].get((p, q), 0) != want:
                    fails.append(f"E^{r + 1}({p},{q}) = {ss.dims[r + 1].get((p, q), 0)} but H(E^{r}) gives {want}")
    for r, cells in ss.dims.items() if first_quadrant else ():
        for (p, q), dim in cells.items():
            if dim and (p < 0 or q < 0 or p > ss.pmax):
                fails.append(f"E^{r}({p},{q}) = {dim} outside the first quadrant")
    for d in range(ss.top + 1):
        total = sum(ss.E_inf(p, d - p) for p in range(ss.pmax + 1))
        if total != ss.homology[d]:
            fails.append(f"degree {d}: sum of E^inf is {total}, homology has dimension {ss.homology[d]}")
        if ss.abutment[d] != [ss.E_inf(p, d - p) for p in range(ss.pmax + 1)]:
            fails.append(f"degree {d}: filtered homology {ss.abutment[d]} differs from E^inf")
    return LawReport(not fails, fails)


# -- the skeletal filtration of a regular neighborhood ---------------------------------------

@dataclass
class SkeletalFiltration:
    nb: RegularNeighborhood
    level: dict            # simplex of N -> s
    pmax: int

    @property
    def N(self) -> FilteredComplex:
        return self.nb.N

    @property
    def base(self) -> SimplicialComplex:
        return self.nb.original_base

    def J(self, s: int) -> Subcomplex:
        return Subcomplex(self.N.complex, (t for t, l in self.level.items() if l <= s), check=False)

    def B(self, s: int) -> Subcomplex:
        """Part of the subdivided base over the closed ``s``-skeleton of ``Y``."""
        carrier = self.nb.carrier
        vs = [v for v in self.nb.base.vertices if len(carrier[v]) - 1 <= s]
        return self.N.complex.full_subcomplex(vs)

    def piece(self, alpha) -> tuple[Subcomplex, Subcomplex]:
        """``(σ̃, ∂σ̃)`` for a simplex ``alpha`` of the base: flags whose top meets ``Y`` inside ``alpha`` (properly, for the boundary)."""
        cap = self.nb.base_simplex
        alpha = tuple(alpha)
        inside, bd = [], []
        for t in self.N.complex:
            top = max((cap[v] for v in t), key=len)
            if set(top) <= set(alpha):
                inside.append(t)
                if top != alpha:
                    bd.append(t)
        return Subcomplex(self.N.complex, inside, check=False), Subcomplex(self.N.complex, bd, check=False)

    def frontier_filtered(self) -> FilteredComplex:
        return deleted_neighborhood(self.nb)


def skeletal_filtration(nb: RegularNeighborhood) -> SkeletalFiltration:
    check_retraction(nb)
    base_ids = set(nb.base.vertices)
    if any(nb.carrier[v] and v in base_ids and nb.base_simplex[v] != nb.carrier[v] for v in base_ids):
        raise SpectralError("retraction is not the identity on the base")
    cap = nb.base_simplex
    level = {t: max(len(cap[v]) for v in t) - 1 for t in nb.N.complex}
    return SkeletalFiltration(nb, level, nb.original_base.dim)


def neighborhood_filtration(F: FilteredComplex, Y: Subcomplex | None = None) -> SkeletalFiltration:
    """Skeletal filtration of the regular neighborhood of ``Y`` (default: the bottom nonempty skeleton)."""
    if Y is None:
        Y = F.skeleta[F.bottom_index()]
    return skeletal_filtration(regular_neighborhood(F, Y))


def deleted_neighborhood(nb: RegularNeighborhood) -> FilteredComplex:
    """The frontier of the neighborhood with strata inherited from ``N`` (indices kept)."""
    if nb.frontier is None:
        raise SpectralError("neighborhood has no recorded frontier")
    return nb.N.restrict(nb.frontier)


def filtered_ic(SF: SkeletalFiltration, p: Perversity, ring: Ring = Q, deleted: bool = False) -> tuple[FilteredChainComplex, IntersectionComplex]:
    """The filtered intersection chains of ``N`` (or of the frontier)."""
    FN = deleted_neighborhood(SF.nb) if deleted else SF.N
    K = FN.complex
    levels = SF.level
    order = [sorted(K.simplices_of_dim(d), key=lambda t: (levels[t], t)) for d in range(K.dim + 1)]
    C = simplicial_chain_complex(K, ring, simplices=order)
    ic = intersection_chain_complex(FN, p, ring, ambient=C)
    lv = [[levels[t] for t in order[d]] for d in range(K.dim + 1)]
    return FilteredChainComplex(C, [list(b) for b in ic.basis], lv, ring), ic


# -- cross-checks ---------------------------------------------------------------------------------

@dataclass
class CheckReport:
    ok: bool
    details: list = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "details": self.details, "failures": list(self.failures)}


def d1_cross_check(fc: FilteredChainComplex, ss: SpectralSequence) -> CheckReport:
    """Compare ``d^1`` with the connecting map of the triple ``(F_p, F_{p-1}, F_{p-2})``."""
    ring = fc.ring
    fails, details = [], []
    subq = {}

    def sq(p):
        if p not in subq:
            W = fc.F(p) if p >= 0 else None
            U = fc.F(p - 1) if p - 1 >= 0 else None
            if p < 0:
                W = [[] for _ in range(fc.top + 1)]
            subq[p] = Subquotient(fc.ambient, W, U, ring, check=False)
        return subq[p]

    for p in range(1, ss.pmax + 1):
        for d in range(1, fc.top + 1):
            M = connecting_between(sq(p), sq(p - 1), d)
            D = ss.differentials[1].get((p, d - p), [])
            same = _same_matrix(M, D)
            nonzero = any(x for row in M for x in row)
            details.append({"p": p, "degree": d, "shape": [len(M), len(M[0]) if M else 0], "nonzero": nonzero, "equal": same})
            if not same:
                fails.append(f"d^1 at p={p}, degree {d} differs from the connecting map")
    return CheckReport(not fails, details, fails)


def _same_matrix(A: list[list], B: list[list]) -> bool:
    """Entrywise equality; matrices with no rows are all equal."""
    if not A or not B:
        return not A and not B
    return [list(r) for r in A] == [list(r) for r in B]


def e1_decomposition_check(SF: SkeletalFiltration, p: Perversity, ss: SpectralSequence, ring: Ring = Q) -> CheckReport:
    """``dim E^1_{s,*} = Σ_α dim IH_*(σ̃_α, ∂σ̃_α)`` over the ``s``-simplices of the base."""
    fails, details = [], []
    for s in range(SF.pmax + 1):
        totals: dict[int, int] = {}
        for alpha in SF.base.simplices_of_dim(s):
            inside, bd = SF.piece(alpha)
            Fin = SF.N.restrict(inside)
            rel = relative_IH(Fin, bd, p, ring)
            for d, b in enumerate(rel.betti):
                totals[d] = totals.get(d, 0) + b
        for d in range(ss.top + 1):
            e1 = ss.E(1, s, d - s)
            details.append({"p": s, "degree": d, "E1": e1, "pieces": totals.get(d, 0)})
            if e1 != totals.get(d, 0):
                fails.append(f"E^1 at p={s}, degree {d}: {e1} != sum over pieces {totals.get(d, 0)}")
    return CheckReport(not fails, details, fails)


def fiber_stalk_systems(link: FilteredComplex, gluing: dict | None, p: Perversity, m: int, variant: str = "cone", ring: Ring = Q, base: SimplicialComplex | None = None) -> dict[int, StalkSystem]:
    """Stalk systems ``q -> S_q`` with stalk ``IH_q`` of the cone on ``link`` (or of the link itself).

    With ``gluing`` the base is the ``m``-gon and the loop acts by the
    induced map; otherwise the system is constant over ``base``.
    """
    fiber = cone(link) if variant == "cone" else link
    fp = Perversity(p.values[: fiber.n + 1])
    if gluing is not None:
        phi = dict(gluing)
        if variant == "cone":
            apex = next(iter(fiber.stratum_vertices(0)))
            phi[apex] = apex
        res = induced_IH_map(phi, fiber, fiber, fp, ring)
        out = {}
        for q, M in enumerate(res.matrices):
            out[q] = stalk_system_from_gluing(M, m, q, res.source) if M else StalkSystem(polygon(m), 0, {}, q, res.source)
        return out
    res = induced_IH_map({v: v for v in fiber.complex.vertices}, fiber, fiber, fp, ring)
    B = base if base is not None else close([(0,)])
    return {q: StalkSystem(B, res.source.betti_at(q), {}, q, res.source) for q in range(len(res.source.betti))}


def _twisted_betti(S: StalkSystem, ring: Ring) -> list[int]:
    if S.rank == 0:
        return [0] * (S.base.dim + 1)
    C = twisted_cellular_complex(S.base, S, ring)
    return Subquotient(C, ring=ring).betti()


def e2_vs_twisted(ss: SpectralSequence, stalks: dict[int, StalkSystem], ring: Ring = Q) -> CheckReport:
    """``E^2_{p,q} = H_p(base; S_q)`` for all ``(p, q)``."""
    fails, details = [], []
    qmax = max(list(stalks) + [q for (_, q) in ss.dims[min(2, ss.r_max)]])
    for q in range(0, qmax + 1):
        S = stalks.get(q)
        tw = _twisted_betti(S, ring) if S is not None else []
        for p in range(0, ss.pmax + 1):
            e2 = ss.E(2, p, q)
            t = tw[p] if p < len(tw) else 0
            details.append({"p": p, "q": q, "E2": e2, "twisted": t})
            if e2 != t:
                fails.append(f"E^2({p},{q}) = {e2} but twisted cellular homology gives {t}")
    return CheckReport(not fails, details, fails)


def page_map(fc_src: FilteredChainComplex, ss_src: SpectralSequence, fc_tgt: FilteredChainComplex, ss_tgt: SpectralSequence, r: int) -> dict:
    """Matrices of the map ``E^r(src) -> E^r(tgt)`` induced by the label-preserving inclusion."""
    ring = fc_tgt.ring
    index = [{lab: i for i, lab in enumerate(l)} for l in fc_tgt.ambient.labels]
    out = {}
    for (p, d), g in ss_src.groups[r].items():
        tgt = ss_tgt.groups[r].get((p, d))
        if tgt is None:
            continue
        labels = fc_src.ambient.labels[d]
        cols = []
        for rep in g.reps:
            img = {index[d][labels[j]]: a for j, a in rep.items()}
            cols.append(_coords(tgt, img, ring))
        out[(p, d - p)] = _columns_to_rows(cols, tgt.dim)
    return out


def ss_map_deleted_to_full(SF: SkeletalFiltration, p: Perversity, ring: Ring = Q, codim: int | None = None, stalks_link=None, stalks_cone=None, comparison=None) -> CheckReport:
    """The map of spectral sequences induced by ``frontier -> N``.

    At ``E^2`` the map must be an isomorphism for ``q < c - 1 - p(c)`` and
    zero for larger ``q`` (``c`` the codimension of the base), and its rank
    must equal that of the map on twisted cellular homology induced by the
    stalk comparison homomorphism when stalk data is given.
    """
    fcN, _ = filtered_ic(SF, p, ring)
    fcD, _ = filtered_ic(SF, p, ring, deleted=True)
    ssN, ssD = compute_pages(fcN), compute_pages(fcD)
    c = codim if codim is not None else SF.N.n - SF.N.bottom_index()
    t = c - 1 - p(c)
    maps = page_map(fcD, ssD, fcN, ssN, 2)
    fails, details = [], []
    for (pp, q), M in sorted(maps.items()):
        src, tgt = ssD.E(2, pp, q), ssN.E(2, pp, q)
        rank = _mat_rank(M, ring) if M and M[0] else 0
        kind = "zero" if rank == 0 else ("iso" if rank == src == tgt else "other")
        want = "iso" if q < t else "zero"
        entry = {"p": pp, "q": q, "source": src, "target": tgt, "rank": rank, "kind": kind, "expected": want}
        if src == tgt == 0:
            kind = want
            entry["kind"] = kind
        if stalks_link is not None and stalks_cone is not None and comparison is not None:
            tw = _twisted_map_rank(stalks_link.get(q), stalks_cone.get(q), comparison.get(q), pp, ring)
            entry["twisted_rank"] = tw
            if tw != rank:
                fails.append(f"E^2 map at ({pp},{q}) has rank {rank}, twisted comparison has rank {tw}")
        if kind != want:
            fails.append(f"E^2 map at ({pp},{q}) is {kind}, expected {want}")
        details.append(entry)
    return CheckReport(not fails, details, fails)


def _twisted_map_rank(SL: StalkSystem | None, SC: StalkSystem | None, M, p: int, ring: Ring) -> int:
    """Rank on ``H_p`` of the map of twisted cellular complexes given by ``M`` on every stalk."""
    if SL is None or SC is None or not SL.rank or not SC.rank or not M:
        return 0
    CL = twisted_cellular_complex(SL.base, SL, ring)
    CC = twisted_cellular_complex(SC.base, SC, ring)
    src, tgt = Subquotient(CL, ring=ring), Subquotient(CC, ring=ring)
    rL, rC = SL.rank, SC.rank
    norm = ring.norm

    def f(v):
        out = {}
        for i, a in v.items():
            cell, k = divmod(i, rL)
            for row in range(rC):
                x = M[row][k]
                if x:
                    key = cell * rC + row
                    out[key] = norm(out.get(key, 0) + a * x)
        return {k: x for k, x in out.items() if x}

    mat = src.map_to(tgt, p, f)
    return _mat_rank(mat, ring) if mat and mat[0] else 0
