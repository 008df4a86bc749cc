"""Local coefficient systems and twisted chain complexes.

A :class:`LocalSystem` lives on the barycentric subdivision of a filtered
complex.  Its stalks sit at barycenters of simplices not contained in
``X_{n-2}`` and an invertible matrix ``rho(u, v)`` transports the stalk at
``u`` to the stalk at ``v`` along each subdivision edge.  Matrices act on
column vectors; unlisted edges carry the identity.

A :class:`StalkSystem` is the coarser object living on the base of a
bundle: a free stalk of rank ``r`` at every vertex and transports along the
oriented edges.  Its twisted cellular complex puts one copy of the stalk on
each simplex, anchored at the least vertex.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .algebra import AlgebraError, ChainComplex, HomologyResult, Subquotient, homology, lattice_homology
from .linalg import IntMatrix, determinant
from .perverse import IntersectionComplex, Perversity, intersection_chain_complex
from .rings import Q, Ring, Z
from .simplicial import FilteredComplex, Simplex, SimplicialComplex, Subdivision, barycentric_subdivision, faces


class LocalSystemError(ValueError):
    pass


def _matmul(A: list[list], B: list[list]) -> list[list]:
    n = len(B)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(len(B[0]) if B else 0)] for i in range(len(A))]


def _identity(r: int) -> list[list[int]]:
    return [[int(i == j) for j in range(r)] for i in range(r)]


def _inverse(M: list[list]) -> list[list]:
    """Exact inverse of an integer matrix with determinant ±1 (or any invertible matrix over Q)."""
    from gmpy2 import mpq

    r = len(M)
    A = [[mpq(x) for x in row] + [mpq(int(i == j)) for j in range(r)] for i, row in enumerate(M)]
    for c in range(r):
        piv = next((i for i in range(c, r) if A[i][c]), None)
        if piv is None:
            raise LocalSystemError("matrix is not invertible")
        A[c], A[piv] = A[piv], A[c]
        s = A[c][c]
        A[c] = [x / s for x in A[c]]
        for i in range(r):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    out = []
    for row in A:
        vals = row[r:]
        if all(v.denominator == 1 for v in vals):
            out.append([int(v) for v in vals])
        else:
            out.append(vals)
    return out


def _is_identity(M: list[list]) -> bool:
    return all(M[i][j] == (1 if i == j else 0) for i in range(len(M)) for j in range(len(M)))


# -- local systems on the top stratum --------------------------------------------------------

@dataclass
class LocalSystem:
    """Flat system of free rank-``rank`` stalks on the top-stratum carrier.

    ``sd`` is the barycentric subdivision of ``F.complex``; ``carrier`` holds
    the subdivision vertices (barycenters) of simplices not in ``X_{n-2}``.
    ``edges[(u, v)]`` is the transport from ``u`` to ``v``.
    """

    F: FilteredComplex
    sd: Subdivision
    rank: int
    edges: dict = field(default_factory=dict)
    carrier: frozenset = frozenset()

    def transport(self, u: int, v: int) -> list[list]:
        m = self.edges.get((u, v))
        if m is not None:
            return m
        m = self.edges.get((v, u))
        if m is not None:
            inv = _inverse(m)
            self.edges[(u, v)] = inv
            return inv
        return _identity(self.rank)


def top_carrier(F: FilteredComplex, sd: Subdivision) -> frozenset:
    """Barycenters of simplices not contained in ``X_{n-2}``."""
    low = F.skeleta[F.n - 2] if F.n >= 2 else None
    return frozenset(b for b, s in enumerate(sd.carrier) if low is None or s not in low)


def make_local_system(F: FilteredComplex, rank: int, edges: Mapping | None = None, sd: Subdivision | None = None) -> LocalSystem:
    """Assemble and validate a local system.

    Edge keys may be pairs of subdivision vertex ids or pairs of simplices
    of ``F`` (standing for their barycenters).
    """
    sd = sd or barycentric_subdivision(F.complex)
    carrier = top_carrier(F, sd)
    table = {}
    for (u, v), M in (edges or {}).items():
        u = sd.barycenter[u] if isinstance(u, tuple) else u
        v = sd.barycenter[v] if isinstance(v, tuple) else v
        table[(u, v)] = [list(r) for r in M]
    return validate_local_system(LocalSystem(F, sd, rank, table, carrier))


def validate_local_system(L: LocalSystem) -> LocalSystem:
    """Check shapes, invertibility, edges inside the carrier, inverse pairs and flatness."""
    r = L.rank
    if r < 1:
        raise LocalSystemError("rank must be positive")
    sdK = L.sd.complex
    for (u, v), M in list(L.edges.items()):
        if len(M) != r or any(len(row) != r for row in M):
            raise LocalSystemError(f"edge {u}->{v}: matrix is not {r}x{r}")
        if (min(u, v), max(u, v)) not in sdK:
            raise LocalSystemError(f"{u}->{v} is not an edge of the subdivision")
        if u not in L.carrier or v not in L.carrier:
            raise LocalSystemError(f"edge {u}->{v} leaves the top stratum")
        det = determinant(IntMatrix.from_rows(M)) if all(isinstance(x, int) for row in M for x in row) else None
        if det is not None and det not in (1, -1):
            raise LocalSystemError(f"edge {u}->{v}: determinant {det} is not a unit")
        back = L.edges.get((v, u))
        if back is not None and not _is_identity(_matmul(back, M)):
            raise LocalSystemError(f"edge {u}->{v}: reverse matrix is not the inverse")
    for t in sdK.simplices_of_dim(2):
        if not all(x in L.carrier for x in t):
            continue
        a, b, c = t
        loop = _matmul(L.transport(c, a), _matmul(L.transport(b, c), L.transport(a, b)))
        if not _is_identity(loop):
            raise LocalSystemError(f"flatness fails on the 2-simplex {t}")
    return L


def twisted_ambient(F: FilteredComplex, L: LocalSystem, ring: Ring = Z) -> ChainComplex:
    """Relative chains ``C(K, X_{n-2})`` with coefficients in the stalks.

    Basis labels are ``(simplex, k)``; the boundary moves the coefficient of
    a simplex to each facet along the subdivision edge between barycenters.
    """
    if L.F is not F and L.F.complex != F.complex:
        raise LocalSystemError("local system lives on a different complex")
    expected = top_carrier(F, L.sd)
    if expected != L.carrier:
        raise LocalSystemError("carrier does not match the top stratum of the complex")
    r = L.rank
    low = F.skeleta[F.n - 2] if F.n >= 2 else None
    bary = L.sd.barycenter
    levels = []
    for d in range(F.complex.dim + 1):
        levels.append([s for s in F.complex.simplices_of_dim(d) if low is None or s not in low])
    index = [{s: i for i, s in enumerate(l)} for l in levels]
    labels, boundary = [], []
    for d, level in enumerate(levels):
        labels.append([(s, k) for s in level for k in range(r)])
        cols = []
        for s in level:
            per_k = [dict() for _ in range(r)]
            if d:
                for j, f in enumerate(faces(s)):
                    if f not in index[d - 1]:
                        continue
                    T = L.transport(bary[s], bary[f])
                    sign = -1 if j % 2 else 1
                    base = index[d - 1][f] * r
                    for k in range(r):
                        for row in range(r):
                            a = T[row][k]
                            if a:
                                per_k[k][base + row] = per_k[k].get(base + row, 0) + sign * a
            cols.extend({i: a for i, a in c.items() if a} for c in per_k)
        boundary.append(cols)
    if any(not isinstance(a, int) for cols in boundary for c in cols for a in c.values()):
        if ring.kind == "Z":
            raise LocalSystemError("rational transport matrices need a field")
    C = ChainComplex(labels, boundary, ring, check=False)
    try:
        C.check()
    except AlgebraError as e:
        raise LocalSystemError(f"twisted boundary does not square to zero: {e}") from None
    return C


def twisted_IC(F: FilteredComplex, p: Perversity, L: LocalSystem, ring: Ring = Z) -> IntersectionComplex:
    C = twisted_ambient(F, L, ring)
    return intersection_chain_complex(F, p, ring, ambient=C)


def twisted_IH(F: FilteredComplex, p: Perversity, L: LocalSystem, ring: Ring = Z) -> HomologyResult:
    return twisted_IC(F, p, L, ring).homology()


def facet_interior_lemma(F: FilteredComplex, p: Perversity) -> list[Simplex]:
    """Allowable simplices having a facet inside ``X_{n-2}`` (always empty)."""
    from .perverse import allowable

    if F.n < 2:
        return []
    low = F.skeleta[F.n - 2]
    bad = []
    for s in F.complex:
        if len(s) > 1 and allowable(s, p, F) and any(f in low for f in faces(s)):
            bad.append(s)
    return bad


# -- stalk systems on a base ------------------------------------------------------------------

@dataclass
class StalkSystem:
    """Stalks of rank ``rank`` over the vertices of ``base`` with edge transports.

    ``edges[(u, v)]`` maps the stalk at ``u`` to the stalk at ``v``;
    ``fiber`` optionally records the homology the stalk stands for.
    """

    base: SimplicialComplex
    rank: int
    edges: dict = field(default_factory=dict)
    degree: int | None = None
    fiber: HomologyResult | None = None

    def transport(self, u: int, v: int) -> list[list]:
        m = self.edges.get((u, v))
        if m is not None:
            return m
        m = self.edges.get((v, u))
        if m is not None:
            inv = _inverse(m)
            self.edges[(u, v)] = inv
            return inv
        return _identity(self.rank)

    def loop_product(self, cycle: Sequence[int]) -> list[list]:
        """Transport around a closed vertex path ``cycle[0] -> cycle[1] -> ... -> cycle[0]``."""
        M = _identity(self.rank)
        for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
            M = _matmul(self.transport(a, b), M)
        return M


def validate_stalk_system(S: StalkSystem) -> StalkSystem:
    for (u, v), M in S.edges.items():
        if (min(u, v), max(u, v)) not in S.base:
            raise LocalSystemError(f"{u}->{v} is not an edge of the base")
        if len(M) != S.rank or any(len(r) != S.rank for r in M):
            raise LocalSystemError(f"edge {u}->{v}: wrong matrix shape")
        _inverse(M)
    for t in S.base.simplices_of_dim(2):
        if not _is_identity(S.loop_product(list(t))):
            raise LocalSystemError(f"monodromy around {t} is not the identity")
    return S


def twisted_cellular_complex(B: SimplicialComplex, S: StalkSystem, ring: Ring = Q) -> ChainComplex:
    """One rank-``r`` summand per simplex, anchored at its least vertex.

    Only the facet opposite the least vertex changes anchor, so its
    coefficient is carried along the edge ``[v_0, v_1]``.
    """
    if S.base != B:
        raise LocalSystemError("stalk system lives on a different base")
    r = S.rank
    labels, boundary = [], []
    index = [{s: i for i, s in enumerate(l)} for l in B.simplices]
    for d, level in enumerate(B.simplices):
        labels.append([(s, k) for s in level for k in range(r)])
        cols = []
        for s in level:
            per_k = [dict() for _ in range(r)]
            if d:
                for j, f in enumerate(faces(s)):
                    T = S.transport(s[0], s[1]) if j == 0 else _identity(r)
                    sign = -1 if j % 2 else 1
                    base = index[d - 1][f] * r
                    for k in range(r):
                        for row in range(r):
                            a = T[row][k]
                            if a:
                                per_k[k][base + row] = per_k[k].get(base + row, 0) + sign * a
            cols.extend({i: a for i, a in c.items() if a} for c in per_k)
        boundary.append(cols)
    C = ChainComplex(labels, boundary, ring, check=False)
    try:
        C.check()
    except AlgebraError as e:
        raise LocalSystemError(f"flatness failure: {e}") from None
    return C


def polygon(m: int) -> SimplicialComplex:
    from .simplicial import close

    return close([(j, (j + 1) % m) for j in range(m)])


def stalk_system_from_gluing(phi: Sequence[Sequence], m: int = 3, degree: int | None = None, fiber: HomologyResult | None = None) -> StalkSystem:
    """Stalk system on the ``m``-gon whose loop ``0 -> 1 -> ... -> m-1 -> 0`` acts by ``phi``.

    All edges carry the identity except the closing edge ``m-1 -> 0``,
    which carries ``phi`` (the gluing of a mapping torus).
    """
    if m < 3:
        raise LocalSystemError("need at least 3 base vertices")
    M = [list(r) for r in phi]
    r = len(M)
    if r:
        _inverse(M)
    S = StalkSystem(polygon(m), r, {}, degree, fiber)
    if r and not _is_identity(M):
        S.edges[(m - 1, 0)] = M
    return validate_stalk_system(S)


def twisted_cellular_homology(S: StalkSystem, ring: Ring = Q) -> HomologyResult:
    C = twisted_cellular_complex(S.base, S, ring)
    if not S.rank:
        return HomologyResult(ring, [0])
    return homology(C, ring)


@dataclass
class StalkComparison:
    ok: bool
    threshold: int
    matrices: dict             # degree -> matrix (rows: cone stalk, cols: link stalk)
    kinds: dict                # degree -> "iso" | "zero" | "other"
    failures: list[str] = field(default_factory=list)


def stalk_comparison_map(link: FilteredComplex, phi: Mapping[int, int] | None, p: Perversity, ring: Ring = Q) -> StalkComparison:
    """Map ``IH_q(L) -> IH_q(c̄L)`` induced by inclusion, with monodromy equivariance.

    ``phi`` is the gluing automorphism of ``L`` (extended to the cone by
    fixing the apex).  The map should be an isomorphism for
    ``q < c - 1 - p(c)`` and zero otherwise, ``c`` the cone dimension.
    """
    from .perverse import induced_IH_map
    from .simplicial import cone

    cL = cone(link)
    apex = next(iter(cL.stratum_vertices(0)))
    c = cL.n
    incl = {v: v for v in link.complex.vertices}
    res = induced_IH_map(incl, link, cL, p.extend(link.n), ring, q=p)
    t = c - 1 - p(c)
    mats, kinds, failures = {}, {}, []
    for q, M in enumerate(res.matrices):
        rows, cols = res.target.betti_at(q), res.source.betti_at(q)
        mats[q] = M
        rank = _rank(M, res.ring)
        if rank == 0:
            kinds[q] = "zero"
        elif rank == rows == cols:
            kinds[q] = "iso"
        else:
            kinds[q] = "other"
        want = "iso" if q < t else "zero"
        if kinds[q] != want and not (rows == cols == 0):
            failures.append(f"degree {q}: expected {want}, got {kinds[q]}")
    if phi is not None:
        phic = dict(phi)
        phic[apex] = apex
        mL = induced_IH_map(dict(phi), link, link, p.extend(link.n), ring).matrices
        mC = induced_IH_map(phic, cL, cL, p, ring).matrices
        for q, M in mats.items():
            if not M and not (mC[q] if q < len(mC) else []):
                continue
            left = _matmul(mC[q], M) if M and mC[q] else []
            right = _matmul(M, mL[q]) if M and mL[q] else []
            if left != right:
                failures.append(f"degree {q}: comparison map does not commute with monodromy")
    return StalkComparison(not failures, t, mats, kinds, failures)


def _rank(M: list[list], ring: Ring) -> int:
    from .algebra import _mat_rank

    return _mat_rank(M, ring) if M and M[0] else 0
