"""Chain complexes, homology and the exact-sequence machinery.

A :class:`ChainComplex` stores integer boundary columns; homology over a
field is computed with canonical bases (see :class:`Subquotient`), over the
integers with invariant factors.

Canonical basis of ``H = Z / B``: every cycle is fully reduced against the
echelon basis of ``B`` (so it vanishes on the pivots of ``B``) and the
reduced cycles are put in reduced echelon form.  The result depends only on
the subspaces and the coordinate order, which lets independent computations
compare matrices entry by entry.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .linalg import (
    Echelon,
    IntMatrix,
    SparseVec,
    _axpy,
    apply_sparse,
    invariant_factors,
    rref,
    smith_normal_form,
    to_field,
)
from .rings import Q, Ring, Z
from .simplicial import Simplex, SimplicialComplex, faces


class AlgebraError(ValueError):
    pass


# -- chain complexes ---------------------------------------------------------------------

class ChainComplex:
    """Finite free chain complex ``C_0 <- C_1 <- ... <- C_top``.

    ``boundary[d][j]`` is the sparse column of integer coefficients of the
    boundary of basis element ``j`` of degree ``d`` (``boundary[0]`` is all
    empty).
    """

    def __init__(self, labels: Sequence[Sequence], boundary: Sequence[Sequence[SparseVec]], ring: Ring = Z, check: bool = True):
        self.labels = [list(l) for l in labels]
        self.boundary = [list(b) for b in boundary]
        self.ring = ring
        if len(self.labels) != len(self.boundary):
            raise AlgebraError("labels and boundary disagree on the number of degrees")
        for d, cols in enumerate(self.boundary):
            if len(cols) != len(self.labels[d]):
                raise AlgebraError(f"degree {d}: {len(cols)} columns for {len(self.labels[d])} labels")
            if d == 0 and any(cols):
                raise AlgebraError("degree 0 boundary must vanish")
            if d > 0:
                n = len(self.labels[d - 1])
                for c in cols:
                    if any(not 0 <= i < n for i in c):
                        raise AlgebraError(f"degree {d}: boundary row out of range")
        self._field_cols: dict = {}
        if check:
            self.check()

    @property
    def top(self) -> int:
        return len(self.labels) - 1

    def rank(self, d: int) -> int:
        return len(self.labels[d]) if 0 <= d < len(self.labels) else 0

    def ranks(self) -> list[int]:
        return [len(l) for l in self.labels]

    def cols(self, d: int) -> list[SparseVec]:
        return self.boundary[d] if 0 <= d < len(self.boundary) else []

    def field_cols(self, d: int, ring: Ring) -> list[SparseVec]:
        key = (d, ring)
        if key not in self._field_cols:
            self._field_cols[key] = [to_field(c, ring) for c in self.cols(d)]
        return self._field_cols[key]

    def boundary_matrix(self, d: int) -> IntMatrix:
        return IntMatrix.from_columns(self.cols(d), self.rank(d - 1))

    def apply(self, d: int, v: SparseVec, ring: Ring | None = None) -> SparseVec:
        ring = ring or self.ring
        if d <= 0 or d > self.top:
            return {}
        cols = self.field_cols(d, ring) if ring.is_field else self.cols(d)
        return apply_sparse(cols, v, ring)

    def check(self) -> None:
        for d in range(2, len(self.boundary)):
            for j, c in enumerate(self.boundary[d]):
                if apply_sparse(self.boundary[d - 1], c, Z if not self.ring.kind == "Fp" else self.ring):
                    raise AlgebraError(f"boundary of boundary is nonzero at degree {d}, column {j}")

    def with_ring(self, ring: Ring) -> "ChainComplex":
        return ChainComplex(self.labels, self.boundary, ring, check=False)

    def __repr__(self) -> str:
        return f"ChainComplex(ranks={self.ranks()}, ring={self.ring})"


def simplicial_chain_complex(K: SimplicialComplex, ring: Ring = Z, simplices: Sequence[Sequence[Simplex]] | None = None) -> ChainComplex:
    """Oriented simplicial chains (vertex order) of ``K`` or of a list of simplices per degree."""
    levels = [list(l) for l in (simplices if simplices is not None else K.simplices)]
    index = [{s: i for i, s in enumerate(l)} for l in levels]
    boundary = []
    for d, level in enumerate(levels):
        cols = []
        for s in level:
            col = {}
            if d:
                for j, f in enumerate(faces(s)):
                    col[index[d - 1][f]] = -1 if j % 2 else 1
            cols.append(col)
        boundary.append(cols)
    return ChainComplex(levels, boundary, ring, check=False)


@dataclass
class ChainMap:
    """Degreewise matrices (sparse columns) between two chain complexes."""

    domain: ChainComplex
    codomain: ChainComplex
    columns: list[list[SparseVec]]

    def apply(self, d: int, v: SparseVec, ring: Ring) -> SparseVec:
        if d >= len(self.columns):
            return {}
        cols = self.columns[d]
        if ring.is_field:
            cols = [to_field(c, ring) for c in cols] if ring.kind == "Fp" else cols
        return apply_sparse(cols, v, ring)

    def matrix(self, d: int) -> IntMatrix:
        return IntMatrix.from_columns(self.columns[d], self.codomain.rank(d))

    def check(self) -> None:
        """Raise unless ``f ∂ = ∂ f`` in every degree."""
        for d in range(1, len(self.columns)):
            for j, col in enumerate(self.columns[d]):
                left = apply_sparse(self.columns[d - 1], self.domain.cols(d)[j], Z) if d - 1 < len(self.columns) else {}
                right = self.codomain.apply(d, col, Z) if d <= self.codomain.top else {}
                if left != right:
                    raise AlgebraError(f"map does not commute with boundaries at degree {d}, column {j}")


def simplex_image(f: Mapping[int, int], s: Simplex) -> tuple[int, Simplex | None]:
    """Oriented image of a simplex: ``(sign, simplex)`` or ``(0, None)`` when collapsed."""
    img = [f[v] for v in s]
    if len(set(img)) < len(img):
        return 0, None
    # sign of the sorting permutation
    sign = 1
    arr = list(img)
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(arr)


def simplicial_chain_map(f: Mapping[int, int], C: ChainComplex, D: ChainComplex, check: bool = True) -> ChainMap:
    """Chain map of a vertex map between complexes labelled by simplices.

    Degenerate images go to zero.  An image simplex missing from ``D``'s
    basis raises ``AlgebraError``; so does failure to commute with ``∂``.
    """
    index = [{s: i for i, s in enumerate(l)} for l in D.labels]
    columns = []
    for d, level in enumerate(C.labels):
        cols = []
        for s in level:
            sign, t = simplex_image(f, s)
            if not sign:
                cols.append({})
                continue
            if d >= len(index) or t not in index[d]:
                raise AlgebraError(f"image {t} of {s} is not a basis element of the target")
            cols.append({index[d][t]: sign})
        columns.append(cols)
    m = ChainMap(C, D, columns)
    if check:
        m.check()
    return m


# -- homology results -------------------------------------------------------------------------

@dataclass
class HomologyResult:
    ring: Ring
    betti: list[int]
    torsion: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.torsion:
            self.torsion = [[] for _ in self.betti]
        while len(self.betti) > 1 and self.betti[-1] == 0 and not self.torsion[-1]:
            self.betti.pop()
            self.torsion.pop()
        for t in self.torsion:
            if any(x <= 1 for x in t) or any(t[i + 1] % t[i] for i in range(len(t) - 1)):
                raise AlgebraError(f"bad torsion coefficients {t}")

    def to_json(self) -> list[dict]:
        return [{"degree": d, "betti": b, "torsion": list(t)} for d, (b, t) in enumerate(zip(self.betti, self.torsion))]

    def betti_at(self, d: int) -> int:
        return self.betti[d] if 0 <= d < len(self.betti) else 0

    def torsion_at(self, d: int) -> list[int]:
        return self.torsion[d] if 0 <= d < len(self.torsion) else []

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomologyResult):
            return NotImplemented
        n = max(len(self.betti), len(other.betti))
        return all(self.betti_at(d) == other.betti_at(d) and self.torsion_at(d) == other.torsion_at(d) for d in range(n))

    def __repr__(self) -> str:
        parts = []
        for b, t in zip(self.betti, self.torsion):
            parts.append(str(b) + ("+" + "+".join(f"Z/{x}" for x in t) if t else ""))
        return f"H[{self.ring}]({', '.join(parts)})"


def _normalize_torsion(facs: list[int]) -> list[int]:
    return sorted(f for f in facs if f > 1)


def homology(C: ChainComplex, ring: Ring | None = None) -> HomologyResult:
    """Homology of a chain complex; torsion is reported over the integers only."""
    ring = ring or C.ring
    top = C.top
    if ring.kind == "Z":
        info = [(0, [])] + [invariant_factors(C.cols(d)) for d in range(1, top + 1)] + [(0, [])]
        betti = [C.rank(d) - info[d][0] - info[d + 1][0] for d in range(top + 1)]
        torsion = [_normalize_torsion(info[d + 1][1]) for d in range(top + 1)]
        return HomologyResult(Z, betti, torsion)
    sq = Subquotient(C, ring=ring)
    return sq.result()


# -- subquotients over a field -------------------------------------------------------------------

@dataclass
class _Group:
    degree: int
    cycles: list[SparseVec]
    boundaries: Echelon
    reps: list[SparseVec]
    pivots: list[int]

    @property
    def dim(self) -> int:
        return len(self.reps)


class Subquotient:
    """Homology of ``W/U`` for boundary-stable subspaces ``U ⊆ W ⊆ C``.

    ``W[d]`` and ``U[d]`` are lists of spanning vectors in the coordinates of
    ``C``; ``W=None`` means all of ``C`` and ``U=None`` means zero.  Works over
    a field.  Cycles are ``{x ∈ W : ∂x ∈ U}`` and boundaries ``∂W + U``.
    """

    def __init__(self, C: ChainComplex, W: Sequence[Sequence[SparseVec]] | None = None, U: Sequence[Sequence[SparseVec]] | None = None, ring: Ring | None = None, check: bool = True):
        ring = ring or C.ring
        if ring.kind == "Z":
            ring = Q
        self.C, self.ring = C, ring
        top = C.top
        self.top = top
        self.W = None if W is None else [[to_field(v, ring) for v in (W[d] if d < len(W) else [])] for d in range(top + 1)]
        self.U = [[] for _ in range(top + 1)] if U is None else [[to_field(v, ring) for v in (U[d] if d < len(U) else [])] for d in range(top + 1)]
        self._reductions: dict[int, tuple] = {}
        self._groups: dict[int, _Group] = {}
        self._uech: dict[int, Echelon] = {}
        if check:
            self._check()

    def _w(self, d: int) -> list[SparseVec]:
        if d < 0 or d > self.top:
            return []
        if self.W is None:
            one = self.ring.one
            return [{j: one} for j in range(self.C.rank(d))]
        return self.W[d]

    def u_echelon(self, d: int) -> Echelon:
        if d not in self._uech:
            e = Echelon(self.ring)
            for v in (self.U[d] if 0 <= d <= self.top else []):
                e.add(v)
            self._uech[d] = e
        return self._uech[d]

    def w_echelon(self, d: int) -> Echelon | None:
        if self.W is None:
            return None
        e = Echelon(self.ring)
        for v in self.W[d]:
            e.add(v)
        return e

    def _check(self) -> None:
        for d in range(self.top + 1):
            if self.U[d] and self.W is not None:
                we = self.w_echelon(d)
                if not all(we.contains(u) for u in self.U[d]):
                    raise AlgebraError(f"U is not contained in W in degree {d}")
            if d >= 1:
                ue = self.u_echelon(d - 1)
                for u in self.U[d]:
                    if not ue.contains(self.C.apply(d, u, self.ring)):
                        raise AlgebraError(f"U is not boundary-stable in degree {d}")
                if self.W is not None:
                    we = self.w_echelon(d - 1)
                    for w in self.W[d]:
                        if not we.contains(self.C.apply(d, w, self.ring)):
                            raise AlgebraError(f"W is not boundary-stable in degree {d}")

    def _reduce(self, d: int):
        """Reduce ``∂W_d`` modulo ``U_{d-1}``: relative cycles and the echelon of ``∂W_d + U_{d-1}``."""
        if d in self._reductions:
            return self._reductions[d]
        ring = self.ring
        ws = self._w(d)
        if d == 0 or d > self.top:
            cycles = list(ws)
            ech = Echelon(ring, track=True)
            if 0 <= d - 1 <= self.top:
                for u in self.U[d - 1]:
                    ech.add(u, {})
            self._reductions[d] = (cycles, ech)
            return self._reductions[d]
        ech = Echelon(ring, track=True)
        for u in self.U[d - 1]:
            ech.add(u, {})
        cols = self.C.field_cols(d, ring)
        cycles = []
        axpy = _axpy(ring)
        one = ring.one
        for j, w in enumerate(ws):
            bw = apply_sparse(cols, w, ring)
            combo = ech.add_or_kernel(bw, {j: one})
            if combo is not None:
                z: SparseVec = {}
                for k, c in combo.items():
                    axpy(z, c, ws[k])
                if z:
                    cycles.append(z)
        self._reductions[d] = (cycles, ech)
        return self._reductions[d]

    def group(self, d: int) -> _Group:
        if d in self._groups:
            return self._groups[d]
        cycles, _ = self._reduce(d)
        _, bech = self._reduce(d + 1)
        reduced = []
        for z in cycles:
            r, _ = bech.full_reduce(z)
            if r:
                reduced.append(r)
        reps = rref(reduced, self.ring)
        g = _Group(d, cycles, bech, reps, [max(r) for r in reps])
        self._groups[d] = g
        return g

    def dim(self, d: int) -> int:
        if d < 0 or d > self.top:
            return 0
        return self.group(d).dim

    def betti(self) -> list[int]:
        return [self.dim(d) for d in range(self.top + 1)]

    def result(self) -> HomologyResult:
        return HomologyResult(self.ring, self.betti())

    def reps(self, d: int) -> list[SparseVec]:
        return self.group(d).reps if 0 <= d <= self.top else []

    def coordinates(self, d: int, z: SparseVec) -> list:
        """Coordinates of the class of the relative cycle ``z`` in the canonical basis."""
        if d < 0 or d > self.top:
            return []
        g = self.group(d)
        r, _ = g.boundaries.full_reduce(z)
        coords = [r.get(p, self.ring.zero) for p in g.pivots]
        check = dict(r)
        axpy = _axpy(self.ring)
        for c, rep in zip(coords, g.reps):
            if c:
                axpy(check, self.ring.norm(-c), rep)
        if check:
            raise AlgebraError(f"vector is not a relative cycle in degree {d}")
        return coords

    def is_cycle(self, d: int, z: SparseVec) -> bool:
        if d == 0:
            return True
        return self.u_echelon(d - 1).contains(self.C.apply(d, z, self.ring))

    def map_to(self, target: "Subquotient", d: int, f: Callable[[SparseVec], SparseVec] | None = None) -> list[list]:
        """Matrix (rows = target basis) of the map on ``H_d`` induced by ``f`` (default: identity on coordinates)."""
        cols = []
        for rep in self.reps(d):
            img = f(rep) if f is not None else rep
            img = to_field(img, self.ring)
            cols.append(target.coordinates(d, img))
        return _columns_to_rows(cols, target.dim(d))


def _columns_to_rows(cols: list[list], nrows: int) -> list[list]:
    return [[c[i] for c in cols] for i in range(nrows)]


def subquotient_homology(C: ChainComplex, A: Sequence[Sequence[SparseVec]], ring: Ring | None = None) -> HomologyResult:
    """Homology of ``C/A`` for a boundary-stable ``A`` given by spanning columns.

    Over a field this uses :class:`Subquotient`; over the integers ``A`` must
    span a saturated sublattice (so ``C/A`` is free) and the computation is
    done densely in an adapted basis.
    """
    ring = ring or C.ring
    if ring.is_field:
        return Subquotient(C, None, A, ring).result()
    return integer_subquotient_homology(C, None, A)


# -- integer subquotients ------------------------------------------------------------------------

class _Lattice:
    """Dense lattice basis with integer solving (via Smith form)."""

    def __init__(self, vectors: list[SparseVec], n: int):
        M = IntMatrix.from_columns(vectors, n)
        D, Ub, Vb = smith_normal_form(M)
        self.n = n
        self.D, self.U, self.V = D, Ub, Vb
        self.rank = sum(1 for i in range(min(D.rows, D.cols)) if D.data[i][i])
        # basis: columns of M V restricted to the nonzero diagonal (these span the lattice)
        MV = M @ Vb
        self.basis = [{i: MV.data[i][j] for i in range(n) if MV.data[i][j]} for j in range(self.rank)]
        self.saturated = all(D.data[i][i] == 1 for i in range(self.rank))

    def solve(self, x: SparseVec) -> list[int]:
        """Integer coordinates of ``x`` on ``self.basis``."""
        ux = [sum(self.U.data[i][k] * a for k, a in x.items()) for i in range(self.n)]
        out = []
        for i in range(self.rank):
            q, r = divmod(ux[i], self.D.data[i][i])
            if r:
                raise AlgebraError("vector is not in the lattice")
            out.append(q)
        if any(ux[i] for i in range(self.rank, self.n)):
            raise AlgebraError("vector is not in the lattice")
        return out


def integer_subquotient_homology(C: ChainComplex, W: Sequence[Sequence[SparseVec]] | None, U: Sequence[Sequence[SparseVec]] | None) -> HomologyResult:
    """Integral homology of ``W/U`` when ``U`` is saturated in ``W``.

    Dense; intended for small complexes.  ``W=None`` means all of ``C``.
    """
    top = C.top
    Ws = []
    for d in range(top + 1):
        if W is None:
            Ws.append([{j: 1} for j in range(C.rank(d))])
        else:
            Ws.append(list(W[d]) if d < len(W) else [])
    bases, quots = [], []
    for d in range(top + 1):
        lw = _Lattice(Ws[d], C.rank(d)) if Ws[d] else None
        m = lw.rank if lw else 0
        us = list(U[d]) if U is not None and d < len(U) else []
        coords = [lw.solve(u) for u in us if u] if lw else []
        if coords:
            cu = IntMatrix.from_rows([[c[i] for c in coords] for i in range(m)])
            D, P, _ = smith_normal_form(cu)
            r = sum(1 for i in range(min(D.rows, D.cols)) if D.data[i][i])
            if any(D.data[i][i] != 1 for i in range(r)):
                raise AlgebraError(f"subcomplex is not saturated in degree {d}")
        else:
            P, r = IntMatrix.identity(m), 0
        bases.append(lw)
        quots.append((P, r, m))
    # quotient basis vectors in degree d: W-basis combinations given by columns r.. of P^{-1}
    labels, boundary = [], []
    for d in range(top + 1):
        P, r, m = quots[d]
        labels.append(list(range(m - r)))
        if d == 0 or m - r == 0:
            boundary.append([{} for _ in range(m - r)])
            continue
        Pinv = _unimodular_inverse(P)
        lw, lprev = bases[d], bases[d - 1]
        Pp, rp, mp = quots[d - 1]
        cols = []
        for j in range(r, m):
            combo = {k: Pinv.data[k][j] for k in range(m) if Pinv.data[k][j]}
            vec: SparseVec = {}
            for k, c in combo.items():
                _axpy(Z)(vec, c, lw.basis[k])
            bvec = C.apply(d, vec, Z)
            if not bvec:
                cols.append({})
                continue
            x = lprev.solve(bvec)
            y = [sum(Pp.data[i][k] * x[k] for k in range(mp)) for i in range(mp)]
            cols.append({i - rp: y[i] for i in range(rp, mp) if y[i]})
        boundary.append(cols)
    return homology(ChainComplex(labels, boundary, Z))


def _unimodular_inverse(P: IntMatrix) -> IntMatrix:
    n = P.rows
    A = [list(map(int, r)) + [int(i == j) for j in range(n)] for i, r in enumerate(P.data)]
    for c in range(n):
        piv = next(i for i in range(c, n) if A[i][c])
        A[c], A[piv] = A[piv], A[c]
        # unimodular with integer inverse: gcd-reduce the column below
        for i in range(c + 1, n):
            while A[i][c]:
                q = A[c][c] // A[i][c]
                A[c] = [a - q * b for a, b in zip(A[c], A[i])]
                A[c], A[i] = A[i], A[c]
        if A[c][c] < 0:
            A[c] = [-a for a in A[c]]
    for c in range(n - 1, -1, -1):
        if A[c][c] != 1:
            raise AlgebraError("matrix is not unimodular")
        for i in range(c):
            q = A[i][c]
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[c])]
    return IntMatrix(n, n, [r[n:] for r in A])


def lattice_homology(C: ChainComplex, W: Sequence[Sequence[SparseVec]]) -> HomologyResult:
    """Integral homology of a subcomplex spanned by bases of saturated sublattices.

    With ``W_d`` saturated, the cycles ``W_d ∩ ker ∂`` are saturated in
    ``C_d``, so torsion is read off the invariant factors of ``∂W_{d+1}``
    taken in the ambient coordinates.  Fast and sparse.
    """
    top = C.top
    info = [(0, [])]
    for d in range(1, top + 1):
        cols = [C.apply(d, w, Z) for w in W[d]]
        info.append(invariant_factors(cols))
    info.append((0, []))
    betti = [len(W[d]) - info[d][0] - info[d + 1][0] for d in range(top + 1)]
    torsion = [_normalize_torsion(info[d + 1][1]) for d in range(top + 1)]
    return HomologyResult(Z, betti, torsion)


# -- connecting maps and exactness ------------------------------------------------------------------

def connecting_map(C: ChainComplex, A: Sequence[Sequence[SparseVec]] | None, B: Sequence[Sequence[SparseVec]] | None, d: int, ambient: Sequence[Sequence[SparseVec]] | None = None, ring: Ring = Q) -> list[list]:
    """Connecting homomorphism ``H_d(W/A) -> H_{d-1}(A/B)`` of a triple ``B ⊆ A ⊆ W``.

    ``W`` is ``ambient`` (default all of ``C``).  The class of a relative
    cycle ``x`` goes to the class of ``∂x``, in canonical bases.
    """
    top = Subquotient(C, ambient, A, ring)
    bottom = Subquotient(C, A, B, ring)
    return connecting_between(top, bottom, d)


def connecting_between(top: Subquotient, bottom: Subquotient, d: int) -> list[list]:
    cols = [bottom.coordinates(d - 1, top.C.apply(d, rep, top.ring)) for rep in top.reps(d)]
    return _columns_to_rows(cols, bottom.dim(d - 1))


@dataclass
class ExactnessReport:
    ok: bool
    nodes: int
    failures: list[tuple[int, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "nodes": self.nodes, "failures": [{"node": n, "reason": r} for n, r in self.failures]}


def _mat_rank(M: list[list], ring: Ring) -> int:
    if ring.kind == "Z":
        ring = Q
    cols = []
    ncols = len(M[0]) if M else 0
    for j in range(ncols):
        cols.append({i: ring.elem(M[i][j]) for i in range(len(M)) if M[i][j]})
    e = Echelon(ring)
    for c in cols:
        e.add(c)
    return e.dim


def _mat_mul(A: list[list], B: list[list], ring: Ring, inner: int) -> list[list]:
    rows = len(A)
    cols = len(B[0]) if B else 0
    return [[ring.norm(sum(A[i][k] * B[k][j] for k in range(inner))) for j in range(cols)] for i in range(rows)]


def check_exact(maps: Sequence[list[list]], dims: Sequence[int], ring: Ring = Q) -> ExactnessReport:
    """Check exactness of ``V_0 -M_1-> V_1 -M_2-> ... -> V_k``.

    ``maps[i]`` is the matrix of ``V_i -> V_{i+1}`` (rows = ``dims[i+1]``).
    Exactness is checked at the interior nodes ``V_1..V_{k-1}``: the
    composite vanishes and ``rank M_i + rank M_{i+1} = dim V_i``.  Over the
    integers the ranks are taken over the rationals, so only the free parts
    are checked.
    """
    if len(dims) != len(maps) + 1:
        raise AlgebraError("need one more dimension than maps")
    failures = []
    for i, M in enumerate(maps):
        if len(M) != dims[i + 1] or any(len(r) != dims[i] for r in M):
            failures.append((i, f"map {i} has the wrong shape"))
    if failures:
        return ExactnessReport(False, len(dims), failures)
    for node in range(1, len(dims) - 1):
        f, g = maps[node - 1], maps[node]
        comp = _mat_mul(g, f, ring, dims[node])
        if any(x for r in comp for x in r):
            failures.append((node, "composite is nonzero"))
            continue
        if _mat_rank(f, ring) + _mat_rank(g, ring) != dims[node]:
            failures.append((node, "image is smaller than kernel"))
    return ExactnessReport(not failures, len(dims), failures)


def identity_matrix(n: int, ring: Ring = Q) -> list[list]:
    return [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]


def triple_sequence(C: ChainComplex, A, B, W=None, ring: Ring = Q) -> tuple[list[list[list]], list[int], list[str]]:
    """Long exact sequence of the triple ``B ⊆ A ⊆ W`` as matrices and dimensions.

    Order: ``... -> H_d(A/B) -> H_d(W/B) -> H_d(W/A) -> H_{d-1}(A/B) -> ...``
    from the top degree down to degree zero.
    """
    ab = Subquotient(C, A, B, ring)
    wb = Subquotient(C, W, B, ring)
    wa = Subquotient(C, W, A, ring)
    maps, dims, names = [], [], []
    for d in range(C.top, -1, -1):
        if not dims:
            dims.append(ab.dim(d))
            names.append(f"H{d}(A/B)")
        maps.append(ab.map_to(wb, d))
        dims.append(wb.dim(d))
        names.append(f"H{d}(W/B)")
        maps.append(wb.map_to(wa, d))
        dims.append(wa.dim(d))
        names.append(f"H{d}(W/A)")
        if d > 0:
            maps.append(connecting_between(wa, ab, d))
            dims.append(ab.dim(d - 1))
            names.append(f"H{d - 1}(A/B)")
    return maps, dims, names


def intersect_spans(U: list[SparseVec], V: list[SparseVec], ring: Ring) -> list[SparseVec]:
    """Basis of ``span U ∩ span V``."""
    from .linalg import kernel_and_image

    neg = [{k: ring.norm(-a) for k, a in v.items()} for v in V]
    kernel, _ = kernel_and_image([to_field(u, ring) for u in U] + [to_field(v, ring) for v in neg], ring)
    axpy = _axpy(ring)
    out = []
    for combo in kernel:
        x: SparseVec = {}
        for j, c in combo.items():
            if j < len(U):
                axpy(x, c, to_field(U[j], ring))
        if x:
            out.append(x)
    e = Echelon(ring)
    for x in out:
        e.add(x)
    return e.basis()


def mayer_vietoris(C: ChainComplex, A, B, inter=None, ring: Ring = Q) -> tuple[list[list[list]], list[int], list[str], dict]:
    """Mayer–Vietoris sequence of boundary-stable subspaces ``A``, ``B`` of ``C``.

    ``inter`` is a basis of ``A ∩ B`` (computed when omitted).  The union
    term is the sum complex ``A + B``; the returned info records whether it
    fills the ambient complex, which is how a proper inclusion
    ``IC(A) + IC(B) ⊊ IC(A ∪ B)`` shows up.
    """
    top = C.top
    A = [[to_field(v, ring) for v in A[d]] if d < len(A) else [] for d in range(top + 1)]
    B = [[to_field(v, ring) for v in B[d]] if d < len(B) else [] for d in range(top + 1)]
    if inter is None:
        inter = [intersect_spans(A[d], B[d], ring) for d in range(top + 1)]
    S = [A[d] + B[d] for d in range(top + 1)]
    hI = Subquotient(C, inter, None, ring)
    hA = Subquotient(C, A, None, ring)
    hB = Subquotient(C, B, None, ring)
    hS = Subquotient(C, S, None, ring)
    neg = lambda v: {k: ring.norm(-a) for k, a in v.items()}
    maps, dims, names = [], [], []
    for d in range(top, -1, -1):
        if not dims:
            dims.append(hI.dim(d))
            names.append(f"H{d}(A∩B)")
        # H(A∩B) -> H(A) ⊕ H(B): x ↦ (x, -x)
        ma = hI.map_to(hA, d)
        mb = hI.map_to(hB, d, neg)
        maps.append(ma + mb)
        dims.append(hA.dim(d) + hB.dim(d))
        names.append(f"H{d}(A)+H{d}(B)")
        # H(A) ⊕ H(B) -> H(A+B): (a, b) ↦ a + b
        sa = hA.map_to(hS, d)
        sb = hB.map_to(hS, d)
        maps.append([ra + rb for ra, rb in zip(sa, sb)] if sa or sb else [[] for _ in range(hS.dim(d))])
        if not sa and not sb:
            maps[-1] = [[ring.zero] * (hA.dim(d) + hB.dim(d)) for _ in range(hS.dim(d))]
        dims.append(hS.dim(d))
        names.append(f"H{d}(A+B)")
        if d > 0:
            maps.append(_mv_connecting(C, hS, hI, A[d], B[d], d, ring))
            dims.append(hI.dim(d - 1))
            names.append(f"H{d - 1}(A∩B)")
    fills = all(Echelon_dim(S[d], ring) == C.rank(d) for d in range(top + 1))
    return maps, dims, names, {"sum_fills_ambient": fills}


def Echelon_dim(vectors: list[SparseVec], ring: Ring) -> int:
    e = Echelon(ring)
    for v in vectors:
        e.add(v)
    return e.dim


def _mv_connecting(C: ChainComplex, hS: Subquotient, hI: Subquotient, Ad, Bd, d, ring):
    vecs = list(Ad) + list(Bd)
    e = Echelon(ring, track=True)
    for j, v in enumerate(vecs):
        e.add(v, {j: ring.one})
    axpy = _axpy(ring)
    cols = []
    for z in hS.reps(d):
        rem, combo = e.reduce(z, {})
        # z = -combo applied to vecs; reduce returns z + Σ c_j v_j = rem = 0
        if rem:
            raise AlgebraError("cycle is not in A + B")
        a: SparseVec = {}
        for j, c in combo.items():
            if j < len(Ad):
                axpy(a, ring.norm(-c), vecs[j])
        cols.append(hI.coordinates(d - 1, C.apply(d, a, ring)))
    return _columns_to_rows(cols, hI.dim(d - 1))


def homology_map(f: ChainMap, ring: Ring = Q, source: Subquotient | None = None, target: Subquotient | None = None) -> list[list[list]]:
    """Matrices of ``f_*`` on homology in canonical bases, one per degree."""
    src = source or Subquotient(f.domain, ring=ring)
    tgt = target or Subquotient(f.codomain, ring=ring)
    ring = src.ring
    out = []
    for d in range(f.domain.top + 1):
        if d > f.codomain.top:
            out.append([[] for _ in range(0)])
            continue
        cols = f.columns[d]
        out.append(src.map_to(tgt, d, lambda v, cols=cols: apply_sparse(cols, v, ring)))
    return out


def induced_map(f: Mapping[int, int], C: ChainComplex, D: ChainComplex, ring: Ring = Q) -> tuple[ChainMap, list[list[list]]]:
    """Chain map of a simplicial vertex map and its action on homology."""
    m = simplicial_chain_map(f, C, D)
    return m, homology_map(m, ring)
