"""Exact sparse and dense linear algebra.

Two engines live here:

* order-respecting column reduction over a field (:class:`Echelon`), whose
  pivot of a vector is its largest nonzero index.  With coordinates sorted by
  filtration level this keeps every basis compatible with the filtration.
* unit-pivot sparse elimination over the integers followed by a dense Smith
  normal form on whatever is left; used for invariant factors, ranks and
  saturated kernel lattices.

Sparse vectors are dicts ``{index: value}`` holding no zeros.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

from .rings import Ring, Z

SparseVec = dict


# -- dense integer matrices --------------------------------------------------------

@dataclass
class IntMatrix:
    """Dense matrix of exact integers (or field elements), row-major."""

    rows: int
    cols: int
    data: list

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        m = cls.zeros(n, n)
        for i in range(n):
            m.data[i][i] = 1
        return m

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "IntMatrix":
        data = [list(r) for r in rows]
        c = len(data[0]) if data else (ncols or 0)
        if any(len(r) != c for r in data):
            raise ValueError("ragged rows")
        return cls(len(data), c, data)

    @classmethod
    def from_columns(cls, cols: Sequence[SparseVec], nrows: int) -> "IntMatrix":
        m = cls.zeros(nrows, len(cols))
        for j, col in enumerate(cols):
            for i, a in col.items():
                m.data[i][j] = a
        return m

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = IntMatrix.zeros(self.rows, other.cols)
        ot = list(zip(*other.data)) if other.rows else [()] * other.cols
        for i, row in enumerate(self.data):
            nz = [(k, a) for k, a in enumerate(row) if a]
            for j in range(other.cols):
                col = ot[j]
                out.data[i][j] = sum(a * col[k] for k, a in nz) if nz else 0
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, IntMatrix) and self.shape == other.shape and self.data == other.data

    def is_zero(self) -> bool:
        return all(not a for r in self.data for a in r)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, [list(c) for c in zip(*self.data)] if self.rows else [[] for _ in range(self.cols)])

    def columns(self) -> list[SparseVec]:
        return [{i: self.data[i][j] for i in range(self.rows) if self.data[i][j]} for j in range(self.cols)]

    def tolist(self) -> list[list]:
        return [list(r) for r in self.data]

    def to_json(self, ring: Ring | None = None) -> dict:
        conv = (lambda x: ring.to_json(x)) if ring is not None else int
        return {"shape": [self.rows, self.cols], "data": [[conv(a) for a in r] for r in self.data]}

    def __repr__(self) -> str:
        return f"IntMatrix({self.data})"


def determinant(M: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = M.rows
    if n != M.cols:
        raise ValueError("square matrix required")
    if n == 0:
        return 1
    a = [list(r) for r in M.data]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# -- Smith normal form ----------------------------------------------------------------

def smith_normal_form(M: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(D, U, V)`` with ``U @ M @ V == D`` and ``U``, ``V`` unimodular.

    Diagonal entries are nonnegative and each divides the next.  The pivot at
    every stage is the entry of least absolute value, which keeps intermediate
    entries small.
    """
    m, n = M.rows, M.cols
    A = [list(r) for r in M.data]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):          # row_dst -= q * row_src
        ra, rs = A[dst], A[src]
        for k in range(n):
            if rs[k]:
                ra[k] -= q * rs[k]
        ua, us = U[dst], U[src]
        for k in range(m):
            if us[k]:
                ua[k] -= q * us[k]

    def add_col(dst, src, q):          # col_dst -= q * col_src
        for r in A:
            if r[src]:
                r[dst] -= q * r[src]
        for r in V:
            if r[src]:
                r[dst] -= q * r[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = A[i][j]
                if a and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            piv = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, A[i][t] // piv)
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, A[t][j] // piv)
            rest = [(abs(A[i][t]), i, "r") for i in range(t + 1, m) if A[i][t]]
            rest += [(abs(A[t][j]), j, "c") for j in range(t + 1, n) if A[t][j]]
            if rest:
                _, k, kind = min(rest)
                if kind == "r":
                    swap_rows(t, k)
                else:
                    swap_cols(t, k)
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % piv), None)
            if bad is None:
                break
            add_row(t, bad[0], -1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return IntMatrix(m, n, A), IntMatrix(m, m, U), IntMatrix(n, n, V)


def _dense_invariant_factors(A: list[list[int]]) -> list[int]:
    """Nonzero invariant factors of a dense integer matrix (no transforms)."""
    m = len(A)
    n = len(A[0]) if A else 0
    A = [list(r) for r in A]
    out = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                a = row[j]
                if a and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        for r in A:
            r[t], r[j] = r[j], r[t]
        while True:
            piv = A[t][t]
            for i in range(t + 1, m):
                q = A[i][t] // piv
                if q:
                    ri, rt = A[i], A[t]
                    for k in range(t, n):
                        if rt[k]:
                            ri[k] -= q * rt[k]
            for j in range(t + 1, n):
                q = A[t][j] // piv
                if q:
                    for r in A:
                        if r[t]:
                            r[j] -= q * r[t]
            rest = [(abs(A[i][t]), i, 0) for i in range(t + 1, m) if A[i][t]]
            rest += [(abs(A[t][j]), j, 1) for j in range(t + 1, n) if A[t][j]]
            if rest:
                _, k, kind = min(rest)
                if kind == 0:
                    A[t], A[k] = A[k], A[t]
                else:
                    for r in A:
                        r[t], r[k] = r[k], r[t]
                continue
            bad = next((i for i in range(t + 1, m) if any(A[i][j] % piv for j in range(t + 1, n))), None)
            if bad is None:
                break
            rt, rb = A[t], A[bad]
            for k in range(t, n):
                rt[k] += rb[k]
        out.append(abs(A[t][t]))
        t += 1
    return out


# -- sparse elimination ------------------------------------------------------------------

def _axpy(ring: Ring):
    """``v += c * u`` in place, dropping zeros."""
    if ring.kind == "Fp":
        p = ring.p

        def axpy(v, c, u):
            get = v.get
            for k, a in u.items():
                nv = (get(k, 0) + c * a) % p
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
    else:
        def axpy(v, c, u):
            get = v.get
            for k, a in u.items():
                nv = get(k, 0) + c * a
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
    return axpy


class _SparseEliminator:
    """Markowitz-style pivoting on a sparse column matrix.

    Over the integers only unit pivots are taken; over a field any nonzero
    entry is a pivot.  Each pivot removes one row and one column, leaving
    the Smith form of the remainder unchanged (up to a unit invariant).
    """

    def __init__(self, cols: Sequence[SparseVec], ring: Ring, track: bool = False):
        self.ring = ring
        self.cols = {j: dict(c) for j, c in enumerate(cols) if c or track}
        self.rows: dict[int, set[int]] = {}
        for j, c in self.cols.items():
            for i in c:
                self.rows.setdefault(i, set()).add(j)
        self.track = track
        self.combos = {j: {j: ring.one} for j in self.cols} if track else None
        self.rank = 0
        self.axpy = _axpy(ring)

    def _is_pivot(self, a) -> bool:
        return a in (1, -1) if self.ring.kind == "Z" else bool(a)

    def run(self):
        heap = [(len(c), j) for j, c in self.cols.items() if c]
        heapq.heapify(heap)
        cols, rows = self.cols, self.rows
        ring = self.ring
        while heap:
            nnz, c = heapq.heappop(heap)
            col = cols.get(c)
            if col is None or not col:
                continue
            if len(col) != nnz:
                heapq.heappush(heap, (len(col), c))
                continue
            best = None
            for r, a in col.items():
                if self._is_pivot(a):
                    cost = len(rows[r])
                    if best is None or cost < best[0]:
                        best = (cost, r)
                        if cost == 1:
                            break
            if best is None:
                continue
            r = best[1]
            u = col[r]
            uinv = ring.inv(u)
            del cols[c]
            for rr in col:
                rows[rr].discard(c)
            others = rows.pop(r)
            for c2 in others:
                col2 = cols[c2]
                q = ring.norm(col2.pop(r) * uinv)
                for rr, val in col.items():
                    if rr == r:
                        continue
                    had = rr in col2
                    nv = ring.norm(col2.get(rr, 0) - q * val)
                    if nv:
                        col2[rr] = nv
                        if not had:
                            rows[rr].add(c2)
                    elif had:
                        del col2[rr]
                        rows[rr].discard(c2)
                if self.track:
                    self.axpy(self.combos[c2], ring.norm(-q), self.combos[c])
                heapq.heappush(heap, (len(col2), c2))
            if self.track:
                del self.combos[c]
            self.rank += 1
        return self

    def residual(self) -> tuple[list[int], list[int], list[list]]:
        live = sorted(j for j, c in self.cols.items() if c)
        rws = sorted({i for j in live for i in self.cols[j]})
        rindex = {i: k for k, i in enumerate(rws)}
        dense = [[0] * len(live) for _ in rws]
        for k, j in enumerate(live):
            for i, a in self.cols[j].items():
                dense[rindex[i]][k] = a
        return live, rws, dense


def invariant_factors(cols: Sequence[SparseVec]) -> tuple[int, list[int]]:
    """Rank and the invariant factors greater than one of an integer matrix."""
    el = _SparseEliminator(cols, Z).run()
    _, _, dense = el.residual()
    facs = _dense_invariant_factors(dense) if dense else []
    rank = el.rank + len(facs)
    return rank, sorted(f for f in facs if f > 1)


def sparse_rank(cols: Sequence[SparseVec], ring: Ring) -> int:
    if ring.kind == "Z":
        return invariant_factors(cols)[0]
    el = _SparseEliminator([{i: ring.elem(a) for i, a in c.items()} for c in cols], ring).run()
    return el.rank


def integer_kernel(cols: Sequence[SparseVec]) -> list[SparseVec]:
    """Basis of the (saturated) integer kernel lattice of a column matrix.

    Kernel vectors are returned as sparse combinations of column indices.
    """
    el = _SparseEliminator(cols, Z, track=True).run()
    kernel = [el.combos[j] for j, c in sorted(el.cols.items()) if not c]
    live, rws, dense = el.residual()
    if live:
        # unimodular column echelon of the residual, tracking combinations
        k = len(live)
        combos = [el.combos[j] for j in live]
        A = dense
        axpy = _axpy(Z)
        start = 0
        for i in range(len(rws)):
            if start >= k:
                break
            row = A[i]
            while True:
                nz = [(abs(row[j]), j) for j in range(start, k) if row[j]]
                if len(nz) <= 1:
                    break
                nz.sort()
                _, p = nz[0]
                for _, j in nz[1:]:
                    q = row[j] // row[p]
                    for r in A:
                        if r[p]:
                            r[j] -= q * r[p]
                    axpy(combos[j], -q, combos[p])
            nz = [j for j in range(start, k) if row[j]]
            if nz:
                p = nz[0]
                for r in A:
                    r[start], r[p] = r[p], r[start]
                combos[start], combos[p] = combos[p], combos[start]
                start += 1
        kernel.extend(combos[start:])
    return kernel


# -- echelon forms over a field --------------------------------------------------------------

class Echelon:
    """Subspace of ``F^n`` kept in column-echelon form.

    Each basis vector is normalized to coefficient one at its pivot, the
    largest index of its support, and pivots are distinct.  Optionally the
    combination of input vectors producing each basis vector is tracked.
    """

    def __init__(self, ring: Ring, track: bool = False):
        if not ring.is_field:
            raise ValueError("Echelon needs a field")
        self.ring = ring
        self.track = track
        self.pivots: dict[int, SparseVec] = {}
        self.combos: dict[int, SparseVec] = {}
        self.axpy = _axpy(ring)

    def __len__(self) -> int:
        return len(self.pivots)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def basis(self) -> list[SparseVec]:
        return [self.pivots[k] for k in sorted(self.pivots)]

    def reduce(self, v: SparseVec, combo: SparseVec | None = None) -> tuple[SparseVec, SparseVec | None]:
        """Eliminate the leading entry until it is not a pivot (partial reduction)."""
        v = dict(v)
        pivots, axpy, norm = self.pivots, self.axpy, self.ring.norm
        while v:
            low = max(v)
            b = pivots.get(low)
            if b is None:
                break
            c = norm(-v[low])
            axpy(v, c, b)
            if combo is not None:
                axpy(combo, c, self.combos[low])
        return v, combo

    def add(self, v: SparseVec, combo: SparseVec | None = None) -> int | None:
        """Insert ``v``; return its pivot, or None when ``v`` was dependent."""
        if self.track and combo is None:
            raise ValueError("tracking echelon needs a combination")
        v, combo = self.reduce(v, dict(combo) if combo is not None else None)
        if not v:
            return None
        low = max(v)
        s = self.ring.inv(v[low])
        if s != 1:
            norm = self.ring.norm
            v = {k: norm(a * s) for k, a in v.items()}
            if combo is not None:
                combo = {k: norm(a * s) for k, a in combo.items()}
        self.pivots[low] = v
        if self.track:
            self.combos[low] = combo
        return low

    def add_or_kernel(self, v: SparseVec, combo: SparseVec) -> SparseVec | None:
        """Insert ``v``; when it is dependent return the tracked combination that kills it."""
        v, combo = self.reduce(v, dict(combo))
        if not v:
            return combo
        low = max(v)
        s = self.ring.inv(v[low])
        if s != 1:
            norm = self.ring.norm
            v = {k: norm(a * s) for k, a in v.items()}
            combo = {k: norm(a * s) for k, a in combo.items()}
        self.pivots[low] = v
        if self.track:
            self.combos[low] = combo
        return None

    def contains(self, v: SparseVec) -> bool:
        return not self.reduce(v)[0]

    def full_reduce(self, v: SparseVec, combo: SparseVec | None = None) -> tuple[SparseVec, SparseVec | None]:
        """Unique representative of ``v + span`` vanishing at every pivot."""
        v = dict(v)
        pivots, axpy, norm = self.pivots, self.axpy, self.ring.norm
        heap = [-k for k in v if k in pivots]
        heapq.heapify(heap)
        seen = set()
        while heap:
            k = -heapq.heappop(heap)
            if k in seen:
                continue
            seen.add(k)
            a = v.get(k)
            if not a:
                continue
            b = pivots[k]
            c = norm(-a)
            for kk in b:
                if kk < k and kk in pivots and kk not in v:
                    heapq.heappush(heap, -kk)
            axpy(v, c, b)
            if combo is not None:
                axpy(combo, c, self.combos[k])
            for kk in b:
                if kk < k and kk in pivots:
                    seen.discard(kk)
                    heapq.heappush(heap, -kk)
        return v, combo

    def coordinates(self, v: SparseVec) -> SparseVec:
        """Coefficients of ``v`` (which must lie in the span) on the basis, keyed by pivot."""
        v = dict(v)
        out = {}
        pivots, axpy, norm = self.pivots, self.axpy, self.ring.norm
        while v:
            low = max(v)
            b = pivots.get(low)
            if b is None:
                raise ValueError("vector is not in the span")
            a = v[low]
            out[low] = a
            axpy(v, norm(-a), b)
        return out

    def copy(self) -> "Echelon":
        e = Echelon(self.ring, self.track)
        e.pivots = dict(self.pivots)
        e.combos = dict(self.combos)
        return e


class IntegerEchelon:
    """Lattice basis in echelon form over the integers (pivot = largest index).

    Pivot entries are positive but need not be one; coordinates of a lattice
    vector are found by back substitution with exact division.
    """

    def __init__(self):
        self.pivots: dict[int, SparseVec] = {}
        self.axpy = _axpy(Z)

    def add(self, v: SparseVec) -> None:
        v = dict(v)
        axpy = self.axpy
        while v:
            low = max(v)
            b = self.pivots.get(low)
            if b is None:
                if v[low] < 0:
                    v = {k: -a for k, a in v.items()}
                self.pivots[low] = v
                return
            a, c = v[low], b[low]
            if a % c == 0:
                axpy(v, -(a // c), b)
                continue
            # replace the pivot vector by the gcd combination, keep reducing the other
            g, x, y = _xgcd(c, a)
            new: SparseVec = {}
            axpy(new, x, b)
            axpy(new, y, v)
            rest: SparseVec = {}
            axpy(rest, a // g, b)
            axpy(rest, -(c // g), v)
            self.pivots[low] = new if new[low] > 0 else {k: -t for k, t in new.items()}
            v = rest

    def coordinates(self, v: SparseVec) -> dict[int, int]:
        v = dict(v)
        out = {}
        while v:
            low = max(v)
            b = self.pivots.get(low)
            if b is None or v[low] % b[low]:
                raise ValueError("vector is not in the lattice")
            q = v[low] // b[low]
            out[low] = q
            self.axpy(v, -q, b)
        return out

    def basis(self) -> list[SparseVec]:
        return [self.pivots[k] for k in sorted(self.pivots)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def echelon_of(vectors: Iterable[SparseVec], ring: Ring) -> Echelon:
    e = Echelon(ring)
    for v in vectors:
        e.add(v)
    return e


def kernel_and_image(columns: Sequence[SparseVec], ring: Ring) -> tuple[list[SparseVec], Echelon]:
    """Kernel (as combinations of column indices) and echelon image of a matrix.

    Columns are reduced left to right, so the kernel vector found at column
    ``j`` has largest index ``j`` with coefficient one.
    """
    img = Echelon(ring, track=True)
    kernel = []
    one = ring.one
    for j, col in enumerate(columns):
        v, combo = img.reduce(col, {j: one})
        if not v:
            kernel.append(combo)
            continue
        low = max(v)
        s = ring.inv(v[low])
        norm = ring.norm
        if s != 1:
            v = {k: norm(a * s) for k, a in v.items()}
            combo = {k: norm(a * s) for k, a in combo.items()}
        img.pivots[low] = v
        img.combos[low] = combo
    return kernel, img


def combine(vectors: Sequence[SparseVec], combo: SparseVec, ring: Ring) -> SparseVec:
    out: SparseVec = {}
    axpy = _axpy(ring)
    for j, c in combo.items():
        axpy(out, c, vectors[j])
    return out


def rref(vectors: Iterable[SparseVec], ring: Ring) -> list[SparseVec]:
    """Reduced echelon basis (pivot = largest index), sorted by pivot."""
    e = echelon_of(vectors, ring)
    out: dict[int, SparseVec] = {}
    axpy = _axpy(ring)
    for k in sorted(e.pivots):
        v = dict(e.pivots[k])
        for kk in [x for x in v if x != k and x in out]:
            axpy(v, ring.norm(-v[kk]), out[kk])
        out[k] = v
    return [out[k] for k in sorted(out)]


def apply_sparse(matrix_cols: Sequence[SparseVec], v: SparseVec, ring: Ring) -> SparseVec:
    """Matrix (given by columns) times sparse vector."""
    out: SparseVec = {}
    axpy = _axpy(ring)
    for j, a in v.items():
        col = matrix_cols[j]
        if col:
            axpy(out, a, col)
    return out


def to_field(v: SparseVec, ring: Ring) -> SparseVec:
    out = {}
    for k, a in v.items():
        x = ring.elem(a)
        if x:
            out[k] = x
    return out
