"""Finite simplicial complexes and the PL constructions built on them.

Simplices are plain tuples of strictly increasing integer vertex ids.  A
:class:`SimplicialComplex` keeps one lexicographically sorted tuple of
simplices per dimension, so every matrix derived from it is reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

Simplex = tuple


class ComplexError(ValueError):
    pass


def make_simplex(vertices: Iterable[int]) -> Simplex:
    vs = tuple(sorted(vertices))
    if len(set(vs)) != len(vs):
        raise ComplexError(f"repeated vertex in simplex {vs}")
    if not vs:
        raise ComplexError("empty simplex")
    return vs


def faces(s: Simplex) -> list[Simplex]:
    """Codimension-one faces, ordered by the omitted position."""
    return [s[:j] + s[j + 1:] for j in range(len(s))] if len(s) > 1 else []


def all_faces(s: Simplex) -> Iterable[Simplex]:
    for k in range(1, len(s) + 1):
        yield from combinations(s, k)


class SimplicialComplex:
    """Immutable finite abstract simplicial complex."""

    __slots__ = ("simplices", "_index", "_all")

    def __init__(self, by_dim: Sequence[Iterable[Simplex]]):
        self.simplices: tuple[tuple[Simplex, ...], ...] = tuple(
            tuple(sorted(level)) for level in by_dim
        )
        while self.simplices and not self.simplices[-1]:
            self.simplices = self.simplices[:-1]
        self._index = [
            {s: i for i, s in enumerate(level)} for level in self.simplices
        ]
        self._all: frozenset | None = None

    # -- basic queries -----------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    @property
    def vertex_count(self) -> int:
        return len(self.simplices[0]) if self.simplices else 0

    @property
    def vertices(self) -> list[int]:
        return [s[0] for s in self.simplices[0]] if self.simplices else []

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self.simplices)

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * n for d, n in enumerate(self.f_vector()))

    def n_simplices(self, d: int) -> int:
        return len(self.simplices[d]) if 0 <= d < len(self.simplices) else 0

    def simplices_of_dim(self, d: int) -> tuple[Simplex, ...]:
        return self.simplices[d] if 0 <= d < len(self.simplices) else ()

    def index(self, s: Simplex) -> int:
        return self._index[len(s) - 1][s]

    def __contains__(self, s) -> bool:
        d = len(s) - 1
        return 0 <= d < len(self._index) and s in self._index[d]

    def __iter__(self):
        for level in self.simplices:
            yield from level

    def __len__(self) -> int:
        return sum(self.f_vector())

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and self.simplices == other.simplices

    def __hash__(self) -> int:
        return hash(self.simplices)

    def __repr__(self) -> str:
        return f"SimplicialComplex(f={self.f_vector()})"

    def as_set(self) -> frozenset:
        if self._all is None:
            self._all = frozenset(self)
        return self._all

    def maximal_simplices(self) -> list[Simplex]:
        covered = set()
        for level in self.simplices[1:]:
            for s in level:
                covered.update(faces(s))
        return [s for s in self if s not in covered]

    def relabel(self, mapping: Mapping[int, int]) -> "SimplicialComplex":
        return close([tuple(mapping[v] for v in s) for s in self.maximal_simplices()])

    def full_subcomplex(self, vertices: Iterable[int]) -> "Subcomplex":
        vs = set(vertices)
        return Subcomplex(self, (s for s in self if vs.issuperset(s)))

    def all(self) -> "Subcomplex":
        return Subcomplex(self, self, check=False)

    def empty(self) -> "Subcomplex":
        return Subcomplex(self, (), check=False)


def close(generators: Iterable[Iterable[int]]) -> SimplicialComplex:
    """Smallest simplicial complex containing every generator."""
    seen: set[Simplex] = set()
    for g in generators:
        s = make_simplex(g)
        if s in seen:
            continue
        seen.update(all_faces(s))
    if not seen:
        return SimplicialComplex([])
    top = max(len(s) for s in seen)
    by_dim: list[list[Simplex]] = [[] for _ in range(top)]
    for s in seen:
        by_dim[len(s) - 1].append(s)
    return SimplicialComplex(by_dim)


class Subcomplex:
    """A face-closed set of simplices of a parent complex."""

    __slots__ = ("parent", "members")

    def __init__(self, parent: SimplicialComplex, simplices: Iterable[Simplex], check: bool = True):
        self.parent = parent
        self.members = frozenset(simplices)
        if check:
            for s in self.members:
                if s not in parent:
                    raise ComplexError(f"{s} is not a simplex of the parent complex")
                for f in faces(s):
                    if f not in self.members:
                        raise ComplexError(f"subcomplex not closed: face {f} of {s} missing")

    def __contains__(self, s) -> bool:
        return s in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __repr__(self) -> str:
        return f"Subcomplex({len(self.members)} simplices)"

    @property
    def vertices(self) -> set[int]:
        return {s[0] for s in self.members if len(s) == 1}

    def is_full(self) -> bool:
        vs = self.vertices
        return all(s in self.members for s in self.parent if vs.issuperset(s))

    def as_complex(self) -> SimplicialComplex:
        return close(self.members) if self.members else SimplicialComplex([])

    def union(self, other: "Subcomplex") -> "Subcomplex":
        return Subcomplex(self.parent, self.members | other.members, check=False)

    def intersection(self, other: "Subcomplex") -> "Subcomplex":
        return Subcomplex(self.parent, self.members & other.members, check=False)

    def issubset(self, other: "Subcomplex") -> bool:
        return self.members <= other.members


# -- filtered complexes -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Simplicial complex with closed skeleta ``X_0 <= ... <= X_n``.

    ``skeleta[i]`` is ``X_i``.  Skeleta are full subcomplexes, so each one is
    determined by its vertex set; ``vertex_level[v]`` is the least ``i`` with
    ``v`` in ``X_i``.
    """

    complex: SimplicialComplex
    n: int
    skeleta: tuple[Subcomplex, ...]
    subdivided: int = 0
    vertex_level: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.skeleta) != self.n + 1:
            raise ComplexError("need one skeleton per index 0..n")
        for lo, hi in zip(self.skeleta, self.skeleta[1:]):
            if not lo.issubset(hi):
                raise ComplexError("skeleta are not nested")
        if len(self.skeleta[-1]) != len(self.complex):
            raise ComplexError("X_n must be the whole complex")
        for X in self.skeleta:
            if not X.is_full():
                raise ComplexError("skeleta must be full subcomplexes")
        levels = {}
        for v in self.complex.vertices:
            levels[v] = next(i for i, X in enumerate(self.skeleta) if (v,) in X)
        object.__setattr__(self, "vertex_level", levels)

    def stratum_vertices(self, i: int) -> set[int]:
        return {v for v, lv in self.vertex_level.items() if lv == i}

    def skeleton_vertices(self, i: int) -> set[int]:
        return {v for v, lv in self.vertex_level.items() if lv <= i}

    def simplex_level(self, s: Simplex) -> int:
        """Index of the stratum containing the interior of ``s``."""
        return max(self.vertex_level[v] for v in s)

    def is_pseudomanifold_filtration(self) -> bool:
        if self.n < 2:
            return True
        return self.skeleta[self.n - 1].members == self.skeleta[self.n - 2].members

    def restrict(self, sub: Subcomplex | Iterable[Simplex]) -> "FilteredComplex":
        """Filtered subcomplex with the ambient indices kept verbatim."""
        members = sub.members if isinstance(sub, Subcomplex) else frozenset(sub)
        K = close(members) if members else SimplicialComplex([])
        levels = self.vertex_level
        return FilteredComplex(
            K, self.n,
            tuple(K.full_subcomplex(v for v in K.vertices if levels[v] <= i) for i in range(self.n + 1)),
            self.subdivided,
        )

    def bottom_index(self) -> int:
        return min(self.vertex_level.values())


def filtered_from_vertex_sets(K: SimplicialComplex, n: int, strata: Mapping[int, Iterable[int]] | None = None) -> FilteredComplex:
    """Build ``X_i`` as the full subcomplex on the listed vertices.

    ``strata[i]`` lists vertices of ``X_i``; missing indices inherit from the
    nearest lower listed skeleton, and ``X_n`` is always everything.
    """
    strata = {i: set(v) for i, v in (strata or {}).items()}
    skeleta = []
    current: set[int] = set()
    for i in range(n + 1):
        if i in strata:
            current = current | strata[i]
        vs = set(K.vertices) if i == n else current
        skeleta.append(K.full_subcomplex(vs))
    return FilteredComplex(K, n, tuple(skeleta))


def trivially_filtered(K: SimplicialComplex, n: int | None = None) -> FilteredComplex:
    n = K.dim if n is None else n
    return filtered_from_vertex_sets(K, n, {})


def filtered_from_subcomplexes(K: SimplicialComplex, n: int, skeleta: Sequence[Subcomplex]) -> FilteredComplex:
    """Filtered complex from possibly non-full skeleta.

    When some skeleton is not full the complex is barycentrically subdivided
    once; the subdivided skeleta are then full.  ``subdivided`` records this.
    """
    if len(skeleta) == n:
        skeleta = list(skeleta) + [K.all()]
    if all(X.is_full() for X in skeleta):
        return FilteredComplex(K, n, tuple(skeleta))
    sd = barycentric_subdivision(K)
    new = []
    for X in skeleta:
        vs = [b for b, s in enumerate(sd.carrier) if s in X]
        new.append(sd.complex.full_subcomplex(vs))
    return FilteredComplex(sd.complex, n, tuple(new), subdivided=1)


# -- subdivision ---------------------------------------------------------------

@dataclass(frozen=True)
class Subdivision:
    complex: SimplicialComplex
    carrier: tuple[Simplex, ...]          # new vertex id -> original simplex
    barycenter: dict                      # original simplex -> new vertex id


def _chains(sub: Simplex, bary: Mapping[Simplex, int]) -> list[list[int]]:
    """All maximal flags of faces of ``sub`` as lists of barycenter ids."""
    if len(sub) == 1:
        return [[bary[sub]]]
    out = []
    for f in faces(sub):
        for ch in _chains(f, bary):
            out.append(ch + [bary[sub]])
    return out


def barycentric_subdivision(K: SimplicialComplex) -> Subdivision:
    """First derived subdivision with barycenters as derived points."""
    carrier = tuple(K)
    bary = {s: i for i, s in enumerate(carrier)}
    gens = []
    for s in K.maximal_simplices():
        gens.extend(_chains(s, bary))
    return Subdivision(close(gens), carrier, bary)


def subdivide_filtered(F: FilteredComplex) -> tuple[FilteredComplex, Subdivision]:
    sd = barycentric_subdivision(F.complex)
    skeleta = []
    for X in F.skeleta:
        vs = [b for b, s in enumerate(sd.carrier) if s in X]
        skeleta.append(sd.complex.full_subcomplex(vs))
    return FilteredComplex(sd.complex, F.n, tuple(skeleta), F.subdivided + 1), sd


# -- stars, links, neighborhoods ----------------------------------------------

def star_link(K: SimplicialComplex, A: Subcomplex) -> tuple[Subcomplex, Subcomplex]:
    """Closed star and link of a subcomplex."""
    avs = A.vertices
    meeting = [s for s in K if avs.intersection(s)]
    star = set()
    for s in meeting:
        star.update(all_faces(s))
    link = [s for s in star if not avs.intersection(s)]
    return Subcomplex(K, star, check=False), Subcomplex(K, link, check=False)


@dataclass(frozen=True)
class RegularNeighborhood:
    N: FilteredComplex
    frontier: Subcomplex            # subcomplex of N.complex
    base: Subcomplex                # the subdivided Y inside N.complex
    retraction: dict                # vertex of N -> vertex of base
    carrier: dict                   # vertex of N -> original simplex of K
    base_simplex: dict              # vertex of N -> simplex (carrier cap Y) of the original Y
    original_base: SimplicialComplex
    subdivided: int = 0


def regular_neighborhood(F: FilteredComplex, Y: Subcomplex) -> RegularNeighborhood:
    """Closed derived neighborhood of ``Y`` in the first derived subdivision.

    Vertices of the neighborhood are barycenters ``b(t)`` of simplices ``t``
    meeting ``Y``; a flag ``t_0 < ... < t_r`` belongs to it when ``t_0`` meets
    ``Y``.  The retraction sends ``b(t)`` to ``b(t & Y)``.
    """
    K = F.complex
    for s in Y:
        if s not in K:
            raise ComplexError("Y is not a subcomplex of K")
    subdivided = 0
    if not Y.is_full():
        F, sd0 = subdivide_filtered(F)
        Y = F.complex.full_subcomplex(b for b, s in enumerate(sd0.carrier) if s in Y)
        K = F.complex
        subdivided = 1
    yv = Y.vertices
    meets = {s for s in K if yv.intersection(s)}
    order = sorted(meets, key=lambda s: (len(s), s))
    vid = {s: i for i, s in enumerate(order)}

    gens = []
    for s in K.maximal_simplices():
        if not yv.intersection(s):
            continue
        for v in yv.intersection(s):
            gens.extend(_flags_from(s, (v,), vid))
    Ncx = close(gens)
    carrier = {i: s for s, i in vid.items()}
    base_simplex = {}
    retraction = {}
    for i, s in carrier.items():
        cap = tuple(v for v in s if v in yv)
        base_simplex[i] = cap
        retraction[i] = vid[cap]
    base_vs = [i for i, s in carrier.items() if s in Y]
    base = Ncx.full_subcomplex(base_vs)
    frontier = Subcomplex(Ncx, (t for t in Ncx if not any(carrier[v] in Y for v in t)), check=False)
    levels = F.vertex_level
    skeleta = tuple(
        Ncx.full_subcomplex(i for i, s in carrier.items() if max(levels[v] for v in s) <= k)
        for k in range(F.n + 1)
    )
    N = FilteredComplex(Ncx, F.n, skeleta, F.subdivided + subdivided + 1)
    return RegularNeighborhood(N, frontier, base, retraction, carrier, base_simplex,
                               Y.as_complex(), subdivided)


def _flags_from(top: Simplex, start: Simplex, vid: Mapping[Simplex, int]) -> list[list[int]]:
    """Maximal flags ``start < ... < top`` adding one vertex at a time."""
    if start == top:
        return [[vid[top]]]
    out = []
    for v in top:
        if v in start:
            continue
        nxt = tuple(sorted(start + (v,)))
        for ch in _flags_from(top, nxt, vid):
            out.append([vid[start]] + ch)
    return out


def check_retraction(nb: RegularNeighborhood) -> None:
    """Raise unless the retraction is simplicial and fixes the base."""
    for v in nb.base.vertices:
        if nb.retraction[v] != v:
            raise ComplexError("retraction is not the identity on the base")
    base = nb.base
    for s in nb.N.complex:
        img = tuple(sorted({nb.retraction[v] for v in s}))
        if img not in base:
            raise ComplexError(f"image of {s} is not a simplex of the base")


# -- cones, prisms, products ----------------------------------------------------

def cone(F: FilteredComplex, apex: int | None = None) -> FilteredComplex:
    """Closed cone with the apex as new bottom skeleton, formal dimension n+1."""
    K = F.complex
    a = (max(K.vertices) + 1 if K.vertex_count else 0) if apex is None else apex
    gens = [s + (a,) if a > s[-1] else (a,) + s for s in K.maximal_simplices()] or [(a,)]
    C = close(gens)
    n = F.n + 1
    levels = F.vertex_level
    skeleta = [C.full_subcomplex([a])]
    for i in range(1, n + 1):
        vs = [v for v in K.vertices if levels[v] <= i - 1] + [a]
        skeleta.append(C.full_subcomplex(vs))
    return FilteredComplex(C, n, tuple(skeleta))


def prism_decomposition(i: int) -> list[tuple[int, tuple[tuple[str, int], ...]]]:
    """Signed staircase triangulation of ``Delta^i x I``.

    Returns ``(sign, simplex)`` with simplex ``[v_0..v_l, w_l..w_i]`` and sign
    ``(-1)**l``; vertices are ``('v', k)`` or ``('w', k)``.
    """
    if i < 0:
        raise ValueError("dimension must be nonnegative")
    return [((-1) ** l, tuple(("v", k) for k in range(l + 1)) + tuple(("w", k) for k in range(l, i + 1)))
            for l in range(i + 1)]


def _layer_vertex(V: int, x_index: int, layer: int) -> int:
    return layer * V + x_index


def _layered(K: SimplicialComplex, m: int, top_map: Callable[[int], int]) -> tuple[SimplicialComplex, dict, dict]:
    """``m`` prism layers; the last layer glues level m-1 to level 0 via ``top_map``."""
    verts = K.vertices
    pos = {v: i for i, v in enumerate(verts)}
    V = len(verts)
    gens = []
    for s in K.maximal_simplices():
        idx = [pos[v] for v in s]
        for j in range(m):
            if j < m - 1:
                lower = [_layer_vertex(V, x, j) for x in idx]
                upper = [_layer_vertex(V, x, j + 1) for x in idx]
            else:
                lower = [_layer_vertex(V, x, m - 1) for x in idx]
                upper = [_layer_vertex(V, pos[top_map(verts[x])], 0) for x in idx]
            for l in range(len(s)):
                gens.append(lower[: l + 1] + upper[l:])
    P = close(gens)
    point = {(v, j): _layer_vertex(V, pos[v], j) for v in verts for j in range(m)}
    proj = {point[(v, j)]: j for v in verts for j in range(m)}
    return P, point, proj


def product_with_circle(K: SimplicialComplex, m: int = 3) -> tuple[SimplicialComplex, dict, dict]:
    """Triangulate ``K x S^1`` from ``m`` staircase prism layers.

    Returns the complex, the vertex map ``(v, layer) -> id`` and the simplicial
    projection ``id -> layer`` onto the m-gon.
    """
    if m < 3:
        raise ComplexError("need at least 3 layers")
    return _layered(K, m, lambda v: v)


def mapping_torus(K: SimplicialComplex, phi: Mapping[int, int], m: int = 3) -> tuple[SimplicialComplex, dict, dict]:
    """Mapping torus of a simplicial automorphism; the last layer glues through ``phi``."""
    if m < 3:
        raise ComplexError("need at least 3 layers")
    verts = set(K.vertices)
    if set(phi) != verts or set(phi.values()) != verts:
        raise ComplexError("phi is not a bijection of the vertex set")
    for s in K:
        if tuple(sorted(phi[v] for v in s)) not in K:
            raise ComplexError(f"phi is not simplicial on {s}")
    return _layered(K, m, lambda v: phi[v])


def product_with_interval(K: SimplicialComplex) -> tuple[SimplicialComplex, dict]:
    """Staircase triangulation of ``K x [0,1]``; vertex map ``(v, 0|1) -> id``."""
    verts = K.vertices
    pos = {v: i for i, v in enumerate(verts)}
    V = len(verts)
    gens = []
    for s in K.maximal_simplices():
        for sign, pr in prism_decomposition(len(s) - 1):
            gens.append([pos[s[k]] + (V if side == "w" else 0) for side, k in pr])
    P = close(gens)
    point = {(v, t): pos[v] + t * V for v in verts for t in (0, 1)}
    return P, point


def is_simplicial_map(K: SimplicialComplex, L: SimplicialComplex, f: Mapping[int, int]) -> bool:
    return all(tuple(sorted({f[v] for v in s})) in L for s in K)


def disjoint_union(*Ks: SimplicialComplex) -> tuple[SimplicialComplex, list[dict]]:
    gens = []
    maps = []
    offset = 0
    for K in Ks:
        m = {v: offset + i for i, v in enumerate(K.vertices)}
        maps.append(m)
        gens.extend(tuple(m[v] for v in s) for s in K.maximal_simplices())
        offset += K.vertex_count
    return close(gens), maps


def suspension(K: SimplicialComplex) -> tuple[SimplicialComplex, int, int]:
    top = max(K.vertices) + 1
    a, b = top, top + 1
    gens = []
    for s in K.maximal_simplices():
        gens.append(s + (a,))
        gens.append(s + (b,))
    return close(gens), a, b


def connected_components(K: SimplicialComplex, members: Iterable[Simplex] | None = None) -> list[set[int]]:
    simplices = list(K if members is None else members)
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in simplices:
        for v in s:
            parent.setdefault(v, v)
    for s in simplices:
        r = find(s[0])
        for v in s[1:]:
            rv = find(v)
            if rv != r:
                parent[rv] = r
    comps: dict[int, set[int]] = {}
    for v in parent:
        comps.setdefault(find(v), set()).add(v)
    return sorted(comps.values(), key=min)
