"""Named example spaces with their filtrations and bundle data.

Expected values carry a provenance tag: ``oracle`` values were computed by
an independent code path and frozen; ``trivial`` values are forced by the
construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .simplicial import (
    FilteredComplex,
    SimplicialComplex,
    Subcomplex,
    close,
    cone,
    disjoint_union,
    filtered_from_vertex_sets,
    mapping_torus,
    product_with_circle,
    suspension,
    trivially_filtered,
)


class CorpusError(KeyError):
    pass


@dataclass
class CorpusEntry:
    name: str
    F: FilteredComplex
    description: str
    base: Subcomplex | None = None          # designated bottom stratum
    link: FilteredComplex | None = None      # link of the bottom stratum (bundles: fiber link)
    gluing: dict | None = None               # monodromy of the link, for bundles over a circle
    layers: int = 0                          # base polygon size, for bundles
    expected: dict = field(default_factory=dict)


def sphere2_complex() -> SimplicialComplex:
    return close([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


def circle_complex(k: int = 3, offset: int = 0) -> SimplicialComplex:
    return close([(offset + j, offset + (j + 1) % k) for j in range(k)])


def torus7_complex() -> SimplicialComplex:
    tris = [(i, (i + 1) % 7, (i + 3) % 7) for i in range(7)] + [(i, (i + 2) % 7, (i + 3) % 7) for i in range(7)]
    return close(tris)


def rp2_6_complex() -> SimplicialComplex:
    return close([(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
                  (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3)])


def two_circles() -> SimplicialComplex:
    return close([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


TWO_CIRCLE_SWAP = {0: 3, 1: 4, 2: 5, 3: 0, 4: 1, 5: 2}


def pinched_torus_complex() -> tuple[SimplicialComplex, int]:
    """Annulus on circles ``0,1,2`` and ``3,4,5`` with both ends coned to vertex 6."""
    tris = []
    for i in range(3):
        j = (i + 1) % 3
        tris += [(i, j, 3 + j), (i, 3 + i, 3 + j)]
        tris += [(i, j, 6), (3 + i, 3 + j, 6)]
    return close(tris), 6


def _bottom(F: FilteredComplex) -> Subcomplex:
    k = F.bottom_index()
    return F.skeleta[k]


def _sphere2():
    F = trivially_filtered(sphere2_complex())
    return CorpusEntry("sphere2", F, "boundary of the tetrahedron, unfiltered",
                       expected={"homology_Z": ([1, 0, 1], "trivial")})


def _torus7():
    F = trivially_filtered(torus7_complex())
    return CorpusEntry("torus7", F, "7-vertex torus, unfiltered",
                       expected={"f_vector": ([7, 21, 14], "oracle"), "homology_Z": ([1, 2, 1], "oracle")})


def _rp2_6():
    F = trivially_filtered(rp2_6_complex())
    return CorpusEntry("rp2_6", F, "6-vertex projective plane, unfiltered",
                       expected={"homology_Z": ([1, 0, 0], "oracle"), "torsion_Z": ([[], [2], []], "oracle")})


def _cone_s1():
    L = trivially_filtered(circle_complex())
    F = cone(L)
    return CorpusEntry("cone_s1", F, "closed cone on a triangle boundary, apex stratum",
                       base=_bottom(F), link=L,
                       expected={"IH_zero_Z": ([1, 0, 0], "oracle")})


def _cone_t2():
    L = trivially_filtered(torus7_complex())
    F = cone(L)
    return CorpusEntry("cone_t2", F, "closed cone on the 7-vertex torus, apex stratum",
                       base=_bottom(F), link=L,
                       expected={"IH_0001_Q": ([1, 0, 0, 0], "oracle"), "IH_0000_Q": ([1, 2, 0, 0], "oracle")})


def _pinched_torus():
    K, v = pinched_torus_complex()
    F = filtered_from_vertex_sets(K, 2, {0: [v]})
    return CorpusEntry("pinched_torus", F, "torus with a meridian pinched to a point",
                       base=_bottom(F), link=trivially_filtered(two_circles()),
                       expected={"IH_zero_Z": ([1, 0, 1], "oracle")})


def _susp_t2():
    K, a, b = suspension(torus7_complex())
    F = filtered_from_vertex_sets(K, 3, {0: [a, b]})
    return CorpusEntry("susp_t2", F, "suspension of the torus, suspension points as strata",
                       base=_bottom(F), link=trivially_filtered(torus7_complex()),
                       expected={"IH_lower_middle_Z": ([1, 2, 0, 1], "oracle"), "IH_upper_middle_Z": ([1, 0, 2, 1], "oracle")})


def _s1_x_cone_t2(m: int = 3):
    L = trivially_filtered(torus7_complex())
    cT = cone(L)
    apex = next(iter(cT.stratum_vertices(0)))
    P, point, _ = product_with_circle(cT.complex, m)
    F = filtered_from_vertex_sets(P, 4, {1: [point[(apex, j)] for j in range(m)]})
    return CorpusEntry("s1_x_cone_t2", F, "circle times the closed cone on the torus",
                       base=_bottom(F), link=L, gluing={v: v for v in L.complex.vertices}, layers=m,
                       expected={"IH_zero_Z": ([1, 3, 2, 0, 0], "oracle"), "IH_upper_middle_Z": ([1, 1, 0, 0, 0], "oracle"),
                                 "E2_zero_Q": ({(0, 0): 1, (0, 1): 2, (1, 0): 1, (1, 1): 2}, "oracle")})


def _twisted_cone_bundle(m: int = 3):
    L = trivially_filtered(two_circles())
    cL = cone(L)
    apex = next(iter(cL.stratum_vertices(0)))
    phi = dict(TWO_CIRCLE_SWAP)
    phi[apex] = apex
    P, point, _ = mapping_torus(cL.complex, phi, m)
    F = filtered_from_vertex_sets(P, 3, {1: [point[(apex, j)] for j in range(m)]})
    return CorpusEntry("twisted_cone_bundle", F, "mapping torus of the component swap on the cone over two circles",
                       base=_bottom(F), link=L, gluing=dict(TWO_CIRCLE_SWAP), layers=m,
                       expected={"E2_zero_Q": ({(0, 0): 1, (1, 0): 1}, "oracle")})


BUILDERS = {
    "sphere2": _sphere2,
    "torus7": _torus7,
    "rp2_6": _rp2_6,
    "cone_s1": _cone_s1,
    "cone_t2": _cone_t2,
    "pinched_torus": _pinched_torus,
    "susp_t2": _susp_t2,
    "s1_x_cone_t2": _s1_x_cone_t2,
    "twisted_cone_bundle": _twisted_cone_bundle,
}

NAMES = tuple(BUILDERS)
BUNDLES = ("s1_x_cone_t2", "twisted_cone_bundle")
NEIGHBORHOOD_SPACES = ("cone_s1", "cone_t2", "pinched_torus", "susp_t2", "s1_x_cone_t2", "twisted_cone_bundle")


def build(name: str) -> CorpusEntry:
    try:
        return BUILDERS[name]()
    except KeyError:
        raise CorpusError(f"unknown corpus space {name!r}; known: {', '.join(NAMES)}") from None


def _perversity_from_key(token: str, n: int):
    from .perverse import named_perversity, Perversity

    if token.isdigit():
        return Perversity(tuple(int(c) for c in token)).extend(n)
    return named_perversity(token.replace("_", "-"), n)


def oracle_values(entry: CorpusEntry) -> dict:
    """Recompute every expected value of ``entry`` by brute force.

    Homology comes from the full normal form of a standalone chain complex
    (the unreduced intersection chain complex for ``IH`` keys), never from
    the default lattice route.
    """
    from .algebra import homology, simplicial_chain_complex
    from .perverse import IH_oracle
    from .rings import parse_ring
    from .spectral import compute_pages, filtered_ic, neighborhood_filtration

    F = entry.F
    out = {}
    for key in entry.expected:
        kind, _, rest = key.partition("_")
        if key == "f_vector":
            out[key] = list(F.complex.f_vector())
        elif key in ("homology_Z", "torsion_Z"):
            from .rings import Z

            H = homology(simplicial_chain_complex(F.complex, Z), Z)
            top = F.complex.dim + 1
            out[key] = [H.betti_at(d) for d in range(top)] if key == "homology_Z" else [list(H.torsion_at(d)) for d in range(top)]
        elif kind == "IH":
            token, _, ring = rest.rpartition("_")
            H = IH_oracle(F, _perversity_from_key(token, F.n), parse_ring(ring))
            out[key] = [H.betti_at(d) for d in range(F.n + 1)]
        elif kind == "E2":
            token, _, ring = rest.rpartition("_")
            SF = neighborhood_filtration(F, entry.base)
            fc, _ = filtered_ic(SF, _perversity_from_key(token, F.n), parse_ring(ring))
            out[key] = dict(compute_pages(fc).nonzero(2))
        else:
            raise CorpusError(f"no oracle for expected value {key!r}")
    return out
