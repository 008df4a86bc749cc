import random

import pytest
from hypothesis import given, settings, strategies as st

from ihss.corpus import build, circle_complex, torus7_complex, two_circles
from ihss.simplicial import (
    ComplexError,
    barycentric_subdivision,
    check_retraction,
    close,
    cone,
    connected_components,
    faces,
    filtered_from_subcomplexes,
    mapping_torus,
    prism_decomposition,
    product_with_circle,
    regular_neighborhood,
    Subcomplex,
    star_link,
    suspension,
    trivially_filtered,
)


def test_close_one_triangle():
    K = close([(0, 1, 2)])
    assert set(K) == {(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)}


def test_close_empty_and_bad_generator():
    assert len(close([])) == 0
    with pytest.raises(ComplexError):
        close([(0, 0, 1)])


def test_torus7_counts():
    K = torus7_complex()
    assert K.f_vector() == (7, 21, 14)
    assert K.euler_characteristic() == 0


def test_canonical_order_is_lexicographic():
    K = close([(2, 3, 5), (0, 1, 5)])
    for level in K.simplices:
        assert list(level) == sorted(level)


def test_subdivision_examples():
    sd = barycentric_subdivision(close([(0, 1)]))
    assert sd.complex.f_vector() == (3, 2)
    assert barycentric_subdivision(circle_complex()).complex.f_vector() == (6, 6)
    sd = barycentric_subdivision(torus7_complex())
    assert sd.complex.vertex_count == 42
    assert sd.complex.euler_characteristic() == 0
    assert all(sd.barycenter[s] == b for b, s in enumerate(sd.carrier))


random_complexes = st.lists(
    st.lists(st.integers(0, 7), min_size=1, max_size=4, unique=True), min_size=1, max_size=8
)


@settings(max_examples=40, deadline=None)
@given(random_complexes)
def test_subdivision_keeps_euler_characteristic(gens):
    K = close(gens)
    sd = barycentric_subdivision(K)
    assert sd.complex.euler_characteristic() == K.euler_characteristic()
    # new simplices are flags of old simplices
    for s in sd.complex:
        chain = sorted((sd.carrier[v] for v in s), key=len)
        assert all(set(a) < set(b) for a, b in zip(chain, chain[1:]))


def test_star_link_examples():
    K = close([(0, 1, 2)])
    star, link = star_link(K, K.full_subcomplex([0]))
    assert len(star) == len(K)
    assert set(link) == {(1,), (2,), (1, 2)}
    hexagon = close([(6, j, (j + 1) % 6) for j in range(6)])
    _, link = star_link(hexagon, hexagon.full_subcomplex([6]))
    assert link.as_complex() == circle_complex(6)


def test_link_of_suspension_point_is_subdivided_torus():
    K, a, _ = suspension(torus7_complex())
    sd = barycentric_subdivision(K)
    _, link = star_link(sd.complex, sd.complex.full_subcomplex([sd.barycenter[(a,)]]))
    assert link.as_complex().f_vector() == barycentric_subdivision(torus7_complex()).complex.f_vector()


def test_regular_neighborhoods():
    F = build("cone_s1").F
    nb = regular_neighborhood(F, F.skeleta[0])
    # a disk: the closed star of the apex in the derived disk
    assert nb.N.complex.euler_characteristic() == 1
    assert nb.frontier.as_complex().f_vector() == (6, 6)

    F = build("pinched_torus").F
    nb = regular_neighborhood(F, F.skeleta[0])
    assert len(connected_components(nb.N.complex, nb.frontier.members)) == 2

    for name in ("pinched_torus", "twisted_cone_bundle", "susp_t2"):
        e = build(name)
        nb = regular_neighborhood(e.F, e.base)
        check_retraction(nb)
        assert not (nb.frontier.vertices & nb.base.vertices)
        assert all(nb.retraction[v] == v for v in nb.base.vertices)


def test_bundle_neighborhood_frontier_has_zero_euler_characteristic():
    e = build("s1_x_cone_t2")
    nb = regular_neighborhood(e.F, e.base)
    assert nb.frontier.as_complex().euler_characteristic() == 0


def test_cone_examples():
    c = cone(trivially_filtered(close([(0,), (1,)])))
    assert sorted(c.complex.maximal_simplices()) == [(0, 2), (1, 2)]
    c = cone(trivially_filtered(circle_complex()))
    assert c.complex.vertex_count == 4 and c.n == 2
    assert c.stratum_vertices(0) == {3}
    c = cone(trivially_filtered(torus7_complex()))
    assert c.complex.vertex_count == 8 and c.complex.euler_characteristic() == 1


def _expand(i):
    """Signed boundary of the prism chain minus top and bottom, as a dict."""
    out = {}
    for sign, s in prism_decomposition(i):
        for j, f in enumerate(faces(s)):
            out[f] = out.get(f, 0) + (-sign if j % 2 else sign)
    return {f: c for f, c in out.items() if c}


def test_prism_decomposition_examples():
    assert prism_decomposition(0) == [(1, (("v", 0), ("w", 0)))]
    assert prism_decomposition(1) == [
        (1, (("v", 0), ("w", 0), ("w", 1))),
        (-1, (("v", 0), ("v", 1), ("w", 1))),
    ]
    assert len(prism_decomposition(2)) == 3


@pytest.mark.parametrize("i", range(7))
def test_prism_boundary_telescopes(i):
    bd = _expand(i)
    top = tuple(("w", k) for k in range(i + 1))
    bottom = tuple(("v", k) for k in range(i + 1))
    assert bd.pop(top) == 1
    assert bd.pop(bottom) == -1
    # what remains lies over the boundary of the simplex: some index k is missing
    for f in bd:
        assert len({k for _, k in f}) <= i


def test_product_with_circle():
    K, _, _ = product_with_circle(close([(0,)]), 5)
    assert K.f_vector() == (5, 5)
    K, _, proj = product_with_circle(close([(0, 1)]), 4)
    assert K.f_vector()[2] == 8
    base = circle_complex(4)
    assert all(tuple(sorted({proj[v] for v in s})) in base for s in K)
    with pytest.raises(ComplexError):
        product_with_circle(close([(0,)]), 2)


def test_mapping_torus():
    K, _, _ = mapping_torus(close([(0,)]), {0: 0}, 3)
    assert K.f_vector() == (3, 3)
    K, _, _ = mapping_torus(close([(0,), (1,)]), {0: 1, 1: 0}, 3)
    assert K.f_vector() == (6, 6) and len(connected_components(K)) == 1
    L = torus7_complex()
    A, _, _ = mapping_torus(L, {v: v for v in L.vertices}, 3)
    B, _, _ = product_with_circle(L, 3)
    assert A == B
    with pytest.raises(ComplexError):
        mapping_torus(two_circles(), {0: 0, 1: 0, 2: 2, 3: 3, 4: 4, 5: 5}, 3)


def test_non_full_skeleta_trigger_one_subdivision():
    K = close([(0, 1, 2)])
    X0 = Subcomplex(K, [(0,), (1,)])
    F = filtered_from_subcomplexes(K, 2, [X0, X0])
    assert F.subdivided == 1
    assert F.complex.vertex_count == 7
    assert all(X.is_full() for X in F.skeleta)


def test_random_retractions():
    rng = random.Random(3)
    F = build("torus7").F
    for _ in range(5):
        vs = rng.sample(F.complex.vertices, 2)
        nb = regular_neighborhood(F, F.complex.full_subcomplex(vs))
        check_retraction(nb)
