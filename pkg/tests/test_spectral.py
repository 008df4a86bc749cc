import pytest
from hypothesis import given, settings, strategies as st

from ihss.algebra import homology, simplicial_chain_complex
from ihss.corpus import build, circle_complex
from ihss.perverse import all_perversities, named_perversity
from ihss.rings import GF, Q
from ihss.simplicial import close, regular_neighborhood
from ihss.spectral import (
    SpectralError,
    check_laws,
    compute_pages,
    d1_cross_check,
    deleted_neighborhood,
    e1_decomposition_check,
    e2_vs_twisted,
    fiber_stalk_systems,
    filter_by_levels,
    filtered_ic,
    neighborhood_filtration,
    ss_map_deleted_to_full,
)


def _levels(C, vertex_level):
    return [[max(vertex_level[v] for v in s) for s in C.labels[d]] for d in range(C.top + 1)]


def test_trivial_filtration_collapses_at_once():
    C = simplicial_chain_complex(circle_complex(), Q)
    ss = compute_pages(filter_by_levels(C, _levels(C, {0: 0, 1: 0, 2: 0})))
    assert ss.nonzero(1) == {(0, 0): 1, (0, 1): 1}
    assert check_laws(ss).ok


def test_two_step_filtration_of_circle():
    C = simplicial_chain_complex(circle_complex(), Q)
    fc = filter_by_levels(C, _levels(C, {0: 0, 1: 1, 2: 1}))
    ss = compute_pages(fc)
    # F_0 is the vertex 0 and the quotient is the circle relative to it
    assert ss.E(1, 0, 0) == 1
    assert ss.E_inf(0, 0) == 1 and ss.E_inf(1, 0) == 1
    assert ss.homology == [1, 1]
    assert check_laws(ss).ok and d1_cross_check(fc, ss).ok


def test_levels_must_be_sorted():
    C = simplicial_chain_complex(circle_complex(), Q)
    fc = filter_by_levels(C, _levels(C, {0: 1, 1: 0, 2: 0}))
    with pytest.raises(SpectralError):
        type(fc)(fc.ambient, fc.basis, [list(reversed(l)) for l in fc.coord_level], Q)


def test_integers_are_rejected():
    from ihss.rings import Z

    C = simplicial_chain_complex(circle_complex(), Z)
    with pytest.raises(SpectralError):
        filter_by_levels(C, _levels(C, {0: 0, 1: 0, 2: 0}), ring=Z)


@pytest.mark.parametrize("name,steps", [("cone_s1", 1), ("pinched_torus", 1), ("susp_t2", 1), ("twisted_cone_bundle", 2)])
def test_skeletal_filtration_steps(name, steps):
    SF = neighborhood_filtration(build(name).F)
    assert SF.pmax + 1 == steps
    assert set(SF.level.values()) == set(range(steps))


def test_polygon_base_filtration_nests():
    SF = neighborhood_filtration(build("twisted_cone_bundle").F)
    J0, J1 = SF.J(0), SF.J(1)
    assert set(J0) < set(J1) == set(SF.N.complex)
    # the base part over the vertices is a set of points
    assert SF.B(0).as_complex().dim == 0


@pytest.mark.parametrize("name", ["cone_s1", "cone_t2", "pinched_torus", "susp_t2", "twisted_cone_bundle"])
def test_laws_and_d1(name):
    SF = neighborhood_filtration(build(name).F)
    for p in all_perversities(SF.N.n):
        for deleted in (False, True):
            fc, _ = filtered_ic(SF, p, Q, deleted=deleted)
            ss = compute_pages(fc)
            assert check_laws(ss).ok
            assert d1_cross_check(fc, ss).ok


def test_e1_pieces_on_bundle():
    e = build("twisted_cone_bundle")
    SF = neighborhood_filtration(e.F)
    p = named_perversity("zero", 3)
    fc, _ = filtered_ic(SF, p, Q)
    assert e1_decomposition_check(SF, p, compute_pages(fc), Q).ok


def test_twisted_bundle_e2_and_map():
    e = build("twisted_cone_bundle")
    SF = neighborhood_filtration(e.F)
    p = named_perversity("zero", 3)
    fc, _ = filtered_ic(SF, p, Q)
    ss = compute_pages(fc)
    assert ss.nonzero(2) == e.expected["E2_zero_Q"][0]
    cone_stalks = fiber_stalk_systems(e.link, e.gluing, p, e.layers, "cone", Q)
    link_stalks = fiber_stalk_systems(e.link, e.gluing, p, e.layers, "link", Q)
    assert e2_vs_twisted(ss, cone_stalks, Q).ok
    fcD, _ = filtered_ic(SF, p, Q, deleted=True)
    assert e2_vs_twisted(compute_pages(fcD), link_stalks, Q).ok
    r = ss_map_deleted_to_full(SF, p, Q, codim=2)
    assert r.ok
    kinds = {(d["p"], d["q"]): d["kind"] for d in r.details}
    assert kinds[(0, 0)] == "iso" and kinds[(0, 1)] == "zero"


def test_e2_detects_wrong_stalks():
    e = build("twisted_cone_bundle")
    SF = neighborhood_filtration(e.F)
    p = named_perversity("zero", 3)
    ss = compute_pages(filtered_ic(SF, p, Q)[0])
    # untwisted stalks give a different E^2
    untwisted = fiber_stalk_systems(e.link, {v: v for v in e.link.complex.vertices}, p, e.layers, "cone", Q)
    assert not e2_vs_twisted(ss, untwisted, Q).ok


def test_cone_apex_e2_is_truncated_link():
    e = build("cone_t2")
    SF = neighborhood_filtration(e.F)
    for p in all_perversities(3):
        ss = compute_pages(filtered_ic(SF, p, Q)[0])
        stalks = fiber_stalk_systems(e.link, None, p, 0, "cone", Q, base=SF.base)
        assert e2_vs_twisted(ss, stalks, Q).ok


def test_deleted_neighborhoods():
    for name, betti in [("cone_s1", [1, 1]), ("pinched_torus", [2, 2]), ("s1_x_cone_t2", [1, 3, 3, 1])]:
        e = build(name)
        D = deleted_neighborhood(regular_neighborhood(e.F, e.base))
        H = homology(simplicial_chain_complex(D.complex, Q))
        assert [H.betti_at(d) for d in range(len(betti))] == betti


random_levels = st.lists(st.integers(0, 3), min_size=7, max_size=7)


@settings(max_examples=30, deadline=None)
@given(random_levels, st.sampled_from([Q, GF(2), GF(3)]))
def test_random_vertex_filtrations_satisfy_laws(levels, ring):
    C = simplicial_chain_complex(build("torus7").F.complex, ring)
    fc = filter_by_levels(C, _levels(C, dict(enumerate(levels))), ring=ring)
    ss = compute_pages(fc)
    # vertex levels are not skeletal, so classes may sit below the diagonal
    assert check_laws(ss, first_quadrant=False).ok
    assert d1_cross_check(fc, ss).ok
    assert ss.homology == [1, 2, 1]
    assert all(ss.E(1, p, q) == 0 for p, q in ss.dims[1] if p < 0 or p > ss.pmax)


def test_point_filtration():
    C = simplicial_chain_complex(close([(0,)]), Q)
    ss = compute_pages(filter_by_levels(C, [[0]]))
    assert ss.nonzero(1) == {(0, 0): 1} and check_laws(ss).ok
