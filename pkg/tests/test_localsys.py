import random

import pytest
from hypothesis import given, settings, strategies as st

from ihss.corpus import build, circle_complex
from ihss.localsys import (
    LocalSystemError,
    StalkSystem,
    facet_interior_lemma,
    make_local_system,
    polygon,
    stalk_comparison_map,
    stalk_system_from_gluing,
    twisted_ambient,
    twisted_cellular_complex,
    twisted_cellular_homology,
    twisted_IH,
    validate_stalk_system,
)
from ihss.perverse import IH, Perversity, all_perversities, named_perversity
from ihss.rings import Q, Z
from ihss.simplicial import close, trivially_filtered


def test_twisted_circle():
    F = trivially_filtered(circle_complex())
    p = Perversity((0, 0))
    L = make_local_system(F, 1, {((0,), (0, 1)): [[-1]]})
    assert not any(twisted_IH(F, p, L, Q).betti)
    HZ = twisted_IH(F, p, L, Z)
    assert not any(HZ.betti) and HZ.torsion_at(0) == [2]


def test_nonflat_system_on_disk_rejected():
    F = build("cone_s1").F
    with pytest.raises(LocalSystemError):
        make_local_system(F, 1, {((0,), (0, 1)): [[-1]]})


def test_bad_shapes_rejected():
    F = trivially_filtered(circle_complex())
    with pytest.raises(LocalSystemError):
        make_local_system(F, 2, {((0,), (0, 1)): [[1]]})
    with pytest.raises(LocalSystemError):
        make_local_system(F, 1, {((0,), (0, 1)): [[2]]})
    with pytest.raises(LocalSystemError):
        make_local_system(F, 0)


def test_edges_must_avoid_the_singular_set():
    e = build("cone_s1")
    apex = next(iter(e.F.stratum_vertices(0)))
    with pytest.raises(LocalSystemError):
        make_local_system(e.F, 1, {((apex,), (0, apex)): [[-1]]})


def test_trivial_system_gives_direct_sum():
    for name in ("cone_s1", "pinched_torus"):
        F = build(name).F
        L = make_local_system(F, 2)
        for p in all_perversities(F.n):
            H, H2 = IH(F, p, Q), twisted_IH(F, p, L, Q)
            assert H2.betti == [2 * b for b in H.betti]


def test_twisted_ambient_squares_to_zero():
    F = build("pinched_torus").F
    sd = make_local_system(F, 1).sd
    rng = random.Random(1)
    L = make_local_system(F, 1, _coboundary(F, sd, rng))
    C = twisted_ambient(F, L, Z)
    C.check()


def _coboundary(F, sd, rng):
    """Transports ``g_v / g_u`` from random signs on the carrier vertices."""
    probe = make_local_system(F, 1, sd=sd)
    g = {v: rng.choice([-1, 1]) for v in probe.carrier}
    return {(u, v): [[g[u] * g[v]]] for (u, v) in sd.complex.simplices_of_dim(1) if u in g and v in g}


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(["cone_s1", "pinched_torus", "torus7"]), st.integers(0, 10**6))
def test_gauge_equivalent_systems_have_equal_homology(name, seed):
    F = build(name).F
    sd = make_local_system(F, 1).sd
    L = make_local_system(F, 1, _coboundary(F, sd, random.Random(seed)), sd=sd)
    for p in all_perversities(F.n):
        assert twisted_IH(F, p, L, Z) == IH(F, p, Z)


def test_facet_interior_lemma_on_corpus():
    for name in ("cone_s1", "cone_t2", "pinched_torus", "susp_t2"):
        F = build(name).F
        for p in all_perversities(F.n):
            assert facet_interior_lemma(F, p) == []


def test_stalk_system_from_gluing():
    S = stalk_system_from_gluing([[0, 1], [1, 0]], 3)
    assert S.loop_product([0, 1, 2]) == [[0, 1], [1, 0]]
    # the swap has one invariant and one coinvariant line
    assert twisted_cellular_homology(S, Q).betti == [1, 1]
    S = stalk_system_from_gluing([[-1]], 4)
    assert not any(twisted_cellular_homology(S, Q).betti)
    assert twisted_cellular_homology(S, Z).torsion_at(0) == [2]
    S = stalk_system_from_gluing([[1]], 3)
    assert twisted_cellular_homology(S, Q).betti == [1, 1]
    with pytest.raises(LocalSystemError):
        stalk_system_from_gluing([[1]], 2)
    with pytest.raises(LocalSystemError):
        stalk_system_from_gluing([[1, 1], [1, 1]], 3)


def test_stalk_system_on_triangle_must_be_flat():
    B = close([(0, 1, 2)])
    with pytest.raises(LocalSystemError):
        validate_stalk_system(StalkSystem(B, 1, {(0, 1): [[-1]]}))
    S = validate_stalk_system(StalkSystem(B, 1, {(0, 1): [[-1]], (1, 2): [[-1]]}))
    # going around two sides of the triangle agrees with the third side
    assert S.loop_product([0, 1, 2]) == [[1]]
    assert S.transport(0, 2) == [[1]]


def test_twisted_cellular_complex_is_a_complex():
    S = stalk_system_from_gluing([[0, 1], [1, 0]], 5)
    C = twisted_cellular_complex(polygon(5), S, Z)
    C.check()
    with pytest.raises(LocalSystemError):
        twisted_cellular_complex(polygon(4), S, Q)


def test_stalk_comparison_examples():
    circle = trivially_filtered(circle_complex())
    comp = stalk_comparison_map(circle, None, Perversity((0, 0, 0)), Q)
    assert comp.ok and comp.threshold == 1
    assert comp.kinds == {0: "iso", 1: "zero"}
    torus = build("torus7").F
    for p in all_perversities(3):
        comp = stalk_comparison_map(torus, None, p, Q)
        assert comp.ok, comp.failures
    e = build("twisted_cone_bundle")
    comp = stalk_comparison_map(e.link, e.gluing, named_perversity("zero", 2), Q)
    assert comp.ok and comp.kinds[0] == "iso"
