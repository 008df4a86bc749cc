"""Verification suites run by ``ihss check``.

Each suite returns a :class:`SuiteReport` whose JSON form is deterministic
(no timings), so it can be compared against a golden file.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .algebra import ChainComplex, Subquotient, check_exact, mayer_vietoris, simplicial_chain_complex, triple_sequence
from .corpus import BUNDLES, NAMES, NEIGHBORHOOD_SPACES, build, circle_complex, torus7_complex, two_circles
from .localsys import stalk_comparison_map
from .perverse import (
    IH,
    Perversity,
    _embed,
    all_perversities,
    cone_formula_check,
    intersection_chain_complex,
    named_perversity,
    prism_check,
)
from .rings import GF, Q, Z, Ring
from .simplicial import FilteredComplex, all_faces, Subcomplex, barycentric_subdivision, star_link, subdivide_filtered, trivially_filtered
from .spectral import (
    check_laws,
    compute_pages,
    d1_cross_check,
    e1_decomposition_check,
    e2_vs_twisted,
    fiber_stalk_systems,
    filtered_ic,
    neighborhood_filtration,
    ss_map_deleted_to_full,
)

STANDARD_PERVERSITIES = ("zero", "lower-middle", "upper-middle")


@dataclass
class SuiteReport:
    suite: str
    cases: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.cases)

    def add(self, name: str, ok: bool, **details) -> None:
        self.cases.append({"name": name, "ok": bool(ok), **details})

    def failures(self) -> list[str]:
        return [c["name"] for c in self.cases if not c["ok"]]

    def to_json(self) -> dict:
        return {"suite": self.suite, "ok": self.ok, "cases": self.cases}


def _pstr(p: Perversity) -> str:
    return ",".join(map(str, p.values))


def standard_perversities(n: int) -> list[Perversity]:
    out = []
    for name in STANDARD_PERVERSITIES:
        p = named_perversity(name, n)
        if p not in out:
            out.append(p)
    return out


# -- cone formula -------------------------------------------------------------------

def cone_links() -> dict[str, FilteredComplex]:
    return {
        "circle": trivially_filtered(circle_complex()),
        "torus7": trivially_filtered(torus7_complex()),
        "two_circles": trivially_filtered(two_circles()),
    }


def cone_formula_suite(ring: Ring = Z) -> SuiteReport:
    rep = SuiteReport("cone-formula")
    for name, L in cone_links().items():
        for p in all_perversities(L.n + 1):
            r = cone_formula_check(L, p, ring)
            rep.add(f"{name} p={_pstr(p)}", r.ok, cone=r.cone.to_json(), predicted=r.predicted.to_json(), notes=r.notes)
    return rep


# -- ordinary homology degeneration -------------------------------------------------

def degeneration_suite(names=("sphere2", "torus7", "rp2_6")) -> SuiteReport:
    """With no singular strata, ``IH`` is ordinary homology for every perversity."""
    from .algebra import homology

    rep = SuiteReport("degeneration")
    for name in names:
        F = build(name).F
        H = homology(simplicial_chain_complex(F.complex, Z), Z)
        for n in range(F.n, 4):
            Fn = trivially_filtered(F.complex, n)
            for p in all_perversities(n):
                got = IH(Fn, p, Z)
                rep.add(f"{name} n={n} p={_pstr(p)}", got == H, homology=got.to_json())
    return rep


# -- exactness ----------------------------------------------------------------------------

def _span_of(sub: Subcomplex, C: ChainComplex) -> list[list[dict]]:
    out = [[] for _ in range(C.top + 1)]
    for d in range(C.top + 1):
        for j, s in enumerate(C.labels[d]):
            if s in sub:
                out[d].append({j: 1})
    return out


def _trim(b: list[int]) -> list[int]:
    b = list(b)
    while b and not b[-1]:
        b.pop()
    return b


def _exact(rep: SuiteReport, name: str, seq, ring: Ring, **extra) -> None:
    maps, dims, names = seq[:3]
    r = check_exact(maps, dims, ring)
    rep.add(name, r.ok, ring=ring.name, dims=list(dims), failures=[f"{names[i]}: {why}" for i, why in r.failures], **extra)


def _ic_span(F: FilteredComplex, sub: Subcomplex, p: Perversity, C: ChainComplex, ring: Ring) -> list[list[dict]]:
    """Intersection chains of ``sub`` (inherited strata) inside the ambient chains ``C`` of ``F``."""
    if not len(sub):
        return [[] for _ in range(C.top + 1)]
    ic = intersection_chain_complex(F.restrict(sub), p, ring)
    return _embed(ic, C)


def _pair_or_triple(F: FilteredComplex) -> tuple[str, list[Subcomplex]]:
    """A nested pair or triple of subcomplexes: the singular skeleta, or low skeleta when unfiltered."""
    K = F.complex
    if F.bottom_index() < F.n:
        chain, seen = [], set()
        for i in range(F.n - 1, -1, -1):
            X = F.skeleta[i]
            if len(X) and X.members not in seen:
                seen.add(X.members)
                chain.append(X)
        return "skeleta", chain[:2]
    skel = [Subcomplex(K, (s for s in K if len(s) <= k + 1)) for k in (1, 0)]
    return "simplicial skeleta", skel


def exactness_suite(neighborhoods=("cone_s1", "cone_t2", "pinched_torus", "susp_t2", "twisted_cone_bundle")) -> SuiteReport:
    rep = SuiteReport("exactness")
    # long exact sequences of chain-level pairs and triples for every corpus space
    for name in NAMES:
        F = build(name).F
        kind, chain = _pair_or_triple(F)
        for ring in (Q, GF(2)):
            C = simplicial_chain_complex(F.complex, ring)
            A = _span_of(chain[0], C)
            B = _span_of(chain[1], C) if len(chain) > 1 else None
            _exact(rep, f"{name} chains triple ({kind}) over {ring.name}", triple_sequence(C, A, B, None, ring), ring)
        # intersection chains relative to the bottom stratum's skeleton
        if F.bottom_index() < F.n:
            p = named_perversity("zero", F.n)
            C = simplicial_chain_complex(F.complex, Q)
            W = _embed(intersection_chain_complex(F, p, Q, ambient=C), C)
            A = _ic_span(F, F.skeleta[F.bottom_index()], p, C, Q)
            _exact(rep, f"{name} IC pair (X, X_bottom)", triple_sequence(C, A, None, W, Q), Q)
    # Mayer-Vietoris: sphere as a disk around a barycenter plus the rest
    sd = barycentric_subdivision(build("sphere2").F.complex)
    K = sd.complex
    b = sd.barycenter[(1, 2, 3)]
    star, _ = star_link(K, K.full_subcomplex([b]))
    rest = Subcomplex(K, (f for t in K.simplices_of_dim(2) if b not in t for f in all_faces(t)))
    C = simplicial_chain_complex(K, Q)
    seq = mayer_vietoris(C, _span_of(rest, C), _span_of(star, C), None, Q)
    _exact(rep, "sphere2 MV (disk + complementary disk)", seq, Q, fills=seq[3]["sum_fills_ambient"])
    # neighborhood-level sequences: (N, frontier), the filtration triple, and MV over base pieces
    for name in neighborhoods:
        e = build(name)
        SF = neighborhood_filtration(e.F, e.base)
        for p in standard_perversities(e.F.n):
            fc, ic = filtered_ic(SF, p, Q)
            C = fc.ambient
            W = [list(b) for b in ic.basis]
            front = _ic_span(SF.N, SF.nb.frontier, p, C, Q)
            _exact(rep, f"{name} p={_pstr(p)} IC pair (N, frontier)", triple_sequence(C, front, None, W, Q), Q)
            if SF.pmax >= 1:
                seq = triple_sequence(C, fc.F(1), fc.F(0), fc.F(2) if SF.pmax >= 2 else W, Q)
                _exact(rep, f"{name} p={_pstr(p)} IC filtration triple", seq, Q)
            tops = sorted(s for s in SF.base if not any(set(s) < set(t) for t in SF.base))
            if len(tops) > 1:
                A_sub, _ = SF.piece(tops[0])
                B_members = set()
                for alpha in tops[1:]:
                    piece, _ = SF.piece(alpha)
                    B_members |= piece.members
                B_sub = Subcomplex(SF.N.complex, B_members, check=False)
                I_sub = Subcomplex(SF.N.complex, A_sub.members & B_sub.members, check=False)
                A, B, I = (_ic_span(SF.N, X, p, C, Q) for X in (A_sub, B_sub, I_sub))
                seq = mayer_vietoris(C, A, B, I, Q)
                # the sum IC(A) + IC(B) can be smaller than IC(N) at chain level; compare homology
                union = Subquotient(C, [a + b for a, b in zip(A, B)], None, Q).betti()
                whole = Subquotient(C, W, None, Q).betti()
                _exact(rep, f"{name} p={_pstr(p)} IC MV over base pieces", seq, Q,
                       fills=seq[3]["sum_fills_ambient"], union_homology_is_IH=_trim(union) == _trim(whole))
    return rep


# -- prism ------------------------------------------------------------------------------

def prism_suite(names=NAMES, max_dim: int = 4) -> SuiteReport:
    rep = SuiteReport("prism")
    for name in names:
        F = build(name).F
        for p in standard_perversities(F.n):
            r = prism_check(F, p, max_dim=max_dim)
            rep.add(f"{name} p={_pstr(p)}", r.ok, simplices=r.checked_simplices, cycles=r.checked_chains, failures=r.failures[:5])
    return rep


# -- subdivision -------------------------------------------------------------------------

def subdivision_suite(names=NAMES, ring: Ring = Z) -> SuiteReport:
    rep = SuiteReport("subdivision")
    for name in names:
        F = build(name).F
        sF, _ = subdivide_filtered(F)
        for p in standard_perversities(F.n):
            a, b = IH(F, p, ring), IH(sF, p, ring)
            rep.add(f"{name} p={_pstr(p)}", a == b, IH=a.to_json(), IH_subdivided=b.to_json())
    return rep


# -- spectral sequences ----------------------------------------------------------------

def _perversities_for(name: str, n: int, full: bool) -> list[Perversity]:
    return all_perversities(n) if full else standard_perversities(n)


def spectral_suite(names=NEIGHBORHOOD_SPACES, ring: Ring = Q, full: bool = False) -> SuiteReport:
    """Page laws, abutment and the d^1 cross-check on every neighborhood."""
    rep = SuiteReport("spectral")
    for name in names:
        e = build(name)
        SF = neighborhood_filtration(e.F, e.base)
        for p in _perversities_for(name, e.F.n, full):
            fc, ic = filtered_ic(SF, p, ring)
            ss = compute_pages(fc)
            laws = check_laws(ss)
            d1 = d1_cross_check(fc, ss)
            nonzero = sum(1 for d in d1.details if d["nonzero"])
            rep.add(f"{name} p={_pstr(p)} laws", laws.ok, homology=list(ss.homology), failures=laws.failures)
            rep.add(f"{name} p={_pstr(p)} d1", d1.ok, nonzero_matrices=nonzero, failures=d1.failures)
    return rep


def _stalks(e, SF, p: Perversity, variant: str, ring: Ring):
    if e.link is None:
        return None
    if e.gluing is not None:
        return fiber_stalk_systems(e.link, e.gluing, p, e.layers, variant, ring)
    return fiber_stalk_systems(e.link, None, p, 0, variant, ring, base=SF.base)


def _cells(ss, r: int) -> dict:
    return {f"{p},{q}": d for (p, q), d in sorted(ss.nonzero(r).items())}


def e2_suite(names=NEIGHBORHOOD_SPACES, ring: Ring = Q, full: bool = True) -> SuiteReport:
    """E^1 decomposition over base pieces and E^2 against twisted cellular homology."""
    rep = SuiteReport("e2")
    for name in names:
        e = build(name)
        SF = neighborhood_filtration(e.F, e.base)
        for p in _perversities_for(name, e.F.n, full):
            fc, _ = filtered_ic(SF, p, ring)
            ss = compute_pages(fc)
            r = e1_decomposition_check(SF, p, ss, ring)
            rep.add(f"{name} p={_pstr(p)} E1 pieces", r.ok, failures=r.failures)
            r = e2_vs_twisted(ss, _stalks(e, SF, p, "cone", ring), ring)
            rep.add(f"{name} p={_pstr(p)} E2 = H(base; IH(cone))", r.ok, E2=_cells(ss, 2), failures=r.failures)
            fcD, _ = filtered_ic(SF, p, ring, deleted=True)
            ssD = compute_pages(fcD)
            r = e2_vs_twisted(ssD, _stalks(e, SF, p, "link", ring), ring)
            rep.add(f"{name} p={_pstr(p)} deleted E2 = H(base; IH(link))", r.ok, E2=_cells(ssD, 2), failures=r.failures)
    return rep


def ss_map_suite(names=NEIGHBORHOOD_SPACES, ring: Ring = Q, full: bool = True) -> SuiteReport:
    rep = SuiteReport("ss-map")
    for name in names:
        e = build(name)
        SF = neighborhood_filtration(e.F, e.base)
        c = SF.N.n - SF.N.bottom_index()
        for p in _perversities_for(name, e.F.n, full):
            fp = Perversity(p.values[: c + 1])
            comp = stalk_comparison_map(e.link, e.gluing, fp, ring)
            rep.add(f"{name} p={_pstr(p)} stalk comparison", comp.ok, kinds={str(q): k for q, k in sorted(comp.kinds.items())}, failures=comp.failures)
            r = ss_map_deleted_to_full(
                SF, p, ring, codim=c,
                stalks_link=_stalks(e, SF, p, "link", ring),
                stalks_cone=_stalks(e, SF, p, "cone", ring),
                comparison=comp.matrices,
            )
            kinds = {f"{d['p']},{d['q']}": d["kind"] for d in r.details if d["source"] or d["target"]}
            rep.add(f"{name} p={_pstr(p)} E2 map", r.ok, threshold=c - 1 - p(c), kinds=kinds, failures=r.failures)
    return rep


SUITES: dict[str, Callable[[], SuiteReport]] = {
    "cone-formula": cone_formula_suite,
    "exactness": exactness_suite,
    "prism": prism_suite,
    "subdivision": subdivision_suite,
    "spectral": spectral_suite,
    "e2": e2_suite,
    "ss-map": ss_map_suite,
}


def run_suite(name: str) -> list[SuiteReport]:
    if name == "all":
        return [SUITES[k]() for k in SUITES]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(list(SUITES) + ['all'])}")
    return [SUITES[name]()]
