"""Command-line interface.

Exit codes: 0 success, 1 a verification failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import checks
from .algebra import AlgebraError, homology
from .corpus import NAMES, CorpusError, build, oracle_values
from .formats import (
    SCHEMA_VERSION,
    FormatError,
    diff_reports,
    dump_report,
    format_complex,
    homology_report,
    padded_homology,
    parse_complex,
    parse_local_system,
    parse_stalk_systems,
    read_text,
)
from .localsys import LocalSystemError, stalk_comparison_map, twisted_IC
from .perverse import IH_oracle, Perversity, PerversityError, intersection_chain_complex, parse_perversity
from .rings import parse_ring
from .simplicial import ComplexError, connected_components, regular_neighborhood
from .spectral import (
    SpectralError,
    check_laws,
    compute_pages,
    d1_cross_check,
    e2_vs_twisted,
    fiber_stalk_systems,
    filtered_ic,
    skeletal_filtration,
    ss_map_deleted_to_full,
)

OK, FAILED, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_space(source: str):
    """A corpus name or a complex file; returns ``(entry or None, FilteredComplex)``."""
    if source in NAMES:
        e = build(source)
        return e, e.F
    path = Path(source)
    if path.is_file():
        return None, parse_complex(read_text(path))
    raise InputError(f"{source!r} is neither a corpus space ({', '.join(NAMES)}) nor a readable file")


def _ring(text: str, field: bool = False):
    try:
        R = parse_ring(text)
    except ValueError as e:
        raise InputError(str(e)) from None
    if field and not R.is_field:
        raise InputError(f"{R.name} is not a field")
    return R


def _emit(report: dict, path: str | None) -> None:
    text = dump_report(report)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _pstr(p: Perversity) -> str:
    return ",".join(map(str, p.values))


# -- ih ------------------------------------------------------------------------------------

def cmd_ih(args) -> int:
    entry, F = _load_space(args.space)
    p = parse_perversity(args.perversity_flag or args.perversity or "zero", F.n)
    R = _ring(args.ring_flag or args.ring or "Z")
    meta = {"command": "ih", "space": args.space, "perversity": list(p.values)}
    if args.local_system:
        L = parse_local_system(read_text(args.local_system), F)
        ic = twisted_IC(F, p, L, R)
        meta["local_system_rank"] = L.rank
    else:
        ic = intersection_chain_complex(F, p, R)
    H = ic.homology()
    report = homology_report(H, F.n + 1, **meta)
    status = OK
    if args.oracle:
        O = IH_oracle(F, p, R) if not args.local_system else homology(ic.as_chain_complex(), R)
        report["oracle"] = {"homology": padded_homology(O, F.n + 1), "agrees": O == H}
        status = OK if O == H else FAILED
    _emit(report, args.report)
    return status


# -- ss ------------------------------------------------------------------------------------

def _base(F, text: str):
    if text in ("bottom", "apex"):
        Y = F.skeleta[F.bottom_index()]
        if F.bottom_index() == F.n:
            raise InputError("the space has no singular stratum to take a neighborhood of")
        if text == "apex" and len(Y.vertices) != 1:
            raise InputError("'apex' needs a bottom stratum consisting of one vertex")
        return Y
    try:
        vs = [int(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"--base takes 'bottom', 'apex' or a vertex list, not {text!r}") from None
    missing = set(vs) - set(F.complex.vertices)
    if missing:
        raise InputError(f"unknown base vertices {sorted(missing)}")
    return F.complex.full_subcomplex(vs)


def _verdict(r) -> dict:
    return {"ok": r.ok, "failures": list(r.failures)}


def cmd_ss(args) -> int:
    entry, F = _load_space(args.space)
    p = parse_perversity(args.perversity or "zero", F.n)
    R = _ring(args.field or "Q", field=True)
    Y = _base(F, args.base)
    designated = entry is not None and entry.base is not None and Y.members == entry.base.members
    SF = skeletal_filtration(regular_neighborhood(F, Y))
    fc, _ = filtered_ic(SF, p, R)
    ss = compute_pages(fc)
    fcD, _ = filtered_ic(SF, p, R, deleted=True)
    ssD = compute_pages(fcD)
    verdicts = {
        "laws": _verdict(check_laws(ss)),
        "laws_deleted": _verdict(check_laws(ssD)),
        "d1": _verdict(d1_cross_check(fc, ss)),
        "d1_deleted": _verdict(d1_cross_check(fcD, ssD)),
    }
    stalks = {}
    if designated and entry.link is not None:
        for variant in ("cone", "link"):
            if entry.gluing is not None:
                stalks[variant] = fiber_stalk_systems(entry.link, entry.gluing, p, entry.layers, variant, R)
            else:
                stalks[variant] = fiber_stalk_systems(entry.link, None, p, 0, variant, R, base=SF.base)
    if args.stalk_system:
        variant, systems = parse_stalk_systems(read_text(args.stalk_system))
        stalks[variant] = systems
    if "cone" in stalks:
        verdicts["e2_cone"] = _verdict(e2_vs_twisted(ss, stalks["cone"], R))
    if "link" in stalks:
        verdicts["e2_link"] = _verdict(e2_vs_twisted(ssD, stalks["link"], R))
    c = SF.N.n - SF.N.bottom_index()
    comparison = None
    if designated and entry.link is not None:
        comp = stalk_comparison_map(entry.link, entry.gluing, Perversity(p.values[: c + 1]), R)
        verdicts["stalk_comparison"] = _verdict(comp)
        comparison = comp.matrices
    smap = ss_map_deleted_to_full(SF, p, R, codim=c, stalks_link=stalks.get("link"), stalks_cone=stalks.get("cone"), comparison=comparison)
    verdicts["ss_map"] = _verdict(smap)
    report = {
        "schema": SCHEMA_VERSION,
        "command": "ss",
        "space": args.space,
        "perversity": list(p.values),
        "field": R.name,
        "base": {"vertices": sorted(Y.vertices), "codimension": c, "filtration_steps": SF.pmax + 1},
        "neighborhood": ss.to_json(),
        "deleted": ssD.to_json(),
        "e2_map": smap.details,
        "verdicts": verdicts,
    }
    _emit(report, args.report)
    return OK if all(v["ok"] for v in verdicts.values()) else FAILED


# -- check ---------------------------------------------------------------------------------

def cmd_check(args) -> int:
    if args.suite != "all" and args.suite not in checks.SUITES:
        raise InputError(f"unknown suite {args.suite!r}; known: {', '.join(list(checks.SUITES) + ['all'])}")
    suites = checks.run_suite(args.suite)
    report = {"schema": SCHEMA_VERSION, "command": "check", "suite": args.suite,
              "ok": all(s.ok for s in suites), "suites": [s.to_json() for s in suites]}
    for s in suites:
        for c in s.cases:
            print(f"{'PASS' if c['ok'] else 'FAIL'}  {s.suite}: {c['name']}")
    status = OK if report["ok"] else FAILED
    if args.golden:
        try:
            golden = json.loads(read_text(args.golden))
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read golden file: {e}") from None
        diff = diff_reports(golden, report)
        for line in diff:
            print(f"DIFF  {line}")
        if diff:
            status = FAILED
    if args.report:
        Path(args.report).write_text(dump_report(report), encoding="utf-8")
    print("ok" if status == OK else "FAILED")
    return status


# -- corpus --------------------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, dict):
        return [{"p": p, "q": q, "dim": d} for (p, q), d in sorted(v.items())]
    return v


def cmd_corpus(args) -> int:
    if not args.name:
        _emit({"schema": SCHEMA_VERSION, "command": "corpus", "spaces": list(NAMES)}, args.report)
        return OK
    e = build(args.name)
    F = e.F
    info = {
        "schema": SCHEMA_VERSION,
        "command": "corpus",
        "name": e.name,
        "description": e.description,
        "formal_dimension": F.n,
        "f_vector": list(F.complex.f_vector()),
        "pseudomanifold_filtration": F.is_pseudomanifold_filtration(),
        "strata": {str(i): sorted(F.stratum_vertices(i)) for i in range(F.n + 1) if i < F.n and F.stratum_vertices(i)},
        "expected": {k: {"value": _jsonable(v), "provenance": tag} for k, (v, tag) in sorted(e.expected.items())},
    }
    if e.base is not None:
        nb = regular_neighborhood(F, e.base)
        info["frontier_components"] = len(connected_components(nb.N.complex, nb.frontier.members))
    status = OK
    if args.oracle:
        got = oracle_values(e)
        agree = {k: _jsonable(got[k]) == _jsonable(v) for k, (v, _) in e.expected.items()}
        info["oracle"] = {k: {"value": _jsonable(got[k]), "agrees": agree[k]} for k in sorted(got)}
        status = OK if all(agree.values()) else FAILED
    if args.export:
        Path(args.export).write_text(format_complex(F), encoding="utf-8")
    _emit(info, args.report)
    return status


# -- entry point ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ihss", description="Intersection homology and neighborhood spectral sequences of filtered simplicial complexes.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ih", help="intersection homology of a corpus space or complex file")
    p.add_argument("space")
    p.add_argument("perversity", nargs="?", help="comma list like 0,0,0,1 or zero/lower-middle/upper-middle/top")
    p.add_argument("ring", nargs="?", help="Z, Q or Fp (e.g. F2)")
    p.add_argument("--perversity", dest="perversity_flag")
    p.add_argument("--ring", dest="ring_flag")
    p.add_argument("--local-system", help="local-system file")
    p.add_argument("--oracle", action="store_true", help="also compute by brute force and compare")
    p.add_argument("--report", help="write the JSON report here as well")
    p.set_defaults(func=cmd_ih)

    p = sub.add_parser("ss", help="spectral sequences of the neighborhood of the bottom stratum")
    p.add_argument("space")
    p.add_argument("--base", default="bottom", help="'bottom' (default), 'apex' or a vertex list")
    p.add_argument("--perversity")
    p.add_argument("--field", default="Q")
    p.add_argument("--stalk-system", help="stalk-system file")
    p.add_argument("--report")
    p.set_defaults(func=cmd_ss)

    p = sub.add_parser("check", help="run a verification suite")
    p.add_argument("suite", help=", ".join(list(checks.SUITES) + ["all"]))
    p.add_argument("--golden", help="compare the report against this file")
    p.add_argument("--report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("corpus", help="list or describe corpus spaces")
    p.add_argument("name", nargs="?")
    p.add_argument("--oracle", action="store_true", help="recompute the expected values by brute force")
    p.add_argument("--export", help="write the complex in the text format")
    p.add_argument("--report")
    p.set_defaults(func=cmd_corpus)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return BAD_INPUT if e.code else OK
    try:
        return args.func(args)
    except (InputError, FormatError, PerversityError, CorpusError, LocalSystemError, ComplexError, SpectralError, AlgebraError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
