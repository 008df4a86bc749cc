"""Text formats for complexes and coefficient systems, and JSON reports.

Complex file::

    dim 2
    s 0 1 6
    s 1 2 6
    stratum 0: 6

``dim`` is the formal dimension, each ``s`` line a maximal simplex and each
``stratum i:`` line the vertex set of the skeleton ``X_i`` (full
subcomplex).  Unlisted skeleta inherit the next lower one; ``X_n`` is the
whole complex.

Local-system file::

    rank 1
    edge 3 5 : -1

``u v`` are vertices of the barycentric subdivision, or simplices of the
complex written as ``[0,1]`` (their barycenters).  The matrix is row-major
and carries the stalk at ``u`` to the stalk at ``v``.  Unlisted edges carry
the identity.

Stalk-system file: a base (``polygon m`` or ``s`` lines), then one block
per degree::

    polygon 3
    variant cone
    degree 0
    rank 2
    edge 2 0 : 0 1 1 0
"""
from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Iterable

from .algebra import HomologyResult
from .simplicial import FilteredComplex, SimplicialComplex, close, filtered_from_subcomplexes
from .localsys import LocalSystem, StalkSystem, make_local_system, polygon, validate_stalk_system

SCHEMA_VERSION = 1


class FormatError(ValueError):
    pass


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _ints(tokens: Iterable[str], no: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"line {no}: expected integers") from None


# -- complexes ---------------------------------------------------------------

def parse_complex(text: str) -> FilteredComplex:
    n = None
    gens: list[tuple[int, ...]] = []
    strata: dict[int, list[int]] = {}
    for no, line in _lines(text):
        head, _, rest = line.partition(" ")
        if head == "dim":
            n = _ints(rest.split(), no)
            if len(n) != 1 or n[0] < 0:
                raise FormatError(f"line {no}: 'dim' needs one nonnegative integer")
            n = n[0]
        elif head == "s":
            vs = _ints(rest.split(), no)
            if not vs:
                raise FormatError(f"line {no}: empty simplex")
            if len(set(vs)) != len(vs):
                raise FormatError(f"line {no}: repeated vertex in simplex")
            gens.append(tuple(sorted(vs)))
        elif head.startswith("stratum"):
            m = re.fullmatch(r"stratum\s+(\d+)\s*:(.*)", line)
            if not m:
                raise FormatError(f"line {no}: expected 'stratum i: v ...'")
            i = int(m.group(1))
            if i in strata:
                raise FormatError(f"line {no}: stratum {i} listed twice")
            strata[i] = _ints(m.group(2).split(), no)
        else:
            raise FormatError(f"line {no}: unknown keyword {head!r}")
    if n is None:
        raise FormatError("missing 'dim' header")
    K = close(gens)
    verts = set(K.vertices)
    for i, vs in strata.items():
        if i > n:
            raise FormatError(f"stratum {i} exceeds the formal dimension {n}")
        bad = set(vs) - verts
        if bad:
            raise FormatError(f"stratum {i} lists unknown vertices {sorted(bad)}")
    if K.dim > n:
        raise FormatError(f"complex has dimension {K.dim} > formal dimension {n}")
    # skeleta listed by vertex set; nesting is cumulative
    current: set[int] = set()
    skeleta = []
    for i in range(n + 1):
        current = current | set(strata.get(i, ()))
        skeleta.append(K.full_subcomplex(verts if i == n else current))
    return filtered_from_subcomplexes(K, n, skeleta)


def format_complex(F: FilteredComplex) -> str:
    out = [f"dim {F.n}"]
    out += ["s " + " ".join(map(str, s)) for s in sorted(F.complex.maximal_simplices())]
    previous: set[int] = set()
    for i in range(F.n):
        vs = F.skeleton_vertices(i)
        if vs != previous:
            out.append(f"stratum {i}: " + " ".join(map(str, sorted(vs))))
        previous = vs
    return "\n".join(out) + "\n"


def read_complex(path: str | Path) -> FilteredComplex:
    return parse_complex(Path(path).read_text(encoding="utf-8"))


# -- coefficient systems --------------------------------------------------------

def _vertex_token(tok: str, no: int):
    tok = tok.strip()
    if tok.startswith("["):
        if not tok.endswith("]"):
            raise FormatError(f"line {no}: unterminated simplex {tok!r}")
        return tuple(sorted(_ints(tok[1:-1].replace(",", " ").split(), no)))
    return _ints([tok], no)[0]


def _edge_line(rest: str, rank: int | None, no: int):
    if rank is None:
        raise FormatError(f"line {no}: 'rank' must come before edges")
    lhs, sep, rhs = rest.partition(":")
    if not sep:
        raise FormatError(f"line {no}: expected 'edge u v : entries'")
    ends = re.findall(r"\[[^\]]*\]|[^\s\[\]]+", lhs)
    if len(ends) != 2:
        raise FormatError(f"line {no}: an edge has two ends")
    u, v = (_vertex_token(t, no) for t in ends)
    entries = _ints(rhs.split(), no)
    if len(entries) != rank * rank:
        raise FormatError(f"line {no}: expected {rank * rank} entries, got {len(entries)}")
    M = [entries[i * rank:(i + 1) * rank] for i in range(rank)]
    return u, v, M


def _rank_line(rest: str, no: int) -> int:
    r = _ints(rest.split(), no)
    if len(r) != 1 or r[0] < 0:
        raise FormatError(f"line {no}: 'rank' needs one nonnegative integer")
    return r[0]


def parse_local_system(text: str, F: FilteredComplex) -> LocalSystem:
    rank, edges = None, {}
    for no, line in _lines(text):
        head, _, rest = line.partition(" ")
        if head == "rank":
            rank = _rank_line(rest, no)
        elif head == "edge":
            u, v, M = _edge_line(rest, rank, no)
            edges[(u, v)] = M
        else:
            raise FormatError(f"line {no}: unknown keyword {head!r}")
    if rank is None:
        raise FormatError("missing 'rank' line")
    return make_local_system(F, rank, edges)


def format_local_system(L: LocalSystem) -> str:
    out = [f"rank {L.rank}"]
    for (u, v), M in sorted(L.edges.items()):
        out.append(f"edge {u} {v} : " + " ".join(str(x) for row in M for x in row))
    return "\n".join(out) + "\n"


def parse_stalk_systems(text: str) -> tuple[str, dict[int, StalkSystem]]:
    """Return ``(variant, {degree: system})``."""
    base_gens: list[tuple[int, ...]] = []
    base: SimplicialComplex | None = None
    variant = "cone"
    blocks: dict[int, dict] = {}
    current = None
    for no, line in _lines(text):
        head, _, rest = line.partition(" ")
        if head == "polygon":
            m = _ints(rest.split(), no)
            if len(m) != 1 or m[0] < 3:
                raise FormatError(f"line {no}: 'polygon' needs m >= 3")
            base = polygon(m[0])
        elif head == "s":
            base_gens.append(tuple(sorted(_ints(rest.split(), no))))
        elif head == "variant":
            variant = rest.strip()
            if variant not in ("cone", "link"):
                raise FormatError(f"line {no}: variant is 'cone' or 'link'")
        elif head == "degree":
            q = _ints(rest.split(), no)
            if len(q) != 1 or q[0] < 0:
                raise FormatError(f"line {no}: 'degree' needs one nonnegative integer")
            if q[0] in blocks:
                raise FormatError(f"line {no}: degree {q[0]} listed twice")
            current = blocks[q[0]] = {"rank": None, "edges": {}}
        elif head == "rank":
            if current is None:
                raise FormatError(f"line {no}: 'rank' outside a degree block")
            current["rank"] = _rank_line(rest, no)
        elif head == "edge":
            if current is None:
                raise FormatError(f"line {no}: 'edge' outside a degree block")
            u, v, M = _edge_line(rest, current["rank"], no)
            if isinstance(u, tuple) or isinstance(v, tuple):
                raise FormatError(f"line {no}: stalk-system edges join base vertices")
            current["edges"][(u, v)] = M
        else:
            raise FormatError(f"line {no}: unknown keyword {head!r}")
    if base is not None and base_gens:
        raise FormatError("give either 'polygon' or 's' lines for the base, not both")
    if base is None:
        if not base_gens:
            raise FormatError("missing base")
        base = close(base_gens)
    out = {}
    for q, blk in sorted(blocks.items()):
        if blk["rank"] is None:
            raise FormatError(f"degree {q}: missing 'rank'")
        out[q] = validate_stalk_system(StalkSystem(base, blk["rank"], blk["edges"], q))
    return variant, out


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


# -- JSON reports -----------------------------------------------------------------

def padded_homology(H: HomologyResult, degrees: int) -> list[dict]:
    """``H.to_json()`` listing every degree below ``degrees`` (and any nonzero one above)."""
    top = max(degrees, len(H.betti))
    return [{"degree": d, "betti": H.betti_at(d), "torsion": list(H.torsion_at(d))} for d in range(top)]


def homology_report(H: HomologyResult, degrees: int = 0, **meta) -> dict:
    return {"schema": SCHEMA_VERSION, **meta, "ring": H.ring.name, "homology": padded_homology(H, degrees)}


def dump_report(report: dict) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def diff_reports(expected: dict, actual: dict, path: str = "") -> list[str]:
    """Paths at which two JSON values differ."""
    if isinstance(expected, dict) and isinstance(actual, dict):
        out = []
        for k in sorted(set(expected) | set(actual), key=str):
            sub = f"{path}.{k}" if path else str(k)
            if k not in actual:
                out.append(f"{sub}: missing")
            elif k not in expected:
                out.append(f"{sub}: unexpected")
            else:
                out += diff_reports(expected[k], actual[k], sub)
        return out
    if isinstance(expected, list) and isinstance(actual, list):
        if len(expected) != len(actual):
            return [f"{path}: length {len(expected)} != {len(actual)}"]
        out = []
        for i, (a, b) in enumerate(zip(expected, actual)):
            out += diff_reports(a, b, f"{path}[{i}]")
        return out
    return [] if expected == actual else [f"{path}: expected {expected!r}, got {actual!r}"]
