import json

import pytest

from ihss.corpus import NAMES, build, circle_complex
from ihss.formats import (
    FormatError,
    diff_reports,
    dump_report,
    format_complex,
    format_local_system,
    homology_report,
    parse_complex,
    parse_local_system,
    parse_stalk_systems,
)
from ihss.localsys import LocalSystemError, twisted_cellular_homology
from ihss.perverse import IH, all_perversities
from ihss.rings import Q, Z
from ihss.simplicial import trivially_filtered


@pytest.mark.parametrize("name", NAMES)
def test_complex_round_trip(name):
    F = build(name).F
    G = parse_complex(format_complex(F))
    assert G.n == F.n and G.complex == F.complex
    assert all(G.stratum_vertices(i) == F.stratum_vertices(i) for i in range(F.n + 1))
    assert format_complex(G) == format_complex(F)


def test_parse_small_cone():
    F = parse_complex("# closed cone on a triangle\ndim 2\ns 0 1 3\ns 1 2 3\ns 0 2 3\nstratum 0: 3\n")
    assert F.stratum_vertices(0) == {3}
    assert IH(F, all_perversities(2)[0], Z).betti == [1]


@pytest.mark.parametrize("text", [
    "s 0 1\n",                       # missing dim
    "dim 1\ns 0 x\n",                # not an integer
    "dim 1\ns 0 1\nstratum 0: 7\n",  # unknown vertex
    "dim 1\ns 0 1 2\n",              # simplex above the formal dimension
    "dim 2\ns 0 1 2\nfrobnicate\n",  # unknown keyword
])
def test_parse_complex_errors(text):
    with pytest.raises(FormatError):
        parse_complex(text)


def test_local_system_round_trip():
    F = trivially_filtered(circle_complex())
    L = parse_local_system("rank 1\nedge [0] [0,1] : -1\n", F)
    assert parse_local_system(format_local_system(L), F).edges == L.edges


@pytest.mark.parametrize("text,error", [
    ("edge 0 1 : 1\n", FormatError),
    ("rank 1\nedge 0 1 1\n", FormatError),
    ("rank 2\nedge [0] [0,1] : 1 0 0\n", FormatError),
    ("rank 1\nedge [0] [0,1] : 3\n", LocalSystemError),
    ("", FormatError),
])
def test_local_system_errors(text, error):
    with pytest.raises(error):
        parse_local_system(text, trivially_filtered(circle_complex()))


def test_stalk_systems():
    variant, systems = parse_stalk_systems("polygon 3\nvariant link\ndegree 0\nrank 2\nedge 2 0 : 0 1 1 0\ndegree 1\nrank 1\n")
    assert variant == "link" and sorted(systems) == [0, 1]
    assert twisted_cellular_homology(systems[0], Q).betti == [1, 1]
    _, systems = parse_stalk_systems("s 0 1\ns 1 2\ns 0 2\ndegree 0\nrank 1\nedge 0 1 : -1\n")
    assert not any(twisted_cellular_homology(systems[0], Q).betti)


@pytest.mark.parametrize("text", [
    "degree 0\nrank 1\n",
    "polygon 2\n",
    "polygon 3\nrank 1\n",
    "polygon 3\ndegree 0\nedge 0 1 : 1\n",
    "polygon 3\nvariant sideways\n",
    "polygon 3\ndegree 0\nrank 1\ndegree 0\nrank 1\n",
    "polygon 3\ns 0 1\n",
])
def test_stalk_system_errors(text):
    with pytest.raises(FormatError):
        parse_stalk_systems(text)


def test_nonflat_stalk_system_rejected():
    with pytest.raises(LocalSystemError):
        parse_stalk_systems("s 0 1 2\ndegree 0\nrank 1\nedge 0 1 : -1\n")


def test_reports_are_deterministic():
    H = IH(build("pinched_torus").F, all_perversities(2)[0], Z)
    a = dump_report(homology_report(H, 3, space="pinched_torus"))
    b = dump_report(homology_report(H, 3, space="pinched_torus"))
    assert a == b and a.endswith("\n")
    data = json.loads(a)
    assert [h["betti"] for h in data["homology"]] == [1, 0, 1]


def test_diff_reports():
    a = {"x": [1, 2], "y": {"z": 1}, "w": 0}
    assert diff_reports(a, json.loads(json.dumps(a))) == []
    b = {"x": [1, 3], "y": {"z": 1, "extra": 2}}
    assert diff_reports(a, b) == ["w: missing", "x[1]: expected 2, got 3", "y.extra: unexpected"]
    assert diff_reports([1], [1, 2]) == [": length 1 != 2"]
