import difflib
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netrepair.configtext import (
    ConfigParseError,
    Edit,
    EditFormatError,
    EditScript,
    MatchFailure,
    apply_edits,
    format_script,
    parse_config,
    parse_script,
    render_devices,
)
from netrepair.configtext.edits import fuzzy_threshold, levenshtein
from netrepair.faults import applicable_targets, inject
from netrepair.plan import build_plan
from netrepair.simulator import compute_dataplane
from netrepair.topo import load_topology

SNAPSHOT = Path(__file__).parent / "snapshots" / "triangle-seed1"

CFG = """hostname r1
!
router bgp 65001
 neighbor 10.0.0.1 remote-as 65002
 neighbor 10.0.0.1 route-map RM_OUT out
!
end
"""


def test_single_router_single_loopback_stanza():
    t = load_topology({"name": "one", "routers": ["solo"], "links": []})
    text = render_devices(build_plan(t, set(), 0).devices)["solo"]
    assert text.count("interface Loopback0") == 1
    assert "ip address 172.20.0.1 255.255.255.255" in text


def test_triangle_snapshot(triangle):
    texts = render_devices(build_plan(triangle, set(), 1).devices)
    assert sorted(texts) == sorted(p.stem for p in SNAPSHOT.glob("*.cfg"))
    for r, text in texts.items():
        assert text == (SNAPSHOT / f"{r}.cfg").read_text()


def test_wrong_remote_as_changes_one_token(abilene):
    plan = build_plan(abilene, {"ebgp"}, 1)
    fault = applicable_targets(plan, "bgp-wrong-remote-as")[0]
    broken, _ = inject(plan, [fault])
    gold, bad = render_devices(plan.devices), render_devices(broken.devices)
    changed = [r for r in gold if gold[r] != bad[r]]
    assert len(changed) == 1
    g, b = gold[changed[0]].split(), bad[changed[0]].split()
    assert len(g) == len(b)
    assert sum(x != y for x, y in zip(g, b)) == 1


def test_unknown_line_is_a_warning():
    plain = parse_config(CFG, "r1")
    noisy = parse_config(CFG.replace("!\nrouter", "banner motd hello\n!\nrouter", 1), "r1")
    assert len(noisy.warnings) == 1
    noisy.warnings = plain.warnings
    assert noisy == plain


def test_undefined_route_map_is_dangling_and_permits(triangle):
    plan = build_plan(triangle, {"ebgp"}, 0)
    models = {r: d for r, d in plan.devices.items()}
    baseline = compute_dataplane(models, triangle)
    # point every neighbor at a map that is never defined
    texts = render_devices(plan.devices)
    bent = {}
    for r, text in texts.items():
        lines = []
        for line in text.splitlines():
            if " route-map " in line and line.startswith(" neighbor"):
                line = line.rsplit(" ", 2)[0] + " RM_MISSING " + line.rsplit(" ", 1)[1]
            lines.append(line)
        bent[r] = "\n".join(lines) + "\n"
    parsed = {r: parse_config(t, r) for r, t in bent.items()}
    assert any(d.dangling for d in parsed.values())
    for d in parsed.values():
        for n in d.bgp.neighbors:
            assert n.route_map_out in (None, "RM_MISSING")
    # permit-all baseline: strip the maps entirely
    for d in models.values():
        for n in d.bgp.neighbors:
            n.route_map_in = n.route_map_out = None
    assert compute_dataplane(parsed, triangle).entries == compute_dataplane(models, triangle).entries
    assert baseline.universe


def test_missing_end_is_a_parse_error():
    with pytest.raises(ConfigParseError):
        parse_config(CFG.replace("end\n", ""), "r1")


def test_unique_exact_edit():
    out = apply_edits({"r1": CFG}, EditScript([Edit("r1", [" neighbor 10.0.0.1 remote-as 65002"], [" neighbor 10.0.0.1 remote-as 65001"])]))
    diff = [l for l in difflib.ndiff(CFG.splitlines(), out["r1"].splitlines()) if l[:1] in "+-"]
    assert len(diff) == 2


def test_whitespace_variant_matches():
    out = apply_edits({"r1": CFG}, EditScript([Edit("r1", ["neighbor  10.0.0.1   remote-as 65002  "], [" neighbor 10.0.0.1 remote-as 65003"])]))
    assert "remote-as 65003" in out["r1"]


def test_fuzzy_variant_within_threshold_matches():
    out = apply_edits({"r1": CFG}, EditScript([Edit("r1", [" neighbor 10.0.0.1 remote-as 6500"], [" neighbor 10.0.0.1 remote-as 65009"])]))
    assert "remote-as 65009" in out["r1"]


def test_fuzzy_variant_beyond_threshold_fails():
    with pytest.raises(MatchFailure) as exc:
        apply_edits({"r1": CFG}, EditScript([Edit("r1", [" neighbor 10.9.9.9 remote-as 99999"], ["x"])]))
    assert exc.value.reason == "not-found"
    assert "Closest existing snippet" in exc.value.feedback()


def test_duplicate_block_is_ambiguous():
    with pytest.raises(MatchFailure) as exc:
        apply_edits({"r1": CFG}, EditScript([Edit("r1", ["!"], ["! x"])]))
    assert exc.value.reason == "ambiguous"


def test_unknown_router_is_not_found():
    with pytest.raises(MatchFailure) as exc:
        apply_edits({"r1": CFG}, EditScript([Edit("r9", ["end"], ["end"])]))
    assert exc.value.reason == "not-found"


def test_empty_script_is_identity():
    assert apply_edits({"r1": CFG}, EditScript()) == {"r1": CFG}


def test_threshold_floor_and_fraction():
    assert fuzzy_threshold(["ab"]) == 2
    assert fuzzy_threshold(["x" * 100]) == 5


def test_wire_format_round_trip():
    script = EditScript([Edit("r1", ["a", " b"], []), Edit("r2", ["c"], ["d", "e"])])
    text = format_script(script)
    assert text.splitlines()[:2] == ["FILE: r1", "<<<<<<< SEARCH"]
    assert parse_script(text) == script


def test_missing_replace_delimiter():
    with pytest.raises(EditFormatError, match="malformed edit block in FILE r3"):
        parse_script("FILE: r3\n<<<<<<< SEARCH\nx\n=======\ny\n")


words = st.text(alphabet="abcdefgh ", min_size=0, max_size=12)


@given(words, words)
def test_levenshtein_is_a_metric(a, b):
    d = levenshtein(a, b)
    assert d == levenshtein(b, a)
    assert (d == 0) == (a == b)
    assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))
