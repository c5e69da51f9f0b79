import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netrepair.configtext import Edit, EditScript, render_devices
from netrepair.configtext.edits import format_script
from netrepair.faults import KINDS, applicable_targets, inject
from netrepair.harness import (
    EndpointError,
    HttpChatClient,
    ModelConfig,
    NullSolver,
    ParseFeedback,
    PerfectSolver,
    ProblemInput,
    PromptBudgetError,
    ScenarioContext,
    Solution,
    Strategy,
    StubClient,
    build_prompt,
    build_retrieval_prompt,
    converse,
    estimate_tokens,
    judge_diagnosis,
    localization_f1,
    parse_file_list,
    parse_judge_reply,
    parse_solution,
    retrieval_recall,
    retrieval_stage,
    solve,
)
from netrepair.harness.prompt import INSTRUCTIONS
from netrepair.plan import build_plan
from netrepair.simulator import compute_dataplane
from netrepair.specs import diff_violations, mine_predicates


class Case:
    def __init__(self, topo, plan, faults):
        self.topology = topo
        self.golden = render_devices(plan.devices)
        broken_plan, self.diff = inject(plan, faults)
        self.broken = render_devices(broken_plan.devices)
        g = compute_dataplane(plan.devices, topo)
        b = compute_dataplane(broken_plan.devices, topo, g.universe)
        self.violations = diff_violations(mine_predicates(g), b, g)
        self.context = ScenarioContext(
            tuple(topo.routers), tuple(self.diff.affected_routers),
            tuple(KINDS[f.kind].summary for f in self.diff.faults), self.diff.repair_script(),
        )

    def input(self, strategy=Strategy.FULL, selected=None):
        return ProblemInput(self.topology, self.broken, self.violations, strategy, tuple(self.diff.affected_routers), selected)


@pytest.fixture(scope="module")
def case(abilene):
    plan = build_plan(abilene, {"ebgp"}, 1)
    return Case(abilene, plan, applicable_targets(plan, "bgp-wrong-remote-as")[:1])


def good_reply(case, routers=None):
    return Solution(list(routers or case.diff.affected_routers), "wrong remote AS", case.diff.repair_script()).to_text()


# -- prompt -------------------------------------------------------------------


def test_full_prompt_verbatim(case):
    text = build_prompt(case.input(), budget=10**6)
    assert "elided" not in text
    for r, cfg in case.broken.items():
        assert f"FILE: {r}\n```\n{cfg}```" in text
    assert INSTRUCTIONS.strip() in text
    for p in case.violations:
        assert str(p) in text
    for header in ("## LOCALIZATION", "## DIAGNOSIS", "## RECONFIGURATION", "<<<<<<< SEARCH", "=======", ">>>>>>> REPLACE"):
        assert header in text


def test_oracle_prompt_only_affected(case):
    text = build_prompt(case.input(Strategy.ORACLE), budget=10**6).split("# CONFIGURATIONS", 1)[1]
    files = [line[6:] for line in text.splitlines() if line.startswith("FILE: ")]
    assert files == case.diff.affected_routers
    assert len(case.diff.affected_routers) == 1


def test_truncation_round_robin(case):
    full = build_prompt(case.input(), budget=10**6)
    budget = estimate_tokens(full) // 2
    text = build_prompt(case.input(), budget=budget)
    assert estimate_tokens(text) <= budget
    assert INSTRUCTIONS.strip() in text
    for r in case.broken:
        assert f"FILE: {r}\n" in text
    sentinels = [line for line in text.splitlines() if line.startswith("! ... ") and "elided" in line]
    assert len(sentinels) >= 1
    # kept lines are a prefix of each file
    for r, cfg in case.broken.items():
        block = text.split(f"FILE: {r}\n```\n", 1)[1].split("```", 1)[0]
        kept = [line for line in block.splitlines() if "elided" not in line]
        assert kept == cfg.splitlines()[: len(kept)]


def test_budget_too_small(case):
    with pytest.raises(PromptBudgetError):
        build_prompt(case.input(), budget=10)


def test_prompt_deterministic(case):
    assert build_prompt(case.input(), 3000) == build_prompt(case.input(), 3000)


def test_retrieval_prompt_lists_routers(case):
    text = build_retrieval_prompt(case.input(Strategy.RETRIEVAL))
    assert all(r in text for r in case.topology.routers)
    assert "## FILES" in text
    assert "FILE: " not in text


# -- solution parsing ---------------------------------------------------------


def test_parse_well_formed(case):
    sol = parse_solution(good_reply(case))
    assert isinstance(sol, Solution)
    assert sol.faulty_routers == case.diff.affected_routers
    assert sol.edits == case.diff.repair_script()


def test_parse_missing_replace_marker():
    text = "## LOCALIZATION\nr3\n## DIAGNOSIS\nx\n## RECONFIGURATION\nFILE: r3\n<<<<<<< SEARCH\na\n=======\nb\n"
    fb = parse_solution(text)
    assert isinstance(fb, ParseFeedback)
    assert fb.message == "malformed edit block in FILE r3"


def test_parse_missing_section():
    fb = parse_solution("## LOCALIZATION\nr1\n")
    assert isinstance(fb, ParseFeedback) and "DIAGNOSIS" in fb.message and "RECONFIGURATION" in fb.message


def test_parse_tolerates_markdown_dressing():
    text = ("**LOCALIZATION:**\n- `r1`\n- r2, r3\n\n### Diagnosis\nbad\n\n# RECONFIGURATION\n```\n"
            "FILE: r1\n<<<<<<< SEARCH\na\n=======\nb\n>>>>>>> REPLACE\n```\n")
    sol = parse_solution(text)
    assert sol.faulty_routers == ["r1", "r2", "r3"]
    assert sol.edits.edits == [Edit("r1", ["a"], ["b"])]


def test_solution_text_round_trip():
    sol = Solution(["a", "b"], "two faults", EditScript([Edit("a", ["x", "y"], []), Edit("b", ["z"], ["w"])]))
    assert parse_solution(sol.to_text()) == sol


def test_file_list():
    assert parse_file_list("## FILES\nr1\n- r2\n") == ["r1", "r2"]
    assert parse_file_list("## FILES\n") == []
    assert isinstance(parse_file_list("r1 r2"), ParseFeedback)


# -- retry path -----------------------------------------------------------------


def test_retry_then_success(case):
    client = StubClient(["no idea", good_reply(case)])
    att = converse(client, "prompt", case.broken)
    assert att.retries == 1 and att.solved
    assert client.calls == 2
    assert att.fixed == case.golden
    roles = [m["role"] for m in att.transcript]
    assert roles == ["user", "assistant", "user", "assistant"]
    assert "missing section" in att.transcript[2]["content"]


def test_retry_limited_to_one(case):
    client = StubClient(["garbage", "still garbage", good_reply(case)])
    att = converse(client, "prompt", case.broken)
    assert client.calls == 2
    assert att.retries == 1 and not att.solved
    assert len(att.transcript) == 4


def test_unmatched_edit_triggers_retry(case):
    bad = Solution(case.diff.affected_routers, "x", EditScript([Edit(case.diff.affected_routers[0], ["no such line"], [])]))
    client = StubClient([bad.to_text(), good_reply(case)])
    att = converse(client, "prompt", case.broken)
    assert att.retries == 1 and att.fixed == case.golden


def test_unknown_router_is_false_positive_not_crash(case):
    truth = case.diff.affected_routers
    reply = Solution(truth + ["ghost"], "x", EditScript(case.diff.repair_script().edits + [Edit("ghost", ["a"], ["b"])])).to_text()
    att = converse(StubClient([reply]), "prompt", case.broken)
    assert att.fixed == case.golden
    assert any("ghost" in w for w in att.warnings)
    assert localization_f1(att.solution.faulty_routers, truth)["precision"] == 0.5


def test_perfect_and_null_solvers(case):
    att, _ = solve(PerfectSolver(), case.input(), 10**6, case.context)
    assert att.fixed == case.golden and att.retries == 0
    att, _ = solve(NullSolver(), case.input(), 10**6, case.context)
    assert not att.solved and att.retries == 1


# -- retrieval -----------------------------------------------------------------


def test_retrieval_select_all(case):
    res = retrieval_stage(StubClient(["## FILES\n" + "\n".join(case.topology.routers)]), case.input(Strategy.RETRIEVAL))
    assert res.recall == 1.0 and not res.fell_back


def test_retrieval_select_none(case):
    client = StubClient(["## FILES\n", good_reply(case)])
    att, res = solve(client, case.input(Strategy.RETRIEVAL), 10**6)
    assert res.selected == () and res.recall == 0.0
    assert "FILE: " not in att.transcript[0]["content"].split("# CONFIGURATIONS", 1)[1]


def test_retrieval_falls_back_to_full(case):
    client = StubClient(["nothing", "nothing", good_reply(case)])
    att, res = solve(client, case.input(Strategy.RETRIEVAL), 10**6)
    assert res.fell_back and [m["role"] for m in res.transcript] == ["user", "assistant", "user", "assistant"]
    assert all(f"FILE: {r}\n" in att.transcript[0]["content"] for r in case.broken)


def test_retrieval_recall_examples():
    assert retrieval_recall({"r2", "r9"}, {"r1", "r2"}) == 0.5
    assert retrieval_recall(set(), {"r1"}) == 0.0


# -- localization --------------------------------------------------------------


def test_f1_examples():
    assert localization_f1({"r1", "r2"}, {"r2", "r3"}) == {"precision": 0.5, "recall": 0.5, "f1": 0.5}
    assert localization_f1({"r1"}, {"r1"})["f1"] == 1.0
    assert localization_f1(set(), {"r1"}) == {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    with pytest.raises(ValueError):
        localization_f1({"a"}, set())


names = st.sets(st.sampled_from("abcdefgh"))


@given(names, names.filter(bool))
def test_f1_bounds(pred, truth):
    m = localization_f1(pred, truth)
    assert all(0.0 <= v <= 1.0 for v in m.values())
    assert min(m["precision"], m["recall"]) - 1e-12 <= m["f1"] <= max(m["precision"], m["recall"]) + 1e-12
    assert (m["f1"] == 1.0) == (pred == truth)


# -- judges ---------------------------------------------------------------------


def judge(reply, name="j"):
    return StubClient([reply] if isinstance(reply, str) else reply, name)


def test_judge_single(case):
    scores, _ = judge_diagnosis("wrong remote AS", case.diff, [judge("SOUNDNESS: 1.0\nCOMPLETENESS: 1.0")])
    assert (scores.soundness, scores.completeness) == (1.0, 1.0)


def test_judge_mean(case):
    js = [judge("SOUNDNESS: 1.0\nCOMPLETENESS: 0.5"), judge("SOUNDNESS: 0.5\nCOMPLETENESS: 0.5")]
    scores, _ = judge_diagnosis("x", case.diff, js)
    assert (scores.soundness, scores.completeness) == (0.75, 0.5)


def test_judge_empty_diagnosis(case):
    scores, _ = judge_diagnosis("", case.diff, [judge("SOUNDNESS: 0\nCOMPLETENESS: 0")])
    assert (scores.soundness, scores.completeness) == (0.0, 0.0)


def test_judge_retry_then_drop(case):
    flaky = judge(["hmm", "SOUNDNESS: 0.2\nCOMPLETENESS: 0.4"], "flaky")
    broken = judge(["hmm", "still hmm", "SOUNDNESS: 1\nCOMPLETENESS: 1"], "broken")
    scores, _ = judge_diagnosis("x", case.diff, [flaky, broken])
    assert (scores.soundness, scores.completeness) == (0.2, 0.4)
    assert scores.dropped == ["broken#1"] and broken.calls == 2


def test_judges_all_fail_or_absent(case):
    assert judge_diagnosis("x", case.diff, [])[0] is None
    scores, reason = judge_diagnosis("x", case.diff, [judge("nope")])
    assert scores is None and reason


def test_judge_prompt_carries_truth(case):
    j = judge("SOUNDNESS: 1\nCOMPLETENESS: 1")
    seen = []
    j.complete = lambda messages, context=None: seen.append(messages[0]["content"]) or "SOUNDNESS: 1\nCOMPLETENESS: 1"
    judge_diagnosis("my diagnosis", case.diff, [j])
    assert "bgp-wrong-remote-as" in seen[0] and "my diagnosis" in seen[0]
    assert any(line.startswith("+ ") and "remote-as" in line for line in seen[0].splitlines())


def test_judge_reply_parsing():
    assert parse_judge_reply("soundness: .5\ncompleteness: 1") == (0.5, 1.0)
    assert parse_judge_reply("SOUNDNESS: 1.5\nCOMPLETENESS: 1") is None
    assert parse_judge_reply("SOUNDNESS: high\nCOMPLETENESS: 1") is None


# -- HTTP client ----------------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    requests: list = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        _Handler.requests.append((self.path, dict(self.headers), body))
        out = json.dumps({"choices": [{"message": {"role": "assistant", "content": "## FILES\nr1\n"}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(out)))
        self.end_headers()
        self.wfile.write(out)

    def log_message(self, *args):
        pass


@pytest.fixture()
def server():
    srv = HTTPServer(("127.0.0.1", 0), _Handler)
    th = threading.Thread(target=srv.serve_forever, daemon=True)
    th.start()
    yield f"http://127.0.0.1:{srv.server_port}/v1"
    srv.shutdown()


def test_http_client(server, monkeypatch):
    monkeypatch.setenv("NR_TEST_KEY", "sekrit")
    cfg = ModelConfig(model="m1", base_url=server, temperature=0.3, timeout_s=5, api_key_env="NR_TEST_KEY")
    reply = HttpChatClient(cfg).complete([{"role": "user", "content": "hi"}])
    assert reply == "## FILES\nr1\n"
    path, headers, body = _Handler.requests[-1]
    assert path == "/v1/chat/completions"
    assert headers["Authorization"] == "Bearer sekrit"
    assert body == {"model": "m1", "messages": [{"role": "user", "content": "hi"}], "temperature": 0.3}


def test_http_client_unreachable():
    cfg = ModelConfig(model="m", base_url="http://127.0.0.1:9", timeout_s=0.5, max_attempts=1)
    with pytest.raises(EndpointError):
        HttpChatClient(cfg).complete([{"role": "user", "content": "hi"}])


def test_script_wire_format_exact():
    text = format_script(EditScript([Edit("r1", ["a"], ["b"])]))
    assert text == "FILE: r1\n<<<<<<< SEARCH\na\n=======\nb\n>>>>>>> REPLACE\n"
