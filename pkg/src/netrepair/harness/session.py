"""One scenario's model conversation: optional retrieval stage, repair prompt, single feedback retry."""

from __future__ import annotations

from dataclasses import dataclass, field

from netrepair.configtext.edits import EditScript, MatchFailure, apply_edits
from netrepair.harness.clients import ChatClient, ScenarioContext
from netrepair.harness.prompt import ProblemInput, Strategy, build_prompt, build_retrieval_prompt
from netrepair.harness.solution import ParseFeedback, Solution, parse_file_list, parse_solution, retrieval_recall

MAX_RETRIES = 1


@dataclass
class Attempt:
    solution: Solution | None
    transcript: list[dict] = field(default_factory=list)
    retries: int = 0
    fixed: dict[str, str] | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.solution is not None


def apply_solution(broken: dict[str, str], script: EditScript) -> tuple[dict[str, str], list[str]]:
    """Apply edits one at a time, skipping edits for unknown routers or unmatched blocks."""
    out = dict(broken)
    warnings = []
    for idx, e in enumerate(script.edits):
        if e.router not in out:
            warnings.append(f"edit #{idx + 1} targets unknown router {e.router}; skipped")
            continue
        try:
            out = apply_edits(out, EditScript([e]))
        except MatchFailure as exc:
            exc.index = idx
            warnings.append(exc.feedback())
    return out, warnings


def _check_edits(broken: dict[str, str], script: EditScript) -> str | None:
    known = EditScript([e for e in script.edits if e.router in broken])
    try:
        apply_edits(broken, known)
    except MatchFailure as exc:
        return exc.feedback()
    return None


def converse(client: ChatClient, prompt: str, broken: dict[str, str], context: ScenarioContext | None = None) -> Attempt:
    messages = [{"role": "user", "content": prompt}]
    att = Attempt(None)
    while True:
        reply = client.complete(messages, context)
        messages.append({"role": "assistant", "content": reply})
        parsed = parse_solution(reply)
        feedback = parsed.message if isinstance(parsed, ParseFeedback) else _check_edits(broken, parsed.edits)
        if feedback is None or att.retries >= MAX_RETRIES:
            break
        att.retries += 1
        messages.append({"role": "user", "content": f"Your answer could not be used: {feedback}\nPlease reply again in the required format."})
    att.transcript = messages
    if isinstance(parsed, Solution):
        att.solution = parsed
        att.fixed, att.warnings = apply_solution(broken, parsed.edits)
    else:
        att.warnings.append(parsed.message)
    return att


@dataclass
class RetrievalResult:
    selected: tuple[str, ...]
    recall: float
    transcript: list[dict]
    fell_back: bool = False


def retrieval_stage(client: ChatClient, inp: ProblemInput, context: ScenarioContext | None = None) -> RetrievalResult:
    prompt = build_retrieval_prompt(inp)
    messages = [{"role": "user", "content": prompt}]
    parsed = None
    for attempt in range(MAX_RETRIES + 1):
        reply = client.complete(messages, context)
        messages.append({"role": "assistant", "content": reply})
        parsed = parse_file_list(reply)
        if not isinstance(parsed, ParseFeedback):
            break
        if attempt < MAX_RETRIES:
            messages.append({"role": "user", "content": f"Your answer could not be used: {parsed.message}"})
    if isinstance(parsed, ParseFeedback):
        selected = tuple(sorted(inp.broken))
        return RetrievalResult(selected, retrieval_recall(selected, inp.affected), messages, True)
    selected = tuple(r for r in parsed if r in inp.broken)
    return RetrievalResult(selected, retrieval_recall(selected, inp.affected), messages)


def solve(client: ChatClient, inp: ProblemInput, budget: int, context: ScenarioContext | None = None):
    """Run the full conversation for one scenario; returns (attempt, retrieval result or None)."""
    retrieval = None
    if inp.strategy is Strategy.RETRIEVAL:
        retrieval = retrieval_stage(client, inp, context)
        if retrieval.fell_back:
            inp = ProblemInput(inp.topology, inp.broken, inp.violations, Strategy.FULL, inp.affected)
        else:
            inp = ProblemInput(inp.topology, inp.broken, inp.violations, Strategy.RETRIEVAL, inp.affected, retrieval.selected)
    return converse(client, build_prompt(inp, budget), inp.broken, context), retrieval
