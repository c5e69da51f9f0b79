"""Diagnosis grading by one or more judge models."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from netrepair.faults import KINDS, GroundTruthDiff
from netrepair.harness.clients import ChatClient, EndpointError

JUDGE_PROMPT = resources.files("netrepair").joinpath("data/judge_prompt.md").read_text()
_NUM = r"([01](?:\.\d+)?|\.\d+)"
_REPLY = re.compile(rf"SOUNDNESS:\s*{_NUM}\s*[\r\n]+\s*COMPLETENESS:\s*{_NUM}", re.I)


@dataclass
class DiagnosisScores:
    soundness: float
    completeness: float
    per_judge: dict[str, tuple[float, float]] = field(default_factory=dict)
    dropped: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "soundness": self.soundness,
            "completeness": self.completeness,
            "per_judge": {k: {"soundness": s, "completeness": c} for k, (s, c) in self.per_judge.items()},
            "dropped": self.dropped,
        }


def parse_judge_reply(text: str) -> tuple[float, float] | None:
    m = _REPLY.search(text)
    if not m:
        return None
    s, c = float(m.group(1)), float(m.group(2))
    if not (0.0 <= s <= 1.0 and 0.0 <= c <= 1.0):
        return None
    return s, c


def judge_prompt(diagnosis: str, diff: GroundTruthDiff) -> str:
    faults = "\n".join(f"- {f.kind}: {KINDS[f.kind].summary}" for f in diff.faults)
    hunks = []
    for h in diff.hunks:
        lines = [f"router {h.router}"] + [f"- {x}" for x in h.before] + [f"+ {x}" for x in h.after]
        hunks.append("\n".join(lines))
    return (
        f"{JUDGE_PROMPT.rstrip()}\n\n# INJECTED FAULTS\n{faults}\n\n"
        f"# CHANGED LINES (golden -, broken +)\n" + "\n\n".join(hunks) + f"\n\n# DIAGNOSIS\n{diagnosis.strip() or '(empty)'}\n"
    )


def judge_diagnosis(diagnosis: str, diff: GroundTruthDiff, judges: list[ChatClient]) -> tuple[DiagnosisScores | None, str]:
    """Mean scores over the judges that answered; (None, reason) when none did."""
    if not judges:
        return None, "no judges configured"
    prompt = judge_prompt(diagnosis, diff)
    got: dict[str, tuple[float, float]] = {}
    dropped = []
    for i, j in enumerate(judges):
        key = f"{getattr(j, 'name', 'judge')}#{i}"
        messages = [{"role": "user", "content": prompt}]
        score = None
        for _ in range(2):
            try:
                reply = j.complete(messages)
            except EndpointError:
                break
            score = parse_judge_reply(reply)
            if score is not None:
                break
            messages += [{"role": "assistant", "content": reply},
                         {"role": "user", "content": "Reply with exactly two lines: SOUNDNESS: <number> and COMPLETENESS: <number>."}]
        if score is None:
            dropped.append(key)
        else:
            got[key] = score
    if not got:
        return None, "every judge failed to return a usable score"
    n = len(got)
    return DiagnosisScores(sum(s for s, _ in got.values()) / n, sum(c for _, c in got.values()) / n, got, dropped), ""
