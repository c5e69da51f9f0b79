"""Parsing model replies into localization, diagnosis and edits; localization scoring."""

from __future__ import annotations

import re
from dataclasses import dataclass

from netrepair.configtext.edits import EditFormatError, EditScript, format_script, parse_script

SECTIONS = ("LOCALIZATION", "DIAGNOSIS", "RECONFIGURATION")
_HEADER = re.compile(r"^\s*#{0,6}\s*\**\s*(LOCALIZATION|DIAGNOSIS|RECONFIGURATION|FILES)\s*:?\s*\**\s*:?\s*$", re.I)
_NAME_SPLIT = re.compile(r"[,\s]+")


@dataclass
class Solution:
    faulty_routers: list[str]
    diagnosis: str
    edits: EditScript

    def to_text(self) -> str:
        return (
            "## LOCALIZATION\n" + "\n".join(self.faulty_routers) + "\n\n"
            "## DIAGNOSIS\n" + self.diagnosis.strip() + "\n\n"
            "## RECONFIGURATION\n" + format_script(self.edits)
        )


@dataclass(frozen=True)
class ParseFeedback:
    message: str


def split_sections(text: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        m = _HEADER.match(line)
        if m and not (current == "RECONFIGURATION" and m.group(1).upper() == "FILES"):
            current = m.group(1).upper()
            out.setdefault(current, [])
        elif current is not None:
            out[current].append(line)
    return out


def _names(lines: list[str]) -> list[str]:
    out = []
    for line in lines:
        line = line.strip().strip("`")
        line = re.sub(r"^([-*+]|\d+[.)])\s+", "", line)
        for tok in _NAME_SPLIT.split(line):
            tok = tok.strip("`*'\".;:")
            if tok and tok not in out:
                out.append(tok)
    return out


def parse_solution(text: str) -> Solution | ParseFeedback:
    sec = split_sections(text)
    missing = [s for s in SECTIONS if s not in sec]
    if missing:
        return ParseFeedback(f"missing section(s): {', '.join(missing)}. Reply with the three headers "
                             "## LOCALIZATION, ## DIAGNOSIS and ## RECONFIGURATION.")
    routers = _names(sec["LOCALIZATION"])
    if not routers:
        return ParseFeedback("empty section LOCALIZATION: list at least one router.")
    diagnosis = "\n".join(sec["DIAGNOSIS"]).strip()
    if not diagnosis:
        return ParseFeedback("empty section DIAGNOSIS.")
    try:
        script = parse_script("\n".join(sec["RECONFIGURATION"]))
    except EditFormatError as exc:
        return ParseFeedback(str(exc))
    if not script.edits:
        return ParseFeedback("no edit blocks in RECONFIGURATION.")
    return Solution(routers, diagnosis, script)


def parse_file_list(text: str) -> list[str] | ParseFeedback:
    sec = split_sections(text)
    if "FILES" not in sec:
        return ParseFeedback("missing section FILES: reply with '## FILES' followed by one router per line.")
    return _names(sec["FILES"])


def localization_f1(predicted, truth) -> dict[str, float]:
    predicted, truth = set(predicted), set(truth)
    if not truth:
        raise ValueError("ground-truth router set is empty")
    hit = len(predicted & truth)
    precision = hit / len(predicted) if predicted else 0.0
    recall = hit / len(truth)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def retrieval_recall(selected, truth) -> float:
    truth = set(truth)
    return len(set(selected) & truth) / len(truth) if truth else 1.0
