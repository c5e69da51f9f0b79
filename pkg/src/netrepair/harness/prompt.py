"""Prompt assembly under the three context strategies, with a character-based token budget."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from importlib import resources

from netrepair.specs import PredicateSet
from netrepair.topo import Topology

PROMPT_VERSION = "np-1"
CHARS_PER_TOKEN = 4
DEFAULT_BUDGET = 120_000


class Strategy(str, enum.Enum):
    FULL = "full"
    ORACLE = "oracle"
    RETRIEVAL = "retrieval"


class PromptBudgetError(ValueError):
    pass


def _doc(name: str) -> str:
    return resources.files("netrepair").joinpath(f"data/{name}").read_text()


INSTRUCTIONS = _doc("prompt_instructions.md")
RETRIEVAL_INSTRUCTIONS = _doc("retrieval_instructions.md")


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text) / CHARS_PER_TOKEN)


@dataclass(frozen=True)
class ProblemInput:
    topology: Topology
    broken: dict[str, str]
    violations: PredicateSet
    strategy: Strategy = Strategy.FULL
    affected: tuple[str, ...] = ()
    selected: tuple[str, ...] | None = None

    def files(self) -> list[str]:
        if self.strategy is Strategy.FULL:
            names = list(self.broken)
        elif self.strategy is Strategy.ORACLE:
            names = list(self.affected)
        else:
            names = list(self.selected or ())
        return sorted(n for n in set(names) if n in self.broken)


def topology_text(t: Topology) -> str:
    return "\n".join(f"{r}: {', '.join(t.neighbors(r))}" for r in t.routers)


def violations_text(v: PredicateSet) -> str:
    return "\n".join(str(p) for p in v)


def _header(inp: ProblemInput, instructions: str) -> str:
    return (
        f"{instructions.rstrip()}\n\n"
        f"# TOPOLOGY\n{topology_text(inp.topology)}\n\n"
        f"# VIOLATED PREDICATES\n{violations_text(inp.violations)}\n"
    )


def _sentinel(n: int) -> str:
    return f"! ... {n} more line(s) elided ..."


def _file_block(router: str, lines: list[str], dropped: int) -> str:
    body = lines + ([_sentinel(dropped)] if dropped else [])
    return f"FILE: {router}\n```\n" + "\n".join(body) + ("\n" if body else "") + "```\n"


def build_prompt(inp: ProblemInput, budget: int = DEFAULT_BUDGET) -> str:
    """Assemble the repair prompt; over-budget files lose tail lines round-robin."""
    head = _header(inp, INSTRUCTIONS)
    names = inp.files()
    if estimate_tokens(head) >= budget:
        raise PromptBudgetError(f"budget of {budget} tokens cannot hold instructions, topology and violations")
    files = {r: inp.broken[r].splitlines() for r in names}
    dropped = {r: 0 for r in names}

    def render() -> str:
        blocks = "".join("\n" + _file_block(r, files[r], dropped[r]) for r in names)
        return f"{head}\n# CONFIGURATIONS\n{blocks}"

    text = render()
    limit = budget * CHARS_PER_TOKEN
    excess = len(text) - limit
    while excess > 0:
        progressed = False
        for r in names:
            if excess <= 0:
                break
            if not files[r]:
                continue
            line = files[r].pop()
            excess -= len(line) + 1
            if dropped[r] == 0:
                excess += len(_sentinel(1)) + 1
            old = len(_sentinel(dropped[r])) if dropped[r] else 0
            dropped[r] += 1
            if old:
                excess += len(_sentinel(dropped[r])) - old
            progressed = True
        if not progressed:
            raise PromptBudgetError(f"budget of {budget} tokens cannot hold the file headers")
    text = render()
    if estimate_tokens(text) > budget:
        raise PromptBudgetError(f"budget of {budget} tokens exceeded after truncation")
    return text


def build_retrieval_prompt(inp: ProblemInput) -> str:
    routers = "\n".join(inp.topology.routers)
    return f"{_header(inp, RETRIEVAL_INSTRUCTIONS)}\n# ROUTERS\n{routers}\n"
