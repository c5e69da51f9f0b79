"""SEARCH/REPLACE edit scripts: wire format and fuzzy application.

Each edit is located by a three-tier cascade: exact lines, whitespace-normalised
lines, then block-wise Levenshtein distance under a small threshold. A match must
be unique within the tier that finds it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

SEARCH_MARK = "<<<<<<< SEARCH"
DIVIDER = "======="
REPLACE_MARK = ">>>>>>> REPLACE"
FILE_PREFIX = "FILE:"

FUZZY_FRACTION = 0.05
FUZZY_FLOOR = 2


@dataclass
class Edit:
    router: str
    search: list[str]
    replace: list[str]


@dataclass
class EditScript:
    edits: list[Edit] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.edits)

    def inverse(self) -> "EditScript":
        return EditScript([Edit(e.router, e.replace, e.search) for e in reversed(self.edits)])


class MatchFailure(Exception):
    """An edit whose search block could not be located uniquely."""

    def __init__(self, router: str, reason: str, nearest: str = "", index: int = 0):
        self.router = router
        self.reason = reason
        self.nearest = nearest
        self.index = index
        super().__init__(self.feedback())

    def feedback(self) -> str:
        msg = f"Edit #{self.index + 1} for FILE {self.router}: search block {self.reason}."
        if self.reason == "not-found" and self.nearest:
            msg += f" Closest existing snippet:\n{self.nearest}"
        elif self.reason == "ambiguous":
            msg += " Include more surrounding lines so the block is uniquely present."
        return msg


class EditFormatError(ValueError):
    pass


def levenshtein(a: str, b: str, limit: int | None = None) -> int:
    """Edit distance; returns ``limit + 1`` early once the distance provably exceeds ``limit``."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if limit is not None and len(a) - len(b) > limit:
        return limit + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        if limit is not None and min(cur) > limit:
            return limit + 1
        prev = cur
    return prev[-1]


def _normalize(line: str) -> str:
    return " ".join(line.split())


def fuzzy_threshold(search: list[str]) -> int:
    chars = len("\n".join(search))
    return max(FUZZY_FLOOR, math.ceil(FUZZY_FRACTION * chars))


def locate(lines: list[str], search: list[str]) -> tuple[int, int]:
    """Return (start, tier) of the unique match of ``search`` in ``lines``.

    Raises:
        LookupError: with args ("not-found", nearest) or ("ambiguous", "").
    """
    n = len(search)
    if n == 0:
        raise LookupError("empty", "")
    windows = range(len(lines) - n + 1)
    exact = [i for i in windows if lines[i : i + n] == search]
    if len(exact) == 1:
        return exact[0], 1
    if len(exact) > 1:
        raise LookupError("ambiguous", "")
    norm_lines = [_normalize(l) for l in lines]
    norm_search = [_normalize(l) for l in search]
    loose = [i for i in windows if norm_lines[i : i + n] == norm_search]
    if len(loose) == 1:
        return loose[0], 2
    if len(loose) > 1:
        raise LookupError("ambiguous", "")
    target = "\n".join(norm_search)
    limit = fuzzy_threshold(search)
    best: list[int] = []
    best_d = None
    nearest_i, nearest_d = None, None
    for i in windows:
        block = "\n".join(norm_lines[i : i + n])
        d = levenshtein(target, block, limit=max(limit, 64))
        if nearest_d is None or d < nearest_d:
            nearest_i, nearest_d = i, d
        if d > limit:
            continue
        if best_d is None or d < best_d:
            best, best_d = [i], d
        elif d == best_d:
            best.append(i)
    if len(best) == 1:
        return best[0], 3
    if len(best) > 1:
        raise LookupError("ambiguous", "")
    nearest = "\n".join(lines[nearest_i : nearest_i + n]) if nearest_i is not None else ""
    raise LookupError("not-found", nearest)


def apply_edits(configs: dict[str, str], script: EditScript) -> dict[str, str]:
    """Apply edits in order; later edits see the results of earlier ones.

    Raises:
        MatchFailure: for the first edit that cannot be located uniquely, or
            that targets a router absent from ``configs``.
    """
    out = dict(configs)
    for idx, edit in enumerate(script.edits):
        if edit.router not in out:
            raise MatchFailure(edit.router, "not-found", "", idx)
        text = out[edit.router]
        trailing = text.endswith("\n")
        lines = text.split("\n")
        if trailing:
            lines = lines[:-1]
        try:
            start, _tier = locate(lines, edit.search)
        except LookupError as exc:
            reason, nearest = exc.args
            if reason == "empty":
                reason = "not-found"
            raise MatchFailure(edit.router, reason, nearest, idx) from None
        lines[start : start + len(edit.search)] = edit.replace
        out[edit.router] = "\n".join(lines) + ("\n" if trailing else "")
    return out


def format_script(script: EditScript) -> str:
    """Serialise an edit script in the bit-exact SEARCH/REPLACE wire format."""
    out: list[str] = []
    for e in script.edits:
        out += [f"{FILE_PREFIX} {e.router}", SEARCH_MARK, *e.search, DIVIDER, *e.replace, REPLACE_MARK]
    return "\n".join(out) + ("\n" if out else "")


_FENCE = re.compile(r"^\s*```")


def parse_script(text: str) -> EditScript:
    """Parse the wire format.

    Raises:
        EditFormatError: naming the file whose block is malformed.
    """
    script = EditScript()
    router: str | None = None
    state = "idle"
    search: list[str] = []
    replace: list[str] = []
    for raw in text.splitlines():
        line = raw.rstrip("\r")
        if state == "idle":
            if _FENCE.match(line) or not line.strip():
                continue
            if line.strip().startswith(FILE_PREFIX):
                router = line.strip()[len(FILE_PREFIX) :].strip()
                if not router:
                    raise EditFormatError("FILE header without a router name")
            elif line.strip() == SEARCH_MARK:
                if router is None:
                    raise EditFormatError("edit block without a preceding FILE header")
                state, search, replace = "search", [], []
            elif line.strip() in (DIVIDER, REPLACE_MARK):
                raise EditFormatError(f"malformed edit block in FILE {router or '?'}")
            continue
        if state == "search":
            if line == DIVIDER:
                state = "replace"
            elif line in (SEARCH_MARK, REPLACE_MARK) or line.strip().startswith(FILE_PREFIX):
                raise EditFormatError(f"malformed edit block in FILE {router}")
            else:
                search.append(line)
        elif state == "replace":
            if line == REPLACE_MARK:
                if not search:
                    raise EditFormatError(f"empty search block in FILE {router}")
                script.edits.append(Edit(router, search, replace))
                state = "idle"
            elif line in (SEARCH_MARK, DIVIDER) or line.strip().startswith(FILE_PREFIX):
                raise EditFormatError(f"malformed edit block in FILE {router}")
            else:
                replace.append(line)
    if state != "idle":
        raise EditFormatError(f"malformed edit block in FILE {router}")
    return script
