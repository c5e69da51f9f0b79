"""Chat-completion clients: HTTP endpoint, canned-reply stub, and scripted solvers."""

from __future__ import annotations

import json
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from netrepair.configtext.edits import EditScript, format_script

Message = dict  # {"role": ..., "content": ...}


class EndpointError(RuntimeError):
    pass


@dataclass
class ScenarioContext:
    """What scripted solvers may peek at; real models never see it."""

    routers: tuple[str, ...] = ()
    truth_routers: tuple[str, ...] = ()
    fault_summaries: tuple[str, ...] = ()
    repair: EditScript = field(default_factory=EditScript)


class ChatClient(Protocol):
    name: str

    def complete(self, messages: list[Message], context: ScenarioContext | None = None) -> str: ...


@dataclass
class ModelConfig:
    model: str
    base_url: str = ""
    temperature: float = 0.0
    timeout_s: float = 120.0
    api_key_env: str | None = None
    kind: str = "http"  # http | stub | perfect | null
    replies: list[str] = field(default_factory=list)
    replies_dir: str | None = None
    max_attempts: int = 3

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "ModelConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        cfg = cls(**known)
        if cfg.replies_dir and base is not None and not Path(cfg.replies_dir).is_absolute():
            cfg.replies_dir = str(base / cfg.replies_dir)
        return cfg


def load_model_config(path: str | Path) -> ModelConfig:
    path = Path(path)
    return ModelConfig.from_dict(json.loads(path.read_text()), path.parent)


def load_judge_configs(path: str | Path) -> list[ModelConfig]:
    path = Path(path)
    doc = json.loads(path.read_text())
    items = doc["judges"] if isinstance(doc, dict) else doc
    return [ModelConfig.from_dict(d, path.parent) for d in items]


class HttpChatClient:
    def __init__(self, cfg: ModelConfig):
        if not cfg.base_url:
            raise ValueError("base_url is required for an HTTP model")
        self.cfg = cfg
        self.name = cfg.model

    def complete(self, messages: list[Message], context: ScenarioContext | None = None) -> str:
        cfg = self.cfg
        body = json.dumps({"model": cfg.model, "messages": messages, "temperature": cfg.temperature}).encode()
        headers = {"Content-Type": "application/json"}
        if cfg.api_key_env:
            key = os.environ.get(cfg.api_key_env)
            if key:
                headers["Authorization"] = f"Bearer {key}"
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        last = None
        for attempt in range(cfg.max_attempts):
            req = urllib.request.Request(url, data=body, headers=headers, method="POST")
            try:
                with urllib.request.urlopen(req, timeout=cfg.timeout_s) as resp:
                    return _first_text(json.loads(resp.read()))
            except (urllib.error.URLError, TimeoutError, ConnectionError, json.JSONDecodeError) as exc:
                last = exc
                if attempt + 1 < cfg.max_attempts:
                    time.sleep(min(2**attempt, 8) * 0.5)
        raise EndpointError(f"{url} unreachable after {cfg.max_attempts} attempts: {last}")


def _first_text(reply: dict) -> str:
    try:
        content = reply["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise EndpointError("reply carries no message content") from None
    if isinstance(content, list):
        for part in content:
            if isinstance(part, dict) and part.get("type") == "text":
                return part.get("text", "")
        return ""
    return content or ""


class StubClient:
    """Replays canned replies in order; the last one repeats once exhausted."""

    def __init__(self, replies: list[str], name: str = "stub"):
        if not replies:
            raise ValueError("stub client needs at least one reply")
        self.replies = list(replies)
        self.name = name
        self.calls = 0

    @classmethod
    def from_dir(cls, path: str | Path, name: str = "stub") -> "StubClient":
        files = sorted(Path(path).glob("*.txt"))
        return cls([f.read_text() for f in files], name)

    def complete(self, messages, context=None) -> str:
        reply = self.replies[min(self.calls, len(self.replies) - 1)]
        self.calls += 1
        return reply


def _is_retrieval(messages: list[Message]) -> bool:
    return "## FILES" in messages[-1]["content"] and "## RECONFIGURATION" not in messages[-1]["content"]


class PerfectSolver:
    """Answers with the true routers, the catalog summaries and the inverse diff."""

    name = "perfect"

    def complete(self, messages, context=None) -> str:
        if context is None:
            raise ValueError("the perfect solver needs the scenario context")
        if _is_retrieval(messages):
            return "## FILES\n" + "\n".join(context.truth_routers) + "\n"
        return (
            "## LOCALIZATION\n" + "\n".join(context.truth_routers) + "\n\n"
            "## DIAGNOSIS\n" + "\n".join(f"- {s}" for s in context.fault_summaries) + "\n\n"
            "## RECONFIGURATION\n" + format_script(context.repair)
        )


class NullSolver:
    """Returns the three headers with nothing under them."""

    name = "null"

    def complete(self, messages, context=None) -> str:
        if _is_retrieval(messages):
            return "## FILES\n"
        return "## LOCALIZATION\n\n## DIAGNOSIS\n\n## RECONFIGURATION\n"


def make_client(cfg: ModelConfig) -> ChatClient:
    if cfg.kind == "http":
        return HttpChatClient(cfg)
    if cfg.kind == "perfect":
        return PerfectSolver()
    if cfg.kind == "null":
        return NullSolver()
    if cfg.kind == "stub":
        if cfg.replies_dir:
            return StubClient.from_dir(cfg.replies_dir, cfg.model)
        return StubClient(cfg.replies, cfg.model)
    raise ValueError(f"unknown client kind {cfg.kind!r}")
