"""Driving a model through a repair scenario and grading what it returns."""

from netrepair.harness.clients import (
    ChatClient,
    EndpointError,
    HttpChatClient,
    ModelConfig,
    NullSolver,
    PerfectSolver,
    ScenarioContext,
    StubClient,
    load_judge_configs,
    load_model_config,
    make_client,
)
from netrepair.harness.judge import DiagnosisScores, judge_diagnosis, parse_judge_reply
from netrepair.harness.prompt import (
    PROMPT_VERSION,
    ProblemInput,
    PromptBudgetError,
    Strategy,
    build_prompt,
    build_retrieval_prompt,
    estimate_tokens,
)
from netrepair.harness.session import Attempt, RetrievalResult, apply_solution, converse, retrieval_stage, solve
from netrepair.harness.solution import (
    ParseFeedback,
    Solution,
    localization_f1,
    parse_file_list,
    parse_solution,
    retrieval_recall,
)

__all__ = [
    "Attempt", "ChatClient", "DiagnosisScores", "EndpointError", "HttpChatClient", "ModelConfig",
    "NullSolver", "PROMPT_VERSION", "ParseFeedback", "PerfectSolver", "ProblemInput", "PromptBudgetError",
    "RetrievalResult", "ScenarioContext", "Solution", "Strategy", "StubClient", "apply_solution",
    "build_prompt", "build_retrieval_prompt", "converse", "estimate_tokens", "judge_diagnosis",
    "load_judge_configs", "load_model_config", "localization_f1", "make_client", "parse_file_list",
    "parse_judge_reply", "parse_solution", "retrieval_recall", "retrieval_stage", "solve",
]
