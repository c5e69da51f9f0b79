"""Configuration text: device models, rendering, parsing and edit scripts."""

from netrepair.configtext.edits import (
    Edit,
    EditFormatError,
    EditScript,
    MatchFailure,
    apply_edits,
    format_script,
    parse_script,
)
from netrepair.configtext.model import GRAMMAR_VERSION, DeviceModel
from netrepair.configtext.parse import (
    ConfigParseError,
    parse_config,
    parse_configs,
    parse_configs_lenient,
)
from netrepair.configtext.render import render_device, render_devices


def render(plan) -> dict[str, str]:
    """Render every device of a logical plan, keyed by router name."""
    return render_devices(plan.devices)


__all__ = [
    "GRAMMAR_VERSION",
    "ConfigParseError",
    "DeviceModel",
    "Edit",
    "EditFormatError",
    "EditScript",
    "MatchFailure",
    "apply_edits",
    "format_script",
    "parse_config",
    "parse_configs",
    "parse_configs_lenient",
    "parse_script",
    "render",
    "render_device",
    "render_devices",
]
