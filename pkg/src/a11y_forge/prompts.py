"""Prompt construction for the two LLM workflows.

Templates are plain-text assets with named {placeholder} tokens, loaded at
import time and overridable per-template via configuration. Rendering is
deterministic and embeds its inputs verbatim, so distinct inputs always
produce distinct prompts.
"""

from __future__ import annotations

import json
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .rules import Diagnostic


class TemplateId(Enum):
    FIX = "fix_prompt"
    DETECT = "detect_prompt"
    CHAIN_FIX = "chain_fix_prompt"


_REQUIRED_PLACEHOLDERS = {
    TemplateId.FIX: ("code", "diagnostics"),
    TemplateId.DETECT: ("code",),
    TemplateId.CHAIN_FIX: ("code", "findings"),
}


class PromptError(ValueError):
    """Prompt cannot be built from the given inputs."""


def _builtin_template(template_id: TemplateId) -> str:
    return (
        resources.files("a11y_forge")
        .joinpath("templates", f"{template_id.value}.txt")
        .read_text(encoding="utf-8")
    )


class TemplateSet:
    """Resolved prompt templates, optionally overridden from files."""

    def __init__(self, overrides: Optional[dict[str, str]] = None):
        self._texts: dict[TemplateId, str] = {}
        overrides = overrides or {}
        for template_id in TemplateId:
            override = overrides.get(template_id.value)
            if override:
                text = Path(override).read_text(encoding="utf-8")
            else:
                text = _builtin_template(template_id)
            for placeholder in _REQUIRED_PLACEHOLDERS[template_id]:
                if "{" + placeholder + "}" not in text:
                    raise PromptError(
                        f"template {template_id.value} is missing placeholder {{{placeholder}}}"
                    )
            self._texts[template_id] = text

    def render(self, template_id: TemplateId, **values: str) -> str:
        text = self._texts[template_id]
        required = _REQUIRED_PLACEHOLDERS[template_id]
        missing = [name for name in required if name not in values]
        if missing:
            raise PromptError(f"missing placeholder value(s): {', '.join(missing)}")
        for name in required:
            text = text.replace("{" + name + "}", values[name])
        return text


DEFAULT_TEMPLATES = TemplateSet()


def format_diagnostics(diagnostics: Sequence[Diagnostic]) -> str:
    lines = []
    for i, d in enumerate(diagnostics, 1):
        lines.append(
            f"{i}. [{d.rule_id}] {d.message} "
            f"(WCAG {d.wcag_criterion}; line {d.span.start_line}, column {d.span.start_col})"
        )
    return "\n".join(lines)


def serialize_findings(findings: Sequence) -> str:
    """Findings in the JSON shape they were parsed into (English field names)."""
    payload = [
        {
            "error_description": f.error_description or "",
            "offending_code": f.offending_code or "",
            "criterion": f.criterion or "",
        }
        for f in findings
    ]
    return json.dumps(payload, indent=2, ensure_ascii=False)


def build_fix_prompt(
    code: str,
    diagnostics: Sequence[Diagnostic],
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> str:
    if not diagnostics:
        raise PromptError("fix prompt requires at least one diagnostic")
    return templates.render(
        TemplateId.FIX, code=code, diagnostics=format_diagnostics(diagnostics)
    )


def build_detect_prompt(code: str, templates: TemplateSet = DEFAULT_TEMPLATES) -> str:
    if not code.strip():
        raise PromptError("detect prompt requires non-empty code")
    return templates.render(TemplateId.DETECT, code=code)


def build_chain_fix_prompt(
    code: str,
    findings: Sequence,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> str:
    return templates.render(
        TemplateId.CHAIN_FIX, code=code, findings=serialize_findings(findings)
    )
