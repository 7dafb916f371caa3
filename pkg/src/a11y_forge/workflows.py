"""The two end-to-end use cases.

Linter-triggered fixing: diagnostics -> fix prompt -> suggestions rendered as
a comment-framed annotation under the flagged code plus a sidecar text file.

Selection-based detect-then-fix: selection -> detect prompt -> dedupe ->
chain fix prompt -> three-section plain-text report. The analyzed source
file is never modified by this workflow.
"""

from __future__ import annotations

import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .config import EngineConfig
from .llm import (
    DetectionFinding,
    FixSuggestion,
    GenerationParams,
    LlmExchange,
    ParseFailure,
    RequestHandle,
    complete,
    parse_structured,
    prompt_key,
)
from .markup import (
    Flavor,
    SourceDocument,
    Span,
    is_well_formed_fragment,
    make_span,
    parse_document,
    slice_span,
    smallest_enclosing_element,
)
from .prompts import (
    TemplateId,
    TemplateSet,
    DEFAULT_TEMPLATES,
    build_chain_fix_prompt,
    build_detect_prompt,
    build_fix_prompt,
)
from .rules import Diagnostic


class WorkflowError(RuntimeError):
    pass


class SelectionTooLarge(WorkflowError):
    pass


class EmptySelection(WorkflowError):
    pass


class WorkflowInFlight(WorkflowError):
    """Another LLM-backed operation is already running for this document."""


class AnnotationError(ValueError):
    pass


_INFLIGHT: set[str] = set()
_INFLIGHT_LOCK = threading.Lock()


@contextmanager
def _document_slot(path: str):
    with _INFLIGHT_LOCK:
        if path in _INFLIGHT:
            raise WorkflowInFlight(f"request already in flight for {path}")
        _INFLIGHT.add(path)
    try:
        yield
    finally:
        with _INFLIGHT_LOCK:
            _INFLIGHT.discard(path)


# -- finding deduplication ----------------------------------------------------


@dataclass
class DedupeOutcome:
    unique: list[DetectionFinding]
    duplicates_removed: int
    merge_log: list[tuple[int, int, float]]  # (kept index, dropped index, similarity)


def _norm(text: Optional[str]) -> str:
    return " ".join((text or "").split())


def _tokens(text: Optional[str]) -> frozenset[str]:
    return frozenset(re.findall(r"[a-z0-9]+", (text or "").lower()))


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 1.0
    union = a | b
    return len(a & b) / len(union)


def _are_duplicates(a: DetectionFinding, b: DetectionFinding) -> Optional[float]:
    if _norm(a.criterion) != _norm(b.criterion):
        return None
    if _norm(a.offending_code) == _norm(b.offending_code) and _norm(a.offending_code):
        return 1.0
    similarity = _jaccard(_tokens(a.error_description), _tokens(b.error_description))
    if similarity >= 0.8:
        return similarity
    return None


def dedupe_findings(findings: Sequence[DetectionFinding]) -> DedupeOutcome:
    """Collapse repeated findings; first occurrence wins, order preserved."""
    unique: list[DetectionFinding] = []
    kept_indices: list[int] = []
    merge_log: list[tuple[int, int, float]] = []
    for index, finding in enumerate(findings):
        duplicate_of: Optional[int] = None
        similarity = 0.0
        for kept_pos, kept in enumerate(unique):
            score = _are_duplicates(kept, finding)
            if score is not None:
                duplicate_of = kept_indices[kept_pos]
                similarity = score
                break
        if duplicate_of is None:
            unique.append(finding)
            kept_indices.append(index)
        else:
            merge_log.append((duplicate_of, index, similarity))
    return DedupeOutcome(
        unique=unique,
        duplicates_removed=len(findings) - len(unique),
        merge_log=merge_log,
    )


# -- annotation blocks ---------------------------------------------------------

_START_MARK = "<<a11y-fix-suggestion:{fix_id}>>"
_END_MARK = "<<end>>"
_START_RE = re.compile(r"<<a11y-fix-suggestion:[0-9a-f]+>>")


def _comment_line(content: str, flavor: Flavor) -> str:
    if flavor is Flavor.HTML:
        return f"<!-- {content} -->" if content else "<!---->"
    return f"// {content}".rstrip()


def render_annotation(
    suggestions: Sequence[FixSuggestion], fix_id: str, flavor: Flavor
) -> str:
    """Comment-framed block of numbered suggestions; every line newline-terminated."""
    lines = [_comment_line(_START_MARK.format(fix_id=fix_id), flavor)]
    lines.append(_comment_line(f"Accessibility fix suggestions ({len(suggestions)}):", flavor))
    for i, s in enumerate(suggestions, 1):
        lines.append(_comment_line(f"[{i}] error: {_norm(s.error_description)}", flavor))
        lines.append(_comment_line(f"    fix: {_norm(s.fix_description)}", flavor))
        if s.fixed_code:
            lines.append(_comment_line("    fixed code:", flavor))
            for code_line in s.fixed_code.splitlines():
                lines.append(_comment_line(f"      {code_line}", flavor))
    lines.append(_comment_line(_END_MARK, flavor))
    return "".join(line + "\n" for line in lines)


def annotation_edit(text: str, block: str, after_line: int) -> tuple[int, str]:
    """Insertion point and text for placing a block below a 1-based line."""
    lines = text.splitlines(keepends=True)
    k = min(max(after_line, 0), len(lines))
    if k == len(lines) and text and not text.endswith("\n"):
        # Unterminated final line: complete it, and leave the file again
        # without a trailing newline so stripping can restore it exactly.
        return len(text), "\n" + block.rstrip("\n")
    return sum(len(line) for line in lines[:k]), block


def insert_annotation(text: str, block: str, after_line: int) -> str:
    """Insert an annotation block below the given 1-based line number."""
    offset, inserted = annotation_edit(text, block, after_line)
    return text[:offset] + inserted + text[offset:]


def strip_annotation(text: str) -> str:
    """Remove every annotation block; inverse of insert_annotation."""
    while True:
        lines = text.splitlines(keepends=True)
        start_idx = end_idx = None
        for i in range(len(lines) - 1, -1, -1):
            content = lines[i]
            if _START_RE.search(content) and start_idx is None:
                start_idx = i
                end_idx = None
                for j in range(i, len(lines)):
                    if _END_MARK in lines[j] and not _START_RE.search(lines[j]):
                        end_idx = j
                        break
                break
        if start_idx is None:
            for i, line in enumerate(lines):
                if _END_MARK in line and ("//" in line or "<!--" in line):
                    raise AnnotationError(f"unbalanced annotation end marker at line {i + 1}")
            return text
        if end_idx is None:
            raise AnnotationError(f"unbalanced annotation start marker at line {start_idx + 1}")
        removed_hits_eof = not lines[end_idx].endswith("\n")
        before = "".join(lines[:start_idx])
        after = "".join(lines[end_idx + 1 :])
        if removed_hits_eof and before.endswith("\n") and not after:
            before = before[:-1]
        text = before + after


# -- fix-with-ai ----------------------------------------------------------------


@dataclass
class FixWithAiResult:
    source_span: Span
    suggestions: list[FixSuggestion]
    annotation_text: str
    sidecar_path: Path
    exchange: LlmExchange
    failure: Optional[ParseFailure] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def _output_dir(doc: SourceDocument, config: EngineConfig) -> Path:
    if config.output_dir is not None:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        return out
    return Path(doc.path).parent


def _persist_dir(doc: SourceDocument, config: EngineConfig, provider) -> Optional[Path]:
    if getattr(provider, "deterministic", False):
        return None
    return _output_dir(doc, config) / "a11y-exchanges"


def _render_sidecar(
    doc: SourceDocument,
    suggestions: Optional[list[FixSuggestion]],
    exchange: LlmExchange,
    failure: Optional[ParseFailure],
) -> str:
    lines = [
        "a11y fix suggestions",
        f"file: {doc.path}",
        f"model: {exchange.model}",
        "-" * 40,
    ]
    if failure is not None:
        lines.append("RAW RESPONSE (unparseable)")
        lines.append(f"extraction stages attempted: {', '.join(failure.stages)}")
        lines.append("-" * 40)
        lines.append(exchange.raw_response)
    else:
        for i, s in enumerate(suggestions or [], 1):
            lines.append(f"[{i}] error: {_norm(s.error_description)}")
            lines.append(f"    fix: {_norm(s.fix_description)}")
            lines.append("    fixed code:")
            for code_line in (s.fixed_code or "").splitlines():
                lines.append(f"      {code_line}")
            lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


def run_fix_with_ai(
    doc: SourceDocument,
    diagnostics: Sequence[Diagnostic],
    provider,
    config: Optional[EngineConfig] = None,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    handle: Optional[RequestHandle] = None,
    apply_annotation: bool = False,
) -> FixWithAiResult:
    if not diagnostics:
        raise WorkflowError("fix-with-ai requires at least one diagnostic")
    config = config or EngineConfig()
    for d in diagnostics:
        if d.span.end > len(doc.text):
            raise WorkflowError(f"diagnostic span outside document: {d.rule_id}")

    tree = parse_document(doc)
    element = smallest_enclosing_element(tree, [d.span for d in diagnostics])
    source_span = element.span if element is not None else make_span(doc, 0, len(doc.text))
    code = slice_span(doc, source_span)
    if len(code) > config.prompt_char_budget:
        raise SelectionTooLarge(
            f"flagged code is {len(code)} chars, over the prompt budget of "
            f"{config.prompt_char_budget}"
        )

    with _document_slot(doc.path):
        prompt = build_fix_prompt(code, diagnostics, templates)
        exchange = complete(
            provider,
            TemplateId.FIX,
            prompt,
            config.generation_params(),
            handle=handle,
            persist_dir=_persist_dir(doc, config, provider),
        )
        parsed = parse_structured(exchange.raw_response, TemplateId.FIX)
        exchange.parsed = parsed

        out_dir = _output_dir(doc, config)
        stem = Path(doc.path).stem
        sidecar_path = out_dir / f"{stem}.a11y-fix.txt"

        if isinstance(parsed, ParseFailure):
            sidecar_path.write_text(
                _render_sidecar(doc, None, exchange, parsed), encoding="utf-8"
            )
            return FixWithAiResult(
                source_span=source_span,
                suggestions=[],
                annotation_text="",
                sidecar_path=sidecar_path,
                exchange=exchange,
                failure=parsed,
            )

        suggestions = [s for s in parsed.records if isinstance(s, FixSuggestion)]
        for s in suggestions:
            if s.fixed_code:
                s.fixed_code_well_formed = is_well_formed_fragment(s.fixed_code, doc.flavor)
        fix_id = prompt_key(TemplateId.FIX, prompt)[:8]
        annotation = render_annotation(suggestions, fix_id, doc.flavor)
        sidecar_path.write_text(_render_sidecar(doc, suggestions, exchange, None), encoding="utf-8")

        if apply_annotation:
            annotated = insert_annotation(doc.text, annotation, source_span.end_line)
            Path(doc.path).write_text(annotated, encoding="utf-8")

        return FixWithAiResult(
            source_span=source_span,
            suggestions=suggestions,
            annotation_text=annotation,
            sidecar_path=sidecar_path,
            exchange=exchange,
        )


# -- check-and-fix ---------------------------------------------------------------


@dataclass
class StageFailure:
    raw_response: str
    stages: list[str]
    detail: str


@dataclass
class ReportMetadata:
    model: str
    timestamp: float
    document_path: str
    selection: Span
    orphan_fixes: list[int] = field(default_factory=list)
    dedupe: Optional[DedupeOutcome] = None


@dataclass
class A11yReport:
    code_section: str
    errors_section: list[DetectionFinding]
    fixes_section: list[FixSuggestion]
    metadata: ReportMetadata
    detect_failure: Optional[StageFailure] = None
    fix_failure: Optional[StageFailure] = None
    report_path: Optional[Path] = None
    exchanges: list[LlmExchange] = field(default_factory=list)


def _entry_lines(prefix_number: int, fields: list[tuple[str, Optional[str]]]) -> list[str]:
    lines = []
    first, value = fields[0]
    lines.append(f"({prefix_number}) {_norm(value)}")
    for name, value in fields[1:]:
        if name in ("code", "fixed code"):
            lines.append(f"    {name}:")
            for code_line in (value or "").splitlines() or [""]:
                lines.append(f"      {code_line}")
        else:
            lines.append(f"    {name}: {_norm(value)}")
    return lines


def render_report(report: A11yReport) -> str:
    """Deterministic three-section plain-text rendering."""
    meta = report.metadata
    lines = [
        "a11y report",
        f"file: {Path(meta.document_path).name}",
        f"model: {meta.model}",
        f"selection: lines {meta.selection.start_line}-{meta.selection.end_line}",
    ]
    if meta.dedupe is not None and meta.dedupe.duplicates_removed:
        lines.append(f"duplicates removed: {meta.dedupe.duplicates_removed}")
    if meta.orphan_fixes:
        lines.append(
            "orphan fixes (no matching error): "
            + ", ".join(str(i + 1) for i in meta.orphan_fixes)
        )
    lines.append("")
    lines.append("== CODE ==")
    lines.extend(report.code_section.splitlines())
    lines.append("")

    if report.detect_failure is not None:
        lines.append("== RAW RESPONSE (unparseable) ==")
        lines.append(f"stage: error detection; attempted: {', '.join(report.detect_failure.stages)}")
        lines.extend(report.detect_failure.raw_response.splitlines())
        lines.append("")
        return "\n".join(lines).rstrip("\n") + "\n"

    lines.append("== ERRORS ==")
    if not report.errors_section:
        lines.append("none found")
    for i, finding in enumerate(report.errors_section, 1):
        lines.extend(
            _entry_lines(
                i,
                [
                    ("error", finding.error_description),
                    ("code", finding.offending_code),
                    ("wcag", finding.criterion),
                ],
            )
        )
    lines.append("")

    if report.fix_failure is not None:
        lines.append("== RAW RESPONSE (unparseable) ==")
        lines.append(f"stage: fix generation; attempted: {', '.join(report.fix_failure.stages)}")
        lines.extend(report.fix_failure.raw_response.splitlines())
        lines.append("")
        return "\n".join(lines).rstrip("\n") + "\n"

    lines.append("== FIXES ==")
    if not report.fixes_section:
        lines.append("none found")
    for i, fix in enumerate(report.fixes_section, 1):
        lines.extend(
            _entry_lines(
                i,
                [
                    ("error", fix.error_description),
                    ("code", fix.offending_code),
                    ("wcag", fix.criterion),
                    ("fix", fix.fix_description),
                    ("fixed code", fix.fixed_code),
                ],
            )
        )
    return "\n".join(lines).rstrip("\n") + "\n"


def _match_fixes_to_errors(
    fixes: list[FixSuggestion], errors: list[DetectionFinding]
) -> list[int]:
    """Indices of fixes that do not correspond to any reported error."""
    orphans = []
    error_keys = {
        (_norm(e.error_description), _norm(e.offending_code)) for e in errors
    }
    loose_keys = {_norm(e.error_description) for e in errors} | {
        _norm(e.offending_code) for e in errors if _norm(e.offending_code)
    }
    for i, fix in enumerate(fixes):
        key = (_norm(fix.error_description), _norm(fix.offending_code))
        if key in error_keys:
            continue
        if _norm(fix.error_description) in loose_keys or (
            _norm(fix.offending_code) and _norm(fix.offending_code) in loose_keys
        ):
            continue
        orphans.append(i)
    return orphans


def run_check_and_fix(
    doc: SourceDocument,
    selection: Span,
    provider,
    config: Optional[EngineConfig] = None,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    handle: Optional[RequestHandle] = None,
) -> A11yReport:
    config = config or EngineConfig()
    if selection.start >= selection.end:
        raise EmptySelection("selection is empty")
    if selection.end > len(doc.text):
        raise WorkflowError("selection outside document")
    code = slice_span(doc, selection)
    if not code.strip():
        raise EmptySelection("selection contains only whitespace")
    if len(code) > config.prompt_char_budget:
        raise SelectionTooLarge(
            f"selection is {len(code)} chars, over the prompt budget of "
            f"{config.prompt_char_budget}"
        )

    with _document_slot(doc.path):
        out_dir = _output_dir(doc, config)
        stem = Path(doc.path).stem
        report_path = out_dir / f"{stem}.a11y-report.txt"
        persist = _persist_dir(doc, config, provider)
        params = config.generation_params()

        detect_prompt = build_detect_prompt(code, templates)
        detect_exchange = complete(
            provider, TemplateId.DETECT, detect_prompt, params, handle=handle, persist_dir=persist
        )
        detect_parsed = parse_structured(detect_exchange.raw_response, TemplateId.DETECT)
        detect_exchange.parsed = detect_parsed

        metadata = ReportMetadata(
            model=detect_exchange.model,
            timestamp=detect_exchange.timestamp,
            document_path=doc.path,
            selection=selection,
        )

        if isinstance(detect_parsed, ParseFailure):
            report = A11yReport(
                code_section=code,
                errors_section=[],
                fixes_section=[],
                metadata=metadata,
                detect_failure=StageFailure(
                    detect_exchange.raw_response, detect_parsed.stages, detect_parsed.detail
                ),
                report_path=report_path,
                exchanges=[detect_exchange],
            )
            report_path.write_text(render_report(report), encoding="utf-8")
            return report

        findings = [f for f in detect_parsed.records if isinstance(f, DetectionFinding)]
        if config.dedupe:
            outcome = dedupe_findings(findings)
            metadata.dedupe = outcome
            errors = outcome.unique
        else:
            errors = findings

        if handle is not None and handle.cancelled:
            # Cancelled mid-chain: skip stage two, emit the partial report.
            report = A11yReport(
                code_section=code,
                errors_section=errors,
                fixes_section=[],
                metadata=metadata,
                report_path=report_path,
                exchanges=[detect_exchange],
            )
            report_path.write_text(render_report(report), encoding="utf-8")
            return report

        chain_prompt = build_chain_fix_prompt(code, errors, templates)
        chain_exchange = complete(
            provider, TemplateId.CHAIN_FIX, chain_prompt, params, handle=handle, persist_dir=persist
        )
        chain_parsed = parse_structured(chain_exchange.raw_response, TemplateId.CHAIN_FIX)
        chain_exchange.parsed = chain_parsed

        if isinstance(chain_parsed, ParseFailure):
            report = A11yReport(
                code_section=code,
                errors_section=errors,
                fixes_section=[],
                metadata=metadata,
                fix_failure=StageFailure(
                    chain_exchange.raw_response, chain_parsed.stages, chain_parsed.detail
                ),
                report_path=report_path,
                exchanges=[detect_exchange, chain_exchange],
            )
            report_path.write_text(render_report(report), encoding="utf-8")
            return report

        fixes = [s for s in chain_parsed.records if isinstance(s, FixSuggestion)]
        for s in fixes:
            if s.fixed_code:
                s.fixed_code_well_formed = is_well_formed_fragment(s.fixed_code, doc.flavor)
        metadata.orphan_fixes = _match_fixes_to_errors(fixes, errors)

        report = A11yReport(
            code_section=code,
            errors_section=errors,
            fixes_section=fixes,
            metadata=metadata,
            report_path=report_path,
            exchanges=[detect_exchange, chain_exchange],
        )
        report_path.write_text(render_report(report), encoding="utf-8")
        return report
