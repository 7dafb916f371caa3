"""Rubric evaluation of LLM responses against labeled corpus cases.

A corpus case pairs an input document with ground-truth seeded errors. The
machine-checkable slice of the grading rubric runs per-criterion checks and
aggregates them into a three-tier verdict (Correct / PartiallyCorrect /
Incorrect). Criteria that need human judgment are reported NotApplicable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from . import wcag
from .markup import (
    ElementNode,
    Flavor,
    SourceDocument,
    Span,
    is_well_formed_fragment,
    iter_elements,
    make_span,
    parse_document,
    slice_span,
    smallest_enclosing_element,
)
from .rules import CATALOG


class CorpusError(ValueError):
    """A corpus case directory is malformed."""


@dataclass(frozen=True)
class SeededError:
    rule_id: str
    criterion: str
    offending_span: Span
    canonical_offending_code: str


@dataclass
class CorpusCase:
    id: str
    doc: SourceDocument
    selection: Span
    seeded_errors: list[SeededError]
    clean: bool
    directory: Optional[Path] = None

    @property
    def fixtures_dir(self) -> Optional[Path]:
        if self.directory is None:
            return None
        d = self.directory / "fixtures"
        return d if d.is_dir() else None

    def statically_detectable(self) -> list[SeededError]:
        """Seeded errors whose rule belongs to the static catalog."""
        return [s for s in self.seeded_errors if s.rule_id in CATALOG]


def normalize_ws(text: str) -> str:
    return " ".join(text.split())


def _locate_snippet(doc: SourceDocument, snippet: str, occurrence: int = 1) -> Span:
    start = -1
    found = 0
    idx = 0
    while True:
        idx = doc.text.find(snippet, idx)
        if idx == -1:
            break
        found += 1
        if found == occurrence:
            start = idx
        idx += 1
    if start == -1:
        raise CorpusError(
            f"{doc.path}: snippet occurrence {occurrence} not found: {snippet[:60]!r}"
        )
    return make_span(doc, start, start + len(snippet))


def _selection_span(doc: SourceDocument, raw: dict) -> Span:
    if raw.get("whole_file"):
        return make_span(doc, 0, len(doc.text))
    start = doc.linecol_to_offset(raw["start_line"], raw["start_col"])
    end = doc.linecol_to_offset(raw["end_line"], raw["end_col"])
    return make_span(doc, start, end)


def load_case(directory: Path) -> CorpusCase:
    directory = Path(directory)
    meta_path = directory / "case.json"
    if not meta_path.is_file():
        raise CorpusError(f"{directory}: no case.json")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    inputs = sorted(directory.glob("input.*"))
    if len(inputs) != 1:
        raise CorpusError(f"{directory}: expected exactly one input.* file, found {len(inputs)}")
    doc = SourceDocument.load(str(inputs[0]))
    seeded = []
    for raw in meta.get("seeded_errors", []):
        span = _locate_snippet(doc, raw["code"], raw.get("occurrence", 1))
        canonical = slice_span(doc, span)
        if normalize_ws(canonical) != normalize_ws(raw["code"]):
            raise CorpusError(f"{directory}: snippet does not match its span for {raw['rule']}")
        seeded.append(
            SeededError(
                rule_id=raw["rule"],
                criterion=raw["wcag"],
                offending_span=span,
                canonical_offending_code=canonical,
            )
        )
    clean = bool(meta.get("clean", False))
    if clean and seeded:
        raise CorpusError(f"{directory}: clean case must not have seeded errors")
    return CorpusCase(
        id=directory.name,
        doc=doc,
        selection=_selection_span(doc, meta.get("selection", {"whole_file": True})),
        seeded_errors=seeded,
        clean=clean,
        directory=directory,
    )


def load_corpus(root: Path) -> list[CorpusCase]:
    root = Path(root)
    dirs = sorted(d for d in root.iterdir() if d.is_dir())
    cases = [load_case(d) for d in dirs]
    if not cases:
        raise CorpusError(f"{root}: no corpus cases found")
    return cases


# -- rubric ---------------------------------------------------------------------


class UseCase(Enum):
    FIX_WITH_AI = "FixWithAI"
    CHECK_AND_FIX = "CheckAndFixWithAI"


class CriterionLevel(Enum):
    INCORRECT = "Incorrect"
    PARTIAL_OK = "PartialOk"
    CORRECT_OK = "CorrectOk"
    NOT_APPLICABLE = "NotApplicable"


class Classification(Enum):
    CORRECT = "Correct"
    PARTIALLY_CORRECT = "PartiallyCorrect"
    INCORRECT = "Incorrect"


@dataclass
class CriterionResult:
    criterion_id: str
    level_triggered: CriterionLevel
    detail: str = ""
    measured: Optional[float] = None

    def __post_init__(self):
        if self.measured is not None and not 0.0 <= self.measured <= 1.0:
            raise ValueError(f"{self.criterion_id}: measured ratio out of range: {self.measured}")


@dataclass
class Verdict:
    classification: Classification
    criteria: list[CriterionResult]
    use_case: UseCase


class EvaluationError(RuntimeError):
    pass


class CaseNotApplicable(EvaluationError):
    """The selected use case cannot run for this corpus case."""


_HUMAN_JUDGED = (
    ("unresolved-issues", "whether the solution fully resolves the accessibility issues"),
    ("no-new-a11y-issues", "whether the solution introduces new accessibility issues"),
    ("wcag-version-semantics", "whether the fix semantics meet WCAG 2.2 at level AA"),
)


def _stage_level(parsed) -> CriterionLevel:
    from .llm import ParseFailure

    if parsed is None or isinstance(parsed, ParseFailure):
        return CriterionLevel.INCORRECT
    if parsed.stage == "direct":
        return CriterionLevel.CORRECT_OK
    return CriterionLevel.PARTIAL_OK


def _worst(levels: list[CriterionLevel]) -> CriterionLevel:
    order = [
        CriterionLevel.INCORRECT,
        CriterionLevel.PARTIAL_OK,
        CriterionLevel.CORRECT_OK,
        CriterionLevel.NOT_APPLICABLE,
    ]
    for level in order:
        if level in levels:
            return level
    return CriterionLevel.NOT_APPLICABLE


def _check_json_valid(parsed_stages: list) -> CriterionResult:
    levels = [_stage_level(p) for p in parsed_stages]
    level = _worst(levels) if levels else CriterionLevel.NOT_APPLICABLE
    details = []
    from .llm import ParseFailure

    for p in parsed_stages:
        if p is None or isinstance(p, ParseFailure):
            details.append("unparseable")
        else:
            details.append(p.stage)
    return CriterionResult("json-valid", level, "extraction: " + ", ".join(details))


def _check_fields_populated(record_groups: list[tuple[list, tuple[str, ...]]]) -> CriterionResult:
    total = 0
    worst = CriterionLevel.CORRECT_OK
    notes = []
    for records, required in record_groups:
        for record in records:
            total += 1
            populated = record.populated()
            recognized = [f for f in required if getattr(record, f, None) is not None]
            if not recognized:
                return CriterionResult(
                    "fields-populated",
                    CriterionLevel.INCORRECT,
                    "a record carries none of the required fields",
                )
            missing = [f for f in required if not populated.get(f, False)]
            if missing:
                worst = CriterionLevel.PARTIAL_OK
                notes.append(f"missing content: {', '.join(missing)}")
            if record.extra_fields:
                worst = CriterionLevel.PARTIAL_OK
                notes.append(f"extra fields: {', '.join(record.extra_fields)}")
    if total == 0:
        return CriterionResult(
            "fields-populated", CriterionLevel.NOT_APPLICABLE, "no records to check"
        )
    return CriterionResult(
        "fields-populated", worst, "; ".join(sorted(set(notes))) or "all required fields populated"
    )


_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _locate_normalized(doc: SourceDocument, snippet: str) -> Optional[Span]:
    """Find snippet in the document tolerating whitespace differences."""
    if not snippet or not snippet.strip():
        return None
    idx = doc.text.find(snippet)
    if idx != -1:
        return make_span(doc, idx, idx + len(snippet))
    chunks = [re.escape(c) for c in snippet.split()]
    if not chunks:
        return None
    pattern = re.compile(r"\s+".join(chunks))
    m = pattern.search(doc.text)
    if m is None:
        return None
    return make_span(doc, m.start(), m.end())


def _element_inner_tokens(doc: SourceDocument, element: ElementNode) -> set[str]:
    if element.self_closing:
        return set()
    inner = doc.text[element.open_tag_span.end : element.span.end]
    closing = re.search(r"</[^<>]*>\s*$", inner)
    if closing:
        inner = inner[: closing.start()]
    return set(_WORD.findall(inner))


def _check_code_integrity(doc: SourceDocument, tree, fixes: list) -> CriterionResult:
    checked = 0
    for i, fix in enumerate(fixes, 1):
        if not (fix.fixed_code and str(fix.fixed_code).strip()):
            continue
        span = _locate_normalized(doc, fix.offending_code or "")
        if span is None:
            continue
        element = smallest_enclosing_element(tree, [span])
        if element is None:
            continue
        checked += 1
        required = _element_inner_tokens(doc, element)
        have = set(_WORD.findall(fix.fixed_code))
        missing = sorted(required - have)
        if missing:
            return CriterionResult(
                "code-integrity",
                CriterionLevel.INCORRECT,
                f"fix {i} drops original code tokens: {', '.join(missing[:5])}",
            )
    if checked == 0:
        return CriterionResult(
            "code-integrity", CriterionLevel.NOT_APPLICABLE, "no locatable fixed code to check"
        )
    return CriterionResult(
        "code-integrity", CriterionLevel.CORRECT_OK, f"{checked} fix(es) retain original code"
    )


def _duplicate_positions(findings: list) -> set[int]:
    from .workflows import dedupe_findings

    outcome = dedupe_findings(findings)
    return {dropped for _, dropped, _ in outcome.merge_log}


@dataclass
class _Matching:
    finding_to_seed: dict[int, int]
    matched_seeds: set[int]
    duplicates: set[int]
    log: list[str]


def _match_findings(case: CorpusCase, findings: list) -> _Matching:
    """Assign findings to seeded errors; duplicates beyond the first match nothing."""
    duplicates = _duplicate_positions(findings)
    assigned: dict[int, int] = {}
    matched: set[int] = set()
    log: list[str] = []
    for i, finding in enumerate(findings):
        if i in duplicates:
            log.append(f"finding {i + 1}: duplicate, matches nothing")
            continue
        code_norm = normalize_ws(finding.offending_code or "")
        criterion = (wcag.extract_criterion_id(finding.criterion or "") or "").strip()
        located = _locate_normalized(case.doc, finding.offending_code or "")
        candidates: list[tuple[int, int]] = []  # (priority, seed index)
        for j, seed in enumerate(case.seeded_errors):
            if j in matched:
                continue
            seed_norm = normalize_ws(seed.canonical_offending_code)
            contained = bool(code_norm) and (code_norm in seed_norm or seed_norm in code_norm)
            overlap = (
                located is not None
                and criterion == seed.criterion
                and located.overlaps(seed.offending_span)
            )
            if contained or overlap:
                priority = 0 if criterion == seed.criterion else 1
                candidates.append((priority, j))
        if not candidates:
            log.append(f"finding {i + 1}: no seeded match")
            continue
        candidates.sort()
        j = candidates[0][1]
        assigned[i] = j
        matched.add(j)
        seed = case.seeded_errors[j]
        log.append(f"finding {i + 1}: matched seeded {seed.rule_id} ({seed.criterion})")
    return _Matching(assigned, matched, duplicates, log)


def check_criteria(response, case: CorpusCase, use_case: UseCase) -> list[CriterionResult]:
    """Run every machine-checkable rubric criterion for one response."""
    from .llm import ParseFailure
    from .workflows import A11yReport, FixWithAiResult

    if not isinstance(use_case, UseCase):
        raise EvaluationError(f"unknown use case: {use_case!r}")

    results: list[CriterionResult] = []
    tree = parse_document(case.doc)

    if use_case is UseCase.FIX_WITH_AI:
        if not isinstance(response, FixWithAiResult):
            raise EvaluationError("FixWithAI evaluation needs a FixWithAiResult")
        parsed_stages = [response.exchange.parsed]
        findings = list(response.suggestions)
        fixes = list(response.suggestions)
        required_groups = [(findings, ("error_description", "offending_code", "fix_description", "fixed_code"))]
    else:
        if not isinstance(response, A11yReport):
            raise EvaluationError("CheckAndFixWithAI evaluation needs an A11yReport")
        parsed_stages = [x.parsed for x in response.exchanges]
        detect_parsed = response.exchanges[0].parsed if response.exchanges else None
        if detect_parsed is not None and not isinstance(detect_parsed, ParseFailure):
            findings = list(detect_parsed.records)
        else:
            findings = []
        fixes = list(response.fixes_section)
        required_groups = [
            (findings, ("error_description", "offending_code", "criterion")),
            (fixes, ("error_description", "offending_code", "fix_description", "fixed_code", "criterion")),
        ]

    results.append(_check_json_valid(parsed_stages))
    results.append(_check_fields_populated(required_groups))
    results.append(_check_code_integrity(case.doc, tree, fixes))

    matching = _match_findings(case, findings)

    # relevance-ratio: fraction of reported findings that match a seeded error
    if not findings:
        results.append(
            CriterionResult("relevance-ratio", CriterionLevel.NOT_APPLICABLE, "no findings reported")
        )
    else:
        ratio = len(matching.finding_to_seed) / len(findings)
        if ratio < 0.5:
            level = CriterionLevel.INCORRECT
        elif ratio <= 0.8:
            level = CriterionLevel.PARTIAL_OK
        else:
            level = CriterionLevel.CORRECT_OK
        results.append(
            CriterionResult(
                "relevance-ratio", level, "; ".join(matching.log), measured=round(ratio, 4)
            )
        )

    if use_case is UseCase.CHECK_AND_FIX:
        # detection-recall: fraction of seeded errors found
        if not case.seeded_errors:
            results.append(
                CriterionResult(
                    "detection-recall", CriterionLevel.NOT_APPLICABLE, "case has no seeded errors"
                )
            )
        else:
            recall = len(matching.matched_seeds) / len(case.seeded_errors)
            if recall <= 0.5:
                level = CriterionLevel.INCORRECT
            elif recall <= 0.8:
                level = CriterionLevel.PARTIAL_OK
            else:
                level = CriterionLevel.CORRECT_OK
            results.append(
                CriterionResult(
                    "detection-recall",
                    level,
                    f"{len(matching.matched_seeds)} of {len(case.seeded_errors)} seeded errors found",
                    measured=round(recall, 4),
                )
            )

        if case.clean:
            if findings:
                results.append(
                    CriterionResult(
                        "misidentify-clean",
                        CriterionLevel.INCORRECT,
                        f"{len(findings)} finding(s) reported on clean code",
                    )
                )
            else:
                results.append(
                    CriterionResult(
                        "misidentify-clean", CriterionLevel.CORRECT_OK, "no findings on clean code"
                    )
                )
        else:
            results.append(
                CriterionResult(
                    "misidentify-clean", CriterionLevel.NOT_APPLICABLE, "case is not clean"
                )
            )

        # criterion-valid: WCAG ids exist and agree with the matched seed
        if not findings:
            results.append(
                CriterionResult("criterion-valid", CriterionLevel.NOT_APPLICABLE, "no findings")
            )
        else:
            problems = []
            for i, finding in enumerate(findings):
                token = wcag.extract_criterion_id(finding.criterion or "")
                if token is None or not wcag.is_valid_criterion(token):
                    problems.append(f"finding {i + 1}: criterion missing or unknown")
                    continue
                seed_idx = matching.finding_to_seed.get(i)
                if seed_idx is not None and case.seeded_errors[seed_idx].criterion != token:
                    problems.append(
                        f"finding {i + 1}: criterion {token} incongruent with seeded "
                        f"{case.seeded_errors[seed_idx].criterion}"
                    )
            results.append(
                CriterionResult(
                    "criterion-valid",
                    CriterionLevel.PARTIAL_OK if problems else CriterionLevel.CORRECT_OK,
                    "; ".join(problems) or "all criteria valid and congruent",
                )
            )

    # no-new-syntax-break: fixed code must parse in the document flavor
    checked = [f for f in fixes if f.fixed_code and str(f.fixed_code).strip()]
    if not checked:
        results.append(
            CriterionResult(
                "no-new-syntax-break", CriterionLevel.NOT_APPLICABLE, "no fixed code to parse"
            )
        )
    else:
        broken = [
            i + 1
            for i, f in enumerate(checked)
            if not is_well_formed_fragment(f.fixed_code, case.doc.flavor)
        ]
        results.append(
            CriterionResult(
                "no-new-syntax-break",
                CriterionLevel.INCORRECT if broken else CriterionLevel.CORRECT_OK,
                f"fixes with syntax damage: {broken}" if broken else "all fixed code parses",
            )
        )

    # duplicate-free: repeated findings are tolerated but capped at PartialOk
    if not findings:
        results.append(
            CriterionResult("duplicate-free", CriterionLevel.NOT_APPLICABLE, "no findings")
        )
    else:
        dup_count = len(matching.duplicates)
        results.append(
            CriterionResult(
                "duplicate-free",
                CriterionLevel.PARTIAL_OK if dup_count else CriterionLevel.CORRECT_OK,
                f"{dup_count} duplicated finding(s)" if dup_count else "no duplicates",
                measured=dup_count / len(findings),
            )
        )

    for cid, description in _HUMAN_JUDGED:
        results.append(
            CriterionResult(
                cid,
                CriterionLevel.NOT_APPLICABLE,
                f"requires human judgment ({description}); excluded from the machine rubric",
            )
        )
    return results


def classify(criteria: list[CriterionResult], use_case: UseCase = UseCase.CHECK_AND_FIX) -> Verdict:
    """Aggregate per-criterion outcomes into the three-tier verdict."""
    if not criteria:
        raise EvaluationError("cannot classify an empty criteria list")
    applicable = [c for c in criteria if c.level_triggered is not CriterionLevel.NOT_APPLICABLE]
    if not applicable:
        raise EvaluationError("all criteria are NotApplicable; nothing measurable")
    if any(c.level_triggered is CriterionLevel.INCORRECT for c in applicable):
        return Verdict(Classification.INCORRECT, criteria, use_case)
    correct = sum(1 for c in applicable if c.level_triggered is CriterionLevel.CORRECT_OK)
    if correct > len(applicable) / 2:
        return Verdict(Classification.CORRECT, criteria, use_case)
    return Verdict(Classification.PARTIALLY_CORRECT, criteria, use_case)


# -- batch harness ---------------------------------------------------------------


@dataclass
class CaseResult:
    case_id: str
    classification: str
    criteria: list[CriterionResult] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class CorpusEvalResult:
    use_case: UseCase
    rows: list[CaseResult]

    def counts(self) -> dict[str, int]:
        out = {"Correct": 0, "PartiallyCorrect": 0, "Incorrect": 0, "Skipped": 0, "Errored": 0}
        for row in self.rows:
            out[row.classification] = out.get(row.classification, 0) + 1
        return out

    def to_json_payload(self) -> list:
        return [
            {
                "case_id": row.case_id,
                "classification": row.classification,
                "criteria": [
                    {
                        "criterion_id": c.criterion_id,
                        "level": c.level_triggered.value,
                        "detail": c.detail,
                        **({"measured": c.measured} if c.measured is not None else {}),
                    }
                    for c in row.criteria
                ],
                **({"error": row.error} if row.error else {}),
            }
            for row in self.rows
        ]

    def summary_text(self) -> str:
        counts = self.counts()
        lines = [
            "corpus evaluation summary",
            f"use case: {self.use_case.value}",
            f"cases: {len(self.rows)}",
            f"Correct: {counts['Correct']}",
            f"PartiallyCorrect: {counts['PartiallyCorrect']}",
            f"Incorrect: {counts['Incorrect']}",
            f"Skipped: {counts['Skipped']}",
            f"Errored: {counts['Errored']}",
            "",
        ]
        for row in self.rows:
            lines.append(f"{row.case_id}: {row.classification}")
        return "\n".join(lines) + "\n"


def evaluate_case(case: CorpusCase, provider, use_case: UseCase, config, templates=None):
    """Run the selected workflow for the case and grade the response."""
    from dataclasses import replace
    from .prompts import DEFAULT_TEMPLATES
    from .rules import run_rules
    from .workflows import run_check_and_fix, run_fix_with_ai

    templates = templates or DEFAULT_TEMPLATES
    if config.output_dir is not None:
        config = replace(config, output_dir=Path(config.output_dir) / case.id)
    if use_case is UseCase.FIX_WITH_AI:
        diagnostics = run_rules(parse_document(case.doc), case.doc, config.enabled_rules)
        if not diagnostics:
            raise CaseNotApplicable(
                f"{case.id}: no static diagnostics; the fix workflow only runs on flagged code"
            )
        response = run_fix_with_ai(
            case.doc, diagnostics, provider, config=config, templates=templates
        )
    else:
        response = run_check_and_fix(
            case.doc, case.selection, provider, config=config, templates=templates
        )
    criteria = check_criteria(response, case, use_case)
    return classify(criteria, use_case), response


def evaluate_corpus(
    cases: list[CorpusCase], provider, use_case: UseCase, config, templates=None
) -> CorpusEvalResult:
    if not cases:
        raise EvaluationError("corpus is empty")
    rows = []
    for case in cases:
        try:
            verdict, _ = evaluate_case(case, provider, use_case, config, templates)
            rows.append(
                CaseResult(case.id, verdict.classification.value, verdict.criteria)
            )
        except CaseNotApplicable as exc:
            rows.append(CaseResult(case.id, "Skipped", [], error=str(exc)))
        except Exception as exc:  # provider/workflow failure: record and continue
            rows.append(CaseResult(case.id, "Errored", [], error=str(exc)))
    return CorpusEvalResult(use_case=use_case, rows=rows)


def write_results(result: CorpusEvalResult, out_dir: Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.json"
    summary_path = out_dir / "summary.txt"
    results_path.write_text(
        json.dumps(result.to_json_payload(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    summary_path.write_text(result.summary_text(), encoding="utf-8")
    return results_path, summary_path
