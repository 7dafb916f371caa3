"""Workflow tests: dedupe, annotation round-trips, reports, both use cases."""

import hashlib
import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from a11y_forge.config import EngineConfig
from a11y_forge.evaluator import load_case
from a11y_forge.llm import DetectionFinding, FixSuggestion, ReplayProvider, write_fixture
from a11y_forge.markup import Flavor, SourceDocument, make_span, parse_document
from a11y_forge.prompts import TemplateId, build_fix_prompt
from a11y_forge.rules import run_rules
from a11y_forge.workflows import (
    A11yReport,
    AnnotationError,
    EmptySelection,
    ReportMetadata,
    SelectionTooLarge,
    WorkflowInFlight,
    _document_slot,
    dedupe_findings,
    insert_annotation,
    render_annotation,
    render_report,
    run_check_and_fix,
    run_fix_with_ai,
    strip_annotation,
)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def finding(desc, code, criterion):
    return DetectionFinding(desc, code, criterion)


# -- dedupe ----------------------------------------------------------------------


def test_dedupe_empty():
    outcome = dedupe_findings([])
    assert outcome.unique == []
    assert outcome.duplicates_removed == 0
    assert outcome.merge_log == []


def test_dedupe_fig3_counts():
    findings = [
        finding("keyboard handler missing, tooltip unreachable with keyboard", "<div onClick={f}>", "2.1.1"),
        finding("keyboard handler missing, tooltip unreachable from keyboard", "<div onClick={f}>", "2.1.1"),
        finding("keyboard handler missing, tooltip unreachable using keyboard", "<div onClick={f}>", "2.1.1"),
        finding("listeners on a non-interactive element", "<div onClick={f}>", "4.1.2"),
    ]
    outcome = dedupe_findings(findings)
    assert len(outcome.unique) == 2
    assert outcome.duplicates_removed == 2
    assert outcome.merge_log == [(0, 1, 1.0), (0, 2, 1.0)]
    assert outcome.unique[0] is findings[0]  # first occurrence wins
    assert outcome.unique[1] is findings[3]


def test_dedupe_requires_equal_criteria():
    findings = [
        finding("identical words here", "<a/>", "2.1.1"),
        finding("identical words here", "<a/>", "4.1.2"),
    ]
    assert dedupe_findings(findings).duplicates_removed == 0


def test_dedupe_description_similarity():
    findings = [
        finding("image element lacks an alt attribute for screen readers", "<img src='a'/>", "1.1.1"),
        finding("image element lacks the alt attribute for screen readers", "<img src='b'/>", "1.1.1"),
    ]
    outcome = dedupe_findings(findings)
    assert outcome.duplicates_removed == 1
    assert 0.8 <= outcome.merge_log[0][2] <= 1.0


def test_dedupe_idempotent():
    findings = [
        finding("a b c d e", "<p>1</p>", "1.1.1"),
        finding("a b c d e", "<p>1</p>", "1.1.1"),
        finding("totally different words", "<q>2</q>", "2.1.1"),
    ]
    once = dedupe_findings(findings)
    twice = dedupe_findings(once.unique)
    assert twice.duplicates_removed == 0
    assert twice.unique == once.unique


@settings(max_examples=100, deadline=None)
@given(st.permutations(list(range(4))))
def test_dedupe_permutation_unique_multiset(order):
    base = [
        finding("keyboard handler missing for tooltip trigger element", "<div onClick={f}>", "2.1.1"),
        finding("keyboard handler missing for the tooltip trigger element", "<div onClick={f}>", "2.1.1"),
        finding("mouse listeners on plain div", "<div onClick={f}>", "4.1.2"),
        finding("image without alternative text", "<img/>", "1.1.1"),
    ]
    shuffled = [base[i] for i in order]
    outcome = dedupe_findings(shuffled)
    keys = sorted(
        (f.criterion, " ".join((f.offending_code or "").split())) for f in outcome.unique
    )
    assert keys == sorted(
        [("1.1.1", "<img/>"), ("2.1.1", "<div onClick={f}>"), ("4.1.2", "<div onClick={f}>")]
    )


# -- annotations -------------------------------------------------------------------


def sample_suggestions():
    return [
        FixSuggestion(
            error_description="click handler without keyboard support",
            offending_code="<div onClick={f}>",
            fix_description="add onKeyDown",
            fixed_code="<div onClick={f} onKeyDown={f}>x</div>",
        )
    ]


def test_annotation_insert_strip_identity():
    text = "line1\nline2\nline3\n"
    block = render_annotation(sample_suggestions(), "ab12cd34", Flavor.JSX)
    annotated = insert_annotation(text, block, 2)
    assert annotated != text
    assert "<<a11y-fix-suggestion:ab12cd34>>" in annotated
    assert strip_annotation(annotated) == text


def test_annotation_no_trailing_newline():
    text = "line1\nlast line without newline"
    block = render_annotation(sample_suggestions(), "ab12cd34", Flavor.JSX)
    annotated = insert_annotation(text, block, 2)
    assert strip_annotation(annotated) == text


def test_annotation_html_flavor_uses_html_comments():
    block = render_annotation(sample_suggestions(), "ab12cd34", Flavor.HTML)
    assert block.startswith("<!-- <<a11y-fix-suggestion:ab12cd34>> -->")
    assert "-->" in block.splitlines()[1]


def test_two_stacked_annotations_both_removed():
    text = "a\nb\nc\n"
    block1 = render_annotation(sample_suggestions(), "11111111", Flavor.JSX)
    block2 = render_annotation(sample_suggestions(), "22222222", Flavor.JSX)
    once = insert_annotation(text, block1, 2)
    twice = insert_annotation(once, block2, 2)
    assert strip_annotation(twice) == text


def test_unbalanced_annotation_errors():
    text = "a\n// <<a11y-fix-suggestion:deadbeef>>\nb\n"
    with pytest.raises(AnnotationError, match="line 2"):
        strip_annotation(text)


def test_strip_no_annotations_is_identity():
    text = "plain\nfile\n"
    assert strip_annotation(text) == text


_doc_alphabet = st.characters(exclude_characters="\r")


@settings(max_examples=200, deadline=None)
@given(
    text=st.text(alphabet=_doc_alphabet, max_size=300).filter(
        lambda t: "a11y-fix-suggestion" not in t and "<<end>>" not in t
    ),
    line=st.integers(min_value=0, max_value=20),
    flavor=st.sampled_from([Flavor.JSX, Flavor.HTML]),
)
def test_annotation_roundtrip_property(text, line, flavor):
    block = render_annotation(sample_suggestions(), "fe3412ab", flavor)
    annotated = insert_annotation(text, block, line)
    assert strip_annotation(annotated) == text


# -- fix-with-ai --------------------------------------------------------------------


@pytest.fixture()
def tooltip_case():
    return load_case(CORPUS / "tooltip")


def replay_config(tmp_path, *extra_dirs):
    return EngineConfig(
        provider="replay",
        fixtures_dirs=[CORPUS / "tooltip" / "fixtures", *extra_dirs],
        output_dir=tmp_path / "out",
    )


def test_run_fix_with_ai_tooltip(tooltip_case, tmp_path):
    config = replay_config(tmp_path)
    provider = config.build_provider()
    diagnostics = run_rules(parse_document(tooltip_case.doc), tooltip_case.doc)
    result = run_fix_with_ai(tooltip_case.doc, diagnostics, provider, config=config)
    assert result.ok
    assert len(result.suggestions) == 2
    assert result.annotation_text.startswith("// <<a11y-fix-suggestion:")
    assert "[1] error:" in result.annotation_text
    assert "[2] error:" in result.annotation_text
    assert "onKeyDown" in result.annotation_text
    assert result.sidecar_path.is_file()
    sidecar = result.sidecar_path.read_text()
    assert "fixed code:" in sidecar
    # annotation inserts below the flagged element and strips back out
    annotated = insert_annotation(
        tooltip_case.doc.text, result.annotation_text, result.source_span.end_line
    )
    assert strip_annotation(annotated) == tooltip_case.doc.text
    assert all(s.fixed_code_well_formed for s in result.suggestions)


def test_run_fix_with_ai_parse_failure(tmp_path):
    text = '<img src="a.png"/>\n'
    doc = SourceDocument.from_text(text, path=str(tmp_path / "pic.jsx"))
    (tmp_path / "pic.jsx").write_text(text)
    diagnostics = run_rules(parse_document(doc), doc)
    prompt = build_fix_prompt('<img src="a.png"/>', diagnostics)
    fixtures = tmp_path / "fx"
    write_fixture(fixtures, TemplateId.FIX, prompt, "so sorry, no JSON from me today")
    config = EngineConfig(provider="replay", fixtures_dirs=[fixtures], output_dir=tmp_path / "out")
    result = run_fix_with_ai(doc, diagnostics, config.build_provider(), config=config)
    assert not result.ok
    assert result.annotation_text == ""
    sidecar = result.sidecar_path.read_text()
    assert "RAW RESPONSE (unparseable)" in sidecar
    assert "no JSON from me today" in sidecar
    assert (tmp_path / "pic.jsx").read_text() == text  # original untouched


def test_fix_requires_diagnostics(tooltip_case, tmp_path):
    config = replay_config(tmp_path)
    with pytest.raises(Exception):
        run_fix_with_ai(tooltip_case.doc, [], config.build_provider(), config=config)


# -- check-and-fix --------------------------------------------------------------------


def test_check_and_fix_dedupe_on(tooltip_case, tmp_path):
    config = replay_config(tmp_path)
    before = hashlib.sha256(Path(tooltip_case.doc.path).read_bytes()).hexdigest()
    report = run_check_and_fix(
        tooltip_case.doc, tooltip_case.selection, config.build_provider(), config=config
    )
    after = hashlib.sha256(Path(tooltip_case.doc.path).read_bytes()).hexdigest()
    assert before == after  # source file never modified
    assert len(report.errors_section) == 2
    assert report.metadata.dedupe.duplicates_removed == 2
    assert len(report.metadata.dedupe.merge_log) == 2
    assert len(report.fixes_section) == 2
    assert report.report_path.is_file()
    text = report.report_path.read_text()
    assert "== CODE ==" in text and "== ERRORS ==" in text and "== FIXES ==" in text
    assert report.metadata.orphan_fixes == []


def test_check_and_fix_dedupe_off(tooltip_case, tmp_path):
    config = replay_config(tmp_path)
    config.dedupe = False
    report = run_check_and_fix(
        tooltip_case.doc, tooltip_case.selection, config.build_provider(), config=config
    )
    assert len(report.errors_section) == 4
    assert report.metadata.dedupe is None
    assert len(report.fixes_section) == 4


def test_check_and_fix_clean_selection(tmp_path):
    case = load_case(CORPUS / "heading-ok")
    config = EngineConfig(
        provider="replay",
        fixtures_dirs=[CORPUS / "heading-ok" / "fixtures"],
        output_dir=tmp_path / "out",
    )
    report = run_check_and_fix(case.doc, case.selection, config.build_provider(), config=config)
    assert report.errors_section == []
    assert report.fixes_section == []
    text = report.report_path.read_text()
    assert text.count("none found") == 2


def test_check_and_fix_deterministic_bytes(tooltip_case, tmp_path):
    config_a = replay_config(tmp_path / "a")
    config_b = replay_config(tmp_path / "b")
    report_a = run_check_and_fix(
        tooltip_case.doc, tooltip_case.selection, config_a.build_provider(), config=config_a
    )
    report_b = run_check_and_fix(
        tooltip_case.doc, tooltip_case.selection, config_b.build_provider(), config=config_b
    )
    assert report_a.report_path.read_bytes() == report_b.report_path.read_bytes()


def test_check_and_fix_empty_selection(tooltip_case, tmp_path):
    config = replay_config(tmp_path)
    empty = make_span(tooltip_case.doc, 5, 5)
    with pytest.raises(EmptySelection):
        run_check_and_fix(tooltip_case.doc, empty, config.build_provider(), config=config)


def test_check_and_fix_budget(tooltip_case, tmp_path):
    config = replay_config(tmp_path)
    config.prompt_char_budget = 10
    with pytest.raises(SelectionTooLarge):
        run_check_and_fix(
            tooltip_case.doc, tooltip_case.selection, config.build_provider(), config=config
        )


def test_detect_failure_report_has_raw_section(tmp_path):
    text = '<span role="alerts">hello</span>\n'
    path = tmp_path / "alert.jsx"
    path.write_text(text)
    doc = SourceDocument.from_text(text, path=str(path))
    from a11y_forge.prompts import build_detect_prompt

    fixtures = tmp_path / "fx"
    write_fixture(fixtures, TemplateId.DETECT, build_detect_prompt(text), "I do not speak JSON")
    config = EngineConfig(provider="replay", fixtures_dirs=[fixtures], output_dir=tmp_path / "out")
    report = run_check_and_fix(
        doc, make_span(doc, 0, len(text)), config.build_provider(), config=config
    )
    assert report.detect_failure is not None
    rendered = report.report_path.read_text()
    assert "== RAW RESPONSE (unparseable) ==" in rendered
    assert "I do not speak JSON" in rendered
    assert "== FIXES ==" not in rendered


def test_inflight_guard(tooltip_case, tmp_path):
    config = replay_config(tmp_path)
    with _document_slot(tooltip_case.doc.path):
        with pytest.raises(WorkflowInFlight, match="already in flight"):
            run_check_and_fix(
                tooltip_case.doc, tooltip_case.selection, config.build_provider(), config=config
            )


# -- report rendering -------------------------------------------------------------------


def make_report(errors, fixes):
    doc = SourceDocument.from_text("<p>x</p>", path="r.jsx")
    return A11yReport(
        code_section="<p>x</p>",
        errors_section=errors,
        fixes_section=fixes,
        metadata=ReportMetadata(
            model="codellama",
            timestamp=0.0,
            document_path="r.jsx",
            selection=make_span(doc, 0, 8),
        ),
    )


def test_render_report_sections_in_order():
    report = make_report(
        [finding("err one", "<p>x</p>", "1.1.1"), finding("err two", "<p>x</p>", "2.1.1")],
        [
            FixSuggestion("err one", "<p>x</p>", "fix it", "<p>y</p>", "1.1.1"),
            FixSuggestion("err two", "<p>x</p>", "fix that", "<p>z</p>", "2.1.1"),
        ],
    )
    text = render_report(report)
    code_at = text.index("== CODE ==")
    errors_at = text.index("== ERRORS ==")
    fixes_at = text.index("== FIXES ==")
    assert code_at < errors_at < fixes_at
    assert text.count("(1)") == 2 and text.count("(2)") == 2
    assert render_report(report) == text  # byte-stable


def test_render_report_empty_sections():
    text = render_report(make_report([], []))
    assert text.count("none found") == 2


@settings(max_examples=100, deadline=None)
@given(code=st.text(min_size=1, max_size=200).filter(lambda t: t.strip()))
def test_render_report_unicode_code_survives(code):
    doc = SourceDocument.from_text(code, path="u.jsx")
    report = A11yReport(
        code_section=code,
        errors_section=[],
        fixes_section=[],
        metadata=ReportMetadata(
            model="m", timestamp=0.0, document_path="u.jsx", selection=make_span(doc, 0, len(code))
        ),
    )
    text = render_report(report)
    body = text.split("== CODE ==\n", 1)[1].split("\n== ERRORS ==", 1)[0]
    assert body.rstrip("\n") == "\n".join(code.splitlines()).rstrip("\n")


def test_fix_with_ai_apply_annotation_writes_and_strips(tooltip_case, tmp_path):
    source_copy = tmp_path / "input.js"
    source_copy.write_text(tooltip_case.doc.text)
    doc = SourceDocument.from_text(tooltip_case.doc.text, path=str(source_copy))
    config = replay_config(tmp_path)
    diagnostics = run_rules(parse_document(doc), doc)
    result = run_fix_with_ai(
        doc, diagnostics, config.build_provider(), config=config, apply_annotation=True
    )
    annotated = source_copy.read_text()
    assert "<<a11y-fix-suggestion:" in annotated
    assert strip_annotation(annotated) == tooltip_case.doc.text


def test_check_and_fix_cancelled_mid_chain_emits_partial_report(tooltip_case, tmp_path):
    from a11y_forge.llm import RequestHandle

    class CancelAfterDetect:
        deterministic = True

        def __init__(self, inner, handle):
            self.inner = inner
            self.handle = handle

        def raw_complete(self, template_id, prompt, params, handle=None):
            out = self.inner.raw_complete(template_id, prompt, params, handle)
            self.handle.cancel()
            return out

    config = replay_config(tmp_path)
    handle = RequestHandle()
    provider = CancelAfterDetect(config.build_provider(), handle)
    report = run_check_and_fix(
        tooltip_case.doc, tooltip_case.selection, provider, config=config, handle=handle
    )
    assert len(report.errors_section) == 2
    assert report.fixes_section == []
    assert len(report.exchanges) == 1  # stage two never ran
    rendered = report.report_path.read_text()
    assert "== ERRORS ==" in rendered
