#!/usr/bin/env python3
"""Regenerate the replay fixtures bundled with the corpus.

Fixtures are keyed by prompt hash, so they are derived from the exact prompts
the engine renders. Response payloads are authored here: most cases carry a
fully conformant response; a few are deliberately degraded to exercise every
rubric tier (prose output, missing fields, mismatched criteria, dropped code,
and the repeated-findings scenario on the tooltip case).
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from a11y_forge.evaluator import load_corpus
from a11y_forge.llm import DetectionFinding, write_fixture
from a11y_forge.markup import parse_document, slice_span, smallest_enclosing_element
from a11y_forge.prompts import (
    TemplateId,
    build_chain_fix_prompt,
    build_detect_prompt,
    build_fix_prompt,
)
from a11y_forge.rules import run_rules
from a11y_forge.workflows import dedupe_findings

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
MODEL = "codellama"

DESCRIPTIONS = {
    "img-alt-required": "Image {hint} has no alt attribute",
    "anchor-has-content": "Anchor {hint} has no accessible content",
    "click-events-have-key-events": "Element {hint} handles clicks without any keyboard listener",
    "no-noninteractive-element-interactions": "Interaction listeners attached to non-interactive element {hint}",
    "aria-role-valid": "Role value {hint} is not a valid ARIA role",
    "aria-props-valid": "Attribute aria-lable on {hint} is not a valid ARIA attribute",
    "no-aria-hidden-with-label": "Element {hint} exposes a label while hidden with aria-hidden",
    "interactive-supports-focus": "Interactive role on {hint} is not focusable",
    "label-has-associated-control": "Label {hint} is not associated with any control",
    "no-autofocus": "autoFocus on {hint} steals focus on load",
    "heading-has-content": "Heading {hint} has no accessible content",
    "html-has-lang": "The html element {hint} has no lang attribute",
}

FIX_DESCRIPTIONS = {
    "img-alt-required": "Add an alt attribute describing the image",
    "anchor-has-content": "Add descriptive text content inside the anchor",
    "click-events-have-key-events": "Add an onKeyDown listener mirroring the click behavior",
    "no-noninteractive-element-interactions": "Add an interactive role and keyboard support to the element",
    "aria-role-valid": "Replace the invalid role with a valid ARIA role",
    "aria-props-valid": "Rename the misspelled attribute to aria-label",
    "no-aria-hidden-with-label": "Remove the label from the aria-hidden element",
    "interactive-supports-focus": "Add tabIndex so the element participates in keyboard focus",
    "label-has-associated-control": "Point the label at its control with htmlFor",
    "no-autofocus": "Remove the autoFocus attribute",
    "heading-has-content": "Add heading text content",
    "html-has-lang": "Declare the document language with a lang attribute",
}


def insert_attr(code: str, attr_text: str) -> str:
    cut = len(code)
    for marker in ("/>", ">"):
        pos = code.find(marker)
        if pos != -1:
            cut = min(cut, pos)
    return code[:cut].rstrip() + " " + attr_text + code[cut:]


def transform_element(rule: str, code: str) -> str:
    if rule == "img-alt-required":
        return insert_attr(code, 'alt="Descriptive image"')
    if rule == "anchor-has-content":
        if code.rstrip().endswith("/>"):
            head = code.rstrip()[:-2].rstrip()
            return head + ">Archive link</a>"
        return code.replace("></a>", ">Archive link</a>")
    if rule == "click-events-have-key-events":
        return insert_attr(code, "onKeyDown={handleKeyDown}")
    if rule == "no-noninteractive-element-interactions":
        return insert_attr(code, 'role="button" tabIndex={0} onKeyDown={handleKeyDown}')
    if rule == "aria-role-valid":
        return code.replace('role="alerts"', 'role="alert"').replace('role="gage"', 'role="status"')
    if rule == "aria-props-valid":
        return code.replace("aria-lable", "aria-label")
    if rule == "no-aria-hidden-with-label":
        return code.replace(' aria-label="Close dialog"', "")
    if rule == "interactive-supports-focus":
        return insert_attr(code, "tabIndex={0}")
    if rule == "label-has-associated-control":
        return code.replace("<label>", '<label htmlFor="username">', 1)
    if rule == "no-autofocus":
        return code.replace(" autoFocus", "").replace(' autofocus="autofocus"', "")
    if rule == "heading-has-content":
        if code.rstrip().endswith("/>"):
            head = code.rstrip()[:-2].rstrip()
            tag = code[1:3]
            return head + f">Section title</{tag}>"
        return code.replace("></", ">Section title</", 1)
    if rule == "html-has-lang":
        return code.replace("<html>", '<html lang="en">', 1)
    raise ValueError(f"no transform for rule {rule}")


def element_source(case, seed) -> str:
    tree = parse_document(case.doc)
    element = smallest_enclosing_element(tree, [seed.offending_span])
    assert element is not None, (case.id, seed.rule_id)
    return slice_span(case.doc, element.span)


_SKIP_HINT_TOKENS = frozenset(
    "href src type class className id key role name value aria-lable".split()
)


def hint_for(seed) -> str:
    import re as _re

    tokens = _re.findall(r"[A-Za-z0-9_.-]+", seed.canonical_offending_code)
    for token in tokens[1:]:
        if token.lower() not in _SKIP_HINT_TOKENS and len(token) > 2:
            return token
    return tokens[0] if tokens else "element"


# Where two seeded errors share one element and criterion, the findings must
# quote distinct attribute snippets or the dedupe predicate collapses them.
_OFFENDING_OVERRIDES = {
    ("custom-aria", "aria-props-valid"): "aria-lable={value}",
    ("custom-aria", "aria-role-valid"): 'role="gage"',
}


def good_findings(case) -> list[dict]:
    out = []
    for seed in case.seeded_errors:
        description = DESCRIPTIONS[seed.rule_id].format(hint=hint_for(seed))
        offending = _OFFENDING_OVERRIDES.get(
            (case.id, seed.rule_id), seed.canonical_offending_code
        )
        out.append(
            {
                "error_description": description,
                "offending_code": offending,
                "criterion": seed.criterion,
            }
        )
    return out


def good_fixes(case) -> list[dict]:
    out = []
    for finding, seed in zip(good_findings(case), case.seeded_errors):
        source = element_source(case, seed)
        fix = dict(finding)
        fix["fix_description"] = FIX_DESCRIPTIONS[seed.rule_id]
        fix["fixed_code"] = transform_element(seed.rule_id, source)
        out.append(fix)
    return out


def as_findings(payload: list[dict]) -> list[DetectionFinding]:
    return [
        DetectionFinding(
            error_description=item["error_description"],
            offending_code=item["offending_code"],
            criterion=item.get("criterion"),
        )
        for item in payload
    ]


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


# -- tooltip scenario (the paper's walkthrough) ---------------------------------


def tooltip_fig2_response(trigger_open: str, trigger_element: str) -> str:
    inner = trigger_element[len(trigger_open):]
    closing = inner[inner.rfind("</") :]
    body = inner[: inner.rfind("</")]
    fixed_1 = (
        trigger_open[:-1] + ' role="button" tabIndex={0} onKeyDown={showTooltip}>' + body + closing
    )
    fixed_2 = (
        '<button type="button" className="tooltip-trigger" onClick={showTooltip} '
        "onKeyPress={showTooltip}>" + body + "</button>"
    )
    return dumps(
        [
            {
                "error_description": (
                    "The div element handles click events but has no keyboard listener, "
                    "so keyboard users cannot trigger the tooltip."
                ),
                "offending_code": trigger_open,
                "fix_description": (
                    "Give the element the button role, make it focusable with tabIndex "
                    "and handle keyboard activation with onKeyDown."
                ),
                "fixed_code": fixed_1,
            },
            {
                "error_description": (
                    "Interaction listeners are placed on a non-interactive div element, "
                    "which assistive technologies do not announce as interactive."
                ),
                "offending_code": trigger_element,
                "fix_description": (
                    "Replace the non-interactive div with a native button element; "
                    "onKeyPress covers legacy keyboard events."
                ),
                "fixed_code": fixed_2,
            },
        ]
    )


def tooltip_fig3_findings(trigger_open: str) -> list[dict]:
    keyboard = "The div element has an onClick handler but no keyboard handler, so the tooltip cannot be opened {variant} the keyboard."
    return [
        {
            "error_description": keyboard.format(variant="with"),
            "offending_code": trigger_open,
            "criterion": "2.1.1",
        },
        {
            "error_description": keyboard.format(variant="from"),
            "offending_code": trigger_open,
            "criterion": "2.1.1",
        },
        {
            "error_description": keyboard.format(variant="using"),
            "offending_code": trigger_open,
            "criterion": "2.1.1",
        },
        {
            "error_description": "Mouse event listeners are attached to a non-interactive div element.",
            "offending_code": trigger_open,
            "criterion": "4.1.2",
        },
    ]


def tooltip_fig3_fix(finding: dict, trigger_open: str, trigger_element: str) -> dict:
    inner = trigger_element[len(trigger_open):]
    closing = inner[inner.rfind("</") :]
    body = inner[: inner.rfind("</")]
    fix = dict(finding)
    if finding["criterion"] == "2.1.1":
        fix["fix_description"] = (
            "Add role, tabIndex and an onKeyDown handler so keyboard users can open the tooltip."
        )
        fix["fixed_code"] = (
            trigger_open[:-1]
            + ' role="button" tabIndex={0} onKeyDown={showTooltip} aria-hidden="true" '
            'aria-label="More information">' + body + closing
        )
    else:
        fix["fix_description"] = "Move the listeners to a native button element."
        fix["fixed_code"] = (
            '<button type="button" className="tooltip-trigger" onClick={showTooltip}>'
            + body
            + "</button>"
        )
    return fix


def build_tooltip_fixtures(case, fixtures_dir: Path) -> None:
    diagnostics = run_rules(parse_document(case.doc), case.doc)
    assert len(diagnostics) == 2, [d.rule_id for d in diagnostics]
    tree = parse_document(case.doc)
    element = smallest_enclosing_element(tree, [d.span for d in diagnostics])
    trigger_element = slice_span(case.doc, element.span)
    trigger_open = slice_span(case.doc, element.open_tag_span)

    fix_prompt = build_fix_prompt(trigger_element, diagnostics)
    write_fixture(
        fixtures_dir, TemplateId.FIX, fix_prompt,
        tooltip_fig2_response(trigger_open, trigger_element), MODEL,
    )

    selection_code = slice_span(case.doc, case.selection)
    detect_prompt = build_detect_prompt(selection_code)
    findings = tooltip_fig3_findings(trigger_open)
    write_fixture(fixtures_dir, TemplateId.DETECT, detect_prompt, dumps(findings), MODEL)

    unique = dedupe_findings(as_findings(findings)).unique
    chain_deduped = build_chain_fix_prompt(selection_code, unique)
    fixes_deduped = [
        tooltip_fig3_fix({
            "error_description": f.error_description,
            "offending_code": f.offending_code,
            "criterion": f.criterion,
        }, trigger_open, trigger_element)
        for f in unique
    ]
    write_fixture(fixtures_dir, TemplateId.CHAIN_FIX, chain_deduped, dumps(fixes_deduped), MODEL)

    chain_all = build_chain_fix_prompt(selection_code, as_findings(findings))
    fixes_all = [tooltip_fig3_fix(f, trigger_open, trigger_element) for f in findings]
    write_fixture(fixtures_dir, TemplateId.CHAIN_FIX, chain_all, dumps(fixes_all), MODEL)


# -- per-case fix-with-ai fixtures -------------------------------------------------


def build_fix_fixture(case, fixtures_dir: Path) -> None:
    """Record a conformant fix response for the case's static diagnostics."""
    tree = parse_document(case.doc)
    diagnostics = run_rules(tree, case.doc)
    if not diagnostics:
        return
    element = smallest_enclosing_element(tree, [d.span for d in diagnostics])
    code = (
        slice_span(case.doc, element.span) if element is not None else case.doc.text
    )
    prompt = build_fix_prompt(code, diagnostics)

    seeds_by_rule = {}
    for seed in case.seeded_errors:
        seeds_by_rule.setdefault(seed.rule_id, []).append(seed)
    fixes = []
    for d in diagnostics:
        pool = seeds_by_rule.get(d.rule_id, [])
        seed = next(
            (s for s in pool if s.offending_span.contains(d.span)), pool[0] if pool else None
        )
        if seed is None:
            continue
        source = element_source(case, seed)
        fixes.append(
            {
                "error_description": DESCRIPTIONS[seed.rule_id].format(hint=hint_for(seed)),
                "offending_code": seed.canonical_offending_code,
                "fix_description": FIX_DESCRIPTIONS[seed.rule_id],
                "fixed_code": transform_element(seed.rule_id, source),
            }
        )
    write_fixture(fixtures_dir, TemplateId.FIX, prompt, dumps(fixes), MODEL)


# -- per-case check-and-fix fixtures ---------------------------------------------


def build_case_fixtures(case, fixtures_dir: Path) -> None:
    selection_code = slice_span(case.doc, case.selection)
    detect_prompt = build_detect_prompt(selection_code)

    if case.id == "aria-role-invalid":
        # Degraded: prose instead of JSON; detect stage fails.
        write_fixture(
            fixtures_dir, TemplateId.DETECT, detect_prompt,
            "The role attribute on the span looks wrong to me, but I am unable to "
            "produce the requested JSON structure right now. Apologies!",
            MODEL,
        )
        return

    findings = good_findings(case)

    if case.id == "label-no-control":
        # Degraded: fenced JSON, incongruent criterion, fix missing fixed_code.
        findings = [dict(findings[0], criterion="1.4.3")]
        response = "Here is what I found:\n```json\n" + dumps(findings) + "\n```"
        write_fixture(fixtures_dir, TemplateId.DETECT, detect_prompt, response, MODEL)
        unique = dedupe_findings(as_findings(findings)).unique
        chain_prompt = build_chain_fix_prompt(selection_code, unique)
        fixes = [
            dict(
                findings[0],
                fix_description="Associate the label with its control using htmlFor",
                fixed_code="",
            )
        ]
        write_fixture(fixtures_dir, TemplateId.CHAIN_FIX, chain_prompt, dumps(fixes), MODEL)
        return

    write_fixture(fixtures_dir, TemplateId.DETECT, detect_prompt, dumps(findings), MODEL)
    unique = dedupe_findings(as_findings(findings)).unique
    assert len(unique) == len(findings), f"{case.id}: generated findings collapse under dedupe"
    chain_prompt = build_chain_fix_prompt(selection_code, unique)

    if case.id == "noninteractive-handler":
        # Degraded: the fix drops the element's original content.
        seed = case.seeded_errors[0]
        fixes = [
            dict(
                findings[0],
                fix_description=FIX_DESCRIPTIONS[seed.rule_id],
                fixed_code='<li key={item.id} role="button" tabIndex={0} onMouseDown={highlight}></li>',
            )
        ]
    else:
        fixes = good_fixes(case)
    write_fixture(fixtures_dir, TemplateId.CHAIN_FIX, chain_prompt, dumps(fixes), MODEL)


def main():
    cases = load_corpus(CORPUS)
    assert len(cases) == 30
    for case in cases:
        fixtures_dir = case.directory / "fixtures"
        if fixtures_dir.is_dir():
            for old in fixtures_dir.glob("*.json"):
                old.unlink()
        if case.id == "tooltip":
            build_tooltip_fixtures(case, fixtures_dir)
        else:
            build_case_fixtures(case, fixtures_dir)
            build_fix_fixture(case, fixtures_dir)
    total = sum(len(list((c.directory / "fixtures").glob("*.json"))) for c in cases)
    print(f"wrote fixtures for {len(cases)} cases ({total} files)")


if __name__ == "__main__":
    main()
