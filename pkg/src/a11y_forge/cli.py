"""Batch front door: scan, fix, check, eval.

Exit codes: 0 clean/ok, 1 findings (diagnostics, suggestions, or Incorrect
verdicts) present, 2 usage/configuration/processing error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .config import ConfigError, EngineConfig, load_config
from .evaluator import (
    CorpusError,
    EvaluationError,
    UseCase,
    evaluate_corpus,
    load_corpus,
    write_results,
)
from .llm import ProviderError
from .markup import DocumentEncodingError, SourceDocument, make_span, parse_document
from .prompts import PromptError
from .rules import UnknownRuleError, run_rules
from .workflows import (
    EmptySelection,
    SelectionTooLarge,
    WorkflowError,
    run_check_and_fix,
    run_fix_with_ai,
)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="a11y-forge",
        description="Accessibility linting and LLM-assisted fixing for JSX/TSX/HTML.",
    )
    parser.add_argument("--config", help="path to a11y-forge.toml")
    parser.add_argument("--rules", help="comma-separated rule ids to enable")
    parser.add_argument("--provider", choices=["replay", "live"], help="LLM provider kind")
    parser.add_argument("--model", help="model name for the live provider")
    parser.add_argument("--endpoint", help="base URL of the live model server")
    parser.add_argument(
        "--fixtures", action="append", default=None, help="replay fixture directory (repeatable)"
    )
    parser.add_argument("--no-dedupe", action="store_true", help="keep repeated findings")
    parser.add_argument("--out-dir", help="directory for sidecars, reports and results")
    parser.add_argument("--json", action="store_true", help="machine-readable output")

    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="run static accessibility rules over files")
    scan.add_argument("paths", nargs="+")

    fix = sub.add_parser("fix", help="request LLM fix suggestions for flagged code")
    fix.add_argument("path")
    group = fix.add_mutually_exclusive_group(required=True)
    group.add_argument("--line", type=int, help="fix diagnostics on this line")
    group.add_argument("--all", action="store_true", help="fix all diagnostics in the file")

    check = sub.add_parser("check", help="detect-and-fix over a source selection")
    check.add_argument("path")
    check.add_argument("--from", dest="from_pos", metavar="L:C", help="selection start (line:col)")
    check.add_argument("--to", dest="to_pos", metavar="L:C", help="selection end (line:col)")

    eval_cmd = sub.add_parser("eval", help="evaluate LLM responses over a labeled corpus")
    eval_cmd.add_argument("corpus_dir")
    eval_cmd.add_argument(
        "--use-case",
        choices=["check", "fix"],
        default="check",
        help="workflow to evaluate (default: check)",
    )
    return parser


def _resolve_config(args: argparse.Namespace) -> EngineConfig:
    config = load_config(args.config)
    updates = {}
    if args.rules:
        updates["enabled_rules"] = {r.strip() for r in args.rules.split(",") if r.strip()}
    if args.provider:
        updates["provider"] = args.provider
    if args.model:
        updates["model"] = args.model
    if args.endpoint:
        updates["endpoint"] = args.endpoint
    if args.fixtures:
        updates["fixtures_dirs"] = [Path(f) for f in args.fixtures]
    if args.no_dedupe:
        updates["dedupe"] = False
    if args.out_dir:
        updates["output_dir"] = Path(args.out_dir)
    return replace(config, **updates)


def _parse_linecol(value: str, what: str) -> tuple[int, int]:
    try:
        line_s, col_s = value.split(":", 1)
        return int(line_s), int(col_s)
    except (ValueError, AttributeError):
        raise ConfigError(f"{what} must look like LINE:COL, got {value!r}")


def _diag_line(path: str, d) -> str:
    return (
        f"{path}:{d.span.start_line}:{d.span.start_col} "
        f"{d.rule_id} [WCAG {d.wcag_criterion}] {d.message}"
    )


def cmd_scan(args, config: EngineConfig) -> int:
    had_error = False
    rows = []
    for path in args.paths:
        try:
            doc = SourceDocument.load(path)
        except (OSError, DocumentEncodingError, ValueError) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            had_error = True
            continue
        diagnostics = run_rules(parse_document(doc), doc, config.enabled_rules)
        for d in diagnostics:
            rows.append((path, d))
    if args.json:
        payload = [
            {
                "file": path,
                "line": d.span.start_line,
                "col": d.span.start_col,
                "rule": d.rule_id,
                "wcag": d.wcag_criterion,
                "message": d.message,
            }
            for path, d in rows
        ]
        print(json.dumps(payload, indent=2))
    else:
        for path, d in rows:
            print(_diag_line(path, d))
    if had_error:
        return EXIT_ERROR
    return EXIT_FINDINGS if rows else EXIT_OK


def cmd_fix(args, config: EngineConfig) -> int:
    doc = SourceDocument.load(args.path)
    diagnostics = run_rules(parse_document(doc), doc, config.enabled_rules)
    if args.line is not None:
        diagnostics = [d for d in diagnostics if d.span.start_line == args.line]
        if not diagnostics:
            print(f"no diagnostics at line {args.line}", file=sys.stderr)
            return EXIT_ERROR
    elif not diagnostics:
        print("no diagnostics; nothing to fix")
        return EXIT_OK
    provider = config.build_provider()
    result = run_fix_with_ai(
        doc, diagnostics, provider, config=config, templates=config.build_templates()
    )
    if args.json:
        print(
            json.dumps(
                {
                    "sidecar": str(result.sidecar_path),
                    "parse_ok": result.ok,
                    "suggestions": [s.to_payload() for s in result.suggestions],
                    "annotation": result.annotation_text,
                },
                indent=2,
            )
        )
    else:
        if result.ok:
            print(result.annotation_text, end="")
        else:
            print("response was not parseable; raw text saved to sidecar")
        print(f"sidecar: {result.sidecar_path}")
    return EXIT_FINDINGS


def cmd_check(args, config: EngineConfig) -> int:
    doc = SourceDocument.load(args.path)
    if args.from_pos and args.to_pos:
        from_line, from_col = _parse_linecol(args.from_pos, "--from")
        to_line, to_col = _parse_linecol(args.to_pos, "--to")
        start = doc.linecol_to_offset(from_line, from_col)
        end = doc.linecol_to_offset(to_line, to_col)
    elif args.from_pos or args.to_pos:
        raise ConfigError("--from and --to must be given together")
    else:
        start, end = 0, len(doc.text)
    selection = make_span(doc, start, end)
    provider = config.build_provider()
    report = run_check_and_fix(
        doc, selection, provider, config=config, templates=config.build_templates()
    )
    if args.json:
        print(
            json.dumps(
                {
                    "report": str(report.report_path),
                    "errors": [f.to_payload() for f in report.errors_section],
                    "fixes": [f.to_payload() for f in report.fixes_section],
                    "detect_failed": report.detect_failure is not None,
                    "fix_failed": report.fix_failure is not None,
                },
                indent=2,
            )
        )
    else:
        print(f"report: {report.report_path}")
    failed = report.detect_failure is not None or report.fix_failure is not None
    return EXIT_FINDINGS if (report.errors_section or failed) else EXIT_OK


def cmd_eval(args, config: EngineConfig) -> int:
    cases = load_corpus(Path(args.corpus_dir))
    fixture_dirs = [c.fixtures_dir for c in cases if c.fixtures_dir]
    if config.provider == "replay":
        eval_config = replace(
            config, fixtures_dirs=list(config.fixtures_dirs) + fixture_dirs
        )
    else:
        eval_config = config
    out_dir = Path(config.output_dir) if config.output_dir else Path("a11y-eval")
    eval_config = replace(eval_config, output_dir=out_dir / "cases").validate()
    use_case = UseCase.CHECK_AND_FIX if args.use_case == "check" else UseCase.FIX_WITH_AI
    provider = eval_config.build_provider()
    result = evaluate_corpus(
        cases, provider, use_case, eval_config, templates=config.build_templates()
    )
    results_path, summary_path = write_results(result, out_dir)
    if args.json:
        print(json.dumps(result.to_json_payload(), indent=2))
    else:
        counts = result.counts()
        print(f"cases: {len(result.rows)}")
        for name in ("Correct", "PartiallyCorrect", "Incorrect", "Skipped", "Errored"):
            print(f"{name}: {counts[name]}")
        print(f"results: {results_path}")
        print(f"summary: {summary_path}")
    if any(row.classification == "Errored" for row in result.rows):
        return EXIT_ERROR
    return EXIT_FINDINGS if any(r.classification == "Incorrect" for r in result.rows) else EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        config = _resolve_config(args)
        if args.command == "scan":
            return cmd_scan(args, config)
        if args.command in ("fix", "check"):
            config.validate()
        if args.command == "fix":
            return cmd_fix(args, config)
        if args.command == "check":
            return cmd_check(args, config)
        if args.command == "eval":
            return cmd_eval(args, config)
        parser.error(f"unknown command {args.command}")
        return EXIT_ERROR
    except (
        ConfigError,
        UnknownRuleError,
        CorpusError,
        EvaluationError,
        PromptError,
        ProviderError,
        WorkflowError,
        EmptySelection,
        SelectionTooLarge,
        DocumentEncodingError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
