"""Language Server Protocol front end over stdio (JSON-RPC 2.0).

Publishes rule diagnostics on open/change, offers the fix suggestion as a
code action, and exposes both workflows as executeCommand entries
(a11y.fixWithAI, a11y.checkAndFixWithAI) so any LSP-capable editor can
drive them. Position encoding follows the protocol's UTF-16 convention;
conversion to internal code-point offsets happens only in this module.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Optional
from urllib.parse import unquote, urlparse
from urllib.request import url2pathname

from .config import EngineConfig, config_from_dict, load_config
from .llm import RequestHandle
from .markup import SourceDocument, flavor_for_path, make_span, parse_document
from .rules import CATALOG, Diagnostic, run_rules
from .workflows import (
    EmptySelection,
    SelectionTooLarge,
    WorkflowError,
    annotation_edit,
    run_check_and_fix,
    run_fix_with_ai,
)

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603
REQUEST_FAILED = -32803


def uri_to_path(uri: str) -> str:
    parsed = urlparse(uri)
    if parsed.scheme and parsed.scheme != "file":
        return uri
    return url2pathname(unquote(parsed.path))


# -- UTF-16 position conversion ---------------------------------------------------


def utf16_len(text: str) -> int:
    return sum(2 if ord(ch) > 0xFFFF else 1 for ch in text)


def utf16_col_to_offset(line_text: str, utf16_col: int) -> int:
    units = 0
    for i, ch in enumerate(line_text):
        if units >= utf16_col:
            return i
        units += 2 if ord(ch) > 0xFFFF else 1
    return len(line_text)


def offset_to_utf16_col(line_text: str, col: int) -> int:
    return utf16_len(line_text[:col])


def position_to_offset(doc: SourceDocument, position: dict) -> int:
    line = max(0, int(position.get("line", 0)))
    if line >= len(doc.line_starts):
        return len(doc.text)
    start = doc.line_starts[line]
    end = doc.line_starts[line + 1] - 1 if line + 1 < len(doc.line_starts) else len(doc.text)
    line_text = doc.text[start:end]
    return start + utf16_col_to_offset(line_text, int(position.get("character", 0)))


def offset_to_position(doc: SourceDocument, offset: int) -> dict:
    line, col = doc.offset_to_linecol(offset)
    start = doc.line_starts[line - 1]
    end = doc.line_starts[line] - 1 if line < len(doc.line_starts) else len(doc.text)
    line_text = doc.text[start:end]
    return {"line": line - 1, "character": offset_to_utf16_col(line_text, col)}


def span_to_range(doc: SourceDocument, span) -> dict:
    return {
        "start": offset_to_position(doc, span.start),
        "end": offset_to_position(doc, span.end),
    }


# -- sessions ----------------------------------------------------------------------


@dataclass
class DocumentSession:
    uri: str
    path: str
    text: str
    version: int
    diagnostics: list[Diagnostic] = field(default_factory=list)
    in_flight: Optional[RequestHandle] = None
    debounce_timer: Optional[threading.Timer] = None

    def document(self) -> SourceDocument:
        try:
            flavor = flavor_for_path(self.path)
        except ValueError:
            flavor = None
        if flavor is None:
            return SourceDocument.from_text(self.text, path=self.path or "untitled.jsx")
        return SourceDocument.from_text(self.text, path=self.path, flavor=flavor)


class LspError(Exception):
    def __init__(self, code: int, message: str, data=None):
        super().__init__(message)
        self.code = code
        self.data = data


class Server:
    def __init__(self, reader: BinaryIO, writer: BinaryIO, config: Optional[EngineConfig] = None):
        self.reader = reader
        self.writer = writer
        self.write_lock = threading.Lock()
        self.sessions: dict[str, DocumentSession] = {}
        self.config = config or EngineConfig()
        self.provider = None
        self.templates = None
        self.shutdown_received = False
        self.exit_code: Optional[int] = None

    # -- transport ------------------------------------------------------------

    def _read_message(self) -> Optional[dict]:
        content_length = None
        while True:
            line = self.reader.readline()
            if not line:
                return None
            line = line.strip()
            if not line:
                break
            if line.lower().startswith(b"content-length:"):
                content_length = int(line.split(b":", 1)[1].strip())
        if content_length is None:
            return None
        body = self.reader.read(content_length)
        if not body:
            return None
        return json.loads(body.decode("utf-8"))

    def _write(self, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        with self.write_lock:
            self.writer.write(
                b"Content-Length: " + str(len(body)).encode() + b"\r\n\r\n" + body
            )
            self.writer.flush()

    def respond(self, msg_id, result) -> None:
        self._write({"jsonrpc": "2.0", "id": msg_id, "result": result})

    def respond_error(self, msg_id, code: int, message: str, data=None) -> None:
        error = {"code": code, "message": message}
        if data is not None:
            error["data"] = data
        self._write({"jsonrpc": "2.0", "id": msg_id, "error": error})

    def notify(self, method: str, params: dict) -> None:
        self._write({"jsonrpc": "2.0", "method": method, "params": params})

    def show_message(self, message: str, kind: int = 3) -> None:
        self.notify("window/showMessage", {"type": kind, "message": message})

    # -- lifecycle --------------------------------------------------------------

    def serve_forever(self) -> int:
        while True:
            message = self._read_message()
            if message is None:
                break
            self.handle(message)
            if self.exit_code is not None:
                return self.exit_code
        return 0 if self.shutdown_received else 1

    def handle(self, message: dict) -> None:
        method = message.get("method")
        msg_id = message.get("id")
        params = message.get("params") or {}
        if method is None:
            return  # response to a server-initiated request; none are pending
        try:
            handler = getattr(self, "on_" + method.replace("/", "_").replace("$", "dollar"), None)
            if handler is None:
                if msg_id is not None:
                    self.respond_error(msg_id, METHOD_NOT_FOUND, f"unhandled method {method}")
                return
            result = handler(params)
            if msg_id is not None:
                self.respond(msg_id, result)
        except LspError as exc:
            if msg_id is not None:
                self.respond_error(msg_id, exc.code, str(exc), exc.data)
        except Exception as exc:  # keep the server alive on handler bugs
            if msg_id is not None:
                self.respond_error(msg_id, INTERNAL_ERROR, f"{type(exc).__name__}: {exc}")

    def on_initialize(self, params: dict) -> dict:
        options = params.get("initializationOptions") or {}
        config_path = options.pop("configPath", None)
        if config_path:
            self.config = load_config(config_path)
        if options:
            self.config = config_from_dict(_camel_to_snake(options), self.config)
        self.provider = self.config.build_provider()
        self.templates = self.config.build_templates()
        return {
            "capabilities": {
                "textDocumentSync": {"openClose": True, "change": 1},
                "codeActionProvider": {"codeActionKinds": ["quickfix"]},
                "executeCommandProvider": {
                    "commands": ["a11y.fixWithAI", "a11y.checkAndFixWithAI"]
                },
                "positionEncoding": "utf-16",
            },
            "serverInfo": {"name": "a11y-forge-lsp", "version": "0.1.0"},
        }

    def on_initialized(self, params: dict) -> None:
        return None

    def on_shutdown(self, params: dict) -> None:
        self.shutdown_received = True
        return None

    def on_exit(self, params: dict) -> None:
        self.exit_code = 0 if self.shutdown_received else 1
        return None

    # -- documents ----------------------------------------------------------------

    def on_textDocument_didOpen(self, params: dict) -> None:
        td = params["textDocument"]
        session = DocumentSession(
            uri=td["uri"],
            path=uri_to_path(td["uri"]),
            text=td.get("text", ""),
            version=td.get("version", 0),
        )
        self.sessions[td["uri"]] = session
        self._publish(session)

    def on_textDocument_didChange(self, params: dict) -> None:
        td = params["textDocument"]
        session = self.sessions.get(td["uri"])
        if session is None:
            return
        for change in params.get("contentChanges", []):
            if "range" in change and change["range"] is not None:
                doc = session.document()
                start = position_to_offset(doc, change["range"]["start"])
                end = position_to_offset(doc, change["range"]["end"])
                session.text = session.text[:start] + change.get("text", "") + session.text[end:]
            else:
                session.text = change.get("text", "")
        session.version = td.get("version", session.version + 1)
        if session.in_flight is not None:
            session.in_flight.cancel()  # newer edit supersedes the older request
        if self.config.debounce_ms <= 0:
            self._publish(session)
            return
        if session.debounce_timer is not None:
            session.debounce_timer.cancel()
        version = session.version
        timer = threading.Timer(
            self.config.debounce_ms / 1000.0, self._publish_if_current, args=(session, version)
        )
        timer.daemon = True
        session.debounce_timer = timer
        timer.start()

    def on_textDocument_didClose(self, params: dict) -> None:
        uri = params["textDocument"]["uri"]
        session = self.sessions.pop(uri, None)
        if session is not None and session.debounce_timer is not None:
            session.debounce_timer.cancel()
        self.notify("textDocument/publishDiagnostics", {"uri": uri, "diagnostics": []})

    def _publish_if_current(self, session: DocumentSession, version: int) -> None:
        if self.sessions.get(session.uri) is session and session.version == version:
            self._publish(session)

    def _publish(self, session: DocumentSession) -> None:
        doc = session.document()
        tree = parse_document(doc)
        try:
            diagnostics = run_rules(tree, doc, self.config.enabled_rules)
        except Exception:
            diagnostics = []
        session.diagnostics = diagnostics
        payload = []
        for d in diagnostics:
            rule = CATALOG[d.rule_id]
            payload.append(
                {
                    "range": span_to_range(doc, d.span),
                    "severity": 1,
                    "code": f"WCAG {d.wcag_criterion}",
                    "codeDescription": {"href": rule.doc_url},
                    "source": "a11y-forge",
                    "message": f"{d.rule_id}: {d.message}",
                    "data": {"ruleId": d.rule_id, "wcagCriterion": d.wcag_criterion},
                }
            )
        for warning in tree.warnings:
            payload.append(
                {
                    "range": span_to_range(doc, warning.span),
                    "severity": 4,  # hint: parse trouble never blocks diagnostics
                    "source": "a11y-forge",
                    "message": f"parse: {warning.message}",
                }
            )
        self.notify(
            "textDocument/publishDiagnostics",
            {"uri": session.uri, "version": session.version, "diagnostics": payload},
        )

    # -- code actions and commands ---------------------------------------------------

    def _session_or_error(self, uri: str) -> DocumentSession:
        session = self.sessions.get(uri)
        if session is None:
            raise LspError(INVALID_PARAMS, f"document not open: {uri}")
        return session

    def _diagnostics_in_range(self, session, doc, range_param):
        start = position_to_offset(doc, range_param["start"])
        end = position_to_offset(doc, range_param["end"])
        selected = []
        for d in session.diagnostics:
            if d.span.start <= end and start <= d.span.end:
                selected.append(d)
        return selected

    def on_textDocument_codeAction(self, params: dict) -> list:
        session = self._session_or_error(params["textDocument"]["uri"])
        doc = session.document()
        overlapping = self._diagnostics_in_range(session, doc, params["range"])
        if not overlapping:
            return []
        return [
            {
                "title": "Get fix suggestion from AI",
                "kind": "quickfix",
                "diagnostics": [
                    {
                        "range": span_to_range(doc, d.span),
                        "message": f"{d.rule_id}: {d.message}",
                        "severity": 1,
                        "source": "a11y-forge",
                    }
                    for d in overlapping
                ],
                "command": {
                    "title": "Get fix suggestion from AI",
                    "command": "a11y.fixWithAI",
                    "arguments": [session.uri, params["range"]],
                },
            }
        ]

    def on_workspace_executeCommand(self, params: dict):
        command = params.get("command")
        arguments = params.get("arguments") or []
        if command == "a11y.fixWithAI":
            return self._command_fix(arguments)
        if command == "a11y.checkAndFixWithAI":
            return self._command_check(arguments)
        raise LspError(INVALID_PARAMS, f"unknown command {command!r}")

    def _begin_request(self, session: DocumentSession) -> RequestHandle:
        if session.in_flight is not None and not session.in_flight.cancelled:
            raise LspError(REQUEST_FAILED, "request already in flight for this document")
        handle = RequestHandle()
        session.in_flight = handle
        return handle

    def _command_fix(self, arguments: list):
        if len(arguments) < 2:
            raise LspError(INVALID_PARAMS, "expected [uri, range] arguments")
        uri, range_param = arguments[0], arguments[1]
        session = self._session_or_error(uri)
        doc = session.document()
        overlapping = self._diagnostics_in_range(session, doc, range_param)
        if not overlapping:
            raise LspError(INVALID_PARAMS, "no diagnostics in the given range")
        handle = self._begin_request(session)
        try:
            result = run_fix_with_ai(
                doc,
                overlapping,
                self.provider,
                config=self.config,
                templates=self.templates,
                handle=handle,
            )
        except WorkflowError as exc:
            raise LspError(REQUEST_FAILED, str(exc))
        finally:
            session.in_flight = None
        if not result.ok:
            self.show_message(
                f"LLM response was not parseable; raw text saved to {result.sidecar_path}", 2
            )
            raise LspError(
                REQUEST_FAILED,
                "LLM response was not parseable",
                data={"sidecarPath": str(result.sidecar_path)},
            )
        offset, inserted = annotation_edit(
            doc.text, result.annotation_text, result.source_span.end_line
        )
        position = offset_to_position(doc, offset)
        edit = {
            "changes": {
                session.uri: [{"range": {"start": position, "end": position}, "newText": inserted}]
            }
        }
        self.show_message(f"Fix suggestions written to {result.sidecar_path}")
        return {"edit": edit, "sidecarPath": str(result.sidecar_path)}

    def _command_check(self, arguments: list):
        if len(arguments) < 2:
            raise LspError(INVALID_PARAMS, "expected [uri, range] arguments")
        uri, range_param = arguments[0], arguments[1]
        session = self._session_or_error(uri)
        doc = session.document()
        start = position_to_offset(doc, range_param["start"])
        end = position_to_offset(doc, range_param["end"])
        if start >= end:
            raise LspError(INVALID_PARAMS, "selection is empty")
        handle = self._begin_request(session)
        try:
            report = run_check_and_fix(
                doc,
                make_span(doc, start, end),
                self.provider,
                config=self.config,
                templates=self.templates,
                handle=handle,
            )
        except SelectionTooLarge as exc:
            raise LspError(REQUEST_FAILED, str(exc))
        except EmptySelection as exc:
            raise LspError(INVALID_PARAMS, str(exc))
        except WorkflowError as exc:
            raise LspError(REQUEST_FAILED, str(exc))
        finally:
            session.in_flight = None
        self.show_message(f"Accessibility report written to {report.report_path}")
        return {"reportPath": str(report.report_path)}

    def on_dollar_cancelRequest(self, params: dict) -> None:
        return None


def _camel_to_snake(options: dict) -> dict:
    import re

    out = {}
    for key, value in options.items():
        snake = re.sub(r"(?<!^)(?=[A-Z])", "_", key).lower()
        out[snake] = value
    return out


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="a11y-forge-lsp")
    parser.add_argument("--config", help="path to a11y-forge.toml")
    args = parser.parse_args(argv)
    config = load_config(args.config) if args.config else EngineConfig()
    server = Server(sys.stdin.buffer, sys.stdout.buffer, config)
    return server.serve_forever()


if __name__ == "__main__":
    sys.exit(main())
