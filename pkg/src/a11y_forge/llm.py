"""LLM transport and structured-response handling.

Two providers share one interface: a live HTTP client for a local model
server and a deterministic replay provider that serves recorded responses
keyed by prompt hash. Response parsing is a total function; failures are
returned as values carrying the extraction stages that were attempted.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import requests

from .prompts import TemplateId

# Field names accepted on incoming records; the prototype hardware used
# Italian names, so both spellings normalize to the English ones.
_FIELD_ALIASES = {
    "error_description": "error_description",
    "descrizione_errore": "error_description",
    "offending_code": "offending_code",
    "codice_generatore": "offending_code",
    "fix_description": "fix_description",
    "descrizione_risoluzione": "fix_description",
    "fixed_code": "fixed_code",
    "codice_fix": "fixed_code",
    "criterion": "criterion",
    "criterio": "criterion",
}

DETECT_FIELDS = ("error_description", "offending_code", "criterion")
FIX_FIELDS = ("error_description", "offending_code", "fix_description", "fixed_code")
CHAIN_FIX_FIELDS = FIX_FIELDS + ("criterion",)


@dataclass
class DetectionFinding:
    error_description: Optional[str] = None
    offending_code: Optional[str] = None
    criterion: Optional[str] = None
    extra_fields: tuple[str, ...] = ()

    def populated(self) -> dict[str, bool]:
        return {
            "error_description": bool(self.error_description and self.error_description.strip()),
            "offending_code": bool(self.offending_code and self.offending_code.strip()),
            "criterion": bool(self.criterion and str(self.criterion).strip()),
        }

    def to_payload(self) -> dict:
        out = {}
        for name in DETECT_FIELDS:
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


@dataclass
class FixSuggestion:
    error_description: Optional[str] = None
    offending_code: Optional[str] = None
    fix_description: Optional[str] = None
    fixed_code: Optional[str] = None
    criterion: Optional[str] = None
    extra_fields: tuple[str, ...] = ()
    fixed_code_well_formed: Optional[bool] = None  # quality flag set by workflows

    def populated(self) -> dict[str, bool]:
        out = {}
        for name in ("error_description", "offending_code", "fix_description", "fixed_code"):
            value = getattr(self, name)
            out[name] = bool(value and str(value).strip())
        if self.criterion is not None:
            out["criterion"] = bool(str(self.criterion).strip())
        return out

    def to_payload(self) -> dict:
        out = {}
        for name in CHAIN_FIX_FIELDS:
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


@dataclass
class ParseFailure:
    stages: list[str]
    detail: str

    @property
    def failed(self) -> bool:
        return True


@dataclass
class ParsedResponse:
    records: list[Union[DetectionFinding, FixSuggestion]]
    stage: str  # extraction stage that succeeded: direct | fenced | scanned
    non_conforming: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return False

    @property
    def clean(self) -> bool:
        return self.stage == "direct" and not self.non_conforming


_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)


def _find_balanced_json(text: str) -> Optional[str]:
    for opener, closer in (("[", "]"), ("{", "}")):
        start = text.find(opener)
        while start != -1:
            depth = 0
            in_string = False
            escape = False
            for i in range(start, len(text)):
                ch = text[i]
                if in_string:
                    if escape:
                        escape = False
                    elif ch == "\\":
                        escape = True
                    elif ch == '"':
                        in_string = False
                    continue
                if ch == '"':
                    in_string = True
                elif ch == opener:
                    depth += 1
                elif ch == closer:
                    depth -= 1
                    if depth == 0:
                        return text[start : i + 1]
            start = text.find(opener, start + 1)
    return None


def _extract_json(raw: str) -> tuple[Optional[object], str, list[str]]:
    attempted = []
    attempted.append("direct")
    try:
        return json.loads(raw.strip()), "direct", attempted
    except (json.JSONDecodeError, ValueError):
        pass
    attempted.append("fenced")
    for fenced in _FENCE_RE.findall(raw):
        try:
            return json.loads(fenced.strip()), "fenced", attempted
        except (json.JSONDecodeError, ValueError):
            continue
    attempted.append("scanned")
    candidate = _find_balanced_json(raw)
    if candidate is not None:
        try:
            return json.loads(candidate), "scanned", attempted
        except (json.JSONDecodeError, ValueError):
            pass
    return None, "", attempted


def _normalize_record(item: dict) -> tuple[dict, tuple[str, ...]]:
    known: dict[str, str] = {}
    extras: list[str] = []
    for key, value in item.items():
        mapped = _FIELD_ALIASES.get(str(key).strip().lower())
        if mapped is None:
            extras.append(str(key))
        elif mapped not in known:
            known[mapped] = None if value is None else str(value)
    return known, tuple(extras)


def parse_structured(
    raw: str, expected: TemplateId
) -> Union[ParsedResponse, ParseFailure]:
    """Extract and type a JSON response; total, never raises."""
    data, stage, attempted = _extract_json(raw)
    if stage == "":
        return ParseFailure(stages=attempted, detail="no JSON payload found in response")
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        return ParseFailure(
            stages=attempted, detail=f"JSON payload is {type(data).__name__}, expected a list"
        )
    records: list[Union[DetectionFinding, FixSuggestion]] = []
    non_conforming: list[str] = []
    for index, item in enumerate(data):
        if not isinstance(item, dict):
            non_conforming.append(f"item {index} is {type(item).__name__}, not an object")
            continue
        fields, extras = _normalize_record(item)
        if expected is TemplateId.DETECT:
            records.append(
                DetectionFinding(
                    error_description=fields.get("error_description"),
                    offending_code=fields.get("offending_code"),
                    criterion=fields.get("criterion"),
                    extra_fields=extras,
                )
            )
        else:
            records.append(
                FixSuggestion(
                    error_description=fields.get("error_description"),
                    offending_code=fields.get("offending_code"),
                    fix_description=fields.get("fix_description"),
                    fixed_code=fields.get("fixed_code"),
                    criterion=fields.get("criterion"),
                    extra_fields=extras,
                )
            )
    return ParsedResponse(records=records, stage=stage, non_conforming=non_conforming)


# -- transport ---------------------------------------------------------------


class ProviderError(RuntimeError):
    """Transport-level failure talking to the model provider."""

    def __init__(self, message: str, status: Optional[int] = None, body: str = ""):
        super().__init__(message)
        self.status = status
        self.body = body


class FixtureNotFoundError(ProviderError):
    """Replay provider has no fixture for the prompt."""


class RequestCancelled(RuntimeError):
    pass


@dataclass
class LlmExchange:
    template_id: TemplateId
    rendered_prompt: str
    raw_response: str
    model: str
    latency: float
    timestamp: float
    parsed: Union[ParsedResponse, ParseFailure, None] = None
    cancelled: bool = False


class RequestHandle:
    """Cancellation token for one in-flight completion."""

    def __init__(self):
        self._event = threading.Event()

    def cancel(self) -> None:
        self._event.set()

    @property
    def cancelled(self) -> bool:
        return self._event.is_set()


def prompt_key(template_id: TemplateId, prompt: str) -> str:
    digest = hashlib.sha256()
    digest.update(template_id.value.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(prompt.encode("utf-8"))
    return digest.hexdigest()


@dataclass
class GenerationParams:
    model: str = "codellama"
    temperature: float = 0.0
    seed: int = 0
    max_tokens: int = 2048


class ReplayProvider:
    """Serves recorded responses from fixture files, keyed by prompt hash."""

    deterministic = True

    def __init__(self, fixture_dirs: list[Path]):
        self._responses: dict[str, dict] = {}
        for d in fixture_dirs:
            d = Path(d)
            if not d.is_dir():
                continue
            for path in sorted(d.glob("*.json")):
                data = json.loads(path.read_text(encoding="utf-8"))
                self._responses[path.stem] = data

    def __len__(self) -> int:
        return len(self._responses)

    def raw_complete(
        self, template_id: TemplateId, prompt: str, params: GenerationParams,
        handle: Optional[RequestHandle] = None,
    ) -> tuple[str, str]:
        key = prompt_key(template_id, prompt)
        fixture = self._responses.get(key)
        if fixture is None:
            raise FixtureNotFoundError(
                f"no replay fixture for prompt hash {key} (template {template_id.value})"
            )
        return fixture["response"], fixture.get("model", params.model)


class LiveProvider:
    """HTTP client for an Ollama-style local model server."""

    deterministic = False

    def __init__(
        self,
        endpoint: str,
        timeout: float = 60.0,
        max_retries: int = 2,
        backoff: float = 0.5,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff

    def raw_complete(
        self, template_id: TemplateId, prompt: str, params: GenerationParams,
        handle: Optional[RequestHandle] = None,
    ) -> tuple[str, str]:
        payload = {
            "model": params.model,
            "prompt": prompt,
            "stream": False,
            "options": {"temperature": params.temperature, "seed": params.seed},
        }
        url = f"{self.endpoint}/api/generate"
        last_exc: Optional[Exception] = None
        for attempt in range(self.max_retries + 1):
            if handle is not None and handle.cancelled:
                raise RequestCancelled()
            try:
                response = requests.post(url, json=payload, timeout=self.timeout)
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_exc = exc
                if attempt < self.max_retries:
                    time.sleep(self.backoff * (2**attempt))
                continue
            if response.status_code < 200 or response.status_code >= 300:
                raise ProviderError(
                    f"provider returned HTTP {response.status_code}",
                    status=response.status_code,
                    body=response.text[:2000],
                )
            body = response.json()
            return body.get("response", ""), params.model
        raise ProviderError(f"transport failed after {self.max_retries + 1} attempts: {last_exc}")


Provider = Union[ReplayProvider, LiveProvider]


def complete(
    provider: Provider,
    template_id: TemplateId,
    prompt: str,
    params: GenerationParams,
    handle: Optional[RequestHandle] = None,
    persist_dir: Optional[Path] = None,
) -> LlmExchange:
    """Run one completion and record the exchange.

    The raw response is persisted (when persist_dir is set) before any
    parsing happens, so a crash downstream never loses it. Replay-backed
    exchanges use a fixed timestamp to keep pipeline output byte-stable.
    """
    started = time.monotonic()
    if handle is not None and handle.cancelled:
        return LlmExchange(template_id, prompt, "", params.model, 0.0, 0.0, cancelled=True)
    try:
        raw, model = provider.raw_complete(template_id, prompt, params, handle)
    except RequestCancelled:
        return LlmExchange(template_id, prompt, "", params.model, 0.0, 0.0, cancelled=True)
    latency = time.monotonic() - started
    deterministic = getattr(provider, "deterministic", False)
    exchange = LlmExchange(
        template_id=template_id,
        rendered_prompt=prompt,
        raw_response=raw,
        model=model,
        latency=0.0 if deterministic else latency,
        timestamp=0.0 if deterministic else time.time(),
    )
    if persist_dir is not None:
        persist_dir = Path(persist_dir)
        persist_dir.mkdir(parents=True, exist_ok=True)
        key = prompt_key(template_id, prompt)
        persist_dir.joinpath(f"{key}.json").write_text(
            json.dumps(
                {
                    "prompt": prompt,
                    "response": raw,
                    "model": model,
                    "template_id": template_id.value,
                },
                indent=2,
                ensure_ascii=False,
            )
            + "\n",
            encoding="utf-8",
        )
    return exchange


def write_fixture(
    directory: Path, template_id: TemplateId, prompt: str, response: str, model: str = "codellama"
) -> Path:
    """Record a response as a replay fixture for the given prompt."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    key = prompt_key(template_id, prompt)
    path = directory / f"{key}.json"
    path.write_text(
        json.dumps(
            {"prompt": prompt, "response": response, "model": model, "template_id": template_id.value},
            indent=2,
            ensure_ascii=False,
        )
        + "\n",
        encoding="utf-8",
    )
    return path
