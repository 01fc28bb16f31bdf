"""HTTP client for a model-backed decision oracle."""

from __future__ import annotations

import logging
import os
import threading
import time
from pathlib import Path
from string import Template

import httpx

from ..errors import OracleError, OracleTransportError
from .base import Oracle, OracleQuery, OracleReply, parse_answer
from .wire import BUDGET_HEADER, decode_response, encode_request

log = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"
DEFAULT_TOKEN_ENV = "SCENEPATHS_ORACLE_TOKEN"


def load_templates(directory: str | Path = TEMPLATE_DIR) -> dict[str, Template]:
    directory = Path(directory)
    out = {}
    for kind in ("categorize", "score", "children", "relation"):
        out[kind] = Template((directory / f"{kind}.txt").read_text(encoding="utf-8"))
    return out


def render_instructions(templates: dict[str, Template], query: OracleQuery) -> str:
    fields = {"scene_type": query.scene_type}
    for key in ("relation", "max_children"):
        if key in query.payload:
            fields[key] = str(query.payload[key])
    return templates[query.kind].safe_substitute(fields)


class RemoteOracle(Oracle):
    """One HTTP POST per ask; up to ``retries`` extra attempts on bad replies.

    ``transport`` is handed to httpx, which lets tests plug in a scripted stub.
    """

    source = "remote"

    def __init__(self, endpoint: str, *, token_env: str = DEFAULT_TOKEN_ENV, retries: int = 2,
                 timeout: float = 60.0, max_in_flight: int = 4, transport: httpx.BaseTransport | None = None,
                 template_dir: str | Path = TEMPLATE_DIR):
        super().__init__()
        if not endpoint:
            raise OracleError("remote oracle needs an endpoint")
        self.endpoint = endpoint
        self.retries = retries
        self.templates = load_templates(template_dir)
        self.attempts: list[tuple[str, str, int]] = []  # (budget_id, kind, attempt)
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(transport=transport, timeout=timeout, headers=headers)
        self._slots = threading.BoundedSemaphore(max(1, max_in_flight))

    def close(self) -> None:
        self._client.close()

    def _ask(self, query: OracleQuery) -> OracleReply:
        body = encode_request(query, render_instructions(self.templates, query))
        transcript = [body.decode("utf-8")]
        transport_only = True
        started = time.perf_counter()
        for attempt in range(self.retries + 1):
            with self._lock:
                self.attempts.append((query.budget_id, query.kind, attempt))
            log.info("remote oracle call kind=%s budget_id=%s attempt=%d", query.kind, query.budget_id, attempt)
            try:
                with self._slots:
                    resp = self._client.post(self.endpoint, content=body, headers={BUDGET_HEADER: query.budget_id})
                resp.raise_for_status()
            except httpx.HTTPError as exc:
                transcript.append(f"<transport error: {exc}>")
                continue
            transport_only = False
            transcript.append(resp.text)
            try:
                answer = parse_answer(query, decode_response(resp.content))
            except (ValueError, KeyError, TypeError) as exc:
                transcript.append(f"<invalid reply: {exc}>")
                continue
            return OracleReply(query.kind, answer, tuple(transcript), time.perf_counter() - started, self.source, True)
        cls = OracleTransportError if transport_only else OracleError
        raise cls(f"remote oracle gave no valid {query.kind} answer after {self.retries + 1} attempts", transcript)
