"""Single gateway for chat and embedding calls with live/record/replay modes.

Every request is canonicalized (sorted JSON fields; message text hashed
verbatim) and digested with SHA-256. Record mode captures live responses into
an append-only JSONL transcript keyed by digest; replay mode serves them back
with no network access, making whole pipeline runs deterministic. Usage
counters track call counts and accumulated latency ("thinking time"); in
replay mode the recorded latency is accumulated so reports reproduce exactly.

The stub embedder is a deterministic local stand-in for a hosted embedding
model: character trigrams per whitespace token (padded with ^/$), FNV-1a
hashed into 256 buckets, L2-normalized.
"""

from __future__ import annotations

import base64
import hashlib
import json
import mimetypes
import os
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np


class OracleFailure(Exception):
    """Base class for oracle gateway errors."""


class NetworkError(OracleFailure):
    pass


class ProviderError(OracleFailure):
    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"provider returned HTTP {status}: {body[:200]}")


class ReplayMiss(OracleFailure):
    def __init__(self, digest: str):
        self.digest = digest
        super().__init__(f"no transcript record for digest {digest}")


@dataclass(frozen=True)
class ChatRequest:
    """One chat call: model, messages (role + content parts), decoding knobs."""

    model: str
    messages: tuple[dict, ...]
    temperature: float = 0.0
    max_tokens: int = 2048

    def payload(self) -> dict:
        return {
            "model": self.model,
            "messages": [json.loads(json.dumps(m)) for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


def text_message(role: str, text: str, images: list[str] | None = None) -> dict:
    """Build a chat message; image file paths are inlined as base64 data URIs."""
    if not images:
        return {"role": role, "content": [{"type": "text", "text": text}]}
    parts: list[dict] = [{"type": "text", "text": text}]
    for path in images:
        mime = mimetypes.guess_type(str(path))[0] or "application/octet-stream"
        data = base64.b64encode(Path(path).read_bytes()).decode("ascii")
        parts.append(
            {"type": "image_url", "image_url": {"url": f"data:{mime};base64,{data}"}}
        )
    return {"role": role, "content": parts}


def canonical_request(payload: dict) -> str:
    """Canonical JSON: sorted keys, compact separators, text kept verbatim."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def request_digest(payload: dict) -> str:
    return hashlib.sha256(canonical_request(payload).encode("utf-8")).hexdigest()


@dataclass
class UsageCounters:
    """Monotone call and wall-clock accounting, safe for concurrent updates."""

    n_calls: int = 0
    n_chat: int = 0
    n_embed: int = 0
    thinking_time: float = 0.0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def add(self, kind: str, latency: float) -> None:
        with self._lock:
            self.n_calls += 1
            if kind == "chat":
                self.n_chat += 1
            else:
                self.n_embed += 1
            self.thinking_time += latency

    def snapshot(self) -> tuple[int, int, int, float]:
        with self._lock:
            return (self.n_calls, self.n_chat, self.n_embed, self.thinking_time)


class Transcript:
    """Append-only JSONL store of (digest, request, response, latency_s) records."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._records: dict[str, dict] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            for line in self.path.read_text().splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                self._records[rec["digest"]] = rec

    def __len__(self) -> int:
        return len(self._records)

    def lookup(self, digest: str) -> dict | None:
        return self._records.get(digest)

    def append(self, digest: str, request: dict, response: str, latency_s: float) -> bool:
        """Store a record unless the digest is already present. Returns True if added."""
        with self._lock:
            if digest in self._records:
                return False
            rec = {
                "digest": digest,
                "request": request,
                "response": response,
                "latency_s": latency_s,
            }
            self._records[digest] = rec
            if self.path:
                with open(self.path, "a") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
            return True


@dataclass
class OracleConfig:
    mode: str = "replay"  # "live" | "record" | "replay"
    base_url: str = "http://localhost:8080/v1"
    api_key: str = ""
    model: str = "gpt-4.1"
    embed_model: str = "stub"  # "stub" selects the local embedder
    temperature: float = 0.0
    max_tokens: int = 2048
    parallelism: int = 4
    retries: int = 3
    backoff_s: float = 0.5
    timeout_s: float = 120.0

    @staticmethod
    def from_env(**overrides) -> "OracleConfig":
        cfg = OracleConfig(
            mode=os.environ.get("ORACLE_MODE", "replay"),
            base_url=os.environ.get("ORACLE_BASE_URL", "http://localhost:8080/v1"),
            api_key=os.environ.get("ORACLE_API_KEY", ""),
            model=os.environ.get("ORACLE_MODEL", "gpt-4.1"),
            embed_model=os.environ.get("ORACLE_EMBED_MODEL", "stub"),
        )
        return replace(cfg, **overrides) if overrides else cfg


# A transport takes (url, payload, headers, timeout) and returns the response
# text body plus an optional latency override used when recording.
Transport = Callable[[str, dict, dict, float], tuple[str, float | None]]


def http_transport(url: str, payload: dict, headers: dict, timeout: float):
    import requests

    resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
    if resp.status_code != 200:
        raise ProviderError(resp.status_code, resp.text)
    return resp.text, None


@dataclass(frozen=True)
class CallRecord:
    kind: str  # "chat" | "embed"
    digest: str
    mode: str
    latency_s: float


class OracleClient:
    """Thread-safe chat/embedding gateway with bounded request parallelism."""

    def __init__(
        self,
        config: OracleConfig | None = None,
        transcript: Transcript | None = None,
        transport: Transport | None = None,
    ):
        self.config = config or OracleConfig.from_env()
        if self.config.mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown oracle mode {self.config.mode!r}")
        if self.config.mode in ("record", "replay") and transcript is None:
            raise ValueError(f"{self.config.mode} mode requires a transcript")
        self.transcript = transcript
        self.transport = transport or http_transport
        self.counters = UsageCounters()
        self.calls: list[CallRecord] = []
        self._sem = threading.Semaphore(max(1, self.config.parallelism))
        self._calls_lock = threading.Lock()

    # -- internals ---------------------------------------------------------

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        return headers

    def _post_with_retry(self, url: str, payload: dict) -> tuple[str, float]:
        last: Exception | None = None
        for attempt in range(self.config.retries):
            try:
                with self._sem:
                    t0 = time.monotonic()
                    body, latency = self.transport(
                        url, payload, self._headers(), self.config.timeout_s
                    )
                    measured = time.monotonic() - t0
                return body, latency if latency is not None else measured
            except ProviderError as exc:
                if 400 <= exc.status < 500:
                    raise
                last = exc
            except OracleFailure as exc:
                last = exc
            except Exception as exc:  # connection errors from the transport
                last = exc
            if attempt + 1 < self.config.retries:
                time.sleep(self.config.backoff_s * (2**attempt))
        raise NetworkError(f"request failed after {self.config.retries} attempts: {last}")

    def _log(self, kind: str, digest: str, latency: float) -> None:
        self.counters.add(kind, latency)
        with self._calls_lock:
            self.calls.append(CallRecord(kind, digest, self.config.mode, latency))

    def _roundtrip(self, kind: str, endpoint: str, payload: dict) -> str:
        digest = request_digest(payload)
        mode = self.config.mode
        if mode == "replay":
            rec = self.transcript.lookup(digest)
            if rec is None:
                raise ReplayMiss(digest)
            self._log(kind, digest, rec.get("latency_s", 0.0))
            return rec["response"]
        if mode == "record":
            # Serve already-recorded digests from the transcript so a record
            # run and its later replay observe identical responses.
            rec = self.transcript.lookup(digest)
            if rec is not None:
                self._log(kind, digest, rec.get("latency_s", 0.0))
                return rec["response"]
        url = self.config.base_url.rstrip("/") + endpoint
        body, latency = self._post_with_retry(url, payload)
        if mode == "record":
            self.transcript.append(digest, payload, body, latency)
        self._log(kind, digest, latency)
        return body

    # -- public API --------------------------------------------------------

    def chat(self, req: ChatRequest) -> str:
        """Send a chat request; returns the assistant message text."""
        body = self._roundtrip("chat", "/chat/completions", req.payload())
        doc = json.loads(body)
        return doc["choices"][0]["message"]["content"]

    def chat_text(
        self, prompt: str, system: str | None = None, images: list[str] | None = None
    ) -> str:
        messages = []
        if system:
            messages.append(text_message("system", system))
        messages.append(text_message("user", prompt, images))
        req = ChatRequest(
            model=self.config.model,
            messages=tuple(messages),
            temperature=self.config.temperature,
            max_tokens=self.config.max_tokens,
        )
        return self.chat(req)

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        """Embed texts into unit vectors (stub or hosted model per config)."""
        if not texts:
            raise ValueError("embed requires at least one text")
        if self.config.embed_model == "stub":
            t0 = time.monotonic()
            vecs = [stub_embed(t) for t in texts]
            payload = {"kind": "stub-embeddings", "input": list(texts)}
            self._log("embed", request_digest(payload), time.monotonic() - t0)
            return vecs
        payload = {"model": self.config.embed_model, "input": list(texts)}
        body = self._roundtrip("embed", "/embeddings", payload)
        doc = json.loads(body)
        out = []
        for item in doc["data"]:
            vec = np.asarray(item["embedding"], dtype=np.float64)
            norm = float(np.linalg.norm(vec))
            out.append(vec / norm if norm > 0 else vec)
        return out


STUB_DIM = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def trigrams(text: str) -> list[str]:
    """Character trigrams per whitespace token, padded with ^^/$$."""
    grams: list[str] = []
    for token in text.split():
        padded = f"^^{token}$$"
        grams.extend(padded[i : i + 3] for i in range(len(padded) - 2))
    return grams


def stub_embed(text: str) -> np.ndarray:
    """Deterministic 256-dim unit vector from hashed trigram counts.

    The empty string maps to the zero-information vector with all-equal
    components (still unit length).
    """
    grams = trigrams(text)
    if not grams:
        return np.full(STUB_DIM, 1.0 / np.sqrt(STUB_DIM))
    counts = np.zeros(STUB_DIM, dtype=np.float64)
    for g in grams:
        counts[fnv1a64(g.encode("utf-8")) % STUB_DIM] += 1.0
    return counts / np.linalg.norm(counts)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b))
