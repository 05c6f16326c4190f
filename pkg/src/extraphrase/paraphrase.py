"""Paraphrasing by round-trip translation through pluggable backends.

A backend is any object with a stable ``identifier`` string and a
``translate(texts) -> list`` method returning one output per input, in
order. Backends must be deterministic (greedy or beam decoding, never
sampling) so that corpus builds are reproducible; a backend may advertise
``deterministic = False`` and will then be refused by :func:`round_trip`.
"""

import hashlib
import json
import logging
import os
import random
import socket
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

logger = logging.getLogger(__name__)


class BackendUnavailable(RuntimeError):
    def __init__(self, message, identifier=None, batch_range=None):
        self.identifier = identifier
        self.batch_range = batch_range
        super().__init__(message)


class LengthMismatch(RuntimeError):
    def __init__(self, identifier, expected, got):
        self.identifier = identifier
        super().__init__(f"backend {identifier!r} returned {got} outputs for {expected} inputs")


class TranslationBackend(Protocol):
    identifier: str

    def translate(self, texts: Sequence[str]) -> List[str]: ...


def call_backend(backend: TranslationBackend, texts: Sequence[str]) -> List[str]:
    out = list(backend.translate(list(texts)))
    if len(out) != len(texts):
        raise LengthMismatch(backend.identifier, len(texts), len(out))
    return out


class IdentityBackend:
    def __init__(self, identifier="identity"):
        self.identifier = identifier

    def translate(self, texts):
        return list(texts)


class DictionaryBackend:
    """Word-for-word substitution from a lookup table; unknown words pass
    through. Useful as a stand-in translator for tests and dry runs."""

    def __init__(self, table: Dict[str, str], identifier: Optional[str] = None):
        self.table = dict(table)
        if identifier is None:
            digest = hashlib.sha256(json.dumps(self.table, sort_keys=True).encode()).hexdigest()
            identifier = f"dict:{digest[:12]}"
        self.identifier = identifier

    def translate(self, texts):
        return [" ".join(self.table.get(w, w) for w in t.split()) for t in texts]


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    base_delay: float = 0.5
    max_delay: float = 8.0

    def __post_init__(self):
        if self.attempts < 1:
            raise ValueError("attempts must be >= 1")

    def delay(self, attempt: int) -> float:
        """Backoff before retry number ``attempt`` (1-based), with jitter."""
        d = min(self.max_delay, self.base_delay * 2 ** (attempt - 1))
        return d * (0.5 + random.random() / 2)


class HttpBackend:
    """Client for a translation service speaking
    ``POST {"model": ..., "texts": [...]}`` -> ``{"translations": [...]}``."""

    def __init__(self, endpoint: str, model_id: str, timeout: float = 60.0,
                 retry_policy: Optional[RetryPolicy] = None):
        self.endpoint = endpoint
        self.model_id = model_id
        self.timeout = timeout
        self.retry_policy = retry_policy or RetryPolicy()
        self.identifier = f"http:{endpoint}#{model_id}"

    def _post(self, texts):
        body = json.dumps({"model": self.model_id, "texts": list(texts)},
                          ensure_ascii=False).encode("utf-8")
        req = urllib.request.Request(self.endpoint, data=body, method="POST",
                                     headers={"Content-Type": "application/json; charset=utf-8"})
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
        out = payload.get("translations") if isinstance(payload, dict) else None
        if not isinstance(out, list) or not all(isinstance(t, str) for t in out):
            raise ValueError("response lacks a 'translations' list of strings")
        return out

    def translate(self, texts):
        if not texts:
            return []
        policy = self.retry_policy
        last = None
        for attempt in range(1, policy.attempts + 1):
            try:
                return self._post(texts)
            except (urllib.error.URLError, socket.timeout, TimeoutError, ConnectionError,
                    ValueError) as exc:
                # HTTPError is a URLError subclass; JSONDecodeError a ValueError
                last = exc
                logger.warning("%s: attempt %d/%d failed: %s", self.identifier, attempt,
                               policy.attempts, exc)
                if attempt < policy.attempts:
                    time.sleep(policy.delay(attempt))
        raise BackendUnavailable(f"{self.identifier}: giving up after {policy.attempts} attempts: {last}",
                                 identifier=self.identifier)


def http_backend(endpoint: str, model_id: str, timeout: float = 60.0,
                 retry_policy: Optional[RetryPolicy] = None) -> HttpBackend:
    return HttpBackend(endpoint, model_id, timeout=timeout, retry_policy=retry_policy)


class CacheStore:
    """Append-only translation cache in a single JSONL file.

    Each line is ``{"backend": identifier, "source": text, "translation": text}``.
    Later lines win. Unreadable lines are logged and ignored, so a torn final
    write only costs a cache miss.
    """

    def __init__(self, path):
        self.path = os.fspath(path)
        self._lock = threading.Lock()
        self._data: Dict[Tuple[str, str], str] = {}
        self.corrupt_lines = 0
        if os.path.exists(self.path):
            self._load()
        self._fh = open(self.path, "a", encoding="utf-8")

    def _load(self):
        with open(self.path, encoding="utf-8", errors="replace") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    key = (rec["backend"], rec["source"])
                    value = rec["translation"]
                    if not all(isinstance(x, str) for x in (*key, value)):
                        raise TypeError("non-string field")
                except (ValueError, KeyError, TypeError) as exc:
                    self.corrupt_lines += 1
                    logger.warning("%s:%d: ignoring corrupt cache entry (%s)", self.path, lineno, exc)
                    continue
                self._data[key] = value

    def get(self, identifier: str, text: str) -> Optional[str]:
        with self._lock:
            return self._data.get((identifier, text))

    def put(self, identifier: str, text: str, translation: str):
        line = json.dumps({"backend": identifier, "source": text, "translation": translation},
                          ensure_ascii=False)
        with self._lock:
            if self._data.get((identifier, text)) == translation:
                return
            self._data[(identifier, text)] = translation
            self._fh.write(line + "\n")
            self._fh.flush()

    def __len__(self):
        with self._lock:
            return len(self._data)

    def close(self):
        with self._lock:
            if not self._fh.closed:
                self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class CachedBackend:
    def __init__(self, backend: TranslationBackend, store: CacheStore):
        self.inner = backend
        self.store = store
        self.identifier = backend.identifier
        self.deterministic = getattr(backend, "deterministic", True)

    def translate(self, texts):
        out: List[Optional[str]] = [self.store.get(self.identifier, t) for t in texts]
        misses = list(dict.fromkeys(t for t, o in zip(texts, out) if o is None))
        if misses:
            fresh = dict(zip(misses, call_backend(self.inner, misses)))
            for text in misses:
                self.store.put(self.identifier, text, fresh[text])
            out = [fresh[t] if o is None else o for t, o in zip(texts, out)]
        return out


def with_cache(backend: TranslationBackend, store: CacheStore) -> CachedBackend:
    return CachedBackend(backend, store)


@dataclass
class RoundTripConfig:
    forward: TranslationBackend
    backward: TranslationBackend
    batch_size: int = 32
    cache_path: Optional[str] = None
    max_in_flight: int = 4

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")

    @property
    def identifiers(self) -> Dict[str, str]:
        return {"forward": self.forward.identifier, "backward": self.backward.identifier}


def round_trip(texts: Sequence[str], config: RoundTripConfig) -> List[str]:
    """Translate every text to the pivot language and back.

    Each text is one translation unit; texts are never joined. Batches may
    run concurrently but results are returned in input order.
    """
    texts = list(texts)
    for i, t in enumerate(texts):
        if not t.strip():
            raise ValueError(f"text {i} is empty")
    for backend in (config.forward, config.backward):
        if not getattr(backend, "deterministic", True):
            raise ValueError(f"backend {backend.identifier!r} is not deterministic")
    if not texts:
        return []

    store = CacheStore(config.cache_path) if config.cache_path else None
    forward, backward = config.forward, config.backward
    if store is not None:
        forward, backward = with_cache(forward, store), with_cache(backward, store)

    def run(start):
        batch = texts[start:start + config.batch_size]
        try:
            return call_backend(backward, call_backend(forward, batch))
        except BackendUnavailable as exc:
            raise BackendUnavailable(f"batch [{start}, {start + len(batch)}): {exc}",
                                     identifier=exc.identifier,
                                     batch_range=(start, start + len(batch))) from exc

    starts = range(0, len(texts), config.batch_size)
    try:
        if config.max_in_flight == 1 or len(starts) == 1:
            results = [run(s) for s in starts]
        else:
            with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
                results = list(pool.map(run, starts))
    finally:
        if store is not None:
            store.close()
    return [t for batch in results for t in batch]
