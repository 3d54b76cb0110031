"""The tag-search boundary.

``SearchSource`` is the behavioral contract the retrieval strategies talk
to: ``search(tag, limit, seed_token)`` and ``vocabulary()``.  Two
implementations live here — the in-memory corpus-backed engine and a
remote client speaking the JSON-over-HTTP protocol — plus the budget
meter that accounts for every attempted remote query.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from typing import Sequence
from urllib.parse import urlencode

import numpy as np
import requests

from seafarer.corpus import Corpus, CorpusError, Item


class SearchError(Exception):
    """Base class for search-boundary failures; carries a retryability flag."""

    retryable = False


class SearchTimeout(SearchError):
    retryable = True


class TransportError(SearchError):
    retryable = True


class MalformedResponse(SearchError):
    retryable = False


class HTTPStatusError(SearchError):
    def __init__(self, status: int, message: str = ""):
        super().__init__(f"HTTP {status}{': ' + message if message else ''}")
        self.status = status
        self.retryable = status >= 500


class BudgetExceeded(SearchError):
    retryable = False


class BudgetMeter:
    """Thread-safe counter of attempted search queries with an optional cap."""

    def __init__(self, query_cap: int | None = None):
        if query_cap is not None and query_cap < 0:
            raise ValueError(f"query_cap must be >= 0, got {query_cap}")
        self.query_cap = query_cap
        self._used = 0
        self._lock = threading.Lock()

    @property
    def queries_used(self) -> int:
        with self._lock:
            return self._used

    def charge(self) -> None:
        """Count one attempted query; raises before the cap is breached."""
        with self._lock:
            if self.query_cap is not None and self._used >= self.query_cap:
                raise BudgetExceeded(
                    f"query cap {self.query_cap} reached ({self._used} queries used)"
                )
            self._used += 1


class SearchSource(ABC):
    """Tag-search contract: bounded, deterministic item retrieval by tag."""

    @abstractmethod
    def search(self, tag: str, limit: int, seed_token: int) -> list[Item]:
        ...

    @abstractmethod
    def vocabulary(self) -> list[str]:
        ...


def corpus_search(corpus: Corpus, tag: str, limit: int, seed_token: int) -> list[Item]:
    """Deterministic seeded sample (without replacement) of items tagged ``tag``.

    Unknown tags yield an empty list, mirroring how real search APIs return
    empty pages rather than errors.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    if seed_token < 0:
        raise ValueError(f"seed_token must be >= 0, got {seed_token}")
    postings = corpus.tag_index.get(tag, [])
    if len(postings) <= limit:
        return [corpus.get(i) for i in postings]
    rng = np.random.default_rng(seed_token)
    idx = rng.choice(len(postings), size=limit, replace=False)
    return [corpus.get(postings[i]) for i in idx]


class CorpusSearchSource(SearchSource):
    """In-memory search engine over a corpus; immutable, so reads are thread-safe."""

    def __init__(self, corpus: Corpus):
        self.corpus = corpus

    def search(self, tag: str, limit: int, seed_token: int) -> list[Item]:
        return corpus_search(self.corpus, tag, limit, seed_token)

    def vocabulary(self) -> list[str]:
        return list(self.corpus.tag_vocab)


def _parse_items(payload, context: str) -> list[Item]:
    if not isinstance(payload, dict) or not isinstance(payload.get("items"), list):
        raise MalformedResponse(f"{context}: body must be an object with an 'items' list")
    items = []
    dims = set()
    for obj in payload["items"]:
        try:
            item = Item.from_dict(obj)
        except CorpusError as exc:
            raise MalformedResponse(f"{context}: {exc}") from exc
        dims.add(item.features.shape[0])
        items.append(item)
    if len(dims) > 1:
        raise MalformedResponse(f"{context}: inconsistent feature dimensions {sorted(dims)}")
    return items


def remote_search(
    endpoint: str,
    tag: str,
    limit: int,
    timeout: float = 5.0,
    seed_token: int = 0,
    meter: BudgetMeter | None = None,
    session: requests.Session | None = None,
) -> list[Item]:
    """One search-protocol request; no automatic retries (the caller decides).

    The budget meter is charged before any network activity so a cap can
    never be overrun by an in-flight request.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    if meter is not None:
        meter.charge()
    query = urlencode({"tag": tag, "limit": limit, "token": seed_token})
    url = f"{endpoint.rstrip('/')}/api/search?{query}"
    http = session or requests
    try:
        resp = http.get(url, timeout=timeout)
    except requests.Timeout as exc:
        raise SearchTimeout(f"search for {tag!r} timed out after {timeout}s") from exc
    except requests.RequestException as exc:
        raise TransportError(f"search for {tag!r} failed: {exc}") from exc
    if resp.status_code >= 400:
        raise HTTPStatusError(resp.status_code, resp.text[:200])
    try:
        payload = resp.json()
    except ValueError as exc:
        raise MalformedResponse(f"search for {tag!r}: body is not JSON") from exc
    return _parse_items(payload, f"search for {tag!r}")


class RemoteSearchSource(SearchSource):
    """Client for a remote search service speaking the JSON protocol.

    Only ``search`` calls are charged to the meter; vocabulary lookups are
    free, matching how per-loop query budgets are accounted.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 5.0,
        meter: BudgetMeter | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.meter = meter if meter is not None else BudgetMeter()
        self._session = requests.Session()

    def search(self, tag: str, limit: int, seed_token: int) -> list[Item]:
        return remote_search(
            self.endpoint,
            tag,
            limit,
            timeout=self.timeout,
            seed_token=seed_token,
            meter=self.meter,
            session=self._session,
        )

    def vocabulary(self) -> list[str]:
        url = f"{self.endpoint}/api/vocab"
        try:
            resp = self._session.get(url, timeout=self.timeout)
        except requests.Timeout as exc:
            raise SearchTimeout(f"vocabulary fetch timed out after {self.timeout}s") from exc
        except requests.RequestException as exc:
            raise TransportError(f"vocabulary fetch failed: {exc}") from exc
        if resp.status_code >= 400:
            raise HTTPStatusError(resp.status_code, resp.text[:200])
        try:
            payload = resp.json()
        except ValueError as exc:
            raise MalformedResponse("vocabulary body is not JSON") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("tags"), list):
            raise MalformedResponse("vocabulary body must be an object with a 'tags' list")
        return [str(t) for t in payload["tags"]]

    def close(self) -> None:
        self._session.close()
