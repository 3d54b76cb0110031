import hashlib
import threading

import numpy as np
import pytest
import requests

from seafarer.mockserver import MockSearchServer, serve_mock
from seafarer.search import (
    BudgetExceeded,
    BudgetMeter,
    CorpusSearchSource,
    HTTPStatusError,
    MalformedResponse,
    RemoteSearchSource,
    SearchTimeout,
    corpus_search,
    remote_search,
)


class TestCorpusSearch:
    def test_returns_all_when_fewer_than_limit(self, tiny_corpus):
        hits = corpus_search(tiny_corpus, "a", limit=10, seed_token=1)
        assert sorted(it.id for it in hits) == ["i1", "i2"]

    def test_unknown_tag_is_empty(self, tiny_corpus):
        assert corpus_search(tiny_corpus, "nope", limit=5, seed_token=0) == []

    def test_results_carry_queried_tag(self, small_corpus):
        for tag in small_corpus.tag_vocab:
            for it in corpus_search(small_corpus, tag, limit=5, seed_token=3):
                assert tag in it.tags

    def test_deterministic_sampling(self, small_corpus):
        a = corpus_search(small_corpus, "a", limit=4, seed_token=99)
        b = corpus_search(small_corpus, "a", limit=4, seed_token=99)
        assert [it.id for it in a] == [it.id for it in b]
        assert len(a) == 4

    def test_different_tokens_vary(self, small_corpus):
        picks = {
            tuple(it.id for it in corpus_search(small_corpus, "a", 4, token))
            for token in range(20)
        }
        assert len(picks) > 1

    def test_sample_without_replacement(self, small_corpus):
        hits = corpus_search(small_corpus, "a", limit=10, seed_token=5)
        ids = [it.id for it in hits]
        assert len(ids) == len(set(ids))

    def test_full_limit_returns_posting_set(self, small_corpus):
        postings = small_corpus.tag_index["b"]
        hits = corpus_search(small_corpus, "b", limit=len(postings), seed_token=0)
        assert {it.id for it in hits} == set(postings)

    def test_invalid_limit(self, tiny_corpus):
        with pytest.raises(ValueError):
            corpus_search(tiny_corpus, "a", limit=0, seed_token=0)


class TestBudgetMeter:
    def test_counts_and_caps(self):
        meter = BudgetMeter(query_cap=3)
        for _ in range(3):
            meter.charge()
        assert meter.queries_used == 3
        with pytest.raises(BudgetExceeded):
            meter.charge()
        assert meter.queries_used == 3  # cap never exceeded

    def test_uncapped(self):
        meter = BudgetMeter()
        for _ in range(100):
            meter.charge()
        assert meter.queries_used == 100

    def test_thread_safe_counting(self):
        meter = BudgetMeter()

        def worker():
            for _ in range(200):
                meter.charge()

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert meter.queries_used == 1600


@pytest.fixture
def mock_server(small_corpus):
    with MockSearchServer(small_corpus) as server:
        yield server


class TestMockServer:
    def test_vocab_endpoint(self, mock_server, small_corpus):
        resp = requests.get(f"{mock_server.url}/api/vocab", timeout=5)
        assert resp.status_code == 200
        assert resp.json() == {"tags": small_corpus.tag_vocab}

    def test_unknown_tag_is_empty_200(self, mock_server):
        resp = requests.get(
            f"{mock_server.url}/api/search", params={"tag": "zzz", "limit": 5, "token": 0},
            timeout=5,
        )
        assert resp.status_code == 200
        assert resp.json() == {"items": []}

    def test_malformed_query_is_400(self, mock_server):
        for params in [{}, {"tag": "a"}, {"tag": "a", "limit": "x", "token": 0},
                       {"tag": "a", "limit": 0, "token": 0}]:
            resp = requests.get(f"{mock_server.url}/api/search", params=params, timeout=5)
            assert resp.status_code == 400

    def test_start_query_stop_clean(self, small_corpus):
        server = serve_mock(small_corpus)
        try:
            resp = requests.get(f"{server.url}/api/vocab", timeout=5)
            assert resp.status_code == 200
        finally:
            server.stop()

    def test_concurrent_queries_are_consistent(self, mock_server, small_corpus):
        """Hammer different tags concurrently; each response must checksum
        to the same value as a fresh sequential query."""
        def checksum(tag):
            resp = requests.get(
                f"{mock_server.url}/api/search",
                params={"tag": tag, "limit": 8, "token": 42},
                timeout=5,
            )
            return hashlib.sha256(resp.content).hexdigest()

        expected = {tag: checksum(tag) for tag in small_corpus.tag_vocab}
        results = {}
        errors = []

        def worker(tag):
            try:
                for _ in range(10):
                    results.setdefault(tag, set()).add(checksum(tag))
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(t,)) for t in small_corpus.tag_vocab]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        for tag in small_corpus.tag_vocab:
            assert results[tag] == {expected[tag]}


class TestRemoteSearch:
    def test_matches_corpus_search(self, mock_server, small_corpus):
        local = corpus_search(small_corpus, "a", limit=5, seed_token=7)
        remote = remote_search(mock_server.url, "a", limit=5, seed_token=7)
        assert [it.id for it in remote] == [it.id for it in local]
        for lit, rit in zip(local, remote):
            assert np.array_equal(lit.features, rit.features)
            assert lit.tags == rit.tags

    def test_equivalent_for_all_tags_and_limits(self, mock_server, small_corpus):
        source = RemoteSearchSource(mock_server.url)
        assert source.vocabulary() == small_corpus.tag_vocab
        for tag in small_corpus.tag_vocab:
            n_postings = len(small_corpus.tag_index[tag])
            for limit in {1, 5, n_postings}:
                local = corpus_search(small_corpus, tag, limit, seed_token=13)
                remote = source.search(tag, limit, seed_token=13)
                assert [it.id for it in remote] == [it.id for it in local]

    def test_http_500_raises_retryable_status_error(self):
        from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

        class Failing(BaseHTTPRequestHandler):
            def do_GET(self):
                self.send_response(500)
                self.send_header("Content-Length", "0")
                self.end_headers()

            def log_message(self, *args):
                pass

        httpd = ThreadingHTTPServer(("127.0.0.1", 0), Failing)
        thread = threading.Thread(target=httpd.serve_forever, daemon=True)
        thread.start()
        try:
            url = f"http://127.0.0.1:{httpd.server_address[1]}"
            with pytest.raises(HTTPStatusError) as info:
                remote_search(url, "a", limit=1)
            assert info.value.status == 500
            assert info.value.retryable
        finally:
            httpd.shutdown()
            httpd.server_close()

    def test_http_404_is_not_retryable(self, mock_server):
        with pytest.raises(HTTPStatusError) as info:
            remote_search(mock_server.url + "/bogus", "a", limit=1)
        assert info.value.status == 404
        assert not info.value.retryable

    def test_budget_cap_blocks_before_network(self, mock_server):
        meter = BudgetMeter(query_cap=2)
        source = RemoteSearchSource(mock_server.url, meter=meter)
        source.search("a", 3, 0)
        source.search("a", 3, 1)
        with pytest.raises(BudgetExceeded):
            source.search("a", 3, 2)
        assert meter.queries_used == 2

    def test_meter_counts_every_search(self, mock_server):
        meter = BudgetMeter()
        source = RemoteSearchSource(mock_server.url, meter=meter)
        for token in range(5):
            source.search("a", 2, token)
        source.vocabulary()  # not charged
        assert meter.queries_used == 5

    def test_latency_beyond_timeout_raises(self, small_corpus):
        with MockSearchServer(small_corpus, latency=1.0) as server:
            with pytest.raises(SearchTimeout) as info:
                remote_search(server.url, "a", limit=1, timeout=0.2)
            assert info.value.retryable

    def test_malformed_body_raises(self, monkeypatch, mock_server):
        class FakeResponse:
            status_code = 200
            text = "not json"

            def json(self):
                raise ValueError("no json")

        monkeypatch.setattr(requests, "get", lambda *a, **k: FakeResponse())
        with pytest.raises(MalformedResponse):
            remote_search("http://x", "a", limit=1)
