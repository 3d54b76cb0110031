import json

import numpy as np
import pytest

from seafarer.corpus import (
    Corpus,
    CorpusError,
    Item,
    TagEmbeddings,
    load_corpus,
    load_embeddings,
    save_corpus,
    save_embeddings,
    synth_corpus,
)


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestItem:
    def test_rejects_empty_id(self):
        with pytest.raises(CorpusError):
            Item(id="", features=np.array([1.0]), tags=frozenset())

    def test_rejects_non_finite_features(self):
        with pytest.raises(CorpusError):
            Item(id="x", features=np.array([1.0, np.nan]), tags=frozenset())

    def test_features_are_read_only(self):
        item = Item(id="x", features=np.array([1.0, 2.0]), tags=frozenset())
        with pytest.raises(ValueError):
            item.features[0] = 5.0


class TestCorpus:
    def test_tag_index_inverts_tag_sets(self, tiny_corpus):
        assert tiny_corpus.tag_index == {"a": ["i1", "i2"], "b": ["i2"]}
        assert tiny_corpus.tag_vocab == ["a", "b"]

    def test_tag_index_bidirectional(self, small_corpus):
        for tag, ids in small_corpus.tag_index.items():
            for item_id in ids:
                assert tag in small_corpus.get(item_id).tags
        for item in small_corpus:
            for tag in item.tags:
                assert item.id in small_corpus.tag_index[tag]

    def test_rejects_single_item(self):
        with pytest.raises(CorpusError, match="at least 2"):
            Corpus([Item(id="only", features=np.array([1.0]), tags=frozenset())])

    def test_rejects_duplicate_ids(self):
        items = [
            Item(id="dup", features=np.array([1.0]), tags=frozenset()),
            Item(id="dup", features=np.array([2.0]), tags=frozenset()),
        ]
        with pytest.raises(CorpusError, match="duplicate"):
            Corpus(items)

    def test_rejects_dimension_mismatch(self):
        items = [
            Item(id="a", features=np.zeros(4), tags=frozenset()),
            Item(id="b", features=np.zeros(5), tags=frozenset()),
        ]
        with pytest.raises(CorpusError, match="'b'"):
            Corpus(items)


class TestLoadCorpus:
    def test_loads_and_indexes(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_lines(
            path,
            [
                json.dumps({"id": "i1", "features": [1, 0], "tags": ["a"]}),
                json.dumps({"id": "i2", "features": [0, 1], "tags": ["a", "b"]}),
                json.dumps({"id": "i3", "features": [1, 1], "tags": []}),
            ],
        )
        corpus = load_corpus(str(path))
        assert corpus.tag_index == {"a": ["i1", "i2"], "b": ["i2"]}
        assert corpus.ids() == ["i1", "i2", "i3"]  # file order preserved

    def test_empty_file_errors(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(CorpusError):
            load_corpus(str(path))

    def test_dimension_mismatch_names_item(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_lines(
            path,
            [
                json.dumps({"id": "ok", "features": [0, 0, 0, 0], "tags": []}),
                json.dumps({"id": "bad", "features": [0, 0, 0, 0, 0], "tags": []}),
            ],
        )
        with pytest.raises(CorpusError, match="'bad'"):
            load_corpus(str(path))

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_lines(
            path,
            [json.dumps({"id": "i1", "features": [0.0], "tags": []}), "{not json"],
        )
        with pytest.raises(CorpusError, match=":2:"):
            load_corpus(str(path))

    def test_header_enforces_dimension(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_lines(
            path,
            [
                json.dumps({"meta": {"d": 3}}),
                json.dumps({"id": "i1", "features": [0, 0], "tags": []}),
                json.dumps({"id": "i2", "features": [0, 0], "tags": []}),
            ],
        )
        with pytest.raises(CorpusError, match="'i1'"):
            load_corpus(str(path))

    def test_round_trip_bit_exact(self, tmp_path, small_corpus):
        path = tmp_path / "rt.jsonl"
        save_corpus(small_corpus, str(path))
        loaded = load_corpus(str(path))
        assert loaded.ids() == small_corpus.ids()
        assert loaded.d == small_corpus.d
        for item_id in small_corpus.ids():
            a, b = small_corpus.get(item_id), loaded.get(item_id)
            assert a.tags == b.tags
            assert a.url == b.url
            assert np.array_equal(a.features, b.features)
        assert loaded.tag_index == small_corpus.tag_index


class TestLoadEmbeddings:
    def test_basic_table(self, tmp_path):
        path = tmp_path / "emb.txt"
        write_lines(path, ["cat 1 0", "dog 0 1"])
        emb = load_embeddings(str(path))
        assert emb.k == 2
        assert len(emb.table) == 2
        assert np.array_equal(emb.vector("cat"), [1.0, 0.0])

    def test_zero_vector_policy(self, tmp_path):
        path = tmp_path / "emb.txt"
        write_lines(path, ["cat 1 0"])
        emb = load_embeddings(str(path), "zero_vector")
        assert np.array_equal(emb.vector("bird"), [0.0, 0.0])

    def test_hash_gaussian_deterministic_and_unit(self, tmp_path):
        path = tmp_path / "emb.txt"
        write_lines(path, ["cat 1 0"])
        emb = load_embeddings(str(path), "seeded_hash_gaussian")
        v1, v2 = emb.vector("bird"), emb.vector("bird")
        assert np.array_equal(v1, v2)
        assert np.linalg.norm(v1) == pytest.approx(1.0)
        assert not np.array_equal(v1, emb.vector("fish"))

    def test_inconsistent_k_errors(self, tmp_path):
        path = tmp_path / "emb.txt"
        write_lines(path, ["cat 1 0", "dog 0 1 2"])
        with pytest.raises(CorpusError, match="inconsistent"):
            load_embeddings(str(path))

    def test_non_numeric_token_errors(self, tmp_path):
        path = tmp_path / "emb.txt"
        write_lines(path, ["cat 1 zero"])
        with pytest.raises(CorpusError, match="non-numeric"):
            load_embeddings(str(path))

    def test_save_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        emb = TagEmbeddings(k=4, table={f"t{i}": rng.normal(size=4) for i in range(5)})
        path = tmp_path / "rt.txt"
        save_embeddings(emb, str(path))
        loaded = load_embeddings(str(path))
        assert loaded.k == 4
        for tag, vec in emb.table.items():
            assert np.array_equal(loaded.table[tag], vec)


class TestSynthCorpus:
    def test_deterministic(self):
        a_corpus, a_emb = synth_corpus(300, 10, 8, 4, seed=7, cluster_spread=0.1)
        b_corpus, b_emb = synth_corpus(300, 10, 8, 4, seed=7, cluster_spread=0.1)
        assert a_corpus.ids() == b_corpus.ids()
        for item_id in a_corpus.ids():
            assert np.array_equal(
                a_corpus.get(item_id).features, b_corpus.get(item_id).features
            )
            assert a_corpus.get(item_id).tags == b_corpus.get(item_id).tags
        for tag in a_emb.table:
            assert np.array_equal(a_emb.table[tag], b_emb.table[tag])

    def test_different_seed_differs(self):
        a_corpus, _ = synth_corpus(100, 5, 8, 4, seed=1, cluster_spread=0.1)
        b_corpus, _ = synth_corpus(100, 5, 8, 4, seed=2, cluster_spread=0.1)
        assert any(
            not np.array_equal(a_corpus.get(i).features, b_corpus.get(i).features)
            for i in a_corpus.ids()
        )

    def test_every_tag_has_items(self):
        corpus, _ = synth_corpus(1000, 20, 16, 8, seed=7, cluster_spread=0.1)
        assert len(corpus.tag_vocab) == 20
        for tag in corpus.tag_vocab:
            assert len(corpus.tag_index[tag]) >= 1

    def test_rejects_single_item(self):
        with pytest.raises(CorpusError):
            synth_corpus(1, 5, 8, 4, seed=0, cluster_spread=0.1)

    def test_items_carry_one_to_three_tags(self):
        corpus, _ = synth_corpus(500, 12, 8, 4, seed=3, cluster_spread=0.2)
        for item in corpus:
            assert 1 <= len(item.tags) <= 3

    def test_output_passes_validation_and_roundtrip(self, tmp_path):
        corpus, emb = synth_corpus(100, 8, 6, 4, seed=9, cluster_spread=0.3)
        path = tmp_path / "synth.jsonl"
        save_corpus(corpus, str(path))
        loaded = load_corpus(str(path))
        assert loaded.ids() == corpus.ids()
        assert emb.k == 4
        for tag in corpus.tag_vocab:
            assert np.linalg.norm(emb.vector(tag)) == pytest.approx(1.0)
