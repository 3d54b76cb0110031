import threading
import time

import numpy as np
import pytest

from seafarer.acquisition import AcquisitionConfig
from seafarer.classifier import TrainConfig
from seafarer.corpus import Corpus, Item, synth_corpus
from seafarer.engine import (
    EngineError,
    HumanOracle,
    LabeledSet,
    OracleAborted,
    RunRecord,
    SimilarityOracle,
    TagOracle,
    TaskError,
    build_task,
    run,
)
from seafarer.retrieval import RetrievalConfig
from seafarer.search import CorpusSearchSource


@pytest.fixture(scope="module")
def env():
    corpus, embeddings = synth_corpus(400, 8, 6, 4, seed=21, cluster_spread=0.6)
    return corpus, embeddings


def run_kwargs(corpus, embeddings, strategy="random", seed=0, budget=5, tag=None):
    tag = tag or corpus.tag_vocab[0]
    oracle, initial, test_set = build_task(corpus, "tag", tag, seed=seed)
    return dict(
        corpus=corpus,
        embeddings=embeddings,
        source=CorpusSearchSource(corpus),
        oracle=oracle,
        initial_labeled=initial,
        test_set=test_set,
        acq_cfg=AcquisitionConfig(),
        retr_cfg=RetrievalConfig(strategy=strategy, linucb_iters=20, seed=seed),
        train_cfg=TrainConfig(epochs=20),
        budget=budget,
        seed=seed,
    )


class TestLabeledSet:
    def test_counts_follow_entries(self):
        ls = LabeledSet([("a", 1), ("b", 0), ("c", 0)])
        assert (ls.n_pos, ls.n_neg) == (1, 2)
        assert len(ls) == 3
        assert "a" in ls

    def test_rejects_duplicates(self):
        ls = LabeledSet([("a", 1)])
        with pytest.raises(ValueError, match="already"):
            ls.add("a", 0)

    def test_rejects_bad_label(self):
        with pytest.raises(ValueError):
            LabeledSet([("a", 2)])

    def test_copy_is_independent(self):
        ls = LabeledSet([("a", 1)])
        clone = ls.copy()
        clone.add("b", 0)
        assert len(ls) == 1


class TestOracles:
    def test_tag_oracle(self):
        oracle = TagOracle(target_tag="cat")
        hit = Item(id="1", features=np.zeros(2), tags=frozenset({"cat", "pet"}))
        miss = Item(id="2", features=np.zeros(2), tags=frozenset({"dog"}))
        assert oracle.label(hit) == 1
        assert oracle.label(miss) == 0

    def test_similarity_oracle_thresholds_max_cosine(self):
        refs = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        oracle = SimilarityOracle(refs, tau=0.9)
        assert oracle.label(Item(id="x", features=np.array([10.0, 0.0]), tags=frozenset())) == 1
        assert oracle.label(Item(id="y", features=np.array([1.0, 1.0]), tags=frozenset())) == 0

    def test_similarity_tau_one_needs_exact_direction(self):
        refs = [np.array([1.0, 1.0])]
        oracle = SimilarityOracle(refs, tau=1.0)
        assert oracle.label(Item(id="x", features=np.array([2.0, 2.0]), tags=frozenset())) == 1
        assert oracle.label(Item(id="y", features=np.array([1.0, 0.99]), tags=frozenset())) == 0

    def test_similarity_reflexive_on_references(self, env):
        corpus, _ = env
        tag = corpus.tag_vocab[1]
        ref_items = [corpus.get(i) for i in corpus.tag_index[tag][:5]]
        oracle = SimilarityOracle([it.features for it in ref_items], tau=0.999999)
        for it in ref_items:
            assert oracle.label(it) == 1

    def test_zero_vector_is_negative(self):
        oracle = SimilarityOracle([np.array([1.0, 0.0])], tau=0.5)
        assert oracle.label(Item(id="z", features=np.array([0.0, 0.0]), tags=frozenset())) == 0


class TestBuildTask:
    def test_initial_pair_and_test_split(self, env):
        corpus, _ = env
        oracle, initial, test_set = build_task(corpus, "tag", corpus.tag_vocab[0], seed=3)
        assert initial.n_pos == 1 and initial.n_neg == 1
        test_ids = {i for i, _ in test_set}
        assert not test_ids & initial.ids()
        labels = [l for _, l in test_set]
        assert 0 < sum(labels) < len(labels)  # stratified: both classes present
        # test labels agree with the oracle
        for item_id, label in test_set:
            assert oracle.label(corpus.get(item_id)) == label

    def test_test_fraction_sizing(self):
        rng = np.random.default_rng(0)
        items = [
            Item(id=f"n{i:04d}", features=rng.normal(size=3),
                 tags=frozenset({"a"} if i < 50 else ()))
            for i in range(1000)
        ]
        corpus = Corpus(items)
        _, _, test_set = build_task(corpus, "tag", "a", seed=1, test_fraction=0.2)
        assert len(test_set) == 200
        assert sum(l for _, l in test_set) == 10  # 20% of the 50 positives

    def test_deterministic(self, env):
        corpus, _ = env
        a = build_task(corpus, "tag", corpus.tag_vocab[2], seed=9)
        b = build_task(corpus, "tag", corpus.tag_vocab[2], seed=9)
        assert a[1].entries == b[1].entries
        assert a[2] == b[2]

    def test_rare_tag_rejected(self):
        items = [
            Item(id="a", features=np.zeros(2), tags=frozenset({"rare"})),
            Item(id="b", features=np.zeros(2), tags=frozenset()),
            Item(id="c", features=np.zeros(2), tags=frozenset()),
        ]
        with pytest.raises(TaskError, match="positives"):
            build_task(Corpus(items), "tag", "rare", seed=0)

    def test_similarity_task(self, env):
        corpus, _ = env
        oracle, initial, test_set = build_task(
            corpus, "similarity", corpus.tag_vocab[0], tau=0.8, seed=5
        )
        assert isinstance(oracle, SimilarityOracle)
        assert initial.n_pos == 1 and initial.n_neg == 1


class TestRun:
    def test_row_count_and_labeled_growth(self, env):
        corpus, embeddings = env
        kwargs = run_kwargs(corpus, embeddings, budget=1)
        record = run(**kwargs)
        assert len(record.rows) == 1
        # 2 initial + 1 budget = 3 labels consumed
        assert record.rows[0].n_pos + record.rows[0].n_neg == 3

    def test_full_budget_accounting(self, env):
        corpus, embeddings = env
        record = run(**run_kwargs(corpus, embeddings, strategy="seafaring", budget=6))
        assert len(record.rows) == 6
        final = record.rows[-1]
        assert final.n_pos + final.n_neg == 8
        ids = [r.selected_id for r in record.rows]
        assert len(ids) == len(set(ids))  # no id labeled twice

    def test_labels_match_oracle_recomputation(self, env):
        corpus, embeddings = env
        kwargs = run_kwargs(corpus, embeddings, strategy="random", budget=8)
        record = run(**kwargs)
        oracle = kwargs["oracle"]
        for row in record.rows:
            assert row.label == oracle.label(corpus.get(row.selected_id))

    def test_no_test_set_leakage(self, env):
        corpus, embeddings = env
        kwargs = run_kwargs(corpus, embeddings, strategy="seafaring", budget=6)
        test_ids = {i for i, _ in kwargs["test_set"]}
        record = run(**kwargs)
        assert not test_ids & {r.selected_id for r in record.rows}

    def test_ratio_recomputable_from_counts(self, env):
        corpus, embeddings = env
        record = run(**run_kwargs(corpus, embeddings, budget=6))
        for row in record.rows:
            assert row.neg_pos_ratio == row.n_neg / max(row.n_pos, 1)

    @pytest.mark.parametrize("strategy", ["seafaring", "small_exact", "random"])
    def test_identical_seed_reproduces_rows(self, env, strategy):
        corpus, embeddings = env
        a = run(**run_kwargs(corpus, embeddings, strategy=strategy, seed=4, budget=4))
        b = run(**run_kwargs(corpus, embeddings, strategy=strategy, seed=4, budget=4))
        assert a.rows == b.rows

    def test_bad_initial_pair_rejected(self, env):
        corpus, embeddings = env
        kwargs = run_kwargs(corpus, embeddings)
        kwargs["initial_labeled"] = LabeledSet([("i0000", 1), ("i0001", 1)])
        with pytest.raises(EngineError, match="one positive and one negative"):
            run(**kwargs)

    def test_similarity_run_deterministic(self, env):
        corpus, embeddings = env
        tag = corpus.tag_vocab[3]
        records = []
        for _ in range(2):
            oracle, initial, test_set = build_task(corpus, "similarity", tag, tau=0.8, seed=2)
            kwargs = run_kwargs(corpus, embeddings, strategy="small_exact", seed=2, budget=4)
            kwargs.update(oracle=oracle, initial_labeled=initial, test_set=test_set)
            records.append(run(**kwargs))
        assert records[0].rows == records[1].rows

    def test_auc_in_unit_interval(self, env):
        corpus, embeddings = env
        record = run(**run_kwargs(corpus, embeddings, budget=5))
        for row in record.rows:
            assert 0.0 <= row.auc <= 1.0


class TestCheckpointResume:
    def test_resumed_run_matches_uninterrupted(self, env, tmp_path):
        corpus, embeddings = env
        straight = run(**run_kwargs(corpus, embeddings, strategy="seafaring", seed=6, budget=6))

        ckpt = tmp_path / "run.checkpoint.json"
        first = run(
            **run_kwargs(corpus, embeddings, strategy="seafaring", seed=6, budget=3),
            checkpoint_path=str(ckpt),
        )
        assert len(first.rows) == 3
        resumed = run(
            **run_kwargs(corpus, embeddings, strategy="seafaring", seed=6, budget=6),
            checkpoint_path=str(ckpt),
        )
        assert resumed.rows == straight.rows

    def test_seed_mismatch_detected(self, env, tmp_path):
        corpus, embeddings = env
        ckpt = tmp_path / "run.checkpoint.json"
        run(**run_kwargs(corpus, embeddings, seed=1, budget=2), checkpoint_path=str(ckpt))
        with pytest.raises(EngineError, match="seed"):
            run(**run_kwargs(corpus, embeddings, seed=2, budget=3), checkpoint_path=str(ckpt))


class TestRunRecordCsv:
    def test_round_trip(self, env, tmp_path):
        corpus, embeddings = env
        record = run(**run_kwargs(corpus, embeddings, budget=4))
        record.config = {"note": "test"}
        path = tmp_path / "trace.csv"
        record.to_csv(str(path))
        loaded = RunRecord.from_csv(str(path))
        assert loaded.rows == record.rows
        assert loaded.config == {"note": "test"}

    def test_byte_identical_on_rewrite(self, env, tmp_path):
        corpus, embeddings = env
        a = run(**run_kwargs(corpus, embeddings, seed=3, budget=4))
        b = run(**run_kwargs(corpus, embeddings, seed=3, budget=4))
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        a.to_csv(str(pa))
        b.to_csv(str(pb))
        assert pa.read_bytes() == pb.read_bytes()


class TestHumanOracle:
    def test_blocking_label_handoff(self, env):
        corpus, _ = env
        oracle = HumanOracle()
        item = corpus.get(corpus.ids()[0])
        got = {}

        def annotator():
            while oracle.pending() is None:
                time.sleep(0.005)
            oracle.submit(item.id, 1)

        thread = threading.Thread(target=annotator)
        thread.start()
        got["label"] = oracle.label(item)
        thread.join()
        assert got["label"] == 1
        assert oracle.pending() is None

    def test_submit_without_pending_is_conflict(self):
        oracle = HumanOracle()
        with pytest.raises(KeyError):
            oracle.submit("ghost", 1)

    def test_submit_wrong_id_is_conflict(self, env):
        corpus, _ = env
        oracle = HumanOracle()
        item = corpus.get(corpus.ids()[0])

        def annotator():
            while oracle.pending() is None:
                time.sleep(0.005)
            with pytest.raises(KeyError):
                oracle.submit("not-the-item", 0)
            oracle.submit(item.id, 0)

        thread = threading.Thread(target=annotator)
        thread.start()
        assert oracle.label(item) == 0
        thread.join()

    def test_close_unblocks_with_abort(self, env):
        corpus, _ = env
        oracle = HumanOracle()
        item = corpus.get(corpus.ids()[0])
        errors = []

        def loop():
            try:
                oracle.label(item)
            except OracleAborted as exc:
                errors.append(exc)

        thread = threading.Thread(target=loop)
        thread.start()
        while oracle.pending() is None:
            time.sleep(0.005)
        oracle.close()
        thread.join(timeout=2)
        assert errors
