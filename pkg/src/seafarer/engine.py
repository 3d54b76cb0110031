"""The active-learning outer loop and the label oracles.

Per iteration: retrain the classifier on everything labeled so far,
evaluate ROC-AUC on the held-out test set (recorded, never fed back to
selection), select the next item with the configured strategy, ask the
oracle for its label, and append it to the labeled set.

All per-iteration randomness (train shuffles, selection seeds, random
picks) is derived statelessly from the run seed and the iteration index,
so an interrupted run resumed from a checkpoint is byte-identical to an
uninterrupted one.
"""

from __future__ import annotations

import csv
import json
import os
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from seafarer import metrics
from seafarer.acquisition import AcquisitionConfig
from seafarer.classifier import BinaryClassifier, TrainConfig, train
from seafarer.corpus import Corpus, Item, TagEmbeddings
from seafarer.retrieval import (
    FixedPool,
    RetrievalConfig,
    SelectionReport,
    random_select,
    seafaring_select,
    small_exact_init,
    small_exact_select,
)
from seafarer.search import SearchSource

RUN_CSV_COLUMNS = [
    "iter",
    "selected_id",
    "label",
    "auc",
    "n_pos",
    "n_neg",
    "neg_pos_ratio",
    "max_candidate_pos_prob",
    "n_model_evals",
    "n_queries",
]


class EngineError(RuntimeError):
    pass


class TaskError(ValueError):
    """Raised when a task cannot be built (e.g. the tag is too rare)."""


class OracleAborted(EngineError):
    """Raised when a blocking oracle is shut down mid-label."""


class LabeledSet:
    """Ordered (item_id, label) collection; rejects duplicate ids."""

    def __init__(self, entries: Iterable[tuple[str, int]] = ()):
        self.entries: list[tuple[str, int]] = []
        self._ids: set[str] = set()
        self.n_pos = 0
        self.n_neg = 0
        for item_id, label in entries:
            self.add(item_id, label)

    def add(self, item_id: str, label: int) -> None:
        if label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {label!r}")
        if item_id in self._ids:
            raise ValueError(f"item {item_id!r} is already labeled")
        self.entries.append((item_id, int(label)))
        self._ids.add(item_id)
        if label == 1:
            self.n_pos += 1
        else:
            self.n_neg += 1

    def ids(self) -> set[str]:
        return set(self._ids)

    def copy(self) -> "LabeledSet":
        return LabeledSet(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._ids


class Oracle:
    """Label source; deterministic for the simulated variants."""

    def label(self, item: Item) -> int:
        raise NotImplementedError


@dataclass
class TagOracle(Oracle):
    """Positive iff the item bears the target tag."""

    target_tag: str

    def label(self, item: Item) -> int:
        return 1 if self.target_tag in item.tags else 0


class SimilarityOracle(Oracle):
    """Positive iff the max cosine similarity to a hidden reference set meets tau.

    The references are known only to this object; the learner never sees
    them.
    """

    def __init__(self, references: Sequence[np.ndarray], tau: float):
        if not 0 < tau <= 1:
            raise ValueError(f"tau must be in (0, 1], got {tau}")
        R = np.stack([np.asarray(r, dtype=np.float64) for r in references])
        norms = np.linalg.norm(R, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        self._refs_unit = R / norms
        self.tau = tau

    def label(self, item: Item) -> int:
        x = item.features
        norm = float(np.linalg.norm(x))
        if norm == 0:
            return 0
        sims = self._refs_unit @ (x / norm)
        # epsilon guards the boundary: colinear vectors must count as cosine 1
        return 1 if float(sims.max()) >= self.tau - 1e-12 else 0


class HumanOracle(Oracle):
    """Blocking oracle fed by the labeling service.

    ``label`` parks the item as pending and waits; ``submit`` delivers a
    label for the pending item exactly once.  The pending/delivery handoff
    is the only shared state between the loop thread and the service.
    """

    def __init__(self):
        self._cond = threading.Condition()
        self._pending: Item | None = None
        self._delivered: int | None = None
        self._closed = False

    def pending(self) -> Item | None:
        with self._cond:
            return self._pending

    def submit(self, item_id: str, label: int) -> None:
        """Deliver a label for the pending item; KeyError when not pending."""
        if label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {label!r}")
        with self._cond:
            if self._pending is None or self._pending.id != item_id:
                raise KeyError(f"item {item_id!r} is not awaiting a label")
            if self._delivered is not None:
                raise KeyError(f"item {item_id!r} already has a label submitted")
            self._delivered = int(label)
            self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def label(self, item: Item) -> int:
        with self._cond:
            if self._closed:
                raise OracleAborted("labeling session closed")
            self._pending = item
            self._delivered = None
            while self._delivered is None and not self._closed:
                self._cond.wait()
            self._pending = None
            if self._delivered is None:
                raise OracleAborted("labeling session closed while waiting")
            value, self._delivered = self._delivered, None
            return value


@dataclass
class RunRow:
    iter: int
    selected_id: str
    label: int
    auc: float
    n_pos: int
    n_neg: int
    neg_pos_ratio: float
    max_candidate_pos_prob: float
    n_model_evals: int
    n_queries: int

    def as_list(self) -> list:
        return [getattr(self, c) for c in RUN_CSV_COLUMNS]


@dataclass
class RunRecord:
    """Per-iteration trace of one run; the unit of reproducibility."""

    rows: list[RunRow] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    seed: int = 0

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RUN_CSV_COLUMNS)
            for row in self.rows:
                out = []
                for col, value in zip(RUN_CSV_COLUMNS, row.as_list()):
                    out.append(repr(value) if isinstance(value, float) else value)
                writer.writerow(out)
        sidecar = os.path.splitext(path)[0] + ".config.json"
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump({"seed": self.seed, "config": self.config}, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_csv(cls, path: str) -> "RunRecord":
        rows = []
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != RUN_CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
            for rec in reader:
                rows.append(
                    RunRow(
                        iter=int(rec["iter"]),
                        selected_id=rec["selected_id"],
                        label=int(rec["label"]),
                        auc=float(rec["auc"]),
                        n_pos=int(rec["n_pos"]),
                        n_neg=int(rec["n_neg"]),
                        neg_pos_ratio=float(rec["neg_pos_ratio"]),
                        max_candidate_pos_prob=float(rec["max_candidate_pos_prob"]),
                        n_model_evals=int(rec["n_model_evals"]),
                        n_queries=int(rec["n_queries"]),
                    )
                )
        record = cls(rows=rows)
        sidecar = os.path.splitext(path)[0] + ".config.json"
        if os.path.exists(sidecar):
            with open(sidecar, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
            record.config = payload.get("config", {})
            record.seed = payload.get("seed", 0)
        return record


def _iter_seed(root_seed: int, domain: int, iteration: int) -> int:
    """Stateless per-iteration seed; resume-safe by construction."""
    return int(np.random.SeedSequence([root_seed, domain, iteration]).generate_state(1)[0])


_DOMAIN_TRAIN = 1
_DOMAIN_SELECT = 2
_DOMAIN_RANDOM = 3
_DOMAIN_POOL = 4
_DOMAIN_TASK = 5


def build_task(
    corpus: Corpus,
    kind: str,
    tag: str,
    tau: float = 0.8,
    seed: int = 0,
    test_fraction: float = 0.2,
    n_references: int = 10,
) -> tuple[Oracle, LabeledSet, list[tuple[str, int]]]:
    """Construct (oracle, initial labeled pair, held-out test set) for a task.

    The test split is seeded and stratified to hold at least one positive
    and one negative while leaving at least one of each outside it for the
    initial pair.  For similarity tasks the references are drawn from items
    bearing ``tag`` and live only inside the oracle.
    """
    if kind not in ("tag", "similarity"):
        raise TaskError(f"unknown task kind {kind!r}")
    if not 0 < test_fraction < 1:
        raise TaskError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, _DOMAIN_TASK]))

    if kind == "tag":
        oracle: Oracle = TagOracle(target_tag=tag)
    else:
        tagged = corpus.tag_index.get(tag, [])
        if not tagged:
            raise TaskError(f"tag {tag!r} has no items to draw references from")
        n_refs = min(n_references, len(tagged))
        picked = rng.choice(len(tagged), size=n_refs, replace=False)
        refs = [corpus.get(tagged[i]).features for i in sorted(picked)]
        oracle = SimilarityOracle(refs, tau)

    ids = corpus.ids()
    labels = {i: oracle.label(corpus.get(i)) for i in ids}
    pos = [i for i in ids if labels[i] == 1]
    neg = [i for i in ids if labels[i] == 0]
    if len(pos) < 2 or len(neg) < 2:
        raise TaskError(
            f"task needs >= 2 positives and >= 2 negatives in the corpus, "
            f"got {len(pos)} / {len(neg)}"
        )

    def take(population: list[str], want: int) -> list[str]:
        picked = rng.choice(len(population), size=want, replace=False)
        return [population[i] for i in sorted(picked)]

    n_test_pos = int(np.clip(round(test_fraction * len(pos)), 1, len(pos) - 1))
    n_test_neg = int(np.clip(round(test_fraction * len(neg)), 1, len(neg) - 1))
    test_pos = take(pos, n_test_pos)
    test_neg = take(neg, n_test_neg)
    test_set = [(i, 1) for i in test_pos] + [(i, 0) for i in test_neg]

    remaining_pos = [i for i in pos if i not in set(test_pos)]
    remaining_neg = [i for i in neg if i not in set(test_neg)]
    first_pos = remaining_pos[int(rng.integers(len(remaining_pos)))]
    first_neg = remaining_neg[int(rng.integers(len(remaining_neg)))]
    initial = LabeledSet([(first_pos, 1), (first_neg, 0)])
    return oracle, initial, test_set


def run(
    corpus: Corpus,
    embeddings: TagEmbeddings,
    source: SearchSource,
    oracle: Oracle,
    initial_labeled: LabeledSet,
    test_set: Sequence[tuple[str, int]],
    acq_cfg: AcquisitionConfig,
    retr_cfg: RetrievalConfig,
    train_cfg: TrainConfig,
    budget: int,
    seed: int = 0,
    config_snapshot: dict | None = None,
    checkpoint_path: str | None = None,
    on_row: Callable[[RunRow], None] | None = None,
) -> RunRecord:
    """Run the labeling loop for ``budget`` iterations and return the trace.

    The AUC recorded in row i reflects the model trained on the i+1 labels
    available when the iteration began.  Selection can never return a
    labeled or test-set id (both are excluded), and the oracle is asked
    about each selected item exactly once.
    """
    if budget < 1:
        raise EngineError(f"budget must be >= 1, got {budget}")
    if initial_labeled.n_pos != 1 or initial_labeled.n_neg != 1:
        raise EngineError(
            "initial labeled set must hold exactly one positive and one negative, "
            f"got {initial_labeled.n_pos} / {initial_labeled.n_neg}"
        )
    test_ids = [i for i, _ in test_set]
    test_labels = [int(l) for _, l in test_set]
    if set(test_ids) & initial_labeled.ids():
        raise EngineError("test set overlaps the initial labeled set")
    test_X = corpus.features_of(test_ids)

    labeled = initial_labeled.copy()
    rows: list[RunRow] = []
    record = RunRecord(rows=rows, config=dict(config_snapshot or {}), seed=seed)

    if checkpoint_path and os.path.exists(checkpoint_path):
        labeled, rows = _load_checkpoint(checkpoint_path, record, initial_labeled)
        record.rows = rows

    pool: FixedPool | None = None
    if retr_cfg.strategy == "small_exact":
        pool = small_exact_init(
            source,
            retr_cfg.small_pool_size,
            seed=_iter_seed(seed, _DOMAIN_POOL, 0),
            exclude=set(test_ids),
            page_size=retr_cfg.page_size,
        )

    start = len(rows) + 1
    for i in range(start, budget + 1):
        model = train(
            labeled,
            corpus,
            replace(train_cfg, seed=_iter_seed(seed, _DOMAIN_TRAIN, i)),
        )
        auc = metrics.roc_auc(zip(model.predict_proba_batch(test_X).tolist(), test_labels))

        exclude = labeled.ids() | set(test_ids)
        report = _select(
            source, embeddings, model, acq_cfg, retr_cfg, exclude, pool, seed, i
        )
        item = report.chosen
        if item.id in labeled:  # defensive: would corrupt budget accounting
            raise EngineError(f"selection returned already-labeled item {item.id!r}")
        label = int(oracle.label(item))
        if label not in (0, 1):
            raise EngineError(f"oracle returned invalid label {label!r}")
        labeled.add(item.id, label)

        row = RunRow(
            iter=i,
            selected_id=item.id,
            label=label,
            auc=float(auc),
            n_pos=labeled.n_pos,
            n_neg=labeled.n_neg,
            neg_pos_ratio=labeled.n_neg / max(labeled.n_pos, 1),
            max_candidate_pos_prob=report.max_pos_prob_seen,
            n_model_evals=report.n_model_evals,
            n_queries=report.n_queries,
        )
        rows.append(row)
        if checkpoint_path:
            _write_checkpoint(checkpoint_path, record, labeled)
        if on_row is not None:
            on_row(row)

    return record


def _select(
    source: SearchSource,
    embeddings: TagEmbeddings,
    model: BinaryClassifier,
    acq_cfg: AcquisitionConfig,
    retr_cfg: RetrievalConfig,
    exclude: set[str],
    pool: FixedPool | None,
    seed: int,
    iteration: int,
) -> SelectionReport:
    if retr_cfg.strategy == "seafaring":
        cfg = replace(retr_cfg, seed=_iter_seed(seed, _DOMAIN_SELECT, iteration))
        return seafaring_select(source, embeddings, model, acq_cfg, cfg, exclude)
    if retr_cfg.strategy == "small_exact":
        assert pool is not None
        return small_exact_select(pool, model, acq_cfg, exclude)
    rng = np.random.default_rng(
        np.random.SeedSequence([seed, _DOMAIN_RANDOM, iteration])
    )
    return random_select(
        source, rng, model, acq_cfg, exclude, page_size=retr_cfg.page_size
    )


def _write_checkpoint(path: str, record: RunRecord, labeled: LabeledSet) -> None:
    payload = {
        "seed": record.seed,
        "config": record.config,
        "labeled": labeled.entries,
        "rows": [row.as_list() for row in record.rows],
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def _load_checkpoint(
    path: str, record: RunRecord, initial_labeled: LabeledSet
) -> tuple[LabeledSet, list[RunRow]]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("seed") != record.seed:
        raise EngineError(
            f"checkpoint {path} was written for seed {payload.get('seed')}, "
            f"resume requested with seed {record.seed}"
        )
    labeled = LabeledSet((str(i), int(l)) for i, l in payload["labeled"])
    rows = [
        RunRow(**dict(zip(RUN_CSV_COLUMNS, values))) for values in payload["rows"]
    ]
    if len(labeled) != len(initial_labeled) + len(rows):
        raise EngineError(f"checkpoint {path} is internally inconsistent")
    return labeled, rows
