"""Selection strategies proposing the next item to label.

Three strategies share one report type:

* ``seafaring`` — a LinUCB bandit over search tags: each round it pulls the
  highest-UCB tag, queries the search source for a page of that tag's items,
  scores the newly seen ones with the acquisition function, and feeds the
  aggregated score back as the reward.  The best-scoring item seen across
  all rounds is returned.
* ``small_exact`` — exhaustive argmax over a fixed seeded sub-pool.
* ``random`` — uniform draw from the selectable items.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from seafarer import kernels
from seafarer.acquisition import AcquisitionConfig, score_batch
from seafarer.corpus import Corpus, Item, TagEmbeddings
from seafarer.search import CorpusSearchSource, SearchSource

STRATEGIES = ("seafaring", "small_exact", "random")


class RetrievalError(RuntimeError):
    """Raised when a strategy cannot produce an item."""


@dataclass
class RetrievalConfig:
    strategy: str = "seafaring"
    linucb_iters: int = 1000
    page_size: int = 10
    alpha: float = 1.0
    ridge: float = 1.0
    reward_agg: str = "mean"
    small_pool_size: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.linucb_iters < 1:
            raise ValueError(f"linucb_iters must be >= 1, got {self.linucb_iters}")
        if self.page_size < 1:
            raise ValueError(f"page_size must be >= 1, got {self.page_size}")
        if self.small_pool_size < 1:
            raise ValueError(f"small_pool_size must be >= 1, got {self.small_pool_size}")
        if self.reward_agg not in ("mean", "max"):
            raise ValueError(f"reward_agg must be 'mean' or 'max', got {self.reward_agg!r}")
        if self.ridge <= 0:
            raise ValueError(f"ridge must be > 0, got {self.ridge}")


@dataclass
class SelectionReport:
    """Trace of one selection: the chosen item plus cost and probe statistics."""

    chosen: Item
    chosen_score: float
    n_model_evals: int
    n_queries: int
    max_pos_prob_seen: float
    per_tag_pulls: dict[str, int] = field(default_factory=dict)


class BanditState:
    """Shared-ridge LinUCB sufficient statistics over tag-embedding contexts.

    One model for all arms: ``A = ridge * I + sum(z z^T)``, ``b = sum(r z)``,
    so reward evidence for one tag generalizes to tags with nearby
    embeddings.  ``A`` stays symmetric positive definite for any update
    sequence because ridge > 0 and updates are rank-1 ``z z^T`` additions.
    """

    def __init__(self, k: int, alpha: float = 1.0, ridge: float = 1.0):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if ridge <= 0:
            raise ValueError(f"ridge must be > 0, got {ridge}")
        self.k = k
        self.alpha = alpha
        self.ridge = ridge
        self.A = ridge * np.eye(k)
        self.b = np.zeros(k)
        self._a_inv: np.ndarray | None = None

    def _inverse(self) -> np.ndarray:
        if self._a_inv is None:
            try:
                self._a_inv = np.linalg.inv(self.A)
            except np.linalg.LinAlgError as exc:  # unreachable with ridge > 0
                raise RetrievalError(f"design matrix not invertible: {exc}") from exc
        return self._a_inv

    @property
    def theta(self) -> np.ndarray:
        return self._inverse() @ self.b

    def ucb(self, z: np.ndarray) -> float:
        return float(self.ucb_scores(np.asarray(z, dtype=np.float64)[None, :])[0])

    def ucb_scores(self, Z: np.ndarray) -> np.ndarray:
        """UCB for each context row: ``theta^T z + alpha * sqrt(z^T A^-1 z)``."""
        a_inv = self._inverse()
        Z = np.ascontiguousarray(Z, dtype=np.float64)
        return kernels.ucb_scores(
            np.ascontiguousarray(a_inv),
            np.ascontiguousarray(a_inv @ self.b),
            Z,
            self.alpha,
        )

    def update(self, z: np.ndarray, reward: float) -> None:
        z = np.asarray(z, dtype=np.float64)
        if not np.all(np.isfinite(z)) or not np.isfinite(reward):
            raise ValueError("bandit update must be finite")
        self.A += np.outer(z, z)
        self.b += reward * z
        self._a_inv = None


def derive_token(seed: int, round_index: int) -> int:
    """Stable non-negative page token for (selection seed, round)."""
    return int(np.random.SeedSequence([seed, round_index]).generate_state(1)[0])


def seafaring_select(
    source: SearchSource,
    embeddings: TagEmbeddings,
    model,
    acq_cfg: AcquisitionConfig,
    cfg: RetrievalConfig,
    exclude: Iterable[str] = (),
) -> SelectionReport:
    """Bandit-guided search for the highest-acquisition item.

    Bandit state is created fresh here on every call: the reward landscape
    (acquisition under the current model) shifts whenever the model is
    retrained, so statistics are never carried across selections.  Items
    already scored within this call are cached and never rescored — model
    evaluations are the accounted cost.
    """
    vocab = sorted(source.vocabulary())
    if not vocab:
        raise RetrievalError("search source has an empty vocabulary")
    exclude = set(exclude)
    Z = np.ascontiguousarray(embeddings.matrix(vocab))
    state = BanditState(k=embeddings.k, alpha=cfg.alpha, ridge=cfg.ridge)
    reward_scale = 2.0 ** acq_cfg.gamma

    seen: set[str] = set()
    pulls: Counter[str] = Counter()
    best_item: Item | None = None
    best_score = -np.inf
    max_p1 = 0.0
    n_evals = 0
    n_queries = 0

    for rnd in range(cfg.linucb_iters):
        ucb = state.ucb_scores(Z)
        arm = int(np.argmax(ucb))  # first max = lexicographically smallest tag
        tag = vocab[arm]
        pulls[tag] += 1
        items = source.search(tag, cfg.page_size, derive_token(cfg.seed, rnd))
        n_queries += 1

        fresh = [it for it in items if it.id not in seen and it.id not in exclude]
        seen.update(it.id for it in fresh)
        if fresh:
            p1 = model.predict_proba_batch(np.stack([it.features for it in fresh]))
            scores = score_batch(acq_cfg, p1)
            n_evals += len(fresh)
            max_p1 = max(max_p1, float(p1.max()))
            for it, s in zip(fresh, scores):
                if s > best_score or (s == best_score and it.id < best_item.id):
                    best_item, best_score = it, float(s)
            agg = scores.mean() if cfg.reward_agg == "mean" else scores.max()
            reward = float(agg) / reward_scale
        else:
            reward = 0.0
        state.update(Z[arm], reward)

    if best_item is None:
        raise RetrievalError(
            "no item was ever retrieved: vocabulary and pool are disjoint "
            "or everything reachable is already labeled"
        )
    return SelectionReport(
        chosen=best_item,
        chosen_score=best_score,
        n_model_evals=n_evals,
        n_queries=n_queries,
        max_pos_prob_seen=max_p1,
        per_tag_pulls=dict(pulls),
    )


@dataclass
class FixedPool:
    """Seeded sub-pool, fixed for the whole experiment."""

    items: list[Item]
    requested: int

    @property
    def shortfall(self) -> bool:
        return len(self.items) < self.requested


def _corpus_of(source) -> Corpus | None:
    if isinstance(source, Corpus):
        return source
    if isinstance(source, CorpusSearchSource):
        return source.corpus
    return None


def small_exact_init(
    source,
    size: int,
    seed: int,
    exclude: Iterable[str] = (),
    page_size: int = 10,
) -> FixedPool:
    """Draw the fixed sub-pool: a seeded uniform sample without replacement.

    Corpus-backed sources are sampled directly.  For a remote source the
    pool is gathered by querying tags in seeded order until ``size``
    distinct items accumulate; if the reachable collection is smaller than
    ``size`` the pool is short and flagged.
    """
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    exclude = set(exclude)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5E1EC7]))
    corpus = _corpus_of(source)
    if corpus is not None:
        ids = [i for i in corpus.ids() if i not in exclude]
        if not ids:
            raise RetrievalError("no selectable items to pool")
        if len(ids) <= size:
            return FixedPool(items=[corpus.get(i) for i in ids], requested=size)
        chosen = rng.choice(len(ids), size=size, replace=False)
        chosen.sort()  # keep corpus order
        return FixedPool(items=[corpus.get(ids[i]) for i in chosen], requested=size)

    vocab = sorted(source.vocabulary())
    if not vocab:
        raise RetrievalError("no selectable items to pool")
    order = rng.permutation(len(vocab))
    pool: dict[str, Item] = {}
    for idx in order:
        if len(pool) >= size:
            break
        token = int(rng.integers(0, 2**63))
        for it in source.search(vocab[idx], max(size, page_size), token):
            if it.id not in exclude and it.id not in pool:
                pool[it.id] = it
                if len(pool) >= size:
                    break
    if not pool:
        raise RetrievalError("no selectable items to pool")
    return FixedPool(items=list(pool.values()), requested=size)


def small_exact_select(
    pool: FixedPool,
    model,
    acq_cfg: AcquisitionConfig,
    exclude: Iterable[str] = (),
) -> SelectionReport:
    """Exhaustive, exact argmax of the acquisition over the fixed pool."""
    exclude = set(exclude)
    candidates = [it for it in pool.items if it.id not in exclude]
    if not candidates:
        raise RetrievalError("fixed pool exhausted: every item is excluded")
    p1 = model.predict_proba_batch(np.stack([it.features for it in candidates]))
    scores = score_batch(acq_cfg, p1)
    best = scores.max()
    idx = min(
        (i for i in range(len(candidates)) if scores[i] == best),
        key=lambda i: candidates[i].id,
    )
    return SelectionReport(
        chosen=candidates[idx],
        chosen_score=float(scores[idx]),
        n_model_evals=len(candidates),
        n_queries=0,
        max_pos_prob_seen=float(p1.max()),
        per_tag_pulls={},
    )


def random_select(
    source,
    rng: np.random.Generator,
    model,
    acq_cfg: AcquisitionConfig,
    exclude: Iterable[str] = (),
    page_size: int = 10,
    max_retries: int = 50,
) -> SelectionReport:
    """Uniform random pick from the selectable items.

    Corpus-backed: uniform over non-excluded corpus items.  Remote: a
    uniform random vocabulary tag, one query, then a uniform pick among the
    non-excluded results, retrying on empty pages.  The chosen item is
    scored once so the trace fields stay meaningful.
    """
    exclude = set(exclude)
    corpus = _corpus_of(source)
    chosen: Item | None = None
    n_queries = 0
    if corpus is not None:
        ids = [i for i in corpus.ids() if i not in exclude]
        if not ids:
            raise RetrievalError("no selectable items remain")
        chosen = corpus.get(ids[int(rng.integers(len(ids)))])
    else:
        vocab = sorted(source.vocabulary())
        if not vocab:
            raise RetrievalError("search source has an empty vocabulary")
        for _ in range(max_retries):
            tag = vocab[int(rng.integers(len(vocab)))]
            token = int(rng.integers(0, 2**63))
            items = [
                it for it in source.search(tag, page_size, token) if it.id not in exclude
            ]
            n_queries += 1
            if items:
                chosen = items[int(rng.integers(len(items)))]
                break
        if chosen is None:
            raise RetrievalError(f"no selectable item found in {max_retries} random queries")

    p0, p1 = model.predict_proba(chosen.features)
    return SelectionReport(
        chosen=chosen,
        chosen_score=float(score_batch(acq_cfg, np.asarray([p1]))[0]),
        n_model_evals=1,
        n_queries=n_queries,
        max_pos_prob_seen=p1,
        per_tag_pulls={},
    )
