"""Tagged-item corpus: loading, validation, indexing, and synthesis.

A corpus is the in-memory item store that backs the simulated search
engine and the label oracles.  Items carry precomputed feature vectors;
no image decoding or feature extraction happens here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

DEFAULT_POLICIES = ("zero_vector", "seeded_hash_gaussian")


class CorpusError(ValueError):
    """Raised for malformed corpus or embedding files and invalid items."""


@dataclass(frozen=True, eq=False)
class Item:
    """One pool element: id, feature vector, tag set, optional display URL."""

    id: str
    features: np.ndarray
    tags: frozenset[str]
    url: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("item id must be a non-empty string")
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 1:
            raise CorpusError(f"item {self.id!r}: features must be a flat vector")
        if not np.all(np.isfinite(feats)):
            raise CorpusError(f"item {self.id!r}: non-finite feature component")
        feats.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "tags", frozenset(self.tags))

    def to_dict(self) -> dict:
        d: dict = {
            "id": self.id,
            "features": self.features.tolist(),
            "tags": sorted(self.tags),
        }
        if self.url is not None:
            d["url"] = self.url
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "Item":
        if not isinstance(obj, dict) or "id" not in obj or "features" not in obj:
            raise CorpusError("item record must be an object with 'id' and 'features'")
        return cls(
            id=str(obj["id"]),
            features=np.asarray(obj["features"], dtype=np.float64),
            tags=frozenset(obj.get("tags", ())),
            url=obj.get("url"),
        )


class Corpus:
    """Immutable id-keyed item store with an inverted tag index.

    Iteration order over items equals insertion (file) order, which keeps
    seeded sampling reproducible.  ``tag_index`` maps each tag to the ids
    bearing it, in insertion order; ``tag_vocab`` is the sorted tag list.
    """

    def __init__(self, items: Sequence[Item], d: int | None = None):
        if len(items) < 2:
            raise CorpusError(f"corpus needs at least 2 items, got {len(items)}")
        if d is None:
            d = int(items[0].features.shape[0])
        if d <= 0:
            raise CorpusError(f"feature dimension must be positive, got {d}")
        self.d = d
        self.items: dict[str, Item] = {}
        self.tag_index: dict[str, list[str]] = {}
        for it in items:
            if it.id in self.items:
                raise CorpusError(f"duplicate item id {it.id!r}")
            if it.features.shape[0] != d:
                raise CorpusError(
                    f"item {it.id!r}: feature dimension {it.features.shape[0]} != corpus d={d}"
                )
            self.items[it.id] = it
            for tag in sorted(it.tags):
                self.tag_index.setdefault(tag, []).append(it.id)
        self.tag_vocab: list[str] = sorted(self.tag_index)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Item]:
        return iter(self.items.values())

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.items

    def get(self, item_id: str) -> Item:
        try:
            return self.items[item_id]
        except KeyError:
            raise KeyError(f"unknown item id {item_id!r}") from None

    def ids(self) -> list[str]:
        return list(self.items)

    def features_of(self, item_ids: Sequence[str]) -> np.ndarray:
        """Stack the feature vectors of ``item_ids`` into an (n, d) matrix."""
        return np.stack([self.get(i).features for i in item_ids]) if item_ids else np.empty((0, self.d))


@dataclass
class TagEmbeddings:
    """Tag -> k-dimensional context vector table with an out-of-vocabulary policy."""

    k: int
    table: dict[str, np.ndarray] = field(default_factory=dict)
    default_policy: str = "zero_vector"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise CorpusError(f"embedding dimension must be positive, got {self.k}")
        if self.default_policy not in DEFAULT_POLICIES:
            raise CorpusError(
                f"unknown default policy {self.default_policy!r}; expected one of {DEFAULT_POLICIES}"
            )
        for tag, vec in self.table.items():
            v = np.asarray(vec, dtype=np.float64)
            if v.shape != (self.k,):
                raise CorpusError(f"embedding for {tag!r} has dimension {v.shape}, expected ({self.k},)")
            if not np.all(np.isfinite(v)):
                raise CorpusError(f"embedding for {tag!r} has non-finite entries")
            v.flags.writeable = False
            self.table[tag] = v

    def vector(self, tag: str) -> np.ndarray:
        """Embedding of ``tag``; absent tags resolve via the default policy."""
        vec = self.table.get(tag)
        if vec is not None:
            return vec
        if self.default_policy == "zero_vector":
            return np.zeros(self.k)
        return self._hash_gaussian(tag)

    def matrix(self, tags: Sequence[str]) -> np.ndarray:
        """Stack embeddings for ``tags`` into an (n, k) matrix."""
        if not tags:
            return np.empty((0, self.k))
        return np.stack([self.vector(t) for t in tags])

    def _hash_gaussian(self, tag: str) -> np.ndarray:
        # sha256 rather than hash(): stable across processes and platforms.
        digest = hashlib.sha256(tag.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "little")
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.k)
        norm = float(np.linalg.norm(v))
        if norm > 0:
            v /= norm
        return v


def load_corpus(path: str) -> Corpus:
    """Load a JSON Lines corpus file.

    Each line is one item object ``{"id", "features", "tags", "url"?}``.
    An optional first line ``{"meta": {"d": <int>}}`` pins the feature
    dimension; otherwise d is inferred from the first item.
    """
    items: list[Item] = []
    declared_d: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if lineno == 1 and isinstance(obj, dict) and "meta" in obj:
                meta = obj["meta"]
                if not isinstance(meta, dict) or not isinstance(meta.get("d"), int):
                    raise CorpusError(f"{path}:1: header meta must carry an integer 'd'")
                declared_d = meta["d"]
                continue
            try:
                items.append(Item.from_dict(obj))
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
    return Corpus(items, d=declared_d)


def save_corpus(corpus: Corpus, path: str) -> None:
    """Write a corpus as JSON Lines with a meta header; round-trips bit-exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"meta": {"d": corpus.d}}) + "\n")
        for item in corpus:
            fh.write(json.dumps(item.to_dict()) + "\n")


def load_embeddings(path: str, default_policy: str = "zero_vector") -> TagEmbeddings:
    """Load a plain-text embedding table: one ``tag v1 v2 ... vk`` line per tag."""
    table: dict[str, np.ndarray] = {}
    k: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            tag, raw = parts[0], parts[1:]
            if not raw:
                raise CorpusError(f"{path}:{lineno}: no vector components for {tag!r}")
            try:
                vec = np.array([float(tok) for tok in raw], dtype=np.float64)
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: non-numeric token") from exc
            if k is None:
                k = len(raw)
            elif len(raw) != k:
                raise CorpusError(
                    f"{path}:{lineno}: inconsistent dimension {len(raw)}, expected {k}"
                )
            table[tag] = vec
    if k is None:
        raise CorpusError(f"{path}: empty embeddings file")
    return TagEmbeddings(k=k, table=table, default_policy=default_policy)


def save_embeddings(embeddings: TagEmbeddings, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tag in sorted(embeddings.table):
            vec = " ".join(repr(x) for x in embeddings.table[tag].tolist())
            fh.write(f"{tag} {vec}\n")


def synth_corpus(
    n_items: int,
    n_tags: int,
    d: int,
    k: int,
    seed: int,
    cluster_spread: float,
) -> tuple[Corpus, TagEmbeddings]:
    """Generate a deterministic clustered corpus plus matching tag embeddings.

    Every tag gets a Gaussian cluster center in feature space; its embedding
    is a unit-normalized random projection of that center, so tags whose
    items look alike also have nearby embeddings (this is what lets the
    bandit generalize across tags).  Each item carries 1-3 tags: a primary
    tag plus optionally its nearest-center neighbors, and its features sit
    near the mean of its tags' centers with noise scale ``cluster_spread``.
    The first ``n_tags`` items cover each tag once so no tag is empty.
    """
    if n_items < 2:
        raise CorpusError(f"n_items must be >= 2, got {n_items}")
    if n_tags < 1:
        raise CorpusError(f"n_tags must be >= 1, got {n_tags}")
    if d < 2:
        raise CorpusError(f"d must be >= 2, got {d}")
    if k < 1:
        raise CorpusError(f"k must be >= 1, got {k}")
    if cluster_spread < 0:
        raise CorpusError(f"cluster_spread must be >= 0, got {cluster_spread}")

    rng = np.random.default_rng(seed)
    tag_names = [f"t{i:04d}" for i in range(n_tags)]
    centers = rng.normal(0.0, 1.0, size=(n_tags, d))

    projection = rng.normal(0.0, 1.0, size=(k, d)) / np.sqrt(d)
    emb_noise = 0.05 * rng.normal(0.0, 1.0, size=(n_tags, k))
    raw_emb = centers @ projection.T + emb_noise
    norms = np.linalg.norm(raw_emb, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    emb_table = {tag_names[t]: raw_emb[t] / norms[t] for t in range(n_tags)}

    # Secondary tags come from the 20 nearest cluster centers, so each tag's
    # items spread over many co-occurrence modes (pairwise center means)
    # while co-occurring tags still sit in the same feature neighborhood.
    if n_tags > 1:
        dist = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=2)
        np.fill_diagonal(dist, np.inf)
        neighbors = np.argsort(dist, axis=1)[:, : min(20, n_tags - 1)]
    else:
        neighbors = np.zeros((1, 0), dtype=np.int64)

    width = len(str(max(n_items - 1, 1)))
    items: list[Item] = []
    for i in range(n_items):
        if i < n_tags:
            primary = i
        else:
            primary = int(rng.integers(n_tags))
        # Mostly 2-3 tags per item; secondary tags dominate the feature mix
        # (a {cat, kitchen} photo is mostly kitchen), so one tag's items
        # spread over many directions instead of piling on one hub.
        u = float(rng.random())
        n_extra = min(0 if u < 0.1 else (1 if u < 0.55 else 2), neighbors.shape[1])
        tag_ids = [primary]
        if n_extra:
            picked = rng.choice(neighbors.shape[1], size=n_extra, replace=False)
            tag_ids += [int(neighbors[primary][j]) for j in sorted(picked)]
            weights = np.array([0.4] + [0.6 / n_extra] * n_extra)
        else:
            weights = np.array([1.0])
        mean = weights @ centers[tag_ids]
        feats = mean + cluster_spread * rng.normal(0.0, 1.0, size=d)
        items.append(
            Item(
                id=f"i{i:0{width}d}",
                features=feats,
                tags=frozenset(tag_names[t] for t in tag_ids),
            )
        )

    return Corpus(items, d=d), TagEmbeddings(k=k, table=emb_table)
