import numpy as np
import pytest

from seafarer.corpus import Corpus, Item, TagEmbeddings


@pytest.fixture
def tiny_corpus() -> Corpus:
    """Three items with tags {a}, {a, b}, {}."""
    return Corpus(
        [
            Item(id="i1", features=np.array([1.0, 0.0]), tags=frozenset({"a"})),
            Item(id="i2", features=np.array([0.0, 1.0]), tags=frozenset({"a", "b"})),
            Item(id="i3", features=np.array([1.0, 1.0]), tags=frozenset()),
        ]
    )


@pytest.fixture
def small_corpus() -> Corpus:
    """Deterministic 60-item corpus over 4 tags with 2-d features."""
    rng = np.random.default_rng(11)
    tag_sets = [("a",), ("b",), ("c",), ("a", "d"), ()]
    items = []
    for i in range(60):
        tags = frozenset(tag_sets[i % len(tag_sets)])
        items.append(
            Item(id=f"s{i:03d}", features=rng.normal(size=2), tags=tags)
        )
    return Corpus(items)


@pytest.fixture
def unit_embeddings(small_corpus) -> TagEmbeddings:
    rng = np.random.default_rng(5)
    table = {}
    for tag in small_corpus.tag_vocab:
        v = rng.normal(size=4)
        table[tag] = v / np.linalg.norm(v)
    return TagEmbeddings(k=4, table=table)
