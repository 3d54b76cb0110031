"""Pool-based active learning over a tag-search database.

A LinUCB tag bandit retrieves high-uncertainty items from a (simulated or
remote) search engine, a binary classifier is retrained after every label,
and an experiment harness traces label efficiency and label balance.
"""

from seafarer.acquisition import AcquisitionConfig, argmax_item, score, score_batch
from seafarer.classifier import BinaryClassifier, TrainConfig, train
from seafarer.config import ExperimentConfig, load_config
from seafarer.corpus import (
    Corpus,
    Item,
    TagEmbeddings,
    load_corpus,
    load_embeddings,
    save_corpus,
    synth_corpus,
)
from seafarer.engine import (
    HumanOracle,
    LabeledSet,
    RunRecord,
    SimilarityOracle,
    TagOracle,
    build_task,
    run,
)
from seafarer.kernels import BACKEND as KERNEL_BACKEND
from seafarer.metrics import roc_auc, summarize
from seafarer.retrieval import (
    BanditState,
    RetrievalConfig,
    SelectionReport,
    random_select,
    seafaring_select,
    small_exact_init,
    small_exact_select,
)
from seafarer.search import (
    BudgetMeter,
    CorpusSearchSource,
    RemoteSearchSource,
    corpus_search,
)

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig",
    "BanditState",
    "BinaryClassifier",
    "BudgetMeter",
    "Corpus",
    "CorpusSearchSource",
    "ExperimentConfig",
    "HumanOracle",
    "Item",
    "KERNEL_BACKEND",
    "LabeledSet",
    "RemoteSearchSource",
    "RetrievalConfig",
    "RunRecord",
    "SelectionReport",
    "SimilarityOracle",
    "TagEmbeddings",
    "TagOracle",
    "TrainConfig",
    "argmax_item",
    "build_task",
    "corpus_search",
    "load_config",
    "load_corpus",
    "load_embeddings",
    "random_select",
    "roc_auc",
    "run",
    "save_corpus",
    "score",
    "score_batch",
    "seafaring_select",
    "small_exact_init",
    "small_exact_select",
    "summarize",
    "synth_corpus",
    "train",
]
