"""Start a small human-oracle labeling run for the console e2e test.

Prints one JSON line {"url": ..., "budget": ...} once the service is up,
then blocks until stdin closes (the test ends) and shuts down.
"""

import json
import sys

from seafarer.acquisition import AcquisitionConfig
from seafarer.classifier import TrainConfig
from seafarer.corpus import synth_corpus
from seafarer.engine import build_task
from seafarer.retrieval import RetrievalConfig
from seafarer.search import CorpusSearchSource
from seafarer.service import HumanRunController, serve_labeling


def main() -> int:
    budget = int(sys.argv[1]) if len(sys.argv) > 1 else 10
    corpus, embeddings = synth_corpus(300, 6, 6, 4, seed=31, cluster_spread=0.8)
    tag = corpus.tag_vocab[0]
    _, initial, test_set = build_task(corpus, "tag", tag, seed=1)
    controller = HumanRunController(
        run_kwargs=dict(
            corpus=corpus,
            embeddings=embeddings,
            source=CorpusSearchSource(corpus),
            initial_labeled=initial,
            test_set=test_set,
            acq_cfg=AcquisitionConfig(),
            retr_cfg=RetrievalConfig(strategy="seafaring", linucb_iters=15, seed=1),
            train_cfg=TrainConfig(epochs=30),
            seed=1,
        ),
        budget=budget,
    )
    service = serve_labeling(controller)
    print(json.dumps({"url": service.url, "budget": budget}), flush=True)
    try:
        sys.stdin.read()
    finally:
        service.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
