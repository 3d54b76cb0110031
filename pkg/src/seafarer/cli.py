"""Command-line interface: run experiments, serve labeling, mock search.

Subcommands: ``run``, ``serve``, ``mock-search``, ``synth-corpus``,
``summarize``.  ``SEAFARER_LOG`` sets the log level and
``SEAFARER_QUERY_CAP`` caps remote search queries per source.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from dataclasses import replace

from seafarer import metrics
from seafarer.config import ConfigError, ExperimentConfig, load_config, save_config
from seafarer.corpus import (
    Corpus,
    TagEmbeddings,
    load_corpus,
    load_embeddings,
    save_corpus,
    save_embeddings,
    synth_corpus,
)
from seafarer.engine import RunRecord, build_task, run
from seafarer.mockserver import serve_mock
from seafarer.search import BudgetMeter, CorpusSearchSource, RemoteSearchSource
from seafarer.service import HumanRunController, serve_labeling

log = logging.getLogger("seafarer")


def build_environment(cfg: ExperimentConfig) -> tuple[Corpus, TagEmbeddings]:
    """Materialize the corpus and tag embeddings a config describes."""
    if cfg.synth is not None:
        corpus, embeddings = synth_corpus(
            n_items=cfg.synth.n_items,
            n_tags=cfg.synth.n_tags,
            d=cfg.synth.d,
            k=cfg.synth.k,
            seed=cfg.synth.seed,
            cluster_spread=cfg.synth.cluster_spread,
        )
        if cfg.embeddings_path is not None:
            embeddings = load_embeddings(cfg.embeddings_path, cfg.default_embedding_policy)
        return corpus, embeddings
    corpus = load_corpus(cfg.corpus_path)
    if cfg.embeddings_path is not None:
        embeddings = load_embeddings(cfg.embeddings_path, cfg.default_embedding_policy)
    else:
        # No table shipped: fall back to deterministic per-tag vectors.
        embeddings = TagEmbeddings(k=8, table={}, default_policy="seeded_hash_gaussian")
    return corpus, embeddings


def make_source(cfg: ExperimentConfig, corpus: Corpus):
    if cfg.source.kind == "memory":
        return CorpusSearchSource(corpus)
    cap = os.environ.get("SEAFARER_QUERY_CAP")
    meter = BudgetMeter(query_cap=int(cap)) if cap else BudgetMeter()
    return RemoteSearchSource(cfg.source.endpoint, timeout=cfg.source.timeout, meter=meter)


def run_one(
    cfg: ExperimentConfig,
    corpus: Corpus,
    embeddings: TagEmbeddings,
    strategy: str,
    seed: int,
    checkpoint_path: str | None = None,
) -> RunRecord:
    """One (strategy, seed) run under a config."""
    oracle, initial, test_set = build_task(
        corpus,
        kind=cfg.task.kind,
        tag=cfg.task.tag,
        tau=cfg.task.tau,
        seed=seed,
        test_fraction=cfg.task.test_fraction,
    )
    source = make_source(cfg, corpus)
    retr = replace(cfg.retrieval, strategy=strategy, seed=seed)
    snapshot = cfg.to_dict()
    snapshot["retrieval"]["strategy"] = strategy
    snapshot["run_seed"] = seed
    return run(
        corpus=corpus,
        embeddings=embeddings,
        source=source,
        oracle=oracle,
        initial_labeled=initial,
        test_set=test_set,
        acq_cfg=cfg.acquisition,
        retr_cfg=retr,
        train_cfg=cfg.train,
        budget=cfg.budget,
        seed=seed,
        config_snapshot=snapshot,
        checkpoint_path=checkpoint_path,
    )


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | None = None,
    quiet: bool = False,
) -> dict[str, list[RunRecord]]:
    """Run every configured (strategy, seed) pair and write all artifacts.

    Returns the records grouped by strategy.  Artifacts: one RunRecord CSV
    plus sidecar config per run, a per-strategy summary, a combined
    ``summary.csv`` with one block per strategy, and ``config.json``.
    """
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    corpus, embeddings = build_environment(cfg)
    save_config(cfg, os.path.join(out_dir, "config.json"))

    results: dict[str, list[RunRecord]] = {}
    for strategy in cfg.strategies:
        records = []
        for seed in cfg.seeds:
            started = time.monotonic()
            record = run_one(cfg, corpus, embeddings, strategy, seed)
            record.to_csv(os.path.join(out_dir, f"{strategy}_seed{seed}.csv"))
            log.info(
                "%s seed=%d: final AUC %.4f (%.1fs)",
                strategy, seed, record.rows[-1].auc, time.monotonic() - started,
            )
            records.append(record)
        results[strategy] = records
        summary = metrics.summarize(records)
        metrics.write_summary_csv(summary, os.path.join(out_dir, f"summary_{strategy}.csv"))
        if not quiet:
            print(f"{strategy}: mean final AUC {summary.final_auc_mean:.4f} "
                  f"over {summary.n_runs} seed(s)")

    with open(os.path.join(out_dir, "summary.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["strategy", "iter", "mean_auc", "sd_auc", "n_runs"])
        for strategy in cfg.strategies:
            summary = metrics.summarize(results[strategy])
            for it, m, s, n in summary.rows():
                writer.writerow([strategy, it, repr(m), repr(s), n])
    return results


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if getattr(args, "strategy", None):
        cfg.strategies = [args.strategy]
    if getattr(args, "seed", None) is not None:
        cfg.seeds = [args.seed]
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    if getattr(args, "endpoint", None):
        cfg.source.kind = "remote"
        cfg.source.endpoint = args.endpoint
    cfg.validate()
    return cfg


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        run_experiment(cfg)
    except Exception as exc:
        log.error("run failed: %s", exc)
        return 1
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if cfg.oracle != "human":
        print("serve requires a config with \"oracle\": \"human\"", file=sys.stderr)
        return 2
    corpus, embeddings = build_environment(cfg)
    strategy = cfg.strategies[0]
    seed = cfg.seeds[0]
    os.makedirs(cfg.out_dir, exist_ok=True)
    # Ground truth from the configured task still defines the initial pair
    # and the evaluation split; the human supplies the loop labels.
    _, initial, test_set = build_task(
        corpus, kind=cfg.task.kind, tag=cfg.task.tag, tau=cfg.task.tau,
        seed=seed, test_fraction=cfg.task.test_fraction,
    )
    snapshot = cfg.to_dict()
    snapshot["retrieval"]["strategy"] = strategy
    snapshot["run_seed"] = seed
    controller = HumanRunController(
        run_kwargs=dict(
            corpus=corpus,
            embeddings=embeddings,
            source=make_source(cfg, corpus),
            initial_labeled=initial,
            test_set=test_set,
            acq_cfg=cfg.acquisition,
            retr_cfg=replace(cfg.retrieval, strategy=strategy, seed=seed),
            train_cfg=cfg.train,
            seed=seed,
            config_snapshot=snapshot,
            checkpoint_path=os.path.join(cfg.out_dir, f"{strategy}_seed{seed}.checkpoint.json"),
        ),
        budget=cfg.budget,
        csv_path=os.path.join(cfg.out_dir, f"{strategy}_seed{seed}.csv"),
    )
    host, port = _parse_bind(args.bind)
    service = serve_labeling(controller, host=host, port=port)
    print(f"labeling service on {service.url} (budget {cfg.budget}); Ctrl-C to stop")
    try:
        while not controller.done() and controller.error() is None:
            time.sleep(0.2)
        if controller.error() is not None:
            log.error("run failed: %s", controller.error())
            return 1
        print("budget exhausted; run trace written")
        return 0
    except KeyboardInterrupt:
        print("stopping (checkpoint retained)")
        return 0
    finally:
        service.stop()


def cmd_mock_search(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    host, port = _parse_bind(args.bind)
    server = serve_mock(corpus, host=host, port=port, latency=args.latency)
    print(f"mock search on {server.url} ({len(corpus)} items, "
          f"{len(corpus.tag_vocab)} tags); Ctrl-C to stop")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        return 0
    finally:
        server.stop()


def cmd_synth_corpus(args: argparse.Namespace) -> int:
    corpus, embeddings = synth_corpus(
        n_items=args.n_items,
        n_tags=args.n_tags,
        d=args.d,
        k=args.k,
        seed=args.seed,
        cluster_spread=args.cluster_spread,
    )
    os.makedirs(args.out, exist_ok=True)
    corpus_path = os.path.join(args.out, "corpus.jsonl")
    emb_path = os.path.join(args.out, "embeddings.txt")
    save_corpus(corpus, corpus_path)
    save_embeddings(embeddings, emb_path)
    print(f"wrote {corpus_path} ({len(corpus)} items) and {emb_path}")
    return 0


def cmd_summarize(args: argparse.Namespace) -> int:
    records = [RunRecord.from_csv(p) for p in args.csvs]
    summary = metrics.summarize(records)
    metrics.write_summary_csv(summary, args.out)
    print(f"{len(records)} run(s): mean final AUC {summary.final_auc_mean:.4f}, "
          f"label-efficiency index {summary.label_efficiency:.4f}")
    return 0


def _parse_bind(bind: str) -> tuple[str, int]:
    host, _, port = bind.rpartition(":")
    return host or "127.0.0.1", int(port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seafarer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured experiments")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--strategy", choices=["seafaring", "small_exact", "random"])
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out")
    p_run.add_argument("--endpoint", help="remote search endpoint override")
    p_run.set_defaults(func=cmd_run)

    p_serve = sub.add_parser("serve", help="serve the human labeling protocol")
    p_serve.add_argument("--config", required=True)
    p_serve.add_argument("--bind", default="127.0.0.1:8765")
    p_serve.add_argument("--strategy", choices=["seafaring", "small_exact", "random"])
    p_serve.add_argument("--seed", type=int)
    p_serve.add_argument("--out")
    p_serve.add_argument("--endpoint")
    p_serve.set_defaults(func=cmd_serve)

    p_mock = sub.add_parser("mock-search", help="serve the search protocol from a corpus file")
    p_mock.add_argument("corpus")
    p_mock.add_argument("--bind", default="127.0.0.1:8800")
    p_mock.add_argument("--latency", type=float, default=0.0)
    p_mock.set_defaults(func=cmd_mock_search)

    p_synth = sub.add_parser("synth-corpus", help="generate a synthetic corpus + embeddings")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--n-items", type=int, default=20000, dest="n_items")
    p_synth.add_argument("--n-tags", type=int, default=100, dest="n_tags")
    p_synth.add_argument("--d", type=int, default=16)
    p_synth.add_argument("--k", type=int, default=8)
    p_synth.add_argument("--seed", type=int, default=7)
    p_synth.add_argument("--cluster-spread", type=float, default=0.5, dest="cluster_spread")
    p_synth.set_defaults(func=cmd_synth_corpus)

    p_sum = sub.add_parser("summarize", help="aggregate run CSVs into a summary CSV")
    p_sum.add_argument("csvs", nargs="+")
    p_sum.add_argument("--out", required=True)
    p_sum.set_defaults(func=cmd_summarize)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("SEAFARER_LOG", "WARNING").upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
