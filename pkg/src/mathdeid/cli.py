"""Command-line surface for the de-identification pipeline.

Every run that writes an artifact also writes a manifest alongside it,
embedding the resolved configuration and sha256 hashes of the inputs, so
offline runs are reproducible from the manifest alone.

Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import CorpusError, load_corpus, write_corpus, corpus_stats
from .embeddings import CachingEmbedder, make_embedder
from .evaluation import MatchPolicy, bootstrap_ci, evaluate
from .llm import (
    ChatGatewayClient,
    GatewayAbort,
    PromptVariant,
    ReplayClient,
    ResponseLog,
    detect_llm_corpus,
)
from .optimizer import (
    DEFAULT_ANCHOR_RANGE,
    DEFAULT_SIM_RANGE,
    evaluate_grid,
    grid_to_csv,
    select_thresholds,
)
from .recognizers import detect_baseline_corpus, load_recognizers, resolve_ner
from .report import render_metrics_table, render_segment_table, render_type_table, strata_csv
from .results import load_results, write_results
from .segmentation import (
    Thresholds,
    label_corpus,
    load_labeling,
    math_token_share,
    write_labeling,
)
from .surrogation import (
    SurrogationError,
    apply_surrogates,
    audit_corpus,
    close_iteration,
    ledger_to_csv,
    load_items,
    write_items,
)
from .vocabulary import load_vocabulary
from .events import load_review_state


class CliError(ValueError):
    """Validation problem; maps to exit code 1."""


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path: str | Path, command: str, config: dict, inputs: list) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs if p and Path(p).exists()},
    }
    with open(f"{out_path}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_range(text: str) -> list[float]:
    """start:stop:step, inclusive of stop up to float fuzz."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise CliError(f"bad range {text!r}; expected start:stop:step")
    if step <= 0 or stop < start:
        raise CliError(f"bad range {text!r}")
    values = []
    x = start
    while x <= stop + 1e-9:
        values.append(round(x, 10))
        x += step
    return values


def _make_client(args):
    if getattr(args, "replay", None):
        return ReplayClient(args.replay, model_id=getattr(args, "model", None) or "replay")
    return ChatGatewayClient(model_id=getattr(args, "model", None))


def cmd_segment(args) -> int:
    vocab = load_vocabulary(args.vocab)
    corpus = load_corpus(args.input)
    embedder = CachingEmbedder(make_embedder(args.embedder))
    labeling = label_corpus(corpus, vocab, Thresholds(args.t_anchor, args.t_sim), embedder)
    write_labeling(labeling, args.out)
    _write_manifest(args.out, "segment", vars(args) | {"func": None}, [args.input, args.vocab])
    print(f"labeled {sum(len(v) for v in labeling.labels.values())} messages; "
          f"MATH share: {labeling.math_message_share():.3f} of messages, "
          f"{math_token_share(corpus, labeling):.3f} of tokens")
    return 0


def cmd_optimize(args) -> int:
    vocab = load_vocabulary(args.vocab)
    corpus = load_corpus(args.input)
    items = load_review_state(args.store, args.events)
    verdicts = {}
    for item in items:
        if item.start is not None and item.end is not None and not item.discovered:
            verdicts[(item.session_id, item.message_index, item.start, item.end)] = item.evaluation
    embedder = CachingEmbedder(make_embedder(args.embedder))
    anchor_range = _parse_range(args.anchor_range) if args.anchor_range else DEFAULT_ANCHOR_RANGE
    sim_range = _parse_range(args.sim_range) if args.sim_range else DEFAULT_SIM_RANGE
    grid = evaluate_grid(
        corpus, verdicts, vocab, embedder,
        anchor_range=anchor_range, sim_range=sim_range, uncertain=args.uncertain,
    )
    Path(args.out).write_text(grid_to_csv(grid), encoding="utf-8")
    _write_manifest(args.out, "optimize", vars(args) | {"func": None},
                    [args.input, args.store, args.vocab])
    best = select_thresholds(grid)
    print(f"selected thresholds: t_anchor={best.anchor:g} t_sim={best.similarity:g}")
    return 0


def cmd_detect(args) -> int:
    corpus = load_corpus(args.input)
    if args.engine == "baseline":
        recognizers = load_recognizers(args.recognizers) if args.recognizers else None
        ner = resolve_ner(args.ner)
        results = detect_baseline_corpus(corpus, recognizers, ner)
    else:
        variant = PromptVariant.parse(args.prompt)
        labeling = None
        if variant is PromptVariant.SEGMENT_AWARE:
            if not args.segments:
                raise CliError("--prompt segment requires --segments with a labeling file")
            labeling = load_labeling(args.segments)
        client = _make_client(args)
        log = ResponseLog(args.record) if args.record else None
        try:
            results = detect_llm_corpus(
                corpus, variant, client,
                labeling=labeling,
                concurrency_limit=args.concurrency,
                response_log=log,
            )
        except GatewayAbort as exc:
            print(f"aborted: {exc}", file=sys.stderr)
            return 2
    write_results(results, args.out)
    config = vars(args) | {"func": None}
    if args.engine == "llm":
        from .llm.client import DETERMINISTIC_DECODING

        config["decoding"] = DETERMINISTIC_DECODING
    _write_manifest(args.out, "detect", config,
                    [args.input, args.segments, args.recognizers, args.replay])
    detections = sum(len(m.detections) for r in results for m in r.messages)
    print(f"{results[0].engine if results else args.engine}: {detections} detections "
          f"across {len(results)} transcripts")
    return 0


def cmd_evaluate(args) -> int:
    corpus = load_corpus(args.gold)
    results = load_results(args.pred)
    policy = MatchPolicy.parse(args.policy)
    labeling = load_labeling(args.segments) if args.segments else None
    report = evaluate(corpus, results, policy, labeling, with_segments=labeling is not None)
    if args.bootstrap:
        report.cis = bootstrap_ci(corpus, results, policy, iterations=args.bootstrap, seed=args.seed)
    payload = report.to_dict()
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    _write_manifest(args.out, "evaluate", vars(args) | {"func": None},
                    [args.gold, args.pred, args.segments])
    name = report.engine
    print(render_metrics_table([(name, report)]))
    if report.per_segment:
        print()
        print(render_segment_table([(name, report)]))
    return 0


def cmd_report(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        raw = json.load(fh)
    from .evaluation import BootstrapCI, EvalReport, MetricSet

    def mset(d):
        return MetricSet(d["tp"], d["fp"], d["fn"])

    report = EvalReport(
        engine=raw["engine"],
        policy=MatchPolicy.parse(raw["policy"]),
        overall=mset(raw["overall"]),
        per_type={k: mset(v) for k, v in raw["per_type"].items()},
        per_segment={k: mset(v) for k, v in raw["per_segment"].items()} if raw.get("per_segment") else None,
        per_transcript={k: mset(v) for k, v in raw.get("per_transcript", {}).items()},
        cis={
            k: BootstrapCI(k, v["lower"], v["upper"], v["iterations"], v["seed"])
            for k, v in raw["cis"].items()
        } if raw.get("cis") else None,
    )
    if args.format == "csv":
        text = strata_csv(report)
    else:
        sections = [render_metrics_table([(report.engine, report)])]
        if report.per_segment:
            sections.append(render_segment_table([(report.engine, report)]))
        sections.append(render_type_table(report))
        text = "\n\n".join(sections) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _write_manifest(args.out, "report", vars(args) | {"func": None}, [args.report])
    else:
        print(text, end="")
    return 0


def cmd_audit(args) -> int:
    corpus = load_corpus(args.input)
    client = _make_client(args)
    log = ResponseLog(args.record) if args.record else None
    items = audit_corpus(corpus, client, context_radius=args.context_radius,
                         response_log=log, iteration=args.iteration)
    write_items(items, args.out)
    _write_manifest(args.out, "audit", vars(args) | {"func": None}, [args.input, args.replay])
    print(f"audited {len(corpus)} transcripts -> {len(items)} annotation items")
    return 0


def cmd_apply_surrogates(args) -> int:
    corpus = load_corpus(args.input)
    items = load_review_state(args.store, args.events)
    if args.close_iteration:
        close_iteration(items, args.close_iteration)
    apply_items = [i for i in items if i.status in ("APPROVED", "OVERRIDDEN")]
    skipped = len(items) - len(apply_items)
    benchmark, ledger = apply_surrogates(corpus, apply_items)
    write_corpus(benchmark, args.out)
    Path(args.ledger).write_text(ledger_to_csv(ledger), encoding="utf-8")
    _write_manifest(args.out, "apply-surrogates", vars(args) | {"func": None},
                    [args.input, args.store, args.events])
    stats = corpus_stats(benchmark)
    print(f"benchmark written: {stats['labels']} labels "
          f"({len(ledger)} actions, {skipped} items not applied)")
    return 0


def cmd_review_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.corpus, args.store, args.events, ui_dir=args.ui, token=args.token)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mathdeid",
        description="PII detection and de-identification for math tutoring transcripts",
    )
    parser.add_argument("--version", action="version", version=f"mathdeid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="label corpus messages MATH / NON-MATH")
    p.add_argument("--input", required=True)
    p.add_argument("--vocab", default=None, help="vocabulary JSON (default: shipped)")
    p.add_argument("--t-anchor", type=float, default=0.05)
    p.add_argument("--t-sim", type=float, default=0.3)
    p.add_argument("--embedder", default="hashed", help="hashed[:dim] or minilm")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("optimize", help="grid-search segmentation thresholds")
    p.add_argument("--input", required=True)
    p.add_argument("--store", required=True, help="annotation items with audit verdicts")
    p.add_argument("--events", default=None)
    p.add_argument("--vocab", default=None)
    p.add_argument("--embedder", default="hashed")
    p.add_argument("--anchor-range", default=None, help="start:stop:step (default 0.05:0.10:0.01)")
    p.add_argument("--sim-range", default=None, help="start:stop:step (default 0:0.5:0.1)")
    p.add_argument("--uncertain", choices=["exclude", "pii", "not_pii"], default="exclude")
    p.add_argument("--out", required=True, help="CSV heatmap table")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("detect", help="run a detection engine over a corpus")
    p.add_argument("--engine", choices=["baseline", "llm"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--recognizers", default=None, help="recognizer config JSON (baseline)")
    p.add_argument("--ner", default=None, help="NER provider id, e.g. spacy:en_core_web_lg")
    p.add_argument("--prompt", default="basic", help="basic | math | segment (llm)")
    p.add_argument("--segments", default=None, help="labeling JSONL (segment prompt)")
    p.add_argument("--model", default=None)
    p.add_argument("--replay", default=None, help="archived response log for offline runs")
    p.add_argument("--record", default=None, help="archive responses to this log")
    p.add_argument("--concurrency", type=int, default=8)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score a detection run against gold labels")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--segments", default=None)
    p.add_argument("--policy", default="text", help="text | overlap")
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--seed", type=int, default=17)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render a saved evaluation report")
    p.add_argument("--report", required=True)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("audit", help="LLM audit pass over upstream redactions")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--replay", default=None)
    p.add_argument("--record", default=None)
    p.add_argument("--context-radius", type=int, default=3)
    p.add_argument("--iteration", type=int, default=1)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("apply-surrogates", help="build the benchmark from approved items")
    p.add_argument("--input", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--events", default=None)
    p.add_argument("--close-iteration", type=int, default=None,
                   help="fold votes into statuses for this iteration first")
    p.add_argument("--out", required=True)
    p.add_argument("--ledger", required=True)
    p.set_defaults(func=cmd_apply_surrogates)

    p = sub.add_parser("review-serve", help="start the annotation review API")
    p.add_argument("--corpus", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--token", default=None, help="shared token required in X-Auth-Token")
    p.set_defaults(func=cmd_review_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract says 1
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (CliError, CorpusError, SurrogationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
