"""Command-line interface.

Subcommands: extract (triplets as JSON lines), graph (DOT or stats),
train, eval, predict.  Exit codes: 0 success, 2 validation/configuration
error, 3 numeric abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .autodiff import NonFiniteError
from .config import ABLATION_FLAGS, ModelConfig
from .corpus import (
    DatasetParseError,
    DatasetValidationError,
    EmbeddingCoverageError,
    EmbeddingDimensionError,
    EmbeddingFormatError,
    load_dataset,
)
from .extraction import extract_triplets
from .supergraph import export_dot, graph_stats, supergraph_for_example
from . import training

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

_VALIDATION_ERRORS = (
    DatasetParseError,
    DatasetValidationError,
    EmbeddingCoverageError,
    EmbeddingDimensionError,
    EmbeddingFormatError,
    ValueError,
    FileNotFoundError,
)


def _load_config(args):
    config = ModelConfig.from_file(args.config) if args.config else ModelConfig()
    if args.seed is not None:
        config = ModelConfig.from_dict({**config.to_dict(), "seed": args.seed})
    if args.ablate:
        names = [n.strip() for n in args.ablate.split(",") if n.strip()]
        config = config.with_ablations(names)
    return config


def _open_out(path):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def cmd_extract(args):
    examples = load_dataset(args.data)
    if args.validate_only:
        print(f"ok: {len(examples)} examples validated")
        return EXIT_OK
    out = _open_out(args.out)
    try:
        for ex in examples:
            sentences = {s.sent_id: s for s in ex.all_sentences()}
            units = []
            for sent in ex.context_sentences:
                units.extend(extract_triplets(sent, source="context"))
            for oi, option in enumerate(ex.options):
                for sent in option:
                    units.extend(extract_triplets(sent, source=f"option:{oi}"))
            for t in units:
                rec = {"example_id": ex.example_id, "source": t.source}
                for role, span in (
                    ("subject", t.subject),
                    ("predicate", t.predicate),
                    ("object", t.object),
                ):
                    sent = sentences[span.sent_id]
                    rec[role] = {
                        "sent_id": span.sent_id,
                        "span": [span.start, span.end],
                        "text": sent.surface((span.start, span.end)),
                    }
                out.write(json.dumps(rec) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_graph(args):
    config = _load_config(args)
    examples = load_dataset(args.data)
    flags = config.ablations
    out = _open_out(args.out)
    try:
        for ex in examples:
            if args.stats:
                for oi in range(4):
                    sg, ctx, opt = supergraph_for_example(
                        ex,
                        oi,
                        include_global=not flags.no_global_atom,
                        include_coref=not flags.no_coref,
                        entity_only=flags.entity_only,
                    )
                    rec = {"example_id": ex.example_id, "option": oi}
                    rec.update(graph_stats(sg))
                    rec["context_facts"] = len(ctx)
                    rec["option_facts"] = len(opt)
                    out.write(json.dumps(rec) + "\n")
            else:
                sg, _, _ = supergraph_for_example(
                    ex,
                    args.option,
                    include_global=not flags.no_global_atom,
                    include_coref=not flags.no_coref,
                    entity_only=flags.entity_only,
                )
                out.write(f"// {ex.example_id} option {args.option}\n")
                out.write(export_dot(sg) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_train(args):
    config = _load_config(args)
    examples = load_dataset(args.data)
    dev = load_dataset(args.dev) if args.dev else None
    result, _model = training.train(
        config,
        examples,
        dev_examples=dev,
        checkpoint_path=args.out,
        log_path=args.log,
    )
    print(
        json.dumps(
            {
                "best_dev_acc": result.best_dev_acc,
                "epochs_run": result.epochs_run,
                "checkpoint": str(result.checkpoint_path) if result.checkpoint_path else None,
            }
        )
    )
    return EXIT_OK


def _model_for_inference(args):
    ckpt = training.load_checkpoint(args.checkpoint)
    examples = load_dataset(args.data)
    emb = training.load_embedding_file_for(ckpt.config, examples)
    return training.model_from_checkpoint(ckpt, embedding_file=emb), examples


def cmd_eval(args):
    model, examples = _model_for_inference(args)
    result = training.evaluate(model, examples)
    print(json.dumps({"accuracy": result.accuracy, "n": result.n, "per_type": result.per_type}))
    return EXIT_OK


def cmd_predict(args):
    model, examples = _model_for_inference(args)
    records = training.predict(model, examples)
    if args.out:
        training.write_jsonl(records, args.out)
    else:
        for rec in records:
            print(json.dumps(rec))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="focal",
        description="Fact-driven logical reasoning over parsed multiple-choice datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_checkpoint=False):
        p.add_argument("--data", required=True, help="dataset JSON file")
        p.add_argument("--config", help="config JSON file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument(
            "--ablate",
            help=f"comma-separated ablation flags ({', '.join(ABLATION_FLAGS)})",
        )
        if needs_checkpoint:
            p.add_argument("--checkpoint", required=True, help="checkpoint .npz")

    p_extract = sub.add_parser("extract", help="write extracted triplets as JSON lines")
    common(p_extract)
    p_extract.add_argument("--out", help="output path (default stdout)")
    p_extract.add_argument(
        "--validate-only",
        action="store_true",
        help="only validate the dataset against the schema",
    )
    p_extract.set_defaults(fn=cmd_extract)

    p_graph = sub.add_parser("graph", help="emit supergraphs as DOT or count stats")
    common(p_graph)
    p_graph.add_argument("--dot", action="store_true", help="emit GraphViz DOT (default)")
    p_graph.add_argument("--stats", action="store_true", help="emit node/edge counts as JSON lines")
    p_graph.add_argument("--option", type=int, default=0, choices=range(4))
    p_graph.add_argument("--out", help="output path (default stdout)")
    p_graph.set_defaults(fn=cmd_graph)

    p_train = sub.add_parser("train", help="train a model")
    common(p_train)
    p_train.add_argument("--dev", help="dev dataset JSON (defaults to the training set)")
    p_train.add_argument("--out", help="checkpoint output path (.npz)")
    p_train.add_argument("--log", help="metrics log output path (JSON lines)")
    p_train.set_defaults(fn=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    common(p_eval, needs_checkpoint=True)
    p_eval.set_defaults(fn=cmd_eval)

    p_predict = sub.add_parser("predict", help="write predictions for a dataset")
    common(p_predict, needs_checkpoint=True)
    p_predict.add_argument("--out", help="predictions output path (JSON lines)")
    p_predict.set_defaults(fn=cmd_predict)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (training.NumericAbort, NonFiniteError) as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
