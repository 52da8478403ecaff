"""
entailkit command line

Exit codes: 0 success, 1 validation or usage error (or a failed check),
2 internal error. Logs go to stderr at ENTAILKIT_LOG_LEVEL (default INFO).
"""

import os
import sys
import json
import logging
import argparse
from pathlib import Path
from typing import Any, Sequence

from dotenv import load_dotenv

from ..models.errors import EntailKitValidationError
from ..utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-4


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="entailkit", description="Entailment-enhanced image-text retrieval at desk scale")
    parser.add_argument("--config", "-c", help="Flat key=value (or flat YAML) config file")
    subparsers = parser.add_subparsers(dest="command", required=True)

    synth = subparsers.add_parser("synth", help="Generate a planted-cluster corpus")
    synth.add_argument("--out", "-o", required=True, help="Output directory (one subdirectory per split)")
    synth.add_argument("--split", choices=["train", "val", "test", "all"], default="all")
    synth.add_argument("--seed", type=int)

    train_entail = subparsers.add_parser("train-entail", help="Train the multi-modal entailment classifier")
    train_entail.add_argument("--corpus", required=True, help="Training manifest with an oracle sidecar")
    train_entail.add_argument("--out", "-o", required=True, help="Checkpoint path")
    train_entail.add_argument("--test", help="Held-out manifest; prints per-branch metrics")
    train_entail.add_argument("--seed", type=int)

    revise = subparsers.add_parser("revise", help="Add classifier-judged weak edges to a corpus")
    revise.add_argument("--corpus", required=True)
    revise.add_argument("--classifier", required=True, help="Entailment checkpoint, or 'oracle'")
    revise.add_argument("--out", "-o", required=True, help="Revised manifest path")
    revise.add_argument("--verdicts", help="Write every verdict as JSON lines")
    revise.add_argument("--threshold", type=float)
    revise.add_argument("--seed", type=int)

    train_retrieval = subparsers.add_parser("train-retrieval", help="Train a dual-encoder retrieval model")
    train_retrieval.add_argument("--corpus", required=True, help="(Revised) training manifest")
    train_retrieval.add_argument("--out", "-o", required=True, help="Checkpoint path")
    train_retrieval.add_argument("--strategy", choices=["on", "off"], default="on")
    train_retrieval.add_argument("--alpha", type=float)
    train_retrieval.add_argument("--seed", type=int)

    rank = subparsers.add_parser("rank", help="Rank a corpus with a retrieval checkpoint")
    rank.add_argument("--model", required=True)
    rank.add_argument("--corpus", required=True)
    rank.add_argument("--out", "-o", required=True, help="Directory for text.jsonl and image.jsonl")
    rank.add_argument("--depth", type=int, help="Keep only the top items per query")

    evaluate = subparsers.add_parser("eval", help="Score run files and write a MetricsReport")
    evaluate.add_argument("--corpus", required=True)
    evaluate.add_argument("--run", action="append", default=[], help="Run file (repeatable)")
    evaluate.add_argument("--out", "-o", required=True, help="Report JSON path; CSV and SVG are written next to it")
    evaluate.add_argument(
        "--relation", default="oracle",
        help="Entail@K relation: 'oracle', 'none', or a verdict / weak-edge label file",
    )
    evaluate.add_argument("--manual", help="Human label file (weak-edge format) for E@M")
    evaluate.add_argument("--seed", type=int)

    stats = subparsers.add_parser("stats", help="Many-to-many statistics of a corpus")
    stats.add_argument("--corpus", required=True)
    stats.add_argument("--out", "-o", help="Also write the statistics as JSON")

    gradcheck = subparsers.add_parser("gradcheck", help="Finite-difference gradient suite")
    gradcheck.add_argument("--seeds", type=int, default=20, help="Number of seeds")
    gradcheck.add_argument("--seed", type=int, default=0, help="First seed")
    gradcheck.add_argument("--eps", type=float, default=1e-6)

    experiment = subparsers.add_parser("experiment", help="Full pipeline over several seeds, strategy on and off")
    experiment.add_argument("--out", "-o", required=True)
    experiment.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    experiment.add_argument("--classifier", choices=["model", "oracle"], default="model")

    return parser


def _config(args: argparse.Namespace, **overrides: Any):
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return ConfigManager.resolve(args.config, overrides)


def _print_json(data: Any) -> None:
    print(json.dumps(data, sort_keys=True, indent=2))


# ========== Subcommands ==========

def cmd_synth(args: argparse.Namespace) -> int:
    from ..pipelines import stages

    config = _config(args)
    splits = ("train", "val", "test") if args.split == "all" else (args.split,)
    _print_json(stages.synthesize(config, config["seed"], args.out, splits))
    return 0


def cmd_train_entail(args: argparse.Namespace) -> int:
    from ..pipelines import stages

    config = _config(args)
    results = stages.train_classifier(config, config["seed"], args.corpus, args.out, args.test)
    if results:
        _print_json(results)
    return 0


def cmd_revise(args: argparse.Namespace) -> int:
    from ..pipelines import stages

    config = _config(args, threshold=args.threshold)
    classifier = stages.load_classifier(args.classifier, args.corpus)
    _print_json(stages.revise(config, config["seed"], args.corpus, classifier, args.out, args.verdicts))
    return 0


def cmd_train_retrieval(args: argparse.Namespace) -> int:
    from ..pipelines import stages

    config = _config(args, alpha=args.alpha)
    stages.train_retriever(config, config["seed"], args.corpus, args.strategy, args.out)
    print(args.out)
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    from ..pipelines import stages

    _print_json(stages.rank(args.model, args.corpus, args.out, args.depth))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    from ..pipelines import stages
    from .tables import metrics_frame, plot_metric_bars, pretty_table, summary_frame, write_csv

    if not args.run:
        logger.error("eval needs at least one --run file")
        return 1
    config = _config(args)
    relation = None if args.relation == "none" else args.relation
    report = stages.evaluate(config, config["seed"], args.corpus, args.run, args.out, relation, args.manual)

    out = Path(args.out)
    frame = metrics_frame({"run": report["metrics"]})
    write_csv(frame, out.with_suffix(".csv"))
    summary = {"run": {name: {"mean": v, "std": 0.0, "n": 1.0} for name, v in report["metrics"].items()}}
    plot_metric_bars(summary_frame(summary), out.with_suffix(".svg"), title="Retrieval metrics")
    print(pretty_table(frame.T), end="")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    from ..datapipe import corpus_stats, load_corpus
    from ..utils.jsonl import write_json

    stats = corpus_stats(load_corpus(args.corpus))
    if args.out:
        write_json(args.out, stats)
    _print_json(stats)
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    from ..entailment.gradcheck import run_gradcheck

    if args.seeds < 1:
        raise EntailKitValidationError(f"--seeds must be >= 1, got {args.seeds}")
    worst = run_gradcheck(list(range(args.seed, args.seed + args.seeds)), eps=args.eps)
    for name in sorted(worst):
        print(f"{name:24s} {worst[name]:.3e}")
    max_error = max(worst.values())
    print(f"max relative error {max_error:.3e}")
    return 0 if max_error < GRADCHECK_TOLERANCE else 1


def cmd_experiment(args: argparse.Namespace) -> int:
    from ..pipelines.experiment import create_experiment_graph

    graph = create_experiment_graph()
    request = {"seeds": args.seeds, "output_dir": args.out, "classifier": args.classifier}
    if args.config:
        request["config_path"] = args.config
    result = graph.invoke(request)
    if result["status"] != "completed":
        logger.error(f"Experiment rejected: {result.get('reason')}")
        return 1
    print(Path(result["summary_paths"]["table"]).read_text(encoding="utf-8"), end="")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "train-entail": cmd_train_entail,
    "revise": cmd_revise,
    "train-retrieval": cmd_train_retrieval,
    "rank": cmd_rank,
    "eval": cmd_eval,
    "stats": cmd_stats,
    "gradcheck": cmd_gradcheck,
    "experiment": cmd_experiment,
}


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=os.getenv("ENTAILKIT_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return COMMANDS[args.command](args)
    except (EntailKitValidationError, FileNotFoundError) as e:
        logger.error(f"{args.command}: {e}")
        return 1
    except Exception as e:
        logger.exception(f"{args.command}: internal error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
