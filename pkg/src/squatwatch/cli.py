"""Command-line interface.

Subcommands: ingest, train, index, scan, scan-all, eval, gridsearch,
fit-weights, serve. Exit codes: 0 success, 1 operational error, 2 usage
error. Operational errors print one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .alerts import draft_to_json, report_to_json
from .benignity import RuleOutcome, fit_rule_weights
from .config import load_config
from .embedder import TrainingParams, save_model, train
from .errors import SquatwatchError
from .evaluation import grid_search_threshold, load_eval_records, load_scored_pairs
from .pipeline import Pipeline
from .registry import RegistryId
from .server import AlertServer
from .store import iter_jsonl

logger = logging.getLogger(__name__)

TRAIN_EPOCHS_DEFAULT = 8


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squatwatch",
        description="Detect package-confusion threats across package registries.",
    )
    parser.add_argument("--config", help="path to the service config file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a metadata snapshot dump")
    p.add_argument("--registry", required=True)
    p.add_argument("--file", required=True)

    p = sub.add_parser("train", help="train the name embedding model")
    p.add_argument("--corpus", help="name-per-line file; default: all stored names")
    p.add_argument("--epochs", type=int, default=TRAIN_EPOCHS_DEFAULT)
    p.add_argument("--dimension", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("index", help="build the ANN index over the trusted set")
    p.add_argument("--registry", required=True)

    p = sub.add_parser("scan", help="scan one package (read-only)")
    p.add_argument("--registry", required=True)
    p.add_argument("--package", required=True)

    p = sub.add_parser("scan-all", help="scan a whole registry and persist alerts")
    p.add_argument("--registry", required=True)

    p = sub.add_parser("eval", help="evaluate labeled (suspect, target) pairs")
    p.add_argument("--dataset", required=True)

    p = sub.add_parser("gridsearch", help="sweep similarity thresholds for F1")
    p.add_argument("--dataset", required=True)

    p = sub.add_parser("fit-weights", help="fit benignity rule weights by CV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--static-dir")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config)
        config.workspace.mkdir(parents=True, exist_ok=True)
        return _dispatch(args, config)
    except SquatwatchError as exc:
        _fail(type(exc).__name__, str(exc))
        return 1
    except (OSError, ValueError) as exc:
        _fail(type(exc).__name__, str(exc))
        return 1


def _fail(code: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")


def _dispatch(args: argparse.Namespace, config) -> int:
    command = args.command

    if command == "ingest":
        pipeline = Pipeline(config)
        info = pipeline.store.ingest_snapshot(
            RegistryId.parse(args.registry), iter_jsonl(args.file)
        )
        print(
            json.dumps(
                {
                    "registry": info.registry.value,
                    "package_count": info.package_count,
                    "skipped": info.skipped,
                    "ingested_at": info.ingested_at.isoformat(),
                }
            )
        )
        return 0

    if command == "train":
        pipeline = Pipeline(config)
        if args.corpus:
            names = [
                line.strip()
                for line in Path(args.corpus).read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        else:
            names = [
                meta.ref.raw
                for registry in RegistryId
                for meta in pipeline.store.packages(registry)
            ]
        params = TrainingParams(
            seed=args.seed, epochs=args.epochs, dimension=args.dimension
        )
        model = train(names, params)
        save_model(model, config.model_path)
        print(
            json.dumps(
                {
                    "names": len(names),
                    "dimension": model.dimension,
                    "epoch_losses": [round(l, 4) for l in model.epoch_losses],
                    "model_path": str(config.model_path),
                }
            )
        )
        return 0

    if command == "index":
        pipeline = Pipeline(config)
        registry = RegistryId.parse(args.registry)
        index = pipeline.build_index(registry)
        print(
            json.dumps(
                {
                    "registry": registry.value,
                    "entries": len(index),
                    "index_path": str(config.index_path(registry)),
                }
            )
        )
        return 0

    if command == "scan":
        pipeline = Pipeline(config)
        registry = RegistryId.parse(args.registry)
        draft, reports = pipeline.scan_one(registry, args.package)
        payload = {"package": args.package, "registry": registry.value}
        if draft is None:
            payload["flagged"] = False
        else:
            payload["flagged"] = True
            payload["draft"] = draft_to_json(draft)
            payload["reports"] = [report_to_json(r) for r in reports]
        print(json.dumps(payload))
        return 0

    if command == "scan-all":
        pipeline = Pipeline(config)
        summary = pipeline.run_full_scan(RegistryId.parse(args.registry))
        print(json.dumps(summary.as_dict()))
        return 0

    if command == "eval":
        pipeline = Pipeline(config)
        table = pipeline.evaluate(load_eval_records(args.dataset))
        print(json.dumps(table.as_dict()))
        return 0

    if command == "gridsearch":
        result = grid_search_threshold(load_scored_pairs(args.dataset))
        print(
            json.dumps(
                {
                    "best_threshold": result.best_threshold,
                    "best_f1": result.best_f1,
                    "curve": [[t, round(f, 6)] for t, f in result.curve],
                }
            )
        )
        return 0

    if command == "fit-weights":
        labeled = []
        for line in Path(args.dataset).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            data = json.loads(line)
            outcome = RuleOutcome()
            for directive, value in data["directives"].items():
                outcome.directives[directive] = value
            labeled.append((outcome, data["label"]))
        weights = fit_rule_weights(labeled, folds=args.folds, seed=args.seed)
        weights.save(args.out)
        print(
            json.dumps(
                {
                    "decision_threshold": weights.decision_threshold,
                    "fold_metrics": weights.fold_metrics,
                    "weights_path": args.out,
                }
            )
        )
        return 0

    if command == "serve":
        pipeline = Pipeline(config)
        server = AlertServer(
            pipeline,
            host=args.host or config.server.host,
            port=args.port if args.port is not None else config.server.port,
            static_dir=args.static_dir or (config.server.static_dir or None),
        )
        print(json.dumps({"listening": f"http://{server.host}:{server.port}"}))
        sys.stdout.flush()
        server.serve_forever()
        return 0

    raise ValueError(f"unknown command: {command}")  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
