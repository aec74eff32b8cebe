"""Command line entry point: ``drowsiness <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Failures print one JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import DrowsinessError, UsageError
from .features import AttributeSet, FeatureSpec
from .pipeline import (RunConfig, run_bench, run_featurize, run_index, run_perclos, run_subset,
                       run_train_eval)

log = logging.getLogger("drowsiness")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _attributes(value: str) -> list[AttributeSet]:
    try:
        return [AttributeSet(v.strip()) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (JSON)")
    common.add_argument("--out", help="output directory (default: config 'out' or ./out)")
    common.add_argument("--seed", type=int, help="seed for every stochastic stage")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="drowsiness", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("index", parents=[common], help="index a dataset directory")
    s.add_argument("root", nargs="?")
    s.add_argument("--layout", help="layout config (JSON)")

    s = sub.add_parser("subset", parents=[common], help="build the windowed train/test subset")
    s.add_argument("index", nargs="?", help="index file (default: OUT/index.json)")
    for flag in ("frame-min", "frame-max", "per-class", "split-frame", "window-len", "fold-size"):
        s.add_argument(f"--{flag}", type=int)

    for name, text in (("featurize", "write window-averaged feature matrices"),
                       ("train-eval", "train and score the attribute x classifier grid")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("subset", nargs="?", help="subset manifest (default: OUT/subset.json)")
        s.add_argument("--attributes", type=_attributes, help="comma list of AU,HOG,HOG_AND_AU")
        s.add_argument("--no-presence", action="store_true", help="AU block without presence flags")
        if name == "train-eval":
            s.add_argument("--classifiers", help="comma list of classifier names from the grid")
            s.add_argument("--repeats", type=int)

    s = sub.add_parser("perclos", parents=[common], help="PERCLOS (P70/P80/EM) per recording")
    s.add_argument("index", nargs="?", help="index file (default: OUT/index.json)")
    s.add_argument("--window-s", type=float)
    s.add_argument("--stride-s", type=float)
    s.add_argument("--closure-mode", choices=("intensity", "presence"))

    s = sub.add_parser("bench", parents=[common], help="single-sample prediction latency")
    s.add_argument("model")
    s.add_argument("features")
    s.add_argument("--repeats", type=int)
    return p


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config)
    if args.out is not None:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.subset = replace(cfg.subset, seed=cfg.seed)
    return cfg


def _features(args, cfg: RunConfig) -> list[FeatureSpec]:
    specs = cfg.features
    if args.attributes:
        specs = [FeatureSpec(a) for a in args.attributes]
    if args.no_presence:
        specs = [replace(s, include_presence=False) for s in specs]
    return specs


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = _config(args)
    out = Path(cfg.out)
    result: dict = {}
    status = 0
    if args.command == "index":
        root = args.root or cfg.dataset_root
        if root is None:
            raise UsageError("index needs a dataset root")
        index = run_index(root, args.layout or cfg.layout, out)
        result = {"recordings": len(index.recordings), "manifest": str(out / "index.json")}
    elif args.command == "subset":
        overrides = {k: getattr(args, k) for k in
                     ("frame_min", "frame_max", "per_class", "split_frame", "window_len", "fold_size")
                     if getattr(args, k) is not None}
        spec = replace(cfg.subset, **overrides)
        doc = run_subset(args.index or out / "index.json", spec, out)
        result = {"samples": len(doc["samples"]), "n_train": doc["n_train"], "n_test": doc["n_test"],
                  "shortfall": doc["shortfall"], "manifest": str(out / "subset.json")}
    elif args.command == "featurize":
        mats = run_featurize(args.subset or out / "subset.json", _features(args, cfg), out)
        result = {tag: list(m.shape) for tag, m in mats.items()}
    elif args.command == "train-eval":
        cfg.features = _features(args, cfg)
        if args.classifiers:
            wanted = [c.strip() for c in args.classifiers.split(",")]
            known = {c["name"]: c for c in cfg.classifiers}
            missing = [w for w in wanted if w not in known]
            if missing:
                raise UsageError(f"unknown classifier(s) {missing}; grid has {sorted(known)}")
            cfg.classifiers = [known[w] for w in wanted]
        if args.repeats is not None:
            cfg.repeats = args.repeats
        rows = run_train_eval(args.subset or out / "subset.json", cfg, out)
        failed = sum(r["status"] != "ok" for r in rows)
        result = {"rows": len(rows), "failed": failed, "report": str(out / "report.csv")}
        status = 2 if failed else 0
    elif args.command == "perclos":
        summary = run_perclos(args.index or out / "index.json", args.window_s or cfg.window_s,
                              args.stride_s if args.stride_s is not None else cfg.stride_s,
                              args.closure_mode or cfg.closure_mode, out)
        failed = sum(r["error"] is not None for r in summary["recordings"])
        result = {"recordings": len(summary["recordings"]), "failed": failed}
        status = 2 if failed else 0
    elif args.command == "bench":
        result = run_bench(args.model, args.features, args.repeats or cfg.repeats, out)
    print(json.dumps(result, sort_keys=True))
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        code = run(argv)
    except DrowsinessError as exc:
        print(json.dumps(exc.record(), sort_keys=True), file=sys.stderr)
        code = exc.exit_code
    except SystemExit as exc:  # --help
        code = exc.code if isinstance(exc.code, int) else 0
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 3}), file=sys.stderr)
        code = 3
    return code


if __name__ == "__main__":
    sys.exit(main())
