"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 property-suite
failure.  Machine-readable JSON goes to stdout, human-readable summaries to
stderr.  Every run echoes its fully resolved configuration: gen into the
dataset header, the directory-producing commands into config.json in their
output directory.  --threads is accepted for interface stability; the
compute path is sequential, so results never depend on it.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import checks, report
from .gnn import load_model, save_model
from .graphs import (
    Dataset,
    DatasetConfig,
    EditCosts,
    edit_distance,
    make_dataset,
    read_dataset,
    write_dataset,
)
from .tensor import DenseTensor
from .train import TrainConfig, evaluate_mse, fit, write_metrics

_TASK_ALIASES = {"diameter": ("diameter",), "ecc": ("eccentricity",),
                 "both": ("diameter", "eccentricity")}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2; the contract wants 1
        raise _UsageError(message)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _echo_config(out_dir: Path, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(json.dumps(config, sort_keys=True, indent=2) + "\n")


def cmd_gen(args) -> int:
    sizes = tuple(int(tok) for tok in args.sizes.split(","))
    cfg = DatasetConfig(
        sizes=sizes,
        train_per_size=args.count_per_size,
        test_per_size=args.test_count_per_size,
        tasks=_TASK_ALIASES[args.task],
        weight_sigma=args.sigma,
        symmetric=not args.asymmetric,
        seed=args.seed,
    )
    ds = make_dataset(cfg)
    write_dataset(ds, args.out)
    lines = len(ds.train) + len(ds.test)
    _note(f"wrote {lines} samples to {args.out} (R = {ds.r_bound:.4f})")
    _emit({"samples": lines, "train": len(ds.train), "test": len(ds.test),
           "R": ds.r_bound, "path": str(args.out)})
    return 0


def cmd_train(args) -> int:
    dataset = read_dataset(args.data)
    task = "diameter" if args.mode == "inv" else "eccentricity"
    config = TrainConfig(
        task=task,
        channel_order=args.k,
        width=args.width,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        activation=args.activation,
        seed=args.seed,
    )
    out_dir = Path(args.out)
    _echo_config(out_dir, {
        "command": "train", "data": str(args.data), "mode": config.mode,
        "task": task, "k": args.k, "width": args.width, "epochs": args.epochs,
        "batch_size": args.batch_size, "lr": args.lr, "activation": args.activation,
        "init_scheme": config.init_scheme, "beta1": config.beta1, "beta2": config.beta2,
        "epsilon": config.epsilon, "seed": args.seed, "threads": args.threads,
    })
    t0 = time.perf_counter()
    model, history = fit(config, dataset)
    elapsed = time.perf_counter() - t0
    save_model(model, out_dir / "model.json")
    write_metrics(history, out_dir / "metrics.csv")
    last = history[-1]
    _note(f"trained {config.task} k={args.k} S={args.width} for {args.epochs} epochs "
          f"in {elapsed:.1f}s; final train MSE {last['train_mse']:.4f}, "
          f"test MSE {last['test_mse']:.4f}")
    _emit({"out": str(out_dir), "epochs": args.epochs,
           "final_train_mse": last["train_mse"], "final_test_mse": last["test_mse"]})
    return 0


def cmd_check(args) -> int:
    result, witnesses = checks.run_suite(args.suite, args.seed)
    payload = {"suite": result.name, "passed": result.passed, "failed": result.failed,
               "failures": result.failures, **result.extra}
    if args.suite == "separation":
        out_dir = Path(args.out) if args.out else Path("separation-witnesses")
        out_dir.mkdir(parents=True, exist_ok=True)
        _echo_config(out_dir, {"command": "check", "suite": args.suite,
                               "seed": args.seed, "threads": args.threads})
        for i, w in enumerate(witnesses):
            (out_dir / f"pair_{i:03d}.json").write_text(
                json.dumps(w.to_json_dict(), sort_keys=True) + "\n")
        payload["witness_dir"] = str(out_dir)
        _note(f"wrote {len(witnesses)} witness records to {out_dir}")
    for failure in result.failures:
        _note(f"FAIL [{result.name}] {failure}")
    _note(f"suite {result.name}: {result.passed} passed, {result.failed} failed")
    _emit(payload)
    return 0 if result.ok else 3


def _load_tensor(path) -> DenseTensor:
    return DenseTensor.from_json_dict(json.loads(Path(path).read_text()))


def cmd_editdist(args) -> int:
    g1 = _load_tensor(args.a)
    g2 = _load_tensor(args.b)
    d = edit_distance(g1, g2, EditCosts(args.node_cost))
    _emit({"distance": d, "node_cost": args.node_cost,
           "n_a": g1.n, "n_b": g2.n})
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    dataset = read_dataset(args.data)
    samples = {"train": dataset.train, "test": dataset.test,
               "all": dataset.train + dataset.test}[args.split]
    if not samples:
        raise ValueError(f"no samples in split {args.split!r}")
    task = "diameter" if model.mode == "invariant" else "eccentricity"
    stats = evaluate_mse(model, samples, task)
    payload = {"split": args.split, "task": task, "mse": stats["mse"]}
    for n, v in sorted(stats["per_size"].items()):
        payload[f"mse_n{n}"] = v
    _emit(payload)
    return 0


def cmd_report(args) -> int:
    runs = report.discover_runs(args.runs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _echo_config(out_dir, {"command": "report",
                           "runs": [str(r) for r in args.runs], "out": str(out_dir)})
    summary = out_dir / "summary.csv"
    report.write_summary(runs, summary)
    figures = report.render_figures(runs, out_dir)
    _note(f"summarized {len(runs)} runs into {summary} and {len(figures)} figures")
    _emit({"runs": len(runs), "summary": str(summary),
           "figures": [str(p) for p in figures]})
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="permtensor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic graph dataset")
    p.add_argument("--sizes", default="5,10", help="comma-separated node counts")
    p.add_argument("--count-per-size", type=int, required=True,
                   help="training samples per node count")
    p.add_argument("--test-count-per-size", type=int, default=0,
                   help="test samples per node count (default 0)")
    p.add_argument("--task", choices=sorted(_TASK_ALIASES), default="both")
    p.add_argument("--sigma", type=float, default=1.0, help="weight scale")
    p.add_argument("--asymmetric", action="store_true",
                   help="draw independent weights per direction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output dataset file (JSON lines)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train a model on a generated dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--mode", choices=("inv", "eq"), required=True)
    p.add_argument("--k", type=int, default=1, help="channel order")
    p.add_argument("--width", type=int, default=8, help="number of channels")
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--activation", default="sigmoid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("check", help="run a randomized property suite")
    p.add_argument("--suite", choices=checks.SUITES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="witness directory (separation suite)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("editdist", help="exact edit distance between two tensors")
    p.add_argument("--a", required=True, help="tensor JSON file")
    p.add_argument("--b", required=True, help="tensor JSON file")
    p.add_argument("--node-cost", type=float, default=1.0)
    p.set_defaults(func=cmd_editdist)

    p = sub.add_parser("eval", help="evaluate a saved model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "test", "all"), default="all")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="summarize training runs with figures")
    p.add_argument("--runs", nargs="+", required=True,
                   help="run directories (or parents of run directories)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _note(f"usage error: {exc}")
        return 1
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        _note(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
