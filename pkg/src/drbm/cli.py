"""Command-line entry point: train, evaluate, grid-search, predict, verify.

Runs are described by a JSON config file; a handful of flags override the
common fields.  Every command is deterministic given its config (the seed is
part of the config) and all output files are written atomically.

Exit codes: 0 success, 1 verification failure, 2 config/usage error,
3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .activations import DomainError, StateKind, StateSet
from .data import (
    DataFormatError,
    Dataset,
    load_20news,
    load_csv_dataset,
    load_mnist,
    load_usps,
)
from .evaluate import (
    GridSpec,
    average_loss,
    grid_search,
    summary_table,
    write_grid_records,
)
from .model import (
    ModelFormatError,
    load_model,
    log_proba_batch,
    predict_batch,
    save_model,
)
from .training import (
    RNG_ALGORITHM,
    NumericError,
    TrainConfig,
    save_train_report,
    train,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    """The run configuration is missing or inconsistent."""


# ---------------------------------------------------------------------------
# config handling

_TRAIN_KEYS = {
    "n_hid": 50,
    "eta_init": 0.01,
    "batch_size": 100,
    "max_epochs": 2000,
    "patience": 10,
    "max_reductions": 5,
    "seed": 0,
    "init_scale": 0.01,
}


def _load_config(path, overrides) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(config, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    for key, value in overrides.items():
        if value is not None:
            config[key] = value
    return config


def _variant_from_config(config) -> StateSet:
    name = config.get("variant")
    if not name:
        raise ConfigError("config needs a 'variant' (bernoulli|bipolar|binomial|relu)")
    try:
        return StateSet.from_name(name, config.get("n_bins"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _train_config_from(config, variant) -> TrainConfig:
    kwargs = {}
    for key, default in _TRAIN_KEYS.items():
        value = config.get(key, default)
        try:
            if isinstance(default, int):
                if float(value) != int(value):
                    raise ValueError
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for {key!r}: {value!r}") from None
    try:
        return TrainConfig(variant=variant, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _load_datasets(config) -> tuple:
    spec = config.get("dataset")
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("config needs a 'dataset' object with a 'kind'")
    kind = spec["kind"]

    def need(*keys):
        missing = [k for k in keys if k not in spec]
        if missing:
            raise ConfigError(f"dataset kind {kind!r} needs keys: {', '.join(missing)}")
        return [spec[k] for k in keys]

    if kind == "mnist":
        paths = need("train_images", "train_labels", "test_images", "test_labels")
        return load_mnist(*paths, valid_size=int(spec.get("valid_size", 10_000)))
    if kind == "usps":
        train_path, test_path = need("train", "test")
        valid_size = spec.get("valid_size")
        return load_usps(train_path, test_path, None if valid_size is None else int(valid_size))
    if kind == "20news":
        (root,) = need("root")
        splits, _ = load_20news(
            root,
            vocab_size=int(spec.get("vocab_size", 5000)),
            valid_fraction=float(spec.get("valid_fraction", 0.15)),
        )
        return splits
    if kind in ("csv", "csv-generic"):
        train_path, valid_path, test_path = need("train", "valid", "test")
        train_ds = load_csv_dataset(train_path, split_name="train")
        valid_ds = load_csv_dataset(valid_path, split_name="valid")
        test_ds = load_csv_dataset(test_path, split_name="test")
        n_classes = max(d.n_classes for d in (train_ds, valid_ds, test_ds))
        return tuple(
            Dataset(d.features, d.labels, n_classes, d.split_name)
            for d in (train_ds, valid_ds, test_ds)
        )
    raise ConfigError(f"unknown dataset kind {kind!r}")


def _atomic_write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _config_snapshot(config, variant, train_cfg) -> dict:
    snapshot = {key: getattr(train_cfg, key) for key in _TRAIN_KEYS}
    snapshot["variant"] = variant.kind.value
    if variant.kind is StateKind.BINOMIAL:
        snapshot["n_bins"] = variant.n_bins
    snapshot["dataset"] = config.get("dataset")
    snapshot["rng"] = RNG_ALGORITHM
    return snapshot


# ---------------------------------------------------------------------------
# commands

def _cmd_train(args) -> int:
    config = _load_config(
        args.config,
        {
            "seed": args.seed,
            "eta_init": args.eta_init,
            "n_hid": args.n_hid,
            "max_epochs": args.max_epochs,
            "output_dir": args.output_dir,
            "variant": args.variant,
            "n_bins": args.n_bins,
        },
    )
    variant = _variant_from_config(config)
    train_cfg = _train_config_from(config, variant)
    out_dir = config.get("output_dir")
    if not out_dir:
        raise ConfigError("config needs an 'output_dir'")
    os.makedirs(out_dir, exist_ok=True)

    train_ds, valid_ds, test_ds = _load_datasets(config)
    report = train(train_cfg, train_ds, valid_ds)
    params = report.final_params

    val_loss = average_loss(predict_batch(params, variant, valid_ds.features), valid_ds.labels)
    test_loss = average_loss(predict_batch(params, variant, test_ds.features), test_ds.labels)

    snapshot = _config_snapshot(config, variant, train_cfg)
    model_path = os.path.join(out_dir, "model.drbm")
    save_model(model_path, params, variant, seed=train_cfg.seed, config=snapshot)
    save_train_report(report, os.path.join(out_dir, "train_report.tsv"))
    metrics = {
        "format": "drbm-train-metrics",
        "version": 1,
        "rng": RNG_ALGORITHM,
        "validation_loss": val_loss,
        "validation_loss_pct": 100.0 * val_loss,
        "test_loss": test_loss,
        "test_loss_pct": 100.0 * test_loss,
        "epochs_run": report.epochs_run,
        "termination": report.termination_reason.value,
        "experimental_variant": variant.kind is StateKind.RECTIFIED_LINEAR,
    }
    _atomic_write_text(
        os.path.join(out_dir, "metrics.json"),
        json.dumps(metrics, sort_keys=True, indent=2) + "\n",
    )
    note = " [experimental variant]" if metrics["experimental_variant"] else ""
    print(
        f"train: val_loss={val_loss!r} ({100 * val_loss:.2f}%) "
        f"test_loss={test_loss!r} ({100 * test_loss:.2f}%) "
        f"epochs={report.epochs_run} -> {model_path}{note}"
    )
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    config = _load_config(args.config, {})
    saved = load_model(args.model)
    splits = dict(zip(("train", "valid", "test"), _load_datasets(config)))
    dataset = splits[args.split]
    if dataset.features.shape[1] != saved.params.n_inputs:
        raise DataFormatError(
            f"dataset has {dataset.features.shape[1]} features but the model "
            f"expects {saved.params.n_inputs}"
        )
    loss = average_loss(
        predict_batch(saved.params, saved.state_set, dataset.features), dataset.labels
    )
    print(
        f"evaluate: split={args.split} n={len(dataset)} "
        f"average_loss={loss!r} ({100 * loss:.2f}%)"
    )
    if args.output:
        _atomic_write_text(
            args.output,
            json.dumps(
                {
                    "format": "drbm-eval-metrics",
                    "version": 1,
                    "split": args.split,
                    "n": len(dataset),
                    "average_loss": loss,
                    "average_loss_pct": 100.0 * loss,
                },
                sort_keys=True,
                indent=2,
            )
            + "\n",
        )
    return EXIT_OK


def _cmd_grid_search(args) -> int:
    config = _load_config(args.config, {"output_dir": args.output_dir})
    variant = _variant_from_config(config)
    out_dir = config.get("output_dir")
    if not out_dir:
        raise ConfigError("config needs an 'output_dir'")
    os.makedirs(out_dir, exist_ok=True)
    grid_spec = config.get("grid", {})
    if not isinstance(grid_spec, dict):
        raise ConfigError("'grid' must be an object")
    defaults = GridSpec()
    try:
        grid = GridSpec(
            etas=tuple(grid_spec.get("etas", defaults.etas)),
            hidden_sizes=tuple(grid_spec.get("hidden_sizes", defaults.hidden_sizes)),
            bin_counts=tuple(grid_spec.get("bin_counts", defaults.bin_counts)),
            seeds=tuple(grid_spec.get("seeds", defaults.seeds)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    train_ds, valid_ds, test_ds = _load_datasets(config)
    results, best = grid_search(
        grid,
        variant.kind,
        train_ds,
        valid_ds,
        test_ds,
        batch_size=int(config.get("batch_size", 100)),
        max_epochs=int(config.get("max_epochs", 2000)),
        patience=int(config.get("patience", 10)),
        max_reductions=int(config.get("max_reductions", 5)),
        init_scale=float(config.get("init_scale", 0.01)),
    )
    write_grid_records(results, os.path.join(out_dir, "grid_records.jsonl"))
    table = summary_table(results)
    _atomic_write_text(os.path.join(out_dir, "grid_summary.txt"), table + "\n")
    print(table)
    if best is None:
        print("grid-search: every cell failed", file=sys.stderr)
        return EXIT_NUMERIC
    print(
        f"grid-search: best eta={best.config.eta_init} n_hid={best.config.n_hid}"
        + (
            f" n_bins={best.config.variant.n_bins}"
            if variant.kind is StateKind.BINOMIAL
            else ""
        )
        + f" test_loss={best.mean_loss!r} ({100 * best.mean_loss:.2f}%"
        f" +- {100 * best.std_loss:.2f})"
    )
    return EXIT_OK


def _cmd_predict(args) -> int:
    saved = load_model(args.model)
    try:
        X = np.loadtxt(args.features, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataFormatError(f"{args.features}: {exc}") from None
    if X.shape[1] != saved.params.n_inputs:
        raise DataFormatError(
            f"{args.features}: rows have {X.shape[1]} features but the model "
            f"expects {saved.params.n_inputs}"
        )
    log_proba = log_proba_batch(saved.params, saved.state_set, X)
    labels = np.argmax(log_proba, axis=1)
    lines = [
        "\t".join([str(int(label))] + [format(p, ".17g") for p in np.exp(row)])
        for label, row in zip(labels, log_proba)
    ]
    text = "\n".join(lines) + "\n"
    if args.output:
        _atomic_write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_all_checks

    if args.instances < 1:
        raise ConfigError("--instances must be a positive integer")
    reports = run_all_checks(args.instances, args.seed)
    failed = [r for r in reports if not r.passed]
    for r in reports:
        print(r.line())
    if failed:
        print(f"verify: {len(failed)} check(s) out of tolerance", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print("verify: all checks within tolerance")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drbm",
        description="Train and inspect discriminative RBM classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model from a JSON config")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--eta-init", dest="eta_init", type=float)
    p_train.add_argument("--n-hid", dest="n_hid", type=int)
    p_train.add_argument("--max-epochs", dest="max_epochs", type=int)
    p_train.add_argument("--variant")
    p_train.add_argument("--n-bins", dest="n_bins", type=int)
    p_train.add_argument("--output-dir", dest="output_dir")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("evaluate", help="score a saved model on a split")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--split", choices=("train", "valid", "test"), default="test")
    p_eval.add_argument("--output")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_grid = sub.add_parser("grid-search", help="train every grid cell and pick the best")
    p_grid.add_argument("--config", required=True)
    p_grid.add_argument("--output-dir", dest="output_dir")
    p_grid.set_defaults(func=_cmd_grid_search)

    p_pred = sub.add_parser("predict", help="label rows of a feature CSV")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--features", required=True)
    p_pred.add_argument("--output")
    p_pred.set_defaults(func=_cmd_predict)

    p_verify = sub.add_parser("verify", help="run the differential check suites")
    p_verify.add_argument("--instances", type=int, default=100)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"drbm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, ModelFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"drbm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, DomainError) as exc:
        print(f"drbm: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
