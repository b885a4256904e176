"""Command line entry point.

    fairbandits run --config <path-or-preset> [--output DIR] [--seeds N] [--horizon T] [--overwrite]
    fairbandits prepare-dataset --reference A.csv --sampling B.csv --spec schema.yaml --out bundle.npz
    fairbandits list-presets

Failures exit with status 2 and a single JSON line on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from fairbandits.environments.dataset import DatasetSchema, dataset_prepare, read_csv
from fairbandits.errors import ConfigError, ContractError
from fairbandits.harness.config import load_config
from fairbandits.harness.outputs import emit_outputs
from fairbandits.harness.presets import PRESETS, load_preset
from fairbandits.harness.runner import final_summary, run_experiment

OUTPUT_ENV = "FAIRBANDITS_OUTPUT"


def _load(source: str):
    if Path(source).is_file():
        return load_config(source)
    if source in PRESETS:
        return load_preset(source)
    raise ConfigError(f"{source!r} is neither a config file nor a preset ({', '.join(PRESETS)})")


def cmd_run(args) -> int:
    cfg = _load(args.config)
    changes = {}
    if args.seeds is not None:
        changes["num_seeds"] = args.seeds
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if args.workers is not None:
        changes["workers"] = args.workers
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
    out = args.output or os.environ.get(OUTPUT_ENV) or cfg.output_dir or f"results/{cfg.name}"
    bundle = run_experiment(cfg)
    emit_outputs(bundle, out, overwrite=args.overwrite)
    summary = {name: final_summary(c) for name, c in bundle.curves.items()}
    print(json.dumps({"output": str(out), "wall_clock_s": round(bundle.wall_clock, 3), "final": summary}))
    return 0


def cmd_prepare(args) -> int:
    try:
        schema_d = yaml.safe_load(Path(args.spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {args.spec}: {exc.strerror}") from None
    if not isinstance(schema_d, dict):
        raise ConfigError(f"{args.spec}: expected a mapping")
    schema = DatasetSchema.from_dict(schema_d)
    spec = dataset_prepare(read_csv(args.reference, schema), read_csv(args.sampling, schema), schema)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    spec.save(out)
    print(json.dumps({
        "out": str(out),
        "rows": int(spec.features.shape[0]),
        "groups": list(spec.group_names),
        "fitted_mu": [float(v) for v in spec.fitted_mu],
    }))
    return 0


def cmd_list(args) -> int:
    for name, d in PRESETS.items():
        policies = ",".join(p["name"] for p in d["policies"])
        print(f"{name}\tT={d['horizon']}\tseeds={d['num_seeds']}\tpolicies={policies}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fairbandits", description="Fair linear contextual bandit benchmarks")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a YAML config or a preset name")
    run.add_argument("--config", required=True)
    run.add_argument("--output")
    run.add_argument("--seeds", type=int)
    run.add_argument("--horizon", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--overwrite", action="store_true")
    run.set_defaults(func=cmd_run)

    prep = sub.add_parser("prepare-dataset", help="normalise CSV splits and fit the reward model")
    prep.add_argument("--reference", required=True)
    prep.add_argument("--sampling", required=True)
    prep.add_argument("--spec", required=True, help="YAML file with the dataset schema")
    prep.add_argument("--out", required=True)
    prep.set_defaults(func=cmd_prepare)

    lst = sub.add_parser("list-presets", help="print the built-in presets")
    lst.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ContractError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
