"""Command-line front end: train, eval, and sweep with CSV/manifest output.

Every run writes a manifest (config snapshot, seed, variant, version,
output paths) before it starts, so the run is reproducible bit for bit.
Metrics CSVs use the fixed header
``episode,reward,avg_delay_s,avg_energy_j,server_cost,vehicle_cost``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Sequence

import numpy as np

from . import __version__
from .baselines import VARIANTS, PolicySpec
from .config import (ConfigError, SimConfig, load_config, serialize_config)
from .learn.train import (evaluate, load_checkpoint, metrics_row,
                          save_checkpoint, train)

__all__ = ["main", "cmd_train", "cmd_eval", "cmd_sweep"]

METRICS_HEADER = ["episode", "reward", "avg_delay_s", "avg_energy_j",
                  "server_cost", "vehicle_cost"]

# derived sweep keys expand to several underlying config fields
_DERIVED_SWEEP_KEYS = {
    "task_size_mb": ("task_size_min_mb", "task_size_max_mb"),
}


def _load_cfg(path: str | None) -> SimConfig:
    return load_config(path) if path else SimConfig()


def _write_manifest(out_dir: Path, cfg: SimConfig, args_dict: dict,
                    outputs: dict) -> None:
    manifest = {
        "version": __version__,
        "config": serialize_config(cfg),
        "outputs": outputs,
    }
    manifest.update(args_dict)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(row[key]) for key in header])


def cmd_train(config: str | None, seed: int, episodes: int, out: str,
              variant: str = "full") -> int:
    cfg = _load_cfg(config)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = PolicySpec(variant=variant)
    outputs = {"metrics": "metrics.csv", "checkpoint": "checkpoint.npz"}
    _write_manifest(out_dir, cfg,
                    {"command": "train", "seed": seed, "episodes": episodes,
                     "variant": variant}, outputs)
    result = train(cfg, seed, episodes, spec=spec)
    rows = [dict(metrics_row(m, cfg), episode=idx)
            for idx, m in enumerate(result.metrics)]
    _write_csv(out_dir / outputs["metrics"], METRICS_HEADER, rows)
    save_checkpoint(str(out_dir / outputs["checkpoint"]), result.agent, cfg,
                    variant=variant)
    return 0


EVAL_HEADER = ["variant", "seed", "episode", "reward", "avg_delay_s",
               "avg_energy_j", "server_cost", "vehicle_cost"]
SUMMARY_HEADER = ["variant", "metric", "mean", "std", "episodes"]


def _summarize(rows: List[dict], variant: str) -> List[dict]:
    summary = []
    for metric in ("reward", "avg_delay_s", "avg_energy_j", "server_cost",
                   "vehicle_cost"):
        values = np.array([row[metric] for row in rows], dtype=float)
        summary.append({
            "variant": variant,
            "metric": metric,
            "mean": float(values.mean()) if values.size else float("nan"),
            "std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
            "episodes": int(values.size),
        })
    return summary


def cmd_eval(config: str | None, checkpoint: str | None, variant: str,
             episodes: int, seeds: List[int], out: str) -> int:
    cfg = _load_cfg(config)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {"episodes": "eval.csv", "summary": "summary.csv"}
    _write_manifest(out_dir, cfg,
                    {"command": "eval", "seeds": seeds, "episodes": episodes,
                     "variant": variant, "checkpoint": checkpoint}, outputs)
    agent = None
    if checkpoint:
        agent, _ = load_checkpoint(checkpoint, cfg)
    spec = PolicySpec(variant=variant)
    rows = evaluate(cfg, agent, spec, episodes, seeds) if episodes > 0 else []
    _write_csv(out_dir / outputs["episodes"], EVAL_HEADER, rows)
    _write_csv(out_dir / outputs["summary"], SUMMARY_HEADER,
               _summarize(rows, variant) if rows else [])
    return 0


def _apply_sweep(cfg: SimConfig, key: str, value: float) -> SimConfig:
    if key in _DERIVED_SWEEP_KEYS:
        return replace(cfg, **{field: value
                               for field in _DERIVED_SWEEP_KEYS[key]})
    if not hasattr(cfg, key):
        raise ConfigError(f"unknown config key '{key}'")
    current = getattr(cfg, key)
    cast = type(current)(value)
    return replace(cfg, **{key: cast})


def cmd_sweep(config: str | None, sweep_key: str, sweep_values: List[float],
              checkpoint: str | None, variant: str, episodes: int,
              seeds: List[int], out: str) -> int:
    if not sweep_values:
        raise ValueError("empty sweep value list")
    base_cfg = _load_cfg(config)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {"combined": "sweep.csv", "summary": "sweep_summary.csv"}
    _write_manifest(out_dir, base_cfg,
                    {"command": "sweep", "seeds": seeds, "episodes": episodes,
                     "variant": variant, "sweep_key": sweep_key,
                     "sweep_values": sweep_values}, outputs)
    combined: List[dict] = []
    summaries: List[dict] = []
    for value in sweep_values:
        cfg = _apply_sweep(base_cfg, sweep_key, value)
        agent = None
        if checkpoint:
            agent, _ = load_checkpoint(checkpoint, cfg)
        rows = evaluate(cfg, agent, PolicySpec(variant=variant), episodes,
                        seeds)
        for row in rows:
            combined.append(dict(row, sweep_key=sweep_key, sweep_value=value))
        for item in _summarize(rows, variant):
            summaries.append(dict(item, sweep_key=sweep_key,
                                  sweep_value=value))
    _write_csv(out_dir / outputs["combined"],
               ["sweep_key", "sweep_value"] + EVAL_HEADER, combined)
    _write_csv(out_dir / outputs["summary"],
               ["sweep_key", "sweep_value"] + SUMMARY_HEADER, summaries)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsmec",
        description="Train, evaluate, and sweep the layered offloading "
                    "optimizer.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="flat key=value file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--variant", default="full", choices=VARIANTS)

    p_train = sub.add_parser("train", help="run the learning loop")
    common(p_train)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--episodes", type=int, default=1)

    p_eval = sub.add_parser("eval", help="frozen-policy rollouts")
    common(p_eval)
    p_eval.add_argument("--checkpoint", default=None)
    p_eval.add_argument("--episodes", type=int, default=1)
    p_eval.add_argument("--seeds", type=int, nargs="+", default=[0])

    p_sweep = sub.add_parser("sweep", help="evaluate over a parameter grid")
    common(p_sweep)
    p_sweep.add_argument("--checkpoint", default=None)
    p_sweep.add_argument("--episodes", type=int, default=1)
    p_sweep.add_argument("--seeds", type=int, nargs="+", default=[0])
    p_sweep.add_argument("--sweep-key", required=True)
    p_sweep.add_argument("--sweep-values", type=float, nargs="+",
                         required=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return cmd_train(args.config, args.seed, args.episodes, args.out,
                             args.variant)
        if args.command == "eval":
            return cmd_eval(args.config, args.checkpoint, args.variant,
                            args.episodes, args.seeds, args.out)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.sweep_key, args.sweep_values,
                             args.checkpoint, args.variant, args.episodes,
                             args.seeds, args.out)
        raise ValueError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
