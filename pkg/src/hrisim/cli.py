"""Command line entry point: run a sweep and emit CSV results."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import DESK_PRESET, ConfigError, load_config
from .orchestrator import run_sweep
from .writers import (emit_aggregate, emit_probe_diagnostics, emit_reflection_diagnostics,
                      emit_results, emit_trace)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hrisim",
        description="Monte Carlo sweep of a massive MIMO uplink assisted by a "
                    "self-configuring hybrid RIS.")
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument("--sweep", metavar="C=a,b,c",
                        help="probing durations to sweep, e.g. C=0,16,64")
    parser.add_argument("--hardware", choices=("signal", "power", "both"),
                        help="HRIS hardware architecture(s) to simulate")
    parser.add_argument("--trials", type=int, metavar="N", help="Monte Carlo trials per point")
    parser.add_argument("--seed", type=int, metavar="S", help="base RNG seed")
    parser.add_argument("--no-hris", action="store_true", default=None,
                        help="disable the HRIS entirely (mMIMO-alone baseline)")
    parser.add_argument("--out", metavar="PATH", help="output directory for CSV files")
    parser.add_argument("--trace-channel", action="store_true", default=None,
                        help="emit the per-subblock |h_k| trace of the first trial")
    parser.add_argument("--desk", action="store_true",
                        help="small fast preset (M=8, N=16, K=4, L=16)")
    parser.add_argument("--figures", action="store_true",
                        help="also render sweep figures next to the CSV output")
    return parser


def parse_sweep(text: str) -> list:
    body = text.split("=", 1)[1] if "=" in text else text
    try:
        return [int(v) for v in body.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --sweep value '{text}'") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = dict(DESK_PRESET) if args.desk else {}
        if args.sweep is not None:
            overrides["c_values"] = parse_sweep(args.sweep)
        if args.hardware is not None:
            overrides["hardware"] = args.hardware
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.no_hris:
            overrides["no_hris"] = True
        if args.trace_channel:
            overrides["trace_channel"] = True
        if args.out is not None:
            overrides["out_dir"] = args.out
        cfg = load_config(args.config, overrides)

        result = run_sweep(cfg.sweep_plan(), cfg.system_params(), cfg.pathloss_model(),
                           cfg.frame(), area_side=cfg.area_side, bs_height=cfg.bs_height,
                           hris_height=cfg.hris_height, ue_height=cfg.ue_height,
                           target_pfa=cfg.target_pfa, no_hris=cfg.no_hris,
                           collect_trace=cfg.trace_channel,
                           uplink_conjugate=cfg.uplink_conjugate,
                           mse_uses_ideal=cfg.mse_uses_ideal,
                           weighted_reflection=cfg.weighted_reflection,
                           shadow_reflected=cfg.shadow_reflected)

        out = Path(cfg.out_dir)
        emit_results(result.records, out / "results.csv")
        emit_aggregate(result.aggregates, out / "aggregate.csv")
        emit_probe_diagnostics(result.records, out / "probe.csv")
        emit_reflection_diagnostics(result.records, out / "reflection.csv")
        if cfg.trace_channel:
            traced = next((r for r in result.records if r.trace is not None), None)
            if traced is not None:
                emit_trace(traced.trace, out / "trace.csv")
        if args.figures:
            from .report import render_figures
            render_figures(result.aggregates, out)

        n_points = len({(r.hardware, r.n_probe_subblocks) for r in result.records})
        mean_se = float(np.mean([float(np.mean(r.se)) for r in result.records]))
        print(f"wrote {out / 'results.csv'} ({len(result.records)} trials over "
              f"{n_points} sweep points; mean SE {mean_se:.9g} bit/s/Hz)")
        return 0
    except (ConfigError, ValueError) as exc:
        print(f"hrisim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
