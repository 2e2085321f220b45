"""CSV emission with deterministic byte output.

All floating values are printed with 9 significant digits, so re-emitting
the same table produces byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

RESULTS_HEADER = ("trial", "hardware", "C_over_L", "ue", "mse_analytic", "mse_empirical",
                  "nmse", "sinr_db", "se", "uatf_se", "detected_count")
AGGREGATE_HEADER = ("hardware", "C_over_L", "metric", "mean", "std", "trials")
PROBE_HEADER = ("trial", "hardware", "C", "ue", "best_direction", "alpha_best",
                "detected", "lambda_or_alpha", "analytic_pd", "analytic_pfa")
REFLECTION_HEADER = ("trial", "hardware", "C", "K_detected", "frobenius_gap")
TRACE_HEADER = ("subblock", "ue", "abs_h")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) or isinstance(value, np.floating):
        return f"{float(value):.9g}"
    return str(value)


def _write(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")


def results_rows(records):
    for rec in records:
        with np.errstate(divide="ignore"):
            sinr_db = 10.0 * np.log10(rec.sinr)
        for ue in range(rec.detected.shape[0]):
            yield (rec.trial, rec.hardware, rec.c_over_l, ue,
                   rec.mse_analytic[ue], rec.mse_empirical[ue], rec.nmse[ue],
                   sinr_db[ue], rec.se[ue], rec.uatf_se[ue], rec.n_detected)


def emit_results(records, path) -> None:
    rows = list(results_rows(records))
    if not rows:
        raise ValueError("empty results table")
    _write(path, RESULTS_HEADER, rows)


def emit_aggregate(aggregates, path) -> None:
    if not aggregates:
        raise ValueError("empty aggregate table")
    _write(path, AGGREGATE_HEADER,
           ((a["hardware"], a["c_over_l"], a["metric"], a["mean"], a["std"], a["trials"])
            for a in aggregates))


def emit_probe_diagnostics(records, path) -> None:
    def rows():
        for rec in records:
            for ue in range(rec.detected.shape[0]):
                yield (rec.trial, rec.hardware, rec.n_probe_subblocks, ue,
                       rec.best_direction[ue], rec.alpha_best[ue], rec.detected[ue],
                       rec.statistics[ue], rec.analytic_pd[ue], rec.analytic_pfa)
    _write(path, PROBE_HEADER, rows())


def emit_reflection_diagnostics(records, path) -> None:
    _write(path, REFLECTION_HEADER,
           ((rec.trial, rec.hardware, rec.n_probe_subblocks, rec.n_detected,
             rec.frobenius_gap) for rec in records))


def emit_trace(trace: np.ndarray, path) -> None:
    """Per-subblock equivalent-channel magnitude trace, shape (L, K)."""
    _write(path, TRACE_HEADER,
           ((t, ue, trace[t, ue])
            for t in range(trace.shape[0]) for ue in range(trace.shape[1])))
