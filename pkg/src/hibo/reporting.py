"""Trace files, run summaries, multi-seed aggregation and landscape dumps."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import AlgorithmKind, RunConfig, dump_config
from .core import SearchSpace
from .objective_io import s_pitr
from .orchestrator import Optimizer, RunResult, StepContext, TraceRecord, _GRID

TAIL_COLUMNS = ["value", "failed", "best_so_far", "regret", "tree_depth", "n_leaves",
                "tr_length", "optim_seconds", "eval_seconds"]


def trace_columns(space: SearchSpace) -> list[str]:
    return ["iteration", *space.names, *TAIL_COLUMNS]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_trace(path, trace: Sequence[TraceRecord], space: SearchSpace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_columns(space))
        for r in trace:
            w.writerow([_cell(r.iteration), *(_cell(float(x)) for x in r.raw_point),
                        *(_cell(getattr(r, c)) for c in TAIL_COLUMNS)])


def read_trace(path) -> dict[str, np.ndarray]:
    """Columns of a trace file as float arrays (empty cells become NaN)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        cols[name] = np.array([float(r[j]) if r[j] != "" else np.nan for r in body])
    return cols


def summarize_run(result: RunResult, config: RunConfig) -> dict:
    trace = result.trace
    best = trace[-1].best_so_far
    regrets = [r.regret for r in trace if r.regret is not None]
    optim = float(sum(r.optim_seconds for r in trace))
    evals = float(sum(r.eval_seconds for r in trace))
    n_failed = int(sum(r.failed for r in trace))
    summary = {
        "algorithm": AlgorithmKind(config.algorithm).value,
        "evaluations": len(trace),
        "restarts": result.n_restarts,
        "final_best": best,
        "final_regret": regrets[-1] if regrets else None,
        "mean_regret": float(np.mean(regrets)) if regrets else None,
        "total_optim_seconds": optim,
        "total_eval_seconds": evals,
        "n_failed": n_failed,
        "s_pitr": None,
    }
    if config.external is not None or config.baseline_value is not None:
        baseline = config.baseline_value if config.baseline_value is not None else trace[0].value
        denom = optim + evals + n_failed * config.penalty_seconds
        if denom > 0:
            summary["s_pitr"] = s_pitr(best - baseline, optim + evals, n_failed,
                                       config.penalty_seconds)
    return summary


def run_experiment(config: RunConfig, output_dir: str | Path | None = None) -> dict:
    """Run one configuration and write trace, summary and resolved config.

    A partial trace is still written if the objective raises.
    """
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(config, out / "config.resolved.json")
    opt = Optimizer(config)
    try:
        result = opt.run()
    finally:
        write_trace(out / "trace.csv", opt.trace, opt.space)
    summary = summarize_run(result, config)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


# --------------------------------------------------------------------------
# multi-seed aggregation
# --------------------------------------------------------------------------


def summarize_seeds(paths: Iterable[str | Path]) -> dict[str, np.ndarray]:
    """Per-iteration mean/std of best_so_far and regret across trace files.

    Standard deviations use the sample (n-1) convention and are 0 for a
    single trace.
    """
    traces = [read_trace(p) for p in paths]
    if not traces:
        raise ValueError("need at least one trace")
    lengths = {len(t["iteration"]) for t in traces}
    if len(lengths) != 1:
        raise ValueError(f"traces have mismatched budgets: {sorted(lengths)}")
    out = {"iteration": traces[0]["iteration"].astype(int)}
    for col in ("best_so_far", "regret"):
        stack = np.stack([t[col] for t in traces])
        out[f"{col}_mean"] = stack.mean(axis=0)
        out[f"{col}_std"] = stack.std(axis=0, ddof=1) if len(traces) > 1 else np.zeros(stack.shape[1])
    out["n_traces"] = np.array([len(traces)])
    return out


def write_aggregate(path, table: dict[str, np.ndarray]) -> None:
    cols = ["best_so_far_mean", "best_so_far_std", "regret_mean", "regret_std"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", *cols])
        for i, it in enumerate(table["iteration"]):
            w.writerow([int(it), *(_cell(table[c][i]) for c in cols)])
        w.writerow(["final", *(_cell(table[c][-1]) for c in cols)])


# --------------------------------------------------------------------------
# acquisition landscape
# --------------------------------------------------------------------------


def grid_points(grid_n: int) -> tuple[np.ndarray, np.ndarray]:
    g = np.linspace(0.0, 1.0, grid_n)
    a, b = np.meshgrid(g, g, indexing="ij")
    return a.ravel(), b.ravel()


def top_k_rows(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` largest values, largest first (stable on ties)."""
    order = np.argsort(-values, kind="stable")
    return order[:k]


def dump_landscape(config: RunConfig, iterations: Sequence[int], grid_n: int = 100,
                   top_k: int = 1000) -> list[tuple[int, float, float, float]]:
    """Top-``top_k`` acquisition values on a 2-D grid at each snapshot.

    The grid spans the first two effective dimensions; all other coordinates
    sit at the incumbent best point.  Rows are ``(iteration, x1, x2, acq)``
    with raw (denormalized) coordinates.
    """
    iterations = sorted(set(int(i) for i in iterations))
    if top_k > grid_n * grid_n:
        raise ValueError("top_k exceeds the grid size")
    budget = max(iterations)
    if budget <= config.init_samples:
        raise ValueError("snapshots must lie after the initial samples")
    cfg = replace(config, budget=budget).validate()
    opt = Optimizer(cfg)
    bench = opt.bench
    dims = bench.effective_indices[:2] if bench is not None else np.arange(min(2, opt.dim))
    if len(dims) < 2:
        raise ValueError("landscape needs at least two effective dimensions")
    g1, g2 = grid_points(grid_n)
    lo, hi = opt.space.lower, opt.space.upper
    rows: list[tuple[int, float, float, float]] = []
    pending = list(iterations)

    def snapshot(n_evals: int, ctx: StepContext, o: Optimizer) -> None:
        while pending and n_evals >= pending[0]:
            label = pending.pop(0)
            inc = o.dataset.X[int(np.argmax(o.dataset.y))]
            pts = np.repeat(inc[None, :], g1.size, axis=0)
            pts[:, dims[0]] = g1
            pts[:, dims[1]] = g2
            acq = ctx.acquisition(pts, [cfg.seed, _GRID, label],
                                  best=float(o.local_y.max()))
            for i in top_k_rows(acq, top_k):
                rows.append((label,
                             float(lo[dims[0]] + g1[i] * (hi[dims[0]] - lo[dims[0]])),
                             float(lo[dims[1]] + g2[i] * (hi[dims[1]] - lo[dims[1]])),
                             float(acq[i])))

    opt.on_context = snapshot
    opt.run()
    if pending:
        snapshot(len(opt.dataset), opt.prepare(), opt)
    return rows


def write_landscape(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "x1", "x2", "acq"])
        for it, x1, x2, a in rows:
            w.writerow([it, _cell(x1), _cell(x2), _cell(a)])


def landscape_fraction(rows, iteration: int, center_raw: Sequence[float],
                       bounds: Sequence[tuple[float, float]], radius: float = 0.1) -> float:
    """Share of a snapshot's rows within a normalized radius of ``center_raw``."""
    pts = np.array([(r[1], r[2]) for r in rows if r[0] == iteration])
    if pts.size == 0:
        return math.nan
    lo = np.array([b[0] for b in bounds])
    span = np.array([b[1] - b[0] for b in bounds])
    z = (pts - lo) / span
    c = (np.asarray(center_raw, dtype=float) - lo) / span
    return float(np.mean(np.linalg.norm(z - c, axis=1) <= radius))
