"""Metrics, event accounting, and run logging shared by all optimizers.

Accounting units: one sample gradient w.r.t. one block for one client counts
1; a full per-client gradient counts n; an LSGD minibatch counts B.  A
communication round is any w-aggregation event (LSGD averaging, a w-branch
step of a coordinate method, or an anchor refresh).

Runs log one :class:`RunRecord` per communication round by default (the
paper's x-axis) or per iteration behind a flag.  JSONL rows carry only
deterministic fields so identical configurations reproduce logs
byte-for-byte; wall-clock time lives in the run manifest instead.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .model import GroundTruth, PartitionedModel
from .objectives import ObjectiveSpec, eval_loss

__all__ = [
    "RunRecord",
    "estimation_error",
    "zeta_star_sq",
    "run_optimizer",
    "aggregate",
    "write_jsonl",
    "read_jsonl",
    "write_aggregate_csv",
    "read_aggregate_csv",
    "AGGREGATE_COLUMNS",
]

AGGREGATE_COLUMNS = ["round", "loss_mean", "loss_se", "esterr_mean", "esterr_se",
                     "comm", "gw", "gb"]


@dataclass
class RunRecord:
    """One telemetry row: losses and cumulative counters at a log point."""

    round: int
    iteration: int
    loss: float
    est_err: float | None
    comm_rounds: int
    grad_w_calls: int
    grad_beta_calls: int

    def to_json(self) -> str:
        payload = asdict(self)
        return json.dumps(payload, sort_keys=True)


def estimation_error(model: PartitionedModel, truth: GroundTruth,
                     reparameterized: bool = True) -> float:
    """``||w_hat - w*||^2 + sum_m ||beta_hat_m - beta*_m||^2``.

    When the model lives in the reparameterized w-space (w_scaled =
    sqrt(M) * w_raw), the shared block is unscaled by ``M**-0.5`` before
    comparison; the truth always lives in raw space.
    """
    if truth is None:
        raise ValueError("estimation_error requires a ground truth")
    total = 0.0
    if truth.w_star is not None and model.d0:
        w_hat = model.w * (model.M**-0.5 if reparameterized else 1.0)
        if w_hat.shape != truth.w_star.shape:
            raise ValueError(
                f"shared block shape {w_hat.shape} != truth {truth.w_star.shape}"
            )
        total += float(((w_hat - truth.w_star) ** 2).sum())
    if model.dms[0]:
        for b_hat, b_star in zip(model.betas, truth.beta_stars):
            if b_hat.shape != np.asarray(b_star).shape:
                raise ValueError("client block shape does not match truth")
            total += float(((b_hat - np.asarray(b_star)) ** 2).sum())
    return total


def zeta_star_sq(spec: ObjectiveSpec, optimum: PartitionedModel) -> float:
    """Heterogeneity at the optimum: ``(1/M) sum_m ||grad f_m(w*, beta*_m)||^2``."""
    w, b_stack = spec.check_model(optimum)
    gw = spec.grad_w_clients(w, b_stack)
    gb = spec.grad_b_clients(w, b_stack)
    return float(((gw**2).sum(axis=1) + (gb**2).sum(axis=1)).mean())


def run_optimizer(
    optimizer,
    spec: ObjectiveSpec,
    truth: GroundTruth | None = None,
    max_rounds: int = 100,
    cadence: str = "round",
    max_iters: int = 50_000_000,
) -> list[RunRecord]:
    """Drive an optimizer until its communication budget is spent.

    With the default per-round cadence one record is appended each time the
    cumulative communication counter advances (rows are aligned on the grid
    1..max_rounds; a step that advances the counter twice yields two rows at
    the same iterate).  Per-iteration cadence logs every step instead and
    stops after ``max_rounds`` iterations.
    """
    if cadence not in ("round", "iteration"):
        raise ValueError(f"unknown cadence {cadence!r}")
    records: list[RunRecord] = []

    def snapshot(round_index: int) -> RunRecord:
        model = optimizer.model
        loss = eval_loss(spec, model)
        err = (
            estimation_error(model, truth, spec.reparameterized)
            if truth is not None
            else None
        )
        return RunRecord(
            round=round_index,
            iteration=optimizer.k,
            loss=loss,
            est_err=err,
            comm_rounds=optimizer.comm_rounds,
            grad_w_calls=optimizer.grad_w_calls,
            grad_beta_calls=optimizer.grad_beta_calls,
        )

    if cadence == "iteration":
        for _ in range(max_rounds):
            optimizer.step()
            records.append(snapshot(len(records) + 1))
        return records

    iters = 0
    while len(records) < max_rounds:
        if iters >= max_iters:
            raise RuntimeError(
                f"iteration cap {max_iters} reached after {len(records)} of "
                f"{max_rounds} communication rounds"
            )
        optimizer.step()
        iters += 1
        while len(records) < min(optimizer.comm_rounds, max_rounds):
            records.append(snapshot(len(records) + 1))
    return records


def aggregate(runs: list[list[RunRecord]]) -> list[dict]:
    """Per-round mean and standard error over seed replications.

    All runs must share the round grid.  SE is sd/sqrt(R) with the R=1
    convention SE = 0.  Counter columns (comm, gw, gb) are averaged.
    """
    if not runs:
        raise ValueError("aggregate requires at least one run")
    grid = [r.round for r in runs[0]]
    for run in runs[1:]:
        if [r.round for r in run] != grid:
            raise ValueError("runs do not share a common round grid")
    R = len(runs)
    rows = []
    for i, round_index in enumerate(grid):
        losses = np.array([run[i].loss for run in runs])
        errs = [run[i].est_err for run in runs]
        has_err = all(e is not None for e in errs)
        err_arr = np.array(errs, dtype=np.float64) if has_err else None

        def mean_se(values: np.ndarray) -> tuple[float, float]:
            mean = float(values.mean())
            se = float(values.std(ddof=1) / math.sqrt(R)) if R > 1 else 0.0
            return mean, se

        loss_mean, loss_se = mean_se(losses)
        err_mean, err_se = mean_se(err_arr) if has_err else (float("nan"), float("nan"))
        rows.append(
            {
                "round": round_index,
                "loss_mean": loss_mean,
                "loss_se": loss_se,
                "esterr_mean": err_mean,
                "esterr_se": err_se,
                "comm": float(np.mean([run[i].comm_rounds for run in runs])),
                "gw": float(np.mean([run[i].grad_w_calls for run in runs])),
                "gb": float(np.mean([run[i].grad_beta_calls for run in runs])),
            }
        )
    return rows


def write_jsonl(records: list[RunRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")


def read_jsonl(path) -> list[RunRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(RunRecord(**json.loads(line)))
    return records


def write_aggregate_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=AGGREGATE_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: repr(row[key]) if isinstance(row[key], float) else row[key]
                             for key in AGGREGATE_COLUMNS})


def read_aggregate_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != AGGREGATE_COLUMNS:
            raise ValueError(
                f"{path}: unexpected columns {reader.fieldnames}, expected {AGGREGATE_COLUMNS}"
            )
        rows = []
        for row in reader:
            rows.append({"round": int(row["round"]),
                         **{k: float(row[k]) for k in AGGREGATE_COLUMNS[1:]}})
        return rows
