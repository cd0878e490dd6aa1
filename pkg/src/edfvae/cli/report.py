"""CSV writers, seed aggregation and Rich summaries shared by the commands."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
from rich.table import Table as RichTable
from scipy.stats import norm

from edfvae.core.activity import ActivityReport
from edfvae.core.closed_form import MleSolution, activity_predict
from edfvae.nn.training import TrainHistory

CONFIDENCE = 0.95
AGGREGATE_HEADER = ("batch", "split", "mean", "lower", "upper", "n_seeds")


def fmt(value: float) -> str:
    """Shortest round-tripping text for a float."""
    return repr(float(value))


def write_csv(path: Path, header: Sequence[str] | None, rows: Iterable[Sequence], comments: Sequence[str] = ()) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in comments:
            f.write(f"# {line}\n")
        writer = csv.writer(f, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return path


def confidence_band(values: Sequence[float], level: float = CONFIDENCE) -> tuple[float, float, float]:
    """Mean and normal-approximation interval mean ± z·std/√n (std with divisor n − 1)."""
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, mean, mean
    half = float(norm.ppf(0.5 + level / 2.0) * arr.std(ddof=1) / math.sqrt(arr.size))
    return mean, mean - half, mean + half


def aggregate_histories(histories: Sequence[TrainHistory]) -> list[tuple]:
    """Per (batch, split): mean and CI over the seeds that reached that eval point."""
    grouped: dict[tuple[int, str], list[float]] = defaultdict(list)
    for history in histories:
        for r in history.records:
            grouped[(r.batch, r.split)].append(r.elbo)
    rows = []
    for (batch, split), values in sorted(grouped.items()):
        mean, lo, hi = confidence_band(values)
        rows.append((batch, split, mean, lo, hi, len(values)))
    return rows


def mle_table(sol: MleSolution, limit: int = 10) -> RichTable:
    table = RichTable(title=f"📐 Closed-form MLE (cut-off {sol.cutoff:.4g}, {sol.active_count}/{sol.kappa} active)")
    table.add_column("j", justify="right")
    table.add_column("λ_j", justify="right", style="cyan")
    table.add_column("‖Ŵ_j‖", justify="right")
    table.add_column("Predicted A_j", justify="right", style="green")
    activity = activity_predict(sol)
    norms = np.linalg.norm(sol.w_hat @ sol.rotation_r.T, axis=0)
    for j in range(min(sol.kappa, limit)):
        table.add_row(str(j + 1), f"{sol.eigenvalues[j]:.4g}", f"{norms[j]:.4g}", f"{activity[j]:.4f}")
    if sol.kappa > limit:
        table.add_row("…", f"(+{sol.kappa - limit} more)", "", "")
    return table


def activity_table(title: str, reports: dict[str, ActivityReport], distances: dict[str, float]) -> RichTable:
    table = RichTable(title=title)
    table.add_column("Source", style="cyan")
    table.add_column("Active", justify="right")
    table.add_column("Histogram [0,0.1) … [0.9,∞)")
    table.add_column("Distance", justify="right", style="yellow")
    for name, report in reports.items():
        hist = " ".join(str(int(c)) for c in report.histogram)
        dist = distances.get(name)
        table.add_row(name, str(report.active_count), hist, "—" if dist is None else f"{dist:.3f}")
    return table
