"""Generalization-gain profiling over the (train, eval) difficulty plane.

Each evaluation run is one model trained on a difficulty bin and tested on
every item.  Per run, a kernel-smoothed accuracy-vs-difficulty curve is
built using each item's difficulty uncertainty as its bandwidth; runs
trained on random bins average into a background curve.  Gain nodes
(train_center, eval_difficulty, curve - background) are interpolated with a
cubic radial basis function plus a linear tail and zero smoothing, so the
surface passes exactly through the nodes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    EmptyLog,
    EmptyLogs,
    InvalidParameter,
    MalformedRow,
    NonBinaryOutcome,
    SingularSystem,
    TooManyNodes,
    UnknownItem,
)

H_MIN = 0.02
GAP_REACH = 6.0
MAX_NODES = 10_000
SURFACE_SCHEMA = "gain-surface/1"


@dataclass(frozen=True)
class TrainBin:
    """Which bin a run was trained on: graded(index) or random(index)."""

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in ("graded", "random"):
            raise InvalidParameter(f"bin kind must be 'graded' or 'random', "
                                   f"got {self.kind!r}")


@dataclass(frozen=True)
class EvalLog:
    """One run's per-item outcomes plus the difficulty map they live on."""

    run_id: str
    train_bin: TrainBin
    train_center: float
    records: tuple[tuple[str, int], ...]
    difficulties: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        for item_id, outcome in self.records:
            if outcome not in (0, 1):
                raise NonBinaryOutcome(outcome)
            if item_id not in self.difficulties:
                raise UnknownItem(item_id)


def smooth_curve(log: EvalLog, eval_grid: Sequence[float],
                 h_min: float = H_MIN) -> np.ndarray:
    """Kernel-weighted accuracy at each grid point.

    Item i gets a Gaussian weight exp(-(x - d_i)^2 / (2 h_i^2)) with
    bandwidth h_i = max(normalized_sd_i, h_min).  Grid points farther than
    6 h from every item are gaps, returned as NaN rather than extrapolated.
    """
    if not log.records:
        raise EmptyLog(f"run {log.run_id!r} has no records")
    if h_min <= 0:
        raise InvalidParameter(f"h_min must be positive, got {h_min}")
    grid = np.asarray(eval_grid, dtype=float)
    d = np.array([log.difficulties[item][0] for item, _ in log.records])
    h = np.maximum(np.array([log.difficulties[item][1] for item, _ in log.records]),
                   h_min)
    outcome = np.array([float(o) for _, o in log.records])

    z = (grid[:, None] - d[None, :]) / h[None, :]
    w = np.exp(-0.5 * z * z)
    reachable = (np.abs(z) <= GAP_REACH).any(axis=1)
    total = w.sum(axis=1)
    curve = np.full(grid.shape, np.nan)
    ok = reachable & (total > 0)
    curve[ok] = (w[ok] @ outcome) / total[ok]
    return curve


def background_curve(random_logs: Sequence[EvalLog], eval_grid: Sequence[float],
                     h_min: float = H_MIN) -> np.ndarray:
    """Pointwise mean of the smoothed curves of the random-bin runs."""
    if not random_logs:
        raise EmptyLogs("background needs at least one random-bin run")
    curves = np.stack([smooth_curve(log, eval_grid, h_min) for log in random_logs])
    return curves.mean(axis=0)


# ---------------------------------------------------------------------------
# RBF interpolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RbfInterpolant:
    """Exact cubic-kernel interpolant with a degree-1 polynomial tail."""

    centers: np.ndarray
    coeffs: np.ndarray
    tail: np.ndarray

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        xf = np.broadcast_to(x, shape).reshape(-1)
        yf = np.broadcast_to(y, shape).reshape(-1)
        dx = xf[:, None] - self.centers[None, :, 0]
        dy = yf[:, None] - self.centers[None, :, 1]
        r = np.sqrt(dx * dx + dy * dy)
        vals = (r ** 3) @ self.coeffs + self.tail[0] + self.tail[1] * xf + self.tail[2] * yf
        out = vals.reshape(shape)
        return out if out.ndim else float(out)


def rbf_interpolate(nodes: Sequence[tuple[tuple[float, float], float]]) -> RbfInterpolant:
    """Fit the exact interpolant through ((x, y), value) nodes.

    Solves the dense symmetric system [[K, P], [P^T, 0]] [c; beta] = [f; 0]
    with K_ij = ||p_i - p_j||^3 and P = [1, x, y], whose side conditions
    sum(c) = sum(c x) = sum(c y) = 0 make the cubic kernel well-posed.
    Needs >= 3 distinct, non-collinear nodes; at most 10,000 nodes.
    """
    n = len(nodes)
    if n > MAX_NODES:
        raise TooManyNodes(f"{n} nodes exceed the {MAX_NODES}-node cap")
    if n < 3:
        raise SingularSystem(f"degree-1 tail needs at least 3 nodes, got {n}")
    pts = np.array([p for p, _ in nodes], dtype=float)
    f = np.array([v for _, v in nodes], dtype=float)
    if len({(float(x), float(y)) for x, y in pts}) != n:
        raise SingularSystem("duplicate node locations")
    p_mat = np.column_stack([np.ones(n), pts[:, 0], pts[:, 1]])
    if np.linalg.matrix_rank(p_mat) < 3:
        raise SingularSystem("nodes are collinear; linear tail is underdetermined")

    diff = pts[:, None, :] - pts[None, :, :]
    k = np.sqrt((diff * diff).sum(axis=2)) ** 3
    system = np.zeros((n + 3, n + 3))
    system[:n, :n] = k
    system[:n, n:] = p_mat
    system[n:, :n] = p_mat.T
    rhs = np.concatenate([f, np.zeros(3)])
    try:
        sol = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as err:
        raise SingularSystem(f"interpolation system is singular: {err}") from err
    if not np.all(np.isfinite(sol)):
        raise SingularSystem("interpolation system produced non-finite coefficients")
    return RbfInterpolant(centers=pts, coeffs=sol[:n], tail=sol[n:])


# ---------------------------------------------------------------------------
# gain surface
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GainSurface:
    """Interpolated generalization gain over (train, eval) difficulty."""

    nodes: tuple[tuple[float, float, float], ...]
    train_grid: np.ndarray
    eval_grid: np.ndarray
    grid: np.ndarray
    interpolant: RbfInterpolant
    max_node_residual: float
    kernel: str = "cubic"
    smoothing: float = 0.0
    poly_degree: int = 1


def default_grid(lo: float = 0.0, hi: float = 1.0, n: int = 101) -> np.ndarray:
    return np.linspace(lo, hi, n)


def gain_surface(graded_logs: Sequence[EvalLog], random_logs: Sequence[EvalLog],
                 eval_grid: Sequence[float] | None = None,
                 train_grid: Sequence[float] | None = None,
                 h_min: float = H_MIN) -> GainSurface:
    """Interpolated gain = graded-run curve minus random-run background.

    Nodes sit at (train_center_j, eval_grid_i, curve_j(i) - background(i));
    grid points where either curve has a gap contribute no node.  At least
    3 graded runs are required for the interpolation to be solvable.
    """
    if len(graded_logs) < 3:
        raise SingularSystem(
            f"gain surface needs >= 3 graded runs for a solvable linear tail, "
            f"got {len(graded_logs)}")
    eval_grid = default_grid() if eval_grid is None else np.asarray(eval_grid, float)
    train_grid = default_grid() if train_grid is None else np.asarray(train_grid, float)

    background = background_curve(random_logs, eval_grid, h_min)
    nodes: list[tuple[tuple[float, float], float]] = []
    for log in graded_logs:
        curve = smooth_curve(log, eval_grid, h_min)
        gain = curve - background
        for i, x in enumerate(eval_grid):
            if math.isfinite(gain[i]):
                nodes.append(((float(log.train_center), float(x)), float(gain[i])))

    interp = rbf_interpolate(nodes)
    residual = max(abs(interp(tx, ex) - val) for (tx, ex), val in nodes)
    tt, ee = np.meshgrid(train_grid, eval_grid, indexing="ij")
    grid = interp(tt, ee)
    return GainSurface(
        nodes=tuple((tx, ex, val) for (tx, ex), val in nodes),
        train_grid=train_grid, eval_grid=eval_grid, grid=grid,
        interpolant=interp, max_node_residual=float(residual))


def ridge_statistic(surface: GainSurface, band: float = 0.1) -> float:
    """Max gain near the train=eval diagonal minus the mean gain elsewhere.

    A positive value indicates models do best at difficulties near their
    training bin; the diagonal band is |train - eval| <= band.
    """
    tt, ee = np.meshgrid(surface.train_grid, surface.eval_grid, indexing="ij")
    near = np.abs(tt - ee) <= band
    if not near.any() or near.all():
        raise InvalidParameter(f"band {band} leaves no diagonal/off-diagonal split")
    return float(surface.grid[near].max() - surface.grid[~near].mean())


# ---------------------------------------------------------------------------
# ingest / export
# ---------------------------------------------------------------------------

def load_eval_logs_jsonl(text: str,
                         difficulties: Mapping[str, tuple[float, float]]
                         ) -> list[EvalLog]:
    """Parse runs from JSONL; the difficulty map comes from the scores file."""
    logs = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise MalformedRow(line_no, f"invalid JSON: {err.msg}") from err
        missing = {"run_id", "train_bin", "train_center", "records"} - set(obj)
        if missing:
            raise MalformedRow(line_no, f"missing fields {sorted(missing)}")
        try:
            logs.append(EvalLog(
                run_id=str(obj["run_id"]),
                train_bin=TrainBin(kind=str(obj["train_bin"]["kind"]),
                                   index=int(obj["train_bin"]["index"])),
                train_center=float(obj["train_center"]),
                records=tuple((str(r["item_id"]), int(r["outcome"]))
                              for r in obj["records"]),
                difficulties=difficulties,
            ))
        except (KeyError, TypeError, ValueError) as err:
            raise MalformedRow(line_no, f"bad run row: {err}") from err
    return logs


def surface_to_csv(surface: GainSurface) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["train_difficulty", "eval_difficulty", "gain"])
    for i, t in enumerate(surface.train_grid):
        for j, e in enumerate(surface.eval_grid):
            writer.writerow([repr(float(t)), repr(float(e)),
                             repr(float(surface.grid[i, j]))])
    return out.getvalue()


def surface_to_json(surface: GainSurface, metadata: dict | None = None) -> str:
    payload = {
        "schema": SURFACE_SCHEMA,
        "kernel": surface.kernel,
        "smoothing": surface.smoothing,
        "poly_degree": surface.poly_degree,
        "nodes": [[t, e, v] for t, e, v in surface.nodes],
        "train_grid": [float(v) for v in surface.train_grid],
        "eval_grid": [float(v) for v in surface.eval_grid],
        "grid": [[float(v) for v in row] for row in surface.grid],
        "max_node_residual": surface.max_node_residual,
        "metadata": metadata or {},
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def export_surface(surface: GainSurface, csv_path, json_path,
                   metadata: dict | None = None) -> None:
    """Write the CSV grid and JSON descriptor; byte-stable for fixed inputs."""
    Path(csv_path).write_text(surface_to_csv(surface), encoding="utf-8")
    Path(json_path).write_text(surface_to_json(surface, metadata), encoding="utf-8")
