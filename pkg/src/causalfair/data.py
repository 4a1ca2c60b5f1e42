"""Aligned sample batches and the plain-text dataset format.

A batch holds one row per observation: sensitive attribute ``s``, label ``y``,
feature matrix ``x`` and, when available, a model prediction ``yhat``.
Synthetic generators emit features in [0, 1]; the discrete sampler stores
category indices in a single column.  Datasets round-trip through a
comma-separated text file with header ``s,y,x_0,...,x_{d-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def _int_column(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            raise DataError(f"{name} must be integer-valued")
    out = np.array(arr, dtype=np.int64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SampleBatch:
    """Columns of observed tuples (s, y, x, optional yhat), equal length, read-only."""

    s: np.ndarray
    y: np.ndarray
    x: np.ndarray
    yhat: np.ndarray | None = None

    def __post_init__(self):
        s = _int_column(self.s, "s")
        y = _int_column(self.y, "y")
        x = np.array(self.x, dtype=float)
        if x.ndim != 2:
            raise DataError(f"x must be a 2-d matrix, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DataError("x contains non-finite entries")
        x.flags.writeable = False
        yhat = None if self.yhat is None else _int_column(self.yhat, "yhat")
        n = len(s)
        for name, col in (("y", y), ("x", x)) + (() if yhat is None else (("yhat", yhat),)):
            if len(col) != n:
                raise DataError(f"column {name} has {len(col)} rows, expected {n}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "yhat", yhat)

    def __len__(self) -> int:
        return len(self.s)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def subset(self, indices) -> "SampleBatch":
        idx = np.asarray(indices)
        return SampleBatch(
            self.s[idx],
            self.y[idx],
            self.x[idx],
            None if self.yhat is None else self.yhat[idx],
        )

    def split(self, train_fraction: float, seed: int) -> tuple["SampleBatch", "SampleBatch"]:
        """Shuffled (train, holdout) split; deterministic in ``seed``."""
        if not 0.0 < train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
        order = np.random.default_rng(seed).permutation(len(self))
        cut = int(len(self) * train_fraction)
        return self.subset(order[:cut]), self.subset(order[cut:])


def save_dataset(batch: SampleBatch, path) -> None:
    """Write ``s,y,x_0..x_{d-1}`` rows; features at 17 significant digits."""
    cols = ",".join(f"x_{j}" for j in range(batch.dim))
    lines = [f"s,y,{cols}"]
    for i in range(len(batch)):
        feats = ",".join(format(v, ".17g") for v in batch.x[i])
        lines.append(f"{batch.s[i]},{batch.y[i]},{feats}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path) -> SampleBatch:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty dataset file")
    header = lines[0].split(",")
    if header[:2] != ["s", "y"] or len(header) < 3:
        raise DataError(f"{path}:1: expected header s,y,x_0,..., got {lines[0]!r}")
    for j, name in enumerate(header[2:]):
        if name != f"x_{j}":
            raise DataError(f"{path}:1: feature column {j} named {name!r}, expected x_{j}")
    dim = len(header) - 2
    s, y, rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != dim + 2:
            raise DataError(f"{path}:{lineno}: expected {dim + 2} fields, got {len(parts)}")
        try:
            s.append(int(parts[0]))
            y.append(int(parts[1]))
            rows.append([float(v) for v in parts[2:]])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    return SampleBatch(np.array(s), np.array(y), np.array(rows))
