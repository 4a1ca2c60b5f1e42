"""Information-theoretic and group fairness metrics.

All information quantities use natural logarithms (nats).  Plug-in estimators
evaluate the defining sums directly on (empirical) probability tables; cells
with zero mass contribute zero.  Tiny negative round-off (above -1e-12) can
survive in mutual-information values computed from float tables and is left
untouched, except where a metric is promised non-negative.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError, EvaluationError
from .scm import JointTable

log = np.log  # nats throughout


@dataclass(frozen=True)
class PredictionRecord:
    """One evaluated example: binary s, y, yhat plus an optional score in [0, 1]."""

    s: int
    y: int
    yhat: int
    score: float | None = None

    def __post_init__(self):
        for name, v in (("s", self.s), ("y", self.y), ("yhat", self.yhat)):
            if v not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1, got {v!r}")
        if self.score is not None and not 0.0 <= float(self.score) <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score!r}")


@dataclass(frozen=True)
class FairnessReport:
    """Held-out summary: accuracy, AUC, parity/opportunity gaps, and the
    conditional-information fairness score in nats."""

    acc: float
    auc: float
    dp: float
    eo: float
    adf_nats: float

    def __post_init__(self):
        for name, v in (("acc", self.acc), ("auc", self.auc), ("dp", self.dp), ("eo", self.eo)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if self.adf_nats < 0.0:
            raise ValueError(f"adf_nats must be non-negative, got {self.adf_nats!r}")


def entropy(dist) -> float:
    """Shannon entropy -sum p log p of a 1-d distribution, in nats."""
    d = np.asarray(dist, dtype=float).ravel()
    if d.size == 0:
        raise ValueError("empty distribution")
    if np.any(d < 0.0):
        raise ValueError("distribution has negative entries")
    if abs(d.sum() - 1.0) > 1e-6:
        raise ValueError(f"distribution mass {d.sum()!r} deviates from 1 beyond 1e-6")
    pos = d[d > 0.0]
    return float(-(pos * log(pos)).sum())


def mutual_information(joint: JointTable) -> float:
    """I(A;B) = sum p(a,b) log[p(a,b) / (p(a)p(b))] for a two-variable table."""
    if len(joint.variables) != 2:
        raise ValueError(f"mutual information needs a 2-variable table, got {joint.variables}")
    p = joint.probs
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    mask = p > 0.0
    ratio = p[mask] / (np.outer(pa, pb)[mask])
    return float((p[mask] * log(ratio)).sum())


def conditional_mutual_information(joint: JointTable) -> float:
    """I(A;B|C) for a three-variable table with the conditioner C on the last axis.

    Evaluates sum p(a,b,c) log[p(c) p(a,b,c) / (p(a,c) p(b,c))].
    """
    if len(joint.variables) != 3:
        raise ValueError(
            f"conditional mutual information needs a 3-variable table, got {joint.variables}"
        )
    p = joint.probs
    pc = p.sum(axis=(0, 1))
    pac = p.sum(axis=1)
    pbc = p.sum(axis=0)
    mask = p > 0.0
    num = pc[None, None, :] * p
    den = pac[:, None, :] * pbc[None, :, :]
    return float((p[mask] * log(num[mask] / den[mask])).sum())


def empirical_joint(samples, cards, variables: tuple[str, ...] | None = None) -> JointTable:
    """Normalised count table over integer tuples; out-of-range rows are data errors."""
    arr = np.asarray(samples)
    if arr.ndim != 2:
        raise DataError(f"samples must be a 2-d array of tuples, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise DataError("empirical joint needs at least one sample")
    cards = tuple(int(c) for c in cards)
    if arr.shape[1] != len(cards):
        raise DataError(f"samples have {arr.shape[1]} columns but {len(cards)} cardinalities given")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            bad = int(np.argmax(np.any(~np.isfinite(arr) | (arr != np.floor(arr)), axis=1)))
            raise DataError(f"row {bad}: non-integer sample value")
    idx = arr.astype(np.int64)
    for j, card in enumerate(cards):
        off = (idx[:, j] < 0) | (idx[:, j] >= card)
        if off.any():
            row = int(np.argmax(off))
            raise DataError(
                f"row {row}: value {idx[row, j]} out of range for variable {j} (cardinality {card})"
            )
    flat = np.ravel_multi_index(tuple(idx.T), cards)
    counts = np.bincount(flat, minlength=int(np.prod(cards)))
    probs = counts.reshape(cards) / arr.shape[0]
    names = tuple(variables) if variables is not None else tuple(f"v{j}" for j in range(len(cards)))
    return JointTable(names, probs)


def _columns(records) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray | None]:
    records = list(records)
    if not records:
        raise EvaluationError("no records")
    s = np.array([r.s for r in records])
    y = np.array([r.y for r in records])
    yhat = np.array([r.yhat for r in records])
    if all(r.score is not None for r in records):
        score = np.array([float(r.score) for r in records])
    else:
        # Without a full score column, rank on the hard predictions.
        score = None
    return s, y, yhat, score


def demographic_parity(records) -> float:
    """|P(yhat=1 | s=1) - P(yhat=1 | s=0)| over the record batch."""
    s, _, yhat, _ = _columns(records)
    rates = []
    for grp in (0, 1):
        m = s == grp
        if not m.any():
            raise EvaluationError(f"demographic parity undefined: no records with s={grp}")
        rates.append(yhat[m].mean())
    return float(abs(rates[1] - rates[0]))


def equalized_opportunity(records) -> float:
    """|TPR(s=1) - TPR(s=0)|: the positive-label stratum in each group must be non-empty."""
    s, y, yhat, _ = _columns(records)
    tprs = []
    for grp in (0, 1):
        m = (s == grp) & (y == 1)
        if not m.any():
            raise EvaluationError(f"equalized opportunity undefined: empty stratum s={grp}, y=1")
        tprs.append(yhat[m].mean())
    return float(abs(tprs[1] - tprs[0]))


def adf(records) -> float:
    """Plug-in conditional information I(S; Yhat | Y) in nats, floored at 0."""
    s, y, yhat, _ = _columns(records)
    table = empirical_joint(np.stack([s, yhat, y], axis=1), (2, 2, 2), ("s", "yhat", "y"))
    return max(0.0, conditional_mutual_information(table))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    # 1-based ranks with ties sharing their average rank.
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    avg = ends - (counts - 1) / 2.0
    return avg[inverse]


def auc_score(scores, labels) -> float:
    """Rank-statistic AUC; tied scores contribute 1/2."""
    sc = np.asarray(scores, dtype=float)
    lab = np.asarray(labels)
    if sc.shape != lab.shape or sc.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    pos = lab == 1
    n1 = int(pos.sum())
    n0 = len(lab) - n1
    if n1 == 0 or n0 == 0:
        raise EvaluationError("AUC undefined: labels contain a single class")
    ranks = _average_ranks(sc)
    u = ranks[pos].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def fairness_report(records) -> FairnessReport:
    """Accuracy, AUC, DP, EO and the conditional-information score for one batch."""
    s, y, yhat, score = _columns(records)
    acc = float((yhat == y).mean())
    auc = auc_score(score if score is not None else yhat.astype(float), y)
    return FairnessReport(
        acc=acc,
        auc=auc,
        dp=demographic_parity(records),
        eo=equalized_opportunity(records),
        adf_nats=adf(records),
    )


def records_from_arrays(s, y, yhat, score=None) -> list[PredictionRecord]:
    cols = [np.asarray(s), np.asarray(y), np.asarray(yhat)]
    if score is not None:
        cols.append(np.asarray(score, dtype=float))
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("columns must have equal length")
    if score is None:
        return [PredictionRecord(int(a), int(b), int(c)) for a, b, c in zip(*cols)]
    return [PredictionRecord(int(a), int(b), int(c), float(d)) for a, b, c, d in zip(*cols)]


# --- prediction files and display scaling -----------------------------------

def read_predictions(path) -> list[PredictionRecord]:
    """Read a ``s,y,yhat[,score]`` comma-separated file with a header row."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise DataError(f"{path}: empty prediction file")
    header = [h.strip() for h in rows[0]]
    if header not in (["s", "y", "yhat"], ["s", "y", "yhat", "score"]):
        raise DataError(f"{path}:1: expected header s,y,yhat[,score], got {','.join(header)!r}")
    has_score = len(header) == 4
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            score = float(row[3]) if has_score and row[3].strip() != "" else None
            records.append(PredictionRecord(int(row[0]), int(row[1]), int(row[2]), score))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    if not records:
        raise DataError(f"{path}: no data rows")
    return records


def raw_lines(report: FairnessReport) -> list[str]:
    return [
        f"acc={report.acc!r}",
        f"auc={report.auc!r}",
        f"dp={report.dp!r}",
        f"eo={report.eo!r}",
        f"adf_nats={report.adf_nats!r}",
    ]


def scaled_lines(report: FairnessReport) -> list[str]:
    """Display scaling: ACC/AUC in percent, DP/EO x 10^2, ADF x 10^3."""
    return [
        f"ACC_pct = {report.acc * 100:.2f}",
        f"AUC_pct = {report.auc * 100:.2f}",
        f"EO_e-2 = {report.eo * 100:.2f}",
        f"DP_e-2 = {report.dp * 100:.2f}",
        f"ADF_e-3 = {report.adf_nats * 1000:.2f}",
    ]


def table_row(report: FairnessReport) -> str:
    """One display-scaled table row: ACC% AUC% EOx100 DPx100 ADFx1000, 2 decimals."""
    return (
        f"{report.acc * 100:.2f} {report.auc * 100:.2f} "
        f"{report.eo * 100:.2f} {report.dp * 100:.2f} {report.adf_nats * 1000:.2f}"
    )


def write_report(report: FairnessReport, path) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(raw_lines(report)) + "\n")


def load_report(path) -> FairnessReport:
    fields = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            try:
                fields[key.strip()] = float(value)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    expected = {"acc", "auc", "dp", "eo", "adf_nats"}
    if set(fields) != expected:
        raise DataError(f"{path}: report needs keys {sorted(expected)}, got {sorted(fields)}")
    return FairnessReport(**fields)
