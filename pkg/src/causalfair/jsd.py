"""Jensen-Shannon mutual-information lower bound and encoder pretraining.

A critic f(x, e) scores feature/embedding pairs; the bound on one batch is

    value = mean_pos[ -softplus(-f(x, e)) ] - mean_neg[ softplus(f(x, e')) ]

where positives pair each x with its own embedding and negatives re-pair the
batch with a fixed-point-free row permutation.  The value lives in
(-2 log 2, 0): an uninformative critic scores exactly -2 log 2, and the
supremum over critics approaches 0 from below as the pairing becomes
perfectly distinguishable.

Pretraining alternates ascent on the bound (critic, then encoder) with
descent on a supervised cross-entropy head, weighting the two encoder
objectives 1:1.  Afterwards the encoder and head are frozen by convention;
all functions here are value-semantic, so freezing is simply not updating.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from .data import SampleBatch
from .errors import EvaluationError, TrainingError
from .nets import (
    GradientSet,
    Network,
    add_gradients,
    backward,
    cross_entropy_with_grad,
    forward,
    init_network,
    scale_gradients,
    step,
)
from .metrics import auc_score


def softplus(z):
    """log(1 + e^z) without overflow for large |z|."""
    z = np.asarray(z, dtype=float)
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0)


def _sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class EmbeddingBatch:
    """Rows of encoder outputs aligned with a feature batch."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError(f"embeddings must be 2-d, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("embeddings contain non-finite entries")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)


def _cycle_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    # A uniformly conjugated n-cycle: never any fixed point for n >= 2.
    sigma = rng.permutation(n)
    perm = np.empty(n, dtype=int)
    perm[sigma] = sigma[np.roll(np.arange(n), -1)]
    return perm


def shuffle_negatives(e: EmbeddingBatch, seed: int) -> EmbeddingBatch:
    """Re-pair the batch rows with a fixed-point-free permutation."""
    if len(e) < 2:
        raise ValueError(f"need at least 2 rows to build negatives, got {len(e)}")
    perm = _cycle_permutation(len(e), np.random.default_rng(seed))
    return EmbeddingBatch(e.rows[perm])


@dataclass(frozen=True)
class JsdEstimate:
    """Bound value plus gradients for ascent: w.r.t. the critic parameters and
    w.r.t. both embedding inputs."""

    value: float
    critic_grads: GradientSet
    pos_embedding_grad: np.ndarray
    neg_embedding_grad: np.ndarray


def jsd_mi_estimate(critic: Network, x, e_pos: EmbeddingBatch, e_neg: EmbeddingBatch) -> JsdEstimate:
    """Evaluate the bound on one batch and differentiate it.

    The critic consumes concat(x, e) rows and emits one logit.  Gradients are
    of the bound itself (ascent direction); callers descending with ``step``
    should negate them.
    """
    xa = np.asarray(x, dtype=float)
    if xa.ndim != 2:
        raise ValueError(f"x must be 2-d, got shape {xa.shape}")
    if len(e_pos) != len(xa) or len(e_neg) != len(xa):
        raise ValueError(
            f"batch sizes differ: x={len(xa)}, e_pos={len(e_pos)}, e_neg={len(e_neg)}"
        )
    if e_pos.rows.shape[1] != e_neg.rows.shape[1]:
        raise ValueError("positive and negative embeddings have different widths")
    width = xa.shape[1] + e_pos.rows.shape[1]
    if critic.in_dim != width:
        raise ValueError(f"critic expects width {critic.in_dim}, pairs have width {width}")
    if critic.out_dim != 1:
        raise ValueError(f"critic must emit a single logit, emits {critic.out_dim}")

    n = len(xa)
    acts_pos = forward(critic, np.concatenate([xa, e_pos.rows], axis=1))
    acts_neg = forward(critic, np.concatenate([xa, e_neg.rows], axis=1))
    t_pos = acts_pos[-1][:, 0]
    t_neg = acts_neg[-1][:, 0]
    value = float(np.mean(-softplus(-t_pos)) - np.mean(softplus(t_neg)))

    # d value / d t: sigmoid(-t)/n on positives, -sigmoid(t)/n on negatives.
    grads_pos, gin_pos = backward(critic, acts_pos, (_sigmoid(-t_pos) / n)[:, None])
    grads_neg, gin_neg = backward(critic, acts_neg, (-_sigmoid(t_neg) / n)[:, None])
    d = xa.shape[1]
    return JsdEstimate(
        value=value,
        critic_grads=add_gradients(grads_pos, grads_neg),
        pos_embedding_grad=gin_pos[:, d:],
        neg_embedding_grad=gin_neg[:, d:],
    )


@dataclass(frozen=True)
class PretrainEpoch:
    epoch: int
    jsd: float
    task_loss: float
    holdout_acc: float


@dataclass(frozen=True)
class PretrainResult:
    encoder: Network
    critic: Network
    head: Network
    history: tuple[PretrainEpoch, ...]


def format_pretrain_history(history) -> str:
    lines = ["epoch,jsd,task_loss,holdout_acc"]
    for row in history:
        lines.append(f"{row.epoch},{row.jsd!r},{row.task_loss!r},{row.holdout_acc!r}")
    return "\n".join(lines) + "\n"


def _holdout_accuracy(encoder: Network, head: Network, batch: SampleBatch) -> float:
    if len(batch) == 0:
        return float("nan")
    logits = forward(head, forward(encoder, batch.x)[-1])[-1]
    return float((logits.argmax(axis=1) == batch.y).mean())


def pretrain_encoder(
    encoder: Network,
    critic: Network,
    head: Network,
    data: SampleBatch,
    cfg: TrainConfig,
    halve_every: int = 0,
) -> PretrainResult:
    """Joint representation pretraining on unperturbed features.

    Per batch: one critic ascent step on the bound, then one encoder/head
    step on (cross-entropy - bound) with the label head trained alongside.
    History rows carry epoch-mean bound value, epoch-mean task loss and
    holdout accuracy.  Zero epochs returns the networks unchanged.
    """
    if len(data) < 4:
        raise ValueError(f"pretraining needs at least 4 rows, got {len(data)}")
    if head.in_dim != encoder.out_dim:
        raise ValueError(f"head expects width {head.in_dim}, encoder emits {encoder.out_dim}")
    if critic.in_dim != data.dim + encoder.out_dim:
        raise ValueError(
            f"critic expects width {critic.in_dim}, pairs have width {data.dim + encoder.out_dim}"
        )
    train, hold = data.split(cfg.split, cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    history = []
    for epoch in range(cfg.epochs):
        lr = cfg.lr_g * 0.5 ** (epoch // halve_every) if halve_every else cfg.lr_g
        order = rng.permutation(len(train))
        jsd_sum = ce_sum = 0.0
        n_batches = 0
        for start in range(0, len(train), cfg.batch):
            idx = order[start : start + cfg.batch]
            if len(idx) < 2:
                continue  # negatives need a second row to swap with
            xb, yb = train.x[idx], train.y[idx]
            perm = _cycle_permutation(len(idx), rng)

            # Critic ascent on the current encoder.
            emb = forward(encoder, xb)[-1]
            est = jsd_mi_estimate(critic, xb, EmbeddingBatch(emb), EmbeddingBatch(emb[perm]))
            critic = step(critic, scale_gradients(est.critic_grads, -1.0), lr)

            # Encoder + head step against the updated critic.
            acts_enc = forward(encoder, xb)
            emb = acts_enc[-1]
            est = jsd_mi_estimate(critic, xb, EmbeddingBatch(emb), EmbeddingBatch(emb[perm]))
            acts_head = forward(head, emb)
            ce, dlogits = cross_entropy_with_grad(acts_head[-1], yb)
            head_grads, grad_emb = backward(head, acts_head, dlogits)
            # Encoder objective: minimise (cross-entropy - bound).  The bound
            # reaches the encoder through the positive rows and, via the
            # permutation, through the negative rows.
            grad_emb = grad_emb - est.pos_embedding_grad
            grad_emb[perm] -= est.neg_embedding_grad
            enc_grads, _ = backward(encoder, acts_enc, grad_emb)
            encoder = step(encoder, enc_grads, lr)
            head = step(head, head_grads, lr)

            if not (np.isfinite(est.value) and np.isfinite(ce)):
                raise TrainingError(f"non-finite pretraining loss at epoch {epoch}")
            jsd_sum += est.value
            ce_sum += ce
            n_batches += 1
        if n_batches == 0:
            raise TrainingError(f"epoch {epoch}: no usable batches (batch size {cfg.batch})")
        history.append(
            PretrainEpoch(
                epoch=epoch,
                jsd=jsd_sum / n_batches,
                task_loss=ce_sum / n_batches,
                holdout_acc=_holdout_accuracy(encoder, head, hold),
            )
        )
    return PretrainResult(encoder, critic, head, tuple(history))


def holdout_jsd(encoder: Network, critic: Network, data: SampleBatch, seed: int = 0) -> float:
    """Bound value on one full batch with seeded negatives; no updates."""
    emb = EmbeddingBatch(forward(encoder, data.x)[-1])
    return jsd_mi_estimate(critic, data.x, emb, shuffle_negatives(emb, seed)).value


def fine_tune_head(
    encoder: Network,
    head_hidden: tuple[int, ...],
    task_data: SampleBatch,
    cfg: TrainConfig,
    lr: float | None = None,
) -> tuple[Network, float, float]:
    """Train a fresh binary head on frozen embeddings; returns (head, acc, auc).

    ``head_hidden`` lists hidden widths; () gives a linear head.  Accuracy and
    AUC are computed on the holdout slice of the task data.
    """
    if len(np.unique(task_data.y)) < 2:
        raise EvaluationError("task labels contain a single class")
    train, hold = task_data.split(cfg.split, cfg.seed)
    dims = (encoder.out_dim, *head_hidden, 2)
    acts = ("relu",) * len(head_hidden) + ("identity",)
    head = init_network(dims, acts, seed=cfg.seed)
    emb_train = forward(encoder, train.x)[-1]  # encoder frozen: embed once
    rng = np.random.default_rng(cfg.seed)
    rate = cfg.lr_g if lr is None else lr
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train))
        for start in range(0, len(train), cfg.batch):
            idx = order[start : start + cfg.batch]
            acts_head = forward(head, emb_train[idx])
            ce, dlogits = cross_entropy_with_grad(acts_head[-1], train.y[idx])
            if not np.isfinite(ce):
                raise TrainingError(f"non-finite head loss at epoch {epoch}")
            grads, _ = backward(head, acts_head, dlogits)
            head = step(head, grads, rate)
    logits = forward(head, forward(encoder, hold.x)[-1])[-1]
    probs = np.exp(logits - logits.max(axis=1, keepdims=True))
    probs /= probs.sum(axis=1, keepdims=True)
    acc = float((logits.argmax(axis=1) == hold.y).mean())
    auc = auc_score(probs[:, 1], hold.y)
    return head, acc, auc
