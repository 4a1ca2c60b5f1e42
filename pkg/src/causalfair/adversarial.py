"""Adversarial feature masking against a frozen prediction pipeline.

A generator g proposes a bounded additive mask for each feature row,

    mask = eta * g(x)        with g ending in a tanh layer, so |mask| <= eta
    x~   = clamp(x + mask, 0, 1)

and a label-conditioned discriminator d tries to recover the sensitive
attribute from (x~, one-hot y).  Mutual-information terms are replaced by
cross-entropy surrogates:

    I(S^; S) := H(S) - CE(d(x~, y), s)
    I(Y^; Y) := H(Y) - CE(head(encoder(x~)), y)

giving the objectives (both minimised by their own player, one d step then
one g step per batch):

    L_d = CE(d(x~, y), s) - H(S)
    L_g = I(S^; S) - alpha * H(S^) - beta * I(Y^; Y)

H(S) and H(Y) are batch-empirical label entropies (constants per batch), so
a discriminator at chance makes both sides sit at zero for balanced groups.
The encoder and head stay frozen throughout: their parameters receive no
updates, only input gradients pass through them.  The clamp backpropagates
as identity inside [0, 1] and zero outside.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from .data import SampleBatch
from .errors import TrainingError
from .metrics import FairnessReport, fairness_report, records_from_arrays
from .nets import (
    GradientSet,
    Network,
    backward,
    cross_entropy_with_grad,
    forward,
    init_network,
    mean_prediction_entropy_with_grad,
    step,
)

MASK_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class MaskedBatch:
    """A perturbed feature batch and the mask that produced it."""

    x_tilde: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        xt = np.array(self.x_tilde, dtype=float)
        mk = np.array(self.mask, dtype=float)
        if xt.shape != mk.shape or xt.ndim != 2:
            raise ValueError(f"x_tilde {xt.shape} and mask {mk.shape} must be matching 2-d arrays")
        if not (np.all(np.isfinite(xt)) and np.all(np.isfinite(mk))):
            raise ValueError("masked batch contains non-finite entries")
        if np.any(xt < 0.0) or np.any(xt > 1.0):
            raise ValueError("x_tilde must lie in [0, 1]")
        xt.flags.writeable = False
        mk.flags.writeable = False
        object.__setattr__(self, "x_tilde", xt)
        object.__setattr__(self, "mask", mk)


def generate_mask(g: Network, x, eta: float) -> MaskedBatch:
    """Run the generator and clamp; asserts the |mask| <= eta budget."""
    if eta < 0.0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    xa = np.asarray(x, dtype=float)
    out = forward(g, xa)[-1]
    if out.shape != xa.shape:
        raise ValueError(f"generator emits shape {out.shape}, features have {xa.shape}")
    if np.abs(out).max(initial=0.0) > 1.0:
        raise ValueError("generator output exceeds [-1, 1]; its final layer must be bounding (tanh)")
    mask = eta * out
    if np.abs(mask).max(initial=0.0) > eta + MASK_BOUND_SLACK:
        raise ValueError("mask magnitude exceeded the eta budget")
    return MaskedBatch(np.clip(xa + mask, 0.0, 1.0), mask)


def _one_hot(labels: np.ndarray, width: int) -> np.ndarray:
    lab = np.asarray(labels)
    if np.any(lab < 0) or np.any(lab >= width):
        raise ValueError(f"labels must lie in [0, {width}) for one-hot conditioning")
    out = np.zeros((len(lab), width))
    out[np.arange(len(lab)), lab] = 1.0
    return out


def discriminator_predict(d: Network, masked: MaskedBatch, y) -> np.ndarray:
    """Logits over S from the label-conditioned discriminator input (x~, onehot y)."""
    n_y = d.in_dim - masked.x_tilde.shape[1]
    if n_y < 2:
        raise ValueError(
            f"discriminator input width {d.in_dim} leaves no room for one-hot labels "
            f"next to {masked.x_tilde.shape[1]} features"
        )
    return forward(d, np.concatenate([masked.x_tilde, _one_hot(y, n_y)], axis=1))[-1]


def _batch_entropy(labels: np.ndarray, width: int) -> float:
    counts = np.bincount(labels, minlength=width)
    p = counts[counts > 0] / len(labels)
    return float(-(p * np.log(p)).sum())


def discriminator_loss(d: Network, masked: MaskedBatch, s, y) -> tuple[float, GradientSet]:
    """L_d = CE(d(x~, y), s) - H(S); the mask is treated as a fixed input."""
    n_y = d.in_dim - masked.x_tilde.shape[1]
    acts = forward(d, np.concatenate([masked.x_tilde, _one_hot(y, n_y)], axis=1))
    ce, dlogits = cross_entropy_with_grad(acts[-1], s)
    grads, _ = backward(d, acts, dlogits)
    loss = ce - _batch_entropy(np.asarray(s), acts[-1].shape[1])
    return loss, grads


def generator_loss(
    g: Network,
    d: Network,
    encoder: Network,
    head: Network,
    x,
    s,
    y,
    cfg: TrainConfig,
) -> tuple[float, GradientSet]:
    """L_g and its gradient with respect to the generator parameters only.

    The loss needs the generator's own forward activations, so it re-derives
    the mask from ``x`` internally.  The discriminator, encoder and head act
    as fixed functions: gradients flow through their inputs, never into their
    parameters.
    """
    xa = np.asarray(x, dtype=float)
    sa = np.asarray(s)
    ya = np.asarray(y)
    acts_g = forward(g, xa)
    out = acts_g[-1]
    if out.shape != xa.shape:
        raise ValueError(f"generator emits shape {out.shape}, features have {xa.shape}")
    mask = cfg.eta * out
    pre_clamp = xa + mask
    x_tilde = np.clip(pre_clamp, 0.0, 1.0)

    # Adversary path: surrogate I(S^;S) = H(S) - CE, plus the entropy bonus.
    n_s = d.out_dim
    n_y_onehot = d.in_dim - xa.shape[1]
    acts_d = forward(d, np.concatenate([x_tilde, _one_hot(ya, n_y_onehot)], axis=1))
    ce_d, dlog_ce = cross_entropy_with_grad(acts_d[-1], sa)
    ent_pred, dlog_ent = mean_prediction_entropy_with_grad(acts_d[-1])
    mi_s = _batch_entropy(sa, n_s) - ce_d

    # Frozen task path: surrogate I(Y^;Y) = H(Y) - CE.
    acts_enc = forward(encoder, x_tilde)
    acts_head = forward(head, acts_enc[-1])
    ce_f, dlog_f = cross_entropy_with_grad(acts_head[-1], ya)
    mi_y = _batch_entropy(ya, acts_head[-1].shape[1]) - ce_f

    loss = mi_s - cfg.alpha * ent_pred - cfg.beta * mi_y

    # d(loss)/d(d-logits) = -dlog_ce - alpha * dlog_ent; input gradients only.
    _, gin_d = backward(d, acts_d, -dlog_ce - cfg.alpha * dlog_ent)
    # d(loss)/d(head-logits) = +beta * dlog_f.
    _, gin_head = backward(head, acts_head, cfg.beta * dlog_f)
    _, gin_enc = backward(encoder, acts_enc, gin_head)
    grad_x_tilde = gin_d[:, : xa.shape[1]] + gin_enc

    # Clamp: pass-through inside [0, 1], zero outside; then d(mask)/d(out) = eta.
    inside = (pre_clamp >= 0.0) & (pre_clamp <= 1.0)
    grad_out = grad_x_tilde * inside * cfg.eta
    g_grads, _ = backward(g, acts_g, grad_out)
    return float(loss), g_grads


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    report: FairnessReport


@dataclass(frozen=True)
class AdversarialResult:
    generator: Network
    discriminator: Network
    history: tuple[EpochMetrics, ...]


def format_history(history) -> str:
    lines = ["epoch,acc,auc,dp,eo,adf"]
    for row in history:
        r = row.report
        lines.append(f"{row.epoch},{r.acc!r},{r.auc!r},{r.dp!r},{r.eo!r},{r.adf_nats!r}")
    return "\n".join(lines) + "\n"


def evaluate_pipeline(
    g: Network, encoder: Network, head: Network, data: SampleBatch, eta: float
) -> FairnessReport:
    """Mask, encode, predict, and score the batch.  eta=0 reproduces the
    frozen pipeline on raw features exactly."""
    if len(data) == 0:
        raise ValueError("cannot evaluate an empty batch")
    masked = generate_mask(g, data.x, eta)
    logits = forward(head, forward(encoder, masked.x_tilde)[-1])[-1]
    z = logits - logits.max(axis=1, keepdims=True)
    probs = np.exp(z)
    probs /= probs.sum(axis=1, keepdims=True)
    yhat = logits.argmax(axis=1)
    records = records_from_arrays(data.s, data.y, yhat, probs[:, 1])
    return fairness_report(records)


def adversarial_train(
    g: Network,
    d: Network,
    encoder: Network,
    head: Network,
    data: SampleBatch,
    cfg: TrainConfig,
    halve_every: int = 0,
) -> AdversarialResult:
    """Alternating minimisation: one discriminator step, then one generator
    step per batch; per-epoch holdout metrics through the frozen pipeline.
    """
    if len(data) < 4:
        raise ValueError(f"adversarial training needs at least 4 rows, got {len(data)}")
    train, hold = data.split(cfg.split, cfg.seed)
    if len(hold) == 0:
        raise ValueError("holdout slice is empty; lower cfg.split")
    rng = np.random.default_rng(cfg.seed)
    history = []
    for epoch in range(cfg.epochs):
        lr_g = cfg.lr_g * 0.5 ** (epoch // halve_every) if halve_every else cfg.lr_g
        lr_d = cfg.lr_d * 0.5 ** (epoch // halve_every) if halve_every else cfg.lr_d
        order = rng.permutation(len(train))
        for start in range(0, len(train), cfg.batch):
            idx = order[start : start + cfg.batch]
            xb, sb, yb = train.x[idx], train.s[idx], train.y[idx]

            masked = generate_mask(g, xb, cfg.eta)
            loss_d, d_grads = discriminator_loss(d, masked, sb, yb)
            d = step(d, d_grads, lr_d)

            loss_g, g_grads = generator_loss(g, d, encoder, head, xb, sb, yb, cfg)
            g = step(g, g_grads, lr_g)

            if not (np.isfinite(loss_d) and np.isfinite(loss_g)):
                raise TrainingError(f"non-finite adversarial loss at epoch {epoch}")
        history.append(EpochMetrics(epoch, evaluate_pipeline(g, encoder, head, hold, cfg.eta)))
    return AdversarialResult(g, d, tuple(history))


@dataclass(frozen=True)
class PipelineNets:
    """The five networks of one experiment, freshly initialised."""

    encoder: Network
    head: Network
    critic: Network
    generator: Network
    discriminator: Network


def build_pipeline_networks(
    dim: int,
    seed: int,
    hidden: int = 32,
    embed: int = 16,
    n_s: int = 2,
    n_y: int = 2,
) -> PipelineNets:
    """Default architectures: relu encoder to a linear embedding, linear head,
    two-hidden-layer critic on (x, e) pairs, tanh-bounded generator, and a
    two-hidden-layer label-conditioned discriminator (mirrors the critic so the
    attacker is at least as expressive as the auxiliary networks)."""
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(5)]
    return PipelineNets(
        encoder=init_network((dim, hidden, embed), ("relu", "identity"), seeds[0]),
        head=init_network((embed, n_y), ("identity",), seeds[1]),
        critic=init_network((dim + embed, hidden, hidden, 1), ("relu", "relu", "identity"), seeds[2]),
        generator=init_network((dim, hidden, hidden, dim), ("relu", "relu", "tanh"), seeds[3]),
        discriminator=init_network((dim + n_y, hidden, hidden, n_s), ("relu", "relu", "identity"), seeds[4]),
    )
