"""Synthetic tabular data with separately tunable direct and indirect bias.

Each row draws s uniform over {0, 1} and y Bernoulli with a group-dependent
rate, then places features on two fixed orthogonal unit directions:

    x = squash(indirect_strength * y * u_y + direct_strength * s * u_s + noise)

with iid Gaussian noise and the logistic squash into (0, 1).  u_s carries the
direct S -> X channel, u_y the indirect S -> Y -> X channel, so either causal
route can be switched off exactly by zeroing its strength.

For ground truth, features project onto (u_s, u_y) and threshold at their
medians, giving a four-state discrete feature whose conditional tables are
estimated by Monte Carlo.  With the identity read-out as the prediction,
exact effect computations on that discrete model recover the qualitative
direct/indirect structure of the generator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SampleBatch
from .scm import DiscreteSCM


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters; label_bias is (P(y=1|s=0), P(y=1|s=1))."""

    dim: int = 8
    direct_strength: float = 1.0
    indirect_strength: float = 1.3
    label_bias: tuple[float, float] = (0.2, 0.8)
    noise_sd: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be at least 2, got {self.dim}")
        bias = tuple(float(b) for b in self.label_bias)
        if len(bias) != 2 or not all(0.0 < b < 1.0 for b in bias):
            raise ValueError(f"label_bias must be two rates strictly inside (0, 1), got {self.label_bias}")
        if self.noise_sd <= 0.0:
            raise ValueError(f"noise_sd must be positive, got {self.noise_sd}")
        object.__setattr__(self, "label_bias", bias)


def signal_directions(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Fixed orthogonal unit vectors: u_s on even coordinates, u_y on odd."""
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    u_s = np.zeros(dim)
    u_y = np.zeros(dim)
    u_s[0::2] = 1.0
    u_y[1::2] = 1.0
    return u_s / np.linalg.norm(u_s), u_y / np.linalg.norm(u_y)


def generate_dataset(spec: SynthSpec, n: int) -> SampleBatch:
    """n rows of (s, y, x); deterministic in spec.seed."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(spec.seed)
    s = rng.integers(0, 2, size=n)
    bias = np.asarray(spec.label_bias)
    y = (rng.random(n) < bias[s]).astype(int)
    u_s, u_y = signal_directions(spec.dim)
    base = (
        spec.indirect_strength * y[:, None] * u_y
        + spec.direct_strength * s[:, None] * u_s
        + rng.normal(0.0, spec.noise_sd, size=(n, spec.dim))
    )
    x = 1.0 / (1.0 + np.exp(-base))
    return SampleBatch(s, y, x)


def ground_truth_discrete_projection(spec: SynthSpec, n_estimate: int = 100_000) -> DiscreteSCM:
    """Discretise the generator into a four-state feature model.

    Projections of x onto u_s and u_y are cut at their medians; the bin index
    is 2 * (proj_s high) + (proj_y high).  Conditional tables come from
    counting a fresh Monte-Carlo sample (derived seed), with uniform fallback
    for empty strata; the prediction is the identity read-out of the bin.
    """
    if n_estimate < 1000:
        raise ValueError(f"n_estimate too small for stable tables, got {n_estimate}")
    probe_seed = int(np.random.default_rng(spec.seed).integers(2**62))
    batch = generate_dataset(
        SynthSpec(
            dim=spec.dim,
            direct_strength=spec.direct_strength,
            indirect_strength=spec.indirect_strength,
            label_bias=spec.label_bias,
            noise_sd=spec.noise_sd,
            seed=probe_seed,
        ),
        n_estimate,
    )
    u_s, u_y = signal_directions(spec.dim)
    proj_s = batch.x @ u_s
    proj_y = batch.x @ u_y
    bins = 2 * (proj_s > np.median(proj_s)).astype(int) + (proj_y > np.median(proj_y)).astype(int)

    s, y = batch.s, batch.y
    p_s = np.bincount(s, minlength=2) / len(s)
    p_y_given_s = np.empty((2, 2))
    for sv in range(2):
        rows = y[s == sv]
        p_y_given_s[sv] = (
            np.bincount(rows, minlength=2) / len(rows) if len(rows) else np.full(2, 0.5)
        )
    p_x_given_ys = np.empty((2, 2, 4))
    for yv in range(2):
        for sv in range(2):
            rows = bins[(y == yv) & (s == sv)]
            p_x_given_ys[yv, sv] = (
                np.bincount(rows, minlength=4) / len(rows) if len(rows) else np.full(4, 0.25)
            )
    return DiscreteSCM(p_s, p_y_given_s, p_x_given_ys, np.eye(4))
