"""Verification harness for two conditional-independence claims.

Claim 1: if S and X are conditionally independent given Y, the direct effect
of S on the prediction vanishes for every pair of S values.  Claim 2: under
the same condition the conditional information I(S; Yhat | Y) is zero, i.e.
the features are a complete mediator of any remaining S influence.

Both conditions are sufficient but not necessary, which the counterexample
constructors demonstrate: a constant classifier P(Yhat | X) wipes out the
direct effect and the conditional information while P(X | Y, S) still leaks
S heavily.  Their tables use dyadic rationals so the advertised zeros hold
exactly in 64-bit arithmetic.

Verification draws random models, replaces P(X | Y, S) by its S-average to
enforce the independence, and aggregates worst-case deviations.  Reports are
deterministic in the base seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .metrics import conditional_mutual_information
from .scm import DiscreteSCM, PathSelector, direct_effect, joint_distribution, random_scm


@dataclass(frozen=True)
class VerificationReport:
    """Aggregated worst-case numbers from one verification run."""

    theorem: int
    trials: int
    max_abs_de: float
    max_cmi: float
    violations: int
    seed: int
    tol: float

    def key_value(self) -> str:
        return (
            f"theorem={self.theorem} trials={self.trials} max_abs_de={self.max_abs_de!r} "
            f"max_cmi={self.max_cmi!r} violations={self.violations} seed={self.seed} tol={self.tol!r}"
        )


def feature_independence_given_label(scm: DiscreteSCM) -> float:
    """I(S; X | Y) of the model's exact joint."""
    return conditional_mutual_information(joint_distribution(scm).marginal("s", "x", "y"))


def prediction_independence_given_label(scm: DiscreteSCM) -> float:
    """I(S; Yhat | Y) of the model's exact joint."""
    return conditional_mutual_information(joint_distribution(scm).marginal("s", "yhat", "y"))


def enforce_conditional_independence(scm: DiscreteSCM) -> DiscreteSCM:
    """Replace P(X | Y, S) by the S-average P(X | Y); other tables unchanged.

    The average weights each S by its posterior P(s | y), so the (Y, X)
    marginal is preserved; rows with P(y) = 0 fall back to a plain mean.
    An already-independent model passes through (up to one rounding unit).
    """
    p_sy = scm.p_s[:, None] * scm.p_y_given_s  # (s, y)
    p_y = p_sy.sum(axis=0)
    weights = np.empty_like(p_sy)
    for yv in range(scm.card_y):
        if p_y[yv] > 0.0:
            weights[:, yv] = p_sy[:, yv] / p_y[yv]
        else:
            weights[:, yv] = 1.0 / scm.card_s
    # averaged[y, x] = sum_s w(s|y) P(x|y,s)
    averaged = np.einsum("sy,ysx->yx", weights, scm.p_x_given_ys)
    pooled = np.repeat(averaged[:, None, :], scm.card_s, axis=1)
    return DiscreteSCM(scm.p_s, scm.p_y_given_s, pooled, scm.p_yhat_given_x)


def _max_abs_direct_effect(scm: DiscreteSCM) -> float:
    worst = 0.0
    for s_plus, s_minus in permutations(range(scm.card_s), 2):
        de = direct_effect(scm, PathSelector(s_plus, s_minus), s_minus)
        worst = max(worst, float(np.abs(de).max()))
    return worst


def _verify(theorem: int, trials: int, seed: int, tol: float) -> VerificationReport:
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    rng = np.random.default_rng(seed)
    max_de = 0.0
    max_cmi = 0.0
    violations = 0
    for _ in range(trials):
        cards = tuple(int(c) for c in rng.integers(2, 5, size=4))
        scm = enforce_conditional_independence(random_scm(int(rng.integers(2**62)), cards))
        de = _max_abs_direct_effect(scm)
        cmi = (
            feature_independence_given_label(scm)
            if theorem == 1
            else prediction_independence_given_label(scm)
        )
        max_de = max(max_de, de)
        max_cmi = max(max_cmi, cmi)
        if (de if theorem == 1 else cmi) > tol:
            violations += 1
    return VerificationReport(theorem, trials, max_de, max_cmi, violations, seed, tol)


def verify_theorem1(trials: int, seed: int, tol: float = 1e-10) -> VerificationReport:
    """Random models with cardinalities in {2,3,4}: after enforcement every
    pairwise direct effect must vanish within tol."""
    return _verify(1, trials, seed, tol)


def verify_theorem2(trials: int, seed: int, tol: float = 1e-10) -> VerificationReport:
    """Random models with cardinalities in {2,3,4}: after enforcement the
    conditional information I(S; Yhat | Y) must vanish within tol."""
    return _verify(2, trials, seed, tol)


def counterexample_theorem1() -> DiscreteSCM:
    """Constant classifier, strongly S-dependent features: DE = 0 exactly
    while I(S; X | Y) stays far from zero."""
    return DiscreteSCM(
        p_s=[0.5, 0.5],
        p_y_given_s=[[0.5, 0.5], [0.5, 0.5]],
        p_x_given_ys=[
            [[0.75, 0.25], [0.25, 0.75]],
            [[0.75, 0.25], [0.25, 0.75]],
        ],
        p_yhat_given_x=[[0.5, 0.5], [0.5, 0.5]],
    )


def counterexample_theorem2() -> DiscreteSCM:
    """Constant classifier with a live S -> Y edge: I(S; Yhat | Y) = 0 exactly
    while I(S; X | Y) stays far from zero."""
    return DiscreteSCM(
        p_s=[0.5, 0.5],
        p_y_given_s=[[0.75, 0.25], [0.25, 0.75]],
        p_x_given_ys=[
            [[0.875, 0.125], [0.125, 0.875]],
            [[0.875, 0.125], [0.125, 0.875]],
        ],
        p_yhat_given_x=[[0.25, 0.75], [0.25, 0.75]],
    )
