"""Exact inference on a four-variable discrete causal model.

The graph is fixed:

    S -> Y,  S -> X,  Y -> X,  X -> Yhat

with S a sensitive attribute, Y the true label, X observed features and Yhat
a prediction that depends on the features only.  The joint factorises as

    P(s, y, x, yhat) = P(s) P(y|s) P(x|y,s) P(yhat|x)

and every quantity in this module is computed by exact summation over that
product, so results carry no sampling error.

Causal effects of S on Yhat are vectors over the prediction categories.  The
total effect contrasts two interventions on S; the direct effect re-routes S
only along the edge S -> X while the indirect path through Y is held at the
reference value, and the indirect effect is the exact remainder.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SampleBatch
from .errors import StructuralError

MAX_CARDINALITY = 64
ROW_MASS_TOL = 1e-9


def _table(values, name: str, ndim: int) -> np.ndarray:
    t = np.array(values, dtype=float)
    if t.ndim != ndim:
        raise StructuralError(f"{name} must have {ndim} axes, got shape {t.shape}")
    if t.size == 0:
        raise StructuralError(f"{name} is empty")
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise StructuralError(f"{name} has entries outside [0, 1]")
    sums = t.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > ROW_MASS_TOL):
        worst = float(np.abs(sums - 1.0).max())
        raise StructuralError(f"rows of {name} must sum to 1 within {ROW_MASS_TOL}, off by {worst:.3g}")
    t.flags.writeable = False
    return t


@dataclass(frozen=True)
class DiscreteSCM:
    """Conditional probability tables for the fixed graph, validated and read-only.

    Shapes:
        p_s:            (card_s,)
        p_y_given_s:    (card_s, card_y)          row s is P(Y | S=s)
        p_x_given_ys:   (card_y, card_s, card_x)  row (y, s) is P(X | Y=y, S=s)
        p_yhat_given_x: (card_x, card_yhat)       row x is P(Yhat | X=x)
    """

    p_s: np.ndarray
    p_y_given_s: np.ndarray
    p_x_given_ys: np.ndarray
    p_yhat_given_x: np.ndarray

    def __post_init__(self):
        p_s = _table(self.p_s, "p_s", 1)
        p_y = _table(self.p_y_given_s, "p_y_given_s", 2)
        p_x = _table(self.p_x_given_ys, "p_x_given_ys", 3)
        p_h = _table(self.p_yhat_given_x, "p_yhat_given_x", 2)
        card_s, card_y = p_y.shape
        if p_s.shape != (card_s,):
            raise StructuralError(f"p_s has {p_s.shape[0]} entries but p_y_given_s expects {card_s}")
        if p_x.shape[:2] != (card_y, card_s):
            raise StructuralError(
                f"p_x_given_ys leading axes {p_x.shape[:2]} must be (card_y={card_y}, card_s={card_s})"
            )
        if p_h.shape[0] != p_x.shape[2]:
            raise StructuralError(
                f"p_yhat_given_x has {p_h.shape[0]} feature rows but p_x_given_ys emits {p_x.shape[2]}"
            )
        for name, card in (("S", card_s), ("Y", card_y), ("X", p_x.shape[2]), ("Yhat", p_h.shape[1])):
            if card > MAX_CARDINALITY:
                raise StructuralError(f"cardinality of {name} is {card}, cap is {MAX_CARDINALITY}")
        object.__setattr__(self, "p_s", p_s)
        object.__setattr__(self, "p_y_given_s", p_y)
        object.__setattr__(self, "p_x_given_ys", p_x)
        object.__setattr__(self, "p_yhat_given_x", p_h)

    @property
    def card_s(self) -> int:
        return self.p_s.shape[0]

    @property
    def card_y(self) -> int:
        return self.p_y_given_s.shape[1]

    @property
    def card_x(self) -> int:
        return self.p_x_given_ys.shape[2]

    @property
    def card_yhat(self) -> int:
        return self.p_yhat_given_x.shape[1]


@dataclass(frozen=True)
class PathSelector:
    """Values assigned to S on the two causal routes into the prediction.

    ``direct_value`` drives the edge S -> X (the path S -> X -> Yhat);
    ``indirect_value`` drives S -> Y (the path S -> Y -> X -> Yhat).
    """

    direct_value: int
    indirect_value: int


@dataclass(frozen=True)
class JointTable:
    """A named joint distribution: one axis per variable, mass 1, read-only."""

    variables: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        names = tuple(self.variables)
        if len(set(names)) != len(names):
            raise StructuralError(f"duplicate variable names in {names}")
        p = np.array(self.probs, dtype=float)
        if p.ndim != len(names):
            raise StructuralError(f"{len(names)} variables but table has {p.ndim} axes")
        if np.any(p < 0.0):
            raise StructuralError("joint table has negative entries")
        mass = float(p.sum())
        if abs(mass - 1.0) > ROW_MASS_TOL:
            raise StructuralError(f"joint mass {mass!r} deviates from 1 beyond {ROW_MASS_TOL}")
        p.flags.writeable = False
        object.__setattr__(self, "variables", names)
        object.__setattr__(self, "probs", p)

    def marginal(self, *names: str) -> "JointTable":
        """Sum out every variable not listed; axes follow the requested order."""
        if not names:
            raise ValueError("marginal needs at least one variable name")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate names in marginal request {names}")
        for n in names:
            if n not in self.variables:
                raise ValueError(f"unknown variable {n!r}; table holds {self.variables}")
        drop = tuple(i for i, v in enumerate(self.variables) if v not in names)
        probs = self.probs.sum(axis=drop) if drop else self.probs
        kept = [v for v in self.variables if v in names]
        probs = probs.transpose([kept.index(n) for n in names])
        return JointTable(tuple(names), probs)


def joint_distribution(scm: DiscreteSCM) -> JointTable:
    """Exact joint over (s, y, x, yhat) by multiplying the four tables."""
    probs = np.einsum(
        "s,sy,ysx,xh->syxh",
        scm.p_s,
        scm.p_y_given_s,
        scm.p_x_given_ys,
        scm.p_yhat_given_x,
    )
    return JointTable(("s", "y", "x", "yhat"), probs)


def _check_s(scm: DiscreteSCM, value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)):
        raise ValueError(f"{name} must be an integer S-value, got {value!r}")
    if not 0 <= value < scm.card_s:
        raise ValueError(f"{name}={value} outside S range [0, {scm.card_s})")
    return int(value)


def _routed_prediction(scm: DiscreteSCM, s_direct: int, s_indirect: int) -> np.ndarray:
    # P(yhat) when S -> X sees s_direct and S -> Y sees s_indirect:
    #   sum_{y,x} P(y | s_indirect) P(x | y, s_direct) P(yhat | x)
    return np.einsum(
        "y,yx,xh->h",
        scm.p_y_given_s[s_indirect],
        scm.p_x_given_ys[:, s_direct, :],
        scm.p_yhat_given_x,
    )


def total_causal_effect(scm: DiscreteSCM, s_plus: int, s_minus: int) -> np.ndarray:
    """P(Yhat | do(S=s_plus)) - P(Yhat | do(S=s_minus)) as a vector over Yhat."""
    sp = _check_s(scm, s_plus, "s_plus")
    sm = _check_s(scm, s_minus, "s_minus")
    return _routed_prediction(scm, sp, sp) - _routed_prediction(scm, sm, sm)


def direct_effect(scm: DiscreteSCM, sel: PathSelector, s_minus: int) -> np.ndarray:
    """Effect of switching S on the direct route only.

    Equals sum_{x,y} P(yhat|x) [P(x|y,s_plus) - P(x|y,s_minus)] P(y|s_minus)
    where s_plus = sel.direct_value; the indirect route stays at s_minus, so
    ``sel.indirect_value`` must equal ``s_minus``.
    """
    sd = _check_s(scm, sel.direct_value, "sel.direct_value")
    si = _check_s(scm, sel.indirect_value, "sel.indirect_value")
    sm = _check_s(scm, s_minus, "s_minus")
    if si != sm:
        raise ValueError(
            f"direct effect holds the indirect route at the reference arm: "
            f"sel.indirect_value={si} must equal s_minus={sm}"
        )
    return _routed_prediction(scm, sd, si) - _routed_prediction(scm, sm, sm)


def indirect_effect(scm: DiscreteSCM, s_plus: int, s_minus: int) -> np.ndarray:
    """Total minus direct effect; the decomposition TCE = DE + IE is exact."""
    tce = total_causal_effect(scm, s_plus, s_minus)
    de = direct_effect(scm, PathSelector(s_plus, s_minus), s_minus)
    return tce - de


def positive_class_effect(effect: np.ndarray) -> float:
    """Scalar convenience: the Yhat=1 component of a binary effect vector."""
    vec = np.asarray(effect, dtype=float)
    if vec.shape != (2,):
        raise ValueError(f"scalar effect is defined for binary Yhat only, got shape {vec.shape}")
    return float(vec[1])


def _draw_categories(u: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # Row i of `rows` is a distribution; pick the category whose cumulative
    # band contains u[i].
    cum = np.cumsum(rows, axis=1)
    idx = (u[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, rows.shape[1] - 1)


def sample(scm: DiscreteSCM, n: int, seed: int) -> SampleBatch:
    """Ancestral sampling of n rows (s, y, x, yhat); x is stored as one
    category-index column."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    s = _draw_categories(rng.random(n), np.broadcast_to(scm.p_s, (n, scm.card_s)))
    y = _draw_categories(rng.random(n), scm.p_y_given_s[s])
    x = _draw_categories(rng.random(n), scm.p_x_given_ys[y, s])
    yhat = _draw_categories(rng.random(n), scm.p_yhat_given_x[x])
    return SampleBatch(s, y, x[:, None].astype(float), yhat)


def random_scm(seed: int, cards: tuple[int, int, int, int] = (2, 2, 2, 2)) -> DiscreteSCM:
    """Random tables with every conditional row symmetric-Dirichlet(1),
    realised as normalised unit exponentials."""
    card_s, card_y, card_x, card_yhat = cards
    for name, card in zip(("S", "Y", "X", "Yhat"), cards):
        if not 2 <= card <= MAX_CARDINALITY:
            raise ValueError(f"cardinality of {name} must lie in [2, {MAX_CARDINALITY}], got {card}")
    rng = np.random.default_rng(seed)

    def rows(*shape):
        raw = rng.standard_exponential(shape)
        return raw / raw.sum(axis=-1, keepdims=True)

    return DiscreteSCM(
        p_s=rows(card_s),
        p_y_given_s=rows(card_s, card_y),
        p_x_given_ys=rows(card_y, card_s, card_x),
        p_yhat_given_x=rows(card_x, card_yhat),
    )
