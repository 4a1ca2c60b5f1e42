"""Training configuration: one flat dataclass, one flat text format.

Config files are ``key=value`` lines whose keys mirror the field names
exactly; omitted keys keep their defaults.  Default values for the mask
budget, the loss weights, the learning rates and the split follow the
experiment defaults this package regression-tests against.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import DataError
from .serialize import format_float, parse_kv_file


@dataclass(frozen=True)
class TrainConfig:
    """Knobs shared by pretraining and adversarial training.

    eta: additive mask budget (mask entries lie in [-eta, eta])
    alpha: weight of the prediction-entropy bonus in the generator loss
    beta: weight of the task-information term in the generator loss
    lr_g: learning rate for the generator side (and for pretraining)
    lr_d: learning rate for the adversary
    epochs, batch: plain gradient-descent schedule
    seed: drives shuffling, initialisation and the train/holdout split
    split: train fraction; the remainder is held out for per-epoch reports
    """

    eta: float = 0.2
    alpha: float = 1.0
    beta: float = 1.0
    lr_g: float = 1e-4
    lr_d: float = 1e-4
    epochs: int = 50
    batch: int = 64
    seed: int = 0
    split: float = 0.9

    def __post_init__(self):
        if self.eta < 0.0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError(f"loss weights must be non-negative, got alpha={self.alpha}, beta={self.beta}")
        if self.lr_g <= 0.0 or self.lr_d <= 0.0:
            raise ValueError(f"learning rates must be positive, got lr_g={self.lr_g}, lr_d={self.lr_d}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")
        if self.batch < 1:
            raise ValueError(f"batch must be at least 1, got {self.batch}")
        if not 0.0 < self.split < 1.0:
            raise ValueError(f"split must lie in (0, 1), got {self.split}")


_INT_FIELDS = {"epochs", "batch", "seed"}


def load_train_config(path) -> TrainConfig:
    raw = parse_kv_file(path)
    known = {f.name for f in fields(TrainConfig)}
    unknown = set(raw) - known
    if unknown:
        raise DataError(f"{path}: unknown config keys {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        try:
            kwargs[key] = int(value) if key in _INT_FIELDS else float(value)
        except ValueError as exc:
            raise DataError(f"{path}: bad value for {key!r}: {exc}") from exc
    try:
        return TrainConfig(**kwargs)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def save_train_config(cfg: TrainConfig, path) -> None:
    lines = []
    for key, value in asdict(cfg).items():
        lines.append(f"{key}={value}" if key in _INT_FIELDS else f"{key}={format_float(value)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
