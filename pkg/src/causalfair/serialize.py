"""Flat key-value text serialisation for tables, networks and configs.

One value per line, ``key=value``, floats at 17 significant digits so every
64-bit value round-trips exactly.  Array cells use dotted integer indices,
e.g. ``p_x_given_ys.1.0.3=0.25`` or ``layer0.w.4.7=-0.03125``.
"""
from __future__ import annotations

import hashlib

import numpy as np

from .errors import DataError
from .nets import Layer, Network
from .scm import DiscreteSCM


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def parse_kv_file(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key in out:
                raise DataError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value.strip()
    return out


def _array_lines(name: str, arr: np.ndarray) -> list[str]:
    return [
        f"{name}.{'.'.join(str(i) for i in idx)}={format_float(arr[idx])}"
        for idx in np.ndindex(arr.shape)
    ]


def _read_array(fields: dict[str, str], name: str, shape: tuple[int, ...], path) -> np.ndarray:
    arr = np.empty(shape, dtype=float)
    for idx in np.ndindex(shape):
        key = f"{name}.{'.'.join(str(i) for i in idx)}"
        if key not in fields:
            raise DataError(f"{path}: missing key {key!r}")
        try:
            arr[idx] = float(fields.pop(key))
        except ValueError as exc:
            raise DataError(f"{path}: bad float for {key!r}: {exc}") from exc
    return arr


def _read_int(fields: dict[str, str], key: str, path) -> int:
    if key not in fields:
        raise DataError(f"{path}: missing key {key!r}")
    try:
        return int(fields.pop(key))
    except ValueError as exc:
        raise DataError(f"{path}: bad integer for {key!r}: {exc}") from exc


def save_scm(scm: DiscreteSCM, path) -> None:
    lines = [
        f"card_s={scm.card_s}",
        f"card_y={scm.card_y}",
        f"card_x={scm.card_x}",
        f"card_yhat={scm.card_yhat}",
    ]
    lines += _array_lines("p_s", scm.p_s)
    lines += _array_lines("p_y_given_s", scm.p_y_given_s)
    lines += _array_lines("p_x_given_ys", scm.p_x_given_ys)
    lines += _array_lines("p_yhat_given_x", scm.p_yhat_given_x)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_scm(path) -> DiscreteSCM:
    fields = parse_kv_file(path)
    card_s = _read_int(fields, "card_s", path)
    card_y = _read_int(fields, "card_y", path)
    card_x = _read_int(fields, "card_x", path)
    card_yhat = _read_int(fields, "card_yhat", path)
    scm = DiscreteSCM(
        p_s=_read_array(fields, "p_s", (card_s,), path),
        p_y_given_s=_read_array(fields, "p_y_given_s", (card_s, card_y), path),
        p_x_given_ys=_read_array(fields, "p_x_given_ys", (card_y, card_s, card_x), path),
        p_yhat_given_x=_read_array(fields, "p_yhat_given_x", (card_x, card_yhat), path),
    )
    if fields:
        raise DataError(f"{path}: unexpected keys {sorted(fields)[:4]}")
    return scm


def save_network(net: Network, path) -> None:
    lines = [f"layers={len(net.layers)}"]
    for i, layer in enumerate(net.layers):
        lines.append(f"layer{i}.in={layer.w.shape[0]}")
        lines.append(f"layer{i}.out={layer.w.shape[1]}")
        lines.append(f"layer{i}.act={layer.activation}")
        lines += _array_lines(f"layer{i}.w", layer.w)
        lines += _array_lines(f"layer{i}.b", layer.b)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(path) -> Network:
    fields = parse_kv_file(path)
    n_layers = _read_int(fields, "layers", path)
    if n_layers < 1:
        raise DataError(f"{path}: network needs at least one layer")
    layers = []
    for i in range(n_layers):
        fan_in = _read_int(fields, f"layer{i}.in", path)
        fan_out = _read_int(fields, f"layer{i}.out", path)
        if f"layer{i}.act" not in fields:
            raise DataError(f"{path}: missing key 'layer{i}.act'")
        act = fields.pop(f"layer{i}.act")
        w = _read_array(fields, f"layer{i}.w", (fan_in, fan_out), path)
        b = _read_array(fields, f"layer{i}.b", (fan_out,), path)
        layers.append(Layer(w, b, act))
    if fields:
        raise DataError(f"{path}: unexpected keys {sorted(fields)[:4]}")
    return Network(tuple(layers))


def network_fingerprint(net: Network) -> str:
    """SHA-256 over the exact parameter bytes; equal iff bit-identical."""
    h = hashlib.sha256()
    for layer in net.layers:
        h.update(layer.activation.encode())
        h.update(np.ascontiguousarray(layer.w).tobytes())
        h.update(np.ascontiguousarray(layer.b).tobytes())
    return h.hexdigest()
