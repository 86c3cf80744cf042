"""File formats: matrix/path CSV, model/stats/estimate JSON.

Floats are written with ``repr`` (shortest decimal that round-trips binary64),
so every file reproduces the in-memory values bit for bit.
"""
from __future__ import annotations

import json
import math
from pathlib import Path as FsPath

import numpy as np

from .exceptions import ParseError
from .model import ModelSpec
from .simulate import Path, SufficientStats


def fmt(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"refusing to serialise non-finite value {x}")
    return repr(x)


def matrix_to_csv(m):
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return "".join(",".join(fmt(v) for v in row) + "\n" for row in m)


def write_matrix_csv(path, m):
    FsPath(path).write_text(matrix_to_csv(m))


def read_matrix_csv(path):
    path = FsPath(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError:
            bad = next(t for t in line.split(",") if not _is_float(t))
            raise ParseError(f"{path}:{lineno}: not a number: {bad.strip()!r}") from None
        if len(rows[-1]) != len(rows[0]):
            raise ParseError(
                f"{path}:{lineno}: expected {len(rows[0])} columns, found {len(rows[-1])}"
            )
    if not rows:
        raise ParseError(f"{path}: empty matrix file")
    m = np.array(rows)
    if not np.all(np.isfinite(m)):
        raise ParseError(f"{path}: contains NaN or Inf")
    return m


def _is_float(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def dump_json(obj, path=None):
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if path is not None:
        FsPath(path).write_text(text)
    return text


def _load_json(path):
    path = FsPath(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc


def _field(obj, key, path):
    if key not in obj:
        raise ParseError(f"{path}: missing field {key!r}")
    return obj[key]


def _square_from(entries, d, key, path):
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{path}: field {key!r} is not numeric") from None
    if arr.size != d * d:
        raise ParseError(f"{path}: field {key!r} has {arr.size} entries, expected d^2 = {d * d}")
    return arr.reshape(d, d)


def model_to_dict(model):
    return {
        "d": model.d,
        "s0": model.s0,
        "entries": [float(v) for v in model.a0.ravel()],
        "seed": model.seed,
        "margin": model.margin,
    }


def write_model_json(path, model):
    dump_json(model_to_dict(model), path)


def read_model(path):
    """Model JSON ``{d, s0, entries, seed, margin}``, or a bare matrix CSV."""
    path = FsPath(path)
    if path.suffix.lower() == ".csv":
        return ModelSpec(a0=read_matrix_csv(path))
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected a JSON object")
    d = _field(obj, "d", path)
    if not isinstance(d, int) or d < 1:
        raise ParseError(f"{path}: field 'd' must be a positive integer")
    a0 = _square_from(_field(obj, "entries", path), d, "entries", path)
    model = ModelSpec(a0=a0, seed=obj.get("seed"), margin=obj.get("margin"))
    if "s0" in obj and obj["s0"] != model.s0:
        raise ParseError(f"{path}: field 's0' = {obj['s0']} but entries have {model.s0} nonzeros")
    return model


def stats_to_dict(stats):
    out = {
        "d": stats.d,
        "T": stats.t_horizon,
        "c_hat": stats.c_hat.tolist(),
        "s_hat": stats.s_hat.tolist(),
    }
    if stats.eps_hat is not None:
        out["eps_hat"] = stats.eps_hat.tolist()
    if stats.meta:
        out["meta"] = stats.meta
    return out


def write_stats_json(path, stats):
    dump_json(stats_to_dict(stats), path)


def read_stats_json(path):
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected a JSON object")
    d = _field(obj, "d", path)
    t = _field(obj, "T", path)
    if not isinstance(t, (int, float)) or not t > 0:
        raise ParseError(f"{path}: field 'T' must be a positive number")
    c_hat = _square_from(_field(obj, "c_hat", path), d, "c_hat", path)
    s_hat = _square_from(_field(obj, "s_hat", path), d, "s_hat", path)
    eps = obj.get("eps_hat")
    eps = _square_from(eps, d, "eps_hat", path) if eps is not None else None
    return SufficientStats(c_hat=c_hat, s_hat=s_hat, t_horizon=float(t), eps_hat=eps,
                           meta=obj.get("meta", {}))


def write_path_csv(path, trajectory):
    """One line per grid point: t, X^1, ..., X^d."""
    times = trajectory.times
    with open(path, "w") as fh:
        for t, x in zip(times, trajectory.states):
            fh.write(fmt(t) + "," + ",".join(fmt(v) for v in x) + "\n")


def read_path_csv(path):
    m = read_matrix_csv(path)
    if m.shape[0] < 2 or m.shape[1] < 2:
        raise ParseError(f"{path}: need at least two rows and a time column plus one coordinate")
    dt = float(m[1, 0] - m[0, 0])
    return Path(states=m[:, 1:], dt=dt)
