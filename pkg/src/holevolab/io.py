"""JSON and CSV formats.

Matrices are row-major nested arrays of ``[re, im]`` pairs (plain reals are
accepted on input). Seeds are unsigned 64-bit integers written as decimal
strings. Floats are written with ``repr`` so files round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import fields, is_dataclass

import numpy as np

from .channels import Channel, ConstraintSet, make_channel
from .errors import HolevoLabError
from .states import Ensemble, random_state


class FormatError(HolevoLabError, ValueError):
    """A JSON document does not follow the expected layout."""


MAX_SEED = 2**64 - 1
GAP_COLUMNS = ("instance_id", "lhs", "rhs", "gap", "bound", "within_bound", "seed")


# -- scalars and matrices --------------------------------------------------


def parse_seed(value) -> int:
    if isinstance(value, bool):
        raise FormatError("seed must be a decimal string")
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise FormatError(f"seed {value!r} is not a decimal integer") from None
    if not 0 <= seed <= MAX_SEED:
        raise FormatError(f"seed {seed} outside the unsigned 64-bit range")
    return seed


def format_seed(seed) -> str:
    return str(parse_seed(seed))


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in m]
    return [encode_matrix(row) for row in m]


def _is_real(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_pair(x) -> bool:
    return isinstance(x, list) and len(x) == 2 and all(_is_real(v) for v in x)


def _entries(seq) -> list:
    """A row of reals or a row of ``[re, im]`` pairs."""
    if not isinstance(seq, list) or not seq:
        raise FormatError("rows must be non-empty lists")
    if all(_is_real(x) for x in seq):
        return [complex(x) for x in seq]
    if all(_is_pair(x) for x in seq):
        return [complex(x[0], x[1]) for x in seq]
    raise FormatError(f"row {seq!r} mixes reals and [re, im] pairs or holds other values")


def decode_matrix(obj) -> np.ndarray:
    """Inverse of :func:`encode_matrix`.

    Nesting depth decides the reading: rows of reals form a real matrix, rows
    of ``[re, im]`` pairs a complex one.
    """
    if not isinstance(obj, list) or not obj:
        raise FormatError("matrix must be a non-empty list of rows")
    rows = [_entries(row) for row in obj]
    if len({len(r) for r in rows}) != 1:
        raise FormatError("matrix rows have different lengths")
    return np.array(rows, dtype=complex)


def decode_vector(obj) -> np.ndarray:
    """A list of reals or of ``[re, im]`` pairs."""
    return np.array(_entries(obj), dtype=complex)


# -- channels ----------------------------------------------------------------

_MATRIX_PARAMS = {"u"}
_MATRIX_LIST_PARAMS = {"povm", "states", "kraus"}


def encode_channel(channel: Channel) -> dict:
    return {"kind": "kraus", "dim_in": channel.dim_in, "dim_out": channel.dim_out,
            "kraus": [encode_matrix(k) for k in channel.kraus]}


def decode_channel(obj) -> Channel:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise FormatError("channel must be an object with a 'kind'")
    kind = obj["kind"]
    if kind == "kraus":
        try:
            kraus = np.array([decode_matrix(k) for k in obj["kraus"]])
            din, dout = int(obj["dim_in"]), int(obj["dim_out"])
        except KeyError as exc:
            raise FormatError(f"kraus channel lacks {exc}") from None
        if kraus.ndim != 3 or kraus.shape[1:] != (dout, din):
            raise FormatError(f"kraus operators must be {dout}x{din}")
        return make_channel("kraus", kraus=kraus)
    params = dict(obj.get("params", {}))
    for key in list(params):
        if key in _MATRIX_PARAMS:
            params[key] = decode_matrix(params[key])
        elif key in _MATRIX_LIST_PARAMS:
            params[key] = [decode_matrix(m) for m in params[key]]
        elif key == "seed":
            params[key] = parse_seed(params[key])
    try:
        return make_channel(kind, **params)
    except TypeError as exc:
        raise FormatError(f"bad parameters for channel kind {kind!r}: {exc}") from None


# -- ensembles, states, constraints -------------------------------------------


def encode_ensemble(ensemble: Ensemble) -> dict:
    return {"items": [{"p": float(p), "state": encode_matrix(s)} for p, s in ensemble]}


def decode_ensemble(obj) -> Ensemble:
    if not isinstance(obj, dict) or not isinstance(obj.get("items"), list):
        raise FormatError("ensemble must be an object with an 'items' list")
    try:
        return Ensemble.from_items((float(it["p"]), decode_matrix(it["state"])) for it in obj["items"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"ensemble item lacks {exc}") from None


def decode_state(obj) -> np.ndarray:
    """A matrix, ``{"maximally_mixed": d}``, ``{"pure": vector}`` or ``{"random": {dim, rank, seed}}``."""
    if isinstance(obj, dict):
        if "maximally_mixed" in obj:
            d = int(obj["maximally_mixed"])
            return np.eye(d, dtype=complex) / d
        if "pure" in obj:
            v = decode_vector(obj["pure"])
            v = v / np.linalg.norm(v)
            return np.outer(v, v.conj())
        if "random" in obj:
            spec = obj["random"]
            return random_state(int(spec["dim"]), spec.get("rank"), parse_seed(spec["seed"]))
        raise FormatError(f"unknown state form {sorted(obj)}")
    return decode_matrix(obj)


def encode_constraint(cs: ConstraintSet) -> dict:
    if cs.variant == "full":
        return {"variant": "full", "dim": cs.dim}
    if cs.variant == "fixed":
        return {"variant": "fixed", "state": encode_matrix(cs.state)}
    return {"variant": "linear", "ops": [encode_matrix(a) for a in cs.ops], "alphas": list(cs.alphas)}


def decode_constraint(obj) -> ConstraintSet:
    if not isinstance(obj, dict):
        raise FormatError("constraint must be an object")
    variant = obj.get("variant")
    if variant == "full":
        return ConstraintSet.full(int(obj["dim"]))
    if variant == "fixed":
        return ConstraintSet.fixed(decode_state(obj["state"]))
    if variant == "linear":
        return ConstraintSet.linear([decode_matrix(a) for a in obj["ops"]], obj["alphas"])
    raise FormatError(f"unknown constraint variant {variant!r}")


# -- output --------------------------------------------------------------------


def to_jsonable(obj):
    """Recursively convert results (arrays, dataclasses, numpy scalars) to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Ensemble):
        return encode_ensemble(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj) and np.abs(obj.imag).max(initial=0.0) > 0:
            return encode_matrix(obj)
        return to_jsonable(obj.real.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Channel):
        return encode_channel(obj)
    if is_dataclass(obj):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
        if hasattr(obj, "within_bound"):
            out["within_bound"] = bool(obj.within_bound)
        if hasattr(obj, "passed") and "passed" not in out:
            out["passed"] = bool(obj.passed)
        return out
    return obj


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_gap_csv(rows, path) -> None:
    """Rows are dicts with the gap-sweep columns."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAP_COLUMNS)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in GAP_COLUMNS])


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def require(obj: dict, key: str, kind=None):
    if key not in obj:
        raise FormatError(f"missing key {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise FormatError(f"key {key!r} has the wrong type")
    return val

