"""JSON encoding for states, operators, channels and reports.

Conventions: complex entries are [re, im] pairs, matrices are row-major
nested lists, spaces are lists of {"name", "dim"}. Emission is canonical
(sorted keys, fixed separators) so equal inputs produce byte-identical
files; timestamps never enter report bodies.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import ShapeError
from .qcore import (
    DensityMatrix,
    Instrument,
    KrausChannel,
    Label,
    Observable,
    TestEnsemble,
    _as_space,
)
from .way import Implementation

__all__ = [
    "encode_matrix",
    "decode_matrix",
    "encode_space",
    "decode_space",
    "encode_state",
    "decode_state",
    "encode_observable",
    "decode_observable",
    "encode_channel",
    "decode_channel",
    "encode_instrument",
    "decode_instrument",
    "encode_ensemble",
    "decode_ensemble",
    "encode_implementation",
    "decode_implementation",
    "canonical_json",
    "atomic_write_text",
]


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_matrix(obj) -> np.ndarray:
    rows = []
    for row in obj:
        out = []
        for v in row:
            if isinstance(v, (int, float)):
                out.append(complex(v, 0.0))
            elif isinstance(v, (list, tuple)) and len(v) == 2:
                out.append(complex(float(v[0]), float(v[1])))
            else:
                raise ShapeError(f"matrix entry must be a number or [re, im], got {v!r}")
        rows.append(out)
    try:
        m = np.array(rows, dtype=complex)
    except ValueError as exc:
        raise ShapeError(f"matrix rows have inconsistent lengths: {exc}") from exc
    if m.ndim != 2:
        raise ShapeError("matrix must be two-dimensional")
    return m


def encode_space(sp) -> list:
    return [{"name": l.name, "dim": int(l.dim)} for l in _as_space(sp)]


def decode_space(obj) -> tuple:
    return tuple(Label(e["name"], int(e["dim"])) for e in obj)


def encode_state(rho: DensityMatrix) -> dict:
    return {"space": encode_space(rho.space), "matrix": encode_matrix(rho.data)}


def decode_state(obj) -> DensityMatrix:
    return DensityMatrix(decode_space(obj["space"]), decode_matrix(obj["matrix"]))


def encode_observable(a: Observable) -> dict:
    return {"space": encode_space(a.space), "matrix": encode_matrix(a.data)}


def decode_observable(obj) -> Observable:
    return Observable(decode_space(obj["space"]), decode_matrix(obj["matrix"]))


def encode_channel(ch: KrausChannel) -> dict:
    return {
        "in_space": encode_space(ch.in_space),
        "out_space": encode_space(ch.out_space),
        "kraus": [encode_matrix(k) for k in ch.kraus],
        "trace_preserving": bool(ch.trace_preserving),
    }


def decode_channel(obj) -> KrausChannel:
    return KrausChannel(
        decode_space(obj["in_space"]),
        decode_space(obj["out_space"]),
        tuple(decode_matrix(k) for k in obj["kraus"]),
        bool(obj.get("trace_preserving", True)),
    )


def encode_instrument(inst: Instrument) -> dict:
    return {
        "in_space": encode_space(inst.in_space),
        "out_space": encode_space(inst.out_space),
        "branches": [
            {"outcome": str(m), "kraus": encode_matrix(op)} for m, op in inst.branches
        ],
    }


def decode_instrument(obj) -> Instrument:
    return Instrument(
        decode_space(obj["in_space"]),
        decode_space(obj["out_space"]),
        tuple((b["outcome"], decode_matrix(b["kraus"])) for b in obj["branches"]),
    )


def encode_ensemble(omega: TestEnsemble) -> list:
    return [{"weight": float(p), "state": encode_state(r)} for p, r in omega.entries]


def decode_ensemble(obj) -> TestEnsemble:
    return TestEnsemble(tuple((float(e["weight"]), decode_state(e["state"])) for e in obj))


def encode_implementation(impl: Implementation) -> dict:
    return {
        "rho_beta": encode_state(impl.rho_beta),
        "u": encode_matrix(impl.u),
        "charges": {k: encode_observable(v) for k, v in impl.charges.items()},
        "partition": {
            "in_alpha": encode_space(impl.in_alpha),
            "in_beta": encode_space(impl.in_beta),
            "out_alpha": encode_space(impl.out_alpha),
            "out_beta": encode_space(impl.out_beta),
        },
    }


def decode_implementation(obj) -> Implementation:
    part = obj["partition"]
    return Implementation(
        decode_state(obj["rho_beta"]),
        decode_matrix(obj["u"]),
        {k: decode_observable(v) for k, v in obj["charges"].items()},
        in_alpha=decode_space(part["in_alpha"]),
        in_beta=decode_space(part["in_beta"]),
        out_alpha=decode_space(part["out_alpha"]),
        out_beta=decode_space(part["out_beta"]),
    )


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".irrevkit-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
