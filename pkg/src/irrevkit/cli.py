"""Batch front end: validate JSON scenarios, run pipelines, emit reports and CSV.

Exit codes: 0 success, 2 input/schema problem, 3 numerical failure
(extraction, conservation, precondition), 4 inequality violation beyond the
scenario tolerance. Reports are byte-identical across re-runs; wall-clock
metadata goes to a separate .meta.json sidecar.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from .comb import ExtractionConfig, OPTIMIZE, canonical_recovery, extract_epsilon, extract_eta, extract_two_copy
from .errors import (
    AssumptionError,
    BranchProbabilityError,
    ConservationError,
    ExtractionError,
    IrrevkitError,
    YanaseConditionError,
)
from .fixtures import write_fixtures
from .irrev import OptimizerConfig, delta_min, delta_with_recovery, petz_recovery
from .oracles import lt_disturbance, lt_error, outcome_values
from .otoc import ScramblingScenario, otoc_direct, otoc_iep, otoc_iep_cp, pauli_string, way_bound_otoc
from .qcore import DensityMatrix, Label, Observable
from .serialize import (
    atomic_write_text,
    canonical_json,
    decode_channel,
    decode_ensemble,
    decode_implementation,
    decode_instrument,
    decode_observable,
    decode_space,
    decode_state,
    encode_channel,
    encode_ensemble,
    encode_implementation,
    encode_instrument,
    encode_observable,
    encode_state,
)
from .way import way_bound_disturbance, way_bound_error

EX_OK = 0
EX_INPUT = 2
EX_NUMERIC = 3
EX_VIOLATION = 4

KINDS = (
    "delta",
    "epsilon",
    "eta",
    "blw",
    "lt",
    "way-error",
    "way-disturbance",
    "otoc",
    "otoc-cp",
    "way-otoc",
)

_NUMERIC_ERRORS = (
    ExtractionError,
    ConservationError,
    YanaseConditionError,
    BranchProbabilityError,
    AssumptionError,
    np.linalg.LinAlgError,
)

# ---------------------------------------------------------------------------
# schemas

_MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "array",
        "minItems": 1,
        "items": {
            "oneOf": [
                {"type": "number"},
                {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            ]
        },
    },
}
_SPACE = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "required": ["name", "dim"],
        "properties": {"name": {"type": "string"}, "dim": {"type": "integer", "minimum": 1}},
        "additionalProperties": False,
    },
}
_OPERATOR = {
    "type": "object",
    "required": ["space", "matrix"],
    "properties": {"space": _SPACE, "matrix": _MATRIX},
    "additionalProperties": False,
}
_CHANNEL = {
    "type": "object",
    "required": ["in_space", "out_space", "kraus"],
    "properties": {
        "in_space": _SPACE,
        "out_space": _SPACE,
        "kraus": {"type": "array", "minItems": 1, "items": _MATRIX},
        "trace_preserving": {"type": "boolean"},
    },
    "additionalProperties": False,
}
_INSTRUMENT = {
    "type": "object",
    "required": ["in_space", "out_space", "branches"],
    "properties": {
        "in_space": _SPACE,
        "out_space": _SPACE,
        "branches": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["outcome", "kraus"],
                "properties": {"outcome": {"type": "string"}, "kraus": _MATRIX},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}
_ENSEMBLE = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "required": ["weight", "state"],
        "properties": {"weight": {"type": "number", "minimum": 0}, "state": _OPERATOR},
        "additionalProperties": False,
    },
}
_OPTIMIZER = {
    "type": "object",
    "properties": {
        "seed": {"type": "integer"},
        "max_iters": {"type": "integer", "minimum": 1},
        "step": {"type": "number", "exclusiveMinimum": 0},
        "restarts": {"type": "integer", "minimum": 0},
        "tol": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}
_EXTRACTION = {
    "type": "object",
    "properties": {
        "method": {"enum": ["extrapolated", "analytic"]},
        "thetas": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "number", "exclusiveMinimum": 0},
        },
        "fit_tol": {"type": "number", "exclusiveMinimum": 0},
        "optimizer": _OPTIMIZER,
    },
    "additionalProperties": False,
}
_CHARGES = {
    "type": "object",
    "required": ["alpha", "beta", "alpha_out", "beta_out"],
    "properties": {
        "alpha": _OPERATOR,
        "beta": _OPERATOR,
        "alpha_out": _OPERATOR,
        "beta_out": _OPERATOR,
    },
    "additionalProperties": False,
}
_IMPLEMENTATION = {
    "type": "object",
    "required": ["rho_beta", "u", "charges", "partition"],
    "properties": {
        "rho_beta": _OPERATOR,
        "u": _MATRIX,
        "charges": _CHARGES,
        "partition": {
            "type": "object",
            "required": ["in_alpha", "in_beta", "out_alpha", "out_beta"],
            "properties": {
                "in_alpha": _SPACE,
                "in_beta": _SPACE,
                "out_alpha": _SPACE,
                "out_beta": _SPACE,
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}
_CANONICAL = {
    "type": "object",
    "required": ["x", "target"],
    "properties": {"x": _OPERATOR, "target": _SPACE},
    "additionalProperties": False,
}
# operators in a scrambling scenario may be dense or Pauli strings over IXYZ
_PAULI_TERMS = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "array",
        "prefixItems": [{"type": "string", "pattern": "^[IXYZ]+$"}, {"type": "number"}],
        "items": False,
        "minItems": 2,
        "maxItems": 2,
    },
}
_PAULI_NAME = {"type": "string", "pattern": "^[IXYZ]+$"}
_SCRAMBLING = {
    "type": "object",
    "required": ["h", "w0", "v0", "tau"],
    "properties": {
        "h": {"oneOf": [_OPERATOR, _PAULI_TERMS]},
        "w0": {"oneOf": [_OPERATOR, _PAULI_NAME]},
        "v0": {"oneOf": [_OPERATOR, _PAULI_NAME]},
        "tau": {"type": "number"},
        "rho": _OPERATOR,
        "sites": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
_TOLERANCE = {"type": "number", "minimum": 0}

PAYLOAD_SCHEMAS = {
    "delta": {
        "type": "object",
        "required": ["loss", "ensemble"],
        "properties": {
            "loss": _CHANNEL,
            "ensemble": _ENSEMBLE,
            "recovery": {"oneOf": [{"enum": ["optimize", "petz"]}, _CHANNEL]},
            "sigma_ref": _OPERATOR,
            "optimizer": _OPTIMIZER,
        },
        "additionalProperties": False,
    },
    "epsilon": {
        "type": "object",
        "required": ["state", "observable", "instrument"],
        "properties": {
            "state": _OPERATOR,
            "observable": _OPERATOR,
            "instrument": _INSTRUMENT,
            "recovery": {"oneOf": [{"enum": ["canonical", "optimize"]}, _CANONICAL]},
            "extraction": _EXTRACTION,
        },
        "additionalProperties": False,
    },
    "blw": {
        "type": "object",
        "required": ["kind", "state", "generator", "instrument"],
        "properties": {
            "kind": {"enum": ["error", "disturbance"]},
            "state": _OPERATOR,
            "generator": _OPERATOR,
            "instrument": _INSTRUMENT,
            "f": {"type": "object", "additionalProperties": {"type": "number"}},
            "extraction": _EXTRACTION,
        },
        "additionalProperties": False,
    },
    "lt": {
        "type": "object",
        "required": ["which", "state", "observable", "instrument"],
        "properties": {
            "which": {"enum": ["error", "disturbance"]},
            "state": _OPERATOR,
            "observable": _OPERATOR,
            "instrument": _INSTRUMENT,
        },
        "additionalProperties": False,
    },
    "way-error": {
        "type": "object",
        "required": ["state", "observable", "instrument", "implementation"],
        "properties": {
            "state": _OPERATOR,
            "observable": _OPERATOR,
            "instrument": _INSTRUMENT,
            "implementation": _IMPLEMENTATION,
            "charges": _CHARGES,
            "lhs": {"enum": ["canonical", "optimize"]},
            "extraction": _EXTRACTION,
            "tolerance": _TOLERANCE,
        },
        "additionalProperties": False,
    },
    "otoc": {
        "type": "object",
        "required": ["scenario"],
        "properties": {
            "scenario": _SCRAMBLING,
            "extraction": _EXTRACTION,
            "recovery": {"enum": ["canonical", "optimize"]},
        },
        "additionalProperties": False,
    },
    "otoc-cp": {
        "type": "object",
        "required": ["scenario"],
        "properties": {"scenario": _SCRAMBLING, "extraction": _EXTRACTION},
        "additionalProperties": False,
    },
    "way-otoc": {
        "type": "object",
        "required": ["scenario", "implementation"],
        "properties": {
            "scenario": _SCRAMBLING,
            "implementation": _IMPLEMENTATION,
            "charges": _CHARGES,
            "tolerance": _TOLERANCE,
        },
        "additionalProperties": False,
    },
}
PAYLOAD_SCHEMAS["eta"] = PAYLOAD_SCHEMAS["epsilon"]
PAYLOAD_SCHEMAS["way-disturbance"] = PAYLOAD_SCHEMAS["way-error"]

TOP_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind", "payload"],
    "properties": {
        "schema": {"const": "irrevkit/1"},
        "kind": {"enum": list(KINDS)},
        "payload": {"type": "object"},
        "seed": {"type": "integer"},
        "output": {"type": "string"},
    },
    "additionalProperties": False,
}


def validate_document(doc) -> str | None:
    """Return a human-readable pointer to the first failing field, or None."""
    err = best_match(Draft202012Validator(TOP_SCHEMA).iter_errors(doc))
    if err is not None:
        return f"{err.json_path}: {err.message}"
    err = best_match(
        Draft202012Validator(PAYLOAD_SCHEMAS[doc["kind"]]).iter_errors(doc["payload"])
    )
    if err is not None:
        path = err.json_path.replace("$", "$.payload", 1)
        return f"{path}: {err.message}"
    return None


# ---------------------------------------------------------------------------
# kind runners: each returns (inputs_echo, result_dict, passed_or_None)


def _extraction_config(payload: dict, seed: int) -> ExtractionConfig:
    ext = dict(payload.get("extraction", {}))
    opt = dict(ext.get("optimizer", {}))
    opt.setdefault("seed", seed)
    ext["optimizer"] = opt
    return ExtractionConfig.from_json(ext)


def _run_delta(payload: dict, seed: int):
    loss = decode_channel(payload["loss"])
    omega = decode_ensemble(payload["ensemble"])
    spec = payload.get("recovery", "optimize")
    opt = dict(payload.get("optimizer", {}))
    opt.setdefault("seed", seed)
    cfg = OptimizerConfig.from_json(opt)
    inputs = {
        "loss": encode_channel(loss),
        "ensemble": encode_ensemble(omega),
        "recovery": spec,
        "optimizer": cfg.to_json(),
    }
    if spec == "optimize":
        rep = delta_min(loss, omega, cfg)
    elif spec == "petz":
        if "sigma_ref" in payload:
            sigma = decode_state(payload["sigma_ref"])
        else:
            avg = sum(p * r.data for p, r in omega.entries)
            sigma = DensityMatrix(omega.space, avg / np.trace(avg))
        inputs["sigma_ref"] = encode_state(sigma)
        rep = delta_with_recovery(loss, petz_recovery(loss, sigma), omega)
    else:
        rep = delta_with_recovery(loss, decode_channel(spec), omega)
    result = rep.to_json()
    result["delta_squared"] = rep.delta**2
    result.pop("optimizer_trace", None)
    return inputs, result, None


def _decode_recovery(payload: dict):
    spec = payload.get("recovery", "canonical")
    if spec == "canonical":
        return "canonical", spec
    if spec == "optimize":
        return OPTIMIZE, spec
    x = decode_observable(spec["x"])
    target = decode_space(spec["target"])
    return canonical_recovery(x, target, 0.0), spec


def _run_epsilon(payload: dict, seed: int, which: str):
    rho = decode_state(payload["state"])
    obs = decode_observable(payload["observable"])
    inst = decode_instrument(payload["instrument"])
    recovery, spec = _decode_recovery(payload)
    cfg = _extraction_config(payload, seed)
    inputs = {
        "state": encode_state(rho),
        "observable": encode_observable(obs),
        "instrument": encode_instrument(inst),
        "recovery": spec,
        "extraction": cfg.to_json(),
    }
    if recovery == "canonical":
        if which == "error":
            _, fstar = lt_error(rho, obs, inst)
            p_label = Label("P", len(inst.branches))
            x = Observable((p_label,), np.diag(outcome_values(inst, fstar)).astype(complex))
            recovery = canonical_recovery(x, (p_label,), 0.0)
        else:
            _, x_lt = lt_disturbance(rho, obs, inst)
            recovery = canonical_recovery(x_lt, x_lt.space, 0.0)
    extract = extract_epsilon if which == "error" else extract_eta
    rep = extract(rho, obs, inst, recovery, cfg)
    return inputs, rep.to_json(), None


def _run_blw(payload: dict, seed: int):
    rho = decode_state(payload["state"])
    gen = decode_observable(payload["generator"])
    inst = decode_instrument(payload["instrument"])
    kind = payload["kind"]
    f = payload.get("f")
    cfg = _extraction_config(payload, seed)
    inputs = {
        "kind": kind,
        "state": encode_state(rho),
        "generator": encode_observable(gen),
        "instrument": encode_instrument(inst),
        "extraction": cfg.to_json(),
    }
    if f is not None:
        inputs["f"] = dict(f)
    rep = extract_two_copy(rho, gen, inst, kind, f=f, cfg=cfg)
    return inputs, rep.to_json(), None


def _run_lt(payload: dict, seed: int):
    rho = decode_state(payload["state"])
    obs = decode_observable(payload["observable"])
    inst = decode_instrument(payload["instrument"])
    which = payload["which"]
    inputs = {
        "which": which,
        "state": encode_state(rho),
        "observable": encode_observable(obs),
        "instrument": encode_instrument(inst),
    }
    if which == "error":
        value, fstar = lt_error(rho, obs, inst)
        result = {"value": value, "pushforward": {str(m): float(v) for m, v in fstar.items()}}
    else:
        value, x = lt_disturbance(rho, obs, inst)
        result = {"value": value, "minimizer": encode_observable(x)}
    return inputs, result, None


def _run_way(payload: dict, seed: int, which: str):
    rho = decode_state(payload["state"])
    obs = decode_observable(payload["observable"])
    inst = decode_instrument(payload["instrument"])
    impl = decode_implementation(payload["implementation"])
    charges = None
    if "charges" in payload:
        charges = {k: decode_observable(v) for k, v in payload["charges"].items()}
    lhs = payload.get("lhs", "canonical")
    tolerance = float(payload.get("tolerance", 1e-9))
    cfg = _extraction_config(payload, seed) if "extraction" in payload else None
    inputs = {
        "state": encode_state(rho),
        "observable": encode_observable(obs),
        "instrument": encode_instrument(inst),
        "implementation": encode_implementation(impl),
        "lhs": lhs,
        "tolerance": tolerance,
    }
    if charges is not None:
        inputs["charges"] = {k: encode_observable(v) for k, v in charges.items()}
    if cfg is not None:
        inputs["extraction"] = cfg.to_json()
    bound = way_bound_error if which == "error" else way_bound_disturbance
    lhs_arg = OPTIMIZE if lhs == "optimize" else lhs
    rep = bound(rho, obs, inst, charges, impl, lhs=lhs_arg, cfg=cfg)
    passed = rep.slack >= -tolerance
    result = rep.to_json()
    result["pass"] = passed
    result["tolerance"] = tolerance
    return inputs, result, passed


def _decode_local_op(obj, sites: int | None):
    if isinstance(obj, str):
        if sites is not None and len(obj) != sites:
            raise ValueError(f"pauli string {obj!r} does not span {sites} sites")
        return pauli_string(obj)
    return decode_observable(obj)


def _decode_scenario(obj: dict) -> ScramblingScenario:
    sites = obj.get("sites")
    h = obj["h"]
    if isinstance(h, list) and h and isinstance(h[0], list) and isinstance(h[0][0], str):
        acc = None
        for ops, coeff in h:
            if sites is not None and len(ops) != sites:
                raise ValueError(f"pauli string {ops!r} does not span {sites} sites")
            term = float(coeff) * pauli_string(ops).data
            acc = term if acc is None else acc + term
        h_obs = Observable(pauli_string(h[0][0]).space, acc)
    else:
        h_obs = decode_observable(h)
    rho = decode_state(obj["rho"]) if "rho" in obj else None
    return ScramblingScenario(
        h_obs,
        _decode_local_op(obj["w0"], sites),
        _decode_local_op(obj["v0"], sites),
        float(obj["tau"]),
        rho,
    )


def _echo_scenario(s: ScramblingScenario) -> dict:
    return {
        "h": encode_observable(s.h),
        "w0": encode_observable(s.w0),
        "v0": encode_observable(s.v0),
        "tau": s.tau,
        "rho": encode_state(s.rho),
    }


def _run_otoc(payload: dict, seed: int):
    s = _decode_scenario(payload["scenario"])
    cfg = _extraction_config(payload, seed)
    mode = payload.get("recovery", "canonical")
    recovery = OPTIMIZE if mode == "optimize" else "canonical"
    inputs = {"scenario": _echo_scenario(s), "extraction": cfg.to_json(), "recovery": mode}
    rep = otoc_iep(s, cfg, recovery=recovery)
    direct = otoc_direct(s)
    result = {"iep": rep.to_json(), "direct": direct, "gap": abs(rep.value - direct)}
    return inputs, result, None


def _run_otoc_cp(payload: dict, seed: int):
    s = _decode_scenario(payload["scenario"])
    cfg = _extraction_config(payload, seed)
    inputs = {"scenario": _echo_scenario(s), "extraction": cfg.to_json()}
    rep = otoc_iep_cp(s, cfg)
    if rep.rescale and rep.rescale > 0:
        direct = otoc_direct(s) / rep.rescale
    else:
        direct = 0.0
    result = {
        "iep": rep.to_json(),
        "direct_normalized": direct,
        "gap": abs(rep.value - direct),
    }
    return inputs, result, None


def _run_way_otoc(payload: dict, seed: int):
    s = _decode_scenario(payload["scenario"])
    impl = decode_implementation(payload["implementation"])
    charges = None
    if "charges" in payload:
        charges = {k: decode_observable(v) for k, v in payload["charges"].items()}
    tolerance = float(payload.get("tolerance", 1e-9))
    inputs = {
        "scenario": _echo_scenario(s),
        "implementation": encode_implementation(impl),
        "tolerance": tolerance,
    }
    if charges is not None:
        inputs["charges"] = {k: encode_observable(v) for k, v in charges.items()}
    rep = way_bound_otoc(s, charges, impl)
    passed = rep.slack >= -tolerance
    result = rep.to_json()
    result["pass"] = passed
    result["tolerance"] = tolerance
    return inputs, result, passed


_RUNNERS = {
    "delta": _run_delta,
    "epsilon": lambda p, s: _run_epsilon(p, s, "error"),
    "eta": lambda p, s: _run_epsilon(p, s, "disturbance"),
    "blw": _run_blw,
    "lt": _run_lt,
    "way-error": lambda p, s: _run_way(p, s, "error"),
    "way-disturbance": lambda p, s: _run_way(p, s, "disturbance"),
    "otoc": _run_otoc,
    "otoc-cp": _run_otoc_cp,
    "way-otoc": _run_way_otoc,
}


def compute(kind: str, payload: dict, seed: int):
    return _RUNNERS[kind](payload, seed)


# ---------------------------------------------------------------------------
# commands


def _load(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        return None, f"{path}: cannot read: {exc}"
    except json.JSONDecodeError as exc:
        return None, f"{path}: invalid JSON: {exc}"
    problem = validate_document(doc)
    if problem is not None:
        return None, f"{path}: schema violation at {problem}"
    return doc, None


def _write_report(out_path: str, doc: dict, scenario_path: str) -> None:
    atomic_write_text(out_path, canonical_json(doc))
    meta = {
        "schema": "irrevkit/1",
        "written_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "scenario": os.path.abspath(scenario_path),
    }
    atomic_write_text(out_path + ".meta.json", canonical_json(meta))


def _default_output(path: str, doc: dict) -> str:
    if doc.get("output"):
        return os.path.join(os.path.dirname(os.path.abspath(path)), doc["output"])
    stem, _ = os.path.splitext(os.path.abspath(path))
    return stem + ".report.json"


def run_one(path: str, output: str | None = None) -> int:
    doc, problem = _load(path)
    if doc is None:
        print(problem, file=sys.stderr)
        return EX_INPUT
    seed = int(doc.get("seed", 0))
    kind = doc["kind"]
    try:
        inputs, result, passed = compute(kind, doc["payload"], seed)
    except _NUMERIC_ERRORS as exc:
        detail = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ExtractionError) and exc.diagnostics:
            detail["diagnostics"] = exc.diagnostics
        print(f"{path}: numerical failure: {canonical_json(detail)}", file=sys.stderr)
        return EX_NUMERIC
    except (IrrevkitError, ValueError, KeyError, TypeError) as exc:
        print(f"{path}: invalid scenario content: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_INPUT
    report = {
        "schema": "irrevkit/1",
        "kind": kind,
        "seed": seed,
        "inputs": inputs,
        "result": result,
    }
    out_path = output or _default_output(path, doc)
    _write_report(out_path, report, path)
    status = "ok" if passed is None or passed else "VIOLATION"
    print(f"{path}: {status} -> {out_path}")
    return EX_OK if passed is None or passed else EX_VIOLATION


def cmd_run(args) -> int:
    if args.output and len(args.scenarios) > 1:
        print("--output is only valid with a single scenario", file=sys.stderr)
        return EX_INPUT
    if len(args.scenarios) == 1:
        return run_one(args.scenarios[0], args.output)
    env = os.environ.get("IRREVKIT_THREADS", "")
    workers = int(env) if env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    workers = max(1, min(workers, len(args.scenarios)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(run_one, args.scenarios))
    return max(codes)


_SWEEP_COLUMNS = {
    "otoc": (("c_direct", "direct"), ("c_iep", "iep.value"), ("gap", "gap")),
    "otoc-cp": (
        ("c_direct", "direct_normalized"),
        ("c_iep", "iep.value"),
        ("gap", "gap"),
        ("branch_probability", "iep.branch_probability"),
    ),
    "way-error": (("lhs", "lhs"), ("rhs", "rhs"), ("slack", "slack")),
    "way-disturbance": (("lhs", "lhs"), ("rhs", "rhs"), ("slack", "slack")),
    "way-otoc": (("lhs", "lhs"), ("rhs", "rhs"), ("slack", "slack")),
    "delta": (("delta", "delta"), ("delta_squared", "delta_squared")),
    "epsilon": (("value", "value"), ("fit_residual", "fit_residual")),
    "eta": (("value", "value"), ("fit_residual", "fit_residual")),
    "blw": (("value", "value"), ("fit_residual", "fit_residual")),
    "lt": (("value", "value"),),
}


def _dig(result: dict, dotted: str):
    cur = result
    for part in dotted.split("."):
        cur = cur[part]
    return cur


def _set_parameter(payload: dict, dotted: str, value: float) -> bool:
    parts = dotted.split(".")
    cur = payload
    for part in parts[:-1]:
        if not isinstance(cur, dict) or part not in cur:
            return False
        cur = cur[part]
    if not isinstance(cur, dict) or parts[-1] not in cur:
        return False
    cur[parts[-1]] = value
    return True


def cmd_sweep(args) -> int:
    doc, problem = _load(args.scenario)
    if doc is None:
        print(problem, file=sys.stderr)
        return EX_INPUT
    grid = [g.strip() for g in args.grid.split(",") if g.strip()]
    if not grid:
        print("empty sweep grid", file=sys.stderr)
        return EX_INPUT
    try:
        values = [float(g) for g in grid]
    except ValueError as exc:
        print(f"non-numeric grid entry: {exc}", file=sys.stderr)
        return EX_INPUT
    kind = doc["kind"]
    seed = int(doc.get("seed", 0))
    out_path = args.output or os.path.splitext(os.path.abspath(args.scenario))[0] + ".sweep.csv"

    rows = []
    violation = False
    if args.parameter == "theta":
        payload = json.loads(json.dumps(doc["payload"]))
        payload.setdefault("extraction", {})["thetas"] = values
        try:
            _, result, passed = compute(kind, payload, seed)
        except _NUMERIC_ERRORS as exc:
            print(f"{args.scenario}: numerical failure: {exc}", file=sys.stderr)
            return EX_NUMERIC
        except (IrrevkitError, ValueError, KeyError, TypeError) as exc:
            print(f"{args.scenario}: invalid scenario content: {exc}", file=sys.stderr)
            return EX_INPUT
        grid_pairs = result.get("theta_grid") or result.get("iep", {}).get("theta_grid")
        if not grid_pairs:
            print("scenario kind has no theta diagnostics", file=sys.stderr)
            return EX_INPUT
        header = ["theta", "delta_squared"]
        rows = [[t, v] for t, v in grid_pairs]
        violation = passed is False
    else:
        param = args.parameter
        if kind in ("otoc", "otoc-cp", "way-otoc") and param == "tau":
            param = "scenario.tau"
        columns = _SWEEP_COLUMNS[kind]
        header = [args.parameter] + [name for name, _ in columns]
        for v in values:
            payload = json.loads(json.dumps(doc["payload"]))
            if not _set_parameter(payload, param, v):
                print(f"parameter {args.parameter!r} not found in payload", file=sys.stderr)
                return EX_INPUT
            try:
                _, result, passed = compute(kind, payload, seed)
            except _NUMERIC_ERRORS as exc:
                print(f"{args.scenario}: numerical failure at {args.parameter}={v}: {exc}", file=sys.stderr)
                return EX_NUMERIC
            except (IrrevkitError, ValueError, KeyError, TypeError) as exc:
                print(f"{args.scenario}: invalid scenario content: {exc}", file=sys.stderr)
                return EX_INPUT
            rows.append([v] + [float(_dig(result, c)) for _, c in columns])
            violation = violation or passed is False

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(x)) for x in row))
    atomic_write_text(out_path, "\n".join(lines) + "\n")
    print(f"{args.scenario}: {len(rows)} rows -> {out_path}")
    return EX_VIOLATION if violation else EX_OK


def cmd_validate(args) -> int:
    worst = EX_OK
    for path in args.scenarios:
        doc, problem = _load(path)
        if doc is None:
            print(problem, file=sys.stderr)
            worst = EX_INPUT
        else:
            print(f"{path}: ok ({doc['kind']})")
    return worst


def cmd_fixtures(args) -> int:
    paths = write_fixtures(args.dir)
    for p in paths:
        print(p)
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irrevkit",
        description="Run irreversibility, error-disturbance, conservation-bound and "
        "correlator pipelines from JSON scenario files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run scenarios and write JSON reports")
    p_run.add_argument("scenarios", nargs="+", help="scenario JSON files")
    p_run.add_argument("-o", "--output", help="report path (single scenario only)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario over a parameter grid, emit CSV")
    p_sweep.add_argument("scenario", help="scenario JSON file")
    p_sweep.add_argument("-p", "--parameter", required=True, help="payload field (dotted path, 'tau', or 'theta')")
    p_sweep.add_argument("-g", "--grid", required=True, help="comma-separated numeric grid")
    p_sweep.add_argument("-o", "--output", help="CSV path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="schema-check scenario files")
    p_val.add_argument("scenarios", nargs="+", help="scenario JSON files")
    p_val.set_defaults(func=cmd_validate)

    p_fix = sub.add_parser("fixtures", help="write the built-in example corpus")
    p_fix.add_argument("-d", "--dir", default="fixtures", help="target directory")
    p_fix.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code = args.func(args)
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
