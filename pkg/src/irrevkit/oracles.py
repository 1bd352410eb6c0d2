"""Closed-form error and disturbance values used to certify the comb pipeline.

All error/disturbance functions return squared quantities (the natural unit
for comparison with the theta^2 extraction); blw_calibration_error_qubit and
wasserstein2_discrete return distances.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .errors import (
    BlochError,
    DistributionError,
    OutcomeFunctionError,
    ShapeError,
)
from .qcore import (
    TOL_EIG_SKIP,
    TOL_PROB,
    DensityMatrix,
    Instrument,
    Label,
    Observable,
    _names,
    _psd_sqrt,
)

__all__ = [
    "OutcomeFunction",
    "ozawa_error",
    "ozawa_disturbance",
    "akg_unbiasedness_check",
    "lt_error",
    "lt_disturbance",
    "blw_calibration_error_qubit",
    "wasserstein2_discrete",
    "bloch_from_state",
    "state_from_bloch",
]

# outcome -> real value, or a sequence aligned with the instrument branches
OutcomeFunction = Mapping


def outcome_values(meas: Instrument, f) -> np.ndarray:
    """Resolve an OutcomeFunction against an instrument's branch order."""
    if isinstance(f, Mapping):
        vals = []
        for m, _ in meas.branches:
            if m not in f:
                raise OutcomeFunctionError(f"outcome {m!r} missing from outcome function")
            vals.append(float(f[m]))
        return np.array(vals)
    vals = [float(v) for v in f]
    if len(vals) != len(meas.branches):
        raise OutcomeFunctionError(
            f"{len(vals)} values for {len(meas.branches)} instrument outcomes"
        )
    return np.array(vals)


def _check_system(rho: DensityMatrix, obs: Observable, meas: Instrument):
    if _names(rho.space) != _names(obs.space):
        raise ShapeError("state and observable live on different spaces")
    if _names(meas.in_space) != _names(rho.space):
        raise ShapeError("instrument input space does not match the state")


def ozawa_error(rho: DensityMatrix, a: Observable, meas: Instrument, f) -> float:
    """Squared Ozawa error sum_m ||M_m (A - f(m)) sqrt(rho)||_HS^2."""
    _check_system(rho, a, meas)
    vals = outcome_values(meas, f)
    rh = _psd_sqrt(rho.data)
    total = 0.0
    for (_, op), fm in zip(meas.branches, vals):
        x = op @ (a.data - fm * np.eye(a.dim)) @ rh
        total += float(np.real(np.vdot(x, x)))
    return max(total, 0.0)


def ozawa_disturbance(rho: DensityMatrix, b: Observable, meas: Instrument) -> float:
    """Squared Ozawa disturbance sum_m ||[M_m, B] sqrt(rho)||_HS^2."""
    _check_system(rho, b, meas)
    if meas.dim_in != len(meas.branches[0][1]):
        raise ShapeError("disturbance needs square Kraus operators (same in/out dimension)")
    rh = _psd_sqrt(rho.data)
    total = 0.0
    for _, op in meas.branches:
        x = (op @ b.data - b.data @ op) @ rh
        total += float(np.real(np.vdot(x, x)))
    return max(total, 0.0)


def akg_unbiasedness_check(meas: Instrument, a: Observable, f, tol: float = 1e-9):
    """Whether sum_m f(m) M_m' M_m reproduces A exactly (unbiased readout)."""
    vals = outcome_values(meas, f)
    acc = np.zeros((meas.dim_in, meas.dim_in), dtype=complex)
    for (_, op), fm in zip(meas.branches, vals):
        acc += fm * (op.conj().T @ op)
    dev = float(np.max(np.abs(acc - a.data)))
    return dev <= tol, dev


def _povm_probs(rho: DensityMatrix, meas: Instrument) -> np.ndarray:
    return np.array(
        [float(np.real(np.trace(op.conj().T @ op @ rho.data))) for _, op in meas.branches]
    )


def lt_error(rho: DensityMatrix, a: Observable, meas: Instrument):
    """Least achievable squared error over outcome relabelings.

    Returns (value, f) where f is the pushforward minimizer
    f(m) = Tr[Pi_m (A rho + rho A)] / (2 p_m); outcomes with p_m <= 1e-12
    carry no weight and get f(m) = 0.
    """
    _check_system(rho, a, meas)
    probs = _povm_probs(rho, meas)
    jordan = (a.data @ rho.data + rho.data @ a.data) / 2
    fstar = {}
    for (m, op), p in zip(meas.branches, probs):
        if p > TOL_PROB:
            fstar[m] = float(np.real(np.trace(op.conj().T @ op @ jordan)) / p)
        else:
            fstar[m] = 0.0
    return ozawa_error(rho, a, meas, fstar), fstar


def lt_disturbance(rho: DensityMatrix, b: Observable, meas: Instrument):
    """Least achievable squared disturbance over recovery generators.

    Returns (value, X) with Hermitian X on the instrument output solving
    X sigma' + sigma' X = 2 I_M(B o rho) in the eigenbasis of
    sigma' = I_M(rho); eigenvalue pairs summing below 1e-12 are dropped
    (pseudo-inverse). value = <B^2>_rho - 2<B o I'(X)>_rho + <I'(X^2)>_rho.
    """
    _check_system(rho, b, meas)
    d_out = len(meas.branches[0][1])
    sig = sum(op @ rho.data @ op.conj().T for _, op in meas.branches)
    jordan = (b.data @ rho.data + rho.data @ b.data) / 2
    rhs = sum(op @ jordan @ op.conj().T for _, op in meas.branches)
    svals, svecs = np.linalg.eigh((sig + sig.conj().T) / 2)
    r = svecs.conj().T @ rhs @ svecs
    denom = svals[:, None] + svals[None, :]
    x = np.zeros((d_out, d_out), dtype=complex)
    mask = denom > TOL_EIG_SKIP
    x[mask] = 2 * r[mask] / denom[mask]
    x = svecs @ x @ svecs.conj().T
    x = (x + x.conj().T) / 2

    # objective evaluated directly at the minimizer
    dual_x = sum(op.conj().T @ x @ op for _, op in meas.branches)
    dual_x2 = sum(op.conj().T @ x @ x @ op for _, op in meas.branches)
    b2 = float(np.real(np.trace(b.data @ b.data @ rho.data)))
    cross = float(np.real(np.trace((b.data @ dual_x + dual_x @ b.data) @ rho.data)))
    quad = float(np.real(np.trace(dual_x2 @ rho.data)))
    value = max(b2 - cross + quad, 0.0)
    x_obs = Observable(meas.out_space, x)
    return value, x_obs


def blw_calibration_error_qubit(a, a_prime) -> float:
    """Qubit calibration distance sqrt(2 |a . (a - a')|) between Bloch vectors."""
    av = np.asarray(a, dtype=float).reshape(3)
    bv = np.asarray(a_prime, dtype=float).reshape(3)
    na = float(np.linalg.norm(av))
    if abs(na - 1.0) > 1e-9:
        raise BlochError(f"reference Bloch vector must be unit, got norm {na}")
    if float(np.linalg.norm(bv)) > 1.0 + 1e-9:
        raise BlochError("comparison Bloch vector lies outside the Bloch ball")
    return math.sqrt(2.0 * abs(float(np.dot(av, av - bv))))


def wasserstein2_discrete(xs, px, ys, py) -> float:
    """Exact 1-D Wasserstein-2 distance between finite real distributions.

    Sorted quantile coupling; masses must agree within 1e-9.
    """
    xs = np.asarray(xs, dtype=float).reshape(-1)
    ys = np.asarray(ys, dtype=float).reshape(-1)
    px = np.asarray(px, dtype=float).reshape(-1)
    py = np.asarray(py, dtype=float).reshape(-1)
    if xs.shape != px.shape or ys.shape != py.shape:
        raise DistributionError("values and weights must have matching lengths")
    if np.any(px < -TOL_PROB) or np.any(py < -TOL_PROB):
        raise DistributionError("negative probability mass")
    if abs(px.sum() - py.sum()) > 1e-9:
        raise DistributionError(f"total masses differ: {px.sum()} vs {py.sum()}")
    ox = np.argsort(xs)
    oy = np.argsort(ys)
    xs, px = xs[ox], np.clip(px[ox], 0.0, None)
    ys, py = ys[oy], np.clip(py[oy], 0.0, None)
    i = j = 0
    cost = 0.0
    mx, my = px[0], py[0]
    while i < len(xs) and j < len(ys):
        step = min(mx, my)
        cost += step * (xs[i] - ys[j]) ** 2
        mx -= step
        my -= step
        if mx <= TOL_PROB:
            i += 1
            mx = px[i] if i < len(xs) else 0.0
        if my <= TOL_PROB:
            j += 1
            my = py[j] if j < len(ys) else 0.0
    return math.sqrt(max(cost, 0.0))


def bloch_from_state(rho: DensityMatrix):
    """(x, y, z) expectation triple of a qubit state."""
    if rho.dim != 2:
        raise BlochError("Bloch coordinates are defined for qubit states only")
    m = rho.data
    return (
        float(np.real(m[0, 1] + m[1, 0])),
        float(np.real(1j * (m[0, 1] - m[1, 0]))),
        float(np.real(m[0, 0] - m[1, 1])),
    )


def state_from_bloch(r, label: Label = Label("S", 2)) -> DensityMatrix:
    rv = np.asarray(r, dtype=float).reshape(3)
    if np.linalg.norm(rv) > 1.0 + 1e-12:
        raise BlochError("Bloch vector outside the unit ball")
    m = 0.5 * (
        np.eye(2, dtype=complex)
        + rv[0] * np.array([[0, 1], [1, 0]])
        + rv[1] * np.array([[0, -1j], [1j, 0]])
        + rv[2] * np.array([[1, 0], [0, -1]])
    )
    return DensityMatrix((label,), m)
