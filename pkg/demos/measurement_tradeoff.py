"""Measurement error and disturbance as ancilla irreversibility.

A weak coupling writes the target observable onto an ancilla qubit; the
measurement then degrades how well the coupling can be undone. The
curvature of that irreversibility in the coupling angle reproduces the
closed-form squared error and disturbance, outcome relabeling is bounded
below by a transport value, and on qubits the two-copy protocol returns
the Bloch calibration formula.
"""

import numpy as np

from irrevkit import (
    ExtractionConfig,
    Instrument,
    Label,
    Observable,
    blw_calibration_error_qubit,
    canonical_recovery,
    extract_epsilon,
    extract_eta,
    extract_two_copy,
    lt_error,
    ozawa_disturbance,
    ozawa_error,
    pure_state,
    state_from_bloch,
)

S = Label("S", 2)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def projective_z() -> Instrument:
    return Instrument((S,), (S,), (("0", np.diag([1.0, 0.0])), ("1", np.diag([0.0, 1.0]))))


def projective_x() -> Instrument:
    minus = (np.eye(2) - SIGMA_X) / 2
    plus = (np.eye(2) + SIGMA_X) / 2
    return Instrument((S,), (S,), (("0", minus), ("1", plus)))


def main() -> None:
    rho = pure_state([1, 0], (S,))
    a = Observable((S,), SIGMA_X)
    meas = projective_z()
    f = {"0": 1.0, "1": -1.0}

    p = Label("P", 2)
    pointer = Observable((p,), np.diag([f["0"], f["1"]]).astype(complex))
    rec_e = canonical_recovery(pointer, (p,), 0.0)
    grid = extract_epsilon(rho, a, meas, rec_e)
    exact = extract_epsilon(rho, a, meas, rec_e, ExtractionConfig(method="analytic"))
    print("squared error of a z-measurement approximating sigma_x on |0>:")
    print(f"  closed form      : {ozawa_error(rho, a, meas, f):.9f}")
    print(f"  curvature (grid) : {grid.value:.9f}  residual {grid.fit_residual:.1e}")
    print(f"  curvature (exact): {exact.value:.9f}")

    rec_d = canonical_recovery(Observable((S,), SIGMA_X), (S,), 0.0)
    eta = extract_eta(rho, Observable((S,), SIGMA_X), meas, rec_d)
    print(f"squared disturbance of sigma_x : {eta.value:.9f}"
          f"  (closed form {ozawa_disturbance(rho, Observable((S,), SIGMA_X), meas):.9f})")
    print()

    floor, fstar = lt_error(rho, a, meas)
    rng = np.random.default_rng(1)
    sampled = min(
        ozawa_error(rho, a, meas, {"0": float(u), "1": float(v)})
        for u, v in rng.standard_normal((200, 2))
    )
    print("relabeling the outcomes cannot beat the transport floor:")
    print(f"  floor {floor:.9f}, best of 200 random relabelings {sampled:.9f},")
    print(f"  optimal values f* = {fstar}")
    print()

    avec = np.array([0.0, 0.0, 1.0])
    aprime = np.array([1.0, 0.0, 0.0])
    two_copy = extract_two_copy(
        state_from_bloch(avec, S), Observable((S,), SIGMA_Z), projective_x(), "error",
        f={"0": -1.0, "1": 1.0},
    )
    print("two-copy protocol on a qubit reproduces the calibration formula:")
    print(f"  extracted {two_copy.value:.9f}  vs 2|a.(a-a')| = "
          f"{blw_calibration_error_qubit(avec, aprime) ** 2:.9f}")


if __name__ == "__main__":
    main()
