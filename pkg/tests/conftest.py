"""Seeded random generators shared across the test modules."""

import numpy as np

from irrevkit import DensityMatrix, Instrument, Label, Observable, TestEnsemble, pure_state

# library type whose name matches the pytest collector pattern
TestEnsemble.__test__ = False

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def rand_herm(rng, d: int, norm: float | None = None) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (a + a.conj().T) / 2
    if norm is not None:
        s = np.linalg.norm(h, 2)
        if s > 0:
            h = h * (norm / s)
    return h


def rand_unitary(rng, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    ph = np.diag(r).copy()
    ph[np.abs(ph) < 1e-12] = 1.0
    return q * (ph / np.abs(ph))


def rand_state(rng, d: int, label: Label | None = None) -> DensityMatrix:
    """Full-rank random density matrix (Wishart, floor 0.02 on eigenvalues)."""
    label = label or Label("S", d)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = a @ a.conj().T + 0.02 * d * np.eye(d)
    return DensityMatrix((label,), m / np.trace(m).real)


def rand_pure(rng, d: int, label: Label | None = None) -> DensityMatrix:
    label = label or Label("S", d)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return pure_state(v, (label,))


def rand_instrument(rng, d: int, k: int, label: Label | None = None) -> Instrument:
    """k single-Kraus branches, normalized so the branch sum is TP."""
    label = label or Label("S", d)
    ops = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(k)]
    acc = sum(op.conj().T @ op for op in ops)
    vals, vecs = np.linalg.eigh(acc)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.conj().T
    sp = (label,)
    return Instrument(sp, sp, tuple((str(i), op @ inv_sqrt) for i, op in enumerate(ops)))


def proj_instrument(basis: np.ndarray, label: Label) -> Instrument:
    """Rank-1 projective instrument onto the columns of `basis`."""
    d = basis.shape[1]
    sp = (label,)
    brs = []
    for i in range(d):
        v = basis[:, i]
        brs.append((str(i), np.outer(v, v.conj())))
    return Instrument(sp, sp, tuple(brs))


def proj_z(label: Label | None = None) -> Instrument:
    label = label or Label("S", 2)
    return proj_instrument(np.eye(2, dtype=complex), label)


def proj_x(label: Label | None = None) -> Instrument:
    label = label or Label("S", 2)
    basis = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    return proj_instrument(basis, label)


def obs(mat, label: Label | None = None) -> Observable:
    mat = np.asarray(mat, dtype=complex)
    label = label or Label("S", mat.shape[0])
    return Observable((label,), mat)
