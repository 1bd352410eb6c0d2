"""Measurement combs and the theta -> 0 extraction of error and disturbance.

A loss process couples an ancilla qubit Q weakly (strength theta) to a fresh
system copy through a generator A or B, then measures. A canonical recovery
uncouples with a generator on the measurement output and dephases Q. The
squared irreversibility of the pair vanishes as c2 * theta^2, and c2 is the
squared error (or disturbance). Extraction is either a least-squares fit on
a theta grid or the exact second derivative (canonical recoveries only).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ExtractionError
from .irrev import OptimizerConfig, delta_min, delta_with_recovery
from .oracles import lt_disturbance, lt_error, outcome_values
from .qcore import (
    DensityMatrix,
    Instrument,
    KrausChannel,
    Label,
    Observable,
    TestEnsemble,
    _as_space,
    _names,
    apply_raw,
    compose,
    embed,
    embed_matrix,
    instrument_channel,
    ket,
    pointer_channel,
    pure_state,
    space_dim,
)

__all__ = [
    "Q_LABEL",
    "OPTIMIZE",
    "LossProcess",
    "CanonicalRecovery",
    "IepResult",
    "ExtractionConfig",
    "omega_pm",
    "append_channel",
    "weak_coupling",
    "dephase_pm",
    "trace_out_channel",
    "build_loss_error",
    "build_loss_disturbance",
    "build_loss_two_copy",
    "canonical_recovery",
    "extract_epsilon",
    "extract_eta",
    "extract_two_copy",
]

Q_LABEL = Label("Q", 2)

KET_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
KET_MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


class _OptimizeType:
    """Sentinel selecting recovery optimization instead of a fixed recovery."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OPTIMIZE"


OPTIMIZE = _OptimizeType()


def omega_pm(q: Label = Q_LABEL) -> TestEnsemble:
    """The fixed test ensemble {(1/2, |+>), (1/2, |->)} on the ancilla."""
    return TestEnsemble(
        ((0.5, pure_state(KET_PLUS, (q,))), (0.5, pure_state(KET_MINUS, (q,))))
    )


@dataclass(frozen=True)
class LossProcess:
    kind: str  # "error" | "disturbance"
    rho: DensityMatrix
    generator: Observable
    theta: float
    meas: Instrument
    channel: KrausChannel = field(repr=False)
    q: Label = Q_LABEL


@dataclass(frozen=True)
class CanonicalRecovery:
    """R_{X,target} = dephase Q in {|+>,|->} after undoing the X coupling.

    x lives on some output factor(s); target lists every non-Q output label,
    all of which are traced out. The stored channel is built at this theta;
    extraction rebuilds the family member for each grid theta.
    """

    x: Observable
    target: tuple
    theta: float
    channel: KrausChannel = field(repr=False)
    q: Label = Q_LABEL


@dataclass(frozen=True)
class IepResult:
    value: float
    theta_grid: tuple
    fit_residual: float
    method: str
    rescale: float | None = None
    branch_probability: float | None = None

    def to_json(self) -> dict:
        d = {
            "value": self.value,
            "theta_grid": [[t, v] for t, v in self.theta_grid],
            "fit_residual": self.fit_residual,
            "method": self.method,
        }
        if self.rescale is not None:
            d["rescale"] = self.rescale
        if self.branch_probability is not None:
            d["branch_probability"] = self.branch_probability
        return d


@dataclass(frozen=True)
class ExtractionConfig:
    method: str = "extrapolated"  # or "analytic"
    thetas: tuple = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    fit_tol: float = 1e-6
    optimizer: OptimizerConfig = OptimizerConfig()

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "thetas": list(self.thetas),
            "fit_tol": self.fit_tol,
            "optimizer": self.optimizer.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ExtractionConfig":
        return cls(
            method=str(d.get("method", "extrapolated")),
            thetas=tuple(float(t) for t in d.get("thetas", (1e-2, 5e-3, 2.5e-3, 1.25e-3))),
            fit_tol=float(d.get("fit_tol", 1e-6)),
            optimizer=OptimizerConfig.from_json(d.get("optimizer", {})),
        )


def _expm_herm(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t H) for Hermitian H via its eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * t * vals)) @ vecs.conj().T


def append_channel(rho: DensityMatrix, q: Label = Q_LABEL) -> KrausChannel:
    """A_rho: X_Q -> rho (x) X_Q, as a CPTP map from Q into system + Q."""
    vals, vecs = np.linalg.eigh(rho.data)
    ops = []
    iq = np.eye(q.dim, dtype=complex)
    for lam, v in zip(vals, vecs.T):
        if lam > 1e-14:
            ops.append(np.sqrt(lam) * np.kron(v.reshape(-1, 1), iq))
    return KrausChannel((q,), tuple(rho.space) + (q,), tuple(ops))


def weak_coupling(
    gen: Observable, theta: float, q: Label = Q_LABEL, dagger: bool = False
) -> KrausChannel:
    """Unitary conjugation by exp(-i theta gen (x) sigma_z) on gen's space + Q."""
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    h = np.kron(gen.data, sz)
    u = _expm_herm(h, -theta if dagger else theta)
    sp = tuple(gen.space) + (q,)
    return KrausChannel(sp, sp, (u,))


def dephase_pm(q: Label = Q_LABEL) -> KrausChannel:
    ops = (np.outer(KET_PLUS, KET_PLUS.conj()), np.outer(KET_MINUS, KET_MINUS.conj()))
    return KrausChannel((q,), (q,), ops)


def trace_out_channel(sp, drop) -> KrausChannel:
    """Trace out the labels in `drop`, keeping the remaining factors in order."""
    sp = _as_space(sp)
    drop_names = {l.name if isinstance(l, Label) else str(l) for l in drop}
    keep = tuple(l for l in sp if l.name not in drop_names)
    dropped = tuple(l for l in sp if l.name in drop_names)
    if len(dropped) != len(drop_names):
        raise ValueError(f"labels {drop_names} not all present in {_names(sp)}")
    d_drop = space_dim(dropped)
    d_keep = space_dim(keep)
    names = _names(sp)
    order = [names.index(l.name) for l in dropped] + [names.index(l.name) for l in keep]
    dims = [l.dim for l in sp]
    d = space_dim(sp)
    idx = np.arange(d).reshape(dims).transpose(order).reshape(d)
    perm = np.zeros((d, d))
    perm[np.arange(d), idx] = 1.0
    ops = tuple(
        np.kron(ket(t, d_drop).conj().reshape(1, -1), np.eye(d_keep)) @ perm
        for t in range(d_drop)
    )
    return KrausChannel(sp, keep, ops)


def canonical_recovery(
    x: Observable, target, theta: float, q: Label = Q_LABEL, in_space=None
) -> CanonicalRecovery:
    """Build R_{X,target}: undo the X coupling, trace out target, dephase Q.

    in_space defaults to target + (q,); pass it explicitly when the loss
    output orders its factors differently.
    """
    target = _as_space(target)
    sp = _as_space(in_space) if in_space is not None else tuple(target) + (q,)
    undo = embed(weak_coupling(x, theta, q, dagger=True), sp)
    j = compose(dephase_pm(q), trace_out_channel(sp, target))
    return CanonicalRecovery(x, tuple(target), float(theta), compose(j, undo), q)


def _check_meas(rho: DensityMatrix, gen: Observable, meas: Instrument):
    if _names(gen.space) != _names(rho.space):
        raise ValueError("generator and state must share a space")
    if _names(meas.in_space) != _names(rho.space):
        raise ValueError("instrument input must match the state space")


def build_loss_error(
    rho: DensityMatrix,
    a: Observable,
    theta: float,
    meas: Instrument,
    q: Label = Q_LABEL,
    pointer_name: str = "P",
) -> LossProcess:
    """P_M o U_{A,theta} o A_rho from Q to (P, Q)."""
    _check_meas(rho, a, meas)
    full = tuple(rho.space) + (q,)
    app = append_channel(rho, q)
    u = embed(weak_coupling(a, theta, q), full)
    p_label = Label(pointer_name, len(meas.branches))
    pm = embed(pointer_channel(meas, p_label), full)
    channel = compose(pm, compose(u, app))
    return LossProcess("error", rho, a, float(theta), meas, channel, q)


def build_loss_disturbance(
    rho: DensityMatrix,
    b: Observable,
    theta: float,
    meas: Instrument,
    q: Label = Q_LABEL,
) -> LossProcess:
    """I_M o U_{B,theta} o A_rho from Q to (S', Q)."""
    _check_meas(rho, b, meas)
    full = tuple(rho.space) + (q,)
    app = append_channel(rho, q)
    u = embed(weak_coupling(b, theta, q), full)
    im = embed(instrument_channel(meas), full)
    channel = compose(im, compose(u, app))
    return LossProcess("disturbance", rho, b, float(theta), meas, channel, q)


def _two_copy_labels(rho: DensityMatrix):
    if len(rho.space) != 1:
        raise ValueError("two-copy comb supports single-factor system spaces")
    base = rho.space[0]
    return Label(base.name + "2", base.dim), Label(base.name + "1", base.dim)


def _relabel_instrument(meas: Instrument, new_in: Label) -> Instrument:
    d_out = len(meas.branches[0][1])
    if d_out == meas.dim_in:
        out = (new_in,)
    else:
        out = (Label(new_in.name + "o", d_out),)
    return Instrument((new_in,), out, meas.branches)


def build_loss_two_copy(
    rho: DensityMatrix,
    gen: Observable,
    theta: float,
    meas: Instrument,
    kind: str,
    q: Label = Q_LABEL,
    pointer_name: str = "P",
) -> LossProcess:
    """Calibration comb on two copies: couple copy 1, measure copy 2.

    error: P_M on copy 2 -> (P, S1, Q); disturbance: I_M on copy 2
    -> (S2, S1, Q).
    """
    _check_meas(rho, gen, meas)
    s2, s1 = _two_copy_labels(rho)
    rho2 = DensityMatrix((s2, s1), np.kron(rho.data, rho.data))
    full = (s2, s1, q)
    app = append_channel(rho2, q)
    gen1 = Observable((s1,), gen.data)
    u = embed(weak_coupling(gen1, theta, q), full)
    meas2 = _relabel_instrument(meas, s2)
    if kind == "error":
        p_label = Label(pointer_name, len(meas.branches))
        stage = embed(pointer_channel(meas2, p_label), full)
    elif kind == "disturbance":
        stage = embed(instrument_channel(meas2), full)
    else:
        raise ValueError(f"unknown two-copy kind {kind!r}")
    channel = compose(stage, compose(u, app))
    return LossProcess(kind, rho, gen, float(theta), meas, channel, q)


# ---------------------------------------------------------------------------
# theta^2 extraction


def _fit_c2(grid: list, fit_tol: float):
    th = np.array([t for t, _ in grid])
    y = np.array([v for _, v in grid])
    design = np.stack([th**2, th**4], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    pred = design @ coef
    scale = max(float(np.max(np.abs(y))), 1e-7)
    residual = float(np.max(np.abs(pred - y))) / scale
    if residual > fit_tol:
        raise ExtractionError(
            f"quadratic fit residual {residual:.3e} exceeds tolerance {fit_tol:.1e}",
            diagnostics={
                "theta_grid": [list(p) for p in grid],
                "coefficients": [float(c) for c in coef],
                "residual": residual,
            },
        )
    return float(coef[0]), residual


def _check_value(value: float, grid, method: str) -> None:
    if value < -1e-9:
        raise ExtractionError(
            f"extracted value {value} is negative beyond tolerance",
            diagnostics={"theta_grid": [list(p) for p in grid], "method": method},
        )


def _analytic_c2(
    sys_state: np.ndarray,
    g1: np.ndarray,
    phi: KrausChannel,
    g2: np.ndarray,
    q: Label = Q_LABEL,
) -> float:
    """Exact lim delta^2/theta^2 for a canonical recovery.

    sys_state is the appended block (everything but Q) on phi's input space;
    g1/g2 are the full coupling generators on phi's input/output spaces. Only
    the +/- diagonal matrix elements on Q survive the final dephasing, which
    gives c2 = -(a+'' + a-'')/4 with a_k'' the second derivative of the
    recovered overlap.
    """
    total = 0.0
    for vec in (KET_PLUS, KET_MINUS):
        kk = np.outer(vec, vec.conj())
        rho_t = np.kron(sys_state, kk)
        m0 = apply_raw(phi, rho_t)
        c1 = g1 @ rho_t - rho_t @ g1
        m1 = apply_raw(phi, c1)
        c11 = g1 @ c1 - c1 @ g1
        m2 = apply_raw(phi, c11)
        inner = g2 @ m0 - m0 @ g2
        gpp = -(g2 @ inner - inner @ g2) + 2 * (g2 @ m1 - m1 @ g2) - m2
        e = embed_matrix(kk, (q,), phi.out_space)
        total += float(np.real(np.trace(e @ gpp)))
    return -total / 4.0


def _grid_extract(loss_at, recovery_at, cfg: ExtractionConfig, q: Label):
    omega = omega_pm(q)
    grid = []
    for theta in cfg.thetas:
        loss = loss_at(theta)
        rec = recovery_at(theta)
        if rec is OPTIMIZE:
            raise TypeError("internal: OPTIMIZE must be resolved before _grid_extract")
        rep = delta_with_recovery(loss, rec, omega)
        grid.append((float(theta), rep.delta**2))
    c2, residual = _fit_c2(grid, cfg.fit_tol)
    _check_value(c2, grid, "extrapolated")
    return IepResult(c2, tuple(grid), residual, "extrapolated")


def _grid_extract_optimized(loss_at, warm_at, cfg: ExtractionConfig, q: Label):
    omega = omega_pm(q)
    grid = []
    for theta in cfg.thetas:
        loss = loss_at(theta)
        warm = tuple(w for w in warm_at(theta) if w is not None)
        rep = delta_min(loss, omega, cfg.optimizer, warm_starts=warm)
        grid.append((float(theta), rep.delta**2))
    c2, residual = _fit_c2(grid, cfg.fit_tol)
    _check_value(c2, grid, "extrapolated")
    return IepResult(c2, tuple(grid), residual, "extrapolated")


def _pushforward_x(rho: DensityMatrix, a: Observable, meas: Instrument, p_label: Label):
    """Pointer observable sum_m f*(m) |m><m|_P at the pushforward values."""
    _, fstar = lt_error(rho, a, meas)
    vals = outcome_values(meas, fstar)
    return Observable((p_label,), np.diag(vals).astype(complex))


def extract_epsilon(
    rho: DensityMatrix,
    a: Observable,
    meas: Instrument,
    recovery,
    cfg: ExtractionConfig | None = None,
    q: Label = Q_LABEL,
) -> IepResult:
    """Squared error: lim delta^2/theta^2 of the error comb.

    recovery: a CanonicalRecovery (rebuilt per grid theta), an explicit
    KrausChannel held fixed across the grid, or OPTIMIZE to minimize over
    recoveries at each theta (warm-started from the pushforward canonical
    recovery).
    """
    cfg = cfg or ExtractionConfig()
    p_label = Label("P", len(meas.branches))

    if cfg.method == "analytic":
        if not isinstance(recovery, CanonicalRecovery):
            raise ValueError("analytic extraction needs a canonical recovery")
        full = tuple(rho.space) + (q,)
        g1 = np.kron(a.data, np.diag([1.0, -1.0]))
        phi = embed(pointer_channel(meas, p_label), full)
        g2 = embed_matrix(
            np.kron(recovery.x.data, np.diag([1.0, -1.0])),
            tuple(recovery.x.space) + (q,),
            phi.out_space,
        )
        c2 = _analytic_c2(rho.data, g1, phi, g2, q)
        _check_value(c2, (), "analytic")
        return IepResult(c2, (), 0.0, "analytic")

    loss_at = lambda t: build_loss_error(rho, a, t, meas, q).channel
    if recovery is OPTIMIZE:
        x_star = _pushforward_x(rho, a, meas, p_label)
        warm_at = lambda t: (canonical_recovery(x_star, (p_label,), t, q).channel,)
        return _grid_extract_optimized(loss_at, warm_at, cfg, q)
    if isinstance(recovery, CanonicalRecovery):
        rec_at = lambda t: canonical_recovery(
            recovery.x, recovery.target, t, q
        ).channel
    elif isinstance(recovery, KrausChannel):
        rec_at = lambda t: recovery
    else:
        raise TypeError(f"unsupported recovery {recovery!r}")
    return _grid_extract(loss_at, rec_at, cfg, q)


def extract_eta(
    rho: DensityMatrix,
    b: Observable,
    meas: Instrument,
    recovery,
    cfg: ExtractionConfig | None = None,
    q: Label = Q_LABEL,
) -> IepResult:
    """Squared disturbance: lim delta^2/theta^2 of the disturbance comb."""
    cfg = cfg or ExtractionConfig()

    if cfg.method == "analytic":
        if not isinstance(recovery, CanonicalRecovery):
            raise ValueError("analytic extraction needs a canonical recovery")
        full = tuple(rho.space) + (q,)
        g1 = np.kron(b.data, np.diag([1.0, -1.0]))
        phi = embed(instrument_channel(meas), full)
        g2 = embed_matrix(
            np.kron(recovery.x.data, np.diag([1.0, -1.0])),
            tuple(recovery.x.space) + (q,),
            phi.out_space,
        )
        c2 = _analytic_c2(rho.data, g1, phi, g2, q)
        _check_value(c2, (), "analytic")
        return IepResult(c2, (), 0.0, "analytic")

    loss_at = lambda t: build_loss_disturbance(rho, b, t, meas, q).channel
    if recovery is OPTIMIZE:
        out_sp = meas.out_space

        def warm_at(t):
            warms = []
            _, x_lt = lt_disturbance(rho, b, meas)
            warms.append(canonical_recovery(x_lt, out_sp, t, q).channel)
            if meas.dim_in == space_dim(out_sp):
                b_out = Observable(out_sp, b.data)
                warms.append(canonical_recovery(b_out, out_sp, t, q).channel)
            return tuple(warms)

        return _grid_extract_optimized(loss_at, warm_at, cfg, q)
    if isinstance(recovery, CanonicalRecovery):
        rec_at = lambda t: canonical_recovery(recovery.x, recovery.target, t, q).channel
    elif isinstance(recovery, KrausChannel):
        rec_at = lambda t: recovery
    else:
        raise TypeError(f"unsupported recovery {recovery!r}")
    return _grid_extract(loss_at, rec_at, cfg, q)


def extract_two_copy(
    rho: DensityMatrix,
    gen: Observable,
    meas: Instrument,
    kind: str,
    f=None,
    cfg: ExtractionConfig | None = None,
    q: Label = Q_LABEL,
) -> IepResult:
    """Squared calibration error/disturbance from the two-copy comb.

    error kind: f gives the pointer values (defaults required); disturbance
    kind: the recovery couples the measured copy back through `gen`.
    """
    cfg = cfg or ExtractionConfig()
    s2, s1 = _two_copy_labels(rho)
    rho2 = np.kron(rho.data, rho.data)
    full = (s2, s1, q)
    meas2 = _relabel_instrument(meas, s2)

    if kind == "error":
        if f is None:
            raise ValueError("two-copy error extraction needs outcome values f")
        vals = outcome_values(meas, f)
        p_label = Label("P", len(meas.branches))
        x = Observable((p_label,), np.diag(vals).astype(complex))
        target = (p_label, s1)
        phi = embed(pointer_channel(meas2, p_label), full)
    elif kind == "disturbance":
        out2 = meas2.out_space
        x = Observable(out2, gen.data)
        target = tuple(out2) + (s1,)
        phi = embed(instrument_channel(meas2), full)
    else:
        raise ValueError(f"unknown two-copy kind {kind!r}")

    if cfg.method == "analytic":
        g1 = embed_matrix(
            np.kron(gen.data, np.diag([1.0, -1.0])), (s1, q), full
        )
        g2 = embed_matrix(
            np.kron(x.data, np.diag([1.0, -1.0])), tuple(x.space) + (q,), phi.out_space
        )
        c2 = _analytic_c2(rho2, g1, phi, g2, q)
        _check_value(c2, (), "analytic")
        return IepResult(c2, (), 0.0, "analytic")

    loss_at = lambda t: build_loss_two_copy(rho, gen, t, meas, kind, q).channel
    rec_at = lambda t: canonical_recovery(x, target, t, q).channel
    return _grid_extract(loss_at, rec_at, cfg, q)
