import numpy as np
import pytest

from irrevkit import (
    ConservationError,
    Implementation,
    Label,
    Observable,
    YanaseConditionError,
    check_conservation,
    choi,
    commutant_projection,
    conserving_disturbance_implementation,
    conserving_error_implementation,
    maximally_mixed,
    pointer_channel,
    pure_state,
    realized_channel,
    swap_implementation,
    validate_channel,
    way_bound_disturbance,
    way_bound_error,
    way_bound_error_yanase,
    y_operator,
)
from conftest import SIGMA_X, SIGMA_Z, proj_x, rand_herm, rand_state

S = Label("S", 2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
RHO_PLUS_I = pure_state([1, 1j], (S,))


def tight_instance():
    """CNOT pointer coupling saturating the Yanase-form bound exactly."""
    impl, meas = conserving_error_implementation(
        Observable((S,), SIGMA_Z),
        (0.0, 0.0),
        np.array([1.0, 0.0], dtype=complex),
        u_meas=CNOT,
    )
    return impl, meas


class TestImplementation:
    def test_conservation_exact_for_generated_error_impl(self):
        rng = np.random.default_rng(1)
        impl, _ = conserving_error_implementation(
            Observable((S,), SIGMA_Z),
            (0.3, -0.7),
            np.array([0.6, 0.8], dtype=complex),
            rng=rng,
        )
        assert check_conservation(impl) < 1e-9

    def test_non_unitary_rejected(self):
        impl, _ = tight_instance()
        with pytest.raises(ConservationError):
            Implementation(
                impl.rho_beta,
                impl.u * 1.5,
                impl.charges,
                impl.in_alpha,
                impl.in_beta,
                impl.out_alpha,
                impl.out_beta,
            )

    def test_realized_channel_is_the_dephased_pointer(self):
        impl, meas = tight_instance()
        got = realized_channel(impl)
        want = pointer_channel(meas, Label("P", 2))
        assert np.max(np.abs(choi(got) - choi(want))) < 1e-10
        assert validate_channel(got)["ok"]

    def test_y_operator_with_zero_pointer_charge(self):
        impl, meas = tight_instance()
        y = y_operator(pointer_channel(meas, Label("P", 2)), impl.charges)
        # pointer carries no charge here, so nothing is subtracted from X_S
        assert np.max(np.abs(y.data - SIGMA_Z)) < 1e-10


class TestErrorBound:
    def test_tight_instance_saturates(self):
        impl, meas = tight_instance()
        rep = way_bound_error_yanase(
            RHO_PLUS_I, Observable((S,), SIGMA_X), meas, None, impl
        )
        assert abs(rep.lhs - 1.0) < 1e-12
        assert abs(rep.rhs - 1.0) < 1e-12
        assert rep.slack >= -1e-9
        assert abs(rep.terms["commutator_expectation"] - 2.0) < 1e-12
        assert abs(rep.terms["qfi_state"] - 4.0) < 1e-12
        assert rep.terms["fisher_cost_upper"] < 1e-12

    def test_full_bound_holds_on_tight_instance(self):
        impl, meas = tight_instance()
        rep = way_bound_error(RHO_PLUS_I, Observable((S,), SIGMA_X), meas, None, impl)
        assert rep.slack >= -1e-9
        assert "variance_out" in rep.terms

    def test_seeded_corpus_positive_slack(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            shifts = tuple(rng.standard_normal(2))
            chi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            impl, meas = conserving_error_implementation(
                Observable((S,), SIGMA_Z), shifts, chi, rng=rng
            )
            rho = rand_state(rng, 2, S)
            a = Observable((S,), rand_herm(rng, 2))
            rep = way_bound_error(rho, a, meas, None, impl)
            assert rep.slack >= -1e-9

    def test_charges_override_is_checked(self):
        impl, meas = tight_instance()
        bad = dict(impl.charges)
        bad["alpha"] = Observable((S,), SIGMA_X)
        with pytest.raises(ConservationError):
            way_bound_error(RHO_PLUS_I, Observable((S,), SIGMA_X), meas, bad, impl)

    def test_wrong_target_instrument_rejected(self):
        impl, _ = tight_instance()
        with pytest.raises(ConservationError):
            way_bound_error(RHO_PLUS_I, Observable((S,), SIGMA_X), proj_x(S), None, impl)

    def test_yanase_condition_gate(self):
        impl, meas = tight_instance()
        skew = dict(impl.charges)
        skew["alpha_out"] = Observable(impl.charges["alpha_out"].space, SIGMA_X)
        with pytest.raises((YanaseConditionError, ConservationError)):
            way_bound_error_yanase(RHO_PLUS_I, Observable((S,), SIGMA_X), meas, skew, impl)


class TestDisturbanceBound:
    def test_seeded_corpus_positive_slack(self):
        b_label = Label("B1", 2)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            chi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            impl, meas = conserving_disturbance_implementation(
                Observable((S,), SIGMA_Z),
                Observable((b_label,), SIGMA_Z.astype(complex)),
                pure_state(chi, (b_label,)),
                rng,
            )
            rho = rand_state(rng, 2, S)
            b = Observable((S,), rand_herm(rng, 2))
            rep = way_bound_disturbance(rho, b, meas, None, impl)
            assert rep.slack >= -1e-9

    def test_resonant_charge_gives_nontrivial_bound(self):
        b_label = Label("B1", 2)
        rng = np.random.default_rng(5)
        chi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        impl, meas = conserving_disturbance_implementation(
            Observable((S,), SIGMA_Z),
            Observable((b_label,), SIGMA_Z.astype(complex)),
            pure_state(chi, (b_label,)),
            rng,
        )
        rep = way_bound_disturbance(RHO_PLUS_I, Observable((S,), SIGMA_X), meas, None, impl)
        assert rep.rhs > 0.01
        assert rep.slack >= -1e-9


class TestSwap:
    def test_swap_measures_by_reprepare(self):
        sigma = maximally_mixed((Label("B1", 2),))
        impl, meas = swap_implementation(Observable((S,), SIGMA_Z), sigma)
        assert check_conservation(impl) < 1e-9
        rep = way_bound_disturbance(RHO_PLUS_I, Observable((S,), SIGMA_X), meas, None, impl)
        assert rep.slack >= -1e-9


class TestCommutantProjection:
    def test_projected_matrix_commutes(self):
        rng = np.random.default_rng(9)
        x_tot = np.kron(SIGMA_Z, np.eye(2)) + np.kron(np.eye(2), SIGMA_Z)
        h = rand_herm(rng, 4)
        p = commutant_projection(h, x_tot)
        assert np.max(np.abs(p @ x_tot - x_tot @ p)) < 1e-12

    def test_commuting_input_is_fixed(self):
        x_tot = np.kron(SIGMA_Z, np.eye(2)) + np.kron(np.eye(2), SIGMA_Z)
        assert np.max(np.abs(commutant_projection(x_tot, x_tot) - x_tot)) < 1e-12


class TestReport:
    def test_way_report_json(self):
        impl, meas = tight_instance()
        rep = way_bound_error(RHO_PLUS_I, Observable((S,), SIGMA_X), meas, None, impl)
        d = rep.to_json()
        assert set(d) >= {"lhs", "rhs", "slack", "terms"}
        assert isinstance(d["terms"], dict)
