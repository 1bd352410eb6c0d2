import numpy as np
import pytest

from irrevkit import (
    BlochError,
    DistributionError,
    Label,
    Observable,
    OutcomeFunctionError,
    akg_unbiasedness_check,
    blw_calibration_error_qubit,
    bloch_from_state,
    lt_disturbance,
    lt_error,
    maximally_mixed,
    outcome_values,
    ozawa_disturbance,
    ozawa_error,
    pure_state,
    state_from_bloch,
    wasserstein2_discrete,
)
from irrevkit.errors import IrrevkitError
from conftest import SIGMA_X, SIGMA_Z, proj_z, rand_herm, rand_instrument, rand_state

S = Label("S", 2)
F_PM = {"0": 1.0, "1": -1.0}


class TestOutcomeValues:
    def test_mapping_form(self):
        vals = outcome_values(proj_z(S), F_PM)
        assert np.allclose(vals, [1.0, -1.0])

    def test_sequence_form(self):
        vals = outcome_values(proj_z(S), [2.0, 3.0])
        assert np.allclose(vals, [2.0, 3.0])

    def test_missing_outcome_rejected(self):
        with pytest.raises((OutcomeFunctionError, IrrevkitError)):
            outcome_values(proj_z(S), {"0": 1.0})


class TestOzawa:
    def test_sharp_measurement_of_its_own_observable(self):
        rng = np.random.default_rng(0)
        rho = rand_state(rng, 2, S)
        a = Observable((S,), SIGMA_Z)
        assert ozawa_error(rho, a, proj_z(S), F_PM) < 1e-9

    def test_conjugate_observable_error(self):
        # squared error convention: <A^2> + <f^2> - 2 Re<f A> = 1 + 1 - 0
        rho = pure_state([1, 0], (S,))
        a = Observable((S,), SIGMA_X)
        assert abs(ozawa_error(rho, a, proj_z(S), F_PM) - 2.0) < 1e-12

    def test_disturbance_of_conjugate_observable(self):
        rho = pure_state([1, 0], (S,))
        b = Observable((S,), SIGMA_X)
        assert abs(ozawa_disturbance(rho, b, proj_z(S)) - 2.0) < 1e-12

    def test_commuting_observable_undisturbed(self):
        rho = pure_state([1, 0], (S,))
        assert ozawa_disturbance(rho, Observable((S,), SIGMA_Z), proj_z(S)) < 1e-9


class TestUnbiasedness:
    def test_projective_at_eigenvalues_unbiased(self):
        ok, dev = akg_unbiasedness_check(proj_z(S), Observable((S,), SIGMA_Z), F_PM)
        assert ok and dev < 1e-12

    def test_conjugate_readout_biased(self):
        ok, dev = akg_unbiasedness_check(proj_z(S), Observable((S,), SIGMA_X), F_PM)
        assert not ok and dev > 0.5


class TestLt:
    def test_frozen_qubit_case(self):
        rho = pure_state([1, 0], (S,))
        value, fstar = lt_error(rho, Observable((S,), SIGMA_X), proj_z(S))
        assert abs(value - 1.0) < 1e-12
        assert all(abs(v) < 1e-12 for v in fstar.values())

    def test_disturbance_frozen_qubit_case(self):
        rho = pure_state([1, 0], (S,))
        value, x = lt_disturbance(rho, Observable((S,), SIGMA_X), proj_z(S))
        assert abs(value - 1.0) < 1e-12
        assert np.max(np.abs(x.data)) < 1e-9

    def test_lt_never_exceeds_ozawa(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            d = int(rng.integers(2, 4))
            lab = Label("S", d)
            rho = rand_state(rng, d, lab)
            a = Observable((lab,), rand_herm(rng, d))
            meas = rand_instrument(rng, d, 3, lab)
            lt, fstar = lt_error(rho, a, meas)
            f_rand = {m: float(v) for m, v in zip(meas.outcomes, rng.standard_normal(3))}
            assert ozawa_error(rho, a, meas, f_rand) >= lt - 1e-10
            assert abs(ozawa_error(rho, a, meas, fstar) - lt) < 1e-8

    def test_lt_disturbance_never_exceeds_ozawa(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            rho = rand_state(rng, 2, S)
            b = Observable((S,), rand_herm(rng, 2))
            meas = rand_instrument(rng, 2, 2, S)
            lt, _ = lt_disturbance(rho, b, meas)
            assert ozawa_disturbance(rho, b, meas) >= lt - 1e-10


class TestBlwQubit:
    def test_orthogonal_directions(self):
        assert abs(blw_calibration_error_qubit([0, 0, 1], [1, 0, 0]) - np.sqrt(2)) < 1e-12

    def test_aligned_directions_vanish(self):
        assert blw_calibration_error_qubit([0, 0, 1], [0, 0, 1]) < 1e-12

    def test_antiparallel_directions(self):
        assert abs(blw_calibration_error_qubit([0, 0, 1], [0, 0, -1]) - 2.0) < 1e-12


class TestWasserstein:
    def test_identical_distributions(self):
        assert wasserstein2_discrete([0, 1], [0.5, 0.5], [0, 1], [0.5, 0.5]) < 1e-12

    def test_point_masses(self):
        assert abs(wasserstein2_discrete([0.0], [1.0], [3.0], [1.0]) - 3.0) < 1e-12

    def test_mass_rebalancing(self):
        # monotone coupling moves half the mass across distance 1
        w = wasserstein2_discrete([0.0, 1.0], [0.25, 0.75], [0.0, 1.0], [0.75, 0.25])
        assert abs(w - 0.7071067811865476) < 1e-12

    def test_unsorted_support_handled(self):
        a = wasserstein2_discrete([1.0, 0.0], [0.75, 0.25], [0.0, 1.0], [0.75, 0.25])
        b = wasserstein2_discrete([0.0, 1.0], [0.25, 0.75], [0.0, 1.0], [0.75, 0.25])
        assert abs(a - b) < 1e-12

    def test_bad_weights_rejected(self):
        with pytest.raises(DistributionError):
            wasserstein2_discrete([0, 1], [0.9, 0.3], [0, 1], [0.5, 0.5])


class TestBloch:
    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        rho = rand_state(rng, 2, S)
        back = state_from_bloch(bloch_from_state(rho), S)
        assert np.max(np.abs(back.data - rho.data)) < 1e-12

    def test_center_is_maximally_mixed(self):
        assert np.max(np.abs(state_from_bloch([0, 0, 0], S).data - maximally_mixed((S,)).data)) < 1e-12

    def test_outside_ball_rejected(self):
        with pytest.raises(BlochError):
            state_from_bloch([0.9, 0.9, 0.9], S)
