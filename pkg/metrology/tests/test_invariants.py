import math

import numpy as np
import pytest
from django.core.exceptions import ValidationError
from numpy.testing import assert_allclose

from common.exceptions import InsufficientDataError, UnsupportedDimensionError
from ..invariants import (
    InvariantSet,
    apply_noise_scaling,
    collective_terms,
    fourth_order,
    invariant_set,
    pi_reduction,
    sector_lengths,
)
from ..states import (
    AsymmetricGHZ,
    DynamicsModel,
    NoiseModel,
    ReducedData,
    apply_depolarizing_full,
    conjugate,
    evolve_full,
    ghz_reduced,
    oat_reduced_closed_form,
    random_collective_unitary,
    random_local_unitary,
    random_state,
    reduced_data,
)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def oat_state(n, theta):
    model = DynamicsModel.oat(n)
    return evolve_full(model.initial_state(), model, theta)


class TestSectorLengths:
    """
    Test suite for sector lengths and fourth-order invariants.

    These tests verify:
    - Known values on GHZ and product states
    - Invariance under local unitaries
    - Agreement of the Bloch and purity routes
    """

    def test_balanced_ghz(self):
        """Test S1 = 0, S2 = 6, F1 = 0, F2 = 18 for the four-qubit GHZ state."""
        inv = invariant_set(ghz_reduced(AsymmetricGHZ.from_alpha(4, 1 / math.sqrt(2))))

        assert inv.s1 == pytest.approx(0.0, abs=1e-14)
        assert inv.s2 == pytest.approx(6.0)
        assert inv.f1 == pytest.approx(0.0, abs=1e-14)
        assert inv.f2 == pytest.approx(18.0)

    def test_product_state(self):
        """Test S1 = N and S2 = N(N-1)/2 for a pure product state."""
        inv = invariant_set(oat_reduced_closed_form(5, 0.0))
        assert (inv.s1, inv.s2) == pytest.approx((5.0, 10.0))

    @pytest.mark.parametrize("d", [2, 3])
    def test_local_unitary_invariance(self, rng, d):
        """Test that S1 and S2 do not change under U_1 x ... x U_N."""
        state = random_state(3, d, rng)
        rotated = conjugate(state, random_local_unitary(3, d, rng))

        before = invariant_set(reduced_data(state))
        after = invariant_set(reduced_data(rotated))
        assert (after.s1, after.s2) == pytest.approx((before.s1, before.s2), rel=1e-9)
        if d == 2:
            assert (after.f1, after.f2) == pytest.approx((before.f1, before.f2), rel=1e-9)
        else:
            assert after.f1 is None

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_drift_over_local_unitaries(self, rng, n):
        """Test that S1, S2, F1 and F2 drift by less than 1e-10 over 100 local unitaries."""
        state = random_state(n, 2, rng)
        before = invariant_set(reduced_data(state))
        for _ in range(100):
            after = invariant_set(reduced_data(conjugate(state, random_local_unitary(n, 2, rng))))
            for name in ("s1", "s2", "f1", "f2"):
                assert abs(getattr(after, name) - getattr(before, name)) < 1e-10

    @pytest.mark.parametrize("d", [2, 3])
    def test_two_party_purity_identity(self, rng, d):
        """Test S1 + S2 = d^2 tr(rho^2) - 1 on 100 random two-party states."""
        for _ in range(100):
            state = random_state(2, d, rng)
            s1, s2 = sector_lengths(reduced_data(state))
            assert s1 + s2 == pytest.approx(d * d * state.purity() - 1, abs=1e-12)

    def test_purity_route_matches_bloch_route(self, rng):
        """Test the purity identities against the Bloch/correlation sums on qubits."""
        data = reduced_data(random_state(3, 2, rng))
        purities_only = ReducedData(
            n_parties=3,
            single_purities=data.single_purities,
            pair_purities=data.pair_purities,
        )

        assert_allclose(sector_lengths(purities_only, d=2), sector_lengths(data), rtol=1e-10)

    def test_qutrit_sector_lengths_are_non_negative(self, rng):
        """Test S1, S2 >= 0 for a random two-qutrit state."""
        s1, s2 = sector_lengths(reduced_data(random_state(2, 3, rng)))
        assert s1 >= 0 and s2 >= 0

    def test_fourth_order_needs_qubits(self, rng):
        """Test that F1 and F2 are rejected for qutrits."""
        with pytest.raises(UnsupportedDimensionError):
            fourth_order(reduced_data(random_state(2, 3, rng)))

    def test_purities_required_for_qutrits(self):
        """Test that purity-free qutrit data cannot give sector lengths."""
        with pytest.raises(InsufficientDataError):
            sector_lengths(ReducedData(n_parties=2, local_dim=3))

    def test_negative_invariants_rejected(self):
        """Test that S1 below the numerical slack is invalid."""
        with pytest.raises(ValidationError):
            InvariantSet(s1=-0.1, s2=0.0, n_parties=2)


class TestCollectiveTerms:
    """
    Test suite for the collective K-terms, B(theta) and 144 <X_2^2>.

    These tests verify:
    - Symmetric and general code paths agree
    - Invariance under collective unitaries
    - The correlation shortcut for sum <J_mu^2>
    - The permutation-invariant closed form of B
    """

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_symmetric_path_matches_general_path(self, n):
        """Test closed-form OAT terms against terms from every pair of the full state."""
        theta = 0.35
        closed = collective_terms(oat_reduced_closed_form(n, theta))
        general = collective_terms(reduced_data(oat_state(n, theta)))

        for name in ("k1", "k2", "k2_prime", "sum_j_sq", "b_theta"):
            assert getattr(closed, name) == pytest.approx(getattr(general, name), rel=1e-9, abs=1e-9)

    def test_second_moment_of_symmetric_path(self):
        """Test that both code paths give the same 144 <X_2^2>."""
        closed = collective_terms(oat_reduced_closed_form(4, 0.35))
        general = collective_terms(reduced_data(oat_state(4, 0.35)))
        assert closed.second_moment == pytest.approx(general.second_moment, rel=1e-10)

    def test_k2_prime_vanishes_for_three_parties(self, rng):
        """Test that K2' has no terms with four distinct parties when N = 3."""
        assert collective_terms(reduced_data(random_state(3, 2, rng))).k2_prime == 0.0

    def test_collective_unitary_invariance(self, rng):
        """Test that K-terms and B survive V x ... x V."""
        state = random_state(3, 2, rng)
        rotated = conjugate(state, random_collective_unitary(3, rng))

        before = collective_terms(reduced_data(state))
        after = collective_terms(reduced_data(rotated))
        assert after.k1 == pytest.approx(before.k1, abs=1e-10)
        assert after.k2 == pytest.approx(before.k2, abs=1e-10)
        assert after.b_theta == pytest.approx(before.b_theta, abs=1e-9)

    def test_drift_over_collective_unitaries(self, rng):
        """Test that the K-terms drift by less than 1e-10 over 100 collective unitaries."""
        state = random_state(4, 2, rng)
        before = collective_terms(reduced_data(state))
        for _ in range(100):
            rotated = conjugate(state, random_collective_unitary(4, rng))
            after = collective_terms(reduced_data(rotated))
            for name in ("k1", "k2", "k2_prime", "sum_j_sq", "second_moment"):
                assert abs(getattr(after, name) - getattr(before, name)) < 1e-10

    def test_sum_j_squared_from_correlations(self, rng):
        """Test 1/4 [3N + sum tr T_ij] against direct expectation values."""
        state = random_state(3, 2, rng)
        data = reduced_data(state)
        from_pairs = collective_terms(data).sum_j_sq
        from_state = collective_terms(data, state=state).sum_j_sq
        assert from_pairs == pytest.approx(from_state, rel=1e-10)

    @pytest.mark.parametrize("n", [3, 6, 40])
    def test_pi_closed_form_of_b(self, n):
        """Test B and 144 <X_2^2> from (r^2, tr T, tr T^2) against the term-by-term sum."""
        data = oat_reduced_closed_form(n, 0.2)
        reduction = pi_reduction(data)

        assert reduction.b_theta == pytest.approx(collective_terms(data).b_theta, rel=1e-10)
        assert reduction.second_moment == pytest.approx(
            collective_terms(data).second_moment, rel=1e-10
        )
        inv = invariant_set(data)
        assert reduction.s1_plus_k1 == pytest.approx(inv.s1 + collective_terms(data).k1)

    def test_pi_reduction_rejects_asymmetric_states(self, rng):
        """Test that a generic state is not permutationally invariant."""
        with pytest.raises(ValidationError):
            pi_reduction(reduced_data(random_state(3, 2, rng)))

    def test_missing_pairs_rejected(self):
        """Test that collective terms need every pair correlation."""
        data = ReducedData(
            n_parties=3,
            bloch_vectors=np.zeros((3, 3)),
            correlations={(0, 1): np.zeros((3, 3))},
        )
        with pytest.raises(InsufficientDataError):
            collective_terms(data)


class TestNoiseScaling:
    """
    Test suite for invariant scaling under local depolarizing noise.

    These tests verify:
    - Agreement with invariants of the explicitly depolarized state
    - The noiseless shortcut
    """

    def test_matches_depolarized_state(self):
        """Test scaled invariants against the full channel at N = 4, p = 0.9."""
        p = 0.9
        state = oat_state(4, 0.2)
        clean = reduced_data(state)
        noisy = reduced_data(apply_depolarizing_full(state, NoiseModel(p)))

        inv, coll = apply_noise_scaling(invariant_set(clean), collective_terms(clean), p)
        expected_inv, expected_coll = invariant_set(noisy), collective_terms(noisy)

        for name in ("s1", "s2", "f1", "f2"):
            assert getattr(inv, name) == pytest.approx(getattr(expected_inv, name), rel=1e-9)
        for name in ("k1", "k2", "k2_prime", "sum_j_sq", "b_theta", "second_moment"):
            assert getattr(coll, name) == pytest.approx(getattr(expected_coll, name), rel=1e-9)

    def test_noiseless_is_identity(self):
        """Test that p = 1 returns the invariants unchanged."""
        data = oat_reduced_closed_form(4, 0.3)
        inv, coll = invariant_set(data), collective_terms(data)
        assert apply_noise_scaling(inv, coll, NoiseModel(1.0)) == (inv, coll)

    def test_collective_terms_optional(self):
        """Test that scaling without collective terms returns None for them."""
        inv = invariant_set(oat_reduced_closed_form(4, 0.3))
        scaled, coll = apply_noise_scaling(inv, None, 0.5)
        assert coll is None
        assert scaled.s1 == pytest.approx(inv.s1 * 0.25)
