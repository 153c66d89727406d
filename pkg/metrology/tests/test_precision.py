import math

import pytest
from django.core.exceptions import ValidationError

from ..precision import (
    CollectiveMoment,
    Scheme,
    ThetaDerivativeSpec,
    derivative,
    error_propagation,
    gain,
    precision_at,
    precision_from_reduced,
    theta_limit,
    theta_limit_gain,
)
from ..series import sine
from ..states import DynamicsModel, NoiseModel, oat_reduced_closed_form
from ..tensor import PAULI
from ..twirl import oracle_precision


class TestThetaLimits:
    """
    Test suite for the theta -> 0 gains of the closed-form dynamics.

    These tests verify:
    - One-axis twisting: (N - 1)/4, 3(N - 1)/8 and N(N - 1)/(2(2N - 1)) collectively
    - The pairwise collective moment as a separate curve
    - Mermin dynamics: 4^N/(N + 1) and 3 * 4^N/(3N + 1)
    - Two-qubit GHZ marginals with coherences
    """

    @pytest.mark.parametrize("n", [2, 10, 100, 1000])
    def test_oat_two_copy(self, n):
        assert theta_limit_gain(DynamicsModel.oat(n), Scheme.TWO_COPY) == pytest.approx(
            (n - 1) / 4, rel=1e-10
        )

    @pytest.mark.parametrize("n", [2, 10, 100, 1000])
    def test_oat_four_copy(self, n):
        assert theta_limit_gain(DynamicsModel.oat(n), Scheme.FOUR_COPY) == pytest.approx(
            3 * (n - 1) / 8, rel=1e-10
        )

    @pytest.mark.parametrize("n", [2, 3, 10, 100, 1000])
    def test_oat_collective(self, n):
        expected = n * (n - 1) / (2 * (2 * n - 1))
        assert theta_limit_gain(DynamicsModel.oat(n), Scheme.COLLECTIVE) == pytest.approx(
            expected, rel=1e-10
        )

    @pytest.mark.parametrize("n,expected", [(3, 0.6), (10, 90 / 38), (100, 24.8744)])
    def test_oat_collective_values(self, n, expected):
        value = theta_limit_gain(DynamicsModel.oat(n), Scheme.COLLECTIVE)
        assert value == pytest.approx(expected, abs=1e-4)

    @pytest.mark.parametrize("n", [3, 10, 100, 1000])
    def test_oat_collective_pairwise(self, n):
        """Test the pairwise moment curve N^2(N - 1)/(2N(3N - 5) + 8)."""
        expected = n * n * (n - 1) / (2 * n * (3 * n - 5) + 8)
        value = theta_limit_gain(
            DynamicsModel.oat(n), Scheme.COLLECTIVE, moment=CollectiveMoment.PAIRWISE
        )
        assert value == pytest.approx(expected, rel=1e-10)

    def test_pairwise_collective_hundred_particles(self):
        """Test the pairwise collective gain for N = 100 sits below the exact one."""
        model = DynamicsModel.oat(100)
        pairwise = theta_limit_gain(model, Scheme.COLLECTIVE, moment=CollectiveMoment.PAIRWISE)
        assert pairwise == pytest.approx(16.7774, abs=1e-4)
        assert pairwise < theta_limit_gain(model, Scheme.COLLECTIVE)

    @pytest.mark.parametrize("n", range(3, 11))
    @pytest.mark.parametrize("variant", [1, 2])
    def test_mermin_two_copy(self, n, variant):
        value = theta_limit_gain(DynamicsModel.mermin(n, variant), Scheme.TWO_COPY)
        assert value == pytest.approx(4**n / (n + 1), rel=1e-10)

    @pytest.mark.parametrize("n", range(3, 11))
    def test_mermin_four_copy(self, n):
        value = theta_limit_gain(DynamicsModel.mermin(n, 1), Scheme.FOUR_COPY)
        assert value == pytest.approx(3 * 4**n / (3 * n + 1), rel=1e-10)

    @pytest.mark.slow
    def test_mermin_four_copy_against_dense_oracle(self):
        """Test the three-qubit four-copy gain on the 12-qubit dense observable."""
        n, theta = 3, 1e-3
        model = DynamicsModel.mermin(n, 1)
        dense = oracle_precision(model.initial_state(), Scheme.FOUR_COPY, model, theta)
        closed = precision_at(model, Scheme.FOUR_COPY, theta)

        assert dense == pytest.approx(closed.variance_theta, rel=1e-6)
        assert gain(Scheme.FOUR_COPY, n, dense) == pytest.approx(19.2, rel=1e-3)
        assert theta_limit_gain(model, Scheme.FOUR_COPY) == pytest.approx(19.2, rel=1e-10)

    def test_two_qubit_mermin(self):
        """Test that two-qubit GHZ coherences give G_2 = 4."""
        value = theta_limit_gain(DynamicsModel.mermin(2, 1), Scheme.TWO_COPY)
        assert value == pytest.approx(4.0, rel=1e-10)

    def test_noisy_limit_is_interior(self):
        """Test that noise leaves a constant variance term, so the optimum moves off zero."""
        result = theta_limit(DynamicsModel.oat(100), Scheme.TWO_COPY, NoiseModel(0.95))
        assert result.interior_optimum
        assert result.gain == 0.0

    def test_zero_theta_uses_limit(self):
        """Test that precision_at(theta=0) is the analytic limit."""
        model = DynamicsModel.oat(20)
        assert precision_at(model, Scheme.TWO_COPY, 0.0).gain == pytest.approx(19 / 4)


class TestPrecisionCurves:
    """
    Test suite for the finite-theta precision.

    These tests verify:
    - Analytic jets against numerically differentiated invariants
    - Behaviour under noise and with the system size
    - Degenerate and no-signal cases
    """

    @pytest.mark.parametrize("scheme", Scheme.values)
    @pytest.mark.parametrize("p", [1.0, 0.9])
    def test_jets_match_numerical_derivative(self, scheme, p):
        """Test closed-form precision against invariants differentiated by central differences."""
        n, theta = 5, 0.4
        analytic = precision_at(DynamicsModel.oat(n), scheme, theta, NoiseModel(p))
        numeric = precision_from_reduced(
            scheme, lambda t: oat_reduced_closed_form(n, t), theta, NoiseModel(p)
        )
        assert numeric.variance_theta == pytest.approx(analytic.variance_theta, rel=1e-6)

    def test_gain_grows_with_particle_number(self):
        """Test that the noiseless two-copy gain at theta = 1/N increases with N."""
        gains = [
            precision_at(DynamicsModel.oat(n), Scheme.TWO_COPY, 1 / n).gain for n in (10, 20, 40, 80)
        ]
        assert gains == sorted(gains)

    def test_noise_reduces_gain(self):
        """Test that depolarizing noise lowers the gain at fixed theta."""
        model = DynamicsModel.oat(20)
        clean = precision_at(model, Scheme.TWO_COPY, 0.05).gain
        noisy = precision_at(model, Scheme.TWO_COPY, 0.05, NoiseModel(0.9)).gain
        assert 0 < noisy < clean

    def test_complete_depolarization_has_no_gain(self):
        """Test that p = 0 gives infinite variance and zero gain."""
        result = precision_at(DynamicsModel.oat(10), Scheme.TWO_COPY, 0.2, NoiseModel(0.0))
        assert result.degenerate
        assert math.isinf(result.variance_theta)
        assert result.gain == 0.0

    @pytest.mark.parametrize("n", [2, 10, 100, 1000])
    def test_small_theta_gain_matches_limit(self, n):
        """Test that the two-copy gain at theta = 1e-6 is within 1e-6 of (N - 1)/4."""
        result = precision_at(DynamicsModel.oat(n), Scheme.TWO_COPY, 1e-6)
        assert result.gain == pytest.approx((n - 1) / 4, rel=1e-6)

    def test_tiny_theta_keeps_its_signal(self):
        """Test that a slope far below the signal tolerance is not reported as degenerate."""
        result = precision_at(DynamicsModel.oat(2), Scheme.TWO_COPY, 1e-10)
        assert not result.degenerate
        assert result.gain == pytest.approx(0.25, rel=1e-6)

    @pytest.mark.parametrize(
        "scheme,n",
        [
            (Scheme.TWO_COPY, 2),
            (Scheme.FOUR_COPY, 2),
            (Scheme.COLLECTIVE, 2),
            (Scheme.COLLECTIVE, 3),
            (Scheme.COLLECTIVE, 4),
        ],
    )
    def test_variance_matches_dense_oracle(self, scheme, n):
        """Test the closed-form variance against dense error propagation at theta = 0.3."""
        model = DynamicsModel.oat(n)
        dense = oracle_precision(model.initial_state(), scheme, model, 0.3)
        assert precision_at(model, scheme, 0.3).variance_theta == pytest.approx(dense, rel=1e-8)

    def test_pairwise_moment_misses_dense_oracle(self):
        """Test that the pairwise collective moment gives a visibly different variance."""
        model = DynamicsModel.oat(3)
        dense = oracle_precision(model.initial_state(), Scheme.COLLECTIVE, model, 0.3)
        pairwise = precision_at(model, Scheme.COLLECTIVE, 0.3, moment=CollectiveMoment.PAIRWISE)
        assert abs(pairwise.variance_theta - dense) / dense > 0.01

    def test_local_dynamics_have_no_closed_form(self):
        """Test that closed-form precision refuses local encodings."""
        model = DynamicsModel.local([PAULI["z"] / 2] * 3)
        with pytest.raises(ValidationError):
            precision_at(model, Scheme.TWO_COPY, 0.1)


class TestHelpers:
    """
    Test suite for gain, error propagation and derivative helpers.
    """

    def test_gain_of_infinite_variance(self):
        assert gain(Scheme.TWO_COPY, 10, math.inf) == 0.0

    def test_gain_of_zero_variance(self):
        assert gain(Scheme.FOUR_COPY, 10, 0.0) == math.inf

    def test_gain_normalization(self):
        """Test G = 1 / (k N Var) with k = 4 for the four-copy scheme."""
        assert gain(Scheme.FOUR_COPY, 5, 0.01) == pytest.approx(5.0)

    def test_negative_variance_rejected(self):
        with pytest.raises(ValidationError):
            gain(Scheme.TWO_COPY, 10, -1.0)

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValidationError):
            gain("three-copy", 10, 1.0)

    def test_error_propagation_without_signal(self):
        assert error_propagation(1.0, 0.0) == math.inf

    def test_error_propagation_with_vanishing_slope(self):
        """Test that a slope below the tolerance still counts over a vanishing spread."""
        assert error_propagation(1e-24, 1e-12) == pytest.approx(1.0)
        assert error_propagation(1.0, 1e-12) == math.inf

    def test_error_propagation(self):
        assert error_propagation(2.0, 0.5) == pytest.approx(8.0)

    def test_analytic_and_central_derivatives_agree(self):
        """Test both derivative modes on sin(theta)."""
        analytic = derivative(lambda t: sine(1.0, t), 0.3)
        central = derivative(lambda t: sine(1.0, t), 0.3, ThetaDerivativeSpec.central(0.3))
        assert analytic == pytest.approx(math.cos(0.3))
        assert central == pytest.approx(math.cos(0.3), rel=1e-8)

    def test_analytic_derivative_needs_a_jet(self):
        with pytest.raises(ValidationError):
            derivative(math.sin, 0.3)

    def test_central_difference_needs_a_step(self):
        with pytest.raises(ValidationError):
            ThetaDerivativeSpec(ThetaDerivativeSpec.CENTRAL)
