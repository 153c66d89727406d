import numpy as np
import pytest
from django.core.exceptions import ValidationError
from numpy.testing import assert_allclose

from common.exceptions import StructuralError
from ..tensor import (
    IDENTITY,
    PAULI,
    PartyStructure,
    collective_operator,
    embed,
    hermitian_evolve,
    is_hermitian,
    kron,
    partial_trace,
    pauli_string,
    swap_operator,
)


class TestPartialTrace:
    """
    Test suite for partial traces over party structures.

    These tests verify:
    - Marginals of product and entangled states
    - Sorted ordering of the kept parties
    - Structural errors on mismatched dimensions
    """

    @pytest.fixture
    def bell(self):
        """Return the density matrix of (|00> + |11>)/sqrt(2)."""
        ket = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        return np.outer(ket, ket.conj())

    def test_product_state_marginal(self):
        """Test that tracing a product state returns its factors."""
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        c = np.diag([0.25, 0.75]).astype(complex)
        structure = PartyStructure(3)

        assert_allclose(partial_trace(kron(a, b, c), structure, [1]), b, atol=1e-12)
        assert_allclose(partial_trace(kron(a, b, c), structure, [2, 0]), kron(a, c), atol=1e-12)

    def test_bell_marginal_is_maximally_mixed(self, bell):
        """Test that one half of a Bell pair is maximally mixed."""
        assert_allclose(partial_trace(bell, PartyStructure(2), [0]), np.eye(2) / 2, atol=1e-12)

    def test_keep_everything_is_identity_map(self, bell):
        """Test that keeping every site leaves the operator unchanged."""
        assert_allclose(partial_trace(bell, PartyStructure(2), [0, 1]), bell, atol=1e-12)

    def test_qutrit_marginal_trace(self):
        """Test partial traces on qutrit registers keep unit trace."""
        rng = np.random.default_rng(3)
        ginibre = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        rho = ginibre @ ginibre.conj().T
        rho /= np.trace(rho)

        marginal = partial_trace(rho, PartyStructure(2, local_dim=3), [1])
        assert marginal.shape == (3, 3)
        assert np.trace(marginal) == pytest.approx(1.0)

    def test_dimension_mismatch_raises(self, bell):
        """Test that a register/operator size mismatch is a structural error."""
        with pytest.raises(StructuralError):
            partial_trace(bell, PartyStructure(3), [0])

    def test_out_of_range_site_raises(self, bell):
        """Test that keeping a non-existent site is a structural error."""
        with pytest.raises(StructuralError):
            partial_trace(bell, PartyStructure(2), [2])

    def test_empty_register_is_invalid(self):
        """Test that a register needs at least one party."""
        with pytest.raises(ValidationError):
            PartyStructure(0)


class TestOperators:
    """
    Test suite for the operator helpers.

    These tests verify:
    - Embedding of local operators in larger registers
    - SWAP operator action
    - Hermitian evolution and its input checks
    - Collective spin operators
    """

    def test_embed_single_site(self):
        """Test that embedding on one site matches the explicit Kronecker product."""
        expected = kron(IDENTITY, PAULI["x"], IDENTITY)
        assert_allclose(embed(PAULI["x"], [1], 3), expected)

    def test_embed_respects_site_order(self):
        """Test that the first factor of the operator lands on the first listed site."""
        a, b = PAULI["x"], PAULI["z"]
        assert_allclose(embed(kron(a, b), [2, 0], 3), kron(b, IDENTITY, a))

    def test_embed_rejects_repeated_sites(self):
        """Test that repeated sites are a structural error."""
        with pytest.raises(StructuralError):
            embed(np.eye(4), [1, 1], 3)

    def test_pauli_string(self):
        """Test Pauli strings with identity placeholders."""
        assert_allclose(pauli_string("zi"), kron(PAULI["z"], IDENTITY))

    @pytest.mark.parametrize("d", [2, 3])
    def test_swap_exchanges_factors(self, d):
        """Test S(|x>|y>) = |y>|x> and S^2 = 1."""
        swap = swap_operator(d)
        x, y = np.eye(d)[0], np.eye(d)[d - 1]
        assert_allclose(swap @ np.kron(x, y), np.kron(y, x))
        assert_allclose(swap @ swap, np.eye(d * d))
        assert np.trace(swap).real == pytest.approx(d)

    def test_evolution_at_zero_is_identity(self):
        """Test that theta = 0 leaves the state unchanged."""
        rho = np.diag([0.25, 0.75]).astype(complex)
        assert_allclose(hermitian_evolve(rho, PAULI["x"], 0.0), rho, atol=1e-14)

    def test_evolution_rotates_bloch_vector(self):
        """Test exp(-i theta sigma_x) rotates |0> about x by 2 theta."""
        rho = np.diag([1.0, 0.0]).astype(complex)
        theta = 0.3
        evolved = hermitian_evolve(rho, PAULI["x"], theta)
        assert np.trace(evolved @ PAULI["z"]).real == pytest.approx(np.cos(2 * theta))
        assert np.trace(evolved @ PAULI["y"]).real == pytest.approx(-np.sin(2 * theta))

    def test_non_hermitian_generator_raises(self):
        """Test that a non-Hermitian generator is rejected."""
        with pytest.raises(ValidationError):
            hermitian_evolve(np.eye(2, dtype=complex), np.array([[0, 1], [0, 0]]), 0.1)

    def test_collective_commutator(self):
        """Test [J_x, J_y] = i J_z on three qubits."""
        jx, jy, jz = (collective_operator(mu, 3) for mu in "xyz")
        assert_allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-12)
        assert is_hermitian(jx)

    def test_collective_z_on_all_ones(self):
        """Test J_z |1...1> = -N/2 |1...1>."""
        n = 4
        ket = np.zeros(2**n)
        ket[-1] = 1
        assert_allclose(collective_operator("z", n) @ ket, -n / 2 * ket)
