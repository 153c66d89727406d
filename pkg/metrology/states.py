"""
Input states and the parameter-encoding dynamics.

Every dynamics is available along two paths: the full-state oracle
(``evolve_full``, dense matrices, small N) and closed-form reduced data
(``oat_reduced_closed_form``, ``ghz_reduced`` and the θ-series behind them),
which is what the precision engine uses for any N.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.db.models import TextChoices
from scipy.stats import unitary_group

from common.exceptions import CapacityError, StructuralError
from . import series
from .tensor import (
    AXES,
    PAULI,
    PartyStructure,
    collective_operator,
    dagger,
    embed,
    hermitian_evolve,
    is_hermitian,
    kron,
    partial_trace,
    unitary_from_hamiltonian,
)

logger = logging.getLogger(__name__)

TRACE_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
BLOCH_SLACK = 1e-10


@dataclass(frozen=True)
class ProbeState:
    """
    Density matrix of N parties with local dimension d
    """

    structure: PartyStructure
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.structure.n_copies != 1:
            raise StructuralError("Probe states describe a single copy")
        self.structure.check(self.matrix)
        trace = np.trace(self.matrix)
        if abs(trace - 1) > TRACE_ATOL:
            raise ValidationError(f"State must have unit trace, got {trace.real:.3e}")

    @classmethod
    def from_matrix(cls, matrix, n_parties, local_dim=2):
        """
        Build a state from user data, running the full validity checks
        """
        state = cls(PartyStructure(n_parties, local_dim), np.asarray(matrix, dtype=complex))
        state.clean()
        return state

    @classmethod
    def from_ket(cls, ket, n_parties, local_dim=2):
        ket = np.asarray(ket, dtype=complex)
        ket = ket / np.linalg.norm(ket)
        return cls(PartyStructure(n_parties, local_dim), np.outer(ket, ket.conj()))

    def clean(self):
        # Hermiticity and positivity are checked on demand: they cost an
        # eigendecomposition and every internal map preserves them.
        if not is_hermitian(self.matrix):
            raise ValidationError("State must be Hermitian")
        if np.linalg.eigvalsh(self.matrix).min() < EIGENVALUE_FLOOR:
            raise ValidationError("State must be positive semidefinite")

    @property
    def n_parties(self):
        return self.structure.n_parties

    @property
    def local_dim(self):
        return self.structure.local_dim

    def with_matrix(self, matrix):
        return ProbeState(self.structure, matrix)

    def purity(self):
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)

    def marginal(self, keep):
        return partial_trace(self.matrix, self.structure, keep)


@dataclass(frozen=True)
class ReducedData:
    """
    One- and two-party marginal data of an N-party state.

    For qubits the marginals are stored as Bloch vectors r_i (shape (N, 3)) and
    correlation matrices T_ij for i < j with [T_ij]_{mu nu} = tr(rho_ij
    sigma_mu x sigma_nu). Permutationally invariant data is stored once
    (``shared_correlation``) and served for every pair. Purities are kept for
    general local dimension.
    """

    n_parties: int
    local_dim: int = 2
    bloch_vectors: np.ndarray = field(default=None, repr=False)
    correlations: dict = field(default_factory=dict, repr=False)
    shared_correlation: np.ndarray = field(default=None, repr=False)
    single_purities: np.ndarray = field(default=None, repr=False)
    pair_purities: dict = field(default=None, repr=False)

    def __post_init__(self):
        if self.bloch_vectors is None:
            return
        if self.bloch_vectors.shape != (self.n_parties, 3):
            raise StructuralError(
                f"Expected {self.n_parties} Bloch vectors, got shape {self.bloch_vectors.shape}"
            )
        if np.linalg.norm(self.bloch_vectors, axis=1).max() > 1 + BLOCH_SLACK:
            raise ValidationError("Bloch vectors must lie inside the unit ball")
        matrices = list(self.correlations.values())
        if self.shared_correlation is not None:
            matrices.append(self.shared_correlation)
        if matrices and np.abs(np.array(matrices)).max() > 1 + BLOCH_SLACK:
            raise ValidationError("Correlation entries must lie in [-1, 1]")

    @classmethod
    def symmetric(cls, n_parties, bloch_vector, correlation):
        """
        Data of a permutationally invariant qubit state: one r, one T
        """
        bloch = np.broadcast_to(np.asarray(bloch_vector, dtype=float), (n_parties, 3))
        return cls(
            n_parties=n_parties,
            bloch_vectors=bloch,
            shared_correlation=np.asarray(correlation, dtype=float),
        )

    @property
    def is_qubit(self):
        return self.bloch_vectors is not None

    @property
    def is_symmetric(self):
        return self.shared_correlation is not None

    @property
    def has_all_pairs(self):
        expected = self.n_parties * (self.n_parties - 1) // 2
        return self.is_symmetric or len(self.correlations) == expected

    def bloch(self, i):
        return self.bloch_vectors[i]

    def correlation(self, i, j):
        """T_ij, with T_ji = T_ij^T."""
        if i == j:
            raise StructuralError("Correlation matrices are defined for distinct parties")
        if self.is_symmetric:
            return self.shared_correlation if i < j else self.shared_correlation.T
        if i < j:
            return self.correlations[(i, j)]
        return self.correlations[(j, i)].T

    def correlation_tensor(self):
        """All T_ij as an (N, N, 3, 3) array with zero diagonal blocks."""
        n = self.n_parties
        tensor = np.zeros((n, n, 3, 3))
        for i, j in combinations(range(n), 2):
            tensor[i, j] = self.correlation(i, j)
            tensor[j, i] = tensor[i, j].T
        return tensor


@dataclass(frozen=True)
class AsymmetricGHZ:
    """alpha|0...0> + beta|1...1> on n qubits."""

    alpha: complex
    beta: complex
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("A GHZ state needs at least two particles")
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1) > 1e-12:
            raise ValidationError(f"|alpha|^2 + |beta|^2 must be 1, got {norm:.15f}")

    @classmethod
    def from_alpha(cls, n, alpha):
        """Real alpha in [-1, 1], beta = sqrt(1 - alpha^2) >= 0."""
        if not -1 <= alpha <= 1:
            raise ValidationError("alpha must lie in [-1, 1]")
        return cls(complex(alpha), complex(math.sqrt(1 - alpha * alpha)), n)

    @property
    def delta(self):
        return abs(self.alpha) ** 2 - abs(self.beta) ** 2

    def ket(self):
        ket = np.zeros(2**self.n, dtype=complex)
        ket[0] = self.alpha
        ket[-1] = self.beta
        return ket

    def state(self):
        return ProbeState.from_ket(self.ket(), self.n)


@dataclass(frozen=True)
class NoiseModel:
    """Local depolarizing channel with survival probability p on every particle."""

    p: float = 1.0

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValidationError(f"Depolarizing parameter must lie in [0, 1], got {self.p}")

    @property
    def is_noiseless(self):
        return self.p == 1


class DynamicsKind(TextChoices):
    OAT = "oat", "One-axis twisting (H = Jx^2)"
    MERMIN_1 = "mermin1", "Mermin generator Q1"
    MERMIN_2 = "mermin2", "Mermin generator Q2"
    LOCAL = "local", "Local Hamiltonian sum_i H_i"
    CUSTOM = "custom", "Custom Hermitian generator"


@dataclass(frozen=True)
class DynamicsModel:
    """
    Generator of the encoding V_theta = exp(-i theta H)
    """

    kind: str
    n_parties: int
    local_dim: int = 2
    local_fields: tuple = field(default=(), repr=False)
    hamiltonian: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in DynamicsKind.values:
            raise ValidationError(f"Unknown dynamics '{self.kind}'")
        if self.n_parties < 1:
            raise ValidationError("Dynamics need at least one particle")
        if self.kind == DynamicsKind.LOCAL:
            if len(self.local_fields) != self.n_parties:
                raise StructuralError("One local generator per particle is required")
            for generator in self.local_fields:
                if generator.shape != (self.local_dim, self.local_dim):
                    raise StructuralError("Local generators must be d x d")
                if not is_hermitian(generator):
                    raise ValidationError("Local generators must be Hermitian")
        if self.kind == DynamicsKind.CUSTOM:
            if self.hamiltonian is None or not is_hermitian(self.hamiltonian):
                raise ValidationError("Custom dynamics need a Hermitian generator")

    @classmethod
    def oat(cls, n):
        return cls(DynamicsKind.OAT, n)

    @classmethod
    def mermin(cls, n, variant=1):
        if variant not in (1, 2):
            raise ValidationError("Mermin generators are Q1 or Q2")
        return cls(DynamicsKind.MERMIN_1 if variant == 1 else DynamicsKind.MERMIN_2, n)

    @classmethod
    def local(cls, fields, local_dim=2):
        fields = tuple(np.asarray(h, dtype=complex) for h in fields)
        return cls(DynamicsKind.LOCAL, len(fields), local_dim, local_fields=fields)

    @classmethod
    def custom(cls, hamiltonian, n_parties, local_dim=2):
        return cls(
            DynamicsKind.CUSTOM,
            n_parties,
            local_dim,
            hamiltonian=np.asarray(hamiltonian, dtype=complex),
        )

    @property
    def has_closed_form(self):
        return self.kind in (DynamicsKind.OAT, DynamicsKind.MERMIN_1, DynamicsKind.MERMIN_2)

    @property
    def is_mermin(self):
        return self.kind in (DynamicsKind.MERMIN_1, DynamicsKind.MERMIN_2)

    def initial_state(self):
        """|1>^N for one-axis twisting, |0>^N for the Mermin generators."""
        if self.kind == DynamicsKind.OAT:
            return product_state(self.n_parties, 1)
        if self.is_mermin:
            return product_state(self.n_parties, 0)
        raise ValidationError(f"'{self.kind}' dynamics have no reference initial state")

    def generator(self):
        if self.kind == DynamicsKind.OAT:
            return oat_generator(self.n_parties)
        if self.is_mermin:
            return mermin_generator(self.n_parties, 1 if self.kind == DynamicsKind.MERMIN_1 else 2)
        if self.kind == DynamicsKind.LOCAL:
            n, d = self.n_parties, self.local_dim
            return sum(embed(h, [i], n, d) for i, h in enumerate(self.local_fields))
        return self.hamiltonian


def oat_generator(n):
    jx = collective_operator("x", n)
    return jx @ jx


def mermin_generator(n, variant):
    """
    Q1 (variant 1) or Q2 (variant 2) with Q1 + iQ2 = (sigma_x + i sigma_y)^{x N}
    """
    raising = kron(*([PAULI["x"] + 1j * PAULI["y"]] * n))
    if variant == 1:
        return (raising + dagger(raising)) / 2
    return (raising - dagger(raising)) / 2j


def product_state(n, local_ket_index, local_dim=2):
    """Pure product state |b>^{x n}."""
    if n < 1:
        raise ValidationError("A product state needs at least one particle")
    if not 0 <= local_ket_index < local_dim:
        raise ValidationError(f"Basis index must lie in [0, {local_dim})")
    ket = np.zeros(local_dim, dtype=complex)
    ket[local_ket_index] = 1
    return ProbeState.from_ket(kron(*([ket] * n)), n, local_dim)


def _check_capacity(n_parties, local_dim):
    limit = settings.METROLOGY_DENSE_QUBIT_LIMIT
    if local_dim**n_parties > 2**limit:
        raise CapacityError(
            f"Dense evolution of {n_parties} parties of dimension {local_dim} "
            f"exceeds the 2^{limit} guard"
        )


def evolve_full(state, model, theta):
    """Exact V_theta rho V_theta^dagger on the full density matrix."""
    _check_capacity(state.n_parties, state.local_dim)
    if (model.n_parties, model.local_dim) != (state.n_parties, state.local_dim):
        raise StructuralError("Dynamics and state describe different registers")
    return state.with_matrix(hermitian_evolve(state.matrix, model.generator(), theta))


def local_encoding(state, local_fields, theta):
    """Apply the product of exp(-i theta H_i) over all particles."""
    model = DynamicsModel.local(local_fields, state.local_dim)
    if model.n_parties != state.n_parties:
        raise StructuralError("One local generator per particle is required")
    unitary = kron(*(unitary_from_hamiltonian(h, theta) for h in model.local_fields))
    return state.with_matrix(unitary @ state.matrix @ dagger(unitary))


def apply_depolarizing_full(state, noise):
    """
    E_p applied independently to every particle, E_p(s) = p s + (1 - p) tr(s) 1/d
    """
    if not isinstance(noise, NoiseModel):
        noise = NoiseModel(noise)
    if noise.is_noiseless:
        return state

    n, d, p = state.n_parties, state.local_dim, noise.p
    tensor = state.matrix.reshape([d] * (2 * n))
    identity = np.eye(d) / d
    for site in range(n):
        moved = np.moveaxis(tensor, [site, n + site], [0, 1])
        traced = np.trace(moved, axis1=0, axis2=1)
        mixed = np.multiply.outer(identity, traced)
        tensor = np.moveaxis(p * moved + (1 - p) * mixed, [0, 1], [site, n + site])
    dim = d**n
    return state.with_matrix(tensor.reshape(dim, dim))


def reduced_data(state):
    """
    Marginal data of a full state: purities for any d, plus Bloch vectors and
    all correlation matrices for qubits
    """
    n, d = state.n_parties, state.local_dim
    singles = [state.marginal([i]) for i in range(n)]
    pairs = {(i, j): state.marginal([i, j]) for i, j in combinations(range(n), 2)}

    single_purities = np.array([np.einsum("ij,ji->", m, m).real for m in singles])
    pair_purities = {key: float(np.einsum("ij,ji->", m, m).real) for key, m in pairs.items()}
    if d != 2:
        return ReducedData(
            n_parties=n,
            local_dim=d,
            single_purities=single_purities,
            pair_purities=pair_purities,
        )

    bloch = np.array(
        [[np.einsum("ij,ji->", m, PAULI[mu]).real for mu in AXES] for m in singles]
    )
    correlations = {
        key: np.array(
            [
                [np.einsum("ij,ji->", m, np.kron(PAULI[mu], PAULI[nu])).real for nu in AXES]
                for mu in AXES
            ]
        )
        for key, m in pairs.items()
    }
    return ReducedData(
        n_parties=n,
        local_dim=2,
        bloch_vectors=bloch,
        correlations=correlations,
        single_purities=single_purities,
        pair_purities=pair_purities,
    )


def oat_series(n, theta):
    """
    Bloch vector and correlation matrix of e^{-i theta Jx^2}|1>^N as jets in theta
    """
    if n < 2:
        raise ValidationError("One-axis twisting needs at least two particles")
    zero = series.constant(0.0)
    r_z = -series.cos_power(n - 1, 1, theta)
    twisted = series.cos_power(n - 2, 2, theta)
    t_yy = (1.0 - twisted) * 0.5
    t_zz = (1.0 + twisted) * 0.5
    t_xy = series.sine(1, theta) * series.cos_power(n - 2, 1, theta)

    bloch = series.Jet.stack([zero, zero, r_z], (3,))
    correlation = series.Jet.stack(
        [zero, t_xy, zero, t_xy, t_yy, zero, zero, zero, t_zz], (3, 3)
    )
    return bloch, correlation


def mermin_series(n, theta, variant):
    """
    Bloch vector and correlation matrix of e^{-i theta Q_n}|0>^N as jets in
    theta; the state is cos(t')|0..0> - i sin(t')|1..1> (Q1) or
    cos(t')|0..0> + sin(t')|1..1> (Q2) with t' = 2^(N-1) theta
    """
    if n < 2:
        raise ValidationError("Mermin dynamics need at least two particles")
    zero = series.constant(0.0)
    one = series.constant(1.0)
    frequency = 2.0**n
    delta = series.cos_power(1, frequency, theta)
    bloch = series.Jet.stack([zero, zero, delta], (3,))

    if n >= 3:
        correlation = series.Jet.constant(np.diag([0.0, 0.0, 1.0]))
        return bloch, correlation

    # For two particles the pair marginal is the whole state and keeps its coherences.
    coherence = series.sine(frequency, theta)
    if variant == 1:
        entries = [zero, -coherence, zero, -coherence, zero, zero, zero, zero, one]
    else:
        entries = [coherence, zero, zero, zero, -coherence, zero, zero, zero, one]
    return bloch, series.Jet.stack(entries, (3, 3))


def dynamics_series(model, theta):
    if model.kind == DynamicsKind.OAT:
        return oat_series(model.n_parties, theta)
    if model.is_mermin:
        variant = 1 if model.kind == DynamicsKind.MERMIN_1 else 2
        return mermin_series(model.n_parties, theta, variant)
    raise ValidationError(f"'{model.kind}' dynamics have no closed form")


def oat_reduced_closed_form(n, theta):
    bloch, correlation = oat_series(n, theta)
    return ReducedData.symmetric(n, bloch.value, correlation.value)


def mermin_state(n, theta, variant):
    """The closed-form Mermin-evolved state as an asymmetric GHZ state."""
    angle = 2.0 ** (n - 1) * theta
    beta = -1j * math.sin(angle) if variant == 1 else math.sin(angle)
    return AsymmetricGHZ(complex(math.cos(angle)), complex(beta), n)


def ghz_reduced(ghz):
    """
    Marginals of alpha|0..0> + beta|1..1>: r_i = (0, 0, Delta); T_ij = diag(0, 0, 1)
    for N >= 3, plus the alpha/beta coherences when N = 2
    """
    correlation = np.diag([0.0, 0.0, 1.0])
    if ghz.n == 2:
        overlap = np.conj(ghz.alpha) * ghz.beta
        correlation[0, 0] = 2 * overlap.real
        correlation[1, 1] = -2 * overlap.real
        correlation[0, 1] = correlation[1, 0] = 2 * overlap.imag
    return ReducedData.symmetric(ghz.n, [0.0, 0.0, ghz.delta], correlation)


def random_state(n, local_dim, rng, rank=None):
    """Random density matrix from a Ginibre matrix of the given rank."""
    dim = local_dim**n
    rank = rank or dim
    ginibre = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    matrix = ginibre @ dagger(ginibre)
    return ProbeState(PartyStructure(n, local_dim), matrix / np.trace(matrix))


def haar_unitaries(dim, count, rng):
    """``count`` Haar-random dim x dim unitaries, shape (count, dim, dim)."""
    return np.asarray(unitary_group.rvs(dim, size=count, random_state=rng)).reshape(
        count, dim, dim
    )


def random_local_unitary(n, local_dim, rng):
    """U_1 x ... x U_N with independent Haar factors."""
    return kron(*haar_unitaries(local_dim, n, rng))


def random_collective_unitary(n, rng):
    """V^{x N} for one Haar-random single-qubit V."""
    return kron(*([haar_unitaries(2, 1, rng)[0]] * n))


def conjugate(state, unitary):
    return state.with_matrix(unitary @ state.matrix @ dagger(unitary))
