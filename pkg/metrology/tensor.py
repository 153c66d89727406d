"""
Dense complex-matrix substrate.

Conventions used everywhere in the package:

- computational basis, sigma_z = diag(1, -1), |0> = (1, 0)^T and |1> = (0, 1)^T,
  so sigma_z|1> = -|1>;
- tensor factors ("sites") are ordered left to right and indexed from 0;
- multi-copy spaces are copy-major: site ``c * N + i`` is party ``i`` of copy ``c``.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
from django.core.exceptions import ValidationError

from common.exceptions import StructuralError

HERMITIAN_ATOL = 1e-12

AXES = ("x", "y", "z")

IDENTITY = np.eye(2, dtype=complex)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PartyStructure:
    """
    Shape of a (possibly multi-copy) register of N parties of local dimension d
    """

    n_parties: int
    local_dim: int = 2
    n_copies: int = 1

    def __post_init__(self):
        if self.n_parties < 1:
            raise ValidationError("A register needs at least one party")
        if self.local_dim < 2:
            raise ValidationError("Local dimension must be at least 2")
        if self.n_copies < 1:
            raise ValidationError("A register needs at least one copy")

    @property
    def n_sites(self):
        return self.n_parties * self.n_copies

    @property
    def dimension(self):
        return self.local_dim**self.n_sites

    def check(self, op):
        """
        Raise StructuralError unless ``op`` is a square matrix of our dimension
        """
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise StructuralError(f"Expected a square matrix, got shape {op.shape}")
        if op.shape[0] != self.dimension:
            raise StructuralError(
                f"Operator dimension {op.shape[0]} does not match "
                f"{self.local_dim}^{self.n_sites} = {self.dimension}"
            )


def dagger(op):
    return op.conj().T


def is_hermitian(op, atol=HERMITIAN_ATOL):
    return op.shape[0] == op.shape[1] and np.max(np.abs(op - dagger(op))) < atol


def kron(*ops):
    """Kronecker product of the operators, left factor first."""
    return reduce(np.kron, ops)


def pauli_string(axes):
    """
    Kronecker product of Pauli matrices, e.g. ``pauli_string("xz")``; ``"i"``
    stands for the identity
    """
    return kron(*(IDENTITY if axis == "i" else PAULI[axis] for axis in axes))


def expectation(op, state):
    """Re tr(state @ op) without forming the product matrix."""
    return float(np.einsum("ij,ji->", state, op).real)


def partial_trace(op, structure, keep):
    """
    Reduce ``op`` to the sites in ``keep`` (0-based, returned in ascending
    order), tracing out all others
    """
    structure.check(op)
    n = structure.n_sites
    keep = sorted(set(keep))
    if any(site < 0 or site >= n for site in keep):
        raise StructuralError(f"Sites {keep} outside register of {n} sites")

    d = structure.local_dim
    tensor = op.reshape([d] * (2 * n))
    rows = list(range(n))
    cols = [site if site not in keep else n + site for site in range(n)]
    out = keep + [n + site for site in keep]
    reduced = np.einsum(tensor, rows + cols, out)
    size = d ** len(keep)
    return reduced.reshape(size, size)


def embed(op, sites, n_sites, d=2):
    """
    Lift ``op``, acting on the factors ``sites`` (in that order), to the full
    register of ``n_sites`` factors of dimension ``d``
    """
    sites = list(sites)
    if len(set(sites)) != len(sites) or any(s < 0 or s >= n_sites for s in sites):
        raise StructuralError(f"Invalid sites {sites} for {n_sites} factors")
    if op.shape != (d ** len(sites), d ** len(sites)):
        raise StructuralError(
            f"Operator of shape {op.shape} cannot act on {len(sites)} sites of dimension {d}"
        )

    rest = [s for s in range(n_sites) if s not in sites]
    full = np.kron(op, np.eye(d ** len(rest), dtype=complex))
    order = sites + rest
    perm = list(np.argsort(order))
    tensor = full.reshape([d] * (2 * n_sites))
    tensor = tensor.transpose(perm + [p + n_sites for p in perm])
    dim = d**n_sites
    return tensor.reshape(dim, dim)


def swap_operator(d):
    """SWAP on two d-level systems: S|x>|y> = |y>|x>."""
    swap = np.zeros((d * d, d * d), dtype=complex)
    for x in range(d):
        for y in range(d):
            swap[y * d + x, x * d + y] = 1
    return swap


def unitary_from_hamiltonian(hamiltonian, theta):
    """
    exp(-i theta H) through the eigendecomposition of the Hermitian ``hamiltonian``
    """
    if not is_hermitian(hamiltonian):
        raise ValidationError("Hamiltonian must be Hermitian")
    energies, vectors = np.linalg.eigh(hamiltonian)
    return (vectors * np.exp(-1j * theta * energies)) @ dagger(vectors)


def hermitian_evolve(state, hamiltonian, theta):
    """V rho V^dagger with V = exp(-i theta H)."""
    if state.shape != hamiltonian.shape:
        raise StructuralError(
            f"State {state.shape} and Hamiltonian {hamiltonian.shape} differ in size"
        )
    unitary = unitary_from_hamiltonian(hamiltonian, theta)
    return unitary @ state @ dagger(unitary)


def collective_operator(mu, n):
    """J_mu = 1/2 sum_i sigma_mu^(i) on n qubits."""
    if n < 1:
        raise ValidationError("Collective operators need at least one particle")
    dim = 2**n
    total = np.zeros((dim, dim), dtype=complex)
    for site in range(n):
        total += embed(PAULI[mu], [site], n)
    return total / 2
