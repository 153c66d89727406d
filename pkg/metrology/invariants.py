"""
Local-unitary-invariant scalars consumed by the precision formulas.

Everything is computed from ``ReducedData`` (one- and two-party marginals),
never from the full state, so closed-form paths stay O(1) in N. The
permutationally invariant shortcuts in ``symmetric_invariants`` accept plain
floats as well as ``series.Jet`` values.
"""

import logging
from dataclasses import dataclass, replace
from itertools import combinations
from typing import NamedTuple

import numpy as np
from django.core.exceptions import ValidationError

from common.exceptions import InsufficientDataError, UnsupportedDimensionError
from .states import NoiseModel
from .tensor import collective_operator, expectation

logger = logging.getLogger(__name__)

NEGATIVE_SLACK = -1e-10
PI_ATOL = 1e-10


@dataclass(frozen=True)
class InvariantSet:
    """
    Sector lengths S1, S2 and the fourth-order invariants F1, F2.

    F1 and F2 are only defined for qubits and are None otherwise.
    """

    s1: float
    s2: float
    n_parties: int
    local_dim: int = 2
    f1: float = None
    f2: float = None

    def __post_init__(self):
        for name in ("s1", "f1", "f2"):
            value = getattr(self, name)
            if value is not None and value < NEGATIVE_SLACK:
                raise ValidationError(f"{name} must be non-negative, got {value:.3e}")


def f_of_n(n):
    """f(N) = 3N(-2N + 3)."""
    return 3 * n * (-2 * n + 3)


def b_of_theta(n, s1, s2, k1, k2, k2_prime, sum_j_sq):
    """
    B = 2[-S1 - 2K1 + S2 + K2] + K2' + 16(N - 1) sum_mu <J_mu^2>.

    (f(N) + B) / 144 is the pairwise form of <X_2^2>. It drops the
    anticommutator structure of J_mu J_nu and is kept as a comparison curve;
    the collective scheme uses ``x2_moment``.
    """
    return 2 * (-s1 - 2 * k1 + s2 + k2) + k2_prime + 16 * (n - 1) * sum_j_sq


def x2_moment(n, signal, pair_trace, pair_sq):
    """
    144 <X_2^2> = 3N^2 + 2N tr P + sum_{mu nu} P_{mu nu}^2 - 2 |sum_i r_i|^2,
    with P = sum_{i != j} T_ij and signal = |sum_i r_i|^2 = S1 + K1
    """
    return 3 * n * n + 2 * n * pair_trace + pair_sq - 2 * signal


def noisy_x2_moment(n, signal, sum_j_sq, second_moment, p2):
    """144 <X_2^2> after r -> p r, T -> p^2 T, from its noiseless value."""
    pair_trace = 4 * sum_j_sq - 3 * n
    pair_sq = second_moment + 2 * signal - 3 * n * n - 2 * n * pair_trace
    return x2_moment(n, signal * p2, pair_trace * p2, pair_sq * (p2 * p2))


@dataclass(frozen=True)
class CollectiveTerms:
    k1: float
    k2: float
    k2_prime: float
    sum_j_sq: float
    b_theta: float
    f_n: float
    second_moment: float


@dataclass(frozen=True)
class PIReduction:
    """r^2, tr T and tr T^2 of a permutationally invariant qubit state."""

    n_parties: int
    r_sq: float
    t1: float
    t2: float

    def __post_init__(self):
        if not -PI_ATOL <= self.r_sq <= 1 + PI_ATOL:
            raise ValidationError(f"r^2 must lie in [0, 1], got {self.r_sq}")
        if abs(self.t1) > 3 + PI_ATOL or not -PI_ATOL <= self.t2 <= 3 + PI_ATOL:
            raise ValidationError("Correlation traces out of range")

    @property
    def s1_plus_k1(self):
        return self.n_parties**2 * self.r_sq

    @property
    def second_moment(self):
        """144 <X_2^2> = 3N^2 - 2N^2 r^2 + 2N^2(N - 1) tr T + N^2(N - 1)^2 tr T^2"""
        n = self.n_parties
        pairs = n * (n - 1)
        return x2_moment(n, n * n * self.r_sq, pairs * self.t1, pairs * pairs * self.t2)

    @property
    def b_theta(self):
        n = self.n_parties
        return n * (
            self.r_sq * (2 - 4 * n)
            + (n - 1) * ((3 + n * (n - 3)) * self.t2 + 4 * (n - 1) * self.t1 + 12)
        )


class SymmetricTerms(NamedTuple):
    s1: object
    s2: object
    f1: object
    f2: object
    k1: object
    k2: object
    k2_prime: object
    sum_j_sq: object
    second_moment: object


def symmetric_invariants(n, a, b, c, t1, sym_sq=None):
    """
    Invariants of a permutationally invariant qubit state from a = |r|^2,
    b = tr(T T^T), c = tr((T T^T)^2), t1 = tr T and sym_sq, the squared
    Frobenius norm of (T + T^T) / 2 (b when T is symmetric)
    """
    sym_sq = b if sym_sq is None else sym_sq
    pairs = n * (n - 1) / 2
    return SymmetricTerms(
        s1=n * a,
        s2=pairs * b,
        f1=n * (a * a),
        f2=pairs * (b * b + 2 * c),
        k1=n * (n - 1) * a,
        k2=n * (n - 1) * (n - 2) * b,
        k2_prime=n * (n - 1) * (n - 2) * (n - 3) * b,
        sum_j_sq=(3 * n + n * (n - 1) * t1) / 4,
        second_moment=x2_moment(n, n * n * a, n * (n - 1) * t1, (n * (n - 1)) ** 2 * sym_sq),
    )


def symmetric_terms_from_series(n, bloch, correlation):
    """SymmetricTerms as jets, from jet-valued r and T."""
    gram = correlation @ correlation.T
    sym = (correlation + correlation.T) * 0.5
    return symmetric_invariants(
        n,
        (bloch * bloch).sum(),
        gram.trace(),
        (gram @ gram).trace(),
        correlation.trace(),
        (sym @ sym).trace(),
    )


def noisy_terms(terms, n, p):
    """
    Depolarizing scaling r -> p r, T -> p^2 T applied to every invariant
    """
    if p == 1:
        return terms
    p2, p4 = p**2, p**4
    return SymmetricTerms(
        s1=terms.s1 * p2,
        s2=terms.s2 * p4,
        f1=terms.f1 * p4,
        f2=terms.f2 * p**8,
        k1=terms.k1 * p2,
        k2=terms.k2 * p4,
        k2_prime=terms.k2_prime * p4,
        sum_j_sq=terms.sum_j_sq * p2 + 0.75 * n * (1 - p2),
        second_moment=noisy_x2_moment(
            n, terms.s1 + terms.k1, terms.sum_j_sq, terms.second_moment, p2
        ),
    )


def _qubit_only(reduced):
    if not reduced.is_qubit:
        raise UnsupportedDimensionError(
            f"Only defined for qubits, got local dimension {reduced.local_dim}"
        )


def sector_lengths(reduced, d=None):
    """
    (S1, S2): from Bloch and correlation data for qubits, from purities otherwise
    """
    d = d or reduced.local_dim
    if not reduced.is_qubit:
        return sector_lengths_from_purities(reduced, d)

    n = reduced.n_parties
    s1 = float(np.sum(reduced.bloch_vectors**2))
    if reduced.is_symmetric:
        gram = reduced.shared_correlation @ reduced.shared_correlation.T
        return s1, n * (n - 1) / 2 * float(np.trace(gram))
    s2 = sum(
        float(np.sum(reduced.correlation(i, j) ** 2)) for i, j in combinations(range(n), 2)
    )
    return s1, s2


def sector_lengths_from_purities(reduced, d):
    """
    S1 = sum_i [d tr(rho_i^2) - 1] and
    S2 = sum_{i<j} [d^2 tr(rho_ij^2) - 1] - (single-party terms of i and j)
    """
    if reduced.single_purities is None or reduced.pair_purities is None:
        raise InsufficientDataError("Purity data is required for general local dimension")
    singles = d * np.asarray(reduced.single_purities) - 1
    s2 = sum(
        d * d * purity - 1 - singles[i] - singles[j]
        for (i, j), purity in reduced.pair_purities.items()
    )
    return float(np.sum(singles)), float(s2)


def fourth_order(reduced):
    """
    F1 = sum_i |r_i|^4 and F2 = sum_{i<j} {[tr(T T^T)]^2 + 2 tr(T T^T T T^T)}
    """
    _qubit_only(reduced)
    n = reduced.n_parties
    f1 = float(np.sum(np.sum(reduced.bloch_vectors**2, axis=1) ** 2))

    def pair_term(t):
        gram = t @ t.T
        return float(np.trace(gram) ** 2 + 2 * np.trace(gram @ gram))

    if reduced.is_symmetric:
        return f1, n * (n - 1) / 2 * pair_term(reduced.shared_correlation)
    f2 = sum(pair_term(reduced.correlation(i, j)) for i, j in combinations(range(n), 2))
    return f1, f2


def invariant_set(reduced):
    s1, s2 = sector_lengths(reduced)
    f1 = f2 = None
    if reduced.is_qubit:
        f1, f2 = fourth_order(reduced)
    return InvariantSet(
        s1=s1,
        s2=s2,
        n_parties=reduced.n_parties,
        local_dim=reduced.local_dim,
        f1=f1,
        f2=f2,
    )


def _distinct_mask(n, order):
    index = np.arange(n)
    grids = np.meshgrid(*([index] * order), indexing="ij")
    mask = np.ones([n] * order, dtype=bool)
    for a, b in combinations(range(order), 2):
        mask &= grids[a] != grids[b]
    return mask


def collective_terms(reduced, state=None):
    """
    K1, K2, K2', sum_mu <J_mu^2>, 144 <X_2^2> and B(theta) of a qubit state.

    sum_mu <J_mu^2> is taken from ``state`` when given, otherwise from
    1/4 [3N + sum_{i != j} tr T_ij], which needs every pair correlation.
    """
    _qubit_only(reduced)
    if not reduced.has_all_pairs:
        raise InsufficientDataError("Collective terms need the correlations of every pair")

    n = reduced.n_parties
    s1, s2 = sector_lengths(reduced)
    if reduced.is_symmetric:
        t = reduced.shared_correlation
        terms = symmetric_invariants(
            n,
            float(reduced.bloch_vectors[0] @ reduced.bloch_vectors[0]),
            float(np.sum(t * t)),
            0.0,
            float(np.trace(t)),
        )
        k1, k2, k2_prime, sum_j_sq = terms.k1, terms.k2, terms.k2_prime, terms.sum_j_sq
        pair_sum = n * (n - 1) / 2 * (t + t.T)
    else:
        total = reduced.bloch_vectors.sum(axis=0)
        k1 = float(total @ total) - s1
        tensor = reduced.correlation_tensor()
        k2 = float(np.einsum("ijk,ijab,ikab->", _distinct_mask(n, 3), tensor, tensor))
        k2_prime = float(np.einsum("ijkl,ikab,jlab->", _distinct_mask(n, 4), tensor, tensor))
        sum_j_sq = (3 * n + float(np.einsum("ijaa->", tensor))) / 4
        pair_sum = tensor.sum(axis=(0, 1))

    if state is not None:
        sum_j_sq = sum(
            expectation(collective_operator(mu, n) @ collective_operator(mu, n), state.matrix)
            for mu in "xyz"
        )

    return CollectiveTerms(
        k1=k1,
        k2=k2,
        k2_prime=k2_prime,
        sum_j_sq=sum_j_sq,
        b_theta=b_of_theta(n, s1, s2, k1, k2, k2_prime, sum_j_sq),
        f_n=f_of_n(n),
        second_moment=x2_moment(
            n, s1 + k1, float(np.trace(pair_sum)), float(np.sum(pair_sum**2))
        ),
    )


def pi_reduction(reduced):
    _qubit_only(reduced)
    if not reduced.has_all_pairs:
        raise InsufficientDataError("A permutation-invariance check needs every pair")
    n = reduced.n_parties
    bloch = reduced.bloch_vectors[0]
    if np.abs(reduced.bloch_vectors - bloch).max() > PI_ATOL:
        raise ValidationError("State is not permutationally invariant: Bloch vectors differ")

    t = reduced.correlation(0, 1) if n > 1 else np.zeros((3, 3))
    for i, j in combinations(range(n), 2):
        if np.abs(reduced.correlation(i, j) - t).max() > PI_ATOL:
            raise ValidationError("State is not permutationally invariant: correlations differ")
    if np.abs(t - t.T).max() > PI_ATOL:
        raise ValidationError("State is not permutationally invariant: T is not symmetric")

    return PIReduction(
        n_parties=n,
        r_sq=float(bloch @ bloch),
        t1=float(np.trace(t)),
        t2=float(np.trace(t @ t)),
    )


def apply_noise_scaling(inv, coll, noise):
    """
    Invariants after local depolarizing noise: S_l -> p^(2l) S_l,
    F_l -> p^(4l) F_l, with the K-terms and sum <J^2> following r -> p r,
    T -> p^2 T
    """
    if not isinstance(noise, NoiseModel):
        noise = NoiseModel(noise)
    if noise.is_noiseless:
        return inv, coll

    p2, p4 = noise.p**2, noise.p**4
    scaled = replace(
        inv,
        s1=inv.s1 * p2,
        s2=inv.s2 * p4,
        f1=None if inv.f1 is None else inv.f1 * p4,
        f2=None if inv.f2 is None else inv.f2 * noise.p**8,
    )
    if coll is None:
        return scaled, None

    n = inv.n_parties
    k1, k2, k2_prime = coll.k1 * p2, coll.k2 * p4, coll.k2_prime * p4
    sum_j_sq = 0.75 * n * (1 - p2) + p2 * coll.sum_j_sq
    second_moment = noisy_x2_moment(n, inv.s1 + coll.k1, coll.sum_j_sq, coll.second_moment, p2)
    scaled_coll = replace(
        coll,
        k1=k1,
        k2=k2,
        k2_prime=k2_prime,
        sum_j_sq=sum_j_sq,
        b_theta=b_of_theta(n, scaled.s1, scaled.s2, k1, k2, k2_prime, sum_j_sq),
        second_moment=second_moment,
    )
    return scaled, scaled_coll
