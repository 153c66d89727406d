"""
Twirled observables and the Monte Carlo Haar oracle.

Analytic forms (Phi_2, the fourth-moment tensor, the collective X_2) are
checked against seeded Monte Carlo averages. Sampling is split into
substreams ``SeedSequence(seed, spawn_key=(stream, j))``; partial sums are
combined in substream order, so the worker count never changes the result.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from itertools import product

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.db.models import TextChoices

from common.exceptions import CapacityError, StructuralError, UnsupportedDimensionError
from .precision import Scheme, ThetaDerivativeSpec, derivative, error_propagation
from .states import apply_depolarizing_full, evolve_full, haar_unitaries
from .tensor import AXES, PAULI, collective_operator, dagger, embed, kron, swap_operator

logger = logging.getLogger(__name__)

LOW_SAMPLE_THRESHOLD = 100
CHUNK_SIZE = 2048


class TwirlKind(TextChoices):
    TWO_COPY_LOCAL = "two-copy-local", "Local two-copy twirl"
    FOUR_COPY_LOCAL = "four-copy-local", "Local four-copy twirl"
    COLLECTIVE = "collective-two-copy", "Collective two-copy twirl"
    LOCAL = "local", "Local k-copy twirl"
    STATE = "state", "Locally twirled k-copy state"


class Provenance(TextChoices):
    ANALYTIC = "analytic", "Analytic"
    MONTE_CARLO = "monte-carlo", "Monte Carlo"


@dataclass(frozen=True)
class TwirledObservable:
    operator: np.ndarray = field(repr=False)
    kind: str
    provenance: str = Provenance.ANALYTIC
    samples: int = None
    seed: int = None
    stream: int = None
    standard_error: np.ndarray = field(default=None, repr=False)
    low_samples: bool = False

    def max_deviation(self, reference):
        return float(np.abs(self.operator - reference).max())

    def within(self, reference, sigmas=5.0, floor=1e-12):
        """Every entry within ``sigmas`` standard errors of ``reference``."""
        if self.standard_error is None:
            return np.allclose(self.operator, reference, atol=floor)
        return bool(
            np.all(np.abs(self.operator - reference) <= sigmas * self.standard_error + floor)
        )


@dataclass(frozen=True)
class HaarSampler:
    """Deterministic source of Haar-random unitaries for one (seed, stream)."""

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_index < 0:
            raise ValidationError("Seed and stream index must be non-negative")

    def rng(self, substream):
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index, substream))
        return np.random.default_rng(sequence)

    def unitaries(self, dim, count, substream=0):
        return haar_unitaries(dim, count, self.rng(substream))


def _batched_kron(a, b):
    count = a.shape[0]
    rows, cols = a.shape[1] * b.shape[1], a.shape[2] * b.shape[2]
    return np.einsum("nij,nkl->nikjl", a, b).reshape(count, rows, cols)


def _batched_power(ops, k):
    return reduce(_batched_kron, [ops] * k)


def _monte_carlo(sampler, samples, draw):
    """
    Mean and per-entry standard error of ``draw(rng, count)`` batches over
    ``samples`` draws
    """
    if samples < 1:
        raise ValidationError("At least one sample is required")
    streams = settings.METROLOGY_MC_STREAMS
    base, extra = divmod(samples, streams)
    sizes = [base + (j < extra) for j in range(streams)]

    def run(job):
        substream, size = job
        rng = sampler.rng(substream)
        total = second = 0.0
        for start in range(0, size, CHUNK_SIZE):
            batch = draw(rng, min(CHUNK_SIZE, size - start))
            total = total + batch.sum(axis=0)
            second = second + (np.abs(batch) ** 2).sum(axis=0)
        return total, second

    with ThreadPoolExecutor(max_workers=settings.METROLOGY_WORKERS) as pool:
        parts = list(pool.map(run, enumerate(sizes)))

    total = second = 0.0
    for part_total, part_second in parts:
        total = total + part_total
        second = second + part_second
    mean = total / samples
    spread = np.clip(second / samples - np.abs(mean) ** 2, 0.0, None)
    return mean, np.sqrt(spread / samples)


def _check_qubits(n_qubits, limit=None):
    limit = limit or settings.METROLOGY_DENSE_QUBIT_LIMIT
    if n_qubits > limit:
        raise CapacityError(
            f"A dense operator on {n_qubits} qubits exceeds the {limit}-qubit guard"
        )


def phi2_analytic(d=2):
    """Phi_2(O) = (d S - 1) / (d^2 - 1) for traceless O with tr O^2 = d."""
    operator = (d * swap_operator(d) - np.eye(d * d)) / (d * d - 1)
    return TwirledObservable(operator, TwirlKind.TWO_COPY_LOCAL)


def phi4_moment_tensor(a, b, c, d):
    """
    tr[Phi_4(sigma_z) sigma_a x sigma_b x sigma_c x sigma_d]
    = 16/15 (d_ab d_cd + d_ac d_bd + d_ad d_bc)
    """
    for axis in (a, b, c, d):
        if axis not in AXES:
            raise ValidationError(f"Unknown Pauli axis '{axis}'")
    pairings = (a == b and c == d) + (a == c and b == d) + (a == d and b == c)
    return 16 * pairings / 15


def phi4_analytic():
    """Dense Phi_4(sigma_z) on four qubit copies."""
    operator = np.zeros((16, 16), dtype=complex)
    for axes in product(AXES, repeat=4):
        weight = phi4_moment_tensor(*axes)
        if weight:
            operator += weight / 16 * kron(*(PAULI[axis] for axis in axes))
    return TwirledObservable(operator, TwirlKind.FOUR_COPY_LOCAL)


def collective_x2(n):
    """X_2 = 1/4 sum_ij Phi_ij = 1/3 sum_mu J_mu x J_mu on two copies."""
    _check_qubits(2 * n, settings.METROLOGY_TWIRL_PARTY_LIMIT * 2)
    operator = sum(np.kron(collective_operator(mu, n), collective_operator(mu, n)) for mu in AXES)
    return TwirledObservable(operator / 3, TwirlKind.COLLECTIVE)


def collective_moments(inv, coll):
    """<X_2> = (S1 + K1) / 12 and <X_2^2> from the collective spin correlations."""
    return (inv.s1 + coll.k1) / 12, coll.second_moment / 144


def _flag_low_samples(samples):
    if samples < LOW_SAMPLE_THRESHOLD:
        logger.warning("Monte Carlo run with only %d samples; error bars are unreliable", samples)
        return True
    return False


def haar_mc_twirl(obs, k, sampler, samples, collective=False, n=1):
    """
    Monte Carlo estimate of the k-fold twirl of ``obs``: the average of
    (U^dagger O U)^{x k} over Haar U, or over U^{x n} when ``collective``
    """
    obs = np.asarray(obs, dtype=complex)
    if k < 1:
        raise ValidationError("The number of copies must be positive")
    if collective:
        if obs.shape != (2**n, 2**n):
            raise StructuralError(
                f"A collective twirl of {n} qubits needs a {2**n}-dimensional operator"
            )
        _check_qubits(k * n)
        kind = TwirlKind.COLLECTIVE if k == 2 else TwirlKind.LOCAL
    else:
        d = obs.shape[0]
        _check_qubits(k * math.log2(d))
        kind = {2: TwirlKind.TWO_COPY_LOCAL, 4: TwirlKind.FOUR_COPY_LOCAL}.get(k, TwirlKind.LOCAL)

    def draw(rng, count):
        if collective:
            unitaries = _batched_power(haar_unitaries(2, count, rng), n)
        else:
            unitaries = haar_unitaries(obs.shape[0], count, rng)
        rotated = np.einsum("bji,jk,bkl->bil", unitaries.conj(), obs, unitaries)
        return _batched_power(rotated, k)

    mean, stderr = _monte_carlo(sampler, samples, draw)
    logger.debug("Twirled %s operator over %d samples", kind, samples)
    return TwirledObservable(
        mean,
        kind,
        Provenance.MONTE_CARLO,
        samples=samples,
        seed=sampler.seed,
        stream=sampler.stream_index,
        standard_error=stderr,
        low_samples=_flag_low_samples(samples),
    )


def mc_moment_tensor(sampler, samples):
    """
    Monte Carlo estimate of the fourth-moment tensor of Phi_4(sigma_z), with
    standard errors, both shaped (3, 3, 3, 3)
    """

    def draw(rng, count):
        unitaries = haar_unitaries(2, count, rng)
        rotated = np.einsum("bji,jk,bkl->bil", unitaries.conj(), PAULI["z"], unitaries)
        direction = np.stack(
            [np.einsum("bij,ji->b", rotated, PAULI[mu]).real / 2 for mu in AXES], axis=1
        )
        return 16 * np.einsum("ba,bc,bd,be->bacde", direction, direction, direction, direction)

    return _monte_carlo(sampler, samples, draw)


def nogo_state_twirl(state, k, sampler, samples):
    """
    Monte Carlo estimate of the locally twirled k-copy state: the average of
    (U_L rho U_L^dagger)^{x k} with U_L = U_1 x ... x U_N
    """
    n, d = state.n_parties, state.local_dim
    _check_qubits(k * n * math.log2(d))

    def draw(rng, count):
        locals_ = haar_unitaries(d, count * n, rng).reshape(count, n, d, d)
        unitaries = reduce(_batched_kron, [locals_[:, i] for i in range(n)])
        rotated = unitaries @ state.matrix @ np.conj(np.swapaxes(unitaries, 1, 2))
        return _batched_power(rotated, k)

    mean, stderr = _monte_carlo(sampler, samples, draw)
    return TwirledObservable(
        mean,
        TwirlKind.STATE,
        Provenance.MONTE_CARLO,
        samples=samples,
        seed=sampler.seed,
        stream=sampler.stream_index,
        standard_error=stderr,
        low_samples=_flag_low_samples(samples),
    )


def local_two_copy_observable(n, d=2):
    """M_2 = sum_i Phi_2 on the two copies of party i."""
    _check_qubits(2 * n * math.log2(d))
    phi = phi2_analytic(d).operator
    return sum(embed(phi, [i, n + i], 2 * n, d) for i in range(n))


def local_four_copy_observable(n):
    """M_4 = sum_i Phi_4(sigma_z) on the four copies of party i."""
    _check_qubits(4 * n)
    phi = phi4_analytic().operator
    return sum(embed(phi, [i, n + i, 2 * n + i, 3 * n + i], 4 * n) for i in range(n))


def scheme_observable(scheme, n, d=2):
    if scheme == Scheme.TWO_COPY:
        return local_two_copy_observable(n, d), 2
    if d != 2:
        raise UnsupportedDimensionError(f"The {scheme} scheme is defined for qubits only")
    if scheme == Scheme.FOUR_COPY:
        return local_four_copy_observable(n), 4
    if scheme == Scheme.COLLECTIVE:
        return collective_x2(n).operator, 2
    raise ValidationError(f"Unknown scheme '{scheme}'")


def mc_expectations(state, scheme, model=None, theta=0.0, noise=None):
    """
    (<M>, <M^2>) of the scheme's observable on rho_theta^{x k}, by dense
    contraction
    """
    if model is not None:
        state = evolve_full(state, model, theta)
    if noise is not None:
        state = apply_depolarizing_full(state, noise)
    observable, copies = scheme_observable(scheme, state.n_parties, state.local_dim)
    copied = kron(*([state.matrix] * copies))
    weighted = copied @ observable
    mean = np.trace(weighted).real
    second = np.einsum("ij,ji->", weighted, observable).real
    return float(mean), float(second)


def oracle_precision(state, scheme, model, theta, noise=None, h=None):
    """
    Var(theta) from dense expectations: Var(M) / |d<M>/dtheta|^2 with a
    central-difference derivative
    """
    spec = ThetaDerivativeSpec.central(theta, h)
    mean, second = mc_expectations(state, scheme, model, theta, noise)
    slope = derivative(
        lambda t: mc_expectations(state, scheme, model, t, noise)[0], theta, spec
    )
    return error_propagation(max(second - mean * mean, 0.0), slope)
