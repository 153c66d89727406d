"""
Precision formulas for the randomized-measurement schemes and their gains.

Closed-form models are evaluated on ``series.Jet`` values, which carry exact
first and second θ-derivatives; the θ → 0 limits are taken from those
derivatives rather than from a numerical limit.
"""

import logging
import math
from dataclasses import dataclass

from django.conf import settings
from django.core.exceptions import ValidationError
from django.db.models import TextChoices

from .invariants import (
    apply_noise_scaling,
    b_of_theta,
    collective_terms,
    f_of_n,
    invariant_set,
    noisy_terms,
    symmetric_terms_from_series,
)
from .series import Jet
from .states import NoiseModel, dynamics_series

logger = logging.getLogger(__name__)


class Scheme(TextChoices):
    TWO_COPY = "two-copy", "Two-copy local randomization"
    FOUR_COPY = "four-copy", "Four-copy local randomization"
    COLLECTIVE = "collective", "Two-copy collective randomization"


class CollectiveMoment(TextChoices):
    EXACT = "exact", "144 <X_2^2> from the collective spin correlations"
    PAIRWISE = "pairwise", "Pairwise form f(N) + B(theta)"


# k in G = 1 / (k N Var)
COPIES = {Scheme.TWO_COPY: 2, Scheme.FOUR_COPY: 4, Scheme.COLLECTIVE: 2}

# Var = numerator / (scale * |signal'|^2)
SIGNAL_SCALE = {Scheme.TWO_COPY: 1, Scheme.FOUR_COPY: 3, Scheme.COLLECTIVE: 1}


@dataclass(frozen=True)
class PrecisionResult:
    scheme: str
    theta: float
    n_parties: int
    noise_p: float
    variance_theta: float
    gain: float
    degenerate: bool = False
    interior_optimum: bool = False

    @classmethod
    def build(cls, scheme, theta, n, p, variance, degenerate=False, interior_optimum=False):
        return cls(
            scheme=scheme,
            theta=theta,
            n_parties=n,
            noise_p=p,
            variance_theta=variance,
            gain=gain(scheme, n, variance),
            degenerate=degenerate,
            interior_optimum=interior_optimum,
        )


@dataclass(frozen=True)
class ThetaDerivativeSpec:
    """Exact derivative from a jet, or a symmetric difference quotient with step h."""

    ANALYTIC = "analytic"
    CENTRAL = "central-difference"

    mode: str = ANALYTIC
    h: float = None

    def __post_init__(self):
        if self.mode not in (self.ANALYTIC, self.CENTRAL):
            raise ValidationError(f"Unknown derivative mode '{self.mode}'")
        if self.mode == self.CENTRAL and (self.h is None or self.h <= 0):
            raise ValidationError("A central difference needs a positive step")

    @classmethod
    def central(cls, theta, h=None):
        return cls(cls.CENTRAL, h or 1e-5 * max(1.0, abs(theta)))


def _check_scheme(scheme):
    if scheme not in Scheme.values:
        raise ValidationError(f"Unknown scheme '{scheme}'")


def has_signal(slope, spread):
    """
    A slope carries signal while spread / slope^2 stays below 1 / atol^2, so
    small slopes over vanishing spreads near theta = 0 still count
    """
    atol = settings.METROLOGY_SIGNAL_ATOL
    return slope != 0 and spread * atol * atol <= slope * slope


def error_propagation(var_m, d_mean_d_theta):
    """Var(M) / |d<M>/dtheta|^2, +inf when there is no signal."""
    if not has_signal(d_mean_d_theta, var_m):
        return math.inf
    return var_m / d_mean_d_theta**2


def two_copy_numerator(terms, n, d=2):
    """(d^2 - 1) N - 2 S1 + 2 S2 - S1^2"""
    return (d * d - 1) * n - 2 * terms.s1 + 2 * terms.s2 - terms.s1 * terms.s1


def four_copy_numerator(terms, n):
    """15 N - 20 S1 + 8 F1 + 2 F2 - 3 F1^2"""
    return 15 * n - 20 * terms.s1 + 8 * terms.f1 + 2 * terms.f2 - 3 * (terms.f1 * terms.f1)


def collective_signal(terms):
    return terms.s1 + terms.k1


def collective_numerator(terms, n, moment=CollectiveMoment.EXACT):
    """144 <X_2^2> - (S1 + K1)^2, or f(N) + B - (S1 + K1)^2 in pairwise form"""
    signal = collective_signal(terms)
    if moment == CollectiveMoment.PAIRWISE:
        b_theta = b_of_theta(
            n, terms.s1, terms.s2, terms.k1, terms.k2, terms.k2_prime, terms.sum_j_sq
        )
        return f_of_n(n) + b_theta - signal * signal
    return terms.second_moment - signal * signal


def variance_two_copy(inv, d_s1):
    return error_propagation(max(two_copy_numerator(inv, inv.n_parties, inv.local_dim), 0.0), d_s1)


def variance_four_copy(inv, d_f1):
    if inv.f1 is None:
        raise ValidationError("The four-copy scheme needs F1 and F2")
    return error_propagation(max(four_copy_numerator(inv, inv.n_parties), 0.0) / 3, d_f1)


def variance_collective(inv, coll, d_s1_plus_k1):
    signal = inv.s1 + coll.k1
    numerator = coll.second_moment - signal * signal
    return error_propagation(max(numerator, 0.0), d_s1_plus_k1)


def gain(scheme, n, variance_theta):
    """G_k = 1 / (k N Var); 0 for an infinite variance."""
    _check_scheme(scheme)
    if variance_theta < 0:
        raise ValidationError("Variance must be non-negative")
    if math.isinf(variance_theta):
        return 0.0
    if variance_theta == 0:
        return math.inf
    return 1.0 / (COPIES[scheme] * n * variance_theta)


def derivative(evaluator, theta, spec=None):
    """d/dtheta of ``evaluator`` at ``theta``."""
    spec = spec or ThetaDerivativeSpec()
    if spec.mode == ThetaDerivativeSpec.ANALYTIC:
        jet = evaluator(theta)
        if not isinstance(jet, Jet):
            raise ValidationError("Analytic derivatives need an evaluator returning a jet")
        return float(jet.first)

    def value(t):
        out = evaluator(t)
        return float(out.value if isinstance(out, Jet) else out)

    return (value(theta + spec.h) - value(theta - spec.h)) / (2 * spec.h)


def precision_from_invariants(scheme, inv, coll, signal_derivative):
    _check_scheme(scheme)
    if scheme == Scheme.TWO_COPY:
        return variance_two_copy(inv, signal_derivative)
    if scheme == Scheme.FOUR_COPY:
        return variance_four_copy(inv, signal_derivative)
    if coll is None:
        raise ValidationError("The collective scheme needs collective terms")
    return variance_collective(inv, coll, signal_derivative)


def scheme_series(model, scheme, theta, p=1.0, moment=CollectiveMoment.EXACT):
    """(numerator, signal) of the scheme as jets for a closed-form model."""
    _check_scheme(scheme)
    n = model.n_parties
    bloch, correlation = dynamics_series(model, theta)
    terms = noisy_terms(symmetric_terms_from_series(n, bloch, correlation), n, p)
    if scheme == Scheme.TWO_COPY:
        return two_copy_numerator(terms, n), terms.s1
    if scheme == Scheme.FOUR_COPY:
        return four_copy_numerator(terms, n), terms.f1
    return collective_numerator(terms, n, moment), collective_signal(terms)


def _noise_p(noise):
    if noise is None:
        return 1.0
    return noise.p if isinstance(noise, NoiseModel) else NoiseModel(noise).p


def theta_limit(model, scheme, noise=None, moment=CollectiveMoment.EXACT):
    """
    lim theta -> 0 of the precision of a closed-form model, from the jets at
    theta = 0
    """
    p = _noise_p(noise)
    n = model.n_parties
    numerator, signal = scheme_series(model, scheme, 0.0, p, moment)
    scale = SIGNAL_SCALE[scheme]
    tol = 1e-9 * (n**4 if scheme == Scheme.COLLECTIVE else n**2)

    def result(variance, **flags):
        return PrecisionResult.build(scheme, 0.0, n, p, variance, **flags)

    if abs(signal.first) > tol:
        return result(max(numerator.value, 0.0) / (scale * signal.first**2))
    if abs(numerator.value) > tol:
        # The numerator keeps a constant term: the gain peaks at some theta > 0.
        return result(math.inf, interior_optimum=True)
    if abs(signal.second) <= tol:
        return result(math.inf, degenerate=True)
    return result(max(numerator.second, 0.0) / (2 * scale * signal.second**2))


def theta_limit_gain(model, scheme, noise=None, moment=CollectiveMoment.EXACT):
    return theta_limit(model, scheme, noise, moment).gain


def precision_at(model, scheme, theta, noise=None, moment=CollectiveMoment.EXACT):
    """
    Precision and gain of a closed-form model at theta with analytic
    derivatives; theta = 0 is the limit
    """
    if not model.has_closed_form:
        raise ValidationError(f"'{model.kind}' dynamics have no closed form")
    if theta == 0:
        return theta_limit(model, scheme, noise, moment)

    p = _noise_p(noise)
    numerator, signal = scheme_series(model, scheme, theta, p, moment)
    slope = signal.first
    spread = max(numerator.value, 0.0) / SIGNAL_SCALE[scheme]
    if not has_signal(slope, spread):
        logger.warning("No signal for %s at theta=%g, N=%d", scheme, theta, model.n_parties)
        return PrecisionResult.build(scheme, theta, model.n_parties, p, math.inf, degenerate=True)
    variance = spread / slope**2
    return PrecisionResult.build(scheme, theta, model.n_parties, p, variance)


def precision_from_reduced(scheme, reduced_at, theta, noise=None, spec=None):
    """
    Precision for an arbitrary encoding given ``reduced_at(theta) -> ReducedData``,
    differentiated numerically
    """
    _check_scheme(scheme)
    noise = NoiseModel(_noise_p(noise))
    spec = spec or ThetaDerivativeSpec.central(theta)
    needs_collective = scheme == Scheme.COLLECTIVE

    def invariants_at(t):
        reduced = reduced_at(t)
        coll = collective_terms(reduced) if needs_collective else None
        return apply_noise_scaling(invariant_set(reduced), coll, noise)

    def signal_at(t):
        inv, coll = invariants_at(t)
        if scheme == Scheme.TWO_COPY:
            return inv.s1
        if scheme == Scheme.FOUR_COPY:
            return inv.f1
        return inv.s1 + coll.k1

    inv, coll = invariants_at(theta)
    slope = derivative(signal_at, theta, spec)
    variance = precision_from_invariants(scheme, inv, coll, slope)
    return PrecisionResult.build(
        scheme,
        theta,
        inv.n_parties,
        noise.p,
        variance,
        degenerate=math.isinf(variance),
    )
