"""
Cross-module validation suites: analytic limits, closed forms against the
dense oracle, and analytic twirls against Monte Carlo.

Checks pass or fail. Comparisons put an alternative closed form next to the
value the engine uses and never fail: the pairwise collective moment
(f(N) + B) / 144 and the Mermin four-copy constant 3 * 2^(2N+1) / (3N + 1)
both disagree with the dense oracle and are reported that way.
"""

import logging
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from django.conf import settings
from django.db.models import TextChoices

from . import twirl
from .precision import (
    CollectiveMoment,
    Scheme,
    precision_at,
    precision_from_reduced,
    theta_limit_gain,
)
from .states import (
    DynamicsModel,
    evolve_full,
    ghz_reduced,
    mermin_state,
    oat_reduced_closed_form,
    reduced_data,
)
from .tensor import AXES, PAULI, collective_operator

logger = logging.getLogger(__name__)

LIMIT_RTOL = 1e-10
ORACLE_ATOL = 1e-10
VARIANCE_RTOL = 1e-8
SIGMAS = 5.0
MERMIN_MAX_N = 10


class Suite(TextChoices):
    LIMITS = "limits", "Analytic theta -> 0 limits"
    ORACLE = "oracle", "Closed forms against the dense oracle"
    TWIRL = "twirl", "Analytic twirls against Monte Carlo"
    ALL = "all", "All suites"


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


@dataclass(frozen=True)
class Comparison:
    suite: str
    name: str
    value: float
    reference: float
    detail: str = ""

    @property
    def ratio(self):
        return self.value / self.reference


@dataclass
class ValidationReport:
    suite: str
    seed: int
    version: str = field(default_factory=lambda: settings.METROLOGY_VERSION)
    checks: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    @property
    def failures(self):
        return [check for check in self.checks if not check.passed]

    def add(self, suite, name, residual, tolerance, detail=""):
        passed = bool(np.isfinite(residual) and residual <= tolerance)
        self.checks.append(CheckResult(suite, name, passed, float(residual), tolerance, detail))
        if not passed:
            logger.warning(
                "Check %s/%s failed: residual %.3e > %.1e", suite, name, residual, tolerance
            )

    def compare(self, suite, name, value, reference, detail=""):
        comparison = Comparison(suite, name, float(value), float(reference), detail)
        self.comparisons.append(comparison)
        logger.info("Comparison %s/%s: ratio %.6g", suite, name, comparison.ratio)


def _relative(value, expected):
    return abs(value - expected) / abs(expected)


def expected_limits(n):
    """Closed-form theta -> 0 gains, keyed by (dynamics, scheme)."""
    limits = {
        ("oat", Scheme.TWO_COPY): (n - 1) / 4,
        ("oat", Scheme.FOUR_COPY): 3 * (n - 1) / 8,
        ("oat", Scheme.COLLECTIVE): n * (n - 1) / (2 * (2 * n - 1)),
    }
    if n > MERMIN_MAX_N:
        return limits
    if n >= 3:
        limits[("mermin1", Scheme.TWO_COPY)] = 4**n / (n + 1)
        limits[("mermin1", Scheme.FOUR_COPY)] = 3 * 4**n / (3 * n + 1)
    else:
        # Two-qubit GHZ marginals keep their coherences.
        limits[("mermin1", Scheme.TWO_COPY)] = 4.0
    return limits


def pairwise_collective_limit(n):
    """theta -> 0 gain of one-axis twisting under the pairwise collective moment."""
    return n * n * (n - 1) / (2 * n * (3 * n - 5) + 8)


def run_limits(report, n_values=(*range(2, 11), 100, 1000)):
    for n in n_values:
        for (family, scheme), expected in expected_limits(n).items():
            model = DynamicsModel.oat(n) if family == "oat" else DynamicsModel.mermin(n, 1)
            value = theta_limit_gain(model, scheme)
            report.add(
                Suite.LIMITS,
                f"{family}-{scheme}-N{n}",
                _relative(value, expected),
                LIMIT_RTOL,
                f"gain {value!r}, expected {expected!r}",
            )
        if n >= 3:
            _compare_collective_limit(report, n)
        if 3 <= n <= MERMIN_MAX_N:
            expected = expected_limits(n)[("mermin1", Scheme.FOUR_COPY)]
            report.compare(
                Suite.LIMITS,
                f"mermin1-four-copy-N{n}",
                expected,
                3 * 2 ** (2 * n + 1) / (3 * n + 1),
                "3 * 4^N / (3N + 1) against 3 * 2^(2N+1) / (3N + 1)",
            )


def _compare_collective_limit(report, n):
    model = DynamicsModel.oat(n)
    pairwise = theta_limit_gain(model, Scheme.COLLECTIVE, moment=CollectiveMoment.PAIRWISE)
    expected = pairwise_collective_limit(n)
    report.add(
        Suite.LIMITS,
        f"oat-collective-pairwise-N{n}",
        _relative(pairwise, expected),
        LIMIT_RTOL,
        f"gain {pairwise!r}, expected {expected!r}",
    )
    report.compare(
        Suite.LIMITS,
        f"oat-collective-N{n}",
        theta_limit_gain(model, Scheme.COLLECTIVE),
        pairwise,
        "exact <X_2^2> against (f(N) + B) / 144",
    )


def _reduced_residual(exact, closed):
    bloch = np.abs(exact.bloch_vectors - closed.bloch_vectors).max()
    pairs = max(
        np.abs(exact.correlation(i, j) - closed.correlation(i, j)).max()
        for i, j in exact.correlations
    )
    return max(bloch, pairs)


ORACLE_VARIANCE_CASES = (
    *((Scheme.TWO_COPY, n) for n in (2, 3, 4)),
    *((Scheme.COLLECTIVE, n) for n in (2, 3, 4)),
    (Scheme.FOUR_COPY, 2),
)


def run_oracle(report, thetas=(0.1, 0.3, 0.7), n_values=range(2, 7)):
    for n, theta in product(n_values, thetas):
        model = DynamicsModel.oat(n)
        exact = reduced_data(evolve_full(model.initial_state(), model, theta))
        closed = oat_reduced_closed_form(n, theta)
        residual = _reduced_residual(exact, closed)
        report.add(Suite.ORACLE, f"oat-reduced-N{n}-theta{theta}", residual, ORACLE_ATOL)

    for variant, n in product((1, 2), n_values):
        theta = 0.03
        model = DynamicsModel.mermin(n, variant)
        exact = reduced_data(evolve_full(model.initial_state(), model, theta))
        closed = ghz_reduced(mermin_state(n, theta, variant))
        residual = _reduced_residual(exact, closed)
        report.add(Suite.ORACLE, f"mermin{variant}-reduced-N{n}", residual, ORACLE_ATOL)

    theta = 0.3
    for scheme, n in ORACLE_VARIANCE_CASES:
        model = DynamicsModel.oat(n)
        dense = twirl.oracle_precision(model.initial_state(), scheme, model, theta)
        formula = formula_variance(scheme, n, theta)
        report.add(
            Suite.ORACLE,
            f"variance-{scheme}-N{n}",
            _relative(formula, dense),
            VARIANCE_RTOL,
            f"formula {formula!r}, dense {dense!r}",
        )
        if scheme == Scheme.COLLECTIVE:
            pairwise = precision_at(model, scheme, theta, moment=CollectiveMoment.PAIRWISE)
            report.compare(
                Suite.ORACLE,
                f"variance-collective-pairwise-N{n}",
                pairwise.variance_theta,
                dense,
                "(f(N) + B) / 144 variance against the dense oracle",
            )


def formula_variance(scheme, n, theta):
    """Variance from the invariant formulas with a central-difference signal."""
    result = precision_from_reduced(scheme, lambda t: oat_reduced_closed_form(n, t), theta)
    return result.variance_theta


def run_twirl(report, seed, samples):
    sampler = twirl.HaarSampler(seed)

    estimate = twirl.haar_mc_twirl(PAULI["z"], 2, sampler, samples)
    analytic = twirl.phi2_analytic(2).operator
    report.add(
        Suite.TWIRL,
        "phi2-qubit",
        _sigma_residual(estimate.operator, analytic, estimate.standard_error),
        SIGMAS,
    )

    mean, stderr = twirl.mc_moment_tensor(twirl.HaarSampler(seed, 1), samples)
    expected = np.array(
        [twirl.phi4_moment_tensor(*axes) for axes in product(AXES, repeat=4)]
    ).reshape(3, 3, 3, 3)
    report.add(Suite.TWIRL, "phi4-moments", _sigma_residual(mean, expected, stderr), SIGMAS)

    jz = collective_operator("z", 2)
    sampler = twirl.HaarSampler(seed, 2)
    estimate = twirl.haar_mc_twirl(jz, 2, sampler, samples, collective=True, n=2)
    analytic = twirl.collective_x2(2).operator
    report.add(
        Suite.TWIRL,
        "collective-x2-N2",
        _sigma_residual(estimate.operator, analytic, estimate.standard_error),
        SIGMAS,
    )


def _sigma_residual(estimate, expected, stderr, floor=1e-12):
    """Largest deviation in units of the standard error."""
    deviation = np.abs(estimate - expected)
    return float((deviation / (stderr + floor)).max())


def run_validation(suite=Suite.ALL, seed=None, samples=100_000):
    seed = settings.METROLOGY_DEFAULT_SEED if seed is None else seed
    report = ValidationReport(suite=suite, seed=seed)
    if suite in (Suite.LIMITS, Suite.ALL):
        run_limits(report)
    if suite in (Suite.ORACLE, Suite.ALL):
        run_oracle(report)
    if suite in (Suite.TWIRL, Suite.ALL):
        run_twirl(report, seed, samples)
    logger.info(
        "Validation '%s': %d checks, %d failed",
        suite,
        len(report.checks),
        len(report.failures),
    )
    return report

