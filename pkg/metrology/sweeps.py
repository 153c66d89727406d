"""
Parameter sweeps over theta and N, and their CSV/JSON renderings.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.db.models import TextChoices
from rest_framework.renderers import JSONRenderer

from .precision import Scheme, precision_at
from .serializers import SweepReportSerializer
from .specs import parse_model_spec
from .states import NoiseModel

logger = logging.getLogger(__name__)

CSV_HEADER = ("theta", "variance", "gain", "scheme", "n", "p", "degenerate")


class SweepKind(TextChoices):
    THETA = "theta", "Sweep over theta"
    N = "n", "Sweep over particle number"


class Spacing(TextChoices):
    LINEAR = "linear", "Linear"
    LOG = "log", "Logarithmic"


class ThetaRule(TextChoices):
    INVERSE_N = "inverse-n", "theta = 1/N"
    FIXED = "fixed", "Fixed theta"


class OutputFormat(TextChoices):
    CSV = "csv", "CSV"
    JSON = "json", "JSON"


@dataclass(frozen=True)
class SweepConfig:
    kind: str
    model_spec: str
    schemes: tuple = (Scheme.TWO_COPY,)
    noise_levels: tuple = (1.0,)
    theta_start: float = 1e-4
    theta_stop: float = 0.1
    theta_count: int = 100
    spacing: str = Spacing.LINEAR
    n_start: int = 10
    n_stop: int = 200
    n_step: int = 1
    theta_rule: str = ThetaRule.INVERSE_N
    theta: float = None
    fmt: str = OutputFormat.CSV
    seed: int = None

    def __post_init__(self):
        if self.kind not in SweepKind.values:
            raise ValidationError(f"Unknown sweep kind '{self.kind}'")
        if not self.schemes or any(s not in Scheme.values for s in self.schemes):
            raise ValidationError("Schemes must be chosen from " + ", ".join(Scheme.values))
        for p in self.noise_levels:
            NoiseModel(p)
        if self.kind == SweepKind.THETA:
            if self.theta_count < 2:
                raise ValidationError("A theta grid needs at least two points")
            if self.theta_start >= self.theta_stop:
                raise ValidationError("theta start must be below theta stop")
            if self.spacing == Spacing.LOG and self.theta_start <= 0:
                raise ValidationError("A logarithmic grid needs a positive start")
        else:
            if self.n_start < 2 or self.n_start >= self.n_stop or self.n_step < 1:
                raise ValidationError("The N range needs 2 <= start < stop and a positive step")
            if self.theta_rule == ThetaRule.FIXED and self.theta is None:
                raise ValidationError("A fixed theta rule needs --theta")

    def theta_grid(self):
        if self.spacing == Spacing.LOG:
            return np.geomspace(self.theta_start, self.theta_stop, self.theta_count)
        return np.linspace(self.theta_start, self.theta_stop, self.theta_count)

    def n_values(self):
        return list(range(self.n_start, self.n_stop + 1, self.n_step))

    def grid(self):
        """JSON-ready echo of the grid definition."""
        if self.kind == SweepKind.THETA:
            return {
                "start": self.theta_start,
                "stop": self.theta_stop,
                "count": self.theta_count,
                "spacing": self.spacing,
            }
        return {
            "n_start": self.n_start,
            "n_stop": self.n_stop,
            "n_step": self.n_step,
            "theta_rule": self.theta_rule,
            "theta": self.theta,
        }


@dataclass(frozen=True)
class SweepRow:
    theta: float
    variance: float
    gain: float
    scheme: str
    n: int
    p: float
    degenerate: bool = False


def _evaluate(jobs):
    """Evaluate (model, scheme, p, theta) jobs in parallel, keeping job order."""

    def run(job):
        model, scheme, p, theta = job
        result = precision_at(model, scheme, theta, NoiseModel(p))
        return SweepRow(
            theta=theta,
            variance=result.variance_theta,
            gain=result.gain,
            scheme=scheme,
            n=model.n_parties,
            p=p,
            degenerate=result.degenerate,
        )

    with ThreadPoolExecutor(max_workers=settings.METROLOGY_WORKERS) as pool:
        return list(pool.map(run, jobs))


def _dynamics(config):
    spec = parse_model_spec(config.model_spec)
    if not spec.has_dynamics:
        raise ValidationError(f"'{spec.family}' has no theta dependence to sweep")
    return spec


def sweep_theta(config):
    spec = _dynamics(config)
    model = spec.dynamics()
    thetas = [float(theta) for theta in config.theta_grid()]
    jobs = [
        (model, scheme, p, theta)
        for scheme in config.schemes
        for p in config.noise_levels
        for theta in thetas
    ]
    logger.info("Sweeping theta for %s over %d points", spec, len(jobs))
    rows = _evaluate(jobs)
    logger.info("Theta sweep finished")
    return rows


def sweep_n(config):
    spec = _dynamics(config)
    models = [spec.with_n(n).dynamics() for n in config.n_values()]

    def theta_for(model):
        if config.theta_rule == ThetaRule.INVERSE_N:
            return 1.0 / model.n_parties
        return config.theta

    jobs = [
        (model, scheme, p, theta_for(model))
        for scheme in config.schemes
        for p in config.noise_levels
        for model in models
    ]
    logger.info("Sweeping N for %s over %d points", spec.family, len(jobs))
    rows = _evaluate(jobs)
    logger.info("N sweep finished")
    return rows


def run_sweep(config):
    if config.kind == SweepKind.THETA:
        return sweep_theta(config)
    return sweep_n(config)


def format_float(value):
    """17 significant digits; infinities as 'inf'."""
    return format(float(value), ".17g")


def write_csv(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                format_float(row.theta),
                format_float(row.variance),
                format_float(row.gain),
                row.scheme,
                row.n,
                format_float(row.p),
                "true" if row.degenerate else "false",
            ]
        )


def config_echo(config):
    echo = asdict(config)
    echo["schemes"] = list(config.schemes)
    echo["noise_levels"] = list(config.noise_levels)
    return echo


def render_json(rows, config):
    report = {
        "metadata": {
            "version": settings.METROLOGY_VERSION,
            "seed": config.seed,
            "config": config_echo(config),
        },
        "rows": rows,
    }
    data = SweepReportSerializer(report).data
    return JSONRenderer().render(data, renderer_context={"indent": 2})


def write_json(rows, config, stream):
    stream.write(render_json(rows, config).decode())
    stream.write("\n")
