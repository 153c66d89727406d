import logging
import math

from django.core.exceptions import ValidationError
from django.db import models, transaction

from common.models import BaseModel

from .precision import Scheme
from .sweeps import SweepKind, SweepRow

logger = logging.getLogger(__name__)


class SweepRun(BaseModel):
    """
    A recorded parameter sweep: its configuration echo and lifecycle status
    """

    class Status(models.TextChoices):
        PENDING = "pending", "Pending"
        COMPLETED = "completed", "Completed"
        FAILED = "failed", "Failed"

    kind = models.CharField(max_length=10, choices=SweepKind.choices)
    model_spec = models.CharField(max_length=255)
    schemes = models.JSONField(default=list)
    noise_levels = models.JSONField(default=list)
    grid = models.JSONField(default=dict)
    seed = models.BigIntegerField(null=True, blank=True)
    status = models.CharField(
        max_length=20,
        choices=Status.choices,
        default=Status.PENDING,
        db_index=True,
    )
    failure_reason = models.TextField(blank=True, default="")

    def clean(self):
        if self.kind not in SweepKind.values:
            raise ValidationError(f"Unknown sweep kind '{self.kind}'")
        if not self.schemes:
            raise ValidationError("A sweep needs at least one scheme")
        for scheme in self.schemes:
            if scheme not in Scheme.values:
                raise ValidationError(f"Unknown scheme '{scheme}'")
        for p in self.noise_levels:
            if not 0 <= p <= 1:
                raise ValidationError("Noise levels must lie in [0, 1]")

    def save(self, *args, **kwargs):
        self.clean()
        super().save(*args, **kwargs)

    @classmethod
    def start(cls, config):
        """
        Create a pending run echoing the sweep configuration
        """
        return cls.objects.create(
            kind=config.kind,
            model_spec=config.model_spec,
            schemes=list(config.schemes),
            noise_levels=list(config.noise_levels),
            grid=config.grid(),
            seed=config.seed,
        )

    def complete(self):
        """
        Mark a pending run as completed
        """
        if self.status == self.Status.PENDING:
            self.status = self.Status.COMPLETED
            self.save()

    def fail(self, reason=""):
        """
        Mark a pending run as failed; completed runs keep their status
        """
        if self.status == self.Status.COMPLETED:
            raise ValidationError("A completed run cannot be marked as failed")
        if self.status == self.Status.PENDING:
            self.status = self.Status.FAILED
            self.failure_reason = reason
            self.save()

    def rows(self):
        return [point.as_row() for point in self.points.order_by("index")]

    def __str__(self):
        return f"{self.kind} sweep of {self.model_spec} - {self.status}"


class SweepPoint(BaseModel):
    """
    One evaluated grid point; null variance or gain stands for +inf
    """

    run = models.ForeignKey(SweepRun, on_delete=models.CASCADE, related_name="points")
    index = models.PositiveIntegerField()
    scheme = models.CharField(max_length=20, choices=Scheme.choices)
    n = models.PositiveIntegerField()
    theta = models.FloatField()
    p = models.FloatField()
    variance = models.FloatField(null=True, blank=True)
    gain = models.FloatField(null=True, blank=True)
    degenerate = models.BooleanField(default=False)

    class Meta:
        ordering = ["index"]
        constraints = [
            models.UniqueConstraint(fields=["run", "index"], name="unique_point_per_run")
        ]

    @staticmethod
    def _store(value):
        return None if math.isinf(value) else value

    @staticmethod
    def _load(value):
        return math.inf if value is None else value

    @classmethod
    def from_row(cls, run, index, row):
        return cls(
            run=run,
            index=index,
            scheme=row.scheme,
            n=row.n,
            theta=row.theta,
            p=row.p,
            variance=cls._store(row.variance),
            gain=cls._store(row.gain),
            degenerate=row.degenerate,
        )

    def as_row(self):
        return SweepRow(
            theta=self.theta,
            variance=self._load(self.variance),
            gain=self._load(self.gain),
            scheme=self.scheme,
            n=self.n,
            p=self.p,
            degenerate=self.degenerate,
        )

    def __str__(self):
        return f"{self.scheme} N={self.n} theta={self.theta:g} p={self.p:g}"


@transaction.atomic
def record_sweep(config, rows, run=None):
    """
    Store a finished sweep and its rows in one transaction
    """
    run = run or SweepRun.start(config)
    SweepPoint.objects.bulk_create(
        [SweepPoint.from_row(run, index, row) for index, row in enumerate(rows)]
    )
    run.complete()
    logger.info("Recorded %s sweep %s with %d points", run.kind, run.id, len(rows))
    return run
