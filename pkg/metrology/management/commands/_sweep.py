from django.core.management.base import CommandError

from metrology.models import SweepRun, record_sweep
from metrology.precision import Scheme
from metrology.sweeps import SweepConfig, run_sweep, write_csv, write_json

from ._base import HANDLED_ERRORS, MetrologyCommand, describe


class SweepCommand(MetrologyCommand):
    kind = None
    serializer_class = None

    def add_common_arguments(self, parser):
        parser.add_argument("--spec", required=True, help="Model spec, e.g. oat:N=100")
        parser.add_argument(
            "--scheme",
            action="append",
            choices=Scheme.values,
            help="Scheme to evaluate; repeat for several (default: two-copy)",
        )
        parser.add_argument(
            "--p",
            action="append",
            type=float,
            help="Depolarizing survival probability; repeat for several (default: 1)",
        )
        parser.add_argument("--format", choices=["csv", "json"], default="csv")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--record", action="store_true", help="Store the run in the database")
        self.add_output_arguments(parser)

    def sweep_options(self, options):
        raise NotImplementedError

    def handle(self, *args, **options):
        data = {
            "model_spec": options["spec"],
            "schemes": options["scheme"] or [Scheme.TWO_COPY],
            "noise_levels": options["p"] or [1.0],
            "fmt": options["format"],
            "seed": options["seed"],
            **self.sweep_options(options),
        }
        validated = self.validated(self.serializer_class, data)
        try:
            config = SweepConfig(kind=self.kind, **validated)
        except HANDLED_ERRORS as exc:
            raise CommandError(describe(exc))

        run = SweepRun.start(config) if options["record"] else None
        try:
            rows = run_sweep(config)
        except HANDLED_ERRORS as exc:
            if run is not None:
                run.fail(describe(exc))
            raise CommandError(describe(exc))

        if run is not None:
            record_sweep(config, rows, run)
            self.stderr.write(f"Recorded sweep {run.id}")

        if config.fmt == "json":
            text = self.capture(write_json, rows, config)
        else:
            text = self.capture(write_csv, rows)
        self.emit(text, options["out"])
