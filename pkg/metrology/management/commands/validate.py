from django.core.management.base import CommandError
from rest_framework.renderers import JSONRenderer

from metrology.serializers import ValidationReportSerializer
from metrology.validation import Suite, run_validation

from ._base import MetrologyCommand


class Command(MetrologyCommand):
    help = "Run the cross-module validation suites and emit a JSON report"

    def add_arguments(self, parser):
        parser.add_argument("suite", nargs="?", choices=Suite.values, default=Suite.ALL)
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--samples", type=int, default=100_000, help="Monte Carlo samples")
        self.add_output_arguments(parser)

    def handle(self, *args, **options):
        if options["samples"] < 1:
            raise CommandError("--samples must be positive")
        report = run_validation(options["suite"], options["seed"], options["samples"])
        data = ValidationReportSerializer(report).data
        text = JSONRenderer().render(data, renderer_context={"indent": 2}).decode()
        self.emit(text + "\n", options["out"])

        if not report.passed:
            names = ", ".join(f"{check.suite}/{check.name}" for check in report.failures)
            raise CommandError(f"{len(report.failures)} check(s) failed: {names}")
