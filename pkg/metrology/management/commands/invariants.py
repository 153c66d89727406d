from django.core.management.base import CommandError
from rest_framework.renderers import JSONRenderer

from metrology.invariants import apply_noise_scaling, collective_terms, invariant_set
from metrology.serializers import (
    CollectiveTermsSerializer,
    InvariantSetSerializer,
    InvariantsOptionsSerializer,
)
from metrology.specs import parse_model_spec
from metrology.states import NoiseModel

from ._base import HANDLED_ERRORS, MetrologyCommand, describe


class Command(MetrologyCommand):
    help = "Print the invariant set and collective terms of a state spec at theta and p"

    def add_arguments(self, parser):
        parser.add_argument("--spec", required=True)
        parser.add_argument("--theta", type=float, default=0.0)
        parser.add_argument("--p", type=float, default=1.0)
        self.add_output_arguments(parser)

    def handle(self, *args, **options):
        data = {"model_spec": options["spec"], "theta": options["theta"], "p": options["p"]}
        validated = self.validated(InvariantsOptionsSerializer, data)

        try:
            spec = parse_model_spec(validated["model_spec"])
            reduced = spec.reduced_at(validated["theta"])
            inv, coll = apply_noise_scaling(
                invariant_set(reduced), collective_terms(reduced), NoiseModel(validated["p"])
            )
        except HANDLED_ERRORS as exc:
            raise CommandError(describe(exc))

        report = {
            "spec": str(spec),
            "theta": validated["theta"],
            "p": validated["p"],
            "invariants": InvariantSetSerializer(inv).data,
            "collective": CollectiveTermsSerializer(coll).data,
        }
        text = JSONRenderer().render(report, renderer_context={"indent": 2}).decode()
        self.emit(text + "\n", options["out"])
