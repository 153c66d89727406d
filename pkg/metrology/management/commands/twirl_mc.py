import math

import numpy as np
from django.core.management.base import CommandError
from rest_framework.renderers import JSONRenderer

from metrology import twirl
from metrology.serializers import TwirledObservableSerializer, TwirlOptionsSerializer
from metrology.tensor import PAULI, collective_operator

from ._base import HANDLED_ERRORS, MetrologyCommand, describe


def reference_observable(dim):
    """Traceless O with tr O^2 = d: sigma_z for qubits, a scaled Z-like diagonal otherwise."""
    if dim == 2:
        return PAULI["z"]
    diagonal = np.zeros(dim)
    diagonal[0], diagonal[1] = 1.0, -1.0
    return np.diag(diagonal * math.sqrt(dim / 2)).astype(complex)


def analytic_reference(options):
    k = options["k"]
    if options["collective"]:
        return twirl.collective_x2(options["n"]).operator if k == 2 else None
    if k == 2:
        return twirl.phi2_analytic(options["dim"]).operator
    if k == 4 and options["dim"] == 2:
        return twirl.phi4_analytic().operator
    if k == 1:
        return np.zeros((options["dim"], options["dim"]))
    return None


class Command(MetrologyCommand):
    help = "Monte Carlo Haar twirl of a reference observable, compared with its analytic form"

    def add_arguments(self, parser):
        parser.add_argument("--k", type=int, required=True, help="Number of copies")
        parser.add_argument("--samples", type=int, required=True)
        parser.add_argument("--seed", type=int, required=True)
        parser.add_argument("--stream", type=int, default=0)
        parser.add_argument("--collective", action="store_true", help="Twirl J_z by V^{x n}")
        parser.add_argument("--n", type=int, default=1, help="Parties of a collective twirl")
        parser.add_argument("--dim", type=int, default=2, help="Local dimension of a local twirl")
        self.add_output_arguments(parser)

    def handle(self, *args, **options):
        keys = ("k", "samples", "seed", "stream", "collective", "n", "dim")
        data = {key: options[key] for key in keys}
        validated = self.validated(TwirlOptionsSerializer, data)

        sampler = twirl.HaarSampler(validated["seed"], validated["stream"])
        try:
            if validated["collective"]:
                obs = collective_operator("z", validated["n"])
            else:
                obs = reference_observable(validated["dim"])
            estimate = twirl.haar_mc_twirl(
                obs,
                validated["k"],
                sampler,
                validated["samples"],
                collective=validated["collective"],
                n=validated["n"],
            )
            reference = analytic_reference(validated)
        except HANDLED_ERRORS as exc:
            raise CommandError(describe(exc))

        report = dict(TwirledObservableSerializer(estimate).data)
        report["max_deviation"] = None if reference is None else estimate.max_deviation(reference)
        report["within_5_sigma"] = None if reference is None else estimate.within(reference)
        text = JSONRenderer().render(report, renderer_context={"indent": 2}).decode()
        self.emit(text + "\n", options["out"])
