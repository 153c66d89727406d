from metrology.serializers import SweepThetaSerializer
from metrology.sweeps import SweepKind

from ._sweep import SweepCommand


class Command(SweepCommand):
    help = "Precision and gain of a closed-form model over a theta grid"

    kind = SweepKind.THETA
    serializer_class = SweepThetaSerializer

    def add_arguments(self, parser):
        self.add_common_arguments(parser)
        parser.add_argument("--start", type=float, default=1e-4)
        parser.add_argument("--stop", type=float, default=0.1)
        parser.add_argument("--count", type=int, default=1000)
        parser.add_argument("--spacing", choices=["linear", "log"], default="linear")

    def sweep_options(self, options):
        return {
            "theta_start": options["start"],
            "theta_stop": options["stop"],
            "theta_count": options["count"],
            "spacing": options["spacing"],
        }
