from metrology.serializers import SweepNSerializer
from metrology.sweeps import SweepKind

from ._sweep import SweepCommand


class Command(SweepCommand):
    help = "Precision and gain of a closed-form model over a range of particle numbers"

    kind = SweepKind.N
    serializer_class = SweepNSerializer

    def add_arguments(self, parser):
        self.add_common_arguments(parser)
        parser.add_argument("--n-start", type=int, default=10)
        parser.add_argument("--n-stop", type=int, default=200)
        parser.add_argument("--n-step", type=int, default=1)
        parser.add_argument("--theta-rule", choices=["inverse-n", "fixed"], default="inverse-n")
        parser.add_argument("--theta", type=float, default=None)

    def sweep_options(self, options):
        # The N in --spec is replaced by every value of the range.
        return {
            "n_start": options["n_start"],
            "n_stop": options["n_stop"],
            "n_step": options["n_step"],
            "theta_rule": options["theta_rule"],
            "theta": options["theta"],
        }
