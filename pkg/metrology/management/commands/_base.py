import io

from django.core.exceptions import ValidationError as DjangoValidationError
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError as SerializerValidationError

from common.exceptions import MetrologyError

# Errors a command reports as a usage/runtime failure with a non-zero exit
HANDLED_ERRORS = (DjangoValidationError, SerializerValidationError, MetrologyError)


def describe(exc):
    if isinstance(exc, DjangoValidationError):
        return "; ".join(exc.messages)
    if isinstance(exc, SerializerValidationError):
        return str(exc.detail)
    return str(exc)


class MetrologyCommand(BaseCommand):
    """
    Base for the metrology commands: serializer-validated options and
    output to stdout or --out
    """

    def add_output_arguments(self, parser):
        parser.add_argument("--out", default=None, help="Output path (default: stdout)")

    def validated(self, serializer_class, data):
        serializer = serializer_class(data=data)
        if not serializer.is_valid():
            raise CommandError(f"Invalid options: {dict(serializer.errors)}")
        return serializer.validated_data

    def emit(self, text, out=None):
        if out:
            with open(out, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            self.stderr.write(f"Wrote {out}")
        else:
            self.stdout.write(text, ending="")

    @staticmethod
    def capture(writer, *args):
        buffer = io.StringIO()
        writer(*args, buffer)
        return buffer.getvalue()
