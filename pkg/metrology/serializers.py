import math

import numpy as np
from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from .precision import Scheme
from .specs import parse_model_spec


class InfFloatField(serializers.FloatField):
    """Float rendered as the string "inf" when infinite."""

    def to_representation(self, value):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value


class MatrixField(serializers.Field):
    """Complex matrix as {"real": [[...]], "imag": [[...]]}."""

    def to_representation(self, value):
        value = np.asarray(value)
        return {"real": value.real.tolist(), "imag": value.imag.tolist()}


def _model_spec(value, need_dynamics):
    try:
        spec = parse_model_spec(value)
    except DjangoValidationError as exc:
        raise serializers.ValidationError(exc.messages)
    if need_dynamics and not spec.has_dynamics:
        raise serializers.ValidationError(f"'{spec.family}' has no theta dependence to sweep")
    return value


class SweepOptionsSerializer(serializers.Serializer):
    model_spec = serializers.CharField()
    schemes = serializers.ListField(
        child=serializers.ChoiceField(choices=Scheme.choices),
        allow_empty=False,
    )
    noise_levels = serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0),
        allow_empty=False,
    )
    fmt = serializers.ChoiceField(choices=["csv", "json"], default="csv")
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True)

    def validate_model_spec(self, value):
        return _model_spec(value, need_dynamics=True)

    def validate_schemes(self, value):
        # Repeated flags keep their first occurrence.
        return tuple(dict.fromkeys(value))

    def validate_noise_levels(self, value):
        return tuple(dict.fromkeys(value))


class SweepThetaSerializer(SweepOptionsSerializer):
    theta_start = serializers.FloatField()
    theta_stop = serializers.FloatField()
    theta_count = serializers.IntegerField(min_value=2)
    spacing = serializers.ChoiceField(choices=["linear", "log"], default="linear")

    def validate(self, data):
        if data["theta_start"] >= data["theta_stop"]:
            raise serializers.ValidationError({"theta_start": "Must be below theta stop"})
        if data["spacing"] == "log" and data["theta_start"] <= 0:
            raise serializers.ValidationError(
                {"theta_start": "A logarithmic grid needs a positive start"}
            )
        return data


class SweepNSerializer(SweepOptionsSerializer):
    n_start = serializers.IntegerField(min_value=2)
    n_stop = serializers.IntegerField(min_value=3)
    n_step = serializers.IntegerField(min_value=1, default=1)
    theta_rule = serializers.ChoiceField(choices=["inverse-n", "fixed"], default="inverse-n")
    theta = serializers.FloatField(required=False, allow_null=True)

    def validate(self, data):
        if data["n_start"] >= data["n_stop"]:
            raise serializers.ValidationError({"n_start": "Must be below N stop"})
        if data["theta_rule"] == "fixed" and data.get("theta") is None:
            raise serializers.ValidationError({"theta": "A fixed theta rule needs a value"})
        return data


class InvariantsOptionsSerializer(serializers.Serializer):
    model_spec = serializers.CharField()
    theta = serializers.FloatField(default=0.0)
    p = serializers.FloatField(min_value=0.0, max_value=1.0, default=1.0)

    def validate_model_spec(self, value):
        return _model_spec(value, need_dynamics=False)


class TwirlOptionsSerializer(serializers.Serializer):
    k = serializers.IntegerField(min_value=1, max_value=4)
    samples = serializers.IntegerField(min_value=1)
    seed = serializers.IntegerField(min_value=0)
    stream = serializers.IntegerField(min_value=0, default=0)
    collective = serializers.BooleanField(default=False)
    n = serializers.IntegerField(min_value=1, default=1)
    dim = serializers.IntegerField(min_value=2, default=2)

    def validate(self, data):
        if data["collective"] and data["dim"] != 2:
            raise serializers.ValidationError({"dim": "Collective twirls act on qubits"})
        return data


class SweepRowSerializer(serializers.Serializer):
    theta = InfFloatField()
    variance = InfFloatField()
    gain = InfFloatField()
    scheme = serializers.CharField()
    n = serializers.IntegerField()
    p = InfFloatField()
    degenerate = serializers.BooleanField()


class SweepReportSerializer(serializers.Serializer):
    metadata = serializers.DictField()
    rows = SweepRowSerializer(many=True)


class InvariantSetSerializer(serializers.Serializer):
    n_parties = serializers.IntegerField()
    local_dim = serializers.IntegerField()
    s1 = InfFloatField()
    s2 = InfFloatField()
    f1 = InfFloatField(allow_null=True)
    f2 = InfFloatField(allow_null=True)


class CollectiveTermsSerializer(serializers.Serializer):
    k1 = InfFloatField()
    k2 = InfFloatField()
    k2_prime = InfFloatField()
    sum_j_sq = InfFloatField()
    b_theta = InfFloatField()
    f_n = InfFloatField()
    second_moment = InfFloatField()


class TwirledObservableSerializer(serializers.Serializer):
    kind = serializers.CharField()
    provenance = serializers.CharField()
    samples = serializers.IntegerField(allow_null=True)
    seed = serializers.IntegerField(allow_null=True)
    stream = serializers.IntegerField(allow_null=True)
    low_samples = serializers.BooleanField()
    operator = MatrixField()
    standard_error = MatrixField(allow_null=True)


class CheckResultSerializer(serializers.Serializer):
    suite = serializers.CharField()
    name = serializers.CharField()
    passed = serializers.BooleanField()
    residual = InfFloatField()
    tolerance = InfFloatField()
    detail = serializers.CharField(allow_blank=True)


class ComparisonSerializer(serializers.Serializer):
    suite = serializers.CharField()
    name = serializers.CharField()
    value = InfFloatField()
    reference = InfFloatField()
    ratio = InfFloatField()
    detail = serializers.CharField(allow_blank=True)


class ValidationReportSerializer(serializers.Serializer):
    suite = serializers.CharField()
    seed = serializers.IntegerField()
    version = serializers.CharField()
    passed = serializers.BooleanField()
    checks = CheckResultSerializer(many=True)
    comparisons = ComparisonSerializer(many=True)
