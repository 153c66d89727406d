"""
Mini-grammar for state/dynamics specifications on the command line:

    oat:N=<int>
    mermin<1|2>:N=<int>
    ghz:N=<int>,alpha=<float>
    product:N=<int>,b=<0|1>
"""

import re
from dataclasses import dataclass, field, replace

import numpy as np
from django.core.exceptions import ValidationError

from .states import (
    AsymmetricGHZ,
    DynamicsModel,
    ReducedData,
    ghz_reduced,
    mermin_state,
    oat_reduced_closed_form,
)

SPEC_PATTERN = re.compile(r"^(?P<family>[a-z]+[12]?):(?P<params>.+)$")

FAMILIES = {
    "oat": {"N": int},
    "mermin1": {"N": int},
    "mermin2": {"N": int},
    "ghz": {"N": int, "alpha": float},
    "product": {"N": int, "b": int},
}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    n: int
    params: dict = field(default_factory=dict)

    def __str__(self):
        extra = "".join(f",{key}={value}" for key, value in sorted(self.params.items()))
        return f"{self.family}:N={self.n}{extra}"

    @property
    def has_dynamics(self):
        return self.family in ("oat", "mermin1", "mermin2")

    def with_n(self, n):
        return replace(self, n=n)

    def dynamics(self):
        if self.family == "oat":
            return DynamicsModel.oat(self.n)
        if self.family.startswith("mermin"):
            return DynamicsModel.mermin(self.n, int(self.family[-1]))
        raise ValidationError(f"'{self.family}' describes a fixed state, not a dynamics")

    def reduced_at(self, theta=0.0):
        """Closed-form reduced data of the specified state at theta."""
        if self.family == "oat":
            return oat_reduced_closed_form(self.n, theta)
        if self.family.startswith("mermin"):
            return ghz_reduced(mermin_state(self.n, theta, int(self.family[-1])))
        if self.family == "ghz":
            return ghz_reduced(AsymmetricGHZ.from_alpha(self.n, self.params["alpha"]))
        sign = 1.0 if self.params["b"] == 0 else -1.0
        return ReducedData.symmetric(self.n, [0.0, 0.0, sign], np.diag([0.0, 0.0, 1.0]))


def parse_model_spec(text):
    """
    Parse ``text`` into a ModelSpec, raising ValidationError with a usage
    message on any malformed input
    """
    match = SPEC_PATTERN.match(text.strip())
    if not match or match["family"] not in FAMILIES:
        raise ValidationError(
            f"Invalid model spec '{text}'; expected one of "
            "oat:N=<int>, mermin<1|2>:N=<int>, ghz:N=<int>,alpha=<float>, product:N=<int>,b=<0|1>"
        )
    family = match["family"]
    expected = FAMILIES[family]

    values = {}
    for item in match["params"].split(","):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in expected:
            raise ValidationError(f"Unexpected parameter '{item}' for '{family}'")
        if key in values:
            raise ValidationError(f"Parameter '{key}' given twice")
        try:
            values[key] = expected[key](raw.strip())
        except ValueError:
            raise ValidationError(f"Parameter '{key}' must be {expected[key].__name__}")

    missing = set(expected) - set(values)
    if missing:
        raise ValidationError(f"Missing parameters for '{family}': {', '.join(sorted(missing))}")

    n = values.pop("N")
    minimum = 1 if family == "product" else 2
    if n < minimum:
        raise ValidationError(f"'{family}' needs N >= {minimum}")
    if family == "product" and values["b"] not in (0, 1):
        raise ValidationError("Product states take b=0 or b=1")
    if family == "ghz" and not -1 <= values["alpha"] <= 1:
        raise ValidationError("GHZ alpha must lie in [-1, 1]")
    return ModelSpec(family, n, values)
