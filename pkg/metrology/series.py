"""
Second-order θ-expansions of closed-form quantities.

A ``Jet`` carries a quantity together with its exact first and second
derivatives with respect to θ. Its value is split as ``anchor + offset``:
the anchor is the exact value at θ = 0 and the offset is computed directly
(``expm1``/``log1p``), so sums whose anchors cancel keep their full relative
precision for small θ.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Jet:
    anchor: object
    offset: object
    first: object
    second: object

    @classmethod
    def constant(cls, value):
        zero = np.zeros_like(value, dtype=float) if np.ndim(value) else 0.0
        return cls(value, zero, zero, zero)

    @classmethod
    def stack(cls, jets, shape):
        """Assemble scalar jets into an array jet of the given shape."""

        def gather(name):
            return np.array([getattr(jet, name) for jet in jets], dtype=float).reshape(shape)

        return cls(gather("anchor"), gather("offset"), gather("first"), gather("second"))

    @property
    def value(self):
        return self.anchor + self.offset

    def _lift(self, other):
        return other if isinstance(other, Jet) else Jet.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        return Jet(
            self.anchor + other.anchor,
            self.offset + other.offset,
            self.first + other.first,
            self.second + other.second,
        )

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.anchor, -self.offset, -self.first, -self.second)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def _product(self, other, op):
        return Jet(
            op(self.anchor, other.anchor),
            op(self.anchor, other.offset)
            + op(self.offset, other.anchor)
            + op(self.offset, other.offset),
            op(self.first, other.value) + op(self.value, other.first),
            op(self.second, other.value)
            + 2 * op(self.first, other.first)
            + op(self.value, other.second),
        )

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(
                self.anchor * other,
                self.offset * other,
                self.first * other,
                self.second * other,
            )
        return self._product(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        return self._product(self._lift(other), np.matmul)

    @property
    def T(self):
        return Jet(
            np.transpose(self.anchor),
            np.transpose(self.offset),
            np.transpose(self.first),
            np.transpose(self.second),
        )

    def _reduce(self, fn):
        return Jet(fn(self.anchor), fn(self.offset), fn(self.first), fn(self.second))

    def sum(self):
        return self._reduce(lambda part: float(np.sum(part)))

    def trace(self):
        return self._reduce(lambda part: float(np.trace(part)))

    def __getitem__(self, index):
        return Jet(
            self.anchor[index], self.offset[index], self.first[index], self.second[index]
        )


def constant(value):
    return Jet.constant(value)


def cos_power(m, omega, theta):
    """
    cos^m(omega * theta) for a non-negative integer power m, anchored at 1
    """
    if m == 0:
        return Jet.constant(1.0)

    c = math.cos(omega * theta)
    s = math.sin(omega * theta)
    if c > 0:
        # 1 - cos x = 2 sin^2(x / 2)
        half = math.sin(omega * theta / 2)
        offset = math.expm1(m * math.log1p(-2.0 * half * half))
    else:
        offset = c**m - 1.0

    first = -m * omega * c ** (m - 1) * s
    second = -m * omega**2 * c**m
    if m >= 2:
        second += m * (m - 1) * omega**2 * c ** (m - 2) * s * s
    return Jet(1.0, offset, first, second)


def sine(omega, theta):
    """sin(omega * theta), anchored at 0."""
    return Jet(
        0.0,
        math.sin(omega * theta),
        omega * math.cos(omega * theta),
        -(omega**2) * math.sin(omega * theta),
    )
