"""Extended reals with explicit infinite sentinels.

Spectra take the value minus infinity outside their domain and Bowen roots
can be plus infinity.  Both are represented by a dedicated variant so that
no NaN can leak into suprema or comparisons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

_KINDS = ("neg_inf", "finite", "pos_inf")


@total_ordering
@dataclass(frozen=True)
class ExtendedReal:
    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "finite" and not math.isfinite(self.value):
            raise ValueError("finite ExtendedReal needs a finite value")

    @classmethod
    def of(cls, x: float | ExtendedReal) -> ExtendedReal:
        if isinstance(x, ExtendedReal):
            return x
        x = float(x)
        if math.isnan(x):
            raise ValueError("NaN is not an extended real")
        if x == math.inf:
            return POS_INF
        if x == -math.inf:
            return NEG_INF
        return cls("finite", x)

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_neg_inf(self) -> bool:
        return self.kind == "neg_inf"

    @property
    def is_pos_inf(self) -> bool:
        return self.kind == "pos_inf"

    def __float__(self) -> float:
        if self.kind == "neg_inf":
            return -math.inf
        if self.kind == "pos_inf":
            return math.inf
        return self.value

    def _key(self):
        return (_KINDS.index(self.kind), self.value if self.is_finite else 0.0)

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            if isinstance(other, float) and math.isnan(other):
                return False
            other = ExtendedReal.of(other)
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        if isinstance(other, (int, float)):
            other = ExtendedReal.of(other)
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __neg__(self) -> ExtendedReal:
        if self.kind == "finite":
            return ExtendedReal("finite", -self.value)
        return POS_INF if self.kind == "neg_inf" else NEG_INF

    def __add__(self, other) -> ExtendedReal:
        other = ExtendedReal.of(other)
        if self.is_finite and other.is_finite:
            return ExtendedReal.of(self.value + other.value)
        kinds = {self.kind, other.kind} - {"finite"}
        if kinds == {"neg_inf", "pos_inf"}:
            raise ArithmeticError("inf - inf is undefined")
        return NEG_INF if "neg_inf" in kinds else POS_INF

    __radd__ = __add__

    def __sub__(self, other) -> ExtendedReal:
        return self + (-ExtendedReal.of(other))

    def __rsub__(self, other) -> ExtendedReal:
        return ExtendedReal.of(other) + (-self)

    def scale(self, c: float) -> ExtendedReal:
        """Multiply by a real constant; 0 times infinity is an error."""
        if self.is_finite:
            return ExtendedReal.of(self.value * c)
        if c == 0:
            raise ArithmeticError("0 * inf is undefined")
        return self if c > 0 else -self

    def render(self, digits: int = 12) -> str:
        if self.kind == "neg_inf":
            return "-inf"
        if self.kind == "pos_inf":
            return "inf"
        return f"{self.value:.{digits}f}"

    def __repr__(self) -> str:
        return f"ExtendedReal({self.render(17) if self.is_finite else self.render()})"


NEG_INF = ExtendedReal("neg_inf")
POS_INF = ExtendedReal("pos_inf")


def finite(x: float) -> ExtendedReal:
    return ExtendedReal.of(x)


def ext_max(values) -> ExtendedReal:
    values = [ExtendedReal.of(v) for v in values]
    if not values:
        return NEG_INF
    return max(values)
