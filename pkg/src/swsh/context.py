"""Arithmetic contexts: the same closed-form evaluators run in double
precision (default) or in mpmath arbitrary precision.

High-order convergence measurements need more resolution than binary64
offers (a beta^9 tail at beta = 0.025 sits below the ulp of the quantity
it perturbs), so every evaluator takes an optional context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import mpmath


@dataclass(frozen=True)
class Context:
    """Bundle of scalar operations used by the numeric evaluators."""

    name: str
    num: Callable[[Any], Any]          # exact Fraction/int/float -> scalar
    sin: Callable[[Any], Any]
    cos: Callable[[Any], Any]
    sqrt: Callable[[Any], Any]
    exp: Callable[[Any], Any]
    log: Callable[[Any], Any]
    power: Callable[[Any, Any], Any]
    pi: Any
    eps: float

    def from_fraction(self, q: Fraction):
        return self.num(q)


def _double_num(value) -> float:
    if isinstance(value, Fraction):
        return value.numerator / value.denominator
    return float(value)


DOUBLE = Context(
    name="double",
    num=_double_num,
    sin=math.sin,
    cos=math.cos,
    sqrt=math.sqrt,
    exp=math.exp,
    log=math.log,
    power=math.pow,
    pi=math.pi,
    eps=2.220446049250313e-16,
)


def mp_context(dps: int = 40) -> Context:
    """A context backed by mpmath at ``dps`` decimal digits."""

    mp = mpmath.mp.clone()
    mp.dps = dps

    def num(value):
        if isinstance(value, Fraction):
            return mp.mpf(value.numerator) / mp.mpf(value.denominator)
        if isinstance(value, float):
            return mp.mpf(value)
        return mp.mpf(value)

    return Context(
        name=f"mp{dps}",
        num=num,
        sin=mp.sin,
        cos=mp.cos,
        sqrt=mp.sqrt,
        exp=mp.exp,
        log=mp.log,
        power=lambda b, e: mp.power(b, e),
        pi=mp.pi,
        eps=float(mp.mpf(10) ** (1 - dps)),
    )
