"""Exact trigonometric-polynomial algebra.

Every series coefficient in this package is an exact ``Fraction``.  Two
closed families of functions on (0, pi) carry the whole computation:

* ``TrigPoly`` -- sums  b_k sin^{2k-1}(t) + cos(t) a_k sin^{2k-1}(t),
  k >= 1.  Each order of the superpotential series lives here.
* ``SourceSeries`` -- sums  c + (h_p + g_p cos t) sin^{2p-2}(t), h for
  p >= 2, g for p >= 1.  Products and derivatives of TrigPolys land here
  after reducing cos^2 = 1 - sin^2.

``TrigExpr`` is the general workhorse underneath both: a finite sum of
c * cos^i(t) * sin^j(t) with i in {0, 1} and j any integer (negative j
covers csc/cot terms).  It is closed under products and differentiation,
so exact residual identities reduce to "all coefficients vanish".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .context import DOUBLE, Context
from .errors import DomainError

Rational = Fraction


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {value!r} as a rational 'p/q'") from exc
    raise DomainError(f"cannot interpret {value!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    """Serialise as 'p/q', or just 'p' for integers."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def wallis_ratio(x: Fraction, k: int) -> Fraction:
    """Product prod_{j=0..k} (x+1-2j)/(x-2j), exact.

    These partial Wallis-type ratios arise when an even sine power under
    an antiderivative is reduced step by step to a lower one.  ``x`` may
    be any rational with no factor x, x-2, ..., x-2k equal to zero.
    """
    if k < 0:
        raise DomainError(f"wallis_ratio needs k >= 0, got {k}")
    x = as_rational(x)
    out = Fraction(1)
    for j in range(k + 1):
        den = x - 2 * j
        if den == 0:
            raise DomainError(f"wallis_ratio({x}, {k}): factor x - {2 * j} vanishes")
        out *= (x + 1 - 2 * j) / den
    return out


def _clean(coeffs: dict[int, Fraction], min_key: int, what: str) -> dict[int, Fraction]:
    out = {}
    for key in sorted(coeffs):
        val = coeffs[key]
        if key < min_key:
            raise DomainError(f"{what} index {key} below minimum {min_key}")
        if val != 0:
            out[key] = Fraction(val)
    return out


@dataclass(frozen=True)
class TrigPoly:
    """b_k sin^{2k-1} + cos * a_k sin^{2k-1}; coefficients exact, no zeros stored.

    ``cos_part`` holds the a_k, ``sin_part`` the b_k.  Instances are treated
    as immutable values; all operations return new objects.
    """

    cos_part: dict[int, Fraction] = field(default_factory=dict)
    sin_part: dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "cos_part", _clean(self.cos_part, 1, "cos_part"))
        object.__setattr__(self, "sin_part", _clean(self.sin_part, 1, "sin_part"))

    @staticmethod
    def zero() -> TrigPoly:
        return TrigPoly()

    def is_zero(self) -> bool:
        return not self.cos_part and not self.sin_part

    def __add__(self, other: TrigPoly) -> TrigPoly:
        a = dict(self.cos_part)
        b = dict(self.sin_part)
        for k, v in other.cos_part.items():
            a[k] = a.get(k, Fraction(0)) + v
        for k, v in other.sin_part.items():
            b[k] = b.get(k, Fraction(0)) + v
        return TrigPoly(a, b)

    def scaled(self, factor: Fraction) -> TrigPoly:
        factor = as_rational(factor)
        return TrigPoly(
            {k: factor * v for k, v in self.cos_part.items()},
            {k: factor * v for k, v in self.sin_part.items()},
        )

    def rescaled(self, cos_scale: dict[int, Fraction], sin_scale: dict[int, Fraction]) -> TrigPoly:
        """Multiply each coefficient by a per-index scale (default 1)."""
        return TrigPoly(
            {k: v * cos_scale.get(k, Fraction(1)) for k, v in self.cos_part.items()},
            {k: v * sin_scale.get(k, Fraction(1)) for k, v in self.sin_part.items()},
        )

    def eval(self, theta, ctx: Context = DOUBLE):
        """Floating evaluation; exact coefficients convert at call time."""
        s = ctx.sin(theta)
        c = ctx.cos(theta)
        total = ctx.num(0)
        for k, v in self.sin_part.items():
            total += ctx.from_fraction(v) * s ** (2 * k - 1)
        for k, v in self.cos_part.items():
            total += ctx.from_fraction(v) * c * s ** (2 * k - 1)
        return total

    def to_expr(self) -> TrigExpr:
        terms = {}
        for k, v in self.sin_part.items():
            terms[(0, 2 * k - 1)] = v
        for k, v in self.cos_part.items():
            terms[(1, 2 * k - 1)] = v
        return TrigExpr(terms)


@dataclass(frozen=True)
class SourceSeries:
    """c + sum_p h_p sin^{2p-2} + cos * sum_p g_p sin^{2p-2}.

    ``h`` indices start at 2 (a p = 1 contribution is the constant and is
    folded into ``constant`` on construction); ``g`` indices start at 1
    because derivatives produce a bare cos term.
    """

    constant: Fraction = Fraction(0)
    h: dict[int, Fraction] = field(default_factory=dict)
    g: dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        h = dict(self.h)
        const = as_rational(self.constant) + h.pop(1, Fraction(0))
        object.__setattr__(self, "constant", const)
        object.__setattr__(self, "h", _clean(h, 2, "h"))
        object.__setattr__(self, "g", _clean(self.g, 1, "g"))

    @staticmethod
    def zero() -> SourceSeries:
        return SourceSeries()

    def is_zero(self) -> bool:
        return self.constant == 0 and not self.h and not self.g

    def __add__(self, other: SourceSeries) -> SourceSeries:
        h = dict(self.h)
        g = dict(self.g)
        for k, v in other.h.items():
            h[k] = h.get(k, Fraction(0)) + v
        for k, v in other.g.items():
            g[k] = g.get(k, Fraction(0)) + v
        return SourceSeries(self.constant + other.constant, h, g)

    def scaled(self, factor: Fraction) -> SourceSeries:
        factor = as_rational(factor)
        return SourceSeries(
            factor * self.constant,
            {k: factor * v for k, v in self.h.items()},
            {k: factor * v for k, v in self.g.items()},
        )

    def eval(self, theta, ctx: Context = DOUBLE):
        s = ctx.sin(theta)
        c = ctx.cos(theta)
        total = ctx.from_fraction(self.constant)
        for p, v in self.h.items():
            total += ctx.from_fraction(v) * s ** (2 * p - 2)
        for p, v in self.g.items():
            total += ctx.from_fraction(v) * c * s ** (2 * p - 2)
        return total

    def check_parity_bounds(self, n: int) -> None:
        """Assert the vanishing pattern of an order-n product convolution:
        even n: g_p = 0 for p > n/2 and h_p = 0 for p > n/2 + 1;
        odd n: both vanish for p > (n+1)/2.
        """
        if n % 2 == 0:
            g_max, h_max = n // 2, n // 2 + 1
        else:
            g_max = h_max = (n + 1) // 2
        bad_g = [p for p in self.g if p > g_max]
        bad_h = [p for p in self.h if p > h_max]
        if bad_g or bad_h:
            raise DomainError(
                f"order-{n} source violates parity bounds: g indices {bad_g}, h indices {bad_h}"
            )

    def to_expr(self) -> TrigExpr:
        terms = {(0, 0): self.constant}
        for p, v in self.h.items():
            terms[(0, 2 * p - 2)] = v
        for p, v in self.g.items():
            terms[(1, 2 * p - 2)] = terms.get((1, 2 * p - 2), Fraction(0)) + v
        return TrigExpr(terms)


def trig_product_fold(u: TrigPoly, v: TrigPoly) -> SourceSeries:
    """Exact product u*v with cos^2 reduced to 1 - sin^2.

    The result's h_p collects the no-cos convolution (including the
    -a a shift from the cos^2 fold) and g_p the single-cos convolution.
    """
    h: dict[int, Fraction] = {}
    g: dict[int, Fraction] = {}

    def bump(table, key, val):
        if val != 0:
            table[key] = table.get(key, Fraction(0)) + val

    for i, cu in u.sin_part.items():
        for j, cv in v.sin_part.items():
            bump(h, i + j, cu * cv)
    for i, cu in u.cos_part.items():
        for j, cv in v.cos_part.items():
            bump(h, i + j, cu * cv)
            bump(h, i + j + 1, -cu * cv)
    for i, cu in u.sin_part.items():
        for j, cv in v.cos_part.items():
            bump(g, i + j, cu * cv)
    for i, cu in u.cos_part.items():
        for j, cv in v.sin_part.items():
            bump(g, i + j, cu * cv)
    return SourceSeries(Fraction(0), h, g)


def trig_differentiate(u: TrigPoly) -> SourceSeries:
    """Exact d/dtheta of a TrigPoly, re-expressed in the source basis.

    d[b sin^{2k-1}] = (2k-1) b cos sin^{2k-2}        -> g_k
    d[a cos sin^{2k-1}] = (2k-1) a sin^{2k-2} - 2k a sin^{2k}
                                                      -> h_k, h_{k+1}
    (the k = 1 h-contribution is a constant).
    """
    h: dict[int, Fraction] = {}
    g: dict[int, Fraction] = {}
    for k, b in u.sin_part.items():
        g[k] = g.get(k, Fraction(0)) + (2 * k - 1) * b
    for k, a in u.cos_part.items():
        h[k] = h.get(k, Fraction(0)) + (2 * k - 1) * a
        h[k + 1] = h.get(k + 1, Fraction(0)) - 2 * k * a
    return SourceSeries(Fraction(0), h, g)


def sin_odd_antiderivative_coeffs(k: int) -> list[Fraction]:
    """Coefficients q_i with  int_0^t sin^{2k-1} = F(1) - F(cos t),
    F(u) = sum_i q_i u^{2i+1}.  Returned as [q_0, ..., q_{k-1}].
    """
    if k < 1:
        raise DomainError(f"sine power index must be >= 1, got {k}")
    return [Fraction((-1) ** i * comb(k - 1, i), 2 * i + 1) for i in range(k)]


def sin_odd_antiderivative(k: int, theta, ctx: Context = DOUBLE):
    """int_0^theta sin^{2k-1}(t) dt via the closed polynomial in cos(theta).

    Anchored at theta = 0; valid for theta in [0, pi].
    """
    tf = float(theta)
    if tf < 0.0 or tf > float(ctx.pi) * (1 + 1e-12):
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    coeffs = sin_odd_antiderivative_coeffs(k)
    c = ctx.cos(theta)
    total = ctx.num(0)
    for i, q in enumerate(coeffs):
        total += ctx.from_fraction(q) * (1 - c ** (2 * i + 1))
    return total


class TrigExpr:
    """Finite sum of coeff * cos^i * sin^j, i in {0,1}, j in Z.

    Closed under +, -, * and d/dtheta, with cos^2 -> 1 - sin^2 applied at
    construction, so exact identities reduce to an empty term map.
    Coefficients may be Fractions (exact work) or floats/mpf (assembled
    evaluators at a fixed beta).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[int, int], object] | None = None):
        canonical: dict[tuple[int, int], object] = {}
        stack = sorted((terms or {}).items())
        while stack:
            (i, j), v = stack.pop()
            if i >= 2:
                # cos^i sin^j = cos^{i-2} sin^j - cos^{i-2} sin^{j+2}
                stack.append(((i - 2, j), v))
                stack.append(((i - 2, j + 2), -v))
                continue
            key = (i, j)
            canonical[key] = canonical.get(key, 0) + v
        self.terms = {k: v for k, v in canonical.items() if v != 0}

    @staticmethod
    def zero() -> TrigExpr:
        return TrigExpr()

    @staticmethod
    def constant(value) -> TrigExpr:
        return TrigExpr({(0, 0): value})

    @staticmethod
    def cot_csc(cot_coeff, csc_coeff) -> TrigExpr:
        """p*cot + q*csc as cos*sin^-1 and sin^-1 terms."""
        return TrigExpr({(1, -1): cot_coeff, (0, -1): csc_coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: TrigExpr) -> TrigExpr:
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return TrigExpr(terms)

    def __sub__(self, other: TrigExpr) -> TrigExpr:
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) - v
        return TrigExpr(terms)

    def __neg__(self) -> TrigExpr:
        return TrigExpr({k: -v for k, v in self.terms.items()})

    def __mul__(self, other: TrigExpr) -> TrigExpr:
        terms: dict[tuple[int, int], object] = {}
        for (i1, j1), v1 in self.terms.items():
            for (i2, j2), v2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                terms[key] = terms.get(key, 0) + v1 * v2
        return TrigExpr(terms)

    def scaled(self, factor) -> TrigExpr:
        return TrigExpr({k: factor * v for k, v in self.terms.items()})

    def derivative(self) -> TrigExpr:
        """d/dtheta: d(cos^i sin^j) = -i cos^{i-1} sin^{j+1} + j cos^{i+1} sin^{j-1}."""
        terms: dict[tuple[int, int], object] = {}

        def bump(key, val):
            terms[key] = terms.get(key, 0) + val

        for (i, j), v in self.terms.items():
            if i:
                bump((i - 1, j + 1), -i * v)
            if j:
                bump((i + 1, j - 1), j * v)
        return TrigExpr(terms)

    def eval(self, theta, ctx: Context = DOUBLE):
        s = ctx.sin(theta)
        c = ctx.cos(theta)
        total = ctx.num(0)
        for (i, j), v in sorted(self.terms.items()):
            coeff = ctx.from_fraction(v) if isinstance(v, Fraction) else v
            term = coeff * s ** j
            if i:
                term *= c
            total += term
        return total

    def to_float(self, ctx: Context = DOUBLE) -> TrigExpr:
        """Convert exact coefficients to the context's scalars."""
        return TrigExpr({k: ctx.from_fraction(v) if isinstance(v, Fraction) else ctx.num(v)
                         for k, v in self.terms.items()})

    def max_abs(self) -> Fraction:
        return max((abs(v) for v in self.terms.values()), default=Fraction(0))

    def __repr__(self):
        bits = [f"{v}*cos^{i}*sin^{j}" for (i, j), v in sorted(self.terms.items())]
        return "TrigExpr(" + (" + ".join(bits) if bits else "0") + ")"
