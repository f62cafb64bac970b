"""Order-by-order construction of the superpotential series.

Order 0 is the closed cot/csc seed, order 1 a one-term closed form, and
order 2 is obtained by direct linear matching of its balance equation
(its source carries an explicit cos^2 term that the general machinery
does not cover).  Orders n >= 3 run the general recursion: convolve the
lower orders into an h/g source, fix the energy coefficient by requiring
the non-polynomial antiderivative term to drop out, then read off the
new coefficients.

Every order is proved correct afterwards by an exact residual identity
in the full trigonometric algebra, which is an independent code path
from the construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    SourceSeries,
    TrigExpr,
    TrigPoly,
    as_rational,
    format_rational,
    trig_product_fold,
    wallis_ratio,
)
from .context import DOUBLE, Context
from .errors import DomainError, StateError, VerificationError

SPIN = Fraction(1, 2)
DEFAULT_ORDER = 16


def validate_m(m) -> Fraction:
    """Accept any rational m > 0 (half-integers are the physical cases)."""
    m = as_rational(m)
    if m <= 0:
        raise DomainError(f"azimuthal index m must be positive, got {m}")
    return m


def seed_order0(m) -> tuple[tuple[Fraction, Fraction], Fraction]:
    """Zeroth order: W0 = -(m+1/2) cot - (1/2) csc, energy m^2 + m - 3/4."""
    m = validate_m(m)
    params = (-(m + Fraction(1, 2)), Fraction(-1, 2))
    return params, m * m + m - Fraction(3, 4)


def seed_order1(m) -> tuple[TrigPoly, Fraction]:
    """First order: W1 = -sin/(2m+2) and the matching energy -1/(2m+2)."""
    m = validate_m(m)
    b11 = Fraction(-1) / (2 * m + 2)
    return TrigPoly({}, {1: b11}), b11


def seed_order2(m, w1: TrigPoly) -> tuple[TrigPoly, Fraction]:
    """Second order by direct coefficient matching.

    The balance at this order reads, coefficient by coefficient,
        cos sin^{2p-2}:  a_p + (2m+2p) b_p = g_p
        sin^{2p-2}:      b_p + (2m+2p) a_p - (2m+2p-1) a_{p-1} = h_p
        constant:        b_1 + (2m+2) a_1 = c
    with source c = E2 + 1, h_2 = b11^2 - 1 after folding cos^2.
    """
    m = validate_m(m)
    b11 = w1.sin_part.get(1, Fraction(0))
    h2 = b11 * b11 - 1
    a1 = -h2 / (2 * m + 3)
    b1 = -a1 / (2 * m + 2)
    e2 = b1 + (2 * m + 2) * a1 - 1
    return TrigPoly({1: a1}, {1: b1}), e2


@dataclass(frozen=True)
class SuperpotentialSeries:
    """Truncated series: W0 parameters, per-order TrigPolys and energies.

    ``w[0]`` is a zero placeholder so ``w[n]`` is the order-n term;
    ``energy[n]`` is the order-n energy coefficient, n = 0..order.
    """

    m: Fraction
    order: int
    w0_params: tuple[Fraction, Fraction]
    w: tuple[TrigPoly, ...]
    energy: tuple[Fraction, ...]
    spin: Fraction = SPIN

    def w_order(self, n: int) -> TrigPoly:
        if not 1 <= n <= self.order:
            raise StateError(f"order {n} not built (series order {self.order})")
        return self.w[n]

    def w0_expr(self) -> TrigExpr:
        cot, csc = self.w0_params
        return TrigExpr.cot_csc(cot, csc)

    def energy_sum(self, beta, n_max: int | None = None, ctx: Context = DOUBLE):
        """Float partial sum  sum_n energy[n] beta^n, n <= n_max."""
        n_max = self.order if n_max is None else min(n_max, self.order)
        beta = ctx.num(beta)
        total = ctx.num(0)
        for n in range(n_max, -1, -1):
            total = total * beta + ctx.from_fraction(self.energy[n])
        return total

    def to_table(self) -> dict:
        """JSON-ready coefficient table with rationals as 'p/q' strings."""
        return {
            "m": format_rational(self.m),
            "s": format_rational(self.spin),
            "order": self.order,
            "energy": [format_rational(e) for e in self.energy],
            "w": [
                {
                    "n": n,
                    "a": {str(k): format_rational(v) for k, v in sorted(self.w[n].cos_part.items())},
                    "b": {str(k): format_rational(v) for k, v in sorted(self.w[n].sin_part.items())},
                }
                for n in range(1, self.order + 1)
            ],
        }


def source_series(n: int, prior: SuperpotentialSeries) -> SourceSeries:
    """Order-n source: convolution of lower orders, cos^2 folded at n = 2."""
    if n < 2:
        raise DomainError(f"source_series needs n >= 2, got {n}")
    if prior.order < n - 1:
        raise StateError(f"orders below {n} missing (built up to {prior.order})")
    src = SourceSeries.zero()
    for k in range(1, n):
        src = src + trig_product_fold(prior.w[k], prior.w[n - k])
    if n == 2:
        # cos^2 = 1 - sin^2 contributes a constant and an h_2 shift.
        src = src + SourceSeries(Fraction(1), {2: Fraction(-1)}, {})
    src.check_parity_bounds(n)
    return src


def _transfer_coeffs(n: int, src: SourceSeries, m: Fraction) -> dict[int, Fraction]:
    """e_p = (2m+2p)/(2m+2p-1) (h_p - g_p/(2m+2p)) for p = 2 .. n//2+1."""
    p_max = n // 2 + 1
    out = {}
    for p in range(2, p_max + 1):
        hp = src.h.get(p, Fraction(0))
        gp = src.g.get(p, Fraction(0))
        out[p] = (2 * m + 2 * p) / (2 * m + 2 * p - 1) * (hp - gp / (2 * m + 2 * p))
    return out


def energy_correction(n: int, src: SourceSeries, m) -> Fraction:
    """Energy coefficient forced by boundary finiteness.

    The non-closed antiderivative acquires the coefficient
    c + sum_p e_p (2m+1) R(2m+2p, p-1)/(2m+2p+1)  (R the Wallis ratio),
    which must vanish; c is the source constant, so the energy is the
    negated sum minus any folded constant.
    """
    m = validate_m(m)
    e = _transfer_coeffs(n, src, m)
    total = Fraction(0)
    for p, ep in e.items():
        total += ep * (2 * m + 1) * wallis_ratio(2 * m + 2 * p, p - 1) / (2 * m + 2 * p + 1)
    return -total - src.constant


def superpotential_order(n: int, src: SourceSeries, energy: Fraction, m) -> TrigPoly:
    """Order-n term from the source and its energy coefficient.

    a_l = -sum_{p=l+1} e_p (2m+2l) R(2m+2p, p-l) / ((2m+2l+1)(2m+2p+1)),
    b_1 = a_1 - c/(2m+1) with c the full source constant,
    b_l = a_l - a_{l-1} + (g_l - h_l)/(2m+2l-1) for l >= 2.

    For even n the formulas produce an out-of-range top coefficient that
    must cancel identically; this is asserted, not assumed.
    """
    m = validate_m(m)
    p_max = n // 2 + 1
    e = _transfer_coeffs(n, src, m)

    def a_coeff(l: int) -> Fraction:
        total = Fraction(0)
        for p in range(l + 1, p_max + 1):
            total += (
                e[p]
                * (2 * m + 2 * l)
                * wallis_ratio(2 * m + 2 * p, p - l)
                / ((2 * m + 2 * l + 1) * (2 * m + 2 * p + 1))
            )
        return -total

    a = {l: a_coeff(l) for l in range(1, n // 2 + 1)}
    c_full = energy + src.constant
    b = {1: a.get(1, Fraction(0)) - c_full / (2 * m + 1)}
    for l in range(2, (n + 1) // 2 + 1):
        b[l] = (
            a.get(l, Fraction(0))
            - a.get(l - 1, Fraction(0))
            + (src.g.get(l, Fraction(0)) - src.h.get(l, Fraction(0))) / (2 * m + 2 * l - 1)
        )
    if n % 2 == 0:
        top = n // 2 + 1
        a_top = a_coeff(top)
        b_top = (
            a_top
            - a.get(top - 1, Fraction(0))
            + (src.g.get(top, Fraction(0)) - src.h.get(top, Fraction(0))) / (2 * m + 2 * top - 1)
        )
        if a_top != 0 or b_top != 0:
            raise VerificationError(
                f"even-order top coefficients failed to cancel at n={n}",
                details={"module": "series-engine", "operation": "superpotential_order",
                         "order": n, "indices": [top], "a_top": str(a_top), "b_top": str(b_top)},
            )
    return TrigPoly(a, b)


def build_series(m, order: int = DEFAULT_ORDER, verify: bool = True) -> SuperpotentialSeries:
    """Build all orders 0..order; optionally prove each order exactly.

    Order 2 is built twice (direct matching and the folded general path)
    and the two must agree coefficient for coefficient.
    """
    m = validate_m(m)
    if order < 0:
        raise DomainError(f"order must be >= 0, got {order}")
    w0_params, e0 = seed_order0(m)
    w: list[TrigPoly] = [TrigPoly.zero()]
    energy: list[Fraction] = [e0]

    series = SuperpotentialSeries(m, 0, w0_params, tuple(w), tuple(energy))
    if order >= 1:
        w1, e1 = seed_order1(m)
        w.append(w1)
        energy.append(e1)
        series = SuperpotentialSeries(m, 1, w0_params, tuple(w), tuple(energy))
    if order >= 2:
        w2_direct, e2_direct = seed_order2(m, w[1])
        src2 = source_series(2, series)
        e2_general = energy_correction(2, src2, m)
        w2_general = superpotential_order(2, src2, e2_general, m)
        if e2_direct != e2_general or w2_direct != w2_general:
            raise VerificationError(
                "order-2 direct matching and folded general path disagree",
                details={"module": "series-engine", "operation": "build_series", "order": 2,
                         "direct_energy": str(e2_direct), "general_energy": str(e2_general)},
            )
        w.append(w2_general)
        energy.append(e2_general)
        series = SuperpotentialSeries(m, 2, w0_params, tuple(w), tuple(energy))
    for n in range(3, order + 1):
        src = source_series(n, series)
        en = energy_correction(n, src, m)
        w.append(superpotential_order(n, src, en, m))
        energy.append(en)
        series = SuperpotentialSeries(m, n, w0_params, tuple(w), tuple(energy))

    if verify:
        for n in range(0, order + 1):
            residual = riccati_residual(series, n)
            if not residual.is_zero():
                raise VerificationError(
                    f"nonzero order-{n} residual",
                    details={"module": "series-engine", "operation": "riccati_residual",
                             "order": n,
                             "indices": sorted(residual.terms),
                             "coefficients": {str(k): str(v) for k, v in sorted(residual.terms.items())}},
                )
        crosscheck_identities(series)
    return series


def riccati_residual(series: SuperpotentialSeries, n: int, energy: Fraction | None = None) -> TrigExpr:
    """Exact residual of the order-n balance; the zero expression on success.

    Order 0 checks W0' - W0^2 against its source; orders n >= 1 check
    Wn' - 2 W0 Wn - f_n with f_n assembled directly in the general
    trigonometric algebra (independent of the h/g convolution used to
    build the series).  ``energy`` overrides the stored coefficient, so
    alternative printed values can be probed.
    """
    if n > series.order:
        raise StateError(f"order {n} not built (series order {series.order})")
    m = series.m
    s = series.spin
    e_n = series.energy[n] if energy is None else as_rational(energy)
    w0 = series.w0_expr()
    if n == 0:
        # centrifugal term ((m + s cos)^2 - 1/4) / sin^2
        centrifugal = TrigExpr({(0, -2): m * m - Fraction(1, 4), (1, -2): 2 * m * s, (2, -2): s * s})
        f0 = TrigExpr.constant(e_n + s + Fraction(1, 4)) - centrifugal
        return w0.derivative() - w0 * w0 - f0
    wn = series.w[n].to_expr()
    lhs = wn.derivative() - (w0 * wn).scaled(2)
    f = TrigExpr.constant(e_n)
    if n == 1:
        f = f + TrigExpr({(1, 0): -2 * s})
    elif n == 2:
        w1 = series.w[1].to_expr()
        f = f + TrigExpr({(2, 0): Fraction(1)}) + w1 * w1
    else:
        for k in range(1, n):
            f = f + series.w[k].to_expr() * series.w[n - k].to_expr()
    return lhs - f


def crosscheck_identities(series: SuperpotentialSeries) -> dict:
    """Exact identities linking coefficients, sources and energies.

    For every built order: b_l = (g_l - a_l)/(2m+2l) for l >= 2, and for
    n >= 3 also a_1 = (2m+2) E_n / ((2m+1)(2m+3)).  Order 2 is exempt
    from the a_1 identity (its source carries the explicit cos^2 term).
    Raises on any violation; returns a count report otherwise.
    """
    m = series.m
    violations = []
    checked_b = checked_a = 0
    for n in range(2, series.order + 1):
        src = source_series(n, series)
        poly = series.w[n]
        for l in range(2, (n + 1) // 2 + 1):
            expected = (src.g.get(l, Fraction(0)) - poly.cos_part.get(l, Fraction(0))) / (2 * m + 2 * l)
            actual = poly.sin_part.get(l, Fraction(0))
            checked_b += 1
            if expected != actual:
                violations.append({"identity": "b", "order": n, "index": l,
                                   "expected": str(expected), "actual": str(actual)})
        if n >= 3:
            expected = (2 * m + 2) * series.energy[n] / ((2 * m + 1) * (2 * m + 3))
            actual = poly.cos_part.get(1, Fraction(0))
            checked_a += 1
            if expected != actual:
                violations.append({"identity": "a1", "order": n, "index": 1,
                                   "expected": str(expected), "actual": str(actual)})
    if violations:
        raise VerificationError(
            "coefficient identities violated",
            details={"module": "series-engine", "operation": "crosscheck_identities",
                     "violations": violations},
        )
    return {"m": format_rational(m), "order": series.order,
            "b_identity_checked": checked_b, "a1_identity_checked": checked_a}
