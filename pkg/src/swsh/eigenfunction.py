"""Ground-state evaluation, equation residuals and the raising operator.

The ground state of the partner problem at parameter set (A00, B00,
per-order coefficient tables) is

    psi = N sin^{A00 (m+1/2)} tan^{B00/2}(theta/2)
            exp[- sum_n beta^n ( sum_k abar_{n,k} sin^{2k}/(2k)
                                + sum_k bbar_{n,k} P(2k-1, theta) )]

with P(2k-1, .) the anchored odd sine-power antiderivative.  Its
logarithmic derivative is exactly -W, so all derivatives used in the
residual checks come from closed forms, never from differencing.

Excited states are polynomial multiples Q(theta) * psi(base): applying
the raising operator  -d/dtheta + W  maps Q to  -Q' + (W + W_base) Q,
which stays inside the exact trigonometric algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .algebra import TrigExpr, TrigPoly, sin_odd_antiderivative
from .context import DOUBLE, Context
from .errors import DomainError
from .quadrature import integrate
from .series import SPIN, SuperpotentialSeries


@dataclass(frozen=True)
class GroundState:
    """Evaluable ground state; physical when a00 = b00 = 1 and the
    coefficient tables are the series' own."""

    series: SuperpotentialSeries
    beta: float
    norm: float = 1.0
    a00: Fraction = Fraction(1)
    b00: Fraction = Fraction(1)
    w_tables: tuple[TrigPoly, ...] | None = None

    @property
    def m(self) -> Fraction:
        return self.series.m

    @property
    def order(self) -> int:
        return self.series.order

    def tables(self) -> tuple[TrigPoly, ...]:
        return self.w_tables if self.w_tables is not None else self.series.w

    def _check_theta(self, theta):
        t = float(theta)
        if not 0.0 < t < float(DOUBLE.pi):
            raise DomainError(f"theta must lie strictly inside (0, pi), got {theta}")

    def log_psi_unnorm(self, theta, ctx: Context = DOUBLE):
        ln_sin = ctx.log(ctx.sin(theta))
        # tan(theta/2) from half angles; stable against 1 + cos rounding to 0
        half = theta / 2
        ln_tan_half = ctx.log(ctx.sin(half)) - ctx.log(ctx.cos(half))
        total = (
            ctx.from_fraction(self.a00 * (self.m + Fraction(1, 2))) * ln_sin
            + ctx.from_fraction(self.b00 / 2) * ln_tan_half
        )
        beta = ctx.num(self.beta)
        tables = self.tables()
        s = ctx.sin(theta)
        scale = beta
        for n in range(1, self.order + 1):
            poly = tables[n]
            if not poly.is_zero():
                inner = ctx.num(0)
                for k, a in sorted(poly.cos_part.items()):
                    inner += ctx.from_fraction(Fraction(a, 2 * k)) * s ** (2 * k)
                for k, b in sorted(poly.sin_part.items()):
                    inner += ctx.from_fraction(b) * sin_odd_antiderivative(k, theta, ctx)
                total -= scale * inner
            scale = scale * beta
        return total

    def psi(self, theta, ctx: Context = DOUBLE):
        self._check_theta(theta)
        return ctx.num(self.norm) * ctx.exp(self.log_psi_unnorm(theta, ctx))

    # uniform interface with LadderState
    def value(self, theta, ctx: Context = DOUBLE):
        return self.psi(theta, ctx)

    def w_expr(self, ctx: Context = DOUBLE) -> TrigExpr:
        """The superpotential at this state's parameters, assembled at
        fixed beta with the context's scalars."""
        terms = {
            (1, -1): -ctx.from_fraction(self.a00 * (self.m + Fraction(1, 2))),
            (0, -1): -ctx.from_fraction(self.b00 / 2),
        }
        beta = ctx.num(self.beta)
        tables = self.tables()
        scale = beta
        for n in range(1, self.order + 1):
            for k, b in sorted(tables[n].sin_part.items()):
                key = (0, 2 * k - 1)
                terms[key] = terms.get(key, ctx.num(0)) + scale * ctx.from_fraction(b)
            for k, a in sorted(tables[n].cos_part.items()):
                key = (1, 2 * k - 1)
                terms[key] = terms.get(key, ctx.num(0)) + scale * ctx.from_fraction(a)
            scale = scale * beta
        return TrigExpr(terms)

    def derivative(self, theta, ctx: Context = DOUBLE):
        """psi' = -W psi, exactly."""
        return -self.w_expr(ctx).eval(theta, ctx) * self.psi(theta, ctx)


def ground_state(series: SuperpotentialSeries, beta: float) -> GroundState:
    """The physical (all-ones) ground state at spheroidicity beta."""
    return GroundState(series=series, beta=float(beta))


def ground_psi(g: GroundState, theta, ctx: Context = DOUBLE):
    return g.psi(theta, ctx)


def ground_theta(g: GroundState, theta, ctx: Context = DOUBLE):
    """The original angular function: psi / sqrt(sin)."""
    return g.psi(theta, ctx) / ctx.sqrt(ctx.sin(theta))


def normalize(g: GroundState, rel_tol: float = 1e-12, order: int = 20) -> float:
    """L2 normalisation constant over (0, pi) in d(theta)."""
    bare = replace(g, norm=1.0)
    total = integrate(lambda t: bare.psi(t) ** 2, 0.0, float(DOUBLE.pi),
                      rel_tol=rel_tol, order=order)
    return 1.0 / total ** 0.5


def normalized(g: GroundState, rel_tol: float = 1e-12) -> GroundState:
    return replace(g, norm=normalize(g, rel_tol))


def potential_bracket(m: Fraction, beta, theta, ctx: Context = DOUBLE):
    """1/4 + s + beta^2 cos^2 - 2 s beta cos - ((m + s cos)^2 - 1/4)/sin^2."""
    s = ctx.from_fraction(SPIN)
    c = ctx.cos(theta)
    sn = ctx.sin(theta)
    beta = ctx.num(beta)
    mf = ctx.from_fraction(m)
    centrifugal = ((mf + s * c) ** 2 - ctx.from_fraction(Fraction(1, 4))) / (sn * sn)
    return ctx.from_fraction(Fraction(1, 4)) + s + beta * beta * c * c - 2 * s * beta * c - centrifugal


def schrodinger_residual(g: GroundState, grid, ctx: Context = DOUBLE):
    """Max |psi'' + (bracket + E(beta)) psi| over the grid, scaled by the
    grid sup of |psi| so the result is normalisation-invariant.

    psi'' comes from the exact relation psi'' = (W^2 - W') psi.
    """
    lo, hi = 0.05, float(DOUBLE.pi) - 0.05
    pts = [float(t) for t in grid]
    if any(t <= lo or t >= hi for t in pts):
        raise DomainError("residual grid must lie inside (0.05, pi - 0.05)")
    w = g.w_expr(ctx)
    w_sq = w * w
    w_prime = w.derivative()
    energy = g.series.energy_sum(g.beta, ctx=ctx)
    worst = ctx.num(0)
    sup = ctx.num(0)
    for t in pts:
        psi = g.psi(t, ctx)
        feature = w_sq.eval(t, ctx) - w_prime.eval(t, ctx) + potential_bracket(g.m, g.beta, t, ctx) + energy
        worst = max(worst, abs(feature * psi))
        sup = max(sup, abs(psi))
    return worst / sup


@dataclass(frozen=True)
class LadderState:
    """Q(theta) * psi(base): the closed form every raising chain lands in."""

    base: GroundState
    q: TrigExpr
    norm: float = 1.0

    def value(self, theta, ctx: Context = DOUBLE):
        return ctx.num(self.norm) * self.q.eval(theta, ctx) * self.base.psi(theta, ctx)

    def derivative(self, theta, ctx: Context = DOUBLE):
        w_b = self.base.w_expr(ctx)
        dq = self.q.derivative()
        coeff = dq.eval(theta, ctx) - self.q.eval(theta, ctx) * w_b.eval(theta, ctx)
        return ctx.num(self.norm) * coeff * self.base.psi(theta, ctx)

    def second_derivative(self, theta, ctx: Context = DOUBLE):
        w_b = self.base.w_expr(ctx)
        q = self.q
        dq = q.derivative()
        d2q = dq.derivative()
        coeff = (
            d2q.eval(theta, ctx)
            - 2 * dq.eval(theta, ctx) * w_b.eval(theta, ctx)
            + q.eval(theta, ctx) * ((w_b * w_b).eval(theta, ctx) - w_b.derivative().eval(theta, ctx))
        )
        return ctx.num(self.norm) * coeff * self.base.psi(theta, ctx)


def as_ladder(state: GroundState | LadderState) -> LadderState:
    # base.psi already carries the state's norm; Q starts at exactly 1
    if isinstance(state, LadderState):
        return state
    return LadderState(base=state, q=TrigExpr.constant(1.0), norm=1.0)


def ladder_apply(w: TrigExpr, psi: GroundState | LadderState, ctx: Context = DOUBLE) -> LadderState:
    """Apply the raising operator -d/dtheta + w to an evaluable state.

    With psi = Q psi_base and psi_base' = -W_base psi_base this is
    Q -> -Q' + (w + W_base) Q, so the result is again a LadderState.
    """
    state = as_ladder(psi)
    w_b = state.base.w_expr(ctx)
    q_new = -state.q.derivative() + (w + w_b) * state.q
    return LadderState(base=state.base, q=q_new, norm=state.norm)


def state_l2_norm(state, rel_tol: float = 1e-10) -> float:
    """L2 norm of an evaluable state over (0, pi)."""
    return integrate(lambda t: state.value(t) ** 2, 0.0, float(DOUBLE.pi),
                     rel_tol=rel_tol) ** 0.5


def equation_residual(state, m: Fraction, beta, energy_value, grid, ctx: Context = DOUBLE):
    """Max |psi'' + (bracket + E) psi| / sup |psi| for any evaluable state
    exposing value/second_derivative (ladder states included)."""
    state = as_ladder(state)
    worst = ctx.num(0)
    sup = ctx.num(0)
    for t in grid:
        psi = state.value(t, ctx)
        res = state.second_derivative(t, ctx) + (potential_bracket(m, beta, t, ctx) + ctx.num(energy_value)) * psi
        worst = max(worst, abs(res))
        sup = max(sup, abs(psi))
    return worst / sup


def wavefunction_rows(g: GroundState, grid, ctx: Context = DOUBLE) -> list[dict]:
    """CSV-ready rows: theta, psi0, theta0, residual (pointwise)."""
    w = g.w_expr(ctx)
    w_sq = w * w
    w_prime = w.derivative()
    energy = g.series.energy_sum(g.beta, ctx=ctx)
    rows = []
    for t in grid:
        psi = g.psi(t, ctx)
        feature = w_sq.eval(t, ctx) - w_prime.eval(t, ctx) + potential_bracket(g.m, g.beta, t, ctx) + energy
        rows.append({
            "theta": float(t),
            "psi0": float(psi),
            "theta0": float(psi / ctx.sqrt(ctx.sin(t))),
            "residual": float(feature * psi),
        })
    return rows
