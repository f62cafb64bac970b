"""Non-perturbative spectral oracle for the angular eigenproblem.

The angular operator is represented in the spin-weighted spherical
basis l = m, m+1, ..., where multiplication by cos(theta) is the
symmetric tridiagonal matrix C with

    C[l, l]   = -m s / (l (l+1))
    C[l+1, l] = sqrt(((l+1)^2 - m^2)((l+1)^2 - s^2))
                / ((l+1) sqrt((2l+1)(2l+3))).

The eigenvalue matrix is then M = diag(l(l+1) - s(s+1)) + 2 s beta C
- beta^2 C^2, symmetric pentadiagonal; its k smallest eigenvalues are
found by Sturm-count bisection on the banded LDL^T factorization and
polished with inverse iteration plus a Rayleigh quotient.  Everything
is self-contained and deterministic; the arithmetic context is double
by default and mpmath for convergence-order measurements that sit
below binary64 resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .algebra import as_rational
from .context import DOUBLE, Context
from .errors import DomainError, NumericError
from .series import SPIN, SuperpotentialSeries, validate_m

DEFAULT_LMAX = 32
MAX_LMAX = 4096


def default_lmax(levels: int) -> int:
    """Starting basis truncation: grows with the requested level count."""
    return max(DEFAULT_LMAX, 4 * levels)


@dataclass(frozen=True)
class SpectralProblem:
    """Symmetric pentadiagonal matrix in banded storage.

    ``d0`` is the diagonal, ``d1``/``d2`` the first and second
    superdiagonals (the matrix is symmetric, so that is all of it).
    """

    m: Fraction
    beta: float
    lmax: int
    d0: tuple
    d1: tuple
    d2: tuple
    ctx: Context = DOUBLE
    s: Fraction = SPIN

    @property
    def size(self) -> int:
        return self.lmax


@dataclass(frozen=True)
class OracleResult:
    eigenvalues: tuple
    truncation_error: float
    lmax_used: int
    eigenvectors: tuple | None = None


def assemble(m, beta, lmax: int = DEFAULT_LMAX, ctx: Context = DOUBLE) -> SpectralProblem:
    """Build the banded matrix for azimuthal index m and spheroidicity beta."""
    m = validate_m(m)
    if lmax < 4:
        raise DomainError(f"lmax must be >= 4, got {lmax}")
    s = SPIN
    s_f = ctx.from_fraction(s)
    beta_f = ctx.num(beta)

    # diagonal of the beta = 0 operator, exact before conversion
    diag = [ctx.from_fraction((m + j) * (m + j + 1) - s * (s + 1)) for j in range(lmax)]

    cd = []
    ce = []
    for j in range(lmax):
        l = ctx.from_fraction(m + j)
        cd.append(-ctx.from_fraction(m) * s_f / (l * (l + 1)))
        if j < lmax - 1:
            lp = l + 1
            num = (lp * lp - ctx.from_fraction(m) ** 2) * (lp * lp - s_f * s_f)
            ce.append(ctx.sqrt(num) / (lp * ctx.sqrt((2 * l + 1) * (2 * l + 3))))

    # C^2 stays pentadiagonal: assemble its three bands from cd/ce
    c2d = []
    c2e1 = []
    c2e2 = []
    for j in range(lmax):
        val = cd[j] * cd[j]
        if j > 0:
            val += ce[j - 1] * ce[j - 1]
        if j < lmax - 1:
            val += ce[j] * ce[j]
        c2d.append(val)
        if j < lmax - 1:
            c2e1.append(ce[j] * (cd[j] + cd[j + 1]))
        if j < lmax - 2:
            c2e2.append(ce[j] * ce[j + 1])

    two_s_beta = 2 * s_f * beta_f
    b2 = beta_f * beta_f
    d0 = tuple(diag[j] + two_s_beta * cd[j] - b2 * c2d[j] for j in range(lmax))
    d1 = tuple(two_s_beta * ce[j] - b2 * c2e1[j] for j in range(lmax - 1))
    d2 = tuple(-b2 * c2e2[j] for j in range(lmax - 2))
    return SpectralProblem(m=m, beta=float(beta), lmax=lmax, d0=d0, d1=d1, d2=d2, ctx=ctx)


def _sturm_count(p: SpectralProblem, lam) -> int:
    """Number of eigenvalues below lam (negative pivots of LDL^T)."""
    n = p.size
    zero = p.ctx.num(0)
    d_prev = d_prev2 = zero
    l1_prev = l2_prev = zero
    count = 0
    for i in range(n):
        di = p.d0[i] - lam
        if i >= 1:
            di -= l1_prev * l1_prev * d_prev
        if i >= 2:
            di -= l2_prev * l2_prev * d_prev2
        if di == 0:
            di = p.ctx.num(p.ctx.eps) * max(abs(p.d0[i]), p.ctx.num(1))
        if di < 0:
            count += 1
        l1_next = zero
        if i < n - 1:
            val = p.d1[i]
            if i >= 1:
                val -= l2_prev * d_prev * l1_prev
            l1_next = val / di
        l2_next = p.d2[i] / di if i < n - 2 else zero
        d_prev2, d_prev = d_prev, di
        l2_prev, l1_prev = l2_next, l1_next
    return count


def _norm_estimate(p: SpectralProblem):
    worst = abs(p.d0[0])
    for i in range(p.size):
        r = abs(p.d0[i])
        if i >= 1:
            r += abs(p.d1[i - 1])
        if i < p.size - 1:
            r += abs(p.d1[i])
        if i >= 2:
            r += abs(p.d2[i - 2])
        if i < p.size - 2:
            r += abs(p.d2[i])
        worst = max(worst, r)
    return worst


def _factor(p: SpectralProblem, lam):
    """LDL^T pivots and multipliers of (M - lam I); tiny pivots are nudged
    so inverse iteration at a converged shift stays finite."""
    n = p.size
    zero = p.ctx.num(0)
    floor = p.ctx.num(p.ctx.eps) * (_norm_estimate(p) + p.ctx.num(1))
    d = [zero] * n
    l1 = [zero] * n
    l2 = [zero] * n
    for i in range(n):
        di = p.d0[i] - lam
        if i >= 1:
            di -= l1[i - 1] * l1[i - 1] * d[i - 1]
        if i >= 2:
            di -= l2[i - 2] * l2[i - 2] * d[i - 2]
        if abs(di) < floor:
            di = floor if di >= 0 else -floor
        d[i] = di
        if i < n - 1:
            val = p.d1[i]
            if i >= 1:
                val -= l2[i - 1] * d[i - 1] * l1[i - 1]
            l1[i] = val / di
        if i < n - 2:
            l2[i] = p.d2[i] / di
    return d, l1, l2


def _solve(factors, rhs):
    d, l1, l2 = factors
    n = len(d)
    y = list(rhs)
    for i in range(n):
        if i >= 1:
            y[i] -= l1[i - 1] * y[i - 1]
        if i >= 2:
            y[i] -= l2[i - 2] * y[i - 2]
    for i in range(n):
        y[i] /= d[i]
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            y[i] -= l1[i] * y[i + 1]
        if i < n - 2:
            y[i] -= l2[i] * y[i + 2]
    return y


def _matvec(p: SpectralProblem, x):
    n = p.size
    out = []
    for i in range(n):
        val = p.d0[i] * x[i]
        if i >= 1:
            val += p.d1[i - 1] * x[i - 1]
        if i < n - 1:
            val += p.d1[i] * x[i + 1]
        if i >= 2:
            val += p.d2[i - 2] * x[i - 2]
        if i < n - 2:
            val += p.d2[i] * x[i + 2]
        out.append(val)
    return out


def _dot(a, b):
    return math.fsum(float(x * y) for x, y in zip(a, b)) if isinstance(a[0], float) else sum(
        x * y for x, y in zip(a, b)
    )


def _eigenpair(p: SpectralProblem, index: int, want_vector: bool):
    """Bisection bracket for the index-th eigenvalue, then polish."""
    n = p.size
    one = p.ctx.num(1)

    # Gershgorin bounds
    lo = hi = None
    for i in range(n):
        r = p.ctx.num(0)
        if i >= 1:
            r += abs(p.d1[i - 1])
        if i < n - 1:
            r += abs(p.d1[i])
        if i >= 2:
            r += abs(p.d2[i - 2])
        if i < n - 2:
            r += abs(p.d2[i])
        lo = p.d0[i] - r if lo is None else min(lo, p.d0[i] - r)
        hi = p.d0[i] + r if hi is None else max(hi, p.d0[i] + r)
    lo -= one
    hi += one

    for _ in range(600):
        mid = (lo + hi) / 2
        if mid <= lo or mid >= hi:
            break
        if _sturm_count(p, mid) >= index + 1:
            hi = mid
        else:
            lo = mid
        if abs(hi - lo) < p.ctx.num(p.ctx.eps) * (abs(hi) + abs(lo) + one) / 4:
            break
    lam = (lo + hi) / 2

    # inverse iteration from the matching basis vector, then Rayleigh quotient
    x = [p.ctx.num(0)] * n
    x[min(index, n - 1)] = one
    factors = _factor(p, lam)
    for _ in range(3):
        x = _solve(factors, x)
        nrm = abs(max(x, key=abs))
        x = [v / nrm for v in x]
    nrm2 = _dot(x, x)
    rho = _dot(x, _matvec(p, x)) / nrm2
    if want_vector:
        scale = 1 / (nrm2 ** 0.5 if isinstance(nrm2, float) else p.ctx.sqrt(nrm2))
        pivot = max(range(n), key=lambda i: (abs(x[i]), -i))
        if x[pivot] < 0:
            scale = -scale
        return rho, tuple(v * scale for v in x)
    return rho, None


def _solve_k(p: SpectralProblem, k: int, want_vectors: bool):
    if all(v == 0 for v in p.d1) and all(v == 0 for v in p.d2):
        # diagonal matrix: the spectrum is the (already sorted) diagonal
        values = tuple(p.d0[:k])
        vectors = None
        if want_vectors:
            vectors = tuple(
                tuple(p.ctx.num(1) if i == j else p.ctx.num(0) for i in range(p.size))
                for j in range(k)
            )
        return values, vectors
    pairs = [_eigenpair(p, j, want_vectors) for j in range(k)]
    values = tuple(v for v, _ in pairs)
    vectors = tuple(vec for _, vec in pairs) if want_vectors else None
    return values, vectors


def lowest_eigenvalues(p: SpectralProblem, k: int, tol: float = 1e-12,
                       want_vectors: bool = False) -> OracleResult:
    """k smallest eigenvalues, self-converged under lmax doubling.

    The basis is doubled until every reported eigenvalue moves by at
    most ``tol``; the final values come from the doubled matrix.
    """
    if k < 1:
        raise DomainError(f"need k >= 1, got {k}")
    if k > p.lmax // 2:
        raise DomainError(f"k = {k} exceeds lmax/2 = {p.lmax // 2}")
    lmax = p.lmax
    drift = float("inf")
    current, _ = _solve_k(p, k, False)
    while lmax <= MAX_LMAX:
        bigger = assemble(p.m, p.beta, 2 * lmax, p.ctx)
        nxt, vectors = _solve_k(bigger, k, want_vectors)
        drift = max(abs(float(a - b)) for a, b in zip(current, nxt))
        if drift <= tol:
            return OracleResult(eigenvalues=nxt, truncation_error=drift,
                                lmax_used=2 * lmax, eigenvectors=vectors)
        current = nxt
        lmax *= 2
    raise NumericError(f"oracle did not self-converge below {tol}; last drift {drift:.3e}")


def ground_eigenvalue(m, beta, tol: float = 1e-12, lmax: int = DEFAULT_LMAX,
                      ctx: Context = DOUBLE):
    """Convenience: the smallest eigenvalue at (m, beta)."""
    return lowest_eigenvalues(assemble(m, beta, lmax, ctx), 1, tol).eigenvalues[0]


def _exact_lstsq(betas: list[Fraction], ys: list[Fraction], orders: int) -> tuple[list[Fraction], float]:
    """Exact normal-equations polynomial fit; returns coefficients and cond_1.

    The abscissae are rescaled to [-1, 1] before forming the normal
    equations, so the condition estimate measures genuine degeneracy of
    the sample design rather than the scale of beta.  The returned
    coefficients refer to the original variable.
    """
    scale = max(abs(b) for b in betas)
    if scale == 0:
        raise NumericError("all fit samples are zero")
    betas = [b / scale for b in betas]
    cols = orders + 1
    v = [[b ** j for j in range(cols)] for b in betas]
    n = [[sum(v[i][r] * v[i][c] for i in range(len(betas))) for c in range(cols)] for r in range(cols)]
    rhs = [sum(v[i][r] * ys[i] for i in range(len(betas))) for r in range(cols)]

    # invert the normal matrix alongside the solve to estimate conditioning
    aug = [row[:] + [Fraction(1) if r == c else Fraction(0) for c in range(cols)] + [rhs[r]]
           for r, row in enumerate(n)]
    for col in range(cols):
        pivot_row = max(range(col, cols), key=lambda r: abs(aug[r][col]))
        if aug[pivot_row][col] == 0:
            raise NumericError("singular normal equations in polynomial fit")
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        pivot = aug[col][col]
        aug[col] = [x / pivot for x in aug[col]]
        for r in range(cols):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    coeffs = [aug[r][-1] / scale ** r for r in range(cols)]
    inv = [[aug[r][cols + c] for c in range(cols)] for r in range(cols)]
    norm_n = max(sum(abs(n[r][c]) for r in range(cols)) for c in range(cols))
    norm_inv = max(sum(abs(inv[r][c]) for r in range(cols)) for c in range(cols))
    return coeffs, float(norm_n * norm_inv)


def series_fit(m, orders: int, betas, k: int = 0, tol: float = 1e-12,
               lmax: int = DEFAULT_LMAX, ctx: Context = DOUBLE) -> list[float]:
    """Least-squares estimates of the eigenvalue's beta-series coefficients.

    Fits a degree-``orders`` polynomial through oracle eigenvalues at the
    sample points (all |beta| <= 0.05).  The linear algebra is done in
    exact rationals, so only the eigenvalue noise enters the estimates.
    Raises when the normal equations' condition estimate exceeds 1e12.
    """
    m = validate_m(m)
    betas = list(betas)
    if not betas:
        raise DomainError("series_fit needs at least one sample")
    if any(abs(b) > 0.05 + 1e-15 for b in betas):
        raise DomainError("series_fit samples must satisfy |beta| <= 0.05")
    if len(betas) < orders + 1:
        raise DomainError(f"need at least {orders + 1} samples for {orders + 1} coefficients")
    ys = []
    for b in betas:
        ev = lowest_eigenvalues(assemble(m, b, lmax, ctx), k + 1, tol).eigenvalues[k]
        ys.append(Fraction(float(ev)))
    coeffs, cond = _exact_lstsq([Fraction(b) for b in betas], ys, orders)
    if cond > 1e12:
        raise NumericError(f"ill-conditioned fit: condition estimate {cond:.3e}")
    return [float(c) for c in coeffs]


def _loglog_slope(points: list[tuple[float, float]]) -> float | None:
    """Least-squares slope of log y against log x; None if underdetermined."""
    pts = [(math.log(x), math.log(y)) for x, y in points if x > 0 and y > 0]
    if len(pts) < 2:
        return None
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    den = sum((x - mx) ** 2 for x, _ in pts)
    if den == 0:
        return None
    return sum((x - mx) * (y - my) for x, y in pts) / den


def compare_report(series: SuperpotentialSeries, beta_grid, tol: float = 1e-12,
                   lmax: int = DEFAULT_LMAX, ctx: Context = DOUBLE) -> dict:
    """Series partial sums against oracle eigenvalues over a beta grid.

    Returns per-beta rows (series, oracle, difference) and the fitted
    log-log convergence order of the difference.
    """
    rows = []
    for beta in beta_grid:
        e_series = series.energy_sum(beta, ctx=ctx)
        e_oracle = lowest_eigenvalues(assemble(series.m, beta, lmax, ctx), 1, tol).eigenvalues[0]
        rows.append({
            "beta": float(beta),
            "e_series": float(e_series),
            "e_oracle": float(e_oracle),
            "abs_diff": abs(float(e_series - e_oracle)),
        })
    slope = _loglog_slope([(r["beta"], r["abs_diff"]) for r in rows])
    return {"m": str(series.m), "order": series.order, "rows": rows, "fitted_order": slope}
