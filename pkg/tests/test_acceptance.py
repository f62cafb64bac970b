"""Acceptance suite: one test per criterion, one printed line per result.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as the
criteria complete; each line names the criterion and its budget/tolerance.
"""

import json
import math
import time
from fractions import Fraction

import pytest

from swsh.algebra import TrigExpr
from swsh.cli import main as cli_main
from swsh.context import mp_context
from swsh.eigenfunction import (
    ground_psi,
    ground_state,
    schrodinger_residual,
    state_l2_norm,
)
from swsh.oracle import assemble, lowest_eigenvalues, series_fit
from swsh.quadrature import integrate
from swsh.series import build_series, crosscheck_identities, riccati_residual
from swsh.shape_invariance import (
    ShapeParamSet,
    excited_energy,
    excited_wavefunction,
    solve_flow_step,
    verify_invariance,
)
from swsh.verify import printed_order2_energy, run_verification

F = Fraction
HALF = F(1, 2)
PI = math.pi

_LINES = []


def report_line(number, name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"ACCEPTANCE {number} [{status}] {name}" + (f" :: {detail}" if detail else "")
    _LINES.append(line)
    print(line)
    assert passed, line


@pytest.fixture(scope="module", autouse=True)
def summary():
    yield
    print()
    for line in _LINES:
        print(line)


def fit_slope(xs, ys):
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    mx, my = sum(lx) / len(lx), sum(ly) / len(ly)
    return sum((a - mx) * (b - my) for a, b in zip(lx, ly)) / sum((a - mx) ** 2 for a in lx)


def printed_forms(m):
    d = 2 * m + 2
    q = 2 * m + 4
    top = 2 * m + 1
    poly = 2 * m * m + 9 * m + 2
    w = {
        (1, "b", 1): -1 / d,
        (2, "a", 1): top / d ** 2,
        (2, "b", 1): -top / d ** 3,
        (3, "b", 1): 4 * top / (d ** 5 * q),
        (3, "b", 2): -2 * top / (d ** 3 * q),
        (3, "a", 1): -4 * top / (d ** 4 * q),
        (4, "b", 1): 2 * top * poly / (d ** 7 * q),
        (4, "a", 1): -2 * top * poly / (d ** 6 * q),
        (4, "b", 2): -6 * m * top / (d ** 5 * q),
        (4, "a", 2): 2 * m * top / (d ** 4 * q),
    }
    e = {
        1: -1 / d,
        3: -4 * top ** 2 * (2 * m + 3) / (d ** 5 * q),
        4: -2 * top ** 2 * (2 * m + 3) * poly / (d ** 7 * q),
    }
    return w, e


def test_criterion_1_golden_coefficients():
    start = time.perf_counter()
    for m in (HALF, F(3, 2), F(5, 2), F(7, 2)):
        series = build_series(m, 4, verify=False)
        w_forms, e_forms = printed_forms(m)
        for (n, part, idx), expected in w_forms.items():
            table = series.w[n].sin_part if part == "b" else series.w[n].cos_part
            assert table.get(idx, F(0)) == expected, (m, n, part, idx)
        for n, expected in e_forms.items():
            assert series.energy[n] == expected, (m, n)
    elapsed = time.perf_counter() - start
    report_line(1, "golden coefficients (4 m values, exact)", elapsed < 1.0,
                f"runtime {elapsed:.3f}s < 1s")


def test_criterion_2_riccati_exactness():
    start = time.perf_counter()
    for j in range(5):
        m = F(2 * j + 1, 2)
        series = build_series(m, 12, verify=False)
        for n in range(13):
            assert riccati_residual(series, n).is_zero(), (m, n)
    elapsed = time.perf_counter() - start
    report_line(2, "exact balance residuals, n <= 12, m in {1/2..9/2}",
                elapsed < 10.0, f"runtime {elapsed:.3f}s < 10s")


def test_criterion_3_order2_energy_adjudication():
    matched = build_series(HALF, 2, verify=False).energy[2]
    expected = -(4 * HALF ** 2 + 10 * HALF + 5) / (2 * HALF + 2) ** 3
    assert matched == expected == F(-11, 27)
    for m in (F(3, 2), F(5, 2)):
        series = build_series(m, 2, verify=False)
        assert series.energy[2] == -(4 * m * m + 10 * m + 5) / (2 * m + 2) ** 3

    samples = [j * 0.005 for j in range(-10, 11) if j != 0]
    fit = series_fit(HALF, 6, samples)
    fit_error = abs(fit[2] - float(matched))
    assert fit_error <= 1e-6

    report = run_verification(HALF, 2)
    notice = next(n for n in report["notices"]
                  if n["quantity"] == "order-2 energy coefficient")
    assert notice["class"] == "PAPER-DIVERGENCE"
    assert notice["printed"] == "-1/27"
    assert printed_order2_energy(HALF) == F(-1, 27)
    report_line(3, "order-2 energy adjudicated (-11/27), divergence notice emitted",
                True, f"spectral fit error {fit_error:.2e} <= 1e-6")


def test_criterion_4_identity_suite():
    for m in (HALF, F(3, 2)):
        series = build_series(m, 12, verify=False)
        crosscheck_identities(series)  # raises on any violation
        for n in range(2, 13, 2):
            top = n // 2 + 1
            assert top not in series.w[n].cos_part, (m, n)
            assert top not in series.w[n].sin_part, (m, n)
    report_line(4, "coefficient identities and even-order cancellations, n <= 12", True)


def test_criterion_5_series_oracle_agreement():
    start = time.perf_counter()
    series = build_series(HALF, 8, verify=False)
    result = lowest_eigenvalues(assemble(HALF, 0.1, 32), 1, tol=1e-12)
    assert result.truncation_error <= 1e-12
    diff = abs(float(series.energy_sum(0.1)) - float(result.eigenvalues[0]))
    assert diff <= 1e-7

    ctx = mp_context(50)
    betas = (0.2, 0.1, 0.05, 0.025)
    diffs = []
    for beta in betas:
        oracle = lowest_eigenvalues(assemble(HALF, beta, 16, ctx), 1, tol=1e-25).eigenvalues[0]
        diffs.append(abs(float(series.energy_sum(beta, ctx=ctx) - oracle)))
    slope = fit_slope(betas, diffs)
    assert abs(slope - 9) <= 0.3
    elapsed = time.perf_counter() - start
    report_line(5, "series-oracle agreement at N=8",
                elapsed < 5.0,
                f"|diff|={diff:.2e} <= 1e-7, slope {slope:.3f} = 9 +/- 0.3, "
                f"runtime {elapsed:.3f}s < 5s")


def test_criterion_6_ground_wavefunction():
    series = build_series(HALF, 8, verify=False)
    g0 = ground_state(series, 0.0)
    center = ground_psi(g0, PI / 2)
    assert ground_psi(g0, 1e-3) < 0.1 * center
    assert ground_psi(g0, PI - 1e-3) < 0.1 * center

    grid = [0.06 + i * (PI - 0.12) / 40 for i in range(41)]
    beta0_residual = schrodinger_residual(g0, grid)
    assert beta0_residual <= 1e-12

    betas = (0.2, 0.1, 0.05, 0.025)
    slopes = {}
    for n_trunc in (2, 4):
        trunc = build_series(HALF, n_trunc, verify=False)
        residuals = [schrodinger_residual(ground_state(trunc, b), grid) for b in betas]
        slopes[n_trunc] = fit_slope(betas, residuals)
        assert abs(slopes[n_trunc] - (n_trunc + 1)) <= 0.3, n_trunc
    ctx = mp_context(50)
    small_grid = [0.3 + i * (PI - 0.6) / 14 for i in range(15)]
    residuals = [float(schrodinger_residual(ground_state(series, b), small_grid, ctx))
                 for b in betas]
    slopes[8] = fit_slope(betas, residuals)
    assert abs(slopes[8] - 9) <= 0.3
    report_line(6, "ground wavefunction: boundary decay, residual order",
                True,
                "beta0 residual {:.1e} <= 1e-12, slopes ".format(beta0_residual)
                + ", ".join(f"N={n}: {s:.3f}" for n, s in sorted(slopes.items())))


def test_criterion_7_shape_invariance():
    for m in (HALF, F(3, 2), F(7, 3)):
        series = build_series(m, 8, verify=False)
        step = solve_flow_step(ShapeParamSet.ones(), series, 8)
        # exact theta-independence for every order is asserted inside the
        # solve and re-checked here
        verify_invariance(step, series)
        assert step.remainder[0] == 2 * m + 2, m
        assert step.remainder[1] == 1 / ((m + 1) * (m + 2)), m
        if m == HALF:
            assert step.remainder[1] == F(4, 15)
    report = run_verification(HALF, 2)
    r1_notice = next(n for n in report["notices"] if n["quantity"] == "R_1")
    assert r1_notice["class"] == "PAPER-DIVERGENCE"
    assert r1_notice["full_coefficient_matches"] and not r1_notice["bare_matches"]
    report_line(7, "shape invariance: theta-independent flow n <= 8, "
                   "R0 = 2m+2, R1 = 1/((m+1)(m+2)), notation notice", True)


def test_criterion_8_excited_level_vs_oracle():
    series = build_series(HALF, 4, verify=False)
    coeffs = excited_energy(HALF, 1, 4, series=series)
    assert coeffs[0] == 3 and coeffs[1] == F(-1, 15)

    def second_level(beta):
        return float(lowest_eigenvalues(assemble(HALF, beta, 32), 2,
                                        tol=1e-13).eigenvalues[1])

    h = 1e-3
    d_h = (second_level(h) - second_level(-h)) / (2 * h)
    d_h2 = (second_level(h / 2) - second_level(-h / 2)) / h
    slope = (4 * d_h2 - d_h) / 3
    slope_err = abs(slope - (-1 / 15))
    assert slope_err <= 1e-6

    # beta = 0: ladder state against the oracle's second eigenvector.
    # The eigenvector lives in the spherical basis; its lowest two basis
    # functions have closed forms which are verified here from scratch
    # before use (exact residuals of the beta = 0 equation).
    m = HALF
    gamma = 2 * m + 2
    for q_terms, level_energy in ((
        {(0, 0): F(1)}, m * (m + 1) - F(3, 4)),
        ({(0, 0): F(1), (1, 0): gamma}, (m + 1) * (m + 2) - F(3, 4)),
    ):
        q = TrigExpr(q_terms)
        w0 = TrigExpr.cot_csc(-(m + F(1, 2)), F(-1, 2))
        # residual of (q psi0)'' + (bracket + E)(q psi0), divided by psi0
        centrifugal = TrigExpr(
            {(0, -2): m * m - F(1, 4), (1, -2): m, (2, -2): F(1, 4)})
        bracket = TrigExpr.constant(F(3, 4)) - centrifugal
        feature = (
            q.derivative().derivative()
            - (q.derivative() * w0).scaled(2)
            + q * (w0 * w0 - w0.derivative())
            + q * (bracket + TrigExpr.constant(level_energy))
        )
        assert feature.is_zero()

    result = lowest_eigenvalues(assemble(m, 0.0, 32), 2, tol=1e-12, want_vectors=True)
    vec = [float(x) for x in result.eigenvectors[1]]
    assert sum(abs(v) for v in vec[2:]) < 1e-12

    def basis0(t):
        return (1 - math.cos(t)) ** 0.5 * math.sin(t) ** 0.5

    def basis1(t):
        return basis0(t) * (1 + float(gamma) * math.cos(t))

    n0 = integrate(lambda t: basis0(t) ** 2, 0.0, PI, rel_tol=1e-12) ** 0.5
    n1 = integrate(lambda t: basis1(t) ** 2, 0.0, PI, rel_tol=1e-12) ** 0.5

    def oracle_fn(t):
        return vec[0] * basis0(t) / n0 + vec[1] * basis1(t) / n1

    state = excited_wavefunction(m, 1, 0.0, 4, series=series)
    norm = state_l2_norm(state)
    grid = [0.1 + i * (PI - 0.2) / 50 for i in range(51)]
    sign = 1.0 if state.value(1.0) * oracle_fn(1.0) > 0 else -1.0
    max_diff = max(abs(state.value(t) / norm - sign * oracle_fn(t)) for t in grid)
    assert max_diff <= 1e-6
    report_line(8, "excited level: slope -1/15 and eigenvector match",
                True, f"slope error {slope_err:.2e} <= 1e-6, "
                      f"eigenvector max diff {max_diff:.2e} <= 1e-6")


def test_criterion_9_determinism(tmp_path):
    first = tmp_path / "verify_a.json"
    second = tmp_path / "verify_b.json"
    code_a = cli_main(["verify", "--m", "1/2", "--order", "8", "--out", str(first)])
    code_b = cli_main(["verify", "--m", "1/2", "--order", "8", "--out", str(second)])
    assert code_a == 0 and code_b == 0
    bytes_a = first.read_bytes()
    bytes_b = second.read_bytes()
    assert bytes_a == bytes_b
    report = json.loads(bytes_a)
    assert report["status"] == "pass"
    assert len(report["riccati"]) == 8
    assert all(e["residual"] == "exact-zero" for e in report["riccati"])
    report_line(9, "verify runs are byte-identical", True,
                f"{len(bytes_a)} bytes, status pass, 8 exact-zero entries")
