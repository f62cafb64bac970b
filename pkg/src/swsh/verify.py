"""Full verification suite with a machine-readable report.

Three failure classes keep engine bugs separate from published-formula
disagreements:

* ``EXACT-FAIL``   -- an exact internal identity broke: a bug.
* ``ORACLE-FAIL``  -- series and spectral oracle disagree beyond tolerance.
* ``PAPER-DIVERGENCE`` -- a verified artifact result differs from a printed
  closed form.  Informational: expected for the order-2 energy
  coefficient and for the printed first-remainder normalisation, both of
  which the oracle adjudicates in the artifact's favour.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import format_rational
from .errors import SwshError, VerificationError
from .oracle import assemble, lowest_eigenvalues, series_fit
from .series import (
    SuperpotentialSeries,
    build_series,
    crosscheck_identities,
    riccati_residual,
    validate_m,
)
from .shape_invariance import (
    ShapeParamSet,
    printed_flow_comparisons,
    solve_flow_step,
    verify_invariance,
)

ORACLE_BETA = 0.1
FIT_SAMPLES = tuple(j * 0.005 for j in range(-10, 11) if j != 0)


def printed_coefficient_forms(m: Fraction) -> dict[str, Fraction]:
    """Published closed forms for orders 1-4 (the golden references)."""
    d = 2 * m + 2
    q = 2 * m + 4
    top = 2 * m + 1
    poly = 2 * m * m + 9 * m + 2
    return {
        "b_1_1": -1 / d,
        "a_2_1": top / d ** 2,
        "b_2_1": -top / d ** 3,
        "b_3_1": 4 * top / (d ** 5 * q),
        "b_3_2": -2 * top / (d ** 3 * q),
        "a_3_1": -4 * top / (d ** 4 * q),
        "b_4_1": 2 * top * poly / (d ** 7 * q),
        "a_4_1": -2 * top * poly / (d ** 6 * q),
        "b_4_2": -6 * m * top / (d ** 5 * q),
        "a_4_2": 2 * m * top / (d ** 4 * q),
        "E_1": -1 / d,
        "E_3": -4 * top ** 2 * (2 * m + 3) / (d ** 5 * q),
        "E_4": -2 * top ** 2 * (2 * m + 3) * poly / (d ** 7 * q),
    }


def printed_order2_energy(m: Fraction) -> Fraction:
    """The published order-2 energy; disagrees with coefficient matching."""
    return -(4 * m * m + 10 * m - 5) / (2 * m + 2) ** 3


def _golden_order(key: str) -> int:
    return int(key.split("_")[1])


def _series_value(series: SuperpotentialSeries, key: str) -> Fraction:
    parts = key.split("_")
    n = int(parts[1])
    if parts[0] == "E":
        return series.energy[n]
    table = series.w[n].sin_part if parts[0] == "b" else series.w[n].cos_part
    return table.get(int(parts[2]), Fraction(0))


def run_verification(m, order: int = 8, lmax: int = 32) -> dict:
    """Run every invariant class and assemble the pass/fail report."""
    m = validate_m(m)
    order = int(order)
    checks: list[dict] = []
    notices: list[dict] = []

    def record(name, category, passed, **extra):
        checks.append({"name": name, "category": category,
                       "status": "pass" if passed else "fail", **extra})

    # --- exact construction and residuals -------------------------------
    try:
        long_series = build_series(m, order + 1, verify=True)
        series = SuperpotentialSeries(
            m=long_series.m, order=order, w0_params=long_series.w0_params,
            w=long_series.w[: order + 1], energy=long_series.energy[: order + 1],
        )
        build_error = None
    except SwshError as exc:
        build_error = exc
        series = None

    if build_error is not None:
        details = getattr(build_error, "details", {})
        record("build_series", "exact", False, error=str(build_error), **details)
        return _finalise(m, order, checks, notices)

    riccati_entries = []
    for n in range(1, order + 1):
        residual = riccati_residual(series, n)
        ok = residual.is_zero()
        riccati_entries.append({
            "n": n,
            "residual": "exact-zero" if ok else "nonzero",
            **({} if ok else {"coefficients": {str(k): str(v) for k, v in residual.terms.items()}}),
        })
        if not ok:
            record(f"riccati_order_{n}", "exact", False,
                   module="series-engine", operation="riccati_residual", order=n,
                   indices=sorted(residual.terms))
    if all(e["residual"] == "exact-zero" for e in riccati_entries):
        record("riccati_residuals", "exact", True, orders_checked=order)

    try:
        identity_report = crosscheck_identities(series)
        record("coefficient_identities", "exact", True, **identity_report)
    except VerificationError as exc:
        record("coefficient_identities", "exact", False, error=str(exc), **exc.details)

    even_ok = all(
        n // 2 + 1 not in series.w[n].cos_part and n // 2 + 1 not in series.w[n].sin_part
        for n in range(2, order + 1, 2)
    )
    record("even_order_top_cancellation", "exact", even_ok)

    # --- golden comparisons against the printed forms -------------------
    golden = printed_coefficient_forms(m)
    golden_failures = []
    for key, expected in golden.items():
        if _golden_order(key) > order:
            continue
        actual = _series_value(series, key)
        if actual != expected:
            golden_failures.append({"coefficient": key,
                                    "printed": format_rational(expected),
                                    "computed": format_rational(actual)})
    record("golden_printed_forms", "exact", not golden_failures,
           mismatches=golden_failures)

    # the order-2 energy is a known divergence, adjudicated by the oracle
    e2_computed = series.energy[2] if order >= 2 else None
    if e2_computed is not None:
        e2_printed = printed_order2_energy(m)
        notices.append({
            "class": "PAPER-DIVERGENCE",
            "quantity": "order-2 energy coefficient",
            "printed": format_rational(e2_printed),
            "computed": format_rational(e2_computed),
            "note": "printed closed form -(4m^2+10m-5)/(2m+2)^3 disagrees with "
                    "exact coefficient matching, which gives -(4m^2+10m+5)/(2m+2)^3; "
                    "the spectral fit below confirms the matched value",
        })
        record("order2_energy_divergence_notice", "paper", True,
               printed=format_rational(e2_printed), computed=format_rational(e2_computed))
        try:
            fit = series_fit(m, 6, FIT_SAMPLES, lmax=lmax)
            fit_err = abs(fit[2] - float(e2_computed))
            printed_err = abs(fit[2] - float(e2_printed))
            record("order2_energy_oracle_adjudication", "oracle", fit_err <= 1e-6,
                   fit_estimate=fit[2], matched_error=fit_err, printed_error=printed_err)
        except SwshError as exc:
            record("order2_energy_oracle_adjudication", "oracle", False, error=str(exc))

    # --- oracle agreement ------------------------------------------------
    try:
        result = lowest_eigenvalues(assemble(m, ORACLE_BETA, lmax), 1, tol=1e-12)
        e_oracle = float(result.eigenvalues[0])
        e_series = float(series.energy_sum(ORACLE_BETA))
        tail = abs(float(long_series.energy[order + 1])) * ORACLE_BETA ** (order + 1)
        tol = max(1e-7, 10 * tail)
        record("oracle_agreement", "oracle", abs(e_series - e_oracle) <= tol,
               beta=ORACLE_BETA, series=e_series, oracle=e_oracle,
               abs_diff=abs(e_series - e_oracle), tolerance=tol,
               truncation_error=result.truncation_error, lmax_used=result.lmax_used)
    except SwshError as exc:
        record("oracle_agreement", "oracle", False, error=str(exc))

    # --- shape invariance -------------------------------------------------
    flow_order = min(order, 8)
    try:
        step = solve_flow_step(ShapeParamSet.ones(), series, flow_order)
        invariance = verify_invariance(step, series)
        record("shape_invariance_theta_independence", "exact", True,
               orders_checked=flow_order, max_spot_check=invariance["max_spot_check"])
        record("remainder_r0", "exact", step.remainder[0] == 2 * m + 2,
               solved=format_rational(step.remainder[0]),
               expected=format_rational(2 * m + 2))
        if flow_order >= 1:
            expected_r1 = 1 / ((m + 1) * (m + 2))
            record("remainder_r1", "exact", step.remainder[1] == expected_r1,
                   solved=format_rational(step.remainder[1]),
                   expected=format_rational(expected_r1))
        for item in printed_flow_comparisons(step, series):
            if "printed_matches" in item:
                diverges = not item["printed_matches"]
                note = "printed closed form disagrees with the verified solve"
            else:
                # two readings: flag whenever the bare-scale reading fails,
                # even if reinterpreting the symbols as full coefficients
                # rescues the formula (a notation divergence)
                diverges = not item["bare_matches"]
                note = ("printed form matches only when its symbols are read "
                        "as full coefficients (scale times base)"
                        if item["full_coefficient_matches"]
                        else "printed closed form matches under neither reading")
            if diverges:
                notices.append({"class": "PAPER-DIVERGENCE", "note": note,
                                "quantity": item["quantity"], **{
                                    k: v for k, v in item.items() if k != "quantity"}})
        record("printed_flow_notices", "paper", True,
               notice_count=sum(1 for n in notices if n["class"] == "PAPER-DIVERGENCE"))
    except SwshError as exc:
        details = getattr(exc, "details", {})
        record("shape_invariance_theta_independence", "exact", False,
               error=str(exc), **details)

    report = _finalise(m, order, checks, notices)
    report["riccati"] = riccati_entries
    return report


def _finalise(m, order, checks, notices) -> dict:
    exact_fail = [c for c in checks if c["status"] == "fail" and c["category"] == "exact"]
    oracle_fail = [c for c in checks if c["status"] == "fail" and c["category"] == "oracle"]
    status = "pass" if not exact_fail and not oracle_fail else "fail"
    failures = [{**c, "class": "EXACT-FAIL" if c["category"] == "exact" else "ORACLE-FAIL"}
                for c in exact_fail + oracle_fail]
    return {
        "schema": 1,
        "command": "verify",
        "m": format_rational(m),
        "s": "1/2",
        "order": order,
        "status": status,
        "checks": checks,
        "failures": failures,
        "notices": notices,
    }
