from fractions import Fraction

import pytest

import swsh.verify as verify_mod
from swsh.errors import NumericError, VerificationError
from swsh.verify import printed_order2_energy, run_verification

F = Fraction
HALF = F(1, 2)


@pytest.fixture(scope="module")
def report():
    return run_verification(HALF, 6)


class TestReportStructure:
    def test_passes(self, report):
        assert report["status"] == "pass"
        assert report["failures"] == []
        assert report["schema"] == 1
        assert report["m"] == "1/2"

    def test_riccati_section(self, report):
        assert len(report["riccati"]) == 6
        assert all(e["residual"] == "exact-zero" for e in report["riccati"])

    def test_expected_notices_present(self, report):
        quantities = [n["quantity"] for n in report["notices"]]
        assert "order-2 energy coefficient" in quantities
        assert "R_1" in quantities
        for n in report["notices"]:
            assert n["class"] == "PAPER-DIVERGENCE"

    def test_e2_notice_values(self, report):
        notice = next(n for n in report["notices"]
                      if n["quantity"] == "order-2 energy coefficient")
        assert notice["printed"] == "-1/27"
        assert notice["computed"] == "-11/27"

    def test_oracle_checks_pass(self, report):
        names = {c["name"]: c for c in report["checks"]}
        assert names["oracle_agreement"]["status"] == "pass"
        assert names["oracle_agreement"]["abs_diff"] <= names["oracle_agreement"]["tolerance"]
        assert names["order2_energy_oracle_adjudication"]["status"] == "pass"
        assert names["order2_energy_oracle_adjudication"]["matched_error"] <= 1e-6

    def test_shape_checks_pass(self, report):
        names = {c["name"]: c for c in report["checks"]}
        assert names["shape_invariance_theta_independence"]["status"] == "pass"
        assert names["remainder_r0"]["solved"] == "3"
        assert names["remainder_r1"]["solved"] == "4/15"


class TestPrintedOrder2:
    @pytest.mark.parametrize("m", [HALF, F(3, 2)])
    def test_printed_form(self, m):
        assert printed_order2_energy(m) == -(4 * m * m + 10 * m - 5) / (2 * m + 2) ** 3

    def test_value_at_half(self):
        assert printed_order2_energy(HALF) == F(-1, 27)


class TestFailureClassification:
    def test_exact_failure_flagged(self, monkeypatch):
        def boom(series):
            raise VerificationError("forced", details={"module": "series-engine"})

        monkeypatch.setattr(verify_mod, "crosscheck_identities", boom)
        report = run_verification(HALF, 2)
        assert report["status"] == "fail"
        classes = {f["class"] for f in report["failures"]}
        assert "EXACT-FAIL" in classes

    def test_oracle_failure_flagged(self, monkeypatch):
        def bad_fit(m, orders, betas, **kw):
            return [0.0] * (orders + 1)

        monkeypatch.setattr(verify_mod, "series_fit", bad_fit)
        report = run_verification(HALF, 2)
        assert report["status"] == "fail"
        bad = next(f for f in report["failures"]
                   if f["name"] == "order2_energy_oracle_adjudication")
        assert bad["class"] == "ORACLE-FAIL"

    def test_numeric_error_becomes_oracle_fail(self, monkeypatch):
        def broken(*a, **kw):
            raise NumericError("no convergence")

        monkeypatch.setattr(verify_mod, "lowest_eigenvalues", broken)
        report = run_verification(HALF, 2)
        agreement = next(c for c in report["checks"] if c["name"] == "oracle_agreement")
        assert agreement["status"] == "fail"
        assert report["status"] == "fail"


class TestGoldenAcrossM:
    @pytest.mark.parametrize("m", [F(3, 2), F(7, 2)])
    def test_golden_pass_other_m(self, m):
        report = run_verification(m, 4)
        names = {c["name"]: c for c in report["checks"]}
        assert names["golden_printed_forms"]["status"] == "pass"
        assert report["status"] == "pass"
