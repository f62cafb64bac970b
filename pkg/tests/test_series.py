import json
from fractions import Fraction

import pytest

from swsh.errors import DomainError, StateError, VerificationError
from swsh.series import (
    build_series,
    crosscheck_identities,
    energy_correction,
    riccati_residual,
    seed_order0,
    seed_order1,
    seed_order2,
    source_series,
    superpotential_order,
    validate_m,
)

F = Fraction
HALF = F(1, 2)


def printed_w_coefficients(m: Fraction) -> dict:
    """The published closed forms for orders 1-4 (golden references)."""
    d = 2 * m + 2
    return {
        (1, "b", 1): -1 / d,
        (2, "b", 1): -(2 * m + 1) / d ** 3,
        (2, "a", 1): (2 * m + 1) / d ** 2,
        (3, "b", 1): 4 * (2 * m + 1) / (d ** 5 * (2 * m + 4)),
        (3, "b", 2): -2 * (2 * m + 1) / (d ** 3 * (2 * m + 4)),
        (3, "a", 1): -4 * (2 * m + 1) / (d ** 4 * (2 * m + 4)),
        (4, "b", 1): 2 * (2 * m + 1) * (2 * m * m + 9 * m + 2) / (d ** 7 * (2 * m + 4)),
        (4, "a", 1): -2 * (2 * m + 1) * (2 * m * m + 9 * m + 2) / (d ** 6 * (2 * m + 4)),
        (4, "b", 2): -6 * m * (2 * m + 1) / (d ** 5 * (2 * m + 4)),
        (4, "a", 2): 2 * m * (2 * m + 1) / (d ** 4 * (2 * m + 4)),
    }


def printed_energies(m: Fraction) -> dict:
    d = 2 * m + 2
    return {
        1: -1 / d,
        3: -4 * (2 * m + 1) ** 2 * (2 * m + 3) / (d ** 5 * (2 * m + 4)),
        4: -2 * (2 * m + 1) ** 2 * (2 * m + 3) * (2 * m * m + 9 * m + 2) / (d ** 7 * (2 * m + 4)),
    }


class TestValidateM:
    def test_accepts_positive_rationals(self):
        assert validate_m("1/2") == HALF
        assert validate_m(3) == F(3)

    @pytest.mark.parametrize("bad", [0, F(-1, 2), "-3"])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(DomainError):
            validate_m(bad)


class TestSeeds:
    def test_order0(self):
        params, e0 = seed_order0(HALF)
        assert params == (F(-1), F(-1, 2))
        assert e0 == 0
        assert seed_order0(F(3, 2))[1] == 3

    def test_order0_value_at_half_pi(self):
        import math

        from swsh.algebra import TrigExpr

        params, _ = seed_order0(HALF)
        w0 = TrigExpr.cot_csc(*params)
        assert w0.eval(math.pi / 2) == pytest.approx(-0.5, abs=1e-15)

    def test_order1(self):
        w1, e1 = seed_order1(HALF)
        assert w1.sin_part == {1: F(-1, 3)} and w1.cos_part == {}
        assert e1 == F(-1, 3)
        assert seed_order1(F(3, 2))[1] == F(-1, 5)

    def test_order1_energy_decreases_with_m(self):
        values = [abs(seed_order1(F(2 * j + 1, 2))[1]) for j in range(10)]
        assert values == sorted(values, reverse=True)

    def test_order2_direct_matching(self):
        series = build_series(HALF, 1)
        w2, e2 = seed_order2(HALF, series.w[1])
        assert e2 == F(-11, 27)
        assert w2.cos_part == {1: F(2, 9)}
        assert w2.sin_part == {1: F(-2, 27)}


class TestSource:
    def test_order2_source(self):
        series = build_series(HALF, 1)
        src = source_series(2, series)
        assert src.constant == 1
        assert src.h == {2: F(-8, 9)}
        assert src.g == {}

    def test_order3_source(self):
        series = build_series(HALF, 2)
        src = source_series(3, series)
        assert src.g == {2: F(-4, 27)}
        assert src.h == {2: F(4, 81)}

    def test_order4_source_g2(self):
        series = build_series(HALF, 3)
        src = source_series(4, series)
        assert src.g[2] == F(-8, 405)

    def test_missing_orders_raise(self):
        series = build_series(HALF, 1)
        with pytest.raises(StateError):
            source_series(3, series)


class TestEnergyCorrection:
    def test_orders_3_4(self):
        series = build_series(HALF, 4)
        assert energy_correction(3, source_series(3, series), HALF) == F(-64, 1215)
        assert energy_correction(4, source_series(4, series), HALF) == F(-224, 10935)

    def test_order2_adjudication(self):
        # coefficient matching yields -11/27, not the printed -1/27
        series = build_series(HALF, 1)
        e2 = energy_correction(2, source_series(2, series), HALF)
        assert e2 == F(-11, 27)
        printed = -(4 * HALF ** 2 + 10 * HALF - 5) / (2 * HALF + 2) ** 3
        assert printed == F(-1, 27)
        assert e2 != printed


class TestSuperpotentialOrder:
    def test_order3_coefficients(self):
        series = build_series(HALF, 4)
        w3 = series.w[3]
        assert w3.sin_part == {1: F(8, 1215), 2: F(-4, 135)}
        assert w3.cos_part == {1: F(-8, 405)}

    def test_order4_coefficients(self):
        series = build_series(HALF, 4)
        assert series.w[4].cos_part[2] == F(2, 405)
        assert series.w[4].sin_part[2] == F(-2, 405)

    def test_order2_general_path_matches_printed(self):
        series = build_series(HALF, 2)
        assert series.w[2].cos_part == {1: (2 * HALF + 1) / (2 * HALF + 2) ** 2}
        assert series.w[2].sin_part == {1: -(2 * HALF + 1) / (2 * HALF + 2) ** 3}


class TestGoldenCoefficients:
    @pytest.mark.parametrize("m", [HALF, F(3, 2), F(5, 2), F(7, 2)])
    def test_printed_w1_to_w4(self, m):
        series = build_series(m, 4)
        for (n, part, idx), expected in printed_w_coefficients(m).items():
            table = series.w[n].sin_part if part == "b" else series.w[n].cos_part
            assert table[idx] == expected, (n, part, idx)

    @pytest.mark.parametrize("m", [HALF, F(3, 2), F(5, 2), F(7, 2)])
    def test_printed_energies(self, m):
        series = build_series(m, 4)
        for n, expected in printed_energies(m).items():
            assert series.energy[n] == expected, n


class TestBuildSeries:
    def test_small_orders(self):
        assert build_series(HALF, 0).energy == (F(0),)
        assert build_series(HALF, 1).energy == (F(0), F(-1, 3))

    def test_order4_energy_table(self):
        series = build_series(HALF, 4)
        assert series.energy == (F(0), F(-1, 3), F(-11, 27), F(-64, 1215), F(-224, 10935))

    def test_deterministic_json(self):
        a = json.dumps(build_series(HALF, 6).to_table(), sort_keys=True)
        b = json.dumps(build_series(HALF, 6).to_table(), sort_keys=True)
        assert a == b

    def test_table_schema(self):
        table = build_series(HALF, 2).to_table()
        assert table["m"] == "1/2" and table["s"] == "1/2"
        assert table["energy"] == ["0", "-1/3", "-11/27"]
        assert table["w"][0] == {"n": 1, "a": {}, "b": {"1": "-1/3"}}


class TestRiccatiResidual:
    @pytest.mark.parametrize("m", [HALF, F(3, 2), F(5, 2), F(7, 2), F(9, 2)])
    def test_exact_zero_through_order_12(self, m):
        series = build_series(m, 12, verify=False)
        for n in range(13):
            assert riccati_residual(series, n).is_zero(), (m, n)

    def test_printed_order2_energy_leaves_constant_residual(self):
        series = build_series(HALF, 2)
        residual = riccati_residual(series, 2, energy=F(-1, 27))
        assert residual.terms == {(0, 0): F(-10, 27)}

    def test_order1_zero_for_generic_m(self):
        series = build_series(F(7, 3), 1)
        assert riccati_residual(series, 1).is_zero()


class TestCrosscheckIdentities:
    def test_report_counts(self):
        series = build_series(HALF, 12, verify=False)
        report = crosscheck_identities(series)
        assert report["a1_identity_checked"] == 10
        assert report["violations"] == [] if "violations" in report else True

    def test_known_values_order_3_4(self):
        series = build_series(HALF, 4)
        # (g - a)/(2m+2l) reproduces the sin coefficients
        src4 = source_series(4, series)
        lhs = (src4.g[2] - series.w[4].cos_part[2]) / (2 * HALF + 4)
        assert lhs == series.w[4].sin_part[2] == F(-2, 405)
        assert series.w[3].cos_part[1] == (2 * HALF + 2) * series.energy[3] / (
            (2 * HALF + 1) * (2 * HALF + 3)
        )

    def test_violation_raises(self):
        series = build_series(HALF, 4)
        hacked = series.__class__(
            m=series.m,
            order=series.order,
            w0_params=series.w0_params,
            w=series.w[:3] + (series.w[3].scaled(F(2)),) + series.w[4:],
            energy=series.energy,
        )
        with pytest.raises(VerificationError):
            crosscheck_identities(hacked)


class TestEvenOrderCancellation:
    @pytest.mark.parametrize("m", [HALF, F(3, 2), F(5, 2)])
    def test_top_coefficients_vanish(self, m):
        series = build_series(m, 12, verify=False)
        for n in range(2, 13, 2):
            top = n // 2 + 1
            assert top not in series.w[n].cos_part
            assert top not in series.w[n].sin_part
