from __future__ import annotations

import json
import math

import pytest

from mfspec.errors import ResourceLimit, UnknownFormula
from mfspec.oracle import (
    Formula,
    OracleReport,
    brute_conditional,
    brute_pressure,
    closed_forms,
    reproduce_reference_values,
)
from mfspec.symbolic import LocallyConstantPotential as L, validate_sft

FULL2 = validate_sft([[1, 1], [1, 1]])
GOLDEN = validate_sft([[1, 1], [1, 0]])


def test_brute_pressure_full_shift():
    assert brute_pressure(FULL2, L.constant(FULL2, 0.0), 8) == pytest.approx(math.log(2), abs=1e-15)


def test_brute_pressure_golden_counts_fibonacci_words():
    assert brute_pressure(GOLDEN, L.constant(GOLDEN, 0.0), 10) == pytest.approx(math.log(144) / 10, abs=1e-15)


def test_brute_pressure_single_step():
    assert brute_pressure(FULL2, L.indicator(FULL2, 1), 1) == pytest.approx(math.log(1 + math.e), abs=1e-15)


def test_brute_pressure_respects_word_cap(monkeypatch):
    monkeypatch.setenv("MFSPEC_MAX_WORDS", "100")
    with pytest.raises(ResourceLimit):
        brute_pressure(FULL2, L.constant(FULL2, 0.0), 7)


def test_brute_conditional_quarter():
    ind, one = L.indicator(FULL2, 1), L.constant(FULL2, 1.0)
    assert brute_conditional(FULL2, ind, one, None, 0.25, 1e-3) == pytest.approx(0.562335, abs=2e-3)


def test_brute_conditional_half():
    ind, one = L.indicator(FULL2, 1), L.constant(FULL2, 1.0)
    assert brute_conditional(FULL2, ind, one, None, 0.5, 1e-2) == pytest.approx(0.693147, abs=2e-3)


def test_brute_conditional_infeasible():
    ind, one = L.indicator(FULL2, 1), L.constant(FULL2, 1.0)
    assert brute_conditional(FULL2, ind, one, None, 1.5, 1e-2) == -math.inf


def test_closed_forms():
    assert closed_forms("binary_entropy", 0.25) == pytest.approx(0.5623351446188083, abs=1e-15)
    assert closed_forms(Formula.MORAN_ROOT, 0.5, 1 / 3) == pytest.approx(0.7879, abs=1e-3)
    assert closed_forms("parry_entropy", "golden") == pytest.approx(0.48121182505960347, abs=1e-15)
    assert closed_forms("logistic_pressure", 1.0) == pytest.approx(math.log(1 + math.e), abs=1e-15)


def test_moran_root_solves_its_equation():
    t = closed_forms("moran_root", 0.5, 1 / 3)
    assert 0.5**t + (1 / 3) ** t == pytest.approx(1.0, abs=1e-14)


def test_unknown_formula():
    with pytest.raises(UnknownFormula):
        closed_forms("riemann_zeta", 2)


def test_report_pass_flag_tracks_tolerance():
    assert OracleReport("x", 1.0, 1.0 + 1e-9, 1e-8).passed
    assert not OracleReport("x", 1.0, 1.0 + 1e-7, 1e-8).passed
    assert OracleReport("inf", math.inf, math.inf, 0.0).passed
    assert not OracleReport("inf", math.inf, 1.0, 1e9).passed


def test_report_json_round_trip():
    doc = json.loads(OracleReport("neg", -math.inf, -math.inf, 0.0).to_json())
    assert doc == {
        "quantity_name": "neg",
        "oracle_value": "-inf",
        "main_value": "-inf",
        "tolerance": 0.0,
        "abs_error": 0.0,
        "passed": True,
    }


def test_every_reference_example_is_reproduced():
    reports = reproduce_reference_values()
    failed = [r.quantity_name for r in reports if not r.passed]
    assert len(reports) == 39
    assert failed == []
