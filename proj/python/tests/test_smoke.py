import math

import pytest

import posittrain as pt


def test_posit_basics():
    one = pt.Posit(0x4000, 16, 1)
    assert float(one) == 1.0
    assert (one + one).bits == 0x5000
    assert pt.Posit.from_float(1e30, 16, 1).bits == 0x7FFF
    assert pt.Posit.from_float(float("nan"), 16, 1).is_nar()
    assert (one / pt.Posit(0, 16, 1)).is_nar()
    assert float(-one) == -1.0


def test_posit_config_mismatch():
    with pytest.raises(ValueError):
        pt.Posit(0x40, 8, 0) + pt.Posit(0x4000, 16, 1)


def test_half():
    assert pt.Half.from_float(1.0).bits == 0x3C00
    assert pt.Half.from_float(65520.0).is_inf()
    assert (pt.Half(0x7BFF) + pt.Half(0x7BFF)).is_inf()
    assert math.isnan(float(pt.Half.from_float(float("nan"))))
    assert pt.Half.from_float(float("nan")).bits == 0x7E00


def test_suites():
    assert "posit16-roundtrip" in pt.suite_names()
    report = pt.run_suite("posit16-roundtrip")
    assert report["passed"] is True
    assert report["first_counterexample"] is None
    assert pt.run_suite("gradcheck")["details"]["max_relative_error"] < 1e-2


def test_empty_table(tmp_path):
    assert pt.render_table(str(tmp_path)) == "no results\n"


def test_version():
    assert pt.__version__ == "0.1.0"
