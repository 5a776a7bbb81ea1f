import json

import pytest

from curvmass import verify
from curvmass.geometry import dec_margin
from curvmass.verify import CHECK_IDS, DEC_SLACK, CheckDefinition, UnknownCheckError, run_suite


def test_bundled_profiles_respect_the_energy_condition():
    profiles = verify.dec_profiles(3.0)
    assert len(profiles) == 5
    for name, prof in profiles.items():
        assert dec_margin(prof, 3.0) >= -DEC_SLACK, name
    assert dec_margin(verify.dec_violating_profile(3.0), 3.0) < 0


def test_report_shape_and_determinism():
    first = run_suite(["hawking-anchors", "sds-one-harmonic"])
    second = run_suite(["sds-one-harmonic", "hawking-anchors"])
    assert [c.id for c in first.checks] == [c.id for c in second.checks]
    assert [c.value for c in first.checks] == [c.value for c in second.checks]
    data = json.loads(first.to_json())
    assert data["summary"] == {"pass": 2, "fail": 0}


def test_tolerance_override_is_applied():
    report = run_suite("hawking-anchors", {"hawking-anchors": 0.0})
    assert report.checks[0].tol == 0.0
    assert not report.all_passed


def test_unknown_ids_rejected():
    with pytest.raises(UnknownCheckError):
        run_suite(["hawking-anchors", "bogus"])
    with pytest.raises(UnknownCheckError):
        run_suite("all", {"bogus": 1.0})


def test_failing_check_does_not_stop_the_suite(monkeypatch):
    def boom(tol):
        raise RuntimeError("deliberate")

    patched = tuple(CheckDefinition(c.id, c.desc, c.anchor, c.tol, boom) if c.id == "hawking-anchors" else c
                    for c in verify.CHECKS)
    monkeypatch.setattr(verify, "CHECKS", patched)
    report = run_suite(["hawking-anchors", "sds-one-harmonic"])
    assert [c.passed for c in report.checks] == [True, False]
    assert "deliberate" in report.checks[1].desc


def test_anchor_fields_present():
    report = run_suite("sds-one-harmonic")
    assert report.checks[0].anchor
    assert len(CHECK_IDS) == 12
