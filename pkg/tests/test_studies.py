import numpy as np
import pytest

from linkcurves.studies import (
    SKEW_VIA_RV_DB,
    SPACING_PLACEMENTS,
    STUDIES,
    StudyTable,
    study_xtalk_freq_vs_time,
)


def test_table_filters_and_columns():
    t = StudyTable("t", ("a", "b"), ((1, "x"), (2, "y"), (3, "x")))
    assert t.where(b="x").column("a") == [1, 3]
    assert t.where(a=2, b="x").rows == ()
    with pytest.raises(ValueError):
        t.column("c")


def test_registry_names():
    assert set(STUDIES) == {"via-spacing", "loss-split", "skew", "via-count", "xtalk-fvt"}


def test_closer_vias_ripple_more(case_studies):
    sp = case_studies[0]["via-spacing"]
    ripple = [sp.where(placement=p).column("il_ripple_db")[0] for p in SPACING_PLACEMENTS]
    spacing = [b - a for a, b in SPACING_PLACEMENTS.values()]
    order = np.argsort(spacing)
    assert np.all(np.diff(np.array(ripple)[order]) < 0)


def test_dielectric_loss_favoured_more_with_taps(case_studies):
    ls = case_studies[0]["loss-split"]
    skin = np.array(ls.where(split="all-skin").column("max_loss_db"))
    diel = np.array(ls.where(split="all-dielectric").column("max_loss_db"))
    assert np.all(diel >= skin)
    gap = diel - skin
    assert gap[-1] > gap[0] + 5.0
    for split in ("all-skin", "half", "all-dielectric"):
        assert np.all(np.diff(ls.where(split=split).column("max_loss_db")) >= 0)


def test_zero_skew_matches_baseline(case_studies, baseline_curves):
    sk = case_studies[0]["skew"]
    curves, _ = baseline_curves
    ref = dict(curves[3].points)[SKEW_VIA_RV_DB]
    assert sk.where(skew_ui=0.0, vias="vias").column("max_loss_db")[0] == ref
    for vias in ("vias", "no-vias"):
        vals = sk.where(vias=vias).column("max_loss_db")
        assert np.all(np.diff(vals) <= 0)


def test_more_vias_never_help(case_studies):
    vc = case_studies[0]["via-count"]
    two, three, four = (np.array(vc.where(n_vias=n).column("max_loss_db")) for n in (2, 3, 4))
    assert np.all(three <= two) and np.all(four <= three)
    rv = np.array(vc.where(n_vias=2).column("rv_db"))
    near = rv == -3.0
    assert np.all(four[near] < two[near])


def test_xtalk_table_consistency(xtalk_table):
    for stub, drive, kind, bx, mv, pulse, step in xtalk_table.rows:
        assert mv == pytest.approx(1e3 * 10 ** (bx / 20))
        assert pulse >= 0 and step >= 0
    fext = xtalk_table.where(kind="fext")
    assert fext.where(drive="top").column("pulse_p2p_mv") == pytest.approx(
        fext.where(drive="stripline").column("pulse_p2p_mv"), rel=1e-9
    )


def test_no_stub_has_no_fext(xtalk_table):
    for row in xtalk_table.where(stub_mm=0.0, kind="fext").rows:
        assert row[3] == -80.0
        assert row[5] < 1e-6


def test_rise_time_lowers_transient_crosstalk():
    ideal = study_xtalk_freq_vs_time(stubs_mm=(1.0,), samples_per_ui=16, time_window_ui=64)
    slow = study_xtalk_freq_vs_time(stubs_mm=(1.0,), samples_per_ui=16, time_window_ui=64, rise_ui=0.5)
    assert ideal.column("broadband_db") == slow.column("broadband_db")
    assert all(s < i for s, i in zip(slow.column("pulse_p2p_mv"), ideal.column("pulse_p2p_mv")))
