import math

import numpy as np
import pytest

from linkcurves.elements import (
    C0,
    NEPER_DB,
    LumpedViaSpec,
    StriplineSpec,
    TerminalCap,
    TlineViaSpec,
    cap_from_rv,
    coupled_lumped_via_4port,
    dielectric_exponent,
    ind_from_rv,
    leg_length_scale,
    lumped_via_pairleg,
    stripline_abcd,
    stripline_gamma,
    stripline_rlcg,
    tline_via_4port,
    victim_path,
)
from linkcurves.errors import InvalidArgument
from linkcurves.netcore import abcd_to_s, db, line_abcd, make_grid

F1 = 5e9


def bisect(fn, lo, hi, target, iters=200):
    """Monotone increasing fn: find x with fn(x) = target."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def s11_shunt_c(c, f, z0=50.0):
    y = 2j * math.pi * f * c
    return abs(-(y * z0 / 2) / (1 + y * z0 / 2))


def s11_series_l(l, f, z0=50.0):
    z = 2j * math.pi * f * l
    return abs(z / (z + 2 * z0))


@pytest.mark.parametrize("rv", [-30.0, -12.0, -6.0, -3.0, -1.0])
def test_cap_and_ind_match_root_solve(rv):
    target = 10 ** (rv / 20)
    c = bisect(lambda x: s11_shunt_c(x, F1), 0.0, 1e-9, target)
    l = bisect(lambda x: s11_series_l(x, F1), 0.0, 1e-6, target)
    assert cap_from_rv(rv, F1) == pytest.approx(c, rel=1e-9)
    assert ind_from_rv(rv, F1) == pytest.approx(l, rel=1e-9)


def test_three_db_cap_value():
    # 1.276 pF reflects -3 dB at 5 GHz on 50 ohm
    assert cap_from_rv(-3.0, 5e9) == pytest.approx(1.276e-12, rel=2e-3)


@pytest.mark.parametrize("rv", [0.0, 1.0])
def test_rv_must_be_negative(rv):
    with pytest.raises(InvalidArgument):
        cap_from_rv(rv, F1)
    with pytest.raises(InvalidArgument):
        ind_from_rv(rv, F1)
    with pytest.raises(InvalidArgument):
        LumpedViaSpec(F1, rv)


@pytest.mark.parametrize("flavor", ["capacitive", "inductive"])
@pytest.mark.parametrize("rv", [-20.0, -9.0, -3.0, -2.0])
def test_lumped_via_round_trip(flavor, rv):
    g = make_grid(4 * F1, 400)
    s = abcd_to_s(lumped_via_pairleg(LumpedViaSpec(F1, rv, flavor), g))
    k = g.index_of(F1)
    assert db(s.s[k, 0, 0]) == pytest.approx(rv, rel=1e-9)


def test_lumped_cap_reflection_rises_monotonically():
    g = make_grid(8 * F1, 800)
    s11 = np.abs(abcd_to_s(lumped_via_pairleg(LumpedViaSpec(F1, -10.0), g)).param(1, 1))
    assert np.all(np.diff(s11) > 0)


def test_cap_and_ind_share_magnitudes():
    g = make_grid(8 * F1, 400)
    c = abcd_to_s(lumped_via_pairleg(LumpedViaSpec(F1, -5.0, "capacitive"), g))
    l = abcd_to_s(lumped_via_pairleg(LumpedViaSpec(F1, -5.0, "inductive"), g))
    for i, j in ((1, 1), (2, 1)):
        assert np.allclose(np.abs(c.param(i, j)), np.abs(l.param(i, j)), rtol=1e-9)


def test_stripline_rlcg_linear_dielectric_formulas():
    spec = StriplineSpec(F1, 10.0, db_rdc=0.5, db_rac=6.0, db_gac=4.0, causal_dielectric=False)
    f = np.array([0.3, 1.0, 2.5]) * F1
    t = stripline_rlcg(spec, f)
    t0 = 10.0 * 0.5 / F1
    z = 50.0
    assert np.allclose(t.c, t0 / z)
    assert np.allclose(t.r, 2 * z * (0.5 + 6.0 * np.sqrt(f / F1)) / NEPER_DB)
    l_int = 2 * z * 6.0 * np.sqrt(f / F1) / NEPER_DB / (2 * np.pi * f)
    assert np.allclose(t.l, t0 * z + l_int)
    assert np.allclose(t.g, 2 * 4.0 * (f / F1) / (z * NEPER_DB))
    # internal inductance reactance equals the ac resistance
    assert np.allclose(2 * np.pi * f * l_int, 2 * z * 6.0 * np.sqrt(f / F1) / NEPER_DB)


def test_causal_dielectric_matches_linear_at_f1():
    kw = dict(f1=F1, len_ui=12.0, db_rac=3.0, db_gac=7.0)
    a = stripline_rlcg(StriplineSpec(**kw, causal_dielectric=True), F1)
    b = stripline_rlcg(StriplineSpec(**kw, causal_dielectric=False), F1)
    assert a.c == pytest.approx(b.c, rel=1e-12)
    assert a.g == pytest.approx(b.g, rel=1e-12)
    assert a.r == pytest.approx(b.r, rel=1e-12)


def test_causal_dielectric_constant_loss_tangent():
    spec = StriplineSpec(F1, 12.0, db_gac=7.0)
    f = np.geomspace(0.01, 10, 30) * F1
    t = stripline_rlcg(spec, f)
    tan_d = t.g / (2 * np.pi * f * t.c)
    m = dielectric_exponent(spec)
    assert np.allclose(tan_d, math.tan(m * math.pi / 2))
    # capacitance rises toward low frequency
    assert np.all(np.diff(t.c) < 0)


def test_causal_dielectric_is_kramers_kronig_consistent():
    # Y = j w C1 (j w / w1)^-m / cos(m pi/2) is analytic in the right half plane;
    # check it equals G + j w C built from the synthesized totals
    spec = StriplineSpec(F1, 12.0, db_gac=5.0)
    m = dielectric_exponent(spec)
    f = np.geomspace(0.05, 20, 40) * F1
    w, w1 = 2 * np.pi * f, 2 * np.pi * F1
    c1 = spec.delay / spec.z_ohf
    y = 1j * w * c1 * (1j * w / w1) ** (-m) / math.cos(m * math.pi / 2)
    t = stripline_rlcg(spec, f)
    assert np.allclose(y, t.g + 1j * w * t.c, rtol=1e-12)


@pytest.mark.parametrize("causal", [True, False])
@pytest.mark.parametrize("a,b", [(10.0, 0.0), (0.0, 10.0), (6.0, 9.0), (10.0, 10.0), (0.0, 20.0)])
def test_attenuation_additivity_with_matched_ports(a, b, causal):
    spec = StriplineSpec(F1, 25.0, db_rac=a, db_gac=b, causal_dielectric=causal)
    gl = stripline_gamma(spec, F1)
    assert NEPER_DB * gl.real == pytest.approx(a + b, abs=0.3)


def test_skin_loss_second_order_error_shrinks_with_length():
    # heavy skin loss on a short line departs from the low-loss sum
    err = [abs(NEPER_DB * stripline_gamma(StriplineSpec(F1, n, db_rac=10.0), F1).real - 10.0) for n in (2, 8, 25, 50)]
    assert all(b < a for a, b in zip(err, err[1:]))
    assert err[-1] < 0.1


def test_lossless_stripline_is_pure_delay():
    g = make_grid(8 * F1, 200)
    spec = StriplineSpec(F1, 25.0)
    s = abcd_to_s(stripline_abcd(spec, g))
    assert np.allclose(s.param(2, 1), np.exp(-1j * g.omega * spec.delay), atol=1e-12)
    assert spec.delay == pytest.approx(25 * 0.1e-9)


def test_frequency_scaling_keeps_db():
    spec_a = StriplineSpec(5e9, 6.0, db_rdc=0.3, db_rac=4.0, db_gac=3.0)
    spec_b = StriplineSpec(20e9, 6.0, db_rdc=0.3, db_rac=4.0, db_gac=3.0)
    ga, gb = make_grid(40e9, 200), make_grid(160e9, 200)
    sa = abcd_to_s(stripline_abcd(spec_a, ga)).s
    sb = abcd_to_s(stripline_abcd(spec_b, gb)).s
    assert np.allclose(db(sa), db(sb), atol=1e-9)


def test_skew_splits_leg_delays():
    g = make_grid(8 * F1, 400)
    spec = StriplineSpec(F1, 10.0, skew_ui=0.4)
    assert leg_length_scale(spec, "A") == pytest.approx(0.98)
    assert leg_length_scale(spec, "B") == pytest.approx(1.02)
    a = abcd_to_s(stripline_abcd(spec, g, "A")).param(2, 1)
    b = abcd_to_s(stripline_abcd(spec, g, "B")).param(2, 1)
    ui = 0.5 / F1
    assert np.allclose(a, np.exp(-1j * g.omega * 9.8 * ui))
    assert np.allclose(b, np.exp(-1j * g.omega * 10.2 * ui))
    with pytest.raises(InvalidArgument):
        leg_length_scale(spec, "C")


@pytest.mark.parametrize(
    "kw",
    [dict(len_ui=0.0), dict(len_ui=1.0, z_ohf=0.0), dict(len_ui=1.0, db_rac=-1.0), dict(len_ui=1.0, skew_ui=1.0)],
)
def test_stripline_validation(kw):
    with pytest.raises(InvalidArgument):
        StriplineSpec(F1, **kw)


def test_rlcg_rejects_dc():
    with pytest.raises(InvalidArgument):
        stripline_rlcg(StriplineSpec(F1, 1.0), 0.0)


def test_coupled_lumped_via_calibration():
    f1 = 20e9
    g = make_grid(4 * f1, 400)
    k = g.index_of(f1)
    for flavor in ("capacitive", "inductive"):
        weak = coupled_lumped_via_4port(LumpedViaSpec(f1, -15.0, flavor, xtalk_db=-46.0), g)
        assert db(weak.s[k, 1, 2]) == pytest.approx(-46.0, abs=0.5)
        strong = coupled_lumped_via_4port(LumpedViaSpec(f1, -2.0, flavor, xtalk_db=-46.0), g)
        assert db(strong.s[k, 1, 2]) <= -48.0


def test_coupled_lumped_via_victim_path_matches_uncoupled_limit():
    g = make_grid(40e9, 200)
    spec = LumpedViaSpec(10e9, -6.0, xtalk_db=-90.0)
    vp = abcd_to_s(victim_path(coupled_lumped_via_4port(spec, g))).s
    ref = abcd_to_s(lumped_via_pairleg(LumpedViaSpec(10e9, -6.0), g)).s
    assert np.allclose(vp, ref, atol=1e-3)


def test_coupled_lumped_needs_xtalk():
    with pytest.raises(InvalidArgument):
        coupled_lumped_via_4port(LumpedViaSpec(F1, -6.0), make_grid(1e10, 10))
    with pytest.raises(InvalidArgument):
        LumpedViaSpec(F1, -6.0, xtalk_db=-3.0)


def test_tline_via_no_stub_weak_coupling_is_uniform_line():
    g = make_grid(40e9, 400)
    spec = TlineViaSpec(barrel_len=2e-3, stub_len=0.0, z_leg=60.0, er=4.0, k_xtalk=1e-9)
    s = tline_via_4port(spec, g, 50.0).s
    ref = abcd_to_s(line_abcd(1j * g.omega * 2e-3 / spec.velocity, 60.0, g)).s
    assert np.allclose(np.abs(s[:, 0, 0]), np.abs(ref[:, 0, 0]), atol=1e-6)
    assert spec.velocity == pytest.approx(C0 / 2)


def test_tline_via_quarter_wave_stub_resonance():
    g = make_grid(60e9, 6000)
    stub = 3e-3
    spec = TlineViaSpec(barrel_len=1e-3, stub_len=stub, z_leg=50.0, er=3.5, k_xtalk=0.01)
    s21 = np.abs(tline_via_4port(spec, g).s[:, 1, 0])
    f_quarter = spec.velocity / (4 * stub)
    k = int(np.argmin(s21[: g.index_of(1.5 * f_quarter)]))
    assert g.f[k] == pytest.approx(f_quarter, rel=0.01)
    assert s21[k] < 0.05


def test_tline_via_is_lossless_and_reciprocal():
    g = make_grid(40e9, 300)
    s = tline_via_4port(TlineViaSpec(2e-3, 1.5e-3, 50.0, 3.5, 0.05), g).s
    assert np.allclose(np.einsum("kji,kjl->kil", s.conj(), s), np.eye(4), atol=1e-9)
    assert np.allclose(s, np.swapaxes(s, 1, 2), atol=1e-12)


def test_tline_via_modal_impedances():
    ze, zo = TlineViaSpec(1e-3, 0.0, 50.0, 3.5, 0.2).modal_impedances
    assert ze == pytest.approx(50 * math.sqrt(1.2 / 0.8))
    assert zo == pytest.approx(50 * math.sqrt(0.8 / 1.2))


@pytest.mark.parametrize("k", [0.0, 1.0, -0.1])
def test_tline_via_rejects_bad_coupling(k):
    with pytest.raises(InvalidArgument):
        TlineViaSpec(1e-3, 0.0, k_xtalk=k)


def test_terminal_cap_validation():
    assert TerminalCap(0.0).c == 0.0
    with pytest.raises(InvalidArgument):
        TerminalCap(-1e-15)
