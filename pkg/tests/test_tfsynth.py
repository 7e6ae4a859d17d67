"""Transfer-function synthesis from the closed-loop resolvent."""

from dataclasses import replace

import numpy as np
import pytest

from adrclab.design import DesignParams, make_variant, synthesize
from adrclab.ratpoly import freq_response
from adrclab.tfsynth import (check_equivalence, realizability_report,
                             synth_eadrc_tf, synth_g_fb, synth_g_ff,
                             synth_g_pf, synth_g_pf_bar, synth_g_pf_mod,
                             synth_g_r, synth_tfset, verify_closed_forms)

TUNING_1 = DesignParams(n=1, b0=1.0, omega_cl=3.0, k_eso=8.0)
TUNING_2 = DesignParams(n=2, b0=1.0, omega_cl=3.0, k_eso=8.0)


def test_feedback_path_first_order_by_hand():
    # k1 = 3, l = (48, 576):
    # g_fb = (k1 l1 + l2) s + k1 l2 over s^2 + (k1 + l1) s
    g = synth_g_fb(synthesize(TUNING_1))
    assert np.allclose(g.num.coeffs, (1728.0, 720.0), rtol=1e-12)
    assert np.allclose(g.den.coeffs, (0.0, 51.0, 1.0), rtol=1e-12)


def test_prefilter_core_dc_gain_and_degrees():
    for p in (TUNING_1, TUNING_2):
        d = synthesize(p)
        bar = synth_g_pf_bar(d)
        assert bar.properness == "improper"
        assert bar.degrees == (p.n + 1, p.n)
        # unity closed-loop DC tracking requires dc(g_pf_bar) = 1/k1
        dc = bar.num.coeff(0) / bar.den.coeff(0)
        assert dc == pytest.approx(1.0 / d.k[0], rel=1e-12)


def test_modified_prefilter_first_order_by_hand():
    g = synth_g_pf_mod(synthesize(TUNING_1))
    # (l1 s + l2) / ((k1 l1 + l2) s + k1 l2), before canonicalization
    ref_num = np.array([576.0, 48.0])
    ref_den = np.array([1728.0, 720.0])
    scale = ref_den[-1]
    assert np.allclose(g.num.coeffs, ref_num / scale, rtol=1e-12)
    assert np.allclose(g.den.coeffs, ref_den / scale, rtol=1e-12)


def test_feedforward_is_zero_dc_high_pass():
    for p in (TUNING_1, TUNING_2):
        d = synthesize(p)
        ff = synth_g_ff(d)
        assert ff.properness == "proper"
        assert ff.degrees == (p.n, p.n)
        assert ff.num.coeff(0) == 0.0  # zero DC gain
        # high-frequency limit 1/b0 (after the integrator cancellation)
        hf = ff.num.coeffs[-1] / ff.den.coeffs[-1]
        assert hf == pytest.approx(1.0 / d.b0, rel=1e-12)


def test_reference_polynomial_by_case():
    d = synthesize(TUNING_2)
    assert synth_g_r(make_variant(d, "A"), d).coeffs == (d.k[0],)
    assert synth_g_r(make_variant(d, "B"), d).coeffs == (d.k[0], d.k[1], 1.0)


def test_full_prefilter_is_reference_poly_times_core():
    d = synthesize(TUNING_2)
    v = make_variant(d, "B")
    pf = synth_g_pf(v, d)
    bar = synth_g_pf_bar(d)
    w = np.logspace(-2, 2, 60)
    r_poly = synth_g_r(v, d)
    ref = np.array([r_poly(1j * x) for x in w]) * freq_response(bar, w)
    assert np.allclose(freq_response(pf, w), ref, rtol=1e-10)


def test_realizable_decomposition_identity():
    # g_fb * g_pf_bar == g_fb * g_pf_mod + g_ff on the frequency grid
    for p in (TUNING_1, TUNING_2):
        d = synthesize(p)
        t = synth_tfset(d)
        w = np.logspace(-3, 3, 200)
        fb = freq_response(t.g_fb, w)
        lhs = fb * freq_response(t.g_pf_bar, w)
        rhs = fb * freq_response(t.g_pf_mod, w) + freq_response(t.g_ff, w)
        assert np.max(np.abs(lhs - rhs) / np.abs(lhs)) < 1e-10


def test_error_based_scheme_matches_feedback_path():
    d = synthesize(TUNING_2)
    g_fb = synth_g_fb(d)
    g_e = synth_eadrc_tf(d)
    n = max(len(g_fb.num.coeffs), len(g_e.num.coeffs))
    assert np.allclose(g_fb.num.coeffs, g_e.num.coeffs, rtol=1e-12)
    assert np.allclose(g_fb.den.coeffs, g_e.den.coeffs, rtol=1e-12)
    res = check_equivalence(d)
    assert res["equivalent"]
    assert res["coeff_deviation"] < 1e-9 and res["grid_deviation"] < 1e-9


def test_equivalence_negative_control():
    # inconsistent gains (l scaled without rebuilding A_CL) must be flagged
    d = synthesize(TUNING_1)
    broken = replace(d, l=tuple(1.05 * g for g in d.l))
    res = check_equivalence(broken)
    assert not res["equivalent"]
    assert res["coeff_deviation"] > 1e-3


def test_closed_form_cross_check_first_order():
    res = verify_closed_forms(synthesize(TUNING_1))
    assert res["matches_derived_form"]
    # the often-printed (k1 + l2) s-coefficient must be flagged as inconsistent
    assert not res["printed_den_consistent"]
    assert res["printed_den_deviation"] > 1e-3
    assert "note" in res


def test_closed_form_cross_check_second_order():
    res = verify_closed_forms(synthesize(TUNING_2))
    assert res["matches_derived_form"]
    assert res["printed_den_consistent"]


def test_closed_forms_only_low_orders():
    p = DesignParams(n=3, b0=1.0, omega_cl=2.0, k_eso=4.0)
    with pytest.raises(ValueError):
        verify_closed_forms(synthesize(p))


def test_realizability_report_contents():
    rep = realizability_report(synth_tfset(synthesize(TUNING_2)))
    assert rep["order"] == 2
    assert rep["feedback_has_free_integrator"]
    tfs = rep["tfs"]
    assert tfs["g_fb"]["properness"] == "strictly proper"
    assert not tfs["g_pf_bar"]["realizable"]
    assert tfs["g_ff"]["realizable"] and tfs["g_pf_mod"]["realizable"]
    assert set(rep["modules"]) == {"module1", "module2", "module3"}
