"""Payoffs, metrics, and the experiment drivers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stslab.experiments import (BsScenario, ConvergenceStudy, bs_closed_form,
                                bs_cubic_grid, bs_sinh_grid, bs_uniform_grid,
                                call, clean_threshold, default_bs_params,
                                default_heston_params, delta_surface,
                                digital_range, foulon_grid_v, foulon_grid_x,
                                oscillation_metric, payoff_eval, price_at_spot,
                                put, rms_error, roi_mask, run_bs_study,
                                run_delta_comparison, run_time_convergence)
from stslab.grids import Grid1D, make_uniform
from stslab.operators import UpwindPolicy
from stslab.schemes import rkc

# --------------------------------------------------------------- oscillation

def test_oscillation_frozen_cases():
    assert oscillation_metric(np.array([0.0, 1.0, 0.0, 1.0, 0.0])) == 3.0
    assert oscillation_metric(np.arange(12.0)) == 0.0
    assert oscillation_metric(np.array([0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0])) == 0.0
    assert oscillation_metric(np.full(7, 4.0)) == 0.0


def test_oscillation_guards():
    with pytest.raises(ValueError, match="length >= 3"):
        oscillation_metric(np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="1-D"):
        oscillation_metric(np.zeros((3, 3)))


finite_slices = st.lists(
    st.integers(min_value=-1000, max_value=1000).map(float),
    min_size=3, max_size=30).map(np.array)


@given(finite_slices)
@settings(max_examples=60, deadline=None)
def test_oscillation_nonnegative(values):
    assert oscillation_metric(values) >= 0.0


@given(finite_slices)
@settings(max_examples=60, deadline=None)
def test_oscillation_zero_for_monotone(values):
    values = np.sort(values)
    span = values[-1] - values[0]
    assert oscillation_metric(values) <= 1e-10 * (1.0 + span)


@given(finite_slices, st.sampled_from([2.0, 0.5, 8.0]))
@settings(max_examples=60, deadline=None)
def test_oscillation_positively_homogeneous(values, c):
    # powers of two rescale every intermediate exactly, so the smoothed
    # reference keeps its sign pattern and the metric scales linearly
    assert oscillation_metric(c * values) == pytest.approx(
        c * oscillation_metric(values), rel=1e-12, abs=1e-12)


def test_oscillation_shift_invariant():
    base = np.array([0.0, 2.0, 1.0, 3.0, 1.5, 4.0, 2.0])
    m0 = oscillation_metric(base)
    assert m0 > 0.0
    for c in (-5.0, 0.25, 1e3):
        assert oscillation_metric(base + c) == pytest.approx(m0, rel=1e-9)


def test_clean_threshold_arithmetic():
    assert clean_threshold(1.0, 2.0) == 6.0 + 1e-8
    assert clean_threshold(0.0) == 1e-8
    assert clean_threshold(0.5, floor=0.0) == 1.5


# ------------------------------------------------------------------- payoffs

def test_payoff_eval_kinks_and_bounds():
    g = make_uniform(0.0, 150.0, 15)
    c = payoff_eval(call(100.0), g)
    assert c[10] == 0.0 and c[11] == 10.0 and c[0] == 0.0
    p = payoff_eval(put(100.0), g)
    assert p[10] == 0.0 and p[9] == 10.0 and p[0] == 100.0
    d = payoff_eval(digital_range(10.0, 100.0), g)
    assert d[1] == 0.0              # the barrier nodes themselves pay nothing
    assert d[10] == 0.0
    assert d[2] == 1.0 and d[9] == 1.0 and d[11] == 0.0


def test_payoff_eval_broadcasts_over_v():
    g = make_uniform(0.0, 150.0, 15)
    gv = make_uniform(0.0, 1.0, 4)
    f = payoff_eval(call(100.0), g, gv)
    assert f.shape == (16, 5)
    assert np.array_equal(f, np.repeat(f[:, :1], 5, axis=1))


def test_digital_needs_ordered_barriers():
    with pytest.raises(ValueError, match="low < high"):
        digital_range(100.0, 10.0)


def test_put_call_parity():
    params = default_bs_params()
    k = 87.0
    lhs = bs_closed_form(params, call(k)) - bs_closed_form(params, put(k))
    rhs = (params.spot * np.exp(-params.q * params.expiry)
           - k * np.exp(-params.r * params.expiry))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_closed_form_frozen_values():
    params = default_bs_params()
    assert bs_closed_form(params, digital_range(10.0, 100.0)) == pytest.approx(
        2.7316721566155464e-7, rel=1e-13)
    assert bs_closed_form(params, call(100.0)) == pytest.approx(
        9.51625829810788, rel=1e-13)


# ----------------------------------------------------------- metrics helpers

def test_rms_error_values_and_guards():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([0.0, 2.0, 3.0])
    assert rms_error(a, b) == pytest.approx(np.sqrt(1.0 / 3.0))
    region = np.array([True, False, False])
    assert rms_error(a, b, region) == 1.0
    with pytest.raises(ValueError, match="shape mismatch"):
        rms_error(a, np.zeros(4))
    with pytest.raises(ValueError, match="region shape"):
        rms_error(a, b, np.ones(4, dtype=bool))
    with pytest.raises(ValueError, match="empty region"):
        rms_error(a, b, np.zeros(3, dtype=bool))


def test_roi_mask_counts():
    g = make_uniform(0.0, 150.0, 15)
    mask = roi_mask(g, 50.0, 150.0)
    assert mask.sum() == 11 and mask[5] and not mask[4]
    gv = make_uniform(0.0, 5.0, 10)
    m2 = roi_mask(g, 50.0, 150.0, gv, 0.0, 1.0)
    assert m2.shape == (16, 11)
    assert m2.sum() == 11 * 3


def test_delta_surface_exact_for_linear():
    g = make_uniform(0.0, 10.0, 10)
    d = delta_surface(2.0 * g.nodes, g)
    assert np.allclose(d, 2.0, rtol=0, atol=1e-14)


def test_delta_surface_forward_difference():
    g = make_uniform(0.0, 10.0, 10)
    d = delta_surface(g.nodes**2, g)
    assert np.allclose(d[:-1], 2.0 * g.nodes[:-1] + 1.0)
    assert d[-1] == d[-2]


def test_delta_surface_2d_and_guard():
    g = make_uniform(0.0, 10.0, 5)
    f = np.outer(g.nodes, np.array([1.0, 2.0, 3.0]))
    d = delta_surface(f, g)
    assert np.allclose(d, np.tile([1.0, 2.0, 3.0], (6, 1)))
    with pytest.raises(ValueError, match="at least 3 nodes"):
        delta_surface(np.zeros(2), Grid1D(np.array([0.0, 1.0])))


def test_price_at_spot_interpolation():
    g = make_uniform(0.0, 10.0, 10)
    f = 3.0 * g.nodes + 1.0
    assert price_at_spot(f, g, 4.0) == pytest.approx(13.0)
    assert price_at_spot(f, g, 4.5) == pytest.approx(14.5)
    gv = make_uniform(0.0, 1.0, 4)
    surf = np.outer(g.nodes, gv.nodes)
    assert price_at_spot(surf, g, 3.5, gv, 0.6) == pytest.approx(3.5 * 0.6)
    with pytest.raises(ValueError, match="2-D field"):
        price_at_spot(surf, g, 3.5)
    with pytest.raises(ValueError, match="variance coordinate"):
        price_at_spot(surf, g, 3.5, gv)


# ------------------------------------------------------------- grid builders

def test_foulon_grids_frozen_values():
    gx = foulon_grid_x(100.0, m=100)
    assert gx.nodes[0] == 0.0 and gx.nodes[-1] == 800.0
    assert gx.nodes[50] == pytest.approx(122.5322491188717, rel=1e-13)
    gv = foulon_grid_v(n=50)
    assert gv.nodes[0] == 0.0 and gv.nodes[-1] == 5.0
    assert gv.nodes[1] == pytest.approx(0.0013859503596154292, rel=1e-13)


def test_foulon_grid_v_variants():
    lef = foulon_grid_v(n=20, variant="lefloch", v0=0.12)
    assert lef.nodes[0] == 0.0 and lef.nodes[-1] == 5.0
    # milder stretching than the hard-at-zero variant
    assert lef.spacings[0] > foulon_grid_v(n=20).spacings[0]
    with pytest.raises(ValueError, match="needs v0"):
        foulon_grid_v(n=20, variant="lefloch")
    with pytest.raises(ValueError, match="unknown variant"):
        foulon_grid_v(n=20, variant="tanh")


def test_bs_grid_builders():
    assert np.array_equal(bs_sinh_grid(m=400).nodes,
                          foulon_grid_x(100.0, m=400).nodes)
    assert bs_uniform_grid(m=100).spacings.max() == pytest.approx(1.5)
    cubic = bs_cubic_grid(m=400, alpha=0.01)
    assert cubic.nodes[0] == 0.0 and cubic.nodes[-1] == 150.0
    assert cubic.spacings.min() < 1e-3


# ---------------------------------------------------------------- the drivers

def test_time_convergence_small(heston_params, gx_small, gv_small):
    study = ConvergenceStudy(
        params=heston_params, gx=gx_small, gv=gv_small,
        policy=UpwindPolicy.PARTIAL_FITTING, family=rkc(10.0),
        payoff=call(heston_params.strike), ladder=(20, 40),
        l_ref=400, validate_reference=True, grid_label="small")
    res = run_time_convergence(study)
    assert res.reference_check is not None and res.reference_check < 1e-4
    assert [r.l for r in res.reports] == [20, 40]
    assert not any(r.exploded for r in res.reports)
    assert res.reports[1].rms_error < 1.2 * res.reports[0].rms_error
    assert all(np.isfinite(r.price_at_spot) for r in res.reports)
    assert all(log["family"] == "rkc(eps=10)" for log in res.logs)
    # a call gains value with variance; check the reference at the money
    i = int(np.argmin(np.abs(gx_small.nodes - heston_params.strike)))
    dv = np.diff(res.reference[i, :])
    assert dv.min() > -1e-8 * np.abs(res.reference[i, :]).max()


def test_delta_comparison_smoke(heston_params, gx_small, gv_small):
    out = run_delta_comparison(heston_params, gx_small, gv_small,
                               UpwindPolicy.PARTIAL_FITTING, l=10)
    assert set(out) == {"rkc(eps=10)", "rkl", "rkg(g=2)"}
    for label, res in out.items():
        assert np.isfinite(res["osc"]) and res["osc"] >= 0.0
        assert res["delta"].shape == (gx_small.m + 1,)
        assert res["report"].l == 10
        assert res["log"]["family"] == label


def test_bs_study_structure(bs_params):
    scenario = BsScenario(params=bs_params, payoff=digital_range(10.0, 100.0),
                          grid=bs_uniform_grid(m=60), policy=UpwindPolicy.NONE,
                          l=40, grid_label="uniform")
    res = run_bs_study(scenario)
    assert [r.scheme for r in res.reports] == ["trbdf2", "rkl", "rkg(g=2)",
                                               "rkc(eps=10)"]
    assert set(res.curves) == {"trbdf2", "rkl", "rkg(g=2)", "rkc(eps=10)"}
    assert all(curve.shape == (61,) for curve in res.curves.values())
    assert np.isfinite(res.threshold) and res.threshold > 0.0
    assert res.spectrum is not None and res.spectrum.n == 61
    assert len(res.logs) == 3
    assert not any(r.exploded for r in res.reports)
