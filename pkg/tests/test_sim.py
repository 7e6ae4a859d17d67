"""Closed-loop simulation: propagators, references, kernels, metrics."""

import math
from dataclasses import replace

import numpy as np
import pytest

from adrclab.design import DesignParams, make_variant, synthesize
from adrclab.loopan import PLANTS
from adrclab.ratpoly import RationalTf, eval_tf
from adrclab.sim import (FilteredStep, Noise, Scenario, Sinusoid,
                         simulate, sweep)
from adrclab.sim import _kernel_py
from adrclab.sim.engine import (KERNEL_BACKEND, _kernel_inputs,
                                compute_metrics, plant_realization,
                                step_eadrc, step_oadrc)
from adrclab.sim.reference import reference_matrix
from adrclab.sim.rk4 import rk4_propagators
from adrclab.sim.scenario import preset_scenarios

BASE = Scenario(
    plant=PLANTS["P2"],
    params=DesignParams(n=2, b0=1.0, omega_cl=3.0, k_eso=8.0),
    reference=FilteredStep(tau=0.1),
    t_end=10.0,
)


def test_rk4_propagators_match_manual_stages():
    # one propagator step must equal a hand-rolled classical RK4 step of
    # xdot = A x + w with w held constant
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3))
    x = rng.standard_normal(3)
    w = rng.standard_normal(3)
    dt = 0.01
    f = lambda x: a @ x + w
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    ref = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    phi, gam = rk4_propagators(a, dt)
    assert np.allclose(phi @ x + gam @ w, ref, rtol=1e-13)


def test_rk4_propagators_scalar_series():
    phi, gam = rk4_propagators(np.array([[-2.0]]), 0.1)
    z = -0.2
    assert phi[0, 0] == pytest.approx(sum(z ** k / math.factorial(k)
                                          for k in range(5)), rel=1e-15)


def test_filtered_step_reference_and_derivatives():
    t = np.arange(0, 5.0, 1e-3)
    out = reference_matrix(FilteredStep(tau=0.1, amplitude=2.0), t, 1e-3, 3)
    assert out[0, 0] == 0.0
    assert out[-1, 0] == pytest.approx(2.0, rel=1e-6)
    # column j+1 is the derivative of column j (checked by central difference)
    for j in range(3):
        fd = np.gradient(out[:, j], 1e-3)
        err = np.max(np.abs(fd[5:-5] - out[5:-5, j + 1]))
        assert err < 2e-2 * max(1.0, np.max(np.abs(out[:, j + 1])))


def test_sinusoid_reference_derivatives_analytic():
    t = np.linspace(0, 3.0, 500)
    out = reference_matrix(Sinusoid(amplitude=2.0, omega=1.5), t, t[1], 2)
    assert np.allclose(out[:, 0], 2.0 * np.sin(1.5 * t), rtol=1e-12)
    assert np.allclose(out[:, 1], 3.0 * np.cos(1.5 * t), rtol=1e-12)
    assert np.allclose(out[:, 2], -4.5 * np.sin(1.5 * t), atol=1e-12)


def test_plant_realization_matches_frequency_response():
    tf = PLANTS["P3"].tf
    a, b, c = plant_realization(tf)
    for w in (0.1, 0.7, 4.0):  # avoid the plant pole at omega = 1
        h = c @ np.linalg.solve(1j * w * np.eye(3) - a, b)
        assert h == pytest.approx(eval_tf(tf, w), rel=1e-12)


def test_plant_realization_rejects_biproper():
    with pytest.raises(ValueError):
        plant_realization(RationalTf.from_coeffs([1.0, 1.0], [1.0, 1.0]))


def test_scenario_validation():
    with pytest.raises(ValueError):
        replace(BASE, scheme="pid")
    with pytest.raises(ValueError):
        replace(BASE, dt=-1e-3)
    with pytest.raises(ValueError):
        Scenario(plant=PLANTS["P1"], params=BASE.params, dt=0.05)  # > delay/10


def test_backend_parity():
    # compiled kernel and its pure-Python twin run the same recursion; only
    # summation order differs (BLAS dot vs sequential loop)
    ext = pytest.importorskip("adrclab.sim._loopstep")
    sc = replace(BASE, scheme="eadrc", t_end=3.0,
                 disturbance=replace(BASE.disturbance, amplitude=0.3, t_on=1.5),
                 noise=Noise(std=0.01, t_on=2.0, seed=4))
    d = synthesize(sc.params)
    outs = []
    for kernel in (ext.run_loop, _kernel_py.run_loop):
        inp = _kernel_inputs(sc, d)
        t = inp.pop("t")
        n = len(t)
        r, y, u, e = (np.empty(n) for _ in range(4))
        xo = np.empty((n, d.n + 1))
        status = kernel(**inp, y_abort=1e6, r_out=r, y_out=y, u_out=u,
                        e_out=e, xo_out=xo)
        assert status == -1
        outs.append((y.copy(), u.copy(), xo.copy()))
    for a, b in zip(outs[0], outs[1]):
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_case_gains_degenerate_without_reference_derivatives():
    # with all derivative columns zero, every output-based case produces the
    # same control signal
    d = synthesize(BASE.params)
    ys = []
    for case in ("A", "A1", "B"):
        sc = replace(BASE, scheme="oadrc", case=case, t_end=2.0)
        inp = _kernel_inputs(sc, d)
        inp.pop("t")
        inp["rmat"] = inp["rmat"].copy()
        inp["rmat"][:, 1:] = 0.0
        n = inp["rmat"].shape[0]
        r, y, u, e = (np.empty(n) for _ in range(4))
        xo = np.empty((n, d.n + 1))
        _kernel_py.run_loop(**inp, y_abort=1e6, r_out=r, y_out=y, u_out=u,
                            e_out=e, xo_out=xo)
        ys.append(y.copy())
    assert np.array_equal(ys[0], ys[1])
    assert np.array_equal(ys[0], ys[2])


def test_simulate_tracks_filtered_step():
    for scheme, case in (("oadrc", "A"), ("oadrc", "B"), ("eadrc", "A")):
        tr = simulate(BASE.with_scheme(scheme, case))
        assert not tr.diverged
        assert abs(tr.e[-1]) < 1e-4
        assert tr.metrics["iae"] < 1.0


def test_simulate_rejects_disturbance():
    sc = replace(BASE, scheme="eadrc", t_end=20.0,
                 disturbance=replace(BASE.disturbance, amplitude=0.5, t_on=10.0))
    tr = simulate(sc)
    assert not tr.diverged
    # disturbance is visible shortly after t_on and rejected by the end
    i_on = np.searchsorted(tr.t, 10.0)
    i_dip = np.searchsorted(tr.t, 10.5)
    assert np.max(np.abs(tr.e[i_on:i_dip])) > 1e-3
    assert abs(tr.e[-1]) < 1e-4


def test_simulate_divergence_truncates():
    # aggressive tuning on the dead-time plant destabilizes the loop
    sc = Scenario(plant=PLANTS["P1"],
                  params=DesignParams(n=1, b0=1.0, omega_cl=4.0, k_eso=8.0),
                  reference=FilteredStep(tau=0.1), t_end=10.0)
    tr = simulate(sc.with_scheme("eadrc"))
    assert tr.diverged
    assert tr.metrics == {}
    assert tr.t[-1] < 10.0
    assert np.abs(tr.y[-1]) > 1e6


def test_single_step_api_matches_kernel():
    sc = replace(BASE, scheme="oadrc", case="B", t_end=0.5)
    d = synthesize(sc.params)
    variant = make_variant(d, "B")
    inp = _kernel_inputs(sc, d)
    inp.pop("t")
    n = inp["rmat"].shape[0]
    r, y, u, e = (np.empty(n) for _ in range(4))
    xo = np.empty((n, d.n + 1))
    _kernel_py.run_loop(**inp, y_abort=1e6, r_out=r, y_out=y, u_out=u,
                        e_out=e, xo_out=xo)
    state = np.zeros(d.n + 1)
    for k in range(40):
        assert np.allclose(state, xo[k], rtol=1e-9, atol=1e-9)
        state, uk = step_oadrc(state, d, variant, inp["rmat"][k], y[k], sc.dt)
        assert uk == pytest.approx(u[k], rel=1e-9, abs=1e-9)


def test_single_step_eadrc_sign():
    d = synthesize(BASE.params)
    state = np.zeros(d.n + 1)
    state, u0 = step_eadrc(state, d, 1.0, 1e-3)
    assert u0 == 0.0
    _, u1 = step_eadrc(state, d, 1.0, 1e-3)
    assert u1 > 0.0  # positive error drives positive control


def test_compute_metrics_synthetic_trace():
    t = np.linspace(0, 10, 10001)
    r = np.ones_like(t)
    y = 1.0 + 0.2 * np.exp(-t) * np.cos(5 * t)
    m = compute_metrics(t, r, y, np.zeros_like(t), r - y)
    assert m["overshoot_pct"] == pytest.approx(20.0, rel=0.01)
    # |y - 1| = 0.2 exp(-t) |cos 5t| last exceeds 0.02 near t = ln(10)
    assert 2.0 < m["settling_time_2pct"] < 2.5
    assert m["iae"] > 0.0 and m["control_energy"] == 0.0


def test_compute_metrics_windows_out_disturbance():
    t = np.linspace(0, 20, 2001)
    y = np.ones_like(t)
    y[t >= 10.0] = 1.5  # disturbance bump must not count as overshoot
    m = compute_metrics(t, np.ones_like(t), y, np.zeros_like(t),
                        1.0 - y, dist_t_on=10.0)
    assert m["overshoot_pct"] == 0.0


def test_sweep_captures_bad_values():
    sc = replace(BASE, scheme="eadrc", t_end=2.0)
    items = sweep(sc, "k_eso", [8.0, 0.5])
    assert items[0].error is None and not items[0].trace.diverged
    assert items[1].trace is None and "k_eso" in items[1].error
    with pytest.raises(ValueError):
        sweep(sc, "b0", [1.0])
    with pytest.raises(ValueError):
        sweep(sc, "k_eso", [])


def test_trace_csv_format(tmp_path):
    tr = simulate(replace(BASE, scheme="eadrc", t_end=1.0))
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "t,r,y,u,e"
    assert len(lines) == len(tr.t) + 1
    row = [float(x) for x in lines[-1].split(",")]
    assert row == [tr.t[-1], tr.r[-1], tr.y[-1], tr.u[-1], tr.e[-1]]


def test_presets_complete():
    presets = preset_scenarios()
    assert set(presets) == {"fig5", "fig5b", "fig6", "fig6-slowref",
                            "fig7", "fig10"}
    assert presets["fig10"].plant.label == "P3"
    assert isinstance(presets["fig10"].reference, Sinusoid)
    assert presets["fig6"].noise.std > 0.0


def test_backend_reported():
    assert KERNEL_BACKEND in ("cython", "python")
