"""Fixed-step closed-loop co-simulation engine.

Plant, observer and reference filter are advanced with classical RK4 under
zero-order-held inputs (see :mod:`.rk4`); the controller output is computed
once per sample and held over the step.  The per-step loop is delegated to the
compiled kernel when the extension built, otherwise to its pure-Python twin.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace

import numpy as np

from ..design import AdrcDesign, DesignParams, GainVariant, make_variant, \
    observer_matrices, synthesize
from ..ratpoly import RationalTf
from .reference import reference_matrix
from .rk4 import rk4_propagators
from .scenario import Scenario

DIVERGENCE_LIMIT = 1e6

if os.environ.get("ADRC_LAB_PURE_PYTHON"):
    _kernel = None
else:
    try:
        from . import _loopstep as _kernel
    except ImportError:
        _kernel = None
from . import _kernel_py

KERNEL_BACKEND = "cython" if _kernel is not None else "python"
_run_loop = _kernel.run_loop if _kernel is not None else _kernel_py.run_loop


def plant_realization(tf: RationalTf) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Controllable-canonical state-space triple (A, b, c) of a strictly proper TF."""
    if tf.properness != "strictly proper":
        raise ValueError("simulation requires a strictly proper plant")
    m = tf.den.degree
    a = np.zeros((m, m))
    for i in range(m - 1):
        a[i, i + 1] = 1.0
    a[m - 1, :] = [-tf.den.coeff(j) for j in range(m)]
    b = np.zeros(m)
    b[m - 1] = 1.0
    c = np.array([tf.num.coeff(j) for j in range(m)])
    return a, b, c


@dataclass(frozen=True)
class SimTrace:
    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    u: np.ndarray
    e: np.ndarray
    xhat: np.ndarray
    metrics: dict
    diverged: bool
    scheme: str

    def to_csv(self, path) -> None:
        """CSV contract: t,r,y,u,e at 17 significant digits, LF line endings."""
        with open(path, "w", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "r", "y", "u", "e"])
            for row in zip(self.t, self.r, self.y, self.u, self.e):
                w.writerow([f"{v:.17g}" for v in row])


def compute_metrics(t, r, y, u, e, dist_t_on=None) -> dict:
    """Trace metrics; transient metrics use the pre-disturbance window."""
    if dist_t_on is not None and dist_t_on < t[-1]:
        w = t < dist_t_on
    else:
        w = np.ones_like(t, dtype=bool)
    r_final = r[w][-1]
    if abs(r_final) > 1e-12:
        overshoot = max(0.0, (float(np.max(y[w])) - r_final) / abs(r_final)) * 100.0
        tol = 0.02 * abs(r_final)
        outside = np.nonzero(np.abs(y[w] - r_final) > tol)[0]
        if len(outside) == 0:
            settling = 0.0
        elif outside[-1] + 1 >= int(w.sum()):
            settling = float("nan")  # never inside the band by the window end
        else:
            settling = float(t[w][outside[-1] + 1])
    else:
        overshoot = float("nan")
        settling = float("nan")
    tail = t >= t[-1] / 2.0
    return {
        "overshoot_pct": overshoot,
        "settling_time_2pct": settling,
        "iae": float(np.trapezoid(np.abs(e), t)),
        "control_energy": float(np.trapezoid(u * u, t)),
        "rms_error_window": float(np.sqrt(np.mean(e[tail] ** 2))),
    }


def _kernel_inputs(sc: Scenario, d: AdrcDesign):
    n = d.n
    a_p, b_p, c_p = plant_realization(sc.plant.tf)
    phi_p, gam_p = rk4_propagators(a_p, sc.dt)
    gam_pb = gam_p @ b_p

    a_o, b_o, c_o = observer_matrices(d.params)
    phi_o, gam_o = rk4_propagators(a_o - np.outer(np.asarray(d.l), c_o), sc.dt)
    sign = -1.0 if sc.scheme == "eadrc" else 1.0
    gam_ob = sign * (gam_o @ b_o)
    gam_ol = gam_o @ np.asarray(d.l)

    variant = make_variant(d, sc.case)
    n_samples = int(round(sc.t_end / sc.dt)) + 1
    t = np.arange(n_samples) * sc.dt
    rmat = reference_matrix(sc.reference, t, sc.dt, n)

    noise = np.zeros(n_samples)
    if sc.noise.std > 0:
        rng = np.random.default_rng(sc.noise.seed)
        raw = rng.standard_normal(n_samples)
        noise = np.where(t >= sc.noise.t_on, sc.noise.std * raw, 0.0)

    dist_start = n_samples + 1
    if sc.disturbance.amplitude != 0.0:
        dist_start = int(np.ceil(sc.disturbance.t_on / sc.dt - 1e-9))

    delay_steps = int(round(sc.plant.tf.delay / sc.dt))
    return dict(
        phi_p=phi_p, gam_pb=gam_pb, c_p=c_p, phi_o=phi_o, gam_ob=gam_ob,
        gam_ol=gam_ol, k_row=d.k_row, inv_b0=1.0 / d.b0, k1=d.k[0],
        kr=np.asarray(variant.kr), eadrc=sc.scheme == "eadrc", rmat=rmat,
        noise=noise, dist_amp=sc.disturbance.amplitude, dist_start=dist_start,
        delay_steps=delay_steps, t=t,
    )


def simulate(sc: Scenario, design: AdrcDesign | None = None) -> SimTrace:
    """Fixed-step RK4 co-simulation of one scenario."""
    d = design if design is not None else synthesize(sc.params)
    inp = _kernel_inputs(sc, d)
    t = inp.pop("t")
    n_samples = len(t)
    r = np.empty(n_samples)
    y = np.empty(n_samples)
    u = np.empty(n_samples)
    e = np.empty(n_samples)
    xhat = np.empty((n_samples, d.n + 1))
    status = _run_loop(**inp, y_abort=DIVERGENCE_LIMIT,
                       r_out=r, y_out=y, u_out=u, e_out=e, xo_out=xhat)
    diverged = status >= 0
    if diverged:
        end = status + 1
        t, r, y, u, e, xhat = (arr[:end] for arr in (t, r, y, u, e, xhat))
    scheme = sc.scheme if sc.scheme == "eadrc" else f"oadrc-{sc.case}"
    metrics = {} if diverged else compute_metrics(
        t, r, y, u, e,
        sc.disturbance.t_on if sc.disturbance.amplitude != 0.0 else None)
    return SimTrace(t=t, r=r, y=y, u=u, e=e, xhat=xhat, metrics=metrics,
                    diverged=diverged, scheme=scheme)


@dataclass(frozen=True)
class SweepItem:
    value: float
    trace: SimTrace | None
    error: str | None = None


def sweep(sc: Scenario, parameter: str, values) -> list[SweepItem]:
    """One simulate per parameter value (shared seed and reference).

    Per-item failures are captured, not propagated, so one diverging tuning
    does not abort the sweep.
    """
    if parameter not in ("k_eso", "omega_cl"):
        raise ValueError("parameter must be 'k_eso' or 'omega_cl'")
    values = list(values)
    if not values:
        raise ValueError("values must be nonempty")
    items = []
    for v in values:
        try:
            params = replace(sc.params, **{parameter: float(v)})
            trace = simulate(replace(sc, params=params))
            items.append(SweepItem(value=float(v), trace=trace))
        except Exception as exc:  # noqa: BLE001 - per-item error contract
            items.append(SweepItem(value=float(v), trace=None, error=str(exc)))
    return items


def step_oadrc(state: np.ndarray, d: AdrcDesign, variant: GainVariant,
               r_and_derivs, y_measured: float, dt: float):
    """Single controller+observer update of the output-based scheme.

    Control uses the current observer state; the observer is then advanced one
    RK4 step with u and the measured output held.
    """
    state = np.asarray(state, dtype=float)
    rd = np.asarray(r_and_derivs, dtype=float)
    u = (d.k[0] * rd[0] + float(np.dot(variant.kr, rd[1:d.n + 1]))
         - float(d.k_row @ state)) / d.b0
    a, b, c = observer_matrices(d.params)
    phi, gam = rk4_propagators(a - np.outer(np.asarray(d.l), c), dt)
    new = phi @ state + gam @ (b * u + np.asarray(d.l) * y_measured)
    return new, u


def step_eadrc(state: np.ndarray, d: AdrcDesign, e_measured: float, dt: float):
    """Single update of the error-based scheme (note the flipped control sign)."""
    state = np.asarray(state, dtype=float)
    u = float(d.k_row @ state) / d.b0
    a, b, c = observer_matrices(d.params)
    phi, gam = rk4_propagators(a - np.outer(np.asarray(d.l), c), dt)
    new = phi @ state + gam @ (-b * u + np.asarray(d.l) * e_measured)
    return new, u
