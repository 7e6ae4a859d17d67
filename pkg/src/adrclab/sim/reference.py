"""Reference generators providing r(t) together with exact derivatives.

The filtered step is realized as a second-order low-pass state chain whose
states *are* the derivatives (no numerical differentiation); sinusoid
derivatives are analytic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rk4 import rk4_propagators


@dataclass(frozen=True)
class FilteredStep:
    """Unit-style step shaped by the low-pass filter 1/(tau*s + 1)^2."""

    tau: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("filter time constant must be positive")


@dataclass(frozen=True)
class Sinusoid:
    amplitude: float = 1.0
    omega: float = 1.0


ReferenceSpec = FilteredStep | Sinusoid


def reference_matrix(spec: ReferenceSpec, t: np.ndarray, dt: float,
                     n_derivs: int) -> np.ndarray:
    """Sampled reference and derivatives, shape (len(t), n_derivs + 1).

    Column j holds the j-th time derivative of r.
    """
    n = len(t)
    out = np.empty((n, n_derivs + 1))
    if isinstance(spec, Sinusoid):
        for j in range(n_derivs + 1):
            out[:, j] = spec.amplitude * spec.omega ** j * np.sin(
                spec.omega * t + j * np.pi / 2.0)
        return out

    tau, amp = spec.tau, spec.amplitude
    a_f = np.array([[0.0, 1.0], [-1.0 / tau ** 2, -2.0 / tau]])
    phi, gam = rk4_propagators(a_f, dt)
    gw = gam @ np.array([0.0, amp / tau ** 2])
    p00, p01 = phi[0]
    p10, p11 = phi[1]
    r = np.empty(n)
    rd = np.empty(n)
    x0 = x1 = 0.0
    for k in range(n):
        r[k] = x0
        rd[k] = x1
        x0, x1 = (p00 * x0 + p01 * x1 + gw[0],
                  p10 * x0 + p11 * x1 + gw[1])
    out[:, 0] = r
    if n_derivs >= 1:
        out[:, 1] = rd
    if n_derivs >= 2:
        out[:, 2] = (amp - 2.0 * tau * rd - r) / tau ** 2
    for j in range(3, n_derivs + 1):
        out[:, j] = (-2.0 * tau * out[:, j - 1] - out[:, j - 2]) / tau ** 2
    return out
