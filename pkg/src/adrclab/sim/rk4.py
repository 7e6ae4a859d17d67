"""One-step RK4 propagators for linear systems with zero-order-held input.

For x' = A x + w with w constant over a step of length dt, classical RK4
collapses exactly to x+ = Phi x + Gamma w with

    Phi   = sum_{k=0..4} (dt*A)^k / k!
    Gamma = dt * sum_{k=0..3} (dt*A)^k / (k+1)!

Precomputing (Phi, Gamma) keeps the per-step cost at two small mat-vecs while
producing the same result as running the four RK4 stages.
"""

from __future__ import annotations

import numpy as np


def rk4_propagators(a: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    ad = a * dt
    eye = np.eye(n)

    phi = eye.copy()
    term = eye.copy()
    for k in range(1, 5):
        term = term @ ad / k
        phi = phi + term

    gam = eye * dt
    term = eye.copy()
    fact = 1.0
    for k in range(1, 4):
        term = term @ ad
        fact *= k + 1
        gam = gam + dt * term / fact
    return phi, gam
