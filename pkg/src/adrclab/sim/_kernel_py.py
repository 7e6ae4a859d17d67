"""Pure-Python twin of the compiled co-simulation kernel.

Must stay semantically identical to ``_loopstep.pyx``: one zero-order-hold
sample per step, controller and plant advanced by the precomputed RK4
propagators, dead time through a ring buffer of held samples.
"""

from __future__ import annotations

import numpy as np


def run_loop(phi_p, gam_pb, c_p, phi_o, gam_ob, gam_ol, k_row, inv_b0, k1, kr,
             eadrc, rmat, noise, dist_amp, dist_start, delay_steps, y_abort,
             r_out, y_out, u_out, e_out, xo_out):
    """Run the closed loop; returns the divergence sample index or -1."""
    n_samples = r_out.shape[0]
    xp = np.zeros(phi_p.shape[0])
    xo = np.zeros(phi_o.shape[0])
    buf = np.zeros(max(delay_steps, 1))
    n_kr = kr.shape[0]
    for k in range(n_samples):
        y = float(c_p @ xp)
        ym = y + noise[k]
        r = rmat[k, 0]
        if eadrc:
            u = inv_b0 * float(k_row @ xo)
            inj = r - ym
        else:
            u = inv_b0 * (k1 * r + float(kr @ rmat[k, 1:1 + n_kr])
                          - float(k_row @ xo))
            inj = ym
        r_out[k] = r
        y_out[k] = y
        u_out[k] = u
        e_out[k] = r - y
        xo_out[k] = xo
        if abs(y) > y_abort:
            return k
        if k == n_samples - 1:
            break
        if delay_steps > 0:
            idx = k % delay_steps
            ud = buf[idx]
            buf[idx] = u
        else:
            ud = u
        v = ud + (dist_amp if k >= dist_start else 0.0)
        xp = phi_p @ xp + gam_pb * v
        xo = phi_o @ xo + gam_ob * u + gam_ol * inj
    return -1
