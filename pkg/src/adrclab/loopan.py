"""Closed-loop frequency-domain analysis with exact dead-time handling.

Every closed-loop quantity is evaluated pointwise in frequency (never folded
into polynomial closed forms): dead time makes the open loop non-rational, and
pointwise evaluation treats it exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .design import AdrcDesign, make_variant
from .ratpoly import Polynomial, RationalTf, freq_response
from .tfsynth import TfSet, synth_g_r

# Default analysis band: two decades of headroom around every tuning used here.
DEFAULT_BAND = (1e-3, 1e3)
DEFAULT_POINTS = 2000

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PlantModel:
    tf: RationalTf
    label: str = ""

    def __post_init__(self):
        if self.tf.properness == "improper":
            raise ValueError("plant must be proper or strictly proper")


PLANTS = {
    # first-order lag with 0.2 s dead time
    "P1": PlantModel(RationalTf.from_coeffs([1.0], [1.0, 1.0], delay=0.2), "P1"),
    # normalized second-order system, unity DC gain
    "P2": PlantModel(RationalTf.from_coeffs([1.0], [1.0, 2.0, 1.0]), "P2"),
    # third-order toy plant
    "P3": PlantModel(RationalTf.from_coeffs([1.0], [1.0, 1.0, 1.0, 1.0]), "P3"),
}


def _poly_on_grid(p: Polynomial, omegas: np.ndarray) -> np.ndarray:
    return np.polyval(list(reversed(p.coeffs)) or [0.0], 1j * np.asarray(omegas, float))


@dataclass(frozen=True)
class LoopSet:
    """Frequency-response evaluators of the closed loop.

    g_yd, g_un and any margin computed from g_ol are shared by the output- and
    error-based schemes; only the reference-to-error maps depend on the
    pre-filter path.
    """

    g_ol: Evaluator
    g_yd: Evaluator
    g_un: Evaluator
    g_er_o_case_a: Evaluator
    g_er_o_case_b: Evaluator
    g_er_e: Evaluator


def build_loopset(t: TfSet, d: AdrcDesign, p: PlantModel) -> LoopSet:
    g_fb, g_pf_bar = t.g_fb, t.g_pf_bar
    g_r_a = synth_g_r(make_variant(d, "A"), d)
    g_r_b = synth_g_r(make_variant(d, "B"), d)

    def g_ol(w):
        return freq_response(g_fb, w) * freq_response(p.tf, w)

    def g_yd(w):
        return freq_response(p.tf, w) / (1.0 + g_ol(w))

    def g_un(w):
        return -freq_response(g_fb, w) / (1.0 + g_ol(w))

    def g_er_e(w):
        ol = g_ol(w)
        return 1.0 - ol / (1.0 + ol)

    def _g_er_o(g_r: Polynomial):
        def ev(w):
            ol = g_ol(w)
            pf = _poly_on_grid(g_r, w) * freq_response(g_pf_bar, w)
            return 1.0 - pf * ol / (1.0 + ol)
        return ev

    return LoopSet(
        g_ol=g_ol,
        g_yd=g_yd,
        g_un=g_un,
        g_er_o_case_a=_g_er_o(g_r_a),
        g_er_o_case_b=_g_er_o(g_r_b),
        g_er_e=g_er_e,
    )


def bode(g: Evaluator, grid: np.ndarray) -> dict:
    """Magnitude (dB) and continuously unwrapped phase (deg) on a log grid."""
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and positive")
    resp = g(grid)
    mag_db = 20.0 * np.log10(np.abs(resp))
    phase_deg = np.degrees(np.unwrap(np.angle(resp)))
    return {"omega": grid, "mag_db": mag_db, "phase_deg": phase_deg}


@dataclass(frozen=True)
class Margins:
    """Gain/phase margins; fields are None when no crossover exists in the band."""

    gain_margin_db: float | None
    phase_margin_deg: float | None
    gain_crossover: float | None
    phase_crossover: float | None

    def to_dict(self) -> dict:
        return {
            "gain_margin_db": self.gain_margin_db,
            "phase_margin_deg": self.phase_margin_deg,
            "gain_crossover_rad_s": self.gain_crossover,
            "phase_crossover_rad_s": self.phase_crossover,
        }


def _bisect(f, lo, hi, tol=1e-10, maxit=200):
    flo = f(lo)
    for _ in range(maxit):
        mid = np.sqrt(lo * hi)  # log-space midpoint
        fm = f(mid)
        if abs(fm) < tol or hi / lo - 1.0 < 1e-14:
            return mid
        if (flo < 0) == (fm < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return np.sqrt(lo * hi)


def margins(g_ol: Evaluator, band: tuple[float, float] = DEFAULT_BAND,
            points: int = DEFAULT_POINTS) -> Margins:
    """Gain/phase margins from grid bracketing plus log-space bisection.

    Convention: lowest-frequency gain crossover, and the phase crossover
    nearest to it (conservative when several exist).
    """
    lo, hi = band
    if lo <= 0 or lo >= hi:
        raise ValueError("band must be positive with omega_min < omega_max")
    grid = np.logspace(np.log10(lo), np.log10(hi), points)
    resp = g_ol(grid)
    logmag = np.log10(np.abs(resp))
    phase = np.unwrap(np.angle(resp))

    def mag_fun(w):
        return float(np.log10(np.abs(g_ol(np.array([w]))[0])))

    gain_xover = None
    sign_change = np.nonzero(np.diff(np.sign(logmag)) != 0)[0]
    if len(sign_change):
        i = sign_change[0]
        gain_xover = float(_bisect(mag_fun, grid[i], grid[i + 1]))

    # Phase is refined on the grid's unwrapped branch: local interpolation is
    # enough because the scan is dense (2000 points over six decades).
    phase_xover = None
    target = -np.pi
    cross = np.nonzero(np.diff(np.sign(phase - target)) != 0)[0]
    if len(cross):
        if gain_xover is not None:
            mids = np.sqrt(grid[cross] * grid[cross + 1])
            i = cross[int(np.argmin(np.abs(np.log10(mids / gain_xover))))]
        else:
            i = cross[0]
        w0, w1 = grid[i], grid[i + 1]
        p0, p1 = phase[i], phase[i + 1]
        frac = (target - p0) / (p1 - p0)
        phase_xover = float(w0 * (w1 / w0) ** frac)

    pm = None
    if gain_xover is not None:
        ph = np.interp(np.log10(gain_xover), np.log10(grid), phase)
        pm = float(np.degrees(ph) + 180.0)
    gm = None
    if phase_xover is not None:
        gm = float(-20.0 * np.log10(np.abs(g_ol(np.array([phase_xover]))[0])))
    return Margins(gain_margin_db=gm, phase_margin_deg=pm,
                   gain_crossover=gain_xover, phase_crossover=phase_xover)


def write_bode_csv(path, data: dict) -> None:
    """CSV contract: omega_rad_s,mag_db,phase_deg at 17 significant digits, LF."""
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega_rad_s", "mag_db", "phase_deg"])
        for om, mg, ph in zip(data["omega"], data["mag_db"], data["phase_deg"]):
            w.writerow([f"{om:.17g}", f"{mg:.17g}", f"{ph:.17g}"])
