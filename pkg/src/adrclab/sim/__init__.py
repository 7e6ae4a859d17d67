"""Time-domain closed-loop simulation of the ADRC schemes.

The hot RK4 co-simulation loop lives in a compiled extension
(``adrclab.sim._loopstep``) when available, with a pure-Python twin used as a
fallback; see :data:`adrclab.sim.engine.KERNEL_BACKEND`.
"""

from .engine import (KERNEL_BACKEND, SimTrace, SweepItem, simulate, step_eadrc,
                     step_oadrc, sweep)
from .reference import FilteredStep, Sinusoid
from .scenario import Disturbance, Noise, Scenario, preset_scenarios

__all__ = [
    "KERNEL_BACKEND", "SimTrace", "SweepItem", "simulate", "sweep",
    "step_oadrc", "step_eadrc", "FilteredStep", "Sinusoid",
    "Disturbance", "Noise", "Scenario", "preset_scenarios",
]
