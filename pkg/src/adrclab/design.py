"""ADRC gain synthesis via bandwidth parameterization.

All controller poles are placed at -omega_cl and all observer poles at
-k_eso*omega_cl.  Closed forms follow from binomial expansion of
(lambda + omega_cl)^n and (lambda + k_eso*omega_cl)^(n+1).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

MAX_ORDER = 5

INTERMEDIATE_CASES = tuple(f"A{m}" for m in range(1, MAX_ORDER))
VALID_CASES = ("A",) + INTERMEDIATE_CASES + ("B",)


@dataclass(frozen=True)
class DesignParams:
    """Tuning inputs: plant order, gain estimate and the two bandwidth knobs."""

    n: int
    b0: float
    omega_cl: float
    k_eso: float

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("n must be >= 1")
        if self.n > MAX_ORDER:
            raise ValueError(f"n must be <= {MAX_ORDER}; gain magnitudes explode beyond that")
        if self.b0 == 0:
            raise ValueError("b0 must be nonzero")
        if self.omega_cl <= 0:
            raise ValueError("omega_cl must be positive")
        if self.k_eso <= 1:
            raise ValueError("k_eso must be > 1 (observer faster than control loop)")
        if self.k_eso < 2:
            warnings.warn("k_eso < 2 gives an observer barely faster than the "
                          "control loop; expect sluggish disturbance estimation",
                          stacklevel=2)


def controller_gains(p: DesignParams) -> tuple[float, ...]:
    """k_i = n!/((n-i+1)!(i-1)!) * omega_cl^(n-i+1), i = 1..n."""
    return tuple(
        comb(p.n, i - 1) * p.omega_cl ** (p.n - i + 1) for i in range(1, p.n + 1)
    )


def observer_gains(p: DesignParams) -> tuple[float, ...]:
    """l_i = (n+1)!/((n-i+1)! i!) * (k_eso*omega_cl)^i, i = 1..n+1."""
    w = p.k_eso * p.omega_cl
    return tuple(comb(p.n + 1, i) * w ** i for i in range(1, p.n + 2))


def observer_matrices(p: DesignParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """State-space triple (A, b, c) of the extended observer plant model.

    A is the (n+1)x(n+1) integrator chain with the extra disturbance state,
    b injects b0 into row n, c picks the first state.
    """
    n = p.n
    a = np.zeros((n + 1, n + 1))
    for i in range(n):
        a[i, i + 1] = 1.0
    b = np.zeros(n + 1)
    b[n - 1] = p.b0
    c = np.zeros(n + 1)
    c[0] = 1.0
    return a, b, c


def build_acl(p: DesignParams, k, l) -> np.ndarray:
    """Closed-loop matrix A - l*c^T - (1/b0)*b*(k^T, 1)."""
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    if k.shape != (p.n,) or l.shape != (p.n + 1,):
        raise ValueError("gain vector lengths must match the design order")
    if np.any(k <= 0) or np.any(l <= 0):
        raise ValueError("controller and observer gains must all be positive")
    a, b, c = observer_matrices(p)
    k_row = np.append(k, 1.0)
    return a - np.outer(l, c) - np.outer(b, k_row) / p.b0


@dataclass(frozen=True)
class AdrcDesign:
    """Synthesized gains plus the closed-loop matrix of the eliminated observer."""

    params: DesignParams
    k: tuple[float, ...]
    l: tuple[float, ...]
    a_cl: np.ndarray

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def b0(self) -> float:
        return self.params.b0

    @property
    def k_row(self) -> np.ndarray:
        """Feedback row vector (k^T, 1) of length n+1."""
        return np.append(self.k, 1.0)


def synthesize(p: DesignParams) -> AdrcDesign:
    k = controller_gains(p)
    l = observer_gains(p)
    return AdrcDesign(params=p, k=k, l=l, a_cl=build_acl(p, k, l))


@dataclass(frozen=True)
class GainVariant:
    """Reference-derivative gains for one controller case.

    Case A uses no reference derivatives (kr = 0), case B all of them
    (kr = (k_2, ..., k_n, 1)), and the intermediate case A_m keeps the first
    m entries of the case-B vector.
    """

    case_id: str
    kr: tuple[float, ...]


def make_variant(d: AdrcDesign, case_id: str) -> GainVariant:
    n = d.n
    if case_id not in VALID_CASES:
        raise ValueError(f"unknown case {case_id!r}; expected one of {VALID_CASES}")
    full = tuple(d.k[1:]) + (1.0,)
    if case_id == "A":
        kr = (0.0,) * n
    elif case_id == "B":
        kr = full
    else:
        m = int(case_id[1:])
        if not 1 <= m <= n - 1:
            raise ValueError(f"case {case_id} requires plant order n >= {m + 1}")
        kr = full[:m] + (0.0,) * (n - m)
    return GainVariant(case_id=case_id, kr=kr)
