"""Dense polynomial and rational transfer-function arithmetic in the Laplace variable.

Coefficients are stored in ascending powers of s (``coeffs[k]`` multiplies
``s**k``).  Degrees in this library stay small (<= 8), so dense double-precision
arrays are used throughout.  Dead time is kept as exact metadata on
:class:`RationalTf` and only enters frequency-domain evaluation; it is never
approximated by a rational factor here.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

# Coefficients below TRIM_RTOL * max|coeff| are treated as exact zeros so that
# cancellations (e.g. the integrator factor of the feedforward path) do not
# inflate degrees.
TRIM_RTOL = 1e-12

# Absolute floor on |den(jw)| below which evaluation is considered to sit on a pole.
POLE_ATOL = 1e-300


class PoleOnAxisError(ValueError):
    """Evaluation requested at (numerically) a pole on the imaginary axis."""


def _trim(coeffs) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    if not c:
        return ()
    scale = max(abs(x) for x in c)
    if scale == 0.0:
        return ()
    c = [0.0 if abs(x) < TRIM_RTOL * scale else x for x in c]
    while c and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    """Real-coefficient polynomial, canonical (trimmed) ascending form.

    The zero polynomial is represented by an empty coefficient tuple and
    reports degree -1.
    """

    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def monomial(cls, power: int, coeff: float = 1.0) -> "Polynomial":
        return cls((0.0,) * power + (float(coeff),))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, s: complex) -> complex:
        acc = 0.0 + 0.0j
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        a = a + (0.0,) * (n - len(a))
        b = b + (0.0,) * (n - len(b))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(other)
        out = [0.0] * (len(self.coeffs) + len(other.coeffs) - 1) if self.coeffs and other.coeffs else []
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(tuple(out))

    __rmul__ = __mul__

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(tuple(factor * c for c in self.coeffs))

    def shift(self, power: int) -> "Polynomial":
        """Multiply by s**power."""
        if self.is_zero:
            return self
        return Polynomial((0.0,) * power + self.coeffs)

    def coeff(self, power: int) -> float:
        return self.coeffs[power] if power < len(self.coeffs) else 0.0


ZERO = Polynomial()
ONE = Polynomial((1.0,))
S = Polynomial((0.0, 1.0))


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


@dataclass(frozen=True)
class RationalTf:
    """Ratio of two polynomials plus an exact dead-time factor exp(-s*delay).

    Canonical form: denominator leading coefficient is 1, with the scale folded
    into the numerator.  Improper ratios are representable on purpose; only
    :attr:`properness` reports them.
    """

    num: Polynomial
    den: Polynomial
    delay: float = 0.0

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("denominator must not be the zero polynomial")
        if self.delay < 0:
            raise ValueError("dead time must be nonnegative")
        lead = self.den.coeffs[-1]
        if lead != 1.0:
            object.__setattr__(self, "num", self.num.scale(1.0 / lead))
            object.__setattr__(self, "den", self.den.scale(1.0 / lead))

    @classmethod
    def from_coeffs(cls, num, den, delay: float = 0.0) -> "RationalTf":
        return cls(Polynomial(tuple(num)), Polynomial(tuple(den)), delay)

    @property
    def properness(self) -> str:
        dn, dd = self.num.degree, self.den.degree
        if dn < dd:
            return "strictly proper"
        if dn == dd:
            return "proper"
        return "improper"

    @property
    def degrees(self) -> tuple[int, int]:
        return (self.num.degree, self.den.degree)

    def __mul__(self, other: "RationalTf") -> "RationalTf":
        return RationalTf(self.num * other.num, self.den * other.den,
                          self.delay + other.delay)

    def to_dict(self) -> dict:
        return {
            "num": list(self.num.coeffs),
            "den": list(self.den.coeffs),
            "delay": self.delay,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RationalTf":
        return cls.from_coeffs(d["num"], d["den"], d.get("delay", 0.0))


def eval_tf(g: RationalTf, omega: float) -> complex:
    """Frequency response num(jw)/den(jw) * exp(-jw*delay) at a single frequency."""
    if not np.isfinite(omega):
        raise ValueError("omega must be finite")
    s = 1j * omega
    d = g.den(s)
    if abs(d) < POLE_ATOL:
        raise PoleOnAxisError(f"denominator vanishes at omega={omega!r}")
    val = g.num(s) / d
    if g.delay:
        val *= cmath.exp(-s * g.delay)
    return val


def freq_response(g: RationalTf, omegas: np.ndarray) -> np.ndarray:
    """Vectorized frequency response on an array of frequencies."""
    s = 1j * np.asarray(omegas, dtype=float)
    num = np.polyval(list(reversed(g.num.coeffs)) or [0.0], s)
    den = np.polyval(list(reversed(g.den.coeffs)), s)
    small = np.abs(den) < POLE_ATOL
    if np.any(small):
        raise PoleOnAxisError(
            f"denominator vanishes at omega={np.asarray(omegas)[small][0]!r}")
    val = num / den
    if g.delay:
        val = val * np.exp(-s * g.delay)
    return val


class PolyMatrix:
    """Dense square matrix of polynomials."""

    def __init__(self, entries):
        rows = [tuple(row) for row in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("PolyMatrix must be square")
        self.entries = tuple(rows)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def vecmul(self, vec) -> list[Polynomial]:
        """Matrix times a real column vector -> list of polynomials."""
        return [
            sum((row[j] * float(vec[j]) for j in range(self.dim)), ZERO)
            for row in self.entries
        ]

    def bilinear(self, row_vec, col_vec) -> Polynomial:
        """row_vec^T * M * col_vec with real vectors."""
        col = self.vecmul(col_vec)
        return sum((float(row_vec[i]) * col[i] for i in range(self.dim)), ZERO)

    def matmul_real(self, m: np.ndarray) -> "PolyMatrix":
        """Product with a real matrix on the right."""
        n = self.dim
        out = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                acc = ZERO
                for k in range(n):
                    acc = acc + self.entries[i][k] * float(m[k, j])
                out[i][j] = acc
        return PolyMatrix(out)


def resolvent(m: np.ndarray) -> tuple[PolyMatrix, Polynomial]:
    """Adjugate and determinant of (sI - m) via the Faddeev-LeVerrier recursion.

    Returns ``(adj, det)`` such that ``adj(sI - m) @ (sI - m) == det(sI - m) * I``
    holds coefficientwise.  ``det`` is the (monic) characteristic polynomial.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError("resolvent requires a square matrix of dimension >= 1")
    n = m.shape[0]
    eye = np.eye(n)

    # N_1 = I; N_{k+1} = m N_k + a_{n-k} I, a_{n-k} = -tr(m N_k)/k.
    mats = []
    coeffs = [0.0] * (n + 1)
    coeffs[n] = 1.0
    nk = eye.copy()
    for k in range(1, n + 1):
        mats.append(nk)
        mn = m @ nk
        a = -np.trace(mn) / k
        coeffs[n - k] = a
        nk = mn + a * eye

    # adj(sI - m) = sum_k s^k * N_{n-k}
    entries = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            entries[i][j] = Polynomial(tuple(mats[n - 1 - k][i, j] for k in range(n)))
    return PolyMatrix(entries), Polynomial(tuple(coeffs))
