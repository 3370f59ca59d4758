"""Orbit-geometry diagnostics for one-step schemes.

A rotation-form matrix ``(a, -c; c, a)`` maps the start point along the
logarithmic spiral ``r = r0 * exp(k * (phi - phi0))`` with

    rho = sqrt(a**2 + c**2),  theta = atan(c / a),  k = ln(rho) / theta.
"""

from __future__ import annotations

import cmath
import enum
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from .generator import Trajectory
from .schemes import OneStepMatrix

__all__ = [
    "ShapeError",
    "DegenerateRotationError",
    "DataError",
    "SpiralAnalysis",
    "EigenPair",
    "OrbitKind",
    "OrbitClass",
    "ThirdOrderSolution",
    "CLASSIFY_RTOL",
    "spiral_analysis",
    "eigen",
    "classify",
    "solve_best_third_order",
    "ansatz_residuals",
    "empirical_k",
]

# Round-off level: catalog entries are correctly rounded, so an exact
# identity such as cos^2 + sin^2 = 1 survives to a few ulps, while genuine
# spirals keep rho^2 - 1 >= h^6/64 well above this for h >= 2**-6.
CLASSIFY_RTOL = 64 * sys.float_info.epsilon


class ShapeError(ValueError):
    """Matrix is not of the rotation form ``(a, -c; c, a)``."""


class DegenerateRotationError(ValueError):
    """Zero per-step rotation angle; the spiral pitch is undefined."""


class DataError(ValueError):
    """Trajectory data unusable for the requested estimate."""


@dataclass(frozen=True)
class SpiralAnalysis:
    rho: float
    theta: float
    k: float
    rho2: float


@dataclass(frozen=True)
class EigenPair:
    lambda1: complex
    lambda2: complex


class OrbitKind(str, enum.Enum):
    EXACT_CIRCLE = "exact_circle"
    ELLIPSE = "ellipse"
    LOGARITHMIC_SPIRAL = "logarithmic_spiral"
    ELLIPTICAL_SPIRAL = "elliptical_spiral"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OrbitClass:
    kind: OrbitKind
    witnesses: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ThirdOrderSolution:
    a1: float
    a2: float
    a3: float
    c2: float
    c3: float
    leading_error: float


def _rho2_minus_one(a: float, c: float) -> float:
    return float(Fraction(a) ** 2 + Fraction(c) ** 2 - 1)


def spiral_analysis(m: OneStepMatrix) -> SpiralAnalysis:
    if not m.is_rotation_form():
        raise ShapeError(f"matrix {m} is not of the form (a, -c; c, a)")
    if m.c == 0:
        raise DegenerateRotationError("c = 0: zero rotation per step generates a ray")
    excess = _rho2_minus_one(m.a, m.c)
    theta = math.atan2(m.c, m.a)
    log_rho = 0.5 * math.log1p(excess)
    return SpiralAnalysis(math.exp(log_rho), theta, log_rho / theta, 1.0 + excess)


def eigen(m: OneStepMatrix) -> EigenPair:
    """Roots of ``l**2 - (a + d) l + (ad - bc)``."""
    half_tr = 0.5 * (m.a + m.d)
    # (a+d)^2 - 4(ad-bc) rewritten to avoid cancellation
    disc = (m.a - m.d) ** 2 + 4.0 * m.b * m.c
    root = 0.5 * cmath.sqrt(disc) if disc < 0 else 0.5 * math.sqrt(disc)
    return EigenPair(complex(half_tr + root), complex(half_tr - root))


def classify(m: OneStepMatrix, rtol: float = CLASSIFY_RTOL) -> OrbitClass:
    """Classify the orbit of ``m`` from its entries alone."""
    scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d), 1.0)
    det = Fraction(m.a) * Fraction(m.d) - Fraction(m.b) * Fraction(m.c)
    det_f = float(det)
    trace = m.a + m.d
    disc = (m.a - m.d) ** 2 + 4.0 * m.b * m.c
    diag_equal = abs(m.a - m.d) <= rtol * scale
    anti = abs(m.b + m.c) <= rtol * scale
    unit_det = abs(float(det - 1)) <= rtol * scale * scale
    w = {
        "det": det_f,
        "trace": trace,
        "discriminant": disc,
        "a_equals_d": diag_equal,
        "c_equals_minus_b": anti,
        "det_is_one": unit_det,
        "abs_trace_lt_2": abs(trace) < 2,
    }
    if diag_equal and anti and unit_det:
        kind = OrbitKind.EXACT_CIRCLE
    elif unit_det and abs(trace) < 2:
        kind = OrbitKind.ELLIPSE
    elif diag_equal and anti:
        kind = OrbitKind.LOGARITHMIC_SPIRAL
    elif disc < 0:
        kind = OrbitKind.ELLIPTICAL_SPIRAL
    else:
        kind = OrbitKind.DEGENERATE
    return OrbitClass(kind, w)


def _rho2_series(a1, a2, a3, c2, c3) -> np.ndarray:
    a = [1.0, a1, a2, a3]
    c = [0.0, 1.0, c2, c3]
    out = P.polyadd(P.polymul(a, a), P.polymul(c, c))
    return np.pad(out, (0, 7 - len(out)))


def ansatz_residuals(s: ThirdOrderSolution) -> np.ndarray:
    """Coefficients of h^1..h^5 in rho^2 for the ansatz; zero at a solution."""
    return _rho2_series(s.a1, s.a2, s.a3, s.c2, s.c3)[1:6]


def _linear_root(f: Callable[[float], float]) -> float:
    # secant on a function known to be affine in its argument, then one polish
    f0, f1 = f(0.0), f(1.0)
    x = -f0 / (f1 - f0)
    fx, fx1 = f(x), f(x + 1.0)
    return x - fx / (fx1 - fx)


def _back_substitute(c2: float) -> tuple[float, float, float, float]:
    a1 = _linear_root(lambda t: _rho2_series(t, 0, 0, c2, 0)[1])
    a2 = _linear_root(lambda t: _rho2_series(a1, t, 0, c2, 0)[2])
    a3 = _linear_root(lambda t: _rho2_series(a1, a2, t, c2, 0)[3])
    c3 = _linear_root(lambda t: _rho2_series(a1, a2, a3, c2, t)[4])
    return a1, a2, a3, c3


def _final_residual(c2: float) -> float:
    a1, a2, a3, c3 = _back_substitute(c2)
    return _rho2_series(a1, a2, a3, c2, c3)[5]


def solve_best_third_order() -> list[ThirdOrderSolution]:
    """All real solutions of the five-equation system for the cubic ansatz.

    With ``a = 1 + a1 h + a2 h^2 + a3 h^3`` and ``c = h + c2 h^2 + c3 h^3``,
    the coefficients of ``h^1..h^5`` in ``a^2 + c^2`` are set to zero.  The
    system is triangular: ``a1, a2, a3, c3`` follow one at a time for a given
    ``c2`` and the last equation leaves a polynomial in ``c2`` alone.  That
    polynomial is recovered by sampling, and its real roots are polished
    with Newton steps.
    """
    nodes = 2.0 * np.cos(np.pi * (np.arange(12) + 0.5) / 12)
    g = np.array([_final_residual(t) for t in nodes])
    poly = Polynomial.fit(nodes, g, deg=7).convert()
    coef = poly.coef.copy()
    coef[np.abs(coef) < 1e-10 * np.max(np.abs(coef))] = 0.0
    roots = Polynomial(np.trim_zeros(coef, "b")).roots()

    found: list[float] = []
    for z in roots:
        if abs(z.imag) > 1e-6:
            continue
        x = float(z.real)
        for _ in range(5):
            fx = _final_residual(x)
            d = (_final_residual(x + 1e-6) - _final_residual(x - 1e-6)) / 2e-6
            if d == 0:
                break
            x -= fx / d
        if not any(abs(x - y) < 1e-9 for y in found):
            found.append(x)

    out = []
    for c2 in sorted(found):
        a1, a2, a3, c3 = _back_substitute(c2)
        lead = _rho2_series(a1, a2, a3, c2, c3)[6]
        vals = (float(v) + 0.0 for v in (a1, a2, a3, c2, c3, lead))
        out.append(ThirdOrderSolution(*vals))
    return out


def empirical_k(traj: Trajectory) -> float:
    """Least-squares slope of ``ln r`` against the unwrapped polar angle."""
    pts = traj.points
    if len(pts) < 3:
        raise DataError(f"need at least 3 points, got {len(pts)}")
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r == 0):
        raise DataError("trajectory passes through the origin")
    phi = traj.angles()
    lr = np.log(r)
    dphi = phi - phi.mean()
    denom = float(np.dot(dphi, dphi))
    if denom == 0:
        raise DataError("trajectory does not rotate")
    return float(np.dot(dphi, lr - lr.mean()) / denom)
