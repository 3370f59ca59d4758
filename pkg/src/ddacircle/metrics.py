"""Diagnostics for generated trajectories.

For the two-step family the triple of quadratic forms

    xi[n] = (|z[n]|^2, |z[n+1]|^2, x[n]*y[n+1] - x[n+1]*y[n])

evolves linearly, ``xi[n+1] = B xi[n]``, and ``B (1, 1, delta) = (1, 1, delta)``.
Starting from ``xi[0] = r^2 (1, 1, delta)`` it therefore never moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .analysis import DataError, eigen
from .generator import Trajectory, TrajectoryState
from .schemes import get_scheme

__all__ = [
    "IntegralState",
    "XiEvolution",
    "PeriodReport",
    "RadialDrift",
    "xi",
    "xi_series",
    "xi_step_matrix",
    "check_xi_conservation",
    "xi_deviations",
    "measure_period",
    "radial_drift",
]


class IntegralState(NamedTuple):
    q0: float
    q1: float
    w: float


@dataclass(frozen=True)
class XiEvolution:
    B: np.ndarray
    eigenvalues: tuple[complex, complex, complex]


@dataclass(frozen=True)
class PeriodReport:
    T_analytic: float
    T_measured: float
    period_error: float


class RadialDrift(NamedTuple):
    max_abs: float
    rms: float


def xi(s: TrajectoryState) -> IntegralState:
    """Quadratic forms of the previous point and the current one."""
    x0, y0, x1, y1 = s.x_prev, s.y_prev, s.x, s.y
    return IntegralState(x0 * x0 + y0 * y0, x1 * x1 + y1 * y1, x0 * y1 - x1 * y0)


def xi_series(points: np.ndarray) -> np.ndarray:
    """``xi[n]`` for every consecutive pair, shape ``(len(points) - 1, 3)``."""
    p = np.asarray(points, dtype=float)
    x, y = p[:, 0], p[:, 1]
    q = x * x + y * y
    w = x[:-1] * y[1:] - x[1:] * y[:-1]
    return np.column_stack([q[:-1], q[1:], w])


def xi_step_matrix(delta: float) -> XiEvolution:
    if abs(delta) > 1:
        raise ValueError(f"|delta| must be <= 1, got {delta!r}")
    B = np.array(
        [[0.0, 1.0, 0.0], [1.0, 4.0 * delta * delta, -4.0 * delta], [0.0, 2.0 * delta, -1.0]]
    )
    re = 2.0 * delta * delta - 1.0
    im = 2.0 * delta * math.sqrt(1.0 - delta * delta)
    return XiEvolution(B, (1.0 + 0j, complex(re, im), complex(re, -im)))


def _reference(traj: Trajectory, delta: Optional[float]) -> np.ndarray:
    d = traj.delta if delta is None else delta
    if d is None:
        raise DataError("xi conservation applies to two-step trajectories")
    r2 = traj.r * traj.r
    return r2 * np.array([1.0, 1.0, d])


def xi_deviations(traj: Trajectory, delta: Optional[float] = None) -> np.ndarray:
    """``max|xi[n] - r^2 (1, 1, delta)|`` for each ``n``."""
    if len(traj) < 2:
        return np.zeros(0)
    return np.max(np.abs(xi_series(traj.points) - _reference(traj, delta)), axis=1)


def check_xi_conservation(traj: Trajectory, delta: Optional[float] = None) -> float:
    dev = xi_deviations(traj, delta)
    return float(dev.max()) if len(dev) else 0.0


def _nominal_angle_per_step(traj: Trajectory) -> float:
    if traj.delta is not None:
        return math.asin(traj.delta)
    spec = get_scheme(traj.scheme)
    return abs(np.angle(eigen(spec.coefficients(traj.h)).lambda1))


def measure_period(traj: Trajectory, h: Optional[float] = None) -> PeriodReport:
    """Arc-parameter length of the first full revolution.

    The unwrapped angle is interpolated linearly between the two points
    straddling a full turn from point 0.
    """
    h = traj.h if h is None else h
    if len(traj) < 2:
        raise DataError("trajectory too short to measure a period")
    if np.any(traj.radii == 0):
        raise DataError("trajectory passes through the origin")
    phi = traj.angles()
    turned = np.abs(phi - phi[0])
    # a crossing that lands on the last point may round just short of 2 pi
    idx = np.flatnonzero(turned >= 2 * math.pi * (1 - 1e-13))
    if len(idx) == 0:
        raise DataError(f"trajectory turns only {turned[-1]:.6g} rad, less than one revolution")
    n = int(idx[0])
    frac = (2 * math.pi - turned[n - 1]) / (turned[n] - turned[n - 1])
    T = h * (n - 1 + frac)
    T_an = 2 * math.pi * h / _nominal_angle_per_step(traj)
    return PeriodReport(float(T_an), float(T), float(T - 2 * math.pi))


def radial_drift(traj: Trajectory) -> RadialDrift:
    if traj.r <= 0:
        raise ValueError("radial drift needs r > 0")
    if len(traj) == 0:
        return RadialDrift(0.0, 0.0)
    rel = (traj.radii - traj.r) / traj.r
    return RadialDrift(float(np.max(np.abs(rel))), float(np.sqrt(np.mean(rel * rel))))
