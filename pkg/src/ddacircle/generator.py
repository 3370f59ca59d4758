"""Floating-point trajectory generation.

One-step schemes start at ``(r, 0)``.  Two-step schemes start from the
exact initialization ``(r, 0), (r*sqrt(1 - delta**2), r*delta)``, which puts
both starting points on the circle with wedge ``x0*y1 - x1*y0 = delta*r**2``.
Rotation is counterclockwise: the exact solution is ``(r cos t, r sin t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .schemes import (
    DeltaSpec,
    Kind,
    Number,
    OneStepMatrix,
    SchemeSpec,
    StepRangeError,
    evaluate_delta,
    evaluate_one_step,
)

__all__ = [
    "TrajectoryState",
    "Trajectory",
    "InitialConditions",
    "exact_point",
    "init_two_step",
    "step_one",
    "step_two",
    "generate",
    "two_step_matrix",
    "generate_via_matrix",
    "unwrapped_angles",
]


@dataclass(frozen=True)
class TrajectoryState:
    x: float
    y: float
    x_prev: float = 0.0
    y_prev: float = 0.0
    n: int = 0


@dataclass(frozen=True)
class InitialConditions:
    x0: float
    y0: float
    x1: Optional[float]
    y1: Optional[float]
    r: float

    def state(self) -> TrajectoryState:
        """Two-step state positioned at index 1."""
        return TrajectoryState(self.x1, self.y1, self.x0, self.y0, n=1)


def unwrapped_angles(points: np.ndarray) -> np.ndarray:
    """Polar angle of each point, unwrapped by summing per-step increments.

    Assumes the rotation between consecutive points is less than pi.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return np.zeros(0)
    x, y = pts[:, 0], pts[:, 1]
    cross = x[:-1] * y[1:] - y[:-1] * x[1:]
    dot = x[:-1] * x[1:] + y[:-1] * y[1:]
    inc = np.arctan2(cross, dot)
    start = math.atan2(y[0], x[0])
    return np.concatenate(([start], start + np.cumsum(inc)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Generated points, initialization points included.

    ``delta`` is set for two-step runs; ``init_count`` is 1 for one-step
    schemes and 2 for two-step schemes.
    """

    points: np.ndarray
    scheme: str
    h: float
    r: float
    delta: Optional[float] = None
    init_count: int = 1

    def __len__(self) -> int:
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.x, self.y)

    def angles(self) -> np.ndarray:
        return unwrapped_angles(self.points)


def exact_point(r: float, angle: float) -> tuple[float, float]:
    return (r * math.cos(angle), r * math.sin(angle))


def init_two_step(r: float, delta: float) -> InitialConditions:
    """Simplest initial conditions putting the two-step orbit on the circle."""
    if not 0 < delta <= 1:
        raise StepRangeError(f"two-step initialization needs 0 < delta <= 1, got {delta!r}")
    return InitialConditions(r, 0.0, r * math.sqrt(1.0 - delta * delta), delta * r, r)


def step_one(m: OneStepMatrix, s: TrajectoryState) -> TrajectoryState:
    return TrajectoryState(m.a * s.x + m.b * s.y, m.c * s.x + m.d * s.y, s.x, s.y, s.n + 1)


def step_two(delta: float, s: TrajectoryState) -> TrajectoryState:
    two = 2.0 * delta
    return TrajectoryState(s.x_prev - two * s.y, s.y_prev + two * s.x, s.x, s.y, s.n + 1)


def generate(
    spec: SchemeSpec,
    h: Number,
    delta: Optional[DeltaSpec] = None,
    r: float = 1.0,
    steps: int = 0,
) -> Trajectory:
    """Run ``spec`` for ``steps`` steps at step ``h`` and radius ``r``.

    For two-step schemes ``delta`` overrides the step function carried by
    ``spec``; one-step schemes reject it.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if spec.kind is Kind.ONE_STEP:
        if delta is not None:
            raise ValueError(f"{spec.name} is one-step; delta does not apply")
        m = evaluate_one_step(spec, h)
        a, b, c, d = m.a, m.b, m.c, m.d
        x, y = float(r), 0.0
        out = [(x, y)]
        append = out.append
        for _ in range(steps):
            x, y = a * x + b * y, c * x + d * y
            append((x, y))
        return Trajectory(np.array(out, dtype=float), spec.name, float(h), float(r))

    if delta is not None:
        spec = replace(spec, delta=delta)
    spec.check_step(h)
    dval = evaluate_delta(spec.delta, h)
    ic = init_two_step(float(r), dval)
    out = [(ic.x0, ic.y0), (ic.x1, ic.y1)]
    append = out.append
    two = 2.0 * dval
    xp, yp, x, y = ic.x0, ic.y0, ic.x1, ic.y1
    for _ in range(steps):
        xp, yp, x, y = x, y, xp - two * y, yp + two * x
        append((x, y))
    return Trajectory(
        np.array(out, dtype=float), spec.name, float(h), float(r), delta=dval, init_count=2
    )


def two_step_matrix(delta: float) -> np.ndarray:
    """4x4 one-step form acting on ``(x[n+1], y[n+1], x[n], y[n])``."""
    t = 2.0 * delta
    return np.array(
        [[0.0, -t, 1.0, 0.0], [t, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]
    )


def generate_via_matrix(
    delta: float, ic: InitialConditions, steps: int, elementwise: bool = True
) -> np.ndarray:
    """Iterate the 4x4 form; a verification path for the two-step generator.

    ``elementwise`` sums each row left to right in plain float arithmetic;
    otherwise the product goes through ``numpy.matmul``.
    """
    M = two_step_matrix(delta)
    v = [ic.x1, ic.y1, ic.x0, ic.y0]
    out = [(ic.x0, ic.y0), (ic.x1, ic.y1)]
    if elementwise:
        rows = M.tolist()
        for _ in range(steps):
            nv = []
            for row in rows:
                acc = row[0] * v[0]
                for j in range(1, 4):
                    acc = acc + row[j] * v[j]
                nv.append(acc)
            v = nv
            out.append((v[0], v[1]))
    else:
        vec = np.array(v)
        for _ in range(steps):
            vec = M @ vec
            out.append((vec[0], vec[1]))
    return np.array(out, dtype=float)
