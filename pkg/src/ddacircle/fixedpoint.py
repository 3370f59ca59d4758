"""Integer shift-add execution of the dyadic schemes.

With ``h = 2**-m`` and ``r = 2**N`` every multiplication by a polynomial
coefficient with power-of-two denominator becomes a handful of arithmetic
shifts.  Values are integers in units of ``2**-frac_bits`` device LSBs;
right shifts are arithmetic (floor toward -inf) and all arithmetic is
checked against the signed 64-bit range.

The two-step step ``x[n+2] = x[n] - 2h*y[n+1]`` is one shift by ``m - 1``
and one subtraction per coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .generator import init_two_step
from .schemes import (
    Cost,
    DeltaForm,
    DeltaSpec,
    Kind,
    Poly,
    SchemeSpec,
    dyadic_exponent,
    evaluate_delta,
)

__all__ = [
    "NotImplementableError",
    "FixedPointConfig",
    "FixedPointState",
    "OpCounter",
    "Term",
    "ShiftProgram",
    "sqrt_series_terms",
    "init_x1_series",
    "init_state",
    "step_two_fixed",
    "step_two_fixed_deltaN",
    "delta_n_shifts",
    "FixedPointEngine",
    "shift_program",
    "cost_report",
    "float_kernel_cost",
]

WORD_BITS = 64
_MIN = -(1 << (WORD_BITS - 1))
_MAX = (1 << (WORD_BITS - 1)) - 1


class NotImplementableError(ValueError):
    """Scheme or configuration has no shift-add realization."""


@dataclass(frozen=True)
class FixedPointConfig:
    """``h = 2**-m``, ``r = 2**N``; ``frac_bits`` guard bits below the device LSB.

    ``frac_bits`` defaults to ``2m + 6``, which puts the first dropped
    initialization term well under half a sub-LSB.  ``series_terms=None``
    keeps every initialization correction that does not underflow.
    """

    m: int
    N: int
    frac_bits: Optional[int] = None
    series_terms: Optional[int] = None

    def __post_init__(self):
        if self.frac_bits is None:
            object.__setattr__(self, "frac_bits", 2 * self.m + 6)
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.frac_bits < 0:
            raise ValueError(f"frac_bits must be >= 0, got {self.frac_bits}")
        if self.series_terms is not None and self.series_terms < 1:
            raise ValueError(f"series_terms must be >= 1, got {self.series_terms}")
        if self.scale_bits >= WORD_BITS - 2:
            raise OverflowError(f"radius 2**{self.scale_bits} does not fit a {WORD_BITS}-bit word")

    @property
    def h(self) -> float:
        return 2.0 ** -self.m

    @property
    def scale_bits(self) -> int:
        """Radius in sub-LSB units is ``2**scale_bits``."""
        return self.N + self.frac_bits

    @property
    def radius(self) -> int:
        return 1 << self.scale_bits


@dataclass(frozen=True)
class FixedPointState:
    x: int
    y: int
    x_prev: int = 0
    y_prev: int = 0
    n: int = 0


@dataclass
class OpCounter:
    adds: int = 0
    shifts: int = 0
    multiplies: int = 0

    def cost(self) -> Cost:
        return Cost(self.adds, self.shifts, self.multiplies)

    def reset(self) -> None:
        self.adds = self.shifts = self.multiplies = 0


def _checked(v: int) -> int:
    if not _MIN <= v <= _MAX:
        raise OverflowError(f"value {v} overflows a signed {WORD_BITS}-bit word")
    return v


def _identity(v):
    return v


def _sqrt_coefficient(j: int) -> Fraction:
    """Magnitude of the h**(2j) Taylor coefficient of sqrt(1 - h**2), j >= 1."""
    return Fraction(math.comb(2 * j, j), (2 * j - 1) * 4**j)


def sqrt_series_terms() -> Iterator[tuple[int, int]]:
    """Dyadic terms ``2**-e * h**(2j)`` subtracted from 1 in ``sqrt(1 - h**2)``.

    Yields ``(j, e)`` ordered by power then magnitude, e.g. ``5/128 h^8``
    contributes ``(4, 5)`` and ``(4, 7)``.
    """
    j = 1
    while True:
        c = _sqrt_coefficient(j)
        q = c.denominator.bit_length() - 1
        p = c.numerator
        for b in range(p.bit_length() - 1, -1, -1):
            if p >> b & 1:
                yield j, q - b
        j += 1


def init_x1_series(cfg: FixedPointConfig) -> int:
    """``r*sqrt(1 - h**2)`` from its shift series, truncated as configured.

    The first ``series_terms`` corrections are considered; any whose shift
    would be negative (below one sub-LSB) is dropped.
    """
    s = cfg.scale_bits
    acc = 1 << s
    limit = cfg.series_terms
    for i, (j, e) in enumerate(sqrt_series_terms()):
        if limit is not None and i >= limit:
            break
        exp = s - 2 * j * cfg.m - e
        if exp < 0:
            if limit is None:
                break
            continue
        acc -= 1 << exp
    return acc


def delta_n_shifts(m: int, deltaN: int) -> list[int]:
    """Right shifts realizing ``2*delta_N*v`` as ``(v >> s0) - sum(v >> sk)``.

    ``2 h = 2**(1-m)`` and ``2 h**3 2**(-3-2k) = 2**-(3m + 2 + 2k)``.
    Shifts that reach the word width are dropped.
    """
    out = [m - 1] + [3 * m + 2 + 2 * k for k in range(deltaN + 1)]
    return [s for s in out if s < WORD_BITS]


def _isqrt_nearest(v: int) -> int:
    x = math.isqrt(v)
    return x + 1 if (x + 1) ** 2 - v < v - x * x else x


def init_state(cfg: FixedPointConfig, delta: Optional[DeltaSpec] = None, method: str = "series") -> FixedPointState:
    """Two-step start ``(r, 0), (x1, y1)`` at index 1.

    For ``delta = h`` the default ``series`` method builds ``x1`` from shifts;
    ``isqrt`` uses the integer square root, which is also what ``delta_N``
    uses since its ``sqrt(1 - delta_N**2)`` has no short shift series.
    """
    delta = delta or DeltaSpec()
    R = cfg.radius
    if delta.form is DeltaForm.IDENTITY:
        y1 = R >> cfg.m
    elif delta.form is DeltaForm.SHIFT_SERIES:
        y1 = R >> cfg.m
        for k in range(delta.N + 1):
            y1 -= R >> (3 * cfg.m + 3 + 2 * k)
        method = "isqrt"
    else:
        raise NotImplementableError(f"delta form {delta.label} has no shift-add realization")
    if method == "series":
        x1 = init_x1_series(cfg)
    elif method == "isqrt":
        x1 = _isqrt_nearest(R * R - y1 * y1)
    else:
        raise ValueError(f"unknown init method {method!r}")
    return FixedPointState(x1, y1, R, 0, n=1)


def step_two_fixed(cfg: FixedPointConfig, s: FixedPointState, counter: Optional[OpCounter] = None) -> FixedPointState:
    k = cfg.m - 1
    dx = s.y >> k
    dy = s.x >> k
    x2 = _checked(s.x_prev - dx)
    y2 = _checked(s.y_prev + dy)
    if counter is not None:
        counter.shifts += 2
        counter.adds += 2
    return FixedPointState(x2, y2, s.x, s.y, s.n + 1)


def _int_shift(v: int, s: int) -> int:
    return v >> s if s >= 0 else v << -s


def _float_shift(v: float, s: int) -> float:
    return math.ldexp(v, -s)


def _cascade(v, shifts: list[int], counter: Optional[OpCounter], shift=_int_shift, check=_checked):
    t = shift(v, shifts[0])
    for sh in shifts[1:]:
        t = check(t - shift(v, sh))
    if counter is not None:
        counter.shifts += len(shifts)
        counter.adds += len(shifts) - 1
    return t


def step_two_fixed_deltaN(
    cfg: FixedPointConfig, deltaN: int, s: FixedPointState, counter: Optional[OpCounter] = None
) -> FixedPointState:
    if deltaN < 0:
        raise ValueError(f"deltaN must be >= 0, got {deltaN}")
    shifts = delta_n_shifts(cfg.m, deltaN)
    x2 = _checked(s.x_prev - _cascade(s.y, shifts, counter))
    y2 = _checked(s.y_prev + _cascade(s.x, shifts, counter))
    if counter is not None:
        counter.adds += 2
    return FixedPointState(x2, y2, s.x, s.y, s.n + 1)


@dataclass(frozen=True)
class Term:
    """``sign * src * 2**-offset * h**power``; ``src`` 0=x, 1=y, 2=updated x."""

    src: int
    sign: int
    power: int
    offset: int

    @property
    def passthrough(self) -> bool:
        return self.power == 0 and self.offset == 0

    def shift(self, m: int) -> int:
        return self.power * m + self.offset


def _dyadic_terms(p: Poly, src: int) -> list[Term]:
    if not p.is_dyadic():
        raise NotImplementableError(f"coefficient {p} is not a finite sum of powers of two")
    out = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        sign = 1 if c > 0 else -1
        num = abs(c.numerator)
        q = c.denominator.bit_length() - 1
        for b in range(num.bit_length() - 1, -1, -1):
            if num >> b & 1:
                out.append(Term(src, sign, k, q - b))
    return out


@dataclass(frozen=True)
class ShiftProgram:
    """Per-step term lists for the new ``x`` and new ``y`` of a one-step scheme."""

    row_x: tuple[Term, ...]
    row_y: tuple[Term, ...]

    def _row(self, terms, vals, m, shift, counter):
        acc = None
        for t in terms:
            v = vals[t.src]
            if not t.passthrough:
                v = shift(v, t.shift(m))
                if counter is not None:
                    counter.shifts += 1
            v = v if t.sign > 0 else -v
            if acc is None:
                acc = v
            else:
                acc = acc + v
                if counter is not None:
                    counter.adds += 1
        return acc

    def step(self, x, y, m: int, shift, counter: Optional[OpCounter] = None, check=None):
        nx = self._row(self.row_x, (x, y, None), m, shift, counter)
        if check:
            nx = check(nx)
        ny = self._row(self.row_y, (x, y, nx), m, shift, counter)
        if check:
            ny = check(ny)
        return nx, ny


def shift_program(spec: SchemeSpec) -> ShiftProgram:
    """Shift-add program of a one-step scheme with dyadic polynomial entries."""
    if spec.kind is not Kind.ONE_STEP:
        raise TypeError(f"{spec.name} is a two-step scheme")
    if not spec.shift_add or spec.poly is None:
        raise NotImplementableError(f"{spec.name} needs multiplications in every step")
    if spec.sequential_base is not None:
        a, c = spec.sequential_base
        row_x = _dyadic_terms(a, 0) + _dyadic_terms(-c, 1)
        row_y = _dyadic_terms(c, 2) + _dyadic_terms(a, 1)
    else:
        p = spec.poly
        row_x = _dyadic_terms(p.a, 0) + _dyadic_terms(p.b, 1)
        row_y = _dyadic_terms(p.c, 0) + _dyadic_terms(p.d, 1)
    # a passthrough term leads each row so it costs no shift
    row_x.sort(key=lambda t: not t.passthrough)
    row_y.sort(key=lambda t: not t.passthrough)
    return ShiftProgram(tuple(row_x), tuple(row_y))


@dataclass
class FixedPointEngine:
    """Integer engine with its own operation counter."""

    cfg: FixedPointConfig
    counter: OpCounter = field(default_factory=OpCounter)

    def run_two_step(self, steps: int, delta: Optional[DeltaSpec] = None, init: str = "series") -> np.ndarray:
        """Integer points (sub-LSB units) including both initialization points."""
        delta = delta or DeltaSpec()
        s = init_state(self.cfg, delta, method=init)
        out = [(s.x_prev, s.y_prev), (s.x, s.y)]
        for _ in range(steps):
            if delta.form is DeltaForm.SHIFT_SERIES:
                s = step_two_fixed_deltaN(self.cfg, delta.N, s, self.counter)
            else:
                s = step_two_fixed(self.cfg, s, self.counter)
            out.append((s.x, s.y))
        return np.array(out, dtype=np.int64)

    def run_one_step(self, spec: SchemeSpec, steps: int) -> np.ndarray:
        prog = shift_program(spec)
        x, y = self.cfg.radius, 0
        out = [(x, y)]
        for _ in range(steps):
            x, y = prog.step(x, y, self.cfg.m, _int_shift, self.counter, _checked)
            out.append((x, y))
        return np.array(out, dtype=np.int64)

    def run(self, spec: SchemeSpec, steps: int) -> np.ndarray:
        if spec.kind is Kind.TWO_STEP:
            if not spec.shift_add:
                raise NotImplementableError(
                    f"{spec.name} with delta={spec.delta.label} needs multiplications"
                )
            return self.run_two_step(steps, spec.delta)
        return self.run_one_step(spec, steps)


def cost_report(spec: SchemeSpec, cfg: FixedPointConfig, steps: int = 8) -> Cost:
    """Measured per-step cost of ``spec`` on the instrumented integer engine."""
    if not spec.shift_add:
        raise NotImplementableError(f"{spec.name} needs multiplications in every step")
    eng = FixedPointEngine(cfg)
    if spec.kind is Kind.TWO_STEP:
        eng.run_two_step(0, spec.delta)
        eng.counter.reset()
    eng.run(spec, steps)
    c = eng.counter.cost()
    if c.adds % steps or c.shifts % steps or c.multiplies % steps:
        raise RuntimeError(f"non-uniform per-step cost {c} over {steps} steps")
    return Cost(c.adds // steps, c.shifts // steps, c.multiplies // steps)


def float_kernel_cost(spec: SchemeSpec, h: float, steps: int = 8) -> Cost:
    """Measured per-step cost of a floating-point realization.

    Shift-add schemes at a dyadic step run their shift program with
    ``ldexp``; everything else multiplies by precomputed coefficients.
    """
    m = dyadic_exponent(h)
    counter = OpCounter()
    if spec.kind is Kind.ONE_STEP:
        if spec.shift_add and m is not None and m >= 1:
            prog = shift_program(spec)
            x, y = 1.0, 0.0
            for _ in range(steps):
                x, y = prog.step(x, y, m, _float_shift, counter)
        else:
            mat = spec.coefficients(h)
            x, y = 1.0, 0.0
            for _ in range(steps):
                x, y = mat.a * x + mat.b * y, mat.c * x + mat.d * y
                counter.multiplies += 4
                counter.adds += 2
    else:
        dval = evaluate_delta(spec.delta, h)
        ic = init_two_step(1.0, dval)
        xp, yp, x, y = ic.x0, ic.y0, ic.x1, ic.y1
        if spec.shift_add and m is not None and m >= 1:
            N = spec.delta.N if spec.delta.form is DeltaForm.SHIFT_SERIES else None
            shifts = [m - 1] if N is None else delta_n_shifts(m, N)
            for _ in range(steps):
                ty = _cascade(y, shifts, counter, _float_shift, _identity)
                tx = _cascade(x, shifts, counter, _float_shift, _identity)
                xp, yp, x, y = x, y, xp - ty, yp + tx
                counter.adds += 2
        else:
            t = 2.0 * dval
            for _ in range(steps):
                xp, yp, x, y = x, y, xp - t * y, yp + t * x
                counter.multiplies += 2
                counter.adds += 2
    c = counter.cost()
    return Cost(c.adds // steps, c.shifts // steps, c.multiplies // steps)
