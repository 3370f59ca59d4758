"""Catalog of DDA circle-generation schemes.

Every scheme discretizes the circle ODE ``dx/dt = -y, dy/dt = x`` with a
fixed step ``h``.  One-step schemes are a 2x2 update matrix whose entries
are functions of ``h``; two-step schemes are the explicit midpoint family

    x[n+2] = x[n] - 2*delta*y[n+1]
    y[n+2] = y[n] + 2*delta*x[n+1]

parameterized by a step function ``delta(h)``.

Polynomial coefficients are stored as exact fractions and evaluated in
rational arithmetic, so at a dyadic step ``h = 2**-m`` the returned floats
are the exact dyadic values (and correctly rounded otherwise).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]

__all__ = [
    "Poly",
    "OneStepMatrix",
    "PolyMatrix",
    "Cost",
    "Kind",
    "DeltaForm",
    "DeltaSpec",
    "SchemeSpec",
    "StepRangeError",
    "catalog",
    "get_scheme",
    "explicit_midpoint",
    "matsushiro_half_step",
    "evaluate_one_step",
    "sequentialize",
    "evaluate_delta",
    "delta_exact",
    "dyadic_exponent",
]


class StepRangeError(ValueError):
    """Step size outside the range a scheme is declared valid for."""


def _frac(v: Number) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class Poly:
    """Polynomial in ``h`` with exact rational coefficients (ascending powers)."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Sequence[Number]):
        cs = [_frac(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs) or (Fraction(0),))

    @classmethod
    def const(cls, v: Number) -> "Poly":
        return cls([v])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def exact(self, h: Number) -> Fraction:
        hf = _frac(h)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * hf + c
        return acc

    def __call__(self, h: Number) -> float:
        return float(self.exact(h))

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Poly([x + y for x, y in zip(a, b)])

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return Poly(out)

    def truncate(self, order: int) -> "Poly":
        return Poly(self.coeffs[: order + 1])

    def substitute_scale(self, s: Number) -> "Poly":
        """Return p(s*h)."""
        sf = _frac(s)
        return Poly([c * sf**k for k, c in enumerate(self.coeffs)])

    def is_dyadic(self) -> bool:
        """True when every coefficient is a finite sum of powers of two."""
        return all(c.denominator & (c.denominator - 1) == 0 for c in self.coeffs)

    def __repr__(self) -> str:
        terms = [f"{c}*h^{k}" for k, c in enumerate(self.coeffs) if c]
        return "Poly(" + (" + ".join(terms) or "0") + ")"


H = Poly([0, 1])
ONE = Poly.const(1)
ZERO = Poly.const(0)


@dataclass(frozen=True)
class OneStepMatrix:
    """Entries of the update ``(x, y) -> (a*x + b*y, c*x + d*y)``."""

    a: float
    b: float
    c: float
    d: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def is_rotation_form(self) -> bool:
        """Exact test for the ``(a, -c; c, a)`` shape."""
        return self.b == -self.c and self.d == self.a


@dataclass(frozen=True)
class PolyMatrix:
    """A one-step matrix whose entries are polynomials in ``h``."""

    a: Poly
    b: Poly
    c: Poly
    d: Poly

    def at(self, h: Number) -> OneStepMatrix:
        return OneStepMatrix(self.a(h), self.b(h), self.c(h), self.d(h))

    def entries(self) -> tuple[Poly, Poly, Poly, Poly]:
        return (self.a, self.b, self.c, self.d)


class Cost(NamedTuple):
    """Per-step operation counts."""

    adds: int
    shifts: int
    multiplies: int


class Kind(str, enum.Enum):
    ONE_STEP = "one_step"
    TWO_STEP = "two_step"


class DeltaForm(str, enum.Enum):
    IDENTITY = "identity"
    EXACT_SIN = "exact_sin"
    TAYLOR3 = "taylor3"
    SHIFT_SERIES = "shift_series"


@dataclass(frozen=True)
class DeltaSpec:
    """Choice of ``delta(h)`` for the two-step family.

    ``N`` is only meaningful for ``SHIFT_SERIES``, where
    ``delta_N = h - h**3 * sum(2**(-3 - 2k) for k in 0..N)``.
    """

    form: DeltaForm = DeltaForm.IDENTITY
    N: int = 0

    def __post_init__(self):
        object.__setattr__(self, "form", DeltaForm(self.form))
        if self.form is DeltaForm.SHIFT_SERIES and self.N < 0:
            raise ValueError("shift_series requires N >= 0")

    @property
    def h_max(self) -> float:
        return math.pi / 2 if self.form is DeltaForm.EXACT_SIN else 1.0

    @property
    def label(self) -> str:
        if self.form is DeltaForm.SHIFT_SERIES:
            return f"shift_series({self.N})"
        return self.form.value

    @classmethod
    def parse(cls, text: str) -> "DeltaSpec":
        """Parse ``identity``, ``sin``, ``taylor3`` or ``shift:N`` / ``delta-N``."""
        t = text.strip().lower().replace("-", "_")
        aliases = {
            "identity": DeltaForm.IDENTITY,
            "h": DeltaForm.IDENTITY,
            "sin": DeltaForm.EXACT_SIN,
            "exact_sin": DeltaForm.EXACT_SIN,
            "taylor3": DeltaForm.TAYLOR3,
        }
        if t in aliases:
            return cls(aliases[t])
        for prefix in ("shift_series:", "shift:", "delta_n:", "delta_", "shift_series"):
            if t.startswith(prefix):
                rest = t[len(prefix):].strip("():")
                if rest.isdigit():
                    return cls(DeltaForm.SHIFT_SERIES, int(rest))
        raise ValueError(f"unknown delta form {text!r}")

    def cost(self) -> Cost:
        if self.form is DeltaForm.IDENTITY:
            return Cost(2, 2, 0)
        if self.form is DeltaForm.SHIFT_SERIES:
            return Cost(2 * (self.N + 2), 2 * (self.N + 2), 0)
        # 2*delta precomputed once; one multiply per coordinate per step
        return Cost(2, 0, 2)


def _sixth_series(N: int) -> Fraction:
    return sum((Fraction(1, 2 ** (3 + 2 * k)) for k in range(N + 1)), Fraction(0))


def delta_exact(d: DeltaSpec, h: Number) -> Fraction:
    """Exact rational delta for the polynomial forms (not ``exact_sin``)."""
    hf = _frac(h)
    if d.form is DeltaForm.IDENTITY:
        return hf
    if d.form is DeltaForm.TAYLOR3:
        return hf - hf**3 / 6
    if d.form is DeltaForm.SHIFT_SERIES:
        return hf - hf**3 * _sixth_series(d.N)
    raise ValueError("sin(h) has no exact rational value")


def evaluate_delta(d: DeltaSpec, h: Number) -> float:
    """Evaluate ``delta(h)``."""
    if d.form is DeltaForm.EXACT_SIN:
        return math.sin(float(h))
    return float(delta_exact(d, h))


def dyadic_exponent(h: Number) -> Optional[int]:
    """Return ``m`` if ``h == 2**-m`` exactly (``m >= 0``), else None."""
    hf = _frac(h)
    if hf <= 0 or hf.numerator != 1:
        return None
    q = hf.denominator
    if q & (q - 1):
        return None
    return q.bit_length() - 1


@dataclass(frozen=True)
class SchemeSpec:
    """A named difference scheme.

    ``order`` is the consistency order (local error ``O(h**(order+1))``
    against the exact rotation); ``degree`` is the polynomial degree the
    DDA literature classifies these schemes by, which differs for
    Matsushiro and the best third-order interpolator.  ``cost_profile`` is
    the per-step cost of the cheapest realization at ``h = 2**-m``; for
    schemes that are not ``shift_add`` it counts multiplications by
    precomputed coefficients.
    """

    name: str
    kind: Kind
    order: Optional[int]
    cost_profile: Cost
    shift_add: bool
    h_max: float
    h_max_inclusive: bool = True
    degree: Optional[int] = None
    poly: Optional[PolyMatrix] = None
    matrix_fn: Optional[Callable[[Number], OneStepMatrix]] = field(default=None, compare=False)
    sequential_base: Optional[tuple[Poly, Poly]] = None
    delta: Optional[DeltaSpec] = None
    description: str = ""

    def check_step(self, h: Number) -> None:
        hv = float(h)
        bound = self.h_max if self.delta is None else min(self.h_max, self.delta.h_max)
        inside = hv <= bound if self.h_max_inclusive else hv < bound
        if not (hv > 0 and inside):
            op = "<=" if self.h_max_inclusive else "<"
            raise StepRangeError(
                f"{self.name}: step h={hv!r} outside validity range 0 < h {op} {bound!r}"
            )

    @property
    def rotation_form(self) -> bool:
        """Whether the scheme is declared in ``(a, -c; c, a)`` form."""
        if self.kind is not Kind.ONE_STEP:
            return False
        if self.poly is None:
            return True
        return self.poly.b == -self.poly.c and self.poly.d == self.poly.a

    def coefficients(self, h: Number, check_range: bool = True):
        if self.kind is Kind.ONE_STEP:
            return evaluate_one_step(self, h, check_range=check_range)
        if check_range:
            self.check_step(h)
        return evaluate_delta(self.delta, h)


def _rotation(a: Poly, c: Poly) -> PolyMatrix:
    return PolyMatrix(a, -c, c, a)


def _exact_rotation(h: Number) -> OneStepMatrix:
    hv = float(h)
    c, s = math.cos(hv), math.sin(hv)
    return OneStepMatrix(c, -s, s, c)


def _implicit_midpoint(h: Number) -> OneStepMatrix:
    hf = _frac(h)
    den = 4 + hf * hf
    a = float((4 - hf * hf) / den)
    c = float(4 * hf / den)
    return OneStepMatrix(a, -c, c, a)


_HALF = Fraction(1, 2)
_A2 = ONE - Poly([0, 0, _HALF])  # 1 - h^2/2


def _build_catalog() -> tuple[SchemeSpec, ...]:
    one = Kind.ONE_STEP
    first = _rotation(ONE, H)
    magic_base = (ONE, H)
    return (
        SchemeSpec(
            "first_order_simultaneous", one, order=1, degree=1,
            cost_profile=Cost(2, 2, 0), shift_add=True, h_max=1.0,
            poly=first, description="conventional DDA, a=1, c=h",
        ),
        SchemeSpec(
            "second_order_simultaneous", one, order=2, degree=2,
            cost_profile=Cost(4, 4, 0), shift_add=True, h_max=1.0,
            poly=_rotation(_A2, H), description="a=1-h^2/2, c=h",
        ),
        SchemeSpec(
            "third_order_simultaneous", one, order=3, degree=3,
            cost_profile=Cost(2, 0, 4), shift_add=False, h_max=1.0,
            poly=_rotation(_A2, Poly([0, 1, 0, Fraction(-1, 6)])),
            description="Taylor truncation of the exact rotation, c=h-h^3/6",
        ),
        SchemeSpec(
            "matsushiro", one, order=2, degree=3,
            cost_profile=Cost(6, 6, 0), shift_add=True, h_max=1.0,
            poly=_rotation(_A2, Poly([0, 1, 0, Fraction(-1, 4)])),
            description="c=h-h^3/4, truncation of the implicit midpoint rule",
        ),
        SchemeSpec(
            "best_third_order", one, order=2, degree=3,
            cost_profile=Cost(6, 6, 0), shift_add=True, h_max=1.0,
            poly=_rotation(_A2, Poly([0, 1, 0, Fraction(-1, 8)])),
            description="c=h-h^3/8, rho^2 = 1 + h^6/64",
        ),
        SchemeSpec(
            "first_order_sequential", one, order=1, degree=1,
            cost_profile=Cost(2, 2, 0), shift_add=True, h_max=2.0,
            h_max_inclusive=False,
            poly=sequentialize(*magic_base, order=1), sequential_base=magic_base,
            description='"magic circle": y uses the freshly updated x',
        ),
        SchemeSpec(
            "second_order_sequential", one, order=1, degree=2,
            cost_profile=Cost(5, 5, 0), shift_add=True, h_max=2.0,
            h_max_inclusive=False,
            poly=sequentialize(_A2, H, order=2),
            description="rows (1-h^2/2, -h), (h, 1-3h^2/2)",
        ),
        SchemeSpec(
            "exact_rotation", one, order=None, degree=None,
            cost_profile=Cost(2, 0, 4), shift_add=False, h_max=math.pi,
            matrix_fn=_exact_rotation, description="a=cos h, c=sin h",
        ),
        SchemeSpec(
            "implicit_midpoint", one, order=2, degree=None,
            cost_profile=Cost(2, 0, 4), shift_add=False, h_max=2.0,
            matrix_fn=_implicit_midpoint,
            description="a=(4-h^2)/(4+h^2), c=4h/(4+h^2)",
        ),
        explicit_midpoint(),
    )


def explicit_midpoint(delta: Optional[DeltaSpec] = None) -> SchemeSpec:
    """The two-step explicit midpoint scheme with step function ``delta``."""
    delta = delta or DeltaSpec()
    return SchemeSpec(
        "explicit_midpoint", Kind.TWO_STEP, order=2, degree=None,
        cost_profile=delta.cost(),
        shift_add=delta.form in (DeltaForm.IDENTITY, DeltaForm.SHIFT_SERIES),
        h_max=1.0, delta=delta,
        description=f"x[n+2] = x[n] - 2 delta y[n+1], delta={delta.label}",
    )


def matsushiro_half_step() -> SchemeSpec:
    """Matsushiro's scheme with ``h`` replaced by ``h/2`` (the patented variant)."""
    base = get_scheme("matsushiro")
    p = base.poly
    half = PolyMatrix(*(e.substitute_scale(_HALF) for e in p.entries()))
    return SchemeSpec(
        "matsushiro_half_step", Kind.ONE_STEP, order=2, degree=3,
        cost_profile=base.cost_profile, shift_add=True, h_max=2.0,
        poly=half, description="matsushiro evaluated at h/2",
    )


def sequentialize(a: Union[Poly, Number], c: Union[Poly, Number], order: int) -> PolyMatrix:
    """Sequential variant of the simultaneous scheme ``(a, -c; c, a)``.

    Feeding the new ``x`` into the ``y`` update gives rows ``(a, -c)`` and
    ``(a*c, a - c**2)``.  Entries are truncated to degree ``max(order, 2)``:
    the ``-c**2`` term is kept even for first order, as in the magic circle,
    where it is what makes the determinant exactly one.
    """
    pa = a if isinstance(a, Poly) else Poly.const(a)
    pc = c if isinstance(c, Poly) else Poly.const(c)
    keep = max(order, 2)
    return PolyMatrix(
        pa.truncate(keep),
        (-pc).truncate(keep),
        (pa * pc).truncate(keep),
        (pa - pc * pc).truncate(keep),
    )


def evaluate_one_step(spec: SchemeSpec, h: Number, check_range: bool = True) -> OneStepMatrix:
    """Evaluate a one-step scheme's update matrix at step ``h``."""
    if spec.kind is not Kind.ONE_STEP:
        raise TypeError(f"{spec.name} is a two-step scheme")
    if check_range:
        spec.check_step(h)
    if spec.matrix_fn is not None:
        return spec.matrix_fn(h)
    return spec.poly.at(h)


_CATALOG: tuple[SchemeSpec, ...] = ()

_ALIASES = {
    "first_order": "first_order_simultaneous",
    "second_order": "second_order_simultaneous",
    "third_order": "third_order_simultaneous",
    "magic_circle": "first_order_sequential",
    "best_third": "best_third_order",
    "exact": "exact_rotation",
}


def catalog() -> list[SchemeSpec]:
    """All catalog schemes; the two-step entry uses ``delta = h``."""
    global _CATALOG
    if not _CATALOG:
        _CATALOG = _build_catalog()
    return list(_CATALOG)


def get_scheme(name: str, delta: Optional[DeltaSpec] = None) -> SchemeSpec:
    """Look up a scheme by name; hyphens and a few short aliases are accepted."""
    key = name.strip().lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key == "explicit_midpoint":
        return explicit_midpoint(delta)
    if key in ("matsushiro_half_step", "matsushiro_half"):
        return matsushiro_half_step()
    for spec in catalog():
        if spec.name == key:
            return spec
    known = ", ".join(s.name for s in catalog())
    raise KeyError(f"unknown scheme {name!r}; known: {known}, matsushiro_half_step")
