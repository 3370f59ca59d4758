"""Acceptance criteria 1-10, one verdict line per criterion."""

import math
import timeit
from fractions import Fraction

import numpy as np
import pytest

from ddacircle.analysis import OrbitKind, classify, empirical_k, solve_best_third_order, spiral_analysis
from ddacircle.fixedpoint import FixedPointConfig, FixedPointEngine, init_x1_series
from ddacircle.generator import generate
from ddacircle.metrics import measure_period, xi_series, xi_step_matrix
from ddacircle.schemes import DeltaSpec, delta_exact, evaluate_delta, evaluate_one_step, get_scheme

MIDPOINT = get_scheme("explicit_midpoint")


@pytest.fixture
def verdict(capsys):
    def report(label, checks):
        failed = [name for name, ok in checks if not ok]
        with capsys.disabled():
            status = "PASS" if not failed else "FAIL"
            extra = "" if not failed else f" (failed: {', '.join(failed)})"
            print(f"\n[{status}] {label}{extra}")
        assert not failed, failed

    return report


def test_criterion_01_dodecagon(verdict):
    t = generate(MIDPOINT, 0.5, DeltaSpec(), r=1.0, steps=12)
    on_circle = float(np.max(np.abs(t.x**2 + t.y**2 - 1)))
    closure = float(np.max(np.abs(t.points[12] - t.points[0])))
    runtime = min(timeit.repeat(lambda: generate(MIDPOINT, 0.5, DeltaSpec(), r=1.0, steps=12),
                                number=1, repeat=50))
    verdict("1 dodecagon exactness", [
        ("14 points", len(t) == 14),
        (f"|x^2+y^2-1| = {on_circle:.2e} < 1e-13", on_circle < 1e-13),
        (f"closure {closure:.2e} <= 1e-12", closure <= 1e-12),
        (f"runtime {runtime * 1e3:.3f} ms < 1 ms", runtime < 1e-3),
    ])


def test_criterion_02_conservation_at_scale(verdict):
    holder = {}

    def run():
        holder["t"] = generate(MIDPOINT, 2**-8, r=1.0, steps=10**5)

    runtime = min(timeit.repeat(run, number=1, repeat=3))
    t = holder["t"]
    drift = float(np.max(np.abs(t.x**2 + t.y**2 - 1)))
    verdict("2 trajectory conservation at 1e5 steps", [
        (f"max |x^2+y^2-1| = {drift:.2e} < 1e-10", drift < 1e-10),
        (f"runtime {runtime:.3f} s < 1 s", runtime < 1.0),
    ])


def test_criterion_03_spiral_law(verdict):
    h = 1 / 16
    t = generate(get_scheme("first_order_simultaneous"), h, r=1.0, steps=1000)
    n = np.arange(len(t))
    expected = (1 + h * h) ** (n / 2)
    rel = float(np.max(np.abs(t.radii / expected - 1)))
    verdict("3 spiral law r (1+h^2)^(n/2)", [(f"relative error {rel:.2e} <= 1e-12", rel <= 1e-12)])


LEADING_TERMS = {
    "first_order_simultaneous": lambda h: h / 2,
    "second_order_simultaneous": lambda h: h**3 / 8,
    "third_order_simultaneous": lambda h: -h**3 / 24,
    "matsushiro": lambda h: -h**3 / 8,
    "best_third_order": lambda h: h**5 / 128,
}


def test_criterion_04_k_series(verdict):
    checks = []
    for name, lead in LEADING_TERMS.items():
        spec = get_scheme(name)
        h = 2**-5
        k_an = spiral_analysis(evaluate_one_step(spec, h)).k
        k_emp = empirical_k(generate(spec, h, steps=400))
        checks.append((f"{name} |k_emp - k| <= 1e-9", abs(k_emp - k_an) <= 1e-9))
        h = 2**-6
        ratio = spiral_analysis(evaluate_one_step(spec, h)).k / lead(h)
        checks.append((f"{name} ratio {ratio:.4f} in [0.95, 1.05]", 0.95 <= ratio <= 1.05))
    verdict("4 k-series table", checks)


def test_criterion_05_best_cubic(verdict):
    sols = solve_best_third_order()
    zero = [s for s in sols if abs(s.c2) < 1e-12]
    quad = [s for s in sols if abs(s.c2**2 - 0.75) < 1e-12]
    verdict("5 best cubic interpolator branches", [
        ("three branches", len(sols) == 3 and len(zero) == 1 and len(quad) == 2),
        ("c2=0 error 1/64", len(zero) == 1 and abs(zero[0].leading_error - 1 / 64) < 1e-12),
        ("c2^2=3/4 error 1", all(abs(s.leading_error - 1) < 1e-12 for s in quad) and len(quad) == 2),
    ])


def test_criterion_06_xi(verdict):
    checks = []
    for d in (0.5, 0.25, 1 / 64):
        ev = xi_step_matrix(d)
        f1 = np.array([1.0, 1.0, d])
        checks.append((f"B f1 = f1 at {d}", float(np.max(np.abs(ev.B @ f1 - f1))) <= 1e-15))
        series = xi_series(generate(MIDPOINT, d, steps=1000).points)
        v, worst = series[0].copy(), 0.0
        for n in range(1, len(series)):
            v = ev.B @ v
            worst = max(worst, float(np.max(np.abs(series[n] - v))))
        checks.append((f"xi_n = B^n xi_0 at {d} ({worst:.1e})", worst < 1e-10))
        numeric = np.linalg.eigvals(ev.B)
        closed = np.array(ev.eigenvalues)
        checks.append((f"|lambda| = 1 at {d}", bool(np.all(np.abs(np.abs(closed) - 1) < 1e-12))))
        checks.append((f"numeric spectrum at {d}",
                       all(float(np.min(np.abs(numeric - lam))) < 1e-6 for lam in closed)))
    verdict("6 xi machinery", checks)


def test_criterion_07_period(verdict):
    checks = []
    T = measure_period(generate(MIDPOINT, 0.5, DeltaSpec(), steps=14)).T_measured
    checks.append((f"delta=h at 1/2: T = {T!r}", abs(T - 6) < 1e-6))
    for h in (1 / 4, 1 / 16):
        d = DeltaSpec("exact_sin")
        T = measure_period(generate(MIDPOINT, h, d, steps=math.ceil(2 * math.pi / h) + 2)).T_measured
        checks.append((f"delta=sin h at {h}: |T - 2pi| = {abs(T - 2 * math.pi):.1e}", abs(T - 2 * math.pi) < 1e-8))
        t = generate(MIDPOINT, h, d, steps=10**4)
        n = np.arange(len(t))
        err = max(float(np.max(np.abs(t.x - np.cos(n * h)))), float(np.max(np.abs(t.y - np.sin(n * h)))))
        checks.append((f"point law at {h}: {err:.1e}", err <= 1e-9))
    verdict("7 period", checks)


def test_criterion_08_fixed_point(verdict):
    cfg = FixedPointConfig(m=1, N=8, frac_bits=0, series_terms=3)
    eng = FixedPointEngine(cfg)
    pts = eng.run_two_step(12)
    x1 = init_x1_series(cfg)
    off = int(np.max(np.abs(pts[12] - np.array([256, 0]))))
    cost = eng.counter.cost()
    verdict("8 fixed-point engine", [
        (f"x1 = {x1} = round(256 cos 30deg)", x1 == 222 == round(256 * math.cos(math.pi / 6))),
        (f"point 12 within {off} <= 2 LSB of (256, 0)", off <= 2),
        (f"cost {tuple(cost)} over 12 steps", tuple(cost) == (24, 24, 0)),
    ])


def test_criterion_09_delta_n(verdict):
    checks = []
    for h in (Fraction(1, 4), Fraction(1, 16)):
        t3 = h - h**3 / 6
        for N in range(7):
            dn = delta_exact(DeltaSpec("shift_series", N), h)
            bound = h**3 * Fraction(1, 2 ** (2 * N + 5)) * Fraction(4, 3)
            checks.append((f"bound N={N} h={h}", abs(dn - t3) <= bound))
            d = DeltaSpec("shift_series", N)
            t = generate(MIDPOINT, float(h), d, steps=10**4)
            drift = float(np.max(np.abs(t.radii - 1)))
            checks.append((f"radius N={N} h={h} ({drift:.1e})", drift <= 1e-12))
            assert t.delta == evaluate_delta(d, float(h))
    verdict("9 delta_N convergence", checks)


def test_criterion_10_classification(verdict):
    checks = []
    for h in (0.5, 0.25, 2**-6):
        c = classify(evaluate_one_step(get_scheme("magic_circle"), h))
        checks.append((f"magic circle ellipse at {h}", c.kind is OrbitKind.ELLIPSE and c.witnesses["det"] == 1.0))
    c = classify(evaluate_one_step(get_scheme("second_order_sequential"), 0.5))
    checks.append(("second-order sequential elliptical spiral",
                   c.kind is OrbitKind.ELLIPTICAL_SPIRAL and c.witnesses["discriminant"] == -0.9375))
    for name in ("exact_rotation", "implicit_midpoint"):
        for h in (0.25, 0.5, 1.0):
            c = classify(evaluate_one_step(get_scheme(name), h))
            checks.append((f"{name} exact circle at {h}", c.kind is OrbitKind.EXACT_CIRCLE))
    for h in (0.25, 0.5, 1.0):
        m = evaluate_one_step(get_scheme("implicit_midpoint"), h)
        checks.append((f"implicit midpoint a^2+c^2 at {h}", abs(m.a**2 + m.c**2 - 1) <= 1e-15))
    verdict("10 classification suite", checks)
