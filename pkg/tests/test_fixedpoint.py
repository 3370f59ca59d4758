import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddacircle.fixedpoint import (
    FixedPointConfig,
    FixedPointEngine,
    FixedPointState,
    NotImplementableError,
    OpCounter,
    cost_report,
    delta_n_shifts,
    float_kernel_cost,
    init_state,
    init_x1_series,
    shift_program,
    sqrt_series_terms,
    step_two_fixed,
    step_two_fixed_deltaN,
)
from ddacircle.generator import InitialConditions, generate_via_matrix
from ddacircle.schemes import Cost, DeltaSpec, catalog, get_scheme, matsushiro_half_step

SHIFT_ADD = [s for s in catalog() if s.shift_add] + [matsushiro_half_step()]


class TestConfig:
    def test_defaults(self):
        cfg = FixedPointConfig(3, 8)
        assert cfg.frac_bits == 12
        assert cfg.h == 0.125
        assert cfg.radius == 1 << 20

    @pytest.mark.parametrize("kw", [dict(m=0, N=8), dict(m=1, N=0), dict(m=1, N=8, frac_bits=-1),
                                    dict(m=1, N=8, series_terms=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            FixedPointConfig(**kw)

    def test_too_wide(self):
        with pytest.raises(OverflowError):
            FixedPointConfig(1, 60, 8)


class TestSeries:
    def test_term_order(self):
        it = sqrt_series_terms()
        # 1/2 h^2, 1/8 h^4, 1/16 h^6, 5/128 h^8 = (1/32 + 1/128) h^8
        assert [next(it) for _ in range(5)] == [(1, 1), (2, 3), (3, 4), (4, 5), (4, 7)]

    def test_terms_sum_to_taylor(self):
        # oracle: binomial series of sqrt(1 - t), coefficient of t^j via the recurrence
        coef, acc = Fraction(1), {}
        for j in range(1, 9):
            coef *= Fraction(2 * j - 3, 2 * j)
            acc[j] = -coef
        got = {}
        for j, e in sqrt_series_terms():
            if j > 8:
                break
            got[j] = got.get(j, 0) + Fraction(1, 2**e)
        assert got == acc

    def test_three_term_dodecagon(self):
        assert init_x1_series(FixedPointConfig(1, 8, 0, 3)) == 222 == round(256 * math.cos(math.pi / 6))

    def test_five_terms_guarded(self):
        # 2^16 - 2^15 - 2^12 - 2^10 - 2^8 - 2^6; six dropped terms still weigh ~2.2 sub-LSB at h = 1/2
        cfg = FixedPointConfig(1, 8, 8, 5)
        assert init_x1_series(cfg) == 56758
        assert math.floor(2**16 * math.sqrt(0.75) + 0.5) == 56756

    def test_all_terms_guarded(self):
        cfg = FixedPointConfig(1, 8, 8)
        true = 2**16 * math.sqrt(0.75)
        assert abs(init_x1_series(cfg) - true) < 1.2

    @given(m=st.integers(2, 14), N=st.integers(8, 20))
    def test_default_guard_within_one_sub_lsb(self, m, N):
        cfg = FixedPointConfig(m, N)
        R = cfg.radius
        y1 = R >> m
        lo = math.isqrt(R * R - y1 * y1)
        assert lo - 1 <= init_x1_series(cfg) <= lo + 1

    @given(m=st.integers(3, 14), N=st.integers(8, 20))
    def test_leading_term_dominates(self, m, N):
        cfg = FixedPointConfig(m, N)
        R = cfg.radius
        lead = R - (R >> (2 * m + 1))
        assert abs(init_x1_series(cfg) - lead) / R <= 2.0 ** (-4 * m - 2)


class TestStep:
    def test_hand_step(self):
        cfg = FixedPointConfig(1, 8, 0, 3)
        s = init_state(cfg)
        assert (s.x_prev, s.y_prev, s.x, s.y) == (256, 0, 222, 128)
        s2 = step_two_fixed(cfg, s)
        assert (s2.x, s2.y) == (128, 222)

    def test_dodecagon_closure(self):
        eng = FixedPointEngine(FixedPointConfig(1, 8, 0, 3))
        pts = eng.run_two_step(12)
        assert len(pts) == 14
        assert np.max(np.abs(pts[12] - [256, 0])) <= 2
        assert eng.counter.cost() == Cost(24, 24, 0)

    @given(x0=st.integers(1, 2**30), m=st.integers(2, 20))
    def test_single_shift_increment(self, x0, m):
        cfg = FixedPointConfig(m, 8)
        s = step_two_fixed(cfg, FixedPointState(x0, 0, 0, 0))
        assert s.y == x0 >> (m - 1)

    def test_overflow(self):
        cfg = FixedPointConfig(1, 8)
        with pytest.raises(OverflowError):
            step_two_fixed(cfg, FixedPointState(2**62, 0, 0, 2**62))

    def test_negative_deltaN(self):
        with pytest.raises(ValueError):
            step_two_fixed_deltaN(FixedPointConfig(2, 8), -1, FixedPointState(1, 0))


class TestDeltaN:
    def test_shifts_m2(self):
        # 2h = 2^-1 and 2 h^3 / 8 = 2^-8 at h = 1/4
        assert delta_n_shifts(2, 0) == [1, 8]

    def test_shifts_general(self):
        assert delta_n_shifts(3, 2) == [2, 11, 13, 15]

    def test_wide_shifts_dropped(self):
        assert delta_n_shifts(20, 3) == [19, 62]

    @pytest.mark.parametrize("m,N", [(2, 0), (3, 2), (4, 5)])
    def test_cascade_equals_2delta(self, m, N):
        # on a value divisible by every shift the cascade is exact
        v = 1 << 60
        t = step_two_fixed_deltaN(FixedPointConfig(m, 8), N, FixedPointState(v, 0))
        h = Fraction(1, 2**m)
        two_delta = 2 * (h - h**3 * sum(Fraction(1, 2 ** (3 + 2 * k)) for k in range(N + 1)))
        assert t.y == v * two_delta

    @pytest.mark.parametrize("N", [0, 1, 3])
    def test_cost(self, N):
        eng = FixedPointEngine(FixedPointConfig(2, 8))
        eng.run_two_step(10, DeltaSpec("shift_series", N))
        assert eng.counter.cost() == Cost(20 * (N + 2), 20 * (N + 2), 0)

    def test_init_y1_is_delta_r(self):
        cfg = FixedPointConfig(2, 8)
        s = init_state(cfg, DeltaSpec("shift_series", 1))
        h = Fraction(1, 4)
        assert s.y == cfg.radius * (h - h**3 / 8 - h**3 / 32)

    def test_unsupported_delta(self):
        with pytest.raises(NotImplementableError):
            init_state(FixedPointConfig(2, 8), DeltaSpec("exact_sin"))


class TestCost:
    @pytest.mark.parametrize("spec", SHIFT_ADD, ids=lambda s: s.name)
    @pytest.mark.parametrize("m", [1, 3, 5])
    def test_instrumented_equals_declared(self, spec, m):
        assert cost_report(spec, FixedPointConfig(m, 12)) == spec.cost_profile

    @pytest.mark.parametrize("spec", SHIFT_ADD, ids=lambda s: s.name)
    def test_float_kernel_equals_declared(self, spec):
        assert float_kernel_cost(spec, 2**-3) == spec.cost_profile

    @pytest.mark.parametrize("name", ["exact_rotation", "implicit_midpoint", "third_order_simultaneous"])
    def test_multiply_schemes_rejected(self, name):
        with pytest.raises(NotImplementableError):
            cost_report(get_scheme(name), FixedPointConfig(3, 8))

    def test_explicit_midpoint_m3(self):
        assert cost_report(get_scheme("explicit_midpoint"), FixedPointConfig(3, 8)) == Cost(2, 2, 0)

    def test_first_order_m3(self):
        assert cost_report(get_scheme("first_order"), FixedPointConfig(3, 8)) == Cost(2, 2, 0)

    def test_delta0_m2(self):
        spec = get_scheme("explicit_midpoint", DeltaSpec("shift_series", 0))
        assert cost_report(spec, FixedPointConfig(2, 8)) == Cost(4, 4, 0)

    def test_multiply_kernels(self):
        assert float_kernel_cost(get_scheme("exact_rotation"), 0.25) == Cost(2, 0, 4)
        assert float_kernel_cost(get_scheme("explicit_midpoint", DeltaSpec("exact_sin")), 0.25) == Cost(2, 0, 2)

    def test_counter_reset(self):
        c = OpCounter(3, 4, 5)
        c.reset()
        assert c.cost() == Cost(0, 0, 0)


class TestOneStepPrograms:
    @pytest.mark.parametrize("spec", [s for s in SHIFT_ADD if s.kind.value == "one_step"], ids=lambda s: s.name)
    @pytest.mark.parametrize("m", [2, 4])
    def test_tracks_float(self, spec, m):
        # integer program vs float matrix: truncation error per step under a few sub-LSB
        cfg = FixedPointConfig(m, 10)
        steps = 64
        pts = FixedPointEngine(cfg).run_one_step(spec, steps).astype(float)
        mat = spec.coefficients(cfg.h)
        v = np.array([float(cfg.radius), 0.0])
        d = 0.0
        for n in range(1, steps + 1):
            v = mat.as_array() @ v
            d = max(d, float(np.max(np.abs(pts[n] - v))))
        assert d < 8 * steps

    def test_magic_circle_uses_new_x(self):
        prog = shift_program(get_scheme("magic_circle"))
        assert any(t.src == 2 for t in prog.row_y)


def _same_start_float(cfg, steps):
    s = init_state(cfg)
    sc = 2.0**cfg.frac_bits
    ic = InitialConditions(s.x_prev / sc, s.y_prev / sc, s.x / sc, s.y / sc, 2.0**cfg.N)
    return generate_via_matrix(cfg.h, ic, steps) * sc


class TestAgainstFloat:
    def test_m1_bit_identical(self):
        # shift by m - 1 = 0 truncates nothing
        cfg = FixedPointConfig(1, 8, 44)
        fx = FixedPointEngine(cfg).run_two_step(10**4).astype(float)
        assert np.array_equal(fx, _same_start_float(cfg, 10**4))

    @pytest.mark.parametrize("m", [2, 3, 6, 10])
    def test_only_shift_truncation(self, m):
        # float recurrence with the same floor applied to each shifted term
        cfg = FixedPointConfig(m, 8, 44)
        steps = 10**4
        fx = FixedPointEngine(cfg).run_two_step(steps)
        s = init_state(cfg)
        xp, yp, x, y = float(s.x_prev), float(s.y_prev), float(s.x), float(s.y)
        for n in range(2, steps + 2):
            xp, yp, x, y = x, y, xp - math.floor(math.ldexp(y, 1 - m)), yp + math.floor(math.ldexp(x, 1 - m))
            assert (x, y) == (fx[n, 0], fx[n, 1])

    @pytest.mark.parametrize("m", [2, 3, 6, 10])
    def test_far_below_device_lsb(self, m):
        cfg = FixedPointConfig(m, 8, 44)
        steps = 10**4
        fx = FixedPointEngine(cfg).run_two_step(steps).astype(float)
        dev = np.max(np.abs(fx - _same_start_float(cfg, steps)))
        assert dev / 2.0**cfg.frac_bits < 2.0**-30


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 10), N=st.integers(8, 16), extra=st.integers(0, 4))
def test_radius_bounded_over_period(m, N, extra):
    cfg = FixedPointConfig(m, N, 2 * m + 4 + extra)
    steps = math.ceil(2 * math.pi / math.asin(cfg.h)) + 1
    pts = FixedPointEngine(cfg).run_two_step(steps).astype(float)
    r = np.hypot(pts[:, 0], pts[:, 1])
    R = float(cfg.radius)
    eps = 2.0 ** (-2 * m)
    assert np.all(r >= R * (1 - eps)) and np.all(r <= R * (1 + eps))
