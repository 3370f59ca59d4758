"""Command-line interface: generate, analyze, sweep, bench, plot.

Numbers accept decimals, ``2^-m`` / ``2^N`` dyadic syntax and ``pi/k``.
Output goes to ``--output`` (default stdout); a relative output path is
placed under ``$DDACIRCLE_OUTPUT_DIR`` when that variable is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import analysis, fixedpoint, metrics
from .generator import Trajectory, generate
from .schemes import (
    DeltaSpec,
    Kind,
    SchemeSpec,
    dyadic_exponent,
    get_scheme,
)

CSV_HEADER = ["n", "x", "y", "radius_error", "angle"]
JSON_SCHEMA = 1
OUTPUT_DIR_ENV = "DDACIRCLE_OUTPUT_DIR"


class CSVParseError(ValueError):
    """Malformed trajectory CSV."""


_POW = re.compile(r"^\s*([+-]?\d+)\s*\^\s*([+-]?\d+)\s*$")
_PI = re.compile(r"^\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_number(text: str) -> float:
    """``0.25``, ``2^-4``, ``2^8``, ``pi``, ``pi/6``, ``2pi/3``."""
    m = _POW.match(text)
    if m:
        return float(int(m.group(1))) ** int(m.group(2))
    m = _PI.match(text.lower())
    if m:
        k = float(m.group(1)) if m.group(1) else 1.0
        d = float(m.group(2)) if m.group(2) else 1.0
        return k * math.pi / d
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def fmt(v) -> str:
    """Shortest round-trip decimal."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


@dataclass
class RunConfig:
    command: str
    scheme: str = "explicit-midpoint"
    h: float = 2.0**-4
    delta: str = "identity"
    r: Optional[float] = None
    steps: int = 100
    engine: str = "float"
    output: str = "-"
    format: Optional[str] = None
    frac_bits: Optional[int] = None
    series_terms: Optional[int] = None

    @property
    def radius(self) -> float:
        return 1.0 if self.r is None else self.r

    def spec(self) -> SchemeSpec:
        return get_scheme(self.scheme, DeltaSpec.parse(self.delta))

    def fixed_config(self) -> fixedpoint.FixedPointConfig:
        m = dyadic_exponent(self.h)
        if m is None or m < 1:
            raise fixedpoint.NotImplementableError(
                f"engine=fixed needs a dyadic step h = 2^-m with m >= 1, got h={self.h!r}"
            )
        N = dyadic_exponent(1.0 / self.radius) if self.radius >= 1 else None
        if N is None or N < 1:
            raise fixedpoint.NotImplementableError(
                f"engine=fixed needs a dyadic radius r = 2^N with N >= 1, got r={self.radius!r}"
            )
        return fixedpoint.FixedPointConfig(m, N, self.frac_bits, self.series_terms)


def _trajectory(cfg: RunConfig) -> Trajectory:
    spec = cfg.spec()
    if cfg.engine == "float":
        return generate(spec, cfg.h, r=cfg.radius, steps=cfg.steps)
    if cfg.engine != "fixed":
        raise ValueError(f"unknown engine {cfg.engine!r}")
    fc = cfg.fixed_config()
    spec.check_step(cfg.h)
    ints = fixedpoint.FixedPointEngine(fc).run(spec, cfg.steps)
    pts = ints.astype(float) / float(1 << fc.frac_bits)
    is_two = spec.kind is Kind.TWO_STEP
    dval = spec.coefficients(cfg.h) if is_two else None
    return Trajectory(pts, spec.name, cfg.h, cfg.radius, dval, 2 if is_two else 1)


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    if len(traj):
        ang = traj.angles()
        err = traj.radii - traj.r
        for n, ((x, y), e, a) in enumerate(zip(traj.points, err, ang)):
            w.writerow([n, fmt(x), fmt(y), fmt(e), fmt(a)])
    return buf.getvalue()


def read_trajectory_csv(text: str, r: Optional[float] = None, name: str = "csv") -> Trajectory:
    """Parse a trajectory CSV; ``r`` defaults to the radius implied by row 0."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CSVParseError("line 1: empty input, expected header")
    if [c.strip() for c in rows[0]] != CSV_HEADER:
        raise CSVParseError(f"line 1: expected header {','.join(CSV_HEADER)}, got {','.join(rows[0])}")
    pts, first_err = [], None
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise CSVParseError(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        try:
            x, y, e = float(row[1]), float(row[2]), float(row[3])
            int(row[0])
        except ValueError as exc:
            raise CSVParseError(f"line {lineno}: {exc}") from None
        if first_err is None:
            first_err = (x, y, e)
        pts.append((x, y))
    if r is None:
        r = math.hypot(first_err[0], first_err[1]) - first_err[2] if first_err else 1.0
    arr = np.array(pts, dtype=float).reshape(-1, 2)
    return Trajectory(arr, name, float("nan"), float(r))


def trajectory_svg(traj: Trajectory, size: int = 512) -> str:
    """SVG 1.1 with one reference circle of radius r and one polyline."""
    r = traj.r
    ext = 1.2 * r
    stroke = fmt(r / 200.0)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="{fmt(-ext)} {fmt(-ext)} {fmt(2 * ext)} {fmt(2 * ext)}">',
        f'  <circle cx="0" cy="0" r="{fmt(r)}" fill="none" stroke="#b0b0b0" stroke-width="{stroke}"/>',
    ]
    if len(traj):
        # SVG y grows downward
        coords = " ".join(f"{fmt(x)},{fmt(-y + 0.0)}" for x, y in traj.points)
        lines.append(
            f'  <polyline points="{coords}" fill="none" stroke="#1f4e9a" stroke-width="{stroke}"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def trajectory_json(traj: Trajectory, engine: str) -> str:
    doc = {
        "schema": JSON_SCHEMA,
        "scheme": traj.scheme,
        "engine": engine,
        "h": traj.h,
        "r": traj.r,
        "delta": traj.delta,
        "points": [[float(x), float(y)] for x, y in traj.points],
    }
    return json.dumps(doc, indent=2) + "\n"


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def analyze_report(spec: SchemeSpec, h: float) -> dict:
    rep = {
        "schema": JSON_SCHEMA,
        "scheme": spec.name,
        "kind": spec.kind.value,
        "h": h,
        "order": spec.order,
        "degree": spec.degree,
        "shift_add": spec.shift_add,
        "cost_profile": spec.cost_profile._asdict(),
    }
    if spec.kind is Kind.TWO_STEP:
        dval = spec.coefficients(h)
        ev = metrics.xi_step_matrix(dval)
        rep.update(
            delta_form=spec.delta.label,
            delta=dval,
            T_analytic=2 * math.pi * h / math.asin(dval),
            xi_invariant=[1.0, 1.0, dval],
            B=ev.B.tolist(),
            B_eigenvalues=[_complex_pair(z) for z in ev.eigenvalues],
        )
        return rep
    m = spec.coefficients(h)
    eig = analysis.eigen(m)
    cls = analysis.classify(m)
    rep.update(a=m.a, b=m.b, c=m.c, d=m.d, det=cls.witnesses["det"], trace=m.trace)
    try:
        sa = analysis.spiral_analysis(m)
        rep.update(rho2=sa.rho2, theta=sa.theta, k=sa.k)
    except (analysis.ShapeError, analysis.DegenerateRotationError):
        rep.update(rho2=None, theta=None, k=None)
    rep["eigenvalues"] = [_complex_pair(eig.lambda1), _complex_pair(eig.lambda2)]
    rep["class"] = cls.kind.value
    rep["witnesses"] = cls.witnesses
    return rep


def _analyze_text(rep: dict) -> str:
    out = []
    for k, v in rep.items():
        if isinstance(v, dict):
            out.append(f"{k}:")
            out.extend(f"  {kk}: {vv}" for kk, vv in v.items())
        else:
            out.append(f"{k}: {v}")
    return "\n".join(out) + "\n"


def _angle_per_step(spec: SchemeSpec, h: float) -> float:
    if spec.kind is Kind.TWO_STEP:
        return math.asin(spec.coefficients(h))
    return abs(float(np.angle(analysis.eigen(spec.coefficients(h)).lambda1)))


SWEEP_HEADER = ["scheme", "h", "max_radial_drift", "period_error", "k_empirical"]


def sweep_cell(spec: SchemeSpec, h: float, r: float = 1.0, steps: Optional[int] = None) -> list[str]:
    if steps is None:
        steps = math.ceil(2 * math.pi / _angle_per_step(spec, h)) + 1
    traj = generate(spec, h, r=r, steps=steps)
    drift = metrics.radial_drift(traj).max_abs
    try:
        perr = fmt(metrics.measure_period(traj).period_error)
    except analysis.DataError:
        perr = ""
    return [spec.name, fmt(h), fmt(drift), perr, fmt(analysis.empirical_k(traj))]


def sweep_csv(specs: Sequence[SchemeSpec], hs: Sequence[float], r: float = 1.0,
              steps: Optional[int] = None, jobs: int = 1) -> str:
    cells = [(s, h) for s in specs for h in hs]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as ex:
        rows = list(ex.map(lambda c: sweep_cell(c[0], c[1], r, steps), cells))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def bench_report(spec: SchemeSpec, cfg: RunConfig) -> dict:
    steps = max(cfg.steps, 1)
    if cfg.engine == "fixed":
        fc = cfg.fixed_config()
        cost = fixedpoint.cost_report(spec, fc)
        eng = fixedpoint.FixedPointEngine(fc)
        t0 = time.perf_counter()
        eng.run(spec, steps)
    else:
        cost = fixedpoint.float_kernel_cost(spec, cfg.h)
        t0 = time.perf_counter()
        generate(spec, cfg.h, r=cfg.radius, steps=steps)
    elapsed = time.perf_counter() - t0
    rep = {
        "schema": JSON_SCHEMA,
        "scheme": spec.name,
        "delta_form": spec.delta.label if spec.delta else None,
        "engine": cfg.engine,
        "h": cfg.h,
        "adds": cost.adds,
        "shifts": cost.shifts,
        "multiplies": cost.multiplies,
        "cost_profile": spec.cost_profile._asdict(),
        "matches_cost_profile": cost == spec.cost_profile,
        "steps": steps,
        "steps_per_second": steps / elapsed if elapsed > 0 else None,
    }
    if cost.multiplies:
        rep["note"] = "relatively expensive: multiplications in every step"
    return rep


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output in ("-", ""):
        sys.stdout.write(text)
        return
    path = cfg.output
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_generate(cfg: RunConfig) -> int:
    traj = _trajectory(cfg)
    fmt_ = cfg.format or "csv"
    if fmt_ == "csv":
        text = trajectory_csv(traj)
    elif fmt_ == "json":
        text = trajectory_json(traj, cfg.engine)
    elif fmt_ == "svg":
        text = trajectory_svg(traj)
    else:
        raise ValueError(f"generate: unsupported format {fmt_!r}")
    _emit(cfg, text)
    return 0


def cmd_analyze(cfg: RunConfig) -> int:
    rep = analyze_report(cfg.spec(), cfg.h)
    fmt_ = cfg.format or "json"
    if fmt_ == "json":
        text = json.dumps(rep, indent=2) + "\n"
    elif fmt_ == "text":
        text = _analyze_text(rep)
    else:
        raise ValueError(f"analyze: unsupported format {fmt_!r}")
    _emit(cfg, text)
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    rep = bench_report(cfg.spec(), cfg)
    _emit(cfg, json.dumps(rep, indent=2) + "\n")
    return 0


def cmd_plot(cfg: RunConfig, input_path: Optional[str] = None) -> int:
    if input_path:
        with open(input_path, encoding="utf-8") as fh:
            traj = read_trajectory_csv(fh.read(), cfg.r)
    else:
        traj = _trajectory(cfg)
    _emit(cfg, trajectory_svg(traj))
    return 0


def _parse_h_list(args) -> list[float]:
    if args.m_range:
        lo, hi = (int(v) for v in args.m_range.split(":"))
        return [2.0**-m for m in range(lo, hi + 1)]
    if args.h_list:
        return [parse_number(t) for t in args.h_list.split(",") if t.strip()]
    return [args.h] if args.h is not None else [2.0**-m for m in range(2, 7)]


def cmd_sweep(cfg: RunConfig, args) -> int:
    names = [t for t in (args.schemes or "").split(",") if t.strip()] if args.schemes is not None else [
        "first_order_simultaneous", "matsushiro", "best_third_order", "explicit_midpoint",
    ]
    delta = DeltaSpec.parse(cfg.delta)
    specs = [get_scheme(n, delta) for n in names]
    steps = args.steps
    text = sweep_csv(specs, _parse_h_list(args), cfg.radius, steps, args.jobs)
    _emit(cfg, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ddacircle", description="DDA circle generators")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, steps_default=100, h_default="2^-4"):
        sp.add_argument("--scheme", default="explicit-midpoint")
        sp.add_argument("--h", type=parse_number, default=None if h_default is None else parse_number(h_default))
        sp.add_argument("--delta", default="identity",
                        help="identity | sin | taylor3 | shift:N (two-step schemes)")
        sp.add_argument("--r", type=parse_number, default=None)
        sp.add_argument("--steps", type=int, default=steps_default)
        sp.add_argument("--engine", choices=["float", "fixed"], default="float")
        sp.add_argument("--output", "-o", default="-")
        sp.add_argument("--frac-bits", type=int, default=None)
        sp.add_argument("--series-terms", type=int, default=None)

    g = sub.add_parser("generate", help="write a trajectory as csv, json or svg")
    common(g)
    g.add_argument("--format", choices=["csv", "json", "svg"], default="csv")

    a = sub.add_parser("analyze", help="matrix, spiral and orbit-class report")
    common(a)
    a.add_argument("--format", choices=["json", "text"], default="json")

    s = sub.add_parser("sweep", help="accuracy table across schemes and step sizes")
    common(s, steps_default=None, h_default=None)
    s.add_argument("--schemes", default=None, help="comma-separated names; empty for none")
    s.add_argument("--h-list", default=None, help="comma-separated step sizes")
    s.add_argument("--m-range", default=None, help="lo:hi for h = 2^-lo .. 2^-hi")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--format", choices=["csv"], default="csv")

    b = sub.add_parser("bench", help="per-step operation counts and throughput")
    common(b, steps_default=10000, h_default="2^-3")
    b.add_argument("--format", choices=["json"], default="json")

    pl = sub.add_parser("plot", help="svg of a generated or csv trajectory")
    common(pl)
    pl.add_argument("--input", default=None, help="trajectory csv to plot")
    pl.add_argument("--format", choices=["svg"], default="svg")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command, scheme=args.scheme, h=args.h, delta=args.delta, r=args.r,
        steps=args.steps, engine=args.engine, output=args.output, format=args.format,
        frac_bits=args.frac_bits, series_terms=args.series_terms,
    )
    try:
        if cfg.steps is not None and cfg.steps < 0:
            raise ValueError(f"--steps must be >= 0, got {cfg.steps}")
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args)
        if args.command == "bench":
            return cmd_bench(cfg)
        if args.command == "plot":
            return cmd_plot(cfg, args.input)
    except (KeyError, ValueError, OverflowError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"ddacircle {args.command}: error: {msg}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
