"""Command-line front end: ``genbounds sweep | verify | discrete``.

Exit codes: 0 success, 2 configuration error, 3 numeric-guard failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import avgjoint as aj
from . import bounds as bd
from . import gaussian as gs
from .errors import GenBoundsError, InvalidDistribution, NumericGuardError, SizeCapExceeded
from .svg import line_chart
from .verify import run_verify

log = logging.getLogger("genbounds")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


def default_t_grid() -> list[float]:
    return [round(0.01 * k, 10) for k in range(1, 100)]


@dataclass
class SweepConfig:
    sigma: float = 10.0
    c: float = 2.0
    t_grid: list = field(default_factory=default_t_grid)
    mc: gs.MCSpec = field(default_factory=gs.MCSpec)
    quad: gs.QuadratureSpec = field(default_factory=gs.QuadratureSpec)
    out_csv: str | Path = "fig1.csv"
    out_svg: str | Path | None = None
    engines: tuple = bd.BOUND_NAMES
    jobs: int = 1

    def __post_init__(self):
        if not self.t_grid:
            raise ValueError("empty t grid")
        if any(not 0 < t < 1 for t in self.t_grid):
            raise ValueError("every t must lie strictly inside (0, 1)")
        unknown = set(self.engines) - set(bd.BOUND_NAMES)
        if unknown:
            raise ValueError(f"unknown bound names: {sorted(unknown)}")


@dataclass
class SweepResult:
    reports: list
    failed: dict  # t index -> reason
    guard_failures: int = 0

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(bd.CSV_COLUMNS)
        for r in self.reports:
            w.writerow(r.csv_row())
        return buf.getvalue()


def _sweep_point(args):
    idx, t, cfg = args
    ex = gs.ExampleConfig(sigma=cfg.sigma, c=cfg.c, t=t)
    mc = gs.MCSpec(cfg.mc.n_samples, cfg.mc.seed, stream=idx, batch=cfg.mc.batch)
    try:
        return idx, bd.gaussian_report(ex, cfg.quad, mc, include=cfg.engines), None, False
    except NumericGuardError as e:
        return idx, bd.BoundReport(t=t), f"{type(e).__name__}: {e}", True
    except GenBoundsError as e:
        return idx, bd.BoundReport(t=t), f"{type(e).__name__}: {e}", False


def run_sweep(cfg: SweepConfig, write: bool = True) -> SweepResult:
    """Evaluate the Gaussian example over ``cfg.t_grid`` and write CSV (and SVG).

    Each grid point gets its own random stream derived from ``(seed, index)``,
    so the output does not depend on ``jobs``. A point whose numerics fail
    keeps its ``t`` and leaves every other cell empty.
    """
    tasks = [(k, float(t), cfg) for k, t in enumerate(cfg.t_grid)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(task) for task in tasks]
    results.sort(key=lambda r: r[0])
    failed, guard = {}, 0
    for idx, _, reason, is_guard in results:
        if reason:
            log.warning("t=%s: row aborted (%s)", cfg.t_grid[idx], reason)
            failed[idx] = reason
            guard += is_guard
    res = SweepResult([r[1] for r in results], failed, guard)
    if write:
        Path(cfg.out_csv).write_text(res.csv_text())
        if cfg.out_svg:
            Path(cfg.out_svg).write_text(sweep_svg(res, cfg))
    return res


def sweep_svg(res: SweepResult, cfg: SweepConfig) -> str:
    xs = [r.t for r in res.reports]
    series = {"true_gen": [r.true_gen for r in res.reports]}
    for name in cfg.engines:
        series[name] = [getattr(r, name) for r in res.reports]
    title = f"Gaussian mean estimation, sigma={cfg.sigma:g}, c={cfg.c:g}"
    return line_chart(xs, series, title=title, x_label="t", y_label="generalization error / bound")


def check_sweep(res: SweepResult) -> dict:
    """Theorem-backed checks on a finished sweep, as a verification report."""
    props = {k: [] for k in ("validity", "avg_tv_le_ind_tv", "avg_kl_le_per_sample_kl", "symmetric_point")}
    for r in res.reports:
        if r.true_gen is None:
            continue
        for name, v in r.bounds().items():
            if name in r.errors and r.true_gen > v + r.ci + r.errors[name] + 1e-9:
                props["validity"].append(f"t={r.t}: gen > {name}")
        if r.avg_tv is not None and r.ind_tv is not None:
            if r.avg_tv > r.ind_tv + r.errors["avg_tv"] + r.errors["ind_tv"]:
                props["avg_tv_le_ind_tv"].append(f"t={r.t}")
        if r.avg_kl is not None and r.avg_kl > r.per_sample_kl + r.errors["avg_kl"]:
            props["avg_kl_le_per_sample_kl"].append(f"t={r.t}")
        if abs(r.t - 0.5) < 1e-12 and r.avg_kl is not None and r.ismi is not None:
            if abs(r.avg_kl - r.ismi) > 1e-6 * r.ismi:
                props["symmetric_point"].append("avg_kl != ismi at t=0.5")
    out = [{"name": k, "pass": not v, "detail": "; ".join(v[:5]) or "ok"} for k, v in props.items()]
    return {"suite": "sweep", "pass": all(p["pass"] for p in out), "properties": out}


def run_discrete(learner_file, loss_file, out=None, metric: str = "auto", lipschitz: float | None = None) -> bd.BoundReport:
    """Build a :class:`BoundReport` for a discrete learner given as JSON files."""
    L = aj.load_learner(learner_file)
    loss = aj.load_loss(loss_file)
    regs = [bd.LossRegularity.bounded(loss.a, loss.b)]
    chosen = None
    if metric == "euclidean" or (metric == "auto" and lipschitz is not None):
        if L.w_coords is None:
            raise InvalidDistribution("learner.w_support: euclidean metric needs coords on every hypothesis")
        regs.append(bd.LossRegularity.lipschitz(lipschitz or bd.lipschitz_constant(loss, L.w_coords)))
        chosen = bd.EUCLIDEAN
    report = bd.discrete_report(L, loss, regs, metric=chosen)
    if out:
        Path(out).write_text(report.to_json() + "\n")
    return report


# -- argument parsing ------------------------------------------------------


def parse_t_grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        a, b, n = text.split(":")
        return [round(float(x), 10) for x in np.linspace(float(a), float(b), int(n))]
    return [float(x) for x in text.split(",") if x.strip()]


def _sweep_cmd(args) -> int:
    try:
        cfg = SweepConfig(
            sigma=args.sigma,
            c=args.c,
            t_grid=parse_t_grid(args.t_grid) if args.t_grid else default_t_grid(),
            mc=gs.MCSpec(n_samples=args.samples, seed=args.seed),
            quad=gs.QuadratureSpec(points_per_axis=args.quad_points),
            out_csv=args.out,
            out_svg=args.svg,
            engines=tuple(args.bounds.split(",")) if args.bounds else bd.BOUND_NAMES,
            jobs=args.jobs,
        )
        gs.ExampleConfig(sigma=cfg.sigma, c=cfg.c)
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    res = run_sweep(cfg)
    if res.guard_failures:
        return EXIT_NUMERIC
    if args.verify:
        report = check_sweep(res)
        print(json.dumps(report, indent=2))
        if not report["pass"]:
            return EXIT_VERIFY
    return EXIT_OK


def _verify_cmd(args) -> int:
    report = run_verify(args.suite, args.seed, args.count)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK if report["pass"] else EXIT_VERIFY


def _discrete_cmd(args) -> int:
    try:
        report = run_discrete(args.learner, args.loss, args.out, args.metric, args.lipschitz)
    except (InvalidDistribution, SizeCapExceeded, json.JSONDecodeError, KeyError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.out:
        print(report.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genbounds", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="Gaussian example over a grid of t; writes CSV and optional SVG")
    s.add_argument("--sigma", type=float, default=10.0)
    s.add_argument("--c", type=float, default=2.0)
    s.add_argument("--t-grid", default=None, help="start:stop:count or comma list (default 0.01:0.99:99)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=10**6, help="Monte Carlo samples per t")
    s.add_argument("--quad-points", type=int, default=1201, help="minimum grid points per axis")
    s.add_argument("--out", default="fig1.csv")
    s.add_argument("--svg", default=None)
    s.add_argument("--bounds", default=None, help="comma-separated subset of: " + ",".join(bd.BOUND_NAMES))
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--verify", action="store_true", help="check bound validity and orderings on the result")
    s.set_defaults(func=_sweep_cmd)

    v = sub.add_parser("verify", help="run randomized invariant suites")
    v.add_argument("--suite", choices=("discrete", "gaussian", "all"), default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=100)
    v.add_argument("--out", default=None)
    v.set_defaults(func=_verify_cmd)

    d = sub.add_parser("discrete", help="bound report for a discrete learner given as JSON")
    d.add_argument("learner")
    d.add_argument("loss")
    d.add_argument("--out", default=None)
    d.add_argument("--metric", choices=("auto", "indicator", "euclidean"), default="auto")
    d.add_argument("--lipschitz", type=float, default=None)
    d.set_defaults(func=_discrete_cmd)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
