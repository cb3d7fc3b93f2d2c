"""Command-line experiments.

Exit status: 0 success, 1 check failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict
from fractions import Fraction

import numpy as np

from . import analytic
from .bell import Functional, cglmp_value, lhv_bound_brute_force
from .optimize import (
    FIG1_BETAS,
    SWEEP_COLUMNS,
    OptimizerConfig,
    fig1_sweep,
    gisin_scan,
    maximize_full,
)
from .qstate import QutritBetaXi, SchmidtAngles, kappa_from_beta_xi, state_from_kappa, state_from_schmidt

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

AGREEMENT_TOL = 1e-9
ATTAIN_TOL = 1e-12
GRID_TOL = 1e-9
SPOT_VALUE = 2.5366
SPOT_TOL = 5e-4
SPOT_BETA, SPOT_XI = np.pi / 6, 2 * np.pi / 15


class OutputError(Exception):
    pass


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def _int_range(lo, hi):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if not lo <= value <= hi:
            raise argparse.ArgumentTypeError(f"must be in {lo}..{hi}, got {value}")
        return value

    return parse


def _seed(text):
    return _int_range(0, 2**64 - 1)(text)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("CGLMP_THREADS")
    if env:
        try:
            return _int_range(0, 1024)(env)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"CGLMP_THREADS: {exc}") from exc
    return 1


def _write(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else (v if isinstance(v, (int, str)) else fmt(v)) for v in row])
    return buf.getvalue()


def _num(v):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    return float(fmt(v))


def to_json(config, header, rows, summary) -> str:
    doc = {
        "config": config,
        "rows": [{k: _num(v) for k, v in zip(header, row)} for row in rows],
        "summary": {k: _num(v) for k, v in summary.items()},
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------- verify-analytic


def _published_closed_form(d, th1, th2, e1, e2):
    if d == 2:
        return analytic.i2_closed_form(th1, e1, e2)
    if d == 3:
        return analytic.i3_closed_form(th1, th2, e1, e2)
    return analytic.id_closed_form(th1, th2, e1, e2, d)


def verify_analytic(d: int, grid: int, seed: int) -> dict:
    """Closed forms against the measurement pipeline, and bound attainment.

    Agreement uses grid^2 random (angles, eta) draws; attainment uses
    ``grid`` random theta and a grid x grid eta mesh over [-pi/2, pi/2]^2.
    """
    rng = np.random.default_rng(seed)
    checks = []
    dev_published = dev_exact = 0.0
    for _ in range(grid * grid):
        theta = rng.uniform(0, np.pi / 2, d - 1)
        e1, e2 = rng.uniform(-np.pi / 2, np.pi / 2, 2)
        th2 = theta[1] if d > 2 else 0.0
        numeric = cglmp_value(state_from_schmidt(SchmidtAngles(d, theta)), analytic.RestrictedSetting(e1, e2).settings(d))
        dev_published = max(dev_published, abs(numeric - _published_closed_form(d, theta[0], th2, e1, e2)))
        dev_exact = max(dev_exact, abs(numeric - analytic.restricted_value(theta[0], th2, e1, e2, d)))
    checks.append(("pipeline_vs_published_closed_form", dev_published, AGREEMENT_TOL))
    checks.append(("pipeline_vs_weighted_closed_form", dev_exact, AGREEMENT_TOL))

    mesh = np.linspace(-np.pi / 2, np.pi / 2, grid)
    e1m, e2m = np.meshgrid(mesh, mesh)
    attain = excess = 0.0
    min_margin = np.inf
    for _ in range(grid):
        th1 = rng.uniform(0.01, np.pi / 2 - 0.01)
        th2 = rng.uniform(0, np.pi / 2 - 0.05) if d > 2 else 0.0
        bound = analytic.restricted_bound(th1, th2, d)
        e1, e2 = analytic.optimal_eta(th1)
        attain = max(attain, abs(_published_closed_form(d, th1, th2, e1, e2) - bound))
        excess = max(excess, float(np.max(_published_closed_form(d, th1, th2, e1m, e2m))) - bound)
        min_margin = min(min_margin, bound - 2)
    checks.append(("bound_attained_at_optimal_eta", attain, ATTAIN_TOL))
    checks.append(("grid_never_exceeds_bound", max(excess, 0.0), GRID_TOL))

    th1 = np.pi / 4
    lit, opt = analytic.literal_eta(th1), analytic.optimal_eta(th1)
    th2 = 0.0
    return {
        "d": d,
        "checks": [{"name": n, "value": float(v), "tol": t, "ok": bool(v <= t)} for n, v, t in checks],
        "bound_at_quarter_pi": float(analytic.restricted_bound(th1, th2, d)),
        "min_bound_margin": float(min_margin),
        "eta_stationary": [float(x) for x in opt],
        "eta_literal": [float(x) for x in lit],
        "value_at_stationary": float(_published_closed_form(d, th1, th2, *opt)),
        "value_at_literal": float(_published_closed_form(d, th1, th2, *lit)),
        "ok": bool(all(v <= t for _, v, t in checks) and min_margin > 0),
    }


def cmd_verify_analytic(args) -> int:
    report = verify_analytic(args.d, args.grid, args.seed)
    if args.json:
        _write(json.dumps(report, indent=2) + "\n", args.out)
    else:
        lines = [f"verify-analytic d={report['d']}"]
        for c in report["checks"]:
            status = "PASS" if c["ok"] else "FAIL"
            lines.append(f"  [{status}] {c['name']}: {c['value']:.3e} (tol {c['tol']:.0e})")
        lines.append(f"  bound at theta1=pi/4, theta2=0: {fmt(report['bound_at_quarter_pi'])}")
        lines.append(f"  min bound margin over sampled thetas: {report['min_bound_margin']:.6g}")
        lines.append(
            "  theta1=pi/4 stationary eta (%.12g, %.12g) -> %.12g; literal eta (%.12g, %.12g) -> %.12g"
            % (*report["eta_stationary"], report["value_at_stationary"], *report["eta_literal"], report["value_at_literal"])
        )
        if args.d >= 4 and not report["checks"][0]["ok"]:
            lines.append("  note: the published d>=4 expression drops the 1-2k/(d-1) weight of the k=1 terms")
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK if report["ok"] else EXIT_FAIL


# ---------------------------------------------------------------- lhv-bound


def cmd_lhv_bound(args) -> int:
    functional = Functional(args.functional)
    res = lhv_bound_brute_force(args.d, functional)
    s = res.maximizer
    text = (
        f"functional={functional.value} d={args.d}\n"
        f"bound={res.value} ({fmt(res.value)})\n"
        f"strategies={res.strategies}\n"
        f"maximizer=a1={s.a1} a2={s.a2} b1={s.b1} b2={s.b2}\n"
    )
    _write(text, args.out)
    return EXIT_OK if res.value == Fraction(functional.local_bound) else EXIT_FAIL


# --------------------------------------------------------------- gisin-scan


def scan_document(d, samples, seed, full, restarts, fmt_name, threads=1):
    cfg = OptimizerConfig(restarts=restarts, seed=seed, threads=threads)
    report = gisin_scan(d, samples, cfg, full=full)
    header = ["sample"] + [f"kappa{m}" for m in range(d)] + ["restricted_value", "margin", "full_value"]
    rows = [[n, *r.kappa, r.restricted_value, r.margin, r.full_value] for n, r in enumerate(report.rows)]
    summary = {
        "d": d,
        "samples": samples,
        "resampled": report.resampled,
        "min_margin": report.min_margin,
        "max_margin": max(r.margin for r in report.rows),
        "all_violated": report.all_violated,
        "full_dominates": report.full_dominates,
        "passed": report.passed,
    }
    if fmt_name == "json":
        config = {"command": "gisin-scan", "d": d, "samples": samples, "seed": seed, "full": full, "restarts": restarts}
        return to_json(config, header, rows, summary), report
    return rows_to_csv(header, rows), report


def cmd_gisin_scan(args) -> int:
    text, report = scan_document(
        args.d, args.samples, args.seed, args.full, args.restarts, args.format, _threads(args)
    )
    _write(text, args.out)
    status = "PASS" if report.passed else "FAIL"
    msg = f"gisin-scan d={args.d}: {status} min margin {report.min_margin:.6g}, resampled {report.resampled}"
    if report.full_dominates is not None:
        msg += f", full >= restricted: {report.full_dominates}"
    print(msg, file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK if report.passed else EXIT_FAIL


# --------------------------------------------------------------------- fig1


def fig1_document(grid, seed, restarts, fmt_name, threads=1):
    cfg = OptimizerConfig(restarts=restarts, seed=seed, threads=threads)
    sweep = fig1_sweep(FIG1_BETAS, grid, cfg)
    rows = [[getattr(r, c) for c in SWEEP_COLUMNS] for r in sweep]
    spot = analytic.empirical_i3_rough(*kappa_from_beta_xi(QutritBetaXi(SPOT_BETA, SPOT_XI)))
    violations = all(
        r.i3_full > 2 + 1e-9 for r in sweep if sorted([r.kappa0, r.kappa1, r.kappa2])[1] > 1e-9
    )
    summary = {
        "spot_beta": SPOT_BETA,
        "spot_xi": SPOT_XI,
        "spot_i3_rough": spot,
        "spot_ok": abs(spot - SPOT_VALUE) <= SPOT_TOL,
        "entangled_all_violate": violations,
        "min_i3_full": min(r.i3_full for r in sweep),
    }
    if fmt_name == "json":
        config = {"command": "fig1", "grid": grid, "seed": seed, "restarts": restarts, "betas": list(FIG1_BETAS)}
        return to_json(config, list(SWEEP_COLUMNS), rows, summary), sweep, summary
    return rows_to_csv(SWEEP_COLUMNS, rows), sweep, summary


def plot_sweep(sweep, path):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise OutputError("plotting needs matplotlib (pip install artifact[plot])") from exc
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for beta in FIG1_BETAS:
        pts = [(r.xi, r.i3_full) for r in sweep if r.beta == beta]
        ax.plot(*zip(*pts), label=f"beta={beta / np.pi:.3g}pi")
    ax.axhline(2.0, color="k", lw=0.8, ls="--")
    ax.set_xlabel("xi")
    ax.set_ylabel("I3")
    ax.legend(fontsize=7)
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)


def cmd_fig1(args) -> int:
    text, sweep, summary = fig1_document(args.grid, args.seed, args.restarts, args.format, _threads(args))
    _write(text, args.out)
    if args.plot:
        plot_sweep(sweep, args.plot)
    out = sys.stderr if args.out in (None, "-") else sys.stdout
    status = "PASS" if summary["spot_ok"] else "FAIL"
    print(f"spot check beta=pi/6 xi=2pi/15: I3_rough={summary['spot_i3_rough']:.6f} [{status}]", file=out)
    print(f"entangled grid points all above 2: {summary['entangled_all_violate']}", file=out)
    return EXIT_OK if summary["spot_ok"] and summary["entangled_all_violate"] else EXIT_FAIL


# ---------------------------------------------------------- empirical-check


def cmd_empirical_check(args) -> int:
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed, threads=_threads(args))
    axis = np.linspace(0, np.pi / 2, args.grid)
    residuals = []
    for i, beta in enumerate(axis):
        for j, xi in enumerate(axis):
            kappa = kappa_from_beta_xi(QutritBetaXi(beta, xi))
            sub = OptimizerConfig(**{**asdict(cfg), "seed": (args.seed + i * args.grid + j) % 2**64})
            full = maximize_full(state_from_kappa(kappa), sub).best_value
            residuals.append(abs(analytic.empirical_i3_rough(*kappa) - full))
    residuals = np.array(residuals)
    spot = analytic.empirical_i3_rough(*kappa_from_beta_xi(QutritBetaXi(SPOT_BETA, SPOT_XI)))
    spot_ok = abs(spot - SPOT_VALUE) <= SPOT_TOL
    uniform = np.full(3, 1 / np.sqrt(3))
    uni_full = maximize_full(state_from_kappa(uniform), cfg).best_value
    uni_rough = analytic.empirical_i3_rough(*uniform)
    lines = [
        f"empirical-check grid={args.grid}x{args.grid} seed={args.seed}",
        f"  residual |I3_rough - I3_full|: max {residuals.max():.6f} mean {residuals.mean():.6f}",
        f"  product state kappa=(1,0,0): I3_rough = {analytic.empirical_i3_rough(1.0, 0.0, 0.0):.4f}",
        f"  uniform kappa: I3_rough = {uni_rough:.6f}, I3_full = {uni_full:.6f}, residual {abs(uni_rough - uni_full):.6f}",
        f"  spot check beta=pi/6 xi=2pi/15: I3_rough = {spot:.6f} (target {SPOT_VALUE} +- {SPOT_TOL}) [{'PASS' if spot_ok else 'FAIL'}]",
    ]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK if spot_ok else EXIT_FAIL


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cglmp", description="CGLMP violation experiments for two qudits")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=False):
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--threads", type=_int_range(0, 1024), default=None, help="worker processes, 0 = auto")
        if formats:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("verify-analytic", help="closed forms against the numerical pipeline")
    p.add_argument("--d", type=_int_range(2, 5), required=True)
    p.add_argument("--grid", type=_int_range(2, 2000), default=20)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    common(p)
    p.set_defaults(func=cmd_verify_analytic)

    p = sub.add_parser("lhv-bound", help="local bound by enumerating deterministic strategies")
    p.add_argument("--d", type=_int_range(2, 10), required=True)
    p.add_argument("--functional", choices=[f.value for f in Functional], default="cglmp")
    common(p)
    p.set_defaults(func=cmd_lhv_bound)

    p = sub.add_parser("gisin-scan", help="violation by random entangled Schmidt states")
    p.add_argument("--d", type=_int_range(2, 6), required=True)
    p.add_argument("--samples", type=_int_range(1, 10**7), default=1000)
    p.add_argument("--full", action="store_true", help="also run the full-unitary optimizer per sample")
    p.add_argument("--restarts", type=_int_range(1, 10**4), default=5)
    common(p, formats=True)
    p.set_defaults(func=cmd_gisin_scan)

    p = sub.add_parser("fig1", help="two-qutrit curves over (beta, xi)")
    p.add_argument("--grid", type=_int_range(2, 10**4), default=16)
    p.add_argument("--restarts", type=_int_range(1, 10**4), default=4)
    p.add_argument("--plot", default=None, help="also write an SVG line chart here")
    common(p, formats=True)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("empirical-check", help="published qutrit fit against the optimizer")
    p.add_argument("--grid", type=_int_range(2, 1000), default=6)
    p.add_argument("--restarts", type=_int_range(1, 10**4), default=4)
    common(p)
    p.set_defaults(func=cmd_empirical_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cglmp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutputError as exc:
        print(f"cglmp: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
