"""Command-line entry point.

Exit codes: 0 when the run finishes and every acceptance flag passes,
1 when the run finishes with failing flags or dies mid-flight (NaN,
marker crossing), 2 for unusable configuration.
"""

from __future__ import annotations

import argparse
import sys

from .evolution import EvolutionError, RunConfig, Tolerances
from .harness import convergence_study, run
from .presets import PRESET_NAMES, Preset

__all__ = ["main", "build_parser"]


def _parse_param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(
            f"expected k=v, got {text!r}")
    key, _, value = text.partition("=")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"parameter {key!r} needs a numeric value, got {value!r}")


def _parse_span(text: str):
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("expected A:B")
    try:
        a, b = float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric span {text!r}")
    if not a < b:
        raise argparse.ArgumentTypeError("span must have A < B")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="chflow",
        description="Camassa-Holm solver in characteristic coordinates")
    p.add_argument("--preset", choices=PRESET_NAMES, default="peakon")
    p.add_argument("--param", action="append", type=_parse_param, default=[],
                   metavar="K=V",
                   help="preset parameter (amplitude, center, width, separation); repeatable")
    p.add_argument("--n-markers", type=int, default=4096)
    p.add_argument("--beta-span", type=_parse_span, default=None, metavar="A:B")
    p.add_argument("--dt", type=float, default=None,
                   help="time step (default: stability-based suggestion)")
    p.add_argument("--t-end", type=float, default=5.0)
    p.add_argument("--snap-every", type=int, default=50)
    p.add_argument("--out", default=None, metavar="DIR",
                   help="directory for exported snapshots and the run manifest")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--trace", action="append", type=float, default=[],
                   metavar="BETA", help="emit the characteristic through this label; repeatable")
    p.add_argument("--energy-tol", type=float, default=1e-4)
    p.add_argument("--consistency-tol", type=float, default=1e-2)
    p.add_argument("--study", action="store_true",
                   help="run the convergence ladder for the preset and exit")
    return p


def _print_report(report) -> None:
    f = report.flags
    d = report.history.diagnostics_series
    print(f"preset {report.preset.name}: {len(report.history.snapshots)} snapshots, "
          f"t in [0, {report.config.t_end}]")
    print(f"  energy        E0={d[0].energy:.8f}  drift={f.energy_drift:.3e}  "
          f"[{'ok' if f.energy_ok else 'FAIL'}]")
    print(f"  consistency   max residual={f.max_consistency:.3e}  "
          f"[{'ok' if f.consistency_ok else 'FAIL'}]")
    print(f"  1-Lipschitz x excess={f.max_lipschitz_x:.3e}  "
          f"[{'ok' if f.lipschitz_x_ok else 'FAIL'}]")
    print(f"  1/2-Lipschitz u excess={f.max_lipschitz_u:.3e}  "
          f"[{'ok' if f.lipschitz_u_ok else 'FAIL'}]")
    print(f"  finite        [{'ok' if f.finite_ok else 'FAIL'}]")
    last = d[-1]
    print(f"  final         sup|u|={last.sup_u:.4f}  min cos^2(v/2)={last.min_xbeta:.3e}")
    for path in report.out_files:
        print(f"  wrote {path}")


def _print_study(table: dict) -> None:
    print(f"convergence study: preset {table['preset']}, t_end={table['t_end']}")
    print("  spatial ladder (fixed fine dt):")
    for n, e in zip(table["n_ladder"], table["spatial_errors"]):
        print(f"    N={n:6d}  sup error={e:.3e}")
    print(f"    observed orders: {['%.2f' % o for o in table['spatial_orders']]}")
    print("  temporal ladder (fixed markers):")
    for dt, e in zip(table["dt_ladder"], table["temporal_errors"]):
        print(f"    dt={dt:.1e}  sup error={e:.3e}")
    print(f"    observed orders: {['%.2f' % o for o in table['temporal_orders']]}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        preset = Preset(name=args.preset, **dict(args.param))
    except (TypeError, ValueError) as exc:
        parser.exit(2, f"chflow: bad preset parameters: {exc}\n")

    if args.study:
        table = convergence_study(args.preset, params=dict(args.param))
        _print_study(table)
        return 0

    config = RunConfig(
        t_end=args.t_end, dt=args.dt, snap_every=args.snap_every,
        n_markers=args.n_markers, beta_span=args.beta_span,
        tolerances=Tolerances(energy_drift=args.energy_tol,
                              consistency=args.consistency_tol))

    try:
        report = run(preset, config, out_dir=args.out, fmt=args.format,
                     trace_labels=args.trace)
    except (EvolutionError, ValueError) as exc:
        print(f"chflow: run failed: {exc}", file=sys.stderr)
        return 1

    _print_report(report)
    return 0 if report.flags.all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
