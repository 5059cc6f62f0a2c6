"""Command-line entry point: ``escweb <command> [options]``.

Every JSON report is wrapped with the run configuration, its digest and the
tool version. The exit status is 0 exactly when every check a command runs
passes; bad options exit with status 2.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import ConfigError, check_int, check_real, check_window
from .components import (
    BorderComponent,
    collar_check,
    diameter_bound_check,
    label_components,
    spiders_web_evidence,
)
from .geometry import (
    RectR,
    rect_containment_sweep,
    strip_coverage_check,
    verify_absorbing_sets,
    verify_modulus_bounds,
)
from .maps import ExpAffineMap, Family, bergweiler, fatou
from .maxmod import (
    DEFAULT_SAMPLES,
    cycle_in_disc_check,
    max_modulus,
    rate_domination_check,
    smallest_escape_radius,
)
from .orbits import DEFAULT_BUDGET, _outcome, classify_arrays, fast_escape_test
from .raster import (
    BERGWEILER_WINDOW,
    DEFAULT_PALETTE,
    DEFAULT_SIZE,
    FATOU_WINDOW,
    JULIA_WINDOW,
    GridSpec,
    RegionMask,
    check_palette,
    rasterize,
    render_julia_approx,
    write_image,
)
from .rates import RateSequence
from .reports import Report, dumps, envelope
from .tracer import TraceError, default_a0, trace

CHECKS = ("modulus", "absorbing", "strips", "rects", "rates", "cycle")

DEFAULTS = {
    "map": "fatou",
    "rates": {"fatou": "arithmetic", "bergweiler": "geometric", "custom": "arithmetic"},
    "m": {"fatou": 6, "bergweiler": 0, "custom": 6},
    "budget": DEFAULT_BUDGET,
    "seed": 0,
    "size": list(DEFAULT_SIZE),
    "window": {"fatou": list(FATOU_WINDOW), "bergweiler": list(BERGWEILER_WINDOW),
               "julia": list(JULIA_WINDOW)},
    "julia_R": "smallest integer R with M(R) > R + 1",
    "maxmod_samples": DEFAULT_SAMPLES,
    "verify_samples": {"modulus": 1_000_000, "absorbing": 100, "strips": 100_000},
    "trace": {"m": 1, "j0": 0, "levels": 2, "a0": "fatou: -3(m+1)-1, bergweiler: 5"},
    "palette": {c.name: list(v) for c, v in DEFAULT_PALETTE.items()},
    "supersample": False,
    "diameter_bound": 12.0,
}


def _common(p: argparse.ArgumentParser, rates=True, raster=False):
    p.add_argument("--map", choices=["fatou", "bergweiler", "custom"], default=None)
    p.add_argument("--abcd", type=float, nargs=4, metavar=("A", "B", "C", "D"),
                   help="coefficients of a*z + b + c*exp(d*z) for --map custom")
    if rates:
        p.add_argument("--rates", choices=["arithmetic", "geometric"], default=None)
        p.add_argument("--m", type=int, default=None, help="rate offset")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="output path (image or report)")
    p.add_argument("--report", type=Path, default=None, help="JSON report path")
    p.add_argument("--jobs", type=int, default=None, help="worker threads")
    if raster:
        p.add_argument("--window", type=float, nargs=4,
                       metavar=("XMIN", "XMAX", "YMIN", "YMAX"), default=None)
        p.add_argument("--size", type=int, nargs=2, metavar=("W", "H"), default=None)
        p.add_argument("--palette", type=Path, default=None,
                       help="JSON object mapping class names to [r, g, b]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="escweb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"escweb {__version__}")
    parser.add_argument("--print-defaults", action="store_true",
                        help="print every default value as JSON and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("render", help="classify a pixel grid and analyse its components")
    _common(p, raster=True)
    p.add_argument("--supersample", action="store_true", help="2x2 majority vote per pixel")
    p.add_argument("--mask-out", type=Path, default=None, help="save the mask as .npz")

    p = sub.add_parser("julia", help="fast-escape approximation of the Julia set")
    _common(p, rates=False, raster=True)
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)

    p = sub.add_parser("classify", help="classify individual points")
    _common(p)
    p.add_argument("--point", action="append", default=[], help="complex point, e.g. -3+12.5j")
    p.add_argument("--fast", action="store_true", help="use the fast-escape test instead")
    p.add_argument("--R", type=float, default=None)

    p = sub.add_parser("components", help="component table for a saved or fresh mask")
    _common(p, raster=True)
    p.add_argument("--mask", type=Path, default=None, help=".npz mask written by render")
    p.add_argument("--with-loops", action="store_true", help="include boundary loops")

    p = sub.add_parser("verify", help="run numerical check suites")
    _common(p)
    p.add_argument("--check", action="append", choices=CHECKS + ("all",), default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--N", type=int, default=50, help="rate domination range")

    p = sub.add_parser("trace", help="run the curve-tracking construction")
    _common(p, rates=False)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--j0", type=int, default=0)
    p.add_argument("--a0", type=float, default=None)
    p.add_argument("--levels", type=int, default=2)

    p = sub.add_parser("maxmod", help="maximum modulus on circles")
    _common(p, rates=False)
    p.add_argument("--r", type=float, action="append", default=None)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    return parser


# ----------------------------------------------------------------------------
# config resolution


def resolve_map(args) -> tuple[ExpAffineMap, str]:
    name = args.map or "fatou"
    if name == "custom":
        if args.abcd is None:
            raise ConfigError("--map custom needs --abcd A B C D")
        try:
            return ExpAffineMap(*args.abcd), name
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if args.abcd is not None:
        raise ConfigError("--abcd is only valid with --map custom")
    return (fatou() if name == "fatou" else bergweiler()), name


def resolve_rates(args, map_name: str) -> RateSequence:
    kind = args.rates or DEFAULTS["rates"][map_name]
    m = DEFAULTS["m"][map_name] if args.m is None else check_int("--m", args.m, 0)
    return RateSequence(kind, m)


def resolve_grid(args, f, rates, default_window) -> GridSpec:
    window = check_window(args.window if args.window is not None else default_window)
    w, h = args.size if args.size is not None else DEFAULT_SIZE
    check_int("--size", w, 1)
    check_int("--size", h, 1)
    return GridSpec(window, w, h, f, rates, check_int("--budget", args.budget, 1))


def _window_for(map_name: str):
    return BERGWEILER_WINDOW if map_name == "bergweiler" else FATOU_WINDOW


def _palette(args):
    if args.palette is None:
        return DEFAULT_PALETTE
    try:
        raw = json.loads(args.palette.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read palette {args.palette}: {exc}") from None
    return check_palette(raw)


def _config(args, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("report", "jobs")}
    cfg.update(extra)
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in cfg.items()}


def _emit(args, config: dict, payload, default_name: str) -> Path:
    doc = envelope(config, payload)
    path = args.report
    if path is None:
        base = args.out if args.out is not None else Path(default_name)
        path = base.with_name(base.name + ".report.json") if args.out else base
    path.write_text(dumps(doc) + "\n")
    print(f"report: {path} (digest {doc['config_digest']})")
    return path


def _parse_point(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"cannot parse point {text!r}") from None


# ----------------------------------------------------------------------------
# commands


def _component_payload(mask: RegionMask, with_loops: bool, f: ExpAffineMap, rates) -> tuple[dict, list]:
    labelled = label_components(mask, trace_loops=True)
    evidence = spiders_web_evidence(mask, labelled=labelled)
    reports = [evidence]
    bounded = labelled.bounded()
    collars = []
    for rec in sorted(bounded, key=lambda r: (-r.diameter, r.id))[:10]:
        try:
            collars.append(collar_check(rec, labelled))
        except BorderComponent:
            pass
    collar_rep = Report("boundary_collar", all(c["ok"] for c in collars), {"components": collars})
    reports.append(collar_rep)
    if f.family is Family.FATOU and rates.kind.value == "arithmetic":
        reports.append(diameter_bound_check(labelled, RectR(rates.m, 0, Family.FATOU)))
    payload = {
        "counts": mask.counts(),
        "components": [r.as_dict(with_loop=with_loops) for r in labelled.components],
        "checks": [r.to_dict() for r in reports],
    }
    return payload, reports


def cmd_render(args) -> int:
    f, name = resolve_map(args)
    rates = resolve_rates(args, name)
    spec = resolve_grid(args, f, rates, _window_for(name))
    palette = _palette(args)
    mask = rasterize(spec, n_jobs=args.jobs, supersample=args.supersample)
    out = args.out or Path(f"{name}_m{rates.m}.ppm")
    write_image(mask, out, palette)
    if args.mask_out:
        mask.save(args.mask_out)
    payload, reports = _component_payload(mask, False, f, rates)
    print(f"image: {out}  counts: {mask.counts()}")
    for r in reports:
        print(r.summary_line())
    _emit(args, _config(args, grid=spec.as_dict()), payload, "render.report.json")
    return 0 if all(r.passed for r in reports) else 1


def cmd_julia(args) -> int:
    f, name = resolve_map(args)
    spec = resolve_grid(args, f, RateSequence.arithmetic(0), JULIA_WINDOW)
    R = None if args.R is None else check_real("--R", args.R, positive=True)
    mask = render_julia_approx(spec, R, n_jobs=args.jobs, samples=args.samples)
    out = args.out or Path(f"{name}_julia.ppm")
    write_image(mask, out, _palette(args))
    print(f"image: {out}  R = {mask.meta['R']}  counts: {mask.counts()}")
    _emit(args, _config(args, grid=spec.as_dict()),
          {"counts": mask.counts(), "R": mask.meta["R"], "thresholds": mask.meta["thresholds"],
           "horizon_ok": mask.meta["horizon_ok"]}, "julia.report.json")
    return 0


def cmd_classify(args) -> int:
    f, name = resolve_map(args)
    rates = resolve_rates(args, name)
    if not args.point:
        raise ConfigError("give at least one --point")
    pts = [_parse_point(p) for p in args.point]
    budget = check_int("--budget", args.budget, 1)
    rows = []
    if args.fast:
        R = float(args.R) if args.R is not None else float(smallest_escape_radius(f))
        for z in pts:
            rows.append({"z": z, "outcome": fast_escape_test(f, z, R, budget).as_dict()})
    else:
        cl, st, ce = classify_arrays(f, rates, np.array([z.real for z in pts]),
                                     np.array([z.imag for z in pts]), budget)
        for z, a, b, c in zip(pts, cl, st, ce):
            rows.append({"z": z, "outcome": _outcome(int(a), int(b), int(c)).as_dict()})
    for row in rows:
        print(f"{row['z']}: {row['outcome']}")
    if args.report or args.out:
        _emit(args, _config(args), rows, "classify.report.json")
    return 0


def cmd_components(args) -> int:
    if args.mask is not None:
        try:
            mask = RegionMask.load(args.mask)
        except OSError as exc:
            raise ConfigError(f"cannot read mask {args.mask}: {exc}") from None
        f, rates = mask.spec.f, mask.spec.rates
    else:
        f, name = resolve_map(args)
        rates = resolve_rates(args, name)
        mask = rasterize(resolve_grid(args, f, rates, _window_for(name)), n_jobs=args.jobs)
    payload, reports = _component_payload(mask, args.with_loops, f, rates)
    for r in reports:
        print(r.summary_line())
    _emit(args, _config(args, grid=mask.spec.as_dict()), payload, "components.report.json")
    return 0 if all(r.passed for r in reports) else 1


def run_checks(f, rates, checks, samples, seed, budget, N) -> list[Report]:
    out = []
    fam = f.family
    for check in checks:
        if check == "modulus":
            out.append(verify_modulus_bounds(f, samples or 1_000_000, seed))
        elif check == "absorbing":
            out.append(verify_absorbing_sets(f, rates.m, samples or 100, budget, seed, rates))
        elif check == "strips":
            for k in range(3):
                r = strip_coverage_check(k, rates.m, fam, samples or 100_000, seed)
                r.name = f"strip_coverage[k={k}]"
                out.append(r)
        elif check == "rects":
            out.append(rect_containment_sweep())
        elif check == "rates":
            out.append(rate_domination_check(f, rates, N))
        elif check == "cycle":
            out.append(cycle_in_disc_check(f, rates))
    return out


def cmd_verify(args) -> int:
    f, name = resolve_map(args)
    rates = resolve_rates(args, name)
    checks = args.check or ["all"]
    if "all" in checks:
        checks = list(CHECKS)
    samples = None if args.samples is None else check_int("--samples", args.samples, 1)
    reports = run_checks(f, rates, checks, samples, args.seed,
                         check_int("--budget", args.budget, 1), check_int("--N", args.N, 1))
    for r in reports:
        print(r.summary_line())
        for note in r.notes:
            print(f"  note: {note}")
    _emit(args, _config(args, checks=checks), [r.to_dict() for r in reports],
          "verify.report.json")
    return 0 if all(r.passed for r in reports) else 1


def cmd_trace(args) -> int:
    f, name = resolve_map(args)
    m = check_int("--m", args.m, 0)
    K = check_int("--levels", args.levels, 1)
    a0 = default_a0(f, m) if args.a0 is None else check_real("--a0", args.a0)
    try:
        result = trace(f, m, args.j0, a0, K, raise_on_error=False)
    except TraceError as exc:  # precondition failures have no partial result
        print(f"{type(exc).__name__}: {exc}")
        _emit(args, _config(args, a0=a0), {"error": str(exc), "error_type": type(exc).__name__},
              "trace.report.json")
        return 1
    for lv in result.levels:
        d = lv.as_dict()
        print(f"level {lv.level}: " + ", ".join(f"{k}={d[k]}" for k in d if k != "checks"))
    for g in result.growth:
        print(f"  |f^{g['k']}(zeta)| check: {'ok' if g['ok'] else 'FAIL'}")
    if result.error:
        print(f"{result.error_type}: {result.error}")
    print(f"zeta = {result.zeta}  passed = {result.passed}")
    _emit(args, _config(args, a0=a0), result.as_dict(), "trace.report.json")
    return 0 if result.passed else 1


def cmd_maxmod(args) -> int:
    f, name = resolve_map(args)
    radii = args.r or [1.0]
    rows = []
    for r in radii:
        try:
            est = max_modulus(f, check_real("--r", r, positive=True), args.samples)
            rows.append(est.as_dict())
            print(f"M({r:g}) = {est.value:.15g} at theta = {est.theta:.12g}")
        except OverflowError as exc:
            rows.append({"r": r, "error": str(exc)})
            print(f"M({r:g}): {exc}")
    _emit(args, _config(args), rows, "maxmod.report.json")
    return 0 if all("error" not in r for r in rows) else 1


COMMANDS = {"render": cmd_render, "julia": cmd_julia, "classify": cmd_classify,
            "components": cmd_components, "verify": cmd_verify, "trace": cmd_trace,
            "maxmod": cmd_maxmod}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        print(dumps(DEFAULTS))
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.jobs is not None:
            check_int("--jobs", args.jobs, -1)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
