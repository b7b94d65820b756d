"""Command-line front door.

Every run writes a JSON manifest naming its inputs, seed, and output files,
so any result can be reproduced byte-for-byte by re-running with the same
arguments.  Numeric JSON output uses Python's shortest round-trip float
representation, which preserves doubles exactly.

Exit codes: 0 success, 1 argument/validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, blaschke, circle_dynamics, covering, harmonic, map_zoo, renderer
from .errors import FatouLabError, OutOfRange, SingularityApproach
from .rng import uniform01

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems with exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_text(path: Path, text: str):
    path.write_text(text, encoding="ascii")


def _make_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    return int.from_bytes(os.urandom(8), "little")


def _out_dir(args) -> Path:
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _manifest(args, subcommand: str, seed, outputs, extra=None) -> dict:
    arguments = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func",) and v is not None
    }
    man = {
        "tool": "fatoulab",
        "version": __version__,
        "subcommand": subcommand,
        "arguments": arguments,
        "seed": seed,
        "outputs": sorted(outputs),
    }
    if extra:
        man.update(extra)
    return man


def _finish(args, subcommand: str, seed, summary: dict, files: dict) -> int:
    """Write output files plus the manifest, and echo the summary."""
    out = _out_dir(args)
    prefix = args.prefix or subcommand
    written = []
    for suffix, content in files.items():
        path = out / f"{prefix}-{suffix}"
        if isinstance(content, (bytes, bytearray)):
            path.write_bytes(bytes(content))
        else:
            _write_text(path, content)
        written.append(path.name)
    summary_path = out / f"{prefix}-summary.json"
    _write_text(summary_path, _json_text(summary))
    written.append(summary_path.name)
    man = _manifest(args, subcommand, seed, written + [f"{prefix}-manifest.json"])
    _write_text(out / f"{prefix}-manifest.json", _json_text(man))
    sys.stdout.write(_json_text(summary))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_tau(args) -> int:
    ts = blaschke.solve_tau(args.alpha, tol=args.tol)
    summary = {
        "alpha": ts.alpha, "tau": ts.tau, "s": ts.s,
        "residual": ts.residual, "product_terms_used": ts.product_terms_used,
    }
    return _finish(args, "tau", None, summary, {})


def _cmd_verify_semiconj(args) -> int:
    seed = _make_seed(args)
    f = map_zoo.exp_baker(args.alpha)
    F = map_zoo.sine_model(args.alpha)
    streams = np.arange(args.samples, dtype=np.uint64)
    re = (2.0 * uniform01(seed, streams, 0) - 1.0) * math.pi
    im = (2.0 * uniform01(seed, streams, 1) - 1.0) * 3.0
    worst = 0.0
    worst_scaled = 0.0
    for x, y in zip(re, im):
        z = complex(x, y)
        lhs = map_zoo.evaluate(f, complex(np.exp(1j * z))).to_complex()
        rhs = complex(np.exp(1j * map_zoo.evaluate(F, z).to_complex()))
        worst = max(worst, abs(lhs - rhs))
        worst_scaled = max(worst_scaled, abs(lhs - rhs) / max(1.0, abs(lhs)))
    summary = {
        "alpha": args.alpha, "samples": args.samples, "seed": seed,
        "max_residual": float(worst),
        "max_scaled_residual": float(worst_scaled),
        "passed": bool(worst_scaled < 1e-12),
    }
    return _finish(args, "verify-semiconj", seed, summary, {})


def _cmd_blaschke_eval(args) -> int:
    B = blaschke.BlaschkeProduct.from_alpha(args.alpha)
    z = complex(np.exp(1j * args.theta))
    n = blaschke.required_terms(B, z, args.target_err)
    angle = blaschke.circle_eval(B, args.theta, args.target_err)
    val = blaschke.eval_blaschke(B, z, args.target_err)
    summary = {
        "alpha": args.alpha, "theta": args.theta,
        "angle": angle, "modulus": abs(val),
        "terms_used": int(n), "target_err": args.target_err,
        "derivative_at_zero": blaschke.derivative_at_zero(B),
    }
    return _finish(args, "blaschke-eval", None, summary, {})


def _parse_bubbles(text: str):
    if os.path.exists(text):
        text = Path(text).read_text(encoding="ascii")
    data = json.loads(text)
    return [(complex(b[0], b[1]), float(b[2])) for b in data]


def _harmonic_domain(args):
    if args.domain == "annulus":
        return harmonic.annulus(1.0 / args.R, args.R)
    if args.bubbles is None:
        raise OutOfRange("champagne domain requires --bubbles")
    return harmonic.champagne_disk(_parse_bubbles(args.bubbles))


def _cmd_harmonic(args) -> int:
    if args.method == "closed-form":
        if args.domain != "annulus":
            raise OutOfRange("closed-form masses are available for the annulus only")
        p = harmonic.annulus_outer_mass(args.rho, 1.0 / args.R, args.R)
        summary = {"domain": "annulus", "R": args.R, "rho": args.rho,
                   "outer_mass": p, "inner_mass": 1.0 - p}
        return _finish(args, "harmonic", None, summary, {})

    seed = _make_seed(args)
    if args.method == "pushforward":
        if args.domain != "annulus":
            raise OutOfRange("the pushforward estimator applies to the annulus only")
        model = covering.annulus_model(args.R)
        hists = covering.pushforward_measure(model, args.walks, args.bins, seed)
        summary = {
            "domain": "annulus", "R": args.R, "method": "pushforward",
            "samples": args.walks, "seed": seed, "bins": args.bins,
            "component_masses": [h.mass() for h in hists],
        }
        from .histograms import to_csv_text
        return _finish(args, "harmonic", seed, summary,
                       {"histogram.csv": to_csv_text(hists)})

    if args.method == "cross-validate":
        if args.domain != "annulus":
            raise OutOfRange("cross-validation applies to the annulus only")
        domain = harmonic.annulus(1.0 / args.R, args.R)
        model = covering.annulus_model(args.R)
        report = harmonic.cross_validate(domain, model, args.walks, seed,
                                         n_bins=args.bins)
        summary = dict(report.to_dict(), seed=seed, R=args.R)
        return _finish(args, "harmonic", seed, summary, {})

    # method == "wos"
    domain = _harmonic_domain(args)
    base = complex(args.rho, 0.0) if args.domain == "annulus" else complex(*args.base)
    result = harmonic.walk_on_spheres(domain, base, args.walks, seed=seed,
                                      n_bins=args.bins)
    summary = dict(result.summary(), domain=args.domain)
    if args.domain == "annulus":
        summary["R"] = args.R
        summary["closed_form_outer_mass"] = harmonic.annulus_outer_mass(
            abs(base), 1.0 / args.R, args.R)
    if args.min_bin_mass is not None:
        summary["support_test"] = harmonic.support_test(
            result, args.min_bin_mass).to_dict()
    from .histograms import to_csv_text
    return _finish(args, "harmonic", seed, summary,
                   {"histogram.csv": to_csv_text(list(result.hits))})


def _cmd_classify_radial(args) -> int:
    if args.domain == "annulus":
        model = covering.annulus_model(args.R)
    elif args.domain == "disk":
        model = covering.disk_model()
    else:
        model = covering.punctured_disk_model()
    xi = complex(np.exp(1j * args.xi))
    rc = covering.radial_classify(model, xi, K=args.K,
                                  eps_escape=args.eps_escape,
                                  delta_bounded=args.delta_bounded)
    summary = dict(rc.to_dict(), domain=args.domain, xi_angle=args.xi)
    if args.domain == "annulus":
        summary["R"] = args.R
    return _finish(args, "classify-radial", None, summary, {})


def _circle_map(args) -> circle_dynamics.CircleMap:
    return circle_map_from_dict(json.loads(args.map))


def circle_map_from_dict(obj: dict) -> circle_dynamics.CircleMap:
    kind = obj["kind"]
    if kind == "rotation":
        return circle_dynamics.rotation_map(obj["theta"])
    if kind == "power":
        return circle_dynamics.power_circle_map(obj["d"])
    if kind == "mobius":
        vals = [map_zoo._cval(obj[k]) for k in ("a", "b", "c", "d")]
        return circle_dynamics.mobius_boundary_map(*vals)
    if kind == "blaschke":
        B = blaschke.BlaschkeProduct.from_alpha(obj["alpha"])
        return circle_dynamics.blaschke_boundary_map(B)
    if kind == "finite_blaschke":
        zeros = [map_zoo._cval(z) for z in obj["zeros"]]
        rot = map_zoo._cval(obj.get("rotation", [1.0, 0.0]))
        return circle_dynamics.finite_blaschke_boundary_map(zeros, rot)
    raise OutOfRange(f"unknown circle map kind {kind!r}")


def _cmd_circle_stats(args) -> int:
    seed = _make_seed(args)
    cmap = _circle_map(args)
    # collect the orbit step by step: boundary maps with singularities refuse
    # to iterate through their exclusion zones, and a measure-preserving
    # orbit of this length may well visit them; truncate and say so
    if args.n < 1:
        raise OutOfRange(f"orbit length must be >= 1, got {args.n}")
    angles = []
    stopped_by = None
    theta = args.theta0
    for _ in range(args.n):
        try:
            theta = circle_dynamics.apply_map(cmap, theta)
        except SingularityApproach as exc:
            stopped_by = str(exc)
            break
        angles.append(theta)
    if not angles:
        raise OutOfRange("the start angle lies inside an exclusion zone")
    orbit = np.asarray(angles)
    disc = circle_dynamics.discrepancy(orbit)
    summary = {
        "map": json.loads(args.map), "theta0": args.theta0, "n": args.n,
        "orbit_points": len(angles), "seed": seed, "orbit_discrepancy": disc,
    }
    if stopped_by is not None:
        summary["orbit_truncated"] = stopped_by
    files = {"orbit.csv": "iteration,angle\n" + "".join(
        f"{i + 1},{float(a)!r}\n" for i, a in enumerate(orbit))}
    if circle_dynamics.fixes_origin(cmap):
        ks = circle_dynamics.invariance_test(cmap, args.n, seed)
        summary["invariance_ks"] = ks
        summary["ks_critical_1pct"] = circle_dynamics.ks_critical(args.n)
        # one-step pushforward of the orbit as an arc histogram
        from .histograms import ArcHistogram, accumulate, to_csv_text
        hist = ArcHistogram(0, np.zeros(64, dtype=np.int64), orbit.size)
        accumulate(hist, orbit)
        files["pushforward.csv"] = to_csv_text([hist])
    return _finish(args, "circle-stats", seed, summary, files)


def _cmd_spread(args) -> int:
    cmap = _circle_map(args)
    start, length = (float(x) for x in args.arc.split(","))
    report = circle_dynamics.arc_spread(cmap, (start, length), args.n_max,
                                        grid=args.grid)
    summary = {
        "map": json.loads(args.map), "arc": [start, length],
        "n_max": args.n_max, "grid": args.grid,
        "iterations": report.iterations,
        "first_full_cover": report.first_full_cover,
        "final_covered_fraction": report.covered_fraction[-1],
    }
    csv = "iteration,covered_fraction\n" + "".join(
        f"{i},{float(f)!r}\n" for i, f in enumerate(report.covered_fraction))
    return _finish(args, "spread", None, summary, {"spread.csv": csv})


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("FATOULAB_THREADS")
    return max(1, int(env)) if env else 1


def _cmd_render(args) -> int:
    spec = map_zoo.spec_from_dict(json.loads(args.map))
    grid_spec = renderer.GridSpec.from_json(Path(args.config).read_text())
    grid = renderer.classify_grid(spec, grid_spec, threads=_threads(args))
    counts = {name: int((grid.verdict == code).sum())
              for code, name in renderer.VERDICT_NAMES.items()}
    summary = {
        "map": json.loads(args.map), "grid": grid_spec.to_dict(),
        "verdict_counts": counts,
    }
    files = {}
    rgb_header = f"P6\n{grid_spec.nx} {grid_spec.ny}\n255\n".encode("ascii")
    files["image.ppm"] = rgb_header + renderer.render_rgb(grid).tobytes()
    if args.loop:
        cx, cy, r = (float(x) for x in args.loop.split(","))
        cert = renderer.loop_probe(grid, complex(cx, cy), r)
        summary["certificate"] = cert.to_dict()
        files["certificate.json"] = _json_text(cert.to_dict())
    return _finish(args, "render", None, summary, files)


# ---------------------------------------------------------------------------
# Parser wiring


def _add_common(p):
    p.add_argument("--out-dir", default=".", help="directory for output files")
    p.add_argument("--prefix", default=None, help="output filename prefix")


def build_parser() -> _Parser:
    parser = _Parser(prog="fatoulab", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("tau", parents=[], help="solve the multiplier equation for tau(alpha)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    _add_common(p)
    p.set_defaults(func=_cmd_tau)

    p = sub.add_parser("verify-semiconj", help="max residual of the exp/sine semiconjugacy")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_verify_semiconj)

    p = sub.add_parser("blaschke-eval", help="evaluate the boundary map of the Blaschke product")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--target-err", type=float, default=1e-9, dest="target_err")
    _add_common(p)
    p.set_defaults(func=_cmd_blaschke_eval)

    p = sub.add_parser("harmonic", help="harmonic-measure estimators")
    p.add_argument("--domain", choices=["annulus", "champagne"], required=True)
    p.add_argument("--method",
                   choices=["wos", "pushforward", "closed-form", "cross-validate"],
                   required=True)
    p.add_argument("--R", type=float, default=math.e)
    p.add_argument("--rho", type=float, default=1.0, help="base point modulus (annulus)")
    p.add_argument("--base", type=lambda s: tuple(float(x) for x in s.split(",")),
                   default=(0.0, 0.0), help="base point re,im (champagne)")
    p.add_argument("--bubbles", default=None,
                   help="JSON list of [cx, cy, r] bubbles, inline or a file path")
    p.add_argument("--walks", type=int, default=100000)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--min-bin-mass", type=float, default=None, dest="min_bin_mass")
    _add_common(p)
    p.set_defaults(func=_cmd_harmonic)

    p = sub.add_parser("classify-radial", help="escaping/bounded/bungee radial verdict")
    p.add_argument("--domain", choices=["annulus", "disk", "punctured"],
                   default="annulus")
    p.add_argument("--R", type=float, default=math.e)
    p.add_argument("--xi", type=float, required=True, help="boundary angle in radians")
    p.add_argument("--K", type=int, default=covering.DEFAULT_K)
    p.add_argument("--eps-escape", type=float, default=covering.DEFAULT_EPS_ESCAPE,
                   dest="eps_escape")
    p.add_argument("--delta-bounded", type=float,
                   default=covering.DEFAULT_DELTA_BOUNDED, dest="delta_bounded")
    _add_common(p)
    p.set_defaults(func=_cmd_classify_radial)

    p = sub.add_parser("circle-stats", help="orbit discrepancy and invariance statistics")
    p.add_argument("--map", required=True, help="circle map as JSON")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--theta0", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_circle_stats)

    p = sub.add_parser("spread", help="arc-spreading report for a circle map")
    p.add_argument("--map", required=True, help="circle map as JSON")
    p.add_argument("--arc", required=True, help="start,length in radians")
    p.add_argument("--n-max", type=int, default=100, dest="n_max")
    p.add_argument("--grid", type=int, default=circle_dynamics.DEFAULT_GRID)
    _add_common(p)
    p.set_defaults(func=_cmd_spread)

    p = sub.add_parser("render", help="classify a dynamical plane and write a PPM")
    p.add_argument("--map", required=True, help="map spec as JSON")
    p.add_argument("--config", required=True, help="grid spec JSON file")
    p.add_argument("--loop", default=None, help="probe circle cx,cy,r")
    p.add_argument("--threads", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if getattr(args, "subcommand", None) is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (OutOfRange, _UsageError, json.JSONDecodeError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except FatouLabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
