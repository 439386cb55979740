"""Command-line front end: verify-group, predict, simulate, compare, spectrum.

Exit codes: 0 pass, 1 fail, 2 usage or configuration error. Each command
that writes files also writes ``manifest.json`` into the output directory.
"""
import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__, _kernels, euclidean, harness, io, repcheck, sphere, torus
from .spectra import dumps

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_outputs(out, files, config, seed, started, workers):
    """Write ``files`` (name -> text) and a manifest with their digests."""
    os.makedirs(out, exist_ok=True)
    digests = {}
    for name in sorted(files):
        path = os.path.join(out, name)
        with open(path, "w", newline="") as fh:
            fh.write(files[name])
        digests[name] = _sha256(path)
    manifest = {
        "tool": "homovar",
        "version": __version__,
        "backend": _kernels.BACKEND,
        "config": config,
        "seed": seed,
        "workers": workers,
        "duration_seconds": time.perf_counter() - started,
        "outputs": digests,
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        fh.write(dumps(manifest))
    return manifest


def _load_config(args):
    if not args.config:
        raise UsageError("--config is required")
    try:
        cfg = harness.ExperimentConfig.from_file(args.config)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    # resolve the integrand now so --dry-run catches bad parameters too
    harness.build_integrand(cfg)
    return cfg


def _dry_run(cfg):
    sys.stdout.write(dumps(cfg.to_json()))
    return EXIT_PASS


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify_group(args):
    catalog = repcheck.catalog_by_name()
    if args.group == "all":
        entries = list(catalog.values())
    elif args.group in catalog:
        entries = [catalog[args.group]]
    else:
        raise UsageError(f"unknown group {args.group!r}; choose from {', '.join(catalog)} or all")
    rows = []
    for e in entries:
        rows.extend(repcheck.verify_entry(e, tol=args.tolerance, seed=args.seed or 0))
    print(f"{'group':<6} {'identity':<10} {'irreps':<12} {'max_error':>11}  status")
    for r in rows:
        print(f"{r.group:<6} {r.identity:<10} {r.reps:<12} {r.max_error:>11.3e}  "
              f"{'PASS' if r.passed else 'FAIL'}")
    ok = all(r.passed for r in rows)
    print(f"{sum(r.passed for r in rows)}/{len(rows)} checks passed")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_predict(args):
    started = time.perf_counter()
    cfg = _load_config(args)
    if args.dry_run:
        return _dry_run(cfg)
    pred, _, _ = harness.predict(cfg)
    files = {"prediction.json": dumps(pred.to_json()), "prediction.csv": pred.to_csv()}
    write_outputs(args.out, files, cfg.to_json(), int(cfg.seed), started, args.workers)
    print(f"predicted variance {pred.variance!r}" + (" (FORMAL)" if pred.formal else ""))
    return EXIT_PASS


def cmd_simulate(args):
    started = time.perf_counter()
    cfg = _load_config(args)
    if args.dry_run:
        return _dry_run(cfg)
    stats = harness.empirical_mc_statistics(cfg, workers=args.workers)
    files = {"statistics.json": dumps(stats.to_json())}
    write_outputs(args.out, files, cfg.to_json(), int(cfg.seed), started, args.workers)
    print(f"empirical variance {stats.variance!r} +- {stats.se_variance!r}")
    return EXIT_PASS


def cmd_compare(args):
    started = time.perf_counter()
    cfg = _load_config(args)
    if args.dry_run:
        return _dry_run(cfg)
    report = harness.compare(cfg, workers=args.workers)
    files = {"report.json": dumps(report.to_json()), "report.csv": report.to_csv()}
    write_outputs(args.out, files, cfg.to_json(), int(cfg.seed), started, args.workers)
    print(f"{report.status}: predicted {report.predicted_variance!r}, "
          f"empirical {report.empirical.variance!r}, z = {report.z_variance:.3f}"
          + (" (FORMAL)" if report.formal else ""))
    return EXIT_PASS if report.passed else EXIT_FAIL


def _pattern_spectrum(args):
    pts = io.load_pattern(args.pattern)
    if args.domain == "torus":
        if args.L is None:
            raise UsageError("--L is required for torus patterns")
        return torus.pattern_power(torus.wrap(pts), args.L), {"L": args.L}
    if args.domain == "sphere":
        if args.lmax is None:
            raise UsageError("--lmax is required for sphere patterns")
        return sphere.pattern_power_sphere(pts, args.lmax), {"lmax": args.lmax}
    if args.T is None or args.dlam is None or args.lam_max is None:
        raise UsageError("--T, --dlam and --lam-max are required for euclidean patterns")
    window = euclidean.EuclideanWindow(pts.shape[1], args.T, not args.open_window)
    shells = euclidean.ShellGrid.covering(args.lam_max, args.dlam)
    spec = euclidean.radial_power(window.wrap(pts), window, shells, args.order)
    return spec, {"T": args.T, "dlam": args.dlam, "lam_max": args.lam_max, "order": args.order,
                  "periodic": not args.open_window}


def cmd_spectrum(args):
    started = time.perf_counter()
    if args.pattern and args.config:
        raise UsageError("give either --pattern or --config, not both")
    if args.pattern:
        if args.domain is None:
            raise UsageError("--domain is required with --pattern")
        if args.dry_run:
            io.load_pattern(args.pattern)
            return EXIT_PASS
        spec, resolved = _pattern_spectrum(args)
        config = {"pattern": os.path.abspath(args.pattern), "domain": args.domain, **resolved}
        seed = None
    else:
        cfg = _load_config(args)
        if args.dry_run:
            return _dry_run(cfg)
        spec = harness.estimate_expected_power(cfg, workers=args.workers, R=args.R)
        config, seed = cfg.to_json(), int(cfg.seed)
    files = {"spectrum.json": dumps(spec.to_json()), "spectrum.csv": spec.to_csv()}
    write_outputs(args.out, files, config, seed, started, args.workers)
    print(f"wrote {len(spec.power)} blocks to {args.out}")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="homovar", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"homovar {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="experiment config (JSON)")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--workers", type=int, default=1, help="worker threads (1 = reference)")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--dry-run", action="store_true", help="validate inputs only")

    v = sub.add_parser("verify-group", help="check the Schur orthogonality identities on finite groups")
    v.add_argument("--group", default="all", help="catalog group name or 'all'")
    v.add_argument("--tolerance", type=float, default=repcheck.SCHUR_TOL)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify_group)

    for name, fn, text in (("predict", cmd_predict, "closed-form prediction"),
                           ("simulate", cmd_simulate, "brute-force MC statistics"),
                           ("compare", cmd_compare, "prediction vs simulation")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.set_defaults(func=fn)

    s = sub.add_parser("spectrum", help="power spectrum of a pattern file or sampler")
    common(s)
    s.add_argument("--pattern", help="pattern text file")
    s.add_argument("--domain", choices=("torus", "sphere", "euclidean"))
    s.add_argument("--L", type=int)
    s.add_argument("--lmax", type=int)
    s.add_argument("--T", type=float)
    s.add_argument("--dlam", type=float)
    s.add_argument("--lam-max", type=float)
    s.add_argument("--order", type=int, default=64)
    s.add_argument("--open-window", action="store_true", help="non-periodic euclidean window")
    s.add_argument("-R", type=int, help="realizations (default from config)")
    s.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    try:
        return args.func(args)
    except (UsageError, harness.ConfigError, ValueError, OSError) as exc:
        print(f"homovar {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
