"""Command line: ``hkcollapse verify | scan <kind> | eval <quantity>``.

Exit codes: 0 when every invariant holds, 1 when one fails, 2 for a bad
configuration, bad arguments or an output path that cannot be written.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import load_config
from .errors import ConfigError, DomainError, PositivityError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

EVAL_QUANTITIES = ("v0", "frame", "f-epsilon", "curvature-norm", "periods")


def _clean(v):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def json_text(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(out_dir, name, text):
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _prepare_out(out_dir):
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write-probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as e:
        raise ConfigError("output.dir: cannot write to %s (%s)" % (out_dir, e.strerror)) from None


def _epsilons(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers") from None


def _config(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, epsilons=args.epsilons, out_dir=args.out)


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


# --- commands ---------------------------------------------------------------------

def cmd_verify(args):
    from .acceptance import CHECKS, positivity_gate, run_suite

    cfg = _config(args)
    _prepare_out(cfg.out_dir)
    try:
        positivity_gate(cfg)
    except PositivityError as e:
        _log("positivity: %s" % e)
        return EXIT_FAIL
    names = args.only.split(",") if args.only else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError("--only: unknown checks %s" % ", ".join(unknown))
    t = time.perf_counter()
    results = run_suite(cfg, names, progress=lambda r: print(r.line(), flush=True))
    report = {
        "kind": "verify", "version": __version__, "seed": cfg.seed, "config": cfg.provenance(),
        "columns": ["name", "passed", "seconds"],
        "rows": [[r.name, r.passed, r.seconds] for r in results],
        "fits": {},
        "checks": [{"name": r.name, "invariant": r.invariant, "passed": r.passed, "value": r.measured}
                   for r in results],
        "passed": all(r.passed for r in results),
    }
    path = _write(cfg.out_dir, "verify.json", json_text(report))
    _log("wrote %s in %.1f s" % (path, time.perf_counter() - t))
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_scan(args):
    from .scans import run_scan

    cfg = _config(args)
    _prepare_out(cfg.out_dir)
    t = time.perf_counter()
    rep = run_scan(args.kind, cfg, args.threads)
    a = _write(cfg.out_dir, args.kind + ".csv", csv_text(rep.columns, rep.rows))
    b = _write(cfg.out_dir, args.kind + ".json", json_text(rep.summary(cfg.provenance())))
    sys.stdout.write(csv_text(rep.columns, rep.rows))
    for c in rep.checks:
        print("%s %s" % ("PASS" if c.passed else "FAIL", c.invariant))
    # wall time stays out of the files so reruns are byte-identical
    _log("wrote %s, %s in %.1f s (version %s, seed %d)" % (a, b, time.perf_counter() - t,
                                                          __version__, cfg.seed))
    return EXIT_OK if rep.passed else EXIT_FAIL


def _pt(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ConfigError("eval %s needs %s" % (args.quantity, ", ".join("--" + m for m in missing)))


def cmd_eval(args):
    from . import gibbons_hawking as gh
    from . import ooguri_vafa as ov

    cfg = _config(args)
    eps = args.eps if args.eps is not None else cfg.eps_schedule[0]
    ovc = ov.OVConfig(eps, cfg.h_series, cfg.patch_radius, cfg.n_fold)
    q = args.quantity
    if q == "v0":
        _pt(args, "u", "y")
        y = complex(args.y)
        lat = float(ov.v0_lattice(args.u, y, eps))
        print("v0 lattice  %.17g" % lat)
        if abs(y) >= eps / np.pi:
            bes = float(ov.v0_bessel(args.u, y, eps))
            print("v0 bessel   %.17g" % bes)
            print("difference  %.3e" % abs(lat - bes))
        else:
            print("v0 bessel   n/a (|y| < eps/pi, the series is not used there)")
    elif q == "frame":
        _pt(args, "x2", "y")
        ov.check_positivity(ovc)
        W, b, u = ov.OVPotential(ovc).frame(args.x2, complex(args.y))
        print("W   %.17g" % float(W))
        print("b   %r" % complex(b))
        print("u3  %.17g  (method: Newton on int V du)" % float(u))
    elif q == "f-epsilon":
        _pt(args, "x2", "y")
        from .gluing import glue, ricci_defect_at

        r1, r2 = cfg.annulus
        gm = glue(eps, cfg.h_series, r1, r2, cfg.patch_radius)
        y = complex(args.y)
        F = float(ricci_defect_at(gm, args.x2, y))
        where = "annulus" if r1 < abs(y) < r2 else "outside annulus (reference frame, det 1 exactly)"
        print("F_eps  %r  (%s)" % (F, where))
    elif q == "curvature-norm":
        _pt(args, "u")
        u = [args.u, args.u2 or 0.0, args.u3 or 0.0]
        if args.field == "constant":
            g = gh.constant_field(1.0)
        elif args.field == "taub-nut":
            g = gh.taub_nut(1.0)
        else:
            g = ov.ov_metric(ovc)
        print("|R|  %.17g  (field: %s, compact formula from the 4-jet of V)"
              % (float(gh.curvature_norm(g, u)), args.field))
    elif q == "periods":
        _pt(args, "y")
        t1, t2 = ov.ov_periods(complex(args.y), ovc)
        print("tau1  %r" % t1)
        print("tau2  %r" % t2)
        print("Im(conj(tau1) tau2)  %.17g" % (t1.conjugate() * t2).imag)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON overlay on the bundled defaults")
    common.add_argument("--out", metavar="DIR", help="output directory (default from config)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--threads", type=int, default=1, help="cap on concurrent scan rows")
    common.add_argument("--epsilons", type=_epsilons, metavar="CSV", help="override the eps schedule")

    p = argparse.ArgumentParser(prog="hkcollapse", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--only", metavar="NAMES", help="comma-separated subset, e.g. C1,C2")
    v.set_defaults(func=cmd_verify)

    from .scans import KINDS
    s = sub.add_parser("scan", parents=[common], help="tabulate one quantity over the eps schedule")
    s.add_argument("kind", choices=KINDS)
    s.set_defaults(func=cmd_scan)

    e = sub.add_parser("eval", parents=[common], help="evaluate one quantity at a point")
    e.add_argument("quantity", choices=EVAL_QUANTITIES)
    e.add_argument("--eps", type=float)
    e.add_argument("--u", type=float, help="fibre coordinate u3, or u1 for curvature-norm")
    e.add_argument("--u2", type=float)
    e.add_argument("--u3", type=float)
    e.add_argument("--x2", type=float)
    e.add_argument("--y", type=str, help="base point, Python complex syntax such as 0.5+0.2j")
    e.add_argument("--field", choices=("constant", "taub-nut", "ov"), default="ov")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except ConfigError as e:
        _log("config error: %s" % e)
        return EXIT_CONFIG
    except PositivityError as e:
        _log("positivity: %s" % e)
        return EXIT_FAIL
    except (DomainError, ValueError) as e:
        _log("error: %s" % e)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
