"""The acceptance suite, shared by ``hkcollapse verify`` and the test suite.

Each check returns a CheckResult naming the invariant it measures. All
thresholds come from the RunConfig tolerances.
"""
import math
import time
from typing import Callable, Dict, List, NamedTuple

import numpy as np

from . import gibbons_hawking as gh
from . import ooguri_vafa as ov
from .config import RunConfig, load_config
from .diagnostics import collapse_scan
from .errors import PositivityError
from .geometry_core import FieldSampler, Point, numerical_ricci
from .gluing import (decay_fit, fibre_volume, glue, positivity_scan, ricci_defect,
                     ricci_defect_at)
from .semiflat import SemiFlatMetric, i1_periods, semiflat_curvature, semiflat_fields


class CheckResult(NamedTuple):
    name: str
    invariant: str
    passed: bool
    measured: dict
    seconds: float

    def line(self):
        vals = ", ".join("%s=%s" % (k, _fmt(v)) for k, v in self.measured.items())
        return "%s %s: %s [%s] (%.1f s)" % ("PASS" if self.passed else "FAIL", self.name,
                                          self.invariant, vals, self.seconds)


def _fmt(v):
    if isinstance(v, float):
        return "%.4g" % v
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _ov(cfg: RunConfig, eps):
    return ov.OVConfig(eps, cfg.h_series, cfg.patch_radius, cfg.n_fold)


def _timed(fn):
    def run(cfg):
        t = time.perf_counter()
        name, inv, ok, meas = fn(cfg)
        return CheckResult(name, inv, bool(ok), meas, time.perf_counter() - t)
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def check_triple_algebra(cfg: RunConfig):
    """Hyperkahler relations of the OV triple on an n^3 grid at eps = 0.2."""
    eps = 0.2
    n = cfg.triple_grid
    t = time.perf_counter()
    g = ov.ov_metric(_ov(cfg, eps))
    # offsets keep the grid off the monopoles on the u3 axis
    ax = np.linspace(-0.6, 0.6, n) + 0.013
    a3 = np.linspace(0.0, eps, n, endpoint=False) + 0.003
    U = np.stack(np.meshgrid(ax, ax, a3, indexing="ij"), -1)
    cross, diag = gh.triple_algebra_errors(gh.triple_arrays(g, U))
    dt = time.perf_counter() - t
    tol = cfg.tol.triple_algebra
    limit = cfg.runtime_limits.get("triple_algebra", math.inf)
    ok = cross <= tol and diag <= tol and dt < limit
    return ("C1", "|w_i ^ w_j| and |w_i^2 - w_1^2| <= %g |w_1^2|, runtime < %g s" % (tol, limit), ok,
            {"cross": float(cross), "diag": float(diag), "grid": n, "runtime": dt})


@_timed
def check_lattice_bessel(cfg: RunConfig):
    """Lattice and Bessel evaluations of V0 agree at eps = 0.5."""
    eps = 0.5
    rng = np.random.default_rng(cfg.seed)
    t = time.perf_counter()
    rho = rng.uniform(0.16, 0.9, 100)
    y = rho * np.exp(2j * np.pi * rng.random(100))
    u = rng.uniform(0.0, eps, 100)
    diff = np.abs(ov.v0_lattice(u, y, eps) - ov.v0_bessel(u, y, eps))
    dt = time.perf_counter() - t
    tol = cfg.tol.lattice_bessel
    limit = cfg.runtime_limits.get("lattice_bessel", math.inf)
    return ("C2", "|V0 lattice - V0 Bessel| <= %g on 100 points, runtime < %g s" % (tol, limit),
            diff.max() <= tol and dt < limit, {"max_diff": float(diff.max()), "runtime": dt})


@_timed
def check_decay(cfg: RunConfig):
    """Fitted decay constant C stable across the schedule entries <= 0.2."""
    eps = [e for e in cfg.eps_schedule if e <= 0.2 + 1e-12] or list(cfg.eps_schedule)
    Cs = [ov.decay_check(e)[0] for e in eps]
    ratio = max(Cs) / min(Cs)
    tol = cfg.tol.decay_ratio
    return ("C3", "max C / min C <= %g over eps %s" % (tol, _fmt(eps)), ratio <= tol,
            {"C": Cs, "ratio": ratio})


def _order(hs, vals):
    return float(np.polyfit(np.log(hs), np.log(vals), 1)[0])


@_timed
def check_ricci_flat(cfg: RunConfig):
    """Finite-difference Ricci norm of the semi-flat and OV metrics."""
    eps = 0.2
    at = Point(0.05 - 0.03j, 0.45 + 0.1j)
    m = SemiFlatMetric(i1_periods(1.0), eps)

    def sf(x, y):
        W, b = semiflat_fields(m, x, y)
        return float(W), complex(b)

    chart = gh.HolomorphicChart(ov.ov_metric(_ov(cfg, eps)))
    out = {}
    ok = True
    lo, hi = cfg.tol.order
    for label, ev in (("semiflat", sf), ("ov", chart)):
        at_h = numerical_ricci(FieldSampler(cfg.fd_step, ev), at)
        series = [numerical_ricci(FieldSampler(h, ev), at) for h in cfg.fd_steps]
        p = _order(cfg.fd_steps, series)
        out[label + "_ricci"] = at_h
        out[label + "_order"] = p
        ok = ok and at_h <= cfg.tol.ricci and lo <= p <= hi
    return ("C4", "|Ric| <= %g at h = %g and FD order in [%g, %g]" % (cfg.tol.ricci, cfg.fd_step, lo, hi),
            ok, out)


@_timed
def check_curvature_formulas(cfg: RunConfig):
    """Compact vs expanded curvature on Taub-NUT, and the GH formula vs the semi-flat route."""
    rng = np.random.default_rng(cfg.seed)
    tn = gh.taub_nut(1.0)
    u = rng.normal(size=(200, 3))
    u *= rng.uniform(0.2, 3.0, 200)[:, None] / np.linalg.norm(u, axis=1)[:, None]
    a = gh.curvature_norm(tn, u)
    b = gh.curvature_norm_expanded(tn, u)
    e1 = float(np.max(np.abs(a - b)))
    m = SemiFlatMetric(i1_periods(1.0), 0.2)
    sf = gh.semiflat_field(m)
    ys = [0.5, 0.3 + 0.4j, 0.7 - 0.2j, -0.4 + 0.35j, -0.6j]
    e2 = max(abs(float(gh.curvature_norm(sf, [y.real, y.imag, 0.0])) - semiflat_curvature(m, y))
             for y in map(complex, ys))
    t1, t2 = cfg.tol.curvature_compact, cfg.tol.curvature_semiflat
    return ("C5", "compact vs expanded <= %g; GH vs semi-flat <= %g" % (t1, t2),
            e1 <= t1 and e2 <= t2, {"taub_nut": e1, "semiflat": e2})


def diameter_series(cfg: RunConfig):
    ks = range(cfg.diameter_k[0], cfg.diameter_k[1] + 1)
    eps = [2.0 ** -k for k in ks]
    d = [ov.fibre_diameter(0.0, _ov(cfg, e)) for e in eps]
    x = [math.log(e * math.log(1.0 / e)) for e in eps]
    return eps, d, float(np.polyfit(x, np.log(d), 1)[0])


@_timed
def check_diameter(cfg: RunConfig):
    """Singular-fibre diameter scaling and the closed-form profile."""
    eps, d, slope = diameter_series(cfg)
    e = 0.3
    prof = max(abs(ov.singular_fibre_profile(s, e) - 4 * np.pi * e * float(ov.v0_lattice(s * e, 0.0, e)))
               for s in np.arange(1, 10) / 10)
    lo, hi = cfg.tol.diameter_slope
    return ("C6", "diameter slope vs log(eps log 1/eps) in [%g, %g]; profile error <= %g"
            % (lo, hi, cfg.tol.profile), lo <= slope <= hi and prof <= cfg.tol.profile,
            {"slope": slope, "profile_error": float(prof)})


@_timed
def check_curvature_window(cfg: RunConfig):
    """eps sup|R| inside the window fitted at the first eps; sup|R| increasing."""
    rows, (c, cp) = ov.curvature_window(cfg.h_series, list(cfg.eps_schedule), r=cfg.patch_radius)
    inside = all(lo <= es <= hi for _, _, es, lo, hi in rows[1:])
    sups = [r[1] for r in rows]
    mono = all(b > a for a, b in zip(sups, sups[1:]))
    return ("C7", "c/log(1/eps)^2 <= eps sup|R| <= c' log(1/eps); sup|R| increasing", inside and mono,
            {"sup_R": sups, "eps_sup_R": [r[2] for r in rows], "c": c, "c_prime": cp})


@_timed
def check_gluing(cfg: RunConfig):
    """Glued metric: positivity, exact vanishing of F outside the annulus, decay, fibre volume."""
    r1, r2 = cfg.annulus
    eps_all = list(cfg.eps_schedule)
    sups, lows, vol = [], {}, 0.0
    exact = True
    for e in eps_all:
        gm = glue(e, cfg.h_series, r1, r2, cfg.patch_radius, check=False)
        s, _ = ricci_defect(gm, *cfg.glue_grid)
        sups.append(s)
        if e <= cfg.tol.positivity_eps_max + 1e-12:
            lows[e] = positivity_scan(gm)[0]
        for y in (0.5 * r1 + 0.1j, 0.5 * (r2 + cfg.patch_radius) * np.exp(0.7j)):
            for x2 in (0.0, 0.3):
                exact = exact and ricci_defect_at(gm, x2, y) == 0.0
        for y in (0.3 + 0.1j, 0.5j, 0.75):
            vol = max(vol, abs(fibre_volume(gm, y)[0] - e) / e)
    fit_eps = eps_all[:3]
    slope, _, r2fit = decay_fit(fit_eps, sups[:3])
    pos = bool(lows) and min(lows.values()) > 0
    ok = pos and exact and slope < 0 and r2fit >= cfg.tol.fit_r2 and vol <= cfg.tol.fibre_volume
    return ("C8", "positive for eps <= %g; F = 0 outside annulus; log sup|F| vs 1/eps slope < 0 with "
            "R^2 >= %g; fibre volume eps to %g" % (cfg.tol.positivity_eps_max, cfg.tol.fit_r2,
                                                  cfg.tol.fibre_volume), ok,
            {"min_eig": min(lows.values()) if lows else float("nan"), "sup_F": sups, "slope": slope,
             "r2": r2fit, "exact_outside": exact, "fibre_volume_rel": vol})


@_timed
def check_collapse(cfg: RunConfig):
    """Collapse distortion decreasing; section distances match the McLean base."""
    t = time.perf_counter()
    r1, r2 = cfg.annulus
    rows = collapse_scan(list(cfg.eps_schedule), cfg.samples, cfg.seed, cfg.h_series,
                         n_grid=cfg.base_grid, far=cfg.tol.section_far, r1=r1, r2=r2,
                         r=cfg.patch_radius)
    dt = time.perf_counter() - t
    d = [row.delta for row in rows]
    mono = all(b < a for a, b in zip(d, d[1:]))
    rel = rows[-1].section_rel_error
    limit = cfg.runtime_limits.get("collapse", math.inf)
    return ("C9", "delta strictly decreasing; section vs base <= %g at eps = %g; runtime < %g s"
            % (cfg.tol.section_rel, cfg.eps_schedule[-1], limit),
            mono and rel <= cfg.tol.section_rel and dt < limit,
            {"delta": d, "section_rel": rel, "runtime": dt})


@_timed
def check_harnack(cfg: RunConfig):
    """sup over a smooth fibre of |eps^-1 W Im tau - 1| decreasing over the schedule."""
    y = 0.5 + 0.2j
    dev = [ov.harnack_deviation(_ov(cfg, e), y) for e in cfg.eps_schedule]
    mono = all(b < a for a, b in zip(dev, dev[1:]))
    return ("C10", "sup |eps^-1 W Im tau - 1| strictly decreasing in eps", mono, {"deviation": dev})


CHECKS: Dict[str, Callable[[RunConfig], CheckResult]] = {
    "C1": check_triple_algebra,
    "C2": check_lattice_bessel,
    "C3": check_decay,
    "C4": check_ricci_flat,
    "C5": check_curvature_formulas,
    "C6": check_diameter,
    "C7": check_curvature_window,
    "C8": check_gluing,
    "C9": check_collapse,
    "C10": check_harnack,
}


def positivity_gate(cfg: RunConfig):
    """check_positivity for every eps in the schedule; raises PositivityError naming the eps."""
    out = []
    for e in cfg.eps_schedule:
        try:
            out.append(ov.check_positivity(_ov(cfg, e)))
        except PositivityError as err:
            raise PositivityError("eps = %g: %s" % (e, err), err.value, err.location) from None
    return out


def run_suite(cfg: RunConfig = None, names=None, progress=None) -> List[CheckResult]:
    cfg = cfg or load_config()
    out = []
    for name in names or CHECKS:
        res = CHECKS[name](cfg)
        if progress:
            progress(res)
        out.append(res)
    return out
