"""Parameter scans behind ``hkcollapse scan <kind>``.

Every kind computes one row per eps, independently, so the output does not
depend on how many rows run at once. Column lists are part of the output
contract; extend them only by appending.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, NamedTuple

import numpy as np

from . import __version__
from . import ooguri_vafa as ov
from .config import RunConfig
from .diagnostics import collapse_scan
from .gluing import (decay_fit, fibre_volume, glue, positivity_scan, ricci_defect,
                     volume_mismatch)

# sup|F| below this is rounding noise and stays out of the decay fit
ROUNDING_FLOOR = 1e-15
SMOOTH_FIBRE = 0.5 + 0.2j

COLUMNS: Dict[str, List[str]] = {
    "ov": ["eps", "decay_C", "boundary_min_V", "harnack_deviation"],
    "glue": ["eps", "min_eigenvalue", "sup_F", "fibre_volume_rel_error", "volume_mismatch_rel"],
    "curvature": ["eps", "sup_R", "eps_sup_R", "window_lower", "window_upper", "in_window"],
    "diameter": ["eps", "singular_fibre_diameter", "smooth_fibre_diameter", "total_diameter"],
    "collapse": ["eps", "delta", "max_fibre_distance", "max_pair_defect", "section_rel_error"],
}
KINDS = tuple(COLUMNS)


class Check(NamedTuple):
    invariant: str
    passed: bool
    value: object


class ScanReport(NamedTuple):
    kind: str
    columns: List[str]
    rows: List[list]
    fits: dict
    checks: List[Check]
    seed: int

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def summary(self, config_doc):
        return {
            "kind": self.kind,
            "version": __version__,
            "seed": self.seed,
            "config": config_doc,
            "columns": self.columns,
            "rows": self.rows,
            "fits": self.fits,
            "checks": [{"invariant": c.invariant, "passed": bool(c.passed), "value": c.value}
                       for c in self.checks],
            "passed": self.passed,
        }


def _ovcfg(cfg: RunConfig, eps):
    return ov.OVConfig(eps, cfg.h_series, cfg.patch_radius, cfg.n_fold)


def _strictly(seq, decreasing=True):
    return all((b < a) if decreasing else (b > a) for a, b in zip(seq, seq[1:]))


def _slope(x, y):
    if len(x) < 2:
        return None
    return float(np.polyfit(x, y, 1)[0])


def _map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- row functions -------------------------------------------------------------

def _ov_row(cfg, e):
    c = _ovcfg(cfg, e)
    vmin, _ = ov.boundary_minimum(c)
    dev = ov.harnack_deviation(c, SMOOTH_FIBRE) if abs(SMOOTH_FIBRE) >= c.period / np.pi else math.nan
    return [e, ov.decay_check(e)[0], vmin, dev]


def _glue_row(cfg, e):
    r1, r2 = cfg.annulus
    gm = glue(e, cfg.h_series, r1, r2, cfg.patch_radius, check=False)
    low, _ = positivity_scan(gm)
    sup, _ = ricci_defect(gm, *cfg.glue_grid)
    vol = float(np.max(np.abs(fibre_volume(gm, np.array([0.3 + 0.1j, 0.5j, 0.75])) - e)) / e)
    mism, ref = volume_mismatch(gm)
    return [e, low, sup, vol, mism / ref]


def _diameter_row(cfg, e):
    c = _ovcfg(cfg, e)
    a = 0.5
    total = ov.total_diameter(a, c) if e <= a else math.nan
    return [e, ov.fibre_diameter(0.0, c), ov.fibre_diameter(SMOOTH_FIBRE, c), total]


def _collapse_row(cfg, e):
    r1, r2 = cfg.annulus
    row = collapse_scan([e], cfg.samples, cfg.seed, cfg.h_series, n_grid=cfg.base_grid,
                        far=cfg.tol.section_far, r1=r1, r2=r2, r=cfg.patch_radius)[0]
    return [e, row.delta, row.max_fibre, row.max_pair_defect, row.section_rel_error]


# --- kinds ------------------------------------------------------------------------

def scan_ov(cfg: RunConfig, threads=1):
    eps = list(cfg.eps_schedule)
    rows = _map(lambda e: _ov_row(cfg, e), eps, threads)
    small = [r[1] for r in rows if r[0] <= 0.2 + 1e-12] or [r[1] for r in rows]
    ratio = max(small) / min(small)
    devs = [r[3] for r in rows]
    checks = [
        Check("V > 0 on the boundary circle", all(r[2] > 0 for r in rows), min(r[2] for r in rows)),
        Check("decay constant stable within factor %g" % cfg.tol.decay_ratio,
              ratio <= cfg.tol.decay_ratio, ratio),
        Check("fibre deviation |W Im tau / eps - 1| strictly decreasing", _strictly(devs), devs),
    ]
    return rows, {"decay_C_ratio": ratio}, checks


def scan_glue(cfg: RunConfig, threads=1):
    eps = list(cfg.eps_schedule)
    rows = _map(lambda e: _glue_row(cfg, e), eps, threads)
    fit_rows = [r for r in rows if r[2] > ROUNDING_FLOOR]
    fits = {"decay_slope": None, "decay_intercept": None, "decay_r2": None}
    if len(fit_rows) >= 3:
        s, i, r2 = decay_fit([r[0] for r in fit_rows], [r[2] for r in fit_rows])
        fits = {"decay_slope": s, "decay_intercept": i, "decay_r2": r2}
    pos = [r[1] for r in rows if r[0] <= cfg.tol.positivity_eps_max + 1e-12]
    checks = [
        Check("glued metric positive for eps <= %g" % cfg.tol.positivity_eps_max,
              bool(pos) and min(pos) > 0, min(pos) if pos else None),
        Check("log sup|F| vs 1/eps: negative slope, R^2 >= %g" % cfg.tol.fit_r2,
              fits["decay_slope"] is not None and fits["decay_slope"] < 0
              and fits["decay_r2"] >= cfg.tol.fit_r2, fits["decay_r2"]),
        Check("fibre volume equals eps to %g" % cfg.tol.fibre_volume,
              max(r[3] for r in rows) <= cfg.tol.fibre_volume, max(r[3] for r in rows)),
    ]
    return rows, fits, checks


def scan_curvature(cfg: RunConfig, threads=1):
    rows, (c, cp) = ov.curvature_window(cfg.h_series, list(cfg.eps_schedule), r=cfg.patch_radius)
    rows = [[e, s, es, lo, hi, bool(lo <= es <= hi)] for e, s, es, lo, hi in rows]
    sups = [r[1] for r in rows]
    slope = _slope(np.log([r[0] for r in rows]), np.log(sups))
    checks = [
        Check("c/log(1/eps)^2 <= eps sup|R| <= c' log(1/eps)", all(r[5] for r in rows), None),
        Check("sup|R| strictly increasing as eps decreases", _strictly(sups, False), sups),
    ]
    return rows, {"c": c, "c_prime": cp, "log_sup_R_slope": slope}, checks


def scan_diameter(cfg: RunConfig, threads=1):
    eps = list(cfg.eps_schedule)
    rows = _map(lambda e: _diameter_row(cfg, e), eps, threads)
    x = [math.log(e * math.log(1.0 / e)) for e in eps if e < 1]
    d = [r[1] for r in rows if r[0] < 1]
    slope = _slope(x, np.log(d))
    lo, hi = cfg.tol.diameter_slope
    checks = [Check("singular fibre diameter slope vs log(eps log 1/eps) in [%g, %g]" % (lo, hi),
                    slope is not None and lo <= slope <= hi, slope)]
    return rows, {"diameter_slope": slope}, checks


def scan_collapse(cfg: RunConfig, threads=1):
    eps = list(cfg.eps_schedule)
    rows = _map(lambda e: _collapse_row(cfg, e), eps, threads)
    deltas = [r[1] for r in rows]
    slope = _slope(np.log(eps), np.log(deltas))
    mono = _strictly(deltas)
    checks = [
        Check("collapse distortion strictly decreasing", mono, deltas),
        Check("zero-section vs base distances within %g at the smallest eps" % cfg.tol.section_rel,
              rows[-1][4] <= cfg.tol.section_rel, rows[-1][4]),
    ]
    return rows, {"monotone": mono, "log_delta_slope": slope}, checks


_SCANS = {"ov": scan_ov, "glue": scan_glue, "curvature": scan_curvature,
          "diameter": scan_diameter, "collapse": scan_collapse}


def run_scan(kind, cfg: RunConfig, threads=1) -> ScanReport:
    if kind not in _SCANS:
        raise KeyError(kind)
    rows, fits, checks = _SCANS[kind](cfg, max(1, int(threads)))
    return ScanReport(kind, COLUMNS[kind], rows, fits, checks, cfg.seed)
