"""Run configuration: the bundled defaults overlaid with a user JSON document.

Every number a scan or the verify suite uses comes from here. Validation
errors name the offending field as a dotted path.
"""
import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError


def default_document():
    text = resources.files("hkcollapse").joinpath("data/default_config.json").read_text("utf-8")
    return json.loads(text)


def _merge(base, over, path=""):
    for k, v in over.items():
        where = path + k
        if k not in base:
            raise ConfigError("%s: unknown field" % where)
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError("%s: expected an object" % where)
            _merge(base[k], v, where + ".")
        else:
            base[k] = v
    return base


def parse_document(text, source="<config>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("%s:%d:%d: %s" % (source, e.lineno, e.colno, e.msg)) from None
    if not isinstance(doc, dict):
        raise ConfigError("%s: top level must be an object" % source)
    return doc


def _num(doc, path, positive=False, integer=False):
    v = doc
    for k in path.split("."):
        v = v[k]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError("%s: expected a finite number, got %r" % (path, v))
    if integer and int(v) != v:
        raise ConfigError("%s: expected an integer, got %r" % (path, v))
    if positive and not v > 0:
        raise ConfigError("%s: must be positive, got %r" % (path, v))
    return int(v) if integer else float(v)


def _numlist(doc, path, n=None):
    v = doc
    for k in path.split("."):
        v = v[k]
    if not isinstance(v, list) or (n is not None and len(v) != n) or not v:
        raise ConfigError("%s: expected a list%s" % (path, "" if n is None else " of %d numbers" % n))
    out = []
    for i, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ConfigError("%s[%d]: expected a finite number, got %r" % (path, i, x))
        out.append(float(x))
    return out


def _complex_list(doc, path):
    v = doc
    for k in path.split("."):
        v = v[k]
    if not isinstance(v, list) or not v:
        raise ConfigError("%s: expected a non-empty list of [re, im] pairs" % path)
    out = []
    for i, c in enumerate(v):
        if isinstance(c, (int, float)) and not isinstance(c, bool):
            c = [c, 0.0]
        if (not isinstance(c, list) or len(c) != 2
                or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in c)):
            raise ConfigError("%s[%d]: expected [re, im], got %r" % (path, i, c))
        out.append(complex(c[0], c[1]))
    return tuple(out)


@dataclass(frozen=True)
class Tolerances:
    triple_algebra: float
    lattice_bessel: float
    decay_ratio: float
    ricci: float
    order: Tuple[float, float]
    curvature_compact: float
    curvature_semiflat: float
    diameter_slope: Tuple[float, float]
    profile: float
    positivity_eps_max: float
    fibre_volume: float
    fit_r2: float
    section_rel: float
    section_far: float


@dataclass(frozen=True)
class RunConfig:
    h_series: Tuple[complex, ...]
    n_fold: int
    patch_radius: float
    eps_schedule: Tuple[float, ...]
    annulus: Tuple[float, float]
    base_grid: int
    triple_grid: int
    glue_grid: Tuple[int, int, int]
    fd_step: float
    fd_steps: Tuple[float, ...]
    samples: int
    seed: int
    diameter_k: Tuple[int, int]
    tol: Tolerances
    runtime_limits: dict
    out_dir: str
    document: dict

    def with_overrides(self, seed: Optional[int] = None, epsilons: Optional[Sequence[float]] = None,
                       out_dir: Optional[str] = None):
        doc = copy.deepcopy(self.document)
        if seed is not None:
            doc["seed"] = seed
        if epsilons is not None:
            doc["eps_schedule"] = list(epsilons)
        if out_dir is not None:
            doc["output"]["dir"] = out_dir
        return from_document(doc, merged=True)

    def provenance(self):
        """The document minus where output goes, so summaries do not depend on --out."""
        doc = copy.deepcopy(self.document)
        doc.pop("output", None)
        return doc

    def as_json(self):
        return json.dumps(self.document, sort_keys=True, separators=(",", ":"))


def check_period_area(h_series, r, n_fold=1, n_theta=64):
    """Im(conj(tau1) tau2) = n(-log|y|/2pi + Re h(y)) must be positive on 0 < |y| <= r.

    The real part of h is harmonic and -log|y| is decreasing, so the
    minimum sits on the circle |y| = r.
    """
    th = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    y = r * np.exp(1j * th)
    area = n_fold * (-np.log(r) / (2 * np.pi) + np.real(np.polynomial.polynomial.polyval(y, h_series)))
    return float(area.min())


def from_document(doc, merged=False):
    if not merged:
        doc = _merge(default_document(), doc)
    h = _complex_list(doc, "fibration.h_series")
    sing = doc["fibration"]["singular_points"]
    if not (isinstance(sing, list) and len(sing) == 1 and sing[0] in ([0, 0], [0.0, 0.0])):
        raise ConfigError("fibration.singular_points: only a single I1 fibre at the origin is supported")
    n_fold = _num(doc, "fibration.n_fold", positive=True, integer=True)
    r = _num(doc, "fibration.patch_radius", positive=True)
    if not r < 1:
        raise ConfigError("fibration.patch_radius: must lie in (0, 1), got %r" % r)
    area = check_period_area(np.asarray(h), r, n_fold)
    if not area > 0:
        raise ConfigError("fibration.h_series: invariant Im(conj(tau1) tau2) > 0 fails on |y| = %g "
                          "(minimum %.6g)" % (r, area))
    eps = _numlist(doc, "eps_schedule")
    for i, e in enumerate(eps):
        if not e > 0:
            raise ConfigError("eps_schedule[%d]: must be positive, got %r" % (i, e))
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps_schedule: must be strictly decreasing, got %r" % (eps,))
    r1, r2 = _numlist(doc, "annulus", 2)
    if not 0 < r1 < r2 < r:
        raise ConfigError("annulus: need 0 < r1 < r2 < patch_radius, got [%g, %g] with r = %g"
                          % (r1, r2, r))
    grid = {k: _num(doc, "grid." + k, positive=True, integer=True)
            for k in ("base", "triple", "glue_rho", "glue_theta", "glue_q")}
    steps = _numlist(doc, "fd_steps")
    if len(steps) < 2 or any(s <= 0 for s in steps):
        raise ConfigError("fd_steps: need at least two positive steps")
    dk = _numlist(doc, "diameter_k", 2)
    if not (dk[0] == int(dk[0]) and dk[1] == int(dk[1]) and 1 <= dk[0] < dk[1]):
        raise ConfigError("diameter_k: need integers 1 <= k_lo < k_hi, got %r" % (dk,))
    t = doc["tolerances"]
    tol = {}
    for k in Tolerances.__dataclass_fields__:
        if k not in t:
            raise ConfigError("tolerances.%s: missing" % k)
        if k in ("order", "diameter_slope"):
            lo, hi = _numlist(doc, "tolerances." + k, 2)
            if not lo < hi:
                raise ConfigError("tolerances.%s: need lo < hi" % k)
            tol[k] = (lo, hi)
        else:
            tol[k] = _num(doc, "tolerances." + k, positive=True)
    limits = {k: _num(doc, "runtime_limits." + k, positive=True) for k in doc["runtime_limits"]}
    out = doc["output"]["dir"]
    if not isinstance(out, str) or not out:
        raise ConfigError("output.dir: expected a non-empty path")
    return RunConfig(
        h_series=h, n_fold=n_fold, patch_radius=r, eps_schedule=tuple(eps), annulus=(r1, r2),
        base_grid=grid["base"], triple_grid=grid["triple"],
        glue_grid=(grid["glue_rho"], grid["glue_theta"], grid["glue_q"]),
        fd_step=_num(doc, "fd_step", positive=True), fd_steps=tuple(steps),
        samples=_num(doc, "samples", positive=True, integer=True),
        seed=_num(doc, "seed", integer=True), diameter_k=(int(dk[0]), int(dk[1])),
        tol=Tolerances(**tol), runtime_limits=limits, out_dir=out, document=doc)


def load_config(path=None):
    """Defaults, overlaid with the JSON file at ``path`` when given."""
    if path is None:
        return from_document({})
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError("%s: cannot read config (%s)" % (path, e.strerror)) from None
    return from_document(parse_document(text, str(path)))
