"""JSON experiment configs: parsing, model construction, hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, TooFewPoints
from .oscquad import QuadSpec
from .phases import (
    make_nonexample_cubic,
    make_nonexample_psi,
    make_perturbed_phase,
    make_schrodinger_phase,
)
from .symbols import (
    make_chirp_symbol,
    make_gaussian_symbol,
    make_shrinking_bump,
    make_smooth_bump,
)

EXPERIMENTS = ("sweep", "validate", "split", "annulus", "derivative")
PHASES = ("schrodinger", "perturbed", "nonexample-psi", "nonexample-cubic")
SYMBOLS = ("smooth-bump", "chirp", "shrinking-bump", "gaussian")


def config_hash(raw):
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _get(d, key, where, kind=None, default=...):
    if key not in d:
        if default is ...:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ConfigError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(v).__name__}")
    return v


def _domain(spec, n, where):
    if spec is None:
        return None
    try:
        lo, hi = spec
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.domain: expected [lo, hi], {exc}") from None
    if np.any(hi <= lo):
        raise ConfigError(f"{where}.domain: empty box")
    return (lo, hi)


def build_phase(spec, t_override=None):
    where = "phase"
    if not isinstance(spec, dict):
        raise ConfigError("phase: expected an object")
    name = _get(spec, "name", where, str)
    if name not in PHASES:
        raise ConfigError(f"phase.name: unknown phase {name!r}; choose from {', '.join(PHASES)}")
    n = int(_get(spec, "n", where, int, 1))
    if not 1 <= n <= 3:
        raise ConfigError("phase.n: must be 1, 2 or 3")
    t = float(t_override if t_override is not None else _get(spec, "t", where, (int, float), 1.0))
    kw = {}
    dom = _domain(spec.get("domain"), n, where)
    if dom is not None:
        kw["domain"] = dom
    try:
        if name == "schrodinger":
            return make_schrodinger_phase(t, dim=n, **kw)
        if name == "perturbed":
            q = _get(spec, "q_coeffs", where, list)
            lam_range = tuple(spec.get("lambda_range", (1.0, 1e12)))
            return make_perturbed_phase(t, q, dim=n, lam_range=lam_range, **kw)
        if name == "nonexample-psi":
            return make_nonexample_psi(t, dim=n, **kw)
        return make_nonexample_cubic(t, dim=n, **kw)
    except ValueError as exc:
        raise ConfigError(f"phase: {exc}") from None


def build_symbol(spec, n):
    where = "symbol"
    if not isinstance(spec, dict):
        raise ConfigError("symbol: expected an object")
    name = _get(spec, "name", where, str)
    if name not in SYMBOLS:
        raise ConfigError(f"symbol.name: unknown symbol {name!r}; choose from {', '.join(SYMBOLS)}")
    center = spec.get("center", [0.0] * n)
    if len(center) != n:
        raise ConfigError(f"symbol.center: expected length {n}")
    try:
        if name == "smooth-bump":
            return make_smooth_bump(center, float(spec.get("width", 1.0)))
        if name == "chirp":
            omega = spec.get("omega", [1.0] + [0.0] * (n - 1))
            if len(omega) != n:
                raise ConfigError(f"symbol.omega: expected length {n}")
            beta = float(_get(spec, "beta", where, (int, float)))
            return make_chirp_symbol(beta, omega, center=center, width=float(spec.get("width", 1.0)))
        if name == "shrinking-bump":
            return make_shrinking_bump(float(_get(spec, "beta", where, (int, float))), center)
        return make_gaussian_symbol(n, float(spec.get("truncate", 8.0)))
    except ValueError as exc:
        raise ConfigError(f"symbol: {exc}") from None


def lambda_values(raw):
    if "lambdas" in raw:
        vals = raw["lambdas"]
        if not isinstance(vals, list):
            raise ConfigError("lambdas: expected a list")
        return [float(v) for v in vals]
    grid = raw.get("lambda_grid")
    if grid is None:
        raise ConfigError("lambda_grid: missing (or give an explicit 'lambdas' list)")
    pts = int(_get(grid, "points", "lambda_grid", int))
    if pts <= 0:
        return []
    lo = float(_get(grid, "min", "lambda_grid", (int, float)))
    hi = float(_get(grid, "max", "lambda_grid", (int, float)))
    if not 0 < lo <= hi:
        raise ConfigError("lambda_grid: need 0 < min <= max")
    return [float(v) for v in np.geomspace(lo, hi, pts)]


@dataclass
class ExperimentConfig:
    raw: dict
    kind: str
    lambdas: list
    ys: list
    ts: list
    quad: QuadSpec
    output_dir: Path
    prefix: str
    seed: int = 0
    workers: int = 1
    hash: str = ""
    extra: dict = field(default_factory=dict)

    def phase(self, t=None):
        return build_phase(self.raw["phase"], t)

    def symbol(self):
        return build_symbol(self.raw["symbol"], self.n)

    @property
    def n(self):
        return int(self.raw["phase"].get("n", 1))


FIT_KINDS = ("sweep", "annulus", "derivative")


def parse_config(raw, kind=None, out_dir=None, max_evals=None, workers=None):
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    k = raw.get("experiment", kind)
    if k is None:
        raise ConfigError("experiment: missing (sweep | validate | split | annulus | derivative)")
    if kind is not None and k != kind:
        raise ConfigError(f"experiment: config is {k!r} but subcommand expects {kind!r}")
    if k not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown kind {k!r}")
    if "phase" not in raw:
        raise ConfigError("phase: missing required section")
    n = int(raw["phase"].get("n", 1))
    if k != "validate" and "symbol" not in raw:
        raise ConfigError("symbol: missing required section")

    lambdas = lambda_values(raw) if k != "validate" or "lambdas" in raw or "lambda_grid" in raw else [1.0]
    if k in FIT_KINDS and len(lambdas) < 5 and not raw.get("t"):
        raise TooFewPoints(f"lambda grid has {len(lambdas)} points; fit experiments need at least 5")
    if not lambdas:
        raise TooFewPoints("lambda grid is empty")

    ys = raw.get("y", [[0.0] * n])
    if not isinstance(ys, list) or not ys:
        raise ConfigError("y: expected a non-empty list of vectors")
    ys = [[float(v) for v in (yy if isinstance(yy, list) else [yy])] for yy in ys]
    for yy in ys:
        if len(yy) != n:
            raise ConfigError(f"y: each vector must have length {n}")
    ts = [float(v) for v in raw.get("t", [])]

    q = dict(raw.get("quad", {}))
    if "domain" in q:
        q["domain"] = _domain(q["domain"], n, "quad")
    if max_evals is not None:
        q["max_evals"] = int(max_evals)
    try:
        quad = QuadSpec(**q)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"quad: {exc}") from None

    out = raw.get("output", {})
    output_dir = Path(out_dir if out_dir is not None else out.get("dir", "results"))
    cfg = ExperimentConfig(
        raw=raw,
        kind=k,
        lambdas=lambdas,
        ys=ys,
        ts=ts,
        quad=quad,
        output_dir=output_dir,
        prefix=str(out.get("prefix", k)),
        seed=int(raw.get("seed", 0)),
        workers=int(workers if workers is not None else raw.get("workers", 1)),
        hash=config_hash(raw),
    )
    # model construction errors surface here, before any work starts
    for t in ts or [None]:
        cfg.phase(t)
    if k != "validate":
        cfg.symbol()
    return cfg


def load_config(path, **kwargs):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(raw, **kwargs)
