"""Experiment runners behind the CLI.

Each runner returns an ``Outcome`` holding CSV rows, a JSON summary, text
series and figure specs; writing them is the CLI's job.  Samples are
independent, so they may be farmed out to worker processes; results are
collected in submission order and never depend on the worker count.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .analysis import (
    annulus_bound,
    annulus_exponent,
    check_bound,
    fit_decay,
    mu_scaling_fit,
    theorem_bound,
)
from .config import ExperimentConfig, parse_config
from .errors import OscBoundError, OutOfRegime, TooFewPoints
from .oscquad import Cutoff, integrate_weighted
from .stationary import QuadratureNoiseWarning, b_derivative_sample, extract_b, vdc_split
from .validator import Thresholds, validate_phase

WORKERS_ENV = "OSCBOUND_WORKERS"


@dataclass
class Outcome:
    header: list
    rows: list
    summary: dict
    series: dict = field(default_factory=dict)  # name -> list of (x, y)
    figures: list = field(default_factory=list)  # (name, kind, payload)
    gate_failed: bool = False


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _y_cols(n):
    return [f"y{j}" for j in range(n)]


def _regime_violations(cfg, beta):
    out = []
    for t in cfg.ts or [None]:
        ph = cfg.phase(t)
        for y in cfg.ys:
            for lam in cfg.lambdas:
                mu = ph.scale(lam, y)
                if mu is not None and mu < lam ** (beta - 1.0) * (1 - 1e-12):
                    out.append({"lambda": lam, "y": y, "t": ph.param_t, "mu": mu, "required": lam ** (beta - 1.0)})
    return out


def check_regime(cfg, allow):
    beta = cfg.symbol().beta
    bad = _regime_violations(cfg, beta)
    if bad and not allow:
        raise OutOfRegime(f"{len(bad)} samples violate mu >= lam^(beta-1)", bad)
    return bad


# --- sweep ---------------------------------------------------------------


def _sweep_task(task):
    raw, quad, t, y, lam = task
    cfg = parse_config(raw)
    ph, sym = cfg.phase(t), cfg.symbol()
    s = extract_b(ph, sym, lam, y, quad)
    q = s.quad
    return (s.b_value, q.err_estimate, q.n_evals, q.converged, s.mu, ph.param_t)


def run_sweep(cfg: ExperimentConfig, allow_out_of_regime=False, workers=1):
    regime = check_regime(cfg, allow_out_of_regime)
    sym = cfg.symbol()
    n = cfg.n
    tasks = [(cfg.raw, cfg.quad, t, y, lam) for t in (cfg.ts or [None]) for y in cfg.ys for lam in cfg.lambdas]
    results = _map(_sweep_task, tasks, workers)
    header = ["lambda", *_y_cols(n), "re", "im", "abs", "err", "n_evals", "converged", "t", "mu", "config_hash"]
    rows, groups, unusable = [], {}, []
    for (_, _, t, y, lam), (b, err, ne, conv, mu, tval) in zip(tasks, results):
        rows.append([lam, *y, b.real, b.imag, abs(b), err, ne, conv, tval, mu, cfg.hash])
        if math.isfinite(abs(b)):
            groups.setdefault((tval, tuple(y)), []).append((lam, abs(b), mu))
        else:
            # budget ran out before a single level; the row stays, the fit skips it
            unusable.append(lam)

    bound_cfg = cfg.raw.get("bound", {})
    cap = float(bound_cfg.get("cap", math.inf))
    summary = {"experiment": "sweep", "config_hash": cfg.hash, "beta": sym.beta, "n": n, "groups": [],
               "unconverged": sum(1 for r in rows if not r[header.index("converged")]), "no_value": len(unusable)}
    if regime:
        summary["out_of_regime"] = regime
    series, figures, gate = {}, [], False
    for gi, ((tval, y), pts) in enumerate(groups.items()):
        entry = {"t": tval, "y": list(y)}
        if len(pts) >= 5:
            try:
                entry["fit"] = fit_decay([(l, m) for l, m, _ in pts]).as_dict()
            except TooFewPoints as exc:
                entry["fit_error"] = str(exc)
        bc = check_bound([((l, mu), m) for l, m, mu in pts], lambda p: theorem_bound(p[0], p[1], n, sym.beta), cap)
        entry["theorem_bound"] = {"constant": bc.constant, "worst_lambda": bc.worst_point[0], "pass": bc.passed}
        gate |= not bc.passed
        summary["groups"].append(entry)
        if len(pts) < 2:
            continue
        name = f"t{gi}" if cfg.ts else f"y{gi}"
        series[name] = [(math.log(l), math.log(m) if m > 0 else float("-inf")) for l, m, _ in pts]
        figures.append((name, "decay", {"lam": [p[0] for p in pts], "mag": [p[1] for p in pts],
                                         "fit": entry.get("fit"), "label": f"t={tval}, y={list(y)}"}))

    # mu scaling across t at each (lam, y)
    if len(cfg.ts) >= 2:
        summary["mu_scaling"] = []
        for y in cfg.ys:
            for lam in cfg.lambdas:
                pts = [(mu, m) for (tv, yy), g in groups.items() if yy == tuple(y) for l, m, mu in g if l == lam]
                try:
                    fit = mu_scaling_fit(pts).as_dict()
                except (TooFewPoints, ValueError) as exc:
                    fit = {"error": str(exc)}
                summary["mu_scaling"].append({"lambda": lam, "y": y, "fit": fit})
                figures.append((f"mu_l{len(summary['mu_scaling']) - 1}", "mu", {"mu": [p[0] for p in pts],
                                                                                "mag": [p[1] for p in pts]}))
    return Outcome(header, rows, summary, series, figures, gate)


# --- validate ------------------------------------------------------------


def run_validate(cfg: ExperimentConfig, **_):
    raw = cfg.raw
    th = Thresholds(**raw.get("thresholds", {}))
    eps = float(raw.get("epsilon", 0.1))
    density = int(raw.get("grid_density", 41))
    reports = []
    for t in cfg.ts or [None]:
        ph = cfg.phase(t)
        for y in cfg.ys:
            for lam in cfg.lambdas:
                rep = validate_phase(ph, lam, y, eps, density, th)
                d = rep.as_dict()
                d["phase"] = ph.name
                d["t"] = ph.param_t
                reports.append(d)
    header = ["lambda", *_y_cols(cfg.n), "t", "cond_gradient", "cond_hessian", "cond_derivs", "pass", "config_hash"]
    rows = [
        [r["lambda"], *r["y"], r["t"], r["cond_gradient"]["measured"], r["cond_hessian"]["measured"],
         r["cond_derivs"]["measured"], r["pass"], cfg.hash]
        for r in reports
    ]
    summary = {"experiment": "validate", "config_hash": cfg.hash, "reports": reports,
               "all_pass": all(r["pass"] for r in reports)}
    return Outcome(header, rows, summary, gate_failed=not summary["all_pass"])


# --- split ---------------------------------------------------------------


def _split_task(task):
    raw, quad, y, lam, alpha = task
    cfg = parse_config(raw)
    s = vdc_split(cfg.phase(), cfg.symbol(), lam, y, alpha, quad)
    return (s.inner.value, s.outer.value, s.whole.value, s.excision_radius, s.partition_error)


def run_split(cfg: ExperimentConfig, workers=1, **_):
    alphas = [float(a) for a in cfg.raw.get("alphas", [cfg.raw.get("alpha", 0.5)])]
    sym = cfg.symbol()
    n = cfg.n
    tasks = [(cfg.raw, cfg.quad, y, lam, a) for a in alphas for y in cfg.ys for lam in cfg.lambdas]
    results = _map(_split_task, tasks, workers)
    header = ["lambda", *_y_cols(n), "alpha", "radius", "inner_re", "inner_im", "inner_abs", "outer_re",
              "outer_im", "outer_abs", "whole_abs", "partition_err", "ratio", "config_hash"]
    rows = []
    sup_a = 1.0
    per_alpha = {}
    for (_, _, y, lam, a), (inner, outer, whole, r, perr) in zip(tasks, results):
        ratio = abs(inner) / abs(outer) if abs(outer) > 0 else math.inf
        rows.append([lam, *y, a, r, inner.real, inner.imag, abs(inner), outer.real, outer.imag, abs(outer),
                     abs(whole), perr, ratio, cfg.hash])
        d = per_alpha.setdefault(a, {"perr": 0.0, "ratios": [], "inner_c": 0.0, "lam": [], "inner": [], "outer": []})
        d["perr"] = max(d["perr"], perr)
        d["ratios"].append(ratio)
        d["inner_c"] = max(d["inner_c"], abs(inner) / (r**n * sup_a))
        d["lam"].append(lam)
        d["inner"].append(abs(inner))
        d["outer"].append(abs(outer))
    tol = float(cfg.raw.get("partition_tol", 1e-6))
    summary = {"experiment": "split", "config_hash": cfg.hash, "beta": sym.beta, "alphas": []}
    gate = False
    figures = []
    for a, d in per_alpha.items():
        ok = d["perr"] <= tol
        gate |= not ok
        summary["alphas"].append({
            "alpha": a,
            "max_partition_err": d["perr"],
            "partition_pass": ok,
            "ratio_min": min(d["ratios"]),
            "ratio_max": max(d["ratios"]),
            "inner_measure_constant": d["inner_c"],
        })
        figures.append((f"a{len(figures)}", "split", {"lam": d["lam"], "inner": d["inner"], "outer": d["outer"],
                                                      "alpha": a}))
    return Outcome(header, rows, summary, figures=figures, gate_failed=gate)


# --- annulus -------------------------------------------------------------


def _annulus_task(task):
    raw, quad, y, lam = task
    cfg = parse_config(raw)
    p = raw
    cut = Cutoff(float(p.get("alpha", 0.25)), p.get("orientation", "outer"))
    r = integrate_weighted(cfg.phase(), cfg.symbol(), lam, y, float(p.get("gamma", 1.0)), cut, quad)
    return (r.value, r.err_estimate, r.n_evals, r.converged, r.noise_floor)


def run_annulus(cfg: ExperimentConfig, allow_out_of_regime=False, workers=1):
    regime = check_regime(cfg, allow_out_of_regime)
    raw = cfg.raw
    sym = cfg.symbol()
    n = cfg.n
    alpha = float(raw.get("alpha", 0.25))
    gamma = float(raw.get("gamma", 1.0))
    N = int(raw.get("N", 4))
    if alpha > 1 - sym.beta + 1e-12:
        raise OscBoundError(f"alpha = {alpha} exceeds 1 - beta = {1 - sym.beta}")
    ph = cfg.phase()
    tasks = [(raw, cfg.quad, y, lam) for y in cfg.ys for lam in cfg.lambdas]
    results = _map(_annulus_task, tasks, workers)
    header = ["lambda", *_y_cols(n), "re", "im", "abs", "err", "n_evals", "converged", "noise_limited", "bound",
              "ratio", "config_hash"]
    rows, groups = [], {}
    for (_, _, y, lam), (v, err, ne, conv, floor) in zip(tasks, results):
        mu = ph.scale(lam, y)
        bnd = annulus_bound(lam, mu, n, sym.beta, alpha, gamma, N)
        noisy = abs(v) <= 10.0 * floor
        rows.append([lam, *y, v.real, v.imag, abs(v), err, ne, conv, noisy, bnd, abs(v) / bnd, cfg.hash])
        if math.isfinite(abs(v)):
            groups.setdefault(tuple(y), []).append((lam, abs(v), mu, noisy))
    cap = float(raw.get("bound", {}).get("cap", math.inf))
    slack = float(raw.get("slope_slack", 0.2))
    expo = annulus_exponent(n, sym.beta, alpha, gamma, N)
    summary = {"experiment": "annulus", "config_hash": cfg.hash, "beta": sym.beta, "alpha": alpha, "gamma": gamma,
               "N": N, "predicted_exponent": expo, "groups": []}
    if regime:
        summary["out_of_regime"] = regime
    gate = False
    figures = []
    for y, pts in groups.items():
        bc = check_bound([((l, mu), m) for l, m, mu, _ in pts],
                         lambda p: annulus_bound(p[0], p[1], n, sym.beta, alpha, gamma, N), cap)
        entry = {"y": list(y), "bound_constant": bc.constant, "worst_lambda": bc.worst_point[0],
                 "bound_pass": bc.passed, "noise_limited": sum(1 for p in pts if p[3])}
        try:
            fit = fit_decay([(l, m) for l, m, _, noisy in pts if not noisy])
            entry["fit"] = fit.as_dict()
            entry["slope_pass"] = fit.slope <= expo + slack
        except TooFewPoints as exc:
            entry["fit_error"] = str(exc)
            entry["slope_pass"] = False
        gate |= not (bc.passed and entry["slope_pass"])
        summary["groups"].append(entry)
        figures.append((f"y{len(figures)}", "decay", {"lam": [p[0] for p in pts], "mag": [p[1] for p in pts],
                                                      "fit": entry.get("fit"), "label": f"annulus, y={list(y)}",
                                                      "ylabel": "|weighted annulus integral|",
                                                      "bound": [bc.constant * annulus_bound(p[0], p[2], n, sym.beta,
                                                                                             alpha, gamma, N)
                                                                for p in pts]}))
    return Outcome(header, rows, summary, figures=figures, gate_failed=gate)


# --- derivative ----------------------------------------------------------


def _derivative_task(task):
    raw, quad, y, lam, gamma = task
    cfg = parse_config(raw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureNoiseWarning)
        d = b_derivative_sample(cfg.phase(), cfg.symbol(), lam, y, gamma, quad)
        b = extract_b(cfg.phase(), cfg.symbol(), lam, y, quad)
    return (b.b_value, d.value, d.step, d.noisy, b.mu)


def run_derivative(cfg: ExperimentConfig, allow_out_of_regime=False, workers=1):
    regime = check_regime(cfg, allow_out_of_regime)
    raw = cfg.raw
    sym = cfg.symbol()
    n = cfg.n
    gamma = [int(g) for g in raw.get("direction", [1] + [0] * (n - 1))]
    order = sum(gamma)
    tasks = [(raw, cfg.quad, y, lam, gamma) for y in cfg.ys for lam in cfg.lambdas]
    results = _map(_derivative_task, tasks, workers)
    header = ["lambda", *_y_cols(n), "b_abs", "db_re", "db_im", "db_abs", "step", "noisy", "mu", "config_hash"]
    rows, groups = [], {}
    for (_, _, y, lam, _g), (b, d, h, noisy, mu) in zip(tasks, results):
        rows.append([lam, *y, abs(b), d.real, d.imag, abs(d), h, noisy, mu, cfg.hash])
        if math.isfinite(abs(b)) and math.isfinite(abs(d)):
            groups.setdefault(tuple(y), []).append((lam, abs(b), abs(d), mu))
    slack = float(raw.get("slope_slack", 0.15))
    expected = sym.beta * order
    summary = {"experiment": "derivative", "config_hash": cfg.hash, "beta": sym.beta, "direction": gamma,
               "expected_slope_gap": expected, "groups": []}
    if regime:
        summary["out_of_regime"] = regime
    gate = False
    figures = []
    for y, pts in groups.items():
        try:
            fb = fit_decay([(l, b) for l, b, _, _ in pts])
            fd = fit_decay([(l, d) for l, _, d, _ in pts])
        except TooFewPoints as exc:
            summary["groups"].append({"y": list(y), "fit_error": str(exc), "gap_pass": False})
            gate = True
            continue
        gap = fd.slope - fb.slope
        bc = check_bound([((l, mu), d) for l, _, d, mu in pts],
                         lambda p: theorem_bound(p[0], p[1], n, sym.beta, order))
        ok = abs(gap - expected) <= slack
        gate |= not ok
        summary["groups"].append({"y": list(y), "fit_b": fb.as_dict(), "fit_db": fd.as_dict(), "slope_gap": gap,
                                  "gap_pass": ok, "theorem_bound_constant": bc.constant})
        figures.append((f"y{len(figures)}", "derivative", {"lam": [p[0] for p in pts], "b": [p[1] for p in pts],
                                                           "db": [p[2] for p in pts]}))
    return Outcome(header, rows, summary, figures=figures, gate_failed=gate)


RUNNERS = {
    "sweep": run_sweep,
    "validate": run_validate,
    "split": run_split,
    "annulus": run_annulus,
    "derivative": run_derivative,
}


def run_experiment(cfg, allow_out_of_regime=False, workers=None):
    workers = cfg.workers if workers is None else workers
    return RUNNERS[cfg.kind](cfg, allow_out_of_regime=allow_out_of_regime, workers=workers)


def refit_csv(rows, header):
    """Group rows of a sweep-style CSV by (y..., t) and fit |b| against lambda."""
    idx = {h: i for i, h in enumerate(header)}
    if "lambda" not in idx or "abs" not in idx:
        raise OscBoundError("CSV needs 'lambda' and 'abs' columns")
    keys = [h for h in header if h.startswith("y") and h[1:].isdigit()] + (["t"] if "t" in idx else [])
    groups = {}
    for r in rows:
        k = tuple(r[idx[c]] for c in keys)
        groups.setdefault(k, []).append((float(r[idx["lambda"]]), float(r[idx["abs"]])))
    out = []
    for k, pts in groups.items():
        entry = dict(zip(keys, k))
        try:
            entry["fit"] = fit_decay(pts).as_dict()
        except TooFewPoints as exc:
            entry["fit_error"] = str(exc)
        out.append(entry)
    return out


__all__ = ["Outcome", "run_experiment", "refit_csv", "default_workers", "RUNNERS"]
