"""Log-log figures written next to the CSV output of each experiment."""

from __future__ import annotations

import math

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
}


def _new(width=4.5):
    golden = (math.sqrt(5) - 1) / 2
    fig = Figure(figsize=(width, width * golden), dpi=120)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.grid(True, which="major", lw=0.4, alpha=0.5)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    # no Software/date metadata, so re-runs are byte-identical
    fig.savefig(path, format="png", metadata={"Software": None})


def _positive(xs, ys):
    pts = [(x, y) for x, y in zip(xs, ys) if y > 0 and math.isfinite(y)]
    return [p[0] for p in pts], [p[1] for p in pts]


def decay_figure(path, lam, mag, fit=None, bound=None, label="", ylabel="|b(lambda, y)|"):
    fig, ax = _new()
    x, y = _positive(lam, mag)
    ax.plot(x, y, "o", ms=4, label=label or "data")
    if fit:
        lx = np.asarray(lam, dtype=float)
        ax.plot(lx, math.exp(fit["intercept"]) * lx ** fit["slope"], "-", lw=1, label=f"fit slope {fit['slope']:.3f}")
    if bound is not None:
        bx, by = _positive(lam, bound)
        ax.plot(bx, by, "--", lw=1, label="C x bound")
    ax.set_xlabel("lambda")
    ax.set_ylabel(ylabel)
    ax.legend(loc="best")
    _save(fig, path)


def mu_figure(path, mu, mag):
    fig, ax = _new()
    x, y = _positive(mu, mag)
    ax.plot(x, y, "s", ms=4)
    ax.set_xlabel("mu")
    ax.set_ylabel("|b|")
    _save(fig, path)


def split_figure(path, lam, inner, outer, alpha):
    fig, ax = _new()
    ax.plot(*_positive(lam, inner), "o-", ms=4, lw=1, label="inner (excised ball)")
    ax.plot(*_positive(lam, outer), "s-", ms=4, lw=1, label="outer (complement)")
    ax.set_title(f"alpha = {alpha}", fontsize=9)
    ax.set_xlabel("lambda")
    ax.set_ylabel("|piece|")
    ax.legend(loc="best")
    _save(fig, path)


def derivative_figure(path, lam, b, db):
    fig, ax = _new()
    ax.plot(*_positive(lam, b), "o-", ms=4, lw=1, label="|b|")
    ax.plot(*_positive(lam, db), "s-", ms=4, lw=1, label="|D_y b|")
    ax.set_xlabel("lambda")
    ax.legend(loc="best")
    _save(fig, path)


def render(path, kind, payload):
    import matplotlib

    with matplotlib.rc_context(STYLE):
        if kind == "decay":
            decay_figure(path, payload["lam"], payload["mag"], payload.get("fit"), payload.get("bound"),
                         payload.get("label", ""), payload.get("ylabel", "|b(lambda, y)|"))
        elif kind == "mu":
            mu_figure(path, payload["mu"], payload["mag"])
        elif kind == "split":
            split_figure(path, payload["lam"], payload["inner"], payload["outer"], payload["alpha"])
        elif kind == "derivative":
            derivative_figure(path, payload["lam"], payload["b"], payload["db"])
        else:
            raise ValueError(f"unknown figure kind {kind!r}")
