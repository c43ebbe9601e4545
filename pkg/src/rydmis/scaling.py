"""Scaling analysis: cumulative MIS-k probabilities across graph sizes,
piecewise exponential decay fits, and shot-count extrapolation.

The decay model per deficit k is

    f_k(N) = 1                        for N <= b_k
           = exp(-(N - b_k) / N_k)    otherwise

fitted by an integer grid search over the breakpoint b_k with log-domain
least squares through the origin for the decay constant N_k.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution
from .errors import AllSaturated, InsufficientData, ProbabilityUnderflow
from .graphs import classify_bitstring


def cumulative_misk(g, dist: Distribution, s_g: int, k_max: int = 4):
    """Cumulative probabilities sum_{i<=k} P(MIS-i) for k = 0..k_max, plus
    the total IS and non-IS masses."""
    probs = dist.probabilities()
    per_k = np.zeros(k_max + 1)
    p_is = 0.0
    p_non = 0.0
    for bits, w in probs.entries.items():
        label = classify_bitstring(g, bits, s_g)
        if label.category == "non_is":
            p_non += w
            continue
        p_is += w
        deficit = 0 if label.category == "mis" else label.deficit
        if deficit <= k_max:
            per_k[deficit] += w
    return np.cumsum(per_k).tolist(), float(p_is), float(p_non)


@dataclass(frozen=True)
class DecayFitEntry:
    k: int
    n_k: float           # decay constant, in vertices
    b_k: int             # breakpoint, in vertices
    residual: float

    def evaluate(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return np.where(n <= self.b_k, 1.0, np.exp(-(n - self.b_k) / self.n_k))


def fit_decay(points, k: int = 0) -> DecayFitEntry:
    """Fit the piecewise exponential model to (N, cumulative probability)
    points.

    Saturated points (p = 1) always live on the flat branch; for every
    candidate breakpoint the remaining log-probabilities are fitted through
    the origin, and the breakpoint with the smallest total squared residual
    (flat-branch misfit included) wins.
    """
    pts = [(float(n), float(p)) for n, p in points if 0.0 < p <= 1.0]
    if len(pts) < 3:
        raise InsufficientData(f"need >= 3 points with p in (0, 1], got {len(pts)}")
    ns = np.array([p[0] for p in pts])
    ps = np.array([p[1] for p in pts])
    if np.all(ps == 1.0):
        raise AllSaturated("all probabilities are 1; no decay to fit")
    logs = np.log(ps)

    # grid search over integer breakpoints, vectorized with prefix/suffix
    # sums over the points sorted by N (saturated points always contribute
    # zero, on either branch)
    order = np.argsort(ns, kind="stable")
    ns_s = ns[order]
    logs_s = logs[order]
    live = ps[order] < 1.0
    w = live.astype(float)
    suf = lambda a: np.concatenate([np.cumsum((a * w)[::-1])[::-1], [0.0]])
    suf_1 = suf(np.ones_like(ns_s))
    suf_n = suf(ns_s)
    suf_nn = suf(ns_s * ns_s)
    suf_y = suf(logs_s)
    suf_ny = suf(ns_s * logs_s)
    suf_yy = suf(logs_s * logs_s)
    pre_yy = np.concatenate([[0.0], np.cumsum(logs_s**2 * w)])

    bs = np.arange(0, int(ns_s.max()) + 1)
    cut = np.searchsorted(ns_s, bs, side="right")
    count = suf_1[cut]
    sxx = suf_nn[cut] - 2 * bs * suf_n[cut] + bs**2 * suf_1[cut]
    sxy = suf_ny[cut] - bs * suf_y[cut]
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(sxx > 0, sxy / np.where(sxx > 0, sxx, 1.0), 0.0)
    resid = (suf_yy[cut] - slope**2 * sxx) + pre_yy[cut]
    valid = (count > 0) & (slope < 0.0)
    if not valid.any():
        raise InsufficientData("no breakpoint admits a decaying fit")
    resid = np.where(valid, resid, np.inf)
    b = int(bs[np.argmin(resid)])
    s = float(slope[b - bs[0]])
    # recompute the winning residual directly (the suffix-sum form loses
    # precision to cancellation when the fit is near perfect)
    decay = live & (ns_s > b)
    flat = live & ~decay
    exact_resid = float(((logs_s[decay] - s * (ns_s[decay] - b)) ** 2).sum()) + float(
        (logs_s[flat] ** 2).sum()
    )
    return DecayFitEntry(k=k, n_k=-1.0 / s, b_k=b, residual=exact_resid)


def extrapolate_shots(fit: DecayFitEntry, n_vertices: int, target: float) -> int:
    """Shots needed to observe at least one MIS-k (or better) configuration
    with probability ``target``: ceil(log(1-F) / log(1-p)) at
    p = exp(-(N-b_k)/N_k)."""
    if not 0.0 < target < 1.0:
        raise ValueError(f"target probability must be in (0, 1), got {target}")
    if n_vertices <= fit.b_k:
        return 1     # still on the flat branch: every shot succeeds
    p = math.exp(-(n_vertices - fit.b_k) / fit.n_k)
    if p < 1e-300:
        raise ProbabilityUnderflow(f"success probability underflows at N={n_vertices}")
    return int(math.ceil(math.log(1.0 - target) / math.log(1.0 - p)))


def save_fit_report(fits: list[DecayFitEntry], path):
    doc = [
        {"k": f.k, "N_k": f.n_k, "b_k": f.b_k, "residual": f.residual}
        for f in fits
    ]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def export_scaling_csv(rows, fits: list[DecayFitEntry], path):
    """Scaling-curve CSV ``N,k,cum_prob,fit`` from (N, k, cum_prob) rows."""
    by_k = {f.k: f for f in fits}
    with open(path, "w") as fh:
        fh.write("N,k,cum_prob,fit\n")
        for n, k, p in rows:
            fitted = float(by_k[k].evaluate(n)) if k in by_k else float("nan")
            fh.write(f"{n},{k},{p!r},{fitted!r}\n")
