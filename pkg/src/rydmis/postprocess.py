"""Classical refinement of sampled bitstrings.

Constraint violations are repaired by greedily deselecting the vertex with
the most violated edges until an independent set remains; independent sets
are then extended by exploring all additions of at most ``depth`` vertices
and keeping the largest result, repeated until no depth-limited addition
improves the set (so processed outputs are stable under reprocessing).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Distribution
from .errors import LengthMismatch, NotAnIndependentSet
from .graphs import index_to_bitstring, is_independent_set

MAX_DEPTH = 3     # exploration cost grows as C(n, k)


def repair_to_is(g, bits: str, seed: int = 0) -> str:
    """Deselect max-violated-degree vertices (ties broken by seed) until the
    selection is an independent set; never selects new vertices."""
    if len(bits) != g.n_vertices:
        raise LengthMismatch(f"bitstring length {len(bits)} != {g.n_vertices}")
    rng = np.random.default_rng(seed)
    selected = {i for i, b in enumerate(bits) if b == "1"}
    adj = {i: set() for i in range(g.n_vertices)}
    for i, j in g.edges:
        adj[i].add(j)
        adj[j].add(i)
    while True:
        violated = {v: len(adj[v] & selected) for v in selected if adj[v] & selected}
        if not violated:
            break
        worst = max(violated.values())
        pool = sorted(v for v, d in violated.items() if d == worst)
        selected.remove(pool[rng.integers(len(pool))])
    return "".join("1" if i in selected else "0" for i in range(g.n_vertices))


def extend_greedy_depth_k(g, bits: str, k: int, max_depth: int = MAX_DEPTH) -> set[str]:
    """All independent sets of maximum achievable size obtained by adding at
    most ``k`` vertices to an input independent set."""
    if k > max_depth:
        raise ValueError(f"depth {k} exceeds cap {max_depth}")
    if not is_independent_set(g, bits):
        raise NotAnIndependentSet(f"{bits} has violated edges")
    n = g.n_vertices
    nbrs = g.neighbor_masks()
    base = sum(1 << i for i, b in enumerate(bits) if b == "1")

    def addable(mask: int) -> list[int]:
        out = []
        for v in range(n):
            if not (mask >> v) & 1 and not (nbrs[v] & mask):
                out.append(v)
        return out

    frontier = {base}
    best_size = base.bit_count()
    best = {base}
    for _ in range(k):
        nxt = set()
        for mask in frontier:
            for v in addable(mask):
                nxt.add(mask | (1 << v))
        if not nxt:
            break
        frontier = nxt
        size = max(m.bit_count() for m in frontier)
        if size > best_size:
            best_size = size
            best = {m for m in frontier if m.bit_count() == size}
    return {index_to_bitstring(m, n) for m in best}


@dataclass(frozen=True)
class PostprocessStats:
    avg_removed: float
    avg_added: float


def postprocess_distribution(
    g,
    dist: Distribution,
    k: int,
    s_g: int | None = None,
    seed: int = 0,
    keep_all: bool = False,
    until_stable: bool = False,
) -> tuple[Distribution, PostprocessStats]:
    """Repair-and-extend every bitstring of a distribution.

    Each bitstring is repaired to an independent set, then extended by at
    most ``k`` vertices, replacing it with one uniformly chosen maximum
    extension (with ``keep_all`` the mass is split over all of them).
    ``until_stable`` re-applies the depth-``k`` extension until no further
    improvement exists, making the whole transform idempotent at the price
    of possibly adding more than ``k`` vertices overall.  Stats report the
    mass-weighted mean number of removed and added vertices.
    """
    rng = np.random.default_rng(seed)
    out: dict[str, float] = {}
    removed = added = total = 0.0
    for bits in sorted(dist.entries):
        w = dist.entries[bits]
        repaired = bits if is_independent_set(g, bits) else repair_to_is(
            g, bits, seed=int(rng.integers(2**31))
        )
        removed += w * (bits.count("1") - repaired.count("1"))
        if keep_all:
            if until_stable:
                finals = _all_stable_extensions(g, repaired, k)
            else:
                finals = extend_greedy_depth_k(g, repaired, k)
            share = w / len(finals)
            for o in sorted(finals):
                added += share * (o.count("1") - repaired.count("1"))
                out[o] = out.get(o, 0.0) + share
        else:
            current = repaired
            while True:
                options = sorted(extend_greedy_depth_k(g, current, k))
                grown = options[0].count("1") > current.count("1")
                if grown:
                    current = options[int(rng.integers(len(options)))]
                if not (grown and until_stable):
                    break
            added += w * (current.count("1") - repaired.count("1"))
            out[current] = out.get(current, 0.0) + w
        total += w
    stats = PostprocessStats(
        avg_removed=removed / total if total else 0.0,
        avg_added=added / total if total else 0.0,
    )
    return Distribution(dist.n_qubits, out, dist.mode), stats


def _all_stable_extensions(g, bits: str, k: int) -> set[str]:
    """Every bitstring reachable by repeated depth-k maximum extension."""
    frontier = {bits}
    stable: set[str] = set()
    while frontier:
        nxt: set[str] = set()
        for b in frontier:
            options = extend_greedy_depth_k(g, b, k)
            if max(o.count("1") for o in options) == b.count("1"):
                stable.add(b)
            else:
                nxt |= options
        frontier = nxt - stable
    return stable
