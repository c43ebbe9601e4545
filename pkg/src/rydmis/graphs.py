"""Unit-disk graphs, lattice-derived graph families, and exact MIS machinery.

Conventions used throughout the package:

* vertex ids are contiguous integers ``0..N-1``;
* a bitstring is a text word like ``"0110"`` whose character at index ``i``
  gives the state of vertex ``i`` (``1`` = selected / atom in Rydberg state);
* internally selections are packed into python ints with bit ``i`` = vertex
  ``i``, which is also the statevector basis-index convention (vertex 0 is
  the least-significant bit).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicatePosition,
    ExhaustedAttempts,
    LengthMismatch,
    ParseError,
    SpacingViolation,
    TooLarge,
    UnknownKind,
)

DEFAULT_MIN_SPACING_UM = 5.0
EXACT_MIS_CAP = 50

LATTICE_MAX_DEGREE = {"triangular": 6, "square": 4, "shastry_sutherland": 5}


def bitstring_to_index(bits: str) -> int:
    """Basis index of a bitstring text (vertex 0 = least-significant bit)."""
    return int(bits[::-1], 2) if bits else 0


def index_to_bitstring(index: int, n: int) -> str:
    """Inverse of :func:`bitstring_to_index`; vertex 0 rendered leftmost."""
    return format(index, f"0{n}b")[::-1]


@dataclass(frozen=True)
class LatticeOrigin:
    """Provenance of a graph sampled from a periodic trap layout."""

    kind: str
    spacing: float


@dataclass(frozen=True)
class UdGraph:
    """Unit-disk graph: vertices at 2D coordinates (µm), edges within r_b."""

    xy: np.ndarray                      # (N, 2) float array, row i = vertex i
    blockade_radius: float
    edges: frozenset = field(default_factory=frozenset)
    origin: LatticeOrigin | None = None

    @property
    def n_vertices(self) -> int:
        return len(self.xy)

    @property
    def degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    @property
    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    def neighbor_masks(self) -> list[int]:
        return neighbor_masks(self.n_vertices, self.edges)


@dataclass(frozen=True)
class ConflictGraph:
    """Abstract graph (no geometry); e.g. a GISP conflict graph."""

    n_vertices: int
    edges: frozenset

    def neighbor_masks(self) -> list[int]:
        return neighbor_masks(self.n_vertices, self.edges)


@dataclass(frozen=True)
class MisLabel:
    """Classification of a bitstring against a graph with known MIS size.

    ``category`` is one of ``"non_is"``, ``"is_k"`` or ``"mis"``; for
    ``is_k`` the ``deficit`` gives k = S_G - |selected| (>= 1).
    """

    category: str
    deficit: int = 0


def neighbor_masks(n: int, edges) -> list[int]:
    masks = [0] * n
    for i, j in edges:
        masks[i] |= 1 << j
        masks[j] |= 1 << i
    return masks


def _pairwise_distances(xy: np.ndarray) -> np.ndarray:
    diff = xy[:, None, :] - xy[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def edges_within(xy: np.ndarray, radius: float) -> frozenset:
    """All unordered pairs at Euclidean distance <= radius."""
    dist = _pairwise_distances(xy)
    n = len(xy)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= radius:
                out.add((i, j))
    return frozenset(out)


def build_unit_disk_graph(
    positions,
    blockade_radius: float,
    min_spacing: float = DEFAULT_MIN_SPACING_UM,
    origin: LatticeOrigin | None = None,
) -> UdGraph:
    """Build the UD graph of a point set: edges exactly the pairs within r_b.

    Raises ``DuplicatePosition`` for coincident points and
    ``SpacingViolation`` when any pair is closer than ``min_spacing``.
    """
    xy = np.asarray(positions, dtype=float).reshape(-1, 2)
    dist = _pairwise_distances(xy)
    n = len(xy)
    spacing_floor = min_spacing * (1.0 - 1e-9)    # tolerate rounding at the limit
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] == 0.0:
                raise DuplicatePosition(f"vertices {i} and {j} coincide")
            if dist[i, j] < spacing_floor:
                raise SpacingViolation(
                    f"vertices {i},{j} at {dist[i, j]:.3f} µm < "
                    f"minimum spacing {min_spacing} µm"
                )
    return UdGraph(
        xy=xy,
        blockade_radius=float(blockade_radius),
        edges=edges_within(xy, blockade_radius),
        origin=origin,
    )


# -- lattice layouts ----------------------------------------------------------


@dataclass(frozen=True)
class LatticeLayout:
    """Periodic trap layout from which graph families are sampled."""

    kind: str
    sites: np.ndarray            # (M, 2) µm
    spacing: float

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def max_degree(self) -> int:
        return LATTICE_MAX_DEGREE[self.kind]

    @property
    def nnn_distance(self) -> float:
        """Next-nearest-neighbour distance of the infinite lattice."""
        factor = {"triangular": math.sqrt(3), "square": math.sqrt(2),
                  "shastry_sutherland": math.sqrt(2)}[self.kind]
        return factor * self.spacing

    @property
    def default_blockade_radius(self) -> float:
        """Geometric mean of NN and NNN distances."""
        return math.sqrt(self.spacing * self.nnn_distance)

    def adjacency(self) -> frozenset:
        """Site pairs at the nearest-neighbour distance."""
        return edges_within(self.sites, self.spacing * (1 + 1e-9))


def generate_lattice(kind: str, rows: int, cols: int, spacing: float) -> LatticeLayout:
    """Generate a finite patch of a triangular, square or Shastry-Sutherland
    lattice with nearest-neighbour distance ``spacing``.

    The Shastry-Sutherland layout uses the equal-bond (snub-square) drawing:
    a checkerboard of orthogonal dimers whose diagonal bonds have the same
    length as the square-lattice bonds, which realizes the
    square-plus-alternating-diagonals topology as a unit-disk graph
    (max degree 5).
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if kind == "square":
        sites = [(c * spacing, r * spacing) for r in range(rows) for c in range(cols)]
    elif kind == "triangular":
        dy = spacing * math.sqrt(3) / 2
        sites = [
            (c * spacing + (r % 2) * spacing / 2, r * dy)
            for r in range(rows)
            for c in range(cols)
        ]
    elif kind == "shastry_sutherland":
        # dimer centers on a square grid; spacing of the grid chosen so that
        # all inter-dimer nearest-neighbour bonds equal the dimer bond length
        half = spacing / 2
        center_step = spacing * (1 + math.sqrt(3)) / 2
        sites = []
        for r in range(rows):
            for c in range(cols):
                cx, cy = c * center_step, r * center_step
                if (r + c) % 2 == 0:
                    sites += [(cx - half, cy), (cx + half, cy)]
                else:
                    sites += [(cx, cy - half), (cx, cy + half)]
    else:
        raise UnknownKind(f"unknown lattice kind {kind!r}")
    return LatticeLayout(kind=kind, sites=np.asarray(sites, dtype=float), spacing=spacing)


def _is_tree(n: int, edges) -> bool:
    return len(edges) == n - 1


def sample_family(
    layout: LatticeLayout,
    sizes,
    per_size: int,
    allow_cycles: bool = True,
    seed: int = 0,
    retry_cap: int = 10_000,
) -> list[UdGraph]:
    """Sample a family of connected UD graphs from a lattice layout.

    Each graph is grown by randomized BFS over adjacent lattice sites
    (uniform choice on the frontier), which guarantees connectivity.  With
    ``allow_cycles=False`` subsets whose induced graph contains a cycle are
    rejected and resampled, up to ``retry_cap`` attempts per graph.
    Reproducible per (seed, graph index).
    """
    sizes = list(sizes)
    for size in sizes:
        if size > layout.n_sites:
            raise ValueError(f"size {size} exceeds {layout.n_sites} lattice sites")
    site_adj = {}
    for i, j in layout.adjacency():
        site_adj.setdefault(i, set()).add(j)
        site_adj.setdefault(j, set()).add(i)
    r_b = layout.default_blockade_radius

    children = np.random.SeedSequence(seed).spawn(len(sizes) * per_size)
    graphs = []
    for g_index, size in enumerate(s for s in sizes for _ in range(per_size)):
        rng = np.random.default_rng(children[g_index])
        for _ in range(retry_cap):
            chosen = [int(rng.integers(layout.n_sites))]
            frontier = set(site_adj.get(chosen[0], ()))
            while len(chosen) < size and frontier:
                nxt = sorted(frontier)[rng.integers(len(frontier))]
                chosen.append(int(nxt))
                frontier |= site_adj.get(nxt, set())
                frontier -= set(chosen)
            if len(chosen) < size:
                continue
            g = build_unit_disk_graph(
                layout.sites[chosen],
                r_b,
                min_spacing=layout.spacing,
                origin=LatticeOrigin(layout.kind, layout.spacing),
            )
            if not allow_cycles and not _is_tree(g.n_vertices, g.edges):
                continue
            graphs.append(g)
            break
        else:
            raise ExhaustedAttempts(
                f"could not sample graph {g_index} (size {size}) in {retry_cap} tries"
            )
    return graphs


# -- independent sets ---------------------------------------------------------


def _check_length(g, bits: str):
    if len(bits) != g.n_vertices:
        raise LengthMismatch(
            f"bitstring length {len(bits)} != graph order {g.n_vertices}"
        )


def is_independent_set(g, bits: str) -> bool:
    """True iff no edge of ``g`` has both endpoints selected in ``bits``."""
    _check_length(g, bits)
    return not any(bits[i] == "1" and bits[j] == "1" for i, j in g.edges)


def _greedy_mis_mask(n: int, nbrs: list[int]) -> int:
    """Min-degree greedy independent set, as a selection mask."""
    alive = (1 << n) - 1
    picked = 0
    while alive:
        best, best_deg = -1, n + 1
        m = alive
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            deg = (nbrs[v] & alive).bit_count()
            if deg < best_deg:
                best, best_deg = v, deg
        picked |= 1 << best
        alive &= ~(nbrs[best] | (1 << best))
    return picked


def mis_greedy(g) -> str:
    """Heuristic independent set by min-degree greedy; fallback beyond the
    exact-solver cap."""
    n = g.n_vertices
    mask = _greedy_mis_mask(n, g.neighbor_masks())
    return index_to_bitstring(mask, n)


@dataclass(frozen=True)
class MisResult:
    size: int
    configurations: tuple[str, ...] | None = None   # all MIS bitstrings if asked


def mis_exact(g, enumerate_all: bool = False, cap: int = EXACT_MIS_CAP) -> MisResult:
    """Exact maximum-independent-set size by branch and bound.

    Uses a min-degree greedy solution as the initial lower bound and the
    candidate count as upper bound, branching on the max-degree candidate.
    With ``enumerate_all`` a second pruned search collects every maximum
    configuration.  Graphs larger than ``cap`` raise ``TooLarge``.
    """
    n = g.n_vertices
    if n > cap:
        raise TooLarge(f"{n} vertices exceeds exact cap {cap}")
    if n == 0:
        return MisResult(0, ("",) if enumerate_all else None)
    nbrs = g.neighbor_masks()

    best = [_greedy_mis_mask(n, nbrs).bit_count()]

    def branch(cand: int, size: int):
        if cand == 0:
            best[0] = max(best[0], size)
            return
        if size + cand.bit_count() <= best[0]:
            return
        # pivot on max-degree candidate: densest vertex first
        v, v_deg, m = -1, -1, cand
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            deg = (nbrs[u] & cand).bit_count()
            if deg > v_deg:
                v, v_deg = u, deg
        branch(cand & ~(nbrs[v] | (1 << v)), size + 1)
        branch(cand & ~(1 << v), size)

    branch((1 << n) - 1, 0)
    s_g = best[0]

    if not enumerate_all:
        return MisResult(s_g)

    found: list[int] = []

    def collect(cand: int, picked: int, size: int):
        if size == s_g:
            found.append(picked)
            return
        if size + cand.bit_count() < s_g:
            return
        v = (cand & -cand).bit_length() - 1
        collect(cand & ~(nbrs[v] | (1 << v)), picked | (1 << v), size + 1)
        collect(cand & ~(1 << v), picked, size)

    collect((1 << n) - 1, 0, 0)
    return MisResult(s_g, tuple(sorted(index_to_bitstring(m, n) for m in found)))


def classify_bitstring(g, bits: str, s_g: int) -> MisLabel:
    """Label a bitstring as non_is / is_k / mis relative to MIS size s_g."""
    _check_length(g, bits)
    if not is_independent_set(g, bits):
        return MisLabel("non_is")
    k = s_g - bits.count("1")
    if k == 0:
        return MisLabel("mis")
    return MisLabel("is_k", deficit=k)


# -- file format --------------------------------------------------------------


def save_graph(g: UdGraph, path):
    """Write the graph JSON format (positions + r_b; edges for cross-check)."""
    doc = {
        "blockade_radius_um": g.blockade_radius,
        "vertices": [
            {"id": i, "x_um": float(x), "y_um": float(y)}
            for i, (x, y) in enumerate(g.xy)
        ],
        "edges": sorted(list(e) for e in g.edges),
    }
    if g.origin is not None:
        doc["origin"] = {"kind": g.origin.kind, "spacing_um": g.origin.spacing}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_graph(path, min_spacing: float = 0.0) -> UdGraph:
    """Load a graph JSON file; edges are recomputed from positions and
    cross-checked against the optional stored edge list."""
    with open(path) as fh:
        doc = json.load(fh)
    verts = sorted(doc["vertices"], key=lambda v: v["id"])
    if [v["id"] for v in verts] != list(range(len(verts))):
        raise ParseError(f"{path}: vertex ids not contiguous 0..N-1")
    xy = [(v["x_um"], v["y_um"]) for v in verts]
    origin = None
    if "origin" in doc:
        origin = LatticeOrigin(doc["origin"]["kind"], doc["origin"]["spacing_um"])
    g = build_unit_disk_graph(
        xy, doc["blockade_radius_um"], min_spacing=min_spacing, origin=origin
    )
    if "edges" in doc:
        stored = frozenset(tuple(sorted(e)) for e in doc["edges"])
        if stored != g.edges:
            raise ParseError(
                f"{path}: stored edges disagree with recomputed unit-disk edges"
            )
    return g
