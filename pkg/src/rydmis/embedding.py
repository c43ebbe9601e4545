"""Embedding graphs into atomic registers.

Lattice-sampled graphs embed by identity (their sites are the register);
abstract graphs go through force-directed (Fruchterman-Reingold) layout.
Embedding quality is judged by decomposing the interaction operator into
the edge term, the edge-distance residual, and the interaction tail over
non-edges, plus the worst-case distance ratio between non-edges and edges.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidOrdering, MissingProvenance, NonConvergence
from .graphs import LatticeOrigin, UdGraph, _pairwise_distances
from .params import RydbergParams

RATIO_ACCEPT_THRESHOLD = 1.1   # margin over the exact blockade boundary


@dataclass(frozen=True)
class Register:
    """Atom positions (µm) indexed by vertex id."""

    positions: np.ndarray                    # (N, 2)
    layout_origin: LatticeOrigin | None = None

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    def min_distance(self) -> float:
        d = _pairwise_distances(self.positions)
        n = len(d)
        if n < 2:
            return math.inf
        return float(d[np.triu_indices(n, k=1)].min())


@dataclass(frozen=True)
class EmbeddingReport:
    """Residual decomposition of an embedding against a target graph."""

    edge_residual: float      # sum over edges of U(r_ij) - U(r_b)
    tail_residual: float      # sum over non-edges of U(r_ij)
    ratio_worst: float        # min non-edge distance / max edge distance
    hazards: tuple            # non-edge pairs with U(r_ij) >= U(r_b)/8

    def accepted(self, threshold: float = RATIO_ACCEPT_THRESHOLD) -> bool:
        return self.ratio_worst > threshold


def blockade_radius(r_nn: float, r_nnn: float) -> float:
    """Blockade radius between the NN and NNN distances: sqrt(r_nn * r_nnn)."""
    if not 0 < r_nn <= r_nnn:
        raise InvalidOrdering(f"need 0 < r_nn <= r_nnn, got {r_nn}, {r_nnn}")
    if r_nn == r_nnn:
        warnings.warn("r_nn == r_nnn: degenerate blockade radius", stacklevel=2)
    return math.sqrt(r_nn * r_nnn)


def embed_on_lattice(g: UdGraph) -> Register:
    """Identity embedding of a lattice-sampled graph onto its own sites."""
    if g.origin is None:
        raise MissingProvenance("graph does not carry a lattice origin")
    return Register(positions=np.array(g.xy, dtype=float), layout_origin=g.origin)


def embed_force_directed(
    adjacency,
    target_nn: float,
    iterations: int = 500,
    seed: int = 0,
    residual_tol: float = 0.25,
) -> Register:
    """Fruchterman-Reingold layout rescaled so the median edge length equals
    ``target_nn``.

    Standard spring model: repulsive force k^2/d between all pairs,
    attractive d^2/k along edges, displacement capped by a linearly cooled
    temperature, followed by a short fixed-step polish.  Raises
    ``NonConvergence`` when the final net force (in units of k) exceeds
    ``residual_tol``.
    """
    n = adjacency.n_vertices
    rng = np.random.default_rng(seed)
    if n == 1:
        return Register(positions=np.zeros((1, 2)))
    edges = list(adjacency.edges)
    pos = rng.uniform(-0.5, 0.5, size=(n, 2))
    k = math.sqrt(1.0 / n)   # optimal distance for unit layout area

    def net_forces(p):
        diff = p[:, None, :] - p[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=-1))
        np.fill_diagonal(dist, 1.0)
        rep = (k**2 / dist**2)[:, :, None] * diff / dist[:, :, None]
        np.einsum("iik->ik", rep)[:] = 0.0
        force = rep.sum(axis=1)
        for i, j in edges:
            d = p[i] - p[j]
            r = max(np.hypot(*d), 1e-12)
            pull = (r / k) * d
            force[i] -= pull
            force[j] += pull
        return force

    temp = 0.1
    for it in range(iterations):
        force = net_forces(pos)
        norm = np.maximum(np.sqrt((force**2).sum(axis=1)), 1e-12)
        step = np.minimum(norm, temp * (1.0 - it / iterations) + 1e-4)
        pos += force / norm[:, None] * step[:, None]
    for _ in range(200):   # polish at a small fixed step
        force = net_forces(pos)
        norm = np.maximum(np.sqrt((force**2).sum(axis=1)), 1e-12)
        pos += force / norm[:, None] * np.minimum(norm, 0.005 * k)[:, None]

    residual = float(np.sqrt((net_forces(pos) ** 2).sum(axis=1)).max()) / k
    if residual > residual_tol:
        raise NonConvergence(
            f"net force {residual:.3f}k above tolerance {residual_tol}k "
            f"after {iterations} iterations"
        )

    if edges:
        lengths = [np.hypot(*(pos[i] - pos[j])) for i, j in edges]
        pos *= target_nn / np.median(lengths)
    pos -= pos.mean(axis=0)
    return Register(positions=pos)


def validate_embedding(
    g, reg: Register, r_b: float, params: RydbergParams = RydbergParams()
) -> EmbeddingReport:
    """Residual decomposition of the interaction operator for a register.

    ``edge_residual`` collects the edge-distance deviations from U(r_b),
    ``tail_residual`` the spurious interactions over non-edges, and any
    non-edge with interaction >= U(r_b)/8 is flagged as a hazard (the
    square-lattice diagonal situation).
    """
    dist = _pairwise_distances(reg.positions)
    n = reg.n_atoms
    u_b = params.interaction(r_b)
    edge_res = 0.0
    tail = 0.0
    hazards = []
    max_edge = 0.0
    min_nonedge = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            u_ij = params.interaction(dist[i, j])
            if (i, j) in g.edges or (j, i) in g.edges:
                edge_res += u_ij - u_b
                max_edge = max(max_edge, dist[i, j])
            else:
                tail += u_ij
                min_nonedge = min(min_nonedge, dist[i, j])
                if u_ij >= u_b / 8.0:
                    hazards.append((i, j))
    ratio = min_nonedge / max_edge if max_edge > 0 else math.inf
    return EmbeddingReport(
        edge_residual=edge_res,
        tail_residual=tail,
        ratio_worst=ratio,
        hazards=tuple(hazards),
    )


def save_register(reg: Register, path):
    doc = {"positions_um": [[float(x), float(y)] for x, y in reg.positions]}
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_register(path) -> Register:
    with open(path) as fh:
        doc = json.load(fh)
    return Register(positions=np.asarray(doc["positions_um"], dtype=float))
