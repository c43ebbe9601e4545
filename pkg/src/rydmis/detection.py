"""Detection-error channel: tensor-product transfer matrices, forward
corruption, inverse correction, and truncated approximation-ratio curves.

Per-qubit readout errors eps = p(0->1) and eps' = p(1->0) act as the
column-stochastic matrix M = [[1-eps, eps'], [eps, 1-eps']] on the
measured distribution, independently per qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import bitstring_cost
from .distributions import Distribution
from .errors import (
    EmptyDistribution,
    OutOfRange,
    SingularModel,
    TooLargeForExact,
)

EXACT_CORRECTION_CAP = 20


def detection_matrix(eps: float, eps_prime: float) -> np.ndarray:
    """2x2 column-stochastic readout transfer matrix."""
    if not (0.0 <= eps < 1.0 and 0.0 <= eps_prime < 1.0):
        raise OutOfRange(f"error probabilities out of range: {eps}, {eps_prime}")
    return np.array([[1.0 - eps, eps_prime], [eps, 1.0 - eps_prime]])


@dataclass(frozen=True)
class DetectionModel:
    """Per-qubit detection errors; build with ``uniform`` for a global pair."""

    eps: tuple
    eps_prime: tuple

    @staticmethod
    def uniform(eps: float, eps_prime: float, n_qubits: int) -> "DetectionModel":
        detection_matrix(eps, eps_prime)       # validates the range
        return DetectionModel((eps,) * n_qubits, (eps_prime,) * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.eps)

    def matrices(self) -> list[np.ndarray]:
        return [detection_matrix(e, ep) for e, ep in zip(self.eps, self.eps_prime)]


def _apply_factors(vec: np.ndarray, mats: list[np.ndarray]) -> np.ndarray:
    """(tensor_i M_i) @ vec for a 2^N weight vector, one axis at a time."""
    n = len(mats)
    t = vec.reshape((2,) * n)
    for qubit, m in enumerate(mats):
        axis = n - 1 - qubit          # vertex 0 = last axis in C order
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def apply_detection_errors(
    dist: Distribution,
    model: DetectionModel,
    mode: str = "exact_tensor",
    seed: int = 0,
) -> Distribution:
    """Corrupt a distribution with the detection channel.

    ``exact_tensor`` multiplies the weight vector by the tensor-product
    transfer matrix (N <= 20, preserves total mass exactly); ``stochastic``
    flips each bit of each shot independently (counts mode only).
    """
    n = dist.n_qubits
    if model.n_qubits != n:
        raise ValueError("model size does not match distribution")
    if mode == "exact_tensor":
        if n > EXACT_CORRECTION_CAP:
            raise TooLargeForExact(f"{n} qubits exceeds exact cap {EXACT_CORRECTION_CAP}")
        vec = _apply_factors(dist.to_vector(), model.matrices())
        return Distribution.from_vector(vec, n, mode=dist.mode, prune=0.0)
    if mode == "stochastic":
        if dist.mode != "counts":
            raise ValueError("stochastic corruption needs a counts distribution")
        rng = np.random.default_rng(seed)
        eps = np.asarray(model.eps)
        eps_p = np.asarray(model.eps_prime)
        out: dict[str, float] = {}
        for bits, count in sorted(dist.entries.items()):
            count = int(count)
            base = np.array([b == "1" for b in bits])
            flip_prob = np.where(base, eps_p, eps)
            flips = rng.random((count, n)) < flip_prob
            for row in base ^ flips:
                key = "".join("1" if b else "0" for b in row)
                out[key] = out.get(key, 0) + 1
        return Distribution(n, out, "counts")
    raise ValueError(f"unknown mode {mode!r}")


def _project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def correct_distribution(
    dist: Distribution,
    model: DetectionModel,
    policy: str = "truncate",
) -> Distribution:
    """Invert the detection channel: apply tensor_i M_i^{-1}, then repair
    any negative entries.

    ``truncate`` clips negatives to zero and renormalizes; ``renormalize``
    projects onto the probability simplex.  Either way the output is a
    valid distribution.  A qubit with eps + eps' = 1 makes its transfer
    matrix singular.
    """
    n = dist.n_qubits
    if n > EXACT_CORRECTION_CAP:
        raise TooLargeForExact(f"{n} qubits exceeds exact cap {EXACT_CORRECTION_CAP}")
    inverses = []
    for e, ep in zip(model.eps, model.eps_prime):
        det = 1.0 - e - ep
        if abs(det) < 1e-12:
            raise SingularModel(f"eps + eps' = 1 for a qubit ({e}, {ep})")
        inverses.append(np.array([[1.0 - ep, -ep], [-e, 1.0 - e]]) / det)
    vec = _apply_factors(dist.probabilities().to_vector(), inverses)
    if policy == "truncate":
        vec = np.maximum(vec, 0.0)
        total = vec.sum()
        vec = vec / total if total > 0 else vec
    elif policy == "renormalize":
        vec = _project_to_simplex(vec)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return Distribution.from_vector(vec, n, mode="probabilities", prune=0.0)


def truncated_ratio_curve(g, dist: Distribution, s_g: int, c: float = 10.0,
                          d_grid=None) -> list[tuple[float, float]]:
    """Normalized approximation ratio restricted to the d% best bitstrings.

    Bitstrings are ranked by their individual cost (ascending); for each d
    the lowest-cost mass fraction d/100 is kept (fractionally including the
    marginal bitstring so the kept mass is exact) and the renormalized
    ratio 1 + <C>/S_G over the kept mass is reported.
    """
    if not dist.entries:
        raise EmptyDistribution("cannot truncate an empty distribution")
    if d_grid is None:
        d_grid = list(range(10, 101, 10))
    probs = dist.probabilities()
    ranked = sorted(
        ((bitstring_cost(g, bits, c), w) for bits, w in probs.entries.items()),
        key=lambda t: t[0],
    )
    costs = np.array([r[0] for r in ranked])
    masses = np.array([r[1] for r in ranked])
    cum_mass = np.concatenate([[0.0], np.cumsum(masses)])
    cum_cost = np.concatenate([[0.0], np.cumsum(costs * masses)])
    out = []
    for d in d_grid:
        if not 0.0 < d <= 100.0:
            raise ValueError(f"d must be in (0, 100], got {d}")
        target = min(d / 100.0, float(cum_mass[-1]))
        full = int(np.searchsorted(cum_mass, target, side="right")) - 1
        full = min(full, len(costs))
        kept_cost = cum_cost[full]
        if full < len(costs):
            kept_cost += (target - cum_mass[full]) * costs[full]
        mean_cost = kept_cost / target
        out.append((float(d), float(1.0 + mean_cost / s_g)))
    return out
