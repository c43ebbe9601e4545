"""Cost functions mapping measured distributions to scalars to minimize.

Two figures of merit: the flipped MIS proportion 1 - P(MIS), and the
normalized approximation ratio built from the classical cost operator
<z|C|z> = -|selected(z)| + c * (violated edges), reported as 1 + <C>/S_G
so that 0 means a purely-MIS distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

from .distributions import Distribution
from .errors import MissingMisSize
from .graphs import classify_bitstring

DEFAULT_PENALTY = 10.0


@dataclass(frozen=True)
class CostSpec:
    """Which cost to evaluate; ``penalty`` is the c >> 1 edge weight."""

    kind: str = "one_minus_pmis"          # or "approx_ratio"
    penalty: float = DEFAULT_PENALTY

    def __post_init__(self):
        if self.kind not in ("one_minus_pmis", "approx_ratio"):
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if self.penalty <= 1:
            raise ValueError("penalty must exceed 1 to preserve the MIS ground state")


def violated_edges(g, bits: str) -> int:
    return sum(1 for i, j in g.edges if bits[i] == "1" and bits[j] == "1")


def bitstring_cost(g, bits: str, c: float = DEFAULT_PENALTY) -> float:
    """Classical cost <z|C|z> of a single configuration."""
    return -float(bits.count("1")) + c * violated_edges(g, bits)


def cost_pmis(g, dist: Distribution, s_g: int | None) -> float:
    """1 - P(MIS) of a distribution, in [0, 1]."""
    if s_g is None:
        raise MissingMisSize("MIS size required to identify MIS configurations")
    probs = dist.probabilities()
    p_mis = sum(
        w for bits, w in probs.entries.items()
        if classify_bitstring(g, bits, s_g).category == "mis"
    )
    return float(min(max(1.0 - p_mis, 0.0), 1.0))


def cost_ratio(g, dist: Distribution, s_g: int | None,
               c: float = DEFAULT_PENALTY) -> float:
    """Normalized approximation ratio 1 + <C>/S_G; 0 iff purely MIS."""
    if s_g is None:
        raise MissingMisSize("MIS size required to normalize the ratio")
    probs = dist.probabilities()
    mean_cost = sum(w * bitstring_cost(g, bits, c) for bits, w in probs.entries.items())
    return float(1.0 + mean_cost / s_g)


def evaluate_cost(spec: CostSpec, g, dist: Distribution, s_g: int) -> float:
    if spec.kind == "one_minus_pmis":
        return cost_pmis(g, dist, s_g)
    return cost_ratio(g, dist, s_g, spec.penalty)
