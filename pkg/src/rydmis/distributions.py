"""Bitstring distributions: the measurable output of the dynamics.

Entries map bitstring text (vertex 0 leftmost) to a weight; ``mode`` is
either ``"counts"`` (integers) or ``"probabilities"`` (sums to 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import bitstring_to_index, index_to_bitstring


@dataclass(frozen=True)
class Distribution:
    n_qubits: int
    entries: dict = field(default_factory=dict)
    mode: str = "counts"

    def __post_init__(self):
        if self.mode not in ("counts", "probabilities"):
            raise ValueError(f"unknown mode {self.mode!r}")
        for bits, w in self.entries.items():
            if len(bits) != self.n_qubits:
                raise ValueError(f"entry {bits!r} has wrong length")
            if w < 0:
                raise ValueError(f"negative weight for {bits!r}")

    @property
    def total(self) -> float:
        return float(sum(self.entries.values()))

    def probabilities(self) -> "Distribution":
        """Normalized copy (no-op scaling for an already-normalized one)."""
        tot = self.total
        if tot == 0:
            return Distribution(self.n_qubits, {}, "probabilities")
        return Distribution(
            self.n_qubits,
            {b: w / tot for b, w in self.entries.items()},
            "probabilities",
        )

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(2**self.n_qubits)
        for bits, w in self.entries.items():
            vec[bitstring_to_index(bits)] = w
        return vec

    @staticmethod
    def from_vector(vec, n_qubits: int, mode: str = "probabilities",
                    prune: float = 0.0) -> "Distribution":
        entries = {
            index_to_bitstring(z, n_qubits): float(w)
            for z, w in enumerate(np.asarray(vec))
            if w > prune
        }
        return Distribution(n_qubits, entries, mode)


def save_distribution_csv(dist: Distribution, path, provenance: str | None = None):
    """CSV format ``bitstring,count``; mode and provenance go into # comments."""
    with open(path, "w") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        fh.write(f"# mode={dist.mode} n_qubits={dist.n_qubits}\n")
        fh.write("bitstring,count\n")
        for bits in sorted(dist.entries):
            fh.write(f"{bits},{dist.entries[bits]!r}\n")


def load_distribution_csv(path) -> Distribution:
    entries = {}
    n = None
    mode = "counts"
    with open(path) as fh:
        rows = []
        for ln in fh:
            ln = ln.strip()
            if ln.startswith("# mode="):
                fields = dict(kv.split("=") for kv in ln[2:].split())
                mode = fields["mode"]
                n = int(fields["n_qubits"])
            elif ln and not ln.startswith("#"):
                rows.append(ln)
    if not rows or rows[0] != "bitstring,count":
        raise ValueError(f"{path}: expected header 'bitstring,count'")
    for ln in rows[1:]:
        bits, w = ln.split(",")
        entries[bits] = float(w)
        if n is None:
            n = len(bits)
    return Distribution(n or 0, entries, mode)
