"""Training, transfer, and robustness studies of annealing protocols.

A protocol spec maps a flat optimizer vector to a Schedule; a family
objective evaluates a schedule over every graph of a family and reduces
the per-graph costs to the trained scalar (mean + weighted standard
deviation, the spread term favouring uniformly good protocols).  Training
runs the Bayesian loop over the spec's box; the trained parameters can
then be applied unchanged to unseen graphs, scanned over two-parameter
landscapes, or stress-tested against miscalibration and stretching.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .bayesopt import Budget, GpConfig, OptimizerState, SearchSpace, optimize_loop
from .costs import CostSpec, DEFAULT_PENALTY
from .detection import DetectionModel, apply_detection_errors
from .distributions import Distribution
from .embedding import Register, embed_on_lattice
from .emulator import blockade_energy_scale, evolve, evolve_noisy, sample
from .graphs import UdGraph, bitstring_to_index, mis_exact
from .params import NoiseParams, RydbergParams, TWO_PI
from .schedules import (
    FieldLimits,
    QaoaParams,
    Schedule,
    VqaaParams,
    miscalibrate,
    qaoa_schedule,
    stretch_duration,
    vqaa_schedule,
)


# -- protocol parametrizations -------------------------------------------------


@dataclass(frozen=True)
class VqaaSpec:
    """(2m+3)-dimensional knot parametrization: duration, m Rabi knots,
    m+2 detuning knots."""

    m: int = 3
    t_range: tuple = (0.5, 4.0)
    omega_range: tuple = (0.0, TWO_PI * 2.0)
    delta_range: tuple = (-TWO_PI * 10.0, TWO_PI * 10.0)

    @property
    def kind(self) -> str:
        return "vqaa"

    def space(self) -> SearchSpace:
        dims = [("T", *self.t_range)]
        dims += [(f"omega_{i+1}", *self.omega_range) for i in range(self.m)]
        dims += [(f"delta_{i+1}", *self.delta_range) for i in range(self.m + 2)]
        return SearchSpace(tuple(dims))

    def limits(self) -> FieldLimits:
        return FieldLimits(
            omega_max=self.omega_range[1],
            delta_max_abs=max(abs(self.delta_range[0]), abs(self.delta_range[1])),
            t_min=self.t_range[0],
            t_max=self.t_range[1],
        )

    def decode(self, theta) -> Schedule:
        return vqaa_schedule(VqaaParams.from_vector(theta), self.limits())

    def descriptor(self) -> dict:
        return {
            "kind": "vqaa",
            "m": self.m,
            "t_range": list(self.t_range),
            "omega_range": list(self.omega_range),
            "delta_range": list(self.delta_range),
        }


@dataclass(frozen=True)
class QaoaSpec:
    """Layer durations of a depth-p sequence; tied mode exposes only the
    depth-1 (t_cost, t_mix) pair, applied to every layer."""

    depth: int = 1
    omega_mix: float = TWO_PI * 2.0
    delta_cost: float = -TWO_PI * 4.0
    t_range: tuple = (0.02, 0.3)
    tied: bool = True
    init_pulse: bool = True

    @property
    def kind(self) -> str:
        return "qaoa"

    def space(self) -> SearchSpace:
        if self.tied:
            return SearchSpace((("t_cost", *self.t_range), ("t_mix", *self.t_range)))
        dims = []
        for j in range(self.depth):
            dims.append((f"t_cost_{j+1}", *self.t_range))
            dims.append((f"t_mix_{j+1}", *self.t_range))
        return SearchSpace(tuple(dims))

    def decode(self, theta) -> Schedule:
        theta = list(theta)
        if self.tied:
            q = QaoaParams.tied(
                self.depth, theta[0], theta[1],
                omega_mix=self.omega_mix, delta_cost=self.delta_cost,
                init_pulse=self.init_pulse,
            )
        else:
            q = QaoaParams(
                t_cost=tuple(theta[0::2]), t_mix=tuple(theta[1::2]),
                omega_mix=self.omega_mix, delta_cost=self.delta_cost,
                init_pulse=self.init_pulse,
            )
        return qaoa_schedule(q)

    def descriptor(self) -> dict:
        return {
            "kind": "qaoa",
            "depth": self.depth,
            "omega_mix": self.omega_mix,
            "delta_cost": self.delta_cost,
            "t_range": list(self.t_range),
            "tied": self.tied,
            "init_pulse": self.init_pulse,
        }


@dataclass(frozen=True)
class TailDetuningSpec:
    """Standard annealing ramp with only the last two detuning knots free:
    the two-parameter protocol of the landscape studies."""

    duration: float
    omega_knots: tuple
    delta_prefix: tuple          # fixed first m knot values
    bounds: tuple                # (lo, hi) shared by both free knots

    @property
    def kind(self) -> str:
        return "vqaa_tail"

    def space(self) -> SearchSpace:
        return SearchSpace(
            (("delta_tail_1", *self.bounds), ("delta_tail_2", *self.bounds))
        )

    def limits(self) -> FieldLimits:
        vals = [abs(v) for v in self.delta_prefix] + [abs(b) for b in self.bounds]
        return FieldLimits(
            omega_max=max(self.omega_knots) if self.omega_knots else TWO_PI * 2.0,
            delta_max_abs=max(vals),
        )

    def decode(self, theta) -> Schedule:
        p = VqaaParams(
            duration=self.duration,
            omega_knots=self.omega_knots,
            delta_knots=(*self.delta_prefix, float(theta[0]), float(theta[1])),
        )
        return vqaa_schedule(p, self.limits())

    def descriptor(self) -> dict:
        return {
            "kind": "vqaa_tail",
            "duration": self.duration,
            "omega_knots": list(self.omega_knots),
            "delta_prefix": list(self.delta_prefix),
            "bounds": list(self.bounds),
        }


def spec_from_descriptor(doc: dict):
    kind = doc["kind"]
    if kind == "vqaa":
        return VqaaSpec(
            m=doc["m"],
            t_range=tuple(doc["t_range"]),
            omega_range=tuple(doc["omega_range"]),
            delta_range=tuple(doc["delta_range"]),
        )
    if kind == "qaoa":
        return QaoaSpec(
            depth=doc["depth"],
            omega_mix=doc["omega_mix"],
            delta_cost=doc["delta_cost"],
            t_range=tuple(doc["t_range"]),
            tied=doc["tied"],
            init_pulse=doc["init_pulse"],
        )
    if kind == "vqaa_tail":
        return TailDetuningSpec(
            duration=doc["duration"],
            omega_knots=tuple(doc["omega_knots"]),
            delta_prefix=tuple(doc["delta_prefix"]),
            bounds=tuple(doc["bounds"]),
        )
    raise ValueError(f"unknown spec kind {kind!r}")


def tail_detuning_spec_for(
    registers,
    duration: float = 4.0,
    m: int = 3,
    params: RydbergParams = RydbergParams(),
) -> TailDetuningSpec:
    """Two-parameter ramp whose free tail sweeps [0, U] with U taken from
    the family's blockade scale; the fixed part ramps the detuning up from
    deep in the trivial phase under a flat Rabi drive."""
    u = min(blockade_energy_scale(r, params) for r in registers)
    omega = min(params.omega_max, 1.0 * u)
    prefix = tuple(np.linspace(-0.7 * u, 0.0, m))
    return TailDetuningSpec(
        duration=duration,
        omega_knots=(omega,) * m,
        delta_prefix=prefix,
        bounds=(0.0, u),
    )


# -- per-graph static data and exact costs -------------------------------------


@dataclass(frozen=True)
class GraphStatics:
    """MIS data and cost vectors of one graph, cached for reuse."""

    s_g: int
    mis_indices: np.ndarray       # basis indices of the MIS configurations
    popcounts: np.ndarray
    violations: np.ndarray        # violated-edge count per basis state

    @staticmethod
    def of(g) -> "GraphStatics":
        n = g.n_vertices
        res = mis_exact(g, enumerate_all=True)
        mis_idx = np.array(
            sorted(bitstring_to_index(b) for b in res.configurations), dtype=np.int64
        )
        z = np.arange(2**n, dtype=np.uint64)
        pop = np.zeros(2**n, dtype=np.int64)
        for i in range(n):
            pop += ((z >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
        viol = np.zeros(2**n, dtype=np.int64)
        for i, j in g.edges:
            viol += (
                ((z >> np.uint64(i)) & np.uint64(1)) & ((z >> np.uint64(j)) & np.uint64(1))
            ).astype(np.int64)
        return GraphStatics(res.size, mis_idx, pop, viol)

    def pmis_of(self, probs: np.ndarray) -> float:
        return float(probs[self.mis_indices].sum())

    def cost_of(self, probs: np.ndarray, spec: CostSpec) -> float:
        if spec.kind == "one_minus_pmis":
            return 1.0 - self.pmis_of(probs)
        mean_c = float(
            (probs * (-self.popcounts + spec.penalty * self.violations)).sum()
        )
        return 1.0 + mean_c / self.s_g


def _distribution_probs(dist: Distribution) -> np.ndarray:
    return dist.probabilities().to_vector()


def _eval_graph_cost(
    g: UdGraph,
    reg: Register,
    statics: GraphStatics,
    schedule: Schedule,
    cost: CostSpec,
    shots: int,
    seed: int,
    params: RydbergParams,
    noise: NoiseParams | None,
    n_trajectories: int,
) -> float:
    probs = _final_probabilities(
        g, reg, schedule, shots, seed, params, noise, n_trajectories
    )
    return statics.cost_of(probs, cost)


def _final_probabilities(
    g, reg, schedule, shots, seed, params, noise, n_trajectories
) -> np.ndarray:
    if noise is None:
        state = evolve(reg, schedule, params=params)
        probs = state.probabilities()
        if shots:
            counts = sample(state, shots, seed=seed)
            probs = _distribution_probs(counts)
        return probs
    dist = evolve_noisy(
        reg, schedule, noise=noise, n_trajectories=n_trajectories,
        seed=seed, params=params,
    )
    if noise.eps or noise.eps_prime:
        model = DetectionModel.uniform(noise.eps, noise.eps_prime, g.n_vertices)
        dist = apply_detection_errors(dist, model, mode="exact_tensor")
    probs = _distribution_probs(dist)
    if shots:
        rng = np.random.default_rng(seed)
        counts = rng.multinomial(shots, probs / probs.sum()).astype(float)
        probs = counts / counts.sum()
    return probs


@dataclass
class FamilyObjective:
    """Callable objective over a graph family: theta -> trained scalar."""

    graphs: list
    registers: list
    spec: object                               # protocol spec with decode()
    cost: CostSpec = field(default_factory=CostSpec)
    std_weight: float = 1.0
    shots: int = 0                             # 0 = exact expectations
    params: RydbergParams = field(default_factory=RydbergParams)
    noise: NoiseParams | None = None
    n_trajectories: int = 500
    seed: int = 0
    n_jobs: int = 1
    statics: list = None

    def __post_init__(self):
        if self.std_weight < 0:
            raise ValueError("std weight must be non-negative")
        if self.statics is None:
            self.statics = [GraphStatics.of(g) for g in self.graphs]

    def __call__(self, theta) -> float:
        return self.evaluate(theta)[0]

    def evaluate(self, theta) -> tuple[float, list[float]]:
        return family_cost(self, theta)


def aggregate_family_costs(breakdown, std_weight: float) -> float:
    """Mean plus weighted population standard deviation of per-graph costs."""
    return float(np.mean(breakdown)) + std_weight * float(np.std(breakdown))


def family_cost(obj: FamilyObjective, theta) -> tuple[float, list[float]]:
    """Family scalar (mean + weighted spread) of a parameter vector, with
    the per-graph breakdown retained for logging."""
    schedule = obj.spec.decode(theta)
    seeds = [obj.seed + 7919 * i for i in range(len(obj.graphs))]
    args = [
        (g, r, s, schedule, obj.cost, obj.shots, sd, obj.params, obj.noise,
         obj.n_trajectories)
        for g, r, s, sd in zip(obj.graphs, obj.registers, obj.statics, seeds)
    ]
    if obj.n_jobs == 1:
        breakdown = [_eval_graph_cost(*a) for a in args]
    else:
        breakdown = Parallel(n_jobs=obj.n_jobs)(
            delayed(_eval_graph_cost)(*a) for a in args
        )
    return aggregate_family_costs(breakdown, obj.std_weight), list(breakdown)


# -- training and transfer -----------------------------------------------------


@dataclass(frozen=True)
class FamilyFingerprint:
    layout_kind: str | None
    spacing: float | None
    sizes: tuple


def family_fingerprint(graphs) -> FamilyFingerprint:
    kinds = {g.origin.kind for g in graphs if g.origin is not None}
    spacings = {g.origin.spacing for g in graphs if g.origin is not None}
    return FamilyFingerprint(
        layout_kind=kinds.pop() if len(kinds) == 1 else None,
        spacing=spacings.pop() if len(spacings) == 1 else None,
        sizes=tuple(sorted(g.n_vertices for g in graphs)),
    )


@dataclass(frozen=True)
class TrainedProtocol:
    theta: tuple
    spec_descriptor: dict
    fingerprint: FamilyFingerprint
    cost: float
    per_graph_costs: tuple = ()

    def spec(self):
        return spec_from_descriptor(self.spec_descriptor)

    def schedule(self) -> Schedule:
        return self.spec().decode(self.theta)


def registers_for(graphs) -> list[Register]:
    """Identity embedding for lattice-sampled graphs, raw positions
    otherwise."""
    regs = []
    for g in graphs:
        if g.origin is not None:
            regs.append(embed_on_lattice(g))
        else:
            regs.append(Register(positions=np.array(g.xy, dtype=float)))
    return regs


def train_transferable(
    graphs,
    spec,
    budget: Budget,
    seed: int = 0,
    cost: CostSpec = CostSpec(),
    std_weight: float = 1.0,
    shots: int = 0,
    params: RydbergParams = RydbergParams(),
    gp_config: GpConfig | None = None,
    n_jobs: int = 1,
    callback=None,
) -> tuple[TrainedProtocol, OptimizerState]:
    """Optimize one protocol over a whole family and return it with the
    full optimizer history."""
    if not graphs:
        raise ValueError("family is empty")
    registers = registers_for(graphs)
    objective = FamilyObjective(
        graphs=list(graphs), registers=registers, spec=spec, cost=cost,
        std_weight=std_weight, shots=shots, params=params, seed=seed,
        n_jobs=n_jobs,
    )
    state = optimize_loop(objective, spec.space(), budget, seed=seed,
                          config=gp_config, callback=callback)
    theta, best_cost = state.best_so_far
    _, breakdown = objective.evaluate(theta)
    protocol = TrainedProtocol(
        theta=tuple(theta),
        spec_descriptor=spec.descriptor(),
        fingerprint=family_fingerprint(graphs),
        cost=float(best_cost),
        per_graph_costs=tuple(breakdown),
    )
    return protocol, state


@dataclass(frozen=True)
class TransferReport:
    p_mis: tuple                 # per graph
    ratio: tuple                 # per graph
    mean_pmis: float
    std_pmis: float
    min_pmis: float


def evaluate_transfer(
    protocol: TrainedProtocol,
    graphs,
    noise: NoiseParams | None = None,
    shots: int = 0,
    seed: int = 0,
    params: RydbergParams = RydbergParams(),
    penalty: float = DEFAULT_PENALTY,
    n_trajectories: int = 500,
) -> TransferReport:
    """Apply a trained protocol unchanged to a set of graphs.

    Emits a warning when the test graphs' layout kind differs from the
    protocol's training fingerprint, and evaluates anyway.
    """
    fp = family_fingerprint(graphs)
    if (
        protocol.fingerprint.layout_kind is not None
        and fp.layout_kind is not None
        and fp.layout_kind != protocol.fingerprint.layout_kind
    ):
        warnings.warn(
            f"testing on {fp.layout_kind} graphs with a protocol trained on "
            f"{protocol.fingerprint.layout_kind}; transfer may degrade",
            stacklevel=2,
        )
    schedule = protocol.schedule()
    registers = registers_for(graphs)
    p_list, r_list = [], []
    for i, (g, reg) in enumerate(zip(graphs, registers)):
        statics = GraphStatics.of(g)
        probs = _final_probabilities(
            g, reg, schedule, shots, seed + 13 * i, params, noise, n_trajectories
        )
        p_list.append(statics.pmis_of(probs))
        r_list.append(statics.cost_of(probs, CostSpec("approx_ratio", penalty)))
    return TransferReport(
        p_mis=tuple(p_list),
        ratio=tuple(r_list),
        mean_pmis=float(np.mean(p_list)),
        std_pmis=float(np.std(p_list)),
        min_pmis=float(np.min(p_list)),
    )


def export_histogram_csv(report: TransferReport, path):
    with open(path, "w") as fh:
        fh.write("graph_id,p_mis\n")
        for i, p in enumerate(report.p_mis):
            fh.write(f"{i},{p!r}\n")


# -- landscapes and robustness --------------------------------------------------


@dataclass(frozen=True)
class LandscapeResult:
    x_values: np.ndarray
    y_values: np.ndarray
    averaged: np.ndarray          # (nx, ny) family-averaged cost
    per_graph_argmin: list        # [(x*, y*), ...] one per graph
    names: tuple


def landscape_scan(
    graphs,
    spec,
    x_values,
    y_values,
    cost: CostSpec = CostSpec("approx_ratio"),
    params: RydbergParams = RydbergParams(),
    n_jobs: int = 1,
) -> LandscapeResult:
    """Family-averaged cost over a two-parameter protocol grid, plus the
    per-graph global-minimum locations."""
    space = spec.space()
    if space.n_dims != 2:
        raise ValueError("landscape scans need exactly two free parameters")
    registers = registers_for(graphs)
    statics = [GraphStatics.of(g) for g in graphs]
    x_values = np.asarray(x_values, dtype=float)
    y_values = np.asarray(y_values, dtype=float)

    def scan_graph(g, reg, st):
        mat = np.zeros((len(x_values), len(y_values)))
        for a, x in enumerate(x_values):
            for b, y in enumerate(y_values):
                schedule = spec.decode([x, y])
                state = evolve(reg, schedule, params=params)
                mat[a, b] = st.cost_of(state.probabilities(), cost)
        return mat

    if n_jobs == 1:
        mats = [scan_graph(g, r, s) for g, r, s in zip(graphs, registers, statics)]
    else:
        mats = Parallel(n_jobs=n_jobs)(
            delayed(scan_graph)(g, r, s)
            for g, r, s in zip(graphs, registers, statics)
        )
    argmins = []
    for mat in mats:
        a, b = np.unravel_index(int(np.argmin(mat)), mat.shape)
        argmins.append((float(x_values[a]), float(y_values[b])))
    return LandscapeResult(
        x_values=x_values,
        y_values=y_values,
        averaged=np.mean(mats, axis=0),
        per_graph_argmin=argmins,
        names=tuple(space.names),
    )


@dataclass(frozen=True)
class RobustnessResult:
    omega_scales: np.ndarray
    delta_shifts: np.ndarray
    one_minus_pmis: np.ndarray      # (n_scales, n_shifts)
    nominal_pmis: float

    def degradation(self) -> np.ndarray:
        """P(MIS) loss relative to the nominal (scale 1, shift 0) drive."""
        return self.one_minus_pmis - (1.0 - self.nominal_pmis)


def robustness_map(
    protocol: TrainedProtocol | Schedule,
    g,
    omega_scales,
    delta_shifts,
    noise: NoiseParams | None = None,
    params: RydbergParams = RydbergParams(),
    n_trajectories: int = 500,
    seed: int = 0,
) -> RobustnessResult:
    """1 - P(MIS) when rescaling the Rabi drive and shifting the detuning."""
    schedule = protocol.schedule() if isinstance(protocol, TrainedProtocol) else protocol
    reg = registers_for([g])[0]
    statics = GraphStatics.of(g)
    omega_scales = np.asarray(omega_scales, dtype=float)
    delta_shifts = np.asarray(delta_shifts, dtype=float)
    out = np.zeros((len(omega_scales), len(delta_shifts)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")        # report bound crossings once, below
        for a, s in enumerate(omega_scales):
            for b, sh in enumerate(delta_shifts):
                mis = miscalibrate(schedule, float(s), float(sh))
                probs = _final_probabilities(
                    g, reg, mis, 0, seed, params, noise, n_trajectories
                )
                out[a, b] = 1.0 - statics.pmis_of(probs)
    nominal_probs = _final_probabilities(
        g, reg, schedule, 0, seed, params, noise, n_trajectories
    )
    return RobustnessResult(
        omega_scales=omega_scales,
        delta_shifts=delta_shifts,
        one_minus_pmis=out,
        nominal_pmis=statics.pmis_of(nominal_probs),
    )


def duration_stretch_curve(
    protocol: TrainedProtocol | Schedule,
    g,
    durations,
    noise: NoiseParams | None = None,
    params: RydbergParams = RydbergParams(),
    n_trajectories: int = 500,
    seed: int = 0,
) -> list[tuple[float, float]]:
    """P(MIS) of the protocol stretched to each requested duration."""
    schedule = protocol.schedule() if isinstance(protocol, TrainedProtocol) else protocol
    reg = registers_for([g])[0]
    statics = GraphStatics.of(g)
    out = []
    for t in durations:
        stretched = stretch_duration(schedule, float(t))
        probs = _final_probabilities(
            g, reg, stretched, 0, seed, params, noise, n_trajectories
        )
        out.append((float(t), statics.pmis_of(probs)))
    return out


# -- persistence ----------------------------------------------------------------


def save_protocol(protocol: TrainedProtocol, path, history_path: str | None = None):
    doc = {
        "theta": list(protocol.theta),
        "spec": protocol.spec_descriptor,
        "fingerprint": {
            "layout_kind": protocol.fingerprint.layout_kind,
            "spacing_um": protocol.fingerprint.spacing,
            "sizes": list(protocol.fingerprint.sizes),
        },
        "cost": protocol.cost,
        "per_graph_costs": list(protocol.per_graph_costs),
    }
    if history_path is not None:
        doc["history_path"] = str(history_path)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_protocol(path) -> TrainedProtocol:
    with open(path) as fh:
        doc = json.load(fh)
    fp = doc["fingerprint"]
    return TrainedProtocol(
        theta=tuple(doc["theta"]),
        spec_descriptor=doc["spec"],
        fingerprint=FamilyFingerprint(
            layout_kind=fp["layout_kind"],
            spacing=fp["spacing_um"],
            sizes=tuple(fp["sizes"]),
        ),
        cost=doc["cost"],
        per_graph_costs=tuple(doc.get("per_graph_costs", ())),
    )
