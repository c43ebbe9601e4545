"""Exact statevector emulation of globally driven Rydberg arrays.

The Hamiltonian (hbar = 1, angular frequencies in rad/µs) is

    H(t) = Omega(t)/2 * sum_i sigma_x_i - delta(t) * sum_i n_i
           + sum_{i<j} C6 / r_ij^6 * n_i n_j

over basis states indexed so that bit i of the index is the occupation of
vertex i.  Time evolution integrates the Schrödinger equation with an
adaptive high-order explicit scheme, restarted at schedule breakpoints;
an effective T1/T2 model is unfolded with quantum trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .distributions import Distribution
from .embedding import Register
from .errors import (
    AmbiguousManifold,
    IntegratorFailure,
    NoConvergence,
    TooManyQubits,
    ZeroDistance,
    ZeroGap,
)
from .graphs import _pairwise_distances, mis_exact
from .params import NoiseParams, RydbergParams
from .schedules import Schedule

EXACT_QUBIT_CAP = 20        # 2^20 complex amplitudes
DENSE_QUBIT_CAP = 14
DEFAULT_TOL = 1e-8
MANIFOLD_COMPOSITION = 0.99
MANIFOLD_DEGENERACY_FACTOR = 1e-6    # times the blockade energy scale


@dataclass(frozen=True)
class QuantumState:
    """Statevector over 2^N basis states (vertex 0 = least-significant bit)."""

    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        if len(self.amplitudes) != 2**self.n_qubits:
            raise ValueError("amplitude vector length is not 2^N")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: |psi| = {norm}")

    @staticmethod
    def zero_state(n_qubits: int) -> "QuantumState":
        amp = np.zeros(2**n_qubits, dtype=complex)
        amp[0] = 1.0
        return QuantumState(amp, n_qubits)

    @staticmethod
    def basis_state(index: int, n_qubits: int) -> "QuantumState":
        amp = np.zeros(2**n_qubits, dtype=complex)
        amp[index] = 1.0
        return QuantumState(amp, n_qubits)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def interaction_strength(r_um: float, params: RydbergParams = RydbergParams()) -> float:
    """Van der Waals interaction C6 / r^6 (rad/µs)."""
    if r_um <= 0:
        raise ZeroDistance(f"distance must be positive, got {r_um}")
    return params.interaction(r_um)


def blockade_energy_scale(reg: Register, params: RydbergParams = RydbergParams()) -> float:
    """Maximum pair interaction across the register (the U of the maps).

    A register without pairs falls back to the interaction at the default
    minimum spacing so reduced-control maps stay well defined.
    """
    from .graphs import DEFAULT_MIN_SPACING_UM

    d = reg.min_distance()
    if not math.isfinite(d):
        d = DEFAULT_MIN_SPACING_UM
    return interaction_strength(d, params)


def _check_cap(n: int, cap: int = EXACT_QUBIT_CAP):
    if n > cap:
        raise TooManyQubits(f"{n} qubits exceeds the exact-emulation cap {cap}")


def _popcounts(n: int) -> np.ndarray:
    z = np.arange(2**n, dtype=np.uint32)
    pop = np.zeros(2**n, dtype=np.int64)
    for i in range(n):
        pop += (z >> i) & 1
    return pop


def _interaction_diagonal(reg: Register, params: RydbergParams) -> np.ndarray:
    """Diagonal of the interaction operator over the full basis."""
    n = reg.n_atoms
    dist = _pairwise_distances(reg.positions)
    z = np.arange(2**n, dtype=np.uint32)
    diag = np.zeros(2**n)
    for i in range(n):
        bi = (z >> i) & 1
        for j in range(i + 1, n):
            if dist[i, j] <= 0:
                raise ZeroDistance(f"atoms {i},{j} coincide")
            both = bi & ((z >> j) & 1)
            diag += params.interaction(dist[i, j]) * both
    return diag


def _apply_sigma_x_sum(psi: np.ndarray, n: int) -> np.ndarray:
    """sum_i sigma_x_i acting on a statevector, via single-axis flips."""
    t = psi.reshape((2,) * n)
    out = np.zeros_like(t)
    for axis in range(n):
        out += np.flip(t, axis=axis)
    return out.reshape(-1)


def build_hamiltonian(
    reg: Register,
    omega: float,
    delta: float,
    params: RydbergParams = RydbergParams(),
):
    """Materialize H at constant controls: dense ndarray up to 14 qubits,
    sparse CSR beyond (cap 20)."""
    n = reg.n_atoms
    _check_cap(n)
    diag = _interaction_diagonal(reg, params) - delta * _popcounts(n)
    dim = 2**n
    if n <= DENSE_QUBIT_CAP:
        h = np.diag(diag.astype(complex))
        z = np.arange(dim)
        for i in range(n):
            h[z, z ^ (1 << i)] += omega / 2.0
        return h
    z = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [z], [z], [diag]
    for i in range(n):
        rows.append(z)
        cols.append(z ^ (1 << i))
        vals.append(np.full(dim, omega / 2.0))
    h = sp.csr_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
        dtype=complex,
    )
    return h


class _Engine:
    """Cached per-register quantities for repeated evolutions."""

    def __init__(self, reg: Register, params: RydbergParams):
        self.n = reg.n_atoms
        _check_cap(self.n)
        self.pop = _popcounts(self.n)
        self.u_diag = _interaction_diagonal(reg, params)

    def rhs(self, schedule: Schedule, extra_imag_diag=None):
        n, pop, u_diag = self.n, self.pop, self.u_diag

        def f(t, psi):
            w = float(schedule.omega(t))
            d = float(schedule.delta(t))
            h_psi = (u_diag - d * pop) * psi
            if w != 0.0:
                h_psi = h_psi + (w / 2.0) * _apply_sigma_x_sum(psi, n)
            out = -1j * h_psi
            if extra_imag_diag is not None:
                out = out - extra_imag_diag * psi
            return out

        return f


def _segment_times(schedule: Schedule) -> list[float]:
    pts = [0.0] + [b for b in schedule.breakpoints if 0.0 < b < schedule.duration]
    pts.append(schedule.duration)
    return sorted(set(pts))


NORM_DRIFT_TOL = 1e-7


class _NormDrift(IntegratorFailure):
    pass


def _checked_normalize(psi: np.ndarray) -> np.ndarray:
    """Enforce the norm-preservation contract, then renormalize exactly."""
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > NORM_DRIFT_TOL:
        raise _NormDrift(f"norm drift {abs(norm - 1.0):.2e} above tolerance")
    return psi / norm


def evolve(
    reg: Register,
    schedule: Schedule,
    initial: QuantumState | None = None,
    params: RydbergParams = RydbergParams(),
    tol: float = DEFAULT_TOL,
) -> QuantumState:
    """Integrate the Schrödinger equation over the schedule.

    DOP853 with local error ``tol``, restarted at every schedule breakpoint
    so that control discontinuities never sit inside an integrator step.
    Norm preservation within 1e-7 is enforced; a long evolution that
    drifts past it is retried once at 100x tighter tolerance.
    """
    engine = _Engine(reg, params)
    psi0 = (initial or QuantumState.zero_state(engine.n)).amplitudes.astype(complex)
    f = engine.rhs(schedule)
    segs = _segment_times(schedule)
    for attempt_tol in (tol, max(tol / 100.0, 1e-13)):
        psi = psi0
        try:
            for t0, t1 in zip(segs[:-1], segs[1:]):
                sol = solve_ivp(f, (t0, t1), psi, method="DOP853",
                                rtol=attempt_tol, atol=attempt_tol)
                if not sol.success:
                    raise IntegratorFailure(
                        f"integration failed on [{t0}, {t1}]: {sol.message}"
                    )
                psi = sol.y[:, -1]
            return QuantumState(_checked_normalize(psi), engine.n)
        except _NormDrift:
            if attempt_tol != tol:
                raise
    raise IntegratorFailure("unreachable")


def evolve_with_history(
    reg: Register,
    schedule: Schedule,
    times,
    initial: QuantumState | None = None,
    params: RydbergParams = RydbergParams(),
    tol: float = DEFAULT_TOL,
) -> list[QuantumState]:
    """States at the requested times (must be sorted within [0, T])."""
    engine = _Engine(reg, params)
    psi0 = (initial or QuantumState.zero_state(engine.n)).amplitudes.astype(complex)
    f = engine.rhs(schedule)
    times = list(times)
    segs = _segment_times(schedule)
    for attempt_tol in (tol, max(tol / 100.0, 1e-13)):
        psi = psi0
        out: list[QuantumState] = []
        remaining = times[:]
        if remaining and remaining[0] == 0.0:
            out.append(QuantumState(psi.copy(), engine.n))
            remaining = remaining[1:]
        try:
            for t0, t1 in zip(segs[:-1], segs[1:]):
                inside = [t for t in remaining if t0 < t <= t1]
                sol = solve_ivp(
                    f, (t0, t1), psi, method="DOP853",
                    rtol=attempt_tol, atol=attempt_tol,
                    t_eval=inside + ([] if inside and inside[-1] == t1 else [t1]),
                )
                if not sol.success:
                    raise IntegratorFailure(
                        f"integration failed on [{t0}, {t1}]: {sol.message}"
                    )
                for k in range(len(inside)):
                    out.append(QuantumState(_checked_normalize(sol.y[:, k]), engine.n))
                psi = sol.y[:, -1]
                remaining = [t for t in remaining if t > t1]
            return out
        except _NormDrift:
            if attempt_tol != tol:
                raise
    raise IntegratorFailure("unreachable")


def sample(state: QuantumState, n_shots: int, seed: int = 0) -> Distribution:
    """Multinomial sampling of the measurement distribution."""
    if n_shots == 0:
        return Distribution(state.n_qubits, {}, "counts")
    rng = np.random.default_rng(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    counts = rng.multinomial(n_shots, probs)
    vec = counts.astype(float)
    return Distribution.from_vector(vec, state.n_qubits, mode="counts", prune=0.0)


# -- static spectra -----------------------------------------------------------


@dataclass(frozen=True)
class GroundState:
    energy: float
    state: QuantumState
    degenerate: bool


def _lowest_eigenpairs(h, k: int):
    dim = h.shape[0]
    if sp.issparse(h):
        if k >= dim - 1:
            h = h.toarray()
        else:
            vals, vecs = spla.eigsh(h, k=k, which="SA")
            order = np.argsort(vals)
            return vals[order], vecs[:, order]
    vals, vecs = np.linalg.eigh(np.asarray(h))
    return vals[:k], vecs[:, :k]


def ground_state(
    reg: Register,
    omega: float,
    delta: float,
    params: RydbergParams = RydbergParams(),
) -> GroundState:
    """Lowest eigenpair; ``degenerate`` flags a second state within
    1e-8 relative energy."""
    n = reg.n_atoms
    _check_cap(n)
    h = build_hamiltonian(reg, omega, delta, params)
    k = min(2, h.shape[0])
    vals, vecs = _lowest_eigenpairs(h, k)
    psi = vecs[:, 0].astype(complex)
    psi /= np.linalg.norm(psi)
    if sp.issparse(h):
        resid = np.linalg.norm(h @ psi - vals[0] * psi)
    else:
        resid = np.linalg.norm(np.asarray(h) @ psi - vals[0] * psi)
    scale = max(1.0, float(np.abs(vals).max()))
    if resid > 1e-8 * scale:
        raise NoConvergence(f"eigen-residual {resid:.2e} above tolerance")
    degenerate = k == 2 and (vals[1] - vals[0]) <= 1e-8 * scale
    return GroundState(float(vals[0]), QuantumState(psi, n), bool(degenerate))


def _mis_mass_vector(g) -> np.ndarray:
    """Bool mask over basis indices marking MIS configurations."""
    from .graphs import bitstring_to_index

    res = mis_exact(g, enumerate_all=True)
    mask = np.zeros(2**g.n_vertices, dtype=bool)
    for bits in res.configurations:
        mask[bitstring_to_index(bits)] = True
    return mask


def _is_mass_vector(g) -> np.ndarray:
    """Bool mask over basis indices marking independent sets."""
    n = g.n_vertices
    z = np.arange(2**n, dtype=np.uint64)
    ok = np.ones(2**n, dtype=bool)
    for i, j in g.edges:
        ok &= ~(((z >> np.uint64(i)) & np.uint64(1)).astype(bool)
                & ((z >> np.uint64(j)) & np.uint64(1)).astype(bool))
    return ok


def pmis_map(
    g,
    reg: Register,
    omega_over_u,
    delta_over_u,
    params: RydbergParams = RydbergParams(),
) -> np.ndarray:
    """Ground-state MIS probability over a grid of reduced controls.

    U is the maximum pair interaction of the register.  For a degenerate
    ground manifold the probability is averaged over the manifold (the
    uniform-mixture value, independent of the eigenbasis returned).
    """
    u = blockade_energy_scale(reg, params)
    mis_mask = _mis_mass_vector(g)
    n = reg.n_atoms
    out = np.zeros((len(omega_over_u), len(delta_over_u)))
    engine = _Engine(reg, params)
    for a, w in enumerate(omega_over_u):
        for b, d in enumerate(delta_over_u):
            if w == 0.0:
                energies = engine.u_diag - d * u * engine.pop
                e0 = energies.min()
                manifold = energies <= e0 + 1e-9 * max(1.0, abs(e0))
                out[a, b] = mis_mask[manifold].mean()
                continue
            h = build_hamiltonian(reg, w * u, d * u, params)
            k = min(h.shape[0], max(4, int(mis_mask.sum()) + 2))
            vals, vecs = _lowest_eigenpairs(h, k)
            scale = max(1.0, float(np.abs(vals).max()))
            members = [j for j in range(len(vals))
                       if vals[j] - vals[0] <= 1e-8 * scale]
            mass = [float((np.abs(vecs[:, j]) ** 2)[mis_mask].sum()) for j in members]
            out[a, b] = float(np.mean(mass))
    return out


def family_pmis_map(graphs, registers, omega_over_u, delta_over_u,
                    params: RydbergParams = RydbergParams()) -> np.ndarray:
    """Elementwise minimum of the per-graph maps across a family."""
    maps = [
        pmis_map(g, r, omega_over_u, delta_over_u, params)
        for g, r in zip(graphs, registers)
    ]
    return np.minimum.reduce(maps)


def gap_map(
    g,
    reg: Register,
    omega_over_u,
    delta_over_u,
    params: RydbergParams = RydbergParams(),
    k_levels: int | None = None,
) -> np.ndarray:
    """Energy gap between the MIS manifold and the first state above it.

    The manifold is the lowest D levels of the spectrum, D being the
    graph's number of MIS configurations (deep in the ordered phase these
    are exactly the quasi-degenerate MIS states).  The reported gap is
    E_D - E_{D-1}, the separation at the manifold boundary; it vanishes on
    the massive degeneracies near the origin of the control plane.  When
    the boundary is degenerate within 1e-6 * U, the straddling eigenstates
    must be cleanly MIS (composition >= 0.99) or cleanly not (<= 0.01);
    an intermediate composition there means manifold membership cannot be
    decided and raises ``AmbiguousManifold``.
    """
    u = blockade_energy_scale(reg, params)
    mis_mask = _mis_mass_vector(g)
    n_mis = int(mis_mask.sum())
    tol_deg = MANIFOLD_DEGENERACY_FACTOR * u
    dim = 2**reg.n_atoms
    if n_mis + 1 > dim:
        raise ValueError("graph has no states above its MIS manifold")
    engine = _Engine(reg, params)
    out = np.zeros((len(omega_over_u), len(delta_over_u)))
    for a, w in enumerate(omega_over_u):
        for b, d in enumerate(delta_over_u):
            if w == 0.0:
                # diagonal Hamiltonian: basis states are exact eigenstates
                energies = np.sort(engine.u_diag - d * u * engine.pop)
                out[a, b] = max(float(energies[n_mis] - energies[n_mis - 1]), 0.0)
                continue
            k = max(k_levels or 0, n_mis + 1)
            vals, vecs = _lowest_eigenpairs(
                build_hamiltonian(reg, w * u, d * u, params), min(k, dim)
            )
            boundary_gap = float(vals[n_mis] - vals[n_mis - 1])
            if boundary_gap <= tol_deg:
                for j in (n_mis - 1, n_mis):
                    comp = float((np.abs(vecs[:, j]) ** 2)[mis_mask].sum())
                    if 0.01 < comp < MANIFOLD_COMPOSITION:
                        raise AmbiguousManifold(
                            f"composition {comp:.3f} at the degenerate manifold "
                            f"boundary, (omega/U, delta/U) = ({w}, {d})"
                        )
            out[a, b] = max(boundary_gap, 0.0)
    return out


@dataclass(frozen=True)
class SpectrumAlongSchedule:
    times: np.ndarray            # (n_times,)
    energies: np.ndarray         # (n_times, k)
    populations: np.ndarray      # (n_times, k) |<e_k | psi(t)>|^2
    compositions: np.ndarray     # (n_times, k, 3) mass on (non-IS, IS, MIS)


def spectrum_along_schedule(
    g,
    reg: Register,
    schedule: Schedule,
    n_times: int = 50,
    k_levels: int = 6,
    params: RydbergParams = RydbergParams(),
) -> SpectrumAlongSchedule:
    """Instantaneous spectrum, level populations and level compositions
    sampled along a schedule."""
    n = reg.n_atoms
    _check_cap(n)
    times = np.linspace(0.0, schedule.duration, n_times)
    states = evolve_with_history(reg, schedule, list(times), params=params)
    mis_mask = _mis_mass_vector(g)
    is_mask = _is_mass_vector(g) & ~mis_mask
    non_mask = ~(mis_mask | is_mask)
    k = min(k_levels, 2**n)
    energies = np.zeros((n_times, k))
    pops = np.zeros((n_times, k))
    comps = np.zeros((n_times, k, 3))
    for idx, t in enumerate(times):
        h = build_hamiltonian(reg, float(schedule.omega(t)), float(schedule.delta(t)), params)
        vals, vecs = _lowest_eigenpairs(h, k)
        energies[idx] = vals[:k]
        psi = states[idx].amplitudes
        for j in range(k):
            v = vecs[:, j]
            pops[idx, j] = abs(np.vdot(v, psi)) ** 2
            w = np.abs(v) ** 2
            comps[idx, j] = (w[non_mask].sum(), w[is_mask].sum(), w[mis_mask].sum())
    return SpectrumAlongSchedule(times, energies, pops, comps)


def adiabatic_time_bound(min_gap: float, n_qubits: int) -> float:
    """Guidance scale N / gap^2 for the adiabatic evolution time (µs)."""
    if min_gap <= 0:
        raise ZeroGap("adiabatic bound diverges at zero gap")
    return n_qubits / min_gap**2


# -- effective noise ----------------------------------------------------------


def _apply_jump(psi: np.ndarray, n: int, qubit: int, kind: str) -> np.ndarray:
    t = psi.reshape((2,) * n).copy()
    axis = n - 1 - qubit      # C-order: vertex 0 is the last axis
    sel0 = [slice(None)] * n
    sel1 = [slice(None)] * n
    sel0[axis], sel1[axis] = 0, 1
    if kind == "decay":       # sigma_minus: |1> -> |0>
        t[tuple(sel0)] = t[tuple(sel1)]
        t[tuple(sel1)] = 0.0
    else:                     # dephasing jump: project onto n_i
        t[tuple(sel0)] = 0.0
    out = t.reshape(-1)
    return out / np.linalg.norm(out)


def evolve_noisy(
    reg: Register,
    schedule: Schedule,
    noise: NoiseParams = NoiseParams(),
    n_trajectories: int = 500,
    seed: int = 0,
    params: RydbergParams = RydbergParams(),
    initial: QuantumState | None = None,
    tol: float = 1e-8,
) -> Distribution:
    """Trajectory-averaged measurement distribution under T1/T2 noise.

    Standard Lindblad unfolding with per-qubit collapse channels: decay
    (sigma_minus) at rate 1/T1 and a dephasing jump at rate
    2*(1/T2 - 1/(2 T1)) whose coherence damping reproduces exp(-t/T2).
    Converges to the master-equation solution as trajectories grow; with
    both rates zero this returns the exact noiseless probabilities.
    """
    engine = _Engine(reg, params)
    n = engine.n
    g1 = noise.decay_rate
    gd = 2.0 * noise.dephasing_rate          # jump rate of the n_i channel
    psi0 = (initial or QuantumState.zero_state(n)).amplitudes.astype(complex)

    if g1 == 0.0 and gd == 0.0:
        final = evolve(reg, schedule, QuantumState(psi0, n), params, tol)
        return Distribution.from_vector(
            final.probabilities(), n, mode="probabilities", prune=1e-15
        )

    total_rate = g1 + gd
    extra = 0.5 * total_rate * engine.pop    # -i/2 sum L^dag L, diagonal
    f = engine.rhs(schedule, extra_imag_diag=extra)
    segs = _segment_times(schedule)
    rng_master = np.random.SeedSequence(seed)
    probs = np.zeros(2**n)

    for traj_seed in rng_master.spawn(n_trajectories):
        rng = np.random.default_rng(traj_seed)
        psi = psi0.copy()
        r = rng.uniform()
        t = 0.0
        seg_idx = 0
        while t < schedule.duration - 1e-12:
            t_end = segs[seg_idx + 1]

            def norm_hit(tt, y, _r=r):
                return float(np.real(np.vdot(y, y))) - _r

            norm_hit.terminal = True
            norm_hit.direction = -1
            sol = solve_ivp(f, (t, t_end), psi, method="DOP853",
                            rtol=tol, atol=tol, events=norm_hit)
            if not sol.success:
                raise IntegratorFailure(sol.message)
            if sol.t_events[0].size:      # jump happened inside the segment
                t = float(sol.t_events[0][0])
                psi = sol.y_events[0][0]
                occ = np.abs(psi) ** 2
                per_qubit = np.array([
                    occ[(np.arange(2**n) >> q) & 1 == 1].sum() for q in range(n)
                ])
                weights = np.concatenate([g1 * per_qubit, gd * per_qubit])
                weights = weights / weights.sum()
                choice = rng.choice(2 * n, p=weights)
                qubit, kind = choice % n, ("decay" if choice < n else "dephase")
                psi = _apply_jump(psi, n, qubit, kind)
                r = rng.uniform()
            else:
                psi = sol.y[:, -1]
                t = t_end
                seg_idx += 1
        pf = np.abs(psi) ** 2
        probs += pf / pf.sum()

    probs /= n_trajectories
    return Distribution.from_vector(probs, n, mode="probabilities", prune=1e-15)
