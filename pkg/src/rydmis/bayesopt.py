"""Gradient-free global minimization: Latin-hypercube initialization, a
Gaussian-process surrogate with Matern kernel, and expected-improvement
acquisition.

The loop spends ``n_init`` evaluations on a space-filling design, then
alternates fitting the surrogate on everything observed so far with
maximizing the acquisition over the box.  Inputs are normalized to the
unit box and costs standardized before fitting; failed objective
evaluations are recorded and penalized with the worst cost seen.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc
from sklearn.gaussian_process import GaussianProcessRegressor
from sklearn.gaussian_process.kernels import ConstantKernel, Matern, WhiteKernel

from .errors import BudgetExhausted, SingularKernelMatrix


@dataclass(frozen=True)
class SearchSpace:
    """Box bounds, one (name, lower, upper) triple per dimension."""

    dims: tuple

    def __post_init__(self):
        for name, lo, hi in self.dims:
            if not lo < hi:
                raise ValueError(f"dimension {name}: lower {lo} >= upper {hi}")

    @property
    def n_dims(self) -> int:
        return len(self.dims)

    @property
    def lower(self) -> np.ndarray:
        return np.array([d[1] for d in self.dims])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d[2] for d in self.dims])

    @property
    def names(self) -> list[str]:
        return [d[0] for d in self.dims]

    def normalize(self, theta) -> np.ndarray:
        return (np.asarray(theta, dtype=float) - self.lower) / (self.upper - self.lower)

    def denormalize(self, unit) -> np.ndarray:
        return self.lower + np.asarray(unit, dtype=float) * (self.upper - self.lower)


def latin_hypercube(space: SearchSpace, n: int, seed: int = 0) -> np.ndarray:
    """n points covering the box with one sample per equal-width bin in
    every coordinate; deterministic per seed."""
    if n < 1:
        raise ValueError("need at least one sample")
    sampler = qmc.LatinHypercube(d=space.n_dims, seed=np.random.default_rng(seed))
    return space.denormalize(sampler.random(n))


@dataclass(frozen=True)
class GpConfig:
    nu: float = 2.5
    fit_noise: bool = True
    n_restarts: int = 2
    length_scale_bounds: tuple = (1e-2, 1e2)
    hyper_every: int = 1      # re-optimize hyperparameters every k-th fit


def _bounded_lbfgs(obj_func, initial_theta, bounds):
    """Marginal-likelihood optimizer with an iteration cap."""
    res = minimize(
        obj_func, initial_theta, method="L-BFGS-B", jac=True, bounds=bounds,
        options={"maxiter": 60},
    )
    return res.x, res.fun


class GpSurrogate:
    """Matern-kernel Gaussian process over the unit box.

    Thin wrapper around scikit-learn's regressor handling input
    normalization, jitter escalation and hyperparameter warm starts.
    """

    def __init__(self, space: SearchSpace, config: GpConfig = GpConfig()):
        self.space = space
        self.config = config
        self._gpr = None
        self._warm_kernel = None

    def fit(self, thetas, costs, seed: int = 0, optimize_hypers: bool = True):
        """Condition on the observations; with ``optimize_hypers`` the kernel
        hyperparameters are re-optimized (multi-start, warm-started from the
        previous fit), otherwise the previous ones are reused as-is."""
        x = np.array([self.space.normalize(t) for t in thetas])
        y = np.asarray(costs, dtype=float)
        if len(x) < 2:
            raise ValueError("need at least 2 observations to fit")
        cfg = self.config
        if self._warm_kernel is not None:
            kernel = self._warm_kernel
        else:
            optimize_hypers = True
            kernel = ConstantKernel(1.0, (1e-4, 1e4)) * Matern(
                length_scale=np.full(self.space.n_dims, 0.3),
                length_scale_bounds=cfg.length_scale_bounds,
                nu=cfg.nu,
            )
            if cfg.fit_noise:
                kernel = kernel + WhiteKernel(1e-4, (1e-10, 1e-1))
        alpha = 1e-10
        for attempt in range(4):
            gpr = GaussianProcessRegressor(
                kernel=kernel,
                alpha=alpha,
                normalize_y=True,
                optimizer=_bounded_lbfgs if optimize_hypers else None,
                n_restarts_optimizer=cfg.n_restarts if optimize_hypers else 0,
                random_state=seed % 2**31,
            )
            try:
                import warnings as _warnings
                from sklearn.exceptions import ConvergenceWarning

                with _warnings.catch_warnings():
                    _warnings.simplefilter("ignore", ConvergenceWarning)
                    gpr.fit(x, y)
                self._gpr = gpr
                self._warm_kernel = gpr.kernel_
                return self
            except np.linalg.LinAlgError:
                alpha *= 1e3     # jitter escalation
        raise SingularKernelMatrix("kernel matrix not positive definite")

    @property
    def fitted(self) -> bool:
        return self._gpr is not None

    def predict(self, thetas):
        """Posterior mean and standard deviation at the given points."""
        x = np.atleast_2d([self.space.normalize(t) for t in np.atleast_2d(thetas)])
        mean, std = self._gpr.predict(x, return_std=True)
        return mean, std

    @property
    def signal_variance(self) -> float:
        """Fitted prior variance in cost units."""
        k = self._gpr.kernel_
        const = k.k1.k1.constant_value if self.config.fit_noise else k.k1.constant_value
        return float(const * self._gpr._y_train_std**2)

    @property
    def noise_variance(self) -> float:
        if not self.config.fit_noise:
            return 0.0
        return float(self._gpr.kernel_.k2.noise_level * self._gpr._y_train_std**2)


def gp_fit(observations, space: SearchSpace, config: GpConfig = GpConfig(),
           seed: int = 0) -> GpSurrogate:
    """Fit a surrogate to (theta, cost) observations."""
    thetas = [o[0] for o in observations]
    costs = [o[1] for o in observations]
    return GpSurrogate(space, config).fit(thetas, costs, seed=seed)


def expected_improvement(mean, std, best: float):
    """Closed-form EI for minimization: E[max(best - f, 0)]."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    improve = best - mean
    u = np.clip(
        np.divide(improve, std, out=np.zeros_like(improve + std), where=std > 0),
        -40.0, 40.0,     # both tails are exactly 0/1 in double precision
    )
    phi = np.exp(-0.5 * u**2) / math.sqrt(2 * math.pi)
    cdf = 0.5 * (1.0 + np.vectorize(math.erf)(u / math.sqrt(2)))
    ei = np.where(std > 0, improve * cdf + std * phi, np.maximum(improve, 0.0))
    return ei


def acquisition(surrogate: GpSurrogate, theta, best: float) -> float:
    """Expected improvement of a single candidate point."""
    mean, std = surrogate.predict(np.atleast_2d(theta))
    return float(expected_improvement(mean, std, best)[0])


@dataclass
class Budget:
    n_init: int
    n_refine: int

    @property
    def total(self) -> int:
        return self.n_init + self.n_refine

    @staticmethod
    def parse(text: str) -> "Budget":
        """Parse the ``25+175`` notation."""
        a, b = text.split("+")
        return Budget(int(a), int(b))


@dataclass
class OptimizerState:
    space: SearchSpace
    budget: Budget
    seed: int
    config: GpConfig = field(default_factory=GpConfig)
    history: list = field(default_factory=list)    # (theta tuple, cost, failed)
    surrogate: GpSurrogate | None = None
    _lhs: np.ndarray | None = None
    _dirty: bool = True

    def __post_init__(self):
        if self._lhs is None:
            self._lhs = latin_hypercube(self.space, self.budget.n_init, self.seed)
        if self.surrogate is None:
            self.surrogate = GpSurrogate(self.space, self.config)

    @property
    def n_evaluated(self) -> int:
        return len(self.history)

    @property
    def best_so_far(self):
        """(theta, cost) of the lowest successful observation."""
        ok = [(t, c) for t, c, failed in self.history if not failed]
        if not ok:
            return None
        return min(ok, key=lambda tc: tc[1])

    def observe(self, theta, cost: float, failed: bool = False):
        self.history.append((tuple(float(x) for x in theta), float(cost), failed))
        self._dirty = True

    def costs(self) -> list[float]:
        return [c for _, c, _ in self.history]


def _refit(state: OptimizerState):
    if state._dirty:
        thetas = [t for t, _, _ in state.history]
        refresh = (state.n_evaluated - state.budget.n_init) % state.config.hyper_every == 0
        state.surrogate.fit(
            thetas, state.costs(),
            seed=state.seed * 100003 + state.n_evaluated,
            optimize_hypers=refresh,
        )
        state._dirty = False


def suggest_next(state: OptimizerState) -> np.ndarray:
    """Next point to evaluate: the pre-drawn design during initialization,
    then the acquisition argmax (random multistart plus local polish)."""
    k = state.n_evaluated
    if k >= state.budget.total:
        raise BudgetExhausted(f"budget of {state.budget.total} evaluations spent")
    if k < state.budget.n_init:
        return np.asarray(state._lhs[k])

    _refit(state)
    best = state.best_so_far[1]
    d = state.space.n_dims
    rng = np.random.default_rng([state.seed, k])
    n_cand = min(4096, 256 * d)
    unit = rng.random((n_cand, d))
    observed = np.array([state.space.normalize(t) for t, _, _ in state.history])
    unit = np.vstack([unit, np.clip(observed + 0.05 * rng.standard_normal(observed.shape), 0, 1)])
    cands = state.space.denormalize(unit)
    ei = expected_improvement(*state.surrogate.predict(cands), best)

    def neg_ei_unit(u):
        theta = state.space.denormalize(np.clip(u, 0.0, 1.0))
        mean, std = state.surrogate.predict(np.atleast_2d(theta))
        return -float(expected_improvement(mean, std, best)[0])

    top = np.argsort(ei)[-3:]
    champions = [(-(ei[i]), unit[i]) for i in top]
    for i in top:
        res = minimize(
            neg_ei_unit, unit[i], method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * d, options={"maxiter": 60},
        )
        champions.append((res.fun, np.clip(res.x, 0.0, 1.0)))
    _, best_unit = min(champions, key=lambda t: t[0])
    return state.space.denormalize(best_unit)


def optimize_loop(
    objective,
    space: SearchSpace,
    budget: Budget,
    seed: int = 0,
    config: GpConfig | None = None,
    callback=None,
) -> OptimizerState:
    """Run the full suggest/observe loop over the evaluation budget.

    Objective failures are caught, recorded, and penalized with the worst
    successful cost so far (1.0 before any success) so the loop keeps
    going.  Returns the final state with the complete history.
    """
    if config is None:
        config = GpConfig(n_restarts=1, hyper_every=5)
    state = OptimizerState(space=space, budget=budget, seed=seed, config=config)
    for _ in range(budget.total):
        theta = suggest_next(state)
        try:
            cost = float(objective(np.asarray(theta)))
            failed = False
        except Exception:
            ok = [c for _, c, f in state.history if not f]
            cost = max(ok) if ok else 1.0
            failed = True
        state.observe(theta, cost, failed)
        if callback is not None:
            callback(state)
    return state


# -- persistence --------------------------------------------------------------


def history_csv(state: OptimizerState, path):
    """History log ``iter,theta...,cost,best``."""
    names = state.space.names
    with open(path, "w") as fh:
        fh.write("iter," + ",".join(f"theta_{n}" for n in names) + ",cost,best\n")
        best = math.inf
        for it, (theta, cost, failed) in enumerate(state.history):
            if not failed:
                best = min(best, cost)
            row = ",".join(repr(x) for x in theta)
            fh.write(f"{it},{row},{cost!r},{best!r}\n")


def save_state(state: OptimizerState, path):
    doc = {
        "space": [list(d) for d in state.space.dims],
        "budget": [state.budget.n_init, state.budget.n_refine],
        "seed": state.seed,
        "config": {
            "nu": state.config.nu,
            "fit_noise": state.config.fit_noise,
            "n_restarts": state.config.n_restarts,
            "hyper_every": state.config.hyper_every,
        },
        "history": [[list(t), c, f] for t, c, f in state.history],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_state(path) -> OptimizerState:
    """Rebuild a resumable state; the initial design is regenerated from the
    stored seed, so resuming continues the identical trajectory."""
    with open(path) as fh:
        doc = json.load(fh)
    space = SearchSpace(tuple((n, lo, hi) for n, lo, hi in doc["space"]))
    cfg = GpConfig(
        nu=doc["config"]["nu"],
        fit_noise=doc["config"]["fit_noise"],
        n_restarts=doc["config"]["n_restarts"],
        hyper_every=doc["config"].get("hyper_every", 1),
    )
    state = OptimizerState(
        space=space,
        budget=Budget(*doc["budget"]),
        seed=doc["seed"],
        config=cfg,
    )
    for theta, cost, failed in doc["history"]:
        state.observe(theta, cost, failed)
    return state
