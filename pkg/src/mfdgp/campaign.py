"""Cost-aware multi-fidelity Bayesian optimization campaigns.

One campaign iteration retrains the deep GP on all data gathered so far,
maximizes the highest-fidelity UCB to propose a design point, picks the
fidelity whose cost-weighted predictive uncertainty at that point is
largest, evaluates the objective there, and folds the observed cost back
into the running per-fidelity cost means. The loop spends an evaluation
budget measured in objective-reported cost units, not wall clock, and the
single evaluation that crosses the budget line is kept.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import acquisition, dgp, gp
from .dgp import DGPTrainConfig, FidelityLevel, MFDeepGP, MultiFidelityDataset
from .errors import CampaignInitError, DomainError, ObjectiveError, StateError
from .space import DesignSpace
from .streams import ACQUISITION, DESIGN, PROPAGATION, TRAIN, derive_seed, substream

# Observation noise assumed for campaign data; objectives here are
# deterministic, so this is purely a conditioning floor.
DEFAULT_OBS_NOISE = 1e-8

PHASE_INITIAL = "initial-design"
PHASE_LOOP = "bo-loop"


@dataclass(frozen=True)
class UCBConfig:
    """Acquisition settings: this is the whole tunable surface of the loop.

    The fidelity-selection rule has no knobs of its own; it is a pure
    function of predictive sigmas and recorded costs. ``beta_schedule``
    optionally maps the iteration number to a beta, and is off by default.
    """

    beta: float = 2.0
    acquisition_restarts: int = 8
    candidate_pool_size: int = 512
    beta_schedule: object = None

    def __post_init__(self):
        if self.beta < 0:
            raise DomainError("beta must be >= 0")
        if self.acquisition_restarts < 1 or self.candidate_pool_size < 1:
            raise DomainError("restarts and pool size must be positive")

    def beta_at(self, iteration: int) -> float:
        if self.beta_schedule is None:
            return self.beta
        return float(self.beta_schedule(iteration))


@dataclass(frozen=True)
class CostModel:
    """Running mean evaluation cost per fidelity level."""

    levels: tuple
    tau: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if tau.shape != counts.shape or tau.ndim != 1:
            raise DomainError("tau and counts must be 1-D arrays of equal length")
        if len(self.levels) != tau.shape[0]:
            raise DomainError("one tau entry per level is required")
        if np.any(tau <= 0) or not np.all(np.isfinite(tau)):
            raise DomainError("all tau entries must be finite and > 0")
        object.__setattr__(self, "levels", tuple(int(v) for v in self.levels))
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "counts", counts)

    def position(self, level) -> int:
        idx = level.index if isinstance(level, FidelityLevel) else int(level)
        try:
            return self.levels.index(idx)
        except ValueError:
            raise DomainError(f"level {idx} not tracked by this cost model") from None


def update_costs(cost: CostModel, level, observed_cost: float) -> CostModel:
    """Fold one observed cost into the running mean for its level."""
    c = float(observed_cost)
    if not np.isfinite(c) or c <= 0:
        raise DomainError(f"observed cost must be finite and > 0, got {observed_cost}")
    pos = cost.position(level)
    tau = cost.tau.copy()
    counts = cost.counts.copy()
    tau[pos] = (tau[pos] * counts[pos] + c) / (counts[pos] + 1)
    counts[pos] += 1
    return CostModel(levels=cost.levels, tau=tau, counts=counts)


def fidelity_scores(sigmas, taus, beta: float) -> np.ndarray:
    """Cost-weighted exploration scores gamma_t * sqrt(beta) * sigma_t.

    gamma_t = max(tau) / tau_t is a pure ratio of recorded costs, so the
    scores are invariant to rescaling all taus by a common factor, and the
    argmax is invariant to rescaling beta.
    """
    sigmas = np.asarray(sigmas, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    gamma = np.max(taus) / taus
    return gamma * np.sqrt(beta) * sigmas


def argmax_highest(scores) -> int:
    """0-based argmax with ties broken toward the highest index."""
    scores = np.asarray(scores, dtype=np.float64)
    return int(scores.shape[0] - 1 - np.argmax(scores[::-1]))


@dataclass(frozen=True)
class EvaluationRecord:
    """One objective evaluation in a campaign ledger."""

    x: np.ndarray
    level: FidelityLevel
    y: float
    cost: float
    iteration: int
    phase: str

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=np.float64))
        if float(self.cost) <= 0:
            raise DomainError("record cost must be > 0")
        if self.phase not in (PHASE_INITIAL, PHASE_LOOP):
            raise DomainError(f"unknown phase {self.phase!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "cost", float(self.cost))


@dataclass
class CampaignState:
    """Full optimization ledger for one campaign."""

    ladder: tuple
    records: list = field(default_factory=list)
    cost_model: CostModel | None = None
    budget_total: float = 0.0
    budget_spent: float = 0.0
    rng_seed: int = 0
    error: str | None = None

    @property
    def top_index(self) -> int:
        return max(lv.index for lv in self.ladder)

    @property
    def incumbent(self) -> EvaluationRecord | None:
        """Best observed record at the highest fidelity, None before one exists."""
        best = None
        for rec in self.records:
            if rec.level.index != self.top_index:
                continue
            if best is None or rec.y > best.y:
                best = rec
        return best

    @property
    def loop_iterations(self) -> int:
        return sum(1 for rec in self.records if rec.phase == PHASE_LOOP)

    def append(self, record: EvaluationRecord) -> None:
        self.records.append(record)
        self.budget_spent += record.cost

    def per_level_counts(self) -> dict[int, int]:
        counts = {lv.index: 0 for lv in self.ladder}
        for rec in self.records:
            counts[rec.level.index] = counts.get(rec.level.index, 0) + 1
        return counts

    def level_arrays(self) -> tuple[list, list]:
        """Per-level (inputs, targets) in record order, for model training."""
        xs = {lv.index: [] for lv in self.ladder}
        ys = {lv.index: [] for lv in self.ladder}
        for rec in self.records:
            xs[rec.level.index].append(rec.x)
            ys[rec.level.index].append(rec.y)
        ordered = sorted(xs)
        return (
            [np.asarray(xs[i], dtype=np.float64) for i in ordered],
            [np.asarray(ys[i], dtype=np.float64) for i in ordered],
        )


def _dataset_from_state(state: CampaignState) -> MultiFidelityDataset:
    xs, ys = state.level_arrays()
    xs = [x.reshape(len(y), -1) for x, y in zip(xs, ys)]
    # The acquisition may re-propose an already-evaluated point; objectives
    # are deterministic, so merging exact duplicates loses nothing and keeps
    # the kernel matrices well conditioned.
    merged_x, merged_y = [], []
    for x, y in zip(xs, ys):
        _, keep = np.unique(x, axis=0, return_index=True)
        keep.sort()
        merged_x.append(x[keep])
        merged_y.append(y[keep])
    return MultiFidelityDataset.from_arrays(merged_x, merged_y, noise_variance=DEFAULT_OBS_NOISE)


def initial_design(
    space: DesignSpace, ladder, n: int, objective, rng_seed: int, on_record=None
) -> CampaignState:
    """Evaluate an independent n-point Latin hypercube at every fidelity."""
    if n < 1:
        raise DomainError("n must be >= 1")
    ladder = tuple(ladder)
    if len(ladder) < 2:
        raise DomainError("a multi-fidelity campaign needs at least 2 levels")
    state = CampaignState(ladder=ladder, rng_seed=rng_seed)
    per_level_costs = {lv.index: [] for lv in ladder}
    for level in ladder:
        points = space.sample_lhs(n, substream(rng_seed, DESIGN, level.index))
        for x in points:
            try:
                y, cost = objective.evaluate(x, level)
            except Exception as exc:
                raise CampaignInitError(
                    f"objective failed at level {level.index}, x={np.asarray(x).tolist()}: {exc}"
                ) from exc
            rec = EvaluationRecord(
                x=x, level=level, y=y, cost=cost, iteration=0, phase=PHASE_INITIAL
            )
            state.append(rec)
            per_level_costs[level.index].append(cost)
            if on_record is not None:
                on_record(rec)
    levels = sorted(per_level_costs)
    state.cost_model = CostModel(
        levels=tuple(levels),
        tau=np.asarray([np.mean(per_level_costs[i]) for i in levels]),
        counts=np.asarray([len(per_level_costs[i]) for i in levels]),
    )
    return state


def select_fidelity(
    model: MFDeepGP, x_star, cost: CostModel, config: UCBConfig, rng_seed: int
) -> FidelityLevel:
    """Pick the level maximizing gamma_t * sqrt(beta) * sigma_t(x*).

    Ties (including the degenerate beta = 0 case where every score is 0)
    go to the highest level.
    """
    stats = dgp.predict_all_levels(model, np.asarray(x_star), rng_seed=rng_seed)
    sigmas = np.asarray([s for _, s in stats])
    taus = np.asarray([cost.tau[cost.position(lv)] for lv in model.ladder])
    scores = fidelity_scores(sigmas, taus, config.beta)
    return model.ladder[argmax_highest(scores)]


def _train_from_state(
    state: CampaignState, train_config: DGPTrainConfig, seed: int
) -> MFDeepGP:
    cfg = dataclasses.replace(train_config, rng_seed=seed)
    return dgp.train(_dataset_from_state(state), cfg, ladder=state.ladder)


def continue_run(
    state: CampaignState,
    objective,
    space: DesignSpace,
    config: UCBConfig,
    budget_total: float,
    rng_seed: int,
    train_config: DGPTrainConfig | None = None,
    on_record=None,
) -> CampaignState:
    """Run the BO loop from an existing state until the budget is spent.

    Each iteration's randomness is derived from (seed, stream, iteration),
    so continuing a reloaded state reproduces an uninterrupted run exactly.
    """
    if state.cost_model is None:
        raise StateError("state has no cost model; run the initial design first")
    train_config = train_config or DGPTrainConfig(restarts=4)
    state.budget_total = budget_total
    while state.budget_spent < budget_total:
        k = state.loop_iterations + 1
        model = _train_from_state(state, train_config, derive_seed(rng_seed, TRAIN, k))
        beta_k = config.beta_at(k)
        iter_config = (
            config if beta_k == config.beta
            else dataclasses.replace(config, beta=beta_k, beta_schedule=None)
        )
        x_star = acquisition.solve_ucb(
            model, space, iter_config, derive_seed(rng_seed, ACQUISITION, k)
        )
        level = select_fidelity(
            model, x_star, state.cost_model, iter_config,
            derive_seed(rng_seed, PROPAGATION, k),
        )
        try:
            y, cost = objective.evaluate(x_star, level)
        except Exception as exc:
            state.error = f"objective failed at iteration {k}, level {level.index}: {exc}"
            break
        rec = EvaluationRecord(
            x=x_star, level=level, y=y, cost=cost, iteration=k, phase=PHASE_LOOP
        )
        state.append(rec)
        state.cost_model = update_costs(state.cost_model, level, cost)
        if on_record is not None:
            on_record(rec)
    return state


def run(
    objective,
    space: DesignSpace,
    ladder,
    n: int,
    config: UCBConfig,
    budget_total: float,
    rng_seed: int,
    train_config: DGPTrainConfig | None = None,
    on_record=None,
) -> CampaignState:
    """Full campaign: initial design at every fidelity, then the BO loop."""
    state = initial_design(space, ladder, n, objective, rng_seed, on_record=on_record)
    state.budget_total = budget_total
    if state.budget_spent >= budget_total:
        return state
    return continue_run(
        state, objective, space, config, budget_total, rng_seed,
        train_config=train_config, on_record=on_record,
    )


def recommend(
    state: CampaignState,
    model: MFDeepGP,
    space: DesignSpace,
    rng_seed: int = 0,
    config: UCBConfig | None = None,
) -> tuple[EvaluationRecord, np.ndarray]:
    """Best observed highest-fidelity record plus the posterior-mean maximizer.

    Returns both candidates rather than collapsing them into one answer:
    the observed incumbent is guaranteed real, the model maximizer may
    interpolate beyond the data.
    """
    incumbent = state.incumbent
    if incumbent is None:
        raise StateError("no highest-fidelity record exists yet")
    config = config or UCBConfig()
    mean_config = dataclasses.replace(config, beta=0.0, beta_schedule=None)
    model_best = acquisition.solve_ucb(model, space, mean_config, rng_seed)
    return incumbent, model_best


def run_single_fidelity(
    objective,
    space: DesignSpace,
    n: int,
    config: UCBConfig,
    budget_total: float,
    rng_seed: int,
    restarts: int = 2,
    on_record=None,
) -> CampaignState:
    """UCB baseline that only ever evaluates the highest fidelity.

    Used as the single-fidelity comparison point for the multi-fidelity
    loop: same beta, same budget accounting, plain GP surrogate.
    """
    top = tuple(objective.ladder)[-1]
    state = CampaignState(ladder=(top,), rng_seed=rng_seed)
    points = space.sample_lhs(n, substream(rng_seed, DESIGN, top.index))
    costs = []
    for x in points:
        y, cost = objective.evaluate(x, top)
        rec = EvaluationRecord(
            x=x, level=top, y=y, cost=cost, iteration=0, phase=PHASE_INITIAL
        )
        state.append(rec)
        costs.append(cost)
        if on_record is not None:
            on_record(rec)
    state.cost_model = CostModel(
        levels=(top.index,), tau=np.asarray([np.mean(costs)]), counts=np.asarray([len(costs)])
    )
    state.budget_total = budget_total
    while state.budget_spent < budget_total:
        k = state.loop_iterations + 1
        xs = np.asarray([rec.x for rec in state.records], dtype=np.float64)
        ys = np.asarray([rec.y for rec in state.records], dtype=np.float64)
        data = gp.GPDataset(inputs=xs, targets=ys, noise_variance=DEFAULT_OBS_NOISE)
        init = dgp._default_init_kernel("squared-exponential", xs, ys)
        layer = gp.fit(data, init, restarts=restarts, rng_seed=derive_seed(rng_seed, TRAIN, k))
        model = MFDeepGP(layers=(layer,), ladder=(FidelityLevel(1, top.nominal),))
        iter_config = dataclasses.replace(
            config, beta=config.beta_at(k), beta_schedule=None
        )
        x_star = acquisition.solve_ucb(
            model, space, iter_config, derive_seed(rng_seed, ACQUISITION, k)
        )
        y, cost = objective.evaluate(x_star, top)
        rec = EvaluationRecord(
            x=x_star, level=top, y=y, cost=cost, iteration=k, phase=PHASE_LOOP
        )
        state.append(rec)
        state.cost_model = update_costs(state.cost_model, top, cost)
        if on_record is not None:
            on_record(rec)
    return state
