"""Multi-fidelity deep Gaussian process built by sequential composition.

The model is an ordered stack of GP layers, one per fidelity level. Layer
1 maps the design point x to the lowest-fidelity output. Every later
layer t maps (x, z) -> z + correction(x, z), where z is the composed
output of the layers below: fidelity t is modeled as fidelity t-1 plus a
GP-distributed mismatch term evaluated at the augmented input. The
identity component keeps the composition informative when a level has
very few observations (the correction GP then simply contributes little),
and it lets predictive uncertainty accumulate up the stack instead of
collapsing to each layer's own data scale.

Training is greedy: layer 1 is fit on (x_1, y_1); layer t's correction GP
is fit on the level-t inputs augmented with the composed posterior *mean*
of the layers below, against the residuals y_t minus that mean.

Prediction propagates full uncertainty: samples are drawn level by level
through the stack and the reported moments at level t are the
Gaussian-mixture moments over the propagated sample population

    mean     = mean of per-sample predictive means
    variance = mean of per-sample predictive variances
               + variance of per-sample predictive means.

Level-1 predictions bypass the Monte Carlo machinery entirely and are the
plain GP posterior of the first layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gp
from .errors import DomainError, InsufficientDataError, ShapeError, StateError
from .kernels import KernelSpec
from .streams import PROPAGATION, point_hash, substream

DEFAULT_NOMINALS = (0.0, 0.25, 0.5, 0.75, 1.0)

# Declared defaults for the number of propagation samples: a small budget
# while an acquisition optimizer is hammering the model, a larger one for
# reported moments and fidelity selection.
ACQUISITION_SAMPLES = 100
REPORTING_SAMPLES = 2000


@dataclass(frozen=True)
class FidelityLevel:
    """One rung of the fidelity ladder: 1-based index and nominal value in [0, 1]."""

    index: int
    nominal: float

    def __post_init__(self):
        if self.index < 1:
            raise DomainError("fidelity index is 1-based and must be >= 1")
        if not 0.0 <= self.nominal <= 1.0:
            raise DomainError(f"nominal fidelity {self.nominal} outside [0, 1]")


def ladder_from_nominals(nominals) -> list[FidelityLevel]:
    """Build a fidelity ladder, checking that nominals strictly increase."""
    values = [float(v) for v in nominals]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError(f"nominal fidelities must be strictly increasing, got {values}")
    return [FidelityLevel(index=i + 1, nominal=v) for i, v in enumerate(values)]


def default_ladder() -> list[FidelityLevel]:
    """The five-level ladder with nominals 0, 0.25, 0.5, 0.75, 1."""
    return ladder_from_nominals(DEFAULT_NOMINALS)


def _level_index(level) -> int:
    return level.index if isinstance(level, FidelityLevel) else int(level)


@dataclass(frozen=True)
class MultiFidelityDataset:
    """Per-level GP datasets sharing one input dimensionality."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        if len(levels) < 2:
            raise InsufficientDataError("a multi-fidelity dataset needs at least 2 levels")
        d = levels[0].dimension
        for t, ds in enumerate(levels, start=1):
            if ds.dimension != d:
                raise ShapeError(f"level {t} has dimension {ds.dimension}, expected {d}")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_arrays(cls, xs, ys, noise_variance=1e-8) -> "MultiFidelityDataset":
        """Assemble from per-level input/target arrays.

        Raises an insufficient-data error naming the first empty level.
        """
        if len(xs) != len(ys):
            raise ShapeError("xs and ys must have one entry per level")
        for t, (x, y) in enumerate(zip(xs, ys), start=1):
            if len(np.atleast_1d(y)) == 0:
                raise InsufficientDataError(f"level {t} has no observations")
        return cls(
            levels=tuple(
                gp.GPDataset(inputs=x, targets=y, noise_variance=noise_variance)
                for x, y in zip(xs, ys)
            )
        )

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    @property
    def dimension(self) -> int:
        return self.levels[0].dimension


@dataclass(frozen=True)
class DGPTrainConfig:
    """Training knobs for the layer stack."""

    kernel_kind: str = "squared-exponential"
    restarts: int = 3
    rng_seed: int = 0
    propagation_samples: int = REPORTING_SAMPLES


@dataclass(frozen=True)
class MFDeepGP:
    """Trained layer stack plus the ladder it models."""

    layers: tuple
    ladder: tuple
    propagation_samples: int = REPORTING_SAMPLES

    def __post_init__(self):
        if len(self.layers) != len(self.ladder):
            raise ShapeError("layer count must equal ladder length")
        if self.propagation_samples < 1:
            raise DomainError("propagation_samples must be >= 1")
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "ladder", tuple(self.ladder))

    @property
    def num_levels(self) -> int:
        return len(self.layers)

    @property
    def dimension(self) -> int:
        return self.layers[0].dataset.dimension


def _default_init_kernel(kind: str, inputs: np.ndarray, targets: np.ndarray) -> KernelSpec:
    ranges = np.ptp(inputs, axis=0)
    ls = np.where(ranges > 0, 0.5 * ranges, 1.0)
    sv = float(np.var(targets))
    return KernelSpec(kind=kind, lengthscales=ls, signal_variance=sv if sv > 0 else 1.0)


def compose_mean(layers, X) -> np.ndarray:
    """Deterministic mean propagation through a (partial) layer stack."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    m, _ = gp.predict(layers[0], X)
    for layer in layers[1:]:
        correction, _ = gp.predict(layer, np.column_stack([X, m]))
        m = m + correction
    return m


def train(
    data: MultiFidelityDataset,
    config: DGPTrainConfig = DGPTrainConfig(),
    ladder=None,
) -> MFDeepGP:
    """Fit the stack bottom-up.

    Layer 1 is fit on (x_1, y_1). Each later layer t is fit on the level-t
    inputs augmented with the composed posterior mean m of the layers
    below; its GP carries the correction y_t - m(x_t), so the layer's
    predictive is the identity in the augmented coordinate plus that
    learned mismatch. Deterministic given ``config.rng_seed``. ``ladder``
    defaults to evenly spaced nominals when not supplied.
    """
    seeds = np.random.SeedSequence(config.rng_seed).generate_state(data.num_levels)
    layers = []
    for t, ds in enumerate(data.levels, start=1):
        if t == 1:
            inputs, targets = ds.inputs, ds.targets
        else:
            aug = compose_mean(layers, ds.inputs)
            inputs = np.column_stack([ds.inputs, aug])
            targets = ds.targets - aug
        layer_data = gp.GPDataset(
            inputs=inputs, targets=targets, noise_variance=ds.noise_variance
        )
        init = _default_init_kernel(config.kernel_kind, inputs, targets)
        layers.append(
            gp.fit(layer_data, init, restarts=config.restarts, rng_seed=int(seeds[t - 1]))
        )
    if ladder is None:
        ladder = ladder_from_nominals(np.linspace(0.0, 1.0, data.num_levels))
    elif len(ladder) != data.num_levels:
        raise ShapeError(f"ladder has {len(ladder)} levels, dataset has {data.num_levels}")
    return MFDeepGP(
        layers=tuple(layers),
        ladder=tuple(ladder),
        propagation_samples=config.propagation_samples,
    )


def augmented_residuals(model: MFDeepGP) -> float:
    """Max deviation between stored augmenting coordinates and a recompute.

    Recomputes the composed mean of layers 1..t-1 at every layer-t training
    input; returns the largest absolute difference from the stored value.
    """
    worst = 0.0
    for t in range(2, model.num_levels + 1):
        layer = model.layers[t - 1]
        x = layer.dataset.inputs[:, :-1]
        stored = layer.dataset.inputs[:, -1]
        recomputed = compose_mean(model.layers[: t - 1], x)
        worst = max(worst, float(np.max(np.abs(stored - recomputed))))
    return worst


@dataclass(frozen=True)
class LevelTrace:
    """Retained Monte-Carlo state for one level of a propagation pass.

    ``sample_means``/``sample_variances`` hold the per-draw predictive
    moments (None at level 1, which is exact), and ``draws`` the propagated
    output samples that feed the next layer (None at the last propagated
    level, where they are not needed).
    """

    level: int
    mean: np.ndarray
    variance: np.ndarray
    sample_means: np.ndarray | None
    sample_variances: np.ndarray | None
    draws: np.ndarray | None


def _level_normals(model, X, seed, num_samples, base_draws, level, m):
    """Standard-normal draws (m, S) used to sample from the level-`level` predictive."""
    if base_draws is not None:
        z = np.asarray(base_draws[level - 1], dtype=np.float64)
        if z.shape != (num_samples,):
            raise ShapeError(
                f"base draw row {level - 1} has shape {z.shape}, expected ({num_samples},)"
            )
        return np.broadcast_to(z, (m, num_samples))
    rows = [
        substream(seed, PROPAGATION, point_hash(X[i]), level).standard_normal(num_samples)
        for i in range(m)
    ]
    return np.vstack(rows)


def propagate(
    model: MFDeepGP,
    X,
    rng_seed: int = 0,
    num_samples: int | None = None,
    base_draws: np.ndarray | None = None,
    up_to_level: int | None = None,
) -> list[LevelTrace]:
    """Run the sampling recursion and retain the per-level populations.

    With ``base_draws`` (shape (T-1, S) of standard normals) the same draws
    are reused for every query row, which makes downstream functions of the
    output continuous in x (common random numbers). Without it, each row
    owns a stream derived from (seed, point hash, level), so results do not
    depend on batch composition or call order.
    """
    if not model.layers:
        raise StateError("model has no trained layers")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.dimension:
        raise ShapeError(f"query dimension {X.shape[1]} != model dimension {model.dimension}")
    top = model.num_levels if up_to_level is None else _level_index(up_to_level)
    if not 1 <= top <= model.num_levels:
        raise DomainError(f"level {top} outside 1..{model.num_levels}")
    if base_draws is not None:
        base_draws = np.atleast_2d(np.asarray(base_draws, dtype=np.float64))
        S = base_draws.shape[1]
    else:
        S = model.propagation_samples if num_samples is None else int(num_samples)
    if S < 1:
        raise DomainError("need at least one propagation sample")

    m = X.shape[0]
    mean, variance = gp.predict(model.layers[0], X)
    traces = []
    draws = None
    if top > 1:
        z = _level_normals(model, X, rng_seed, S, base_draws, 1, m)
        draws = mean[:, None] + np.sqrt(variance)[:, None] * z
    traces.append(
        LevelTrace(
            level=1, mean=mean, variance=variance,
            sample_means=None, sample_variances=None, draws=draws,
        )
    )
    for t in range(2, top + 1):
        prev = traces[-1].draws
        aug = np.column_stack([np.repeat(X, S, axis=0), prev.reshape(-1)])
        mu_flat, var_flat = gp.predict(model.layers[t - 1], aug)
        # layer predictive = identity in the augmented coordinate + correction GP
        mus = prev + mu_flat.reshape(m, S)
        vars_ = var_flat.reshape(m, S)
        mix_mean = np.mean(mus, axis=1)
        mix_var = np.mean(vars_, axis=1) + np.var(mus, axis=1)
        draws = None
        if t < top:
            z = _level_normals(model, X, rng_seed, S, base_draws, t, m)
            draws = mus + np.sqrt(vars_) * z
        traces.append(
            LevelTrace(
                level=t, mean=mix_mean, variance=mix_var,
                sample_means=mus, sample_variances=vars_, draws=draws,
            )
        )
    return traces


def predict_level(
    model: MFDeepGP,
    x,
    level,
    rng_seed: int = 0,
    num_samples: int | None = None,
    base_draws: np.ndarray | None = None,
) -> tuple[float, float]:
    """Mean and standard deviation of the level-t predictive at one point."""
    t = _level_index(level)
    traces = propagate(
        model, np.atleast_1d(x)[None, :] if np.ndim(x) == 1 else x,
        rng_seed=rng_seed, num_samples=num_samples,
        base_draws=base_draws, up_to_level=t,
    )
    tr = traces[-1]
    return float(tr.mean[0]), float(np.sqrt(max(tr.variance[0], 0.0)))


def predict_all_levels(
    model: MFDeepGP,
    x,
    rng_seed: int = 0,
    num_samples: int | None = None,
    base_draws: np.ndarray | None = None,
) -> list[tuple[float, float]]:
    """(mean, sigma) at every level from one shared propagation pass."""
    traces = propagate(
        model, np.atleast_1d(x)[None, :] if np.ndim(x) == 1 else x,
        rng_seed=rng_seed, num_samples=num_samples, base_draws=base_draws,
    )
    return [
        (float(tr.mean[0]), float(np.sqrt(max(tr.variance[0], 0.0)))) for tr in traces
    ]


def predict_level_many(
    model: MFDeepGP,
    X,
    level,
    rng_seed: int = 0,
    num_samples: int | None = None,
    base_draws: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized predict_level over the rows of X: returns (means, sigmas)."""
    t = _level_index(level)
    traces = propagate(
        model, X, rng_seed=rng_seed, num_samples=num_samples,
        base_draws=base_draws, up_to_level=t,
    )
    tr = traces[-1]
    return tr.mean, np.sqrt(np.maximum(tr.variance, 0.0))


# --- checkpointing ---------------------------------------------------------

_CHECKPOINT_FORMAT = "mfdgp-checkpoint"


def save_checkpoint(model: MFDeepGP, path) -> None:
    """Write the model to a structured text file that round-trips exactly."""
    payload = {
        "format": _CHECKPOINT_FORMAT,
        "version": 1,
        "propagation_samples": model.propagation_samples,
        "ladder": [{"index": lv.index, "nominal": lv.nominal} for lv in model.ladder],
        "layers": [
            {
                "kernel": {
                    "kind": layer.kernel.kind,
                    "lengthscales": layer.kernel.lengthscales.tolist(),
                    "signal_variance": layer.kernel.signal_variance,
                },
                "inputs": layer.dataset.inputs.tolist(),
                "targets": layer.dataset.targets.tolist(),
                "noise_variance": layer.dataset.noise_variance,
            }
            for layer in model.layers
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_checkpoint(path) -> MFDeepGP:
    """Rebuild a model saved by :func:`save_checkpoint`."""
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != _CHECKPOINT_FORMAT:
        raise DomainError(f"{path} is not a model checkpoint")
    layers = []
    for entry in payload["layers"]:
        kernel = KernelSpec(
            kind=entry["kernel"]["kind"],
            lengthscales=np.asarray(entry["kernel"]["lengthscales"], dtype=np.float64),
            signal_variance=entry["kernel"]["signal_variance"],
        )
        data = gp.GPDataset(
            inputs=np.asarray(entry["inputs"], dtype=np.float64),
            targets=np.asarray(entry["targets"], dtype=np.float64),
            noise_variance=entry["noise_variance"],
        )
        layers.append(gp.TrainedGP.from_params(data, kernel))
    ladder = tuple(
        FidelityLevel(index=e["index"], nominal=e["nominal"]) for e in payload["ladder"]
    )
    return MFDeepGP(
        layers=tuple(layers),
        ladder=ladder,
        propagation_samples=payload["propagation_samples"],
    )
