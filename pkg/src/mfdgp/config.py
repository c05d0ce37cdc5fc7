"""Campaign configuration: sectioned key/value text files.

The format is INI-style with three sections. Unknown sections or keys are
errors (fail-closed), so typos cannot silently fall back to defaults.
``cmd_init`` writes a fully commented template that parses back equal to
the built-in defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dgp import DEFAULT_NOMINALS, ladder_from_nominals
from .errors import ConfigError
from .objectives import get_objective, objective_names
from .space import DesignSpace

_SCHEMA = {
    "campaign": {"objective", "n", "beta", "budget", "seed", "out"},
    "space": {"lower", "upper"},
    "fidelity": {"nominals", "base_costs"},
}


@dataclass
class CampaignConfig:
    """Everything a campaign run needs, resolvable to live objects."""

    objective: str = "forrester5"
    n: int = 1
    beta: float = 2.0
    budget: float = 60.0
    seed: int = 0
    out: str = "campaign-out"
    lower: list = field(default_factory=lambda: [0.0])
    upper: list = field(default_factory=lambda: [1.0])
    nominals: list = field(default_factory=lambda: list(DEFAULT_NOMINALS))
    base_costs: list | None = None

    def validate(self) -> "CampaignConfig":
        if self.objective not in objective_names():
            raise ConfigError(
                f"unknown objective {self.objective!r}; known: {objective_names()}"
            )
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if self.budget <= 0:
            raise ConfigError("budget must be > 0")
        if len(self.lower) != len(self.upper):
            raise ConfigError("lower and upper bounds must have the same length")
        if any(a >= b for a, b in zip(self.lower, self.upper)):
            raise ConfigError("each lower bound must be strictly below its upper bound")
        if self.base_costs is not None and len(self.base_costs) != len(self.nominals):
            raise ConfigError("base_costs must have one entry per fidelity level")
        objective = self.build_objective()
        if len(self.lower) != objective.dimension:
            raise ConfigError(
                f"bounds have dimension {len(self.lower)}, objective "
                f"{self.objective!r} expects {objective.dimension}"
            )
        return self

    def build_objective(self):
        return get_objective(
            self.objective,
            seed=self.seed,
            nominals=self.nominals,
            base_costs=self.base_costs,
        )

    def build_space(self) -> DesignSpace:
        return DesignSpace(lower=self.lower, upper=self.upper)

    def build_ladder(self):
        return ladder_from_nominals(self.nominals)

    def as_payload(self) -> dict:
        return {
            "objective": self.objective,
            "n": self.n,
            "beta": self.beta,
            "budget": self.budget,
            "seed": self.seed,
            "out": self.out,
            "lower": list(map(float, self.lower)),
            "upper": list(map(float, self.upper)),
            "nominals": list(map(float, self.nominals)),
            "base_costs": None if self.base_costs is None else list(map(float, self.base_costs)),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "CampaignConfig":
        return cls(**payload).validate()


def _float_list(raw: str) -> list[float]:
    return [float(tok) for tok in raw.replace(",", " ").split()]


def parse_config(path) -> CampaignConfig:
    """Read and validate a config file; unknown keys are errors."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    text = Path(path).read_text()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}] in {path}")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}] of {path}")

    cfg = CampaignConfig()
    try:
        camp = parser["campaign"] if parser.has_section("campaign") else {}
        if "objective" in camp:
            cfg.objective = camp["objective"].strip()
        if "n" in camp:
            cfg.n = int(camp["n"])
        if "beta" in camp:
            cfg.beta = float(camp["beta"])
        if "budget" in camp:
            cfg.budget = float(camp["budget"])
        if "seed" in camp:
            cfg.seed = int(camp["seed"])
        if "out" in camp:
            cfg.out = camp["out"].strip()
        if parser.has_section("space"):
            if "lower" in parser["space"]:
                cfg.lower = _float_list(parser["space"]["lower"])
            if "upper" in parser["space"]:
                cfg.upper = _float_list(parser["space"]["upper"])
        if parser.has_section("fidelity"):
            fid = parser["fidelity"]
            if "nominals" in fid and fid["nominals"].strip():
                cfg.nominals = _float_list(fid["nominals"])
            if "base_costs" in fid and fid["base_costs"].strip():
                cfg.base_costs = _float_list(fid["base_costs"])
    except ValueError as exc:
        raise ConfigError(f"invalid value in {path}: {exc}") from exc
    return cfg.validate()


TEMPLATE = """\
# Campaign configuration. Unknown sections or keys are rejected.

[campaign]
# Objective registry name: forrester5 | reactor-proxy
objective = forrester5
# Initial Latin-hypercube samples per fidelity level
n = 1
# UCB exploration weight (the acquisition is mean + sqrt(beta) * sigma)
beta = 2.0
# Total evaluation budget in cost units (initial design included)
budget = 60.0
# Root random seed; every random stream in the run derives from it
seed = 0
# Output directory for the results log, summary and report files
out = campaign-out

[space]
# Design box, one value per dimension (comma- or space-separated).
# Must match the objective's dimension (forrester5: 1, reactor-proxy: 4).
lower = 0.0
upper = 1.0

[fidelity]
# Nominal fidelity of each level, strictly increasing in [0, 1]
nominals = 0.0, 0.25, 0.5, 0.75, 1.0
# Optional per-level base costs, one per level; blank = objective defaults
base_costs =
"""


def write_template(path) -> None:
    Path(path).write_text(TEMPLATE)


def default_config() -> CampaignConfig:
    return CampaignConfig().validate()
