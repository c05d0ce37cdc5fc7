"""Multi-fidelity test objectives and the name registry the CLI consumes."""

from __future__ import annotations

from ..errors import ConfigError
from .base import MultiFidelityObjective
from .forrester import ForresterFamily, forrester_high, forrester_low
from .reactor import (
    GEOMETRY_BOX,
    PlugFlowMetric,
    ReactorGeometry,
    ReactorProxyObjective,
    RTDCurve,
    default_geometry,
    fit_tanks_in_series,
    geometry_to_peclet,
    moments_tank_estimate,
    reactor_proxy_simulate,
    read_rtd_csv,
    tanks_in_series_curve,
    write_rtd_csv,
)

_REGISTRY = {
    "forrester5": lambda seed, nominals, base_costs: ForresterFamily(
        nominals=nominals, base_costs=base_costs
    ),
    "reactor-proxy": lambda seed, nominals, base_costs: ReactorProxyObjective(
        seed=seed, nominals=nominals, base_costs=base_costs
    ),
}


def objective_names() -> list[str]:
    return sorted(_REGISTRY)


def get_objective(
    name: str, seed: int = 0, nominals=None, base_costs=None
) -> MultiFidelityObjective:
    """Instantiate a registered objective by name."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ConfigError(
            f"unknown objective {name!r}; known: {objective_names()}"
        ) from None
    return factory(seed, nominals, base_costs)
