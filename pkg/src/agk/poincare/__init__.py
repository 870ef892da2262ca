from .engine import (
    ChaosMetrics,
    IntegrationError,
    IntegratorConfig,
    OffEnergySurface,
    SectionEvent,
    SeedGrid,
    allowed_region,
    integrate_seeds,
    second_integral,
    section,
    seed_grid,
    seed_on_energy_surface,
    symplectic_step,
)
from .scenarios import REGISTRY, SMOKE, Dataset, Scenario, get_scenario, load_config, run_scenario

__all__ = [
    "ChaosMetrics", "IntegrationError", "IntegratorConfig", "OffEnergySurface", "SectionEvent",
    "SeedGrid", "allowed_region", "integrate_seeds", "second_integral", "section", "seed_grid",
    "seed_on_energy_surface", "symplectic_step", "REGISTRY", "SMOKE", "Dataset", "Scenario",
    "get_scenario", "load_config", "run_scenario",
]
