"""Tunable knobs for the flow solver and the scenario sweep."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class SolverConfig:
    rc_tolerance: float = 1e-9
    lp_tolerance: float = 1e-8
    max_rounds: int = 50
    columns_per_round: int = 1
    detour_factor: float = 3.0  # candidate cost <= factor * shortest cost; inf disables
    k_shortest: int = 8
    max_pricing_probes: int = 64
    max_lp_iterations: int | None = None  # None: scaled to problem size
    objective: str = "inverse_cost"  # or "passengers" (plain sum of d_k f_p^k)

    def __post_init__(self):
        if not (self.rc_tolerance > 0 and self.lp_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.max_rounds < 1 or self.columns_per_round < 1 or self.k_shortest < 1:
            raise ValueError("max_rounds, columns_per_round and k_shortest must be >= 1")
        if not self.detour_factor >= 1:
            raise ValueError("detour_factor must be >= 1")
        if self.objective not in ("inverse_cost", "passengers"):
            raise ValueError(f"unknown objective {self.objective!r}")


@dataclass(frozen=True)
class AssessConfig:
    threshold: float = 100.0
    allocation: str = "proportional"
    solver: SolverConfig = field(default_factory=SolverConfig)


UNBOUNDED_DETOUR = math.inf
