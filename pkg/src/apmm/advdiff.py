"""Micro-macro solver for the advection-diffusion collision operator.

The operator ``L f + eps v M A <f>`` adds the drift source
``v M A rho / eps`` to the micro equation.  The drift is treated with the
explicit tableau, so it only enters the stage bracket through previous
stages; the periodic solver already carries that term, and this module
pins the drift-specific entry points and configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from apmm.periodic import (
    ConfigError,
    MicroMacroSolver,
    MicroMacroState,
    RunConfig,
    StageHistory,
    init_non_well_prepared,
)

__all__ = [
    "DEFAULT_DRIFT",
    "DriftConfig",
    "with_drift",
    "AdvDiffSolver",
    "stage_g_advdiff",
    "stage_rho_advdiff",
    "step_advdiff",
    "run_advdiff",
]

DEFAULT_DRIFT = 0.5


@dataclass(frozen=True)
class DriftConfig:
    A: float = DEFAULT_DRIFT

    def check(self, eps: float) -> None:
        if abs(eps * self.A) >= 1:
            raise ConfigError(f"|eps A| must be < 1, got {abs(eps * self.A)}")


def with_drift(config: RunConfig, drift: DriftConfig | float = DEFAULT_DRIFT) -> RunConfig:
    A = drift.A if isinstance(drift, DriftConfig) else float(drift)
    DriftConfig(A).check(config.eps)
    return replace(config, drift=A)


class AdvDiffSolver(MicroMacroSolver):
    """Periodic solver with a nonzero drift coefficient."""

    @property
    def drift(self) -> float:
        return self.config.drift

    def drift_velocity(self) -> float:
        """Advection speed ``-<v L^-1(v M)> A = kappa A`` of the limit equation."""
        from apmm.collision import pseudo_inverse_apply

        grid = self.config.velocity
        u = pseudo_inverse_apply(self.config.collision, grid.vM)
        return -float(grid.bracket(grid.v * u)) * self.drift


def stage_g_advdiff(solver: MicroMacroSolver, j: int, hist: StageHistory, rho_j, state):
    return solver.stage_g(j, hist, rho_j, state)


def stage_rho_advdiff(solver: MicroMacroSolver, j: int, hist: StageHistory, state):
    return solver.stage_rho(j, hist, state)


def step_advdiff(solver: MicroMacroSolver, state: MicroMacroState) -> MicroMacroState:
    return solver.step(state)


def run_advdiff(config: RunConfig, drift=DEFAULT_DRIFT, init=None, profile=None, backend=None):
    config = with_drift(config, drift)
    profile = np.sin if profile is None else profile
    init = init_non_well_prepared if init is None else init
    solver = AdvDiffSolver(config)
    return solver.run(init(config, profile), backend=backend)
