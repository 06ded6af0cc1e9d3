"""Grid simulation of stable Levy motion and its local time at zero, and
sampling of the limiting random variables (constant times local time).

The process is simulated from its exact increment law: over a step of
length dt the increment is stable with scale c = dt in our convention, so
a standard draw scaled by dt^(1/alpha).  Local time at zero is estimated
as the occupation time of [-eps, eps] divided by 2 eps, evaluated on the
simulation grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .rng import RandomSource
from .stable import StableParams, sample_stable

DEFAULT_GRID_PER_UNIT = 100_000


@dataclass
class LevyPath:
    """Values Z(k dt), k = 0..grid_n, of one stable Levy path."""

    alpha: float
    beta: float
    grid_n: int
    horizon_u: float
    values: np.ndarray

    @property
    def dt(self) -> float:
        return self.horizon_u / self.grid_n

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon_u, self.grid_n + 1)


def simulate_levy(
    alpha: float,
    beta: float,
    grid_n: int,
    horizon_u: float,
    rng: RandomSource,
) -> LevyPath:
    """Path with iid stable increments; Z(0) = 0 exactly."""
    if grid_n < 1000:
        raise DomainError(f"grid_n must be at least 1000, got {grid_n}")
    if not horizon_u > 0.0:
        raise DomainError(f"horizon_u must be positive, got {horizon_u}")
    params = StableParams(alpha, beta)  # standard law; dt enters as a scale
    dt = horizon_u / grid_n
    increments = dt ** (1.0 / alpha) * sample_stable(params, rng, grid_n)
    values = np.empty(grid_n + 1)
    values[0] = 0.0
    np.cumsum(increments, out=values[1:])
    return LevyPath(
        alpha=alpha, beta=beta, grid_n=grid_n, horizon_u=horizon_u, values=values
    )


@dataclass(frozen=True)
class LocalTimeEstimate:
    u: float
    eps: float
    value: float
    warning: Optional[str] = None


def local_time_zero(path: LevyPath, eps: float, u_grid) -> list[LocalTimeEstimate]:
    """Occupation-time estimates of the local time at zero up to each u.

    value = dt * #{k : k dt <= u, |Z(k dt)| <= eps} / (2 eps).  Requires
    eps above the path's one-step increment scale dt^(1/alpha) (the window
    must not be jumped across between grid points); estimates carry a
    precision warning when eps is within a factor 10 of it.
    """
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    dt = path.dt
    resolution = dt ** (1.0 / path.alpha)
    if eps < resolution:
        raise DomainError(
            f"eps={eps:.3g} is below the grid resolution scale "
            f"dt^(1/alpha)={resolution:.3g}; refine the grid"
        )
    warning = None
    if eps < 10.0 * resolution:
        warning = (
            f"eps={eps:.3g} is within 10x of the resolution scale "
            f"{resolution:.3g}; estimates may be grid-biased"
        )
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    if np.any(u < 0.0) or np.any(u > path.horizon_u + 1e-12):
        raise DomainError("u_grid must lie within [0, horizon_u]")
    occupancy = np.abs(path.values) <= eps
    cum = np.concatenate(([0], np.cumsum(occupancy)))
    counts = cum[np.searchsorted(path.times, u, side="right")]
    values = dt * counts / (2.0 * eps)
    return [
        LocalTimeEstimate(u=float(ui), eps=eps, value=float(vi), warning=warning)
        for ui, vi in zip(u, values)
    ]


def default_eps(alpha: float, grid_n: int, horizon_u: float) -> float:
    """10x the grid resolution scale, per the precision precondition."""
    dt = horizon_u / grid_n
    return 10.0 * dt ** (1.0 / alpha)


def dump_levy_path(path: LevyPath, destination) -> None:
    """Columnar text dump, one grid point per line: ``k t_k Z(t_k)``."""
    times = path.times
    with open(destination, "w") as fh:
        for k in range(path.grid_n + 1):
            fh.write(f"{k} {times[k]:.17g} {path.values[k]:.17g}\n")


def sample_limit_rv(
    alpha: float,
    beta: float,
    mu: float,
    f_integral: float,
    u_grid,
    rng: RandomSource,
    env_constant: float = 1.0,
    grid_per_unit: int = DEFAULT_GRID_PER_UNIT,
    eps: Optional[float] = None,
) -> np.ndarray:
    """One draw of the limit vector: constant * local time at each u.

    The constant is mu^(1/alpha) * f_integral * env_constant, covering the
    three limit theorems: env_constant = 1 for the plain walk, the
    (mean of 1/Lambda)^(1/alpha - 1) factor for a deterministic
    environment, or the averaged-potential factor in the quenched case
    (where f_integral is the integral of g/Lambda over the fixed
    configuration).
    """
    if not mu > 0.0:
        raise DomainError(f"mu must be positive, got {mu}")
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    horizon = float(np.max(u))
    grid_n = max(1000, int(round(grid_per_unit * horizon)))
    path = simulate_levy(alpha, beta, grid_n, horizon, rng)
    if eps is None:
        eps = default_eps(alpha, grid_n, horizon)
    estimates = local_time_zero(path, eps, u)
    constant = mu ** (1.0 / alpha) * f_integral * env_constant
    return constant * np.array([e.value for e in estimates])
