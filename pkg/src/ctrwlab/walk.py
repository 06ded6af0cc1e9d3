"""Continuous-time random walks stored as skeletons (visited sites plus
holding times) and exact evaluation of additive functionals.

A path is generated from iid jumps ``xi_k`` and iid positive waits
``theta_k``; the sojourn at the (k-1)-th visited site is ``theta_k`` for the
plain walk and ``theta_k / Lambda(S_(k-1))`` when an environment delays the
walker (the origin hold is included).  Because the path is piecewise
constant, ``integral_0^T f(X_s) ds`` is a finite sum of hold times weighted
by f at the visited sites plus one partial term; no quadrature is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import DivergentSumError, DomainError, JumpCapError, SimulationError
from .rng import RandomSource
from .stable import JumpLaw, Lattice, norm_constant


@dataclass(frozen=True)
class Exponential:
    """Exponential waits with the given mean."""

    mean: float = 1.0

    def __post_init__(self):
        if not self.mean > 0.0:
            raise DomainError(f"mean must be positive, got {self.mean}")

    @property
    def mu(self) -> float:
        return self.mean

    def sample(self, rng: RandomSource, size=None):
        return self.mean * rng.standard_exponential(size)


@dataclass(frozen=True)
class ParetoWait:
    """Positive Pareto waits; integrable only for index > 1."""

    index: float
    x_min: float = 1.0

    def __post_init__(self):
        if not self.index > 1.0:
            raise DomainError(
                f"wait index must exceed 1 for an integrable wait, got {self.index}"
            )
        if not self.x_min > 0.0:
            raise DomainError(f"x_min must be positive, got {self.x_min}")

    @property
    def mu(self) -> float:
        return self.index * self.x_min / (self.index - 1.0)

    def sample(self, rng: RandomSource, size=None):
        return self.x_min * rng.random(size) ** (-1.0 / self.index)


@dataclass(frozen=True)
class GammaWait:
    shape: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0.0 and self.scale > 0.0):
            raise DomainError("shape and scale must be positive")

    @property
    def mu(self) -> float:
        return self.shape * self.scale

    def sample(self, rng: RandomSource, size=None):
        return rng.gamma(self.shape, self.scale, size)


@dataclass(frozen=True)
class DeterministicWait:
    value: float

    def __post_init__(self):
        if not self.value > 0.0:
            raise DomainError(f"value must be positive, got {self.value}")

    @property
    def mu(self) -> float:
        return self.value

    def sample(self, rng: RandomSource, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)


WaitLaw = Union[Exponential, ParetoWait, GammaWait, DeterministicWait]

DEFAULT_JUMP_CAP = 10**8


@dataclass
class PathSkeleton:
    """The embedded walk and its holding times up to a horizon.

    ``positions[k]`` is the site S_k occupied after k jumps (S_0 = 0) and
    ``holds[k]`` is the sojourn that starts there, so both arrays have
    ``n_jumps + 1`` entries; the final hold is the one straddling the
    horizon.  Renewal bracketing: ``sum(holds[:-1]) <= horizon_t <
    sum(holds)``.
    """

    positions: np.ndarray
    holds: np.ndarray
    horizon_t: float
    n_jumps: int

    def __post_init__(self):
        assert len(self.positions) == self.n_jumps + 1
        assert len(self.holds) == self.n_jumps + 1

    @property
    def jump_times(self) -> np.ndarray:
        """tau_k = end of the k-th hold, k = 1..n_jumps+1."""
        return np.cumsum(self.holds)

    def check_bracketing(self) -> None:
        completed = float(np.sum(self.holds[:-1]))
        total = completed + float(self.holds[-1])
        if not (completed <= self.horizon_t < total):
            raise SimulationError(
                f"renewal bracketing violated: sum(holds[:-1])={completed!r}, "
                f"t={self.horizon_t!r}, sum(holds)={total!r}"
            )


def simulate_skeleton(
    jump: JumpLaw,
    wait: WaitLaw,
    horizon_t: float,
    rng: RandomSource,
    env=None,
    jump_cap: int = DEFAULT_JUMP_CAP,
) -> PathSkeleton:
    """Generate one path up to ``horizon_t``.

    With ``env`` given, the sojourn at site S_(k-1) is theta_k multiplied by
    the inverse intensity at that site.  Generation stops at the first hold
    whose cumulative time exceeds the horizon; that hold is kept as the
    straddling entry.
    """
    if not horizon_t > 0.0:
        raise DomainError(f"horizon_t must be positive, got {horizon_t}")

    block = int(min(max(1024, 1.25 * horizon_t / wait.mu), 2**20))
    pos_chunks = [np.zeros(1)]
    hold_chunks = []
    elapsed = 0.0
    count = 0  # jumps fully committed so far
    last_site = 0.0

    while True:
        theta = np.asarray(wait.sample(rng, block), dtype=float)
        xi = np.asarray(jump.sample(rng, block), dtype=float)
        sites_after = last_site + np.cumsum(xi)
        # hold k of this block is spent at the site occupied before jump k
        sites_during = np.concatenate(([last_site], sites_after[:-1]))
        if env is None:
            holds = theta
        else:
            lam_inv = np.asarray(env.lambda_inv_many(sites_during), dtype=float)
            if not np.all(np.isfinite(lam_inv)) or np.any(lam_inv <= 0.0):
                raise SimulationError(
                    "environment produced a nonpositive or nonfinite intensity"
                )
            holds = theta * lam_inv

        cumhold = elapsed + np.cumsum(holds)
        exceed = np.nonzero(cumhold > horizon_t)[0]
        if exceed.size:
            j = int(exceed[0])  # hold j (block-local) straddles the horizon
            if count + j > jump_cap:
                raise JumpCapError(jump_cap, horizon_t)
            pos_chunks.append(sites_after[:j])
            hold_chunks.append(holds[: j + 1])
            count += j
            break
        if count + block > jump_cap:
            raise JumpCapError(jump_cap, horizon_t)
        pos_chunks.append(sites_after)
        hold_chunks.append(holds)
        count += block
        elapsed = float(cumhold[-1])
        last_site = float(sites_after[-1])

    positions = np.concatenate(pos_chunks)
    holds = np.concatenate(hold_chunks)
    path = PathSkeleton(
        positions=positions, holds=holds, horizon_t=horizon_t, n_jumps=count
    )
    assert float(np.sum(holds[:-1])) <= horizon_t < float(np.sum(holds))
    return path


def position_at(path: PathSkeleton, s: float) -> float:
    """The walker's location at time ``s`` (right-continuous at jumps)."""
    if not 0.0 <= s <= path.horizon_t:
        raise DomainError(f"s={s} outside [0, {path.horizon_t}]")
    completed = int(np.searchsorted(path.jump_times, s, side="right"))
    return float(path.positions[min(completed, path.n_jumps)])


@dataclass(frozen=True)
class FunctionalSpec:
    """The integrand of an additive functional.

    ``variant="plain"`` integrates ``f(X_s)``; ``variant="env_divided"``
    integrates ``f(X_s) / Lambda(X_s)`` and needs an environment at
    evaluation time.  ``f_integral`` is the constant replacing the
    integral in the limit law (dx-integral of the effective integrand, or
    the lattice sum); it may be left None and filled in by the caller.
    """

    f: Callable[[np.ndarray], np.ndarray]
    f_integral: Optional[float] = None
    variant: str = "plain"

    def __post_init__(self):
        if self.variant not in ("plain", "env_divided"):
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.f_integral is not None and not math.isfinite(self.f_integral):
            raise DomainError("f_integral must be finite when supplied")

    def values_at(self, sites: np.ndarray, env=None) -> np.ndarray:
        vals = np.asarray(self.f(sites), dtype=float)
        if self.variant == "env_divided":
            if env is None:
                raise DomainError("env_divided functional requires an environment")
            vals = vals * np.asarray(env.lambda_inv_many(sites), dtype=float)
        return vals


def additive_functional(
    path: PathSkeleton,
    spec: FunctionalSpec,
    u_grid,
    env=None,
) -> np.ndarray:
    """Exact values of integral_0^(t u) f(X_s) ds for each u in ``u_grid``.

    Computed from the holding-time decomposition: completed holds contribute
    ``hold * f(site)``, the straddled hold contributes its elapsed part.
    """
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise DomainError("u_grid must lie in [0, 1]")
    fvals = spec.values_at(path.positions, env=env)
    tau = np.concatenate(([0.0], np.cumsum(path.holds)))
    prefix = np.concatenate(([0.0], np.cumsum(path.holds * fvals)))
    cutoffs = u * path.horizon_t
    done = np.searchsorted(tau[1:], cutoffs, side="right")
    return prefix[done] + (cutoffs - tau[done]) * fvals[done]


def normalized_functional(
    path: PathSkeleton,
    spec: FunctionalSpec,
    law: JumpLaw,
    t: float,
    u_grid,
    env=None,
) -> np.ndarray:
    """c_t-scaled additive functional, with c_t from the jump law's
    attraction metadata (sigma t^(1/alpha - 1) under normal attraction)."""
    return norm_constant(law, t) * additive_functional(path, spec, u_grid, env=env)


def lattice_limit_constant(
    law: Lattice,
    f: Callable[[np.ndarray], np.ndarray],
    tol: float = 1e-10,
    n_start: int = 16,
    n_cap: int = 2**22,
) -> float:
    """b * sum over n of f(a + b n), the lattice replacement for the
    dx-integral in the limit law.

    The series is truncated symmetrically with doubling range until two
    consecutive doublings change the partial sum by less than ``tol``
    relatively; failure to stabilize raises ``DivergentSumError``.
    """
    if not isinstance(law, Lattice):
        raise DomainError("lattice_limit_constant requires a Lattice jump law")
    a, b = law.offset, law.b

    def partial(n: int) -> float:
        ns = np.arange(-n, n + 1)
        return b * float(np.sum(f(a + b * ns)))

    n = n_start
    prev = partial(n)
    stable_rounds = 0
    while n <= n_cap:
        n *= 2
        cur = partial(n)
        if abs(cur - prev) <= tol * (1.0 + abs(cur)):
            stable_rounds += 1
            if stable_rounds >= 2:
                return cur
        else:
            stable_rounds = 0
        prev = cur
    raise DivergentSumError(
        f"lattice series did not stabilize within |n| <= {n_cap} "
        f"(last partial sum {prev!r})"
    )


def dump_skeleton(path: PathSkeleton, destination) -> None:
    """Write the skeleton in the columnar text format, one event per line:
    ``k S_k h_(k+1)`` (site index, site, sojourn starting there)."""
    with open(destination, "w") as fh:
        for k in range(path.n_jumps + 1):
            fh.write(f"{k} {path.positions[k]:.17g} {path.holds[k]:.17g}\n")


def load_skeleton(source, horizon_t: float) -> PathSkeleton:
    """Read a skeleton written by ``dump_skeleton``."""
    ks, sites, holds = [], [], []
    with open(source) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            ks.append(int(parts[0]))
            sites.append(float(parts[1]))
            holds.append(float(parts[2]))
    if ks != list(range(len(ks))):
        raise DomainError("skeleton file has nonconsecutive indices")
    return PathSkeleton(
        positions=np.asarray(sites),
        holds=np.asarray(holds),
        horizon_t=horizon_t,
        n_jumps=len(ks) - 1,
    )
