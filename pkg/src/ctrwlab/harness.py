"""Monte Carlo comparison of normalized CTRW functionals against their
limit laws, with quenched-environment support and machine-readable reports.

One experiment draws M independent functional vectors (one per simulated
path, evaluated at every u in the grid) and M' independent limit vectors
(constant times local time at zero), then compares the two ensembles per u
by Kolmogorov-Smirnov and Wasserstein-1 distances.  Everything is a pure
function of (config, master_seed): replicate k derives its generator from
the master seed and k alone, so reports are identical for any worker count.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from multiprocessing import get_context
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .distances import ks_critical_value, ks_two_sample, wasserstein1
from .environment import (
    DeterministicEnv,
    Kernel,
    PoissonConfig,
    ShotNoiseEnv,
    _panel_prefix,
    _subdivide,
    sample_config,
    theorem5_constant,
)
from .errors import ExperimentConfigError, QuadratureError, ReportIOError
from .levy import DEFAULT_GRID_PER_UNIT, sample_limit_rv
from .rng import RandomSource, spawn_rng
from .stable import Gaussian, JumpLaw, Lattice, SymmetricPareto, SkewedPareto
from .walk import (
    DEFAULT_JUMP_CAP,
    FunctionalSpec,
    WaitLaw,
    lattice_limit_constant,
    normalized_functional,
    simulate_skeleton,
)

THEOREMS = ("T2", "T2-lattice", "T3", "T5")

SCHEMA_VERSION = "1"


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one comparison run."""

    theorem: str
    jump: JumpLaw
    wait: WaitLaw
    functional: FunctionalSpec
    t: float
    u_grid: tuple = (0.25, 0.5, 0.75, 1.0)
    replicates: int = 2000
    limit_replicates: int = 2000
    master_seed: int = 0
    ks_threshold: float = 0.08
    workers: int = 1
    env: Optional[DeterministicEnv] = None
    kernel: Optional[Kernel] = None
    env_window_halfwidth: Optional[float] = None
    escape_probability: float = 0.01
    # Quenched runs vary the walks while holding the configuration fixed:
    # the configuration stream defaults to the master seed but can be pinned.
    env_config_seed: Optional[int] = None
    limit_grid_per_unit: int = DEFAULT_GRID_PER_UNIT
    limit_eps: Optional[float] = None
    jump_cap: int = DEFAULT_JUMP_CAP
    fdd_pairs: tuple = ()
    g_support_halfwidth: float = 12.0
    label: str = ""
    # Diagnostic trend runs compare against short horizons below the
    # production floor of t >= 1e3; they must opt in explicitly.
    allow_short_horizon: bool = False

    def validate(self) -> None:
        problems = []
        if self.theorem not in THEOREMS:
            problems.append(f"unknown theorem {self.theorem!r}")
        if self.replicates < 100 or self.limit_replicates < 100:
            problems.append("replicates and limit_replicates must be >= 100")
        t_floor = 1.0 if self.allow_short_horizon else 1e3
        if self.t < t_floor:
            problems.append(f"t must be at least {t_floor:g}, got {self.t}")
        u = np.asarray(self.u_grid, dtype=float)
        if u.size == 0 or np.any(u <= 0.0) or np.any(u > 1.0) or np.any(np.diff(u) <= 0):
            problems.append("u_grid must be strictly increasing within (0, 1]")
        if not 0.0 < self.ks_threshold <= 1.0:
            problems.append("ks_threshold must be in (0, 1]")
        if self.workers < 1:
            problems.append("workers must be >= 1")
        if self.theorem == "T2":
            if not getattr(self.jump, "has_density", False):
                problems.append(
                    "T2 requires a jump law with an absolutely continuous "
                    "component; use T2-lattice for lattice jumps"
                )
        if self.theorem == "T2-lattice" and not isinstance(self.jump, Lattice):
            problems.append("T2-lattice requires a Lattice jump law")
        if self.theorem in ("T3", "T5"):
            if not self.jump.alpha_attr < 2.0:
                problems.append(
                    "environment theorems require alpha < 2 (normal attraction, "
                    "non-Gaussian)"
                )
            if not getattr(self.jump, "has_density", False):
                problems.append("environment theorems require absolutely "
                                "continuous jumps")
        if self.theorem == "T3" and self.env is None:
            problems.append("T3 requires a deterministic environment")
        if self.theorem == "T5" and self.kernel is None:
            problems.append("T5 requires a shot-noise kernel")
        for pair in self.fdd_pairs:
            if len(pair) != 2 or pair[0] >= pair[1] or not all(p in self.u_grid for p in pair):
                problems.append(f"fdd pair {pair!r} must be an increasing pair from u_grid")
        if problems:
            raise ExperimentConfigError("; ".join(problems))


def _describe(obj) -> dict:
    if obj is None:
        return {"kind": "none"}
    if isinstance(obj, SymmetricPareto):
        return {"kind": "symmetric_pareto", "alpha": obj.alpha, "x_min": obj.x_min}
    if isinstance(obj, SkewedPareto):
        return {
            "kind": "skewed_pareto",
            "alpha": obj.alpha,
            "x_min": obj.x_min,
            "p_right": obj.p_right,
        }
    if isinstance(obj, Gaussian):
        return {"kind": "gaussian", "variance": obj.variance}
    if isinstance(obj, Lattice):
        return {
            "kind": "lattice",
            "a": obj.a,
            "b": obj.b,
            "weights": [[int(n), float(p)] for n, p in obj.weights],
        }
    if isinstance(obj, DeterministicEnv):
        return {"kind": "deterministic_env", "name": obj.name,
                "lambda_bar_inv": obj.lambda_bar_inv}
    if isinstance(obj, Kernel):
        return {"kind": "kernel", "name": obj.name, "bound_c": obj.bound_c,
                "decay_beta": obj.decay_beta, "cutoff_r": obj.cutoff_r}
    cls = type(obj).__name__
    fields = {
        k: v for k, v in vars(obj).items() if isinstance(v, (int, float, str))
    }
    return {"kind": cls.lower(), **fields}


def suggest_window_halfwidth(
    jump: JumpLaw,
    wait_mu: float,
    t: float,
    n_paths: int,
    cutoff_r: float,
    escape_probability: float = 0.01,
) -> float:
    """Window half-width so that, with probability about
    1 - escape_probability, no path in the run leaves the evaluable region.

    Uses the stable tail of the path supremum: the walk makes at most about
    t/mu jumps (delays only slow it down), its displacement scale is
    sigma (t/mu)^(1/alpha), and the standardized supremum tail is bounded
    by a constant multiple of the marginal stable tail.
    """
    alpha = jump.alpha_attr
    n_max = t / wait_mu + 6.0 * math.sqrt(t / wait_mu) + 100.0
    scale = jump.sigma_attr * n_max ** (1.0 / alpha)
    per_path = max(escape_probability / max(n_paths, 1), 1e-12)
    if alpha >= 2.0:
        # standard law at alpha=2 is N(0, 2); crude sup bound via 4 tails
        z = math.sqrt(2.0) * math.sqrt(2.0 * math.log(4.0 / per_path))
    else:
        tail_const = 1.0 / (
            math.gamma(1.0 - alpha) * math.cos(math.pi * alpha / 2.0)
        )
        z = (4.0 * tail_const / per_path) ** (1.0 / alpha)
    return scale * z + cutoff_r + 1.0


def quenched_integral(
    g,
    env: ShotNoiseEnv,
    support_halfwidth: float,
    h_max: float = 0.25,
    order: int = 7,
) -> float:
    """integral of g(x) / Lambda(x, gamma) dx over the fixed configuration,
    by Gauss panels split at the kernel kinks."""
    lo, hi = -support_halfwidth, support_halfwidth
    r = env.kernel.cutoff_r
    if env.config.lo > lo - r or env.config.hi < hi + r:
        raise QuadratureError(
            "configuration window does not cover the integrand support"
        )
    pts = env.config.points
    kinks = np.concatenate([pts, pts - r, pts + r])
    kinks = kinks[(kinks > lo) & (kinks < hi)]
    breakpoints = _subdivide(np.unique(np.concatenate([[lo, hi], kinks])), h_max)

    def integrand(x):
        return np.asarray(g(x), dtype=float) * env.lambda_inv_many(x)

    prefix = _panel_prefix(integrand, breakpoints, order=order)
    return float(prefix[-1])


def _integral_g_over_lambda(g, env: DeterministicEnv) -> float:
    def integrand(x):
        arr = np.array([x])
        return float(np.asarray(g(arr), dtype=float)[0] * env.lambda_inv_many(arr)[0])

    value, err = quad(integrand, -np.inf, np.inf, limit=400)
    if err > 1e-8 * max(abs(value), 1e-12):
        raise QuadratureError(
            f"integral of g/Lambda: error estimate {err:.2e} too large"
        )
    return float(value)


def _integral_f(f) -> float:
    def integrand(x):
        return float(np.asarray(f(np.array([x])), dtype=float)[0])

    value, err = quad(integrand, -np.inf, np.inf, limit=400)
    if err > 1e-8 * max(abs(value), 1e-12):
        raise QuadratureError(f"integral of f: error estimate {err:.2e} too large")
    return float(value)


# Worker context shared with forked processes; set immediately before the
# pool is created and read-only afterwards.
_WORKER_CTX: dict = {}


def _functional_task(k: int):
    ctx = _WORKER_CTX["ctx"]
    rng = spawn_rng(ctx["master_seed"], "walk", k)
    path = simulate_skeleton(
        ctx["jump"],
        ctx["wait"],
        ctx["t"],
        rng,
        env=ctx["path_env"],
        jump_cap=ctx["jump_cap"],
    )
    return normalized_functional(
        path, ctx["functional"], ctx["jump"], ctx["t"], ctx["u_grid"],
        env=ctx["path_env"],
    )


def _limit_task(j: int):
    ctx = _WORKER_CTX["ctx"]
    rng = spawn_rng(ctx["master_seed"], "limit", j)
    return sample_limit_rv(
        ctx["alpha"],
        ctx["beta"],
        ctx["mu"],
        ctx["f_integral"],
        ctx["u_grid"],
        rng,
        env_constant=ctx["env_constant"],
        grid_per_unit=ctx["limit_grid_per_unit"],
        eps=ctx["limit_eps"],
    )


def _map_tasks(task, n: int, workers: int) -> np.ndarray:
    if workers <= 1:
        rows = [task(i) for i in range(n)]
    else:
        chunk = max(1, n // (workers * 8))
        with get_context("fork").Pool(workers) as pool:
            rows = pool.map(task, range(n), chunksize=chunk)
    return np.vstack(rows)


@dataclass
class UComparison:
    u: float
    ks: float
    w1: float
    mean_func: float
    mean_limit: float
    q05_func: float
    q50_func: float
    q95_func: float
    q05_limit: float
    q50_limit: float
    q95_limit: float
    threshold: float
    passed: bool


@dataclass
class ComparisonReport:
    theorem: str
    label: str
    master_seed: int
    t: float
    replicates: int
    limit_replicates: int
    sigma_used: float
    beta_used: float
    mu: float
    f_integral: float
    env_constant: float
    limit_constant: float
    theorem5_factor: Optional[float]
    config_echo: dict
    rows: list
    fdd: list
    passed: bool
    runtime_seconds: float
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "theorem": self.theorem,
            "label": self.label,
            "master_seed": self.master_seed,
            "t": self.t,
            "replicates": self.replicates,
            "limit_replicates": self.limit_replicates,
            "sigma_used": self.sigma_used,
            "beta_used": self.beta_used,
            "mu": self.mu,
            "f_integral": self.f_integral,
            "env_constant": self.env_constant,
            "limit_constant": self.limit_constant,
            "theorem5_factor": self.theorem5_factor,
            "config_echo": self.config_echo,
            "rows": [vars(r).copy() for r in self.rows],
            "fdd": [dict(f) for f in self.fdd],
            "passed": self.passed,
            "runtime_seconds": self.runtime_seconds,
        }


def fdd_joint_check(
    func_matrix: np.ndarray,
    limit_matrix: np.ndarray,
    u_grid,
    u_pair,
    threshold: float,
) -> dict:
    """Compare the joint law at (u1, u2) through its three 1-d projections:
    both marginals and the increment."""
    u = list(np.asarray(u_grid, dtype=float))
    i1, i2 = u.index(float(u_pair[0])), u.index(float(u_pair[1]))
    ks_u1 = ks_two_sample(func_matrix[:, i1], limit_matrix[:, i1])
    ks_u2 = ks_two_sample(func_matrix[:, i2], limit_matrix[:, i2])
    ks_inc = ks_two_sample(
        func_matrix[:, i2] - func_matrix[:, i1],
        limit_matrix[:, i2] - limit_matrix[:, i1],
    )
    return {
        "u1": float(u_pair[0]),
        "u2": float(u_pair[1]),
        "ks_u1": ks_u1,
        "ks_u2": ks_u2,
        "ks_increment": ks_inc,
        "threshold": threshold,
        "passed": bool(max(ks_u1, ks_u2, ks_inc) <= threshold),
    }


def run_experiment(cfg: ExperimentConfig) -> ComparisonReport:
    cfg.validate()
    started = time.perf_counter()

    mu = cfg.wait.mu
    alpha = cfg.jump.alpha_attr
    beta = cfg.jump.beta_attr
    sigma = cfg.jump.sigma_attr
    u_grid = tuple(float(u) for u in cfg.u_grid)

    path_env = None
    thm5_factor = None
    env_constant = 1.0
    gamma_config: Optional[PoissonConfig] = None

    if cfg.theorem == "T2":
        f_integral = (
            cfg.functional.f_integral
            if cfg.functional.f_integral is not None
            else _integral_f(cfg.functional.f)
        )
    elif cfg.theorem == "T2-lattice":
        f_integral = lattice_limit_constant(cfg.jump, cfg.functional.f)
    elif cfg.theorem == "T3":
        path_env = cfg.env
        env_constant = cfg.env.lambda_bar_inv ** (1.0 / alpha - 1.0)
        f_integral = (
            cfg.functional.f_integral
            if cfg.functional.f_integral is not None
            else _integral_g_over_lambda(cfg.functional.f, cfg.env)
        )
    else:  # T5
        halfwidth = cfg.env_window_halfwidth
        if halfwidth is None:
            halfwidth = suggest_window_halfwidth(
                cfg.jump,
                mu,
                cfg.t,
                cfg.replicates,
                cfg.kernel.cutoff_r,
                cfg.escape_probability,
            )
        config_seed = (
            cfg.env_config_seed if cfg.env_config_seed is not None else cfg.master_seed
        )
        env_rng = spawn_rng(config_seed, "environment")
        gamma_config = sample_config((-halfwidth, halfwidth), env_rng)
        path_env = ShotNoiseEnv(kernel=cfg.kernel, config=gamma_config)
        thm5_factor = theorem5_constant(cfg.kernel, alpha)
        env_constant = thm5_factor
        f_integral = quenched_integral(
            cfg.functional.f, path_env, cfg.g_support_halfwidth
        )

    ctx = {
        "master_seed": cfg.master_seed,
        "jump": cfg.jump,
        "wait": cfg.wait,
        "t": cfg.t,
        "u_grid": u_grid,
        "functional": cfg.functional,
        "path_env": path_env,
        "jump_cap": cfg.jump_cap,
        "alpha": alpha,
        "beta": beta,
        "mu": mu,
        "f_integral": f_integral,
        "env_constant": env_constant,
        "limit_grid_per_unit": cfg.limit_grid_per_unit,
        "limit_eps": cfg.limit_eps,
    }
    _WORKER_CTX["ctx"] = ctx
    try:
        func_matrix = _map_tasks(_functional_task, cfg.replicates, cfg.workers)
        limit_matrix = _map_tasks(_limit_task, cfg.limit_replicates, cfg.workers)
    finally:
        _WORKER_CTX.pop("ctx", None)

    rows = []
    for i, u in enumerate(u_grid):
        a = func_matrix[:, i]
        b = limit_matrix[:, i]
        ks = ks_two_sample(a, b)
        qa = np.quantile(a, [0.05, 0.5, 0.95])
        qb = np.quantile(b, [0.05, 0.5, 0.95])
        rows.append(
            UComparison(
                u=u,
                ks=ks,
                w1=wasserstein1(a, b),
                mean_func=float(a.mean()),
                mean_limit=float(b.mean()),
                q05_func=float(qa[0]),
                q50_func=float(qa[1]),
                q95_func=float(qa[2]),
                q05_limit=float(qb[0]),
                q50_limit=float(qb[1]),
                q95_limit=float(qb[2]),
                threshold=cfg.ks_threshold,
                passed=bool(ks <= cfg.ks_threshold),
            )
        )

    fdd = [
        fdd_joint_check(func_matrix, limit_matrix, u_grid, pair, cfg.ks_threshold)
        for pair in cfg.fdd_pairs
    ]

    passed = all(r.passed for r in rows) and all(f["passed"] for f in fdd)
    config_echo = {
        "theorem": cfg.theorem,
        "jump": _describe(cfg.jump),
        "wait": _describe(cfg.wait),
        "env": _describe(cfg.env),
        "kernel": _describe(cfg.kernel),
        "t": cfg.t,
        "u_grid": list(u_grid),
        "replicates": cfg.replicates,
        "limit_replicates": cfg.limit_replicates,
        "master_seed": cfg.master_seed,
        "ks_threshold": cfg.ks_threshold,
        "limit_grid_per_unit": cfg.limit_grid_per_unit,
        "limit_eps": cfg.limit_eps,
        "env_window_points": None if gamma_config is None else gamma_config.count,
        "f_integral_supplied": cfg.functional.f_integral,
        "g_support_halfwidth": cfg.g_support_halfwidth,
    }
    runtime = time.perf_counter() - started
    return ComparisonReport(
        theorem=cfg.theorem,
        label=cfg.label,
        master_seed=cfg.master_seed,
        t=cfg.t,
        replicates=cfg.replicates,
        limit_replicates=cfg.limit_replicates,
        sigma_used=sigma,
        beta_used=beta,
        mu=mu,
        f_integral=f_integral,
        env_constant=env_constant,
        limit_constant=mu ** (1.0 / alpha) * f_integral * env_constant,
        theorem5_factor=thm5_factor,
        config_echo=config_echo,
        rows=rows,
        fdd=fdd,
        passed=passed,
        runtime_seconds=runtime,
    )


def split_self_test(samples: np.ndarray, n_rounds: int, rng: RandomSource) -> float:
    """Fraction of random half-splits of one ensemble whose two-sample KS
    stays below the 99% critical value; a null-calibration sanity check."""
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    half = n // 2
    crit = ks_critical_value(half, n - half, 0.99)
    ok = 0
    for _ in range(n_rounds):
        perm = rng.permutation(n)
        if ks_two_sample(samples[perm[:half]], samples[perm[half:]]) < crit:
            ok += 1
    return ok / n_rounds


def report_json(report: ComparisonReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


def report_csv(report: ComparisonReport) -> str:
    header = (
        "u,ks,w1,mean_func,mean_limit,q05_func,q50_func,q95_func,"
        "q05_limit,q50_limit,q95_limit"
    )
    lines = [header]
    for r in report.rows:
        lines.append(
            f"{r.u:.17g},{r.ks:.17g},{r.w1:.17g},{r.mean_func:.17g},"
            f"{r.mean_limit:.17g},{r.q05_func:.17g},{r.q50_func:.17g},"
            f"{r.q95_func:.17g},{r.q05_limit:.17g},{r.q50_limit:.17g},"
            f"{r.q95_limit:.17g}"
        )
    return "\n".join(lines) + "\n"


def emit_report(report: ComparisonReport, path, fmt: str = "json") -> None:
    """Write the report as schema-versioned JSON or a per-u CSV table."""
    if fmt == "json":
        payload = report_json(report)
    elif fmt == "csv":
        payload = report_csv(report)
    else:
        raise ExperimentConfigError(f"unknown report format {fmt!r}")
    try:
        with open(path, "w") as fh:
            fh.write(payload)
    except OSError as exc:
        raise ReportIOError(path, exc) from exc
