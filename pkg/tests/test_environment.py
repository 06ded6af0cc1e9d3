import math

import numpy as np
import pytest

from ctrwlab.environment import (
    DeterministicEnv,
    Kernel,
    PoissonConfig,
    ShotNoiseEnv,
    bump_kernel,
    cesaro_error,
    lambda_inv,
    load_config,
    mc_mean_lambda_inv,
    mean_lambda_inv_analytic,
    periodic_env,
    potential,
    power_kernel,
    sample_config,
    save_config,
    sup_growth_check,
    theorem5_constant,
)
from ctrwlab.errors import BoundaryError, DomainError
from ctrwlab.rng import spawn_rng

SEED = 20240808


def zero_kernel() -> Kernel:
    return Kernel(
        phi=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        bound_c=1.0,
        decay_beta=1.0,
        cutoff_r=1.0,
        compact_support=True,
        name="zero",
    )


def hat_kernel(amplitude: float = math.log(2.0)) -> Kernel:
    # linear hat A*max(0, 1-|x|); continuous, compact support
    return Kernel(
        phi=lambda x: amplitude * np.clip(1.0 - np.abs(x), 0.0, None),
        bound_c=2.0 * amplitude,
        decay_beta=1.0,
        cutoff_r=1.0,
        compact_support=True,
        name="hat",
    )


def lorentz_kernel() -> Kernel:
    # phi(x) = 1/(1+x^2): beta = 1 envelope with C = 1
    return Kernel(
        phi=lambda x: 1.0 / (1.0 + np.asarray(x, dtype=float) ** 2),
        bound_c=1.0,
        decay_beta=1.0,
        cutoff_r=200.0,
        name="lorentz",
    )


class TestKernel:
    def test_envelope_violation_rejected(self):
        with pytest.raises(DomainError):
            Kernel(
                phi=lambda x: np.full_like(np.asarray(x, dtype=float), 5.0),
                bound_c=1.0,
                decay_beta=1.0,
                cutoff_r=1.0,
            )

    def test_negative_kernel_rejected(self):
        with pytest.raises(DomainError):
            Kernel(
                phi=lambda x: -np.ones_like(np.asarray(x, dtype=float)),
                bound_c=1.0,
                decay_beta=1.0,
                cutoff_r=1.0,
            )

    def test_power_kernel_tail_bound(self):
        k = power_kernel(0.5, 3.0, tail_tol=1e-6)
        assert k.tail_bound <= 1e-6 * (1.0 + 1e-9)

    def test_bump_kernel_exact_truncation(self):
        assert bump_kernel(0.5).tail_bound == 0.0


class TestPoissonConfig:
    def test_zero_length_window(self):
        cfg = sample_config((0.0, 0.0), spawn_rng(SEED, "empty"))
        assert cfg.count == 0

    def test_count_concentration(self):
        cfg = sample_config((0.0, 1000.0), spawn_rng(SEED, "count"))
        assert 900 <= cfg.count <= 1100  # +-3.16 sigma band

    def test_points_sorted_and_in_window(self):
        cfg = sample_config((-5.0, 5.0), spawn_rng(SEED, "sorted"))
        assert np.all(np.diff(cfg.points) >= 0)
        assert np.all((cfg.points >= -5.0) & (cfg.points <= 5.0))

    def test_disjoint_counts_uncorrelated(self):
        rng = spawn_rng(SEED, "indep", 0)
        left, right = [], []
        for _ in range(1000):
            cfg = sample_config((0.0, 2e4), rng)
            left.append(np.searchsorted(cfg.points, 1e4))
            right.append(cfg.count - left[-1])
        corr = np.corrcoef(left, right)[0, 1]
        assert abs(corr) < 0.05

    def test_save_load_round_trip(self, tmp_path):
        cfg = sample_config((-3.0, 7.0), spawn_rng(SEED, "io"))
        dest = tmp_path / "config.txt"
        save_config(cfg, dest)
        loaded = load_config(dest)
        assert loaded.lo == cfg.lo and loaded.hi == cfg.hi
        assert np.array_equal(loaded.points, cfg.points)


class TestPotential:
    def test_empty_config(self):
        env = ShotNoiseEnv(
            kernel=bump_kernel(), config=PoissonConfig(np.array([]), -10.0, 10.0)
        )
        assert potential(env, 0.0) == 0.0
        assert lambda_inv(env, 0.0) == 1.0

    def test_single_point_lorentzian(self):
        env = ShotNoiseEnv(
            kernel=lorentz_kernel(),
            config=PoissonConfig(np.array([0.0]), -500.0, 500.0),
        )
        assert potential(env, 1.0) == pytest.approx(0.5, rel=1e-12)

    def test_uncut_sum_oracle(self):
        # small cutoff versus a direct sum over every point
        kernel = power_kernel(0.5, 3.0, tail_tol=1e-3)
        cfg = sample_config((-60.0, 60.0), spawn_rng(SEED, "uncut"))
        env = ShotNoiseEnv(kernel=kernel, config=cfg)
        xs = np.linspace(-10.0, 10.0, 41)
        truncated = env.potential_many(xs)
        full = np.array(
            [float(np.sum(kernel.phi(x - cfg.points))) for x in xs]
        )
        assert np.all(truncated <= full + 1e-12)
        assert np.max(full - truncated) < 5.0 * kernel.tail_bound

    def test_boundary_error(self):
        env = ShotNoiseEnv(
            kernel=bump_kernel(), config=PoissonConfig(np.array([0.0]), -2.0, 2.0)
        )
        with pytest.raises(BoundaryError):
            potential(env, 1.5)

    def test_reciprocal_identity(self):
        cfg = sample_config((-30.0, 30.0), spawn_rng(SEED, "recip"))
        env = ShotNoiseEnv(kernel=bump_kernel(), config=cfg)
        xs = np.linspace(-20.0, 20.0, 100)
        assert np.max(np.abs(env.lambda_many(xs) * env.lambda_inv_many(xs) - 1.0)) < 1e-12

    def test_inverse_intensity_at_least_one(self):
        # phi >= 0 forces 1/Lambda = exp(potential) >= 1 everywhere
        cfg = sample_config((-50.0, 50.0), spawn_rng(SEED, "geq1"))
        env = ShotNoiseEnv(kernel=bump_kernel(), config=cfg)
        xs = np.linspace(-40.0, 40.0, 5000)
        assert np.min(env.lambda_inv_many(xs)) >= 1.0

    def test_potential_log_two_inverts_to_two(self):
        env = ShotNoiseEnv(
            kernel=bump_kernel(math.log(2.0)),
            config=PoissonConfig(np.array([5.0]), -10.0, 20.0),
        )
        # at the point itself the bump contributes its full amplitude
        assert lambda_inv(env, 5.0) == pytest.approx(2.0, rel=1e-12)


class TestExponentialMoment:
    def test_zero_exponent(self):
        assert mean_lambda_inv_analytic(bump_kernel(), 0.0) == 1.0

    def test_zero_kernel(self):
        assert mean_lambda_inv_analytic(zero_kernel(), 1.0) == 1.0

    def test_hat_kernel_closed_form(self):
        # integral of (2^(1-|x|) - 1) over [-1, 1] equals 2(1/ln 2 - 1)
        expected = math.exp(2.0 * (1.0 / math.log(2.0) - 1.0))
        assert mean_lambda_inv_analytic(hat_kernel(), 1.0) == pytest.approx(
            expected, rel=1e-10
        )

    def test_hat_kernel_against_monte_carlo(self):
        analytic = mean_lambda_inv_analytic(hat_kernel(), 1.0)
        mc, se = mc_mean_lambda_inv(hat_kernel(), 10**4, spawn_rng(SEED, "hat-mc"))
        assert abs(mc - analytic) < 3.0 * se
        assert abs(mc - analytic) / analytic < 0.01

    def test_stationarity_across_locations(self):
        # the law of Lambda(x) does not depend on x
        kernel = bump_kernel()
        rng = spawn_rng(SEED, "stationary")
        vals0, vals37 = [], []
        for _ in range(3000):
            cfg = sample_config((-3.0, 41.0), rng)
            env = ShotNoiseEnv(kernel=kernel, config=cfg)
            out = env.lambda_inv_many(np.array([0.0, 37.2]))
            vals0.append(out[0])
            vals37.append(out[1])
        diff = np.array(vals0) - np.array(vals37)
        se = diff.std(ddof=1) / math.sqrt(len(diff))
        assert abs(diff.mean()) < 3.0 * se


class TestTheorem5Constant:
    def test_zero_kernel_gives_one(self):
        assert theorem5_constant(zero_kernel(), 1.5) == 1.0

    def test_alpha_domain(self):
        with pytest.raises(DomainError):
            theorem5_constant(bump_kernel(), 1.0)
        with pytest.raises(DomainError):
            theorem5_constant(bump_kernel(), 2.0)

    def test_consistency_with_moment(self):
        k = bump_kernel(0.4)
        alpha = 1.5
        expected = mean_lambda_inv_analytic(k, 1.0) ** (1.0 / alpha - 1.0)
        assert theorem5_constant(k, alpha) == pytest.approx(expected, rel=1e-12)


class TestCesaroError:
    def test_constant_environment_is_exact_zero(self):
        # a truly constant environment: zero kernel (ensemble mean 1) or a
        # deterministic flat profile; either way the deviation is exactly 0
        cfg = PoissonConfig(np.array([]), -200.0, 200.0)
        env = ShotNoiseEnv(kernel=zero_kernel(), config=cfg)
        assert cesaro_error(env, 10.0, 1.0) == pytest.approx(0.0, abs=1e-14)
        flat = DeterministicEnv(
            lambda_fn=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            lambda_bar_inv=1.0,
        )
        assert cesaro_error(flat, 10.0, 1.0) == pytest.approx(0.0, abs=1e-13)

    def test_periodic_profile_full_periods(self):
        env = periodic_env(2.0, 1.0, 1.0)
        assert cesaro_error(env, 5.0, 1.2) < 1e-6

    def test_window_too_small(self):
        cfg = PoissonConfig(np.array([0.0]), -50.0, 50.0)
        env = ShotNoiseEnv(kernel=bump_kernel(), config=cfg)
        with pytest.raises(BoundaryError):
            cesaro_error(env, 10.0, 2.0)

    def test_shotnoise_error_shrinks_with_t(self):
        # single-config smoke version of the Cesaro-convergence trend
        cfg = sample_config((-10102.0, 10102.0), spawn_rng(77, "ces", 1))
        env = ShotNoiseEnv(kernel=bump_kernel(0.3), config=cfg)
        e20 = cesaro_error(env, 20.0, 2.0, gauss_order=4, h_max=1.0)
        e100 = cesaro_error(env, 100.0, 2.0, gauss_order=4, h_max=1.0)
        assert e100 < e20


class TestSupGrowth:
    def test_constant_environment(self):
        cfg = PoissonConfig(np.array([]), -200.0, 200.0)
        env = ShotNoiseEnv(kernel=bump_kernel(), config=cfg)
        assert sup_growth_check(env, [10, 100]) == [(10, 1.0), (100, 1.0)]

    def test_sampled_config_subpolynomial_trend(self):
        # ratios sup / n^0.1 decrease over a decade list for a gentle kernel
        wins = 0
        n_configs = 20
        for i in range(n_configs):
            cfg = sample_config((-10002.0, 10002.0), spawn_rng(SEED, "sup-growth", i))
            env = ShotNoiseEnv(kernel=bump_kernel(0.08), config=cfg)
            sups = sup_growth_check(env, [100, 1000, 10000])
            ratios = [s / n**0.1 for n, s in sups]
            wins += ratios[0] > ratios[1] > ratios[2]
        assert wins >= 0.95 * n_configs


class TestDeterministicEnv:
    def test_positive_lambda_enforced(self):
        env = DeterministicEnv(
            lambda_fn=lambda x: np.asarray(x, dtype=float), lambda_bar_inv=1.0
        )
        with pytest.raises(DomainError):
            env.lambda_inv_many(np.array([-1.0]))

    def test_periodic_needs_positive_floor(self):
        with pytest.raises(DomainError):
            periodic_env(1.0, 1.0)
