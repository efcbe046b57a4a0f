import numpy as np
import pytest

from tensormdp.envs import (
    SdeEnv,
    StandardNormalPolicy,
    example3_mdp,
    example3_tensor,
    exact_ground_truth,
    make_block_mdp,
    sample_iid,
    sample_trajectory,
    sde_step,
)
from tensormdp.features import OneHotFeatures
from tensormdp.tensor import matricize, mode_product


def tucker_rank(tensor, tol=1e-10):
    ranks = []
    for mode in (1, 2, 3):
        s = np.linalg.svd(matricize(tensor, mode), compute_uv=False)
        ranks.append(int(np.sum(s > tol * max(1.0, s[0]))))
    return tuple(ranks)


class TestMakeBlockMdp:
    def test_degenerate_blocks(self):
        mdp = make_block_mdp(4, 3, 4, 3, seed=0)
        flat = mdp.transition.reshape(-1, 4)
        # every (s, a) pair has its own kernel
        assert len({tuple(np.round(r, 12)) for r in flat}) == 12

    def test_induced_tucker_rank(self):
        mdp = make_block_mdp(12, 8, 3, 2, seed=1)
        phi = OneHotFeatures(12)
        psi = OneHotFeatures(8)
        xi = np.full(12, 1 / 12)
        eta = np.full(8, 1 / 8)
        p, _, _ = exact_ground_truth(mdp, phi, psi, xi, eta)
        r = tucker_rank(p)
        assert r[0] <= 3 and r[1] <= 2 and r[2] <= 12

    def test_seed_reproducible(self):
        a = make_block_mdp(10, 6, 3, 2, seed=42)
        b = make_block_mdp(10, 6, 3, 2, seed=42)
        np.testing.assert_array_equal(a.transition, b.transition)

    def test_rows_identical_within_block_pair(self):
        mdp = make_block_mdp(9, 6, 3, 3, seed=2)
        for s in range(9):
            for a in range(6):
                ref_s = int(mdp.state_block[s])
                ref_a = int(mdp.action_block[a])
                np.testing.assert_array_equal(
                    mdp.transition[s, a], mdp.transition[ref_s, ref_a]
                )

    def test_impossible_blocks_rejected(self):
        with pytest.raises(ValueError):
            make_block_mdp(3, 3, 4, 1, seed=0)


class TestExample3:
    def test_printed_entries(self):
        t = example3_tensor()
        assert t[0, 0, 0] == 1.0 / 6.0
        assert t[0, 0, 2] == 1.0 / 3.0
        np.testing.assert_allclose(t.sum(axis=2), 1.0, atol=1e-15)

    def test_uniform_policy_average(self):
        t = example3_tensor()
        avg = (t[:, 0, :] + t[:, 1, :]) / 2.0
        np.testing.assert_array_equal(avg, np.full((4, 4), 0.25))

    def test_mode1_rank_two(self):
        s = np.linalg.svd(matricize(example3_tensor(), 1), compute_uv=False)
        assert s[2] <= 1e-12
        assert s[1] > 1e-3

    def test_full_tucker_rank(self):
        assert tucker_rank(example3_tensor()) == (2, 2, 2)


class TestSdeStep:
    def test_pure_brownian_moments(self):
        env = SdeEnv(well_freq=0.0, confinement=0.0, drift_table=np.zeros((4, 4, 2)))
        ds = sample_trajectory(env, n=100_000, seed=0)
        increments = ds.next_states - ds.states
        n = increments.shape[0]
        for c in range(2):
            mean = increments[:, c].mean()
            var = increments[:, c].var()
            se_mean = np.sqrt(2 * env.tau / n)
            se_var = 2 * env.tau * np.sqrt(2.0 / n)
            assert abs(mean) <= 3 * se_mean
            assert abs(var - 2 * env.tau) <= 3 * se_var

    def test_deterministic_quadratic_decay(self):
        c = 0.8
        env = SdeEnv(well_freq=0.0, confinement=c / 2.0, drift_table=np.zeros((4, 4, 2)))
        x0 = np.array([1.5, -2.0])
        got, clamped = sde_step(env, x0, np.zeros(2), rng=None)
        h = env.tau / env.substeps
        expected = x0 * (1.0 - c * h) ** env.substeps
        np.testing.assert_allclose(got, expected, rtol=1e-12)
        assert not clamped

    def test_constant_drift(self):
        drift = np.tile(np.array([0.3, -0.7]), (4, 4, 1))
        env = SdeEnv(well_freq=0.0, confinement=0.0, drift_table=drift)
        got, _ = sde_step(env, np.zeros(2), np.zeros(2), rng=None)
        np.testing.assert_allclose(got, -np.array([0.3, -0.7]) * env.tau, rtol=1e-12)

    def test_clamp_flag(self):
        drift = np.tile(np.array([100.0, 0.0]), (4, 4, 1))
        env = SdeEnv(well_freq=0.0, confinement=0.0, drift_table=drift, clamp=1.0)
        got, clamped = sde_step(env, np.zeros(2), np.zeros(2), rng=None)
        assert clamped
        assert got[0] == -1.0


class TestSampleTrajectory:
    def test_uniform_density_recorded(self):
        mdp = make_block_mdp(6, 4, 2, 2, seed=3)
        ds = sample_trajectory(mdp, n=50, seed=0)
        np.testing.assert_array_equal(ds.behavior_density, np.full(50, 0.25))

    def test_single_row(self):
        mdp = make_block_mdp(4, 3, 2, 1, seed=4)
        ds = sample_trajectory(mdp, n=1, seed=1)
        assert len(ds) == 1

    def test_occupancy_matches_stationary(self):
        rng = np.random.default_rng(5)
        transition = rng.dirichlet(np.ones(3), size=(3, 1))
        mdp_kwargs = dict(
            state_block=np.arange(3),
            action_block=np.zeros(1, dtype=np.int64),
            n_s=3,
            n_a=1,
        )
        from tensormdp.envs import TabularMDP

        mdp = TabularMDP(transition=transition, **mdp_kwargs)
        stationary = mdp.stationary(mdp.uniform_policy())
        ds = sample_trajectory(mdp, n=1_000_000, seed=2)
        counts = np.bincount(ds.states[:, 0].astype(int), minlength=3) / len(ds)
        assert 0.5 * np.abs(counts - stationary).sum() <= 0.01

    def test_sde_trajectory_in_safety_box(self):
        env = SdeEnv()
        ds = sample_trajectory(env, n=20_000, seed=3)
        assert np.max(np.abs(ds.next_states)) <= env.clamp
        # clamp rate below 0.1% under default parameters
        near_edge = np.sum(np.max(np.abs(ds.next_states), axis=1) >= env.clamp)
        assert near_edge / len(ds) < 1e-3

    def test_sde_density_is_standard_normal(self):
        env = SdeEnv()
        ds = sample_trajectory(env, n=100, seed=4)
        policy = StandardNormalPolicy()
        np.testing.assert_allclose(
            ds.behavior_density, policy.density(ds.actions), rtol=1e-12
        )

    def test_reproducible(self):
        env = SdeEnv()
        a = sample_trajectory(env, n=64, seed=9)
        b = sample_trajectory(env, n=64, seed=9)
        np.testing.assert_array_equal(a.states, b.states)
        np.testing.assert_array_equal(a.actions, b.actions)


class TestSampleIid:
    def test_marginals(self):
        mdp = make_block_mdp(5, 4, 2, 2, seed=6)
        xi = np.full(5, 0.2)
        eta = np.array([0.4, 0.3, 0.2, 0.1])
        ds = sample_iid(mdp, xi, eta, n=50_000, seed=7)
        counts = np.bincount(ds.actions[:, 0].astype(int), minlength=4) / len(ds)
        np.testing.assert_allclose(counts, eta, atol=0.01)
        np.testing.assert_array_equal(ds.behavior_density, eta[ds.actions[:, 0].astype(int)])


class TestExactGroundTruth:
    def test_one_hot_recovers_transition(self):
        mdp = make_block_mdp(7, 5, 3, 2, seed=8)
        xi = np.full(7, 1 / 7)
        eta = np.full(5, 1 / 5)
        p, _, sigma = exact_ground_truth(mdp, OneHotFeatures(7), OneHotFeatures(5), xi, eta)
        np.testing.assert_allclose(p, mdp.transition, atol=1e-12)
        np.testing.assert_allclose(sigma, np.diag(xi), atol=1e-15)

    def test_lemma_relation_f_equals_p_times_sigma(self):
        # with psi orthonormal under eta, F = P x1 Sigma
        mdp = make_block_mdp(6, 4, 2, 2, seed=9)
        rng = np.random.default_rng(10)
        xi = rng.dirichlet(np.ones(6))
        eta = rng.dirichlet(np.ones(4))
        phi = OneHotFeatures(6)
        psi = OneHotFeatures(4, scales=1.0 / np.sqrt(eta))
        p, f, sigma = exact_ground_truth(mdp, phi, psi, xi, eta)
        np.testing.assert_allclose(f, mode_product(p, sigma, 1), atol=1e-10)

    def test_example3_tucker_rank(self):
        mdp = example3_mdp()
        xi = np.full(4, 0.25)
        eta = np.full(2, 0.5)
        p, _, _ = exact_ground_truth(mdp, OneHotFeatures(4), OneHotFeatures(2), xi, eta)
        assert tucker_rank(p) == (2, 2, 2)

    def test_deterministic(self):
        mdp = make_block_mdp(5, 3, 2, 2, seed=11)
        xi = np.full(5, 0.2)
        eta = np.full(3, 1 / 3)
        args = (mdp, OneHotFeatures(5), OneHotFeatures(3), xi, eta)
        p1, f1, s1 = exact_ground_truth(*args)
        p2, f2, s2 = exact_ground_truth(*args)
        np.testing.assert_array_equal(p1, p2)
        np.testing.assert_array_equal(f1, f2)
        np.testing.assert_array_equal(s1, s2)

    def test_nonpositive_measure_rejected(self):
        mdp = make_block_mdp(4, 3, 2, 1, seed=12)
        with pytest.raises(ValueError):
            exact_ground_truth(
                mdp,
                OneHotFeatures(4),
                OneHotFeatures(3),
                np.array([0.5, 0.5, 0.0, 0.0]),
                np.full(3, 1 / 3),
            )
