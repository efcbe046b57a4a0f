"""Ground-truth environments and data generation.

Provides tabular block MDPs (transition kernels constant on products of
latent state/action blocks), the small worked 4x2x4 aggregation tensor, a
controlled diffusion in a wavy 2-d potential with block-constant drift
control, trajectory/iid samplers, and exact reference quantities (P, F,
Sigma) computed by direct summation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import _kernels
from .data import TransitionDataset

__all__ = [
    "TabularMDP",
    "SdeEnv",
    "StandardNormalPolicy",
    "make_block_mdp",
    "make_soft_aggregation_mdp",
    "example3_tensor",
    "example3_mdp",
    "default_drift_table",
    "sde_step",
    "sample_trajectory",
    "sample_iid",
    "exact_ground_truth",
]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class TabularMDP:
    """Finite MDP with known latent block labels."""

    transition: np.ndarray  # (S, A, S), rows over s' sum to 1
    state_block: np.ndarray  # (S,) int labels in [0, n_s)
    action_block: np.ndarray  # (A,) int labels in [0, n_a)
    n_s: int
    n_a: int

    def __post_init__(self):
        t = self.transition
        if t.ndim != 3 or t.shape[0] != t.shape[2]:
            raise ValueError(f"transition must be (S, A, S), got {t.shape}")
        if np.any(t < -_PROB_TOL):
            raise ValueError("transition has negative entries")
        sums = t.sum(axis=2)
        if np.max(np.abs(sums - 1.0)) > _PROB_TOL:
            raise ValueError("transition rows must sum to 1")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]

    def uniform_policy(self) -> np.ndarray:
        return np.full((self.n_states, self.n_actions), 1.0 / self.n_actions)

    def chain_under(self, policy: np.ndarray) -> np.ndarray:
        """State-to-state kernel induced by a policy matrix."""
        return np.einsum("sa,saz->sz", policy, self.transition)

    def stationary(self, policy: np.ndarray) -> np.ndarray:
        """Stationary distribution of the induced chain (eigen-solve)."""
        chain = self.chain_under(policy)
        vals, vecs = np.linalg.eig(chain.T)
        idx = int(np.argmin(np.abs(vals - 1.0)))
        v = np.real(vecs[:, idx])
        v = np.abs(v)
        return v / v.sum()


def make_block_mdp(
    n_states: int,
    n_actions: int,
    n_s: int,
    n_a: int,
    concentration: float = 0.5,
    seed=None,
) -> TabularMDP:
    """Random hard-aggregation MDP with Dirichlet block kernels.

    Block labels are assigned round-robin; each (state block, action block)
    pair gets its own Dirichlet(concentration) kernel over states, and the
    draw is repeated if any two block kernels coincide.
    """
    if not 1 <= n_s <= n_states:
        raise ValueError(f"need 1 <= n_s <= n_states, got {n_s}, {n_states}")
    if not 1 <= n_a <= n_actions:
        raise ValueError(f"need 1 <= n_a <= n_actions, got {n_a}, {n_actions}")
    rng = np.random.default_rng(seed)
    alpha = np.full(n_states, concentration)
    while True:
        kernels = rng.dirichlet(alpha, size=(n_s, n_a))
        flat = kernels.reshape(n_s * n_a, n_states)
        gaps = np.linalg.norm(flat[:, None, :] - flat[None, :, :], axis=2)
        gaps[np.diag_indices(n_s * n_a)] = np.inf
        if gaps.min() > 0.0:
            break
    state_block = np.arange(n_states, dtype=np.int64) % n_s
    action_block = np.arange(n_actions, dtype=np.int64) % n_a
    transition = kernels[state_block[:, None], action_block[None, :]]
    return TabularMDP(
        transition=transition,
        state_block=state_block,
        action_block=action_block,
        n_s=n_s,
        n_a=n_a,
    )


def make_soft_aggregation_mdp(
    n_states: int,
    n_actions: int,
    n_s: int,
    n_a: int,
    concentration: float = 0.5,
    seed=None,
) -> TabularMDP:
    """Latent-variable MDP: p = sum_ij P(i|s) P(j|a) q_ij, used in tests."""
    rng = np.random.default_rng(seed)
    state_mix = rng.dirichlet(np.full(n_s, 1.0), size=n_states)
    action_mix = rng.dirichlet(np.full(n_a, 1.0), size=n_actions)
    kernels = rng.dirichlet(np.full(n_states, concentration), size=(n_s, n_a))
    transition = np.einsum("si,aj,ijz->saz", state_mix, action_mix, kernels)
    return TabularMDP(
        transition=transition,
        state_block=np.argmax(state_mix, axis=1),
        action_block=np.argmax(action_mix, axis=1),
        n_s=n_s,
        n_a=n_a,
    )


def example3_tensor() -> np.ndarray:
    """The worked 4-state, 2-action tensor whose meta-states average out.

    Entries are 1/6 and 1/3; the two action slices are complementary, so the
    uniform-policy state chain is exactly uniform while the tensor itself has
    mode-1/mode-3 rank 2.
    """
    low, high = 1.0 / 6.0, 1.0 / 3.0
    slice_a = np.array(
        [
            [low, low, high, high],
            [low, low, high, high],
            [high, high, low, low],
            [high, high, low, low],
        ]
    )
    slice_b = np.array(
        [
            [high, high, low, low],
            [high, high, low, low],
            [low, low, high, high],
            [low, low, high, high],
        ]
    )
    tensor = np.empty((4, 2, 4))
    tensor[:, 0, :] = slice_a
    tensor[:, 1, :] = slice_b
    return tensor


def example3_mdp() -> TabularMDP:
    return TabularMDP(
        transition=example3_tensor(),
        state_block=np.array([0, 0, 1, 1], dtype=np.int64),
        action_block=np.array([0, 1], dtype=np.int64),
        n_s=2,
        n_a=2,
    )


def default_drift_table() -> np.ndarray:
    """Frozen 4x4 grid of unit drift vectors shipped with the package."""
    table = np.zeros((4, 4, 2))
    path = resources.files("tensormdp.assets").joinpath("drift_table.csv")
    with path.open("r", encoding="ascii") as fh:
        for row in csv.DictReader(fh):
            i, j = int(row["cell_x"]), int(row["cell_y"])
            table[i, j] = (float(row["drift_x"]), float(row["drift_y"]))
    return table


@dataclass(frozen=True)
class SdeEnv:
    """Controlled diffusion dX = -(grad V(X) + F(a)) dt + sqrt(2) dB.

    V(x) = cos(wf*x1) + cos(wf*x2) + confinement*|x|^2 has a 2x2 grid of
    wells inside the action domain; F is constant on a 4x4 grid of action
    cells. One environment step integrates `substeps` Euler-Maruyama
    increments over time tau. States are clamped to [-clamp, clamp]^2.
    """

    tau: float = 0.1
    substeps: int = 10
    well_freq: float = math.pi
    confinement: float = 0.05
    drift_table: np.ndarray = field(default_factory=default_drift_table)
    action_lo: float = -2.0
    action_hi: float = 2.0
    clamp: float = 6.0

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.substeps < 1:
            raise ValueError(f"substeps must be >= 1, got {self.substeps}")

    @property
    def cell_width(self) -> float:
        return (self.action_hi - self.action_lo) / self.drift_table.shape[0]

    def drift(self, a) -> np.ndarray:
        n_cells = self.drift_table.shape[0]
        ci = int(math.floor((a[0] - self.action_lo) / self.cell_width))
        cj = int(math.floor((a[1] - self.action_lo) / self.cell_width))
        ci = min(max(ci, 0), n_cells - 1)
        cj = min(max(cj, 0), n_cells - 1)
        return self.drift_table[ci, cj].copy()

    def grad_potential(self, x) -> np.ndarray:
        wf = self.well_freq
        return np.array(
            [
                -wf * math.sin(wf * x[0]) + 2.0 * self.confinement * x[0],
                -wf * math.sin(wf * x[1]) + 2.0 * self.confinement * x[1],
            ]
        )


@dataclass(frozen=True)
class StandardNormalPolicy:
    """Behavior policy drawing actions iid from N(0, I)."""

    dim: int = 2

    def sample(self, rng, n: int) -> np.ndarray:
        return rng.standard_normal((n, self.dim))

    def density(self, actions) -> np.ndarray:
        actions = np.asarray(actions, dtype=np.float64)
        norm = (2.0 * math.pi) ** (self.dim / 2.0)
        return np.exp(-0.5 * np.sum(actions**2, axis=1)) / norm


def sde_step(env: SdeEnv, s, a, rng=None):
    """One macro step of the diffusion; rng=None disables the noise.

    Returns (next_state, clamped) where clamped reports whether any substep
    hit the safety box.
    """
    if rng is None:
        noise = np.zeros((env.substeps, 2))
    else:
        noise = rng.standard_normal((env.substeps, 2))
    # single steps go through the reference path; it defines the arithmetic
    states, n_clamped = _kernels._reference.sde_rollout(
        np.asarray(s, dtype=np.float64),
        np.asarray(a, dtype=np.float64)[None, :],
        noise,
        env.tau,
        env.substeps,
        env.drift_table,
        env.action_lo,
        env.cell_width,
        env.well_freq,
        env.confinement,
        env.clamp,
    )
    return states[1], n_clamped > 0


def sample_trajectory(env, behavior_policy=None, n: int = 1, seed=None) -> TransitionDataset:
    """Sequential rollout under the behavior policy, densities recorded.

    For a TabularMDP the policy is an (S, A) probability matrix (uniform by
    default) and states/actions are stored as length-1 index vectors. For an
    SdeEnv the policy must expose sample(rng, n) and density(actions);
    defaults to the standard normal.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if isinstance(env, TabularMDP):
        return _sample_tabular(env, behavior_policy, n, seed)
    if isinstance(env, SdeEnv):
        return _sample_sde(env, behavior_policy, n, seed)
    raise TypeError(f"unsupported environment type {type(env).__name__}")


def _sample_tabular(mdp: TabularMDP, policy, n: int, seed) -> TransitionDataset:
    if policy is None:
        policy = mdp.uniform_policy()
    policy = np.asarray(policy, dtype=np.float64)
    if policy.shape != (mdp.n_states, mdp.n_actions):
        raise ValueError(f"policy must be (S, A), got {policy.shape}")
    rng = np.random.default_rng(seed)
    s0 = int(rng.integers(mdp.n_states))
    uniforms = rng.random((n, 2))
    action_cdf = np.cumsum(policy, axis=1)
    next_cdf = np.cumsum(mdp.transition, axis=2)
    states, actions = _kernels.tabular_rollout(s0, action_cdf, next_cdf, uniforms)
    s = states[:-1]
    return TransitionDataset(
        states=s[:, None].astype(np.float64),
        actions=actions[:, None].astype(np.float64),
        next_states=states[1:, None].astype(np.float64),
        behavior_density=policy[s, actions],
    )


def _sample_sde(env: SdeEnv, policy, n: int, seed) -> TransitionDataset:
    if policy is None:
        policy = StandardNormalPolicy()
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(env.action_lo, env.action_hi, size=2)
    actions = policy.sample(rng, n)
    noise = rng.standard_normal((n * env.substeps, 2))
    states, _ = _kernels.sde_rollout(
        x0,
        actions,
        noise,
        env.tau,
        env.substeps,
        env.drift_table,
        env.action_lo,
        env.cell_width,
        env.well_freq,
        env.confinement,
        env.clamp,
    )
    return TransitionDataset(
        states=states[:-1],
        actions=actions,
        next_states=states[1:],
        behavior_density=policy.density(actions),
    )


def sample_iid(mdp: TabularMDP, xi, action_dist, n: int, seed=None) -> TransitionDataset:
    """Draw iid rows s ~ xi, a ~ action_dist, s' ~ p(.|s, a).

    `action_dist` is either a length-A vector (state-independent) or an
    (S, A) policy matrix; the recorded density is the corresponding pmf.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    xi = np.asarray(xi, dtype=np.float64)
    rng = np.random.default_rng(seed)
    s = rng.choice(mdp.n_states, size=n, p=xi)
    action_dist = np.asarray(action_dist, dtype=np.float64)
    if action_dist.ndim == 1:
        a = rng.choice(mdp.n_actions, size=n, p=action_dist)
        density = action_dist[a]
    else:
        cdf = np.cumsum(action_dist, axis=1)
        a = np.empty(n, dtype=np.int64)
        u = rng.random(n)
        for i in range(n):
            a[i] = min(
                np.searchsorted(cdf[s[i]], u[i], side="right"), mdp.n_actions - 1
            )
        density = action_dist[s, a]
    next_cdf = np.cumsum(mdp.transition, axis=2)
    u = rng.random(n)
    sp = np.empty(n, dtype=np.int64)
    for i in range(n):
        sp[i] = min(np.searchsorted(next_cdf[s[i], a[i]], u[i], side="right"), mdp.n_states - 1)
    return TransitionDataset(
        states=s[:, None].astype(np.float64),
        actions=a[:, None].astype(np.float64),
        next_states=sp[:, None].astype(np.float64),
        behavior_density=density,
    )


def exact_ground_truth(mdp: TabularMDP, phi, psi, xi, eta):
    """Exact (P, F, Sigma) for a finite MDP under given features and measures.

    P solves P x1 phi(s)' x2 psi(a)' = E[phi(s')|s, a] in least squares over
    all (s, a); F and Sigma are direct sums weighted by xi and eta.
    """
    xi = np.asarray(xi, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if xi.shape != (mdp.n_states,) or np.any(xi <= 0.0):
        raise ValueError("xi must be a strictly positive length-S vector")
    if eta.shape != (mdp.n_actions,) or np.any(eta <= 0.0):
        raise ValueError("eta must be a strictly positive length-A vector")
    state_points = np.arange(mdp.n_states, dtype=np.float64)[:, None]
    action_points = np.arange(mdp.n_actions, dtype=np.float64)[:, None]
    phi_mat = phi.evaluate_batch(state_points)  # (S, dS)
    psi_mat = psi.evaluate_batch(action_points)  # (A, dA)
    if phi_mat.shape[0] != mdp.n_states or psi_mat.shape[0] != mdp.n_actions:
        raise ValueError("feature maps inconsistent with the MDP dimensions")
    target = np.einsum("saz,zk->sak", mdp.transition, phi_mat)
    phi_pinv = np.linalg.pinv(phi_mat)
    psi_pinv = np.linalg.pinv(psi_mat)
    p_tensor = np.einsum("is,ja,sak->ijk", phi_pinv, psi_pinv, target, optimize=True)
    f_tensor = np.einsum(
        "s,a,si,aj,sak->ijk", xi, eta, phi_mat, psi_mat, target, optimize=True
    )
    sigma = phi_mat.T @ (xi[:, None] * phi_mat)
    return p_tensor, f_tensor, sigma
