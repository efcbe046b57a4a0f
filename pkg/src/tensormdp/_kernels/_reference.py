"""Pure-Python/NumPy reference implementations of the hot kernels.

These define the kernel contract. The accumulation kernels use compensated
(Kahan) summation so the result is insensitive to how rows are ordered or
batched; the rollout kernels mirror the compiled loops operation for
operation so both backends produce identical trajectories from the same
pre-drawn random numbers.
"""

import math

import numpy as np

# Rows per GEMM block in the fallback accumulators. Partial sums are combined
# with Kahan compensation, so the block size only affects speed.
_BLOCK = 4096


def weighted_outer3_sum(w, s_feats, a_feats, sp_feats):
    """Sum of w[t] * outer(s_feats[t], a_feats[t], sp_feats[t]) over rows.

    Returns a dense (d1, d2, d3) array. Summation is compensated.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    s_feats = np.ascontiguousarray(s_feats, dtype=np.float64)
    a_feats = np.ascontiguousarray(a_feats, dtype=np.float64)
    sp_feats = np.ascontiguousarray(sp_feats, dtype=np.float64)
    n, d1 = s_feats.shape
    d2 = a_feats.shape[1]
    d3 = sp_feats.shape[1]
    total = np.zeros((d1, d2 * d3))
    comp = np.zeros_like(total)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        right = a_feats[start:stop, :, None] * sp_feats[start:stop, None, :]
        part = (w[start:stop, None] * s_feats[start:stop]).T @ right.reshape(
            stop - start, d2 * d3
        )
        y = part - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total.reshape(d1, d2, d3)


def gram_sum(x):
    """Sum of outer(x[t], x[t]) over rows, with compensated summation."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n, d = x.shape
    total = np.zeros((d, d))
    comp = np.zeros_like(total)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        part = x[start:stop].T @ x[start:stop]
        y = part - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def sde_rollout(
    x0,
    actions,
    noise,
    tau,
    substeps,
    drift_table,
    grid_lo,
    cell_width,
    well_freq,
    confinement,
    clamp,
):
    """Euler-Maruyama rollout of the controlled diffusion.

    Per substep of size h = tau/substeps:
        x <- x - (grad V(x) + F(a)) * h + sqrt(2h) * z
    with V(x) = cos(wf*x1) + cos(wf*x2) + c*|x|^2 and F(a) the drift-table
    entry of a's grid cell. Coordinates are clamped to [-clamp, clamp];
    clamped substeps are counted. `noise` must hold n*substeps rows of
    pre-drawn standard normals (zeros disable the diffusion term).

    Returns (states, n_clamped) where states has n+1 rows.
    """
    actions = np.asarray(actions, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    n = actions.shape[0]
    n_cells = drift_table.shape[0]
    h = tau / substeps
    root = math.sqrt(2.0 * h)
    states = np.empty((n + 1, 2))
    x = float(x0[0])
    y = float(x0[1])
    states[0, 0] = x
    states[0, 1] = y
    n_clamped = 0
    idx = 0
    for t in range(n):
        ci = int(math.floor((actions[t, 0] - grid_lo) / cell_width))
        cj = int(math.floor((actions[t, 1] - grid_lo) / cell_width))
        ci = min(max(ci, 0), n_cells - 1)
        cj = min(max(cj, 0), n_cells - 1)
        fx = drift_table[ci, cj, 0]
        fy = drift_table[ci, cj, 1]
        for _ in range(substeps):
            gx = -well_freq * math.sin(well_freq * x) + 2.0 * confinement * x + fx
            gy = -well_freq * math.sin(well_freq * y) + 2.0 * confinement * y + fy
            x = x - gx * h + root * noise[idx, 0]
            y = y - gy * h + root * noise[idx, 1]
            idx += 1
            hit = False
            if x < -clamp:
                x = -clamp
                hit = True
            elif x > clamp:
                x = clamp
                hit = True
            if y < -clamp:
                y = -clamp
                hit = True
            elif y > clamp:
                y = clamp
                hit = True
            if hit:
                n_clamped += 1
        states[t + 1, 0] = x
        states[t + 1, 1] = y
    return states, n_clamped


def tabular_rollout(s0, action_cdf, next_cdf, uniforms):
    """Roll a tabular MDP trajectory from pre-drawn uniforms.

    `action_cdf[s]` is the cumulative distribution of the behavior policy at
    state s; `next_cdf[s, a]` of the transition kernel. Row t uses
    uniforms[t, 0] for the action and uniforms[t, 1] for the next state.

    Returns (states, actions) of lengths n+1 and n.
    """
    action_cdf = np.asarray(action_cdf, dtype=np.float64)
    next_cdf = np.asarray(next_cdf, dtype=np.float64)
    uniforms = np.asarray(uniforms, dtype=np.float64)
    n = uniforms.shape[0]
    n_actions = action_cdf.shape[1]
    n_states = next_cdf.shape[2]
    states = np.empty(n + 1, dtype=np.int64)
    actions = np.empty(n, dtype=np.int64)
    s = int(s0)
    states[0] = s
    for t in range(n):
        a = int(np.searchsorted(action_cdf[s], uniforms[t, 0], side="right"))
        if a >= n_actions:
            a = n_actions - 1
        sp = int(np.searchsorted(next_cdf[s, a], uniforms[t, 1], side="right"))
        if sp >= n_states:
            sp = n_states - 1
        actions[t] = a
        states[t + 1] = sp
        s = sp
    return states, actions
