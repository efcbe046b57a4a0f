"""Low-rank Tucker approximation: truncated SVD, sequential HOSVD, HOOI.

The sequential scheme initializes each factor from the SVD of the
matricization after projecting the already-extracted modes; HOOI then
refines the factors by alternating per-mode SVD updates, which never
decreases the projection fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import frobenius, matricize, mode_product

__all__ = ["TuckerFactors", "svd_top", "hosvd", "hooi", "extract_factors", "reconstruct"]


@dataclass(frozen=True)
class TuckerFactors:
    """Core tensor plus three column-orthonormal factor matrices."""

    core: np.ndarray  # (r, l, m)
    u1: np.ndarray  # (d1, r)
    u2: np.ndarray  # (d2, l)
    u3: np.ndarray  # (d3, m)

    @property
    def ranks(self) -> tuple[int, int, int]:
        return self.core.shape


def svd_top(m, r: int):
    """Leading-r singular triples of a matrix.

    Returns (U, s, V) with U of shape (rows, r), s nonincreasing and V of
    shape (cols, r), such that M is approximated by U @ diag(s) @ V.T. Each
    singular vector is scaled so its largest-magnitude entry is positive.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    r = int(r)
    if not 1 <= r <= min(m.shape):
        raise ValueError(f"rank {r} out of range for shape {m.shape}")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    u = u[:, :r].copy()
    v = vt[:r].T.copy()
    for col in range(r):
        pivot = np.argmax(np.abs(u[:, col]))
        if u[pivot, col] < 0.0:
            u[:, col] = -u[:, col]
            v[:, col] = -v[:, col]
    return u, s[:r].copy(), v


def _check_ranks(t: np.ndarray, ranks) -> tuple[int, int, int]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 3:
        raise ValueError(f"ranks must be a triple, got {ranks}")
    for r, d in zip(ranks, t.shape):
        if not 1 <= r <= d:
            raise ValueError(f"ranks {ranks} out of range for dims {t.shape}")
    return ranks


def hosvd(t, ranks) -> TuckerFactors:
    """Sequential truncated HOSVD.

    Extracts U1 from the mode-1 matricization, projects, extracts U2, projects
    again, extracts U3; the core is the fully projected tensor.
    """
    t = np.asarray(t, dtype=np.float64)
    r1, r2, r3 = _check_ranks(t, ranks)
    u1, _, _ = svd_top(matricize(t, 1), r1)
    p = mode_product(t, u1.T, 1)
    u2, _, _ = svd_top(matricize(p, 2), r2)
    p = mode_product(p, u2.T, 2)
    u3, _, _ = svd_top(matricize(p, 3), r3)
    core = mode_product(p, u3.T, 3)
    return TuckerFactors(core=core, u1=u1, u2=u2, u3=u3)


def extract_factors(p_hat, ranks) -> TuckerFactors:
    """Factor extraction from an estimated transition tensor.

    Sequentially SVDs each matricization and projects before moving to the
    next mode; the remaining fully-projected tensor is the core. This is the
    same sequential scheme as :func:`hosvd`.
    """
    return hosvd(p_hat, ranks)


def hooi(t, ranks, t_max: int = 20, tol: float = 1e-12, return_fits: bool = False):
    """Higher-order orthogonal iteration.

    Starts from the sequential HOSVD factors and runs up to `t_max` rounds of
    alternating per-mode SVD updates, stopping early once the fit improves by
    less than `tol` (relative) over a full round. The fit
    ||T x1 U1' x2 U2' x3 U3'||_F is nondecreasing across half-steps.

    With ``return_fits=True`` also returns the list of fits, one entry for
    the initialization and one per half-step.
    """
    t = np.asarray(t, dtype=np.float64)
    r1, r2, r3 = _check_ranks(t, ranks)
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    init = hosvd(t, (r1, r2, r3))
    u1, u2, u3 = init.u1, init.u2, init.u3
    fits = [frobenius(init.core)]
    for _ in range(t_max):
        previous = fits[-1]
        g = mode_product(mode_product(t, u2.T, 2), u3.T, 3)
        u1, s, _ = svd_top(matricize(g, 1), r1)
        fits.append(float(np.linalg.norm(s)))
        g = mode_product(mode_product(t, u1.T, 1), u3.T, 3)
        u2, s, _ = svd_top(matricize(g, 2), r2)
        fits.append(float(np.linalg.norm(s)))
        g = mode_product(mode_product(t, u1.T, 1), u2.T, 2)
        u3, s, _ = svd_top(matricize(g, 3), r3)
        fits.append(float(np.linalg.norm(s)))
        if fits[-1] - previous < tol * max(1.0, fits[-1]):
            break
    core = mode_product(mode_product(mode_product(t, u1.T, 1), u2.T, 2), u3.T, 3)
    factors = TuckerFactors(core=core, u1=u1, u2=u2, u3=u3)
    if return_fits:
        return factors, fits
    return factors


def reconstruct(factors: TuckerFactors) -> np.ndarray:
    """Expand Tucker factors back to the full tensor."""
    t = mode_product(factors.core, factors.u1, 1)
    t = mode_product(t, factors.u2, 2)
    return mode_product(t, factors.u3, 3)
