"""Transition datasets and their on-disk CSV format.

The file starts with a header line holding the two integers
``state_dim,action_dim``; every following line is one transition
``s..., a..., s'..., behavior_density`` written as scientific-notation text
with 17 significant digits, which round-trips float64 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TransitionDataset", "save_csv", "load_csv"]


@dataclass(frozen=True)
class TransitionDataset:
    """Rows (s, a, s', behavior density) from one trajectory or iid draws."""

    states: np.ndarray  # (n, state_dim)
    actions: np.ndarray  # (n, action_dim)
    next_states: np.ndarray  # (n, state_dim)
    behavior_density: np.ndarray  # (n,)

    def __post_init__(self):
        n = self.states.shape[0]
        if self.states.ndim != 2 or self.next_states.shape != self.states.shape:
            raise ValueError("states and next_states must be matching (n, d) arrays")
        if self.actions.ndim != 2 or self.actions.shape[0] != n:
            raise ValueError("actions must be an (n, d) array")
        if self.behavior_density.shape != (n,):
            raise ValueError("behavior_density must be a length-n vector")
        bad = np.flatnonzero(~(self.behavior_density > 0.0))
        if bad.size:
            raise ValueError(
                f"behavior_density must be positive; first bad row: {bad[0]}"
            )

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def action_dim(self) -> int:
        return self.actions.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]

    def head(self, n: int) -> "TransitionDataset":
        """Prefix of the first n rows (trajectory-order subsampling)."""
        if not 1 <= n <= len(self):
            raise ValueError(f"prefix length {n} out of range for {len(self)} rows")
        return TransitionDataset(
            states=self.states[:n],
            actions=self.actions[:n],
            next_states=self.next_states[:n],
            behavior_density=self.behavior_density[:n],
        )


def save_csv(dataset: TransitionDataset, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{dataset.state_dim},{dataset.action_dim}\n")
        block = np.column_stack(
            [
                dataset.states,
                dataset.actions,
                dataset.next_states,
                dataset.behavior_density[:, None],
            ]
        )
        for row in block:
            fh.write(",".join(f"{v:.16e}" for v in row) + "\n")


def load_csv(path) -> TransitionDataset:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        try:
            state_dim, action_dim = (int(v) for v in header.split(","))
        except ValueError as exc:
            raise ValueError(f"malformed dataset header {header!r}") from exc
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    expected = 2 * state_dim + action_dim + 1
    if data.shape[1] != expected:
        raise ValueError(
            f"expected {expected} columns for dims ({state_dim},{action_dim}), "
            f"got {data.shape[1]}"
        )
    return TransitionDataset(
        states=data[:, :state_dim],
        actions=data[:, state_dim : state_dim + action_dim],
        next_states=data[:, state_dim + action_dim : 2 * state_dim + action_dim],
        behavior_density=data[:, -1],
    )
