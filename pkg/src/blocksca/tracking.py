"""Blockwise dynamic average tracking and block consensus over digraphs.

Push-sum style adapt-then-combine recursion, run independently per block.
Each agent keeps, per block, an estimate x, a positive weight phi, and its
most recently acquired slice of the local signal. The update for block l is

    v_i = x_i + (signal_next_i - signal_i) / phi_i
    phi_i^+ = sum_j a_ij phi_j
    x_i^+   = (1 / phi_i^+) sum_j a_ij phi_j v_j

with a column-stochastic weight matrix A = [a_ij] for that block. Column
stochasticity conserves the weighted mass sum_i phi_i x_i, which is what
makes the ratio recover the network average. Rounds are synchronous: all
agents read the pre-round state, then commit.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .blockcomm import BlockLayout, BlockWeightMatrix
from .errors import DimensionMismatch, NonPositivePhi

# phi is provably bounded away from zero under valid weights; anything at or
# below this floor signals a malformed weight matrix, not roundoff.
PHI_FLOOR = 1e-300


@dataclass(frozen=True)
class TrackerState:
    """Network-wide tracker state: one row per agent.

    x:      (N, n) blockwise estimates
    mass:   (N, B) positive push-sum weights, one scalar per (agent, block)
    signal: (N, n) latest acquired local signal values
    """

    layout: BlockLayout
    x: np.ndarray
    mass: np.ndarray
    signal: np.ndarray

    @property
    def n_agents(self) -> int:
        return self.x.shape[0]

    @classmethod
    def from_signal(cls, layout: BlockLayout, signal0: np.ndarray) -> "TrackerState":
        """Standard initialization: x = signal, unit weights."""
        s = np.asarray(signal0, dtype=float)
        return cls(layout, s.copy(), np.ones((s.shape[0], layout.n_blocks)), s.copy())


def push_sum_mix(matrix: np.ndarray, mass: np.ndarray, payload: np.ndarray):
    """One weighted-mixing step for a single block.

    Returns (mass_next, mixed) with mass_next = A @ mass and
    mixed[i] = (A @ (mass * payload))[i] / mass_next[i].
    """
    mass_next = matrix @ mass
    if not np.all(mass_next > PHI_FLOOR):
        raise NonPositivePhi("push-sum weight vanished; check the weight matrix")
    mixed = (matrix @ (mass[:, None] * payload)) / mass_next[:, None]
    return mass_next, mixed


def refresh_signal(state: TrackerState, agent: int, block: int, u_block: np.ndarray) -> TrackerState:
    """Overwrite one agent's stored slice of its signal for one block."""
    sl = state.layout.slice(block)
    u_block = np.asarray(u_block, dtype=float)
    if u_block.shape != (state.layout.dim(block),):
        raise DimensionMismatch(
            f"block {block} has dimension {state.layout.dim(block)}, got {u_block.shape}"
        )
    signal = state.signal.copy()
    signal[agent, sl] = u_block
    return replace(state, signal=signal)


def tracking_round(
    state: TrackerState,
    weights: Sequence[BlockWeightMatrix],
    signal_next: np.ndarray,
) -> TrackerState:
    """One synchronous round of blockwise average tracking.

    ``signal_next`` holds every agent's refreshed signal (stale blocks keep
    their previous values). All agents update from the same pre-round state.
    """
    signal_next = np.asarray(signal_next, dtype=float)
    x_next = np.empty_like(state.x)
    mass_next = np.empty_like(state.mass)
    for block in range(state.layout.n_blocks):
        sl = state.layout.slice(block)
        phi = state.mass[:, block]
        v = state.x[:, sl] + (signal_next[:, sl] - state.signal[:, sl]) / phi[:, None]
        mass_next[:, block], x_next[:, sl] = push_sum_mix(weights[block].matrix, phi, v)
    return TrackerState(state.layout, x_next, mass_next, signal_next.copy())


def consensus_round(state: TrackerState, weights: Sequence[BlockWeightMatrix]) -> TrackerState:
    """One synchronous round of blockwise consensus.

    The zero-increment special case of tracking: agents average their
    current estimates without acquiring new signal values.
    """
    x_next = np.empty_like(state.x)
    mass_next = np.empty_like(state.mass)
    for block in range(state.layout.n_blocks):
        sl = state.layout.slice(block)
        phi = state.mass[:, block]
        mass_next[:, block], x_next[:, sl] = push_sum_mix(
            weights[block].matrix, phi, state.x[:, sl]
        )
    return TrackerState(state.layout, x_next, mass_next, state.signal.copy())
