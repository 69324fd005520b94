"""Block-communication SCA solver with push-sum gradient tracking.

Every iteration is one synchronous two-phase round:

phase 1 (optimize + average): each agent solves a strongly convex model of
the global cost restricted to its selected block, steps toward the
minimizer with the current step size, and broadcasts the stepped block plus
its push-sum weight. All agents then mix every block with the per-block
column-stochastic weights induced by the senders' selections.

phase 2 (track): each agent refreshes its cached block gradient at the new
iterate (one block-gradient evaluation per round) and the network runs one
blockwise tracking step on the gradient trackers, using the same per-block
weights. The gradient-cache correction for a block the sender did not
broadcast this round flows through the identity column of that block's
weight matrix, so it is absorbed locally without an extra message.

The linear coefficient of the local model combines the agent's own block
gradient, the tracker-based estimate of the other agents' gradients, and
the linearization of the regularizer's subtracted smooth part. An exact
clipped soft-threshold solves the block subproblem.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockcomm import BlockLayout, BlockSchedule, build_all_weights, select_block, selections_at
from .errors import DivergentSchedule
from .graph import DiGraph
from .objective import (
    ProblemInstance,
    block_gradient,
    full_gradient,
    objective_value,
    soft_threshold,
    solve_block_subproblem,
    sum_gradient,
)
from .tracking import push_sum_mix


@dataclass(frozen=True)
class StepSizeSchedule:
    """Diminishing steps gamma_{t+1} = gamma_t * (1 - mu * gamma_t).

    Strictly decreasing with divergent sum and summable squares; consecutive
    ratios stay below 1 / (1 - mu * gamma0).
    """

    gamma0: float
    mu: float

    def __post_init__(self):
        if not 0.0 < self.gamma0 <= 1.0:
            raise ValueError("gamma0 must lie in (0, 1]")
        if self.mu <= 0.0:
            raise ValueError("mu must be positive")
        if self.mu * self.gamma0 >= 1.0:
            raise DivergentSchedule("mu * gamma0 >= 1 makes the recurrence leave (0, 1]")

    @property
    def ratio_bound(self) -> float:
        """Upper bound on gamma_t / gamma_{t+1}."""
        return 1.0 / (1.0 - self.mu * self.gamma0)

    def at(self, t: int) -> float:
        """Step size at iteration t (computed by running the recurrence)."""
        if t < 0:
            raise ValueError("iteration index must be nonnegative")
        g = self.gamma0
        for _ in range(t):
            g = g * (1.0 - self.mu * g)
        return g

    def sequence(self, t_max: int) -> np.ndarray:
        """Array of gamma_0 .. gamma_{t_max}."""
        out = np.empty(t_max + 1)
        g = self.gamma0
        for t in range(t_max + 1):
            out[t] = g
            g = g * (1.0 - self.mu * g)
        return out


@dataclass
class AgentState:
    """One agent's view of the solver state (arrays may alias network rows).

    x:          local copy of the full decision vector
    mass:       per-block push-sum weight
    tracker:    per-block running estimate of the network-average gradient
    grad_cache: most recently evaluated block gradients, stored full-length
    block:      block selected for the current iteration
    """

    x: np.ndarray
    mass: np.ndarray
    tracker: np.ndarray
    grad_cache: np.ndarray
    block: int


@dataclass
class SolverState:
    """Network-wide solver state, one row per agent."""

    layout: BlockLayout
    x: np.ndarray
    mass: np.ndarray
    tracker: np.ndarray
    grad_cache: np.ndarray
    blocks: np.ndarray

    @property
    def n_agents(self) -> int:
        return self.x.shape[0]

    def agent(self, i: int) -> AgentState:
        return AgentState(
            self.x[i], self.mass[i], self.tracker[i], self.grad_cache[i], int(self.blocks[i])
        )


def init_solver_state(
    inst: ProblemInstance, schedule: BlockSchedule, x0: np.ndarray | None = None
) -> SolverState:
    """Start every agent at x0 (zeros by default) with unit weights and
    trackers seeded by the full local gradients."""
    n_agents, n = inst.n_agents, inst.n_vars
    x = np.zeros((n_agents, n)) if x0 is None else np.array(x0, dtype=float)
    grad = np.stack([full_gradient(inst, i, x[i]) for i in range(n_agents)])
    return SolverState(
        layout=inst.layout,
        x=x,
        mass=np.ones((n_agents, inst.layout.n_blocks)),
        tracker=grad.copy(),
        grad_cache=grad,
        blocks=np.array(selections_at(schedule, 0)),
    )


def local_optimization(
    agent: AgentState, inst: ProblemInstance, tau: float, gamma: float
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the agent's convex block model and step toward its minimizer.

    Returns (block minimizer, stepped block to broadcast). Relies on the
    cached gradient of the current block being fresh, which the round
    structure guarantees.
    """
    sl = inst.layout.slice(agent.block)
    z = agent.x[sl]
    g = agent.grad_cache[sl]
    # estimate of the other agents' summed block gradients
    others = inst.n_agents * agent.tracker[sl] - g
    coef = g + others - inst.reg.weight * inst.reg.smooth_grad(z)
    x_tilde = solve_block_subproblem(coef, z, tau, inst.reg.l1_level, inst.lo[sl], inst.hi[sl])
    return x_tilde, z + gamma * (x_tilde - z)


def solver_round(
    state: SolverState,
    inst: ProblemInstance,
    schedule: BlockSchedule,
    graph: DiGraph,
    gamma: float,
    t: int,
    tau: float,
) -> SolverState:
    """One synchronous iteration; pure function of the pre-round state."""
    n_agents = state.n_agents
    layout = inst.layout
    taus = np.broadcast_to(np.asarray(tau, dtype=float), (n_agents,))

    # phase 1: local optimization, then blockwise weighted averaging
    v = state.x.copy()
    for i in range(n_agents):
        agent = state.agent(i)
        sl = layout.slice(agent.block)
        _, v[i, sl] = local_optimization(agent, inst, float(taus[i]), gamma)

    weights = build_all_weights(graph, state.blocks, layout.n_blocks)
    x_next = np.empty_like(state.x)
    mass_next = np.empty_like(state.mass)
    for block in range(layout.n_blocks):
        sl = layout.slice(block)
        mass_next[:, block], x_next[:, sl] = push_sum_mix(
            weights[block].matrix, state.mass[:, block], v[:, sl]
        )

    # select next blocks and refresh one cached block gradient per agent
    blocks_next = np.array([select_block(schedule, i, t + 1) for i in range(n_agents)])
    grad_next = state.grad_cache.copy()
    for i in range(n_agents):
        sl = layout.slice(int(blocks_next[i]))
        grad_next[i, sl] = block_gradient(inst, i, x_next[i], int(blocks_next[i]))

    # phase 2: blockwise tracking step on the gradient trackers
    tracker_next = np.empty_like(state.tracker)
    for block in range(layout.n_blocks):
        sl = layout.slice(block)
        phi = state.mass[:, block]
        payload = state.tracker[:, sl] + (grad_next[:, sl] - state.grad_cache[:, sl]) / phi[:, None]
        _, tracker_next[:, sl] = push_sum_mix(weights[block].matrix, phi, payload)

    return SolverState(layout, x_next, mass_next, tracker_next, grad_next, blocks_next)


def stationarity_gap(inst: ProblemInstance, x_bar: np.ndarray) -> float:
    """Infinity-norm distance of a point from its projected prox-gradient
    image, zero exactly at stationary points (the J column of run traces).

    The smooth direction combines all agents' gradients and the
    regularizer's subtracted part; the l1 envelope enters through its exact
    prox, a soft-threshold followed by the box projection.
    """
    smooth = sum_gradient(inst, x_bar) - inst.reg.weight * inst.reg.smooth_grad(x_bar)
    image = inst.project_box(soft_threshold(x_bar - smooth, inst.reg.l1_level))
    return float(np.max(np.abs(x_bar - image)))


def disagreement(x_all: np.ndarray) -> float:
    """Largest distance of any agent's copy from the network average (the D
    column of run traces)."""
    x_bar = x_all.mean(axis=0)
    return float(np.max(np.linalg.norm(x_all - x_bar, axis=1)))


@dataclass
class RunTrace:
    """Per-iteration metrics of one run plus its configuration echo.

    t_end is the first iteration whose stationarity gap fell below the run
    tolerance, or None if the iteration cap was hit first.
    """

    meta: dict
    t: list
    t_norm: list
    gamma: list
    J: list
    D: list
    U: list
    comm: list
    t_end: int | None

    @classmethod
    def empty(cls, meta: dict) -> "RunTrace":
        return cls(dict(meta), [], [], [], [], [], [], [], None)

    def append(self, t, t_norm, gamma, j, d, u, comm) -> None:
        self.t.append(t)
        self.t_norm.append(t_norm)
        self.gamma.append(gamma)
        self.J.append(j)
        self.D.append(d)
        self.U.append(u)
        self.comm.append(comm)


def _metrics(inst: ProblemInstance, x_all: np.ndarray) -> tuple[float, float, float]:
    x_bar = x_all.mean(axis=0)
    return (
        stationarity_gap(inst, x_bar),
        disagreement(x_all),
        objective_value(inst, x_bar),
    )


def run_block_sca(
    inst: ProblemInstance,
    graph: DiGraph,
    schedule: BlockSchedule,
    steps: StepSizeSchedule,
    tau: float,
    tol: float,
    t_max: int,
    meta: dict | None = None,
    x0: np.ndarray | None = None,
) -> RunTrace:
    """Drive the solver until the stationarity gap drops below tol or t_max
    rounds have run; records one metric row per iteration."""
    n_blocks = inst.layout.n_blocks
    trace = RunTrace.empty(meta or {})
    state = init_solver_state(inst, schedule, x0)
    gamma = steps.gamma0
    comm = 0
    for t in range(t_max + 1):
        j, d, u = _metrics(inst, state.x)
        trace.append(t, t / n_blocks, gamma, j, d, u, comm)
        if j < tol:
            trace.t_end = t
            break
        if t == t_max:
            break
        # two block-sized payloads per agent per round, plus the push-sum
        # weight and the selection index
        comm += int(sum(2 * inst.layout.dim(int(b)) + 2 for b in state.blocks))
        state = solver_round(state, inst, schedule, graph, gamma, t, tau)
        gamma = gamma * (1.0 - steps.mu * gamma)
    return trace


def run_gradient_push(
    inst: ProblemInstance,
    graph: DiGraph,
    steps: StepSizeSchedule,
    tol: float,
    t_max: int,
    meta: dict | None = None,
    x0: np.ndarray | None = None,
) -> RunTrace:
    """Full-vector push-sum projected subgradient baseline.

    Every round each agent takes a projected subgradient step on the whole
    vector and broadcasts all of it; the network then runs one push-sum
    mixing step. Communication per round is a full n-vector per agent
    instead of a single block. Two details keep the network aimed at the
    actual objective: each agent carries a 1/N share of the common
    regularizer, and the local step is scaled by 1/phi_i so the weighted
    mixing does not bias the descent toward high-weight agents.
    """
    n_agents, n = inst.n_agents, inst.n_vars
    all_bcast = [0] * n_agents
    w = build_all_weights(graph, all_bcast, 1)[0].matrix
    x = np.zeros((n_agents, n)) if x0 is None else np.array(x0, dtype=float)
    phi = np.ones(n_agents)
    reg = inst.reg
    trace = RunTrace.empty(meta or {})
    gamma = steps.gamma0
    comm = 0
    for t in range(t_max + 1):
        j, d, u = _metrics(inst, x)
        trace.append(t, float(t), gamma, j, d, u, comm)
        if j < tol:
            trace.t_end = t
            break
        if t == t_max:
            break
        z = np.empty_like(x)
        for i in range(n_agents):
            subgrad = full_gradient(inst, i, x[i]) + (
                reg.l1_level * np.sign(x[i]) - reg.weight * reg.smooth_grad(x[i])
            ) / n_agents
            z[i] = inst.project_box(x[i] - (gamma / phi[i]) * subgrad)
        phi, x = push_sum_mix(w, phi, z)
        comm += n_agents * (n + 1)
        gamma = gamma * (1.0 - steps.mu * gamma)
    return trace
