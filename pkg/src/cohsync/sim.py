"""Closed-loop network simulation: fixed-step integration, stage-wise deadzone."""

import csv
from dataclasses import dataclass, replace

import numpy as np
import yaml

from . import signals as sigs
from .graph import WeightedDigraph, has_directed_spanning_tree, laplacian
from .linalg import AgentModel, AssumptionError, is_stabilizable
from .protocol import ProtocolParams, control_all, gain_rates

STATE_LIMIT = 1e12  # abort threshold for any state entry


class DivergenceError(RuntimeError):
    """The state blew up.

    Carries the first offending 1-based agent, the time, and whatever
    part of the trajectory was recorded before the abort.
    """

    def __init__(self, message, agent=None, time=None, partial=None):
        super().__init__(message)
        self.agent = agent
        self.time = time
        self.partial = partial


@dataclass
class NetworkState:
    """Stacked agent states, adaptive gains, and the clock."""

    x: np.ndarray
    rho: np.ndarray
    t: float


@dataclass
class Trajectory:
    """Time-sampled record of a closed-loop run.

    All arrays share the leading sample axis: times (S,), states
    (S, N, n), gains (S, N), zetas (S, N, n), controls (S, N, m),
    vi_values (S, N) holding zeta_i' P zeta_i, disturbances (S, N).
    """

    times: np.ndarray
    states: np.ndarray
    gains: np.ndarray
    zetas: np.ndarray
    controls: np.ndarray
    vi_values: np.ndarray
    disturbances: np.ndarray

    @property
    def n_samples(self):
        return self.times.shape[0]

    @property
    def n_agents(self):
        return self.states.shape[1]


@dataclass
class SimConfig:
    """Everything one run needs; validate() enforces the standing assumptions."""

    model: AgentModel
    graph: WeightedDigraph
    params: ProtocolParams
    disturbance: sigs.DisturbanceSignal
    x0: np.ndarray
    rho0: np.ndarray = 0.0
    t_end: float = 30.0
    dt: float = 1e-3
    record_every: int = 1

    def validate(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < self.dt:
            raise ValueError("t_end must cover at least one step dt")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be >= 1")
        N = self.graph.n_nodes
        n = self.model.n
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if x0.size != N * n:
            raise ValueError(f"x0 must stack {N} agents x {n} states = {N * n} values, got {x0.size}")
        rho0 = np.asarray(self.rho0, dtype=float).reshape(-1)
        if rho0.size not in (1, N):
            raise ValueError(f"rho0 must be a scalar or one value per agent ({N})")
        if np.any(rho0 < 0):
            raise ValueError("initial gains must be nonnegative")
        if self.model.w != 1:
            raise ValueError("simulation drives a single disturbance channel per agent (E with one column)")
        if self.params.n != n:
            raise ValueError("protocol matrices do not match the model state dimension")
        if not is_stabilizable(self.model.A, self.model.B):
            raise AssumptionError("(A, B) is not stabilizable")
        bx_err = np.linalg.norm(self.model.B @ self.model.X - self.model.E)
        if bx_err > 1e-9 * max(1.0, np.linalg.norm(self.model.E)):
            raise AssumptionError(
                "disturbance is not input-additive: im E is not contained in im B"
            )
        if not np.isfinite(self.disturbance.bound):
            raise AssumptionError("disturbance signal must have a finite amplitude bound")
        if not has_directed_spanning_tree(self.graph):
            raise AssumptionError("the communication graph has no directed spanning tree")


def default_initial_state(n_agents, n_states, seed, span=5.0):
    """Seeded uniform initial states in [-span, span], stacked agent by agent."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-span, span, size=(n_agents, n_states)).reshape(-1)


def rhs(state, cfg):
    """Time derivative (xdot stacked, rho rates) of the closed loop.

    Pure in (state, cfg). The simulation loop inlines the same math; this
    entry point exists for tests and custom integrators.
    """
    N = cfg.graph.n_nodes
    n = cfg.model.n
    x = np.asarray(state.x, dtype=float).reshape(N, n)
    finite = np.isfinite(x).all(axis=1)
    if not finite.all():
        agent = int(np.argmin(finite)) + 1
        raise DivergenceError(
            f"non-finite state for agent {agent} at t={state.t:.6g}", agent=agent, time=state.t
        )
    L = laplacian(cfg.graph)
    Z = L @ x
    rates = gain_rates(Z, cfg.params)
    U = control_all(np.asarray(state.rho, dtype=float), Z, cfg.params)
    w = sigs.evaluate_all(cfg.disturbance, np.arange(1, N + 1), state.t)
    xdot = x @ cfg.model.A.T + U @ cfg.model.B.T + w[:, None] * cfg.model.E.T
    return xdot.reshape(-1), rates


def simulate(cfg):
    """Integrate the closed loop with the classical fixed-step 4th-order scheme.

    The deadzone condition is re-evaluated at every integrator stage; no
    event detection is attempted (the gain rate is bounded, and the
    discontinuity enters the state dynamics only through the continuous
    gains, so the per-crossing error is O(dt) on a measure-zero set).
    Gains are clamped at zero after each step to guard round-off.
    Samples are recorded every record_every steps plus the final state.
    """
    cfg.validate()
    N = cfg.graph.n_nodes
    n = cfg.model.n
    m = cfg.model.m
    L = laplacian(cfg.graph)
    A = cfg.model.A
    B = cfg.model.B
    Ecol = cfg.model.E.T  # (1, n) after transpose, broadcast over agents
    params = cfg.params
    P = params.P
    sig = cfg.disturbance
    agents = np.arange(1, N + 1)
    dt = float(cfg.dt)
    half = 0.5 * dt
    steps = int(round(cfg.t_end / dt))
    every = int(cfg.record_every)

    x = np.asarray(cfg.x0, dtype=float).reshape(N, n).copy()
    rho0 = np.asarray(cfg.rho0, dtype=float).reshape(-1)
    rho = np.full(N, rho0[0]) if rho0.size == 1 else rho0.copy()

    rec_t, rec_x, rec_rho, rec_z, rec_u, rec_v, rec_w = [], [], [], [], [], [], []

    def record(t, xm, rh):
        Z = L @ xm
        rec_t.append(t)
        rec_x.append(xm.copy())
        rec_rho.append(rh.copy())
        rec_z.append(Z)
        rec_u.append(control_all(rh, Z, params))
        rec_v.append(np.einsum("ij,ij->i", Z, Z @ P))
        rec_w.append(sigs.evaluate_all(sig, agents, t))

    def partial():
        if not rec_t:
            return None
        return _assemble(rec_t, rec_x, rec_rho, rec_z, rec_u, rec_v, rec_w)

    def deriv(t, xm, rh):
        Z = L @ xm
        rates = gain_rates(Z, params)
        U = control_all(rh, Z, params)
        w = sigs.evaluate_all(sig, agents, t)
        return xm @ A.T + U @ B.T + w[:, None] * Ecol, rates

    t = 0.0
    for k in range(steps):
        if k % every == 0:
            record(t, x, rho)
        k1x, k1r = deriv(t, x, rho)
        k2x, k2r = deriv(t + half, x + half * k1x, rho + half * k1r)
        k3x, k3r = deriv(t + half, x + half * k2x, rho + half * k2r)
        k4x, k4r = deriv(t + dt, x + dt * k3x, rho + dt * k3r)
        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        rho = np.maximum(rho + (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r), 0.0)
        t = (k + 1) * dt
        bad = ~np.isfinite(x).all(axis=1) | (np.abs(x).max(axis=1) > STATE_LIMIT)
        if bad.any():
            agent = int(np.argmax(bad)) + 1
            raise DivergenceError(
                f"state diverged for agent {agent} at t={t:.6g} "
                f"(non-finite or beyond {STATE_LIMIT:g})",
                agent=agent,
                time=t,
                partial=partial(),
            )
    record(t, x, rho)

    traj = _assemble(rec_t, rec_x, rec_rho, rec_z, rec_u, rec_v, rec_w)
    drops = np.diff(traj.gains, axis=0).min() if traj.n_samples > 1 else 0.0
    if drops < -1e-12:
        raise RuntimeError(f"recorded gains decreased by {-drops:.3e}; integrator invariant broken")
    return traj


def _assemble(ts, xs, rhos, zs, us, vs, ws):
    return Trajectory(
        times=np.array(ts),
        states=np.array(xs),
        gains=np.array(rhos),
        zetas=np.array(zs),
        controls=np.array(us),
        vi_values=np.array(vs),
        disturbances=np.array(ws),
    )


@dataclass
class SweepResult:
    """One sweep entry: the config it ran with and either a trajectory or the error."""

    config: SimConfig
    trajectory: Trajectory = None
    error: Exception = None

    @property
    def ok(self):
        return self.error is None


def sweep(base, variations):
    """Run one simulation per override mapping, in order.

    Each entry is a dict of SimConfig field replacements. Failures are
    captured per entry so one bad run never aborts the rest; results come
    back in input order.
    """
    results = []
    for overrides in variations:
        cfg = replace(base, **overrides)
        try:
            results.append(SweepResult(config=cfg, trajectory=simulate(cfg)))
        except Exception as exc:  # noqa: BLE001 - reported per entry by contract
            results.append(SweepResult(config=cfg, error=exc))
    return results


def write_trajectory_csv(traj, path):
    """Write one row per (sample, agent): t, agent, x_1..x_n, rho, u_1..u_m, zeta_norm, V_i.

    Floats are written with repr, so equal trajectories produce
    byte-identical files.
    """
    S, N, n = traj.states.shape
    m = traj.controls.shape[2]
    header = (
        ["t", "agent"]
        + [f"x_{j + 1}" for j in range(n)]
        + ["rho"]
        + [f"u_{j + 1}" for j in range(m)]
        + ["zeta_norm", "V_i"]
    )
    znorm = np.linalg.norm(traj.zetas, axis=2)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in range(S):
            tval = repr(float(traj.times[s]))
            for a in range(N):
                row = [tval, str(a + 1)]
                row += [repr(float(v)) for v in traj.states[s, a]]
                row.append(repr(float(traj.gains[s, a])))
                row += [repr(float(v)) for v in traj.controls[s, a]]
                row.append(repr(float(znorm[s, a])))
                row.append(repr(float(traj.vi_values[s, a])))
                writer.writerow(row)


def write_metadata(path, meta):
    """YAML sidecar (seed, config echo, version); sorted keys keep bytes stable."""
    with open(path, "w") as fh:
        yaml.safe_dump(meta, fh, sort_keys=True)
