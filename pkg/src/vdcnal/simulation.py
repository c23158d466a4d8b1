"""Plant simulation and scenario harness.

The plant side deliberately does not reuse the controller's sweeps: the
inverse dynamics below is its own recursive Newton-Euler pass over raw
arrays, and it assembles net wrenches with the original (center-of-mass)
Coriolis form, so agreement with the controller-side force propagation is a
genuine cross-check rather than the same code run twice.

The joint-space plant is

    (M_link(q) + diag(I_m)) qddot + bias(q, qdot) = tau + J^T f_ext,

with M_link assembled column-by-column from unit-acceleration inverse-dynamics
calls and the bias from a zero-acceleration call.  External wrenches act at
the tip-frame origin and are given in world coordinates; the recursion sees
their negative, rotated into the tip frame.

Scenario runs are deterministic: all randomness flows through one seeded
generator, and a re-run with the same configs and seed reproduces the run
log bit for bit.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .adaptation import (FrozenJointAdapter, FrozenLinkAdapter, NalJointAdapter,
                         NalLinkAdapter, ProjectionJointAdapter, ProjectionLinkAdapter,
                         initial_link_estimate)
from .controller import (ControllerGains, StabilityDiagnostics, VdcController,
                         stability_diagnostics)
from .kinematics import (CartesianQuinticReference, JointSineReference, RobotModel,
                         forward_kinematics)
from .rigid_body import coriolis_matrix_original, gravity_wrench, mass_matrix
from .spatial import SpatialWrench, axis_rotation, cross3, skew

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def _as_world_wrench(f_ext) -> np.ndarray | None:
    if f_ext is None:
        return None
    if isinstance(f_ext, SpatialWrench):
        return f_ext.as_array()
    f_ext = np.asarray(f_ext, dtype=float)
    if f_ext.shape == (3,):                 # pure force
        return np.concatenate((f_ext, np.zeros(3)))
    return f_ext.reshape(6)


def inverse_dynamics(model: RobotModel, q, qdot, qddot, f_ext=None,
                     gravity=None) -> np.ndarray:
    """Joint torques balancing the chain at (q, qdot, qddot).

    ``f_ext`` is the wrench the environment applies to the tip, world frame,
    about the tip-frame origin (a bare 3-vector is read as a pure force); the
    chain passes on its negative at T_n.  ``gravity`` overrides the model's
    inertial-frame gravity vector (used to switch gravity off).
    """
    n = model.n
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    qddot = np.asarray(qddot, dtype=float)
    g = model.gravity if gravity is None else np.asarray(gravity, dtype=float)

    # forward pass: pose, velocity and coordinate acceleration of every B frame
    R_w = model.base.R
    v = np.zeros(6)
    a = np.zeros(6)
    Rb_w = np.empty((n, 3, 3))
    vb = np.empty((n, 6))
    ab = np.empty((n, 6))
    Rjs = []
    gravity_on = bool(np.any(g))
    for i, joint in enumerate(model.joints):
        Rj = axis_rotation(joint.axis, q[i])
        Rjs.append(Rj)
        k3 = joint.axis_unit
        RjT = Rj.T
        vb[i, :3] = RjT @ v[:3]
        vb[i, 3:] = RjT @ v[3:]
        ab[i, :3] = RjT @ a[:3] - qdot[i] * cross3(k3, vb[i, :3])
        ab[i, 3:] = RjT @ a[3:] - qdot[i] * cross3(k3, vb[i, 3:])
        slot = 3 + _AXIS_INDEX[joint.axis]
        vb[i, slot] += qdot[i]
        ab[i, slot] += qddot[i]
        R_w = R_w @ Rj
        Rb_w[i] = R_w
        # move to T_i (constant transform within the link)
        Rt, rt = joint.tip.R, joint.tip.r
        RtT = Rt.T
        v = np.empty(6)
        v[:3] = RtT @ (vb[i, :3] + cross3(vb[i, 3:], rt))
        v[3:] = RtT @ vb[i, 3:]
        a = np.empty(6)
        a[:3] = RtT @ (ab[i, :3] + cross3(ab[i, 3:], rt))
        a[3:] = RtT @ ab[i, 3:]
        R_w = R_w @ Rt

    # net wrench of each link in its B frame (original Coriolis form)
    net = np.empty((n, 6))
    for i, joint in enumerate(model.joints):
        M = mass_matrix(joint.link)
        C = coriolis_matrix_original(joint.link, vb[i, 3:])
        net[i] = M @ ab[i] + C @ vb[i]
        if gravity_on:
            net[i] += gravity_wrench(joint.link, Rb_w[i].T, g)

    # backward pass
    w_ext = _as_world_wrench(f_ext)
    if w_ext is None:
        carried = np.zeros(6)
    else:
        carried = np.empty(6)
        carried[:3] = -(R_w.T @ w_ext[:3])
        carried[3:] = -(R_w.T @ w_ext[3:])
    tau = np.empty(n)
    for j in range(n - 1, -1, -1):
        joint = model.joints[j]
        Rt, rt = joint.tip.R, joint.tip.r
        f = Rt @ carried[:3]
        fb = net[j].copy()
        fb[:3] += f
        fb[3:] += cross3(rt, f) + Rt @ carried[3:]
        tau[j] = fb[3 + _AXIS_INDEX[joint.axis]]
        Rj = Rjs[j]
        carried = np.empty(6)
        carried[:3] = Rj @ fb[:3]
        carried[3:] = Rj @ fb[3:]
    return tau


def joint_space_mass_matrix(model: RobotModel, q) -> np.ndarray:
    """Chain mass matrix plus the reflected drive inertias on the diagonal.

    Column j is the inverse dynamics of a unit acceleration at joint j with
    zero rates and gravity off; the recursion carries all n columns at once
    (velocities vanish identically, so only M_i survives in each net wrench).
    """
    n = model.n
    q = np.asarray(q, dtype=float)
    Rjs = [axis_rotation(j.axis, q[i]) for i, j in enumerate(model.joints)]

    A = np.empty((n, 6, n))          # A[i][:, j]: accel of B_i for unit qddot_j
    prev = np.zeros((6, n))
    for i, joint in enumerate(model.joints):
        RjT = Rjs[i].T
        Ai = np.empty((6, n))
        Ai[:3] = RjT @ prev[:3]
        Ai[3:] = RjT @ prev[3:]
        Ai[3 + _AXIS_INDEX[joint.axis], i] += 1.0
        A[i] = Ai
        Rt, rt = joint.tip.R, joint.tip.r
        prev = np.empty((6, n))
        prev[:3] = Rt.T @ (Ai[:3] - skew(rt) @ Ai[3:])
        prev[3:] = Rt.T @ Ai[3:]

    M = np.empty((n, n))
    carried = np.zeros((6, n))
    for j in range(n - 1, -1, -1):
        joint = model.joints[j]
        Rt, rt = joint.tip.R, joint.tip.r
        f = Rt @ carried[:3]
        fb = mass_matrix(joint.link) @ A[j]
        fb[:3] += f
        fb[3:] += skew(rt) @ f + Rt @ carried[3:]
        M[j] = fb[3 + _AXIS_INDEX[joint.axis]]
        carried = np.vstack((Rjs[j] @ fb[:3], Rjs[j] @ fb[3:]))
    M += np.diag([j.motor_inertia for j in model.joints])
    return 0.5 * (M + M.T)


def forward_dynamics(model: RobotModel, q, qdot, tau, f_ext=None) -> np.ndarray:
    """Solve (M_link + diag(I_m)) qddot = tau - bias(q, qdot, f_ext).

    The external-wrench contribution enters through the bias call, which
    carries ``f_ext`` down the chain; this is Jacobian-transpose coupling
    without forming J.
    """
    bias = inverse_dynamics(model, q, qdot, np.zeros(model.n), f_ext=f_ext)
    return np.linalg.solve(joint_space_mass_matrix(model, q),
                           np.asarray(tau, dtype=float) - bias)


def kinetic_energy(model: RobotModel, q, qdot) -> float:
    qdot = np.asarray(qdot, dtype=float)
    return 0.5 * float(qdot @ (joint_space_mass_matrix(model, q) @ qdot))


def step_semi_implicit(model: RobotModel, q, qdot, tau, dt, wrench_fn=None, t=0.0):
    """Symplectic Euler: update velocity with qddot(t), then position."""
    f = wrench_fn(t) if wrench_fn else None
    qddot = forward_dynamics(model, q, qdot, tau, f)
    qdot_new = qdot + dt * qddot
    return q + dt * qdot_new, qdot_new, qddot


def step_rk4(model: RobotModel, q, qdot, tau, dt, wrench_fn=None, t=0.0):
    """Classical RK4 on (q, qdot) with zero-order-hold torque."""
    def accel(ti, qi, qdi):
        f = wrench_fn(ti) if wrench_fn else None
        return forward_dynamics(model, qi, qdi, tau, f)

    k1q = qdot
    k1v = accel(t, q, qdot)
    k2q = qdot + 0.5 * dt * k1v
    k2v = accel(t + 0.5 * dt, q + 0.5 * dt * k1q, k2q)
    k3q = qdot + 0.5 * dt * k2v
    k3v = accel(t + 0.5 * dt, q + 0.5 * dt * k2q, k3q)
    k4q = qdot + dt * k3v
    k4v = accel(t + dt, q + dt * k3q, k4q)
    q_new = q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    qd_new = qdot + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return q_new, qd_new, k1v


_INTEGRATORS = ("semi_implicit", "rk4")


@dataclass(frozen=True)
class DisturbanceSpec:
    """Tip wrench applied by the environment: equal sine force on all axes."""

    kind: str = "none"              # 'none' | 'sine'
    amplitude_n: float = 5.0
    frequency_hz: float = 0.5

    def wrench(self, t: float) -> np.ndarray | None:
        """World-frame [f, m] at the tip origin; None when inactive."""
        if self.kind == "none":
            return None
        if self.kind == "sine":
            f = self.amplitude_n * np.sin(2.0 * np.pi * self.frequency_hz * t)
            return np.array([f, f, f, 0.0, 0.0, 0.0])
        raise ValueError(f"unknown disturbance kind {self.kind!r}")


@dataclass
class TrajectorySpec:
    kind: str = "cartesian_quintic"      # or 'joint_sine'
    target_position_m: tuple = (0.25, 0.15, -0.15)
    target_euler_xyz_rad: tuple = (0.0, 0.0, 0.0)
    duration_s: float = 3.0
    amplitude_rad: float = 1.0
    omega_rad_s: float = 1.0


@dataclass
class AdaptationSpec:
    initial_scale: float = 0.5
    projection_rho: float = 10.0
    projection_bound_scale: float = 1.0
    projection_bound_floor: float = 0.01
    nal_integrator: str = "geometric"


@dataclass
class SimConfig:
    scenario: str = "exo-pose"
    dt_s: float = 1e-3
    duration_s: float = 6.0
    integrator: str = "semi_implicit"
    adapter: str = "nal"                 # 'nal' | 'projection' | 'none'
    seed: int = 0
    repetitions: int = 1
    transient_cutoff_s: float = 2.0
    initial_q_rad: tuple | None = None
    initial_q_perturb_rad: float = 0.1
    joint_tracking_gain: float | None = None
    gains: ControllerGains = field(default_factory=ControllerGains)
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    trajectory: TrajectorySpec = field(default_factory=TrajectorySpec)
    adaptation: AdaptationSpec = field(default_factory=AdaptationSpec)

    def validate(self, model: RobotModel | None = None) -> list[str]:
        problems = self.gains.validate()
        if self.dt_s <= 0.0:
            problems.append("dt_s must be positive")
        # duration 0 is the legal degenerate case (empty run)
        if self.duration_s != 0.0 and self.duration_s < self.dt_s:
            problems.append("duration_s must be 0 or at least dt_s")
        if self.repetitions < 1:
            problems.append("repetitions must be at least 1")
        if self.integrator not in _INTEGRATORS:
            problems.append(f"integrator must be one of {_INTEGRATORS}")
        if self.adapter not in ("nal", "projection", "none"):
            problems.append("adapter must be 'nal', 'projection' or 'none'")
        if self.scenario not in ("exo-pose", "rrr-compare"):
            problems.append("scenario must be 'exo-pose' or 'rrr-compare'")
        if self.disturbance.kind not in ("none", "sine"):
            problems.append("disturbance kind must be 'none' or 'sine'")
        if self.trajectory.kind not in ("cartesian_quintic", "joint_sine"):
            problems.append("trajectory kind must be 'cartesian_quintic' or 'joint_sine'")
        if self.trajectory.kind == "cartesian_quintic" and self.trajectory.duration_s <= 0.0:
            problems.append("trajectory duration_s must be positive")
        if model is not None and self.initial_q_rad is not None \
                and len(self.initial_q_rad) != model.n:
            problems.append(f"initial_q_rad must have {model.n} entries")
        if self.adaptation.initial_scale <= 0.0:
            problems.append("adaptation initial_scale must be positive")
        if self.adaptation.projection_rho <= 0.0:
            problems.append("adaptation projection_rho must be positive")
        return problems


@dataclass
class RunLog:
    """One repetition's tick-by-tick record plus its summary numbers."""

    columns: list[str]
    data: np.ndarray
    meta: dict
    summary: dict

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def rmse(values, t=None, transient_cutoff: float = 0.0) -> float:
    """Root-mean-square of a series, optionally dropping an initial transient."""
    values = np.asarray(values, dtype=float)
    if t is not None:
        values = values[np.asarray(t, dtype=float) >= transient_cutoff]
    if values.size == 0:
        raise ValueError("rmse of an empty series")
    return float(np.sqrt(np.mean(values ** 2)))


def orientation_angle_deg(e_o) -> np.ndarray:
    """Rotation angle implied by the quaternion-error vector part, in degrees."""
    norms = np.clip(np.linalg.norm(np.atleast_2d(e_o), axis=-1), 0.0, 1.0)
    return np.degrees(2.0 * np.arcsin(norms))


def make_link_adapters(model: RobotModel, kind: str, gains: ControllerGains,
                       spec: AdaptationSpec):
    adapters = []
    for joint in model.joints:
        guess = initial_link_estimate(joint.link, spec.initial_scale)
        if kind == "nal":
            adapters.append(NalLinkAdapter(guess, gains.gamma, spec.nal_integrator))
        elif kind == "projection":
            adapters.append(ProjectionLinkAdapter.around_truth(
                joint.link, guess.as_vector(), spec.projection_rho,
                spec.projection_bound_scale, spec.projection_bound_floor))
        elif kind == "none":
            adapters.append(FrozenLinkAdapter(joint.link))
        else:
            raise ValueError(f"unknown adapter kind {kind!r}")
    return adapters


def make_joint_adapters(model: RobotModel, kind: str, gains: ControllerGains,
                        spec: AdaptationSpec):
    adapters = []
    for joint in model.joints:
        i0 = spec.initial_scale * joint.motor_inertia
        if kind == "nal":
            adapters.append(NalJointAdapter(max(i0, 1e-8), gains.gamma_a))
        elif kind == "projection":
            half = max(spec.projection_bound_scale * joint.motor_inertia,
                       1e-2 * spec.projection_bound_floor)
            adapters.append(ProjectionJointAdapter(
                i0, spec.projection_rho,
                joint.motor_inertia - half, joint.motor_inertia + half))
        elif kind == "none":
            adapters.append(FrozenJointAdapter(joint.motor_inertia))
        else:
            raise ValueError(f"unknown adapter kind {kind!r}")
    return adapters


def initial_configuration(model: RobotModel, cfg: SimConfig, repetition: int) -> np.ndarray:
    """Configured start plus, from the second repetition on, a seeded offset."""
    if cfg.initial_q_rad is not None:
        q0 = np.asarray(cfg.initial_q_rad, dtype=float)
    else:
        q0 = np.zeros(model.n)
    if cfg.initial_q_perturb_rad > 0.0 and repetition > 0:
        rng = np.random.default_rng([cfg.seed, repetition])
        q0 = q0 + rng.uniform(-cfg.initial_q_perturb_rad,
                              cfg.initial_q_perturb_rad, model.n)
    return q0


def _build_reference(model: RobotModel, cfg: SimConfig, q0):
    traj = cfg.trajectory
    if traj.kind == "joint_sine":
        return "joint", JointSineReference(model.n, traj.amplitude_rad, traj.omega_rad_s)
    chi0 = forward_kinematics(model, q0).as_vector()
    chif = np.concatenate((np.asarray(traj.target_position_m, dtype=float),
                           np.asarray(traj.target_euler_xyz_rad, dtype=float)))
    return "task", CartesianQuinticReference(chi0, chif, traj.duration_s)


def log_columns(model: RobotModel, mode: str) -> list[str]:
    n = model.n
    cols = ["t_s"]
    cols += [f"q_{i}_rad" for i in range(1, n + 1)]
    cols += [f"qdot_{i}_radps" for i in range(1, n + 1)]
    cols += ["x_m", "y_m", "z_m", "eul_x_rad", "eul_y_rad", "eul_z_rad"]
    cols += ["xd_m", "yd_m", "zd_m", "euld_x_rad", "euld_y_rad", "euld_z_rad"]
    if mode == "task":
        cols += ["ep_x_m", "ep_y_m", "ep_z_m", "eo_x", "eo_y", "eo_z"]
    else:
        cols += [f"eq_{i}_rad" for i in range(1, n + 1)]
    cols += [f"tau_{i}_nm" for i in range(1, n + 1)]
    cols += [f"nu_link_{i}" for i in range(1, n + 1)]
    cols += [f"nu_joint_{i}" for i in range(1, n + 1)]
    cols += ["nu_total"]
    cols += [f"vpf_{i}" for i in range(1, n + 1)]
    cols += [f"mineig_{i}" for i in range(1, n + 1)]
    return cols


def run_scenario(model: RobotModel, cfg: SimConfig, repetition: int = 0,
                 adapter: str | None = None) -> RunLog:
    """Simulate one repetition; returns the tick log with summary attached."""
    problems = cfg.validate(model) + model.validate()
    if problems:
        raise ValueError("invalid configuration: " + "; ".join(problems))
    adapter = cfg.adapter if adapter is None else adapter
    dt = cfg.dt_s
    n_ticks = int(round(cfg.duration_s / dt))
    q0 = initial_configuration(model, cfg, repetition)
    q = q0.copy()
    qdot = np.zeros(model.n)

    mode, reference = _build_reference(model, cfg, q0)
    link_adapters = make_link_adapters(model, adapter, cfg.gains, cfg.adaptation)
    joint_adapters = make_joint_adapters(model, adapter, cfg.gains, cfg.adaptation)
    controller = VdcController(model, cfg.gains, reference, link_adapters,
                               joint_adapters, mode=mode, dt=dt,
                               joint_gain=cfg.joint_tracking_gain)

    columns = log_columns(model, mode)
    rows = np.empty((n_ticks, len(columns)))
    started = time.perf_counter()
    for k in range(n_ticks):
        t = k * dt
        try:
            tau, snap = controller.step(t, q, qdot)
            wrench = cfg.disturbance.wrench(t)
            qddot = forward_dynamics(model, q, qdot, tau, wrench)
            tip_wrench = _transmitted_tip_wrench(snap, wrench)
            diag = stability_diagnostics(model, cfg.gains, snap, q, qdot, qddot,
                                         tip_wrench, link_adapters, joint_adapters)
        except np.linalg.LinAlgError as exc:
            # a blown-up adapter state hits the eigensolver before the state
            # check below can notice; report it as the same divergence
            raise FloatingPointError(
                f"simulation diverged at t = {t:.3f} s "
                f"(repetition {repetition}): {exc}") from exc
        rows[k] = _row(t, q, qdot, snap, diag)
        if cfg.integrator == "semi_implicit":
            qdot = qdot + dt * qddot
            q = q + dt * qdot
        else:
            q, qdot, _ = step_rk4(model, q, qdot, tau, dt,
                                  wrench_fn=cfg.disturbance.wrench, t=t)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qdot))):
            raise FloatingPointError(f"simulation diverged at t = {t:.3f} s "
                                     f"(repetition {repetition})")
    elapsed = time.perf_counter() - started

    meta = {"scenario": cfg.scenario, "adapter": adapter, "repetition": repetition,
            "seed": cfg.seed, "dt_s": dt, "duration_s": cfg.duration_s,
            "integrator": cfg.integrator, "mode": mode,
            "transient_cutoff_s": cfg.transient_cutoff_s,
            "disturbance": cfg.disturbance.kind, "model": model.name,
            "initial_q_rad": [float(x) for x in q0],
            "wall_time_s": elapsed}
    log = RunLog(columns, rows, meta, {})
    log.summary = summarize(log)
    return log


def _transmitted_tip_wrench(snap, wrench_world) -> np.ndarray:
    """Wrench the chain passes to the environment at T_n, in that frame."""
    if wrench_world is None:
        return np.zeros(6)
    R = snap.poses.Rt[-1]
    return np.concatenate((-(R.T @ wrench_world[:3]), -(R.T @ wrench_world[3:])))


def _row(t, q, qdot, snap, diag: StabilityDiagnostics) -> np.ndarray:
    return np.concatenate([np.array([t]), q, qdot, snap.chi, snap.chi_d, snap.err,
                           snap.tau, diag.nu_links, diag.nu_joints,
                           np.array([diag.nu_total]), diag.vpf, diag.min_eigs])


def summarize(log: RunLog) -> dict:
    """Scalar error statistics of one run (transient dropped)."""
    out = {"adapter": log.meta["adapter"], "repetition": log.meta["repetition"]}
    if log.data.shape[0] == 0:
        out["samples"] = 0
        return out
    t = log.column("t_s")
    cutoff = log.meta["transient_cutoff_s"]
    if not np.any(t >= cutoff):
        cutoff = float(t[0])            # short run: keep everything
    if log.meta["mode"] == "task":
        ep = np.column_stack([log.column(c) for c in ("ep_x_m", "ep_y_m", "ep_z_m")])
        eo = np.column_stack([log.column(c) for c in ("eo_x", "eo_y", "eo_z")])
        out["rmse_position_mm"] = 1e3 * rmse(np.linalg.norm(ep, axis=1), t, cutoff)
        out["rmse_orientation_deg"] = rmse(orientation_angle_deg(eo), t, cutoff)
        keep = t >= cutoff
        out["max_position_error_mm"] = float(1e3 * np.max(np.linalg.norm(ep[keep], axis=1)))
    else:
        n = sum(1 for c in log.columns if c.startswith("eq_"))
        for i in range(1, n + 1):
            e = log.column(f"eq_{i}_rad")
            out[f"rmse_joint_{i}_rad"] = rmse(e, t, cutoff)
            out[f"max_error_joint_{i}_rad"] = float(np.max(np.abs(e[t >= cutoff])))
    out["min_pseudo_inertia_eig"] = float(np.min(
        np.column_stack([log.column(c) for c in log.columns if c.startswith("mineig_")])))
    return out


def tuning_burden(model: RobotModel, adapter: str) -> dict:
    """Gain bookkeeping for the comparison report.

    The per-channel law needs one rate per parameter of the classic 13-entry
    per-body vector plus a lower and an upper bound for each; the natural law
    needs one gain for all links and one more for the joint drives.
    """
    n = model.n
    if adapter == "projection":
        return {"adaptation_gains": 13 * n, "adaptation_bounds": 26 * n}
    if adapter == "nal":
        return {"adaptation_gains": 1, "adaptation_bounds": 0,
                "joint_adaptation_gains": 1}
    return {"adaptation_gains": 0, "adaptation_bounds": 0}
