"""Plant dynamics, integrators, the scenario runner, and its statistics."""
import numpy as np
import pytest

from conftest import pendulum_accel, zero_gravity_clone
from vdcnal.config import builtin_config_path, load_sim
from vdcnal.kinematics import chain_poses, jacobian
from vdcnal.simulation import (
    AdaptationSpec,
    DisturbanceSpec,
    SimConfig,
    forward_dynamics,
    initial_configuration,
    inverse_dynamics,
    joint_space_mass_matrix,
    kinetic_energy,
    make_joint_adapters,
    make_link_adapters,
    orientation_angle_deg,
    rmse,
    run_scenario,
    step_rk4,
    step_semi_implicit,
    summarize,
    tuning_burden,
)
from vdcnal.controller import ControllerGains


def _potential(model, q):
    poses = chain_poses(model, q)
    U = 0.0
    for i, joint in enumerate(model.joints):
        com_w = poses.pb[i] + poses.Rb[i] @ joint.link.com
        U += joint.link.mass * float(model.gravity @ com_w)
    return U


def test_static_torques_match_potential_gradient(rrr3, arm7):
    # independent statics oracle: tau = dU/dq at rest
    rng = np.random.default_rng(61)
    h = 1e-6
    for model in (rrr3, arm7):
        for _ in range(5):
            q = rng.uniform(-1.0, 1.0, model.n)
            tau = inverse_dynamics(model, q, np.zeros(model.n), np.zeros(model.n))
            grad = np.array([
                (_potential(model, q + h * e) - _potential(model, q - h * e))
                / (2 * h) for e in np.eye(model.n)])
            assert np.allclose(tau, grad, atol=1e-8)


def test_pendulum_matches_closed_form(pendulum):
    for q in (-2.0, -0.8, 0.0, 0.3, 1.4, 2.9):
        for qd in (0.0, 1.0, -2.5):
            got = forward_dynamics(pendulum, np.array([q]), np.array([qd]),
                                   np.zeros(1))[0]
            assert got == pytest.approx(pendulum_accel(q, qd), abs=1e-10)
            # inverse route: torque that produces a chosen acceleration
            tau = inverse_dynamics(pendulum, np.array([q]), np.array([qd]),
                                   np.array([1.7]))
            back = forward_dynamics(pendulum, np.array([q]), np.array([qd]), tau)
            assert back[0] == pytest.approx(1.7, abs=1e-10)


def test_forward_inverse_dynamics_round_trip(rrr3, arm7):
    rng = np.random.default_rng(62)
    for model in (rrr3, arm7):
        for _ in range(10):
            q = rng.uniform(-1.2, 1.2, model.n)
            qdot = rng.standard_normal(model.n)
            qddot = rng.standard_normal(model.n)
            tau = inverse_dynamics(model, q, qdot, qddot)
            tau += np.array([j.motor_inertia for j in model.joints]) * qddot
            back = forward_dynamics(model, q, qdot, tau)
            assert np.allclose(back, qddot, atol=1e-9)


def test_mass_matrix_batched_equals_naive(rrr3, arm7):
    rng = np.random.default_rng(63)
    for model in (rrr3, arm7):
        q = rng.uniform(-1.0, 1.0, model.n)
        M = joint_space_mass_matrix(model, q)
        assert np.allclose(M, M.T, atol=1e-12)
        assert np.linalg.eigvalsh(M)[0] > 0.0
        naive = np.column_stack([
            inverse_dynamics(model, q, np.zeros(model.n), e,
                             gravity=np.zeros(3)) for e in np.eye(model.n)])
        naive += np.diag([j.motor_inertia for j in model.joints])
        assert np.allclose(M, naive, atol=1e-12)


def test_external_wrench_coupling(arm7):
    rng = np.random.default_rng(64)
    q = rng.uniform(-1.0, 1.0, 7)
    qdot = rng.standard_normal(7)
    tau = rng.standard_normal(7)
    F = np.array([3.0, -2.0, 1.0, 0.5, -0.2, 0.1])
    delta = (forward_dynamics(arm7, q, qdot, tau, f_ext=F)
             - forward_dynamics(arm7, q, qdot, tau))
    pred = np.linalg.solve(joint_space_mass_matrix(arm7, q),
                           jacobian(arm7, q).T @ F)
    assert np.allclose(delta, pred, atol=1e-9)


def test_energy_conservation_without_gravity(rrr3):
    model = zero_gravity_clone(rrr3)
    q = np.array([0.3, -0.5, 0.8])
    qdot = np.array([1.0, -0.7, 0.4])
    e0 = kinetic_energy(model, q, qdot)
    dt = 1e-3
    worst = 0.0
    for k in range(10000):  # 10 s of torque-free motion
        q, qdot, _ = step_rk4(model, q, qdot, np.zeros(3), dt)
        worst = max(worst, abs(kinetic_energy(model, q, qdot) - e0))
    assert worst <= 1e-6 * e0


def test_rk4_observed_order(rrr3):
    # Richardson ratios over dt, dt/2, dt/4 without a reference solution
    q0 = np.array([0.4, -0.3, 0.6])
    qd0 = np.array([0.0, 0.5, -0.2])
    tau = np.array([0.5, -0.2, 0.1])
    T = 0.1

    def final_state(dt):
        q, qdot = q0.copy(), qd0.copy()
        for _ in range(int(round(T / dt))):
            q, qdot, _ = step_rk4(rrr3, q, qdot, tau, dt)
        return np.concatenate((q, qdot))

    x1 = final_state(4e-3)
    x2 = final_state(2e-3)
    x3 = final_state(1e-3)
    order = np.log2(np.linalg.norm(x1 - x2) / np.linalg.norm(x2 - x3))
    assert order >= 3.5


def test_semi_implicit_step_arithmetic(rrr3):
    rng = np.random.default_rng(65)
    q = rng.uniform(-0.5, 0.5, 3)
    qdot = rng.standard_normal(3)
    tau = rng.standard_normal(3)
    dt = 1e-3
    q1, qd1, qdd = step_semi_implicit(rrr3, q, qdot, tau, dt)
    assert np.allclose(qdd, forward_dynamics(rrr3, q, qdot, tau), atol=0.0)
    assert np.allclose(qd1, qdot + dt * qdd, atol=0.0)
    assert np.allclose(q1, q + dt * qd1, atol=0.0)


def test_rmse_values():
    t = np.arange(1000) / 1000.0
    assert rmse(3.0 * np.ones(50)) == pytest.approx(3.0, abs=0.0)
    # whole periods on a half-open uniform grid: exactly 1/sqrt(2)
    for periods in (1, 3):
        vals = np.sin(2.0 * np.pi * periods * t)
        assert rmse(vals) == pytest.approx(np.sqrt(0.5), abs=1e-12)
    # transient cutoff drops early samples
    vals = np.where(t < 0.5, 100.0, 1.0)
    assert rmse(vals, t, transient_cutoff=0.5) == pytest.approx(1.0, abs=0.0)
    with pytest.raises(ValueError, match="empty"):
        rmse(np.array([]))
    with pytest.raises(ValueError, match="empty"):
        rmse(vals, t, transient_cutoff=2.0)


def test_orientation_angle_degrees():
    theta = 0.6
    e_o = np.array([0.0, 0.0, np.sin(theta / 2.0)])
    assert orientation_angle_deg(e_o)[0] == pytest.approx(np.degrees(theta),
                                                          abs=1e-12)
    # norms above one (roundoff) are clipped, not propagated into arcsin
    assert np.isfinite(orientation_angle_deg(np.array([1.0, 1.0, 1.0]))[0])


def test_disturbance_spec():
    none = DisturbanceSpec(kind="none")
    assert none.wrench(1.23) is None
    sine = DisturbanceSpec(kind="sine", amplitude_n=5.0, frequency_hz=0.5)
    assert np.allclose(sine.wrench(0.0), 0.0, atol=0.0)
    w = sine.wrench(0.5)  # quarter period: peak
    assert np.allclose(w, [5.0, 5.0, 5.0, 0.0, 0.0, 0.0], atol=1e-12)
    for t in np.linspace(0.0, 4.0, 200):
        w = sine.wrench(t)
        assert np.linalg.norm(w[:3]) <= np.sqrt(3.0) * 5.0 + 1e-12
        assert np.allclose(w[3:], 0.0, atol=0.0)
    with pytest.raises(ValueError, match="unknown disturbance"):
        DisturbanceSpec(kind="gust").wrench(0.0)


def test_sim_config_validation(arm7):
    cfg = load_sim(builtin_config_path("exo_pose"))
    assert cfg.validate(arm7) == []
    cfg.duration_s = 0.0
    assert cfg.validate(arm7) == []
    cfg.duration_s = 0.5 * cfg.dt_s
    assert any("duration" in p for p in cfg.validate(arm7))
    cfg = load_sim(builtin_config_path("exo_pose"))
    cfg.integrator = "leapfrog"
    assert any("integrator" in p for p in cfg.validate(arm7))
    cfg = load_sim(builtin_config_path("exo_pose"))
    cfg.adapter = "kalman"
    assert any("adapter" in p for p in cfg.validate(arm7))
    cfg = load_sim(builtin_config_path("exo_pose"))
    cfg.initial_q_rad = (0.0, 0.0)
    assert any("initial_q_rad" in p for p in cfg.validate(arm7))


def test_initial_configuration_repetition_semantics(arm7):
    cfg = load_sim(builtin_config_path("exo_pose"))
    cfg.initial_q_rad = tuple(0.1 * np.arange(7))
    base = initial_configuration(arm7, cfg, 0)
    assert np.array_equal(base, 0.1 * np.arange(7))
    q3a = initial_configuration(arm7, cfg, 3)
    q3b = initial_configuration(arm7, cfg, 3)
    assert np.array_equal(q3a, q3b)
    q4 = initial_configuration(arm7, cfg, 4)
    assert not np.array_equal(q3a, q4)
    assert np.max(np.abs(q3a - base)) <= cfg.initial_q_perturb_rad


def test_adapter_factories(arm7):
    gains = ControllerGains()
    spec = AdaptationSpec()
    from vdcnal.adaptation import (FrozenLinkAdapter, NalLinkAdapter,
                                   ProjectionLinkAdapter, NalJointAdapter)
    links = make_link_adapters(arm7, "nal", gains, spec)
    assert all(isinstance(a, NalLinkAdapter) for a in links)
    assert links[0].phi_hat()[0] == pytest.approx(0.5 * arm7.joints[0].link.mass)
    links = make_link_adapters(arm7, "projection", gains, spec)
    assert all(isinstance(a, ProjectionLinkAdapter) for a in links)
    for a, j in zip(links, arm7.joints):
        truth = j.link.as_vector()
        assert np.all(a.state.lower <= truth) and np.all(truth <= a.state.upper)
    links = make_link_adapters(arm7, "none", gains, spec)
    assert all(isinstance(a, FrozenLinkAdapter) for a in links)
    joints = make_joint_adapters(arm7, "nal", gains, spec)
    assert all(isinstance(a, NalJointAdapter) for a in joints)
    with pytest.raises(ValueError, match="unknown adapter"):
        make_link_adapters(arm7, "fancy", gains, spec)
    with pytest.raises(ValueError, match="unknown adapter"):
        make_joint_adapters(arm7, "fancy", gains, spec)


def test_tuning_burden_counts(rrr3):
    proj = tuning_burden(rrr3, "projection")
    assert proj["adaptation_gains"] == 39
    assert proj["adaptation_bounds"] == 78
    nal = tuning_burden(rrr3, "nal")
    assert nal["adaptation_gains"] == 1
    assert nal["adaptation_bounds"] == 0
    assert nal["joint_adaptation_gains"] == 1


def test_zero_duration_run(arm7):
    cfg = load_sim(builtin_config_path("exo_pose"))
    cfg.duration_s = 0.0
    log = run_scenario(arm7, cfg, repetition=0)
    assert log.data.shape[0] == 0
    assert summarize(log) == {"adapter": "nal", "repetition": 0, "samples": 0}


def test_run_scenario_is_deterministic(rrr3):
    cfg = load_sim(builtin_config_path("rrr_compare"))
    cfg.duration_s = 0.2
    a = run_scenario(rrr3, cfg, repetition=1)
    b = run_scenario(rrr3, cfg, repetition=1)
    assert a.columns == b.columns
    assert np.array_equal(a.data, b.data)


def test_run_scenario_reports_divergence(rrr3):
    cfg = load_sim(builtin_config_path("rrr_compare"))
    cfg.duration_s = 5.0
    cfg.dt_s = 0.5  # far outside the stable step range
    with pytest.raises(FloatingPointError, match="diverged"):
        with np.errstate(all="ignore"):
            run_scenario(rrr3, cfg, repetition=0)


def test_summarize_task_and_joint_keys(rrr3, arm7):
    cfg = load_sim(builtin_config_path("exo_pose"))
    cfg.duration_s = 0.05
    log = run_scenario(arm7, cfg, repetition=0)
    s = summarize(log)
    for key in ("rmse_position_mm", "rmse_orientation_deg",
                "max_position_error_mm", "min_pseudo_inertia_eig"):
        assert key in s and np.isfinite(s[key])

    cfg = load_sim(builtin_config_path("rrr_compare"))
    cfg.duration_s = 0.05
    log = run_scenario(rrr3, cfg, repetition=0)
    s = summarize(log)
    for i in (1, 2, 3):
        assert f"rmse_joint_{i}_rad" in s
        assert f"max_error_joint_{i}_rad" in s
    assert "min_pseudo_inertia_eig" in s
