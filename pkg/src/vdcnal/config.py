"""YAML loading for robot models, simulation settings and run manifests.

Key names carry explicit units (mass_kg, com_m, tip_offset_m, ...) so the
files are self-describing.  Link inertias are written about the center of
mass in the link's own axes as [xx, yy, zz, xy, yz, xz]; the loader applies
the parallel-axis shift so the in-memory model is always about the frame
origin.  Loaders raise ConfigError with the file and the offending key;
``validate_deliverables`` style checks live on the loaded objects.
"""
from __future__ import annotations

import pathlib
from dataclasses import dataclass

import numpy as np
import yaml

from .controller import ControllerGains
from .kinematics import Joint, Pose, RobotModel
from .rigid_body import GRAVITY, InertialParams
from .simulation import AdaptationSpec, DisturbanceSpec, SimConfig, TrajectorySpec
from .spatial import FrameTransform, euler_xyz_to_rotation, quat_from_rotation

_CONFIG_DIR = pathlib.Path(__file__).resolve().parent / "configs"


class ConfigError(ValueError):
    """A config file failed to parse or failed validation."""


def builtin_config_path(name: str) -> pathlib.Path:
    """Path of a shipped config; accepts 'arm7' or 'arm7.yaml'."""
    stem = name if name.endswith(".yaml") else name + ".yaml"
    path = _CONFIG_DIR / stem
    if not path.exists():
        shipped = sorted(p.stem for p in _CONFIG_DIR.glob("*.yaml"))
        raise ConfigError(f"no built-in config {name!r}; shipped: {shipped}")
    return path


def resolve_config_path(name: str, relative_to: pathlib.Path | None = None) -> pathlib.Path:
    """Resolve a config reference: explicit path first, then built-in name."""
    p = pathlib.Path(name)
    if p.exists():
        return p
    if relative_to is not None and (relative_to / p).exists():
        return relative_to / p
    return builtin_config_path(name)


def _load_yaml(path: pathlib.Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def _need(node: dict, key: str, where: str):
    if key not in node:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return node[key]


def _vec(node, key: str, where: str, length: int) -> np.ndarray:
    v = np.asarray(_need(node, key, where), dtype=float)
    if v.shape != (length,):
        raise ConfigError(f"{where}: {key} must have {length} entries")
    return v


def _transform(node: dict, rot_key: str, off_key: str, where: str) -> FrameTransform:
    angles = _vec(node, rot_key, where, 3) if rot_key in node else np.zeros(3)
    offset = _vec(node, off_key, where, 3) if off_key in node else np.zeros(3)
    return FrameTransform(euler_xyz_to_rotation(*angles), offset)


def load_robot(path) -> RobotModel:
    """Read a robot description file and return the validated model."""
    path = pathlib.Path(path)
    doc = _load_yaml(path)
    name = _need(doc, "name", str(path))
    gravity = _vec(doc, "gravity_mps2", str(path), 3) if "gravity_mps2" in doc \
        else np.asarray(GRAVITY)
    base = _transform(doc.get("base", {}), "rotation_xyz_rad", "position_m",
                      f"{path}:base")

    joints = []
    for idx, jnode in enumerate(_need(doc, "joints", str(path)), start=1):
        where = f"{path}:joints[{idx}]"
        jname = jnode.get("name", f"joint{idx}")
        axis = _need(jnode, "axis", where)
        if axis not in ("x", "y", "z"):
            raise ConfigError(f"{where}: axis must be 'x', 'y' or 'z'")
        lnode = _need(jnode, "link", where)
        mass = float(_need(lnode, "mass_kg", f"{where}.link"))
        com = _vec(lnode, "com_m", f"{where}.link", 3)
        ivec = _vec(lnode, "inertia_com_kgm2", f"{where}.link", 6)
        xx, yy, zz, xy, yz, xz = ivec
        inertia_com = np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])
        link = InertialParams.from_com(mass, com, inertia_com)
        limit = jnode.get("limit_rad", (-np.pi, np.pi))
        joints.append(Joint(
            name=jname, axis=axis,
            motor_inertia=float(_need(jnode, "motor_inertia_kgm2", where)),
            tip=_transform(jnode, "tip_rotation_xyz_rad", "tip_offset_m", where),
            link=link, limit=(float(limit[0]), float(limit[1]))))

    home = None
    if "home_pose" in doc:
        hnode = doc["home_pose"]
        angles = _vec(hnode, "euler_xyz_rad", f"{path}:home_pose", 3)
        home = Pose(_vec(hnode, "position_m", f"{path}:home_pose", 3),
                    quat_from_rotation(euler_xyz_to_rotation(*angles)))

    model = RobotModel(name=name, joints=tuple(joints), base=base,
                       gravity=gravity, home_pose=home)
    problems = model.validate()
    if problems:
        raise ConfigError(f"{path}: " + "; ".join(problems))
    return model


def load_sim(path) -> SimConfig:
    """Read a simulation settings file; unknown keys are rejected."""
    path = pathlib.Path(path)
    doc = _load_yaml(path)
    known = {"scenario", "dt_s", "duration_s", "integrator", "adapter", "seed",
             "repetitions", "transient_cutoff_s", "initial_q_rad",
             "initial_q_perturb_rad", "joint_tracking_gain", "gains",
             "disturbance", "trajectory", "adaptation"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")

    gains = ControllerGains(**doc.get("gains", {}))
    disturbance = DisturbanceSpec(**doc.get("disturbance", {}))
    tnode = dict(doc.get("trajectory", {}))
    for key in ("target_position_m", "target_euler_xyz_rad"):
        if key in tnode:
            tnode[key] = tuple(float(x) for x in tnode[key])
    trajectory = TrajectorySpec(**tnode)
    adaptation = AdaptationSpec(**doc.get("adaptation", {}))

    cfg = SimConfig(
        scenario=doc.get("scenario", "exo-pose"),
        dt_s=float(doc.get("dt_s", 1e-3)),
        duration_s=float(doc.get("duration_s", 6.0)),
        integrator=doc.get("integrator", "semi_implicit"),
        adapter=doc.get("adapter", "nal"),
        seed=int(doc.get("seed", 0)),
        repetitions=int(doc.get("repetitions", 1)),
        transient_cutoff_s=float(doc.get("transient_cutoff_s", 2.0)),
        initial_q_rad=(tuple(float(x) for x in doc["initial_q_rad"])
                       if doc.get("initial_q_rad") is not None else None),
        initial_q_perturb_rad=float(doc.get("initial_q_perturb_rad", 0.1)),
        joint_tracking_gain=(float(doc["joint_tracking_gain"])
                             if doc.get("joint_tracking_gain") is not None else None),
        gains=gains, disturbance=disturbance, trajectory=trajectory,
        adaptation=adaptation)
    problems = cfg.validate()
    if problems:
        raise ConfigError(f"{path}: " + "; ".join(problems))
    return cfg


@dataclass(frozen=True)
class ExperimentManifest:
    """Which robot, which settings, where the artifacts go."""

    scenario: str
    robot_path: pathlib.Path
    sim_path: pathlib.Path
    output_dir: pathlib.Path
    repetitions: int
    seed: int

    def load(self) -> tuple[RobotModel, SimConfig]:
        model = load_robot(self.robot_path)
        cfg = load_sim(self.sim_path)
        # the manifest wins where it overlaps the sim file
        cfg.scenario = self.scenario
        cfg.repetitions = self.repetitions
        cfg.seed = self.seed
        problems = cfg.validate(model)
        if problems:
            raise ConfigError(f"{self.sim_path}: " + "; ".join(problems))
        return model, cfg


def load_manifest(path, output_override=None) -> ExperimentManifest:
    """Read a run manifest; config paths resolve relative to the manifest."""
    path = pathlib.Path(path)
    doc = _load_yaml(path)
    here = path.parent
    sim_path = resolve_config_path(str(_need(doc, "sim", str(path))), here)
    sim_doc = _load_yaml(sim_path)
    manifest = ExperimentManifest(
        scenario=doc.get("scenario", sim_doc.get("scenario", "exo-pose")),
        robot_path=resolve_config_path(str(_need(doc, "robot", str(path))), here),
        sim_path=sim_path,
        output_dir=pathlib.Path(output_override if output_override is not None
                                else _need(doc, "output_dir", str(path))),
        repetitions=int(doc.get("repetitions", sim_doc.get("repetitions", 1))),
        seed=int(doc.get("seed", sim_doc.get("seed", 0))))
    if manifest.repetitions < 1:
        raise ConfigError(f"{path}: repetitions must be at least 1")
    manifest.load()        # existence + validation gate before any run starts
    return manifest
