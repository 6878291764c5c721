"""2D differential-drive robot in a polygonal world with a raycast lidar.

All geometry is reduced to line segments ``(x0, y0, x1, y1)``: arena walls,
obstacle polygon edges and free-standing walls. Ranges and clearances are
computed analytically against that segment set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import WorldConfigError

WORLD_FORMAT = "sddpg-world/1"
OBS_LAYOUT = "gdis,gdir+,gdir-,v,w+,w-,scan0..scan17/1"


@dataclass(frozen=True)
class KinematicsConfig:
    wheel_separation: float = 0.23
    robot_radius: float = 0.175
    dt: float = 0.1
    n_beams: int = 18
    fov_deg: float = 180.0
    range_min: float = 0.2
    range_max: float = 40.0
    v_min: float = 0.05
    v_max: float = 0.5
    scan_noise_std: float = 0.0

    def __post_init__(self):
        if min(self.wheel_separation, self.robot_radius, self.dt) <= 0:
            raise WorldConfigError("robot geometry and dt must be positive")
        if not 0 < self.range_min < self.range_max:
            raise WorldConfigError("need 0 < range_min < range_max")

    @property
    def w_max(self) -> float:
        return (self.v_max - self.v_min) / self.wheel_separation

    def beam_angles(self) -> np.ndarray:
        """Beam bearings relative to the heading: centres of equal sectors over the fov."""
        width = math.radians(self.fov_deg) / self.n_beams
        return -math.radians(self.fov_deg) / 2 + width * (np.arange(self.n_beams) + 0.5)


def wrap_angle(a):
    """Wrap into (-pi, pi]."""
    a = np.asarray(a, dtype=np.float64)
    w = np.mod(a + np.pi, 2 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


# -- geometry ---------------------------------------------------------------

def ray_segments(origin, dirs, segments) -> np.ndarray:
    """Distance along each unit direction to the nearest segment (inf if none).

    ``dirs`` has shape ``(B, 2)``, ``segments`` ``(N, 4)``; returns ``(B,)``.
    """
    dirs = np.atleast_2d(dirs)
    if len(segments) == 0:
        return np.full(len(dirs), np.inf)
    a = segments[:, :2]
    e = segments[:, 2:] - a
    ao = a - np.asarray(origin, dtype=np.float64)
    dx, dy = dirs[:, 0:1], dirs[:, 1:2]
    denom = dx * e[:, 1] - dy * e[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ao[:, 0] * e[:, 1] - ao[:, 1] * e[:, 0]) / denom
        s = (ao[:, 0] * dy - ao[:, 1] * dx) / denom
    hit = (denom != 0) & (t >= 0) & (s >= 0) & (s <= 1)
    return np.where(hit, t, np.inf).min(axis=1)


def point_segments_distance(p, segments) -> float:
    """Euclidean distance from point ``p`` to the closest segment."""
    if len(segments) == 0:
        return math.inf
    p = np.asarray(p, dtype=np.float64)
    a = segments[:, :2]
    e = segments[:, 2:] - a
    ee = np.einsum("ij,ij->i", e, e)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(ee > 0, np.einsum("ij,ij->i", p - a, e) / ee, 0.0)
    s = np.clip(s, 0.0, 1.0)
    d = a + s[:, None] * e - p
    return float(np.sqrt(np.einsum("ij,ij->i", d, d).min()))


def point_in_polygon(p, vertices) -> bool:
    """Even-odd rule; points exactly on an edge may go either way."""
    x, y = p
    inside = False
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xc > x:
                inside = not inside
    return inside


# -- world description --------------------------------------------------------

@dataclass
class Obstacle:
    """A closed polygon (``kind`` "box"/"polygon") or an open polyline ("wall")."""

    kind: str
    points: np.ndarray

    @property
    def closed(self) -> bool:
        return self.kind != "wall"

    def segments(self) -> np.ndarray:
        pts = self.points
        if self.closed:
            pts = np.vstack([pts, pts[:1]])
        return np.hstack([pts[:-1], pts[1:]])

    def contains(self, p) -> bool:
        return self.closed and point_in_polygon(p, self.points)

    @classmethod
    def box(cls, x0, y0, x1, y1) -> Obstacle:
        return cls("box", np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=np.float64))

    @classmethod
    def from_dict(cls, d) -> Obstacle:
        kind = d.get("type")
        if kind == "box":
            (x0, y0), (x1, y1) = d["min"], d["max"]
            if not (x0 < x1 and y0 < y1):
                raise WorldConfigError(f"box with min {d['min']} not below max {d['max']}")
            return cls.box(x0, y0, x1, y1)
        if kind in ("polygon", "wall"):
            pts = np.asarray(d["points"] if kind == "wall" else d["vertices"], dtype=np.float64)
            need = 2 if kind == "wall" else 3
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < need:
                raise WorldConfigError(f"{kind} needs at least {need} 2-D points")
            return cls(kind, pts)
        raise WorldConfigError(f"unknown obstacle type {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "box":
            return {"type": "box", "min": self.points[0].tolist(), "max": self.points[2].tolist()}
        key = "points" if self.kind == "wall" else "vertices"
        return {"type": self.kind, key: self.points.tolist()}


@dataclass
class WorldSpec:
    name: str
    bounds: tuple[float, float, float, float]
    obstacles: list[Obstacle] = field(default_factory=list)
    start_regions: list[tuple[float, float, float, float]] = field(default_factory=list)
    goal_regions: list[tuple[float, float, float, float]] = field(default_factory=list)
    min_separation: float = 0.0
    clearance: float = 0.5

    def __post_init__(self):
        x0, y0, x1, y1 = self.bounds
        if not (x0 < x1 and y0 < y1):
            raise WorldConfigError(f"{self.name}: degenerate bounds {self.bounds}")
        if self.min_separation < 0:
            raise WorldConfigError(f"{self.name}: negative min_separation")
        if not self.start_regions:
            self.start_regions = [tuple(self.bounds)]
        if not self.goal_regions:
            self.goal_regions = [tuple(self.bounds)]
        for ob in self.obstacles:
            if (ob.points[:, 0].min() < x0 or ob.points[:, 0].max() > x1
                    or ob.points[:, 1].min() < y0 or ob.points[:, 1].max() > y1):
                raise WorldConfigError(f"{self.name}: obstacle outside bounds")
        for r in list(self.start_regions) + list(self.goal_regions):
            if len(r) != 4 or r[0] > r[2] or r[1] > r[3]:
                raise WorldConfigError(f"{self.name}: bad region {r}")
        self._segments = np.vstack(
            [self._bound_segments()] + [ob.segments() for ob in self.obstacles]
        )

    def _bound_segments(self) -> np.ndarray:
        x0, y0, x1, y1 = self.bounds
        return np.array([[x0, y0, x1, y0], [x1, y0, x1, y1], [x1, y1, x0, y1], [x0, y1, x0, y0]],
                        dtype=np.float64)

    @property
    def segments(self) -> np.ndarray:
        return self._segments

    @property
    def diagonal(self) -> float:
        x0, y0, x1, y1 = self.bounds
        return math.hypot(x1 - x0, y1 - y0)

    def inside_obstacle(self, p) -> bool:
        x0, y0, x1, y1 = self.bounds
        if not (x0 < p[0] < x1 and y0 < p[1] < y1):
            return True
        return any(ob.contains(p) for ob in self.obstacles)

    def clearance_at(self, p) -> float:
        """Distance from ``p`` to the nearest surface, 0 inside an obstacle."""
        if self.inside_obstacle(p):
            return 0.0
        return point_segments_distance(p, self._segments)

    def to_dict(self) -> dict:
        return {
            "format": WORLD_FORMAT,
            "name": self.name,
            "bounds": list(self.bounds),
            "obstacles": [ob.to_dict() for ob in self.obstacles],
            "start_regions": [list(r) for r in self.start_regions],
            "goal_regions": [list(r) for r in self.goal_regions],
            "min_separation": self.min_separation,
            "clearance": self.clearance,
        }

    @classmethod
    def from_dict(cls, d) -> WorldSpec:
        if d.get("format") != WORLD_FORMAT:
            raise WorldConfigError(f"expected format {WORLD_FORMAT!r}, got {d.get('format')!r}")
        try:
            return cls(
                name=d.get("name", "world"),
                bounds=tuple(float(x) for x in d["bounds"]),
                obstacles=[Obstacle.from_dict(o) for o in d.get("obstacles", [])],
                start_regions=[tuple(map(float, r)) for r in d.get("start_regions", [])],
                goal_regions=[tuple(map(float, r)) for r in d.get("goal_regions", [])],
                min_separation=float(d.get("min_separation", 0.0)),
                clearance=float(d.get("clearance", 0.5)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, WorldConfigError):
                raise
            raise WorldConfigError(f"malformed world description: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> WorldSpec:
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise WorldConfigError(f"cannot read world file {path}: {exc}") from exc
        return cls.from_dict(d)


def bundled_world(name: str) -> WorldSpec:
    path = Path(__file__).parent / "worlds" / f"{name}.json"
    if not path.exists():
        raise WorldConfigError(f"no bundled world named {name!r}")
    return WorldSpec.load(path)


def resolve_world(ref: str) -> WorldSpec:
    """A bundled world name, or a path to a world file."""
    if ref.endswith(".json") or "/" in ref:
        return WorldSpec.load(ref)
    return bundled_world(ref)


# -- robot --------------------------------------------------------------------

@dataclass
class RobotState:
    x: float
    y: float
    theta: float
    v: float = 0.0
    w: float = 0.0
    g_dis: float = 0.0
    g_dir: float = 0.0
    scan: np.ndarray = field(default_factory=lambda: np.zeros(18))
    o_dis: float = math.inf


def step_kinematics(x, y, theta, v_left, v_right, cfg: KinematicsConfig):
    """Advance the pose by ``cfg.dt`` with exact arc integration.

    Returns ``(x, y, theta, v, w)``.
    """
    v = 0.5 * (v_left + v_right)
    w = (v_right - v_left) / cfg.wheel_separation
    dt = cfg.dt
    if abs(w) < 1e-9:
        x += v * math.cos(theta) * dt
        y += v * math.sin(theta) * dt
    else:
        r = v / w
        x += r * (math.sin(theta + w * dt) - math.sin(theta))
        y -= r * (math.cos(theta + w * dt) - math.cos(theta))
    return x, y, wrap_angle(theta + w * dt), v, w


def raycast(x, y, theta, world: WorldSpec, cfg: KinematicsConfig, rng=None) -> np.ndarray:
    """Lidar ranges for every beam, clamped to the sensor limits."""
    angles = theta + cfg.beam_angles()
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    ranges = ray_segments((x, y), dirs, world.segments)
    if cfg.scan_noise_std > 0 and rng is not None:
        ranges = ranges + rng.normal(0.0, cfg.scan_noise_std, size=ranges.shape)
    return np.clip(ranges, cfg.range_min, cfg.range_max)


def check_collision(x, y, world: WorldSpec, o_th: float) -> tuple[bool, float]:
    """``(collided, O_dis)``; ``O_dis`` is the centre-to-surface distance."""
    o_dis = world.clearance_at((x, y))
    return o_dis < o_th, o_dis


def goal_relative(x, y, theta, goal) -> tuple[float, float]:
    dx, dy = goal[0] - x, goal[1] - y
    return math.hypot(dx, dy), wrap_angle(math.atan2(dy, dx) - theta)


# -- observation --------------------------------------------------------------

@dataclass(frozen=True)
class ObservationConfig:
    """Normalization ranges; each raw variable is mapped affinely onto [0, 1].

    ``g_dis_cap`` of ``None`` means the world diagonal. ``scan_cap`` is the
    range mapped to 1.0 (the sensor maximum by default).
    """

    g_dis_cap: float | None = None
    scan_cap: float | None = None

    @property
    def n_channels(self) -> int:
        return 24


def make_observation(state: RobotState, kin: KinematicsConfig, obs_cfg: ObservationConfig,
                     g_dis_cap: float) -> tuple[np.ndarray, bool]:
    """Observation vector in [0, 1]^24 and a flag telling whether anything was clamped.

    Channel layout: G_dis, G_dir+, G_dir-, v, w+, w-, then the lidar beams
    from right to left. Signed quantities are split into positive and
    negative parts.
    """
    cap = obs_cfg.g_dis_cap or g_dis_cap
    scan_cap = obs_cfg.scan_cap or kin.range_max
    w_max = kin.w_max
    raw = np.concatenate([
        [state.g_dis / cap,
         max(state.g_dir, 0.0) / math.pi,
         max(-state.g_dir, 0.0) / math.pi,
         (state.v - kin.v_min) / (kin.v_max - kin.v_min),
         max(state.w, 0.0) / w_max,
         max(-state.w, 0.0) / w_max],
        (np.asarray(state.scan) - kin.range_min) / (scan_cap - kin.range_min),
    ])
    # velocities may sit a rounding error outside their range
    obs = np.clip(raw, 0.0, 1.0)
    clipped = bool(np.any(np.abs(obs - raw) > 1e-9))
    return obs, clipped


# -- episodes -----------------------------------------------------------------

def _sample_region(regions, rng) -> np.ndarray:
    x0, y0, x1, y1 = regions[int(rng.integers(len(regions)))]
    return np.array([rng.uniform(x0, x1) if x1 > x0 else x0,
                     rng.uniform(y0, y1) if y1 > y0 else y0])


def sample_episode(world: WorldSpec, rng: np.random.Generator, max_attempts: int = 10_000):
    """Rejection-sample a start pose ``(x, y, theta)`` and a goal ``(x, y)``.

    Both points keep at least ``world.clearance`` from every surface and
    are at least ``world.min_separation`` apart.
    """
    for _ in range(max_attempts):
        start = _sample_region(world.start_regions, rng)
        goal = _sample_region(world.goal_regions, rng)
        theta = rng.uniform(-math.pi, math.pi)
        if math.dist(start, goal) < world.min_separation:
            continue
        if world.clearance_at(start) < world.clearance or world.clearance_at(goal) < world.clearance:
            continue
        return (float(start[0]), float(start[1]), float(theta)), (float(goal[0]), float(goal[1]))
    raise WorldConfigError(f"{world.name}: no valid start/goal pair after {max_attempts} attempts")
