"""Policy evaluation on a fixed set of start/goal pairs.

The pair list is generated once per (world, seed, count, separation) and its
hash travels with every report, so reports are only compared when they were
produced on identical episodes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .env import NavEnv
from .errors import ProtocolError
from .reward import COLLISION, GOAL, OUTCOMES, TIMEOUT
from .simworld import WorldSpec, sample_episode

EVAL_HEADER = "# sddpg-eval/1"
EVAL_FIELDS = ["episode", "start_x", "start_y", "start_theta", "goal_x", "goal_y", "outcome",
               "steps", "route_length", "mean_speed", "straight_distance"]
TRAJ_HEADER = "# sddpg-trajectory/1"


def generate_pairs(world: WorldSpec, n: int, min_separation: float, seed: int):
    """``n`` start poses and goals, uniform over the world's regions."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    w = WorldSpec.from_dict({**world.to_dict(), "min_separation": min_separation})
    return [sample_episode(w, rng) for _ in range(n)]


def pairs_hash(pairs) -> str:
    blob = json.dumps([[list(s), list(g)] for s, g in pairs])
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class EpisodeRecord:
    episode: int
    start: tuple
    goal: tuple
    outcome: str
    steps: int
    route_length: float
    mean_speed: float
    straight_distance: float
    path: np.ndarray = field(repr=False, default=None)


def run_episode(policy, env: NavEnv, start, goal, rng: np.random.Generator) -> EpisodeRecord:
    obs = env.reset(rng, start=start, goal=goal)
    xs = [(env.state.x, env.state.y)]
    speeds = []
    while True:
        action = np.clip(np.asarray(policy.act(obs, rng), dtype=np.float64), 0.0, 1.0)
        obs, _, done, info = env.step(action, rng)
        xs.append((env.state.x, env.state.y))
        speeds.append(env.state.v)
        if done:
            break
    path = np.asarray(xs)
    length = float(np.sum(np.hypot(*np.diff(path, axis=0).T)))
    return EpisodeRecord(-1, tuple(start), tuple(goal), info["outcome"], env.steps, length,
                         float(np.mean(speeds)), math.dist(start[:2], goal), path)


def _episode_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


@dataclass
class EvalReport:
    method: str
    world: str
    seed: int
    pairs_hash: str
    episodes: list[EpisodeRecord]
    cell_size: float = 1.0
    bounds: tuple = (0.0, 0.0, 10.0, 10.0)

    def counts(self) -> dict:
        return {o: sum(e.outcome == o for e in self.episodes) for o in OUTCOMES}

    def rates(self) -> dict:
        n = len(self.episodes)
        return {o: c / n for o, c in self.counts().items()}

    @property
    def success_rate(self) -> float:
        return self.rates()[GOAL]

    def route_metrics(self, episodes=None) -> tuple[float, float]:
        """Mean route length and mean speed over successful episodes (optionally a subset)."""
        keep = [e for e in self.episodes
                if e.outcome == GOAL and (episodes is None or e.episode in episodes)]
        if not keep:
            return math.nan, math.nan
        return (float(np.mean([e.route_length for e in keep])),
                float(np.mean([e.mean_speed for e in keep])))

    def heatmap(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell ``(successful crossings, crossings)``; an episode counts once per cell."""
        x0, y0, x1, y1 = self.bounds
        nx = int(math.ceil((x1 - x0) / self.cell_size))
        ny = int(math.ceil((y1 - y0) / self.cell_size))
        success = np.zeros((ny, nx))
        total = np.zeros((ny, nx))
        for e in self.episodes:
            if e.path is None:
                continue
            ix = np.clip(((e.path[:, 0] - x0) // self.cell_size).astype(int), 0, nx - 1)
            iy = np.clip(((e.path[:, 1] - y0) // self.cell_size).astype(int), 0, ny - 1)
            cells = set(zip(iy.tolist(), ix.tolist()))
            for cell in cells:
                total[cell] += 1
                if e.outcome == GOAL:
                    success[cell] += 1
        return success, total

    def heatmap_rates(self) -> np.ndarray:
        success, total = self.heatmap()
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total > 0, success / total, np.nan)

    def to_csv(self) -> str:
        buf = io.StringIO()
        meta = {"method": self.method, "world": self.world, "seed": self.seed,
                "pairs_hash": self.pairs_hash, "cell_size": self.cell_size, "bounds": list(self.bounds)}
        buf.write(f"{EVAL_HEADER} {json.dumps(meta, sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(EVAL_FIELDS)
        for e in self.episodes:
            writer.writerow([e.episode, *[repr(float(v)) for v in e.start], *[repr(float(v)) for v in e.goal],
                             e.outcome, e.steps, repr(e.route_length), repr(e.mean_speed),
                             repr(e.straight_distance)])
        return buf.getvalue()

    def save(self, path) -> None:
        path = Path(path)
        path.write_text(self.to_csv())
        paths = {f"ep{e.episode}": e.path for e in self.episodes if e.path is not None}
        with open(path.with_suffix(".paths.npz"), "wb") as fh:
            np.savez_compressed(fh, **paths)

    @classmethod
    def load(cls, path) -> EvalReport:
        path = Path(path)
        lines = path.read_text().splitlines()
        if not lines or not lines[0].startswith(EVAL_HEADER):
            raise ValueError(f"{path} is not an evaluation report")
        meta = json.loads(lines[0][len(EVAL_HEADER):])
        paths_file = path.with_suffix(".paths.npz")
        paths = dict(np.load(paths_file)) if paths_file.exists() else {}
        episodes = []
        for row in csv.DictReader(lines[1:]):
            i = int(row["episode"])
            episodes.append(EpisodeRecord(
                i, (float(row["start_x"]), float(row["start_y"]), float(row["start_theta"])),
                (float(row["goal_x"]), float(row["goal_y"])), row["outcome"], int(row["steps"]),
                float(row["route_length"]), float(row["mean_speed"]), float(row["straight_distance"]),
                paths.get(f"ep{i}")))
        return cls(meta["method"], meta["world"], meta["seed"], meta["pairs_hash"], episodes,
                   meta["cell_size"], tuple(meta["bounds"]))


def _run_one(args):
    policy, env_kwargs, index, start, goal, seed = args
    env = NavEnv(**env_kwargs)
    rec = run_episode(policy, env, start, goal, _episode_rng(seed, index))
    rec.episode = index
    return rec


def evaluate(policy, method: str, world: WorldSpec, pairs, seed: int, kin, reward_cfg, obs_cfg,
             max_steps: int = 1000, workers: int = 1) -> EvalReport:
    """Roll ``policy`` out once per start/goal pair.

    Each episode draws from its own seeded stream, so results do not depend on
    ``workers`` or on scheduling order.
    """
    env_kwargs = dict(world=world, kin=kin, reward_cfg=reward_cfg, obs_cfg=obs_cfg, max_steps=max_steps)
    jobs = [(policy, env_kwargs, i, s, g, seed) for i, (s, g) in enumerate(pairs)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [_run_one(job) for job in jobs]
    records.sort(key=lambda r: r.episode)
    return EvalReport(method, world.name, seed, pairs_hash(pairs), records, 1.0, tuple(world.bounds))


def common_successes(reports) -> set[int]:
    """Episode indices that every report solved."""
    check_same_protocol(reports)
    sets = [{e.episode for e in r.episodes if e.outcome == GOAL} for r in reports]
    return set.intersection(*sets) if sets else set()


def check_same_protocol(reports) -> None:
    hashes = {r.pairs_hash for r in reports}
    if len(hashes) > 1:
        raise ProtocolError(f"reports were evaluated on different start/goal sets: {sorted(hashes)}")


def write_trajectory(path, records) -> None:
    """Dump ``(t, x, y, theta, v_left, v_right, reward, outcome)`` rows from a recording env."""
    with open(path, "w", newline="") as fh:
        fh.write(TRAJ_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x", "y", "theta", "v_left", "v_right", "reward", "outcome"])
        for r in records:
            writer.writerow([r.t, repr(r.x), repr(r.y), repr(r.theta), repr(r.v_left),
                             repr(r.v_right), repr(r.reward), r.outcome])



def collect_states(policy, world: WorldSpec, n: int, seed: int, kin, reward_cfg, obs_cfg,
                   max_steps: int = 1000) -> np.ndarray:
    """``n`` observations visited by ``policy``, episodes restarting as they end."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xCA1]))
    env = NavEnv(world, kin, reward_cfg, obs_cfg, max_steps)
    states = []
    obs = env.reset(rng)
    while len(states) < n:
        states.append(obs)
        obs, _, done, _ = env.step(np.clip(policy.act(obs, rng), 0.0, 1.0), rng)
        if done:
            obs = env.reset(rng)
    return np.asarray(states)
