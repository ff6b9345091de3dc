"""Agent-based simulation of motion through an n-dimensional unit hypercube.

Agents follow a modified boids rule where social influence decays linearly
with distance and vanishes beyond the social influence horizon (sih). Every
post_interval ticks an agent "posts" the first statement of the grid cell it
occupies, producing a textual trajectory that the analysis pipeline can
consume like any chat corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from itertools import combinations

import numpy as np

from . import corpus as corpus_mod
from .corpus import Corpus, Post
from .errors import ConfigError, SimError

HEADING_EPS = 1e-9

REGIME_NOMAD = "nomad"
REGIME_FLOCK = "flock"
REGIME_STAMPEDE = "stampede"

# Epoch used when exporting simulator posts as a corpus (one tick = one second).
SIM_EPOCH = datetime(2025, 1, 1, tzinfo=timezone.utc)

_SIGMA_UNIFORM_SEED = 171717
_SIGMA_UNIFORM_PAIRS = 100_000
_sigma_uniform_cache: dict[int, float] = {}


@dataclass(frozen=True)
class SimConfig:
    # Defaults reproduce the three regimes (nomad / flock / stampede) at
    # sih 0 / 0.3 / 2.0 with 100 agents over 2000 ticks: weak alignment makes
    # global heading consensus slow on a short-horizon influence graph while
    # the fully-connected horizon still orders in time, and the fast travel
    # keeps co-moving packs spatially separated.
    dimensions: int = 2
    agent_count: int = 100
    sih: float = 0.3
    speed: float = 0.03
    steps: int = 500
    align_weight: float = 0.03
    cohesion_weight: float = 0.045
    noise_angle: float = 0.03  # radians
    cells_per_axis: int = 10
    post_interval: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.dimensions < 1:
            raise ConfigError("dimensions must be >= 1")
        if self.agent_count < 1:
            raise ConfigError("agent_count must be >= 1")
        if self.sih < 0:
            raise ConfigError("sih must be >= 0")
        if not (0 < self.speed <= 0.5):
            raise ConfigError("speed must be in (0, 0.5]")
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        for name in ("align_weight", "cohesion_weight"):
            w = getattr(self, name)
            if not (0.0 <= w <= 1.0):
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.noise_angle < 0:
            raise ConfigError("noise_angle must be >= 0")
        if self.cells_per_axis < 1:
            raise ConfigError("cells_per_axis must be >= 1")
        if self.post_interval < 1:
            raise ConfigError("post_interval must be >= 1")

    def to_mapping(self) -> dict:
        return {
            "dimensions": self.dimensions,
            "agent_count": self.agent_count,
            "sih": self.sih,
            "speed": self.speed,
            "steps": self.steps,
            "align_weight": self.align_weight,
            "cohesion_weight": self.cohesion_weight,
            "noise_angle": self.noise_angle,
            "cells_per_axis": self.cells_per_axis,
            "post_interval": self.post_interval,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class RegimeThresholds:
    stampede_polarization: float = 0.9
    stampede_spread_fraction: float = 0.2
    flock_alignment: float = 0.7
    cluster_radius_cap: float = 0.15


@dataclass
class Agent:
    id: int
    position: np.ndarray
    heading: np.ndarray

    def copy(self) -> "Agent":
        return Agent(self.id, self.position.copy(), self.heading.copy())


@dataclass(frozen=True)
class AgentPost:
    agent_id: int
    tick: int
    cell: tuple[int, ...]
    statement: str


@dataclass(frozen=True)
class RegimeReport:
    polarization: float
    spread: float
    cluster_count: int
    regime: str

    def to_mapping(self) -> dict:
        return {
            "polarization": self.polarization,
            "spread": self.spread,
            "cluster_count": self.cluster_count,
            "regime": self.regime,
        }


def default_statement(cell: tuple[int, ...]) -> str:
    return "cell_" + "_".join(str(c) for c in cell)


class Environment:
    """Grid of cells_per_axis^dimensions cells, each carrying >= 1 statement.

    Statements default to one auto-generated string per cell; overrides are
    accepted as a {cell: [statements...]} mapping.
    """

    def __init__(self, dimensions: int, cells_per_axis: int,
                 statements: dict[tuple[int, ...], list[str]] | None = None):
        if dimensions < 1 or cells_per_axis < 1:
            raise ConfigError("environment needs dimensions >= 1 and cells_per_axis >= 1")
        self.dimensions = dimensions
        self.cells_per_axis = cells_per_axis
        self._statements = {}
        if statements:
            for cell, stmts in statements.items():
                self._check_cell(cell)
                if not stmts:
                    raise ConfigError(f"cell {cell} has no statements")
                self._statements[tuple(cell)] = list(stmts)

    def _check_cell(self, cell) -> None:
        if len(cell) != self.dimensions:
            raise ConfigError(f"cell {cell} has wrong dimensionality")
        if any(not (0 <= c < self.cells_per_axis) for c in cell):
            raise ConfigError(f"cell {cell} outside [0, {self.cells_per_axis})")

    def statements_for(self, cell: tuple[int, ...]) -> list[str]:
        self._check_cell(cell)
        got = self._statements.get(tuple(cell))
        if got is not None:
            return got
        return [default_statement(tuple(cell))]

    def all_cells(self):
        """Iterate every cell coordinate tuple in lexicographic order."""
        def rec(prefix):
            if len(prefix) == self.dimensions:
                yield tuple(prefix)
                return
            for c in range(self.cells_per_axis):
                yield from rec(prefix + [c])
        yield from rec([])


def sigma_uniform(dimensions: int) -> float:
    """Expected pairwise distance of uniform points in [0,1]^n, estimated once
    by seeded Monte-Carlo over 1e5 point pairs and cached per dimension."""
    if dimensions not in _sigma_uniform_cache:
        rng = np.random.default_rng(_SIGMA_UNIFORM_SEED)
        a = rng.uniform(size=(_SIGMA_UNIFORM_PAIRS, dimensions))
        b = rng.uniform(size=(_SIGMA_UNIFORM_PAIRS, dimensions))
        _sigma_uniform_cache[dimensions] = float(
            np.linalg.norm(a - b, axis=1).mean())
    return _sigma_uniform_cache[dimensions]


def _init_rng(seed: int, agent_id: int) -> np.random.Generator:
    return np.random.default_rng([seed, agent_id, 0])


def _noise_rng(seed: int, agent_id: int) -> np.random.Generator:
    # Separate stream from the init draws so a caller-supplied initial state
    # still reproduces the per-agent noise of a full run (same seed, same id).
    return np.random.default_rng([seed, agent_id, 1])


def init_agents(cfg: SimConfig) -> list[Agent]:
    """Seeded uniform placement with random unit headings, one stream per agent."""
    agents = []
    for i in range(cfg.agent_count):
        g = _init_rng(cfg.seed, i)
        pos = g.uniform(size=cfg.dimensions)
        h = g.standard_normal(cfg.dimensions)
        norm = np.linalg.norm(h)
        while norm < HEADING_EPS:
            h = g.standard_normal(cfg.dimensions)
            norm = np.linalg.norm(h)
        agents.append(Agent(i, pos, h / norm))
    return agents


def _plane_pairs(dimensions: int) -> list[tuple[int, int]]:
    return list(combinations(range(dimensions), 2))


def _step_arrays(pos: np.ndarray, head: np.ndarray, cfg: SimConfig,
                 angles: np.ndarray | None, plane_idx: np.ndarray | None,
                 pairs: list[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """One synchronous tick: returns (new positions, new headings).

    Reads only the old state, so per-agent evaluation is trivially
    double-buffered.
    """
    n_agents, dims = pos.shape
    alpha, beta = cfg.align_weight, cfg.cohesion_weight

    if cfg.sih > 0 and n_agents > 1:
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        weights = 1.0 - dist / cfg.sih
        np.clip(weights, 0.0, None, out=weights)
        np.fill_diagonal(weights, 0.0)
    else:
        weights = np.zeros((n_agents, n_agents))

    wsum = weights.sum(axis=1)

    # Alignment: weighted mean heading over the neighborhood; the agent itself
    # participates with weight one (distance zero).
    align = (head + weights @ head) / (1.0 + wsum)[:, None]

    # Cohesion: unit vector toward the weighted centroid of the neighbors,
    # zero when there are none or the centroid coincides with the agent.
    cohesion = np.zeros_like(pos)
    has_nb = wsum > 0
    if has_nb.any():
        centroid = np.zeros_like(pos)
        centroid[has_nb] = (weights @ pos)[has_nb] / wsum[has_nb, None]
        dvec = centroid - pos
        dnorm = np.linalg.norm(dvec, axis=1)
        ok = has_nb & (dnorm > HEADING_EPS)
        cohesion[ok] = dvec[ok] / dnorm[ok, None]

    blend = (1.0 - alpha - beta) * head + alpha * align + beta * cohesion
    bnorm = np.linalg.norm(blend, axis=1)
    new_head = head.copy()
    ok = bnorm > HEADING_EPS
    new_head[ok] = blend[ok] / bnorm[ok, None]

    # Noise: rotate by a uniform angle in a random coordinate 2-plane
    # (undefined for dims < 2, where it is skipped).
    if angles is not None and dims >= 2:
        pair_arr = np.asarray(pairs)
        a_idx = pair_arr[plane_idx, 0]
        b_idx = pair_arr[plane_idx, 1]
        rows = np.arange(n_agents)
        ca, sa = np.cos(angles), np.sin(angles)
        ha = new_head[rows, a_idx]
        hb = new_head[rows, b_idx]
        new_head[rows, a_idx] = ca * ha - sa * hb
        new_head[rows, b_idx] = sa * ha + ca * hb

    new_pos = pos + cfg.speed * new_head
    # Reflecting walls: fold the position back into [0,1] and negate the
    # heading component for each fold.
    for _ in range(4):
        low = new_pos < 0.0
        high = new_pos > 1.0
        if not (low.any() or high.any()):
            break
        new_pos[low] = -new_pos[low]
        new_pos[high] = 2.0 - new_pos[high]
        new_head[low | high] *= -1.0
    return new_pos, new_head


def step(agents: list[Agent], env: Environment, cfg: SimConfig,
         rng: np.random.Generator) -> list[Agent]:
    """Advance every agent one tick, drawing noise from `rng` (angles for all
    agents first, then plane choices)."""
    cfg.validate()
    if env.dimensions != cfg.dimensions:
        raise ConfigError("environment dimensions do not match config")
    for a in agents:
        if a.position.shape != (cfg.dimensions,):
            raise ConfigError(f"agent {a.id} dimensionality does not match config")
    pos = np.stack([a.position for a in agents])
    head = np.stack([a.heading for a in agents])
    pairs = _plane_pairs(cfg.dimensions)
    if cfg.dimensions >= 2:
        angles = rng.uniform(-cfg.noise_angle, cfg.noise_angle, size=len(agents))
        plane_idx = rng.integers(0, len(pairs), size=len(agents))
    else:
        angles, plane_idx = None, None
    new_pos, new_head = _step_arrays(pos, head, cfg, angles, plane_idx, pairs)
    return [Agent(a.id, new_pos[i], new_head[i]) for i, a in enumerate(agents)]


def run_simulation(cfg: SimConfig, env: Environment | None = None,
                   agents: list[Agent] | None = None,
                   ) -> tuple[list[Agent], list[AgentPost], RegimeReport | None]:
    """Run a full simulation; deterministic for a fixed seed.

    Each agent owns an independent noise stream keyed by (seed, agent id), so
    with sih = 0 any agent's trajectory matches a single-agent rerun with the
    same id. After every post_interval-th tick each agent posts the first
    statement of its current cell. The regime report is computed on the final
    state (None when there are fewer than two agents).
    """
    cfg.validate()
    if env is None:
        env = Environment(cfg.dimensions, cfg.cells_per_axis)
    if env.dimensions != cfg.dimensions:
        raise ConfigError("environment dimensions do not match config")
    if agents is None:
        agents = init_agents(cfg)
    elif len(agents) != cfg.agent_count:
        raise ConfigError("agent list does not match agent_count")
    for a in agents:
        if a.position.shape != (cfg.dimensions,):
            raise ConfigError(f"agent {a.id} dimensionality does not match config")

    pos = np.stack([a.position for a in agents]).astype(float)
    head = np.stack([a.heading for a in agents]).astype(float)
    ids = [a.id for a in agents]
    pairs = _plane_pairs(cfg.dimensions)

    if cfg.dimensions >= 2 and cfg.steps > 0:
        angles = np.empty((len(agents), cfg.steps))
        planes = np.empty((len(agents), cfg.steps), dtype=np.int64)
        for i, agent_id in enumerate(ids):
            g = _noise_rng(cfg.seed, agent_id)
            angles[i] = g.uniform(-cfg.noise_angle, cfg.noise_angle, size=cfg.steps)
            planes[i] = g.integers(0, len(pairs), size=cfg.steps)
    else:
        angles = planes = None

    cells_per_tick: list[tuple[int, np.ndarray]] = []
    for t in range(cfg.steps):
        tick_angles = angles[:, t] if angles is not None else None
        tick_planes = planes[:, t] if planes is not None else None
        pos, head = _step_arrays(pos, head, cfg, tick_angles, tick_planes, pairs)
        if (t + 1) % cfg.post_interval == 0:
            cells = np.minimum((pos * env.cells_per_axis).astype(int),
                               env.cells_per_axis - 1)
            cells_per_tick.append((t, cells))

    posts: list[AgentPost] = []
    statement_cache: dict[tuple[int, ...], str] = {}
    for t, cells in cells_per_tick:
        for i, agent_id in enumerate(ids):
            cell = tuple(int(c) for c in cells[i])
            stmt = statement_cache.get(cell)
            if stmt is None:
                stmt = env.statements_for(cell)[0]
                statement_cache[cell] = stmt
            posts.append(AgentPost(agent_id, t, cell, stmt))

    final = [Agent(aid, pos[i].copy(), head[i].copy()) for i, aid in enumerate(ids)]
    report = classify_regime(final, cfg) if len(final) >= 2 else None
    return final, posts, report


def _connected_components(dist: np.ndarray, radius: float) -> np.ndarray:
    """Single-linkage component labels for a pairwise distance matrix."""
    n = dist.shape[0]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ii, jj = np.nonzero(dist <= radius)
    for a, b in zip(ii, jj):
        if a < b:
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[ra] = rb
    return np.array([find(i) for i in range(n)])


def classify_regime(agents: list[Agent], cfg: SimConfig,
                    thresholds: RegimeThresholds | None = None) -> RegimeReport:
    """Label the population nomad / flock / stampede.

    Polarization is the norm of the mean heading; spread is the mean pairwise
    distance; clusters are single-linkage components at radius min(sih, cap).
    Stampede needs high polarization and a spread far below the uniform
    baseline; flock needs at least two components with some multi-agent
    cluster internally aligned; everything else is nomadic.
    """
    if len(agents) < 2:
        raise SimError("regime classification needs at least 2 agents")
    thr = thresholds or RegimeThresholds()
    pos = np.stack([a.position for a in agents])
    head = np.stack([a.heading for a in agents])
    n = len(agents)

    polarization = float(np.linalg.norm(head.mean(axis=0)))
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    iu = np.triu_indices(n, k=1)
    spread = float(dist[iu].mean())

    radius = min(cfg.sih, thr.cluster_radius_cap)
    labels = _connected_components(dist, radius)
    cluster_ids = sorted(set(labels.tolist()))
    cluster_count = len(cluster_ids)

    multi_phis = []
    for cid in cluster_ids:
        members = labels == cid
        if members.sum() >= 2:
            multi_phis.append(float(np.linalg.norm(head[members].mean(axis=0))))

    sigma_u = sigma_uniform(cfg.dimensions)
    if (polarization > thr.stampede_polarization
            and spread < thr.stampede_spread_fraction * sigma_u):
        regime = REGIME_STAMPEDE
    elif (cluster_count >= 2 and multi_phis
            and float(np.mean(multi_phis)) > thr.flock_alignment):
        regime = REGIME_FLOCK
    else:
        regime = REGIME_NOMAD
    return RegimeReport(polarization, spread, cluster_count, regime)


def sim_posts_to_corpus(posts: list[AgentPost], group_id: str = "sim") -> Corpus:
    """Export simulator posts in the corpus interchange record layout
    (player "agent_<id>", one tick = one second past a fixed epoch)."""
    records = []
    for p in posts:
        ts = SIM_EPOCH + timedelta(seconds=p.tick)
        records.append(Post(
            post_id=f"{group_id}-{p.tick:06d}-{p.agent_id:05d}",
            group_id=group_id,
            player_id=f"agent_{p.agent_id}",
            role=corpus_mod.ROLE_PLAYER,
            timestamp=ts,
            text=p.statement,
        ))
    records.sort(key=lambda r: (r.group_id, r.timestamp, r.post_id))
    return Corpus(records)


def sim_config_from_mapping(data: dict, strict: bool = True) -> SimConfig:
    """Build a SimConfig from a {key: value} mapping (the sim.* config keys)."""
    known = set(SimConfig().to_mapping())
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown sim config key(s): {', '.join(unknown)}")
    if strict:
        missing = sorted(known - set(data))
        if missing:
            raise ConfigError(f"missing sim config key(s): {', '.join(missing)}")
    kwargs = {}
    ints = {"dimensions", "agent_count", "steps", "cells_per_axis",
            "post_interval", "seed"}
    for key, value in data.items():
        kwargs[key] = int(value) if key in ints else float(value)
    cfg = replace(SimConfig(), **kwargs)
    cfg.validate()
    return cfg
