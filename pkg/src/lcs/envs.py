"""Benchmark environments: multiplexer, gridworld maze, Gaussian clusters, function targets.

Every environment follows the same small protocol used by the engines and
the harness:

``reset(rng)``
    start a trial/episode and return the current input,
``step(action)``
    apply an action and return ``(reward, done)``,
``state``
    the current input (bit string, point, or integer grid point).

Supervised environments also expose ``label`` and function tasks ``target``.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .core import ConfigurationError, InputError, as_bits

# --------------------------------------------------------------------------
# Boolean multiplexer


@dataclass(frozen=True)
class MultiplexerTask:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("multiplexer needs at least one address bit", "k")

    @property
    def length(self) -> int:
        return self.k + 2 ** self.k


def mux_eval(task: MultiplexerTask, bits) -> bool:
    bits = as_bits(bits)
    if len(bits) != task.length:
        raise ConfigurationError(
            f"{task.length}-bit multiplexer got an input of length {len(bits)}")
    address = int(bits[:task.k], 2)
    return bits[task.k + address] == "1"


class MultiplexerEnv:
    """Single-step multiplexer; correct action pays ``reward`` (default 1000)."""

    n_actions = 2
    multistep = False

    def __init__(self, k: int, reward: float = 1000.0):
        self.task = MultiplexerTask(k)
        self.input_length = self.task.length
        self.reward = reward
        self.state = "0" * self.input_length
        self.label = 0

    def reset(self, rng) -> str:
        self.state = format(rng.getrandbits(self.input_length), f"0{self.input_length}b")
        self.label = int(mux_eval(self.task, self.state))
        return self.state

    def step(self, action: int) -> tuple[float, bool]:
        return (self.reward if action == self.label else 0.0), True


class ConstantRewardEnv:
    """Random bit inputs, constant payoff for every action (neutral fitness)."""

    multistep = False

    def __init__(self, length: int, reward: float = 0.0, n_actions: int = 2):
        if length < 1:
            raise ConfigurationError("input length must be positive", "len")
        self.input_length = length
        self.reward = reward
        self.n_actions = n_actions
        self.state = "0" * length
        self.label = 0

    def reset(self, rng) -> str:
        self.state = format(rng.getrandbits(self.input_length), f"0{self.input_length}b")
        return self.state

    def step(self, action: int) -> tuple[float, bool]:
        return self.reward, True


class DatasetEnv:
    """Labelled binary dataset; each trial draws a row uniformly at random."""

    multistep = False

    def __init__(self, rows: Sequence[str], labels: Sequence[int], reward: float = 1000.0):
        if not rows:
            raise ConfigurationError("dataset is empty")
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise ConfigurationError("dataset rows differ in length")
        self.rows = [as_bits(r) for r in rows]
        self.labels = [int(v) for v in labels]
        self.input_length = lengths.pop()
        self.n_actions = max(self.labels) + 1
        self.reward = reward
        self.state = self.rows[0]
        self.label = self.labels[0]

    @classmethod
    def from_csv(cls, path, reward: float = 1000.0) -> "DatasetEnv":
        rows, labels = [], []
        with open(path, newline="") as fh:
            for lineno, rec in enumerate(csv.reader(fh), 1):
                if not rec:
                    continue
                try:
                    *attrs, label = [v.strip() for v in rec]
                    rows.append(as_bits("".join(attrs)))
                    labels.append(int(label))
                except (ValueError, ConfigurationError) as exc:
                    raise ConfigurationError(f"{path}:{lineno}: {exc}") from exc
        return cls(rows, labels, reward)

    def reset(self, rng) -> str:
        i = rng.randrange(len(self.rows))
        self.state, self.label = self.rows[i], self.labels[i]
        return self.state

    def step(self, action: int) -> tuple[float, bool]:
        return (self.reward if action == self.label else 0.0), True


# --------------------------------------------------------------------------
# Gridworld maze

EMPTY, OBSTACLE, FOOD = ".", "T", "F"
START = "*"
_CELL_CODE = {EMPTY: "00", OBSTACLE: "10", FOOD: "11"}
# clockwise from north: N, NE, E, SE, S, SW, W, NW as (drow, dcol)
DIRECTIONS = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def parse_map(text: str) -> tuple[list[str], Optional[tuple[int, int]]]:
    rows = [line.rstrip("\r") for line in text.splitlines() if line.strip()]
    if not rows:
        raise ConfigurationError("maze map is empty")
    width = len(rows[0])
    start = None
    grid = []
    for r, line in enumerate(rows):
        if len(line) != width:
            raise ConfigurationError(f"maze row {r + 1} has width {len(line)}, expected {width}")
        bad = set(line) - {EMPTY, OBSTACLE, FOOD, START}
        if bad:
            raise ConfigurationError(f"maze row {r + 1} has unknown cells {sorted(bad)}")
        if START in line:
            if start is not None or line.count(START) > 1:
                raise ConfigurationError("maze map has more than one fixed start")
            start = (r, line.index(START))
            line = line.replace(START, EMPTY)
        grid.append(line)
    if not any(FOOD in line for line in grid):
        raise ConfigurationError("maze map needs at least one food cell")
    return grid, start


def default_map_text() -> str:
    return resources.files("lcs").joinpath("maps/maze5x7.txt").read_text()


@dataclass
class MazeWorld:
    grid: list[str]
    start: Optional[tuple[int, int]] = None
    r_food: float = 1000.0
    max_steps: int = 100
    position: Optional[tuple[int, int]] = None
    steps: int = 0
    timed_out: bool = False
    _sense_cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_text(cls, text: str, **kw) -> "MazeWorld":
        grid, start = parse_map(text)
        return cls(grid, start, **kw)

    @classmethod
    def from_file(cls, path, **kw) -> "MazeWorld":
        return cls.from_text(Path(path).read_text(), **kw)

    @classmethod
    def default(cls, **kw) -> "MazeWorld":
        return cls.from_text(default_map_text(), **kw)

    @property
    def height(self) -> int:
        return len(self.grid)

    @property
    def width(self) -> int:
        return len(self.grid[0])

    def cell(self, r: int, c: int) -> str:
        if 0 <= r < self.height and 0 <= c < self.width:
            return self.grid[r][c]
        return OBSTACLE

    def empty_cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r in range(self.height) for c in range(self.width)
                if self.grid[r][c] == EMPTY]

    def place(self, pos: tuple[int, int]) -> None:
        if self.cell(*pos) != EMPTY:
            raise InputError(f"cannot place the agent on {self.cell(*pos)!r} at {pos}")
        self.position = pos
        self.steps = 0
        self.timed_out = False

    # environment protocol -------------------------------------------------
    input_length = 16
    n_actions = 8
    multistep = True

    def reset(self, rng) -> str:
        if self.start is not None:
            self.place(self.start)
        else:
            cells = self.empty_cells()
            self.place(cells[rng.randrange(len(cells))])
        return self.state

    @property
    def state(self) -> str:
        return maze_sense(self)

    def step(self, action: int) -> tuple[float, bool]:
        return maze_step(self, action)

    def optimal_steps(self) -> dict[tuple[int, int], int]:
        """Shortest number of moves to food from every empty cell (BFS)."""
        dist: dict[tuple[int, int], int] = {}
        queue = deque()
        for r in range(self.height):
            for c in range(self.width):
                if self.grid[r][c] == FOOD:
                    dist[(r, c)] = 0
                    queue.append((r, c))
        while queue:
            r, c = queue.popleft()
            for dr, dc in DIRECTIONS:
                nxt = (r + dr, c + dc)
                if nxt not in dist and self.cell(*nxt) == EMPTY:
                    dist[nxt] = dist[(r, c)] + 1
                    queue.append(nxt)
        return {pos: d for pos, d in dist.items() if self.cell(*pos) == EMPTY}

    def optimal_average(self) -> float:
        if self.start is not None:
            return float(self.optimal_steps()[self.start])
        d = self.optimal_steps()
        cells = self.empty_cells()
        missing = [p for p in cells if p not in d]
        if missing:
            raise ConfigurationError(f"food unreachable from {missing[0]}")
        return sum(d[p] for p in cells) / len(cells)


def maze_sense(world: MazeWorld) -> str:
    if world.position is None:
        raise InputError("agent has not been placed")
    key = world.position
    cached = world._sense_cache.get(key)
    if cached is None:
        r, c = key
        cached = "".join(_CELL_CODE[world.cell(r + dr, c + dc)] for dr, dc in DIRECTIONS)
        world._sense_cache[key] = cached
    return cached


def maze_step(world: MazeWorld, action: int) -> tuple[float, bool]:
    if not (isinstance(action, int) and 0 <= action < 8):
        raise InputError(f"maze action must be in 0..7, got {action!r}")
    if world.position is None:
        raise InputError("agent has not been placed")
    r, c = world.position
    dr, dc = DIRECTIONS[action]
    target = world.cell(r + dr, c + dc)
    world.steps += 1
    if target == FOOD:
        world.position = (r + dr, c + dc)
        return world.r_food, True
    if target == EMPTY:
        world.position = (r + dr, c + dc)
    if world.steps >= world.max_steps:
        world.timed_out = True
        return 0.0, True
    return 0.0, False


# --------------------------------------------------------------------------
# Gaussian clusters


@dataclass
class ClusterGenerator:
    means: list[tuple[float, ...]]
    sds: list[tuple[float, ...]]
    weights: Optional[list[float]] = None

    def __post_init__(self):
        if not self.means:
            raise ConfigurationError("cluster generator needs at least one component")
        self.d = len(self.means[0])
        if len(self.sds) != len(self.means):
            raise ConfigurationError("one standard-deviation vector per component is required")
        for m, s in zip(self.means, self.sds):
            if len(m) != self.d or len(s) != self.d:
                raise ConfigurationError("cluster components differ in dimension")
            if any(not 0.0 <= v <= 1.0 for v in m):
                raise ConfigurationError("cluster means must lie in [0, 1]")
        if self.weights is None:
            self.weights = [1.0 / len(self.means)] * len(self.means)
        if len(self.weights) != len(self.means) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ConfigurationError("mixing weights must have one entry per component and sum to 1")

    @classmethod
    def isotropic(cls, means, sigma: float, weights=None) -> "ClusterGenerator":
        means = [tuple(float(v) for v in m) for m in means]
        return cls(means, [(sigma,) * len(m) for m in means], weights)


def cluster_sample(gen: ClusterGenerator, rng) -> tuple[float, ...]:
    return cluster_sample_labelled(gen, rng)[0]


def cluster_sample_labelled(gen: ClusterGenerator, rng) -> tuple[tuple[float, ...], int]:
    u = rng.random()
    acc = 0.0
    k = len(gen.weights) - 1
    for i, w in enumerate(gen.weights):
        acc += w
        if u < acc:
            k = i
            break
    point = tuple(min(1.0, max(0.0, rng.gauss(m, s) if s > 0 else m))
                  for m, s in zip(gen.means[k], gen.sds[k]))
    return point, k


def save_points(path, points) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for p in points:
            w.writerow([format(float(v), ".17g") for v in p])


def load_points(path) -> list[tuple[float, ...]]:
    points = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            if not rec:
                continue
            try:
                p = tuple(float(v) for v in rec)
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{lineno}: {exc}") from exc
            if any(not 0.0 <= v <= 1.0 for v in p):
                raise ConfigurationError(f"{path}:{lineno}: values must lie in [0, 1]")
            if points and len(p) != len(points[0]):
                raise ConfigurationError(f"{path}:{lineno}: inconsistent dimension")
            points.append(p)
    if not points:
        raise ConfigurationError(f"{path}: no data points")
    return points


class ClusterEnv:
    """Unlabelled points, either sampled from a generator or drawn from a dataset."""

    multistep = False
    n_actions = 1

    def __init__(self, generator: Optional[ClusterGenerator] = None, points=None):
        if (generator is None) == (points is None):
            raise ConfigurationError("give exactly one of a generator or a dataset")
        self.generator = generator
        self.points = list(points) if points is not None else None
        self.d = generator.d if generator is not None else len(self.points[0])
        self.input_length = self.d
        self.state = (0.5,) * self.d

    def reset(self, rng):
        if self.generator is not None:
            self.state = cluster_sample(self.generator, rng)
        else:
            self.state = self.points[rng.randrange(len(self.points))]
        return self.state

    def step(self, action) -> tuple[float, bool]:
        return 0.0, True


# --------------------------------------------------------------------------
# Function targets

FUNCTION_KINDS = ("sine", "rms")


@dataclass(frozen=True)
class FunctionTask:
    kind: str = "sine"
    n: int = 1000
    d: int = 1
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise ConfigurationError(f"unknown function kind {self.kind!r}", "func")
        if self.n < 2:
            raise ConfigurationError("function grid needs n >= 2", "n")
        if self.d < 1 or (self.kind == "sine" and self.d != 1):
            raise ConfigurationError("sine is one-dimensional; rms needs d >= 1", "d")


def func_eval(task: FunctionTask, x) -> float:
    if isinstance(x, (int, float)):
        x = (x,)
    if len(x) != task.d:
        raise InputError(f"expected a {task.d}-dimensional point, got {x!r}")
    for v in x:
        if int(v) != v or not 0 <= v <= task.n - 1:
            raise InputError(f"point {x!r} lies outside the grid [0, {task.n - 1}]^{task.d}")
    if task.kind == "sine":
        y = math.sin(2.0 * math.pi * x[0] / task.n)
    else:
        top = task.n - 1
        y = math.sqrt(sum((v / top) ** 2 for v in x) / task.d)
    return task.scale * y


class FunctionEnv:
    multistep = False
    n_actions = 1

    def __init__(self, task: FunctionTask):
        self.task = task
        self.input_length = task.d
        self.state = (0,) * task.d
        self.target = func_eval(task, self.state)

    def reset(self, rng):
        n = self.task.n
        self.state = tuple(rng.randrange(n) for _ in range(self.task.d))
        self.target = func_eval(self.task, self.state)
        return self.state

    def step(self, action) -> tuple[float, bool]:
        return self.target, True
