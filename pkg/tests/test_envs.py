import math
import statistics
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcs.core import ConfigurationError, InputError, RandomStream
from lcs.envs import (
    ClusterEnv,
    ClusterGenerator,
    DatasetEnv,
    FunctionEnv,
    FunctionTask,
    MazeWorld,
    MultiplexerEnv,
    MultiplexerTask,
    cluster_sample,
    cluster_sample_labelled,
    func_eval,
    load_points,
    maze_sense,
    maze_step,
    mux_eval,
    parse_map,
    save_points,
)


def mux_oracle(k, bits):
    # arithmetic reading of the same convention: address = top k bits as an integer
    x = int(bits, 2)
    n_data = 2 ** k
    address = x >> n_data
    return bool((x >> (n_data - 1 - address)) & 1)


def six_mux_formula(b):
    a0, a1, d0, d1, d2, d3 = (c == "1" for c in b)
    return ((not a0 and not a1 and d0) or (not a0 and a1 and d1)
            or (a0 and not a1 and d2) or (a0 and a1 and d3))


def test_mux_examples():
    task = MultiplexerTask(2)
    assert mux_eval(task, "000110") is False
    assert mux_eval(task, "100110") is True


@pytest.mark.parametrize("k", [2, 3])
def test_mux_matches_truth_table(k):
    task = MultiplexerTask(k)
    rows = ["".join(p) for p in product("01", repeat=task.length)]
    assert len(rows) == {2: 64, 3: 2048}[k]
    for row in rows:
        assert mux_eval(task, row) == mux_oracle(k, row)


def test_six_mux_matches_boolean_formula():
    task = MultiplexerTask(2)
    for p in product("01", repeat=6):
        row = "".join(p)
        assert mux_eval(task, row) == six_mux_formula(row)


def test_mux_wrong_length():
    with pytest.raises(ConfigurationError):
        mux_eval(MultiplexerTask(2), "01010")


def test_mux_env_rewards_correct_action():
    env = MultiplexerEnv(2)
    rng = RandomStream(0)
    for _ in range(50):
        bits = env.reset(rng)
        label = int(mux_eval(env.task, bits))
        assert env.step(label) == (1000.0, True)
        assert env.step(1 - label) == (0.0, True)


OPEN_5X5 = "\n".join([".....", ".....", "..F..", ".....", "....."])


def test_sense_all_empty_neighbourhood():
    world = MazeWorld.from_text("\n".join(["F....", ".....", ".....", ".....", "....."]))
    world.place((2, 2))
    assert maze_sense(world) == "0" * 16


def test_sense_food_due_north():
    world = MazeWorld.from_text(OPEN_5X5)
    world.place((3, 2))
    assert maze_sense(world) == "11" + "0" * 14


def test_sense_corner_reads_off_grid_as_obstacle():
    world = MazeWorld.from_text(OPEN_5X5)
    world.place((0, 0))
    sense = maze_sense(world)
    codes = [sense[i:i + 2] for i in range(0, 16, 2)]
    # clockwise from north: N NE E SE S SW W NW
    assert codes == ["10", "10", "00", "00", "00", "10", "10", "10"]


def test_step_into_obstacle_stays_put():
    world = MazeWorld.from_text("\n".join(["T..", "...", "..F"]))
    world.place((1, 0))
    assert maze_step(world, 0) == (0.0, False)
    assert world.position == (1, 0)


def test_step_into_food():
    world = MazeWorld.from_text(OPEN_5X5)
    world.place((3, 2))
    assert maze_step(world, 0) == (1000.0, True)


@pytest.mark.parametrize("action", [-1, 8, 2.0])
def test_step_rejects_bad_actions(action):
    world = MazeWorld.from_text(OPEN_5X5)
    world.place((0, 0))
    with pytest.raises(InputError):
        maze_step(world, action)


def test_step_cap_ends_episode_without_reward():
    world = MazeWorld.from_text(OPEN_5X5, max_steps=3)
    world.place((0, 0))
    outcomes = [maze_step(world, 6) for _ in range(3)]
    assert outcomes[-1] == (0.0, True) and world.timed_out


def test_random_walk_terminates_with_recorded_median():
    world = MazeWorld.from_text(OPEN_5X5, max_steps=10**6)
    rng = RandomStream(7)
    lengths = []
    for _ in range(101):
        world.reset(rng)
        n = 0
        done = False
        while not done:
            n += 1
            _, done = world.step(rng.randrange(8))
        assert not world.timed_out
        lengths.append(n)
    # recorded once under seed 7
    assert statistics.median(lengths) == 15


def test_agent_never_enters_obstacles():
    world = MazeWorld.default()
    rng = RandomStream(3)
    for _ in range(200):
        world.reset(rng)
        done = False
        while not done:
            _, done = world.step(rng.randrange(8))
            if not done:
                assert world.cell(*world.position) == "."


def test_sensing_is_a_function_of_position():
    a, b = MazeWorld.default(), MazeWorld.default()
    for pos in a.empty_cells():
        a.place(pos)
        b.place(pos)
        assert maze_sense(a) == maze_sense(b)


def test_shipped_maze_properties():
    world = MazeWorld.default()
    assert world.height == 5 and world.width == 7
    dist = world.optimal_steps()
    cells = world.empty_cells()
    assert set(dist) == set(cells)
    # computed by hand from the shipped map: 66 steps over 29 cells
    assert sum(dist.values()) == 66 and len(cells) == 29
    assert world.optimal_average() == pytest.approx(66 / 29)


@pytest.mark.parametrize("text", ["...\n..", "...\n...", "..X\n..F"])
def test_parse_map_rejects_bad_maps(text):
    with pytest.raises(ConfigurationError):
        parse_map(text)


def test_fixed_start_is_used():
    world = MazeWorld.from_text("*..\n...\n..F")
    world.reset(RandomStream(0))
    assert world.position == (0, 0)
    assert world.optimal_average() == 2.0


def test_degenerate_gaussian():
    gen = ClusterGenerator.isotropic([(0.5, 0.5)], 0.0)
    assert cluster_sample(gen, RandomStream(1)) == (0.5, 0.5)


def test_samples_are_clamped():
    gen = ClusterGenerator.isotropic([(0.0, 1.0), (0.5, 0.5)], 0.5)
    rng = RandomStream(2)
    for _ in range(5000):
        assert all(0.0 <= v <= 1.0 for v in cluster_sample(gen, rng))


def test_component_frequencies_follow_weights():
    weights = [0.2, 0.3, 0.5]
    gen = ClusterGenerator.isotropic([(0.2, 0.2), (0.5, 0.8), (0.8, 0.3)], 0.05, weights)
    rng = RandomStream(3)
    counts = [0, 0, 0]
    n = 100_000
    for _ in range(n):
        counts[cluster_sample_labelled(gen, rng)[1]] += 1
    for c, w in zip(counts, weights):
        assert c / n == pytest.approx(w, abs=0.01)


def test_generator_validation():
    with pytest.raises(ConfigurationError):
        ClusterGenerator.isotropic([(0.2,), (0.4,)], 0.1, [0.5, 0.6])
    with pytest.raises(ConfigurationError):
        ClusterGenerator.isotropic([(1.2,)], 0.1)


def test_point_file_roundtrip(tmp_path):
    pts = [(0.1, 0.2), (1 / 3, 0.999999999)]
    path = tmp_path / "pts.csv"
    save_points(path, pts)
    assert load_points(path) == pts
    assert path.read_text().splitlines()[0].count(",") == 1


def test_point_file_rejects_out_of_range(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.1,1.5\n")
    with pytest.raises(ConfigurationError):
        load_points(path)


def test_cluster_env_from_points():
    env = ClusterEnv(points=[(0.1, 0.1), (0.9, 0.9)])
    assert env.reset(RandomStream(0)) in [(0.1, 0.1), (0.9, 0.9)]


def test_func_eval_examples():
    assert func_eval(FunctionTask("sine", n=4), 1) == pytest.approx(1.0)
    assert func_eval(FunctionTask("sine", n=1000), 0) == 0.0
    assert func_eval(FunctionTask("rms", n=11, d=2), (6, 8)) == pytest.approx(math.sqrt(0.5), abs=1e-5)


@pytest.mark.parametrize("x", [-1, 1000, 3.5])
def test_func_eval_rejects_out_of_domain(x):
    with pytest.raises(InputError):
        func_eval(FunctionTask("sine", n=1000), x)


def test_function_task_validation():
    with pytest.raises(ConfigurationError):
        FunctionTask("cosine")
    with pytest.raises(ConfigurationError):
        FunctionTask("sine", n=100, d=2)


@given(st.integers(2, 5000), st.data())
def test_sine_range_and_determinism(n, data):
    task = FunctionTask("sine", n=n)
    x = data.draw(st.integers(0, n - 1))
    y = func_eval(task, x)
    assert -1.0 <= y <= 1.0 and y == func_eval(task, x)


@given(st.integers(2, 200), st.integers(1, 4), st.data())
def test_rms_range(n, d, data):
    x = tuple(data.draw(st.integers(0, n - 1)) for _ in range(d))
    assert 0.0 <= func_eval(FunctionTask("rms", n=n, d=d), x) <= 1.0 + 1e-12


def test_function_env_sets_target():
    env = FunctionEnv(FunctionTask("rms", n=10, d=2))
    x = env.reset(RandomStream(0))
    assert env.target == func_eval(env.task, x)
    assert env.step(None) == (env.target, True)


def test_dataset_env_from_csv(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("0,1,1,1\n1,0,0,0\n")
    env = DatasetEnv.from_csv(path)
    assert env.input_length == 3 and env.n_actions == 2
    bits = env.reset(RandomStream(0))
    assert (bits, env.label) in [("011", 1), ("100", 0)]
