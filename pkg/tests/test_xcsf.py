import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcs.core import ConfigurationError, Population, RandomStream
from lcs.envs import FunctionEnv, FunctionTask
from lcs.xcsf import (
    XCSF,
    FunctionRule,
    IntervalConditionLU,
    XcsfParams,
    mutate_lu,
    repair_bounds,
    xcsf_cover,
    xcsf_ga,
    xcsf_match,
    xcsf_predict,
    xcsf_system_output,
    xcsf_update,
)

finite = st.floats(-100, 100, allow_nan=False)


def frule(lower, upper, weights, **kw):
    return FunctionRule(IntervalConditionLU(lower, upper), list(weights), **kw)


@pytest.mark.parametrize("l,u,x,expected", [(2, 7, 2, True), (2, 7, 8, False), (5, 5, 5, True)])
def test_match_examples(l, u, x, expected):
    assert xcsf_match(IntervalConditionLU([l], [u]), [x]) is expected


def test_match_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        xcsf_match(IntervalConditionLU([0], [3]), [1, 2])


def test_inverted_interval_rejected():
    with pytest.raises(ConfigurationError):
        IntervalConditionLU([5], [3])


def test_predict_examples():
    assert xcsf_predict(frule([0], [9], [0, 0]), [4]) == 0
    assert xcsf_predict(frule([0], [9], [1, 2]), [3], x0=1.0) == 7
    assert xcsf_predict(frule([0, 0], [9, 9], [2.5, 0, 0]), [4, 7], x0=2.0) == 5.0


def test_weight_update_example():
    # x' = (1, 1) with an initial residual of 10
    r = frule([0], [9], [0.0, 0.0])
    xcsf_update([r], [1], 10.0, XcsfParams(eta=0.2, x0=1.0))
    assert r.weights == pytest.approx([1.0, 1.0])


def test_zero_residual_leaves_weights():
    r = frule([0], [9], [1.0, 2.0], epsilon=0.5)
    xcsf_update([r], [3], 7.0, XcsfParams())
    assert r.weights == [1.0, 2.0]
    assert r.epsilon == pytest.approx(0.4)


def test_contraction_to_fixed_target():
    r = frule([0], [999], [0.0, 0.0])
    p = XcsfParams(eta=0.2)
    for step in range(1, 10_001):
        xcsf_update([r], [600], 0.8, p)
        if abs(xcsf_predict(r, [600]) - 0.8) < 1e-6:
            break
    assert step <= 10_000 and abs(xcsf_predict(r, [600]) - 0.8) < 1e-6


@given(st.integers(1, 4).flatmap(lambda d: st.tuples(
    st.lists(st.integers(0, 999), min_size=d, max_size=d),
    st.lists(finite, min_size=d + 1, max_size=d + 1))),
    finite, st.floats(0.01, 1.0), st.floats(0.1, 10))
def test_residual_contracts_by_one_minus_eta(xw, target, eta, x0):
    x, w = xw
    r = frule([0] * len(x), [999] * len(x), w)
    before = target - xcsf_predict(r, x, x0)
    xcsf_update([r], x, target, XcsfParams(eta=eta, x0=x0))
    after = target - xcsf_predict(r, x, x0)
    assert after == pytest.approx((1 - eta) * before, abs=1e-9 * max(1.0, abs(before)) * 1e3)


@given(st.lists(finite, min_size=1, max_size=30), finite)
def test_error_non_negative_and_tracks_residual(targets, w0):
    r = frule([0], [9], [w0, 0.0], epsilon=0.0)
    for t in targets:
        xcsf_update([r], [0], t, XcsfParams())
        assert r.epsilon >= 0.0


def test_error_converges_to_mean_absolute_residual():
    # eta = 1 on a fixed point makes the residual exactly zero after one step
    r = frule([0], [9], [0.0, 0.0], epsilon=1.0)
    p = XcsfParams(eta=1.0)
    for _ in range(300):
        xcsf_update([r], [4], 0.5, p)
    assert r.epsilon < 1e-9


def test_system_output_examples():
    a = frule([0], [9], [1.0, 0.0], F=0.5)
    b = frule([0], [9], [3.0, 0.0], F=0.5)
    assert xcsf_system_output([a, b], [2]) == 2.0
    assert xcsf_system_output([a], [2]) == 1.0
    c = frule([0], [9], [100.0, 0.0], F=0.2)
    d = frule([0], [9], [400.0, 0.0], F=0.6)
    assert xcsf_system_output([c, d], [2]) == pytest.approx(325.0)
    zero = [frule([0], [9], [v, 0.0], F=0.0) for v in (1.0, 5.0)]
    assert xcsf_system_output(zero, [2]) == 3.0


@given(st.lists(st.tuples(finite, st.floats(0.001, 1)), min_size=1, max_size=8), st.integers(0, 9))
def test_system_output_within_rule_predictions(specs, x):
    m = [frule([0], [9], [w, 0.1], F=f) for w, f in specs]
    preds = [xcsf_predict(r, [x]) for r in m]
    out = xcsf_system_output(m, [x])
    assert min(preds) - 1e-9 <= out <= max(preds) + 1e-9


def test_repair_examples():
    assert repair_bounds(7, 3, 100) == (3, 7)
    assert repair_bounds(90, 120, 100) == (90, 99)
    assert repair_bounds(-4, 2, 100) == (0, 2)


def test_cover_contains_input():
    rng = RandomStream(1)
    p = XcsfParams(n=100)
    pop = Population(1000)
    for _ in range(500):
        x = (rng.randrange(100), rng.randrange(100))
        r = xcsf_cover(pop, x, rng, p)
        assert xcsf_match(r.cond, x)
        assert all(0 <= l <= u <= 99 for l, u in zip(r.cond.lower, r.cond.upper))
        assert r.weights == [0.0, 0.0, 0.0]


def test_mutation_keeps_bounds_ordered_and_in_domain():
    rng = RandomStream(2)
    p = XcsfParams(n=50, mu=1.0, mutation_range=30)
    cond = IntervalConditionLU([10], [20])
    for _ in range(500):
        cond = mutate_lu(cond, p, rng)
        assert 0 <= cond.lower[0] <= cond.upper[0] <= 49


def test_defaults_derive_from_grid_size():
    p = XcsfParams(n=1000)
    assert (p.cover_width, p.mutation_range, p.N, p.eta) == (100, 50, 500, 0.2)


def test_ga_offspring_copy_parent_weights():
    rng = RandomStream(3)
    p = XcsfParams(n=100, chi=0.0, mu=0.0)
    m = [frule([0], [50], [1.0, 2.0], F=0.5), frule([10], [60], [3.0, 4.0], F=0.5)]
    pop = Population(10)
    for r in m:
        pop.add(r)
    assert xcsf_ga(m, 100, pop, rng, p)
    for kid in pop.rules[2:]:
        assert kid.weights in ([1.0, 2.0], [3.0, 4.0]) and kid.exp == 0
        assert kid.weights is not m[0].weights and kid.weights is not m[1].weights


def test_engine_capacity_and_learning_signal():
    env = FunctionEnv(FunctionTask("sine", n=100))
    rng = RandomStream(4)
    xcsf = XCSF(XcsfParams(N=80, n=100), 1, rng)
    errors = []
    for _ in range(3000):
        xcsf.run_trial(env, True)
        errors.append(xcsf.run_trial(env, False)["error"])
        assert len(xcsf.pop) <= 80
    assert sum(errors[-300:]) / 300 < sum(errors[:300]) / 300
