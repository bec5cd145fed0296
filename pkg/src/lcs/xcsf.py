"""XCSF: integer interval conditions with per-rule linear predictors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .core import ConfigurationError, Population, roulette
from .xcs import accuracy, ga_triggered
from .xcsc import interval_crossover


class IntervalConditionLU:
    """Per-dimension inclusive integer bounds ``(lower, upper)``."""

    __slots__ = ("lower", "upper", "width")

    def __init__(self, lower: Sequence[int], upper: Sequence[int]):
        if len(lower) != len(upper):
            raise ConfigurationError("lower and upper bound vectors differ in length")
        self.lower = tuple(int(v) for v in lower)
        self.upper = tuple(int(v) for v in upper)
        for l, u in zip(self.lower, self.upper):
            if l > u:
                raise ConfigurationError(f"interval lower bound {l} exceeds upper bound {u}")
        self.width = sum(u - l for l, u in zip(self.lower, self.upper))

    def __len__(self) -> int:
        return len(self.lower)

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntervalConditionLU) and self.lower == other.lower
                and self.upper == other.upper)

    def __hash__(self) -> int:
        return hash((self.lower, self.upper))

    def __repr__(self) -> str:
        return f"IntervalConditionLU({self.lower!r}, {self.upper!r})"


def xcsf_match(cond: IntervalConditionLU, x: Sequence[int]) -> bool:
    if len(x) != len(cond):
        raise ConfigurationError(f"{len(cond)}-d condition given a {len(x)}-d input")
    for l, v, u in zip(cond.lower, x, cond.upper):
        if not l <= v <= u:
            return False
    return True


@dataclass(slots=True, eq=True)
class FunctionRule:
    cond: IntervalConditionLU
    weights: list
    epsilon: float = 0.0
    F: float = 0.01
    exp: int = 0
    ms: float = 1.0
    ts: int = 0
    id: Optional[int] = None

    @property
    def action(self) -> None:
        return None


@dataclass
class XcsfParams:
    N: int = 500
    n: int = 1000
    beta: float = 0.2
    alpha: float = 0.1
    epsilon0: float = 0.01
    nu: float = 5.0
    theta_ga: float = 25.0
    chi: float = 0.8
    mu: float = 0.04
    eta: float = 0.2
    x0: float = 1.0
    # None means n // 10 and n // 20 respectively
    cover_width: Optional[int] = None
    mutation_range: Optional[int] = None
    epsilon_init: float = 0.0
    fitness_init: float = 0.01
    offspring_fitness: float = 0.1

    def __post_init__(self):
        if self.cover_width is None:
            self.cover_width = max(1, self.n // 10)
        if self.mutation_range is None:
            self.mutation_range = max(1, self.n // 20)

    def validate(self) -> None:
        if self.N < 1:
            raise ConfigurationError("N must be positive", "N")
        if self.n < 2:
            raise ConfigurationError("n must be at least 2", "n")
        if not 0.0 < self.beta < 1.0:
            raise ConfigurationError("beta must lie in (0, 1)", "beta")
        if not 0.0 < self.eta <= 1.0:
            raise ConfigurationError("eta must lie in (0, 1]", "eta")
        if not self.x0 > 0.0:
            raise ConfigurationError("x0 must be positive", "x0")
        if not self.epsilon0 > 0.0:
            raise ConfigurationError("epsilon0 must be positive", "epsilon0")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError("alpha must lie in (0, 1]", "alpha")
        for key in ("chi", "mu"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise ConfigurationError(f"{key} must lie in [0, 1]", key)
        if self.cover_width < 0 or self.mutation_range < 0:
            raise ConfigurationError("cover_width and mutation_range must be non-negative")


def xcsf_predict(rule: FunctionRule, x: Sequence[float], x0: float = 1.0) -> float:
    w = rule.weights
    out = w[0] * x0
    for wi, xi in zip(w[1:], x):
        out += wi * xi
    return out


def xcsf_update(m: list, x: Sequence[float], target: float, params: XcsfParams) -> None:
    beta, eta, x0 = params.beta, params.eta, params.x0
    aug = (x0, *x)
    norm = sum(v * v for v in aug)
    size = len(m)
    for r in m:
        o = xcsf_predict(r, x, x0)
        resid = target - o
        step = eta * resid / norm
        r.weights = [w + step * v for w, v in zip(r.weights, aug)]
        r.epsilon += beta * (abs(resid) - r.epsilon)
        r.ms += beta * (size - r.ms)
    kappas = [accuracy(r.epsilon, params.epsilon0, params.alpha, params.nu) for r in m]
    total = sum(kappas)
    mam_limit = 1.0 / beta
    for r, k in zip(m, kappas):
        rel = k / total
        n = r.exp
        if n >= mam_limit:
            r.F += beta * (rel - r.F)
        else:
            r.F = (r.F * n + rel) / (n + 1)
        r.exp = n + 1


def xcsf_system_output(m: list, x: Sequence[float], x0: float = 1.0) -> float:
    preds = [xcsf_predict(r, x, x0) for r in m]
    total = sum(r.F for r in m)
    if total > 0.0:
        return sum(r.F * h for r, h in zip(m, preds)) / total
    return sum(preds) / len(preds)


def repair_bounds(l: int, u: int, n: int) -> tuple[int, int]:
    if l > u:
        l, u = u, l
    return max(0, min(n - 1, l)), max(0, min(n - 1, u))


def xcsf_cover(pop: Population, x: Sequence[int], rng, params: XcsfParams, t: int = 0) -> FunctionRule:
    m, n = params.cover_width, params.n
    lower = [max(0, v - rng.randint(0, m)) for v in x]
    upper = [min(n - 1, v + rng.randint(0, m)) for v in x]
    rule = FunctionRule(IntervalConditionLU(lower, upper), [0.0] * (len(x) + 1),
                        params.epsilon_init, params.fitness_init, 0, 1.0, t)
    pop.add(rule)
    return rule


def mutate_lu(cond: IntervalConditionLU, params: XcsfParams, rng) -> IntervalConditionLU:
    mu, r, n = params.mu, params.mutation_range, params.n
    lower, upper = [], []
    for l, u in zip(cond.lower, cond.upper):
        if rng.random() < mu:
            l += rng.randint(-r, r)
        if rng.random() < mu:
            u += rng.randint(-r, r)
        l, u = repair_bounds(l, u, n)
        lower.append(l)
        upper.append(u)
    return IntervalConditionLU(lower, upper)


def _lu_pairs(cond: IntervalConditionLU) -> list:
    return list(zip(cond.lower, cond.upper))


def _lu_make(pairs) -> IntervalConditionLU:
    return IntervalConditionLU([l for l, _ in pairs], [u for _, u in pairs])


def xcsf_delete(pop: Population, rng):
    return pop.remove_at(roulette([r.ms for r in pop.rules], rng))


def xcsf_ga(m: list, t: int, pop: Population, rng, params: XcsfParams) -> bool:
    if not m or not ga_triggered(m, t, params.theta_ga):
        return False
    for r in m:
        r.ts = t
    weights = [r.F for r in m]
    if sum(weights) > 0.0:
        p1, p2 = m[roulette(weights, rng)], m[roulette(weights, rng)]
    else:
        p1, p2 = m[rng.randrange(len(m))], m[rng.randrange(len(m))]
    c1, c2 = p1.cond, p2.cond
    if rng.random() < params.chi:
        c1, c2 = interval_crossover(_lu_pairs(c1), _lu_pairs(c2), rng, _lu_make)
    eps = (p1.epsilon + p2.epsilon) / 2
    fit = params.offspring_fitness * (p1.F + p2.F) / 2
    ms = (p1.ms + p2.ms) / 2
    for cond, parent in ((c1, p1), (c2, p2)):
        pop.add(FunctionRule(mutate_lu(cond, params, rng), list(parent.weights), eps, fit, 0, ms, t))
    while pop.over_capacity:
        xcsf_delete(pop, rng)
    return True


class XCSF:
    name = "xcsf"

    def __init__(self, params: XcsfParams, d: int, rng, population: Optional[Population] = None):
        params.validate()
        self.params = params
        self.d = d
        self.input_length = d
        self.n_actions = 1
        self.rng = rng
        self.pop = population if population is not None else Population(params.N)
        self.t = 0
        self.ga_count = 0

    def match(self, x) -> list:
        if self.d == 1:
            (v,) = x
            return [r for r in self.pop.rules if r.cond.lower[0] <= v <= r.cond.upper[0]]
        if self.d == 2:
            a, b = x
            return [r for r in self.pop.rules
                    if r.cond.lower[0] <= a <= r.cond.upper[0] and r.cond.lower[1] <= b <= r.cond.upper[1]]
        out = []
        for r in self.pop.rules:
            c = r.cond
            for l, v, u in zip(c.lower, x, c.upper):
                if v < l or v > u:
                    break
            else:
                out.append(r)
        return out

    def _match_or_cover(self, x) -> list:
        m = self.match(x)
        if not m:
            xcsf_cover(self.pop, x, self.rng, self.params, self.t)
            while self.pop.over_capacity:
                xcsf_delete(self.pop, self.rng)
            m = self.match(x)
        return m

    def train(self, x, target: float) -> float:
        if len(x) != self.d:
            raise ConfigurationError(f"expected a {self.d}-d point")
        m = self._match_or_cover(x)
        out = xcsf_system_output(m, x, self.params.x0)
        xcsf_update(m, x, target, self.params)
        if xcsf_ga(m, self.t, self.pop, self.rng, self.params):
            self.ga_count += 1
        self.t += 1
        return out

    def predict(self, x) -> float:
        m = self._match_or_cover(x)
        return xcsf_system_output(m, x, self.params.x0)

    def run_trial(self, env, explore: bool) -> dict:
        x = env.reset(self.rng)
        target = env.target
        out = self.train(x, target) if explore else self.predict(x)
        return {"output": out, "target": target, "error": abs(out - target)}
