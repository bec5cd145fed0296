"""XCSC: clustering with centre-spread interval rules and an adaptive error threshold."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import ConfigurationError, Population, roulette
from .xcs import accuracy, ga_triggered

MIN_SPREAD = 1e-6


class IntervalConditionCS:
    """Per-dimension (centre, spread) pairs; bounds are truncated to [0, 1]."""

    __slots__ = ("centres", "spreads", "lower", "upper", "width")

    def __init__(self, centres: Sequence[float], spreads: Sequence[float]):
        if len(centres) != len(spreads):
            raise ConfigurationError("centre and spread vectors differ in length")
        self.centres = tuple(float(c) for c in centres)
        self.spreads = tuple(float(s) for s in spreads)
        self.lower = tuple(max(0.0, c - s) for c, s in zip(self.centres, self.spreads))
        self.upper = tuple(min(1.0, c + s) for c, s in zip(self.centres, self.spreads))
        self.width = sum(u - l for l, u in zip(self.lower, self.upper))

    def __len__(self) -> int:
        return len(self.centres)

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntervalConditionCS) and self.centres == other.centres
                and self.spreads == other.spreads)

    def __hash__(self) -> int:
        return hash((self.centres, self.spreads))

    def __repr__(self) -> str:
        return f"IntervalConditionCS({self.centres!r}, {self.spreads!r})"

    def volume(self) -> float:
        return math.prod(u - l for l, u in zip(self.lower, self.upper))

    def nominal_volume(self) -> float:
        return math.prod(2 * s for s in self.spreads)


def xcsc_match(cond: IntervalConditionCS, x: Sequence[float]) -> bool:
    if len(x) != len(cond):
        raise ConfigurationError(f"{len(cond)}-d condition given a {len(x)}-d input")
    for lo, v, hi in zip(cond.lower, x, cond.upper):
        if not lo <= v <= hi:
            return False
    return True


@dataclass(slots=True, eq=True)
class ClusterRule:
    cond: IntervalConditionCS
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
class XcscParams:
    N: int = 400
    beta: float = 0.2
    alpha: float = 0.1
    nu: float = 5.0
    theta_ga: float = 25.0
    chi: float = 0.8
    mu: float = 0.04
    # half-width of the uniform perturbation applied to mutated alleles
    mutation_range: float = 0.1
    s0: float = 0.2
    tau: float = 1.2
    epsilon_init: float = 0.0
    fitness_init: float = 0.01
    offspring_fitness: float = 0.1
    # escape hatch: a fixed threshold instead of the adaptive one
    fixed_epsilon0: Optional[float] = None
    theta_exp: int = 20

    def validate(self) -> None:
        if self.N < 1:
            raise ConfigurationError("N must be positive", "N")
        if not 0.0 < self.beta < 1.0:
            raise ConfigurationError("beta must lie in (0, 1)", "beta")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError("alpha must lie in (0, 1]", "alpha")
        if self.nu < 1.0:
            raise ConfigurationError("nu must be at least 1", "nu")
        if not self.tau > 0.0:
            raise ConfigurationError("tau must be positive", "tau")
        if not 0.0 < self.s0 <= 1.0:
            raise ConfigurationError("s0 must lie in (0, 1]", "s0")
        for key in ("chi", "mu"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise ConfigurationError(f"{key} must lie in [0, 1]", key)
        if self.mutation_range < 0.0:
            raise ConfigurationError("mutation_range must be non-negative", "mutation_range")


def distance(x: Sequence[float], centres: Sequence[float]) -> float:
    return math.sqrt(sum((a - c) ** 2 for a, c in zip(x, centres)))


def adaptive_epsilon0(m: list, tau: float) -> float:
    return tau * sum(r.epsilon for r in m) / len(m)


def xcsc_update(m: list, x: Sequence[float], params: XcscParams) -> float:
    """Update errors, then fitness against the adaptive threshold; returns the threshold."""
    beta = params.beta
    size = len(m)
    for r in m:
        r.epsilon += beta * (distance(x, r.cond.centres) - r.epsilon)
        r.ms += beta * (size - r.ms)
    if params.fixed_epsilon0 is not None:
        eps0 = params.fixed_epsilon0
    else:
        eps0 = adaptive_epsilon0(m, params.tau)
    kappas = [_kappa(r.epsilon, eps0, params) for r in m]
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
    return eps0


def _kappa(epsilon: float, eps0: float, params: XcscParams) -> float:
    if eps0 <= 0.0:
        return 1.0 if epsilon <= 0.0 else params.alpha
    return accuracy(epsilon, eps0, params.alpha, params.nu)


def xcsc_cover(pop: Population, x: Sequence[float], rng, params: XcscParams, t: int = 0) -> ClusterRule:
    spreads = [params.s0 * (1.0 - rng.random()) for _ in x]  # uniform on (0, s0]
    rule = ClusterRule(IntervalConditionCS(x, spreads), params.epsilon_init, params.fitness_init,
                       0, 1.0, t)
    pop.add(rule)
    return rule


def repair_spread(s: float, s0: float) -> float:
    return min(s0, max(MIN_SPREAD, s))


def mutate_cs(cond: IntervalConditionCS, params: XcscParams, rng) -> IntervalConditionCS:
    mu, m = params.mu, params.mutation_range
    centres, spreads = list(cond.centres), list(cond.spreads)
    for i in range(len(centres)):
        if rng.random() < mu:
            centres[i] = min(1.0, max(0.0, centres[i] + rng.uniform(-m, m)))
        if rng.random() < mu:
            spreads[i] = repair_spread(spreads[i] + rng.uniform(-m, m), params.s0)
    return IntervalConditionCS(centres, spreads)


def interval_crossover(a, b, rng, make, point: Optional[int] = None):
    """One-point crossover on whole per-dimension pairs.

    ``a`` and ``b`` are sequences of pairs; ``make`` builds a condition from
    a list of pairs.
    """
    d = len(a)
    if d < 2:
        return make(list(a)), make(list(b))
    k = rng.randint(1, d - 1) if point is None else point
    return make(list(a[:k]) + list(b[k:])), make(list(b[:k]) + list(a[k:]))


def _cs_pairs(cond: IntervalConditionCS) -> list:
    return list(zip(cond.centres, cond.spreads))


def _cs_make(pairs) -> IntervalConditionCS:
    return IntervalConditionCS([c for c, _ in pairs], [s for _, s in pairs])


def xcsc_delete(pop: Population, rng):
    return pop.remove_at(roulette([r.ms for r in pop.rules], rng))


def xcsc_ga(m: list, t: int, pop: Population, rng, params: XcscParams) -> bool:
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
        c1, c2 = interval_crossover(_cs_pairs(c1), _cs_pairs(c2), rng, _cs_make)
    eps = (p1.epsilon + p2.epsilon) / 2
    fit = params.offspring_fitness * (p1.F + p2.F) / 2
    ms = (p1.ms + p2.ms) / 2
    for cond in (c1, c2):
        pop.add(ClusterRule(mutate_cs(cond, params, rng), eps, fit, 0, ms, t))
    while pop.over_capacity:
        xcsc_delete(pop, rng)
    return True


@dataclass
class Cluster:
    centre: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    support: int

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(u - l for l, u in zip(self.lower, self.upper))


def _overlap(lo1, hi1, lo2, hi2) -> bool:
    return all(a <= d and c <= b for a, b, c, d in zip(lo1, hi1, lo2, hi2))


def extract_clusters(pop, theta_exp: int = 20) -> list[Cluster]:
    """Group experienced, low-error rules whose boxes overlap into clusters.

    Rules are visited in order of decreasing experience and greedily joined to
    the first group whose bounding box they overlap; groups that come to
    overlap after growing are then merged.  Support is the summed experience.
    """
    rules = [r for r in pop if r.exp >= theta_exp]
    if not rules:
        return []
    median = statistics.median(r.epsilon for r in rules)
    rules = [r for r in rules if r.epsilon <= median]
    rules.sort(key=lambda r: (-r.exp, r.id if r.id is not None else 0))
    groups: list[dict] = []
    for r in rules:
        lo, hi = r.cond.lower, r.cond.upper
        for g in groups:
            if _overlap(lo, hi, g["lo"], g["hi"]):
                g["rules"].append(r)
                g["lo"] = tuple(map(min, g["lo"], lo))
                g["hi"] = tuple(map(max, g["hi"], hi))
                break
        else:
            groups.append({"rules": [r], "lo": lo, "hi": hi})
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                a, b = groups[i], groups[j]
                if _overlap(a["lo"], a["hi"], b["lo"], b["hi"]):
                    a["rules"].extend(b["rules"])
                    a["lo"] = tuple(map(min, a["lo"], b["lo"]))
                    a["hi"] = tuple(map(max, a["hi"], b["hi"]))
                    del groups[j]
                    merged = True
                    break
            if merged:
                break
    clusters = []
    for g in groups:
        total = sum(r.exp for r in g["rules"])
        d = len(g["lo"])
        centre = tuple(sum(r.exp * r.cond.centres[i] for r in g["rules"]) / total for i in range(d))
        clusters.append(Cluster(centre, g["lo"], g["hi"], total))
    return clusters


class XCSC:
    name = "xcsc"

    def __init__(self, params: XcscParams, d: int, rng, population: Optional[Population] = None):
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
        out = []
        for r in self.pop.rules:
            c = r.cond
            for lo, v, hi in zip(c.lower, x, c.upper):
                if v < lo or v > hi:
                    break
            else:
                out.append(r)
        return out

    def train(self, x) -> float:
        if len(x) != self.d:
            raise ConfigurationError(f"expected a {self.d}-d point")
        m = self.match(x)
        if not m:
            m = [xcsc_cover(self.pop, x, self.rng, self.params, self.t)]
            while self.pop.over_capacity:
                xcsc_delete(self.pop, self.rng)
            m = self.match(x)
        xcsc_update(m, x, self.params)
        if xcsc_ga(m, self.t, self.pop, self.rng, self.params):
            self.ga_count += 1
        self.t += 1
        return sum(r.epsilon for r in m) / len(m)

    def run_trial(self, env, explore: bool) -> dict:
        x = env.reset(self.rng)
        if explore:
            return {"error": self.train(x)}
        m = self.match(x)
        # an unmatched point counts as the largest possible miss
        err = sum(distance(x, r.cond.centres) for r in m) / len(m) if m else math.sqrt(self.d)
        return {"error": err}

    def clusters(self) -> list[Cluster]:
        return extract_clusters(self.pop, self.params.theta_exp)
