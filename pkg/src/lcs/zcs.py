"""ZCS: strength-based rules with an implicit bucket brigade and a panmictic GA."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import (
    ConfigurationError,
    GaOperatorParams,
    Population,
    TernaryCondition,
    as_bits,
    bits_to_int,
    cover_condition,
    mutate_ternary,
    one_point_crossover,
    roulette,
)
from .xcs import match_set

DELETION_FLOOR = 0.001


@dataclass(slots=True, eq=True)
class StrengthRule:
    cond: TernaryCondition
    action: int
    S: float = 20.0
    id: Optional[int] = None


@dataclass
class ZcsParams:
    N: int = 400
    beta: float = 0.2
    gamma: float = 0.71
    tax: float = 0.1
    ga_rate: float = 0.25
    cover_fraction: float = 0.5
    S0: float = 20.0
    ga: GaOperatorParams = field(default_factory=lambda: GaOperatorParams(chi=0.5, mu=0.002))

    def validate(self) -> None:
        if self.N < 1:
            raise ConfigurationError("N must be positive", "N")
        if not 0.0 < self.beta < 1.0:
            raise ConfigurationError("beta must lie in (0, 1)", "beta")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigurationError("gamma must lie in (0, 1)", "gamma")
        if not 0.0 <= self.tax < 1.0:
            raise ConfigurationError("tax must lie in [0, 1)", "tax")
        if not 0.0 <= self.ga_rate <= 1.0:
            raise ConfigurationError("ga_rate must lie in [0, 1]", "ga_rate")
        if self.cover_fraction < 0.0:
            raise ConfigurationError("cover_fraction must be non-negative", "cover_fraction")
        if self.S0 < 0.0:
            raise ConfigurationError("S0 must be non-negative", "S0")
        self.ga.validate()


def mean_strength(pop: Population, default: float) -> float:
    if not pop.rules:
        return default
    return sum(r.S for r in pop.rules) / len(pop.rules)


def zcs_delete(pop: Population, rng):
    return pop.remove_at(roulette([1.0 / (r.S + DELETION_FLOOR) for r in pop.rules], rng))


def zcs_form_match_set(pop: Population, bits, rng, params: ZcsParams, n_actions: int = 2) -> list:
    bits = as_bits(bits)
    x = bits_to_int(bits)
    m = match_set(pop, x)
    mean = mean_strength(pop, params.S0)
    if m and sum(r.S for r in m) >= params.cover_fraction * mean:
        return m
    # deletion may take the fresh rule, so repeat until something matches
    while True:
        pop.add(StrengthRule(cover_condition(bits, params.ga.p_wild, rng), rng.randrange(n_actions), mean))
        while pop.over_capacity:
            zcs_delete(pop, rng)
        m = match_set(pop, x)
        if m:
            return m
        mean = mean_strength(pop, params.S0)


def strength_by_action(m: list) -> dict[int, float]:
    totals: dict[int, float] = {}
    for r in m:
        totals[r.action] = totals.get(r.action, 0.0) + r.S
    return dict(sorted(totals.items()))


def zcs_select_action(m: list, rng, greedy: bool = False) -> tuple[int, list]:
    if not m:
        raise ConfigurationError("cannot select an action from an empty match set")
    totals = strength_by_action(m)
    actions = list(totals)
    weights = list(totals.values())
    if greedy:
        action = max(actions, key=lambda a: (totals[a], -a))
    elif sum(weights) > 0.0:
        action = actions[roulette(weights, rng)]
    else:
        action = actions[rng.randrange(len(actions))]
    return action, [r for r in m if r.action == action]


def zcs_credit(prev_set: Optional[list], action_set: list, reward: float, params: ZcsParams,
               m: Optional[list] = None) -> float:
    """Apply one step of the implicit bucket brigade; returns the bucket paid."""
    beta = params.beta
    bucket = 0.0
    for r in action_set:
        pay = beta * r.S
        r.S -= pay
        bucket += pay
    if reward:
        share = beta * reward / len(action_set)
        for r in action_set:
            r.S += share
    if prev_set:
        share = params.gamma * bucket / len(prev_set)
        for r in prev_set:
            r.S += share
    if m is not None and params.tax > 0.0:
        in_set = set(id(r) for r in action_set)
        keep = 1.0 - params.tax
        for r in m:
            if id(r) not in in_set:
                r.S *= keep
    return bucket


def zcs_ga(pop: Population, rng, params: ZcsParams, force: bool = False) -> bool:
    """Panmictic GA, fired with probability ``ga_rate`` (or always with ``force``)."""
    if not force and rng.random() >= params.ga_rate:
        return False
    if not pop.rules:
        return False
    weights = [r.S for r in pop.rules]
    if sum(weights) > 0.0:
        p1 = pop.rules[roulette(weights, rng)]
        p2 = pop.rules[roulette(weights, rng)]
    else:
        p1 = pop.rules[rng.randrange(len(pop))]
        p2 = pop.rules[rng.randrange(len(pop))]
    zcs_reproduce(p1, p2, pop, rng, params)
    return True


def zcs_reproduce(p1: StrengthRule, p2: StrengthRule, pop: Population, rng,
                  params: ZcsParams) -> tuple[StrengthRule, StrengthRule]:
    ga = params.ga
    c1, c2 = p1.cond, p2.cond
    if rng.random() < ga.chi:
        c1, c2 = one_point_crossover(c1, c2, rng)
    # parents donate half their strength, split evenly between the two offspring
    if p1 is p2:
        donated = p1.S / 2
        p1.S -= donated
    else:
        donated = (p1.S + p2.S) / 2
        p1.S /= 2
        p2.S /= 2
    child_s = donated / 2
    children = tuple(pop.add(StrengthRule(mutate_ternary(cond, ga.mu, rng), parent.action, child_s))
                     for cond, parent in ((c1, p1), (c2, p2)))
    while pop.over_capacity:
        zcs_delete(pop, rng)
    return children


class ZCS:
    name = "zcs"

    def __init__(self, params: ZcsParams, n_actions: int, input_length: int, rng,
                 population: Optional[Population] = None, exploit_greedy: bool = False):
        params.validate()
        self.params = params
        self.n_actions = n_actions
        self.input_length = input_length
        self.rng = rng
        self.pop = population if population is not None else Population(params.N)
        self.exploit_greedy = exploit_greedy
        self.t = 0

    def run_episode(self, env, explore: bool) -> dict:
        """Explore episodes learn; exploit episodes only act (roulette unless ``exploit_greedy``)."""
        params = self.params
        bits = env.reset(self.rng)
        prev_set = None
        steps = 0
        while True:
            m = zcs_form_match_set(self.pop, bits, self.rng, params, self.n_actions)
            action, a_set = zcs_select_action(m, self.rng, greedy=not explore and self.exploit_greedy)
            reward, done = env.step(action)
            steps += 1
            if explore:
                zcs_credit(prev_set, a_set, reward, params, m)
                zcs_ga(self.pop, self.rng, params)
                self.t += 1
            if done:
                break
            prev_set = a_set
            bits = env.state
        return {"steps": steps, "reward": reward, "timed_out": getattr(env, "timed_out", False)}

    def run_trial(self, env, explore: bool) -> dict:
        out = self.run_episode(env, explore)
        out["correct"] = out["reward"] > 0
        return out
