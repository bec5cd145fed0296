"""UCS: supervised accuracy (correct / experience), GA in the correct set."""

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
from .xcs import ga_triggered, match_set

ABSTAIN = None


@dataclass(slots=True, eq=True)
class SupervisedRule:
    cond: TernaryCondition
    action: int
    correct: int = 0
    exp: int = 0
    kappa: float = 1.0
    F: float = 1.0
    cs: float = 1.0
    ts: int = 0
    id: Optional[int] = None


@dataclass
class UcsParams:
    N: int = 400
    nu: float = 1.0
    beta: float = 0.2
    theta_ga: float = 25.0
    offspring_fitness: float = 0.1
    ga: GaOperatorParams = field(default_factory=GaOperatorParams)
    # relative-accuracy fitness sharing within [C]
    fitness_sharing: bool = False
    fitness_deletion: bool = False
    theta_del: int = 20
    delta_del: float = 0.1

    def validate(self) -> None:
        if self.N < 1:
            raise ConfigurationError("N must be positive", "N")
        if self.nu < 1.0:
            raise ConfigurationError("nu must be at least 1", "nu")
        if not 0.0 < self.beta < 1.0:
            raise ConfigurationError("beta must lie in (0, 1)", "beta")
        if self.theta_ga < 0:
            raise ConfigurationError("theta_ga must be non-negative", "theta_ga")
        self.ga.validate()


def ucs_update(m: list, true_label: int, params: UcsParams) -> tuple[list, list]:
    correct_set, incorrect_set = [], []
    nu = params.nu
    for r in m:
        r.exp += 1
        if r.action == true_label:
            r.correct += 1
            correct_set.append(r)
        else:
            incorrect_set.append(r)
        r.kappa = r.correct / r.exp
        if not params.fitness_sharing:
            r.F = r.kappa ** nu
    size = len(correct_set)
    for r in correct_set:
        r.cs += params.beta * (size - r.cs)
    if params.fitness_sharing and m:
        # shared fitness tracks each rule's share of the [C] accuracy mass
        weights = [r.kappa ** nu for r in correct_set]
        total = sum(weights)
        for r, w in zip(correct_set, weights):
            r.F += params.beta * ((w / total if total > 0 else 0.0) - r.F)
        for r in incorrect_set:
            r.F += params.beta * (0.0 - r.F)
    return correct_set, incorrect_set


def ucs_classify(pop: Population, bits) -> Optional[int]:
    x = bits_to_int(as_bits(bits))
    votes: dict[int, float] = {}
    for r in pop.rules:
        if x & r.cond.care == r.cond.value:
            votes[r.action] = votes.get(r.action, 0.0) + r.F
    if not votes:
        return ABSTAIN
    best = None
    for label in sorted(votes):
        if best is None or votes[label] > votes[best]:
            best = label
    return best


def ucs_cover(pop: Population, bits, true_label: int, rng, params: UcsParams,
              t: int = 0) -> SupervisedRule:
    bits = as_bits(bits)
    rule = SupervisedRule(cover_condition(bits, params.ga.p_wild, rng), true_label,
                          correct=1, exp=1, kappa=1.0, F=1.0, cs=1.0, ts=t)
    pop.add(rule)
    return rule


def ucs_delete(pop: Population, rng, params: UcsParams):
    rules = pop.rules
    if params.fitness_deletion:
        mean_f = sum(r.F for r in rules) / len(rules)
        votes = []
        for r in rules:
            v = r.cs
            if r.exp > params.theta_del and 0.0 < r.F < params.delta_del * mean_f:
                v *= mean_f / r.F
            votes.append(v)
    else:
        votes = [r.cs for r in rules]
    return pop.remove_at(roulette(votes, rng))


def ucs_ga(correct_set: list, t: int, pop: Population, rng, params: UcsParams,
           bits: Optional[str] = None) -> bool:
    if not correct_set or not ga_triggered(correct_set, t, params.theta_ga):
        return False
    for r in correct_set:
        r.ts = t
    weights = [r.F for r in correct_set]
    if sum(weights) > 0.0:
        p1 = correct_set[roulette(weights, rng)]
        p2 = correct_set[roulette(weights, rng)]
    else:
        p1 = correct_set[rng.randrange(len(correct_set))]
        p2 = correct_set[rng.randrange(len(correct_set))]
    ga = params.ga
    c1, c2 = p1.cond, p2.cond
    if rng.random() < ga.chi:
        c1, c2 = one_point_crossover(c1, c2, rng)
    niche_bits = bits if ga.niche_mutation else None
    k_child = params.offspring_fitness * (p1.kappa + p2.kappa) / 2
    f_child = params.offspring_fitness * (p1.F + p2.F) / 2
    cs_mean = (p1.cs + p2.cs) / 2
    for cond, parent in ((c1, p1), (c2, p2)):
        cond = mutate_ternary(cond, ga.mu, rng, niche_bits)
        pop.add(SupervisedRule(cond, parent.action, 0, 0, k_child, f_child, cs_mean, t))
    while pop.over_capacity:
        ucs_delete(pop, rng, params)
    return True


class UCS:
    name = "ucs"

    def __init__(self, params: UcsParams, n_actions: int, input_length: int, rng,
                 population: Optional[Population] = None):
        params.validate()
        self.params = params
        self.n_actions = n_actions
        self.input_length = input_length
        self.rng = rng
        self.pop = population if population is not None else Population(params.N)
        self.t = 0
        self.ga_count = 0

    def train(self, bits: str, label: int) -> None:
        m = match_set(self.pop, bits_to_int(bits))
        correct_set, _ = ucs_update(m, label, self.params)
        if not correct_set:
            correct_set = [ucs_cover(self.pop, bits, label, self.rng, self.params, self.t)]
            while self.pop.over_capacity:
                ucs_delete(self.pop, self.rng, self.params)
        elif ucs_ga(correct_set, self.t, self.pop, self.rng, self.params, bits):
            self.ga_count += 1
        self.t += 1

    def classify(self, bits) -> Optional[int]:
        return ucs_classify(self.pop, bits)

    def run_trial(self, env, explore: bool) -> dict:
        bits = env.reset(self.rng)
        if explore:
            self.train(bits, env.label)
            return {"action": env.label, "correct": True}
        label = self.classify(bits)
        return {"action": label, "correct": label is not ABSTAIN and label == env.label}
