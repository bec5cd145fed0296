"""XCS: accuracy-based fitness, niche GA in the action set, Q-learning style payoff."""

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

EXPLORE, EXPLOIT = "explore", "exploit"


@dataclass(slots=True, eq=True)
class AccuracyRule:
    cond: TernaryCondition
    action: int
    p: float = 10.0
    epsilon: float = 0.0
    F: float = 0.01
    exp: int = 0
    ts: int = 0
    as_size: float = 1.0
    id: Optional[int] = None

    def matches_int(self, x: int) -> bool:
        return x & self.cond.care == self.cond.value


@dataclass
class XcsParams:
    N: int = 400
    beta: float = 0.2
    alpha: float = 0.1
    epsilon0: float = 10.0
    nu: float = 5.0
    gamma: float = 0.71
    theta_ga: float = 25.0
    p_explore: float = 0.5
    p_init: float = 10.0
    epsilon_init: float = 0.0
    fitness_init: float = 0.01
    offspring_fitness: float = 0.1
    ga: GaOperatorParams = field(default_factory=GaOperatorParams)
    # flags for variants found elsewhere in the literature, all off by default
    mam_prediction: bool = False
    per_action_covering: bool = False
    ga_in_match_set: bool = False
    fitness_deletion: bool = False
    theta_del: int = 20
    delta_del: float = 0.1

    def validate(self) -> None:
        if self.N < 1:
            raise ConfigurationError("N must be positive", "N")
        if not 0.0 < self.beta < 1.0:
            raise ConfigurationError("beta must lie in (0, 1)", "beta")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError("alpha must lie in (0, 1]", "alpha")
        if not self.epsilon0 > 0.0:
            raise ConfigurationError("epsilon0 must be positive", "epsilon0")
        if self.nu < 1.0:
            raise ConfigurationError("nu must be at least 1", "nu")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError("gamma must lie in [0, 1)", "gamma")
        if self.theta_ga < 0:
            raise ConfigurationError("theta_ga must be non-negative", "theta_ga")
        if not 0.0 <= self.p_explore <= 1.0:
            raise ConfigurationError("p_explore must lie in [0, 1]", "p_explore")
        if not 0.0 <= self.fitness_init <= 1.0:
            raise ConfigurationError("fitness_init must lie in [0, 1]", "fitness_init")
        self.ga.validate()


def accuracy(epsilon: float, epsilon0: float, alpha: float, nu: float) -> float:
    if epsilon < epsilon0 or epsilon == 0.0:
        return 1.0
    return alpha * (epsilon0 / epsilon) ** nu


def match_set(pop: Population, x: int) -> list:
    return [r for r in pop.rules if x & r.cond.care == r.cond.value]


def _new_cover_rule(bits: str, action: int, params: XcsParams, rng, t: int) -> AccuracyRule:
    return AccuracyRule(cover_condition(bits, params.ga.p_wild, rng), action,
                        params.p_init, params.epsilon_init, params.fitness_init, 0, t, 1.0)


def xcs_form_match_set(pop: Population, bits, rng, params: XcsParams, n_actions: int = 2,
                       t: int = 0) -> list:
    bits = as_bits(bits)
    x = bits_to_int(bits)
    m = match_set(pop, x)
    # deletion may remove a fresh covering rule, so cover until the set is complete
    while True:
        if params.per_action_covering:
            missing = sorted(set(range(n_actions)) - {r.action for r in m})
        elif not m:
            missing = [rng.randrange(n_actions)]
        else:
            missing = []
        if not missing:
            return m
        for action in missing:
            pop.add(_new_cover_rule(bits, action, params, rng, t))
        while pop.over_capacity:
            xcs_delete(pop, rng, params)
        m = match_set(pop, x)


def xcs_prediction_array(m: list) -> dict[int, float]:
    num: dict[int, float] = {}
    den: dict[int, float] = {}
    raw: dict[int, list] = {}
    for r in m:
        a = r.action
        num[a] = num.get(a, 0.0) + r.p * r.F
        den[a] = den.get(a, 0.0) + r.F
        raw.setdefault(a, []).append(r.p)
    pa = {}
    for a in sorted(raw):
        if den[a] > 0.0:
            pa[a] = num[a] / den[a]
        else:
            pa[a] = sum(raw[a]) / len(raw[a])
    return pa


def xcs_select_action(pa: dict[int, float], mode: str, rng) -> int:
    if not pa:
        raise ConfigurationError("prediction array is empty")
    actions = sorted(pa)
    if mode == EXPLORE:
        return actions[rng.randrange(len(actions))]
    if mode != EXPLOIT:
        raise ConfigurationError(f"unknown selection mode {mode!r}")
    best = actions[0]
    for a in actions[1:]:
        if pa[a] > pa[best]:
            best = a
    return best


def xcs_update(action_set: list, payoff: float, params: XcsParams) -> None:
    """Reinforce an action set toward ``payoff``.

    Order per rule: error (with the old prediction), prediction, then
    accuracy, relative accuracy and fitness over the whole set.
    """
    beta = params.beta
    set_size = len(action_set)
    mam_limit = 1.0 / beta
    for r in action_set:
        if params.mam_prediction and r.exp + 1 < mam_limit:
            rate = 1.0 / (r.exp + 1)
        else:
            rate = beta
        r.epsilon += rate * (abs(payoff - r.p) - r.epsilon)
        r.p += rate * (payoff - r.p)
        r.as_size += rate * (set_size - r.as_size)
    eps0, alpha, nu = params.epsilon0, params.alpha, params.nu
    kappas = [accuracy(r.epsilon, eps0, alpha, nu) for r in action_set]
    total = sum(kappas)
    for r, k in zip(action_set, kappas):
        rel = k / total
        n = r.exp
        if n >= mam_limit:
            r.F += beta * (rel - r.F)
        else:
            r.F = (r.F * n + rel) / (n + 1)
        r.exp = n + 1


def ga_triggered(niche: list, t: int, theta_ga: float) -> bool:
    mean_ts = sum(r.ts for r in niche) / len(niche)
    return t - mean_ts > theta_ga


def xcs_ga(niche: list, t: int, pop: Population, rng, params: XcsParams,
           n_actions: int = 2, bits: Optional[str] = None) -> bool:
    """Run the niche GA if triggered; returns whether it fired."""
    if not niche or not ga_triggered(niche, t, params.theta_ga):
        return False
    for r in niche:
        r.ts = t
    weights = [r.F for r in niche]
    if sum(weights) > 0.0:
        p1 = niche[roulette(weights, rng)]
        p2 = niche[roulette(weights, rng)]
    else:
        p1 = niche[rng.randrange(len(niche))]
        p2 = niche[rng.randrange(len(niche))]
    ga = params.ga
    c1, c2 = p1.cond, p2.cond
    if rng.random() < ga.chi:
        c1, c2 = one_point_crossover(c1, c2, rng)
    niche_bits = bits if ga.niche_mutation else None
    p_mean = (p1.p + p2.p) / 2
    e_mean = (p1.epsilon + p2.epsilon) / 2
    f_child = params.offspring_fitness * (p1.F + p2.F) / 2
    as_mean = (p1.as_size + p2.as_size) / 2
    for cond, parent in ((c1, p1), (c2, p2)):
        cond = mutate_ternary(cond, ga.mu, rng, niche_bits)
        action = parent.action
        if n_actions > 1 and rng.random() < ga.mu:
            action = (action + 1 + rng.randrange(n_actions - 1)) % n_actions
        pop.add(AccuracyRule(cond, action, p_mean, e_mean, f_child, 0, t, as_mean))
    while pop.over_capacity:
        xcs_delete(pop, rng, params)
    return True


def deletion_votes(pop: Population, params: XcsParams) -> list[float]:
    rules = pop.rules
    if not params.fitness_deletion:
        return [r.as_size for r in rules]
    mean_f = sum(r.F for r in rules) / len(rules)
    votes = []
    for r in rules:
        v = r.as_size
        if r.exp > params.theta_del and r.F < params.delta_del * mean_f and r.F > 0.0:
            v *= mean_f / r.F
        votes.append(v)
    return votes


def xcs_delete(pop: Population, rng, params: Optional[XcsParams] = None):
    votes = deletion_votes(pop, params) if params is not None else [r.as_size for r in pop.rules]
    return pop.remove_at(roulette(votes, rng))


class XCS:
    """XCS engine bound to one population and one random stream."""

    name = "xcs"

    def __init__(self, params: XcsParams, n_actions: int, input_length: int, rng,
                 population: Optional[Population] = None):
        params.validate()
        self.params = params
        self.n_actions = n_actions
        self.input_length = input_length
        self.rng = rng
        self.pop = population if population is not None else Population(params.N)
        self.t = 0
        self.ga_count = 0

    def match(self, bits: str) -> list:
        return xcs_form_match_set(self.pop, bits, self.rng, self.params, self.n_actions, self.t)

    def _ga(self, action_set: list, m: list, bits: str) -> None:
        niche = m if self.params.ga_in_match_set else action_set
        if xcs_ga(niche, self.t, self.pop, self.rng, self.params, self.n_actions, bits):
            self.ga_count += 1

    def run_trial(self, env, explore: bool) -> dict:
        """One single-step trial; learning happens on explore trials only."""
        bits = env.reset(self.rng)
        m = self.match(bits)
        pa = xcs_prediction_array(m)
        action = xcs_select_action(pa, EXPLORE if explore else EXPLOIT, self.rng)
        reward, _ = env.step(action)
        if explore:
            a_set = [r for r in m if r.action == action]
            xcs_update(a_set, reward, self.params)
            self._ga(a_set, m, bits)
            self.t += 1
        return {"action": action, "reward": reward, "prediction": pa[action],
                "correct": action == getattr(env, "label", None)}

    def run_episode(self, env, explore: bool) -> dict:
        """One multistep episode with the discounted max-prediction payoff."""
        bits = env.reset(self.rng)
        prev_set = prev_bits = prev_m = None
        prev_reward = 0.0
        steps = 0
        errors = []
        while True:
            m = self.match(bits)
            pa = xcs_prediction_array(m)
            action = xcs_select_action(pa, EXPLORE if explore else EXPLOIT, self.rng)
            a_set = [r for r in m if r.action == action]
            reward, done = env.step(action)
            steps += 1
            if explore:
                if prev_set:
                    target = prev_reward + self.params.gamma * max(pa.values())
                    xcs_update(prev_set, target, self.params)
                    self._ga(prev_set, prev_m, prev_bits)
                if done:
                    xcs_update(a_set, reward, self.params)
                    self._ga(a_set, m, bits)
                self.t += 1
            errors.append(abs(pa[action] - reward) if done else 0.0)
            if done:
                break
            prev_set, prev_m, prev_bits, prev_reward = a_set, m, bits, reward
            bits = env.state
        return {"steps": steps, "reward": reward, "timed_out": getattr(env, "timed_out", False),
                "error": errors[-1]}

    def classify(self, bits) -> Optional[int]:
        m = match_set(self.pop, bits_to_int(as_bits(bits)))
        if not m:
            return None
        return xcs_select_action(xcs_prediction_array(m), EXPLOIT, self.rng)
