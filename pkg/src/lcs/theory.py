"""Closed-form XCS specificity dynamics and a live-run check against them."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

from .core import ConfigurationError, GaOperatorParams, LCSError, Population, RandomStream, TernaryCondition
from .core import specificity as cond_specificity
from .envs import ConstantRewardEnv
from .xcs import XCS, AccuracyRule, XcsParams


class MeasurementError(LCSError):
    """A statistic was requested from an empty population."""


@dataclass
class SpecificityState:
    sP: float
    f_ga: float = 1.0
    N: int = 400
    mu: float = 0.04

    def validate(self) -> None:
        if not 0.0 <= self.sP <= 1.0:
            raise ConfigurationError("sP must lie in [0, 1]", "sP")
        if not 0.0 <= self.f_ga <= 1.0:
            raise ConfigurationError("f_ga must lie in [0, 1]", "f_ga")
        if self.N < 1:
            raise ConfigurationError("N must be at least 1", "N")


def action_set_specificity(sP: float) -> float:
    return sP / (2.0 - sP)


def delta_mut(mu: float, s: float) -> float:
    return 0.5 * mu * (2.0 - 3.0 * s)


def specificity_step(state: SpecificityState) -> float:
    sA = action_set_specificity(state.sP)
    return state.sP + state.f_ga * (2.0 * (sA + delta_mut(state.mu, sA) - state.sP)) / state.N


def specificity_trajectory(sP0: float, steps: int, f_ga: float, N: int, mu: float) -> list[float]:
    """Iterated prediction; element ``t`` is the specificity after ``t`` cycles."""
    state = SpecificityState(sP0, f_ga, N, mu)
    state.validate()
    out = [sP0]
    for _ in range(steps):
        state.sP = specificity_step(state)
        out.append(state.sP)
    return out


def measure_population_specificity(pop) -> float:
    rules = list(pop)
    if not rules:
        raise MeasurementError("cannot measure the specificity of an empty population")
    return sum(cond_specificity(r.cond) for r in rules) / len(rules)


def random_population(N: int, length: int, q: float, rng, n_actions: int = 2,
                      p_init: float = 0.0) -> Population:
    """Rules whose positions are independently defined with probability ``q``."""
    pop = Population(N)
    rand = rng.random
    for _ in range(N):
        symbols = "".join(("1" if rand() < 0.5 else "0") if rand() < q else "#" for _ in range(length))
        pop.add(AccuracyRule(TernaryCondition(symbols), rng.randrange(n_actions), p_init, 0.0, 0.01))
    return pop


def pooled_match_specificity(pop, samples: int, rng) -> float:
    """Specificity averaged over every (rule, input) match across random inputs."""
    rules = list(pop)
    length = len(rules[0].cond)
    total_spec = 0.0
    total_match = 0
    specs = [cond_specificity(r.cond) for r in rules]
    for _ in range(samples):
        x = rng.getrandbits(length)
        for r, s in zip(rules, specs):
            if x & r.cond.care == r.cond.value:
                total_spec += s
                total_match += 1
    if not total_match:
        raise MeasurementError("no rule matched any sampled input")
    return total_spec / total_match


@dataclass
class TrajectoryComparison:
    predicted: list[float]
    measured: list[float]
    max_deviation: float
    transient: int


def neutral_xcs_params(N: int, mu: float, chi: float = 0.8, p_wild: float = 0.33) -> XcsParams:
    # every rule predicts the constant payoff exactly, so all are equally accurate;
    # theta_ga = 0 fires the GA on every explore trial, giving f_ga = 1
    return XcsParams(N=N, theta_ga=0.0, p_init=0.0, epsilon_init=0.0,
                     ga=GaOperatorParams(chi=chi, mu=mu, p_wild=p_wild))


def run_neutral_xcs(length: int, N: int, mu: float, trials: int, sP0: float, seed: int,
                    params: Optional[XcsParams] = None) -> tuple[list[float], float]:
    """Measured specificity per explore trial under constant reward; returns (series, f_ga)."""
    rng = RandomStream(seed)
    params = params or neutral_xcs_params(N, mu)
    env = ConstantRewardEnv(length, reward=params.p_init)
    pop = random_population(N, length, sP0, rng.spawn(1), p_init=params.p_init)
    xcs = XCS(params, env.n_actions, length, rng, pop)
    series = [measure_population_specificity(xcs.pop)]
    for _ in range(trials):
        xcs.run_trial(env, explore=True)
        series.append(measure_population_specificity(xcs.pop))
    f_ga = xcs.ga_count / trials if trials else 0.0
    return series, f_ga


def specificity_trajectory_compare(length: int = 20, N: int = 400, mu: float = 0.04,
                                   trials: int = 5000, sP0: float = 0.25, seeds=(0,),
                                   transient: int = 2000) -> TrajectoryComparison:
    """Seed-averaged measured trajectory against the iterated prediction."""
    runs = []
    f_gas = []
    for seed in seeds:
        series, f_ga = run_neutral_xcs(length, N, mu, trials, sP0, seed)
        runs.append(series)
        f_gas.append(f_ga)
    measured = [sum(col) / len(col) for col in zip(*runs)]
    f_ga = sum(f_gas) / len(f_gas) if f_gas else 1.0
    predicted = specificity_trajectory(sP0, trials, min(1.0, f_ga) if trials else 1.0, N, mu)
    tail = range(min(transient, trials), trials + 1)
    dev = max((abs(predicted[t] - measured[t]) for t in tail), default=0.0)
    return TrajectoryComparison(predicted, measured, dev, transient)


def write_series(path, series, header: str = "sP") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", header])
        for t, v in enumerate(series):
            w.writerow([t, repr(float(v))])


def write_comparison(path, comp: TrajectoryComparison) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "predicted", "measured"])
        for t, (p, m) in enumerate(zip(comp.predicted, comp.measured)):
            w.writerow([t, repr(float(p)), repr(float(m))])
