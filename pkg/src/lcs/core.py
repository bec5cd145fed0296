"""Shared rule machinery: ternary conditions, GA operators and seeded randomness.

Conditions are strings over ``0``, ``1`` and ``#``.  Matching is done on
integers: each condition caches a care mask (1 where the symbol is defined)
and the value bits under that mask, so a match is ``x & care == value``.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from typing import Optional, Sequence, Union

ALPHABET = "01#"
WILDCARD = "#"

_OTHER_SYMBOLS = {"0": ("1", "#"), "1": ("0", "#"), "#": ("0", "1")}


class LCSError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(LCSError, ValueError):
    """Invalid parameter, shape or length combination."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class InputError(LCSError, ValueError):
    """An input lies outside the domain an environment accepts."""


class SelectionError(LCSError):
    """Roulette selection over an empty or all-zero weight vector."""


class RandomStream(random.Random):
    """Seeded Mersenne Twister stream.

    A thin ``random.Random`` subclass; the generator is platform independent
    for ``random()``, ``getrandbits`` and the integer helpers built on them.
    """

    def __init__(self, seed: int = 0):
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigurationError(f"seed must be an integer, got {seed!r}", "seed")
        self.seed_value = seed & 0xFFFFFFFFFFFFFFFF
        super().__init__(self.seed_value)

    def spawn(self, salt: int) -> "RandomStream":
        """Derive an independent child stream (used for replicas and helpers)."""
        return RandomStream((self.seed_value * 1_000_003 + salt) & 0xFFFFFFFFFFFFFFFF)


BitLike = Union[str, Sequence[int]]


def as_bits(bits: BitLike) -> str:
    """Normalise a bit input to a ``0``/``1`` string."""
    if isinstance(bits, str):
        s = bits
    else:
        s = "".join("1" if b else "0" for b in bits)
    if s.strip("01"):
        raise ConfigurationError(f"bit input may only contain 0/1: {s!r}")
    return s


def bits_to_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


class TernaryCondition:
    """Immutable condition over the ternary alphabet."""

    __slots__ = ("symbols", "care", "value", "spec")

    def __init__(self, symbols: str):
        if not isinstance(symbols, str):
            symbols = "".join(symbols)
        bad = set(symbols) - set(ALPHABET)
        if bad:
            raise ConfigurationError(f"invalid condition symbols {sorted(bad)} in {symbols!r}")
        self.symbols = symbols
        care = value = 0
        for ch in symbols:
            care <<= 1
            value <<= 1
            if ch != WILDCARD:
                care |= 1
                if ch == "1":
                    value |= 1
        self.care = care
        self.value = value
        self.spec = (len(symbols) - symbols.count(WILDCARD)) / len(symbols) if symbols else 0.0

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.symbols

    def __repr__(self) -> str:
        return f"TernaryCondition({self.symbols!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, TernaryCondition) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def matches_int(self, x: int) -> bool:
        return x & self.care == self.value

    @property
    def specificity(self) -> float:
        return specificity(self)

    def is_generalization_of(self, other: "TernaryCondition") -> bool:
        """True if this condition has ``#`` wherever ``other`` does (and agrees elsewhere)."""
        if len(self) != len(other):
            return False
        return self.care & other.care == self.care and other.value & self.care == self.value


def matches(cond: TernaryCondition, bits: BitLike) -> bool:
    bits = as_bits(bits)
    if len(bits) != len(cond):
        raise ConfigurationError(
            f"condition length {len(cond)} does not match input length {len(bits)}")
    return cond.matches_int(bits_to_int(bits))


def specificity(cond: TernaryCondition) -> float:
    n = len(cond)
    if n == 0:
        raise ConfigurationError("specificity of a zero-length condition is undefined")
    return (n - cond.symbols.count(WILDCARD)) / n


@dataclass
class GaOperatorParams:
    chi: float = 0.8
    mu: float = 0.04
    p_wild: float = 0.33
    # mutate only between '#' and the current input bit
    niche_mutation: bool = False

    def validate(self) -> None:
        for key in ("chi", "mu", "p_wild"):
            v = getattr(self, key)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{key} must lie in [0, 1], got {v}", key)


def cover_condition(bits: BitLike, p_wild: float, rng: random.Random) -> TernaryCondition:
    bits = as_bits(bits)
    rand = rng.random
    return TernaryCondition("".join(WILDCARD if rand() < p_wild else b for b in bits))


def crossover_point(length: int, rng: random.Random) -> int:
    return rng.randint(1, length - 1)


def one_point_crossover(a: TernaryCondition, b: TernaryCondition, rng: random.Random,
                        point: Optional[int] = None) -> tuple[TernaryCondition, TernaryCondition]:
    if len(a) != len(b):
        raise ConfigurationError("crossover parents differ in length")
    if len(a) < 2:
        return a, b
    k = crossover_point(len(a), rng) if point is None else point
    sa, sb = a.symbols, b.symbols
    return TernaryCondition(sa[:k] + sb[k:]), TernaryCondition(sb[:k] + sa[k:])


def mutate_ternary(cond: TernaryCondition, mu: float, rng: random.Random,
                   input_bits: Optional[str] = None) -> TernaryCondition:
    """Per-position mutation.

    Unrestricted mode moves a symbol to one of the two other symbols with equal
    probability.  With ``input_bits`` given (niche mutation) a defined symbol
    becomes ``#`` and ``#`` becomes the input bit, so the result still matches.
    """
    if mu <= 0.0:
        return cond
    rand = rng.random
    out = []
    for i, ch in enumerate(cond.symbols):
        if rand() < mu:
            if input_bits is not None:
                ch = input_bits[i] if ch == WILDCARD else WILDCARD
            else:
                ch = _OTHER_SYMBOLS[ch][rand() < 0.5]
        out.append(ch)
    return TernaryCondition("".join(out))


def roulette(weights: Sequence[float], rng: random.Random) -> int:
    if not weights:
        raise SelectionError("roulette over an empty weight vector")
    cum = list(accumulate(weights))
    total = cum[-1]
    if not total > 0.0:
        raise SelectionError("roulette weights are all zero")
    i = bisect_right(cum, rng.random() * total)
    # guard against the last cumulative value being hit through rounding
    return min(i, len(cum) - 1)


class Population:
    """Bounded multiset of rules with stable integer identifiers."""

    def __init__(self, capacity: int, rules: Optional[list] = None, next_id: int = 0):
        if capacity < 1:
            raise ConfigurationError("population capacity must be at least 1", "N")
        self.capacity = capacity
        self.rules: list = []
        self.next_id = next_id
        # set when a population is read from a file
        self.engine: Optional[str] = None
        self.dims: Optional[int] = None
        for r in rules or ():
            self.add(r, keep_id=True)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def add(self, rule, keep_id: bool = False):
        if keep_id and rule.id is not None and rule.id >= 0:
            self.next_id = max(self.next_id, rule.id + 1)
        else:
            rule.id = self.next_id
            self.next_id += 1
        self.rules.append(rule)
        return rule

    def remove_at(self, index: int):
        return self.rules.pop(index)

    def remove(self, rule) -> None:
        for i, r in enumerate(self.rules):
            if r is rule:
                del self.rules[i]
                return
        raise KeyError(rule.id)

    @property
    def over_capacity(self) -> bool:
        return len(self.rules) > self.capacity
