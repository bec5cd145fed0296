"""Line-oriented population files.

Format::

    LCSPOP v1 <engine> <dims>
    <condition> <action> key=value key=value ...

Ternary conditions are written as their symbol string, centre-spread
conditions as ``c:s,c:s,...`` and lower-upper conditions as ``l:u,...``.
Engines without actions write ``-``.  Floats carry 17 significant digits so
a load after a save reproduces every parameter bit for bit.
"""

from __future__ import annotations

from pathlib import Path

from .core import LCSError, Population, TernaryCondition
from .ucs import SupervisedRule
from .xcs import AccuracyRule
from .xcsc import ClusterRule, IntervalConditionCS
from .xcsf import FunctionRule, IntervalConditionLU
from .zcs import StrengthRule

MAGIC = "LCSPOP"
VERSION = "v1"


class LoadError(LCSError):
    def __init__(self, message: str, lineno: int = 0):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


def _f(v: float) -> str:
    return format(float(v), ".17g")


# (file key, attribute, parser); 'id' is always last
_SCHEMAS = {
    "zcs": (StrengthRule, [("S", "S", float)]),
    "xcs": (AccuracyRule, [("p", "p", float), ("epsilon", "epsilon", float), ("F", "F", float),
                           ("exp", "exp", int), ("ts", "ts", int), ("as", "as_size", float)]),
    "ucs": (SupervisedRule, [("correct", "correct", int), ("exp", "exp", int),
                             ("kappa", "kappa", float), ("F", "F", float), ("cs", "cs", float),
                             ("ts", "ts", int)]),
    "xcsc": (ClusterRule, [("epsilon", "epsilon", float), ("F", "F", float), ("exp", "exp", int),
                           ("ms", "ms", float), ("ts", "ts", int)]),
    "xcsf": (FunctionRule, [("epsilon", "epsilon", float), ("F", "F", float), ("exp", "exp", int),
                            ("ms", "ms", float), ("ts", "ts", int)]),
}
ENGINES = tuple(_SCHEMAS)


def _render_cond(engine: str, cond) -> str:
    if engine in ("zcs", "xcs", "ucs"):
        return cond.symbols
    if engine == "xcsc":
        return ",".join(f"{_f(c)}:{_f(s)}" for c, s in zip(cond.centres, cond.spreads))
    return ",".join(f"{l}:{u}" for l, u in zip(cond.lower, cond.upper))


def _parse_cond(engine: str, text: str):
    if engine in ("zcs", "xcs", "ucs"):
        return TernaryCondition(text)
    pairs = [p.split(":") for p in text.split(",")]
    if any(len(p) != 2 for p in pairs):
        raise ValueError(f"malformed interval condition {text!r}")
    if engine == "xcsc":
        return IntervalConditionCS([float(a) for a, _ in pairs], [float(b) for _, b in pairs])
    return IntervalConditionLU([int(a) for a, _ in pairs], [int(b) for _, b in pairs])


def _render_value(v) -> str:
    return str(v) if isinstance(v, int) else _f(v)


def population_lines(pop, engine: str, dims: int) -> list[str]:
    if engine not in _SCHEMAS:
        raise LCSError(f"unknown engine {engine!r}")
    _, fields = _SCHEMAS[engine]
    lines = [f"{MAGIC} {VERSION} {engine} {dims}"]
    for r in pop:
        action = "-" if r.action is None else str(r.action)
        parts = [_render_cond(engine, r.cond), action]
        if engine == "xcsf":
            parts.append("w=" + ",".join(_f(w) for w in r.weights))
        parts += [f"{key}={_render_value(getattr(r, attr))}" for key, attr, _ in fields]
        parts.append(f"id={r.id}")
        lines.append(" ".join(parts))
    return lines


def save_population(pop, path, engine: str, dims: int) -> None:
    Path(path).write_text("\n".join(population_lines(pop, engine, dims)) + "\n")


def load_population(path, engine: str | None = None, capacity: int | None = None) -> Population:
    """Read a population file; the result carries ``engine`` and ``dims`` attributes."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise LoadError("empty file", 1)
    head = lines[0].split()
    if len(head) != 4 or head[0] != MAGIC:
        raise LoadError(f"not a population file header: {lines[0]!r}", 1)
    if head[1] != VERSION:
        raise LoadError(f"unsupported population format version {head[1]!r}", 1)
    file_engine = head[2]
    if file_engine not in _SCHEMAS:
        raise LoadError(f"unknown engine {file_engine!r}", 1)
    if engine is not None and engine != file_engine:
        raise LoadError(f"file holds a {file_engine} population, expected {engine}", 1)
    try:
        dims = int(head[3])
    except ValueError:
        raise LoadError(f"bad dimension field {head[3]!r}", 1) from None
    cls, fields = _SCHEMAS[file_engine]
    rules = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        try:
            rules.append(_parse_rule(file_engine, cls, fields, line, dims))
        except (ValueError, KeyError, LCSError) as exc:
            raise LoadError(str(exc), lineno) from exc
    ids = [r.id for r in rules]
    if len(set(ids)) != len(ids):
        raise LoadError("duplicate rule identifiers")
    pop = Population(max(capacity or 0, len(rules), 1), rules)
    pop.engine = file_engine
    pop.dims = dims
    return pop


def _parse_rule(engine, cls, fields, line, dims):
    tokens = line.split()
    if len(tokens) < 2:
        raise ValueError("rule line needs a condition and an action")
    cond = _parse_cond(engine, tokens[0])
    if len(cond) != dims:
        raise ValueError(f"condition has {len(cond)} dimensions, header says {dims}")
    action = None if tokens[1] == "-" else int(tokens[1])
    kv = {}
    for tok in tokens[2:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {tok!r}")
        kv[key] = value
    kwargs = {attr: parse(kv.pop(key)) for key, attr, parse in fields}
    if engine == "xcsf":
        kwargs["weights"] = [float(w) for w in kv.pop("w").split(",")]
        if len(kwargs["weights"]) != dims + 1:
            raise ValueError("weight vector length must be dims + 1")
    if engine in ("zcs", "xcs", "ucs"):
        if action is None:
            raise ValueError("this engine requires an action")
        kwargs["action"] = action
    rule_id = int(kv.pop("id"))
    if kv:
        raise ValueError(f"unknown keys {sorted(kv)}")
    return cls(cond=cond, id=rule_id, **kwargs)
