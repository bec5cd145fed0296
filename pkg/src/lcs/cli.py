"""Command-line interface: ``run``, ``cluster``, ``approx``, ``theory``, ``inspect``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from .core import LCSError, RandomStream
from .envs import ClusterEnv, ClusterGenerator, FunctionEnv, FunctionTask, func_eval, load_points
from .harness import (
    DEFAULT_CLUSTER_MEANS,
    ExperimentConfig,
    MetricsRecord,
    _Window,
    load_config,
    mean_specificity,
    run_experiment,
    write_metrics,
)
from .persist import load_population, save_population
from .theory import measure_population_specificity, specificity_trajectory_compare, write_comparison
from .xcsc import XCSC, XcscParams
from .xcsf import XCSF, XcsfParams

log = logging.getLogger("lcs")


def _key_value(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), value.strip()


def _common(p: argparse.ArgumentParser, trials: int) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--trials", type=int, default=trials)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcs", description="Learning classifier system workbench")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an engine on an environment and write learning curves")
    p.add_argument("--config", help="flat key = value config file (flags override it)")
    p.add_argument("--engine", choices=("zcs", "xcs", "ucs", "xcsc", "xcsf"))
    p.add_argument("--env")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--trials", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--pop-out")
    p.add_argument("--set", action="append", type=_key_value, default=[], metavar="KEY=VALUE",
                   help="override any config key")

    p = sub.add_parser("cluster", help="cluster a headerless CSV of points in [0,1]^d with XCSC")
    p.add_argument("data", nargs="?", help="point CSV; a synthetic 3-cluster sample if omitted")
    _common(p, 20000)
    p.add_argument("--N", type=int, default=400)
    p.add_argument("--tau", type=float, default=1.2)
    p.add_argument("--s0", type=float, default=0.2)
    p.add_argument("--pop-out")

    p = sub.add_parser("approx", help="approximate a function on an integer grid with XCSF")
    p.add_argument("--func", choices=("sine", "rms"), default="sine")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    _common(p, 20000)
    p.add_argument("--N", type=int, default=500)
    p.add_argument("--eta", type=float, default=0.2)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--epsilon0", type=float, default=0.01)
    p.add_argument("--metrics", help="also write the learning curve here")

    p = sub.add_parser("theory", help="compare measured specificity with the iterated prediction")
    p.add_argument("--mu", type=float, default=0.04)
    p.add_argument("--n", type=int, default=400, help="population size N")
    p.add_argument("--len", type=int, default=20, dest="length", help="condition length")
    p.add_argument("--init", type=float, default=0.25, help="initial population specificity")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds to average")
    p.add_argument("--transient", type=int, default=2000)
    _common(p, 5000)

    p = sub.add_parser("inspect", help="summarise a saved population file")
    p.add_argument("path")
    return parser


def cmd_run(args) -> int:
    mapping = load_config(args.config) if args.config else {}
    for key in ("engine", "env", "seed", "out", "trials", "window", "pop_out"):
        value = getattr(args, key)
        if value is not None:
            mapping[key] = value
    mapping.update(dict(args.set))
    cfg = ExperimentConfig.from_mapping(mapping)
    result = run_experiment(cfg)
    last = result.records[-1] if result.records else None
    if last is None:
        print(f"{cfg.engine} on {cfg.env}: no exploit trials run")
    else:
        print(f"{cfg.engine} on {cfg.env}: trial {last.trial} performance {last.performance:.4f} "
              f"population {last.population_size}")
    return 0


def cmd_cluster(args) -> int:
    rng = RandomStream(args.seed)
    if args.data:
        env = ClusterEnv(points=load_points(args.data))
    else:
        env = ClusterEnv(ClusterGenerator.isotropic(DEFAULT_CLUSTER_MEANS, 0.05))
    xcsc = XCSC(XcscParams(N=args.N, tau=args.tau, s0=args.s0), env.d, rng)
    for _ in range(args.trials):
        xcsc.train(env.reset(rng))
    clusters = xcsc.clusters()
    d = env.d
    rows = [[format(v, ".17g") for v in c.centre] + [format(v, ".17g") for v in c.extent] + [c.support]
            for c in clusters]
    header = [f"centre_{i}" for i in range(d)] + [f"extent_{i}" for i in range(d)] + ["support"]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    if args.pop_out:
        save_population(xcsc.pop, args.pop_out, "xcsc", d)
    print(f"{len(clusters)} clusters")
    for c in clusters:
        print("  centre " + " ".join(f"{v:.3f}" for v in c.centre) + f"  support {c.support}")
    return 0


def cmd_approx(args) -> int:
    n = args.n or (1000 if args.func == "sine" else 100)
    d = args.d or (1 if args.func == "sine" else 2)
    task = FunctionTask(args.func, n, d)
    env = FunctionEnv(task)
    rng = RandomStream(args.seed)
    params = XcsfParams(N=args.N, n=n, eta=args.eta, x0=args.x0, epsilon0=args.epsilon0)
    xcsf = XCSF(params, d, rng)
    window = _Window(50)
    records = []
    for t in range(1, args.trials + 1):
        xcsf.run_trial(env, True)
        out = xcsf.run_trial(env, False)
        err = window.push(out["error"])
        records.append(MetricsRecord(t, err, err, len(xcsf.pop), mean_specificity(xcsf)))
    if args.metrics:
        write_metrics(args.metrics, records)
    if args.out:
        if d == 1:
            points = [(x,) for x in range(n)]
        else:
            sampler = rng.spawn(7)
            points = [tuple(sampler.randrange(n) for _ in range(d)) for _ in range(min(10000, n ** d))]
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x{i}" for i in range(d)] + ["target", "output", "abs_error"])
            for x in points:
                y = xcsf.predict(x)
                target = func_eval(task, x)
                w.writerow(list(x) + [repr(target), repr(y), repr(abs(y - target))])
    final = records[-1].performance if records else float("nan")
    print(f"xcsf {args.func}: moving mean |error| {final:.4f} after {args.trials} updates")
    return 0


def cmd_theory(args) -> int:
    comp = specificity_trajectory_compare(args.length, args.n, args.mu, args.trials, args.init,
                                          seeds=range(args.seed, args.seed + args.seeds),
                                          transient=args.transient)
    if args.out:
        write_comparison(args.out, comp)
    print(f"max |predicted - measured| after trial {comp.transient}: {comp.max_deviation:.4f}")
    return 0


def cmd_inspect(args) -> int:
    pop = load_population(args.path)
    print(f"engine: {pop.engine}")
    print(f"dimensions: {pop.dims}")
    print(f"rules: {len(pop)}")
    if pop.engine in ("zcs", "xcs", "ucs"):
        spec = measure_population_specificity(pop) if len(pop) else 0.0
        print(f"mean specificity: {spec:.6f}")
        actions = {}
        for r in pop:
            actions[r.action] = actions.get(r.action, 0) + 1
        print("rules per action: " + ", ".join(f"{a}={c}" for a, c in sorted(actions.items())))
    elif len(pop):
        width = sum(sum(u - l for l, u in zip(r.cond.lower, r.cond.upper)) / pop.dims for r in pop)
        print(f"mean interval width: {width / len(pop):.6f}")
    return 0


COMMANDS = {"run": cmd_run, "cluster": cmd_cluster, "approx": cmd_approx,
            "theory": cmd_theory, "inspect": cmd_inspect}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (LCSError, OSError) as exc:
        key = getattr(exc, "key", None)
        print(f"lcs {args.command}: error: {exc}" + (f" (key: {key})" if key else ""), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
