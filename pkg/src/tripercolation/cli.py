"""Command-line front end: simulate, theory, compare and sweep, all emitting CSV."""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analytic
from .component_stats import atsp_audit, histogram, observables, susceptibility_peak
from .errors import DomainError, IngestionError, InvalidArgumentError, NumericalError, TriPercolationError
from .graph_process import DEFAULT_LAW, ClockLaw, iter_process
from .initial_graphs import empty, er_initial, from_edge_list, triangle_free_initial

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_TOLERANCE = 0, 1, 2, 3

SIMULATE_COLUMNS = [
    "replica", "seed", "t", "n", "edge_count", "m1_star", "m1_finite", "m2_finite",
    "largest_fraction", "susceptibility", "even_weight_components", "non_tree_components",
]
THEORY_COLUMNS = ["t", "m1_0", "m2_0", "T_g", "w_star", "v_inf", "m1_finite"]
COMPARE_COLUMNS = [
    "t", "n", "replicas", "largest_fraction_mean", "largest_fraction_stderr",
    "susceptibility_mean", "v_inf", "T_g", "abs_deviation", "within_tolerance",
]


class UsageError(TriPercolationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- parsing helpers ---------------------------------------------------


@dataclass(frozen=True)
class InitSpec:
    kind: str  # empty | er | trianglefree | file
    m1: float = 0.0
    path: str = ""

    @classmethod
    def parse(cls, text: str) -> InitSpec:
        kind, _, arg = text.partition(":")
        if kind == "empty" and not arg:
            return cls("empty")
        if kind in ("er", "trianglefree"):
            try:
                m1 = float(arg)
            except ValueError:
                raise UsageError(f"--init {kind} needs a density, e.g. {kind}:0.3") from None
            if not m1 >= 0:
                raise UsageError(f"density must be non-negative, got {arg}")
            return cls(kind, m1=m1)
        if kind == "file" and arg:
            return cls("file", path=arg)
        raise UsageError(f"unrecognised --init {text!r}; use empty, er:M1, trianglefree:M1 or file:PATH")

    def with_m1(self, m1: float) -> InitSpec:
        if self.kind not in ("er", "trianglefree"):
            raise UsageError("sweeping m1 needs --init er:M1 or trianglefree:M1")
        return InitSpec(self.kind, m1=m1)

    def build(self, n: int, seed):
        if self.kind == "empty":
            return empty(n)
        if self.kind == "er":
            return er_initial(n, self.m1, seed)
        if self.kind == "trianglefree":
            return triangle_free_initial(n, self.m1, seed)
        state = from_edge_list(self.path)
        if state.n_vertices != n:
            raise UsageError(f"{self.path} has {state.n_vertices} vertices but --n is {n}")
        return state

    def distribution(self) -> analytic.InitialDistribution:
        if self.kind == "empty":
            return analytic.InitialDistribution.empty()
        if self.kind == "er":
            return analytic.InitialDistribution.er_density(self.m1)
        if self.kind == "trianglefree":
            return analytic.InitialDistribution.explicit({1: self.m1})
        state = from_edge_list(self.path)
        return analytic.InitialDistribution.from_component_counts(state.weight_counts, state.n_vertices)


def parse_floats(text: str) -> list[float]:
    """Comma list ``a,b,c`` or inclusive range ``start:stop:step``."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise UsageError(f"range step must be positive in {text!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [start + i * step for i in range(max(count, 0))]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse numbers from {text!r}") from None
    if not values:
        raise UsageError(f"empty value list {text!r}")
    return [round(v, 12) for v in values]


def replica_seed(master: int, index: int) -> int:
    """Seed of replica ``index``; depends only on the master seed and the index."""
    return int(np.random.SeedSequence([master, index]).generate_state(1, dtype=np.uint32)[0])


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(out, columns, rows) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])


# -- simulation --------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    n: int
    init: InitSpec
    t_max: float
    observe: tuple[float, ...]
    seed: int
    audit: bool = True
    law: ClockLaw = DEFAULT_LAW


def simulate_replica(cfg: SimConfig, index: int) -> list[dict]:
    seed = replica_seed(cfg.seed, index)
    state = cfg.init.build(cfg.n, [seed, 0])
    rows = []
    rng = np.random.default_rng([seed, 1])
    for snap in iter_process(cfg.n, state, cfg.t_max, cfg.observe, rng, cfg.law):
        hist = histogram(snap)
        obs = observables(hist, snap.n_vertices, snap.n_edges)
        if cfg.audit:
            report = atsp_audit(snap, exclude_largest=True)
            even, non_tree = report.even_weight_components, report.non_tree_components
        else:
            even, non_tree = hist.even_weight_components(), None
        rows.append({
            "replica": index, "seed": seed, "t": snap.time, "n": cfg.n, "edge_count": snap.n_edges,
            "m1_star": obs.m1_star, "m1_finite": obs.m1_finite, "m2_finite": obs.m2_finite,
            "largest_fraction": obs.largest_fraction, "susceptibility": obs.susceptibility,
            "even_weight_components": even, "non_tree_components": non_tree,
        })
    return rows


def _simulate_star(args):
    return simulate_replica(*args)


def simulate(cfg: SimConfig, replicas: int, threads: int = 1) -> list[list[dict]]:
    """Rows per replica, in replica order regardless of ``threads``."""
    jobs = [(cfg, i) for i in range(replicas)]
    if threads <= 1 or replicas <= 1:
        return [simulate_replica(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_simulate_star, jobs))


def theory_rows(dist: analytic.InitialDistribution, times) -> list[dict]:
    m1, m2 = dist.moments()
    rows = []
    for t in times:
        res = analytic.theory(dist, t)
        rows.append({"t": t, "m1_0": m1, "m2_0": m2, "T_g": res.T_g, "w_star": res.w_star,
                     "v_inf": res.v_inf, "m1_finite": res.m1_finite})
    return rows


def aggregate(per_replica: list[list[dict]], dist, tolerance: float) -> list[dict]:
    out = []
    for k, first in enumerate(per_replica[0]):
        frac = np.array([rows[k]["largest_fraction"] for rows in per_replica])
        chi = np.array([rows[k]["susceptibility"] for rows in per_replica])
        stderr = float(frac.std(ddof=1) / math.sqrt(len(frac))) if len(frac) > 1 else 0.0
        res = analytic.theory(dist, first["t"])
        dev = abs(float(frac.mean()) - res.v_inf)
        out.append({
            "t": first["t"], "n": first["n"], "replicas": len(frac),
            "largest_fraction_mean": float(frac.mean()), "largest_fraction_stderr": stderr,
            "susceptibility_mean": float(chi.mean()), "v_inf": res.v_inf, "T_g": res.T_g,
            "abs_deviation": dev, "within_tolerance": dev <= tolerance,
        })
    return out


# -- commands ----------------------------------------------------------


def _sim_config(args, n=None, init=None, observe=None) -> SimConfig:
    if observe is None:
        if not args.observe:
            raise UsageError("simulation needs --observe")
        observe = parse_floats(args.observe)
    observe = list(observe)
    if any(b < a for a, b in zip(observe, observe[1:])):
        raise UsageError("--observe times must be sorted")
    t_max = args.t_max if args.t_max is not None else observe[-1]
    if observe[0] < 0 or observe[-1] > t_max:
        raise UsageError(f"--observe times must lie in [0, {t_max}]")
    n = n if n is not None else args.n
    if n is None or n < 3:
        raise UsageError("--n must be at least 3")
    return SimConfig(n=n, init=init or InitSpec.parse(args.init), t_max=t_max,
                     observe=tuple(observe), seed=args.seed, audit=not args.skip_audit,
                     law=ClockLaw(args.clock))


def cmd_simulate(args, out) -> int:
    cfg = _sim_config(args)
    per_replica = simulate(cfg, args.replicas, args.threads)
    write_csv(out, SIMULATE_COLUMNS, [row for rows in per_replica for row in rows])
    return EXIT_OK


def cmd_theory(args, out) -> int:
    if args.moments:
        if args.init:
            raise UsageError("--moments and --init are mutually exclusive")
        try:
            m1, m2 = (float(p) for p in args.moments.split(","))
        except ValueError:
            raise UsageError(f"--moments needs M1,M2, got {args.moments!r}") from None
        write_csv(out, THEORY_COLUMNS, [{"m1_0": m1, "m2_0": m2, "T_g": analytic.critical_time(m1, m2)}])
        return EXIT_OK
    if not args.t:
        raise UsageError("theory needs --t (or --moments)")
    dist = InitSpec.parse(args.init or "empty").distribution()
    write_csv(out, THEORY_COLUMNS, theory_rows(dist, parse_floats(args.t)))
    return EXIT_OK


def cmd_compare(args, out) -> int:
    cfg = _sim_config(args)
    dist = cfg.init.distribution()
    per_replica = simulate(cfg, args.replicas, args.threads)
    rows = aggregate(per_replica, dist, args.tolerance)
    write_csv(out, COMPARE_COLUMNS, rows)
    failures = [r for r in rows if not r["within_tolerance"]]
    t_peak = susceptibility_peak([r["t"] for r in rows], [r["susceptibility_mean"] for r in rows])
    t_g = rows[0]["T_g"]
    print(
        f"# compare: {len(rows) - len(failures)}/{len(rows)} observation times within "
        f"tolerance {args.tolerance:g}; max |deviation| = {max(r['abs_deviation'] for r in rows):.6g}; "
        f"susceptibility peak at t = {t_peak:.6g} (theory T_g = {t_g:.6g})",
        file=sys.stderr,
    )
    return EXIT_TOLERANCE if failures else EXIT_OK


def cmd_sweep(args, out) -> int:
    values = parse_floats(args.range)
    mode = args.mode or ("simulate" if args.param == "n" else "theory")
    if args.param == "n" and mode == "theory":
        raise UsageError("sweeping n only makes sense with --mode simulate")
    if mode == "theory":
        rows = []
        if args.param == "t":
            rows = theory_rows(InitSpec.parse(args.init).distribution(), values)
        else:
            spec = InitSpec.parse(args.init)
            times = parse_floats(args.t) if args.t else [0.0]
            for m1 in values:
                rows += theory_rows(spec.with_m1(m1).distribution(), times)
        write_csv(out, THEORY_COLUMNS, rows)
        return EXIT_OK

    rows = []
    if args.param == "t":
        per = simulate(_sim_config(args, observe=values), args.replicas, args.threads)
        rows = [r for rs in per for r in rs]
    elif args.param == "m1":
        spec = InitSpec.parse(args.init)
        for m1 in values:
            per = simulate(_sim_config(args, init=spec.with_m1(m1)), args.replicas, args.threads)
            rows += [r for rs in per for r in rs]
    else:
        for n in values:
            if n != int(n):
                raise UsageError(f"n must be an integer, got {n}")
            per = simulate(_sim_config(args, n=int(n)), args.replicas, args.threads)
            rows += [r for rs in per for r in rs]
    write_csv(out, SIMULATE_COLUMNS, rows)
    return EXIT_OK


def _add_sim_flags(p, observe_required=True):
    p.add_argument("--n", type=int, help="number of vertices")
    p.add_argument("--init", default="empty", help="empty | er:M1 | trianglefree:M1 | file:PATH")
    p.add_argument("--t-max", type=float, default=None, help="end of the run (default: last observation)")
    p.add_argument("--observe", required=observe_required, help="observation times: t1,t2,... or start:stop:step")
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker processes over replicas")
    p.add_argument("--clock", choices=[law.value for law in ClockLaw], default=DEFAULT_LAW.value,
                   help="edge clock: linear gives G(N, t/sqrt(N)); exponential is the rate-1/sqrt(N) clock")
    p.add_argument("--skip-audit", action="store_true", help="skip the triangle-tree audit (non_tree_components left blank)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tripercolation", description=__doc__)
    parser.add_argument("--out", help="write CSV here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Monte Carlo runs of the random graph process")
    _add_sim_flags(p)

    p = sub.add_parser("theory", help="critical time and giant-component density")
    p.add_argument("--init", default=None, help="empty | er:M1 | trianglefree:M1 | file:PATH")
    p.add_argument("--moments", help="M1,M2: print T_g only")
    p.add_argument("--t", help="times: t1,t2,... or start:stop:step")

    p = sub.add_parser("compare", help="simulation against theory")
    _add_sim_flags(p)
    p.add_argument("--tolerance", type=float, default=0.07)

    p = sub.add_parser("sweep", help="sweep t, m1 or n")
    _add_sim_flags(p, observe_required=False)
    p.add_argument("--param", choices=["t", "m1", "n"], required=True)
    p.add_argument("--range", required=True, help="start:stop:step or a comma list")
    p.add_argument("--mode", choices=["theory", "simulate"])
    p.add_argument("--t", help="theory times when sweeping m1")
    return parser


COMMANDS = {"simulate": cmd_simulate, "theory": cmd_theory, "compare": cmd_compare, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "replicas", 1) < 1:
        parser.error("--replicas must be at least 1")
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, buf)
    except UsageError as exc:
        print(f"tripercolation: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidArgumentError, IngestionError) as exc:
        print(f"tripercolation: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, NumericalError, TriPercolationError) as exc:
        print(f"tripercolation: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
