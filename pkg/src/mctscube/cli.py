"""Command-line front end.

Exit codes follow SAT-solver convention: 10 satisfiable, 20 unsatisfiable,
0 success without a verdict, 1 runtime or input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import dir_instances, format_table, random_instances, run_instance
from .cnf import CubeSet, DimacsError, parse_icnf, read_dimacs, write_icnf
from .conquer import SAT, UNSAT, Limits, solve_cnc, solve_cnc_external, verify_model
from .cuber import MODES, CubingConfig, CubingError, cube_episode

EXIT_SAT = 10
EXIT_UNSAT = 20

log = logging.getLogger("mctscube")


class CliError(Exception):
    pass


def _add_cube_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("-n", type=int, required=True, help="stop splitting once this many variables are eliminated")
    p.add_argument("--mode", choices=MODES, default="mcts")
    p.add_argument("--budget", type=int, default=30, help="MCTS simulations per split (default: 30)")
    p.add_argument("--cpuct", type=float, default=5.0, help="PUCT exploration constant (default: 5.0)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")


def _add_conquer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-decisions", type=int, default=None, help="per-cube DPLL decision limit")
    p.add_argument("--external", metavar="CMD", default=None,
                   help="external solver command; '{}' is replaced by the DIMACS path")


def _load_formula(path):
    try:
        return read_dimacs(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except DimacsError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _config(args) -> CubingConfig:
    try:
        return CubingConfig(n=args.n, budget=args.budget, c_puct=args.cpuct, mode=args.mode,
                            seed=args.seed, jobs=args.jobs)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _cube_stats(name: str, cfg: CubingConfig, cubes: CubeSet, stats) -> dict:
    return {
        "instance": name,
        "mode": cfg.mode,
        "n": cfg.n,
        "budget": cfg.budget,
        "c_puct": cfg.c_puct,
        "seed": cfg.seed,
        "jobs": cfg.jobs,
        "cubes": {"open": len(cubes.open), "refuted": len(cubes.refuted)},
        "depth_histogram": {str(k): v for k, v in stats.depth_histogram.items()},
        "split_nodes": stats.split_nodes,
        "bcp_calls": stats.bcp_calls,
        "timing": {"cubing_seconds": stats.wall_time},
    }


def _write_stats(path, doc: dict) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _write_icnf(cubes: CubeSet, output) -> None:
    if output in (None, "-"):
        write_icnf(cubes, sys.stdout)
        sys.stdout.flush()
        return
    tmp = Path(str(output) + ".tmp")
    with open(tmp, "w") as fh:
        write_icnf(cubes, fh)
    tmp.replace(output)


def _run_cubing(formula, cfg):
    try:
        return cube_episode(formula, cfg)
    except CubingError as exc:
        raise CliError(str(exc)) from exc


def _conquer(formula, cubes, args):
    if args.external:
        return solve_cnc_external(formula, cubes, args.external)
    return solve_cnc(formula, cubes, Limits(args.max_decisions), jobs=getattr(args, "jobs", 1))


def _report(formula, result, out=None) -> int:
    out = out or sys.stdout
    if result.status == SAT:
        print("s SATISFIABLE", file=out)
        if result.model is not None:
            if not verify_model(formula, result.model):
                raise CliError("internal error: model does not satisfy the formula")
            lits = [v if result.model[v] else -v for v in sorted(result.model)]
            print("v " + " ".join(map(str, lits + [0])), file=out)
        return EXIT_SAT
    if result.status == UNSAT:
        print("s UNSATISFIABLE", file=out)
        return EXIT_UNSAT
    print("s UNKNOWN", file=out)
    return 0


def _conquer_stats(result) -> dict:
    return {
        "result": result.status,
        "decisions": result.decisions,
        "propagations": result.propagations,
        "per_cube": [
            {"cube": list(c.cube), "result": c.status, "decisions": c.decisions, "refuted": c.refuted}
            for c in result.cubes
        ],
    }


def cmd_cube(args) -> int:
    formula = _load_formula(args.input)
    cfg = _config(args)
    cubes, stats = _run_cubing(formula, cfg)
    _write_icnf(cubes, args.output)
    _write_stats(args.stats, _cube_stats(Path(args.input).name, cfg, cubes, stats))
    return 0


def cmd_conquer(args) -> int:
    formula = _load_formula(args.input)
    try:
        with open(args.cubes) as fh:
            cubes = parse_icnf(fh)
    except OSError as exc:
        raise CliError(f"cannot read {args.cubes}: {exc.strerror or exc}") from exc
    except DimacsError as exc:
        raise CliError(f"{args.cubes}: {exc}") from exc
    result = _conquer(formula, cubes, args)
    code = _report(formula, result)
    _write_stats(args.stats, {"instance": Path(args.input).name, "conquer": _conquer_stats(result),
                              "result": result.status})
    return code


def cmd_solve(args) -> int:
    formula = _load_formula(args.input)
    cfg = _config(args)
    cubes, stats = _run_cubing(formula, cfg)
    if args.output:
        _write_icnf(cubes, args.output)
    print(f"c cubes {len(cubes.open)} open, {len(cubes.refuted)} refuted; cubing {stats.wall_time:.3f}s")
    result = _conquer(formula, cubes, args)
    print(f"c conquer decisions {result.decisions}")
    code = _report(formula, result)
    doc = _cube_stats(Path(args.input).name, cfg, cubes, stats)
    doc["conquer"] = _conquer_stats(result)
    doc["result"] = result.status
    _write_stats(args.stats, doc)
    return code


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def cmd_bench(args) -> int:
    rows = []
    limits = Limits(args.max_decisions)
    for seed in args.seeds:
        if args.instances == "random":
            instances = random_instances(args.random_k, args.vars, args.ratio, seed)
        else:
            try:
                instances = dir_instances(args.instances)
            except OSError as exc:
                raise CliError(f"cannot read {args.instances}: {exc.strerror or exc}") from exc
            except DimacsError as exc:
                raise CliError(str(exc)) from exc
        if not instances:
            print("error: empty instance set", file=sys.stderr)
            return 2
        for name, formula in instances:
            rows += run_instance(name, formula, seed, args.n, args.budget, args.cpuct, args.jobs, limits)
    print(format_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mctscube", description="MCTS-guided cube-and-conquer SAT cubing")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cube", help="split a CNF into cubes (iCNF)")
    p.add_argument("input")
    _add_cube_flags(p)
    p.add_argument("-o", "--output", default=None, help="iCNF output path (default: stdout)")
    p.add_argument("--stats", default=None, help="write a JSON stats document here")
    p.set_defaults(func=cmd_cube)

    p = sub.add_parser("conquer", help="solve a CNF under the cubes of an iCNF file")
    p.add_argument("input")
    p.add_argument("cubes")
    p.add_argument("--jobs", type=int, default=1)
    _add_conquer_flags(p)
    p.add_argument("--stats", default=None)
    p.set_defaults(func=cmd_conquer)

    p = sub.add_parser("solve", help="cube then conquer")
    p.add_argument("input")
    _add_cube_flags(p)
    _add_conquer_flags(p)
    p.add_argument("-o", "--output", default=None, help="also write the cubes here")
    p.add_argument("--stats", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="compare mcts and greedy cubing by conquer effort")
    p.add_argument("--instances", required=True, help="directory of .cnf files, or 'random'")
    p.add_argument("--random-k", type=int, default=20, help="random instances per seed")
    p.add_argument("--vars", type=int, default=150)
    p.add_argument("--ratio", type=float, default=4.26)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seeds", type=_parse_seeds, default=[0])
    p.add_argument("--budget", type=int, default=30)
    p.add_argument("--cpuct", type=float, default=5.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-decisions", type=int, default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="c %(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
