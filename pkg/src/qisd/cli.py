"""Command-line entry point: ``qisd gen|solve|simulate|estimate|resources``.

Exit codes: 0 success, 1 usage or parse error, 2 resource (width) limit,
3 unsolved within the iteration budget.  Every run prints its resolved
configuration as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .classical_isd import lee_brickell, prange
from .estimator import (
    ALGORITHMS,
    PRESETS,
    closed_form_width,
    curve,
    curves_to_csv,
    get_setting,
    normalize_algorithm,
    normalize_variant,
    resource_table,
)
from .gf2core import InstanceFormatError, SdpInstance, random_instance
from .hybrid import HybridParameterError, InnerSolver, combined_hybrid, hybrid_prange, punctured_hybrid
from .qsim import WidthLimitError

EXIT_OK, EXIT_USAGE, EXIT_LIMIT, EXIT_UNSOLVED = 0, 1, 2, 3

SOLVE_ALGOS = ("prange", "lee-brickell", "hybrid-prange", "punctured", "combined", "quantum-sim")
SIM_VARIANTS = ("full", "width_reduced", "lee_brickell", "cyclic")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _dump(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _echo(config: dict) -> None:
    print(json.dumps({"config": config}, sort_keys=True), file=sys.stderr)


def _read_instance(path: str) -> SdpInstance:
    try:
        return SdpInstance.read(path)
    except FileNotFoundError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except InstanceFormatError as exc:
        raise UsageError(f"{path}: {exc}") from exc


# ------------------------------------------------------------------ commands

def cmd_gen(args) -> int:
    config = {"command": "gen", "n": args.n, "k": args.k, "omega": args.omega, "seed": args.seed,
              "out": args.out}
    _echo(config)
    if not 0 < args.k < args.n or not 0 < args.omega <= args.n:
        raise UsageError(f"infeasible parameters n={args.n} k={args.k} omega={args.omega}")
    inst = random_instance(args.n, args.k, args.omega, args.seed)
    _emit(inst.to_text(), args.out)
    return EXIT_OK


def _solve_once(inst: SdpInstance, args, seed: int) -> tuple[dict, bool]:
    algo = args.algo
    t0 = time.perf_counter()
    report: dict = {}
    if algo == "prange":
        st = prange(inst, seed, args.max_iters)
        report["stats"] = st.to_dict()
        e = st.solution
    elif algo == "lee-brickell":
        st = lee_brickell(inst, args.p, seed, args.max_iters)
        report["stats"] = st.to_dict()
        e = st.solution
    elif algo == "quantum-sim":
        from .circuits import circuit_resources, run_qisd

        run = run_qisd(inst, args.variant, seed=seed, p=args.p, backend=args.backend,
                       max_width=args.max_width, return_details=True)
        e = run.solution
        report["stats"] = {
            "attempts": run.attempts, "grover_iterations": run.iterations, "q": run.q,
            "marked": run.marked, "total": run.total, "width": run.width,
        }
        report["resources"] = circuit_resources(inst, args.variant, args.p,
                                                iterations=run.iterations).to_dict()
    else:
        inner = InnerSolver(args.inner, max_width=args.max_width, backend=args.backend)
        if algo == "hybrid-prange":
            st = hybrid_prange(inst, args.delta, inner, seed, args.max_iters)
        elif algo == "punctured":
            st = punctured_hybrid(inst, args.delta, args.p, seed, inner=inner,
                                  max_outer=args.max_iters)
        else:
            st = combined_hybrid(inst, args.delta, args.alpha, args.p, seed, inner=inner,
                                 max_attempts=args.max_iters)
        report["stats"] = st.to_dict()
        e = st.solution
    verified = inst.is_solution(e)
    report["solution"] = e.to_hex() if e is not None else None
    report["verified"] = verified
    report["elapsed_s"] = round(time.perf_counter() - t0, 6)
    return report, verified


def _solve_task(payload):
    text, args, seed = payload
    return _solve_once(SdpInstance.from_text(text), args, seed)


def cmd_solve(args) -> int:
    if args.algo not in SOLVE_ALGOS:
        raise UsageError(f"unknown algorithm {args.algo!r}; choose from {list(SOLVE_ALGOS)}")
    inst = _read_instance(args.instance)
    config = {
        "command": "solve", "instance": args.instance, "algo": args.algo, "variant": args.variant,
        "delta": args.delta, "alpha": args.alpha, "p": args.p, "seed": args.seed,
        "inner": args.inner, "backend": args.backend, "max_width": args.max_width,
        "max_iters": args.max_iters, "trials": args.trials, "jobs": args.jobs, "out": args.out,
    }
    _echo(config)
    seeds = [args.seed + i for i in range(args.trials)]
    payload = [(inst.to_text(), args, s) for s in seeds]
    if args.jobs > 1 and args.trials > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_solve_task, payload))
    else:
        results = [_solve_once(inst, args, s) for s in seeds]
    body = {"config": config, "n": inst.n, "k": inst.k, "omega": inst.omega}
    if args.trials == 1:
        body.update(results[0][0])
    else:
        body["trials"] = [dict(r, seed=s) for (r, _), s in zip(results, seeds)]
        body["solved_fraction"] = sum(v for _, v in results) / len(results)
    _emit(_dump(body), args.out)
    return EXIT_OK if all(v for _, v in results) else EXIT_UNSOLVED


def cmd_simulate(args) -> int:
    from .circuits import (
        amplified_success,
        build_amplification,
        build_qisd,
        grover_iterations,
        marked_subsets,
    )
    from .qsim import resources, run, sample

    inst = _read_instance(args.instance)
    if args.variant not in SIM_VARIANTS:
        raise UsageError(f"unknown variant {args.variant!r}; choose from {list(SIM_VARIANTS)}")
    config = {"command": "simulate", "instance": args.instance, "variant": args.variant,
              "p": args.p, "shots": args.shots, "seed": args.seed, "backend": args.backend,
              "max_width": args.max_width, "iterations": args.iterations, "out": args.out}
    _echo(config)
    bundle = build_qisd(inst, args.variant, args.p, max_width=args.max_width)
    marked, total = marked_subsets(bundle.instance, args.variant, args.p)
    q = len(marked) / total
    iters = args.iterations if args.iterations is not None else grover_iterations(q) if marked else 0
    circ = build_amplification(bundle, iters)
    state = run(circ, backend=args.backend, max_width=args.max_width)
    hist = sample(state, "b", args.shots, args.seed, circuit=circ)
    marked_keys = {"".join("1" if i in s else "0" for i in range(inst.n)) for s in marked}
    hits = sum(c for key, c in hist.items() if key in marked_keys)
    body = {
        "config": config, "n": inst.n, "k": inst.k, "omega": inst.omega,
        "q": q, "marked": len(marked), "total": total, "iterations": iters,
        "predicted_success": amplified_success(q, iters) if marked else 0.0,
        "measured_success": hits / args.shots,
        "histogram": dict(sorted(hist.items())),
        "resources": resources(circ).to_dict(),
    }
    _emit(_dump(body), args.out)
    return EXIT_OK


def _parse_grid(args) -> list[float]:
    if args.delta_list:
        try:
            return [float(x) for x in args.delta_list.split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(f"bad delta list {args.delta_list!r}") from exc
    if args.grid < 2:
        raise UsageError("--grid needs at least 2 points")
    return [float(x) for x in np.linspace(0.0, 1.0, args.grid)]


def cmd_estimate(args) -> int:
    try:
        st = get_setting(args.setting)
        algos = list(ALGORITHMS) if args.algo == "all" else [normalize_algorithm(args.algo)]
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc
    grid = _parse_grid(args)
    config = {"command": "estimate", "setting": st.name, "algo": algos, "mode": args.mode,
              "delta": grid, "jobs": args.jobs, "out": args.out, "plot": args.plot}
    _echo(config)
    try:
        curves = [curve(st, a, grid, mode=args.mode, jobs=args.jobs) for a in algos]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(curves_to_csv(curves), args.out)
    if args.plot:
        from .plotting import plot_curves

        plot_curves(curves, args.plot, title=st.name)
    return EXIT_OK


def _built_resources(n: int, k: int, variant: str, omega: int, seed: int, max_width: int | None):
    from .circuits import build_qisd, circuit_resources, cyclic_instance

    if variant == "depth_optimized_cyclic":
        if n != 2 * k:
            return None
        inst, synd = cyclic_instance(k, omega, seed)
        circ_variant = "cyclic"
    else:
        inst, synd = random_instance(n, k, omega, seed), None
        circ_variant = "width_reduced" if variant == "width_optimized" else "full"
    bundle = build_qisd(inst, circ_variant, syndromes=synd, max_width=max_width)
    rep = circuit_resources(inst, circ_variant, syndromes=synd, iterations=1)
    return {"circuit_variant": circ_variant, "width": bundle.width, "depth_one_iteration": rep.depth,
            "gate_counts": rep.gate_counts}


def cmd_resources(args) -> int:
    try:
        variant = normalize_variant(args.variant)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc
    if not 0 < args.k < args.n:
        raise UsageError(f"need 0 < k < n, got n={args.n} k={args.k}")
    omega = args.omega if args.omega is not None else 1
    config = {"command": "resources", "n": args.n, "k": args.k, "variant": variant,
              "omega": omega, "seed": args.seed, "max_width": args.max_width, "out": args.out}
    _echo(config)
    table = resource_table(args.n, args.k, variant, omega=omega)
    body = {"config": config, "closed_form": table.to_dict()}
    built = None
    if closed_form_width(args.n, args.k, variant) <= args.max_width:
        built = _built_resources(args.n, args.k, variant, omega, args.seed, args.max_width)
    body["built"] = built
    body["widths_agree"] = None if built is None else built["width"] == table.width
    if built is not None and not body["widths_agree"]:
        print(f"warning: built width {built['width']} != closed form {table.width}", file=sys.stderr)
    _emit(_dump(body), args.out)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qisd", description="Quantum and hybrid information-set decoding toolkit.")
    ap.add_argument("--version", action="version", version=f"qisd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a planted syndrome-decoding instance")
    g.add_argument("n", type=int)
    g.add_argument("k", type=int)
    g.add_argument("omega", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--algo", default="prange", choices=SOLVE_ALGOS)
    s.add_argument("--variant", default="width_reduced", choices=SIM_VARIANTS)
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--p", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--inner", default="oracle", choices=("oracle", "simulate"))
    s.add_argument("--backend", default="sparse", choices=("dense", "sparse"))
    s.add_argument("--max-width", type=int, default=40)
    s.add_argument("--max-iters", type=int, default=100_000)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    m = sub.add_parser("simulate", help="simulate the amplified circuit and sample the subset register")
    m.add_argument("instance")
    m.add_argument("--variant", default="width_reduced", choices=SIM_VARIANTS)
    m.add_argument("--p", type=int, default=0)
    m.add_argument("--iterations", type=int)
    m.add_argument("--shots", type=int, default=1000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--backend", default="sparse", choices=("dense", "sparse"))
    m.add_argument("--max-width", type=int, default=40)
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="trade-off curves t(delta) as CSV")
    e.add_argument("setting", help=f"one of {sorted(PRESETS)}")
    e.add_argument("--algo", default="all", help="hybrid-prange, punctured, combined or all")
    e.add_argument("--delta", dest="delta_list", help="comma-separated delta values")
    e.add_argument("--grid", type=int, default=101, help="uniform grid size on [0, 1]")
    e.add_argument("--mode", default="asymptotic", choices=("asymptotic", "concrete"))
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--out")
    e.add_argument("--plot", help="also write a PNG of the curves")
    e.set_defaults(func=cmd_estimate)

    r = sub.add_parser("resources", help="closed-form and built circuit widths/depths")
    r.add_argument("n", type=int)
    r.add_argument("k", type=int)
    r.add_argument("--variant", default="width-optimized")
    r.add_argument("--omega", type=int)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-width", type=int, default=60)
    r.add_argument("--out")
    r.set_defaults(func=cmd_resources)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qisd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WidthLimitError as exc:
        print(f"qisd: width limit: {exc}", file=sys.stderr)
        print(json.dumps({"required_width": exc.required, "limit": exc.limit}), file=sys.stderr)
        return EXIT_LIMIT
    except (HybridParameterError, ValueError) as exc:
        print(f"qisd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
