"""Command-line interface.

Subcommands:

* ``build``: construct a code, print its parameters, optionally dump the
  matching graph for a schedule as structured text.
* ``enumerate-faults``: list the single-fault table of a syndrome-extraction
  circuit under a noise model.
* ``run``: seeded Monte Carlo sweep over physical error rates, CSV output.
* ``fit``: threshold estimation from result CSVs.
* ``solve-homomorphisms``: cyclic scheduling homomorphisms for a {r,s} group.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .harness import (
    ConfigError,
    ExperimentConfig,
    NoCrossingInRange,
    bias_threshold_combine,
    build_circuit,
    build_code,
    fit_threshold,
    read_rows,
    run_experiment,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; those are config errors here.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_code_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", default="toric",
                   choices=["toric", "planar", "hyperbolic", "semi_hyperbolic"])
    p.add_argument("--L", type=int, default=None, help="lattice size for toric/planar")
    p.add_argument("--group", default=None,
                   help="bundled group name or JSON path for hyperbolic families")
    p.add_argument("--l", type=int, default=1, help="semi-hyperbolic refinement")


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schedule", default="ZX", help="schedule word, e.g. ZX or ZZXX")
    p.add_argument("--inhomogeneous", action="store_true",
                   help="alternating-row two-phase schedule (planar only)")
    p.add_argument("--no-parallelised", dest="parallelised", action="store_false",
                   help="measure gauge factors sequentially instead of in parallel")
    p.add_argument("--no-gauge-fixing", dest="gauge_fixing", action="store_false",
                   help="keep detectors merged at stabiliser level in every round")
    p.add_argument("--rounds", type=int, default=1)


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise", default="depolarising",
                   choices=["depolarising", "independent"])
    p.add_argument("--eta", type=float, default=None,
                   help="Z/X bias for independent noise (inf allowed)")


def _build_parser() -> _Parser:
    top = _Parser(prog="gaugefix", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a code, optionally dump a matching graph")
    _add_code_flags(b)
    _add_schedule_flags(b)
    _add_noise_flags(b)
    b.add_argument("--dump-graph", choices=["x", "z"], default=None,
                   help="dump this basis' matching graph as structured text")
    b.add_argument("--p", type=float, default=0.001,
                   help="error rate used for graph edge weights")
    b.add_argument("--distance", action="store_true",
                   help="also compute code distances (slow for large codes)")
    b.add_argument("--output", default=None, help="write dump here instead of stdout")

    e = sub.add_parser("enumerate-faults", help="single-fault table of a circuit")
    _add_code_flags(e)
    _add_schedule_flags(e)
    _add_noise_flags(e)
    e.add_argument("--p", type=float, default=0.001)
    e.add_argument("--output", default=None)

    r = sub.add_parser("run", help="Monte Carlo sweep")
    _add_code_flags(r)
    _add_schedule_flags(r)
    _add_noise_flags(r)
    r.add_argument("--experiment", default="circuit",
                   choices=["circuit", "perfect", "phenomenological"])
    r.add_argument("--fixed", action="store_true",
                   help="abstract graphs: per-triangle checks instead of stabilisers")
    r.add_argument("--p", dest="p_values", type=float, nargs="+", required=True,
                   help="error rates to sweep")
    r.add_argument("--trials", type=int, default=1000)
    r.add_argument("--m", type=int, default=20, help="local matching neighbourhood size")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--basis", default="both", choices=["both", "z", "x"])
    r.add_argument("--workers", type=int, default=None,
                   help="process count (default: GAUGEFIX_WORKERS or 1)")
    r.add_argument("--output", default=None, help="CSV path (JSON sidecar written too)")

    f = sub.add_parser("fit", help="threshold fit from result CSVs")
    f.add_argument("csv", nargs="+", help="result CSV files")
    f.add_argument("--model", default="crossing",
                   choices=["crossing", "critical_exponent"])
    f.add_argument("--nu", type=float, default=None,
                   help="pin the critical exponent instead of fitting it")
    f.add_argument("--basis", default="z", choices=["z", "x"])
    f.add_argument("--combine-bias", type=float, default=None, metavar="ETA",
                   help="treat the two CSV groups as Z/X thresholds and combine")

    s = sub.add_parser("solve-homomorphisms",
                       help="cyclic scheduling homomorphisms for a {r,s} group")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--s", type=int, required=True)
    s.add_argument("--n-max", type=int, default=None, help="default 5*max(r,s)")

    return top


def _config_from_args(args: argparse.Namespace, **overrides) -> ExperimentConfig:
    fields = dict(
        family=args.family, L=args.L, group=args.group, l=args.l,
        schedule=args.schedule, inhomogeneous=args.inhomogeneous,
        parallelised=args.parallelised, gauge_fixing=args.gauge_fixing,
        noise=args.noise,
        eta=args.eta, rounds=args.rounds,
    )
    fields.update(overrides)
    return ExperimentConfig(**fields)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_build(args: argparse.Namespace) -> int:
    config = _config_from_args(args, p_values=(args.p,), experiment="circuit")
    config.validate()
    code, descriptor = build_code(config)
    print("code %s: [[%d, %d]] with %d stabilisers, %d gauge ops"
          % (descriptor, code.n, code.k, len(code.stabilisers), len(code.gauge_ops)))
    if args.distance:
        print("distance: d_z=%d d_x=%d" % (code.distance("Z"), code.distance("X")))
    if args.dump_graph:
        from .decoder import build_matching_graph
        from .noise_sim import depolarising, independent

        circuit = build_circuit(config, code)
        noise = (independent(args.p, args.eta) if args.noise == "independent"
                 else depolarising(args.p))
        graph = build_matching_graph(code, circuit, noise, args.dump_graph,
                                     args.gauge_fixing)
        _emit(graph.dump(), args.output)
    return 0


def _cmd_enumerate_faults(args: argparse.Namespace) -> int:
    from .noise_sim import depolarising, enumerate_single_faults, independent

    config = _config_from_args(args, p_values=(args.p,), experiment="circuit")
    config.validate()
    code, _ = build_code(config)
    circuit = build_circuit(config, code)
    noise = (independent(args.p, args.eta) if args.noise == "independent"
             else depolarising(args.p))
    records = enumerate_single_faults(circuit, noise)
    lines = ["mechanism,gate_index,kind,owner_basis,time,qubits,pauli,"
             "probability,meas_mask,residual_x,residual_z"]
    for rec in records:
        lines.append("%d,%d,%s,%s,%d,%s,%s,%.9g,%d,%d,%d" % (
            rec.mechanism, rec.gate_index, rec.kind, rec.owner_basis or "",
            rec.time, ";".join(map(str, rec.qubits)), rec.pauli,
            rec.probability, rec.meas_mask, rec.residual_x, rec.residual_z))
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(
        args, experiment=args.experiment, fixed=args.fixed,
        p_values=tuple(args.p_values), trials=args.trials, m=args.m,
        seed=args.seed, basis=args.basis, workers=args.workers,
        output=args.output,
    )
    rows = run_experiment(config)
    if not args.output:
        from .harness import CSV_COLUMNS
        print(",".join(CSV_COLUMNS))
        for row in rows:
            print(",".join(str(row.get(c, "")) for c in CSV_COLUMNS))
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    groups = [read_rows(path) for path in args.csv]
    rate_key = "rate_%s" % args.basis
    if args.combine_bias is not None:
        if len(groups) != 2:
            raise ConfigError("--combine-bias needs exactly two CSV files (Z, X)")
        pz, ez = fit_threshold(groups[0], model=args.model, nu=args.nu, rate_key="rate_z")
        px, ex = fit_threshold(groups[1], model=args.model, nu=args.nu, rate_key="rate_x")
        total = bias_threshold_combine(pz, px, args.combine_bias)
        print("p_z_th = %.6g +- %.2g" % (pz, ez))
        print("p_x_th = %.6g +- %.2g" % (px, ex))
        print("p_total_th(eta=%g) = %.6g" % (args.combine_bias, total))
        return 0
    rows = [row for group in groups for row in group]
    pth, err = fit_threshold(rows, model=args.model, nu=args.nu, rate_key=rate_key)
    print("p_th = %.6g +- %.2g" % (pth, err))
    return 0


def _cmd_solve_homomorphisms(args: argparse.Namespace) -> int:
    from .symmetry import solve_cyclic_scheduling

    if args.r < 3 or args.s < 3:
        raise ConfigError("need r, s >= 3")
    n_max = args.n_max if args.n_max is not None else 5 * max(args.r, args.s)
    solutions = solve_cyclic_scheduling(args.r, args.s, n_max)
    print("n,x,y")
    for sol in solutions:
        print("%d,%d,%d" % (sol.n, sol.x, sol.y))
    return 0


_COMMANDS = {
    "build": _cmd_build,
    "enumerate-faults": _cmd_enumerate_faults,
    "run": _cmd_run,
    "fit": _cmd_fit,
    "solve-homomorphisms": _cmd_solve_homomorphisms,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 1
    except NoCrossingInRange as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (OSError, RuntimeError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
