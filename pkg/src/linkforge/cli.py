"""Command-line interface: synth, trace, validate, export, serve."""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time

import numpy as np

from .annealing import SAConfig, run as sa_run
from .branchbound import Budget, solution_of, solve_parallel
from .kinematics import ARBITRARY_ORDER, FIXED_ORDER, LINEAR, ROTARY, TargetCurve, trace
from .model import (
    SynthesisConfig,
    build_geometric_exact,
    build_micp_relaxation,
    build_minlp,
    exact_assignment,
    export_model,
    micp_assignment,
    validate as validate_model,
)
from .serialize import (
    SchemaError,
    linkage_from_json,
    read_json,
    target_from_json,
    trajectory_to_json,
    write_json,
)
from .solution import Solution
from .svg import write_svg
from .targets import default_box, default_lambda, resample_closed

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_SOLUTION = 2

_DURATION = re.compile(r"^(\d+(?:\.\d+)?)(ms|s|m|h)?$")
_SCALE = {"ms": 1e-3, "s": 1.0, "m": 60.0, "h": 3600.0, None: 1.0}


def parse_duration(text):
    m = _DURATION.match(text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse duration {text!r}")
    return float(m.group(1)) * _SCALE[m.group(2)]


def parse_box(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("box needs x0,y0,x1,y1")
    x0, y0, x1, y1 = (float(p) for p in parts)
    if x1 <= x0 or y1 <= y0:
        raise argparse.ArgumentTypeError("box corners must be ordered")
    return (x0, y0, x1, y1)


def load_target(path, T, arbitrary):
    """Target file: either an exact T-sample curve or a raw sketch to resample."""
    obj = read_json(path)
    mode = ARBITRARY_ORDER if arbitrary else obj.get("mode", FIXED_ORDER)
    samples = obj.get("samples")
    if not isinstance(samples, list) or len(samples) < 2:
        raise SchemaError("target.samples", "expected a list of [x, y] points")
    if len(samples) == T and "mode" in obj and not arbitrary:
        return target_from_json(obj)
    pts = resample_closed(np.asarray(samples, dtype=float), T)
    return TargetCurve(samples=pts, mode=mode).validate()


def _progress_writer(path):
    if path is None:
        return None, None
    fh = open(path, "w", encoding="utf-8")

    def write(record):
        fh.write(json.dumps(record))
        fh.write("\n")

    return write, fh


def cmd_synth(args):
    if args.K < 2:
        print("error: --K must be at least 2 (motor plus end-effector slot)",
              file=sys.stderr)
        return EXIT_USAGE
    if args.linear_motor and args.solver == "sa":
        print("error: --linear-motor requires --solver bb (the annealing chain "
              "mutates rotary structures only)", file=sys.stderr)
        return EXIT_USAGE
    target = load_target(args.target, args.T, args.arbitrary_order)
    lam = args.lam if args.lam is not None else default_lambda(target.samples)
    progress, fh = _progress_writer(args.progress_log)
    deadline = time.time() + args.time_limit if args.time_limit else None

    def out_of_time():
        return deadline is not None and time.time() > deadline

    solution = None
    if args.solver == "sa":
        B, center = default_box(target.samples)
        cfg = SAConfig(i_max=args.iterations, seed=args.seed, max_nodes=args.K,
                       samples=args.T, lam=lam, box_side=B, box_center=center)
        out = sa_run(cfg, target, progress=progress, should_stop=out_of_time)
        solution = out.solution(target, seed=args.seed)
    else:
        cfg = SynthesisConfig.for_target(
            target, K=args.K, S=args.S, lam=lam,
            motor_kind=LINEAR if args.linear_motor else ROTARY,
            node_boxes=tuple(args.box or ()))
        budget = Budget(node_limit=args.node_limit,
                        time_limit=args.time_limit,
                        objective_target=args.objective_target)
        log_sink = None
        if progress is not None:
            class _Sink(list):
                def append(self, entry):
                    progress(entry)

            log_sink = _Sink()
        result = solve_parallel(cfg, target, budget, workers=args.workers,
                                log_sink=log_sink)
        if result.incumbent is None:
            if fh:
                fh.close()
            print("no feasible solution found within budget", file=sys.stderr)
            return EXIT_NO_SOLUTION
        solution = solution_of(result, cfg, target)
        solution.seed = args.seed
    if fh:
        fh.close()
    if not math.isfinite(solution.objective_total):
        print("no feasible solution found", file=sys.stderr)
        return EXIT_NO_SOLUTION
    write_json(args.out, solution.to_json())
    if args.svg:
        write_svg(args.svg, solution.trajectory, solution.linkage)
    print(f"solver={solution.solver} objective={solution.objective_total:.6g} "
          f"nodes={solution.linkage.n_nodes} -> {args.out}")
    return EXIT_OK


def cmd_trace(args):
    linkage = linkage_from_json(read_json(args.linkage))
    traj = trace(linkage, args.samples)
    if args.out:
        write_json(args.out, trajectory_to_json(traj))
    if args.svg:
        write_svg(args.svg, traj, linkage)
    if not args.out and not args.svg:
        json.dump(trajectory_to_json(traj), sys.stdout)
        print()
    return EXIT_OK


def cmd_validate(args):
    sol = Solution.from_json(read_json(args.solution))
    cfg_echo = sol.config or {}
    cfg = SynthesisConfig(
        K=int(cfg_echo.get("K", max(2, sol.linkage.n_nodes))),
        T=sol.target.n_samples,
        S=int(cfg_echo.get("S", 8)),
        box_side=sol.linkage.box_side,
        box_center=tuple(sol.linkage.box_center),
        lam=float(cfg_echo.get("lambda", 0.0)),
        curve_mode=sol.target.mode,
        motor_kind=sol.linkage.motor.kind,
        target_samples=tuple(map(tuple, sol.target.samples)))
    if sol.linkage.n_nodes == 1:
        print("motor-only solution: kinematic check only")
        trace(sol.linkage, cfg.T)
        return EXIT_OK
    if args.model == "exact":
        model = build_geometric_exact(cfg)
        values = exact_assignment(cfg, sol.linkage)
    else:
        model = build_micp_relaxation(cfg)
        values = micp_assignment(cfg, sol.linkage)
    report = validate_model(model, values, tol=args.tol)
    if report.satisfied:
        print(f"satisfied: {args.model} model, {len(model.linear) + len(model.quadratic)}"
              f" constraints checked")
        return EXIT_OK
    print(f"violated: {len(report.violations)} constraints "
          f"(worst scaled residual {report.worst():.3e})")
    for v in report.violations[:10]:
        print(f"  {v.constraint}: {v.kind} residual {v.residual:.3e}")
    return EXIT_NO_SOLUTION


def cmd_export(args):
    target = load_target(args.target, args.T, args.arbitrary_order)
    lam = args.lam if args.lam is not None else default_lambda(target.samples)
    cfg = SynthesisConfig.for_target(
        target, K=args.K, S=args.S, lam=lam,
        motor_kind=LINEAR if args.linear_motor else ROTARY,
        node_boxes=tuple(args.box or ()))
    model = build_micp_relaxation(cfg) if args.model == "micp" else build_minlp(cfg)
    data = export_model(model, args.format, inline_sos=args.inline_sos)
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"{args.model} model: {len(model.variables)} variables, "
          f"{model.binary_count} binaries -> {args.out}")
    return EXIT_OK


def cmd_serve(args):
    from .service import make_server

    httpd, service = make_server(port=args.port, workers=args.workers,
                                 queue_limit=args.queue_limit)
    print(f"listening on http://127.0.0.1:{httpd.server_address[1]}", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.shutdown()
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="linkforge",
                                description="Planar linkage synthesis toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="search a linkage for a target curve")
    synth.add_argument("--target", required=True)
    synth.add_argument("--solver", choices=("sa", "bb"), default="sa")
    synth.add_argument("--K", type=int, default=7)
    synth.add_argument("--T", type=int, default=20)
    synth.add_argument("--S", type=int, default=8)
    synth.add_argument("--lambda", dest="lam", type=float, default=None)
    synth.add_argument("--box", action="append", type=parse_box,
                       help="x0,y0,x1,y1 constraint box for non-end-effector nodes"
                            " (repeatable)")
    synth.add_argument("--arbitrary-order", action="store_true")
    synth.add_argument("--linear-motor", action="store_true")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--iterations", type=int, default=20000,
                       help="SA iteration budget")
    synth.add_argument("--node-limit", type=int, default=2000)
    synth.add_argument("--time-limit", type=parse_duration, default=300.0)
    synth.add_argument("--objective-target", type=float, default=None)
    synth.add_argument("--workers", type=int, default=1)
    synth.add_argument("--progress-log", default=None)
    synth.add_argument("--out", default="solution.json")
    synth.add_argument("--svg", default=None)
    synth.set_defaults(func=cmd_synth)

    tr = sub.add_parser("trace", help="trace a linkage and export its trajectory")
    tr.add_argument("--linkage", required=True)
    tr.add_argument("--samples", type=int, default=64)
    tr.add_argument("--out", default=None)
    tr.add_argument("--svg", default=None)
    tr.set_defaults(func=cmd_trace)

    va = sub.add_parser("validate", help="check a solution against a model")
    va.add_argument("--solution", required=True)
    va.add_argument("--model", choices=("exact", "micp"), default="exact")
    va.add_argument("--tol", type=float, default=1e-5)
    va.set_defaults(func=cmd_validate)

    ex = sub.add_parser("export", help="build and export a synthesis model")
    ex.add_argument("--target", required=True)
    ex.add_argument("--model", choices=("micp", "minlp"), default="micp")
    ex.add_argument("--format", choices=("json", "lp"), default="json")
    ex.add_argument("--K", type=int, default=7)
    ex.add_argument("--T", type=int, default=20)
    ex.add_argument("--S", type=int, default=8)
    ex.add_argument("--lambda", dest="lam", type=float, default=None)
    ex.add_argument("--box", action="append", type=parse_box)
    ex.add_argument("--arbitrary-order", action="store_true")
    ex.add_argument("--linear-motor", action="store_true")
    ex.add_argument("--inline-sos", action="store_true")
    ex.add_argument("--out", required=True)
    ex.set_defaults(func=cmd_export)

    sv = sub.add_parser("serve", help="run the HTTP job service")
    sv.add_argument("--port", type=int, default=8080)
    sv.add_argument("--workers", type=int, default=None)
    sv.add_argument("--queue-limit", type=int, default=16)
    sv.set_defaults(func=cmd_serve)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
