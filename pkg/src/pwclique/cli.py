"""Command-line entry point: ``pwclique <command> ...``.

Exit codes: 0 success, 2 a solve hit its time limit, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import BenchConfigError, load_bench_config, run_benchmark
from .correspondence import (
    METRICS,
    CorrespondenceError,
    build_consistency_graph,
    build_inconsistency_graph,
    read_correspondences,
    read_point_cloud,
)
from .graph import GraphInputError, read_dimacs, write_dimacs
from .mipexport import export_mc, export_mvc
from .pipeline import auto_normalise, register, register_ransac
from .ransac import RansacConfig, RansacError
from .registration import RegistrationError, RigidTransform
from .solvers import SOLVERS, solve
from .synth import SynthConfig, SynthConfigError, generate_instance, write_instance

EXIT_OK = 0
EXIT_TIMEOUT = 2
EXIT_INPUT = 3

INPUT_ERRORS = (
    OSError,
    GraphInputError,
    CorrespondenceError,
    RegistrationError,
    SynthConfigError,
    BenchConfigError,
    RansacError,
    ValueError,
)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    g = read_dimacs(args.graph)
    res = solve(g, args.algorithm, timeout=args.timeout_secs, trace=args.trace)
    if args.json:
        d = res.to_dict()
        if args.trace:
            d["trace"] = [ev.format() for ev in res.trace]
        text = json.dumps(d, indent=1) + "\n"
    else:
        lines = [
            f"size {res.size}",
            "members " + " ".join(map(str, res.best.one_based())),
            f"algorithm {res.algorithm}",
            f"status {'optimal' if res.complete else 'timeout'}",
            f"nodes {res.nodes_expanded}",
            f"colour_prunes {res.colour_prunes}",
            f"skip_prunes {res.skip_prunes}",
            f"wall_time {res.wall_time:.6f}",
        ]
        if args.trace:
            lines += [ev.format() for ev in res.trace]
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK if res.complete else EXIT_TIMEOUT


def _load_correspondences(args):
    """Correspondences with epsilon set; normalised into the cube when epsilon is auto."""
    C = read_correspondences(args.correspondences)
    T = RigidTransform.from_text(Path(args.gt).read_text(encoding="utf-8")) if getattr(args, "gt", None) else None
    if args.epsilon == "auto":
        if not (args.cloud_x and args.cloud_y):
            raise ValueError("--epsilon auto needs --cloud-x and --cloud-y")
        C, norm = auto_normalise(C, read_point_cloud(args.cloud_x), read_point_cloud(args.cloud_y))
        if T is not None:
            T = norm.transform(T)
    else:
        C = C.with_epsilon(float(args.epsilon))
    return C, T


def cmd_register(args) -> int:
    C, T = _load_correspondences(args)
    if len(C) < 3:
        report = {
            "n": len(C),
            "epsilon": C.epsilon,
            "clique_size": 0,
            "transform": None,
            "flags": ["insufficient clique for estimation"],
        }
        _emit(json.dumps(report, indent=1) + "\n", args.output)
        return EXIT_OK
    if args.algorithm == "ransac":
        cfg = RansacConfig(confidence=args.confidence, rng_seed=args.seed, max_iterations=args.max_iterations)
        rep = register_ransac(C, cfg, T)
    else:
        rep = register(C, args.algorithm, timeout=args.timeout_secs, T_gt=T, metric=args.metric)
    d = rep.to_dict()
    d["metric"] = args.metric
    d["epsilon_source"] = "auto (cube-normalised units)" if args.epsilon == "auto" else "given"
    _emit(json.dumps(d, indent=1) + "\n", args.output)
    return EXIT_OK if rep.complete or args.algorithm == "ransac" else EXIT_TIMEOUT


def cmd_bench(args) -> int:
    cfg = load_bench_config(args.config)
    if args.timeout_secs is not None:
        cfg.timeout_secs = args.timeout_secs
    if args.runs is not None:
        cfg.ransac_runs = args.runs
    if args.seed is not None:
        cfg.seed = args.seed
    report = run_benchmark(cfg)
    out = Path(args.output) if args.output else Path(args.config).with_suffix("")
    csv_path = out.with_name(out.name + ".csv")
    json_path = out.with_name(out.name + ".json")
    csv_path.write_text(report.to_csv(), encoding="utf-8")
    json_path.write_text(report.to_json(), encoding="utf-8")
    sys.stdout.write(report.to_csv())
    print(f"wrote {csv_path} and {json_path}", file=sys.stderr)
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = SynthConfig(
        n_inliers=args.inliers,
        n_outliers=args.outliers,
        noise_sigma=args.sigma,
        sigma_over_epsilon=args.sigma_over_epsilon,
        epsilon=None if args.epsilon in (None, "auto") else float(args.epsilon),
        rng_seed=args.seed,
        scan_points=args.scan_points,
        metric=args.metric,
    )
    inst = generate_instance(cfg)
    paths = write_instance(inst, args.output, args.stem)
    for p in paths.values():
        print(p)
    return EXIT_OK


def cmd_export_mip(args) -> int:
    g = read_dimacs(args.graph)
    _emit(export_mc(g) if args.kind == "mc" else export_mvc(g), args.output)
    return EXIT_OK


def cmd_build_graph(args) -> int:
    C, _ = _load_correspondences(args)
    build = build_inconsistency_graph if args.inconsistency else build_consistency_graph
    g = build(C, args.metric)
    kind = "inconsistency" if args.inconsistency else "consistency"
    _emit(write_dimacs(g, comment=f"{kind} graph, epsilon={C.epsilon!r}, metric={args.metric}"), args.output)
    return EXIT_OK


def _epsilon_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--epsilon", required=required, help="consistency threshold, or 'auto' (needs both clouds)")
    p.add_argument("--cloud-x", help="source point cloud (x y z per line), for --epsilon auto")
    p.add_argument("--cloud-y", help="target point cloud, for --epsilon auto")
    p.add_argument("--metric", choices=METRICS, default="length")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; argparse's own code 2 would read as a timeout
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pwclique", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="maximum clique of a DIMACS graph")
    p.add_argument("graph")
    p.add_argument("--algorithm", choices=sorted(SOLVERS), default="pmc")
    p.add_argument("--timeout-secs", type=float, default=None)
    p.add_argument("--trace", action="store_true", help="log every search node")
    p.add_argument("--json", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("register", help="estimate a rigid transform from correspondences")
    p.add_argument("correspondences")
    _epsilon_flags(p)
    p.add_argument("--algorithm", choices=[*sorted(SOLVERS), "ransac"], default="pmc")
    p.add_argument("--gt", help="ground-truth 4x4 transform file")
    p.add_argument("--timeout-secs", type=float, default=None)
    p.add_argument("--seed", type=int, default=0, help="RANSAC seed")
    p.add_argument("--confidence", type=float, default=0.99, help="RANSAC stopping confidence")
    p.add_argument("--max-iterations", type=int, default=10_000_000, help="RANSAC iteration cap")
    p.add_argument("--output")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("bench", help="run a benchmark config; writes CSV and JSON")
    p.add_argument("config")
    p.add_argument("--timeout-secs", type=float, default=None)
    p.add_argument("--runs", type=int, default=None, help="RANSAC runs per instance")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", help="output stem; .csv and .json are appended")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a synthetic instance")
    p.add_argument("--inliers", type=int, required=True)
    p.add_argument("--outliers", type=int, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--sigma-over-epsilon", type=float, default=None)
    p.add_argument("--epsilon", default=None, help="fixed threshold; default derives it from the clouds")
    p.add_argument("--scan-points", type=int, default=None)
    p.add_argument("--metric", choices=METRICS, default="length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stem", default="instance")
    p.add_argument("--output", default=".", help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("export-mip", help="write the MC or MVC program in LP format")
    p.add_argument("graph")
    p.add_argument("--kind", choices=("mc", "mvc"), default="mc")
    p.add_argument("--output")
    p.set_defaults(func=cmd_export_mip)

    p = sub.add_parser("build-graph", help="consistency graph of a correspondence file as DIMACS")
    p.add_argument("correspondences")
    _epsilon_flags(p)
    p.add_argument("--inconsistency", action="store_true", help="write the complement instead")
    p.add_argument("--output")
    p.set_defaults(func=cmd_build_graph)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
