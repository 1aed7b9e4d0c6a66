"""Benchmark harness: instances x algorithms, one table row per cell.

The config is INI-style text::

    [bench]
    algorithms = mcq, pmc, ransac
    timeout_secs = 60
    ransac_runs = 5
    ransac_confidence = 0.99
    ransac_max_iterations = 10000000

    [instance small]
    n_inliers = 20
    n_outliers = 980
    sigma_over_epsilon = 0.125
    scan_points = 20000
    seed = 1

    [instance scan]
    correspondences = data/scan.corr
    epsilon = auto
    cloud_x = data/scan_x.xyz
    cloud_y = data/scan_y.xyz
    ground_truth = data/scan.gt

    [instance hard]
    graph = data/hard.clq

Relative paths resolve against the config file's directory. A ``graph``
instance is a bare DIMACS file: it is solved, with no registration columns.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .correspondence import read_correspondences, read_point_cloud
from .graph import complement, read_dimacs
from .pipeline import auto_normalise, register, register_ransac
from .ransac import DEFAULT_MAX_ITERATIONS, RansacConfig
from .registration import RigidTransform
from .solvers import SOLVERS, solve
from .synth import SynthConfig, generate_instance

SCHEMA_VERSION = 1
TIMEOUT_MARK = "--"
ALGORITHMS = (*SOLVERS, "ransac")

COLUMNS = (
    "instance",
    "algorithm",
    "N",
    "outlier_ratio",
    "consistency_V",
    "consistency_E",
    "inconsistency_V",
    "inconsistency_E",
    "clique_size",
    "ang_err_deg",
    "tr_err",
    "wall_time",
    "status",
    "runs",
    "iterations",
    "error",
)


class BenchConfigError(ValueError):
    pass


@dataclass
class InstanceSpec:
    name: str
    options: dict[str, str]


@dataclass
class BenchConfig:
    algorithms: list[str]
    timeout_secs: float | None = None
    ransac_runs: int = 1
    ransac_confidence: float = 0.99
    ransac_max_iterations: int | None = DEFAULT_MAX_ITERATIONS
    ransac_threshold: float | None = None
    seed: int = 0
    metric: str = "length"
    instances: list[InstanceSpec] = field(default_factory=list)
    base_dir: Path = Path(".")


def _opt_float(v: str | None) -> float | None:
    return None if v is None or v.strip().lower() in ("", "none") else float(v)


def parse_bench_config(text: str, base_dir=".") -> BenchConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise BenchConfigError(str(exc)) from None
    if not cp.has_section("bench"):
        raise BenchConfigError("missing [bench] section")
    b = cp["bench"]
    algs = [a.strip() for a in b.get("algorithms", "mcq, pmc").split(",") if a.strip()]
    bad = [a for a in algs if a not in ALGORITHMS]
    if bad:
        raise BenchConfigError(f"unknown algorithms {bad}; choose from {list(ALGORITHMS)}")
    try:
        cap = b.get("ransac_max_iterations", str(DEFAULT_MAX_ITERATIONS))
        cfg = BenchConfig(
            algorithms=algs,
            timeout_secs=_opt_float(b.get("timeout_secs")),
            ransac_runs=b.getint("ransac_runs", 1),
            ransac_confidence=b.getfloat("ransac_confidence", 0.99),
            ransac_max_iterations=None if cap.strip().lower() in ("none", "") else int(float(cap)),
            ransac_threshold=_opt_float(b.get("ransac_threshold")),
            seed=b.getint("seed", 0),
            metric=b.get("metric", "length"),
            base_dir=Path(base_dir),
        )
    except ValueError as exc:
        raise BenchConfigError(f"[bench]: {exc}") from None
    if cfg.ransac_runs < 1:
        raise BenchConfigError("ransac_runs must be at least 1")
    for section in cp.sections():
        if section == "bench":
            continue
        kind, _, name = section.partition(" ")
        if kind != "instance" or not name.strip():
            raise BenchConfigError(f"unexpected section [{section}]; use [instance <name>]")
        cfg.instances.append(InstanceSpec(name.strip(), dict(cp[section])))
    if not cfg.instances:
        raise BenchConfigError("no [instance ...] sections")
    return cfg


def load_bench_config(path) -> BenchConfig:
    p = Path(path)
    return parse_bench_config(p.read_text(encoding="utf-8"), p.parent)


def _load_instance(spec: InstanceSpec, cfg: BenchConfig):
    """Returns ``(correspondences or None, ground truth or None, graph or None)``."""
    o = spec.options
    path = lambda key: cfg.base_dir / o[key]  # noqa: E731
    if "graph" in o:
        return None, None, read_dimacs(path("graph"))
    if "correspondences" in o:
        C = read_correspondences(path("correspondences"))
        T = RigidTransform.from_text(path("ground_truth").read_text(encoding="utf-8")) if "ground_truth" in o else None
        eps = o.get("epsilon", "auto")
        if eps.strip().lower() == "auto":
            if "cloud_x" not in o or "cloud_y" not in o:
                raise BenchConfigError(f"instance {spec.name}: epsilon=auto needs cloud_x and cloud_y")
            C, norm = auto_normalise(C, read_point_cloud(path("cloud_x")), read_point_cloud(path("cloud_y")))
            T = None if T is None else norm.transform(T)
        else:
            C = C.with_epsilon(float(eps))
        return C, T, None
    syn = SynthConfig(
        n_inliers=int(o["n_inliers"]),
        n_outliers=int(o["n_outliers"]),
        noise_sigma=float(o.get("noise_sigma", 0.0)),
        rng_seed=int(o.get("seed", cfg.seed)),
        epsilon=_opt_float(o.get("epsilon")),
        sigma_over_epsilon=_opt_float(o.get("sigma_over_epsilon")),
        scan_points=int(o["scan_points"]) if "scan_points" in o else None,
        metric=cfg.metric,
    )
    C, T = generate_instance(syn)
    return C, T, None


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


@dataclass
class BenchmarkReport:
    rows: list[dict]
    config: dict = field(default_factory=dict)
    version: int = SCHEMA_VERSION

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            out = []
            for c in COLUMNS:
                if c == "wall_time" and r["status"] == "timeout":
                    out.append(TIMEOUT_MARK)
                else:
                    out.append(_fmt(r.get(c)))
            w.writerow(out)
        return buf.getvalue()

    def to_json(self, include_times: bool = True) -> str:
        rows = self.rows if include_times else [{k: v for k, v in r.items() if k not in ("wall_time", "run_times")} for r in self.rows]
        return json.dumps({"schema_version": self.version, "config": self.config, "rows": rows}, indent=1, sort_keys=True) + "\n"


def _row(name: str, algorithm: str, **kw) -> dict:
    row = {c: None for c in COLUMNS}
    row.update(instance=name, algorithm=algorithm, status="ok", runs=1)
    row.update(kw)
    return row


def _error_row(name: str, alg: str, exc: Exception) -> dict:
    return _row(name, alg, status="error", error=f"{type(exc).__name__}: {exc}")


def _solve_cells(spec: InstanceSpec, g, cfg: BenchConfig) -> list[dict]:
    rows = []
    base = dict(
        N=g.n,
        consistency_V=g.n,
        consistency_E=g.num_edges,
        inconsistency_V=g.n,
        inconsistency_E=complement(g).num_edges,
    )
    for alg in cfg.algorithms:
        if alg == "ransac":
            rows.append(_row(spec.name, alg, status="error", error="ransac needs correspondences", **base))
            continue
        try:
            res = solve(g, alg, timeout=cfg.timeout_secs)
        except Exception as exc:
            rows.append(_error_row(spec.name, alg, exc))
            continue
        rows.append(
            _row(
                spec.name,
                alg,
                clique_size=res.size,
                wall_time=res.wall_time,
                status="ok" if res.complete else "timeout",
                **base,
            )
        )
    return rows


def _registration_cells(spec: InstanceSpec, C, T, cfg: BenchConfig) -> list[dict]:
    rows = []
    for alg in cfg.algorithms:
        try:
            rep, extra, status = _registration_cell(C, T, alg, cfg)
        except Exception as exc:
            rows.append(_error_row(spec.name, alg, exc))
            continue
        n = len(C)
        rows.append(
            _row(
                spec.name,
                alg,
                N=n,
                outlier_ratio=rep.outlier_ratio,
                consistency_V=n,
                consistency_E=rep.edges if alg != "ransac" else None,
                inconsistency_V=n,
                inconsistency_E=rep.inconsistency_edges if alg != "ransac" else None,
                clique_size=rep.size,
                ang_err_deg=rep.ang_err,
                tr_err=rep.tr_err,
                status=status,
                iterations=rep.iterations,
                error="; ".join(f for f in rep.flags if f != "timeout") or None,
                **extra,
            )
        )
    # RANSAC rows borrow graph sizes from a solver row of the same instance
    solved = next((r for r in rows if r["algorithm"] != "ransac" and r["status"] != "error"), None)
    for r in rows:
        if r["algorithm"] == "ransac" and solved is not None:
            r["consistency_E"], r["inconsistency_E"] = solved["consistency_E"], solved["inconsistency_E"]
    return rows


def _registration_cell(C, T, alg: str, cfg: BenchConfig):
    if alg != "ransac":
        rep = register(C, alg, timeout=cfg.timeout_secs, T_gt=T, metric=cfg.metric)
        return rep, dict(wall_time=rep.wall_time), "ok" if rep.complete else "timeout"
    reports = [
        register_ransac(
            C,
            RansacConfig(
                confidence=cfg.ransac_confidence,
                inlier_threshold=cfg.ransac_threshold,
                max_iterations=cfg.ransac_max_iterations,
                rng_seed=cfg.seed + k,
            ),
            T,
        )
        for k in range(cfg.ransac_runs)
    ]
    times = [r.wall_time for r in reports]
    # the run at the (lower) median time supplies the other columns
    mid = sorted(range(len(reports)), key=lambda k: times[k])[(len(reports) - 1) // 2]
    extra = dict(wall_time=statistics.median(times), runs=len(reports), run_times=times)
    return reports[mid], extra, "ok" if all(r.complete for r in reports) else "capped"


def run_benchmark(cfg: BenchConfig) -> BenchmarkReport:
    rows: list[dict] = []
    for spec in cfg.instances:
        try:
            C, T, g = _load_instance(spec, cfg)
            rows.extend(_solve_cells(spec, g, cfg) if g is not None else _registration_cells(spec, C, T, cfg))
        except Exception as exc:  # a failing cell is recorded, the run goes on
            rows.extend(_error_row(spec.name, alg, exc) for alg in cfg.algorithms)
    summary = asdict(cfg)
    summary["base_dir"] = str(cfg.base_dir)
    return BenchmarkReport(rows, summary)
