"""Correspondences in, rigid transform out: graph, maximum clique, SVD fit."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .correspondence import (
    CUBE_HALF_EXTENT,
    CorrespondenceSet,
    Normalisation,
    build_consistency_graph,
    default_epsilon,
    fit_cube,
    normalise,
    outlier_ratio,
)
from .registration import DegenerateConfigurationError, RigidTransform, angular_error, estimate_rigid, translation_error
from .ransac import RansacConfig, ransac_register
from .solvers import solve

MIN_CLIQUE = 3
INSUFFICIENT = "insufficient clique for estimation"


@dataclass
class RegistrationReport:
    algorithm: str
    n: int
    epsilon: float
    inliers: list[int]  # 0-based indices into the correspondence set
    transform: RigidTransform | None
    wall_time: float  # solve (or RANSAC) only
    graph_time: float = 0.0
    complete: bool = True
    vertices: int = 0
    edges: int = 0
    inconsistency_edges: int = 0
    ang_err: float | None = None
    tr_err: float | None = None
    outlier_ratio: float | None = None
    iterations: int | None = None
    flags: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.inliers)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "epsilon": self.epsilon,
            "clique_size": self.size,
            "inliers": [i + 1 for i in self.inliers],
            "transform": None if self.transform is None else self.transform.to_list(),
            "complete": self.complete,
            "wall_time": self.wall_time,
            "graph_time": self.graph_time,
            "consistency_graph": {"vertices": self.vertices, "edges": self.edges},
            "inconsistency_graph": {"vertices": self.vertices, "edges": self.inconsistency_edges},
            "ang_err_deg": self.ang_err,
            "tr_err": self.tr_err,
            "outlier_ratio": self.outlier_ratio,
            "iterations": self.iterations,
            "flags": list(self.flags),
            "stats": dict(self.stats),
        }


def auto_normalise(
    C: CorrespondenceSet, cloud_x, cloud_y, half_extent: float = CUBE_HALF_EXTENT
) -> tuple[CorrespondenceSet, Normalisation]:
    """Centre and scale both clouds into the cube, then set epsilon from their spacing."""
    norm = fit_cube(cloud_x, cloud_y, half_extent)
    eps = default_epsilon(norm.apply(cloud_x), norm.apply(cloud_y))
    return normalise(C, norm).with_epsilon(eps), norm


def _fit(C: CorrespondenceSet, inliers: list[int], report: RegistrationReport) -> None:
    if len(inliers) < MIN_CLIQUE:
        report.flags.append(INSUFFICIENT)
        return
    try:
        report.transform = estimate_rigid(C.x[inliers], C.y[inliers])
    except DegenerateConfigurationError:
        report.flags.append("degenerate inlier configuration")


def _score(C: CorrespondenceSet, report: RegistrationReport, T_gt: RigidTransform | None) -> None:
    if T_gt is None:
        return
    report.outlier_ratio = outlier_ratio(C, T_gt)
    if report.transform is not None:
        report.ang_err = angular_error(report.transform.rotation, T_gt.rotation)
        report.tr_err = translation_error(report.transform.translation, T_gt.translation)


def register(
    C: CorrespondenceSet,
    algorithm: str = "pmc",
    timeout: float | None = None,
    T_gt: RigidTransform | None = None,
    metric: str = "length",
) -> RegistrationReport:
    """Largest mutually consistent subset by exact maximum clique, then an SVD fit."""
    eps = C.require_epsilon()
    t0 = time.perf_counter()
    g = build_consistency_graph(C, metric)
    graph_time = time.perf_counter() - t0
    res = solve(g, algorithm, timeout=timeout)
    inliers = res.members
    n = len(C)
    report = RegistrationReport(
        algorithm=algorithm,
        n=n,
        epsilon=eps,
        inliers=inliers,
        transform=None,
        wall_time=res.wall_time,
        graph_time=graph_time,
        complete=res.complete,
        vertices=n,
        edges=g.num_edges,
        inconsistency_edges=n * (n - 1) // 2 - g.num_edges,
        stats={k: v for k, v in res.to_dict().items() if k in ("nodes_expanded", "colour_prunes", "skip_prunes")},
    )
    if not res.complete:
        report.flags.append("timeout")
    _fit(C, inliers, report)
    _score(C, report, T_gt)
    return report


def register_ransac(
    C: CorrespondenceSet, cfg: RansacConfig | None = None, T_gt: RigidTransform | None = None
) -> RegistrationReport:
    cfg = cfg or RansacConfig()
    r = ransac_register(C, cfg)
    report = RegistrationReport(
        algorithm="ransac",
        n=len(C),
        epsilon=C.require_epsilon(),
        inliers=[int(i) for i in np.sort(r.inliers)],
        transform=r.transform,
        wall_time=r.wall_time,
        complete=not r.hit_cap,
        iterations=r.iterations,
        stats={"threshold": r.threshold},
    )
    if r.hit_cap:
        report.flags.append("iteration cap reached")
    if r.failed:
        report.flags.append("all samples degenerate")
    _score(C, report, T_gt)
    return report
