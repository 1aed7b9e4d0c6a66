"""3D point correspondences and their pairwise-consistency graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .graph import Graph, complement
from .registration import RigidTransform

CUBE_HALF_EXTENT = 50.0
_BLOCK_ROWS = 128


class CorrespondenceError(ValueError):
    pass


class EpsilonNotSetError(CorrespondenceError):
    pass


@dataclass(frozen=True)
class Correspondence:
    x: tuple[float, float, float]
    y: tuple[float, float, float]
    score: float | None = None
    gt_inlier: bool | None = None


@dataclass
class CorrespondenceSet:
    """``N`` correspondences stored column-wise.

    ``x`` and ``y`` are ``(N, 3)`` float arrays; ``score`` and
    ``gt_inlier`` are optional length-``N`` arrays.
    """

    x: np.ndarray
    y: np.ndarray
    epsilon: float | None = None
    score: np.ndarray | None = None
    gt_inlier: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float).reshape(-1, 3)
        self.y = np.asarray(self.y, dtype=float).reshape(-1, 3)
        if self.x.shape != self.y.shape:
            raise CorrespondenceError("x and y must have the same number of points")
        if not (np.isfinite(self.x).all() and np.isfinite(self.y).all()):
            raise CorrespondenceError("coordinates must be finite")
        if self.epsilon is not None and not self.epsilon > 0:
            raise CorrespondenceError(f"epsilon must be positive, got {self.epsilon}")
        if self.score is not None:
            self.score = np.asarray(self.score, dtype=float)
        if self.gt_inlier is not None:
            self.gt_inlier = np.asarray(self.gt_inlier, dtype=bool)

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, k: int) -> Correspondence:
        return Correspondence(
            tuple(self.x[k]),
            tuple(self.y[k]),
            None if self.score is None else float(self.score[k]),
            None if self.gt_inlier is None else bool(self.gt_inlier[k]),
        )

    @property
    def items(self) -> list[Correspondence]:
        return [self[k] for k in range(len(self))]

    @classmethod
    def from_items(cls, items, epsilon: float | None = None) -> CorrespondenceSet:
        items = list(items)
        scores = [c.score for c in items]
        labels = [c.gt_inlier for c in items]
        return cls(
            np.array([c.x for c in items], dtype=float).reshape(-1, 3),
            np.array([c.y for c in items], dtype=float).reshape(-1, 3),
            epsilon=epsilon,
            score=None if any(s is None for s in scores) else np.array(scores),
            gt_inlier=None if any(g is None for g in labels) else np.array(labels),
        )

    def subset(self, idx) -> CorrespondenceSet:
        idx = np.asarray(idx, dtype=int)
        return CorrespondenceSet(
            self.x[idx],
            self.y[idx],
            self.epsilon,
            None if self.score is None else self.score[idx],
            None if self.gt_inlier is None else self.gt_inlier[idx],
        )

    def best_by_score(self, n: int) -> CorrespondenceSet:
        """The ``n`` correspondences with the smallest score (stable)."""
        if self.score is None:
            raise CorrespondenceError("no scores to rank by")
        return self.subset(np.argsort(self.score, kind="stable")[:n])

    def with_epsilon(self, epsilon: float) -> CorrespondenceSet:
        return CorrespondenceSet(self.x, self.y, epsilon, self.score, self.gt_inlier, dict(self.meta))

    def require_epsilon(self) -> float:
        if self.epsilon is None:
            raise EpsilonNotSetError("epsilon is not set on this correspondence set")
        return self.epsilon


METRICS = ("length", "displacement")


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise CorrespondenceError(f"unknown metric {metric!r}; choose from {METRICS}")


def pair_distance(ci: Correspondence, cj: Correspondence, metric: str = "length") -> float:
    """How far two correspondences are from agreeing on one motion.

    ``length``: ``| ||x_i - x_j|| - ||y_i - y_j|| |``, invariant to any rigid
    motion. ``displacement``: ``||(x_i - x_j) - (y_i - y_j)||``, invariant to
    translations only.
    """
    _check_metric(metric)
    xi, xj = np.asarray(ci.x, dtype=float), np.asarray(cj.x, dtype=float)
    yi, yj = np.asarray(ci.y, dtype=float), np.asarray(cj.y, dtype=float)
    if metric == "displacement":
        d = (xi - xj) - (yi - yj)
        return float(np.sqrt(np.sum(d * d)))
    dx = xi - xj
    dy = yi - yj
    return float(abs(np.sqrt(np.sum(dx * dx)) - np.sqrt(np.sum(dy * dy))))


def _distance_rows(C: CorrespondenceSet, lo: int, hi: int, metric: str) -> np.ndarray:
    # same arithmetic as pair_distance, so threshold decisions agree bit for bit
    if metric == "displacement":
        d = (C.x[lo:hi, None, :] - C.x[None, :, :]) - (C.y[lo:hi, None, :] - C.y[None, :, :])
        return np.sqrt(np.sum(d * d, axis=2))
    dx = C.x[lo:hi, None, :] - C.x[None, :, :]
    dy = C.y[lo:hi, None, :] - C.y[None, :, :]
    return np.abs(np.sqrt(np.sum(dx * dx, axis=2)) - np.sqrt(np.sum(dy * dy, axis=2)))


def pair_distance_matrix(C: CorrespondenceSet, metric: str = "length") -> np.ndarray:
    """All pairwise correspondence distances as an ``(N, N)`` array."""
    _check_metric(metric)
    n = len(C)
    out = np.empty((n, n))
    for lo in range(0, n, _BLOCK_ROWS):
        hi = min(lo + _BLOCK_ROWS, n)
        out[lo:hi] = _distance_rows(C, lo, hi, metric)
    return out


def consistency_matrix(C: CorrespondenceSet, metric: str = "length") -> np.ndarray:
    _check_metric(metric)
    eps = C.require_epsilon()
    n = len(C)
    out = np.empty((n, n), dtype=bool)
    for lo in range(0, n, _BLOCK_ROWS):
        hi = min(lo + _BLOCK_ROWS, n)
        out[lo:hi] = _distance_rows(C, lo, hi, metric) <= eps
    np.fill_diagonal(out, False)
    return out


def build_consistency_graph(C: CorrespondenceSet, metric: str = "length") -> Graph:
    """Vertices are correspondences; edges join pairs with distance ``<= epsilon``."""
    return Graph.from_matrix(consistency_matrix(C, metric))


def build_inconsistency_graph(C: CorrespondenceSet, metric: str = "length") -> Graph:
    """Complement of the consistency graph: pairs with distance ``> epsilon``."""
    return complement(build_consistency_graph(C, metric))


def nn_distances(points) -> np.ndarray:
    """Exact distance from each point to its nearest other point."""
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(p) < 2:
        raise CorrespondenceError("need at least 2 points for nearest-neighbour distances")
    d, _ = cKDTree(p).query(p, k=2)
    return d[:, 1]


def default_epsilon(X, Y) -> float:
    """Twice the mean nearest-neighbour distance, pooled over both clouds."""
    dx = nn_distances(X)
    dy = nn_distances(Y)
    return 2.0 * float(np.concatenate([dx, dy]).mean())


def residuals(C: CorrespondenceSet, T: RigidTransform) -> np.ndarray:
    return np.linalg.norm(T.apply(C.x) - C.y, axis=1)


def outlier_mask(C: CorrespondenceSet, T_gt: RigidTransform) -> np.ndarray:
    return residuals(C, T_gt) > C.require_epsilon() / 2.0


def outlier_ratio(C: CorrespondenceSet, T_gt: RigidTransform) -> float:
    """Fraction of correspondences that ``T_gt`` does not align to within ``epsilon / 2``."""
    if len(C) == 0:
        return 0.0
    return float(outlier_mask(C, T_gt).mean())


@dataclass(frozen=True)
class Normalisation:
    """Uniform similarity ``p -> scale * (p - centre)``."""

    centre: np.ndarray
    scale: float

    def apply(self, p) -> np.ndarray:
        return self.scale * (np.asarray(p, dtype=float) - self.centre)

    def transform(self, T: RigidTransform) -> RigidTransform:
        """Express ``T`` in normalised coordinates."""
        r = T.rotation
        return RigidTransform(r, self.scale * (r @ self.centre + T.translation - self.centre))


def fit_cube(X, Y, half_extent: float = CUBE_HALF_EXTENT) -> Normalisation:
    """Common centring and scaling that puts both clouds inside the cube."""
    pts = np.vstack([np.asarray(X, dtype=float).reshape(-1, 3), np.asarray(Y, dtype=float).reshape(-1, 3)])
    centre = (pts.max(axis=0) + pts.min(axis=0)) / 2.0
    reach = float(np.abs(pts - centre).max())
    return Normalisation(centre, half_extent / reach if reach > 0 else 1.0)


def normalise(C: CorrespondenceSet, norm: Normalisation) -> CorrespondenceSet:
    eps = None if C.epsilon is None else C.epsilon * norm.scale
    return CorrespondenceSet(norm.apply(C.x), norm.apply(C.y), eps, C.score, C.gt_inlier, dict(C.meta))


# -- text formats -------------------------------------------------------------


def _numeric_rows(text: str, source: str) -> list[list[float]]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(v) for v in line.split()])
        except ValueError:
            raise CorrespondenceError(f"{source}:{lineno}: non-numeric value in {raw!r}") from None
    return rows


def parse_correspondences(text: str, source: str = "<text>") -> CorrespondenceSet:
    """``x1 x2 x3 y1 y2 y3 [score]`` per line; ``#`` starts a comment."""
    rows = _numeric_rows(text, source)
    if any(len(r) not in (6, 7) for r in rows):
        raise CorrespondenceError(f"{source}: every line needs 6 or 7 numbers")
    if len({len(r) for r in rows}) > 1:
        raise CorrespondenceError(f"{source}: score column present on some lines only")
    has_score = bool(rows) and len(rows[0]) == 7
    arr = np.array(rows, dtype=float).reshape(-1, 7 if has_score else 6)
    return CorrespondenceSet(arr[:, :3], arr[:, 3:6], score=arr[:, 6] if has_score else None)


def format_correspondences(C: CorrespondenceSet, header: str | None = None) -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    for k in range(len(C)):
        vals = [*C.x[k], *C.y[k]]
        if C.score is not None:
            vals.append(C.score[k])
        lines.append(" ".join(repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def read_correspondences(path) -> CorrespondenceSet:
    return parse_correspondences(Path(path).read_text(encoding="utf-8"), str(path))


def write_correspondences(path, C: CorrespondenceSet, header: str | None = None) -> None:
    Path(path).write_text(format_correspondences(C, header), encoding="utf-8")


def read_point_cloud(path) -> np.ndarray:
    rows = _numeric_rows(Path(path).read_text(encoding="utf-8"), str(path))
    if any(len(r) != 3 for r in rows):
        raise CorrespondenceError(f"{path}: point cloud lines need exactly 3 numbers")
    return np.array(rows, dtype=float).reshape(-1, 3)


def write_point_cloud(path, points) -> None:
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    Path(path).write_text("".join(" ".join(repr(float(v)) for v in row) + "\n" for row in p), encoding="utf-8")


def count_pairs(n: int) -> int:
    return math.comb(n, 2)
