"""RANSAC baseline: largest set of correspondences aligned by one rigid motion.

Hypotheses are generated and scored in vectorised batches, but the
stopping rule is applied hypothesis by hypothesis, so the outcome equals
that of the plain sequential loop over the same random stream.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .correspondence import CorrespondenceSet
from .registration import DEGENERACY_RATIO, DegenerateConfigurationError, RigidTransform, estimate_rigid

SAMPLE_SIZE = 3
DEFAULT_MAX_ITERATIONS = 10_000_000
# with no cap, stop after this many draws if not one sample was usable
GIVE_UP_DRAWS = 100_000


class RansacError(ValueError):
    pass


@dataclass(frozen=True)
class RansacConfig:
    confidence: float = 0.99
    inlier_threshold: float | None = None  # None: the set's epsilon
    max_iterations: int | None = DEFAULT_MAX_ITERATIONS  # cap on samples drawn; None: uncapped
    rng_seed: int = 0
    batch_size: int = 256

    def validate(self) -> None:
        if not 0.0 < self.confidence < 1.0:
            raise RansacError("confidence must lie in (0, 1)")
        if self.inlier_threshold is not None and not self.inlier_threshold > 0:
            raise RansacError("inlier_threshold must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise RansacError("max_iterations must be at least 1")
        if self.batch_size < 1:
            raise RansacError("batch_size must be at least 1")


@dataclass
class RansacResult:
    inliers: np.ndarray
    transform: RigidTransform | None
    iterations: int
    wall_time: float
    threshold: float
    hit_cap: bool = False
    failed: bool = False
    draws: int = 0  # samples drawn, counting discarded degenerate ones
    # iteration index (1-based) at which each new best consensus size was reached
    improvements: list[tuple[int, int]] = field(default_factory=list)

    @property
    def consensus(self) -> int:
        return int(len(self.inliers))

    def to_dict(self) -> dict:
        return {
            "consensus": self.consensus,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
            "threshold": self.threshold,
            "hit_cap": self.hit_cap,
            "failed": self.failed,
            "draws": self.draws,
            "transform": None if self.transform is None else self.transform.to_list(),
        }


def required_iterations(inlier_fraction: float, confidence: float = 0.99, sample_size: int = SAMPLE_SIZE) -> float:
    """Hypotheses needed to draw one all-inlier sample with the given confidence."""
    p_good = inlier_fraction**sample_size
    if p_good <= 0.0:
        return math.inf
    if p_good >= 1.0:
        return 1.0
    return math.log(1.0 - confidence) / math.log1p(-p_good)


def _batch_kabsch(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rigid fits for a stack of 3-point samples; returns R, t and a degeneracy mask."""
    pc = p - p.mean(axis=1, keepdims=True)
    qc = q - q.mean(axis=1, keepdims=True)
    h = np.einsum("bki,bkj->bij", pc, qc)
    u, s, vt = np.linalg.svd(h)
    degenerate = (s[:, 0] == 0.0) | (s[:, 1] < DEGENERACY_RATIO * s[:, 0])
    v = np.swapaxes(vt, 1, 2)
    d = np.sign(np.linalg.det(v @ np.swapaxes(u, 1, 2)))
    d[d == 0] = 1.0
    v[:, :, 2] *= d[:, None]
    r = v @ np.swapaxes(u, 1, 2)
    t = q.mean(axis=1) - np.einsum("bij,bj->bi", r, p.mean(axis=1))
    return r, t, degenerate


def _inliers(C: CorrespondenceSet, T: RigidTransform, thr: float) -> np.ndarray:
    res = T.apply(C.x) - C.y
    return np.flatnonzero(np.einsum("ij,ij->i", res, res) <= thr * thr)


def ransac_register(C: CorrespondenceSet, cfg: RansacConfig = RansacConfig()) -> RansacResult:
    cfg.validate()
    n = len(C)
    if n < SAMPLE_SIZE:
        raise RansacError(f"RANSAC needs at least {SAMPLE_SIZE} correspondences, got {n}")
    thr = cfg.inlier_threshold if cfg.inlier_threshold is not None else C.require_epsilon()
    thr2 = thr * thr
    rng = np.random.default_rng(cfg.rng_seed)
    cap = math.inf if cfg.max_iterations is None else cfg.max_iterations
    log_fail = math.log(1.0 - cfg.confidence)

    t0 = time.perf_counter()
    k = 0  # valid hypotheses; these drive the adaptive bound
    draws = 0  # every sample, including discarded ones; these meet the cap
    best_count = 0
    best_R = best_t = None
    improvements: list[tuple[int, int]] = []
    bound = math.inf
    hit_cap = False
    x, y = C.x, C.y
    # coordinates along rows keep the batched products contiguous
    xT, yT = np.ascontiguousarray(x.T), np.ascontiguousarray(y.T)

    done = False
    while not done:
        idx = rng.integers(0, n, size=(cfg.batch_size, SAMPLE_SIZE))
        distinct = (idx[:, 0] != idx[:, 1]) & (idx[:, 0] != idx[:, 2]) & (idx[:, 1] != idx[:, 2])
        R, t, degenerate = _batch_kabsch(x[idx], y[idx])
        valid = (distinct & ~degenerate).tolist()
        res = R @ xT
        res += t[:, :, None]
        res -= yT
        np.square(res, out=res)
        counts = np.count_nonzero(res.sum(axis=1) <= thr2, axis=1).tolist()

        for j in range(len(valid)):
            draws += 1
            if valid[j]:
                k += 1
                c = counts[j]
                if c > best_count:
                    best_count = c
                    best_R, best_t = R[j], t[j]
                    improvements.append((k, c))
                    w = c / n
                    bound = 1.0 if w >= 1.0 else log_fail / math.log1p(-(w**SAMPLE_SIZE))
                if k >= bound:
                    done = True
                    break
            if draws >= cap:
                hit_cap = True
                done = True
                break
            if k == 0 and draws >= GIVE_UP_DRAWS:
                done = True
                break

    if best_R is None:
        return RansacResult(np.array([], dtype=int), None, k, time.perf_counter() - t0, thr, hit_cap, True, draws)

    T = RigidTransform(best_R, best_t)
    inliers = _inliers(C, T, thr)
    # refit on the consensus set; keep the refit only if it does not lose support
    if len(inliers) >= SAMPLE_SIZE:
        try:
            T_fit = estimate_rigid(x[inliers], y[inliers])
        except DegenerateConfigurationError:
            T_fit = None
        if T_fit is not None:
            refit = _inliers(C, T_fit, thr)
            if len(refit) >= len(inliers):
                T, inliers = T_fit, refit
    return RansacResult(inliers, T, k, time.perf_counter() - t0, thr, hit_cap, False, draws, improvements)
