"""Synthetic correspondence sets with a known rigid transform."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correspondence import (
    CUBE_HALF_EXTENT,
    CorrespondenceSet,
    default_epsilon,
    pair_distance_matrix,
    write_correspondences,
    write_point_cloud,
)
from .registration import RigidTransform, random_rotation

MAX_NOISE_ATTEMPTS = 100


class SynthConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of one synthetic instance.

    With ``scan_points`` set, two synthetic scans are drawn first (a
    uniform cloud and its image under the transform) and every keypoint is
    taken from them. ``epsilon`` fixes the consistency threshold; when
    ``None`` it is twice the mean nearest-neighbour distance of the scans,
    or of the noise-free keypoint clouds when there are no scans. If
    ``sigma_over_epsilon`` is set, the noise level is that fraction of
    epsilon and ``noise_sigma`` is ignored.
    """

    n_inliers: int
    n_outliers: int
    noise_sigma: float = 0.0
    cube_half_extent: float = CUBE_HALF_EXTENT
    transform: RigidTransform | None = None  # None draws a random one
    rng_seed: int = 0
    epsilon: float | None = None
    sigma_over_epsilon: float | None = None
    require_inlier_clique: bool = True
    metric: str = "length"  # distance used for the inlier-clique guarantee
    scan_points: int | None = None

    def validate(self) -> None:
        if self.n_inliers < 0 or self.n_outliers < 0:
            raise SynthConfigError("counts must be non-negative")
        if self.n_inliers + self.n_outliers < 1:
            raise SynthConfigError("need at least one correspondence")
        if self.noise_sigma < 0 or (self.sigma_over_epsilon is not None and self.sigma_over_epsilon < 0):
            raise SynthConfigError("noise level must be non-negative")
        if not self.cube_half_extent > 0:
            raise SynthConfigError("cube_half_extent must be positive")
        if self.epsilon is not None and not self.epsilon > 0:
            raise SynthConfigError("epsilon must be positive")
        if self.scan_points is not None and self.scan_points < max(2, self.n_inliers + self.n_outliers):
            raise SynthConfigError("scan_points must be at least 2 and cover every keypoint")


@dataclass
class SynthInstance:
    correspondences: CorrespondenceSet
    transform: RigidTransform
    sigma: float
    scan_x: np.ndarray | None = None
    scan_y: np.ndarray | None = None

    @property
    def epsilon(self) -> float:
        return self.correspondences.epsilon

    def __iter__(self):
        # allows ``C, T = generate_instance(cfg)``
        return iter((self.correspondences, self.transform))


def random_transform(rng: np.random.Generator, half_extent: float = CUBE_HALF_EXTENT) -> RigidTransform:
    """Uniform rotation; translation uniform in half the cube."""
    r = random_rotation(rng)
    t = rng.uniform(-half_extent / 2, half_extent / 2, size=3)
    return RigidTransform(r, t)


def generate_instance(cfg: SynthConfig) -> SynthInstance:
    """Inliers ``(x, T(x) + noise)`` and outliers pairing independent uniform points."""
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed)
    h = cfg.cube_half_extent
    T = cfg.transform if cfg.transform is not None else random_transform(rng, h)
    k, m = cfg.n_inliers, cfg.n_outliers

    scan_x = scan_y = None
    if cfg.scan_points is not None:
        scan_x = rng.uniform(-h, h, size=(cfg.scan_points, 3))
        scan_y = T.apply(scan_x)
        pick = rng.permutation(cfg.scan_points)
        x_in = scan_x[pick[:k]]
        x_out = scan_x[pick[k : k + m]]
        y_out = scan_y[rng.choice(cfg.scan_points, size=m, replace=False)]
    else:
        x_in = rng.uniform(-h, h, size=(k, 3))
        x_out = rng.uniform(-h, h, size=(m, 3))
        y_out = rng.uniform(-h, h, size=(m, 3))
    y_clean = T.apply(x_in)

    x = np.vstack([x_in, x_out])
    if cfg.epsilon is not None:
        eps = float(cfg.epsilon)
    elif scan_x is not None:
        eps = default_epsilon(scan_x, scan_y)
    else:
        if k + m < 2:
            raise SynthConfigError("cannot derive epsilon from fewer than 2 points; set epsilon")
        eps = default_epsilon(x, np.vstack([y_clean, y_out]))
    sigma = eps * cfg.sigma_over_epsilon if cfg.sigma_over_epsilon is not None else cfg.noise_sigma

    for _ in range(MAX_NOISE_ATTEMPTS):
        y_in = y_clean + rng.normal(0.0, sigma, size=(k, 3)) if sigma > 0 else y_clean.copy()
        if not cfg.require_inlier_clique or k < 2:
            break
        inliers = CorrespondenceSet(x_in, y_in)
        d = pair_distance_matrix(inliers, cfg.metric)
        if (d <= eps).all():
            break
    else:
        raise SynthConfigError(
            f"inliers failed to form a clique in {MAX_NOISE_ATTEMPTS} noise draws; sigma={sigma:g} is too large for epsilon={eps:g}"
        )

    y = np.vstack([y_in, y_out])
    labels = np.r_[np.ones(k, dtype=bool), np.zeros(m, dtype=bool)]
    perm = rng.permutation(k + m)
    C = CorrespondenceSet(x[perm], y[perm], epsilon=eps, gt_inlier=labels[perm])
    C.meta.update(seed=cfg.rng_seed, n_inliers=k, n_outliers=m, sigma=sigma)
    return SynthInstance(C, T, sigma, scan_x, scan_y)


def write_instance(inst: SynthInstance, directory, stem: str = "instance") -> dict[str, Path]:
    """Write ``<stem>.corr``, ``<stem>.gt`` (4x4 matrix), point clouds and a JSON sidecar."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    C = inst.correspondences
    paths = {
        "correspondences": d / f"{stem}.corr",
        "ground_truth": d / f"{stem}.gt",
        "cloud_x": d / f"{stem}_x.xyz",
        "cloud_y": d / f"{stem}_y.xyz",
        "meta": d / f"{stem}.json",
    }
    write_correspondences(paths["correspondences"], C, header=f"synthetic instance seed={C.meta.get('seed')}")
    paths["ground_truth"].write_text(inst.transform.to_text(), encoding="utf-8")
    write_point_cloud(paths["cloud_x"], C.x if inst.scan_x is None else inst.scan_x)
    write_point_cloud(paths["cloud_y"], C.y if inst.scan_y is None else inst.scan_y)
    meta = {
        "n": len(C),
        "epsilon": C.epsilon,
        "sigma": inst.sigma,
        "seed": C.meta.get("seed"),
        "n_inliers": C.meta.get("n_inliers"),
        "n_outliers": C.meta.get("n_outliers"),
        "gt_inlier": [int(b) for b in C.gt_inlier],
        "transform": inst.transform.to_list(),
    }
    paths["meta"].write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
    return paths
