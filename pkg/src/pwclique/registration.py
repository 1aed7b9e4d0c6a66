"""Rigid transforms, SVD-based least-squares alignment and error metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHO_TOL = 1e-9
DEGENERACY_RATIO = 1e-9


class RegistrationError(ValueError):
    pass


class DegenerateConfigurationError(RegistrationError):
    """Points are (nearly) collinear or coincident; rotation is not determined."""


def _as_rotation(m) -> np.ndarray:
    r = np.asarray(m, dtype=float)
    if r.shape != (3, 3):
        raise RegistrationError(f"rotation must be 3x3, got shape {r.shape}")
    return r


def is_rotation(r: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    r = np.asarray(r, dtype=float)
    return (
        r.shape == (3, 3)
        and np.allclose(r.T @ r, np.eye(3), rtol=0.0, atol=tol)
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


@dataclass(frozen=True)
class RigidTransform:
    """``p -> rotation @ p + translation`` with a proper rotation."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        r = _as_rotation(self.rotation)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not is_rotation(r):
            raise RegistrationError("rotation is not a proper orthonormal matrix")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> RigidTransform:
        return cls()

    def apply(self, points) -> np.ndarray:
        """Transform one point (shape ``(3,)``) or a batch (shape ``(n, 3)``)."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    __call__ = apply

    def inverse(self) -> RigidTransform:
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def compose(self, other: RigidTransform) -> RigidTransform:
        """``self ∘ other``: apply ``other`` first."""
        return RigidTransform(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def to_list(self) -> list[float]:
        """Row-major rotation followed by translation (12 numbers)."""
        return [float(v) for v in self.rotation.ravel()] + [float(v) for v in self.translation]

    @classmethod
    def from_list(cls, values) -> RigidTransform:
        v = [float(x) for x in values]
        if len(v) != 12:
            raise RegistrationError(f"expected 12 numbers, got {len(v)}")
        return cls(np.array(v[:9]).reshape(3, 3), np.array(v[9:]))

    def to_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def to_text(self) -> str:
        return "".join(" ".join(repr(float(x)) for x in row) + "\n" for row in self.to_matrix())

    @classmethod
    def from_text(cls, text: str) -> RigidTransform:
        rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
        m = np.array(rows, dtype=float)
        if m.shape != (4, 4):
            raise RegistrationError(f"expected a 4x4 homogeneous matrix, got shape {m.shape}")
        if not np.allclose(m[3], [0, 0, 0, 1]):
            raise RegistrationError("last row of a homogeneous rigid transform must be 0 0 0 1")
        return cls(m[:3, :3], m[:3, 3])


def apply(T: RigidTransform, p) -> np.ndarray:
    return T.apply(p)


def estimate_rigid(x, y) -> RigidTransform:
    """Least-squares rotation and translation taking points ``x`` onto ``y``.

    ``x`` and ``y`` are ``(n, 3)`` arrays of paired points, ``n >= 3``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[1] != 3 or x.shape != y.shape:
        raise RegistrationError("expected two (n, 3) arrays of paired points")
    if len(x) < 3:
        raise RegistrationError(f"need at least 3 correspondences, got {len(x)}")
    xc = x.mean(axis=0)
    yc = y.mean(axis=0)
    h = (x - xc).T @ (y - yc)
    u, s, vt = np.linalg.svd(h)
    if s[0] == 0.0 or s[1] < DEGENERACY_RATIO * s[0]:
        raise DegenerateConfigurationError("point configuration is collinear or coincident")
    v = vt.T
    d = np.sign(np.linalg.det(v @ u.T)) or 1.0
    r = v @ np.diag([1.0, 1.0, d]) @ u.T
    return RigidTransform(r, yc - r @ xc)


def estimate_from_correspondences(items) -> RigidTransform:
    """:func:`estimate_rigid` on a sequence of objects with ``x`` and ``y``."""
    items = list(items)
    return estimate_rigid([c.x for c in items], [c.y for c in items])


def rotation_angle(r: np.ndarray) -> float:
    """Geodesic angle of a rotation matrix, in radians.

    Same value as ``arccos((trace - 1) / 2)``, but taken as ``atan2`` of the
    sine (from the skew part) and the cosine, which stays accurate near 0
    and near 180 degrees where ``arccos`` alone loses about half the digits.
    """
    r = np.asarray(r, dtype=float)
    cos = (np.trace(r) - 1.0) / 2.0
    sin = np.linalg.norm([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]]) / 2.0
    return float(np.arctan2(sin, cos))


def angular_error(r_est, r_gt) -> float:
    """Angle in degrees of ``r_est @ r_gt.T``, in ``[0, 180]``."""
    r_est = _as_rotation(r_est)
    r_gt = _as_rotation(r_gt)
    if not (is_rotation(r_est, 1e-6) and is_rotation(r_gt, 1e-6)):
        raise RegistrationError("angular_error needs two proper rotations")
    return float(np.degrees(rotation_angle(r_est @ r_gt.T)))


def translation_error(t_est, t_gt) -> float:
    return float(np.linalg.norm(np.asarray(t_est, dtype=float) - np.asarray(t_gt, dtype=float)))


def axis_angle(axis, angle: float) -> np.ndarray:
    """Rotation matrix from an axis and an angle in radians (Rodrigues)."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed rotation via a normalised Gaussian quaternion."""
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )
