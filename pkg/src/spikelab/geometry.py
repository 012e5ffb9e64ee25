"""Regular-polygon spike clusters, local frames and second-derivative tables."""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidK


@dataclass(frozen=True)
class LocalFrame:
    radial: np.ndarray
    tangential: np.ndarray


@dataclass(frozen=True)
class PolygonCluster:
    k: int
    radius: float
    phase: float
    with_centre: bool
    positions: np.ndarray  # (k, 2) or (k+1, 2) with the centre last

    @property
    def angles(self):
        return 2 * np.pi * np.arange(self.k) / self.k + self.phase

    @property
    def vertices(self):
        return self.positions[: self.k]

    def frames(self):
        """Radial/tangential unit vectors at each polygon vertex."""
        out = []
        for th in self.angles:
            e = np.array([np.cos(th), np.sin(th)])
            out.append(LocalFrame(e, np.array([-e[1], e[0]])))
        return out

    def distance_matrix(self):
        d = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt((d ** 2).sum(-1))

    def nearest_distance(self):
        return 2 * self.radius * np.sin(np.pi / self.k)


def build_cluster(k, radius, phase=0.0, with_centre=False) -> PolygonCluster:
    if int(k) != k or k < 2:
        raise InvalidK(f"need an integer k >= 2, got {k}")
    if not radius > 0:
        raise ValueError("radius must be positive")
    k = int(k)
    th = 2 * np.pi * np.arange(k) / k + phase
    pos = radius * np.column_stack([np.cos(th), np.sin(th)])
    if with_centre:
        pos = np.vstack([pos, [0.0, 0.0]])
    return PolygonCluster(k, float(radius), float(phase), bool(with_centre), pos)


def local_to_global(cluster: PolygonCluster, coords):
    """Map per-vertex (radial, tangential) offsets to Cartesian offsets."""
    coords = np.asarray(coords, dtype=float).reshape(cluster.k, 2)
    th = cluster.angles
    c, s = np.cos(th), np.sin(th)
    return np.column_stack([c * coords[:, 0] - s * coords[:, 1], s * coords[:, 0] + c * coords[:, 1]])


def second_derivative_pair(k):
    """Hessian of |q1 - q2|^2 in local coordinates (q11, q12, q21, q22).

    Index 1 is radial and 2 tangential; q1 sits at angle 0, q2 at 2pi/k.
    """
    if k < 2:
        raise InvalidK(f"need k >= 2, got {k}")
    c = np.cos(2 * np.pi / k)
    s = np.sin(2 * np.pi / k)
    return np.array([
        [2.0, 0.0, -2 * c, 2 * s],
        [0.0, 2.0, -2 * s, -2 * c],
        [-2 * c, -2 * s, 2.0, 0.0],
        [2 * s, -2 * c, 0.0, 2.0],
    ])


def second_derivative_self():
    """Hessian of |q1|^2 in its own local frame."""
    return 2.0 * np.eye(2)


def write_positions_csv(cluster: PolygonCluster, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["j", "x", "y"])
        for j, (x, y) in enumerate(cluster.positions, start=1):
            out.writerow([j, repr(float(x)), repr(float(y))])
