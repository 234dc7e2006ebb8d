"""Point-cloud ingestion, metrics, and the built-in two-squares data set."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DimensionMismatch, ParseError, TooManyPoints

# Full simplex enumeration is 2^n, so clouds are capped at desk scale.
MAX_POINTS = 24


class Metric(Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "cityblock"
    CHEBYSHEV = "chebyshev"


@dataclass(frozen=True)
class PointCloud:
    """A finite set of points in R^d with a choice of metric."""

    points: np.ndarray
    metric: Metric = Metric.EUCLIDEAN
    max_points: int = MAX_POINTS

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise DimensionMismatch(f"expected an (n, d) array, got shape {pts.shape}")
        n, d = pts.shape
        if n < 1:
            raise ParseError("no points")
        if d < 1:
            raise DimensionMismatch("points must have dimension >= 1")
        if n > self.max_points:
            raise TooManyPoints(f"{n} points exceeds the cap of {self.max_points}")
        if not np.all(np.isfinite(pts)):
            raise ParseError("coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative pairwise distances with zero diagonal."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ParseError("distances must be finite")
        if np.any(v < 0):
            raise ParseError("distances must be nonnegative")
        if np.any(np.diag(v) != 0):
            raise ParseError("diagonal must be zero")
        if not np.array_equal(v, v.T):
            raise ParseError("distance matrix must be symmetric")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, ij) -> float:
        return float(self.values[ij])


def load_point_cloud(path, format: str | None = None, metric: Metric = Metric.EUCLIDEAN,
                     max_points: int = MAX_POINTS) -> PointCloud:
    """Read a point cloud from CSV (one point per line) or JSON (array of arrays).

    The format is inferred from the file suffix when not given. CSV lines
    starting with '#' are treated as headers and skipped.
    """
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format not in ("csv", "json"):
        raise ParseError(f"unknown format {format!r}")
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc

    if format == "json":
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ParseError("JSON point cloud must be an array of arrays")
    else:
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: malformed row {line!r}") from exc

    if not rows:
        raise ParseError("no points")
    dims = {len(r) for r in rows}
    if len(dims) != 1:
        raise DimensionMismatch(f"rows have mixed dimensions {sorted(dims)}")
    return PointCloud(np.array(rows, dtype=float), metric=metric, max_points=max_points)


def two_squares() -> PointCloud:
    """Two well-separated squares: side 1 at the origin, side sqrt(2) to its right.

    The inter-square gap is 3, so for 1 < eps1 < sqrt(2) < eps2 < 2 the small
    square's loop is born at scale 1 and filled at sqrt(2), while the large
    square's loop is born at sqrt(2) and filled at 2.
    """
    s = math.sqrt(2)
    pts = [
        (0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0),
        (4.0, 0.0), (4.0 + s, 0.0), (4.0 + s, s), (4.0, s),
    ]
    return PointCloud(np.array(pts))


def distance_matrix(cloud: PointCloud) -> DistanceMatrix:
    """Exact pairwise distances under the cloud's metric."""
    if cloud.n == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    condensed = pdist(cloud.points, metric=cloud.metric.value)
    return DistanceMatrix(squareform(condensed))
