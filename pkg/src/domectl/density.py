"""Ground-truth crowd density maps from head annotations.

Each head contributes one Gaussian whose width follows the mean distance to
its ``k`` nearest annotated neighbours. Kernels are truncated and then
renormalised inside the image, so a map always sums to its head count.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import BinaryIO, Optional, Sequence, TextIO

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, DataError

MAGIC = b"DMAP"
VERSION = 1
_HEADER = struct.Struct("<4sIII")
MIN_SIGMA = 0.5


@dataclass(frozen=True)
class HeadAnnotations:
    points: np.ndarray  # (N, 2) columns x, y in pixels
    width: int
    height: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"image size must be positive, got {self.width}x{self.height}")
        if len(pts):
            x, y = pts[:, 0], pts[:, 1]
            bad = ~((x >= 0) & (x < self.width) & (y >= 0) & (y < self.height))
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise DataError(f"head {i} at ({x[i]}, {y[i]}) lies outside {self.width}x{self.height}")

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class KernelParams:
    k: int = 4
    beta: float = 0.3
    fallback_sigma: float = 15.0
    truncation_radius: float = 4.0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("kernel k must be >= 1")
        if not self.beta > 0:
            raise ConfigError("kernel beta must be > 0")
        if not self.fallback_sigma > 0:
            raise ConfigError("fallback_sigma must be > 0")
        if not self.truncation_radius >= 2:
            raise ConfigError("truncation_radius must be >= 2 sigmas")


@dataclass(frozen=True)
class DensityMap:
    values: np.ndarray  # (height, width), row-major

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _mean_of_sorted(d: np.ndarray) -> float:
    # fixed left-to-right order so the tree path and brute force agree bit for bit
    total = 0.0
    for v in d:
        total += float(v)
    return total / len(d)


def knn_mean_distance(points, index: int, k: int) -> Optional[float]:
    """Mean distance from ``points[index]`` to its ``k`` nearest other points.

    Returns None when there are fewer than ``k + 1`` points; callers then use
    the fallback sigma.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < k + 1:
        return None
    diff = pts - pts[index]
    d = np.sqrt(diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1])
    d = np.delete(d, index)
    return _mean_of_sorted(np.sort(d)[:k])


def knn_mean_distances(points, k: int) -> list[Optional[float]]:
    """``knn_mean_distance`` for every point, using a k-d tree for the search."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < k + 1:
        return [None] * n
    _, idx = cKDTree(pts).query(pts, k=k + 1)
    out = []
    for i in range(n):
        nb = idx[i][idx[i] != i][:k]
        if len(nb) < k:
            # self was not among the returned ties; the extra neighbour is farthest
            nb = idx[i][:k]
        diff = pts[nb] - pts[i]
        d = np.sqrt(diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1])
        out.append(_mean_of_sorted(np.sort(d)))
    return out


def adaptive_sigma(mean_distance: Optional[float], params: KernelParams = KernelParams()) -> float:
    if mean_distance is None:
        return params.fallback_sigma
    if mean_distance < 0:
        raise ValueError("mean distance must be non-negative")
    return max(params.beta * mean_distance, MIN_SIGMA)


def _kernel(x: float, y: float, sigma: float, radius: float, width: int, height: int):
    r = radius * sigma
    c0, c1 = max(int(math.floor(x - r)), 0), min(int(math.ceil(x + r)), width - 1)
    r0, r1 = max(int(math.floor(y - r)), 0), min(int(math.ceil(y + r)), height - 1)
    cols = np.arange(c0, c1 + 1, dtype=float) - x
    rows = np.arange(r0, r1 + 1, dtype=float) - y
    d2 = rows[:, None] ** 2 + cols[None, :] ** 2
    g = np.exp(-d2 / (2.0 * sigma * sigma))
    g[d2 > r * r] = 0.0
    total = g.sum()
    if total <= 0.0:
        # cannot happen for in-image heads (the nearest cell is within 1 px), kept as a guard
        g = np.zeros_like(g)
        g[int(round(y)) - r0, int(round(x)) - c0] = 1.0
        total = 1.0
    return r0, c0, g / total


def render_density_map(annotations: HeadAnnotations, params: KernelParams = KernelParams()) -> DensityMap:
    """Sum of one unit-mass Gaussian per head, added in annotation order.

    Cell ``(row, col)`` samples the plane at ``(x=col, y=row)``.
    """
    w, h = annotations.width, annotations.height
    if w <= 0 or h <= 0:
        raise DataError("zero-size image")
    out = np.zeros((h, w), dtype=float)
    pts = annotations.points
    for (x, y), md in zip(pts, knn_mean_distances(pts, params.k)):
        sigma = adaptive_sigma(md, params)
        r0, c0, g = _kernel(x, y, sigma, params.truncation_radius, w, h)
        out[r0:r0 + g.shape[0], c0:c0 + g.shape[1]] += g
    return DensityMap(out)


def count_from_map(dmap: DensityMap) -> float:
    return float(np.sum(dmap.values))


def evaluate_counts(predicted: Sequence[float], truth: Sequence[float]) -> tuple[float, float]:
    """Mean absolute error and root-mean-square error of predicted counts."""
    p = np.asarray(predicted, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape or p.ndim != 1:
        raise DataError(f"predicted and truth lengths differ ({p.size} vs {t.size})")
    if p.size == 0:
        raise DataError("no counts to evaluate")
    err = p - t
    return float(np.mean(np.abs(err))), float(np.sqrt(np.mean(err * err)))


def write_density_map(fh: BinaryIO, dmap: DensityMap) -> None:
    fh.write(_HEADER.pack(MAGIC, VERSION, dmap.width, dmap.height))
    fh.write(np.ascontiguousarray(dmap.values, dtype="<f4").tobytes())


def read_density_map(fh: BinaryIO) -> DensityMap:
    head = fh.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise DataError("truncated density map header")
    magic, version, width, height = _HEADER.unpack(head)
    if magic != MAGIC:
        raise DataError(f"bad magic {magic!r}")
    if version != VERSION:
        raise DataError(f"unsupported density map version {version}")
    body = fh.read()
    if len(body) != 4 * width * height:
        raise DataError(f"expected {4 * width * height} bytes of cells, got {len(body)}")
    values = np.frombuffer(body, dtype="<f4").astype(float).reshape(height, width)
    return DensityMap(values)


def export_text_grid(fh: TextIO, dmap: DensityMap, precision: int = 6) -> None:
    """One line per row, cells separated by single spaces."""
    fh.write(f"# width={dmap.width} height={dmap.height}\n")
    for row in dmap.values:
        fh.write(" ".join(f"{v:.{precision}e}" for v in row) + "\n")
