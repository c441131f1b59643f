"""Exact geometry of regular simplices in R^n.

A regular simplex is a set of n+1 points in R^n all at the same distance
delta (the "radius") from their centroid; equivalently, all pairwise edge
lengths are equal, with ||x_i - x_j||^2 = 2(1 + 1/n) delta^2.

This module provides deterministic construction of a centered regular
simplex, the isometric reflection of one vertex through the centroid of
the other n, uniform shrinking toward a chosen vertex, and regularity
diagnostics.  Points are plain 1-D numpy arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Simplex",
    "RegularityReport",
    "make_regular_simplex",
    "centroid",
    "reflect_worst",
    "shrink_toward_best",
    "regularity_report",
]

# Relative tolerance for geometric equality checks, measured against the
# simplex radius.  Well above double-precision noise, well below any
# algorithmically meaningful scale.
GEOMETRY_RTOL = 1e-9


class DegenerateSimplexError(ValueError):
    """Raised when vertices are affinely dependent beyond tolerance."""


class Simplex:
    """n+1 vertices in R^n with a reference radius.

    The container itself only guarantees shape, finiteness and (optionally)
    affine independence; use :func:`make_regular_simplex` to obtain a
    certified regular simplex and :func:`regularity_report` to measure how
    far an instance has drifted from regularity.

    Attributes:
        vertices: array of shape (n+1, n), one vertex per row.
        dim: the ambient dimension n.
        radius: reference centroid-to-vertex distance delta.  Defaults to
            the mean of the actual centroid distances.
    """

    __slots__ = ("vertices", "dim", "radius")

    def __init__(self, vertices, radius: float | None = None, check: bool = True):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1] + 1:
            raise ValueError(
                f"expected (n+1) x n vertex array, got shape {V.shape}"
            )
        if V.shape[1] < 1:
            raise ValueError("ambient dimension must be at least 1")
        if not np.all(np.isfinite(V)):
            raise ValueError("vertices contain non-finite entries")
        self.vertices = V
        self.dim = V.shape[1]
        if radius is None:
            c = V.mean(axis=0)
            radius = float(np.mean(np.linalg.norm(V - c, axis=1)))
        if not (radius > 0.0):
            raise ValueError(f"radius must be positive, got {radius}")
        self.radius = float(radius)
        if check:
            # Affine independence: the edge matrix from the last vertex must
            # be well conditioned relative to its scale.
            E = V[:-1] - V[-1]
            scale = float(np.abs(E).max())
            if scale == 0.0 or np.linalg.matrix_rank(E, tol=1e-12 * scale) < self.dim:
                raise DegenerateSimplexError(
                    "vertices are affinely dependent (rank-deficient edge matrix)"
                )

    def centroid(self) -> np.ndarray:
        """Arithmetic mean of the n+1 vertices."""
        return self.vertices.mean(axis=0)

    def copy(self) -> "Simplex":
        return Simplex(self.vertices.copy(), radius=self.radius, check=False)

    def to_dict(self) -> dict:
        """JSON-ready form: {"dim": n, "radius": delta, "vertices": [[...], ...]}."""
        return {
            "dim": self.dim,
            "radius": self.radius,
            "vertices": self.vertices.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict, check: bool = True) -> "Simplex":
        s = cls(np.asarray(d["vertices"], dtype=float),
                radius=float(d["radius"]), check=check)
        if int(d["dim"]) != s.dim:
            raise ValueError(
                f"dim field {d['dim']} does not match vertex shape {s.vertices.shape}"
            )
        return s

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str, check: bool = True) -> "Simplex":
        return cls.from_dict(json.loads(text), check=check)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Simplex(dim={self.dim}, radius={self.radius:.6g})"


def _helmert_rows(n: int) -> np.ndarray:
    """n orthonormal rows in R^(n+1), each orthogonal to the all-ones vector.

    Row k (1-based) is (1,...,1,-k,0,...,0)/sqrt(k(k+1)) with k leading ones.
    """
    H = np.zeros((n, n + 1))
    for k in range(1, n + 1):
        H[k - 1, :k] = 1.0
        H[k - 1, k] = -float(k)
        H[k - 1] /= np.sqrt(k * (k + 1.0))
    return H


def make_regular_simplex(center, radius: float, n: int) -> Simplex:
    """Build a regular simplex with the given centroid, radius and dimension.

    The construction is deterministic: the i-th vertex is
    center + radius*sqrt((n+1)/n) * (i-th column of the Helmert row matrix),
    which places all n+1 vertices at distance `radius` from `center` with
    the exact pairwise inner products (x_i-c)^T (x_j-c) = -radius^2/n.

    Args:
        center: centroid, scalar-broadcastable 1-D array of length n.
        radius: positive centroid-to-vertex distance.
        n: ambient dimension, n >= 1.

    Returns:
        A certified regular Simplex.

    Raises:
        ValueError: nonpositive radius, n < 1, or center of wrong length.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if not (radius > 0.0):
        raise ValueError(f"radius must be positive, got {radius}")
    c = np.broadcast_to(np.asarray(center, dtype=float), (n,)).copy()
    H = _helmert_rows(n)  # n x (n+1)
    V = c[None, :] + radius * np.sqrt((n + 1.0) / n) * H.T
    s = Simplex(V, radius=float(radius), check=True)
    rep = regularity_report(s)
    if rep.max_deviation() > GEOMETRY_RTOL:
        # Cannot happen for a correct construction; guard against regressions.
        raise AssertionError(
            f"freshly built simplex not regular: {rep}"
        )
    return s


def centroid(s: Simplex) -> np.ndarray:
    """Centroid of a simplex (mean of its vertices)."""
    return s.centroid()


def reflect_worst(s: Simplex, worst_index: int) -> np.ndarray:
    """Isometric reflection of one vertex through the centroid of the rest.

    Returns x_r = -x_worst + (2/n) * sum of the other n vertices.  Replacing
    the worst vertex by x_r in a regular simplex yields a regular simplex
    with the same radius.

    Args:
        s: the simplex.
        worst_index: index of the vertex to reflect, in 0..n.

    Returns:
        The reflection point as a 1-D array.

    Raises:
        IndexError: worst_index outside 0..n.
    """
    m = s.vertices.shape[0]
    if not (0 <= worst_index < m):
        raise IndexError(f"vertex index {worst_index} out of range 0..{m - 1}")
    others = np.delete(s.vertices, worst_index, axis=0)
    return -s.vertices[worst_index] + (2.0 / s.dim) * others.sum(axis=0)


def shrink_toward_best(s: Simplex, best_index: int, gamma: float) -> Simplex:
    """Contract every non-best vertex toward the best one by factor gamma.

    x_i <- gamma*x_i + (1-gamma)*x_best for i != best; x_best is unchanged.
    Every vertex-to-best distance scales by exactly gamma, so the radius of a
    regular simplex becomes gamma*delta.

    Args:
        s: the simplex.
        best_index: index of the vertex to keep fixed.
        gamma: shrink factor in the open interval (0, 1).

    Returns:
        A new Simplex with radius gamma * s.radius.

    Raises:
        ValueError: gamma outside (0, 1).
        IndexError: best_index out of range.
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    m = s.vertices.shape[0]
    if not (0 <= best_index < m):
        raise IndexError(f"vertex index {best_index} out of range 0..{m - 1}")
    best = s.vertices[best_index]
    V = gamma * s.vertices + (1.0 - gamma) * best[None, :]
    V[best_index] = best
    return Simplex(V, radius=gamma * s.radius, check=False)


@dataclass
class RegularityReport:
    """Worst-case relative deviations of a simplex from regularity.

    Both numbers are relative to the stored reference radius / the ideal
    edge length it implies, and are zero for an exactly regular simplex.
    """

    max_radius_deviation: float
    max_edge_deviation: float

    def max_deviation(self) -> float:
        return max(self.max_radius_deviation, self.max_edge_deviation)

    def __str__(self) -> str:
        return (f"radius dev {self.max_radius_deviation:.3e}, "
                f"edge dev {self.max_edge_deviation:.3e}")


def regularity_report(s: Simplex) -> RegularityReport:
    """Measure how far a simplex has drifted from regularity.

    Compares every centroid-to-vertex distance against the stored radius and
    every pairwise edge length against the ideal sqrt(2(1+1/n))*radius.

    Returns:
        RegularityReport with the two maximal relative deviations.
    """
    n = s.dim
    c = s.vertices.mean(axis=0)
    # measure in radius-normalized coordinates so the report is exactly
    # scale-free and survives sizes whose squares would underflow
    Y = (s.vertices - c[None, :]) / s.radius
    dists = np.linalg.norm(Y, axis=1)
    rad_dev = float(np.abs(dists - 1.0).max())
    ideal_edge = np.sqrt(2.0 * (1.0 + 1.0 / n))
    diff = Y[:, None, :] - Y[None, :, :]
    edges = np.linalg.norm(diff, axis=2)[np.triu_indices(n + 1, k=1)]
    edge_dev = float(np.abs(edges - ideal_edge).max() / ideal_edge)
    return RegularityReport(rad_dev, edge_dev)
