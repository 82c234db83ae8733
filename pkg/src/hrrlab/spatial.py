"""Encoding 2-D points and labeled scenes into single vectors.

A pair of random unitary axis vectors (X, Y) turns a coordinate pair into
the vector ``X^x (*) Y^y`` (bind of convolutive powers). Point sets are
superpositions of point encodings; labeled scenes additionally bind each
point to its class-label vector. Stored positions are recovered by
unbinding a class label (binding with its involution) and scanning the
result against a grid of point encodings, which yields a similarity
heatmap with peaks at the encoded locations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    _as_vector,
    bind,
    involution,
    is_unitary,
    power,
    random_unit,
    random_unitary,
    superpose,
    thresholds,
)

__all__ = [
    "GridSpec",
    "LabeledObject",
    "LabeledScene",
    "SimilarityHeatmap",
    "SpatialAxes",
    "decode_peaks",
    "encode_point",
    "encode_point_set",
    "encode_scene",
    "grid_encodings",
    "heatmap",
    "query_class",
    "random_vocabulary",
    "read_heatmap_csv",
    "read_scene_csv",
    "write_heatmap_csv",
    "write_scene_csv",
]


@dataclass(frozen=True, eq=False)
class SpatialAxes:
    """The two unitary basis vectors spanning the 2-D encoding frame."""

    x_axis: np.ndarray
    y_axis: np.ndarray
    dim: int

    def __post_init__(self):
        x = _as_vector(self.x_axis, "x_axis")
        y = _as_vector(self.y_axis, "y_axis")
        if x.size != self.dim or y.size != self.dim:
            raise ValueError("axis dimensions do not match declared dim")
        if not (is_unitary(x) and is_unitary(y)):
            raise ValueError("axis vectors must be unitary")
        if np.array_equal(x, y):
            raise ValueError("x and y axes must be distinct vectors")

    @classmethod
    def generate(cls, dim: int, rng: np.random.Generator) -> "SpatialAxes":
        """Draw a fresh pair of independent random unitary axes."""
        return cls(random_unitary(dim, rng), random_unitary(dim, rng), int(dim))


@dataclass(frozen=True)
class LabeledObject:
    """One scene object: a class index plus a 2-D position in scene units."""

    class_id: int
    x: float
    y: float

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"class_id must be >= 0, got {self.class_id}")
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError("object coordinates must be finite")


@dataclass(frozen=True, eq=False)
class LabeledScene:
    """A set of labeled objects plus the vocabulary of class-label vectors."""

    objects: tuple[LabeledObject, ...]
    vocabulary: tuple[np.ndarray, ...]

    def validate(self) -> None:
        """Check ids are in range and the vocabulary is unit-norm and
        pairwise quasi-orthogonal (|dot| below the strong threshold)."""
        if not self.vocabulary:
            raise ValueError("scene vocabulary is empty")
        vocab = np.stack([_as_vector(v, "vocabulary vector") for v in self.vocabulary])
        for obj in self.objects:
            if obj.class_id >= len(self.vocabulary):
                raise ValueError(
                    f"class_id {obj.class_id} out of range for vocabulary "
                    f"of size {len(self.vocabulary)}"
                )
        norms = np.linalg.norm(vocab, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("vocabulary vectors must be unit norm")
        strong = thresholds(vocab.shape[1]).strong
        gram = vocab @ vocab.T
        np.fill_diagonal(gram, 0.0)
        if np.any(np.abs(gram) >= strong):
            raise ValueError(
                "vocabulary vectors must be pairwise quasi-orthogonal "
                f"(|dot| < {strong:.4g})"
            )


@dataclass(frozen=True)
class GridSpec:
    """An evenly spaced sampling grid over a rectangular coordinate window."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("grid window must have positive extent")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 samples per axis")

    def x_coords(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    def y_coords(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)


# Window comfortably larger than the coordinate ranges used by the
# experiments; 0.25 spacing resolves the 0.4 membership box with margin.
DEFAULT_GRID = GridSpec(-5.0, 5.0, -5.0, 5.0, 41, 41)


@dataclass(frozen=True, eq=False)
class SimilarityHeatmap:
    """Similarities between one query vector and every grid point encoding.

    ``values[i, j]`` corresponds to x_coords()[i], y_coords()[j].
    ``normalized`` records whether the query vector was scaled to unit norm
    before taking dot products (cosine reading).
    """

    grid: GridSpec
    values: np.ndarray
    normalized: bool

    def __post_init__(self):
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("heatmap values must be finite")


def encode_point(axes: SpatialAxes, x: float, y: float) -> np.ndarray:
    """Encode the coordinate pair (x, y) as bind(X^x, Y^y).

    The result is itself unitary (product of unitary spectra), hence unit
    norm.
    """
    if not (np.isfinite(x) and np.isfinite(y)):
        raise ValueError(f"coordinates must be finite, got ({x}, {y})")
    return bind(power(axes.x_axis, x), power(axes.y_axis, y))


def encode_point_set(axes: SpatialAxes, points: Sequence[tuple[float, float]]) -> np.ndarray:
    """Superpose the encodings of a non-empty sequence of (x, y) pairs."""
    pts = list(points)
    if not pts:
        raise ValueError("encode_point_set requires at least one point")
    return superpose([encode_point(axes, x, y) for x, y in pts])


def encode_scene(axes: SpatialAxes, scene: LabeledScene) -> np.ndarray:
    """Encode a labeled scene: sum of label (*) point-encoding per object."""
    scene.validate()
    if not scene.objects:
        return np.zeros(axes.dim)
    terms = [
        bind(scene.vocabulary[o.class_id], encode_point(axes, o.x, o.y))
        for o in scene.objects
    ]
    return superpose(terms)


def query_class(scene_vec, label) -> np.ndarray:
    """Unbind one class from a scene vector via the label's involution.

    The result approximates the superposed point encodings of that class's
    objects, plus crosstalk noise from every other bound term.
    """
    return bind(scene_vec, involution(label))


def random_vocabulary(size: int, dim: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Draw ``size`` unit-norm class labels that are pairwise quasi-orthogonal.

    Vectors violating the strong-threshold bound against an earlier pick are
    redrawn, which keeps the scene-vocabulary invariant by construction.
    """
    if size < 1:
        raise ValueError(f"vocabulary size must be >= 1, got {size}")
    strong = thresholds(dim).strong
    vocab: list[np.ndarray] = []
    for _ in range(size):
        while True:
            v = random_unit(dim, rng)
            if all(abs(float(v @ u)) < strong for u in vocab):
                vocab.append(v)
                break
    return vocab


def _dot_weights(dim: int) -> np.ndarray:
    """Per-frequency weights making a real dot product out of half spectra.

    For real u, v with rfft coefficients U, V of length H:
    dot(u, v) = (1/D) * sum_j w[j] * Re(U[j] * conj(V[j])), where the
    conjugate-paired interior frequencies count twice.
    """
    w = np.full(dim // 2 + 1, 2.0)
    w[0] = 1.0
    if dim % 2 == 0:
        w[-1] = 1.0
    return w


def _grid_spectra(axes: SpatialAxes, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Half spectra of the per-axis power encodings for every grid line.

    Returns (gx, gy) with shapes (nx, H) and (ny, H); the spectrum of the
    grid-node encoding at (x_i, y_j) is gx[i] * gy[j].
    """
    hx = np.fft.rfft(axes.x_axis)
    hy = np.fft.rfft(axes.y_axis)
    gx = np.power(hx[None, :], grid.x_coords()[:, None])
    gy = np.power(hy[None, :], grid.y_coords()[:, None])
    return gx, gy


def grid_encodings(axes: SpatialAxes, grid: GridSpec) -> np.ndarray:
    """Point encodings for every grid node, shape (nx, ny, dim).

    Built in the spectral domain in one batch; identical (to rounding) to
    calling :func:`encode_point` per node.
    """
    gx, gy = _grid_spectra(axes, grid)
    spec = gx[:, None, :] * gy[None, :, :]
    return np.fft.irfft(spec, n=axes.dim, axis=-1)


def _heatmap_values(
    query_spectrum: np.ndarray, gx: np.ndarray, gy: np.ndarray, dim: int
) -> np.ndarray:
    """Dot products of a query (given by its half spectrum) with every grid
    node encoding, via Parseval; shape (nx, ny)."""
    weighted = (_dot_weights(dim) * query_spectrum)[None, :] * np.conj(gx)
    return (weighted @ np.conj(gy).T).real / dim


def heatmap(
    query_vec,
    axes: SpatialAxes,
    grid: GridSpec,
    normalize: bool = False,
    signed: bool = False,
) -> SimilarityHeatmap:
    """Similarity of ``query_vec`` against every grid point encoding.

    With ``normalize`` the query is scaled to unit norm first (cosine
    reading, the mode used for figure-style outputs). Values are absolute
    by default; ``signed`` keeps the raw signs for visualization.
    """
    q = _as_vector(query_vec, "query_vec")
    if q.size != axes.dim:
        raise ValueError(f"query dimension {q.size} does not match axes dim {axes.dim}")
    if normalize:
        n = float(np.linalg.norm(q))
        if n > 0.0:
            q = q / n
    gx, gy = _grid_spectra(axes, grid)
    values = _heatmap_values(np.fft.rfft(q), gx, gy, axes.dim)
    if not signed:
        values = np.abs(values)
    return SimilarityHeatmap(grid=grid, values=values, normalized=normalize)


def decode_peaks(hm: SimilarityHeatmap, threshold: float) -> list[tuple[float, float, float]]:
    """Local maxima of a heatmap with value >= threshold.

    A peak must be strictly greater than each of its existing 4-neighbors
    (boundary cells compare against fewer). Returned as (x, y, value)
    sorted by descending value; ties follow row order (ascending y, then
    ascending x, matching the CSV layout).
    """
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    v = hm.values
    strict = np.ones(v.shape, dtype=bool)
    strict[1:, :] &= v[1:, :] > v[:-1, :]
    strict[:-1, :] &= v[:-1, :] > v[1:, :]
    strict[:, 1:] &= v[:, 1:] > v[:, :-1]
    strict[:, :-1] &= v[:, :-1] > v[:, 1:]
    strict &= v >= threshold
    xs = hm.grid.x_coords()
    ys = hm.grid.y_coords()
    peaks = [
        (float(xs[i]), float(ys[j]), float(v[i, j]))
        for i, j in np.argwhere(strict)
    ]
    peaks.sort(key=lambda p: (-p[2], p[1], p[0]))
    return peaks


# ---------------------------------------------------------------------------
# CSV interchange formats


def _fmt(x: float) -> str:
    return repr(float(x))


def write_heatmap_csv(path: str | Path, hm: SimilarityHeatmap) -> None:
    """Write a heatmap to CSV.

    First row: x_min,x_max,y_min,y_max,nx,ny,normalized (normalized as
    0/1). Then ny rows of nx values; each row is one fixed y with x
    ascending, rows ascending in y.
    """
    lines = [
        ",".join(
            [
                _fmt(hm.grid.x_min),
                _fmt(hm.grid.x_max),
                _fmt(hm.grid.y_min),
                _fmt(hm.grid.y_max),
                str(hm.grid.nx),
                str(hm.grid.ny),
                "1" if hm.normalized else "0",
            ]
        )
    ]
    for j in range(hm.grid.ny):
        lines.append(",".join(_fmt(x) for x in hm.values[:, j]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_heatmap_csv(path: str | Path) -> SimilarityHeatmap:
    """Read a heatmap written by :func:`write_heatmap_csv`."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty heatmap file")
    head = lines[0].split(",")
    if len(head) != 7:
        raise ValueError(f"{path}: line 1: expected 7 header fields, got {len(head)}")
    x_min, x_max, y_min, y_max = (float(t) for t in head[:4])
    nx, ny = int(head[4]), int(head[5])
    normalized = head[6] == "1"
    if len(lines) != 1 + ny:
        raise ValueError(f"{path}: expected {ny} value rows, got {len(lines) - 1}")
    values = np.empty((nx, ny))
    for j, line in enumerate(lines[1:]):
        row = [float(t) for t in line.split(",")]
        if len(row) != nx:
            raise ValueError(f"{path}: line {j + 2}: expected {nx} values, got {len(row)}")
        values[:, j] = row
    grid = GridSpec(x_min, x_max, y_min, y_max, nx, ny)
    return SimilarityHeatmap(grid=grid, values=values, normalized=normalized)


SCENE_HEADER = ["class_id", "x", "y"]


def write_scene_csv(path: str | Path, objects: Iterable[LabeledObject]) -> None:
    """Write scene objects as CSV with header ``class_id,x,y``."""
    lines = [",".join(SCENE_HEADER)]
    for o in objects:
        lines.append(f"{o.class_id},{_fmt(o.x)},{_fmt(o.y)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_scene_csv(path: str | Path) -> list[LabeledObject]:
    """Read scene objects from CSV; errors name the offending line number."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]  # drop blank lines
    if not rows:
        raise ValueError(f"{path}: scene file is empty")
    if [c.strip() for c in rows[0]] != SCENE_HEADER:
        raise ValueError(f"{path}: line 1: expected header 'class_id,x,y'")
    if len(rows) == 1:
        raise ValueError(f"{path}: scene file contains no objects")
    objects = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ValueError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
        try:
            objects.append(LabeledObject(int(row[0]), float(row[1]), float(row[2])))
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return objects
