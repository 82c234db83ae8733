"""Capacity experiments: how much fits in one vector before noise wins.

Two experiment drivers produce per-trial similarity samples:

* ``run_superposition``: sum n random unit vectors and measure the cosine
  similarity of the sum against members (the summands) and non-members
  (fresh vectors from the same vocabulary draw).
* ``run_spatial``: encode n labeled objects at random positions, with the
  class sizes given by an integer partition of n, then unbind each class
  and scan a coordinate grid. Grid cells within the membership box of one
  of that class's objects count as members, everything else as
  non-members.

Every trial derives its random stream from (seed, experiment, dim, n,
partition index, trial), so results are reproducible and independent of
worker count or scheduling order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .spatial import (
    DEFAULT_GRID,
    GridSpec,
    SpatialAxes,
    _dot_weights,
    _grid_spectra,
    _heatmap_values,
    random_vocabulary,
)

__all__ = [
    "CapacityRecord",
    "SPATIAL_N_CAP",
    "SpatialConfig",
    "SummaryRow",
    "SuperpositionConfig",
    "group_by_class_size",
    "partitions",
    "read_records_csv",
    "run_spatial",
    "run_superposition",
    "summarize",
    "write_records_csv",
    "write_summary_csv",
]

log = logging.getLogger(__name__)

# Enumerating all partitions beyond this total needs an explicit sampling
# bound (max_partitions); p(n) grows super-polynomially.
SPATIAL_N_CAP = 15

_PARTITIONS_N_MAX = 64

# Sub-stream tags so the two experiments and the partition sampler never
# share a random stream even under identical (seed, dim, n) tuples.
_STREAM_SUPERPOSITION = 0
_STREAM_SPATIAL = 1
_STREAM_PARTITION_SAMPLE = 2
_STREAM_SCENE_TOOL = 3


def partitions(n: int) -> list[tuple[int, ...]]:
    """All integer partitions of n as non-increasing tuples.

    Emitted in reverse-lexicographic order: (n), (n-1, 1), ..., (1,)*n.
    """
    if int(n) != n or not 1 <= n <= _PARTITIONS_N_MAX:
        raise ValueError(f"n must be an integer in [1, {_PARTITIONS_N_MAX}], got {n}")

    def gen(remaining: int, cap: int):
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, cap), 0, -1):
            for rest in gen(remaining - first, first):
                yield (first,) + rest

    return list(gen(int(n), int(n)))


@dataclass(frozen=True)
class SuperpositionConfig:
    """Sweep settings for the superposition experiment."""

    dims: tuple[int, ...]
    n_values: tuple[int, ...]
    vocab_repeats: int = 3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(sorted(set(int(d) for d in self.dims))))
        object.__setattr__(
            self, "n_values", tuple(sorted(set(int(n) for n in self.n_values)))
        )
        if not self.dims:
            raise ValueError("dims must be non-empty")
        if any(d < 16 for d in self.dims):
            raise ValueError(f"dims must all be >= 16, got {self.dims}")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n_values must be non-empty positive integers")
        if self.vocab_repeats < 1:
            raise ValueError("vocab_repeats must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class SpatialConfig:
    """Sweep settings for the spatial (convolutive-power) experiment."""

    dims: tuple[int, ...]
    n_values: tuple[int, ...]
    trials: int = 3
    grid: GridSpec = DEFAULT_GRID
    membership_eps: float = 0.4
    coord_range: tuple[float, float] = (-4.0, 4.0)
    seed: int = 0
    max_partitions: int | None = None
    # Reuse one position for all same-class objects instead of drawing a
    # fresh position per object.
    duplicate_positions: bool = False
    # Record query-side cosine similarities (scale each unbound class query
    # to unit norm before the grid scan).
    normalize_query: bool = True

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(sorted(set(int(d) for d in self.dims))))
        object.__setattr__(
            self, "n_values", tuple(sorted(set(int(n) for n in self.n_values)))
        )
        object.__setattr__(self, "coord_range", tuple(float(c) for c in self.coord_range))
        if not self.dims or any(d < 2 for d in self.dims):
            raise ValueError("dims must be non-empty and all >= 2")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n_values must be non-empty positive integers")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.membership_eps > 0:
            raise ValueError(f"membership_eps must be > 0, got {self.membership_eps}")
        lo, hi = self.coord_range
        if not lo < hi:
            raise ValueError(f"coord_range must be an increasing interval, got {self.coord_range}")
        eps = self.membership_eps
        if (
            lo - eps < self.grid.x_min
            or hi + eps > self.grid.x_max
            or lo - eps < self.grid.y_min
            or hi + eps > self.grid.y_max
        ):
            raise ValueError(
                "coord_range padded by membership_eps must lie inside the grid window"
            )
        if self.max_partitions is not None and self.max_partitions < 1:
            raise ValueError("max_partitions must be >= 1 when given")
        if any(n > SPATIAL_N_CAP for n in self.n_values) and self.max_partitions is None:
            raise ValueError(
                f"n above {SPATIAL_N_CAP} enumerates too many partitions; "
                "set max_partitions (CLI: --max-partitions) to sample a subset"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class CapacityRecord:
    """Similarity samples from one experiment observation.

    For superposition runs there is one record per (dim, n, trial) and
    ``partition``/``class_size`` are empty. For spatial runs there is one
    record per class query, with ``class_size`` the number of same-class
    objects encoded for that query.
    """

    experiment: str
    dim: int
    n_total: int
    partition: tuple[int, ...]
    class_size: int
    trial: int
    member_sims: np.ndarray
    nonmember_sims: np.ndarray


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))


def _run_tasks(fn: Callable, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))  # map preserves task order


def run_superposition(config: SuperpositionConfig, workers: int = 1) -> list[CapacityRecord]:
    """Run the superposition sweep; one record per (dim, n, repeat)."""

    def one(task: tuple[int, int, int]) -> CapacityRecord:
        dim, n, rep = task
        rng = _rng(config.seed, _STREAM_SUPERPOSITION, dim, n, rep)
        vocab = rng.standard_normal((2 * n, dim))
        vocab /= np.linalg.norm(vocab, axis=1, keepdims=True)
        s = vocab[:n].sum(axis=0)
        dots = vocab @ s
        cosines = dots / float(np.linalg.norm(s))
        log.debug(
            "superposition dim=%d n=%d rep=%d raw-dot member median %.4f",
            dim, n, rep, float(np.median(dots[:n])),
        )
        return CapacityRecord(
            experiment="superposition",
            dim=dim,
            n_total=n,
            partition=(),
            class_size=0,
            trial=rep,
            member_sims=cosines[:n].copy(),
            nonmember_sims=cosines[n:].copy(),
        )

    tasks = [
        (dim, n, rep)
        for dim in config.dims
        for n in config.n_values
        for rep in range(config.vocab_repeats)
    ]
    return _run_tasks(one, tasks, workers)


def _partitions_for(n: int, config: SpatialConfig) -> list[tuple[int, ...]]:
    parts = partitions(n)
    if config.max_partitions is not None and len(parts) > config.max_partitions:
        rng = _rng(config.seed, _STREAM_PARTITION_SAMPLE, n)
        chosen = sorted(rng.choice(len(parts), size=config.max_partitions, replace=False))
        parts = [parts[i] for i in chosen]
    return parts


def _member_mask(
    grid: GridSpec, positions: np.ndarray, eps: float
) -> np.ndarray:
    """Boolean (nx, ny) mask of grid nodes inside some object's eps box.

    A node is a member when |x - x~| < eps and |y - y~| < eps for at least
    one of the given positions.
    """
    xs = grid.x_coords()
    ys = grid.y_coords()
    mask = np.zeros((grid.nx, grid.ny), dtype=bool)
    for px, py in positions:
        mask |= np.outer(np.abs(xs - px) < eps, np.abs(ys - py) < eps)
    return mask


def _spatial_trial_inputs(
    config: SpatialConfig, dim: int, n: int, p_idx: int, part: tuple[int, ...], trial: int
) -> tuple[SpatialAxes, list[np.ndarray], list[np.ndarray]]:
    """Axes, vocabulary, and per-class position blocks for one trial.

    Draw order is fixed (axes, vocabulary, positions) so a trial is fully
    determined by (seed, dim, n, partition index, trial).
    """
    rng = _rng(config.seed, _STREAM_SPATIAL, dim, n, p_idx, trial)
    axes = SpatialAxes.generate(dim, rng)
    vocab = random_vocabulary(len(part), dim, rng)
    lo, hi = config.coord_range
    positions = rng.uniform(lo, hi, size=(n, 2))
    blocks = []
    start = 0
    for k in part:
        block = positions[start : start + k]
        if config.duplicate_positions:
            block = np.repeat(block[:1], k, axis=0)
        blocks.append(block)
        start += k
    return axes, vocab, blocks


def run_spatial(config: SpatialConfig, workers: int = 1) -> list[CapacityRecord]:
    """Run the spatial sweep; one record per (dim, n, partition, trial, class).

    The grid scan is evaluated in the spectral half-domain in one batch per
    trial; the result matches building the scene with
    :func:`hrrlab.spatial.encode_scene` and scanning each unbound class
    with :func:`hrrlab.spatial.heatmap` (the test suite pins the two routes
    against each other).
    """

    def one(task) -> list[CapacityRecord]:
        dim, n, p_idx, part, trial = task
        axes, vocab, blocks = _spatial_trial_inputs(config, dim, n, p_idx, part, trial)
        gx, gy = _grid_spectra(axes, config.grid)
        weights = _dot_weights(dim)
        hx = np.fft.rfft(axes.x_axis)
        hy = np.fft.rfft(axes.y_axis)
        label_specs = np.stack([np.fft.rfft(v) for v in vocab])
        # Scene spectrum: sum over objects of label * X^x * Y^y spectra.
        scene_spec = np.zeros(hx.size, dtype=np.complex128)
        for class_id, block in enumerate(blocks):
            px = np.power(hx[None, :], block[:, 0:1])
            py = np.power(hy[None, :], block[:, 1:2])
            scene_spec += (label_specs[class_id] * px * py).sum(axis=0)
        records = []
        for class_id, k in enumerate(part):
            # Unbind the class label: bind with its involution conjugates
            # the label spectrum.
            q_spec = scene_spec * np.conj(label_specs[class_id])
            if config.normalize_query:
                norm = float(np.sqrt((weights * np.abs(q_spec) ** 2).sum() / dim))
                if norm > 0.0:
                    q_spec = q_spec / norm
            values = np.abs(_heatmap_values(q_spec, gx, gy, dim))
            mask = _member_mask(config.grid, blocks[class_id], config.membership_eps)
            records.append(
                CapacityRecord(
                    experiment="spatial",
                    dim=dim,
                    n_total=n,
                    partition=part,
                    class_size=k,
                    trial=trial,
                    member_sims=values[mask],
                    nonmember_sims=values[~mask],
                )
            )
        return records

    tasks = [
        (dim, n, p_idx, part, trial)
        for dim in config.dims
        for n in config.n_values
        for p_idx, part in enumerate(_partitions_for(n, config))
        for trial in range(config.trials)
    ]
    nested = _run_tasks(one, tasks, workers)
    return [rec for group in nested for rec in group]


def group_by_class_size(records: Sequence[CapacityRecord]) -> list[CapacityRecord]:
    """Pool spatial class-query samples by class size k across n and partitions.

    Returns one aggregate record per (dim, k); n_total, partition and trial
    are cleared since they no longer apply.
    """
    if any(r.experiment != "spatial" for r in records):
        raise ValueError("group_by_class_size expects spatial records only")
    groups: dict[tuple[int, int], tuple[list, list]] = {}
    for r in records:
        member, nonmember = groups.setdefault((r.dim, r.class_size), ([], []))
        member.append(r.member_sims)
        nonmember.append(r.nonmember_sims)
    out = []
    for (dim, k), (member, nonmember) in sorted(groups.items()):
        out.append(
            CapacityRecord(
                experiment="spatial",
                dim=dim,
                n_total=0,
                partition=(),
                class_size=k,
                trial=0,
                member_sims=np.concatenate(member),
                nonmember_sims=np.concatenate(nonmember),
            )
        )
    return out


@dataclass(frozen=True)
class SummaryRow:
    """Box-plot statistics for one pooled sample set."""

    experiment: str
    dim: int
    group_key: int
    role: str
    count: int
    q1: float
    median: float
    q3: float
    lo_whisker: float
    hi_whisker: float


def _tukey_box(samples: np.ndarray) -> tuple[float, float, float, float, float]:
    """Median, Tukey hinges, and 1.5*IQR whiskers clamped to data points."""
    a = np.sort(np.asarray(samples, dtype=np.float64))
    n = a.size
    median = float(np.median(a))
    lower = a[: (n + 1) // 2]  # median-inclusive halves
    upper = a[n // 2 :]
    q1 = float(np.median(lower))
    q3 = float(np.median(upper))
    iqr = q3 - q1
    lo = float(a[a >= q1 - 1.5 * iqr][0])
    hi = float(a[a <= q3 + 1.5 * iqr][-1])
    return q1, median, q3, lo, hi


def summarize(
    records: Sequence[CapacityRecord], group_by: str = "n_total"
) -> list[SummaryRow]:
    """Pooled box statistics per (experiment, dim, group key, role).

    ``group_by`` selects the key: "n_total" (superposition and per-n
    spatial views) or "class_size" (per-class spatial view).
    """
    if not records:
        raise ValueError("summarize requires at least one record")
    if group_by not in ("n_total", "class_size"):
        raise ValueError(f"unknown group_by {group_by!r}")
    groups: dict[tuple[str, int, int, str], list[np.ndarray]] = {}
    for r in records:
        key = r.n_total if group_by == "n_total" else r.class_size
        for role, sims in (("member", r.member_sims), ("nonmember", r.nonmember_sims)):
            if len(sims):
                groups.setdefault((r.experiment, r.dim, key, role), []).append(sims)
    rows = []
    for (experiment, dim, key, role), chunks in sorted(groups.items()):
        samples = np.concatenate(chunks)
        q1, median, q3, lo, hi = _tukey_box(samples)
        rows.append(
            SummaryRow(
                experiment=experiment,
                dim=dim,
                group_key=key,
                role=role,
                count=int(samples.size),
                q1=q1,
                median=median,
                q3=q3,
                lo_whisker=lo,
                hi_whisker=hi,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# CSV interchange formats

RECORDS_HEADER = "experiment,dim,n_total,partition,class_size,trial,role,similarity"
SUMMARY_HEADER = "experiment,dim,group_key,role,count,q1,median,q3,lo_whisker,hi_whisker"


def _fmt(x: float) -> str:
    return repr(float(x))


def _partition_str(partition: tuple[int, ...]) -> str:
    return "-".join(str(k) for k in partition)


def write_records_csv(path: str | Path, records: Sequence[CapacityRecord]) -> None:
    """Write one row per similarity sample, deterministically ordered.

    Rows are stable-sorted by (experiment, dim, n_total, partition, trial,
    role, sample index); record generation order breaks the remaining ties,
    so identical configs produce byte-identical files.
    """
    rows = []
    for r in records:
        for role, sims in (("member", r.member_sims), ("nonmember", r.nonmember_sims)):
            for idx, s in enumerate(sims):
                rows.append((r, role, idx, float(s)))
    rows.sort(
        key=lambda row: (
            row[0].experiment,
            row[0].dim,
            row[0].n_total,
            row[0].partition,
            row[0].trial,
            row[1],
            row[2],
        )
    )
    lines = [RECORDS_HEADER]
    for r, role, _idx, s in rows:
        class_size = str(r.class_size) if r.experiment == "spatial" else ""
        lines.append(
            ",".join(
                [
                    r.experiment,
                    str(r.dim),
                    str(r.n_total),
                    _partition_str(r.partition),
                    class_size,
                    str(r.trial),
                    role,
                    _fmt(s),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_records_csv(path: str | Path) -> list[CapacityRecord]:
    """Read records written by :func:`write_records_csv`.

    Samples are regrouped by (experiment, dim, n_total, partition,
    class_size, trial); per-class identity of same-size classes within one
    trial is not preserved by the file format.
    """
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != RECORDS_HEADER:
        raise ValueError(f"{path}: missing records header")
    groups: dict[tuple, tuple[list, list]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        f = line.split(",")
        if len(f) != 8:
            raise ValueError(f"{path}: line {lineno}: expected 8 fields, got {len(f)}")
        experiment, dim, n_total, part_s, class_size, trial, role, sim = f
        partition = tuple(int(t) for t in part_s.split("-")) if part_s else ()
        key = (
            experiment,
            int(dim),
            int(n_total),
            partition,
            int(class_size) if class_size else 0,
            int(trial),
        )
        member, nonmember = groups.setdefault(key, ([], []))
        (member if role == "member" else nonmember).append(float(sim))
    return [
        CapacityRecord(
            experiment=key[0],
            dim=key[1],
            n_total=key[2],
            partition=key[3],
            class_size=key[4],
            trial=key[5],
            member_sims=np.array(member),
            nonmember_sims=np.array(nonmember),
        )
        for key, (member, nonmember) in groups.items()
    ]


def write_summary_csv(path: str | Path, rows: Sequence[SummaryRow]) -> None:
    lines = [SUMMARY_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.experiment,
                    str(r.dim),
                    str(r.group_key),
                    r.role,
                    str(r.count),
                    _fmt(r.q1),
                    _fmt(r.median),
                    _fmt(r.q3),
                    _fmt(r.lo_whisker),
                    _fmt(r.hi_whisker),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")
