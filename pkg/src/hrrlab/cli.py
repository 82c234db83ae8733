"""Command-line entry point.

Subcommands:

* ``superposition``: run the superposition capacity sweep.
* ``spatial``: run the spatial (convolutive-power) capacity sweep.
* ``heatmap``: encode a scene CSV and write per-class similarity heatmaps.
* ``selftest``: run the oracle-equivalence checks and exit nonzero on
  failure.

Every experiment command writes its outputs plus a ``manifest.json``
recording the tool version, the fully resolved configuration, the master
seed, and a sha256 digest per output file. Flags override values from an
optional JSON config file (``--config``), which overrides built-in
defaults. ``HDC_SEED`` in the environment is the fallback seed when
neither source sets one.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import bind, involution, power, random_unit, random_unitary, similarity
from .capacity import (
    SpatialConfig,
    SuperpositionConfig,
    group_by_class_size,
    partitions,
    run_spatial,
    run_superposition,
    summarize,
    write_records_csv,
    write_summary_csv,
)
from .spatial import (
    DEFAULT_GRID,
    GridSpec,
    LabeledScene,
    SpatialAxes,
    SimilarityHeatmap,
    encode_scene,
    heatmap,
    query_class,
    random_vocabulary,
    read_scene_csv,
    write_heatmap_csv,
)

_SEED_ENV = "HDC_SEED"


def _parse_int_list(text: str) -> tuple[int, ...]:
    """Parse comma-separated integers with ``a..b`` and ``a..b..step`` ranges.

    Examples: "256,512", "1..8", "1,5..200..5".
    """
    values: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split("..")
        if len(parts) == 1:
            values.append(int(parts[0]))
        elif len(parts) in (2, 3):
            start, stop = int(parts[0]), int(parts[1])
            step = int(parts[2]) if len(parts) == 3 else 1
            if step < 1 or stop < start:
                raise ValueError(f"bad range {token!r}")
            values.extend(range(start, stop + 1, step))
        else:
            raise ValueError(f"bad range {token!r}")
    if not values:
        raise ValueError(f"no values in {text!r}")
    return tuple(values)


def _parse_grid(text: str) -> GridSpec:
    """Parse a grid as x_min,x_max,y_min,y_max,nx,ny."""
    parts = text.split(",")
    if len(parts) != 6:
        raise ValueError("grid must be x_min,x_max,y_min,y_max,nx,ny")
    return GridSpec(
        float(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]),
        int(parts[4]), int(parts[5]),
    )


def _grid_as_list(grid: GridSpec) -> list:
    return [grid.x_min, grid.x_max, grid.y_min, grid.y_max, grid.nx, grid.ny]


def _default_seed() -> int:
    env = os.environ.get(_SEED_ENV)
    return int(env) if env else 0


def _resolve(args: argparse.Namespace, config_keys: dict) -> dict:
    """Merge defaults, the optional JSON config file, and explicit flags.

    ``config_keys`` maps option name to (default, parser); flags that the
    user left unset (None) fall back to the config file, then the default.
    """
    file_values = {}
    if args.config is not None:
        with open(args.config) as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - set(config_keys)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    resolved = {}
    for key, (default, parse) in config_keys.items():
        flag_value = getattr(args, key)
        if flag_value is not None:
            resolved[key] = flag_value
        elif key in file_values:
            raw = file_values[key]
            resolved[key] = parse(raw) if isinstance(raw, str) and parse else raw
        else:
            resolved[key] = default
    return resolved


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out_dir: Path, command: str, config: dict, seed: int, files: list[Path]) -> Path:
    manifest = {
        "tool": "hrrlab",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": [
            {"path": f.name, "sha256": _digest(f)} for f in sorted(files)
        ],
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_superposition(args) -> int:
    resolved = _resolve(
        args,
        {
            "dims": ((256, 512, 1024), _parse_int_list),
            "n": (tuple([1] + list(range(5, 201, 5))), _parse_int_list),
            "repeats": (3, int),
            "seed": (_default_seed(), int),
            "workers": (os.cpu_count() or 1, int),
        },
    )
    config = SuperpositionConfig(
        dims=tuple(resolved["dims"]),
        n_values=tuple(resolved["n"]),
        vocab_repeats=resolved["repeats"],
        seed=resolved["seed"],
    )
    out = _out_dir(args)
    records = run_superposition(config, workers=resolved["workers"])
    records_path = out / "records.csv"
    write_records_csv(records_path, records)
    summary_path = out / "summary.csv"
    write_summary_csv(summary_path, summarize(records, group_by="n_total"))
    manifest_config = {
        "dims": list(config.dims),
        "n": list(config.n_values),
        "repeats": config.vocab_repeats,
        "seed": config.seed,
        "workers": resolved["workers"],
        "similarity": "cosine, pooled across vocabularies per n",
    }
    _write_manifest(out, "superposition", manifest_config, config.seed,
                    [records_path, summary_path])
    return 0


def _cmd_spatial(args) -> int:
    resolved = _resolve(
        args,
        {
            "dims": ((256, 512, 1024), _parse_int_list),
            "n": (tuple(range(1, 13)), _parse_int_list),
            "trials": (3, int),
            "eps": (0.4, float),
            "grid": (DEFAULT_GRID, _parse_grid),
            "coord_range": ((-4.0, 4.0), lambda s: tuple(float(t) for t in s.split(","))),
            "seed": (_default_seed(), int),
            "workers": (os.cpu_count() or 1, int),
            "max_partitions": (None, int),
            "duplicate_positions": (False, None),
            "raw_query": (False, None),
        },
    )
    grid = resolved["grid"]
    if not isinstance(grid, GridSpec):
        grid = _parse_grid(grid) if isinstance(grid, str) else GridSpec(*grid)
    config = SpatialConfig(
        dims=tuple(resolved["dims"]),
        n_values=tuple(resolved["n"]),
        trials=resolved["trials"],
        grid=grid,
        membership_eps=resolved["eps"],
        coord_range=tuple(resolved["coord_range"]),
        seed=resolved["seed"],
        max_partitions=resolved["max_partitions"],
        duplicate_positions=bool(resolved["duplicate_positions"]),
        normalize_query=not resolved["raw_query"],
    )
    out = _out_dir(args)
    records = run_spatial(config, workers=resolved["workers"])
    records_path = out / "records.csv"
    write_records_csv(records_path, records)
    summary_path = out / "summary_by_class_size.csv"
    write_summary_csv(
        summary_path, summarize(group_by_class_size(records), group_by="class_size")
    )
    manifest_config = {
        "dims": list(config.dims),
        "n": list(config.n_values),
        "trials": config.trials,
        "eps": config.membership_eps,
        "grid": _grid_as_list(config.grid),
        "coord_range": list(config.coord_range),
        "seed": config.seed,
        "workers": resolved["workers"],
        "max_partitions": config.max_partitions,
        "duplicate_positions": config.duplicate_positions,
        "raw_query": not config.normalize_query,
        "similarity": "absolute "
        + ("query-normalized (cosine)" if config.normalize_query else "raw dot"),
    }
    _write_manifest(out, "spatial", manifest_config, config.seed,
                    [records_path, summary_path])
    return 0


def _cmd_heatmap(args) -> int:
    resolved = _resolve(
        args,
        {
            "dim": (512, int),
            "grid": (DEFAULT_GRID, _parse_grid),
            "seed": (_default_seed(), int),
            "raw": (False, None),
            "signed": (False, None),
        },
    )
    grid = resolved["grid"]
    if not isinstance(grid, GridSpec):
        grid = _parse_grid(grid) if isinstance(grid, str) else GridSpec(*grid)
    objects = read_scene_csv(args.scene)
    dim = resolved["dim"]
    seed = resolved["seed"]
    normalize = not resolved["raw"]
    signed = bool(resolved["signed"])
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    axes = SpatialAxes.generate(dim, rng)
    vocab = random_vocabulary(max(o.class_id for o in objects) + 1, dim, rng)
    scene = LabeledScene(objects=tuple(objects), vocabulary=tuple(vocab))
    scene_vec = encode_scene(axes, scene)
    out = _out_dir(args)
    files = []
    class_ids = sorted({o.class_id for o in objects})
    joint = None
    for cid in class_ids:
        hm = heatmap(
            query_class(scene_vec, vocab[cid]), axes, grid,
            normalize=normalize, signed=signed,
        )
        path = out / f"heatmap_class_{cid}.csv"
        write_heatmap_csv(path, hm)
        files.append(path)
        joint = hm.values if joint is None else np.maximum(joint, hm.values)
    joint_path = out / "heatmap_joint.csv"
    write_heatmap_csv(
        joint_path, SimilarityHeatmap(grid=grid, values=joint, normalized=normalize)
    )
    files.append(joint_path)
    manifest_config = {
        "scene": str(args.scene),
        "dim": dim,
        "grid": _grid_as_list(grid),
        "seed": seed,
        "raw": not normalize,
        "signed": signed,
    }
    _write_manifest(out, "heatmap", manifest_config, seed, files)
    return 0


def _cmd_selftest(args) -> int:
    """Oracle-equivalence checks runnable without the test suite."""
    rng = np.random.default_rng(0)
    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures += 1

    for dim in (4, 8, 64, 256):
        worst = 0.0
        for _ in range(25):
            v, w = random_unit(dim, rng), random_unit(dim, rng)
            direct = np.zeros(dim)
            for j in range(dim):
                direct += v[j] * np.roll(w, j)
            worst = max(worst, float(np.max(np.abs(bind(v, w) - direct))))
        check(f"bind matches direct circular convolution (D={dim})", worst < 1e-10)

    u = random_unitary(512, rng)
    v = random_unit(512, rng)
    check("unitary binding preserves norm",
          abs(np.linalg.norm(bind(v, u)) - 1.0) < 1e-9)
    check("exponent additivity on unitary vectors",
          float(np.max(np.abs(bind(power(u, 1.3), power(u, 0.9)) - power(u, 2.2)))) < 1e-8)
    e0 = np.zeros(512)
    e0[0] = 1.0
    check("involution is the binding inverse of a unitary vector",
          float(np.max(np.abs(bind(u, involution(u)) - e0))) < 1e-10)
    check("power(v, 0) is the identity vector",
          float(np.max(np.abs(power(v, 0) - e0))) < 1e-10)
    check("partitions(6) has 11 elements", len(partitions(6)) == 11)
    print("selftest:", "ok" if failures == 0 else f"{failures} failure(s)")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hrrlab",
        description="Holographic vector algebra capacity experiments",
    )
    parser.add_argument("--version", action="version", version=f"hrrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", default=None,
                       help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (default: ${_SEED_ENV} or 0)")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("superposition", help="superposition capacity sweep")
    add_common(p)
    p.add_argument("--dims", type=_parse_int_list, default=None,
                   help="vector dimensions (default: 256,512,1024)")
    p.add_argument("--n", type=_parse_int_list, default=None,
                   help="summand counts, e.g. 1..200 or 1,5..200..5 "
                        "(default: 1,5..200..5)")
    p.add_argument("--repeats", type=int, default=None,
                   help="random vocabularies per (dim, n) (default: 3)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: logical cores); "
                        "outputs are identical for any value")
    p.set_defaults(handler=_cmd_superposition)

    p = sub.add_parser("spatial", help="spatial encoding capacity sweep")
    add_common(p)
    p.add_argument("--dims", type=_parse_int_list, default=None,
                   help="vector dimensions (default: 256,512,1024)")
    p.add_argument("--n", type=_parse_int_list, default=None,
                   help="total object counts (default: 1..12)")
    p.add_argument("--trials", type=int, default=None,
                   help="trials per (dim, n, partition) (default: 3)")
    p.add_argument("--eps", type=float, default=None,
                   help="membership box half-width in scene units (default: 0.4)")
    p.add_argument("--grid", type=_parse_grid, default=None,
                   help="x_min,x_max,y_min,y_max,nx,ny "
                        "(default: -5,5,-5,5,41,41)")
    p.add_argument("--coord-range", dest="coord_range", default=None,
                   type=lambda s: tuple(float(t) for t in s.split(",")),
                   help="object coordinate interval lo,hi (default: -4,4)")
    p.add_argument("--max-partitions", dest="max_partitions", type=int, default=None,
                   help="sample at most this many partitions per n "
                        "(required for n above 15)")
    p.add_argument("--duplicate-positions", dest="duplicate_positions",
                   action="store_true", default=None,
                   help="reuse one position for all same-class objects")
    p.add_argument("--raw-query", dest="raw_query", action="store_true", default=None,
                   help="record raw dot products instead of query-normalized "
                        "cosines")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: logical cores); "
                        "outputs are identical for any value")
    p.set_defaults(handler=_cmd_spatial)

    p = sub.add_parser("heatmap", help="similarity heatmaps for one scene CSV")
    add_common(p)
    p.add_argument("--scene", required=True, help="scene CSV (class_id,x,y)")
    p.add_argument("--dim", type=int, default=None,
                   help="vector dimension (default: 512)")
    p.add_argument("--grid", type=_parse_grid, default=None,
                   help="x_min,x_max,y_min,y_max,nx,ny "
                        "(default: -5,5,-5,5,41,41)")
    p.add_argument("--raw", action="store_true", default=None,
                   help="skip query normalization (default: normalized)")
    p.add_argument("--signed", action="store_true", default=None,
                   help="keep similarity signs (default: absolute values)")
    p.set_defaults(handler=_cmd_heatmap)

    p = sub.add_parser("selftest", help="run oracle-equivalence checks")
    p.set_defaults(handler=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
