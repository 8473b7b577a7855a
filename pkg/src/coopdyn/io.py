"""Scenario files and deterministic artifacts: JSON reports, P5 rasters, CSV."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import RationalMap
from .grids import GridGeometry
from .semigroup import DiscreteMeasure, GeneratorSystem


class ScenarioError(ValueError):
    pass


_TOP_KEYS = {"name", "maps", "weights", "seed", "grid", "depth", "n_words",
             "tolerance", "options"}
_MAP_KEYS = {"num", "den"}
_GRID_KEYS = {"center", "half_width", "n"}


@dataclass
class Scenario:
    """A validated run configuration: the measure, grid, and command options."""

    name: str
    measure: DiscreteMeasure | None
    grid: GridGeometry
    seed: int | None
    depth: int = 200
    n_words: int = 8
    tolerance: float = 1e-6
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _reject_unknown(d: dict, allowed: set, path: str):
    for k in d:
        if k not in allowed:
            raise ScenarioError(f"unknown key at {path}.{k}")


def _complex_list(values, path: str) -> list[complex]:
    out = []
    for i, v in enumerate(values):
        if isinstance(v, (int, float)):
            out.append(complex(v))
        elif isinstance(v, list) and len(v) == 2:
            out.append(complex(v[0], v[1]))
        else:
            raise ScenarioError(f"coefficient at {path}[{i}] must be a number or [re, im]")
    return out


def parse_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file; unknown keys are rejected with
    their field paths, weights must form a probability vector."""
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"scenario file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError(f"malformed JSON in {p}: {e}") from e
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "$")

    measure = None
    if "maps" in raw or "weights" in raw:
        if "maps" not in raw or "weights" not in raw:
            raise ScenarioError("maps and weights must be given together")
        maps = []
        for i, mspec in enumerate(raw["maps"]):
            if not isinstance(mspec, dict):
                raise ScenarioError(f"$.maps[{i}] must be an object")
            _reject_unknown(mspec, _MAP_KEYS, f"$.maps[{i}]")
            if "num" not in mspec:
                raise ScenarioError(f"missing key at $.maps[{i}].num")
            num = _complex_list(mspec["num"], f"$.maps[{i}].num")
            den = _complex_list(mspec.get("den", [1.0]), f"$.maps[{i}].den")
            maps.append(RationalMap(num, den))
        weights = raw["weights"]
        if not isinstance(weights, list) or len(weights) != len(maps):
            raise ScenarioError("weights must be a list matching maps")
        w = np.asarray(weights, dtype=float)
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ScenarioError("weights must be positive and sum to 1")
        measure = DiscreteMeasure(GeneratorSystem(tuple(maps)), tuple(float(x) for x in w))

    gspec = raw.get("grid", {})
    _reject_unknown(gspec, _GRID_KEYS, "$.grid")
    center = gspec.get("center", [0.0, 0.0])
    grid = GridGeometry(center=complex(center[0], center[1]),
                        half_width=float(gspec.get("half_width", 4.0)),
                        n=int(gspec.get("n", 1024)))

    tol = float(raw.get("tolerance", 1e-6))
    if tol <= 0:
        raise ScenarioError("tolerance must be positive")
    seed = raw.get("seed")
    if seed is not None:
        seed = int(seed)
        if seed < 0:
            raise ScenarioError("seed must be a nonnegative integer")
    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise ScenarioError("$.options must be an object")
    return Scenario(name=str(raw.get("name", p.stem)), measure=measure, grid=grid,
                    seed=seed, depth=int(raw.get("depth", 200)),
                    n_words=int(raw.get("n_words", 8)), tolerance=tol,
                    options=options, raw=raw)


# -- artifact writers --------------------------------------------------------

def write_pgm16(path, values: np.ndarray, lo: float | None = None,
                hi: float | None = None) -> dict:
    """16-bit big-endian P5 raster, values linearly mapped from [lo, hi].

    Returns the sidecar metadata (written next to the image as .json)."""
    v = np.asarray(values, dtype=float)
    lo = float(np.min(v)) if lo is None else float(lo)
    hi = float(np.max(v)) if hi is None else float(hi)
    span = hi - lo if hi > lo else 1.0
    pix = np.clip((v - lo) / span * 65535.0, 0, 65535).astype(">u2")
    path = Path(path)
    with open(path, "wb") as f:
        f.write(f"P5\n{v.shape[1]} {v.shape[0]}\n65535\n".encode())
        f.write(pix.tobytes())
    meta = {"min_value": lo, "max_value": hi, "shape": list(v.shape)}
    return meta


def write_csv(path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def emit_outputs(artifacts: dict, directory, scenario: Scenario | None = None,
                 version: str = "") -> dict:
    """Record artifacts in manifest.json: file list with sha256 hashes, a
    scenario echo, and the tool version.

    artifacts maps file names (already written into directory) to short
    descriptions."""
    directory = Path(directory)
    if not directory.is_dir():
        raise OSError(f"output directory not writable: {directory}")
    entries = []
    for name in sorted(artifacts):
        f = directory / name
        if not f.exists():
            raise OSError(f"artifact missing: {f}")
        entries.append({"file": name, "sha256": _sha256(f),
                        "description": artifacts[name]})
    manifest = {"artifacts": entries, "version": version,
                "scenario": scenario.raw if scenario is not None else None}
    write_json(directory / "manifest.json", manifest)
    return manifest
