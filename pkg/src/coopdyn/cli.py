"""Command-line entry point: scenario-driven runs with deterministic artifacts.

Usage: coopdyn <command> --scenario <path> [--out <dir>] [--seed <u64>]
Exit codes: 0 success, 1 error, 2 inconclusive verdict.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .fractal import (classify_plane_grid, julia_backward_cloud,
                      kernel_julia_probe)
from .geometry import RationalMap
from .grids import GridGeometry
from .io import Scenario, ScenarioError, emit_outputs, parse_scenario, \
    write_csv, write_json, write_pgm16
from .minimal import classify_minimal_set, find_attracting_minimal_sets, \
    scan_family_bifurcation, test_mean_stability
from .operator import GridFunction, TransitionStencil, \
    estimate_convergence_rate, solve_T_fixed_point
from .oracle1d import devils_staircase, lebesgue_singular, takagi_classic
from .rng import make_rng
from .semigroup import DiscreteMeasure, GeneratorSystem
from .takagi import analytic_exponents, omega_integral_mc, takagi_series, \
    zeta_field

COMMANDS = ("render-julia", "classify-basins", "find-minimal-sets",
            "test-mean-stability", "solve-T", "takagi", "rate", "exponents",
            "scan-bifurcation", "oracle-1d", "probe-kernel")

_STOCHASTIC = set(COMMANDS) - {"oracle-1d"}


def bundled_scenario(name: str) -> Path:
    return Path(__file__).parent / "scenarios" / f"{name}.json"


def _require_measure(sc: Scenario) -> DiscreteMeasure:
    if sc.measure is None:
        raise ScenarioError("this command requires maps and weights")
    return sc.measure


def _setup(sc: Scenario, out: Path):
    """Shared pipeline: minimal sets, basin grid, stencil."""
    measure = _require_measure(sc)
    sets = find_attracting_minimal_sets(measure, grid=sc.grid,
                                        rng=make_rng(sc.seed, 1))
    basins = classify_plane_grid(measure, sets, sc.grid, depth=sc.depth,
                                 n_words=sc.n_words, rng=make_rng(sc.seed, 2))
    return measure, sets, basins


def _emit_grid(out: Path, name: str, gf: GridFunction, artifacts: dict,
               lo=None, hi=None, desc=""):
    meta = write_pgm16(out / f"{name}.pgm", gf.values, lo=lo, hi=hi)
    meta.update({"value_at_infinity": gf.value_at_infinity,
                 "grid": {"center": [gf.grid.center.real, gf.grid.center.imag],
                          "half_width": gf.grid.half_width, "n": gf.grid.n},
                 "extrapolated_cells": int(gf.extrapolated.sum())})
    write_json(out / f"{name}.pgm.json", meta)
    artifacts[f"{name}.pgm"] = desc or name
    artifacts[f"{name}.pgm.json"] = f"sidecar for {name}.pgm"


def _cloud_csv(out: Path, name: str, cloud, artifacts: dict, desc: str):
    fin = cloud.finite_points()
    write_csv(out / name, ["re", "im"], [(z.real, z.imag) for z in fin])
    artifacts[name] = desc


def cmd_render_julia(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure = _require_measure(sc)
    n_points = int(sc.options.get("n_points", 20000))
    burn_in = int(sc.options.get("burn_in", 100))
    cloud = julia_backward_cloud(measure, n_points, burn_in,
                                 rng=make_rng(sc.seed, 1))
    fin = cloud.finite_points()
    iy, ix = sc.grid.cell_index(fin[sc.grid.contains(fin)])
    counts = np.zeros((sc.grid.n, sc.grid.n))
    np.add.at(counts, (iy, ix), 1.0)
    gf = GridFunction(sc.grid, np.log1p(counts))
    _emit_grid(out, "julia", gf, artifacts, desc="log(1+count) Julia histogram")
    _cloud_csv(out, "julia_points.csv", cloud, artifacts, "Julia sample points")
    return {"n_points": len(cloud), "n_at_infinity": int(cloud.inf_mask.sum())}


def cmd_classify_basins(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure, sets, basins = _setup(sc, out)
    gf = GridFunction(sc.grid, basins.labels.astype(float) + 2.0)
    _emit_grid(out, "basins", gf, artifacts, lo=0.0,
               hi=float(len(sets) + 2), desc="basin labels (+2 offset)")
    return {"fractions": basins.fractions(),
            "legend": {"0": "undecided", "1": "escaping",
                       **{str(k + 2): f"basin_{k}" for k in basins.representatives}}}


def cmd_find_minimal_sets(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure = _require_measure(sc)
    sets = find_attracting_minimal_sets(measure, grid=sc.grid,
                                        rng=make_rng(sc.seed, 1))
    julia = julia_backward_cloud(measure, int(sc.options.get("n_points", 4000)),
                                 rng=make_rng(sc.seed, 2))
    rows = []
    for k, s in enumerate(sets):
        cls = classify_minimal_set(measure, s, julia, rng=make_rng(sc.seed, 3))
        if s.is_infinity:
            rows.append({"index": k, "infinity": True, "period": s.period,
                         "classification": cls})
            continue
        _cloud_csv(out, f"minimal_set_{k}.csv", s.cloud, artifacts,
                   f"points of minimal set {k}")
        rows.append({"index": k, "infinity": False, "period": s.period,
                     "classification": cls, "n_points": len(s.cloud)})
    return {"n_minimal_sets": len(sets), "sets": rows}


def cmd_test_mean_stability(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure = _require_measure(sc)
    rep = test_mean_stability(measure, sc.grid,
                              search_depth=int(sc.options.get("search_depth", 3)),
                              rng=make_rng(sc.seed, 1))
    return {"verdict": rep.verdict, "note": rep.note,
            "failing_fraction": rep.failing_fraction,
            "n_minimal_sets": len(rep.minimal_sets),
            "counterexample_classification":
                None if rep.counterexample is None
                else rep.counterexample.classification}


def cmd_solve_T(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure, sets, basins = _setup(sc, out)
    target = sc.options.get("target", "infinity")
    stencil = TransitionStencil(measure, basins)
    if target == "infinity":
        L = "infinity"
    else:
        L = sets[int(target)]
    T = solve_T_fixed_point(measure, L, basins, tol=sc.tolerance, stencil=stencil)
    _emit_grid(out, "T", T, artifacts, lo=0.0, hi=1.0,
               desc=f"fixed point T for target {target}")
    return {"target": str(target), "residual": T.residual, "n_iter": T.n_iter,
            "tolerance": sc.tolerance}


def _rate_test_function(grid: GridGeometry) -> GridFunction:
    r = np.abs(grid.points() - grid.center)
    w = grid.half_width
    vals = np.exp(-(r / (w / 4.0)) ** 2) * np.sin(np.pi * r / w)
    return GridFunction(grid, vals)


def cmd_rate(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure, sets, basins = _setup(sc, out)
    n_iters = int(sc.options.get("n_iters", 40))
    est = estimate_convergence_rate(measure, _rate_test_function(sc.grid),
                                    basins, n_iters=n_iters)
    write_csv(out / "increments.csv", ["n", "increment"],
              list(enumerate(est.increments)))
    artifacts["increments.csv"] = "sup-norm iterate increments"
    return {"lam_hat": est.lam_hat, "r_squared": est.r_squared,
            "below_noise_floor": est.below_noise_floor,
            "nonuniform_decay": est.nonuniform_decay, "n_iters": n_iters}


def cmd_takagi(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure, sets, basins = _setup(sc, out)
    stencil = TransitionStencil(measure, basins)
    T = solve_T_fixed_point(measure, "infinity", basins, tol=sc.tolerance,
                            stencil=stencil)
    est = estimate_convergence_rate(measure, _rate_test_function(sc.grid),
                                    basins, stencil=stencil)
    lam = min(est.lam_hat, 0.95) if not est.below_noise_floor else 0.5
    i = int(sc.options.get("generator_index", 0))
    zeta = zeta_field(measure, T, i, basins, stencil=stencil)
    psi = takagi_series(measure, zeta, basins, lam_hat=lam,
                        tol=float(sc.options.get("series_tol", 1e-3)),
                        stencil=stencil)
    _emit_grid(out, "psi", psi, artifacts, desc="complex Takagi function psi")
    _emit_grid(out, "zeta", zeta, artifacts, desc="series source term zeta")
    return {"generator_index": i, "lam_hat": lam, "n_terms": psi.n_terms,
            "residual": psi.residual}


def cmd_exponents(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure = _require_measure(sc)
    n_words = int(sc.options.get("n_words", 200))
    word_len = int(sc.options.get("word_len", 60))
    om = omega_integral_mc(measure, n_words, word_len, rng=make_rng(sc.seed, 1))
    rep = analytic_exponents(measure, om, n_words=n_words, word_len=word_len,
                             seed=sc.seed)
    return asdict(rep)


def _quadratic_family(radii, n_gens: int, scale: float):
    family = []
    for k, R in enumerate(radii):
        cs = [scale * R * np.exp(2j * np.pi * j / n_gens) for j in range(n_gens)]
        maps = tuple(RationalMap([c, 0, 1]) for c in cs)
        t = k / (len(radii) - 1) if len(radii) > 1 else 0.0
        family.append((t, DiscreteMeasure(GeneratorSystem(maps),
                                          (1.0 / n_gens,) * n_gens)))
    return family


def cmd_scan_bifurcation(sc: Scenario, out: Path, artifacts: dict) -> dict:
    radii = sc.options.get("radii", [0.05, 0.1, 2.5])
    n_gens = int(sc.options.get("n_generators", 3))
    scale = float(sc.options.get("scale", 0.9))
    family = _quadratic_family(radii, n_gens, scale)
    res = scan_family_bifurcation(family, sc.grid, rng_seed=sc.seed)
    write_csv(out / "scan.csv", ["t", "n_minimal_sets"],
              [(r.t, r.n_minimal_sets) for r in res.rows])
    artifacts["scan.csv"] = "minimal-set counts along the family"
    return {"rows": [{"t": r.t, "n_minimal_sets": r.n_minimal_sets,
                      "verdict": r.verdict,
                      "undecided_fraction": r.undecided_fraction}
                     for r in res.rows],
            "warnings": res.warnings}


def cmd_oracle_1d(sc: Scenario, out: Path, artifacts: dict) -> dict:
    xs = np.linspace(0.0, 1.0, int(sc.options.get("n_grid", 1025)))
    a = float(sc.options.get("lebesgue_a", 0.3))
    for name, vals, desc in (
            ("takagi.csv", takagi_classic(xs, 40), "classical Takagi function"),
            ("lebesgue.csv", lebesgue_singular(a, xs), f"Lebesgue singular L_{a}"),
            ("devils_staircase.csv", devils_staircase(xs), "Cantor function")):
        write_csv(out / name, ["x", "value"], zip(xs, vals))
        artifacts[name] = desc
    return {"n_grid": xs.size, "lebesgue_a": a}


def cmd_probe_kernel(sc: Scenario, out: Path, artifacts: dict) -> dict:
    measure, sets, basins = _setup(sc, out)
    cloud = julia_backward_cloud(measure, int(sc.options.get("n_points", 20000)),
                                 rng=make_rng(sc.seed, 3))
    rep = kernel_julia_probe(measure, cloud, basins,
                             word_depth=int(sc.options.get("word_depth", 20)),
                             n_probe=int(sc.options.get("n_probe", 100)),
                             rng=make_rng(sc.seed, 4))
    return {"fraction_escorted": rep.fraction_escorted,
            "max_depth_needed": rep.max_depth_needed,
            "n_probed": rep.n_probed, "verdict": rep.verdict}


_DISPATCH = {
    "render-julia": cmd_render_julia,
    "classify-basins": cmd_classify_basins,
    "find-minimal-sets": cmd_find_minimal_sets,
    "test-mean-stability": cmd_test_mean_stability,
    "solve-T": cmd_solve_T,
    "takagi": cmd_takagi,
    "rate": cmd_rate,
    "exponents": cmd_exponents,
    "scan-bifurcation": cmd_scan_bifurcation,
    "oracle-1d": cmd_oracle_1d,
    "probe-kernel": cmd_probe_kernel,
}


def run_command(name: str, sc: Scenario, out_dir) -> int:
    """Dispatch a command, write artifacts and manifest.json; returns the
    exit status (0 ok, 2 inconclusive)."""
    if name not in _DISPATCH:
        raise ScenarioError(f"unknown command {name!r}")
    if name in _STOCHASTIC and sc.seed is None:
        raise ScenarioError(f"command {name} is stochastic and needs a seed")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict = {}
    report = _DISPATCH[name](sc, out, artifacts)
    report = {"command": name, "seed": sc.seed, "tolerance": sc.tolerance,
              **report}
    write_json(out / "report.json", report)
    artifacts["report.json"] = "run report"
    emit_outputs(artifacts, out, scenario=sc, version=__version__)
    if report.get("verdict") == "inconclusive":
        return 2
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="coopdyn",
                                 description="random rational dynamics toolkit")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--scenario", required=True)
    ap.add_argument("--out", default="out")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)
    try:
        sc = parse_scenario(args.scenario)
        if args.seed is not None:
            sc.seed = args.seed
        return run_command(args.command, sc, args.out)
    except Exception as e:  # deliberate broad catch at the process boundary
        print(f"coopdyn: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
