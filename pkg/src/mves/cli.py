"""Command-line interface.

Subcommands::

    mves figure5  --config cfg.json [--n 3 --grid 0.6,0.75 --trials 10 ...]
    mves unmix    --pixels data.csv --n 3 [--out endmembers.csv --report run.json]
    mves purity   --abundances ab.csv [--samples 20000 --tol 1e-3]
    mves check    [--filter fact2] [--seed 0] [--json-out report.json]

Config files are flat JSON documents whose keys mirror
:class:`ExperimentConfig`; command-line flags override config keys.  CSV
matrices are laid out one column per pixel and one row per band or
abundance component, decimal floats, no index column.  All emitted files
use LF line endings and 17-significant-digit floats, so identical configs
and seeds reproduce identical bytes.

Exit codes: 0 success, 2 malformed config/CSV, 3 data fails model
requirements (rank, simplex membership), 1 nothing succeeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .datagen import Scene, SceneConfig, generate_scene
from .errors import (
    AffineDimensionError,
    MvesError,
    PurityCapError,
    ValidationError,
)
from .metrics import rms_angle_error
from .purity import identifiability_threshold, purity_report
from .solver import MvesConfig, MvesResult, solve_mves
from . import checks as checks_mod


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Purity-sweep recipe (one scene + solve + score per grid point and trial)."""

    n_endmembers: int = 3
    n_bands: int = 50
    n_pixels: int = 500
    purity_grid: tuple[float, ...] = (0.6, 0.65, 0.7, 0.75, 0.8, 0.9)
    trials_per_point: int = 10
    base_seed: int = 0
    max_cycles: int | None = None
    rel_tol: float = 1e-8
    containment_tol: float = 1e-7
    init_strategy: str = "greedy_volume_max"
    restarts: int = 1
    output_csv_path: str = "figure5.csv"
    output_svg_path: str | None = None

    def __post_init__(self):
        floor = 1.0 / math.sqrt(self.n_endmembers)
        grid = tuple(float(r) for r in self.purity_grid)
        if not grid:
            raise ValidationError("purity grid is empty")
        for r in grid:
            if not (floor < r <= 1.0):
                raise ValidationError(
                    f"grid value {r} outside (1/sqrt({self.n_endmembers}), 1]"
                )
        if self.trials_per_point < 1:
            raise ValidationError("trials_per_point must be >= 1")
        object.__setattr__(self, "purity_grid", grid)

    def solver_config(self, seed: int) -> MvesConfig:
        return MvesConfig(
            max_cycles=self.max_cycles,
            rel_tol=self.rel_tol,
            containment_tol=self.containment_tol,
            init_strategy=self.init_strategy,
            restarts=self.restarts,
            seed=seed,
        )


def derive_trial_seed(base_seed: int, r_index: int, trial: int) -> int:
    """Stable per-(grid point, trial) seed: a PCG seed-sequence hash of the
    triple, so trials own independent streams regardless of execution order."""
    ss = np.random.SeedSequence((int(base_seed), int(r_index), int(trial)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _load_experiment_config(path: str | None, overrides: dict) -> ExperimentConfig:
    data: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config root must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "purity_grid" in data:
        data["purity_grid"] = tuple(float(r) for r in data["purity_grid"])
    return ExperimentConfig(**data)


_SWEEP_COLUMNS = (
    "kind", "n_endmembers", "r_index", "r", "trial", "seed", "status",
    "phi_degrees", "volume", "cycles_used", "converged",
    "phi_mean", "phi_std", "trials_ok",
)


def run_sweep_trial(cfg: ExperimentConfig, r: float, seed: int):
    """One (scene, solve, score) realization; returns (phi, result, scene)."""
    scene_cfg = SceneConfig(
        n_endmembers=cfg.n_endmembers,
        n_bands=cfg.n_bands,
        n_pixels=cfg.n_pixels,
        purity_cap=r,
        seed=seed,
    )
    scene = generate_scene(scene_cfg)
    result = solve_mves(scene.pixels.T, cfg.n_endmembers, cfg.solver_config(seed))
    phi = rms_angle_error(scene.endmembers, result.estimated_endmembers.vertices.T)
    return phi.phi_degrees, result, scene


def cmd_figure5_sweep(cfg: ExperimentConfig) -> int:
    """Purity sweep: one CSV row per (grid point, trial), a summary row per
    grid point, optional SVG of mean error vs purity cap."""
    rows = []
    summaries = []
    any_ok = False
    for r_index, r in enumerate(cfg.purity_grid):
        phis = []
        for trial in range(cfg.trials_per_point):
            seed = derive_trial_seed(cfg.base_seed, r_index, trial)
            base = {
                "kind": "trial", "n_endmembers": cfg.n_endmembers,
                "r_index": r_index, "r": r, "trial": trial, "seed": seed,
            }
            try:
                phi, result, _ = run_sweep_trial(cfg, r, seed)
            except MvesError as exc:
                rows.append({**base, "status": f"error: {exc}"})
                continue
            any_ok = True
            phis.append(phi)
            rows.append({
                **base, "status": "ok", "phi_degrees": phi,
                "volume": result.volume, "cycles_used": result.cycles_used,
                "converged": result.converged,
            })
        mean = float(np.mean(phis)) if phis else float("nan")
        std = float(np.std(phis, ddof=1)) if len(phis) > 1 else 0.0
        summaries.append({
            "kind": "summary", "n_endmembers": cfg.n_endmembers,
            "r_index": r_index, "r": r, "status": "ok" if phis else "empty",
            "phi_mean": mean, "phi_std": std if phis else float("nan"),
            "trials_ok": len(phis),
        })
    _write_rows(cfg.output_csv_path, rows + summaries)
    if cfg.output_svg_path is not None:
        _write_sweep_svg(cfg, summaries)
    return 0 if any_ok else 1


def _write_rows(path: str, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(col)) for col in _SWEEP_COLUMNS) + "\n")


def read_sweep_csv(path: str):
    """Parse a sweep CSV back into (trial_rows, summary_rows) dicts."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    trials, summaries = [], []
    for line in lines[1:]:
        cells = dict(zip(header, line.split(",")))
        (trials if cells["kind"] == "trial" else summaries).append(cells)
    return trials, summaries


def _write_sweep_svg(cfg: ExperimentConfig, summaries: list[dict]) -> None:
    pts = [(s["r"], s["phi_mean"], s["phi_std"]) for s in summaries
           if s["trials_ok"] > 0]
    thr = identifiability_threshold(cfg.n_endmembers)
    w, h, ml, mr, mt, mb = 640, 420, 70, 20, 20, 50
    xs = [p[0] for p in pts] + [thr]
    x_lo, x_hi = min(xs) - 0.02, max(xs) + 0.02
    y_hi = max([p[1] + p[2] for p in pts] + [1.0]) * 1.1

    def sx(x):
        return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr)

    def sy(y):
        return h - mb - y / y_hi * (h - mt - mb)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{ml}" y1="{h - mb}" x2="{w - mr}" y2="{h - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{h - mb}" stroke="black"/>',
        f'<text x="{(w + ml) / 2:.1f}" y="{h - 12}" text-anchor="middle" '
        f'font-size="14">purity cap r</text>',
        f'<text x="18" y="{(h - mb + mt) / 2:.1f}" text-anchor="middle" '
        f'font-size="14" transform="rotate(-90 18 {(h - mb + mt) / 2:.1f})">'
        f'mean RMS angle error (degrees)</text>',
        f'<line x1="{sx(thr):.2f}" y1="{mt}" x2="{sx(thr):.2f}" y2="{h - mb}" '
        f'stroke="gray" stroke-dasharray="6,4"/>',
        f'<text x="{sx(thr) + 4:.2f}" y="{mt + 14}" font-size="12" fill="gray">'
        f'r = 1/sqrt({cfg.n_endmembers - 1}) = {thr:.4f}</text>',
    ]
    if pts:
        poly = " ".join(f"{sx(r):.2f},{sy(m):.2f}" for r, m, _ in pts)
        parts.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" '
                     f'stroke-width="2"/>')
        for r, m, s in pts:
            parts.append(f'<circle cx="{sx(r):.2f}" cy="{sy(m):.2f}" r="3" '
                         f'fill="steelblue"/>')
            parts.append(
                f'<line x1="{sx(r):.2f}" y1="{sy(max(m - s, 0.0)):.2f}" '
                f'x2="{sx(r):.2f}" y2="{sy(m + s):.2f}" stroke="steelblue"/>')
    parts.append("</svg>")
    with open(cfg.output_svg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def read_csv_matrix(path: str, has_header: bool = False) -> np.ndarray:
    """Dense float matrix from CSV; raises ValueError with the line number."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    start = 1 if has_header else 0
    rows = []
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        parts = line.split(",")
        if width is None:
            width = len(parts)
        elif len(parts) != width:
            raise ValueError(f"{path}: line {lineno}: expected {width} fields, "
                             f"got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def write_csv_matrix(path: str, matrix: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in np.atleast_2d(matrix):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def cmd_unmix(pixels_csv: str, n_endmembers: int, out_csv: str,
              report_json: str | None, has_header: bool,
              solver_cfg: MvesConfig, truth_csv: str | None = None) -> int:
    try:
        bands_by_pixels = read_csv_matrix(pixels_csv, has_header)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        result = solve_mves(bands_by_pixels.T, n_endmembers, solver_cfg)
    except (AffineDimensionError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    endmembers = result.estimated_endmembers.vertices.T  # bands x n
    write_csv_matrix(out_csv, endmembers)
    report = {
        "volume": result.volume,
        "cycles_used": result.cycles_used,
        "converged": result.converged,
        "all_points_enclosed": result.all_points_enclosed,
    }
    if truth_csv is not None:
        truth = read_csv_matrix(truth_csv, has_header)
        report["phi_degrees"] = rms_angle_error(truth, endmembers).phi_degrees
    text = json.dumps(report, indent=2, sort_keys=True)
    if report_json is not None:
        with open(report_json, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_purity_report(abundances_csv: str, samples: int, tol: float,
                      seed: int, simplex_tol: float, has_header: bool) -> int:
    try:
        comps_by_pixels = read_csv_matrix(abundances_csv, has_header)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    vectors = comps_by_pixels.T  # one abundance vector per row
    neg = vectors.min(axis=1)
    sums = np.abs(vectors.sum(axis=1) - 1.0)
    bad = np.maximum(-neg, sums)
    if float(bad.max()) > simplex_tol:
        worst = int(np.argmax(bad))
        print(
            f"error: column {worst} is off the unit simplex "
            f"(worst violation {bad[worst]:.3e} > tolerance {simplex_tol:g})",
            file=sys.stderr,
        )
        return 3
    try:
        report = purity_report(vectors, n_samples=samples, tol=tol, seed=seed)
    except MvesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_check_suite(name_filter: str | None, seed: int,
                    json_out: str | None = None) -> int:
    outcomes = checks_mod.default_suite(seed)
    if name_filter:
        outcomes = [o for o in outcomes if name_filter in o.name]
        if not outcomes:
            print(f"warning: no checks match filter {name_filter!r}", file=sys.stderr)
    for o in outcomes:
        print(f"{'PASS' if o.passed else 'FAIL'} {o.name}: {o.details}")
    doc = json.dumps([o.to_dict() for o in outcomes], indent=2, sort_keys=True)
    if json_out is not None:
        with open(json_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(doc + "\n")
    else:
        print(doc)
    return 0 if all(o.passed for o in outcomes) else 1


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--init-strategy", default="greedy_volume_max",
                   choices=("greedy_volume_max", "regular_inflated"))
    p.add_argument("--max-cycles", type=int, default=None)
    p.add_argument("--rel-tol", type=float, default=1e-8)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mves",
        description="Simplex-volume-minimization unmixing and purity analysis",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    f5 = sub.add_parser("figure5", help="purity sweep with CSV/SVG outputs")
    f5.add_argument("--config", help="JSON config file (flat ExperimentConfig keys)")
    f5.add_argument("--n", type=int, dest="n_endmembers")
    f5.add_argument("--bands", type=int, dest="n_bands")
    f5.add_argument("--pixels", type=int, dest="n_pixels")
    f5.add_argument("--grid", help="comma-separated purity caps, e.g. 0.6,0.75")
    f5.add_argument("--trials", type=int, dest="trials_per_point")
    f5.add_argument("--seed", type=int, dest="base_seed")
    f5.add_argument("--out", dest="output_csv_path")
    f5.add_argument("--svg", dest="output_svg_path")
    f5.add_argument("--full-scale", action="store_true",
                    help="paper-scale run: 224 bands, 1000 pixels, 50 trials")

    un = sub.add_parser("unmix", help="estimate endmembers from a pixel CSV")
    un.add_argument("--pixels", required=True, help="CSV, one column per pixel")
    un.add_argument("--n", type=int, required=True, help="number of endmembers")
    un.add_argument("--out", default="endmembers.csv")
    un.add_argument("--report", default=None, help="write the JSON run report here")
    un.add_argument("--truth", default=None,
                    help="optional truth endmember CSV; adds phi_degrees to the report")
    un.add_argument("--has-header", action="store_true")
    _add_solver_flags(un)

    pu = sub.add_parser("purity", help="purity report for an abundance CSV")
    pu.add_argument("--abundances", required=True, help="CSV, one column per pixel")
    pu.add_argument("--samples", type=int, default=20000)
    pu.add_argument("--tol", type=float, default=1e-3)
    pu.add_argument("--seed", type=int, default=0)
    pu.add_argument("--simplex-tol", type=float, default=1e-9)
    pu.add_argument("--has-header", action="store_true")

    ck = sub.add_parser("check", help="run the verification check suite")
    ck.add_argument("--filter", default=None, help="substring filter on check names")
    ck.add_argument("--seed", type=int, default=0)
    ck.add_argument("--json-out", default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "figure5":
        overrides = {
            "n_endmembers": args.n_endmembers,
            "n_bands": args.n_bands,
            "n_pixels": args.n_pixels,
            "trials_per_point": args.trials_per_point,
            "base_seed": args.base_seed,
            "output_csv_path": args.output_csv_path,
            "output_svg_path": args.output_svg_path,
        }
        if args.grid is not None:
            overrides["purity_grid"] = tuple(float(x) for x in args.grid.split(","))
        if args.full_scale:
            overrides.setdefault("n_bands", 224)
            overrides["n_bands"] = overrides["n_bands"] or 224
            overrides["n_pixels"] = overrides["n_pixels"] or 1000
            overrides["trials_per_point"] = overrides["trials_per_point"] or 50
        try:
            cfg = _load_experiment_config(args.config, overrides)
        except (OSError, ValueError, ValidationError, json.JSONDecodeError) as exc:
            print(f"error: bad config: {exc}", file=sys.stderr)
            return 2
        return cmd_figure5_sweep(cfg)
    if args.command == "unmix":
        cfg = MvesConfig(
            max_cycles=args.max_cycles, rel_tol=args.rel_tol,
            init_strategy=args.init_strategy, restarts=args.restarts,
            seed=args.seed,
        )
        return cmd_unmix(args.pixels, args.n, args.out, args.report,
                         args.has_header, cfg, args.truth)
    if args.command == "purity":
        return cmd_purity_report(args.abundances, args.samples, args.tol,
                                 args.seed, args.simplex_tol, args.has_header)
    if args.command == "check":
        return cmd_check_suite(args.filter, args.seed, args.json_out)
    raise AssertionError("unreachable")


def console_main() -> None:
    sys.exit(main())
