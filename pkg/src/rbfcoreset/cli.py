"""Command-line front end.

Exit codes: 0 success, 2 I/O or parse error, 3 precondition violated (e.g. a
point outside the unit ball without ``--normalize``), 4 validation failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as fio
from .errors import InvalidInputError, PreconditionError
from .evaluation import evaluate, sample_queries
from .geometry import WeightedPointSet, normalize_to_unit_ball
from .rbfnn import FuncApproxConfig, function_approx_experiment, surface_dump
from .sampling import build_coreset, uniform_coreset
from .sensitivity import (
    SensitivityProfile,
    brute_force_sensitivity,
    laplacian_sensitivity_bounds,
    lower_bound_instance,
    rbf_sensitivity_bounds,
)

log = logging.getLogger("rbfcoreset")

EXIT_OK, EXIT_IO, EXIT_PRECONDITION, EXIT_VALIDATION = 0, 2, 3, 4
LAPLACIAN_QUERY_RADIUS = 10.0


class ValidationFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str] = None
    format: Optional[str] = None
    loss: str = "rbf"
    radius: float = 1.0
    size: int = 0
    seed: int = 0
    mode: str = "lemma"
    normalize: bool = False
    query_count: int = 1000
    query_radius: Optional[float] = None
    output_path: Optional[str] = None
    report_path: Optional[str] = None

    def validate(self):
        if self.loss == "rbf" and not self.radius >= 1.0:
            raise InvalidInputError("--radius must be >= 1 for the RBF loss")
        if self.command in ("build", "select") and self.size < 1:
            raise InvalidInputError("--size must be >= 1")


# -- reports -----------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, np.integer):
        return int(v)
    return v


def format_report(title: str, fields: dict, timings: Optional[dict] = None) -> str:
    """Key-value text followed by a JSON section; timings are kept in their own block."""
    lines = [f"# {title}"]
    for k, v in fields.items():
        if isinstance(v, (dict, list, np.ndarray)):
            continue
        lines.append(f"{k}: {v}")
    if timings:
        lines.append("")
        lines.append("# timings (seconds)")
        for k, v in timings.items():
            lines.append(f"{k}: {v:.4f}")
    lines.append("")
    lines.append("# machine-readable")
    lines.append(json.dumps(_jsonable(fields), sort_keys=True))
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    marker = "# machine-readable\n"
    return json.loads(text.split(marker, 1)[1].strip().splitlines()[0])


def _emit(cfg: RunConfig, title: str, fields: dict, timings: Optional[dict] = None):
    text = format_report(title, fields, timings)
    if cfg.report_path:
        Path(cfg.report_path).write_text(text)
    else:
        sys.stdout.write(text)


# -- shared steps -------------------------------------------------------------


def _load(cfg: RunConfig) -> tuple[WeightedPointSet, WeightedPointSet]:
    if not cfg.input_path:
        raise InvalidInputError("--input is required")
    raw = fio.read_points(cfg.input_path, cfg.format)
    P = normalize_to_unit_ball(raw) if cfg.normalize else raw
    return raw, P


def _effective_radius(cfg: RunConfig, P: WeightedPointSet) -> float:
    # R is given in input coordinates; the bounds need R >= 1
    return max(1.0, cfg.radius / P.scale)


def _profile(cfg: RunConfig, P: WeightedPointSet) -> SensitivityProfile:
    if cfg.loss == "rbf":
        return rbf_sensitivity_bounds(P, _effective_radius(cfg, P), cfg.mode)
    if cfg.loss == "laplacian":
        return laplacian_sensitivity_bounds(P)
    raise InvalidInputError(f"unknown loss {cfg.loss!r}")


def _profile_fields(profile: SensitivityProfile) -> dict:
    b = profile.bounds
    return {
        "loss": profile.loss,
        "mode": profile.mode,
        "radius": profile.radius,
        "total_sensitivity": profile.total,
        "total_sensitivity_bound": profile.total_bound,
        "bound_min": float(b.min()),
        "bound_max": float(b.max()),
        "bound_mean": float(b.mean()),
        "conditioner_distortion": profile.conditioner_distortion,
        "saturated": profile.saturated,
    }


def advisory_sample_size(loss: str, R: float, d: int, n: int, eps: float = 0.1, delta: float = 0.1) -> float:
    """Order-of-magnitude sample size from the worst-case size bounds (constants dropped)."""
    if loss == "rbf":
        return math.exp(min(12 * R * R, 700)) * R * R * d**1.5 / eps**2 * (R * R + math.log(d) + math.log(1 / delta))
    return math.sqrt(n) * d**1.25 / eps**2 * (math.log(n) + math.log(max(d, 2)) + math.log(1 / delta))


def _query_radius(cfg: RunConfig, P: WeightedPointSet) -> float:
    if cfg.query_radius is not None:
        return cfg.query_radius / P.scale
    return _effective_radius(cfg, P) if cfg.loss == "rbf" else LAPLACIAN_QUERY_RADIUS


# -- commands -----------------------------------------------------------------


def cmd_build(cfg: RunConfig) -> int:
    cfg.validate()
    t0 = time.perf_counter()
    raw, P = _load(cfg)
    t1 = time.perf_counter()
    profile = _profile(cfg, P)
    t2 = time.perf_counter()
    coreset = build_coreset(P, profile, cfg.size, cfg.seed)
    t3 = time.perf_counter()
    if cfg.output_path:
        fio.write_coreset(coreset, cfg.output_path)
    fields = {
        "command": "build",
        "n": P.n,
        "d": P.d,
        "scale": P.scale,
        "m": cfg.size,
        "seed": cfg.seed,
        "coreset_size": coreset.size,
        "coreset_weight_sum": float(coreset.weights.sum()),
        "input_weight_sum": float(P.weights.sum()),
        **_profile_fields(profile),
        "advisory_theoretical_m": advisory_sample_size(cfg.loss, profile.radius or 1.0, P.d, P.n),
    }
    _emit(cfg, "coreset build", fields, {"load": t1 - t0, "sensitivity": t2 - t1, "sampling": t3 - t2})
    return EXIT_OK


def cmd_eval(cfg: RunConfig, coreset_path: str, baseline: str = "none", allow_outside: bool = False) -> int:
    _, P = _load(cfg)
    coreset = fio.read_coreset(coreset_path, P.n)
    radius = _query_radius(cfg, P)
    queries = sample_queries(P.d, cfg.query_count, radius, cfg.seed, include_data_points=P)
    base = None
    if baseline == "uniform":
        m = cfg.size or int(round(coreset.weights.size))
        base = uniform_coreset(P, m, cfg.seed)
    rbf_radius = _effective_radius(cfg, P) if cfg.loss == "rbf" else None
    report = evaluate(P, coreset, queries, cfg.loss, radius=rbf_radius, allow_outside=allow_outside, baseline=base)
    fields = {"command": "eval", "n": P.n, "query_radius": radius, **report.summary()}
    if report.comparison is not None:
        fields["uniform_sup_error"] = report.comparison.sup_error
        fields["uniform_mean_error"] = report.comparison.mean_error
    _emit(cfg, "coreset evaluation", fields)
    return EXIT_OK


def cmd_select(cfg: RunConfig) -> int:
    """Export ``index,weight`` rows, reusing a cached sensitivity profile when possible."""
    cfg.validate()
    raw_bytes = Path(cfg.input_path).read_bytes()
    _, P = _load(cfg)
    key = fio.cache_key(raw_bytes, cfg.loss, cfg.mode, cfg.radius, cfg.normalize)
    cpath = fio.cache_path(cfg.input_path, key)
    cache_hit = False
    profile = None
    if cpath.exists():
        try:
            profile = fio.read_profile_cache(cpath)
            cache_hit = profile.n == P.n
        except (fio.FormatError, KeyError, OSError):
            profile = None
    if not cache_hit:
        profile = _profile(cfg, P)
        fio.write_profile_cache(profile, cpath)
    coreset = build_coreset(P, profile, cfg.size, cfg.seed)
    text = fio.format_coreset(coreset)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    fields = {
        "command": "select",
        "cache_hit": cache_hit,
        "cache_file": cpath.name,
        "m": cfg.size,
        "seed": cfg.seed,
        "selected": coreset.size,
        "selected_weight_sum": float(coreset.weights.sum()),
        "input_weight_sum": float(P.weights.sum()),
        "total_sensitivity": profile.total,
    }
    if cfg.report_path:
        Path(cfg.report_path).write_text(format_report("subset selection", fields))
    elif cfg.output_path:
        sys.stdout.write(format_report("subset selection", fields))
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, grid_resolution: int = 201) -> int:
    _, P = _load(cfg)
    profile = _profile(cfg, P)
    radius = _query_radius(cfg, P)
    oracle = brute_force_sensitivity(P, cfg.loss, radius, grid_resolution)
    slack = profile.bounds - oracle
    violations = np.flatnonzero(slack < -1e-9 * np.maximum(oracle, 1.0))
    fields = {
        "command": "oracle",
        **_profile_fields(profile),
        "query_radius": radius,
        "grid_resolution": grid_resolution,
        "oracle_total": float(oracle.sum()),
        "oracle_max": float(oracle.max()),
        "min_bound_over_oracle": float(np.min(profile.bounds / np.maximum(oracle, 1e-300))),
        "violations": int(violations.size),
        "violating_indices": violations[:20],
    }
    _emit(cfg, "sensitivity oracle", fields)
    if violations.size:
        raise ValidationFailure(f"{violations.size} oracle values exceed their bounds (first index {violations[0]})")
    return EXIT_OK


def cmd_lowerbound(cfg: RunConfig, n: int, d: int, generator: str) -> int:
    P = lower_bound_instance(n, d, generator)
    # x = p for every data point is the query set used by the argument
    logw = np.log(P.weights)[:, None]
    sq = ((P.points[:, None, :] - P.points[None, :, :]) ** 2).sum(-1)
    lt = logw - sq
    from scipy.special import logsumexp

    ratios = np.exp(lt - logsumexp(lt, axis=0, keepdims=True))
    per_point = ratios.max(axis=1)
    from scipy.spatial.distance import pdist

    fields = {
        "command": "lowerbound",
        "n": n,
        "d": d,
        "generator": generator,
        "radius": float(np.linalg.norm(P.points[0])),
        "min_pairwise_distance": float(pdist(P.points).min()),
        "sqrt_ln_n": math.sqrt(math.log(n)),
        "total_sensitivity_lower": float(per_point.sum()),
        "half_n": n / 2,
        "min_point_sensitivity": float(per_point.min()),
        "per_point": per_point,
    }
    _emit(cfg, "lower-bound instance", fields)
    if generator == "guaranteed_separation" and per_point.sum() < n / 2:
        raise ValidationFailure("total sensitivity below n/2")
    return EXIT_OK


def cmd_funcapprox(cfg: RunConfig, fa: FuncApproxConfig, output_dir: Optional[str]) -> int:
    report = function_approx_experiment(fa)
    med = report.medians()
    fields = {
        "command": "funcapprox",
        "n_points": fa.n_points,
        "subset_size": fa.subset_size,
        "seeds": list(fa.seeds),
        "center_count": fa.center_count,
        "ridge": fa.ridge,
        **{f"median_rmse_{arm}": v for arm, v in med.items()},
        "rmse": report.rmse,
    }
    if output_dir:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["seed," + ",".join(report.rmse)]
        for i, s in enumerate(fa.seeds):
            lines.append(f"{s}," + ",".join(repr(report.rmse[a][i]) for a in report.rmse))
        (out / "rmse.csv").write_text("\n".join(lines) + "\n")
        for arm, model in report.models.items():
            (out / f"surface_{arm}.dat").write_text(surface_dump(model, fa.disk_radius))
    _emit(cfg, "function approximation", fields)
    return EXIT_OK


def cmd_convert(cfg: RunConfig) -> int:
    P = fio.read_points(cfg.input_path, cfg.format)
    fio.write_points(P, cfg.output_path)
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", dest="input_path")
    common.add_argument("--format", choices=["csv", "bin"], help="input format (default: by extension)")
    common.add_argument("--loss", choices=["rbf", "laplacian"], default="rbf")
    common.add_argument("--radius", type=float, default=1.0, help="query radius R for the RBF loss")
    common.add_argument("--size", "-m", type=int, default=0, help="sample size m")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--mode", choices=["lemma", "algorithm1"], default="lemma")
    common.add_argument("--normalize", action="store_true", help="scale points into the unit ball first")
    common.add_argument("--query-count", type=int, default=1000)
    common.add_argument("--query-radius", type=float)
    common.add_argument("--output", dest="output_path")
    common.add_argument("--report", dest="report_path")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rbfcoreset", description="Sensitivity-sampling coresets for RBF and Laplacian losses.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build a coreset file")
    p = sub.add_parser("eval", parents=[common], help="evaluate a coreset file")
    p.add_argument("--coreset", required=True)
    p.add_argument("--baseline", choices=["none", "uniform"], default="none")
    p.add_argument("--allow-outside", action="store_true", help="permit RBF queries outside the R-ball")
    sub.add_parser("select", parents=[common], help="export index,weight rows for a training pipeline")
    p = sub.add_parser("oracle", parents=[common], help="check bounds against the brute-force oracle (d <= 3)")
    p.add_argument("--grid-resolution", type=int, default=201)
    p = sub.add_parser("lowerbound", parents=[common], help="total-sensitivity lower-bound instance")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--generator", choices=["guaranteed_separation", "paper_formula"], default="guaranteed_separation")
    p = sub.add_parser("funcapprox", parents=[common], help="full vs uniform vs coreset RBFNN fit")
    p.add_argument("--n-points", type=int, default=10_000)
    p.add_argument("--subset-size", type=int, default=400)
    p.add_argument("--seeds", type=int, default=10, help="number of subset seeds")
    p.add_argument("--centers", type=int, default=FuncApproxConfig.center_count)
    p.add_argument("--ridge", type=float, default=1e-8)
    p.add_argument("--output-dir")
    sub.add_parser("convert", parents=[common], help="convert between csv and bin point files")
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        input_path=args.input_path,
        format=args.format,
        loss=args.loss,
        radius=args.radius,
        size=args.size,
        seed=args.seed,
        mode=args.mode,
        normalize=args.normalize,
        query_count=args.query_count,
        query_radius=args.query_radius,
        output_path=args.output_path,
        report_path=args.report_path,
    )


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = _config(args)
    try:
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "eval":
            return cmd_eval(cfg, args.coreset, args.baseline, args.allow_outside)
        if args.command == "select":
            return cmd_select(cfg)
        if args.command == "oracle":
            return cmd_oracle(cfg, args.grid_resolution)
        if args.command == "lowerbound":
            return cmd_lowerbound(cfg, args.n, args.d, args.generator)
        if args.command == "funcapprox":
            fa = FuncApproxConfig(
                n_points=args.n_points,
                subset_size=args.subset_size,
                seeds=tuple(range(args.seed, args.seed + args.seeds)),
                center_count=args.centers,
                ridge=args.ridge,
                mode=args.mode,
            )
            return cmd_funcapprox(cfg, fa, args.output_dir)
        if args.command == "convert":
            return cmd_convert(cfg)
    except PreconditionError as exc:
        log.error("precondition violated: %s", exc)
        return EXIT_PRECONDITION
    except ValidationFailure as exc:
        log.error("validation failed: %s", exc)
        return EXIT_VALIDATION
    except (OSError, fio.FormatError, InvalidInputError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
