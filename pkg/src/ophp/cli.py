"""Command-line front end.

Subcommands: ``filter``, ``optimal-b``, ``example``, ``simulate``,
``validate``, ``scale``.  Exit codes: 0 on success, 1 on input errors, 2
when a validation report contains a FAIL.  All randomness flows from the
configured seed; outputs are byte-identical for identical (config, seed).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import instances
from .filter import FilterProblem, solve_filter
from .gaussian import GaussianModel, sample_joint
from .operators import (
    BASIS_EUCLIDEAN,
    BASIS_SINE,
    CoeffVector,
    sine_basis_matrix,
)
from .scales import rescaled_covariances, scale_weights, scaled_optimal_b, trace_class_threshold
from .smoothing import optimal_b
from .specs import RunConfig, SpecError, build_model, load_config, operator_to_json, parse_scale
from .validate import run_validation, white_noise_scale_check


class InputError(ValueError):
    """Bad user input (maps to exit code 1)."""


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_series_csv(path: Path, t: np.ndarray, values: np.ndarray) -> None:
    lines = ["index,t,value"]
    for i, (ti, vi) in enumerate(zip(t, values)):
        lines.append(f"{i},{_fmt(ti)},{_fmt(vi)}")
    path.write_text("\n".join(lines) + "\n")


def read_series_csv(path: Path) -> tuple[np.ndarray | None, np.ndarray]:
    """Parse a numeric series; returns (t or None, values).

    Accepts one value per line, ``t,value`` rows, or ``index,t,value`` rows,
    with an optional header line.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read input series {path}: {exc}") from exc
    ts, values = [], []
    for lineno, raw in enumerate(text.splitlines()):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            numbers = [float(f) for f in fields]
        except ValueError:
            if lineno == 0:
                continue  # header row
            raise InputError(f"line {lineno + 1} of {path} is not numeric") from None
        if len(numbers) == 1:
            values.append(numbers[0])
        elif len(numbers) == 2:
            ts.append(numbers[0])
            values.append(numbers[1])
        elif len(numbers) == 3:
            ts.append(numbers[1])
            values.append(numbers[2])
        else:
            raise InputError(f"line {lineno + 1} of {path} has too many columns")
    if not values:
        raise InputError(f"input series {path} is empty")
    if ts and len(ts) != len(values):
        raise InputError(f"input series {path} mixes row formats")
    return (np.asarray(ts) if ts else None, np.asarray(values))


def _trapezoid_weights(t: np.ndarray) -> np.ndarray:
    w = np.empty_like(t)
    w[0] = (t[1] - t[0]) / 2.0
    w[-1] = (t[-1] - t[-2]) / 2.0
    w[1:-1] = (t[2:] - t[:-2]) / 2.0
    return w


def project_series(
    t: np.ndarray | None, values: np.ndarray, dim: int, basis_id: str
) -> tuple[CoeffVector, np.ndarray]:
    """Project samples onto the declared basis; returns (coeffs, node grid)."""
    if basis_id == BASIS_EUCLIDEAN:
        if values.shape[0] != dim:
            raise InputError(
                f"series length {values.shape[0]} does not match truncation_dim {dim}"
            )
        grid = np.arange(dim, dtype=float) if t is None else t
        return CoeffVector(values, BASIS_EUCLIDEAN), grid
    if t is None:
        t = np.linspace(0.0, 1.0, values.shape[0])
    order = np.argsort(t)
    t = t[order]
    values = values[order]
    if np.any(np.diff(t) <= 0):
        raise InputError("sample grid must be strictly increasing")
    if t[0] < -1e-9 or t[-1] > 1.0 + 1e-9:
        raise InputError("sample grid must lie in [0, 1]")
    if values.shape[0] - 2 < dim:
        raise InputError(
            f"{values.shape[0]} samples cannot resolve {dim} sine modes"
        )
    weights = _trapezoid_weights(t)
    basis_vals = sine_basis_matrix(t, dim)
    coeffs = basis_vals.T @ (weights * values)
    return CoeffVector(coeffs, BASIS_SINE), t


def synthesize_series(x: CoeffVector, t: np.ndarray) -> np.ndarray:
    """Sample values of a coefficient vector on a grid."""
    if x.basis_id == BASIS_EUCLIDEAN:
        return x.coeffs.copy()
    return sine_basis_matrix(t, x.dim) @ x.coeffs


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _out_dir(args, cfg: RunConfig | None = None) -> Path:
    if args.out is not None:
        out = Path(args.out)
    elif cfg is not None and cfg.output_path is not None:
        out = Path(cfg.output_path)
    else:
        out = Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> RunConfig:
    if args.config is None:
        raise InputError("--config is required for this command")
    try:
        cfg = load_config(args.config)
    except SpecError as exc:
        raise InputError(str(exc)) from exc
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = int(args.seed)
    if getattr(args, "dim", None) is not None:
        updates["truncation_dim"] = int(args.dim)
    if getattr(args, "scale_n", None) is not None:
        updates["scale_n"] = int(args.scale_n)
    if getattr(args, "input", None) is not None:
        updates["input_path"] = Path(args.input)
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates)
    return cfg


def _model(cfg: RunConfig):
    try:
        return build_model(cfg)
    except (SpecError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def cmd_filter(args) -> int:
    cfg = _load(args)
    model, _ = _model(cfg)
    out = _out_dir(args, cfg)
    if cfg.input_path is None:
        raise InputError("filter needs an input series (input_path or --input)")
    t_in, values = read_series_csv(cfg.input_path)
    x, grid = project_series(t_in, values, model.dim, model.a.domain_basis)
    if args.estimate_y0:
        comp = model.pinv_bundle.projector_complement
        y0_est = CoeffVector(
            comp.multipliers * x.coeffs
            if comp.is_diagonal
            else comp.as_matrix() @ x.coeffs,
            x.basis_id,
        )
        model = GaussianModel.build(
            model.a, model.sigma_u, model.sigma_v, y0=y0_est
        )
    bhat = optimal_b(model)
    trend = solve_filter(FilterProblem(model.a, x, bhat))
    trend_values = synthesize_series(trend, grid)
    residual_values = values - trend_values
    write_series_csv(out / "trend.csv", grid, trend_values)
    write_series_csv(out / "residual.csv", grid, residual_values)
    summary = {
        "bhat": operator_to_json(bhat),
        "filter_multipliers": (
            [float(v) for v in 1.0 / (1.0 + bhat.multipliers * model.a.multipliers**2)]
            if model.is_diagonal
            else None
        ),
        "numerical_rank": model.pinv_bundle.numerical_rank,
        "truncation_dim": model.dim,
        "basis": model.a.domain_basis,
        "seed": cfg.seed,
        "input_points": int(values.shape[0]),
        "trend_norm": trend.norm(),
        "residual_norm": float(np.linalg.norm(residual_values)),
        "estimated_y0": bool(args.estimate_y0),
    }
    write_json(out / "filter_summary.json", summary)
    return 0


def cmd_optimal_b(args) -> int:
    cfg = _load(args)
    model, _ = _model(cfg)
    out = _out_dir(args, cfg)
    bhat = optimal_b(model)
    write_json(
        out / "bhat.json",
        {
            "bhat": operator_to_json(bhat),
            "numerical_rank": model.pinv_bundle.numerical_rank,
            "sv_threshold": model.pinv_bundle.sv_threshold,
            "seed": cfg.seed,
        },
    )
    return 0


def cmd_example(args) -> int:
    which = int(args.which)
    dim = int(args.dim if args.dim is not None else 8)
    if dim < 2:
        raise InputError("--dim must be at least 2")
    seed = int(args.seed if args.seed is not None else 0)
    out = _out_dir(args)
    grid_points = int(args.grid_points)
    if args.sigma_u is not None:
        su = np.full(dim, float(args.sigma_u))
    else:
        su = instances.seeded_sigmas(dim, seed)[0]
    if args.sigma_v is not None:
        sv = np.full(dim, float(args.sigma_v))
    else:
        sv = instances.seeded_sigmas(dim, seed)[1]

    if which == 1:
        a_mult = instances.ramp_multipliers(dim)
        basis = BASIS_EUCLIDEAN
        model = instances.ramp_model(dim, su, sv)
        bhat_expected = instances.expected_ramp_bhat(su, sv)
        scale_doc = {
            "kappa_decay": instances.RAMP_KAPPA_DECAY,
            "sigma_u_decay": 0.0,
            "sigma_v_decay": 0.0,
        }
    elif which == 2:
        a_mult = instances.laplacian_multipliers(dim)
        basis = BASIS_SINE
        model = instances.laplacian_model(dim, su, sv)
        bhat_expected = su / sv
        scale_doc = {
            "kappa_decay": instances.LAPLACIAN_KAPPA_DECAY,
            "sigma_u_decay": 0.0,
            "sigma_v_decay": 0.0,
        }
    else:
        raise InputError("--which must be 1 or 2")
    filter_expected = instances.expected_filter_multipliers(a_mult, bhat_expected)

    draw = sample_joint(model, 1, seed)
    x = CoeffVector(draw.x[0], basis)
    if basis == BASIS_EUCLIDEAN:
        grid = np.arange(dim, dtype=float)
        samples = x.coeffs
    else:
        grid = np.linspace(0.0, 1.0, grid_points)
        samples = synthesize_series(x, grid)

    operator_doc = {
        "kind": "diagonal",
        "multipliers": [float(v) for v in a_mult],
        "basis": basis,
    }
    sigma_u_doc = {"kind": "diagonal", "values": [float(v) for v in su]}
    sigma_v_doc = {"kind": "diagonal", "values": [float(v) for v in sv]}
    config_doc = {
        "operator": operator_doc,
        "sigma_u": sigma_u_doc,
        "sigma_v": sigma_v_doc,
        "truncation_dim": dim,
        "seed": seed,
        "input_path": "x.csv",
        "scale": scale_doc,
    }
    write_json(out / "operator.json", operator_doc)
    write_json(out / "sigma_u.json", sigma_u_doc)
    write_json(out / "sigma_v.json", sigma_v_doc)
    write_json(out / "config.json", config_doc)
    write_series_csv(out / "x.csv", grid, samples)
    write_json(
        out / "expected.json",
        {
            "bhat_multipliers": [float(v) for v in bhat_expected],
            "filter_multipliers": [float(v) for v in filter_expected],
        },
    )
    return 0


def cmd_simulate(args) -> int:
    cfg = _load(args)
    model, _ = _model(cfg)
    out = _out_dir(args, cfg)
    count = int(args.count)
    if count < 1:
        raise InputError("--count must be at least 1")
    data = sample_joint(model, count, cfg.seed)
    lines = ["draw,component,u,v,y,x"]
    for i in range(count):
        for j in range(model.dim):
            lines.append(
                f"{i},{j},{_fmt(data.u[i, j])},{_fmt(data.v[i, j])},"
                f"{_fmt(data.y[i, j])},{_fmt(data.x[i, j])}"
            )
    (out / "samples.csv").write_text("\n".join(lines) + "\n")
    write_json(
        out / "simulate_summary.json",
        {
            "count": count,
            "seed": cfg.seed,
            "dim": model.dim,
            "mean_x": [float(v) for v in data.x.mean(axis=0)],
            "mean_u_norm": float(np.linalg.norm(data.u.mean(axis=0))),
        },
    )
    return 0


def cmd_validate(args) -> int:
    cfg = _load(args)
    model, decay = _model(cfg)
    out = _out_dir(args, cfg)
    extras = cfg.extras or {}
    scale_n = cfg.scale_n
    if scale_n is None and cfg.scale:
        scale_n = parse_scale(cfg.scale)[0]
    report = run_validation(
        model,
        seed=cfg.seed,
        draws=int(extras.get("draws", 20_000)),
        gap_count=int(extras.get("gap_count", 100)),
        grid_points=int(extras.get("grid_points", 21)),
        scale_n=scale_n,
        decay=decay,
    )
    for check in report.checks:
        print(f"[{check.status}] {check.name}")
    write_json(out / "validation.json", report.to_json())
    return 0 if report.passed else 2


def cmd_scale(args) -> int:
    cfg = _load(args)
    model, decay = _model(cfg)
    out = _out_dir(args, cfg)
    n = cfg.scale_n
    if n is None and cfg.scale:
        n = parse_scale(cfg.scale)[0]
    n0 = trace_class_threshold(model, decay) if decay is not None else None
    if n is None:
        n = n0
    if n is None:
        raise InputError(
            "no scale index: set scale_n or supply decay exponents in 'scale'"
        )
    weights = scale_weights(
        model.a,
        n,
        bundle=model.pinv_bundle,
        decay_exponent=decay.kappa_decay if decay else None,
    )
    su, sv = rescaled_covariances(model, n)
    scaled = scaled_optimal_b(model, n)
    white = white_noise_scale_check(model, decay=decay, n=n)
    doc = {
        "n": int(n),
        "threshold_n0": n0,
        "indices": [int(i) for i in weights.indices],
        "kappa": [float(v) for v in weights.kappa],
        "weights": [float(v) for v in weights.weights],
        "sigma_u_rescaled": (
            [float(v) for v in su.multipliers] if su.is_diagonal else None
        ),
        "sigma_v_rescaled": (
            [float(v) for v in sv.multipliers] if sv.is_diagonal else None
        ),
        "scaled_bhat_multipliers": (
            [float(v) for v in scaled.multipliers] if scaled.is_diagonal else None
        ),
        "white_noise_check": white.to_json(),
    }
    write_json(out / "scale.json", doc)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="path to a run configuration JSON file",
                        required=False)
    parser.add_argument("--seed", type=int, default=None, help="override the seed")
    parser.add_argument("--dim", type=int, default=None,
                        help="override the truncation dimension")
    parser.add_argument("--scale-n", dest="scale_n", type=int, default=None,
                        help="override the scale index")
    parser.add_argument("--out", default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ophp",
        description="Operator-weighted trend filtering with optimal smoothing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="extract trend and residual from a series")
    _add_common(p)
    p.add_argument("--input", default=None, help="input series CSV")
    p.add_argument("--estimate-y0", action="store_true",
                   help="estimate the deterministic component from the input")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("optimal-b", help="compute the optimal smoothing operator")
    _add_common(p)
    p.set_defaults(func=cmd_optimal_b)

    p = sub.add_parser("example", help="emit a self-contained built-in instance")
    _add_common(p)
    p.add_argument("--which", required=True, choices=["1", "2"],
                   help="1 = ramp sequence operator, 2 = Dirichlet Laplacian")
    p.add_argument("--grid-points", dest="grid_points", type=int, default=257,
                   help="sample grid size for functional output")
    p.add_argument("--sigma-u", dest="sigma_u", default=None,
                   help="constant observation-noise variance (default: seeded draw)")
    p.add_argument("--sigma-v", dest="sigma_v", default=None,
                   help="constant signal-noise variance (default: seeded draw)")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("simulate", help="draw joint samples from the model")
    _add_common(p)
    p.add_argument("--count", type=int, default=1000, help="number of draws")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="run the numerical validation suite")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("scale", help="rescaled covariances and smoother")
    _add_common(p)
    p.set_defaults(func=cmd_scale)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
