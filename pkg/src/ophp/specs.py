"""JSON specifications for operators, covariances, and run configurations.

Operator documents::

    {"kind": "diagonal", "multipliers": [...], "basis": "abstract-euclidean"}
    {"kind": "dense", "rows": [[...], ...], "basis": ..., "codomain_basis": ...}
    {"kind": "kernel", "name": "dirichlet_green", "grid_points": 512}

Covariance documents::

    {"kind": "diagonal", "values": [...]}
    {"kind": "dense", "rows": [[...], ...]}
    {"kind": "power_decay", "scale": c, "exponent": p}   # sigma_n = c * n**(-p)

Scale documents::

    {"n": 1, "kappa_decay": 2.0, "sigma_u_decay": 0.0, "sigma_v_decay": 0.0}

A run configuration ties the pieces together with a truncation dimension,
seed, and file locations; relative paths resolve against the configuration
file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gaussian import DecayDeclaration, GaussianModel
from .operators import (
    BASIS_EUCLIDEAN,
    DEFAULT_GRID_POINTS,
    CoeffVector,
    OperatorRep,
    dense_operator,
    diagonal_operator,
    kernel_operator,
)


class SpecError(ValueError):
    """A JSON document does not satisfy its schema."""


def parse_operator(obj: dict, dim: int | None = None) -> OperatorRep:
    """Build an operator from its JSON description.

    ``dim`` is the configured truncation dimension; when given it must agree
    with the document (and it is required for kernel operators).
    """
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SpecError("operator spec must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "diagonal":
        mult = obj.get("multipliers")
        if mult is None:
            raise SpecError("diagonal operator spec needs 'multipliers'")
        basis = obj.get("basis", BASIS_EUCLIDEAN)
        op = diagonal_operator(np.asarray(mult, dtype=float), basis)
    elif kind == "dense":
        rows = obj.get("rows")
        if rows is None:
            raise SpecError("dense operator spec needs 'rows'")
        op = dense_operator(
            np.asarray(rows, dtype=float),
            obj.get("basis", BASIS_EUCLIDEAN),
            obj.get("codomain_basis"),
        )
    elif kind == "kernel":
        name = obj.get("name")
        if name is None:
            raise SpecError("kernel operator spec needs 'name'")
        if dim is None:
            raise SpecError("kernel operator spec needs a truncation dimension")
        try:
            op = kernel_operator(
                name, dim, int(obj.get("grid_points", DEFAULT_GRID_POINTS))
            )
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
    else:
        raise SpecError(f"unknown operator kind {kind!r}")
    if dim is not None and (op.dim_in != dim or op.dim_out != dim):
        raise SpecError(
            f"operator dimension {op.dim_out}x{op.dim_in} does not match "
            f"truncation_dim {dim}"
        )
    return op


def parse_covariance(
    obj: dict, dim: int, basis_id: str
) -> tuple[OperatorRep, float | None]:
    """Build a covariance operator; returns (operator, decay exponent).

    The decay exponent is known only for ``power_decay`` documents.
    """
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SpecError("covariance spec must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "diagonal":
        values = obj.get("values")
        if values is None:
            raise SpecError("diagonal covariance spec needs 'values'")
        values = np.asarray(values, dtype=float)
        if values.shape != (dim,):
            raise SpecError(f"covariance values must have length {dim}")
        return diagonal_operator(values, basis_id), None
    if kind == "dense":
        rows = obj.get("rows")
        if rows is None:
            raise SpecError("dense covariance spec needs 'rows'")
        mat = np.asarray(rows, dtype=float)
        if mat.shape != (dim, dim):
            raise SpecError(f"covariance matrix must be {dim}x{dim}")
        return dense_operator(mat, basis_id), None
    if kind == "power_decay":
        scale = float(obj.get("scale", 1.0))
        exponent = float(obj.get("exponent", 0.0))
        n = np.arange(1, dim + 1, dtype=float)
        return diagonal_operator(scale * n ** (-exponent), basis_id), exponent
    raise SpecError(f"unknown covariance kind {kind!r}")


def operator_to_json(op: OperatorRep) -> dict:
    """JSON description of an operator (kernel ops keep their recipe)."""
    if op.kind == "diagonal":
        return {
            "kind": "diagonal",
            "multipliers": [float(v) for v in op.multipliers],
            "basis": op.domain_basis,
        }
    if op.kind == "kernel":
        return {
            "kind": "kernel",
            "name": op.kernel_name,
            "grid_points": int(op.grid.nodes.shape[0]),
        }
    return {
        "kind": "dense",
        "rows": [[float(v) for v in row] for row in op.matrix],
        "basis": op.domain_basis,
        "codomain_basis": op.codomain_basis,
    }


def parse_scale(obj: dict) -> tuple[int | None, DecayDeclaration | None]:
    """Scale index and decay declaration from a scale document."""
    if not isinstance(obj, dict):
        raise SpecError("scale spec must be an object")
    n = obj.get("n")
    if n is not None:
        n = int(n)
        if n < 0:
            raise SpecError("scale index n must be nonnegative")
    keys = ("kappa_decay", "sigma_u_decay", "sigma_v_decay")
    if all(k in obj for k in keys):
        decay = DecayDeclaration(*(float(obj[k]) for k in keys))
    else:
        decay = None
    return n, decay


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Parsed run configuration with resolved file locations."""

    operator_spec: dict
    sigma_u_spec: dict
    sigma_v_spec: dict
    truncation_dim: int
    seed: int
    scale_n: int | None = None
    scale: dict | None = None
    input_path: Path | None = None
    output_path: Path | None = None
    y0: list | None = None
    commuting_sigma_u: bool | None = None
    extras: dict | None = None


def parse_config(obj: dict, base_dir: Path | None = None) -> RunConfig:
    if not isinstance(obj, dict):
        raise SpecError("configuration must be a JSON object")
    missing = [k for k in ("operator", "sigma_u", "sigma_v") if k not in obj]
    if missing:
        raise SpecError(f"configuration is missing {missing}")
    dim = int(obj.get("truncation_dim", 0))
    if dim < 2:
        raise SpecError("truncation_dim must be at least 2")
    seed = int(obj.get("seed", 0))
    if seed < 0:
        raise SpecError("seed must be nonnegative")
    base = Path(".") if base_dir is None else base_dir

    def resolve(key):
        value = obj.get(key)
        if value is None:
            return None
        path = Path(value)
        return path if path.is_absolute() else base / path

    scale_n = obj.get("scale_n")
    return RunConfig(
        operator_spec=obj["operator"],
        sigma_u_spec=obj["sigma_u"],
        sigma_v_spec=obj["sigma_v"],
        truncation_dim=dim,
        seed=seed,
        scale_n=None if scale_n is None else int(scale_n),
        scale=obj.get("scale"),
        input_path=resolve("input_path"),
        output_path=resolve("output_path"),
        y0=obj.get("y0"),
        commuting_sigma_u=obj.get("commuting_sigma_u"),
        extras=obj.get("extras"),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config(obj, base_dir=path.parent)


def build_model(cfg: RunConfig) -> tuple[GaussianModel, DecayDeclaration | None]:
    """Assemble the Gaussian model and any available decay declaration.

    Decay exponents missing from the scale document are filled from
    ``power_decay`` covariance specs when possible.
    """
    operator = parse_operator(cfg.operator_spec, cfg.truncation_dim)
    sigma_u, u_decay = parse_covariance(
        cfg.sigma_u_spec, operator.dim_in, operator.domain_basis
    )
    sigma_v, v_decay = parse_covariance(
        cfg.sigma_v_spec, operator.dim_out, operator.codomain_basis
    )
    y0 = None
    if cfg.y0 is not None:
        y0 = CoeffVector(np.asarray(cfg.y0, dtype=float), operator.domain_basis)
    model = GaussianModel.build(
        operator,
        sigma_u,
        sigma_v,
        y0=y0,
        commuting_sigma_u=cfg.commuting_sigma_u,
    )
    decay = None
    scale_obj = dict(cfg.scale) if cfg.scale else {}
    if "sigma_u_decay" not in scale_obj and u_decay is not None:
        scale_obj["sigma_u_decay"] = u_decay
    if "sigma_v_decay" not in scale_obj and v_decay is not None:
        scale_obj["sigma_v_decay"] = v_decay
    if all(
        k in scale_obj for k in ("kappa_decay", "sigma_u_decay", "sigma_v_decay")
    ):
        decay = DecayDeclaration(
            float(scale_obj["kappa_decay"]),
            float(scale_obj["sigma_u_decay"]),
            float(scale_obj["sigma_v_decay"]),
        )
    return model, decay
