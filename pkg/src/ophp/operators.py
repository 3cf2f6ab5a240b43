"""Linear operators on finite orthonormal-basis truncations.

Everything downstream works with coefficient sequences relative to a declared
orthonormal basis, so operators are stored in whichever of three
representations keeps their structure explicit:

``diagonal``
    A spectral multiplier sequence.  Diagonal operators never promote to
    dense storage implicitly; promotion happens only through
    :meth:`OperatorRep.as_matrix`.
``dense``
    A rectangular matrix between two (possibly different) bases.
``kernel``
    An integral kernel on [0, 1] sampled on a composite-trapezoid quadrature
    grid and projected onto the sine basis.  After construction the projected
    matrix is used for all arithmetic.

The module also provides the Moore-Penrose generalized inverse together with
the orthogonal projector onto the complement of the null space, which is the
backbone of the filtering and covariance algebra built on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

BASIS_EUCLIDEAN = "abstract-euclidean"
BASIS_SINE = "sine-dirichlet"

DENSE = "dense"
DIAGONAL = "diagonal"
KERNEL = "kernel"


class BasisMismatchError(ValueError):
    """Vectors or operators disagree on the declared basis."""


class DimensionMismatchError(ValueError):
    """Shapes are incompatible for the requested operation."""


# ---------------------------------------------------------------------------
# Coefficient vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoeffVector:
    """Coefficients of an element in an orthonormal-basis truncation.

    The squared norm equals the sum of squared coefficients (Parseval at the
    truncation level).  Arithmetic is only defined between vectors with the
    same basis identifier and truncation dimension.
    """

    coeffs: np.ndarray
    basis_id: str = BASIS_EUCLIDEAN

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionMismatchError(
                "coefficients must form a nonempty one-dimensional sequence"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def dim(self) -> int:
        return int(self.coeffs.shape[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def dot(self, other: "CoeffVector") -> float:
        self._require_compatible(other)
        return float(self.coeffs @ other.coeffs)

    def _require_compatible(self, other: "CoeffVector") -> None:
        if self.basis_id != other.basis_id:
            raise BasisMismatchError(
                f"cannot combine vectors in bases {self.basis_id!r} and "
                f"{other.basis_id!r}"
            )
        if self.dim != other.dim:
            raise DimensionMismatchError(
                f"cannot combine vectors of dimensions {self.dim} and {other.dim}"
            )

    def __add__(self, other: "CoeffVector") -> "CoeffVector":
        self._require_compatible(other)
        return CoeffVector(self.coeffs + other.coeffs, self.basis_id)

    def __sub__(self, other: "CoeffVector") -> "CoeffVector":
        self._require_compatible(other)
        return CoeffVector(self.coeffs - other.coeffs, self.basis_id)

    def __mul__(self, scalar: float) -> "CoeffVector":
        return CoeffVector(self.coeffs * float(scalar), self.basis_id)

    __rmul__ = __mul__

    def __neg__(self) -> "CoeffVector":
        return CoeffVector(-self.coeffs, self.basis_id)


# ---------------------------------------------------------------------------
# Operator representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Composite-trapezoid nodes and weights on [0, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))


@dataclass(frozen=True, eq=False)
class OperatorRep:
    """A linear operator between two basis truncations.

    ``kind`` selects the storage: ``diagonal`` keeps ``multipliers``,
    ``dense`` and ``kernel`` keep ``matrix`` (for kernels this is the
    quadrature-projected matrix in the sine basis; the sampling grid is
    retained for diagnostics).
    """

    kind: str
    domain_basis: str
    codomain_basis: str
    matrix: np.ndarray | None = None
    multipliers: np.ndarray | None = None
    kernel_name: str | None = None
    grid: QuadratureGrid | None = None

    def __post_init__(self):
        if self.kind == DIAGONAL:
            mult = np.array(self.multipliers, dtype=float, copy=True)
            if mult.ndim != 1 or mult.size == 0:
                raise DimensionMismatchError("diagonal multipliers must be 1-d")
            mult.setflags(write=False)
            object.__setattr__(self, "multipliers", mult)
        elif self.kind in (DENSE, KERNEL):
            mat = np.array(self.matrix, dtype=float, copy=True)
            if mat.ndim != 2 or mat.size == 0:
                raise DimensionMismatchError("dense matrix must be 2-d")
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)
        else:
            raise ValueError(f"unknown operator kind {self.kind!r}")

    @property
    def dim_in(self) -> int:
        if self.kind == DIAGONAL:
            return int(self.multipliers.shape[0])
        return int(self.matrix.shape[1])

    @property
    def dim_out(self) -> int:
        if self.kind == DIAGONAL:
            return int(self.multipliers.shape[0])
        return int(self.matrix.shape[0])

    @property
    def is_diagonal(self) -> bool:
        return self.kind == DIAGONAL

    def as_matrix(self) -> np.ndarray:
        """Explicit promotion to a dense matrix.

        Diagonal operators stay diagonal in all module operations; this is
        the single deliberate escape hatch.
        """
        if self.kind == DIAGONAL:
            return np.diag(self.multipliers)
        return self.matrix.copy()


def diagonal_operator(
    multipliers, basis_id: str = BASIS_EUCLIDEAN, codomain_basis: str | None = None
) -> OperatorRep:
    """Spectral multiplier operator acting componentwise."""
    return OperatorRep(
        kind=DIAGONAL,
        domain_basis=basis_id,
        codomain_basis=basis_id if codomain_basis is None else codomain_basis,
        multipliers=np.asarray(multipliers, dtype=float),
    )


def dense_operator(
    rows, domain_basis: str = BASIS_EUCLIDEAN, codomain_basis: str | None = None
) -> OperatorRep:
    """Dense matrix operator; rows index the codomain."""
    return OperatorRep(
        kind=DENSE,
        domain_basis=domain_basis,
        codomain_basis=domain_basis if codomain_basis is None else codomain_basis,
        matrix=np.asarray(rows, dtype=float),
    )


def identity_operator(dim: int, basis_id: str = BASIS_EUCLIDEAN) -> OperatorRep:
    return diagonal_operator(np.ones(dim), basis_id)


def zero_operator(dim: int, basis_id: str = BASIS_EUCLIDEAN) -> OperatorRep:
    return diagonal_operator(np.zeros(dim), basis_id)


# ---------------------------------------------------------------------------
# Kernel operators on [0, 1]
# ---------------------------------------------------------------------------


def trapezoid_grid(points: int) -> QuadratureGrid:
    """Uniform closed grid on [0, 1] with composite-trapezoid weights."""
    if points < 3:
        raise DimensionMismatchError("quadrature grid needs at least 3 points")
    nodes = np.linspace(0.0, 1.0, points)
    h = 1.0 / (points - 1)
    weights = np.full(points, h)
    weights[0] = weights[-1] = h / 2.0
    return QuadratureGrid(nodes, weights)


def sine_basis_matrix(nodes: np.ndarray, dim: int) -> np.ndarray:
    """Values of the orthonormal Dirichlet sine basis at the given nodes.

    Column ``n`` (0-based) holds sqrt(2)*sin((n+1)*pi*t).
    """
    modes = np.arange(1, dim + 1)
    return np.sqrt(2.0) * np.sin(np.pi * np.outer(np.asarray(nodes, float), modes))


def dirichlet_green_kernel(t, s):
    """Green function of the 1-d Dirichlet second-derivative problem."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return np.where(s <= t, (1.0 - t) * s, t * (1.0 - s))


KERNELS: dict[str, Callable] = {"dirichlet_green": dirichlet_green_kernel}

DEFAULT_GRID_POINTS = 512


def kernel_operator(
    kernel: Callable | str,
    dim: int,
    grid_points: int = DEFAULT_GRID_POINTS,
    basis_id: str = BASIS_SINE,
    name: str | None = None,
) -> OperatorRep:
    """Integral operator on [0, 1] discretized by trapezoid quadrature.

    The kernel is sampled on a uniform closed grid and the operator matrix
    is formed in the sine basis, so downstream arithmetic works on
    coefficients.  Symmetric kernels yield an exactly symmetric matrix.
    """
    if basis_id != BASIS_SINE:
        raise BasisMismatchError("kernel operators are realized in the sine basis")
    if isinstance(kernel, str):
        name = kernel
        try:
            kernel = KERNELS[kernel]
        except KeyError:
            raise ValueError(f"unknown kernel name {name!r}") from None
    if grid_points < dim + 2:
        raise DimensionMismatchError(
            f"grid of {grid_points} points cannot resolve {dim} sine modes"
        )
    grid = trapezoid_grid(grid_points)
    tt = grid.nodes[:, None]
    ss = grid.nodes[None, :]
    samples = np.asarray(kernel(tt, ss), dtype=float)
    if samples.shape != (grid_points, grid_points):
        raise DimensionMismatchError("kernel must broadcast to a square sample grid")
    basis_vals = sine_basis_matrix(grid.nodes, dim)
    weighted = grid.weights[:, None] * samples * grid.weights[None, :]
    projected = basis_vals.T @ weighted @ basis_vals
    scale = 1.0 + np.abs(samples).max()
    if np.abs(samples - samples.T).max() <= 1e-12 * scale:
        projected = 0.5 * (projected + projected.T)
    return OperatorRep(
        kind=KERNEL,
        domain_basis=basis_id,
        codomain_basis=basis_id,
        matrix=projected,
        kernel_name=name,
        grid=grid,
    )


# ---------------------------------------------------------------------------
# Operator algebra
# ---------------------------------------------------------------------------


def apply(op: OperatorRep, x: CoeffVector) -> CoeffVector:
    """Apply the operator to a coefficient vector.

    For kernel operators this evaluates the quadrature approximation of the
    integral transform, expressed in the codomain (sine) basis.
    """
    if x.basis_id != op.domain_basis:
        raise BasisMismatchError(
            f"operator domain basis {op.domain_basis!r} does not match vector "
            f"basis {x.basis_id!r}"
        )
    if x.dim != op.dim_in:
        raise DimensionMismatchError(
            f"operator expects dimension {op.dim_in}, got {x.dim}"
        )
    if op.kind == DIAGONAL:
        out = op.multipliers * x.coeffs
    else:
        out = op.matrix @ x.coeffs
    return CoeffVector(out, op.codomain_basis)


def adjoint(op: OperatorRep) -> OperatorRep:
    """Adjoint with respect to the orthonormal bases.

    Dense operators transpose; diagonal operators are self-adjoint;
    symmetric kernel operators return themselves.
    """
    if op.kind == DIAGONAL:
        if op.domain_basis == op.codomain_basis:
            return op
        return diagonal_operator(op.multipliers, op.codomain_basis, op.domain_basis)
    if op.kind == KERNEL and np.array_equal(op.matrix, op.matrix.T):
        return op
    return OperatorRep(
        kind=DENSE,
        domain_basis=op.codomain_basis,
        codomain_basis=op.domain_basis,
        matrix=op.matrix.T,
    )


def compose(s: OperatorRep, t: OperatorRep) -> OperatorRep:
    """Composition ``s o t`` (apply ``t`` first).

    Diagonal composed with diagonal stays diagonal; any other combination
    materializes as a dense operator.
    """
    if t.codomain_basis != s.domain_basis:
        raise BasisMismatchError(
            f"cannot compose: inner bases {t.codomain_basis!r} and "
            f"{s.domain_basis!r} differ"
        )
    if t.dim_out != s.dim_in:
        raise DimensionMismatchError(
            f"cannot compose: inner dimensions {t.dim_out} and {s.dim_in} differ"
        )
    if s.kind == DIAGONAL and t.kind == DIAGONAL:
        return diagonal_operator(
            s.multipliers * t.multipliers, t.domain_basis, s.codomain_basis
        )
    return OperatorRep(
        kind=DENSE,
        domain_basis=t.domain_basis,
        codomain_basis=s.codomain_basis,
        matrix=s.as_matrix() @ t.as_matrix(),
    )


def add(s: OperatorRep, t: OperatorRep) -> OperatorRep:
    """Operator sum; diagonal plus diagonal stays diagonal."""
    if (s.domain_basis, s.codomain_basis) != (t.domain_basis, t.codomain_basis):
        raise BasisMismatchError("cannot add operators with different bases")
    if (s.dim_in, s.dim_out) != (t.dim_in, t.dim_out):
        raise DimensionMismatchError("cannot add operators with different shapes")
    if s.kind == DIAGONAL and t.kind == DIAGONAL:
        return diagonal_operator(
            s.multipliers + t.multipliers, s.domain_basis, s.codomain_basis
        )
    return OperatorRep(
        kind=DENSE,
        domain_basis=s.domain_basis,
        codomain_basis=s.codomain_basis,
        matrix=s.as_matrix() + t.as_matrix(),
    )


def scalar_multiple(op: OperatorRep, c: float) -> OperatorRep:
    """Scale an operator by a real constant, preserving its representation."""
    if op.kind == DIAGONAL:
        return diagonal_operator(
            op.multipliers * float(c), op.domain_basis, op.codomain_basis
        )
    return OperatorRep(
        kind=DENSE,
        domain_basis=op.domain_basis,
        codomain_basis=op.codomain_basis,
        matrix=op.as_matrix() * float(c),
    )


def operator_norm(op: OperatorRep) -> float:
    """Spectral norm (largest singular value)."""
    if op.kind == DIAGONAL:
        return float(np.abs(op.multipliers).max())
    return float(np.linalg.norm(op.matrix, 2))


# ---------------------------------------------------------------------------
# Moore-Penrose generalized inverse
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PinvBundle:
    """Generalized inverse with its projector algebra.

    ``projector_pi`` is the orthogonal projector pinv(A) A onto the
    orthogonal complement of the null space of A (acting on the domain);
    ``projector_complement`` is its complement; ``range_projector`` is
    A pinv(A) on the codomain.  ``svd`` retains the factors (U, s, Vt) for
    dense inputs so spectral consumers can reuse them.
    """

    pinv: OperatorRep
    numerical_rank: int
    sv_threshold: float
    projector_pi: OperatorRep
    projector_complement: OperatorRep
    range_projector: OperatorRep
    svd: tuple | None = None


def default_rcond(op: OperatorRep) -> float:
    """Relative singular-value cutoff: machine epsilon times the larger dim."""
    return float(np.finfo(float).eps * max(op.dim_in, op.dim_out))


def pinv(a: OperatorRep, rcond: float | None = None) -> PinvBundle:
    """Moore-Penrose generalized inverse via full SVD with relative cutoff.

    Parameters
    ----------
    a :
        Operator to invert.
    rcond :
        Relative cutoff in (0, 1); singular values below ``rcond * sigma_max``
        are treated as zero.  ``None`` selects the default
        ``eps * max(dim_in, dim_out)``.

    An all-zero operator is valid input: the result has rank 0 and zero
    projector.
    """
    if rcond is None:
        rcond = default_rcond(a)
    elif not 0.0 < rcond < 1.0:
        raise ValueError(f"rcond must lie in (0, 1), got {rcond}")

    if a.kind == DIAGONAL:
        mult = a.multipliers
        largest = float(np.abs(mult).max())
        threshold = rcond * largest
        keep = np.abs(mult) > threshold
        inv = np.zeros_like(mult)
        np.divide(1.0, mult, out=inv, where=keep)
        pi = keep.astype(float)
        return PinvBundle(
            pinv=diagonal_operator(inv, a.codomain_basis, a.domain_basis),
            numerical_rank=int(keep.sum()),
            sv_threshold=threshold,
            projector_pi=diagonal_operator(pi, a.domain_basis),
            projector_complement=diagonal_operator(1.0 - pi, a.domain_basis),
            range_projector=diagonal_operator(pi, a.codomain_basis),
        )

    mat = a.matrix
    u, s, vt = np.linalg.svd(mat, full_matrices=True)
    largest = float(s[0]) if s.size else 0.0
    threshold = rcond * largest
    rank = int(np.count_nonzero(s > threshold))
    if rank:
        inv_mat = vt[:rank].T @ (u[:, :rank] / s[:rank]).T
        pi_mat = vt[:rank].T @ vt[:rank]
        range_mat = u[:, :rank] @ u[:, :rank].T
    else:
        inv_mat = np.zeros((a.dim_in, a.dim_out))
        pi_mat = np.zeros((a.dim_in, a.dim_in))
        range_mat = np.zeros((a.dim_out, a.dim_out))
    return PinvBundle(
        pinv=OperatorRep(DENSE, a.codomain_basis, a.domain_basis, matrix=inv_mat),
        numerical_rank=rank,
        sv_threshold=threshold,
        projector_pi=OperatorRep(DENSE, a.domain_basis, a.domain_basis, matrix=pi_mat),
        projector_complement=OperatorRep(
            DENSE,
            a.domain_basis,
            a.domain_basis,
            matrix=np.eye(a.dim_in) - pi_mat,
        ),
        range_projector=OperatorRep(
            DENSE, a.codomain_basis, a.codomain_basis, matrix=range_mat
        ),
        svd=(u, s, vt),
    )


def moore_penrose_residuals(a: OperatorRep, bundle: PinvBundle) -> dict[str, float]:
    """Frobenius residuals of the four defining identities."""
    mat = a.as_matrix()
    inv = bundle.pinv.as_matrix()
    ai = mat @ inv
    ia = inv @ mat
    return {
        "reconstruct": float(np.linalg.norm(ai @ mat - mat)),
        "pinv_reconstruct": float(np.linalg.norm(ia @ inv - inv)),
        "range_symmetry": float(np.linalg.norm(ai.T - ai)),
        "null_symmetry": float(np.linalg.norm(ia.T - ia)),
    }
