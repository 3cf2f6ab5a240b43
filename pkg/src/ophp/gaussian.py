"""Gaussian signal-plus-noise model behind the filter.

The model is ``x = y + u`` with ``A y = v``, where ``u`` and ``v`` are
independent zero-mean Gaussians with covariances ``sigma_u`` and ``sigma_v``
and the deterministic component ``y0`` of the signal lies in the null space
of ``A``.  This module builds the induced joint covariance, the conditional
mean of the signal given the data, trace and Hilbert-Schmidt diagnostics of
the covariance algebra, and a reproducible sampler for Monte-Carlo checks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .operators import (
    DIAGONAL,
    BasisMismatchError,
    CoeffVector,
    DimensionMismatchError,
    OperatorRep,
    PinvBundle,
    add,
    pinv,
)


class ModelError(ValueError):
    """The model violates a structural requirement."""


class RankDeficiencyWarning(UserWarning):
    """A covariance inversion fell back to the generalized inverse."""


@dataclass(frozen=True)
class DecayDeclaration:
    """Declared asymptotic exponents of the spectral sequences.

    ``kappa_decay`` is the exponent p with scale eigenvalues growing like
    j**p (equivalently, the squared-pseudoinverse spectrum decaying like
    j**(-p)).  ``sigma_u_decay`` and ``sigma_v_decay`` are exponents q with
    covariance entries decaying like j**(-q); q = 0 declares white noise and
    negative q declares growth.
    """

    kappa_decay: float
    sigma_u_decay: float
    sigma_v_decay: float


def _symmetry_defect(mat: np.ndarray) -> float:
    return float(np.abs(mat - mat.T).max(initial=0.0))


def _check_covariance(op: OperatorRep, dim: int, basis_id: str, label: str) -> None:
    if op.domain_basis != basis_id or op.codomain_basis != basis_id:
        raise BasisMismatchError(f"{label} must act on basis {basis_id!r}")
    if op.dim_in != dim or op.dim_out != dim:
        raise DimensionMismatchError(f"{label} must be square of dimension {dim}")
    if op.kind == DIAGONAL:
        eigvals = op.multipliers
        scale = 1.0 + float(np.abs(eigvals).max(initial=0.0))
    else:
        mat = op.matrix
        scale = 1.0 + float(np.abs(mat).max(initial=0.0))
        if _symmetry_defect(mat) > 1e-12 * scale:
            raise ModelError(f"{label} is not symmetric to tolerance")
        eigvals = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    if float(np.min(eigvals, initial=0.0)) < -1e-12 * scale:
        raise ModelError(f"{label} has an eigenvalue below the PSD floor")


def covariance_sqrt(op: OperatorRep) -> OperatorRep:
    """Symmetric square root; negative round-off eigenvalues are clipped at 0."""
    if op.kind == DIAGONAL:
        return OperatorRep(
            DIAGONAL,
            op.domain_basis,
            op.codomain_basis,
            multipliers=np.sqrt(np.clip(op.multipliers, 0.0, None)),
        )
    mat = 0.5 * (op.matrix + op.matrix.T)
    eigvals, eigvecs = np.linalg.eigh(mat)
    root = eigvecs @ np.diag(np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T
    return OperatorRep("dense", op.domain_basis, op.codomain_basis, matrix=root)


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """Operator, noise covariances, and deterministic signal component.

    ``commuting_sigma_u`` records whether the observation-noise covariance
    commutes with the projector onto the complement of the null space of
    ``a`` (making the projected and complementary noise parts independent);
    ``commutator_norm`` holds the measured defect.
    """

    a: OperatorRep
    pinv_bundle: PinvBundle
    sigma_u: OperatorRep
    sigma_v: OperatorRep
    y0: CoeffVector
    commuting_sigma_u: bool
    commutator_norm: float

    @property
    def dim(self) -> int:
        return self.a.dim_in

    @property
    def codim(self) -> int:
        return self.a.dim_out

    @property
    def is_diagonal(self) -> bool:
        return (
            self.a.kind == DIAGONAL
            and self.sigma_u.kind == DIAGONAL
            and self.sigma_v.kind == DIAGONAL
        )

    @classmethod
    def build(
        cls,
        a: OperatorRep,
        sigma_u: OperatorRep,
        sigma_v: OperatorRep,
        y0: CoeffVector | None = None,
        rcond: float | None = None,
        commuting_sigma_u: bool | None = None,
    ) -> "GaussianModel":
        """Validate the ingredients and assemble a model.

        ``commuting_sigma_u=None`` measures the commutator and sets the flag
        automatically; declaring ``True`` raises if the measured defect
        exceeds tolerance.
        """
        bundle = pinv(a, rcond)
        _check_covariance(sigma_u, a.dim_in, a.domain_basis, "sigma_u")
        _check_covariance(sigma_v, a.dim_out, a.codomain_basis, "sigma_v")
        if y0 is None:
            y0 = CoeffVector(np.zeros(a.dim_in), a.domain_basis)
        if y0.basis_id != a.domain_basis or y0.dim != a.dim_in:
            raise DimensionMismatchError("y0 must live in the operator domain")
        pi = bundle.projector_pi
        if pi.kind == DIAGONAL:
            pi_y0 = float(np.linalg.norm(pi.multipliers * y0.coeffs))
        else:
            pi_y0 = float(np.linalg.norm(pi.as_matrix() @ y0.coeffs))
        if pi_y0 > 1e-10 * (1.0 + y0.norm()):
            raise ModelError(
                "y0 must lie in the null space of the operator "
                f"(projector residual {pi_y0:.3e})"
            )
        if pi.kind == DIAGONAL and sigma_u.kind == DIAGONAL:
            commutator = 0.0
        else:
            pm = pi.as_matrix()
            sm = sigma_u.as_matrix()
            commutator = float(np.linalg.norm(pm @ sm - sm @ pm))
        if commuting_sigma_u is None:
            commuting = commutator <= 1e-10
        elif commuting_sigma_u:
            if commutator > 1e-10:
                raise ModelError(
                    f"declared commuting sigma_u has commutator norm {commutator:.3e}"
                )
            commuting = True
        else:
            commuting = False
        return cls(
            a=a,
            pinv_bundle=bundle,
            sigma_u=sigma_u,
            sigma_v=sigma_v,
            y0=y0,
            commuting_sigma_u=commuting,
            commutator_norm=commutator,
        )


# ---------------------------------------------------------------------------
# Covariance algebra
# ---------------------------------------------------------------------------


def qv(model: GaussianModel) -> OperatorRep:
    """Covariance ``pinv(A) sigma_v pinv(A)*`` of the signal component."""
    p = model.pinv_bundle.pinv
    if p.kind == DIAGONAL and model.sigma_v.kind == DIAGONAL:
        return OperatorRep(
            DIAGONAL,
            model.a.domain_basis,
            model.a.domain_basis,
            multipliers=p.multipliers**2 * model.sigma_v.multipliers,
        )
    pm = p.as_matrix()
    mat = pm @ model.sigma_v.as_matrix() @ pm.T
    return OperatorRep(
        "dense",
        model.a.domain_basis,
        model.a.domain_basis,
        matrix=0.5 * (mat + mat.T),
    )


@dataclass(frozen=True, eq=False)
class JointCovariance:
    """Joint covariance of (data, signal) as a symmetric 2x2 block operator."""

    q_v: OperatorRep
    block: tuple

    def as_matrix(self) -> np.ndarray:
        top = self.block[0]
        bottom = self.block[1]
        return np.block(
            [
                [top[0].as_matrix(), top[1].as_matrix()],
                [bottom[0].as_matrix(), bottom[1].as_matrix()],
            ]
        )


def joint_covariance(model: GaussianModel) -> JointCovariance:
    """Blocks ((sigma_u + Q_v, Q_v), (Q_v, Q_v))."""
    q = qv(model)
    xx = add(model.sigma_u, q)
    return JointCovariance(q_v=q, block=((xx, q), (q, q)))


def regression_slope(model: GaussianModel) -> OperatorRep:
    """Best-predictor slope ``Q_v (sigma_u + Q_v)^{-1}``.

    When ``sigma_u + Q_v`` is rank deficient at working precision the
    generalized inverse is used and a :class:`RankDeficiencyWarning` is
    emitted.
    """
    q = qv(model)
    total = add(model.sigma_u, q)
    if total.kind == DIAGONAL:
        diag = total.multipliers
        largest = float(diag.max(initial=0.0))
        keep = diag > 1e-12 * largest if largest > 0.0 else np.zeros_like(diag, bool)
        if not keep.all():
            warnings.warn(
                "sigma_u + Q_v is rank deficient; using the generalized inverse",
                RankDeficiencyWarning,
                stacklevel=2,
            )
        slope = np.zeros_like(diag)
        np.divide(q.multipliers, diag, out=slope, where=keep)
        return OperatorRep(
            DIAGONAL, model.a.domain_basis, model.a.domain_basis, multipliers=slope
        )
    mat = 0.5 * (total.as_matrix() + total.as_matrix().T)
    eigvals, eigvecs = np.linalg.eigh(mat)
    largest = float(eigvals[-1]) if eigvals.size else 0.0
    keep = eigvals > 1e-12 * largest if largest > 0.0 else np.zeros_like(eigvals, bool)
    if not keep.all():
        warnings.warn(
            "sigma_u + Q_v is rank deficient; using the generalized inverse",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    inv = (eigvecs[:, keep] / eigvals[keep]) @ eigvecs[:, keep].T
    return OperatorRep(
        "dense",
        model.a.domain_basis,
        model.a.domain_basis,
        matrix=q.as_matrix() @ inv,
    )


def conditional_mean(model: GaussianModel, x: CoeffVector) -> CoeffVector:
    """Best predictor ``y0 + Q_v (sigma_u + Q_v)^{-1} (x - y0)`` of the signal."""
    slope = regression_slope(model)
    shifted = x - model.y0
    if slope.kind == DIAGONAL:
        adjusted = slope.multipliers * shifted.coeffs
    else:
        adjusted = slope.matrix @ shifted.coeffs
    return CoeffVector(model.y0.coeffs + adjusted, x.basis_id)


# ---------------------------------------------------------------------------
# Trace / Hilbert-Schmidt diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HsReport:
    """Trace and Hilbert-Schmidt diagnostics at the working truncation.

    The summability fields are verdicts about the untruncated spectral
    sequences and are populated only when analytic decay exponents are
    declared; ``None`` means undecidable from the inputs.
    """

    trace_qv: float
    trace_sigma_u: float
    hs_norm: float
    injective: bool
    qv_trace_summable: bool | None = None
    sigma_u_trace_summable: bool | None = None
    hs_summable: bool | None = None


def hs_diagnostics(
    model: GaussianModel, decay: DecayDeclaration | None = None
) -> HsReport:
    """Traces of Q_v and sigma_u plus the Frobenius norm of
    ``Q_v (sigma_u + Q_v)^{-1/2}``.

    A zero in the spectrum of ``sigma_u + Q_v`` flags non-injectivity; the
    Hilbert-Schmidt norm is then computed on the positive part.
    """
    q = qv(model)
    total = add(model.sigma_u, q)
    if total.kind == DIAGONAL:
        qdiag = q.multipliers
        sdiag = total.multipliers
        trace_q = float(qdiag.sum())
        trace_u = float(model.sigma_u.multipliers.sum())
        largest = float(sdiag.max(initial=0.0))
        keep = sdiag > 1e-12 * largest if largest > 0.0 else np.zeros_like(sdiag, bool)
        injective = bool(keep.all()) and sdiag.size > 0
        hs_sq = float((qdiag[keep] ** 2 / sdiag[keep]).sum())
    else:
        qmat = q.as_matrix()
        smat = 0.5 * (total.as_matrix() + total.as_matrix().T)
        trace_q = float(np.trace(qmat))
        trace_u = float(np.trace(model.sigma_u.as_matrix()))
        eigvals, eigvecs = np.linalg.eigh(smat)
        largest = float(eigvals[-1]) if eigvals.size else 0.0
        keep = (
            eigvals > 1e-12 * largest
            if largest > 0.0
            else np.zeros_like(eigvals, bool)
        )
        injective = bool(keep.all()) and eigvals.size > 0
        inv_root = (eigvecs[:, keep] / np.sqrt(eigvals[keep])) @ eigvecs[:, keep].T
        hs_sq = float(np.linalg.norm(qmat @ inv_root) ** 2)

    qv_sum = su_sum = hs_sum = None
    if decay is not None:
        q_decay = decay.sigma_v_decay + decay.kappa_decay
        qv_sum = q_decay > 1.0
        su_sum = decay.sigma_u_decay > 1.0
        t_decay = q_decay - min(decay.sigma_u_decay, q_decay) / 2.0
        hs_sum = t_decay > 0.5
    return HsReport(
        trace_qv=trace_q,
        trace_sigma_u=trace_u,
        hs_norm=float(np.sqrt(hs_sq)),
        injective=injective,
        qv_trace_summable=qv_sum,
        sigma_u_trace_summable=su_sum,
        hs_summable=hs_sum,
    )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JointSample:
    """Row-per-draw arrays of the model variables (u, v, y, x)."""

    u: np.ndarray
    v: np.ndarray
    y: np.ndarray
    x: np.ndarray
    seed: int
    chunk_size: int

    @property
    def count(self) -> int:
        return int(self.x.shape[0])


def _apply_rows(op: OperatorRep, rows: np.ndarray) -> np.ndarray:
    if op.kind == DIAGONAL:
        return rows * op.multipliers[None, :]
    return rows @ op.matrix.T


DEFAULT_CHUNK = 1 << 14


def sample_joint(
    model: GaussianModel, count: int, seed: int, chunk_size: int = DEFAULT_CHUNK
) -> JointSample:
    """Draw joint samples of (u, v, y, x), reproducibly for a fixed seed.

    Noise is generated through symmetric square roots of the covariances
    applied to standard normal coefficient vectors; the signal-noise draw is
    projected onto the range of the operator, so components orthogonal to it
    are identically zero.  Draws are produced in fixed-size chunks whose
    streams are seeded by (seed, chunk index) — the declared splitting rule —
    so chunked or parallel generation yields identical output; within a chunk
    the u block is drawn before the v block.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if chunk_size < 1:
        raise ValueError("chunk_size must be at least 1")
    root_u = covariance_sqrt(model.sigma_u)
    root_v = covariance_sqrt(model.sigma_v)
    range_proj = model.pinv_bundle.range_projector
    ainv = model.pinv_bundle.pinv
    blocks_u, blocks_v, blocks_y = [], [], []
    for chunk in range((count + chunk_size - 1) // chunk_size):
        rows = min(chunk_size, count - chunk * chunk_size)
        rng = np.random.default_rng([seed, chunk])
        zu = rng.standard_normal((rows, model.dim))
        zv = rng.standard_normal((rows, model.codim))
        u = _apply_rows(root_u, zu)
        v = _apply_rows(range_proj, _apply_rows(root_v, zv))
        blocks_u.append(u)
        blocks_v.append(v)
        blocks_y.append(model.y0.coeffs[None, :] + _apply_rows(ainv, v))
    u = np.vstack(blocks_u)
    v = np.vstack(blocks_v)
    y = np.vstack(blocks_y)
    return JointSample(u=u, v=v, y=y, x=y + u, seed=seed, chunk_size=chunk_size)
