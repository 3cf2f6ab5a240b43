"""Spectral weight scales for non-trace-class noise.

When the noise covariances are not trace class (white noise being the
canonical case), the model is moved to a weighted copy of the base space.
The weights come from powers of the inverse of ``pinv(A) pinv(A)*``
restricted to the range of ``A``: for a spectral operator with singular
values s_j the scale eigenvalues are kappa_j = s_j**2, and scale index n
weights component j by kappa_j**n.  Rescaling the covariances by these
weights restores summability for large enough n, and for white noise the
optimal smoother in the rescaled space collapses to the scalar
noise-to-signal ratio on the range components.

Scales are realized purely as weight sequences on spectral components; no
abstract completion is constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import DecayDeclaration, GaussianModel
from .operators import (
    DENSE,
    DIAGONAL,
    CoeffVector,
    DimensionMismatchError,
    OperatorRep,
    PinvBundle,
    default_rcond,
)
from .smoothing import _assemble


@dataclass(frozen=True, eq=False)
class ScaleWeights:
    """Weights kappa_j**n over the retained spectral components.

    ``indices`` are the positions of the retained components in the
    operator's representation (coordinate index for diagonal operators,
    singular-value rank otherwise); components with zero singular value are
    excluded, so the weights are strictly positive.
    """

    n: int
    indices: np.ndarray
    kappa: np.ndarray
    weights: np.ndarray
    decay_exponent: float | None = None

    def dual_norm(self, x) -> float:
        """Norm with reciprocal weights; mass off the retained components
        (the null space of the operator) contributes zero."""
        coeffs = x.coeffs if isinstance(x, CoeffVector) else np.asarray(x, float)
        return float(np.linalg.norm(coeffs[self.indices] / self.weights))

    def scale_norm(self, x) -> float:
        """Norm with direct weights, over the retained components."""
        coeffs = x.coeffs if isinstance(x, CoeffVector) else np.asarray(x, float)
        return float(np.linalg.norm(coeffs[self.indices] * self.weights))


def scale_weights(
    a: OperatorRep,
    n: int,
    bundle: PinvBundle | None = None,
    decay_exponent: float | None = None,
) -> ScaleWeights:
    """Scale eigenvalues and their n-th powers for a spectral operator.

    Diagonal operators are read off directly.  Dense operators need their
    singular values: pass the pinv bundle holding the SVD, otherwise the
    call is rejected with instructions to pre-diagonalize.
    """
    if n < 0:
        raise ValueError("scale index n must be nonnegative")
    if a.kind == DIAGONAL:
        mult = a.multipliers
        threshold = default_rcond(a) * float(np.abs(mult).max(initial=0.0))
        keep = np.abs(mult) > threshold
        indices = np.nonzero(keep)[0]
        kappa = mult[keep] ** 2
    else:
        if bundle is None or bundle.svd is None:
            raise DimensionMismatchError(
                "dense operator has no computed singular values; pre-diagonalize "
                "it or pass the pinv bundle holding its SVD"
            )
        _, s, _ = bundle.svd
        rank = bundle.numerical_rank
        indices = np.arange(rank)
        kappa = s[:rank] ** 2
    return ScaleWeights(
        n=int(n),
        indices=indices,
        kappa=kappa,
        weights=kappa ** float(n),
        decay_exponent=decay_exponent,
    )


def _rescale_diagonal(values: np.ndarray, inv_sq: np.ndarray) -> np.ndarray:
    # inv_sq holds pinv multipliers squared: 1/kappa on range, 0 elsewhere.
    return values * inv_sq


def rescaled_covariances(
    model: GaussianModel, n: int
) -> tuple[OperatorRep, OperatorRep]:
    """Covariances conjugated by the n-th power of the inverse scale operator.

    Spectral models become diagonal with entries sigma_j / kappa_j**(2n) on
    the range components; for n >= 1 the null-space components are zeroed.
    At n = 0 the inputs are returned unchanged.
    """
    if n < 0:
        raise ValueError("scale index n must be nonnegative")
    if n == 0:
        return model.sigma_u, model.sigma_v
    bundle = model.pinv_bundle
    if model.is_diagonal:
        inv_sq = bundle.pinv.multipliers ** 2
        factor = inv_sq ** (2 * n)
        su = model.sigma_u.multipliers * factor
        sv = model.sigma_v.multipliers * factor
        return (
            OperatorRep(
                DIAGONAL, model.a.domain_basis, model.a.domain_basis, multipliers=su
            ),
            OperatorRep(
                DIAGONAL, model.a.codomain_basis, model.a.codomain_basis, multipliers=sv
            ),
        )
    if bundle.svd is None:
        raise DimensionMismatchError(
            "rescaling a dense model requires the SVD from its pinv bundle"
        )
    u, s, vt = bundle.svd
    rank = bundle.numerical_rank
    inv_pow = s[:rank] ** (-2.0 * n)
    w_domain = (vt[:rank].T * inv_pow) @ vt[:rank]
    w_codomain = (u[:, :rank] * inv_pow) @ u[:, :rank].T
    su = w_domain @ model.sigma_u.as_matrix() @ w_domain
    sv = w_codomain @ model.sigma_v.as_matrix() @ w_codomain
    return (
        OperatorRep(
            DENSE,
            model.a.domain_basis,
            model.a.domain_basis,
            matrix=0.5 * (su + su.T),
        ),
        OperatorRep(
            DENSE,
            model.a.codomain_basis,
            model.a.codomain_basis,
            matrix=0.5 * (sv + sv.T),
        ),
    )


def trace_class_threshold(
    model: GaussianModel, decay: DecayDeclaration
) -> int | None:
    """Least scale index making both rescaled covariances summable.

    With kappa_j ~ j**p and sigma_j ~ j**(-q), the rescaled entries behave
    like j**(-(q + 2 n p)), summable iff q + 2 n p > 1.  Returns ``None``
    when no finite index suffices (p = 0 with non-summable sigma).
    """
    p = float(decay.kappa_decay)

    def needed(q: float) -> int | None:
        if q > 1.0:
            return 0
        if p <= 0.0:
            return None
        return math.floor((1.0 - q) / (2.0 * p)) + 1

    need_u = needed(float(decay.sigma_u_decay))
    need_v = needed(float(decay.sigma_v_decay))
    if need_u is None or need_v is None:
        return None
    return max(need_u, need_v)


def scaled_optimal_b(model: GaussianModel, n: int) -> OperatorRep:
    """Optimal smoother assembled from the rescaled covariances.

    At n = 0 this coincides with the unscaled optimal smoother; for white
    noise it equals the noise-to-signal ratio times the identity on the
    range components, for every admissible n.
    """
    sigma_u, sigma_v = rescaled_covariances(model, n)
    return _assemble(model.a, model.pinv_bundle, sigma_u, sigma_v)


def tail_ratio(values) -> float:
    """Relative growth (S(2N) - S(N)) / S(N) of partial sums of a sequence.

    The input supplies the first 2N terms.  Small ratios indicate a summable
    tail, ratios near or above one indicate divergence; the test is
    meaningful for power-law sequences.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 2 or arr.size % 2:
        raise ValueError("tail_ratio needs a 1-d sequence of even length 2N")
    half = arr.size // 2
    s1 = float(arr[:half].sum())
    if s1 <= 0.0:
        raise ValueError("partial sum over the first half must be positive")
    return float(arr[half:].sum()) / s1
