"""Geodesic families on the SPD cone and their coefficient functions.

Three interpolation paths between SPD matrices X and Y are provided:

* ``star_geodesic``  - the distinguished Thompson-metric geodesic, a
  linear combination phi * Y + psi * X whose coefficients depend only on
  the extreme eigenvalues (alpha, beta) of Y X^-1 and on t. It is the
  scalable path: sparse in, sparse out.
* ``riemannian_geodesic`` - the affine-invariant Riemannian geodesic
  X^(1/2) (X^(-1/2) Y X^(-1/2))^t X^(1/2), dense by nature.
* ``diamond_geodesic`` - an alternative Thompson-metric geodesic whose
  branch follows the sign of log(alpha * beta).

The coefficient derivatives at t = 0 (named m and o here) are the
building blocks of the inductive mean's fixed-point equation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.linalg import eigh

from .core import DEFAULT_DENSE_CEILING, SpdMatrix, _check_dims, combine
from .eigen import EigenOptions, extreme_pair
from .errors import (
    DegeneratePencil,
    DenseLimitExceeded,
    NonPositiveAlpha,
    OrderViolation,
)

# below this log-spread the generic formulas switch to the equal branch
BRANCH_TOL = 1e-8
# relative slack before beta < alpha counts as an ordering violation
ORDER_RTOL = 1e-9


@dataclass(frozen=True)
class GeodesicCoefficients:
    """Coefficients (phi, psi) at parameter t and their t=0 derivatives (m, o).

    The interpolation point is phi * Y + psi * X. On [0, 1] both
    coefficients are nonnegative and (phi, psi) equals (0, 1) at t = 0
    and (1, 0) at t = 1; m is always positive while o can take any sign.
    """

    phi: float
    psi: float
    m: float
    o: float
    branch: str  # "generic" or "equal"


def _validate_pair(alpha: float, beta: float) -> float:
    if not alpha > 0:
        raise NonPositiveAlpha(alpha)
    if beta < alpha * (1.0 - ORDER_RTOL):
        raise OrderViolation(alpha, beta)
    return max(beta, alpha)


def coefficient_derivatives(alpha: float, beta: float):
    """Derivatives (m, o) of (phi, psi) at t = 0.

    Generic branch: m = (log b - log a)/(b - a), o = (b log a - a log b)/(b - a),
    evaluated through expm1 so the beta -> alpha limit is seamless;
    equal branch: m = 1/a, o = log a - 1.
    """
    beta = _validate_pair(alpha, beta)
    delta = math.log(beta) - math.log(alpha)
    if delta <= BRANCH_TOL:
        return 1.0 / alpha, math.log(alpha) - 1.0
    em = math.expm1(delta)
    m = delta / (alpha * em)
    o = math.log(alpha) - delta / em
    return m, o


def geodesic_coefficients(alpha: float, beta: float, t: float) -> GeodesicCoefficients:
    """Interpolation coefficients (phi, psi) at t for pencil extremes (alpha, beta).

    The generic expressions (b^t - a^t)/(b - a) and (b a^t - a b^t)/(b - a)
    cancel catastrophically as beta -> alpha, so they are evaluated as

        phi = a^(t-1) expm1(t d) / expm1(d),
        psi = -b a^(t-1) expm1((t-1) d) / expm1(d),   d = log(b/a),

    which stay at full precision across the branch boundary. t may lie
    anywhere in R; outside [0, 1] phi or psi can be negative.
    """
    beta = _validate_pair(alpha, beta)
    t = float(t)
    delta = math.log(beta) - math.log(alpha)
    m, o = coefficient_derivatives(alpha, beta)
    if delta <= BRANCH_TOL:
        at = alpha ** t
        return GeodesicCoefficients(
            phi=t * at / alpha, psi=(1.0 - t) * at, m=m, o=o, branch="equal"
        )
    # the endpoint values are identities of the formulas; pinning them
    # exactly keeps t=0 and t=1 outputs bit-identical to the inputs
    if t == 0.0:
        return GeodesicCoefficients(phi=0.0, psi=1.0, m=m, o=o, branch="generic")
    if t == 1.0:
        return GeodesicCoefficients(phi=1.0, psi=0.0, m=m, o=o, branch="generic")
    em = math.expm1(delta)
    atm1 = alpha ** (t - 1.0)
    phi = atm1 * math.expm1(t * delta) / em
    psi = -beta * atm1 * math.expm1((t - 1.0) * delta) / em
    return GeodesicCoefficients(phi=phi, psi=psi, m=m, o=o, branch="generic")


def _wrap_combination(pairs, t, certify):
    inside = 0.0 <= t <= 1.0
    if certify is None:
        certify = inside
    out = combine(pairs, certify=certify)
    if not inside and not certify:
        warnings.warn(
            f"geodesic evaluated at t={t} outside [0, 1]: result returned "
            "without positive-definiteness certification",
            RuntimeWarning,
            stacklevel=3,
        )
    return out


def star_geodesic(
    X: SpdMatrix,
    Y: SpdMatrix,
    t: float,
    opts: EigenOptions | None = None,
    *,
    certify: bool | None = None,
) -> SpdMatrix:
    """Point at parameter t on the distinguished Thompson geodesic from X to Y.

    Computes phi * Y + psi * X from the extreme eigenvalues of Y X^-1
    only; never touches the interior spectrum. Sparse inputs give a
    sparse result whose pattern is contained in the union of the input
    patterns.

    Parameters
    ----------
    X, Y : SpdMatrix
        Endpoints, same dimension.
    t : float
        Position on the path; t = 0 gives X and t = 1 gives Y exactly.
        Values outside [0, 1] extrapolate.
    opts : EigenOptions, optional
        Extreme-eigenvalue solver options.
    certify : bool, optional
        Force or skip the SPD certification of the result. Default:
        certify inside [0, 1]; outside, return the matrix uncertified
        and emit a RuntimeWarning.

    Returns
    -------
    SpdMatrix
        The interpolation point; ``certified`` reflects the choice above.
    """
    _check_dims(X, Y)
    ext = extreme_pair(X, Y, opts)
    co = geodesic_coefficients(ext.alpha, ext.beta, t)
    return _wrap_combination([(co.phi, Y), (co.psi, X)], t, certify)


def riemannian_geodesic(
    X: SpdMatrix,
    Y: SpdMatrix,
    t: float,
    *,
    dense_ceiling: int = DEFAULT_DENSE_CEILING,
) -> SpdMatrix:
    """Affine-invariant Riemannian geodesic X^(1/2)(X^(-1/2) Y X^(-1/2))^t X^(1/2).

    Requires two full eigendecompositions, so it is restricted to
    dense-representable sizes. The result is SPD for every real t.
    """
    _check_dims(X, Y)
    if X.n > dense_ceiling:
        raise DenseLimitExceeded(X.n, dense_ceiling)
    w, V = eigh(X.dense())
    sqrt_w = w ** 0.5
    Xh = (V * sqrt_w) @ V.T
    Xmh = (V / sqrt_w) @ V.T
    M = Xmh @ Y.dense() @ Xmh
    M = (M + M.T) / 2.0
    wm, Vm = eigh(M)
    mid = (Vm * wm ** t) @ Vm.T
    R = Xh @ mid @ Xh
    return SpdMatrix((R + R.T) / 2.0)


def diamond_geodesic(
    X: SpdMatrix,
    Y: SpdMatrix,
    t: float,
    opts: EigenOptions | None = None,
    *,
    certify: bool | None = None,
) -> SpdMatrix:
    """Point at parameter t on the diamond Thompson geodesic from X to Y.

    Uses the lambda_max branch when alpha * beta >= 1 and the lambda_min
    branch otherwise (the branches agree at alpha * beta = 1). Undefined
    when the extremes coincide; raises DegeneratePencil there, in which
    case the star geodesic is the drop-in replacement.
    """
    _check_dims(X, Y)
    ext = extreme_pair(X, Y, opts)
    alpha, beta = ext.alpha, ext.beta
    if math.log(beta) - math.log(alpha) <= BRANCH_TOL:
        raise DegeneratePencil(alpha, beta)
    lam = beta if alpha * beta >= 1.0 else alpha
    ell = math.log(lam)
    # (lam^t - lam^-t) / (lam - lam^-1) = sinh(t ell) / sinh(ell), which is
    # cancellation-free for lam near 1
    coeff_y = math.sinh(t * ell) / math.sinh(ell)
    coeff_x = math.sinh((1.0 - t) * ell) / math.sinh(ell)
    return _wrap_combination([(coeff_y, Y), (coeff_x, X)], t, certify)
