"""Log-posterior objective and its exact gradient for IRT fitting.

The objective is the Bernoulli log likelihood over all response records plus
log prior densities: normal on theta and b, normal on log a, Beta on c and d.
Gradients are taken with respect to the unconstrained coordinates actually
optimized: theta, log a, b, logit c, logit d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import ResponseMatrix
from ..errors import ShapeMismatch
from .model import IrtParams, IrtPriors, IrtVariant, ParamArrays, sigmoid

_P_FLOOR = 1e-12


@dataclass(frozen=True)
class DesignArrays:
    """Dense index form of a ResponseMatrix for vectorized likelihoods."""

    ex_idx: np.ndarray
    it_idx: np.ndarray
    x: np.ndarray
    n_examinees: int
    n_items: int

    @classmethod
    def from_matrix(cls, matrix: ResponseMatrix) -> "DesignArrays":
        ex = np.fromiter((matrix.examinee_index[r.examinee_id] for r in matrix.records),
                         dtype=np.intp, count=len(matrix.records))
        it = np.fromiter((matrix.item_index[r.item_id] for r in matrix.records),
                         dtype=np.intp, count=len(matrix.records))
        x = np.fromiter((r.outcome for r in matrix.records),
                        dtype=float, count=len(matrix.records))
        return cls(ex_idx=ex, it_idx=it, x=x,
                   n_examinees=matrix.n_examinees, n_items=matrix.n_items)


def _normal_logpdf_sum(x: np.ndarray, mean: float, sd: float) -> float:
    z = (x - mean) / sd
    return float(-0.5 * np.sum(z * z) - x.size * (0.5 * math.log(2 * math.pi) + math.log(sd)))


def _beta_logpdf_sum(x: np.ndarray, alpha: float, beta: float) -> float:
    log_b = math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta)
    return float(np.sum((alpha - 1) * np.log(x) + (beta - 1) * np.log1p(-x)) - x.size * log_b)


def _core(design: DesignArrays, variant: IrtVariant, priors: IrtPriors,
          theta: np.ndarray, a: np.ndarray, b: np.ndarray,
          c: np.ndarray, d: np.ndarray):
    """Shared likelihood + prior evaluation returning value and coord gradients."""
    th = theta[design.ex_idx]
    ai, bi, ci, di = a[design.it_idx], b[design.it_idx], c[design.it_idx], d[design.it_idx]
    lo = sigmoid(ai * (th - bi))
    p = np.clip(ci + (di - ci) * lo, _P_FLOOR, 1.0 - _P_FLOOR)
    x = design.x
    value = float(np.sum(x * np.log(p) + (1.0 - x) * np.log1p(-p)))

    # dll/dP per record, then chain into each natural parameter.
    dldp = x / p - (1.0 - x) / (1.0 - p)
    span = (di - ci) * lo * (1.0 - lo)
    g_theta_rec = dldp * span * ai
    n_e, n_i = design.n_examinees, design.n_items
    # bincount yields int64 when the weight array is empty; force float.
    g_theta = np.bincount(design.ex_idx, weights=g_theta_rec,
                          minlength=n_e).astype(np.float64, copy=False)
    g_b = np.bincount(design.it_idx, weights=-g_theta_rec,
                      minlength=n_i).astype(np.float64, copy=False)
    g_a = np.bincount(design.it_idx, weights=dldp * span * (th - bi),
                      minlength=n_i).astype(np.float64, copy=False)
    g_c = np.bincount(design.it_idx, weights=dldp * (1.0 - lo),
                      minlength=n_i).astype(np.float64, copy=False)
    g_d = np.bincount(design.it_idx, weights=dldp * lo,
                      minlength=n_i).astype(np.float64, copy=False)

    # Priors, on the coordinates the optimizer sees.
    value += _normal_logpdf_sum(theta, priors.theta_mean, priors.theta_sd)
    g_theta += -(theta - priors.theta_mean) / priors.theta_sd**2
    value += _normal_logpdf_sum(b, priors.b_mean, priors.b_sd)
    g_b += -(b - priors.b_mean) / priors.b_sd**2

    g_log_a = g_logit_c = g_logit_d = None
    if variant.uses_a:
        log_a = np.log(a)
        value += _normal_logpdf_sum(log_a, 0.0, priors.log_a_sd)
        g_log_a = g_a * a - log_a / priors.log_a_sd**2
    if variant.uses_c:
        value += _beta_logpdf_sum(c, priors.c_alpha, priors.c_beta)
        g_logit_c = (g_c * c * (1.0 - c)
                     + (priors.c_alpha - 1) * (1.0 - c) - (priors.c_beta - 1) * c)
    if variant.uses_d:
        value += _beta_logpdf_sum(d, priors.d_alpha, priors.d_beta)
        g_logit_d = (g_d * d * (1.0 - d)
                     + (priors.d_alpha - 1) * (1.0 - d) - (priors.d_beta - 1) * d)
    return value, g_theta, g_log_a, g_b, g_logit_c, g_logit_d


def log_posterior_and_gradient(matrix: ResponseMatrix, variant: IrtVariant,
                               priors: IrtPriors, params: IrtParams
                               ) -> tuple[float, ParamArrays]:
    """Evaluate the objective and its gradient at ``params``.

    The gradient is parameter-shaped; the ``a``, ``c`` and ``d`` slots hold
    derivatives with respect to log a, logit c and logit d respectively.
    """
    if params.variant is not variant:
        raise ShapeMismatch(f"params built for {params.variant.value}, not {variant.value}")
    if params.n_examinees != matrix.n_examinees or params.n_items != matrix.n_items:
        raise ShapeMismatch(
            f"params sized {params.n_examinees}x{params.n_items}, matrix is "
            f"{matrix.n_examinees}x{matrix.n_items}")
    design = DesignArrays.from_matrix(matrix)
    value, g_theta, g_log_a, g_b, g_logit_c, g_logit_d = _core(
        design, variant, priors, params.theta,
        params.a_eff(), params.b, params.c_eff(), params.d_eff())
    return value, ParamArrays(theta=g_theta, b=g_b, a=g_log_a, c=g_logit_c, d=g_logit_d)


# ---------------------------------------------------------------------------
# flat-vector view used by the optimizers
# ---------------------------------------------------------------------------

def pack(params: IrtParams) -> np.ndarray:
    """Flatten to the unconstrained vector [theta, log a?, b, logit c?, logit d?]."""
    parts = [params.theta]
    if params.variant.uses_a:
        parts.append(np.log(params.a))
    parts.append(params.b)
    if params.variant.uses_c:
        parts.append(np.log(params.c) - np.log1p(-params.c))
    if params.variant.uses_d:
        parts.append(np.log(params.d) - np.log1p(-params.d))
    return np.concatenate(parts)


def _split(x: np.ndarray, variant: IrtVariant, n_examinees: int, n_items: int):
    """Unconstrained vector -> natural-space arrays, without invariant checks.

    Sigmoid outputs are kept strictly inside (0,1) so trial points visited
    during line search never produce log(0).
    """
    pos = 0

    def take(n):
        nonlocal pos
        chunk = x[pos:pos + n]
        pos += n
        return chunk

    tiny = 1e-12
    theta = take(n_examinees)
    a = np.exp(take(n_items)) if variant.uses_a else np.ones(n_items)
    b = take(n_items)
    c = np.clip(sigmoid(take(n_items)), tiny, 1 - tiny) if variant.uses_c \
        else np.zeros(n_items)
    d = np.clip(sigmoid(take(n_items)), tiny, 1 - tiny) if variant.uses_d \
        else np.ones(n_items)
    return theta, a, b, c, d


def unpack(x: np.ndarray, variant: IrtVariant, n_examinees: int, n_items: int) -> IrtParams:
    """Inverse of :func:`pack`, returning validated parameters."""
    theta, a, b, c, d = _split(x, variant, n_examinees, n_items)
    return IrtParams(variant=variant, theta=theta, b=b,
                     a=a if variant.uses_a else None,
                     c=c if variant.uses_c else None,
                     d=d if variant.uses_d else None)


def value_and_grad_flat(design: DesignArrays, variant: IrtVariant, priors: IrtPriors,
                        x: np.ndarray) -> tuple[float, np.ndarray]:
    """Objective and gradient on the flat unconstrained vector."""
    theta, a, b, c, d = _split(x, variant, design.n_examinees, design.n_items)
    value, g_theta, g_log_a, g_b, g_logit_c, g_logit_d = _core(
        design, variant, priors, theta, a, b, c, d)
    parts = [g_theta]
    if g_log_a is not None:
        parts.append(g_log_a)
    parts.append(g_b)
    if g_logit_c is not None:
        parts.append(g_logit_c)
    if g_logit_d is not None:
        parts.append(g_logit_d)
    return value, np.concatenate(parts)
