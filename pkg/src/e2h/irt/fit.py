"""Bayesian estimation of item response models.

Two estimators share the same objective (see :mod:`.objective`):

* :func:`fit_map` — deterministic gradient ascent with backtracking line
  search, uncertainties from a Laplace approximation (finite-difference
  Hessian of the gradient).
* :func:`fit_mcmc` — Metropolis-within-Gibbs sampling as a stochastic
  cross-check; posterior means and stds over retained samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..data import ResponseMatrix
from ..errors import ChainDiverged, DidNotConverge, InvalidParameter, TooFewItems
from .model import IrtFit, IrtParams, IrtPriors, IrtVariant, ParamArrays, sigmoid
from .objective import DesignArrays, pack, unpack, value_and_grad_flat

_HESS_STEP = 1e-5
_MAX_BACKTRACKS = 60
_ARMIJO = 1e-4


@dataclass(frozen=True)
class MapConfig:
    """Gradient-ascent settings for :func:`fit_map`."""

    max_iter: int = 2000
    grad_tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1 or self.grad_tol <= 0:
            raise InvalidParameter("max_iter must be >= 1 and grad_tol positive")


@dataclass(frozen=True)
class McmcConfig:
    """Sampler settings for :func:`fit_mcmc`."""

    n_samples: int = 1000
    n_warmup: int = 500
    step_sizes: dict = field(default_factory=lambda: {
        "theta": 0.5, "log_a": 0.25, "b": 0.5, "logit_c": 0.8, "logit_d": 0.8})
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidParameter(f"n_samples must be >= 1, got {self.n_samples}")
        if self.n_warmup < 0:
            raise InvalidParameter(f"n_warmup must be >= 0, got {self.n_warmup}")


def _check_size(matrix: ResponseMatrix) -> None:
    if matrix.n_examinees < 2 or matrix.n_items < 2:
        raise TooFewItems(
            "fitting needs at least 2 examinees and 2 items, got "
            f"{matrix.n_examinees} examinees x {matrix.n_items} items")


def initial_params(matrix: ResponseMatrix, variant: IrtVariant,
                   priors: IrtPriors) -> IrtParams:
    """Deterministic starting point: raw-score theta, logit-rate b, prior-mean rest."""
    design = DesignArrays.from_matrix(matrix)
    n_e, n_i = design.n_examinees, design.n_items

    attempts_e = np.bincount(design.ex_idx, minlength=n_e).astype(float)
    correct_e = np.bincount(design.ex_idx, weights=design.x, minlength=n_e)
    score = np.divide(correct_e, attempts_e, out=np.full(n_e, 0.5), where=attempts_e > 0)
    sd = float(np.std(score))
    theta0 = (score - float(np.mean(score))) / sd if sd > 0 else np.zeros(n_e)

    attempts_i = np.bincount(design.it_idx, minlength=n_i).astype(float)
    correct_i = np.bincount(design.it_idx, weights=design.x, minlength=n_i)
    # Continuity-corrected rate keeps the logit finite for 0/100% items.
    p = (correct_i + 0.5) / (attempts_i + 1.0)
    b0 = -(np.log(p) - np.log1p(-p))

    a0 = np.ones(n_i) if variant.uses_a else None
    c0 = np.full(n_i, priors.c_mean) if variant.uses_c else None
    d0 = np.full(n_i, priors.d_mean) if variant.uses_d else None
    return IrtParams(variant=variant, theta=theta0, b=b0, a=a0, c=c0, d=d0)


def _laplace_sds(design: DesignArrays, variant: IrtVariant, priors: IrtPriors,
                 x: np.ndarray) -> tuple[np.ndarray, bool]:
    """Posterior sds on the unconstrained coordinates via the FD Hessian.

    Returns (sd vector, ok flag); a singular or indefinite Hessian yields
    +inf sentinels on the affected coordinates and ok=False.
    """
    dim = x.size
    hess = np.empty((dim, dim))
    h = _HESS_STEP
    for k in range(dim):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        _, gp = value_and_grad_flat(design, variant, priors, xp)
        _, gm = value_and_grad_flat(design, variant, priors, xm)
        hess[:, k] = (gp - gm) / (2 * h)
    hess = 0.5 * (hess + hess.T)
    try:
        cov = np.linalg.inv(-hess)
    except np.linalg.LinAlgError:
        return np.full(dim, np.inf), False
    var = np.diag(cov).copy()
    bad = ~np.isfinite(var) | (var <= 0)
    if bad.any():
        var[bad] = np.inf
        return np.sqrt(var), False
    return np.sqrt(var), True


def _sds_to_natural(sd_flat: np.ndarray, params: IrtParams) -> ParamArrays:
    """Delta-method transport of coordinate sds back to the natural scale."""
    n_e, n_i = params.n_examinees, params.n_items
    pos = 0

    def take(n):
        nonlocal pos
        chunk = sd_flat[pos:pos + n]
        pos += n
        return chunk

    sd_theta = take(n_e)
    sd_a = params.a * take(n_i) if params.variant.uses_a else None
    sd_b = take(n_i)
    sd_c = params.c * (1 - params.c) * take(n_i) if params.variant.uses_c else None
    sd_d = params.d * (1 - params.d) * take(n_i) if params.variant.uses_d else None
    return ParamArrays(theta=sd_theta, b=sd_b, a=sd_a, c=sd_c, d=sd_d)


def fit_map(matrix: ResponseMatrix, variant: IrtVariant = IrtVariant.ONE_PL_GUESS,
            priors: IrtPriors = IrtPriors(), config: MapConfig = MapConfig(),
            strict: bool = False) -> IrtFit:
    """Maximum-a-posteriori fit with Laplace uncertainties.

    Deterministic: initialization depends only on the data.  When the
    gradient tolerance is not reached within ``config.max_iter`` iterations
    the best fit so far is returned with ``converged=False``; with
    ``strict=True`` a :class:`DidNotConverge` carrying that fit is raised
    instead.
    """
    _check_size(matrix)
    design = DesignArrays.from_matrix(matrix)
    x = pack(initial_params(matrix, variant, priors))
    value, grad = value_and_grad_flat(design, variant, priors, x)

    step = 1.0
    iterations = 0
    converged = False
    for iterations in range(1, config.max_iter + 1):
        gnorm2 = float(grad @ grad)
        if math.sqrt(float(np.max(grad * grad))) <= config.grad_tol:
            converged = True
            iterations -= 1
            break
        # Backtracking ascent along the gradient with an Armijo condition.
        step = min(step * 2.0, 1e4)
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            x_new = x + step * grad
            value_new, grad_new = value_and_grad_flat(design, variant, priors, x_new)
            if np.isfinite(value_new) and value_new >= value + _ARMIJO * step * gnorm2:
                x, value, grad = x_new, value_new, grad_new
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # Step collapsed to numerical noise: no further ascent possible.
            converged = math.sqrt(float(np.max(grad * grad))) <= config.grad_tol
            break
    else:
        iterations = config.max_iter

    if not converged and math.sqrt(float(np.max(grad * grad))) <= config.grad_tol:
        converged = True

    params = unpack(x, variant, design.n_examinees, design.n_items)
    sd_flat, hess_ok = _laplace_sds(design, variant, priors, x)
    fit = IrtFit(
        variant=variant,
        params=params,
        param_sd=_sds_to_natural(sd_flat, params),
        log_posterior=value,
        converged=converged and hess_ok,
        iterations=iterations,
        examinee_ids=matrix.examinee_ids,
        item_ids=matrix.item_ids,
    )
    if strict and not fit.converged:
        raise DidNotConverge(
            f"gradient tolerance {config.grad_tol} not reached in "
            f"{config.max_iter} iterations" if not converged
            else "posterior Hessian is singular", fit=fit)
    return fit


# ---------------------------------------------------------------------------
# MCMC
# ---------------------------------------------------------------------------

def _record_loglik(design: DesignArrays, theta, a, b, c, d) -> np.ndarray:
    th = theta[design.ex_idx]
    lo = sigmoid(a[design.it_idx] * (th - b[design.it_idx]))
    ci, di = c[design.it_idx], d[design.it_idx]
    p = np.clip(ci + (di - ci) * lo, 1e-12, 1 - 1e-12)
    return design.x * np.log(p) + (1 - design.x) * np.log1p(-p)


def fit_mcmc(matrix: ResponseMatrix, variant: IrtVariant = IrtVariant.ONE_PL_GUESS,
             priors: IrtPriors = IrtPriors(),
             config: McmcConfig = McmcConfig()) -> IrtFit:
    """Metropolis-within-Gibbs posterior sampling.

    One sweep updates the theta block (per-examinee accept/reject, valid
    because records are conditionally independent across examinees) and then
    each free item-parameter block per item.  Results are posterior means
    and stds over the retained natural-space samples; fully deterministic
    for a fixed seed.
    """
    _check_size(matrix)
    design = DesignArrays.from_matrix(matrix)
    n_e, n_i = design.n_examinees, design.n_items
    rng = np.random.default_rng(config.seed)

    start = initial_params(matrix, variant, priors)
    theta = start.theta.copy()
    log_a = np.log(start.a) if variant.uses_a else np.zeros(n_i)
    b = start.b.copy()
    logit_c = (np.log(start.c) - np.log1p(-start.c)) if variant.uses_c else None
    logit_d = (np.log(start.d) - np.log1p(-start.d)) if variant.uses_d else None

    def natural():
        a = np.exp(log_a)
        c = sigmoid(logit_c) if logit_c is not None else np.zeros(n_i)
        d = sigmoid(logit_d) if logit_d is not None else np.ones(n_i)
        return a, np.clip(c, 1e-12, 1 - 1e-12), np.clip(d, 1e-12, 1 - 1e-12)

    steps = config.step_sizes
    accepted = 0
    proposed = 0
    sums: dict[str, np.ndarray] = {}
    sq_sums: dict[str, np.ndarray] = {}
    kept = 0

    def item_block_update(coord: np.ndarray, step: float, prior_fn) -> np.ndarray:
        """Vectorized per-item Metropolis step on one item-coordinate block."""
        nonlocal accepted, proposed
        a, c, d = natural()
        prop = coord + step * rng.standard_normal(n_i)
        ll_old = np.bincount(design.it_idx,
                             weights=_record_loglik(design, theta, a, b, c, d),
                             minlength=n_i)
        old = coord.copy()
        coord[:] = prop
        a2, c2, d2 = natural()
        b2 = b  # b is rebound by the caller for the b block
        ll_new = np.bincount(design.it_idx,
                             weights=_record_loglik(design, theta, a2, b2, c2, d2),
                             minlength=n_i)
        log_ratio = (ll_new - ll_old) + prior_fn(prop) - prior_fn(old)
        accept = np.log(rng.uniform(size=n_i)) < log_ratio
        coord[:] = np.where(accept, prop, old)
        accepted += int(accept.sum())
        proposed += n_i
        return coord

    def theta_prior(t):
        return -0.5 * ((t - priors.theta_mean) / priors.theta_sd) ** 2

    def b_prior(v):
        return -0.5 * ((v - priors.b_mean) / priors.b_sd) ** 2

    def log_a_prior(v):
        return -0.5 * (v / priors.log_a_sd) ** 2

    def beta_logit_prior(v, alpha, beta):
        # Beta density at sigmoid(v), as a function of the logit coordinate.
        p = np.clip(sigmoid(v), 1e-12, 1 - 1e-12)
        return (alpha - 1) * np.log(p) + (beta - 1) * np.log1p(-p)

    total_iters = config.n_warmup + config.n_samples
    for it in range(total_iters):
        # Theta block: all examinees proposed at once, accepted independently.
        a, c, d = natural()
        prop_theta = theta + steps["theta"] * rng.standard_normal(n_e)
        ll_old = np.bincount(design.ex_idx,
                             weights=_record_loglik(design, theta, a, b, c, d),
                             minlength=n_e)
        ll_new = np.bincount(design.ex_idx,
                             weights=_record_loglik(design, prop_theta, a, b, c, d),
                             minlength=n_e)
        log_ratio = (ll_new - ll_old) + theta_prior(prop_theta) - theta_prior(theta)
        accept = np.log(rng.uniform(size=n_e)) < log_ratio
        theta = np.where(accept, prop_theta, theta)
        accepted += int(accept.sum())
        proposed += n_e

        if variant.uses_a:
            log_a = item_block_update(log_a, steps["log_a"], log_a_prior)
        b = item_block_update(b, steps["b"], b_prior)
        if logit_c is not None:
            logit_c = item_block_update(
                logit_c, steps["logit_c"],
                lambda v: beta_logit_prior(v, priors.c_alpha, priors.c_beta))
        if logit_d is not None:
            logit_d = item_block_update(
                logit_d, steps["logit_d"],
                lambda v: beta_logit_prior(v, priors.d_alpha, priors.d_beta))

        if it >= config.n_warmup:
            a, c, d = natural()
            for name, arr in (("theta", theta), ("a", a), ("b", b), ("c", c), ("d", d)):
                if name not in sums:
                    sums[name] = np.zeros_like(arr)
                    sq_sums[name] = np.zeros_like(arr)
                sums[name] += arr
                sq_sums[name] += arr * arr
            kept += 1

    rate = accepted / proposed if proposed else 0.0
    if rate < 0.01:
        raise ChainDiverged(
            f"overall acceptance rate {rate:.4f} is below 1%; "
            "reduce step sizes or reparameterize")

    means = {k: sums[k] / kept for k in sums}
    stds = {k: np.sqrt(np.maximum(sq_sums[k] / kept - means[k] ** 2, 0.0)) for k in sums}
    params = IrtParams(
        variant=variant, theta=means["theta"], b=means["b"],
        a=means["a"] if variant.uses_a else None,
        c=np.clip(means["c"], 1e-12, 1 - 1e-12) if variant.uses_c else None,
        d=means["d"] if variant.uses_d else None)
    param_sd = ParamArrays(
        theta=stds["theta"], b=stds["b"],
        a=stds["a"] if variant.uses_a else None,
        c=stds["c"] if variant.uses_c else None,
        d=stds["d"] if variant.uses_d else None)
    lp, _ = value_and_grad_flat(design, variant, priors, pack(params))
    return IrtFit(variant=variant, params=params, param_sd=param_sd,
                  log_posterior=lp, converged=True,
                  iterations=total_iters,
                  examinee_ids=matrix.examinee_ids, item_ids=matrix.item_ids)
