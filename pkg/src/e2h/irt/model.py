"""Item response model family: variants, parameters, priors, response function.

Five logistic variants share one four-parameter response curve

    P(correct) = c + (d - c) / (1 + exp(-a (theta - b)))

with unused parameters pinned per variant: 1PL fixes a=1, c=0, d=1; 2PL
frees a; 3PL frees c; 4PL frees d; the 1PL-with-guessing variant frees c
while keeping a=1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameter, ShapeMismatch


class IrtVariant(enum.Enum):
    """Model family member, determining which item parameters are free."""

    ONE_PL = "1pl"
    TWO_PL = "2pl"
    THREE_PL = "3pl"
    FOUR_PL = "4pl"
    ONE_PL_GUESS = "1gpl"

    @property
    def uses_a(self) -> bool:
        return self in (IrtVariant.TWO_PL, IrtVariant.THREE_PL, IrtVariant.FOUR_PL)

    @property
    def uses_c(self) -> bool:
        return self in (IrtVariant.THREE_PL, IrtVariant.FOUR_PL, IrtVariant.ONE_PL_GUESS)

    @property
    def uses_d(self) -> bool:
        return self is IrtVariant.FOUR_PL


@dataclass(frozen=True)
class IrtPriors:
    """Prior hyperparameters for Bayesian fitting.

    Ability is standard normal to pin the latent scale; difficulty is a wide
    normal; discrimination is log-normal; the asymptotes get Beta priors
    favouring small guessing rates and high ceilings.
    """

    theta_mean: float = 0.0
    theta_sd: float = 1.0
    b_mean: float = 0.0
    b_sd: float = 2.0
    log_a_sd: float = 0.5
    c_alpha: float = 2.0
    c_beta: float = 8.0
    d_alpha: float = 8.0
    d_beta: float = 2.0

    def __post_init__(self):
        for name in ("theta_sd", "b_sd", "log_a_sd", "c_alpha", "c_beta",
                     "d_alpha", "d_beta"):
            if getattr(self, name) <= 0:
                raise InvalidParameter(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def c_mean(self) -> float:
        return self.c_alpha / (self.c_alpha + self.c_beta)

    @property
    def d_mean(self) -> float:
        return self.d_alpha / (self.d_alpha + self.d_beta)


@dataclass(frozen=True)
class IrtParams:
    """Natural-space parameter values for one fit.

    ``theta`` has one entry per examinee; item arrays have one entry per
    item, with ``None`` for parameters the variant pins.
    """

    variant: IrtVariant
    theta: np.ndarray
    b: np.ndarray
    a: np.ndarray | None = None
    c: np.ndarray | None = None
    d: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        for name, used in (("a", self.variant.uses_a), ("c", self.variant.uses_c),
                           ("d", self.variant.uses_d)):
            val = getattr(self, name)
            if used:
                if val is None:
                    raise ShapeMismatch(f"variant {self.variant.value} requires {name}")
                arr = np.asarray(val, dtype=float)
                object.__setattr__(self, name, arr)
                if arr.shape != self.b.shape:
                    raise ShapeMismatch(f"{name} shape {arr.shape} != b shape {self.b.shape}")
            elif val is not None:
                raise ShapeMismatch(f"variant {self.variant.value} does not use {name}")
        if self.a is not None and np.any(self.a <= 0):
            raise InvalidParameter("all discriminations a must be positive")
        c_eff = self.c if self.c is not None else 0.0
        d_eff = self.d if self.d is not None else 1.0
        if np.any(np.asarray(c_eff) < 0) or np.any(np.asarray(d_eff) > 1):
            raise InvalidParameter("asymptotes must satisfy 0 <= c and d <= 1")
        if np.any(np.asarray(c_eff) >= np.asarray(d_eff)):
            raise InvalidParameter("lower asymptote c must stay below upper asymptote d")

    @property
    def n_examinees(self) -> int:
        return self.theta.shape[0]

    @property
    def n_items(self) -> int:
        return self.b.shape[0]

    def a_eff(self) -> np.ndarray:
        return self.a if self.a is not None else np.ones_like(self.b)

    def c_eff(self) -> np.ndarray:
        return self.c if self.c is not None else np.zeros_like(self.b)

    def d_eff(self) -> np.ndarray:
        return self.d if self.d is not None else np.ones_like(self.b)


@dataclass(frozen=True)
class ParamArrays:
    """Unvalidated parameter-shaped arrays (gradients, posterior sds)."""

    theta: np.ndarray
    b: np.ndarray
    a: np.ndarray | None = None
    c: np.ndarray | None = None
    d: np.ndarray | None = None


@dataclass(frozen=True)
class IrtFit:
    """Fit output: point estimates, matching uncertainties, diagnostics."""

    variant: IrtVariant
    params: IrtParams
    param_sd: ParamArrays
    log_posterior: float
    converged: bool
    iterations: int
    examinee_ids: tuple[str, ...] = ()
    item_ids: tuple[str, ...] = ()


def sigmoid(z):
    """Numerically stable logistic function, elementwise."""
    z = np.asarray(z, dtype=float)
    t = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + t), t / (1.0 + t))
    return out if out.ndim else float(out)


def irf(variant: IrtVariant, theta, a=1.0, b=0.0, c=0.0, d=1.0):
    """Item response function: probability of a correct response.

    Parameters the variant pins are forced to their fixed values, so only
    the free ones are read (and validated).  Accepts scalars or broadcastable
    arrays.
    """
    a_used = np.asarray(a, dtype=float) if variant.uses_a else 1.0
    c_used = np.asarray(c, dtype=float) if variant.uses_c else 0.0
    d_used = np.asarray(d, dtype=float) if variant.uses_d else 1.0
    if variant.uses_a and np.any(a_used <= 0):
        raise InvalidParameter("discrimination a must be positive")
    if np.any(np.asarray(c_used) < 0) or np.any(np.asarray(d_used) > 1) \
            or np.any(np.asarray(c_used) >= np.asarray(d_used)):
        raise InvalidParameter("asymptotes must satisfy 0 <= c < d <= 1")
    theta = np.asarray(theta, dtype=float)
    b = np.asarray(b, dtype=float)
    out = c_used + (d_used - c_used) * sigmoid(a_used * (theta - b))
    return out if np.ndim(out) else float(out)
