"""Item response theory estimation: models, MAP/MCMC fitting, marginal inversion."""

from .fit import MapConfig, McmcConfig, fit_map, fit_mcmc, initial_params
from .marginal import (
    MarginalEstimate,
    MarginalFit,
    NormalAbility,
    fit_from_item_difficulties,
    invert_difficulty,
    marginal_prob,
    marginal_prob_derivative,
)
from .model import IrtFit, IrtParams, IrtPriors, IrtVariant, ParamArrays, irf, sigmoid
from .objective import (
    DesignArrays,
    log_posterior_and_gradient,
    pack,
    unpack,
    value_and_grad_flat,
)
from .serialize import FIT_SCHEMA, fit_from_json, fit_to_dict, fit_to_json

__all__ = [
    "DesignArrays",
    "FIT_SCHEMA",
    "IrtFit",
    "IrtParams",
    "IrtPriors",
    "IrtVariant",
    "MapConfig",
    "MarginalEstimate",
    "MarginalFit",
    "McmcConfig",
    "NormalAbility",
    "ParamArrays",
    "fit_from_item_difficulties",
    "fit_from_json",
    "fit_map",
    "fit_mcmc",
    "fit_to_dict",
    "fit_to_json",
    "initial_params",
    "invert_difficulty",
    "irf",
    "log_posterior_and_gradient",
    "marginal_prob",
    "marginal_prob_derivative",
    "pack",
    "sigmoid",
    "unpack",
    "value_and_grad_flat",
]
