"""Versioned JSON serialization of fit results.

Estimates are keyed by examinee_id / item_id, each parameter carrying
{estimate, sd}.  Non-finite uncertainties (singular-curvature sentinel)
serialize as Infinity, which json.loads round-trips.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import MalformedRow
from .model import IrtFit, IrtParams, IrtVariant, ParamArrays

FIT_SCHEMA = "irt-fit/1"


def _entry(estimate: float, sd: float) -> dict:
    return {"estimate": float(estimate), "sd": float(sd)}


def fit_to_dict(fit: IrtFit) -> dict:
    """Plain-dict form of a fit, ready for json.dumps."""
    examinee_ids = fit.examinee_ids or tuple(
        f"examinee_{i}" for i in range(fit.params.n_examinees))
    item_ids = fit.item_ids or tuple(
        f"item_{i}" for i in range(fit.params.n_items))
    examinees = {
        eid: {"theta": _entry(fit.params.theta[i], fit.param_sd.theta[i])}
        for i, eid in enumerate(examinee_ids)
    }
    items: dict[str, dict] = {}
    for i, iid in enumerate(item_ids):
        entry = {"b": _entry(fit.params.b[i], fit.param_sd.b[i])}
        if fit.params.a is not None:
            entry["a"] = _entry(fit.params.a[i], fit.param_sd.a[i])
        if fit.params.c is not None:
            entry["c"] = _entry(fit.params.c[i], fit.param_sd.c[i])
        if fit.params.d is not None:
            entry["d"] = _entry(fit.params.d[i], fit.param_sd.d[i])
        items[iid] = entry
    return {
        "schema": FIT_SCHEMA,
        "variant": fit.variant.value,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "log_posterior": fit.log_posterior,
        "examinees": examinees,
        "items": items,
    }


def fit_to_json(fit: IrtFit) -> str:
    return json.dumps(fit_to_dict(fit), sort_keys=True, indent=2) + "\n"


def fit_from_json(text: str) -> IrtFit:
    """Rebuild an IrtFit from its JSON form (ids sorted as serialized)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise MalformedRow(0, f"invalid JSON: {err.msg}") from err
    if obj.get("schema") != FIT_SCHEMA:
        raise MalformedRow(0, f"expected schema {FIT_SCHEMA!r}, got {obj.get('schema')!r}")
    variant = IrtVariant(obj["variant"])
    examinee_ids = tuple(sorted(obj["examinees"]))
    item_ids = tuple(sorted(obj["items"]))
    theta = np.array([obj["examinees"][e]["theta"]["estimate"] for e in examinee_ids])
    theta_sd = np.array([obj["examinees"][e]["theta"]["sd"] for e in examinee_ids])

    def item_arrays(name):
        if not variant_uses(variant, name):
            return None, None
        est = np.array([obj["items"][i][name]["estimate"] for i in item_ids])
        sd = np.array([obj["items"][i][name]["sd"] for i in item_ids])
        return est, sd

    a, a_sd = item_arrays("a")
    c, c_sd = item_arrays("c")
    d, d_sd = item_arrays("d")
    b = np.array([obj["items"][i]["b"]["estimate"] for i in item_ids])
    b_sd = np.array([obj["items"][i]["b"]["sd"] for i in item_ids])
    params = IrtParams(variant=variant, theta=theta, b=b, a=a, c=c, d=d)
    sds = ParamArrays(theta=theta_sd, b=b_sd, a=a_sd, c=c_sd, d=d_sd)
    return IrtFit(variant=variant, params=params, param_sd=sds,
                  log_posterior=float(obj["log_posterior"]),
                  converged=bool(obj["converged"]),
                  iterations=int(obj["iterations"]),
                  examinee_ids=examinee_ids, item_ids=item_ids)


def variant_uses(variant: IrtVariant, name: str) -> bool:
    return {"a": variant.uses_a, "c": variant.uses_c, "d": variant.uses_d,
            "b": True, "theta": True}[name]
