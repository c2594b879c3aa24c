"""Command-line frontend: ingestion -> estimation -> scores -> reports.

Subcommands: fit-irt, fit-glicko2, normalize, verify, profile, export.
Options resolve in precedence order: command-line flag, then the matching
section of the TOML config file (--config), then the built-in default.
Every run is seeded and all outputs are byte-stable: JSON is written with
sorted keys, no timestamps, and a metadata block carrying the tool version,
a hash of the resolved configuration, and the seed.

Exit codes: 0 success; 2 input or validation failure; 3 estimation did not
converge (outputs are still written); 4 statistical degeneracy (empty range,
all pairs excluded); 5 numerical solvability failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib

from . import __version__, glicko2
from .data import load_game_records, load_item_difficulties, load_responses
from .errors import (
    DegeneracyError,
    DidNotConverge,
    E2HError,
    SolvabilityError,
    ValidationError,
)
from .irt import (
    IrtPriors,
    IrtVariant,
    MapConfig,
    McmcConfig,
    NormalAbility,
    fit_from_item_difficulties,
    fit_map,
    fit_mcmc,
    fit_to_dict,
)
from .profiling import (
    export_surface,
    gain_surface,
    load_eval_logs_jsonl,
    ridge_statistic,
)
from .standardize import (
    RawScore,
    load_scores_csv,
    load_scores_json,
    normalize,
    scores_to_csv,
    scores_to_json,
)
from .verify import (
    BootstrapConfig,
    ExclusionPolicy,
    discrepancy_histogram,
    load_pairs_jsonl,
    matching_report,
    report_to_dict,
    spearman,
    split_pairs,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGE = 3
EXIT_DEGENERATE = 4
EXIT_SOLVER = 5

log = logging.getLogger("e2h")


# ---------------------------------------------------------------------------
# option resolution
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file not found: {p}")
    try:
        return tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as err:
        raise ValidationError(f"config file {p} is not valid TOML: {err}") from err


class Options:
    """Flag > config-section > global-section > default resolution."""

    def __init__(self, args: argparse.Namespace, command: str):
        self._args = vars(args)
        config = _load_config(self._args.get("config"))
        self._section = config.get(command, {})
        self._global = config.get("global", {})
        self.resolved: dict = {}

    def get(self, name: str, default=None, cast=None):
        # Config files may spell keys with dashes or underscores.
        alt = name.replace("-", "_")
        flag = self._args.get(alt)
        if flag is not None:
            value = flag
        elif name in self._section or alt in self._section:
            value = self._section.get(name, self._section.get(alt))
        elif name in self._global or alt in self._global:
            value = self._global.get(name, self._global.get(alt))
        else:
            value = default
        if cast is not None and value is not None:
            value = cast(value)
        self.resolved[name] = value
        return value

    def section(self, name: str) -> dict:
        value = self._section.get(name, {})
        self.resolved[name] = value
        return value

    def metadata(self, command: str) -> dict:
        # Hash only the analytic knobs: where files land (or which config file
        # supplied the values) must not change the hash, or reruns into a
        # fresh directory would look like different configurations.
        analytic = {k: v for k, v in self.resolved.items()
                    if k not in ("output-dir", "config", "log-level")}
        blob = json.dumps(analytic, sort_keys=True, default=str)
        return {
            "tool_version": __version__,
            "command": command,
            "config_hash": hashlib.sha256(blob.encode()).hexdigest()[:16],
            "seed": self.resolved.get("seed", 0),
        }


def _require_file(path: str | None, what: str) -> Path:
    if path is None:
        raise ValidationError(f"missing required input: {what}")
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"{what} file not found: {p}")
    return p


def _infer_format(path: Path, override: str | None) -> str:
    if override is not None:
        return override
    return "jsonl" if path.suffix == ".jsonl" else "csv"


def _out_dir(opts: Options) -> Path:
    out = Path(opts.get("output-dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _load_truth(path: str | None) -> dict[str, float] | None:
    """Optional item_id,value CSV holding ground-truth raw difficulties."""
    if path is None:
        return None
    p = _require_file(path, "truth")
    with p.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "item_id" not in reader.fieldnames \
                or "value" not in reader.fieldnames:
            raise ValidationError(f"truth file {p} needs columns item_id,value")
        return {row["item_id"]: float(row["value"]) for row in reader}


def _spearman_vs_truth(raw: dict[str, float], truth: dict[str, float] | None
                       ) -> float | None:
    if truth is None:
        return None
    shared = sorted(set(raw) & set(truth))
    if len(shared) < 2:
        raise ValidationError("truth file shares fewer than 2 items with the fit")
    return spearman([raw[i] for i in shared], [truth[i] for i in shared])


def _normalize_and_write(raw_scores: list[RawScore], opts: Options,
                         out: Path, meta: dict, required: bool = True) -> None:
    """Standardize raw scores and write scores.csv / scores.json.

    Fit commands pass required=False: a fit of one problem (or of identical
    scores) has no spread to standardize, and that should not sink the fit
    artifacts that were already written.
    """
    try:
        scores = normalize(raw_scores,
                           method=opts.resolved["norm-method"],
                           p_lo=opts.resolved["p-lo"], p_hi=opts.resolved["p-hi"])
    except DegeneracyError as err:
        if required:
            raise
        log.warning("skipping scores.csv/scores.json: %s", err)
        return
    _write(out / "scores.csv", scores_to_csv(scores))
    payload = json.loads(scores_to_json(scores))
    payload["method"] = opts.resolved["norm-method"]
    payload["metadata"] = meta
    _write(out / "scores.json", _dump_json(payload))


def _norm_flags(opts: Options) -> None:
    opts.get("norm-method", "minmax_clipped", str)
    opts.get("p-lo", 1.0, float)
    opts.get("p-hi", 99.0, float)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fit_irt(args: argparse.Namespace) -> int:
    opts = Options(args, "fit-irt")
    responses = opts.get("responses")
    item_difficulties = opts.get("item-difficulties")
    variant = IrtVariant(opts.get("variant", "1gpl", str))
    estimator = opts.get("estimator", "map", str)
    fmt = opts.get("format")
    seed = opts.get("seed", 0, int)
    _norm_flags(opts)
    truth = _load_truth(opts.get("truth"))
    prior_overrides = opts.section("priors")
    try:
        priors = IrtPriors(**prior_overrides)
    except TypeError as err:
        raise ValidationError(f"bad [fit-irt.priors] config: {err}") from err
    out = _out_dir(opts)

    if (responses is None) == (item_difficulties is None):
        raise ValidationError(
            "provide exactly one of --responses or --item-difficulties")
    if estimator not in ("map", "mcmc"):
        raise ValidationError(f"estimator must be 'map' or 'mcmc', got {estimator!r}")

    if responses is not None:
        opts.get("max-iter", 2000, int)
        opts.get("grad-tol", 1e-4, float)
        opts.get("n-samples", 1000, int)
        opts.get("n-warmup", 500, int)
        meta = opts.metadata("fit-irt")
        path = _require_file(responses, "responses")
        matrix = load_responses(path, _infer_format(path, fmt))
        if estimator == "map":
            fit = fit_map(matrix, variant, priors,
                          MapConfig(max_iter=opts.resolved["max-iter"],
                                    grad_tol=opts.resolved["grad-tol"], seed=seed))
        else:
            fit = fit_mcmc(matrix, variant, priors,
                           McmcConfig(n_samples=opts.resolved["n-samples"],
                                      n_warmup=opts.resolved["n-warmup"], seed=seed))
        fit_payload = fit_to_dict(fit)
        fit_payload["metadata"] = meta
        _write(out / "fit.json", _dump_json(fit_payload))

        raw = {iid: float(fit.params.b[i]) for i, iid in enumerate(fit.item_ids)}
        raw_scores = [RawScore(iid, raw[iid], float(fit.param_sd.b[i]))
                      for i, iid in enumerate(fit.item_ids)]
        _normalize_and_write(raw_scores, opts, out, meta, required=False)

        rho = _spearman_vs_truth(raw, truth)
        diagnostics = {
            "converged": fit.converged,
            "estimator": estimator,
            "variant": variant.value,
            "iterations": fit.iterations,
            "log_posterior": fit.log_posterior,
            "n_examinees": matrix.n_examinees,
            "n_items": matrix.n_items,
            "spearman_vs_truth": rho,
            "metadata": meta,
        }
        _write(out / "diagnostics.json", _dump_json(diagnostics))
        if rho is not None:
            print(f"spearman_vs_truth={rho:.6f}")
        if not fit.converged:
            log.error("fit did not converge; outputs written with converged=false")
            return EXIT_NO_CONVERGE
        return EXIT_OK

    # Aggregated success-rate path: marginal fitting, 1PL or 1gPL only.
    if variant not in (IrtVariant.ONE_PL, IrtVariant.ONE_PL_GUESS):
        raise ValidationError(
            f"marginal fitting from item difficulties supports variants 1pl and "
            f"1gpl, not {variant.value}")
    guess_c = opts.get("guess-c", None, float)
    n_choices = opts.get("n-choices", None, int)
    ability_mean = opts.get("ability-mean", 0.0, float)
    ability_sd = opts.get("ability-sd", 1.0, float)
    order = opts.get("quadrature-order", 64, int)
    tol = opts.get("tol", 1e-9, float)
    meta = opts.metadata("fit-irt")
    path = _require_file(item_difficulties, "item-difficulties")
    summaries = load_item_difficulties(path, _infer_format(path, fmt))
    if variant is IrtVariant.ONE_PL:
        guess_c = 0.0
    mf = fit_from_item_difficulties(
        summaries, c=guess_c, ability=NormalAbility(ability_mean, ability_sd),
        tol=tol, quadrature_order=order, n_choices=n_choices)
    for item_id, reason in mf.excluded:
        log.warning("excluded %s: %s", item_id, reason)

    fit_payload = {
        "schema": "irt-marginal-fit/1",
        "variant": variant.value,
        "ability": {"mean": ability_mean, "sd": ability_sd},
        "items": {e.item_id: {"b": {"estimate": e.b, "sd": e.b_sd}}
                  for e in mf.estimates},
        "excluded": [[item_id, reason] for item_id, reason in mf.excluded],
        "metadata": meta,
    }
    _write(out / "fit.json", _dump_json(fit_payload))

    raw_scores = [RawScore(e.item_id, e.b, e.b_sd) for e in mf.estimates]
    _normalize_and_write(raw_scores, opts, out, meta, required=False)

    raw = {e.item_id: e.b for e in mf.estimates}
    rho = _spearman_vs_truth(raw, truth)
    diagnostics = {
        "converged": True,
        "estimator": "marginal",
        "variant": variant.value,
        "n_items": len(mf.estimates),
        "n_excluded": len(mf.excluded),
        "spearman_vs_truth": rho,
        "metadata": meta,
    }
    _write(out / "diagnostics.json", _dump_json(diagnostics))
    if rho is not None:
        print(f"spearman_vs_truth={rho:.6f}")
    return EXIT_OK


def cmd_fit_glicko2(args: argparse.Namespace) -> int:
    opts = Options(args, "fit-glicko2")
    games = opts.get("games")
    fmt = opts.get("format")
    seed = opts.get("seed", 0, int)
    config = glicko2.Glicko2Config(
        tau=opts.get("tau", glicko2.DEFAULT_TAU, float),
        default_r=opts.get("default-r", glicko2.DEFAULT_R, float),
        default_rd=opts.get("default-rd", glicko2.DEFAULT_RD, float),
        default_sigma=opts.get("default-sigma", glicko2.DEFAULT_SIGMA, float),
        epsilon=opts.get("epsilon", glicko2.DEFAULT_EPSILON, float),
    )
    n_periods = opts.get("n-periods", None, int)
    convention = opts.get("score-convention", "problem", str)
    _norm_flags(opts)
    truth = _load_truth(opts.get("truth"))
    meta = opts.metadata("fit-glicko2")
    out = _out_dir(opts)

    if convention not in ("problem", "examinee"):
        raise ValidationError(
            f"score-convention must be 'problem' or 'examinee', got {convention!r}")
    path = _require_file(games, "games")
    records = load_game_records(path, _infer_format(path, fmt))
    if not records:
        raise ValidationError(f"no game records in {path}")

    mapping = glicko2.examinee_outcome_to_problem_score \
        if convention == "examinee" else None
    timelines = glicko2.rate_problems(records, config, outcome_mapping=mapping,
                                      n_periods=n_periods)
    _write(out / "timelines.jsonl", glicko2.timelines_to_jsonl(timelines))
    _write(out / "timelines.csv", glicko2.timelines_to_csv(timelines))

    finals = {pid: tl[-1] for pid, tl in timelines.items()}
    raw_scores = [RawScore(pid, state.r, state.rd)
                  for pid, state in sorted(finals.items())]
    _normalize_and_write(raw_scores, opts, out, meta, required=False)

    raw = {pid: state.r for pid, state in finals.items()}
    rho = _spearman_vs_truth(raw, truth)
    diagnostics = {
        "n_problems": len(timelines),
        "n_periods": len(next(iter(timelines.values()))) if timelines else 0,
        "n_records": len(records),
        "score_convention": convention,
        "spearman_vs_truth": rho,
        "metadata": meta,
    }
    _write(out / "diagnostics.json", _dump_json(diagnostics))
    if rho is not None:
        print(f"spearman_vs_truth={rho:.6f}")
    return EXIT_OK


def cmd_normalize(args: argparse.Namespace) -> int:
    opts = Options(args, "normalize")
    scores_in = opts.get("scores-in")
    _norm_flags(opts)
    opts.get("seed", 0, int)
    meta = opts.metadata("normalize")
    out = _out_dir(opts)

    path = _require_file(scores_in, "scores-in")
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "item_id" not in reader.fieldnames \
                or "raw" not in reader.fieldnames:
            raise ValidationError(f"{path} needs columns item_id,raw[,raw_sd]")
        raw_scores = [RawScore(row["item_id"], float(row["raw"]),
                               float(row.get("raw_sd") or 0.0))
                      for row in reader]
    _normalize_and_write(raw_scores, opts, out, meta)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    opts = Options(args, "verify")
    pairs_path = opts.get("pairs")
    rule = opts.get("exclusion", "none", str)
    gap = opts.get("gap", 2.0, float)
    n_resamples = opts.get("n-resamples", 1000, int)
    seed = opts.get("seed", 0, int)
    n_bins = opts.get("delta-bins", 20, int)
    meta = opts.metadata("verify")
    out = _out_dir(opts)

    path = _require_file(pairs_path, "pairs")
    pairs = load_pairs_jsonl(path.read_text(encoding="utf-8"))
    if not pairs:
        raise ValidationError(f"no pairs in {path}")
    policy = ExclusionPolicy(rule=rule, gap=gap)
    report = matching_report(pairs, policy,
                             BootstrapConfig(n_resamples=n_resamples, seed=seed))

    included, _ = split_pairs(pairs, policy)
    edges, counts = discrepancy_histogram(included, n_bins=n_bins)

    # Rank agreement between the estimator and the judges' own scores,
    # where per-rater scores exist for every included pair.
    rho = None
    if included and all(p.judge_scores for p in included):
        est, judge = [], []
        for p in included:
            est.extend([p.est_hard[0], p.est_easy[0]])
            mean_hard = sum(s[0] for s in p.judge_scores) / len(p.judge_scores)
            mean_easy = sum(s[1] for s in p.judge_scores) / len(p.judge_scores)
            judge.extend([mean_hard, mean_easy])
        rho = spearman(est, judge)

    payload = report_to_dict(report)
    payload.update({
        "spearman_vs_judge": rho,
        "delta_histogram": {"edges": edges, "counts": counts},
        "exclusion_rule": rule,
        "metadata": meta,
    })
    _write(out / "report.json", _dump_json(payload))
    print(f"matching_accuracy={report.matching_accuracy:.6f}"
          f"±{report.matching_accuracy_sd:.6f} "
          f"avg_discrepancy={report.avg_discrepancy:.6f}"
          f"±{report.avg_discrepancy_sd:.6f} "
          f"n_included={report.n_included} n_excluded={report.n_excluded}")
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    opts = Options(args, "profile")
    logs_path = opts.get("logs")
    scores_path = opts.get("scores")
    grid_n = opts.get("grid-n", 101, int)
    h_min = opts.get("h-min", 0.02, float)
    band = opts.get("band", 0.1, float)
    opts.get("seed", 0, int)
    meta = opts.metadata("profile")
    out = _out_dir(opts)

    spath = _require_file(scores_path, "scores")
    text = spath.read_text(encoding="utf-8")
    scores = load_scores_json(text) if spath.suffix == ".json" else load_scores_csv(text)
    difficulties = {s.item_id: (s.normalized, s.normalized_sd) for s in scores}

    lpath = _require_file(logs_path, "logs")
    logs = load_eval_logs_jsonl(lpath.read_text(encoding="utf-8"), difficulties)
    graded = [l for l in logs if l.train_bin.kind == "graded"]
    random_logs = [l for l in logs if l.train_bin.kind == "random"]

    d_values = [v[0] for v in difficulties.values()]
    eval_grid = np.linspace(min(d_values), max(d_values), grid_n)
    centers = [l.train_center for l in graded]
    train_grid = np.linspace(min(centers), max(centers), grid_n) if centers \
        else eval_grid

    surface = gain_surface(graded, random_logs, eval_grid, train_grid, h_min=h_min)
    export_surface(surface, out / "surface.csv", out / "surface.json", metadata=meta)
    ridge = ridge_statistic(surface, band=band)
    summary = {
        "n_graded_runs": len(graded),
        "n_random_runs": len(random_logs),
        "n_nodes": len(surface.nodes),
        "max_node_residual": surface.max_node_residual,
        "ridge_statistic": ridge,
        "metadata": meta,
    }
    _write(out / "summary.json", _dump_json(summary))
    print(f"nodes={len(surface.nodes)} max_node_residual={surface.max_node_residual:.3e} "
          f"ridge_statistic={ridge:.6f}")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    opts = Options(args, "export")
    surface_path = opts.get("surface")
    scores_path = opts.get("scores")
    out_csv = opts.get("out-csv")
    out_json = opts.get("out-json")
    opts.get("seed", 0, int)

    if (surface_path is None) == (scores_path is None):
        raise ValidationError("provide exactly one of --surface or --scores")
    if out_csv is None and out_json is None:
        raise ValidationError("provide --out-csv and/or --out-json")

    if surface_path is not None:
        path = _require_file(surface_path, "surface")
        payload = json.loads(path.read_text(encoding="utf-8"))
        if payload.get("schema") != "gain-surface/1":
            raise ValidationError(f"{path} is not a gain-surface JSON artifact")
        if out_csv:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["train_difficulty", "eval_difficulty", "gain"])
            for i, t in enumerate(payload["train_grid"]):
                for j, e in enumerate(payload["eval_grid"]):
                    writer.writerow([repr(float(t)), repr(float(e)),
                                     repr(float(payload["grid"][i][j]))])
            _write(Path(out_csv), buf.getvalue())
        if out_json:
            _write(Path(out_json), _dump_json(payload))
        return EXIT_OK

    path = _require_file(scores_path, "scores")
    scores = load_scores_json(path.read_text(encoding="utf-8"))
    if out_csv:
        _write(Path(out_csv), scores_to_csv(scores))
    if out_json:
        _write(Path(out_json), scores_to_json(scores))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="e2h",
        description="Difficulty calibration: estimation, standardization, "
                    "verification and generalization profiling.")
    parser.add_argument("--version", action="version", version=f"e2h {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML config file; flags override it")
        p.add_argument("--output-dir", help="directory for output files (default .)")
        p.add_argument("--seed", type=int, help="seed for all randomized steps")
        p.add_argument("--log-level",
                       help="debug|info|warning|error (or env E2H_LOG)")

    def norm(p):
        p.add_argument("--norm-method", choices=["minmax_clipped", "quantile"],
                       help="normalization method (default minmax_clipped)")
        p.add_argument("--p-lo", type=float, help="lower clip percentile (default 1)")
        p.add_argument("--p-hi", type=float, help="upper clip percentile (default 99)")

    p = sub.add_parser("fit-irt", help="fit an item response model and emit scores")
    common(p)
    norm(p)
    p.add_argument("--responses", help="examinee-by-item outcome file (CSV/JSONL)")
    p.add_argument("--item-difficulties",
                   help="aggregated success-rate file (CSV/JSONL)")
    p.add_argument("--variant", choices=[v.value for v in IrtVariant],
                   help="model variant (default 1gpl)")
    p.add_argument("--estimator", choices=["map", "mcmc"],
                   help="estimator for response-matrix input (default map)")
    p.add_argument("--format", choices=["csv", "jsonl"],
                   help="input format (default: by extension)")
    p.add_argument("--max-iter", type=int, help="MAP iteration cap (default 2000)")
    p.add_argument("--grad-tol", type=float,
                   help="MAP gradient tolerance (default 1e-4)")
    p.add_argument("--n-samples", type=int, help="MCMC retained samples (default 1000)")
    p.add_argument("--n-warmup", type=int, help="MCMC warmup sweeps (default 500)")
    p.add_argument("--guess-c", type=float,
                   help="guessing rate for marginal fitting (default 0)")
    p.add_argument("--n-choices", type=int,
                   help="choice count; sets guessing rate to 1/n for marginal fits")
    p.add_argument("--ability-mean", type=float,
                   help="examinee ability mean for marginal fits (default 0)")
    p.add_argument("--ability-sd", type=float,
                   help="examinee ability sd for marginal fits (default 1)")
    p.add_argument("--quadrature-order", type=int,
                   help="Gauss-Hermite order for marginal fits (default 64)")
    p.add_argument("--tol", type=float,
                   help="marginal inversion tolerance (default 1e-9)")
    p.add_argument("--truth",
                   help="optional item_id,value CSV; prints rank agreement with it")
    p.set_defaults(handler=cmd_fit_irt)

    p = sub.add_parser("fit-glicko2",
                       help="rate problems from game records and emit scores")
    common(p)
    norm(p)
    p.add_argument("--games", help="game-record file (CSV/JSONL)")
    p.add_argument("--format", choices=["csv", "jsonl"],
                   help="input format (default: by extension)")
    p.add_argument("--tau", type=float, help="volatility constraint (default 0.5)")
    p.add_argument("--default-r", type=float, help="starting rating (default 1500)")
    p.add_argument("--default-rd", type=float,
                   help="starting rating deviation (default 350)")
    p.add_argument("--default-sigma", type=float,
                   help="starting volatility (default 0.06)")
    p.add_argument("--epsilon", type=float,
                   help="volatility solver tolerance (default 1e-6)")
    p.add_argument("--n-periods", type=int,
                   help="total rating periods (default: max period seen + 1)")
    p.add_argument("--score-convention", choices=["problem", "examinee"],
                   help="whether scores are the problem's result or the "
                        "examinee's binary outcome (default problem)")
    p.add_argument("--truth",
                   help="optional item_id,value CSV; prints rank agreement with it")
    p.set_defaults(handler=cmd_fit_glicko2)

    p = sub.add_parser("normalize", help="standardize raw difficulty estimates")
    common(p)
    norm(p)
    p.add_argument("--scores-in", help="CSV with columns item_id,raw[,raw_sd]")
    p.set_defaults(handler=cmd_normalize)

    p = sub.add_parser("verify", help="check scores against pairwise judgments")
    common(p)
    p.add_argument("--pairs", help="judged-pairs JSONL file")
    p.add_argument("--exclusion", choices=["none", "irt_sd_rule", "score_gap_rule"],
                   help="pair exclusion rule (default none)")
    p.add_argument("--gap", type=float,
                   help="judge score gap for score_gap_rule (default 2.0)")
    p.add_argument("--n-resamples", type=int,
                   help="bootstrap resamples (default 1000)")
    p.add_argument("--delta-bins", type=int,
                   help="bins for the discrepancy histogram (default 20)")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("profile", help="build the generalization-gain surface")
    common(p)
    p.add_argument("--logs", help="evaluation-run JSONL file")
    p.add_argument("--scores", help="difficulty scores file (CSV or JSON)")
    p.add_argument("--grid-n", type=int, help="grid points per axis (default 101)")
    p.add_argument("--h-min", type=float,
                   help="minimum smoothing bandwidth (default 0.02)")
    p.add_argument("--band", type=float,
                   help="diagonal band width for the ridge statistic (default 0.1)")
    p.set_defaults(handler=cmd_profile)

    p = sub.add_parser("export", help="re-emit a JSON artifact as CSV/JSON")
    common(p)
    p.add_argument("--surface", help="gain-surface JSON artifact")
    p.add_argument("--scores", help="difficulty-scores JSON artifact")
    p.add_argument("--out-csv", help="CSV destination")
    p.add_argument("--out-json", help="JSON destination")
    p.set_defaults(handler=cmd_export)

    return parser


def _setup_logging(args: argparse.Namespace) -> None:
    level_name = getattr(args, "log_level", None) or os.environ.get("E2H_LOG", "warning")
    level = getattr(logging, str(level_name).upper(), None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    _setup_logging(args)
    try:
        return args.handler(args)
    except DidNotConverge as err:
        log.error("%s", err)
        return EXIT_NO_CONVERGE
    except DegeneracyError as err:
        log.error("%s", err)
        return EXIT_DEGENERATE
    except SolvabilityError as err:
        log.error("%s", err)
        return EXIT_SOLVER
    except ValidationError as err:
        log.error("%s", err)
        return EXIT_VALIDATION
    except E2HError as err:
        log.error("%s", err)
        return EXIT_VALIDATION
    except OSError as err:
        log.error("%s", err)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
