# floodbma/cli.py
from __future__ import annotations

import functools
import re
from importlib import metadata
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np
import pandas as pd
import typer
from pydantic import ValidationError

from floodbma import env
from floodbma.errors import ConfigError, DataError, FloodBmaError
from floodbma.files import write_csv, write_json, write_yaml
from floodbma.logger import get_logger, reset_log_path
from floodbma.preferences.models import RunConfig
from floodbma.ui import print_error, print_info, print_success, print_warning

app = typer.Typer(help="floodbma: Bayesian hierarchical GEV regional flood frequency analysis")

logger = get_logger(__name__)


def get_version() -> str:
    try:
        return metadata.version("floodbma")
    except metadata.PackageNotFoundError:
        pass
    pyproject = Path(__file__).resolve().parent.parent / "pyproject.toml"
    try:
        match = re.search(r'^version\s*=\s*["\']([^"\']+)["\']', pyproject.read_text(encoding="utf-8"), re.MULTILINE)
        if match:
            return match.group(1)
    except OSError:
        pass
    return "unknown"


def _version_callback(value: bool) -> None:
    if value:
        typer.echo(get_version())
        raise typer.Exit()


@app.callback()
def main_callback(
    version: bool = typer.Option(
        False,
        "--version",
        "-V",
        is_eager=True,
        help="Show floodbma version and exit",
        show_default=False,
        callback=_version_callback,
    ),
):
    pass


# ---------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------
def handle_errors(fn: Callable) -> Callable:
    """Map library exceptions onto exit codes (2 config, 3 data, 4 numeric)."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except typer.Exit:
            raise
        except FloodBmaError as exc:
            logger.exception("%s failed", fn.__name__)
            print_error(str(exc))
            raise typer.Exit(code=exc.exit_code) from exc
        except ValidationError as exc:
            logger.exception("%s: invalid configuration", fn.__name__)
            print_error(f"invalid configuration:\n{exc}")
            raise typer.Exit(code=ConfigError.exit_code) from exc

    return wrapper


def _floats(text: Optional[str], flag: str) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers (got {text!r})") from None


def _names(text: Optional[str]) -> Optional[list[str]]:
    if text is None:
        return None
    return [t.strip() for t in text.split(",") if t.strip()]


def _load_config(config: Optional[Path], overrides: dict) -> RunConfig:
    from floodbma.preferences import load_run_config

    return load_run_config(config, overrides)


def _start_run(command: str, cfg: RunConfig, run_dir: bool) -> Path:
    """Create the artifact directory, switch the log file, echo config.yml."""
    target = env.make_run_dir(cfg.output.directory, command, cfg.seed, exact=run_dir)
    reset_log_path()
    write_yaml(target / "config.yml", cfg.echo())
    logger.info("%s: writing artifacts to %s", command, target)
    return target


def _load_data(cfg: RunConfig):
    from floodbma.io import load_dataset

    maxima, covariates = cfg.require_inputs("maxima", "covariates")
    return load_dataset(
        maxima,
        covariates,
        covariates=cfg.data.covariate_columns,
        log_covariates=cfg.data.log_covariates,
        min_years=cfg.data.min_years,
    )


def _overrides(
    seed: Optional[int] = None,
    iterations: Optional[int] = None,
    burnin: Optional[int] = None,
    output: Optional[Path] = None,
    maxima: Optional[Path] = None,
    covariates: Optional[Path] = None,
    return_periods: Optional[str] = None,
    no_progress: bool = False,
) -> dict:
    periods = _floats(return_periods, "--return-periods")
    return {
        "seed": seed,
        "chain": {"n_iterations": iterations, "n_burnin": burnin},
        "data": {"maxima": maxima, "covariates": covariates},
        "prediction": {"return_periods": periods},
        "validation": {"return_periods": periods},
        "output": {"directory": output, "progress": False if no_progress else None},
    }


ConfigOpt = typer.Option(None, "--config", "-c", help="YAML file layered over the preferences")
SeedOpt = typer.Option(None, "--seed", help="Master seed")
IterOpt = typer.Option(None, "--iterations", help="MCMC iterations")
BurnOpt = typer.Option(None, "--burnin", help="Burn-in iterations")
OutOpt = typer.Option(None, "--output", "-o", help="Output directory")
RunDirOpt = typer.Option(False, "--run-dir", help="Write into --output itself instead of a stamped child")
MaximaOpt = typer.Option(None, "--maxima", help="Annual maxima CSV (station_id,year,value)")
CovOpt = typer.Option(None, "--covariates", help="Station covariates CSV")
PeriodsOpt = typer.Option(None, "--return-periods", help="Comma-separated return periods, e.g. 10,50,100")
QuietOpt = typer.Option(False, "--no-progress", help="Disable the progress bar")


# ---------------------------------------------------------------------
# init / config
# ---------------------------------------------------------------------
@app.command()
@handle_errors
def init():
    """Create ~/.floodbma and .floodbma/ in the current directory."""
    from floodbma.init import initialize_floodbma

    initialize_floodbma()


@app.command("config")
@handle_errors
def config_command(
    config: Optional[Path] = ConfigOpt,
    full: bool = typer.Option(False, "--full", help="Show every setting"),
):
    """Show the active, fully layered configuration."""
    from floodbma.preferences import Preferences
    from floodbma.preferences.admin import show_config

    prefs = Preferences(config)
    show_config(prefs.run_config(), prefs.sources, full)


# ---------------------------------------------------------------------
# select
# ---------------------------------------------------------------------
@app.command()
@handle_errors
def select(
    config: Optional[Path] = ConfigOpt,
    maxima: Optional[Path] = MaximaOpt,
    covariates: Optional[Path] = CovOpt,
    output: Optional[Path] = OutOpt,
    run_dir: bool = RunDirOpt,
):
    """Stepwise AIC pre-selection of covariates on the index flood."""
    from floodbma.hier.selection import stepwise_aic_selection
    from floodbma.ui.tables import print_frame

    cfg = _load_config(config, _overrides(output=output, maxima=maxima, covariates=covariates))
    data = _load_data(cfg)
    target = _start_run("select", cfg, run_dir)
    selected = stepwise_aic_selection(data, log_response=cfg.selection.log_response)
    frame = pd.DataFrame({"covariate": data.covariate_names, "selected": selected})
    write_csv(target / "selection.csv", frame)
    print_frame(frame, "Stepwise AIC selection")
    print_success(f"selection written to {target}")


# ---------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------
def _fit_summary(samples, target: Path) -> dict:
    from floodbma.mcmc.diagnostics import geweke_z, mc_standard_error

    trace = samples.log_posterior
    summary = {
        "n_draws": len(samples),
        "n_stations": samples.n_stations,
        "covariates": samples.covariate_names,
        "acceptance_rates": samples.acceptance_rates,
    }
    if len(trace) >= 20:
        summary["geweke_z"] = geweke_z(trace)
        summary["log_posterior_mc_se"] = mc_standard_error(trace)
    write_json(target / "summary.json", summary)
    return summary


@app.command()
@handle_errors
def fit(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    iterations: Optional[int] = IterOpt,
    burnin: Optional[int] = BurnOpt,
    maxima: Optional[Path] = MaximaOpt,
    covariates: Optional[Path] = CovOpt,
    output: Optional[Path] = OutOpt,
    run_dir: bool = RunDirOpt,
    preselect: bool = typer.Option(False, "--select", help="Fit only the stepwise-AIC covariates"),
    resume: Optional[Path] = typer.Option(None, "--resume", help="Resume from a checkpoint.json"),
    no_progress: bool = QuietOpt,
):
    """Run the hierarchical sampler and write posterior summaries."""
    from floodbma.hier.selection import stepwise_aic_selection
    from floodbma.io import inclusion_table, save_samples, station_table, theta_table
    from floodbma.mcmc import Sampler
    from floodbma.ui.progress import chain_progress
    from floodbma.ui.tables import print_frame

    cfg = _load_config(
        config,
        _overrides(seed, iterations, burnin, output, maxima, covariates, no_progress=no_progress),
    )
    data = _load_data(cfg)
    if preselect:
        keep = np.flatnonzero(stepwise_aic_selection(data, log_response=cfg.selection.log_response))
        data = data.select_covariates([int(i) for i in keep if i > 0])
    target = _start_run("fit", cfg, run_dir)

    if resume is not None:
        sampler = Sampler.from_checkpoint(resume, data)
    else:
        sampler = Sampler(data, cfg.priors, cfg.chain)
    with chain_progress(sampler.config.n_iterations, "Sampling", cfg.output.progress) as advance:
        advance(sampler.iteration)
        samples = sampler.run(callback=advance, checkpoint_path=target / "checkpoint")

    save_samples(target, samples)
    write_csv(target / "inclusion.csv", inclusion_table(samples))
    write_csv(target / "theta.csv", theta_table(samples))
    write_csv(target / "stations.csv", station_table(samples))
    summary = _fit_summary(samples, target)

    print_frame(inclusion_table(samples), "Inclusion probability (%)", digits=3)
    if abs(summary.get("geweke_z", 0.0)) > 3:
        print_warning(f"Geweke z = {summary['geweke_z']:.2f}: the chain may not have converged")
    print_success(f"{len(samples)} draws written to {target}")


# ---------------------------------------------------------------------
# predict
# ---------------------------------------------------------------------
@app.command()
@handle_errors
def predict(
    samples_dir: Path = typer.Argument(..., help="Directory of a `fit` run"),
    station: Optional[List[str]] = typer.Option(None, "--station", "-s", help="Gauged station id (repeatable)"),
    sites: Optional[Path] = typer.Option(None, "--sites", help="CSV of new sites: site_id + raw covariates"),
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    return_periods: Optional[str] = PeriodsOpt,
    curve: bool = typer.Option(False, "--curve", help="Also emit a dense return-level curve"),
    with_local: bool = typer.Option(False, "--with-local", help="Add the local model to curves of gauged stations"),
    maxima: Optional[Path] = MaximaOpt,
    output: Optional[Path] = OutOpt,
    run_dir: bool = RunDirOpt,
):
    """Return levels at gauged stations and/or ungauged sites."""
    from floodbma.io import load_samples, load_site_covariates, read_maxima, return_level_frame
    from floodbma.local import fit_local
    from floodbma.hier import Station
    from floodbma.prediction import (
        new_site_components,
        return_level_curve,
        site_components,
    )
    from floodbma.rng import stream
    from floodbma.ui.tables import print_frame

    cfg = _load_config(config, _overrides(seed=seed, output=output, maxima=maxima, return_periods=return_periods))
    samples = load_samples(samples_dir)
    if not station and sites is None and cfg.data.sites is None:
        raise ConfigError("nothing to predict: pass --station and/or --sites")
    target = _start_run("predict", cfg, run_dir)
    pc = cfg.prediction

    jobs = []
    for sid in station or []:
        idx = samples.station_index(sid)
        jobs.append((sid, "gauged", site_components(samples, idx)))
    site_file = sites or cfg.data.sites
    if site_file is not None:
        for k, (sid, x) in enumerate(load_site_covariates(site_file, samples)):
            jobs.append((sid, "ungauged", new_site_components(samples, x, stream(cfg.seed, "prediction", 10_000 + k))))

    frames, curves = [], []
    for k, (sid, kind, comps) in enumerate(jobs):
        rows = return_level_curve(comps, pc.return_periods, pc.credible, pc.sims_per_component, stream(cfg.seed, "prediction", k), sid)
        frames.append(return_level_frame(rows, kind=kind))
        if curve:
            rows = return_level_curve(comps, pc.curve_periods, pc.credible, pc.sims_per_component, stream(cfg.seed, "prediction", k), sid)
            curves.append(return_level_frame(rows, model="regional", kind=kind))

    if curve and with_local and station:
        (maxima_path,) = cfg.require_inputs("maxima")
        series = read_maxima(maxima_path)
        for k, sid in enumerate(station):
            if sid not in series:
                raise DataError(f"station {sid!r} not in {maxima_path}")
            st = Station(id=sid, annual_maxima=series[sid], covariates=[1.0])
            local_fit = fit_local(st, cfg.chain, cfg.local, stream(cfg.seed, "local", k))
            rows = return_level_curve(site_components(local_fit, 0), pc.curve_periods, pc.credible, pc.sims_per_component, stream(cfg.seed, "prediction", 20_000 + k), sid)
            curves.append(return_level_frame(rows, model="local", kind="gauged"))

    table = pd.concat(frames, ignore_index=True)
    write_csv(target / "return_levels.csv", table)
    if curves:
        write_csv(target / "curve.csv", pd.concat(curves, ignore_index=True))
    print_frame(table[["kind", "station_id", "return_period", "posterior_median", "credible_lo", "credible_hi", "predictive_quantile"]], "Return levels")
    print_success(f"predictions written to {target}")


# ---------------------------------------------------------------------
# local
# ---------------------------------------------------------------------
@app.command()
@handle_errors
def local(
    station: List[str] = typer.Option(..., "--station", "-s", help="Station id (repeatable)"),
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    iterations: Optional[int] = IterOpt,
    burnin: Optional[int] = BurnOpt,
    maxima: Optional[Path] = MaximaOpt,
    return_periods: Optional[str] = PeriodsOpt,
    output: Optional[Path] = OutOpt,
    run_dir: bool = RunDirOpt,
):
    """Fit the record-length-rule local model to single stations."""
    from floodbma.hier import Station
    from floodbma.io import read_maxima, return_level_frame, save_samples
    from floodbma.local import fit_local, model_family
    from floodbma.prediction import return_level_curve, site_components
    from floodbma.rng import stream
    from floodbma.ui.tables import print_frame

    cfg = _load_config(
        config,
        _overrides(seed, iterations, burnin, output, maxima, return_periods=return_periods),
    )
    (maxima_path,) = cfg.require_inputs("maxima")
    series = read_maxima(maxima_path)
    target = _start_run("local", cfg, run_dir)
    pc = cfg.prediction
    frames = []
    for k, sid in enumerate(station):
        if sid not in series:
            raise DataError(f"station {sid!r} not in {maxima_path}")
        st = Station(id=sid, annual_maxima=series[sid], covariates=[1.0])
        samples = fit_local(st, cfg.chain, cfg.local, stream(cfg.seed, "local", k))
        save_samples(target, samples, stem=f"local-{sid}")
        rows = return_level_curve(site_components(samples, 0), pc.return_periods, pc.credible, pc.sims_per_component, stream(cfg.seed, "prediction", k), sid)
        frames.append(return_level_frame(rows, family=model_family(st.n_years, cfg.local)))
    table = pd.concat(frames, ignore_index=True)
    write_csv(target / "local_return_levels.csv", table)
    print_frame(table[["station_id", "family", "return_period", "posterior_median", "credible_lo", "credible_hi"]], "Local return levels")
    print_success(f"local fits written to {target}")


# ---------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------
@app.command()
@handle_errors
def simulate(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    stations: Optional[int] = typer.Option(None, "--stations", help="Number of stations"),
    years: Optional[int] = typer.Option(None, "--years", help="Years per station"),
    n_covariates: Optional[int] = typer.Option(None, "--n-covariates", help="Number of covariates"),
    nonzero: Optional[int] = typer.Option(None, "--nonzero", help="Covariates with a true effect"),
    output: Optional[Path] = OutOpt,
    run_dir: bool = RunDirOpt,
):
    """Write a synthetic dataset with known generating parameters."""
    from floodbma.io import write_dataset
    from floodbma.validation.simulate import benchmark_truth, simulate_dataset

    cfg = _load_config(
        config,
        {
            **_overrides(seed=seed, output=output),
            "simulation": {
                "n_stations": stations,
                "n_years": years,
                "n_covariates": n_covariates,
                "n_nonzero": nonzero,
            },
        },
    )
    sim = cfg.simulation
    target = _start_run("simulate", cfg, run_dir)
    truth = benchmark_truth(sim.n_covariates, sim.n_nonzero)
    data = simulate_dataset(truth, sim.n_stations, sim.n_years, cfg.seed)
    write_dataset(target, data)
    write_json(target / "truth.json", {"seed": cfg.seed, "truth": data.metadata["truth"], "site_params": data.metadata["site_params"]})
    print_success(f"{data.n_stations} stations × {sim.n_years} years written to {target}")


# ---------------------------------------------------------------------
# cv
# ---------------------------------------------------------------------
@app.command()
@handle_errors
def cv(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    iterations: Optional[int] = IterOpt,
    burnin: Optional[int] = BurnOpt,
    folds: Optional[str] = typer.Option(None, "--folds", help="Comma-separated fold station ids"),
    n_folds: Optional[int] = typer.Option(None, "--n-folds", help="Size of the default stratified fold list"),
    baseline: Optional[bool] = typer.Option(None, "--baseline/--no-baseline", help="Score an intercept-only regional model"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Parallel fold workers"),
    maxima: Optional[Path] = MaximaOpt,
    covariates: Optional[Path] = CovOpt,
    return_periods: Optional[str] = PeriodsOpt,
    output: Optional[Path] = OutOpt,
    run_dir: bool = RunDirOpt,
):
    """Leave-one-station-out cross-validation with scores and stability."""
    from floodbma.io import pit_frame, return_level_frame, save_samples, score_frame, stability_frame
    from floodbma.ui.tables import print_frame
    from floodbma.validation import pit_histogram, pp_plot_data
    from floodbma.validation.cv import loo_cross_validate, stability_table

    overrides = _overrides(seed, iterations, burnin, output, maxima, covariates, return_periods)
    overrides["validation"].update(
        {"folds": _names(folds), "n_folds": n_folds, "baseline": baseline, "workers": workers}
    )
    cfg = _load_config(config, overrides)
    data = _load_data(cfg)
    target = _start_run("cv", cfg, run_dir)
    vs = cfg.validation

    result = loo_cross_validate(data, vs.folds, cfg.priors, cfg.chain, vs)
    save_samples(target, result.full_samples)
    for fold in result.folds:
        fold_dir = target / f"fold-{fold.station_id}"
        save_samples(fold_dir, fold.samples)
        rows = [return_level_frame(s, model=m) for m, s in sorted(fold.predictions.items())]
        write_csv(fold_dir / "return_levels.csv", pd.concat(rows, ignore_index=True))

    write_csv(target / "pits.csv", pit_frame(result.pits))
    write_csv(target / "scores.csv", score_frame(result.scores))
    calibration = {}
    for model in result.models:
        pits = result.pits_for(model)
        pp = pp_plot_data(pits)
        write_csv(target / f"pp_{model}.csv", pd.DataFrame({"empirical": pp.empirical, "theoretical": pp.theoretical}))
        calibration[model] = {
            "max_gap": pp.max_gap,
            "ks_statistic": pp.ks_statistic,
            "ks_pvalue": pp.ks_pvalue,
            "histogram": pit_histogram(pits).model_dump(),
        }
    write_json(target / "calibration.json", calibration)
    if len(result.folds) >= 2:
        write_csv(target / "stability.csv", stability_frame(stability_table(result.fold_samples())))
    else:
        print_info("stability statistics need at least 2 folds; skipped")

    print_frame(score_frame(result.scores)[["model_name", "return_period", "mean_score", "ci_lo", "ci_hi"]], "Mean quantile scores")
    print_success(f"{len(result.folds)} fold(s) written to {target}")


# ---------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------
@app.command()
@handle_errors
def validate(
    samples_dir: Optional[Path] = typer.Argument(None, help="Directory of a `fit` run (fit afresh when omitted)"),
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    iterations: Optional[int] = IterOpt,
    burnin: Optional[int] = BurnOpt,
    maxima: Optional[Path] = MaximaOpt,
    covariates: Optional[Path] = CovOpt,
    return_periods: Optional[str] = PeriodsOpt,
    output: Optional[Path] = OutOpt,
    run_dir: bool = RunDirOpt,
):
    """In-sample calibration: PITs, PP data, KS statistic and quantile scores."""
    from floodbma.io import load_samples, pit_frame, save_samples, score_frame
    from floodbma.mcmc import run_chain
    from floodbma.prediction import predictive_quantile, site_components
    from floodbma.rng import stream
    from floodbma.ui.tables import print_frame
    from floodbma.validation import mean_quantile_score, pit_histogram, pit_records, pp_plot_data

    cfg = _load_config(config, _overrides(seed, iterations, burnin, output, maxima, covariates, return_periods))
    data = _load_data(cfg)
    target = _start_run("validate", cfg, run_dir)
    if samples_dir is not None:
        samples = load_samples(samples_dir)
        if samples.station_ids != data.station_ids:
            raise DataError("samples were fitted on a different set of stations")
    else:
        samples = run_chain(data, cfg.priors, cfg.chain)
        save_samples(target, samples)

    vs = cfg.validation
    pits = []
    for s, st in enumerate(data):
        pits.extend(pit_records(site_components(samples, s), st.id, st.annual_maxima, model="in_sample"))
    scores = []
    for k, t in enumerate(vs.return_periods):
        q, y = [], []
        for s, st in enumerate(data):
            qs = predictive_quantile(samples, s, 1 - 1 / t, vs.sims_per_component, stream(cfg.seed, "prediction", s))
            q.extend([qs] * st.n_years)
            y.extend(st.annual_maxima)
        scores.append(mean_quantile_score(q, y, t, vs.n_bootstrap, "in_sample", rng=stream(cfg.seed, "bootstrap", 0, k)))

    pp = pp_plot_data(pits)
    write_csv(target / "pits.csv", pit_frame(pits))
    write_csv(target / "pp.csv", pd.DataFrame({"empirical": pp.empirical, "theoretical": pp.theoretical}))
    write_csv(target / "scores.csv", score_frame(scores))
    write_json(
        target / "calibration.json",
        {
            "n_pits": len(pits),
            "max_gap": pp.max_gap,
            "ks_statistic": pp.ks_statistic,
            "ks_pvalue": pp.ks_pvalue,
            "histogram": pit_histogram(pits).model_dump(),
        },
    )
    print_frame(score_frame(scores)[["return_period", "mean_score", "ci_lo", "ci_hi"]], "In-sample quantile scores")
    print_info(f"PIT KS statistic {pp.ks_statistic:.4f} (p = {pp.ks_pvalue:.3g}, n = {len(pits)})")
    print_success(f"validation written to {target}")
