# floodbma/io/__init__.py
"""
Tabular input and artifact output.

Inputs
------
maxima CSV      station_id, year, value        (one row per station-year)
covariates CSV  station_id, <covariate>...     (one row per station)
sites CSV       site_id, <covariate>...        (raw covariates of new sites)

Errors name the file and the 1-based line ("maxima.csv:14: ...").

Outputs are written through `floodbma.files` (atomic, schema-versioned).
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from floodbma.errors import DataError
from floodbma.files import read_json, read_npz, write_csv, write_json, write_npz
from floodbma.hier import BLOCKS, Dataset
from floodbma.hier.models import standardize_raw
from floodbma.logger import get_logger
from floodbma.mcmc.models import PosteriorSamples
from floodbma.prediction.models import ReturnLevelSummary
from floodbma.validation.models import PitRecord, ScoreReport, StabilitySummary

logger = get_logger(__name__)

MAXIMA_COLUMNS = ("station_id", "year", "value")
SAMPLES_STEM = "samples"


# ──────────────────────────────────────────────────────────────
# reading
# ──────────────────────────────────────────────────────────────
def _row_lines(path: Path) -> tuple[list[int], list[int]]:
    """0-based indices of comment lines, and the 1-based file line of every data row."""
    comments: list[int] = []
    rows: list[int] = []
    header_seen = False
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if line.startswith("#"):
                comments.append(i)
            elif not line.strip():
                continue
            elif header_seen:
                rows.append(i + 1)
            else:
                header_seen = True
    return comments, rows


def _line(lines: Sequence[int], row: int) -> int | None:
    return lines[row] if 0 <= row < len(lines) else None


def _read_table(path: Path, id_column: str) -> tuple[pd.DataFrame, list[int]]:
    """Frame with a string id column, plus the file line of each row."""
    path = Path(path)
    if not path.exists():
        raise DataError("file not found", path=path)
    try:
        comments, lines = _row_lines(path)
        df = pd.read_csv(path, skiprows=comments, dtype={id_column: str}, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse CSV: {exc}", path=path) from exc
    df.columns = [str(c).strip() for c in df.columns]
    if id_column not in df.columns:
        raise DataError(f"missing column {id_column!r} (found {list(df.columns)})", path=path)
    if df[id_column].isna().any():
        row = int(np.flatnonzero(df[id_column].isna().to_numpy())[0])
        raise DataError(f"empty {id_column}", path=path, line=_line(lines, row))
    df[id_column] = df[id_column].str.strip()
    return df, lines


def _first_lines(ids: Sequence[str], lines: Sequence[int]) -> dict[str, int | None]:
    """Id → file line of its first row."""
    out: dict[str, int | None] = {}
    for row, sid in enumerate(ids):
        out.setdefault(sid, _line(lines, row))
    return out


def _numeric(df: pd.DataFrame, columns: Sequence[str], path: Path, lines: Sequence[int]) -> pd.DataFrame:
    out = df.copy()
    for col in columns:
        converted = pd.to_numeric(df[col], errors="coerce")
        bad = converted.isna() | ~np.isfinite(converted.to_numpy(dtype=float, na_value=np.nan))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise DataError(
                f"non-numeric or missing {col} {df[col].iloc[row]!r}", path=path, line=_line(lines, row)
            )
        out[col] = converted.astype(float)
    return out


def _maxima_table(path: Path) -> tuple[pd.DataFrame, list[int]]:
    df, lines = _read_table(path, "station_id")
    missing = [c for c in MAXIMA_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"missing column(s) {missing}", path=path)
    df = _numeric(df, ["year", "value"], path, lines)
    dup = df.duplicated(subset=["station_id", "year"], keep="first").to_numpy()
    if dup.any():
        row = int(np.flatnonzero(dup)[0])
        sid, year = df["station_id"].iloc[row], int(df["year"].iloc[row])
        raise DataError(f"duplicate (station={sid}, year={year})", path=path, line=_line(lines, row))
    return df, lines


def _group_maxima(df: pd.DataFrame) -> dict[str, list[float]]:
    df = df.sort_values(["station_id", "year"], kind="stable")
    return {sid: g["value"].tolist() for sid, g in df.groupby("station_id", sort=False)}


def read_maxima(path: Path) -> dict[str, list[float]]:
    """Station id → maxima ordered by year."""
    return _group_maxima(_maxima_table(path)[0])


def _covariate_table(path: Path, id_column: str) -> tuple[pd.DataFrame, dict[str, int | None]]:
    df, lines = _read_table(path, id_column)
    columns = [c for c in df.columns if c != id_column]
    if not columns:
        raise DataError("no covariate columns", path=path)
    df = _numeric(df, columns, path, lines)
    dup = df.duplicated(subset=[id_column], keep="first").to_numpy()
    if dup.any():
        row = int(np.flatnonzero(dup)[0])
        raise DataError(
            f"duplicate {id_column} {df[id_column].iloc[row]!r}", path=path, line=_line(lines, row)
        )
    return df.set_index(id_column), _first_lines(df[id_column].tolist(), lines)


def read_covariates(path: Path, id_column: str = "station_id") -> pd.DataFrame:
    """Covariate table indexed by id, numeric columns in file order."""
    return _covariate_table(path, id_column)[0]


def _where(ids: Sequence[str], first_line: dict[str, int | None]) -> str:
    return ", ".join(f"{sid} (line {first_line[sid]})" for sid in ids)


def load_dataset(
    maxima_path: Path,
    covariates_path: Path,
    covariates: Sequence[str] | None = None,
    log_covariates: Sequence[str] = (),
    min_years: int = 20,
) -> Dataset:
    """
    Join maxima and covariates on station_id and standardize the covariates
    over the retained stations.  Stations with fewer than *min_years* maxima
    are dropped with a warning; their ids are kept in
    ``metadata["rejected"]``.
    """
    maxima_df, maxima_lines = _maxima_table(maxima_path)
    maxima = _group_maxima(maxima_df)
    maxima_first = _first_lines(maxima_df["station_id"].tolist(), maxima_lines)
    table, covariate_first = _covariate_table(covariates_path, "station_id")
    if covariates is not None:
        unknown = [c for c in covariates if c not in table.columns]
        if unknown:
            raise DataError(f"unknown covariate column(s) {unknown}", path=covariates_path)
        table = table[list(covariates)]

    no_covariates = sorted(set(maxima) - set(table.index), key=lambda sid: maxima_first[sid] or 0)
    if no_covariates:
        raise DataError(
            f"stations without covariates in {Path(covariates_path).name}: {_where(no_covariates, maxima_first)}",
            path=maxima_path,
            line=maxima_first[no_covariates[0]],
        )
    no_maxima = [sid for sid in table.index if sid not in maxima]
    if no_maxima:
        logger.warning(
            "%s: covariate rows without maxima ignored: %s",
            Path(covariates_path).name,
            _where(no_maxima, covariate_first),
        )

    ids = [sid for sid in table.index if sid in maxima]
    rejected = [sid for sid in ids if len(maxima[sid]) < min_years]
    if rejected:
        logger.warning("stations with fewer than %d years dropped: %s", min_years, rejected)
    ids = [sid for sid in ids if sid not in set(rejected)]
    if len(ids) < 2:
        raise DataError(f"need at least 2 stations with >= {min_years} years (got {len(ids)})")

    data = Dataset.from_raw(
        ids,
        [maxima[sid] for sid in ids],
        table.loc[ids].to_numpy(dtype=float),
        list(table.columns),
        log_covariates=log_covariates,
        metadata={"rejected": rejected, "maxima_path": str(maxima_path), "covariates_path": str(covariates_path)},
    )
    logger.info("loaded %d stations, %d observations, %d covariates", data.n_stations, data.n_observations, data.n_covariates - 1)
    return data


def load_site_covariates(path: Path, data: Dataset | PosteriorSamples) -> list[tuple[str, np.ndarray]]:
    """
    Raw covariates of new sites mapped onto the training scale; columns must
    include every training covariate (extra columns are ignored).
    """
    table = read_covariates(path, id_column="site_id")
    names = data.covariate_names[1:]
    missing = [c for c in names if c not in table.columns]
    if missing:
        raise DataError(f"missing covariate column(s) {missing}", path=path)
    raw = table[names].to_numpy(dtype=float)
    z = standardize_raw(raw, names, data.standardization, data.log_covariates)
    return list(zip(table.index.tolist(), z))


# ──────────────────────────────────────────────────────────────
# datasets
# ──────────────────────────────────────────────────────────────
def raw_covariates(data: Dataset) -> pd.DataFrame:
    """Invert the standardization (and log transforms) back to file values."""
    z = data.X[:, 1:]
    cols = {}
    for j, (name, (mean, sd)) in enumerate(zip(data.covariate_names[1:], data.standardization[1:])):
        v = z[:, j] * sd + mean
        cols[name] = np.exp(v) if name in data.log_covariates else v
    return pd.DataFrame({"station_id": data.station_ids, **cols})


def write_dataset(directory: Path, data: Dataset, first_year: int = 1900) -> tuple[Path, Path]:
    directory = Path(directory)
    rows = [
        {"station_id": st.id, "year": first_year + t, "value": v}
        for st in data
        for t, v in enumerate(st.annual_maxima)
    ]
    maxima = write_csv(directory / "maxima.csv", pd.DataFrame(rows, columns=list(MAXIMA_COLUMNS)))
    covs = write_csv(directory / "covariates.csv", raw_covariates(data))
    return maxima, covs


# ──────────────────────────────────────────────────────────────
# posterior samples
# ──────────────────────────────────────────────────────────────
def save_samples(directory: Path, samples: PosteriorSamples, stem: str = SAMPLES_STEM) -> Path:
    directory = Path(directory)
    write_npz(directory / f"{stem}.npz", samples.arrays())
    return write_json(directory / f"{stem}.json", samples.header())


def load_samples(path: Path) -> PosteriorSamples:
    """*path* is a run directory or the ``samples.json`` inside it."""
    path = Path(path)
    json_path = path / f"{SAMPLES_STEM}.json" if path.is_dir() else path.with_suffix(".json")
    npz_path = json_path.with_suffix(".npz")
    if not json_path.exists() or not npz_path.exists():
        raise DataError("posterior samples not found", path=json_path)
    header = read_json(json_path)
    return PosteriorSamples.from_parts(header, read_npz(npz_path))


# ──────────────────────────────────────────────────────────────
# summaries
# ──────────────────────────────────────────────────────────────
def inclusion_table(samples: PosteriorSamples) -> pd.DataFrame:
    """Inclusion probability (%) per covariate (rows) and block (columns)."""
    probs = samples.inclusion_probabilities()
    return pd.DataFrame(
        {"covariate": samples.covariate_names, **{b: 100.0 * probs[b] for b in BLOCKS}}
    )


def theta_table(samples: PosteriorSamples, level: float = 0.9) -> pd.DataFrame:
    summary = samples.theta_summary(level)
    incl = samples.inclusion_probabilities()
    rows = []
    for b in BLOCKS:
        for i, name in enumerate(samples.covariate_names):
            rows.append(
                {
                    "block": b,
                    "covariate": name,
                    "mean": summary[b]["mean"][i],
                    "sd": summary[b]["sd"][i],
                    "lo": summary[b]["lo"][i],
                    "hi": summary[b]["hi"][i],
                    "inclusion": incl[b][i],
                }
            )
    return pd.DataFrame(rows)


def station_table(samples: PosteriorSamples) -> pd.DataFrame:
    """Posterior medians of site parameters, fixed-effect parts and random effects."""
    rows = []
    for s, sid in enumerate(samples.station_ids):
        mu, kappa, xi = samples.site_parameters(s)
        x = samples.covariates[s]
        row = {"station_id": sid, "mu": np.median(mu), "kappa": np.median(kappa), "xi": np.median(xi)}
        for b in BLOCKS:
            row[f"fixed_{b}"] = float(np.median(samples.fixed_effects(b, x)))
            row[f"tau_{b}"] = float(np.median(samples.tau[b][:, s]))
        rows.append(row)
    return pd.DataFrame(rows)


def return_level_frame(summaries: Sequence[ReturnLevelSummary], **extra) -> pd.DataFrame:
    frame = pd.DataFrame([s.row() for s in summaries])
    for k, v in extra.items():
        frame.insert(0, k, v)
    return frame


def pit_frame(pits: Sequence[PitRecord]) -> pd.DataFrame:
    return pd.DataFrame([p.model_dump() for p in pits], columns=list(PitRecord.model_fields))


def score_frame(scores: Sequence[ScoreReport]) -> pd.DataFrame:
    return pd.DataFrame([s.model_dump() for s in scores], columns=list(ScoreReport.model_fields))


def stability_frame(summaries: Sequence[StabilitySummary]) -> pd.DataFrame:
    return pd.DataFrame(
        [s.model_dump(exclude={"fold_means"}) for s in summaries],
        columns=[c for c in StabilitySummary.model_fields if c != "fold_means"],
    )


__all__ = [
    "read_maxima",
    "read_covariates",
    "load_dataset",
    "load_site_covariates",
    "raw_covariates",
    "write_dataset",
    "save_samples",
    "load_samples",
    "inclusion_table",
    "theta_table",
    "station_table",
    "return_level_frame",
    "pit_frame",
    "score_frame",
    "stability_frame",
]
