# floodbma/tests/synthetic.py
"""Small datasets shared by the test modules."""

import numpy as np

from floodbma.hier import Dataset


def make_dataset(n_stations=8, n_years=30, seed=7, n_covariates=2) -> Dataset:
    """Gumbel maxima whose location grows with the first covariate."""
    gen = np.random.default_rng(seed)
    raw = gen.normal(size=(n_stations, n_covariates)) * 10 + 50
    z = (raw[:, 0] - raw[:, 0].mean()) / raw[:, 0].std(ddof=1)
    maxima = [(100 + 15 * z[s] + 20 * gen.gumbel(size=n_years)).tolist() for s in range(n_stations)]
    ids = [f"st{s:02d}" for s in range(n_stations)]
    return Dataset.from_raw(ids, maxima, raw, [f"c{j + 1}" for j in range(n_covariates)])


def write_inputs(directory, data: Dataset):
    """maxima.csv / covariates.csv for *data* in *directory*."""
    from floodbma.io import write_dataset

    return write_dataset(directory, data)


def fixed_samples(mu=100.0, kappa=0.05, xi=0.1, n_draws=200, n_stations=3, alpha=1e12):
    """Intercept-only posterior whose every draw is the same GEV."""
    import numpy as np

    from floodbma.hier import BLOCKS
    from floodbma.mcmc.models import ChainConfig, PosteriorSamples

    values = {"mu": mu, "kappa": np.log(kappa), "xi": xi}
    return PosteriorSamples(
        theta={b: np.full((n_draws, 1), values[b]) for b in BLOCKS},
        inclusion={b: np.ones((n_draws, 1), dtype=bool) for b in BLOCKS},
        alpha={b: np.full(n_draws, alpha) for b in BLOCKS},
        tau={b: np.zeros((n_draws, n_stations)) for b in BLOCKS},
        log_posterior=np.zeros(n_draws),
        config=ChainConfig(n_iterations=n_draws + 1, n_burnin=1, seed=1),
        acceptance_rates={},
        covariates=np.ones((n_stations, 1)),
        station_ids=[f"s{i}" for i in range(n_stations)],
        covariate_names=["constant"],
        standardization=[(0.0, 1.0)],
    )
