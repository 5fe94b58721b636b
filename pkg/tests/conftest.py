# tests/conftest.py
import os

import pytest

from floodbma.hier import Dataset
from floodbma.mcmc.models import ChainConfig
from tests.synthetic import make_dataset


# ───────────────────────────────────────────────────────────────
#  Session-level project root (one per pytest run)
# ───────────────────────────────────────────────────────────────
@pytest.fixture(scope="session", autouse=True)
def set_floodbma_project_root_early(tmp_path_factory):
    """
    Point floodbma at a throwaway project root and user home for *all*
    tests, so nothing ever lands in ~/.floodbma or the checkout.
    """
    from floodbma.env import set_project_root

    test_root = tmp_path_factory.mktemp("floodbma_session_root")
    os.environ["FLOODBMA_HOME"] = str(test_root / "home")
    set_project_root(test_root)
    return test_root


# ───────────────────────────────────────────────────────────────
#  Per-test sandbox: isolated project root + user home
# ───────────────────────────────────────────────────────────────
@pytest.fixture
def isolated_project(monkeypatch, tmp_path):
    """Each test gets its own clean .floodbma workspace and ~/.floodbma."""
    import floodbma.env

    old_root = floodbma.env.get_project_root()
    floodbma.env.set_project_root(tmp_path)
    monkeypatch.setenv("FLOODBMA_HOME", str(tmp_path / "home"))
    monkeypatch.chdir(tmp_path)
    for key in list(os.environ):
        if key.startswith("FLOODBMA_") and "__" in key:
            monkeypatch.delenv(key)

    yield tmp_path

    floodbma.env.set_project_root(old_root)


# ───────────────────────────────────────────────────────────────
#  Synthetic data
# ───────────────────────────────────────────────────────────────
@pytest.fixture
def small_dataset() -> Dataset:
    return make_dataset()


@pytest.fixture
def short_chain() -> ChainConfig:
    return ChainConfig(n_iterations=60, n_burnin=20, seed=11, log_every=10)
