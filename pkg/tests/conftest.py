import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from boxdyn import Params, build_graph, parse_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def load_config(name):
    return parse_config((CONFIG_DIR / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def switching_cfg():
    return load_config("switching_1d.toml")


@pytest.fixture(scope="session")
def drift_cfg():
    return load_config("constant_drift_1d.toml")


@pytest.fixture(scope="session")
def quadratic_cfg():
    return load_config("quadratic_sweep.toml")


@pytest.fixture(scope="session")
def circle_cfg():
    return load_config("circle_2d.toml")


@pytest.fixture(scope="session")
def switching_graph(switching_cfg):
    cfg = switching_cfg
    return build_graph(cfg.grid(), cfg.inclusion(), Params(0.0), cfg.resolved_tau(),
                      cfg.substeps, cfg.split)


@pytest.fixture(scope="session")
def drift_graph(drift_cfg):
    cfg = drift_cfg
    return build_graph(cfg.grid(), cfg.inclusion(), Params(0.0), cfg.resolved_tau(),
                      cfg.substeps, cfg.split)


@pytest.fixture(scope="session")
def circle_graph_small(circle_cfg):
    """Coarser, faster build of the planar family for property suites."""
    from boxdyn import Grid
    cfg = circle_cfg
    grid = Grid(cfg.grid().domain, (64, 64))
    return build_graph(grid, cfg.inclusion(), Params(0.0), 0.25, 20, 2)
