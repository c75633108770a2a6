import pytest

import cavcoord as cc


@pytest.fixture(scope="session")
def default_doc():
    return cc.load_scenario_file(cc.default_scenario_path())


@pytest.fixture(scope="session")
def topo(default_doc):
    return cc.load_topology(default_doc)


@pytest.fixture(scope="session")
def limits_iv():
    """The corridor scenario's limits: u in [-3, 3] m/s^2, v in [1, 25] m/s."""
    return cc.Limits(u_min=-3.0, u_max=3.0, v_min=1.0, v_max=25.0)


@pytest.fixture
def default_config(default_doc):
    return cc.SimConfig.from_document(default_doc)
