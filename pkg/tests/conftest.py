import numpy as np
import pytest

from pcdl.estimation import compute_alpha
from pcdl.geometry import NetworkScenario, ScenarioConfig, build_scenario


@pytest.fixture(scope="session")
def paper_config():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def paper_drop(paper_config):
    """One default-parameter drop with its estimation statistics."""
    scenario = build_scenario(paper_config, 0)
    return scenario, compute_alpha(scenario)


@pytest.fixture(scope="session")
def small_config():
    """Cheap scenario for Monte Carlo heavy tests."""
    return ScenarioConfig(K=4, n_drops=3)


@pytest.fixture(scope="session")
def small_drop(small_config):
    scenario = build_scenario(small_config, 0)
    return scenario, compute_alpha(scenario)


def toy_scenario(beta, rho_d=1.0, rho_p=1.0):
    """Scenario with a hand-picked gain tensor (positions unused)."""
    beta = np.asarray(beta, dtype=float)
    L, K, _ = beta.shape
    return NetworkScenario(bs_positions=np.zeros((L, 2)),
                           user_positions=np.zeros((L, K, 2)),
                           beta=beta, rho_d=rho_d, rho_p=rho_p)
