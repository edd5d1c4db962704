import pytest

from costpath.data_io import SimulationConfig, load_cleveland, simulate_dataset
from costpath.model_space import fit_all_models


@pytest.fixture(scope="session")
def cleveland():
    data, costs, preds = load_cleveland()
    return data, costs, preds


@pytest.fixture(scope="session")
def cleveland_fits(cleveland):
    return fit_all_models(cleveland[0])


@pytest.fixture(scope="session")
def sim450():
    data, costs = simulate_dataset(SimulationConfig(n=450, seed=2024))
    return data, costs, fit_all_models(data)


@pytest.fixture(scope="session")
def sim_small():
    """Five-predictor simulated problem: cheap to enumerate (32 models)."""
    data, costs = simulate_dataset(SimulationConfig(n=120, seed=11))
    keep = [3, 4, 5, 6, 8]
    import numpy as np

    from costpath.laplace import DesignData
    from costpath.prior import CostSchedule

    X = np.column_stack([np.ones(data.n)] + [data.X_full[:, j + 1] for j in keep])
    small = DesignData(data.y, X, [np.array([k + 1]) for k in range(len(keep))], [f"X{j + 1}" for j in keep])
    small_costs = CostSchedule(tuple(costs.costs[j] for j in keep), tuple(small.names))
    return small, small_costs, fit_all_models(small)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
