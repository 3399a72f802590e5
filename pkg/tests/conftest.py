import pytest

from spvsim.geometry import AxonGrowthParams, build_bundle, build_grid_array


@pytest.fixture(scope="session")
def default_bundle():
    return build_bundle(AxonGrowthParams())


@pytest.fixture(scope="session")
def small_bundle():
    # cheap bundle for tests that only need plausible geometry
    return build_bundle(AxonGrowthParams(n_axons=64, step_um=100.0))


@pytest.fixture(scope="session")
def argus_array():
    return build_grid_array(6, 10, 575.0)
