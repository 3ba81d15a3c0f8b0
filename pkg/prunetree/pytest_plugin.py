import pytest
import prunetree.env


@pytest.fixture(autouse=True)
def set_prunetree_env():
    prunetree.env.reset()
    prunetree.env.get_env() # initialise prunetree settings
    yield
    prunetree.env.reset()
