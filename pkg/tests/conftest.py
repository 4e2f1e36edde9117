import pytest

from astedit.specgrammar import builtin_demo_spec


@pytest.fixture(scope="session")
def spec():
    return builtin_demo_spec()
