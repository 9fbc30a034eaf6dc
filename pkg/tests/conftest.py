import json

import pytest
from hypothesis import settings

from fairload import fixture_path, load_fixture

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def fig1():
    return load_fixture("fig1.json")


@pytest.fixture
def fig2():
    return load_fixture("fig2.json")


@pytest.fixture
def fig3():
    return load_fixture("fig3.json")


@pytest.fixture
def fig_json():
    def read(name):
        with open(fixture_path(name), encoding="utf-8") as fh:
            return json.load(fh)
    return read
