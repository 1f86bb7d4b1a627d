"""Shared fixtures: benchmark input p-boxes loaded from the bundled configs."""

import json
from importlib import resources

import pytest

from pboxpce import pbox_from_dict


def load_bundled_config(name):
    path = resources.files("pboxpce.configs").joinpath(name)
    with path.open() as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def rosenbrock_case1_pboxes():
    spec = load_bundled_config("rosenbrock_case1.json")
    return [pbox_from_dict(s) for s in spec["inputs"]]


@pytest.fixture(scope="session")
def rosenbrock_case2_pboxes():
    spec = load_bundled_config("rosenbrock_case2.json")
    return [pbox_from_dict(s) for s in spec["inputs"]]


@pytest.fixture(scope="session")
def oscillator_pboxes():
    spec = load_bundled_config("oscillator_two_level.json")
    return [pbox_from_dict(s) for s in spec["inputs"]]


@pytest.fixture(scope="session")
def truss_pboxes():
    spec = load_bundled_config("truss_two_level.json")
    return [pbox_from_dict(s) for s in spec["inputs"]]
