import numpy as np
import pytest

from smellscape.geo import aggregate, build_index
from smellscape.lexicon import Lexicons
from smellscape.synth import planted_city


@pytest.fixture(scope="session")
def lex():
    return Lexicons.default()


@pytest.fixture(scope="session")
def city():
    return planted_city(n_segments=500, n_records=50_000, seed=0)


@pytest.fixture(scope="session")
def city_index(city):
    return build_index(city.dataset.segments)


@pytest.fixture(scope="session")
def city_tallies(city, city_index):
    return aggregate(city.dataset.records, city_index, city.lexicons)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
