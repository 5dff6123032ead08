import random

import pytest

from spine3.triangulation import FIXTURES, fixture, from_spec, random_spec


def random_corpus(count=50, max_tets=6, seed=2024):
    rng = random.Random(seed)
    return [from_spec(random_spec(rng.randint(1, max_tets), rng)) for _ in range(count)]


@pytest.fixture(scope="session")
def fixtures():
    return {name: fixture(name) for name in FIXTURES}


@pytest.fixture(scope="session")
def corpus():
    return random_corpus()


@pytest.fixture(scope="session")
def small_corpus():
    return random_corpus(count=20, max_tets=4, seed=99)
