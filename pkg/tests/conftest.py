from __future__ import annotations

import numpy as np
import pytest

from randers_lab.killing import EuclideanKilling, GroupKilling, hopf_field
from randers_lab.randers import NavigationData
from randers_lab.selftest import fixture_navs
from randers_lab.spaces import CompactGroup, Euclidean, Product, Sphere


@pytest.fixture(scope="session")
def navs():
    return fixture_navs()


@pytest.fixture
def e2():
    return Euclidean(2)


@pytest.fixture
def s3():
    return Sphere(3, 1.0)


@pytest.fixture
def su2():
    return CompactGroup("SU2", 1.0)


@pytest.fixture
def e2_nav(e2):
    """The hand-checked fixture: flat plane, wind (1/2, 0)."""
    return NavigationData(e2, EuclideanKilling(e2, np.array([0.5, 0.0])))


@pytest.fixture
def hopf_nav(s3):
    return NavigationData(s3, hopf_field(s3, 0.3))


@pytest.fixture
def su2_nav(su2):
    return NavigationData(su2, GroupKilling(su2, np.array([0.0, 0.3, 0.0, 0.0]), np.zeros(4)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
