import numpy as np
import pytest
from hypothesis import strategies as st

from metric_core import line_metric, random_euclidean
from tree_model import random_tree, theta_star


@pytest.fixture
def rng():
    """テストごとに同じ乱数列を返す"""
    return np.random.default_rng(20240501)


@pytest.fixture
def figcover_tree():
    """座標4を根とする ϑ_7 のスター（深さ1、被覆2）"""
    return theta_star(7, 4)


@pytest.fixture
def line7():
    return line_metric(7)


@st.composite
def euclidean_instances(draw, min_n=2, max_n=30):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    dim = draw(st.integers(min_value=1, max_value=3))
    seed = draw(st.integers(min_value=0, max_value=2 ** 32 - 1))
    return random_euclidean(n, dim, seed)


@st.composite
def theta_trees(draw, min_n=1, max_n=40):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    seed = draw(st.integers(min_value=0, max_value=2 ** 32 - 1))
    return random_tree(n, seed)
