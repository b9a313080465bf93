import logging
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invariants import failed, high_tree_grid, llt_checks, metric_checks
from llt_builder import (
    ConstructionDomainError,
    build_balanced,
    build_high_tree,
    build_llt,
    build_low_tree,
    build_path,
    build_template,
    ceil_root,
    compose,
    embed,
    load_cap,
    plan_construction,
    size_high,
    size_low,
    trim_to_size,
)
from metric_core import LinearOrder, hamiltonian_path, line_metric, minimum_spanning_tree, random_euclidean
from tree_model import RootedTree, load


def _load(tree):
    return load(tree, range(tree.n)).xi


class TestSizes:
    def test_high_sizes(self):
        assert size_high(1, 5) == 6
        assert size_high(2, 2) == 6
        assert size_high(2, 3) == 10
        assert size_high(3, 3) == 14

    def test_high_domain(self):
        with pytest.raises(ConstructionDomainError):
            size_high(3, 1)
        with pytest.raises(ConstructionDomainError):
            size_high(0, 4)

    def test_low_sizes(self):
        assert size_low(2, 3) == 15
        assert size_low(3, 2) == 13
        assert size_low(5, 0) == 1
        with pytest.raises(ConstructionDomainError):
            size_low(1, 3)

    def test_ceil_root(self):
        assert ceil_root(64, 4) == 3
        assert ceil_root(16, 4) == 2
        assert ceil_root(17, 4) == 3
        assert ceil_root(1, 3) == 1
        assert ceil_root(10 ** 12, 2) == 10 ** 6
        assert ceil_root(10 ** 12 + 1, 2) == 10 ** 6 + 1


class TestHighTree:
    def test_figure_tree(self):
        tree = build_high_tree(3, 3)
        assert tree.n == 14
        assert tree.root == 0
        assert tree.depth == 3
        assert _load(tree) == 3
        assert tree.max_arity <= 2

    def test_path(self):
        tree = build_path(5)
        assert tree.parent == (-1, 0, 1, 2, 3)
        assert _load(tree) == 1

    def test_composition_shifts_coordinates(self):
        tree = compose(build_path(4), 1, build_path(3), "right")
        # 元の v'_3 は座標6（添字5）に移る
        assert tree.parent == (-1, 0, 1, 2, 3, 1, 5)

    def test_left_composition(self):
        tree = compose(RootedTree.singleton(), 0, RootedTree.singleton(), "left")
        assert tree.root == 1
        assert tree.children[1] == (0,)

    def test_compose_bad_vertex(self):
        with pytest.raises(ConstructionDomainError):
            compose(build_path(3), 3, build_path(2))

    def test_recursive_definition(self):
        xi, h = 3, 3
        tree = build_path(h + 1)
        for i in range(h, 0, -1):
            tree = compose(tree, i - 1, build_high_tree(min(xi - 1, h - i + 1), h - i), "right")
        assert tree.parent == build_high_tree(xi, h).parent

    def test_grid(self):
        cases = 0
        for xi, h in high_tree_grid(limit=600, path_limit=60):
            tree = build_high_tree(xi, h)
            assert tree.n == size_high(xi, h)
            assert tree.depth == h
            assert tree.max_arity <= 2
            if tree.n > 1:
                assert _load(tree) == xi
            assert size_high(xi, h) >= math.comb(h, xi)
            cases += 1
        assert cases > 60

    @pytest.mark.slow
    def test_grid_full(self):
        for xi, h in high_tree_grid():
            tree = build_high_tree(xi, h)
            assert tree.depth == h
            assert tree.n == 1 or _load(tree) == xi


class TestBalancedAndLow:
    def test_balanced_twelve(self):
        tree = build_balanced(12)
        assert tree.root == 5
        assert tree.depth == 3

    def test_balanced_range(self):
        for n in range(1, 300):
            tree = build_balanced(n)
            bound = n.bit_length() - 1
            assert tree.depth <= bound
            assert _load(tree) <= bound
            assert tree.max_arity <= 2

    @pytest.mark.slow
    def test_balanced_large(self):
        for n in range(300, 4097):
            tree = build_balanced(n)
            assert tree.depth <= n.bit_length() - 1
            assert _load(tree) <= n.bit_length() - 1

    def test_low_trees(self):
        for d in range(2, 7):
            for h in range(0, 5):
                tree = build_low_tree(d, h)
                assert tree.n == size_low(d, h)
                assert tree.depth == h
                assert tree.max_arity <= d
                assert _load(tree) <= d * h

    def test_low_root_position(self):
        tree = build_low_tree(2, 3)
        assert tree.root == 7


class TestTrim:
    def test_identity(self):
        tree = build_low_tree(2, 3)
        assert trim_to_size(tree, 15) is tree

    def test_trim_does_not_grow(self):
        tree = build_low_tree(2, 3)
        for n in range(1, 15):
            small = trim_to_size(tree, n)
            assert small.n == n
            assert small.depth <= tree.depth
            assert small.max_arity <= tree.max_arity
            assert _load(small) <= _load(tree)

    def test_trim_to_one(self):
        assert trim_to_size(build_high_tree(3, 3), 1).n == 1

    def test_target_too_large(self):
        with pytest.raises(ConstructionDomainError):
            trim_to_size(build_path(3), 4)


class TestPlan:
    def test_regimes(self):
        assert plan_construction(12, 3).regime == "low"
        assert plan_construction(12, 3).d == 2
        assert plan_construction(12, 3).template_root == 7
        assert plan_construction(12, 4).regime == "mid"
        assert plan_construction(12, 7).regime == "mid"
        assert plan_construction(12, 8).regime == "high"
        assert plan_construction(12, 11).regime == "path"
        assert plan_construction(1, 0).regime == "path"

    def test_high_parameter(self):
        plan = plan_construction(8, 6)
        assert plan.regime == "high"
        assert plan.xi == 2
        assert plan.template_size == 28

    def test_low_root_after_trimming(self):
        plan = plan_construction(8, 2)
        assert (plan.regime, plan.d, plan.template_size) == ("low", 3, 13)
        assert plan.template_root == 6
        for n in range(2, 70):
            for h in range(1, n):
                plan = plan_construction(n, h)
                assert 0 <= plan.template_root < n
                assert plan.template_root == build_template(plan).root

    def test_domain(self):
        with pytest.raises(ConstructionDomainError):
            plan_construction(5, 0)
        with pytest.raises(ConstructionDomainError):
            plan_construction(5, -1)

    def test_templates_fit_depth(self):
        for n in range(2, 70):
            for h in range(1, n):
                template = build_template(plan_construction(n, h))
                assert template.n == n
                assert template.depth <= h
                assert _load(template) <= load_cap(n, h)

    def test_load_cap(self):
        assert load_cap(64, 4) == 12
        assert load_cap(12, 5) == 3
        assert load_cap(12, 11) == 1


class TestBuildLLT:
    def test_path_on_line(self):
        metric = line_metric(9)
        result = build_llt(metric, 8)
        assert result.plan.regime == "path"
        assert result.tree.total_weight == 8

    def test_balanced_on_line(self):
        result = build_llt(line_metric(12), 3)
        assert result.tree.depth <= 3

    def test_random_points(self, rng):
        metric = random_euclidean(64, 2, rng)
        result = build_llt(metric, 4)
        xi = load(result.tree, result.order).xi
        assert result.tree.depth <= 4
        assert xi <= 12
        assert result.tree.total_weight <= 2 * xi * metric.mst_weight() + 1e-9

    def test_root_argument_roots_the_tree(self, rng):
        metric = random_euclidean(20, 2, rng)
        result = build_llt(metric, 5, root=7)
        assert result.plan.regime == "mid"
        assert result.tree.root == 7
        assert result.order.order[result.plan.template_root] == 7

    def test_root_keeps_depth_on_line(self):
        metric = line_metric(74)
        result = build_llt(metric, 4, root=6)
        assert result.tree.root == 6
        assert result.tree.depth <= 4
        assert failed(llt_checks(result, metric)) == []

    def test_root_out_of_range(self):
        with pytest.raises(ValueError):
            build_llt(line_metric(5), 2, root=5)

    @settings(deadline=None, max_examples=40)
    @given(st.integers(min_value=2, max_value=60), st.integers(min_value=0, max_value=2 ** 32 - 1), st.data())
    def test_any_root_keeps_bounds(self, n, seed, data):
        metric = random_euclidean(n, 2, seed)
        h = data.draw(st.integers(min_value=1, max_value=n - 1))
        root = data.draw(st.integers(min_value=0, max_value=n - 1))
        result = build_llt(metric, h, root=root)
        assert result.tree.root == root
        assert failed(llt_checks(result, metric) + metric_checks(metric, result.order)) == []

    def test_zero_depth(self):
        with pytest.raises(ConstructionDomainError):
            build_llt(line_metric(5), 0)

    def test_large_depth_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            result = build_llt(line_metric(5), 9)
        assert result.plan.regime == "path"
        assert any(record.levelno == logging.WARNING for record in caplog.records)

    def test_embed_size_mismatch(self):
        metric = line_metric(4)
        order = LinearOrder.from_sequence(range(4), metric)
        with pytest.raises(ConstructionDomainError):
            embed(build_path(5), order, metric)

    @settings(deadline=None, max_examples=40)
    @given(st.integers(min_value=2, max_value=60), st.integers(min_value=0, max_value=2 ** 32 - 1), st.data())
    def test_checks_hold(self, n, seed, data):
        metric = random_euclidean(n, 2, seed)
        h = data.draw(st.integers(min_value=1, max_value=n - 1))
        order = hamiltonian_path(metric, minimum_spanning_tree(metric))
        result = build_llt(metric, h, order=order)
        assert failed(llt_checks(result, metric)) == []
