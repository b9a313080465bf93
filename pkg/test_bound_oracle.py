import math

import networkx as nx
import pytest

from bound_oracle import (
    OracleDomainError,
    ResourceCapError,
    analytic_bounds,
    binary_shapes,
    binomial_facts,
    exhaustive_min,
    exhaustive_min_cost,
    exhaustive_min_exact_depth,
    f_of_h,
    greedy_hamming_cost,
    hard_graph,
    hard_graph_scan,
    min_hamming_cost,
    mirror,
    partial_row_bound,
    pascal_ratio,
    pascal_sum,
    right_adjust,
    rooted_theta_trees,
    shape_depth,
    shape_from_tree,
    shape_size,
    subset_hamming_cost,
    theta_profile,
    tradeoff_table,
    tree_cost,
    vocabulary,
)
from llt_builder import build_balanced, build_path
from tree_model import covering, theta_star

LEAF = (None, None)
PERFECT_7 = ((LEAF, LEAF), (LEAF, LEAF))


class TestExhaustive:
    def test_profile_counts(self):
        assert theta_profile(1).trees == 1
        assert theta_profile(5).trees == 125

    def test_known_values(self):
        assert exhaustive_min(5, 1, "weight") == 6
        assert exhaustive_min(7, 1, "covering") == 2
        for n in range(2, 8):
            assert exhaustive_min(n, n - 1, "weight") == n - 1
            assert exhaustive_min(n, n - 1, "covering") == 0

    def test_matches_rooted_enumeration(self):
        n = 5
        weight, cover = {}, {}
        for tree in rooted_theta_trees(n):
            h = tree.depth
            weight[h] = min(weight.get(h, math.inf), tree.total_weight)
            cover[h] = min(cover.get(h, math.inf), covering(tree).chi)
        profile = theta_profile(n)
        assert profile.weight_exact == weight
        assert profile.covering_exact == cover

    def test_rooted_enumeration_size(self):
        assert sum(1 for _ in rooted_theta_trees(4)) == 4 ** 3

    def test_monotone_in_depth(self):
        for n in range(2, 8):
            for stat in ("weight", "covering"):
                seq = [exhaustive_min_exact_depth(n, h, stat) for h in range(1, n)]
                assert seq == sorted(seq, reverse=True)
                assert seq == [exhaustive_min(n, h, stat) for h in range(1, n)]

    @pytest.mark.slow
    def test_eight_vertices(self):
        profile = theta_profile(8)
        assert profile.trees == 8 ** 6
        assert profile.degree_lemma_holds
        seq = [exhaustive_min_exact_depth(8, h, "covering") for h in range(1, 8)]
        assert seq == sorted(seq, reverse=True)

    def test_degree_lemma(self):
        for n in range(1, 8):
            assert theta_profile(n).degree_lemma_holds

    def test_binary_at_least_half_cost(self):
        for n in range(2, 8):
            for h in range(1, n):
                b, r = exhaustive_min(n, h, "binary"), exhaustive_min_cost(n, h)
                if b is not None and r is not None:
                    assert 2 * b >= r

    def test_caps(self):
        with pytest.raises(ResourceCapError):
            exhaustive_min(9, 3)
        with pytest.raises(ResourceCapError):
            exhaustive_min(6, 3, cap=5)

    def test_depth_domain(self):
        with pytest.raises(OracleDomainError):
            exhaustive_min(5, 0)
        with pytest.raises(OracleDomainError):
            exhaustive_min(5, 5)


class TestBinaryCost:
    def test_costs(self):
        assert tree_cost(((LEAF, None), None)) == (0, 0 + 2)
        assert tree_cost((LEAF, LEAF)) == (1, 2)
        assert tree_cost(PERFECT_7) == (5, 8)

    def test_from_rooted_tree(self):
        shape = shape_from_tree(build_balanced(7))
        assert shape == PERFECT_7
        assert tree_cost(build_path(4)) == (0, 3)
        with pytest.raises(OracleDomainError):
            shape_from_tree(theta_star(4, 1))

    def test_shape_helpers(self):
        assert shape_size(PERFECT_7) == 7
        assert shape_depth(PERFECT_7) == 2
        assert shape_depth(None) == -1

    def test_right_adjust(self):
        shape = (None, (LEAF, None))
        adjusted = right_adjust(shape)
        assert adjusted == ((LEAF, None), None)
        assert tree_cost(adjusted) == tree_cost(shape)
        assert right_adjust(adjusted) == adjusted

    def test_shape_counts_are_motzkin(self):
        motzkin = [1, 1, 2, 4, 9, 21, 51, 127, 323, 835]
        assert [len(binary_shapes(n)) for n in range(1, 11)] == motzkin

    def test_depth_limited_shapes(self):
        assert binary_shapes(3, 1) == ((LEAF, LEAF),)
        assert binary_shapes(4, 1) == ()
        assert exhaustive_min_cost(4, 1) is None

    def test_exhaustive_cost(self):
        assert exhaustive_min_cost(3, 2) == 0
        assert exhaustive_min_cost(3, 1) == 1

    def test_vocabulary_cost(self):
        assert vocabulary((LEAF, LEAF)).words == frozenset({"", "0", "1"})
        assert vocabulary((LEAF, LEAF)).hcost == 1
        for n in range(1, 10):
            for shape in binary_shapes(n):
                cost = tree_cost(shape)[0]
                assert vocabulary(right_adjust(shape)).hcost == cost
                assert vocabulary(right_adjust(mirror(shape))).hcost == cost

    def test_cap(self):
        with pytest.raises(ResourceCapError):
            binary_shapes(13)


class TestHamming:
    def test_known_values(self):
        assert min_hamming_cost(3, 1).value == 1
        assert min_hamming_cost(4, 2).value == 1
        hc = min_hamming_cost(7, 2)
        assert (hc.value, hc.r, hc.remainder) == (5, 1, 1)

    def test_closed_form_matches_greedy(self):
        for h in range(0, 7):
            for n in range(1, min(20, 2 ** (h + 1) - 1) + 1):
                assert min_hamming_cost(n, h).value == greedy_hamming_cost(n, h)

    def test_greedy_matches_subsets(self):
        for h in range(0, 4):
            for n in range(1, min(8, 2 ** (h + 1) - 1) + 1):
                assert greedy_hamming_cost(n, h) == subset_hamming_cost(n, h)

    def test_lower_bounds_cost(self):
        for n in range(2, 10):
            for h in range(1, n):
                if n <= 2 ** (h + 1) - 1:
                    assert min_hamming_cost(n, h).value <= exhaustive_min_cost(n, h)

    def test_monotone_in_depth(self):
        for n in range(2, 30):
            values = [min_hamming_cost(n, h).value for h in range(1, 30) if n <= 2 ** (h + 1) - 1]
            assert values == sorted(values, reverse=True)

    def test_capacity(self):
        with pytest.raises(OracleDomainError):
            min_hamming_cost(8, 2)


class TestAnalyticBounds:
    def test_f_of_h(self):
        assert f_of_h(20, 10) == 2
        assert f_of_h(3, 4) == 1
        with pytest.raises(OracleDomainError):
            f_of_h(20, 8)

    def test_f_non_increasing(self):
        for n in range(2, 60):
            lg = n.bit_length() - 1
            values = [f_of_h(n, h) for h in range(2 * lg + 1, n)]
            assert values == sorted(values, reverse=True)

    def test_work_covering_at_32(self):
        reports = {r.bound_kind: r for r in analytic_bounds(32, 1)}
        work = reports["work-covering"]
        assert work.analytic_bound == pytest.approx(1.6)
        assert work.exhaustive_value == 15
        assert work.holds
        assert reports["degree"].holds

    def test_majort_is_vacuous_at_small_n(self):
        for n in range(2, 13):
            for h in range(1, n):
                for r in analytic_bounds(n, h, with_exhaustive=False):
                    if r.bound_kind.startswith("majort"):
                        assert r.vacuous

    def test_non_vacuous_bounds_hold(self):
        for n in range(2, 8):
            for h in range(1, n):
                for r in analytic_bounds(n, h):
                    if not r.vacuous and r.exhaustive_value is not None:
                        assert r.holds

    def test_domain(self):
        with pytest.raises(OracleDomainError):
            analytic_bounds(1, 1)
        with pytest.raises(OracleDomainError):
            analytic_bounds(5, 5)


class TestBinomialFacts:
    def test_examples(self):
        assert pascal_sum(4, 2).lhs == 10
        assert pascal_sum(4, 2).holds
        assert pascal_ratio(8, 3).lhs == 56
        assert pascal_ratio(8, 3).holds
        check = partial_row_bound(8, 2)
        assert (check.lhs, check.rhs) == (37, 42)
        assert check.holds

    def test_range(self):
        with pytest.raises(OracleDomainError):
            partial_row_bound(8, 3)
        with pytest.raises(OracleDomainError):
            pascal_ratio(4, 0)

    def test_all_hold(self):
        assert all(c.holds for c in binomial_facts(40))


class TestHardGraph:
    def test_graph(self):
        graph = hard_graph(6, 100)
        assert graph.number_of_nodes() == 6
        assert graph.number_of_edges() == 4 + 5
        mst = nx.minimum_spanning_tree(graph)
        assert mst.size(weight="weight") == 4 + 100

    def test_fan_spanning_trees(self):
        assert hard_graph_scan(5, 100).spanning_trees == 21
        assert hard_graph_scan(4, 100).spanning_trees == 8

    def test_product_grows(self):
        reports = [hard_graph_scan(n, 100) for n in range(4, 9)]
        products = [r.min_product for r in reports]
        assert all(a < b for a, b in zip(products, products[1:]))
        for n, report in zip(range(4, 9), reports):
            assert report.min_product == pytest.approx(n - 2)
            assert report.min_product_star_edges == 1
            assert report.min_diameter_by_star_edges[1] >= n - 2

    def test_small_n(self):
        with pytest.raises(OracleDomainError):
            hard_graph(2, 100)


class TestTradeoff:
    def test_rows(self):
        rows = tradeoff_table(7)
        assert [r.h for r in rows] == list(range(1, 7))
        assert rows[-1].regime == "path"
        for r in rows:
            assert r.construction_weight >= r.exhaustive_weight
