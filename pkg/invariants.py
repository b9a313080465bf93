"""
実行可能な不等式チェック

各コマンドのレポートと selftest が共通で使う。どのチェックも BoundCheck を返す。
"""
import itertools
import logging
import math
from typing import Iterable, List, Optional

import numpy as np

from bound_oracle import (
    analytic_bounds,
    binary_shapes,
    binomial_facts,
    exhaustive_min,
    exhaustive_min_cost,
    exhaustive_min_exact_depth,
    greedy_hamming_cost,
    hard_graph_scan,
    min_hamming_cost,
    right_adjust,
    rooted_theta_trees,
    theta_profile,
    tree_cost,
    vocabulary,
)
from config import CROSSCHECK_CAP, DEFAULT_SEED, TOLERANCE
from llt_builder import (
    LLTResult,
    build_balanced,
    build_high_tree,
    build_llt,
    build_low_tree,
    ceil_root,
    load_cap,
    size_high,
    size_low,
)
from metric_core import (
    LinearOrder,
    MetricSpace,
    hamiltonian_path,
    line_metric,
    minimum_spanning_tree,
    random_euclidean,
    spanning_tree_weight_bruteforce,
)
from schemas import BoundCheck
from sllt_builder import SLLTResult, build_sllt, root_distance_ratios
from tree_model import RootedTree, covering, hop_diameter, load, random_tree, theta_distance
from tree_normalize import bin_extension, deepen, four_extension

# ロギングの設定
logger = logging.getLogger(__name__)

_RELATIONS = {
    "<=": lambda a, b, tol: a <= b + tol,
    "<": lambda a, b, tol: a < b + tol if tol else a < b,
    ">=": lambda a, b, tol: a + tol >= b,
    ">": lambda a, b, tol: a + tol > b if tol else a > b,
    "==": lambda a, b, tol: abs(a - b) <= tol,
}


def check(name: str, lhs: float, rhs: float, relation: str = "<=", tolerance: float = 0.0) -> BoundCheck:
    """lhs (relation) rhs を評価する。浮動小数点の比較には tolerance を渡す"""
    holds = bool(_RELATIONS[relation](lhs, rhs, tolerance))
    if not holds:
        logger.error(f"不等式が成り立ちません: {name}: {lhs} {relation} {rhs}")
    return BoundCheck(name=name, lhs=float(lhs), rhs=float(rhs), relation=relation, holds=holds)


def failed(checks: Iterable[BoundCheck]) -> List[BoundCheck]:
    return [c for c in checks if not c.holds]


# ----------------------------------------------------------------------
# コマンドごとのチェック
# ----------------------------------------------------------------------
def metric_checks(metric: MetricSpace, order: LinearOrder, mst: Optional[RootedTree] = None) -> List[BoundCheck]:
    mst = minimum_spanning_tree(metric) if mst is None else mst
    checks = [check("hamiltonian-shortcut: ω(L) ≤ 2·ω(MST)", order.total_weight, 2 * mst.total_weight,
                    tolerance=TOLERANCE)]
    if metric.n <= 7:
        checks.append(check("mst-bruteforce: ω(MST) = min ω(T)", mst.total_weight,
                            spanning_tree_weight_bruteforce(metric), "==", TOLERANCE))
    return checks


def tree_checks(tree: RootedTree) -> List[BoundCheck]:
    """全ての根付き木について depth ≤ Λ ≤ 2·depth、ϑ-木なら被覆の恒等式と次数の下界"""
    diameter = hop_diameter(tree)
    checks = [
        check("hop-diameter: depth ≤ Λ", tree.depth, diameter),
        check("hop-diameter: Λ ≤ 2·depth", diameter, 2 * tree.depth),
    ]
    return checks


def theta_tree_checks(tree: RootedTree) -> List[BoundCheck]:
    prof = covering(tree)
    weight = sum(theta_distance(p, c) for p, c, _ in tree.edges())
    return [
        check("covering-identity: Σω(e) = Σχ(v) + n - 1", weight, prof.total + tree.n - 1, "=="),
        check("degree-covering: (deg - 2)/2 ≤ χ(T)", (tree.max_degree - 2) / 2, prof.chi),
    ]


def llt_checks(result: LLTResult, metric: MetricSpace) -> List[BoundCheck]:
    """build_llt の出力に対する深さ・負荷・軽さ・子の数のチェック"""
    tree, plan = result.tree, result.plan
    xi = load(tree, result.order).xi
    lightness = tree.total_weight / metric.mst_weight() if metric.n > 1 and metric.mst_weight() > 0 else 1.0
    checks = [
        check("llt-spanning: |E(T)| = n - 1", len(tree.edges()), metric.n - 1, "=="),
        check("llt-depth: depth ≤ h", tree.depth, max(plan.h, 0)),
        check("load-lightness: Ψ ≤ 2·ξ", lightness, 2 * max(xi, 1), tolerance=TOLERANCE),
        check(f"llt-load: ξ ≤ cap({plan.regime})", xi, max(load_cap(plan.n, plan.h), 1) if metric.n > 1 else 0),
    ]
    if plan.regime == "low":
        checks.append(check("llt-arity: arity ≤ ⌈n^(1/h)⌉", tree.max_arity, ceil_root(plan.n, plan.h)))
    if plan.regime in ("mid", "high"):
        checks.append(check("llt-binary: arity ≤ 2", tree.max_arity, 2))
    return checks + tree_checks(tree)


def sllt_checks(result: SLLTResult, metric: MetricSpace, h: Optional[int] = None) -> List[BoundCheck]:
    """S(T) の3つの上限。h を渡すと深さはその値（LLT に要求した深さ）と比べる"""
    source, spt, bps = result.source, result.tree, result.breakpoints
    theta = bps.theta
    h = source.depth if h is None else h
    ratios = root_distance_ratios(spt, metric, spt.root)
    worst = max(ratios.values(), default=1.0)
    checks = [
        check("breakpoint-scan: Σ dist_T(B_i-1, B_i) ≤ 2·ω(T)", bps.scan_length, 2 * source.total_weight,
              tolerance=TOLERANCE),
        check("sllt-weight: ω(S) ≤ (1 + 2/θ)·ω(T)", spt.total_weight, (1 + 2 / theta) * source.total_weight,
              tolerance=TOLERANCE),
        check("sllt-root-distance: dist_S(rt,v) ≤ (1 + 2θ)·dist_M(rt,v)", worst, 1 + 2 * theta,
              tolerance=TOLERANCE),
    ]
    if h >= 1:
        checks.append(check("sllt-depth: depth(S) ≤ 1 + 2(h - 1)", spt.depth, 1 + 2 * (h - 1)))
    return checks


def normalize_checks(before: RootedTree, after: RootedTree, mode: str) -> List[BoundCheck]:
    """
    正規化の前後を比べる

    mode は 4ary / binary（4ary の出力に BinExtension をかけたもの）/ composite / deepen。
    """
    h, w, n = before.depth, before.total_weight, before.n
    root_kids = len(after.children[after.root])
    if mode == "4ary":
        return [
            check("4ext-arity: arity ≤ 4", after.max_arity, 4),
            check("4ext-root: root arity ≤ 2", root_kids, 2),
            check("4ext-depth: h ≤ h'", h, after.depth),
            check("4ext-depth: h' ≤ h + log n", after.depth, h + math.log2(n)),
            check("4ext-weight: ω' ≤ 3·ω", after.total_weight, 3 * w, tolerance=TOLERANCE),
        ]
    if mode in ("binary", "composite"):
        checks = [
            check("binext-arity: arity ≤ 2", after.max_arity, 2),
            check("binext-root: root arity ≤ 1", root_kids, 1),
            check(f"{mode}-depth: h ≤ h''", h, after.depth),
        ]
        if mode == "binary":
            return checks + [
                check("binext-depth: h'' ≤ 4·h'", after.depth, 4 * h),
                check("binext-weight: ω'' ≤ 2·ω'", after.total_weight, 2 * w, tolerance=TOLERANCE),
            ]
        checks.append(check("composite-depth: h'' ≤ 4·(h + log n)", after.depth, 4 * (h + math.log2(n))))
        # 8h の形は h ≥ log n のときに限る
        if h >= math.log2(n):
            checks.append(check("composite-depth: h'' ≤ 8·h", after.depth, 8 * h))
        return checks + [check("composite-weight: ω'' ≤ 6·ω", after.total_weight, 6 * w, tolerance=TOLERANCE)]
    if mode == "deepen":
        return [
            check("deepen-depth: h(S) = h + 1", after.depth, h + 1, "=="),
            check("deepen-covering: χ(S) ≤ χ(T)", covering(after).chi, covering(before).chi),
        ]
    raise ValueError(f"未知のモードです: {mode}")


def oracle_checks(n: int, h: int) -> List[BoundCheck]:
    """(n,h) で非自明な解析的下界が全列挙の値以下であること"""
    checks = []
    for report in analytic_bounds(n, h):
        if report.vacuous or report.exhaustive_value is None:
            continue
        relation = ">" if report.strict else ">="
        checks.append(check(f"{report.bound_kind}(n={n},h={h})", report.exhaustive_value,
                            report.analytic_bound, relation))
    return checks


# ----------------------------------------------------------------------
# selftest
# ----------------------------------------------------------------------
def _family(name: str, failures: int, cases: int) -> BoundCheck:
    if failures:
        logger.error(f"{name}: {cases} 件中 {failures} 件が失敗しました")
    else:
        logger.info(f"{name}: {cases} 件すべて成立")
    return BoundCheck(name=f"{name} ({cases} cases)", lhs=failures, rhs=0, relation="==", holds=failures == 0)


def _count_failed(batches: Iterable[List[BoundCheck]]) -> tuple:
    cases = 0
    bad = 0
    for batch in batches:
        cases += 1
        bad += 1 if failed(batch) else 0
    return bad, cases


def high_tree_grid(limit: int = 5000, path_limit: Optional[int] = 500):
    """N(ξ,h) ≤ limit の (ξ,h)。ξ = 1（パス）は h ≤ path_limit に限る（None なら制限なし）"""
    xi = 1
    while size_high(xi, xi - 1) <= limit:
        h = xi - 1
        while size_high(xi, h) <= limit and (xi > 1 or path_limit is None or h <= path_limit):
            yield xi, h
            h += 1
        xi += 1


def _high_tree_case(xi: int, h: int) -> List[BoundCheck]:
    tree = build_high_tree(xi, h)
    order = list(range(tree.n))
    measured = load(tree, order).xi
    return [
        check("high-depth", tree.depth, h, "=="),
        check("high-load", measured if tree.n > 1 else 1, xi, "=="),
        check("high-binary", tree.max_arity, 2),
        check("choosing", size_high(xi, h), math.comb(h, xi), ">="),
    ]


def _balanced_case(n: int) -> List[BoundCheck]:
    tree = build_balanced(n)
    bound = n.bit_length() - 1
    return [check("balanced-depth", tree.depth, bound), check("balanced-load", load(tree, range(n)).xi, bound)]


def _low_case(d: int, h: int) -> List[BoundCheck]:
    tree = build_low_tree(d, h)
    return [
        check("low-size", tree.n, sum(d ** i for i in range(h + 1)), "=="),
        check("low-depth", tree.depth, h, "=="),
        check("low-load", load(tree, range(tree.n)).xi, d * h),
    ]


def _monotone(values: List[Optional[int]]) -> bool:
    present = [v for v in values if v is not None]
    return all(a >= b for a, b in zip(present, present[1:]))


def selftest_suite(seed: int = DEFAULT_SEED, full: bool = False) -> List[BoundCheck]:
    """
    机上規模の性質テスト一式

    Args:
        seed: ランダムな入力の乱数シード
        full: True なら全列挙を n = 8、平衡木を n ≤ 4096、パス T(1,h) を N ≤ 5000 まで広げる

    Returns:
        性質ごとに集約した BoundCheck のリスト
    """
    rng = np.random.default_rng(seed)
    enum_n = 8 if full else 7
    path_limit = None if full else 500
    results: List[BoundCheck] = []

    grid_name = "T(ξ,h) depth = h, load = ξ, N ≥ C(h,ξ)"
    if path_limit is not None:
        grid_name += f", ξ = 1 up to h = {path_limit}"
    results.append(_family(grid_name, *_count_failed(
        _high_tree_case(xi, h) for xi, h in high_tree_grid(path_limit=path_limit))))
    balanced_range = range(1, 4097) if full else itertools.chain(range(1, 513), (1023, 1024, 1025, 2047, 2048, 4095, 4096))
    results.append(_family("T_n depth, load ≤ ⌊log n⌋", *_count_failed(_balanced_case(n) for n in balanced_range)))
    results.append(_family("T̃(d,h) size, depth, load ≤ d·h",
                           *_count_failed(_low_case(d, h) for d in range(2, 7) for h in range(0, 7))))

    # LLT の端から端まで
    # n = 16, 64, 256 を 25 + 20 + 5 = 50 インスタンス
    def llt_cases():
        for n, count in ((16, 25), (64, 20), (256, 5)):
            for _ in range(count):
                metric = random_euclidean(n, 2, rng)
                order = hamiltonian_path(metric, minimum_spanning_tree(metric))
                for h in range(1, n):
                    yield llt_checks(build_llt(metric, h, order=order), metric)
    results.append(_family("LLT spanning, depth ≤ h, Ψ ≤ 2ξ", *_count_failed(llt_cases())))

    def shortcut_cases():
        for _ in range(100):
            metric = random_euclidean(int(rng.integers(2, 40)), int(rng.integers(1, 4)), rng)
            mst = minimum_spanning_tree(metric)
            yield metric_checks(metric, hamiltonian_path(metric, mst), mst)
    results.append(_family("ω(L) ≤ 2·ω(MST)", *_count_failed(shortcut_cases())))

    results.append(_family("Σω = Σχ + n - 1", *_count_failed(
        theta_tree_checks(random_tree(int(rng.integers(1, 51)), rng)) for _ in range(1000))))

    def sllt_cases():
        for k in range(50):
            n = int(rng.integers(2, 201))
            metric = random_euclidean(n, 2, rng)
            h = int(rng.integers(1, n))
            rt = int(rng.integers(0, n))
            llt = build_llt(metric, h, root=rt)
            theta = (0.1, 0.5, 1.0)[k % 3]
            result = build_sllt(llt.tree, metric, rt, theta)
            yield (sllt_checks(result, metric, h)
                   + [check("sllt-root: root(T) = rt", llt.tree.root, rt, "==")])
    results.append(_family("S(T) depth, weight, root distances", *_count_failed(sllt_cases())))

    def normalize_cases():
        for _ in range(100):
            n = int(rng.integers(1, 201))
            metric = random_euclidean(n, 2, rng)
            tree = random_tree(n, rng, metric.dist)
            t4 = four_extension(tree, metric)
            t2 = bin_extension(t4, metric)
            yield (normalize_checks(tree, t4, "4ary") + normalize_checks(t4, t2, "binary")
                   + normalize_checks(tree, t2, "composite"))
    results.append(_family("4Extension / BinExtension bounds", *_count_failed(normalize_cases())))

    # 単調性と deepen
    mono_bad = 0
    for n in range(2, enum_n + 1):
        for stat in ("weight", "covering"):
            seq = [exhaustive_min_exact_depth(n, h, stat) for h in range(1, n)]
            mono_bad += 0 if _monotone(seq) else 1
    results.append(_family("χ(n,h), W(n,h) non-increasing in h", mono_bad, 2 * (enum_n - 1)))

    def deepen_cases():
        for n in range(2, 8):
            for tree in rooted_theta_trees(n):
                if tree.depth <= n - 2:
                    yield normalize_checks(tree, deepen(tree), "deepen")
    results.append(_family("deepen: depth + 1, χ non-increasing", *_count_failed(deepen_cases())))

    # 下界の道具立て
    shapes = [s for n in range(1, 13) for s in binary_shapes(n)]
    vocab_bad = sum(1 for s in shapes if vocabulary(right_adjust(s)).hcost != tree_cost(s)[0])
    results.append(_family("HCost(S(adjust(T))) = Cost'(T)", vocab_bad, len(shapes)))

    hamming_pairs = [(n, h) for h in range(0, 7) for n in range(1, 21) if n <= 2 ** (h + 1) - 1]
    results.append(_family("H(n,h) closed form = greedy", sum(
        1 for n, h in hamming_pairs if min_hamming_cost(n, h).value != greedy_hamming_cost(n, h)), len(hamming_pairs)))

    mono_pairs = [(n, h) for n in range(2, CROSSCHECK_CAP + 1) for h in range(1, n) if n <= 2 ** (h + 1) - 1]
    results.append(_family("H(n,h) ≤ R(n,h)", sum(
        1 for n, h in mono_pairs if min_hamming_cost(n, h).value > exhaustive_min_cost(n, h)), len(mono_pairs)))

    bin_pairs = [(n, h) for n in range(2, enum_n + 1) for h in range(1, n)]
    bin_bad = 0
    for n, h in bin_pairs:
        b, r = exhaustive_min(n, h, "binary"), exhaustive_min_cost(n, h)
        if b is not None and r is not None and 2 * b < r:
            bin_bad += 1
    results.append(_family("Bin(n,h) ≥ R(n,h)/2", bin_bad, len(bin_pairs)))

    # 解析的下界
    results.extend(oracle_checks(32, 1))
    degree_bad = sum(0 if theta_profile(n).degree_lemma_holds else 1 for n in range(1, enum_n + 1))
    results.append(_family("χ(T) ≥ (deg - 2)/2 on every enumerated tree", degree_bad, enum_n))
    sanity = [oracle_checks(n, h) for n in range(2, enum_n + 1) for h in range(1, n)]
    results.append(_family("non-vacuous bounds ≤ exhaustive values", *_count_failed(sanity)))
    majort = [r for n in range(2, 13) for h in range(1, n) for r in analytic_bounds(n, h, with_exhaustive=False)
              if r.bound_kind.startswith("majort")]
    results.append(_family("majort bounds are vacuous at desk scale", sum(0 if r.vacuous else 1 for r in majort),
                           len(majort)))

    products = [hard_graph_scan(n, 100).min_product for n in range(4, 9)]
    results.append(check("hard-graph: min Ψ·Λ strictly increasing for n = 4..8",
                         sum(1 for a, b in zip(products, products[1:]) if not a < b), 0, "=="))

    facts = binomial_facts(40)
    results.append(_family("Pascal identities and partial row sums", len(failed(facts)), len(facts)))
    return results
