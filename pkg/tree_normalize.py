"""
木の正規化モジュール

- four_extension: 各頂点の子を高々4個（根は2個）にする
- bin_extension: 4分木を二分木（根の子は1個）にする
- deepen: ϑ-木の深さを被覆を増やさずに1だけ深くする
"""
import logging
from typing import Dict, List

from metric_core import MetricSpace
from tree_model import RootedTree, theta_distance

# ロギングの設定
logger = logging.getLogger(__name__)


class NormalizationError(ValueError):
    """正規化できない入力に対する例外クラス"""
    pass


def _check_metric(tree: RootedTree, metric: MetricSpace) -> None:
    if tree.n != metric.n:
        raise NormalizationError(f"木が距離空間を張っていません (木 {tree.n}, 空間 {metric.n})")


def four_extension(tree: RootedTree, metric: MetricSpace) -> RootedTree:
    """
    全頂点に Full 手続きを適用する

    子を部分木の大きさの降順（同じならラベルの小さい順）に c_1, c_2, ... と並べ、
    c_1, c_2 を v の子に、c_{2i+1}, c_{2i+2} を c_i の子にする。
    辺の重みは距離空間から計算し直す。

    Args:
        tree: 根付き木
        metric: 木が張る距離空間

    Returns:
        根の子が2個以下、その他の頂点の子が4個以下の木
    """
    _check_metric(tree, metric)
    size = tree.subtree_sizes()
    own: Dict[int, List[int]] = {v: [] for v in range(tree.n)}
    inherited: Dict[int, List[int]] = {v: [] for v in range(tree.n)}

    for v in range(tree.n):
        ordered = sorted(tree.children[v], key=lambda c: (-size[c], c))
        for k, c in enumerate(ordered, start=1):
            if k <= 2:
                own[v].append(c)
            else:
                # c_k (k ≥ 3) は c_{⌊(k-1)/2⌋} の子になる
                inherited[ordered[(k - 1) // 2 - 1]].append(c)

    kids = {v: own[v] + inherited[v] for v in range(tree.n)}
    result = RootedTree.from_children(tree.root, kids, tree.n, metric.dist)
    logger.debug(f"4Extension: 深さ {tree.depth} -> {result.depth}, 重み {tree.total_weight:.6g} -> {result.total_weight:.6g}")
    return result


def bin_extension(tree: RootedTree, metric: MetricSpace) -> RootedTree:
    """
    全頂点に Path 手続きを適用して二分木にする

    子 c_1, ..., c_k（格納順）を v - c_1 - c_2 - ... - c_k のパスに並べ替える。
    """
    _check_metric(tree, metric)
    if tree.max_arity > 4:
        raise NormalizationError(f"子の数が4を超える頂点があります (最大 {tree.max_arity})")

    # 新しい親子関係: c_1 は v の子、c_i は c_{i-1} の子
    first: Dict[int, List[int]] = {v: [] for v in range(tree.n)}
    successor: Dict[int, List[int]] = {v: [] for v in range(tree.n)}
    for v in range(tree.n):
        kids = tree.children[v]
        if kids:
            first[v].append(kids[0])
        for prev, nxt in zip(kids, kids[1:]):
            successor[prev].append(nxt)

    kids = {v: first[v] + successor[v] for v in range(tree.n)}
    return RootedTree.from_children(tree.root, kids, tree.n, metric.dist)


def to_binary(tree: RootedTree, metric: MetricSpace) -> RootedTree:
    """4Extension と BinExtension の合成（深さ ≤ 8h、重み ≤ 6ω）"""
    return bin_extension(four_extension(tree, metric), metric)


def deepen(tree: RootedTree) -> RootedTree:
    """
    ϑ_n-木の深さを1増やす（被覆は増えない）

    座標が最大の最深頂点 v で終わる最深パス P を選び、P に含まれない葉のうち
    ラベルが最小のもの ℓ を取り除いて、v の親と反対側に隣接する新しい頂点 v' を
    v の子として付ける。最後に座標を 1..n に詰め直す。
    """
    n = tree.n
    if n < 2:
        raise NormalizationError("1頂点の木は深くできません")
    depth = tree.depths()
    h = max(depth)
    if h >= n - 1:
        raise NormalizationError(f"深さ {h} のパスはこれ以上深くできません (n={n})")

    v = max(u for u in range(n) if depth[u] == h)
    on_path = set(tree.path_to_root(v))
    leaf = min(u for u in tree.leaves() if u not in on_path)

    # 座標を2倍して v' = 2v ± 1 を隙間に置く
    p = tree.parent[v]
    new_coord = 2 * v + 1 if p < v else 2 * v - 1
    coords = {u: 2 * u for u in range(n) if u != leaf}
    parent_of = {u: 2 * tree.parent[u] if tree.parent[u] >= 0 else None for u in coords}
    labels = sorted(list(coords.values()) + [new_coord])
    rank = {c: i for i, c in enumerate(labels)}

    parent = [-1] * n
    for u, c in coords.items():
        if parent_of[u] is not None:
            parent[rank[c]] = rank[parent_of[u]]
    parent[rank[new_coord]] = rank[2 * v]
    result = RootedTree.from_parents(parent, theta_distance)
    logger.debug(f"deepen: 葉 {leaf} を移動し深さ {h} -> {result.depth}")
    return result
