"""
浅く（根からの距離が (1+2θ) 倍以内）、低く、軽い全域木 S(T) を作る変換

T の先行順で頂点を走査してブレークポイントを選び、根からの直結辺を足した
グラフの最短路木を返す。
"""
import heapq
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from config import DEFAULT_THETA
from metric_core import MetricSpace
from tree_model import RootedTree, tree_distance

# ロギングの設定
logger = logging.getLogger(__name__)

Adjacency = List[Dict[int, float]]


class SLLTError(ValueError):
    """SLLT 変換の入力が不正な場合の例外クラス"""
    pass


@dataclass(frozen=True)
class BreakpointSet:
    theta: float
    points: Tuple[int, ...]
    star_edges: Tuple[Tuple[int, int, float], ...]
    # Σ dist_T(B_{i-1}, B_i)
    scan_length: float


@dataclass(frozen=True)
class SLLTResult:
    tree: RootedTree
    source: RootedTree
    breakpoints: BreakpointSet


def _check_inputs(tree: RootedTree, metric: MetricSpace, rt: int, theta: float) -> None:
    if theta <= 0:
        raise SLLTError(f"θ は正の値が必要です: {theta}")
    if tree.n != metric.n:
        raise SLLTError(f"木が距離空間を張っていません (木 {tree.n}, 空間 {metric.n})")
    if not 0 <= rt < tree.n:
        raise SLLTError(f"根 {rt} は木に含まれていません")


def preorder_sequence(tree: RootedTree) -> List[int]:
    """ブレークポイント走査に使う順序 L（親を先に、子は格納順）"""
    return tree.preorder()


def breakpoints(
    tree: RootedTree,
    metric: MetricSpace,
    rt: Optional[int] = None,
    theta: float = DEFAULT_THETA,
) -> BreakpointSet:
    """
    ブレークポイントを選ぶ

    B_1 は L の先頭。以降は直前のブレークポイントからの木上の距離が
    θ·dist_M(rt, v) を真に超えた最初の頂点 v を次のブレークポイントにする。

    Args:
        tree: 全域木
        metric: 距離空間
        rt: 根（既定は tree.root）
        theta: θ > 0

    Returns:
        BreakpointSet
    """
    rt = tree.root if rt is None else rt
    _check_inputs(tree, metric, rt, theta)
    rooted = tree.rerooted(rt)
    depth = rooted.depths()
    root_dist = rooted.root_distances()

    sequence = preorder_sequence(rooted)
    points = [sequence[0]]
    scan_length = 0.0
    for v in sequence[1:]:
        gap = tree_distance(rooted, points[-1], v, depth, root_dist)
        if gap > theta * metric.dist(rt, v):
            points.append(v)
            scan_length += gap

    star_edges = tuple((rt, b, float(metric.dist(rt, b))) for b in points if b != rt)
    logger.debug(f"ブレークポイント {len(points)} 個 (θ={theta}): {points[:20]}")
    return BreakpointSet(theta=theta, points=tuple(points), star_edges=star_edges, scan_length=scan_length)


def augmented_graph(tree: RootedTree, bps: BreakpointSet) -> Adjacency:
    """T の辺と (rt, B_i) の辺を合わせた隣接リスト"""
    adj: Adjacency = [{} for _ in range(tree.n)]
    for p, c, w in tree.edges():
        adj[p][c] = w
        adj[c][p] = w
    for rt, b, w in bps.star_edges:
        w = min(w, adj[rt].get(b, w))
        adj[rt][b] = w
        adj[b][rt] = w
    return adj


def shortest_path_tree(adj: Adjacency, rt: int) -> RootedTree:
    """
    Dijkstra 法による最短路木

    距離が等しければホップ数の少ない方、さらに親の添字が小さい方を選ぶ。
    """
    n = len(adj)
    inf = float("inf")
    label: List[Tuple[float, int, int]] = [(inf, n, n)] * n
    label[rt] = (0.0, 0, -1)
    done = [False] * n
    heap = [(0.0, 0, -1, rt)]
    while heap:
        dist, hops, par, u = heapq.heappop(heap)
        if done[u] or (dist, hops, par) != label[u]:
            continue
        done[u] = True
        for v in sorted(adj[u]):
            if done[v]:
                continue
            candidate = (dist + adj[u][v], hops + 1, u)
            if candidate < label[v]:
                label[v] = candidate
                heapq.heappush(heap, (*candidate, v))

    unreachable = [v for v in range(n) if not done[v]]
    if unreachable:
        raise SLLTError(f"根から到達できない頂点があります: {unreachable[:10]}")
    parent = [label[v][2] for v in range(n)]
    return RootedTree.from_parents(parent, lambda a, b: adj[a][b])


def build_sllt(
    tree: RootedTree,
    metric: MetricSpace,
    rt: Optional[int] = None,
    theta: float = DEFAULT_THETA,
) -> SLLTResult:
    """
    S(T) を構築する

    深さ ≤ 1+2(h-1)、重み ≤ (1+2/θ)·ω(T)、根からの距離 ≤ (1+2θ)·dist_M を満たす。
    """
    rt = tree.root if rt is None else rt
    _check_inputs(tree, metric, rt, theta)
    rooted = tree.rerooted(rt)
    bps = breakpoints(rooted, metric, rt, theta)
    spt = shortest_path_tree(augmented_graph(rooted, bps), rt)
    logger.info(
        f"S(T) を構築しました: n={tree.n}, θ={theta}, 直結辺={len(bps.star_edges)}, "
        f"重み {rooted.total_weight:.6g} -> {spt.total_weight:.6g}, 深さ {rooted.depth} -> {spt.depth}"
    )
    return SLLTResult(tree=spt, source=rooted, breakpoints=bps)


def root_distance_ratios(tree: RootedTree, metric: MetricSpace, rt: Optional[int] = None) -> Dict[int, float]:
    """頂点ごとの dist_S(rt,v) / dist_M(rt,v)（根自身と距離0の頂点は除く）"""
    rt = tree.root if rt is None else rt
    rooted = tree.rerooted(rt)
    root_dist = rooted.root_distances()
    ratios = {}
    for v in range(tree.n):
        base = metric.dist(rt, v)
        if v != rt and base > 0:
            ratios[v] = root_dist[v] / base
    return ratios
