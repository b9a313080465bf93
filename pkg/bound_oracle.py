"""
下界の検証用オラクル

- ϑ_n-木の全列挙による W(n,h)、χ(n,h)、Bin(n,h)
- 二分木のコスト Cost'、右寄せ、語彙への写像、ハミング重み H(n,h)
- R(n,h) の全列挙と解析的下界の評価
- 二項係数の恒等式
- パスとスターを合わせた難しいグラフの全域木走査
"""
import itertools
import logging
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Literal, Optional, Tuple, Union

import networkx as nx

from config import BINARY_CAP, ENUM_CAP, HAMMING_SUBSET_CAP, WORKERS
from schemas import BoundCheck, BoundReport, HardGraphReport, TradeoffRow
from llt_builder import build_llt
from metric_core import line_metric
from tree_model import RootedTree, load, min_star_covering, prufer_edges

# ロギングの設定
logger = logging.getLogger(__name__)

Stat = Literal["weight", "covering", "binary"]
# 二分木の形: (左, 右)。空の部分木は None
Shape = Optional[Tuple["Shape", "Shape"]]


class OracleDomainError(ValueError):
    """オラクルの引数が定義域外の場合の例外クラス"""
    pass


class ResourceCapError(ValueError):
    """全列挙の上限を超えた場合の例外クラス"""
    pass


def _check_cap(n: int, cap: Optional[int], default: int, what: str) -> None:
    limit = default if cap is None else cap
    if n > limit:
        logger.error(f"{what} の全列挙は n ≤ {limit} に制限されています (n={n})")
        raise ResourceCapError(f"{what} の全列挙は n ≤ {limit} に制限されています (n={n})")


# ----------------------------------------------------------------------
# ϑ_n-木の全列挙
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ThetaProfile:
    """
    n 頂点のラベル付き木を全て走査した結果

    *_exact は「深さがちょうど h」の最小値。binary は根の子が2個以下かつ全頂点の次数が3以下の木に限る。
    """
    n: int
    trees: int
    weight_exact: Dict[int, int]
    covering_exact: Dict[int, int]
    binary_exact: Dict[int, int]
    degree_lemma_holds: bool

    def _table(self, stat: Stat) -> Dict[int, int]:
        return {"weight": self.weight_exact, "covering": self.covering_exact, "binary": self.binary_exact}[stat]

    def exact(self, stat: Stat, h: int) -> Optional[int]:
        return self._table(stat).get(h)

    def at_most(self, stat: Stat, h: int) -> Optional[int]:
        values = [value for depth, value in self._table(stat).items() if depth <= h]
        return min(values) if values else None


def _bfs(adj: List[List[int]], source: int) -> List[int]:
    dist = [-1] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def _sweep(n: int, prefix: Tuple[int, ...]) -> dict:
    """prefix で始まる Prüfer 列の木を全て調べる（プロセスプールの作業単位）"""
    weight: Dict[int, int] = {}
    cover: Dict[int, int] = {}
    binary: Dict[int, int] = {}
    trees = 0
    degree_ok = True

    for tail in itertools.product(range(n), repeat=n - 2 - len(prefix)):
        edges = prufer_edges(prefix + tail, n)
        trees += 1
        adj: List[List[int]] = [[] for _ in range(n)]
        diff = [0] * (n + 1)
        w = 0
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
            lo, hi = (a, b) if a < b else (b, a)
            w += hi - lo
            diff[lo + 1] += 1
            diff[hi] -= 1
        chi = 0
        running = 0
        for v in range(n):
            running += diff[v]
            chi = max(chi, running)

        degree = [len(nbrs) for nbrs in adj]
        if 2 * chi < max(degree) - 2:
            degree_ok = False

        # 直径の両端からの距離の最大値が離心率
        d0 = _bfs(adj, 0)
        a = d0.index(max(d0))
        da = _bfs(adj, a)
        b = da.index(max(da))
        db = _bfs(adj, b)
        all_small = max(degree) <= 3

        for r in range(n):
            ecc = max(da[r], db[r])
            if w < weight.get(ecc, w + 1):
                weight[ecc] = w
            if chi < cover.get(ecc, chi + 1):
                cover[ecc] = chi
            if all_small and degree[r] <= 2 and w < binary.get(ecc, w + 1):
                binary[ecc] = w

    return {"weight": weight, "covering": cover, "binary": binary, "trees": trees, "degree_ok": degree_ok}


def _merge(tables: Iterable[Dict[int, int]]) -> Dict[int, int]:
    merged: Dict[int, int] = {}
    for table in tables:
        for depth, value in table.items():
            merged[depth] = min(value, merged.get(depth, value))
    return dict(sorted(merged.items()))


@lru_cache(maxsize=None)
def theta_profile(n: int, cap: Optional[int] = None) -> ThetaProfile:
    """
    n 頂点の全てのラベル付き木（n^{n-2} 本）を Prüfer 列で走査し、全ての根について集計する

    重みと被覆は根に依存せず、根 r での深さは r の離心率になる。
    """
    if n < 1:
        raise OracleDomainError(f"頂点数は1以上が必要です: {n}")
    _check_cap(n, cap, ENUM_CAP, "ϑ-木")
    if n == 1:
        return ThetaProfile(n=1, trees=1, weight_exact={0: 0}, covering_exact={0: 0},
                            binary_exact={0: 0}, degree_lemma_holds=True)

    prefixes = [(s,) for s in range(n)] if n >= 3 else [()]
    if WORKERS > 1 and len(prefixes) > 1:
        with ProcessPoolExecutor(max_workers=WORKERS) as pool:
            parts = list(pool.map(_sweep, [n] * len(prefixes), prefixes))
    else:
        parts = [_sweep(n, prefix) for prefix in prefixes]

    profile = ThetaProfile(
        n=n,
        trees=sum(p["trees"] for p in parts),
        weight_exact=_merge(p["weight"] for p in parts),
        covering_exact=_merge(p["covering"] for p in parts),
        binary_exact=_merge(p["binary"] for p in parts),
        degree_lemma_holds=all(p["degree_ok"] for p in parts),
    )
    logger.info(f"ϑ_{n} の木を {profile.trees} 本走査しました")
    return profile


def rooted_theta_trees(n: int, cap: Optional[int] = None) -> Iterator[RootedTree]:
    """n 頂点の根付きラベル付き ϑ_n-木を全て生成する（n^{n-1} 本）"""
    if n < 1:
        raise OracleDomainError(f"頂点数は1以上が必要です: {n}")
    _check_cap(n, cap, ENUM_CAP, "根付き ϑ-木")
    if n == 1:
        yield RootedTree.singleton()
        return
    for sequence in itertools.product(range(n), repeat=n - 2):
        kids: Dict[int, List[int]] = {v: [] for v in range(n)}
        for a, b in prufer_edges(sequence, n):
            kids[a].append(b)
            kids[b].append(a)
        base = RootedTree.from_children(0, _orient(kids, 0), n)
        for root in range(n):
            yield base.rerooted(root)


def _orient(adj: Dict[int, List[int]], root: int) -> Dict[int, List[int]]:
    kids: Dict[int, List[int]] = {}
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        kids[v] = sorted(u for u in adj[v] if u not in seen)
        seen.update(kids[v])
        queue.extend(kids[v])
    return kids


def _check_depth(n: int, h: int) -> None:
    if n == 1 and h == 0:
        return
    if not 1 <= h <= n - 1:
        raise OracleDomainError(f"深さ h は 1 ≤ h ≤ n-1 の範囲で指定してください: n={n}, h={h}")


def exhaustive_min(n: int, h: int, stat: Stat = "weight", cap: Optional[int] = None) -> Optional[int]:
    """
    深さ h 以下の ϑ_n-木の最小重み W(n,h)・最小被覆 χ(n,h)・最小二分木重み Bin(n,h)

    二分木で深さ h を満たすものがなければ None。
    """
    _check_depth(n, h)
    return theta_profile(n, cap).at_most(stat, h)


def exhaustive_min_exact_depth(n: int, h: int, stat: Stat = "weight", cap: Optional[int] = None) -> Optional[int]:
    """深さがちょうど h の ϑ_n-木に限った最小値"""
    _check_depth(n, h)
    return theta_profile(n, cap).exact(stat, h)


# ----------------------------------------------------------------------
# 二分木のコスト
# ----------------------------------------------------------------------
@lru_cache(maxsize=None)
def shape_size(shape: Shape) -> int:
    if shape is None:
        return 0
    return 1 + shape_size(shape[0]) + shape_size(shape[1])


def shape_depth(shape: Shape) -> int:
    if shape is None:
        return -1
    return 1 + max(shape_depth(shape[0]), shape_depth(shape[1]))


def shape_from_tree(tree: RootedTree, v: Optional[int] = None) -> Shape:
    """二分木の RootedTree を形に変換する（1番目の子が左、2番目が右）"""
    if tree.max_arity > 2:
        raise OracleDomainError(f"二分木ではありません (最大の子の数 {tree.max_arity})")

    def build(u: int) -> Shape:
        kids = tree.children[u]
        left = build(kids[0]) if len(kids) > 0 else None
        right = build(kids[1]) if len(kids) > 1 else None
        return (left, right)

    return build(tree.root if v is None else v)


def tree_cost(tree: Union[Shape, RootedTree]) -> Tuple[int, int]:
    """
    Cost'(T) = Σ_{v∈I} min{|v.left|, |v.right|} と Cost(T) = Σ_{v∈I} (min{...}+1)

    I は子を持つ頂点の集合。
    """
    shape = shape_from_tree(tree) if isinstance(tree, RootedTree) else tree
    cost_prime = 0
    inner = 0
    stack = [shape]
    while stack:
        node = stack.pop()
        if node is None:
            continue
        left, right = node
        if left is not None or right is not None:
            inner += 1
            cost_prime += min(shape_size(left), shape_size(right))
        stack.extend((left, right))
    return cost_prime, cost_prime + inner


def right_adjust(shape: Shape) -> Shape:
    """全頂点で |v.right| ≤ |v.left| となるように左右を入れ替える（コストと深さは不変）"""
    if shape is None:
        return None
    left, right = right_adjust(shape[0]), right_adjust(shape[1])
    if shape_size(left) < shape_size(right):
        left, right = right, left
    return (left, right)


def mirror(shape: Shape) -> Shape:
    if shape is None:
        return None
    return (mirror(shape[1]), mirror(shape[0]))


@lru_cache(maxsize=None)
def _shapes(n: int, h: int) -> Tuple[Shape, ...]:
    if n == 0:
        return (None,)
    if h < 0:
        return ()
    if n == 1:
        return ((None, None),)
    result: List[Shape] = [(s, None) for s in _shapes(n - 1, h - 1)]
    for a in range(1, n - 1):
        for left in _shapes(a, h - 1):
            for right in _shapes(n - 1 - a, h - 1):
                result.append((left, right))
    return tuple(result)


def binary_shapes(n: int, h: Optional[int] = None, cap: Optional[int] = None) -> Tuple[Shape, ...]:
    """
    n 頂点・深さ h 以下の二分木の形を全て返す

    子が1つの頂点ではその子を左に置く（左右の鏡像はコストも深さも同じ）。
    """
    if n < 1:
        raise OracleDomainError(f"頂点数は1以上が必要です: {n}")
    _check_cap(n, cap, BINARY_CAP, "二分木")
    return _shapes(n, n - 1 if h is None else h)


def exhaustive_min_cost(n: int, h: int, cap: Optional[int] = None) -> Optional[int]:
    """R(n,h): 深さ h 以下の n 頂点二分木の最小 Cost'"""
    _check_depth(n, h)
    shapes = binary_shapes(n, h, cap)
    if not shapes:
        return None
    return min(tree_cost(shape)[0] for shape in shapes)


# ----------------------------------------------------------------------
# 語彙とハミング重み
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class BinaryWordSet:
    words: FrozenSet[str]
    hcost: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "hcost", sum(word.count("1") for word in self.words))

    def __len__(self) -> int:
        return len(self.words)


def vocabulary(shape: Shape) -> BinaryWordSet:
    """各頂点に根からの道の語（左 0、右 1）を対応させる。右寄せ済みなら hcost = Cost'"""
    words = []
    stack = [(shape, "")]
    while stack:
        node, word = stack.pop()
        if node is None:
            continue
        words.append(word)
        stack.append((node[0], word + "0"))
        stack.append((node[1], word + "1"))
    return BinaryWordSet(words=frozenset(words))


@dataclass(frozen=True)
class HammingCost:
    value: int
    r: int
    remainder: int


def _check_capacity(n: int, h: int) -> None:
    if h < 0 or n < 1:
        raise OracleDomainError(f"n ≥ 1, h ≥ 0 が必要です: n={n}, h={h}")
    if n > 2 ** (h + 1) - 1:
        raise OracleDomainError(f"長さ {h} 以下の語は {2 ** (h + 1) - 1} 個しかありません (n={n})")


def min_hamming_cost(n: int, h: int) -> HammingCost:
    """
    H(n,h) を閉じた式で計算する

    重み i の語は C(h+1, i+1) 個ある。r は Σ_{i=0}^{r} C(h+1,i+1) < n を満たす最大の r、
    N は残りの語数で、H = Σ_{i=0}^{r} i·C(h+1,i+1) + N·(r+1)。
    """
    _check_capacity(n, h)
    r = -1
    consumed = 0
    total = 0
    while consumed + math.comb(h + 1, r + 2) < n:
        r += 1
        level = math.comb(h + 1, r + 1)
        consumed += level
        total += r * level
    remainder = n - consumed
    return HammingCost(value=total + remainder * (r + 1), r=r, remainder=remainder)


def _all_words(h: int) -> List[str]:
    return [""] + ["".join(bits) for length in range(1, h + 1) for bits in itertools.product("01", repeat=length)]


def greedy_hamming_cost(n: int, h: int) -> int:
    """全ての語をハミング重みの順に並べて先頭 n 個を取る"""
    _check_capacity(n, h)
    weights = sorted(word.count("1") for word in _all_words(h))
    return sum(weights[:n])


def subset_hamming_cost(n: int, h: int, cap: Optional[int] = None) -> int:
    """n 語の部分集合を全て調べた最小ハミング重み"""
    _check_capacity(n, h)
    _check_cap(n, cap, HAMMING_SUBSET_CAP, "語の部分集合")
    weights = [word.count("1") for word in _all_words(h)]
    return min(sum(combo) for combo in itertools.combinations(weights, n))


# ----------------------------------------------------------------------
# 解析的下界
# ----------------------------------------------------------------------
def floor_log2(n: int) -> int:
    return n.bit_length() - 1


def f_of_h(n: int, h: int) -> int:
    """C(h+1, f) > (2/3)·n を満たす最小の整数 f"""
    if n < 1 or h <= 2 * floor_log2(n):
        raise OracleDomainError(f"f(h) は h > 2⌊log n⌋ で定義されます: n={n}, h={h}")
    f = 0
    while 3 * math.comb(h + 1, f) <= 2 * n:
        f += 1
    return f


def min_arity_for_depth(n: int, h: int) -> int:
    """深さ h で n 頂点を収めるのに必要な最大の子の数の最小値"""
    k = 1
    while sum(k ** i for i in range(h + 1)) < n:
        k += 1
    return k


def _exact_covering(n: int, h: int) -> Optional[int]:
    if n <= ENUM_CAP:
        return exhaustive_min(n, h, "covering")
    if h == 1:
        return min_star_covering(n)
    return None


def analytic_bounds(n: int, h: int, with_exhaustive: bool = True) -> List[BoundReport]:
    """
    (n,h) で適用できる下界を全て評価する

    Args:
        n: 頂点数
        h: 深さ
        with_exhaustive: 上限内なら全列挙の値を並べる

    Returns:
        BoundReport のリスト（下界が0以下のものは vacuous）
    """
    if n < 2 or not 1 <= h <= n - 1:
        raise OracleDomainError(f"1 ≤ h ≤ n-1 かつ n ≥ 2 が必要です: n={n}, h={h}")
    reports: List[BoundReport] = []
    lg = floor_log2(n)

    def exact_cost() -> Optional[int]:
        return exhaustive_min_cost(n, h) if with_exhaustive and n <= BINARY_CAP else None

    def exact_cover() -> Optional[int]:
        return _exact_covering(n, h) if with_exhaustive else None

    # log n ≤ h ≤ 2⌊log n⌋
    if n <= 2 ** h and h <= 2 * lg:
        bound = float(Fraction(2, 3) * n * (lg // 8))
        reports.append(BoundReport(n=n, h=h, bound_kind="majort-part1", analytic_bound=bound,
                                   exhaustive_value=exact_cost(), strict=False, vacuous=bound <= 0))
    if 2 * lg < h <= n - 1:
        bound = float(Fraction(2, 3) * n * (f_of_h(n, h) - 2))
        reports.append(BoundReport(n=n, h=h, bound_kind="majort-part2", analytic_bound=bound,
                                   exhaustive_value=exact_cost(), strict=True, vacuous=bound <= 0))
    if 2 ** (5 * h) <= n:
        bound = h * n ** (1.0 / h) / 20
        reports.append(BoundReport(n=n, h=h, bound_kind="work-covering", analytic_bound=bound,
                                   exhaustive_value=exact_cover(), strict=True, vacuous=bound <= 0))
    if h <= math.log(n) / 2:
        bound = h * n ** (1.0 / h) / 10 - h
        reports.append(BoundReport(n=n, h=h, bound_kind="covering-prop", analytic_bound=bound,
                                   exhaustive_value=exact_cover(), strict=True, vacuous=bound <= 0))

    # 深さ h の木には次数 k 以上の頂点（根）があり、χ ≥ (k-2)/2
    bound = (min_arity_for_depth(n, h) - 2) / 2
    reports.append(BoundReport(n=n, h=h, bound_kind="degree", analytic_bound=bound,
                               exhaustive_value=exact_cover(), strict=False, vacuous=bound <= 0))
    return reports


# ----------------------------------------------------------------------
# 二項係数の恒等式
# ----------------------------------------------------------------------
def pascal_sum(h: int, i: int) -> BoundCheck:
    """Σ_{k=i}^{h} C(k,i) = C(h+1, i+1)"""
    if not 0 <= i <= h:
        raise OracleDomainError(f"0 ≤ i ≤ h が必要です: h={h}, i={i}")
    lhs = sum(math.comb(k, i) for k in range(i, h + 1))
    rhs = math.comb(h + 1, i + 1)
    return BoundCheck(name=f"pascal-sum(h={h},i={i})", lhs=lhs, rhs=rhs, relation="==", holds=lhs == rhs)


def pascal_ratio(n: int, k: int) -> BoundCheck:
    """C(n,k) = ((n-k+1)/k)·C(n,k-1)"""
    if not 1 <= k <= n:
        raise OracleDomainError(f"1 ≤ k ≤ n が必要です: n={n}, k={k}")
    lhs = math.comb(n, k)
    rhs = Fraction(n - k + 1, k) * math.comb(n, k - 1)
    return BoundCheck(name=f"pascal-ratio(n={n},k={k})", lhs=lhs, rhs=float(rhs), relation="==", holds=lhs == rhs)


def partial_row_bound(n: int, k: int) -> BoundCheck:
    """k ≤ ⌊n/4⌋ のとき Σ_{i≤k} C(n,i) < (3/2)·C(n,k)"""
    if not 0 <= k <= n // 4:
        raise OracleDomainError(f"0 ≤ k ≤ ⌊n/4⌋ が必要です: n={n}, k={k}")
    lhs = sum(math.comb(n, i) for i in range(k + 1))
    rhs = Fraction(3, 2) * math.comb(n, k)
    return BoundCheck(name=f"partial-row(n={n},k={k})", lhs=lhs, rhs=float(rhs), relation="<", holds=lhs < rhs)


def binomial_facts(limit: int) -> List[BoundCheck]:
    """limit 以下の全ての引数で3つの事実を評価する"""
    checks = []
    for n in range(1, limit + 1):
        for k in range(0, n + 1):
            checks.append(pascal_sum(n, k))
            if k >= 1:
                checks.append(pascal_ratio(n, k))
            if k <= n // 4:
                checks.append(partial_row_bound(n, k))
    return checks


# ----------------------------------------------------------------------
# 難しいグラフ
# ----------------------------------------------------------------------
def hard_graph(n: int, W: int) -> nx.Graph:
    """
    頂点 0..n-2 の単位重みパスと、ハブ n-1 から全頂点への重み W の辺

    Args:
        n: 頂点数（ハブを含む）
        W: スター辺の重み
    """
    if n < 3:
        raise OracleDomainError(f"n ≥ 3 が必要です: {n}")
    if W <= n:
        logger.warning(f"W={W} は n={n} に比べて十分大きくありません")
    graph = nx.Graph()
    hub = n - 1
    graph.add_weighted_edges_from((v, v + 1, 1) for v in range(n - 2))
    graph.add_weighted_edges_from((hub, v, W) for v in range(n - 1))
    return graph


def hard_graph_scan(n: int, W: int = 100, cap: Optional[int] = None) -> HardGraphReport:
    """全ての全域木について Ψ(T)·Λ(T) を調べる"""
    _check_cap(n, cap, ENUM_CAP, "全域木")
    graph = hard_graph(n, W)
    hub = n - 1
    mst_weight = (n - 2) + W

    count = 0
    best: Optional[Tuple[Fraction, int]] = None
    min_diameter: Dict[int, int] = {}
    for tree in nx.SpanningTreeIterator(graph):
        count += 1
        weight = sum(graph[u][v]["weight"] for u, v in tree.edges())
        spokes = tree.degree(hub)
        diameter = nx.diameter(tree)
        product = Fraction(weight, mst_weight) * diameter
        if best is None or (product, spokes) < best:
            best = (product, spokes)
        min_diameter[spokes] = min(diameter, min_diameter.get(spokes, diameter))

    logger.info(f"難しいグラフ n={n}, W={W}: 全域木 {count} 本, min Ψ·Λ = {float(best[0]):.6g}")
    return HardGraphReport(
        n=n, W=W, spanning_trees=count, mst_weight=mst_weight,
        min_product=float(best[0]), min_product_star_edges=best[1],
        min_diameter_by_star_edges=dict(sorted(min_diameter.items())),
    )


# ----------------------------------------------------------------------
# トレードオフ表
# ----------------------------------------------------------------------
def tradeoff_table(n: int, hs: Optional[Iterable[int]] = None) -> List[TradeoffRow]:
    """
    各 h について構築した木の負荷・重みと、適用できる最大の下界を並べる
    """
    metric = line_metric(n)
    rows = []
    for h in (hs if hs is not None else range(1, n)):
        result = build_llt(metric, h)
        usable = [r for r in analytic_bounds(n, h, with_exhaustive=False) if not r.vacuous]
        strongest = max(usable, key=lambda r: r.analytic_bound, default=None)
        rows.append(TradeoffRow(
            n=n, h=h, regime=result.plan.regime,
            construction_load=load(result.tree, result.order).xi,
            construction_weight=result.tree.total_weight,
            lower_bound=strongest.analytic_bound if strongest else None,
            lower_bound_kind=strongest.bound_kind if strongest else None,
            exhaustive_weight=exhaustive_min(n, h, "weight") if n <= ENUM_CAP else None,
        ))
    return rows
