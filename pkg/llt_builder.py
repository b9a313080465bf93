"""
低深さ・軽量な全域木（LLT）の構築モジュール

ϑ_n 上のテンプレート木 T(ξ,h)、T_n、T̃(d,h) を作り、葉を削って n 頂点に揃え、
MST のハミルトンパス順で一般の距離空間に埋め込む。
"""
import heapq
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Literal, Optional

from metric_core import LinearOrder, MetricSpace, hamiltonian_path, minimum_spanning_tree, rotated_order
from schemas import ConstructionPlan
from tree_model import RootedTree, theta_distance

# ロギングの設定
logger = logging.getLogger(__name__)

Side = Literal["left", "right"]


class ConstructionDomainError(ValueError):
    """構築パラメータが定義域外の場合の例外クラス"""
    pass


@dataclass(frozen=True)
class LLTResult:
    tree: RootedTree
    plan: ConstructionPlan
    order: LinearOrder


# ----------------------------------------------------------------------
# サイズの計算
# ----------------------------------------------------------------------
@lru_cache(maxsize=None)
def _size_high(xi: int, h: int) -> int:
    if xi == 1:
        return h + 1
    return h + 1 + sum(_size_high(min(xi - 1, h - i + 1), h - i) for i in range(1, h + 1))


def size_high(xi: int, h: int) -> int:
    """
    N(ξ,h) を漸化式で計算する

    N(1,h) = h+1、N(ξ,h) = h+1+Σ_{i=1}^{h} N(min{ξ-1, h-i+1}, h-i)
    """
    if xi < 1 or h < xi - 1:
        raise ConstructionDomainError(f"N(ξ,h) は ξ ≥ 1 かつ h ≥ ξ-1 で定義されます: ξ={xi}, h={h}")
    return _size_high(xi, h)


def size_low(d: int, h: int) -> int:
    """Ñ(d,h) = Σ_{i=0}^{h} d^i"""
    if d < 2 or h < 0:
        raise ConstructionDomainError(f"T̃(d,h) は d ≥ 2, h ≥ 0 で定義されます: d={d}, h={h}")
    return sum(d ** i for i in range(h + 1))


def ceil_root(n: int, h: int) -> int:
    """⌈n^{1/h}⌉ を整数演算で求める"""
    if n < 1 or h < 1:
        raise ConstructionDomainError(f"⌈n^(1/h)⌉ は n ≥ 1, h ≥ 1 で定義されます: n={n}, h={h}")
    r = max(1, int(round(n ** (1.0 / h))))
    while r ** h < n:
        r += 1
    while r > 1 and (r - 1) ** h >= n:
        r -= 1
    return r


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


# ----------------------------------------------------------------------
# テンプレート木
# ----------------------------------------------------------------------
def compose(base: RootedTree, v: int, sub: RootedTree, side: Side = "right") -> RootedTree:
    """
    ϑ-木 base の頂点 v に ϑ-木 sub を部分木として付ける

    right なら sub の座標を v の直後に、left なら直前に挿入し、
    base 側の後続座標を |sub| だけずらす。sub の根は v の子になる。
    """
    if not 0 <= v < base.n:
        raise ConstructionDomainError(f"頂点 {v} は木に含まれていません (n={base.n})")
    if side not in ("left", "right"):
        raise ConstructionDomainError(f"side は left か right です: {side}")

    k = sub.n
    start = v + 1 if side == "right" else v

    def shift(u: int) -> int:
        return u + k if u >= start else u

    parent = [-1] * (base.n + k)
    for u in range(base.n):
        parent[shift(u)] = shift(base.parent[u]) if base.parent[u] >= 0 else -1
    for u in range(k):
        parent[start + u] = start + sub.parent[u] if sub.parent[u] >= 0 else shift(v)
    return RootedTree.from_parents(parent, theta_distance)


def _fill_high(xi: int, h: int, base: int, parent: List[int]) -> int:
    # v_1, T''_1, v_2, T''_2, ..., v_h, T''_h, v_{h+1} の順に座標を割り当てる
    if xi == 1:
        for k in range(1, h + 1):
            parent[base + k] = base + k - 1
        return h + 1
    pos = base
    prev = -1
    for i in range(1, h + 2):
        v = pos
        if prev >= 0:
            parent[v] = prev
        pos += 1
        if i <= h:
            parent[pos] = v
            pos += _fill_high(min(xi - 1, h - i + 1), h - i, pos, parent)
        prev = v
    return pos - base


def build_high_tree(xi: int, h: int) -> RootedTree:
    """
    T(ξ,h) を構築する（座標1が根、深さ h、負荷 ξ の二分木）

    Args:
        xi: 負荷 ξ
        h: 深さ h

    Returns:
        N(ξ,h) 頂点の ϑ-木
    """
    size = size_high(xi, h)
    parent = [-1] * size
    _fill_high(xi, h, 0, parent)
    return RootedTree.from_parents(parent, theta_distance)


def build_path(n: int) -> RootedTree:
    """T(1, n-1)、つまり座標1を根とするパス"""
    if n < 1:
        raise ConstructionDomainError(f"頂点数は1以上が必要です: {n}")
    return build_high_tree(1, n - 1)


def _fill_balanced(lo: int, hi: int, parent: List[int]) -> int:
    # 区間 [lo, hi) の中央 ⌈m/2⌉ 番目を根にする
    root = lo + (hi - lo + 1) // 2 - 1
    if lo < root:
        parent[_fill_balanced(lo, root, parent)] = root
    if root + 1 < hi:
        parent[_fill_balanced(root + 1, hi, parent)] = root
    return root


def build_balanced(n: int) -> RootedTree:
    """完全平衡二分木 T_n（根は座標 ⌈n/2⌉）"""
    if n < 1:
        raise ConstructionDomainError(f"頂点数は1以上が必要です: {n}")
    parent = [-1] * n
    _fill_balanced(0, n, parent)
    return RootedTree.from_parents(parent, theta_distance)


def _fill_low(d: int, h: int, base: int, parent: List[int]) -> int:
    if h == 0:
        return base
    sub = size_low(d, h - 1)
    left = (d + 1) // 2
    roots = []
    pos = base
    for _ in range(left):
        roots.append(_fill_low(d, h - 1, pos, parent))
        pos += sub
    root = pos
    pos += 1
    for _ in range(d - left):
        roots.append(_fill_low(d, h - 1, pos, parent))
        pos += sub
    for r in roots:
        parent[r] = root
    return root


def build_low_tree(d: int, h: int) -> RootedTree:
    """
    d 分木 T̃(d,h) を構築する

    ⌈d/2⌉ 個の T̃(d,h-1) を根の左に、残り ⌊d/2⌋ 個を右に並べる。
    """
    size = size_low(d, h)
    parent = [-1] * size
    _fill_low(d, h, 0, parent)
    return RootedTree.from_parents(parent, theta_distance)


def trim_to_size(tree: RootedTree, n: int) -> RootedTree:
    """
    最も深い葉（同じ深さなら座標が最大のもの）を1枚ずつ削って n 頂点にし、座標を詰め直す

    深さ・負荷・子の数はいずれも増えない。
    """
    if n < 1 or n > tree.n:
        raise ConstructionDomainError(f"目標サイズ {n} が不正です (|T|={tree.n})")
    if n == tree.n:
        return tree

    depth = tree.depths()
    remaining_children = [len(kids) for kids in tree.children]
    heap = [(-depth[v], -v) for v in tree.leaves()]
    heapq.heapify(heap)
    removed = set()
    while tree.n - len(removed) > n:
        _, neg_v = heapq.heappop(heap)
        v = -neg_v
        removed.add(v)
        p = tree.parent[v]
        remaining_children[p] -= 1
        if remaining_children[p] == 0:
            heapq.heappush(heap, (-depth[p], -p))

    kept = [v for v in range(tree.n) if v not in removed]
    rank = {v: i for i, v in enumerate(kept)}
    parent = [rank[tree.parent[v]] if tree.parent[v] >= 0 else -1 for v in kept]
    logger.debug(f"葉を {len(removed)} 枚削除しました: {tree.n} -> {n}")
    return RootedTree.from_parents(parent, theta_distance)


# ----------------------------------------------------------------------
# パラメータ選択と埋め込み
# ----------------------------------------------------------------------
def _choose_regime(n: int, h: int) -> ConstructionPlan:
    """方式とパラメータだけを決める（low の template_root は刈り込み前の位置）"""
    if n < 1:
        raise ConstructionDomainError(f"頂点数は1以上が必要です: {n}")
    if h < 0 or (h == 0 and n > 1):
        raise ConstructionDomainError(f"深さ {h} では {n} 頂点を張れません")
    if h >= n - 1:
        return ConstructionPlan(regime="path", n=n, h=h, xi=1, template_size=n, template_root=0)

    lg = ceil_log2(n)
    if h < lg:
        d = 2
        while size_low(d, h) <= n:
            d += 1
        return ConstructionPlan(
            regime="low", n=n, h=h, d=d, template_size=size_low(d, h),
            template_root=((d + 1) // 2) * size_low(d, h - 1),
        )
    if h < 2 * lg:
        return ConstructionPlan(regime="mid", n=n, h=h, template_size=n, template_root=(n + 1) // 2 - 1)

    xi = 1
    while size_high(xi, h) <= n:
        xi += 1
    return ConstructionPlan(regime="high", n=n, h=h, xi=xi, template_size=size_high(xi, h), template_root=0)


def plan_construction(n: int, h: int) -> ConstructionPlan:
    """
    n と深さ h から構築方式とパラメータを決める

    h < ⌈log n⌉ なら low（T̃(d,h)）、2⌈log n⌉ 未満なら mid（T_n）、それ以上なら high（T(ξ,h)）。
    h ≥ n-1 ならパスを返す。template_root は n 頂点に刈り込んだ後の根の座標。
    """
    plan = _choose_regime(n, h)
    if plan.regime == "low":
        plan = plan.model_copy(update={"template_root": build_template(plan).root})
    return plan


def build_template(plan: ConstructionPlan) -> RootedTree:
    """計画に従って n 頂点の ϑ-テンプレートを作る"""
    if plan.regime == "path":
        return build_path(plan.n)
    if plan.regime == "mid":
        return build_balanced(plan.n)
    if plan.regime == "low":
        template = build_low_tree(plan.d, plan.h)
    else:
        template = build_high_tree(plan.xi, plan.h)
    return trim_to_size(template, plan.n)


def embed(template: RootedTree, order: LinearOrder, metric: MetricSpace) -> RootedTree:
    """ϑ-座標 i を L の i 番目の頂点に写す（負荷はそのまま保たれる）"""
    if template.n != len(order) or metric.n != len(order):
        raise ConstructionDomainError(
            f"テンプレート ({template.n}) と線形順序 ({len(order)}) の大きさが一致しません"
        )
    image = order.order
    kids = {image[v]: [image[c] for c in template.children[v]] for v in range(template.n)}
    return RootedTree.from_children(image[template.root], kids, template.n, metric.dist)


def build_llt(
    metric: MetricSpace,
    h: int,
    root: Optional[int] = None,
    order: Optional[LinearOrder] = None,
) -> LLTResult:
    """
    深さ h 以下の軽量全域木を構築する

    Args:
        metric: 距離空間
        h: 深さの上限
        root: 木の根にする頂点。指定すると L を巡回させてテンプレートの根の位置に合わせる
        order: 計算済みの線形順序（同じ距離空間で h だけ変えるとき用）

    Returns:
        木・構築計画・線形順序
    """
    n = metric.n
    if h >= n and n > 1:
        logger.warning(f"h={h} は n-1={n - 1} 以上なのでパスに切り詰めます")
    plan = plan_construction(n, h)
    logger.info(
        f"構築方式: {plan.regime} (n={n}, h={h}, ξ={plan.xi}, d={plan.d}, テンプレート={plan.template_size})"
    )

    if order is None:
        start = 0 if root is None else root
        order = hamiltonian_path(metric, minimum_spanning_tree(metric), start)
    template = build_template(plan)
    if root is not None:
        order = rotated_order(order, metric, root, template.root)
    tree = embed(template, order, metric)
    return LLTResult(tree=tree, plan=plan, order=order)


def load_cap(n: int, h: int) -> int:
    """方式ごとの負荷の理論上限（low: ⌈n^{1/h}⌉·h、mid: ⌊log n⌋、high: ξ、path: 1）"""
    plan = _choose_regime(n, h)
    if plan.regime == "path":
        return 1
    if plan.regime == "low":
        return ceil_root(n, h) * h
    if plan.regime == "mid":
        return n.bit_length() - 1
    return plan.xi
