"""
根付き木のデータモデルと計測モジュール

頂点は常に 0..n-1 の添字。ϑ_n 上の木では添字 k が座標 k+1 に対応する。
"""
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from schemas import TreeMetrics

# ロギングの設定
logger = logging.getLogger(__name__)

Distance = Callable[[int, int], float]


class TreeStructureError(ValueError):
    """木構造が不正な場合の例外クラス"""
    pass


def theta_distance(i: int, j: int) -> int:
    """ϑ_n 上の距離 |i-j|（添字でも座標でも同じ値）"""
    return abs(i - j)


@dataclass(frozen=True)
class RootedTree:
    """
    順序付き根付き全域木

    children[v] の並びは左から右の順序として意味を持つ。
    weight[v] は辺 (parent[v], v) の重み（根は 0）。
    """
    root: int
    parent: Tuple[int, ...]
    children: Tuple[Tuple[int, ...], ...]
    weight: Tuple[float, ...]

    # ------------------------------------------------------------------
    # 生成
    # ------------------------------------------------------------------
    @classmethod
    def from_children(
        cls,
        root: int,
        children: Union[Mapping[int, Sequence[int]], Sequence[Sequence[int]]],
        n: int,
        distance: Distance = theta_distance,
    ) -> "RootedTree":
        """
        子リストから木を生成し、構造を検証する

        Args:
            root: 根の添字
            children: 頂点 -> 子の並び（順序は保持される）
            n: 頂点数
            distance: 辺の重みを与える距離関数

        Returns:
            検証済みの RootedTree
        """
        if n < 1:
            raise TreeStructureError(f"頂点数が不正です: {n}")
        if not 0 <= root < n:
            raise TreeStructureError(f"根が範囲外です: {root}")

        parent = [-2] * n
        parent[root] = -1
        child_lists: List[Tuple[int, ...]] = [()] * n
        items = children.items() if isinstance(children, Mapping) else enumerate(children)
        for v, kids in items:
            if not 0 <= v < n:
                raise TreeStructureError(f"頂点が範囲外です: {v}")
            kids = tuple(int(c) for c in kids)
            for c in kids:
                if not 0 <= c < n or c == root:
                    raise TreeStructureError(f"子 {c} が不正です（親 {v}）")
                if parent[c] != -2:
                    raise TreeStructureError(f"頂点 {c} が複数回子として現れます")
                parent[c] = v
            child_lists[v] = kids

        missing = [v for v in range(n) if parent[v] == -2]
        if missing:
            raise TreeStructureError(f"親を持たない頂点があります: {missing[:10]}")

        weight = [0.0] * n
        for v in range(n):
            if v != root:
                weight[v] = distance(parent[v], v)

        tree = cls(root=root, parent=tuple(parent), children=tuple(child_lists), weight=tuple(weight))
        if len(tree.preorder()) != n:
            raise TreeStructureError("木が連結でないか閉路を含みます")
        return tree

    @classmethod
    def from_parents(
        cls,
        parent: Sequence[int],
        distance: Distance = theta_distance,
        child_key: Optional[Callable[[int], object]] = None,
    ) -> "RootedTree":
        """親ベクトル（根は -1）から木を生成する。子は child_key（既定は添字）の昇順"""
        roots = [v for v, p in enumerate(parent) if p == -1]
        if len(roots) != 1:
            raise TreeStructureError(f"根がちょうど1つではありません: {roots}")
        kids: Dict[int, List[int]] = {v: [] for v in range(len(parent))}
        for v, p in enumerate(parent):
            if p != -1:
                if not 0 <= p < len(parent):
                    raise TreeStructureError(f"親 {p} が範囲外です")
                kids[p].append(v)
        for v in kids:
            kids[v].sort(key=child_key)
        return cls.from_children(roots[0], kids, len(parent), distance)

    @classmethod
    def singleton(cls) -> "RootedTree":
        return cls(root=0, parent=(-1,), children=((),), weight=(0.0,))

    # ------------------------------------------------------------------
    # 基本量
    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.parent)

    def preorder(self) -> List[int]:
        """親を子より先に、子は格納順で訪問する順序"""
        order = []
        stack = [self.root]
        seen = 0
        while stack:
            v = stack.pop()
            order.append(v)
            seen += 1
            if seen > self.n:
                break
            stack.extend(reversed(self.children[v]))
        return order

    def edges(self) -> List[Tuple[int, int, float]]:
        """(親, 子, 重み) を先行順で返す"""
        return [(self.parent[v], v, self.weight[v]) for v in self.preorder() if v != self.root]

    @property
    def total_weight(self) -> float:
        return sum(self.weight)

    def depths(self) -> List[int]:
        depth = [0] * self.n
        for v in self.preorder():
            for c in self.children[v]:
                depth[c] = depth[v] + 1
        return depth

    @property
    def depth(self) -> int:
        return max(self.depths())

    def root_distances(self) -> List[float]:
        """根からの重み付き距離"""
        dist = [0.0] * self.n
        for v in self.preorder():
            for c in self.children[v]:
                dist[c] = dist[v] + self.weight[c]
        return dist

    def subtree_sizes(self) -> List[int]:
        size = [1] * self.n
        for v in reversed(self.preorder()):
            p = self.parent[v]
            if p >= 0:
                size[p] += size[v]
        return size

    def arity(self, v: int) -> int:
        return len(self.children[v])

    @property
    def max_arity(self) -> int:
        return max(len(kids) for kids in self.children)

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (0 if v == self.root else 1)

    @property
    def max_degree(self) -> int:
        return max(self.degree(v) for v in range(self.n))

    def leaves(self) -> List[int]:
        return [v for v in range(self.n) if not self.children[v]]

    def adjacency(self) -> List[List[int]]:
        """無向隣接リスト（添字昇順）"""
        adj: List[List[int]] = [[] for _ in range(self.n)]
        for p, c, _ in self.edges():
            adj[p].append(c)
            adj[c].append(p)
        for nbrs in adj:
            nbrs.sort()
        return adj

    def path_to_root(self, v: int) -> List[int]:
        path = [v]
        while self.parent[path[-1]] != -1:
            path.append(self.parent[path[-1]])
        return path

    def edge_weight_map(self) -> Dict[Tuple[int, int], float]:
        weights = {}
        for p, c, w in self.edges():
            weights[(p, c)] = w
            weights[(c, p)] = w
        return weights

    # ------------------------------------------------------------------
    # 変形
    # ------------------------------------------------------------------
    def relabeled(self, mapping: Sequence[int], distance: Distance) -> "RootedTree":
        """
        頂点 v を mapping[v] に付け替える（子の順序は保持）

        Args:
            mapping: 0..n-1 の置換
            distance: 付け替え後の重みを与える距離関数
        """
        if sorted(mapping) != list(range(self.n)):
            raise TreeStructureError("付け替えが置換になっていません")
        kids = {mapping[v]: [mapping[c] for c in self.children[v]] for v in range(self.n)}
        return RootedTree.from_children(mapping[self.root], kids, self.n, distance)

    def rerooted(self, new_root: int) -> "RootedTree":
        """同じ辺集合を new_root から根付けし直す（子は添字昇順、重みは保持）"""
        if not 0 <= new_root < self.n:
            raise TreeStructureError(f"根が範囲外です: {new_root}")
        if new_root == self.root:
            return self
        weights = self.edge_weight_map()
        adj = self.adjacency()
        kids: Dict[int, List[int]] = {}
        seen = {new_root}
        queue = deque([new_root])
        while queue:
            v = queue.popleft()
            kids[v] = [u for u in adj[v] if u not in seen]
            seen.update(kids[v])
            queue.extend(kids[v])
        return RootedTree.from_children(new_root, kids, self.n, lambda a, b: weights[(a, b)])


# ----------------------------------------------------------------------
# ϑ-木の補助関数
# ----------------------------------------------------------------------
def theta_tree(root_coord: int, edges: Sequence[Tuple[int, int]], n: Optional[int] = None) -> RootedTree:
    """
    1 始まりの座標で与えた (親, 子) の辺から ϑ_n-木を作る

    子は座標の昇順に並ぶ。
    """
    n = n if n is not None else len(edges) + 1
    parent = [-1] * n
    for p, c in edges:
        parent[c - 1] = p - 1
    if parent[root_coord - 1] != -1:
        raise TreeStructureError(f"根 {root_coord} に親が指定されています")
    return RootedTree.from_parents(parent, theta_distance)


def theta_star(n: int, root_coord: int) -> RootedTree:
    return theta_tree(root_coord, [(root_coord, c) for c in range(1, n + 1) if c != root_coord], n)


def theta_path(n: int) -> RootedTree:
    """座標1を根とするパス 1-2-...-n"""
    return RootedTree.from_parents([-1] + list(range(n - 1)), theta_distance)


def random_tree(n: int, rng=None, distance: Distance = theta_distance) -> RootedTree:
    """ランダムな根付き木（逐次接続した木のラベルを一様に並べ替える）"""
    rng = np.random.default_rng(rng)
    shape = [-1] + [int(rng.integers(0, v)) for v in range(1, n)]
    labels = rng.permutation(n)
    parent = [-1] * n
    for v, p in enumerate(shape):
        parent[labels[v]] = int(labels[p]) if p >= 0 else -1
    return RootedTree.from_parents(parent, distance)


def tree_distance(
    tree: RootedTree,
    a: int,
    b: int,
    depth: Optional[Sequence[int]] = None,
    root_dist: Optional[Sequence[float]] = None,
) -> float:
    """木の上の重み付き距離（共通祖先まで親をたどる）"""
    depth = tree.depths() if depth is None else depth
    root_dist = tree.root_distances() if root_dist is None else root_dist
    x, y = a, b
    while depth[x] > depth[y]:
        x = tree.parent[x]
    while depth[y] > depth[x]:
        y = tree.parent[y]
    while x != y:
        x, y = tree.parent[x], tree.parent[y]
    return root_dist[a] + root_dist[b] - 2 * root_dist[x]


def prufer_edges(sequence: Sequence[int], n: int) -> List[Tuple[int, int]]:
    """Prüfer 列（長さ n-2）をラベル付き木の無向辺リストに復号する"""
    if n == 1:
        return []
    degree = [1] * n
    for v in sequence:
        degree[v] += 1
    edges = []
    leaf = degree.index(1)
    ptr = leaf
    for v in sequence:
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1 and v < ptr:
            leaf = v
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    edges.append((leaf, n - 1))
    return edges


# ----------------------------------------------------------------------
# 計測
# ----------------------------------------------------------------------
def hop_diameter(tree: RootedTree) -> int:
    """重みなし直径（最遠点を2回たどる方法）"""
    if tree.n == 1:
        return 0
    adj = tree.adjacency()

    def farthest(source: int) -> Tuple[int, int]:
        dist = [-1] * tree.n
        dist[source] = 0
        queue = deque([source])
        last = source
        while queue:
            v = queue.popleft()
            last = v
            for u in adj[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return last, dist[last]

    far, _ = farthest(tree.root)
    _, diameter = farthest(far)
    return diameter


@dataclass(frozen=True)
class LoadProfile:
    per_edge: Tuple[int, ...]
    xi: int


@dataclass(frozen=True)
class CoveringProfile:
    per_vertex: Tuple[int, ...]
    chi: int
    total: int


def load(tree: RootedTree, order) -> LoadProfile:
    """
    線形順序 L に関する木の負荷

    Args:
        tree: 全域木
        order: LinearOrder（または頂点列）

    Returns:
        L の各辺の負荷と最大値 ξ
    """
    sequence = list(getattr(order, "order", order))
    if sorted(sequence) != list(range(tree.n)):
        raise TreeStructureError(f"線形順序と木の頂点集合が一致しません (n={tree.n}, |L|={len(sequence)})")
    if tree.n == 1:
        return LoadProfile(per_edge=(), xi=0)

    position = np.empty(tree.n, dtype=np.int64)
    position[np.asarray(sequence, dtype=np.int64)] = np.arange(tree.n)
    child = np.asarray([v for v in range(tree.n) if v != tree.root], dtype=np.int64)
    par = np.asarray([tree.parent[v] for v in child], dtype=np.int64)
    lo = np.minimum(position[child], position[par])
    hi = np.maximum(position[child], position[par])

    diff = np.zeros(tree.n, dtype=np.int64)
    np.add.at(diff, lo, 1)
    np.add.at(diff, hi, -1)
    per_edge = np.cumsum(diff)[: tree.n - 1]
    return LoadProfile(per_edge=tuple(int(x) for x in per_edge), xi=int(per_edge.max()))


def covering(tree: RootedTree) -> CoveringProfile:
    """
    ϑ-木の被覆 χ(v)（辺 (i,j) が i < v < j を満たす v を被覆する）

    Returns:
        頂点ごとの被覆、最大値 χ(T)、総和 Σχ(v)
    """
    n = tree.n
    if n == 1:
        return CoveringProfile(per_vertex=(0,), chi=0, total=0)
    child = np.asarray([v for v in range(n) if v != tree.root], dtype=np.int64)
    par = np.asarray([tree.parent[v] for v in child], dtype=np.int64)
    lo = np.minimum(child, par)
    hi = np.maximum(child, par)

    diff = np.zeros(n + 1, dtype=np.int64)
    np.add.at(diff, lo + 1, 1)
    np.add.at(diff, hi, -1)
    per_vertex = np.cumsum(diff)[:n]
    return CoveringProfile(
        per_vertex=tuple(int(x) for x in per_vertex),
        chi=int(per_vertex.max()),
        total=int(per_vertex.sum()),
    )


def min_star_covering(n: int) -> int:
    """深さ1の ϑ_n-木（スター）の最小被覆 χ(n,1) を全ての根について評価する"""
    if n <= 2:
        return 0
    return min(covering(theta_star(n, m)).chi for m in range(1, n + 1))


def measure(tree: RootedTree, metric=None, order=None) -> TreeMetrics:
    """
    木の計測値をまとめて計算する

    Args:
        tree: 計測する木
        metric: MetricSpace（None なら ϑ_n とみなす）
        order: LinearOrder（指定時のみ負荷を計算）

    Returns:
        TreeMetrics
    """
    if metric is not None and metric.n != tree.n:
        raise TreeStructureError(f"木が距離空間を張っていません (木 {tree.n}, 空間 {metric.n})")

    is_theta = metric is None or metric.kind == "line"
    mst_weight = float(tree.n - 1) if metric is None else float(metric.mst_weight())
    weight = float(tree.total_weight)
    lightness = weight / mst_weight if mst_weight > 0 else 1.0

    metrics = TreeMetrics(
        n=tree.n,
        depth=tree.depth,
        hop_diameter=hop_diameter(tree),
        weight=weight,
        mst_weight=mst_weight,
        lightness=lightness,
        load=load(tree, order).xi if order is not None else None,
        max_covering=covering(tree).chi if is_theta else None,
        max_arity=tree.max_arity,
        max_degree=tree.max_degree,
    )
    logger.debug(f"計測完了: {metrics}")
    return metrics


# ----------------------------------------------------------------------
# テキスト形式の入出力
# ----------------------------------------------------------------------
def format_tree(tree: RootedTree) -> str:
    lines = [f"root {tree.root}"]
    lines.extend(f"{p} {c} {w:.12g}" for p, c, w in tree.edges())
    return "\n".join(lines) + "\n"


def parse_tree(text: str, distance: Optional[Distance] = None) -> RootedTree:
    """
    `root R` 行と `parent child weight` 行から木を読む

    distance を渡すと重みは距離関数から再計算される。
    """
    root = None
    kids: Dict[int, List[int]] = {}
    weights: Dict[Tuple[int, int], float] = {}
    vertices = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "root":
                root = int(parts[1])
                vertices.add(root)
                continue
            p, c = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) > 2 else None
        except (IndexError, ValueError) as e:
            raise TreeStructureError(f"{lineno} 行目を解釈できません: {raw!r}") from e
        kids.setdefault(p, []).append(c)
        vertices.update((p, c))
        if w is not None:
            weights[(p, c)] = w
    if root is None:
        raise TreeStructureError("root 行がありません")

    if distance is None:
        if len(weights) != len(vertices) - 1:
            raise TreeStructureError("重みのない辺があります（距離空間を指定してください）")
        distance = lambda a, b: weights[(a, b)]
    return RootedTree.from_children(root, kids, len(vertices), distance)


def write_tree(tree: RootedTree, path: Union[str, Path]) -> None:
    Path(path).write_text(format_tree(tree), encoding="utf-8")
    logger.info(f"木を書き出しました: {path}")


def read_tree(path: Union[str, Path], distance: Optional[Distance] = None) -> RootedTree:
    return parse_tree(Path(path).read_text(encoding="utf-8"), distance)
