"""
距離空間の表現・検証・MST・ハミルトンパス（MSTのショートカット）を扱うモジュール
"""
import itertools
import logging
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from config import TOLERANCE
from tree_model import RootedTree, prufer_edges

# ロギングの設定
logger = logging.getLogger(__name__)

MetricKind = Literal["line", "euclidean", "matrix"]
Violation = Tuple[str, Tuple[int, ...]]

_LINE_SHORTHAND = re.compile(r"^line[_ ]+(\d+)$")


class MetricError(ValueError):
    """距離空間の入力が不正な場合の例外クラス"""
    pass


class MetricValidationError(MetricError):
    """距離の公理に違反している場合の例外クラス（violations に違反箇所を保持）"""

    def __init__(self, message: str, violations: List[Violation]):
        super().__init__(message)
        self.violations = violations


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """
    有限距離空間

    line は ϑ_n（頂点 k が座標 k+1）で距離は整数。
    euclidean と matrix は 64bit 浮動小数点の距離行列を持つ。
    """
    n: int
    kind: MetricKind
    coords: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None

    @property
    def dim(self) -> Optional[int]:
        return None if self.coords is None else int(self.coords.shape[1])

    def dist(self, i: int, j: int) -> Union[int, float]:
        if self.kind == "line":
            return abs(i - j)
        return float(self.matrix[i, j])

    def distance_matrix(self) -> np.ndarray:
        if self.kind == "line":
            idx = np.arange(self.n, dtype=np.int64)
            return np.abs(np.subtract.outer(idx, idx))
        return self.matrix

    @cached_property
    def _mst(self) -> RootedTree:
        return minimum_spanning_tree(self)

    def mst_weight(self) -> float:
        if self.kind == "line":
            return self.n - 1
        return self._mst.total_weight

    def __repr__(self) -> str:
        return f"MetricSpace(n={self.n}, kind={self.kind!r})"


@dataclass(frozen=True)
class LinearOrder:
    """ハミルトンパス L = (v_1, ..., v_n) と隣接頂点間の距離"""
    order: Tuple[int, ...]
    edge_weights: Tuple[float, ...]

    @classmethod
    def from_sequence(cls, order: Sequence[int], metric: MetricSpace) -> "LinearOrder":
        order = tuple(int(v) for v in order)
        if sorted(order) != list(range(metric.n)):
            raise MetricError(f"線形順序が頂点集合の置換になっていません (n={metric.n})")
        weights = tuple(metric.dist(a, b) for a, b in zip(order, order[1:]))
        return cls(order=order, edge_weights=weights)

    @property
    def total_weight(self) -> float:
        return sum(self.edge_weights)

    def position(self) -> List[int]:
        """頂点 -> L 上の位置（0 始まり）"""
        pos = [0] * len(self.order)
        for q, v in enumerate(self.order):
            pos[v] = q
        return pos

    def __len__(self) -> int:
        return len(self.order)


# ----------------------------------------------------------------------
# 生成
# ----------------------------------------------------------------------
def line_metric(n: int) -> MetricSpace:
    """ϑ_n を返す"""
    if n < 1:
        raise MetricError(f"頂点数は1以上が必要です: {n}")
    return MetricSpace(n=n, kind="line")


def euclidean_metric(points) -> MetricSpace:
    coords = np.asarray(points, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[0] < 1:
        raise MetricError(f"座標配列の形が不正です: {coords.shape}")
    if not np.all(np.isfinite(coords)):
        raise MetricError("座標に有限でない値が含まれています")
    diff = coords[:, None, :] - coords[None, :, :]
    matrix = np.sqrt((diff * diff).sum(axis=-1))
    return MetricSpace(n=coords.shape[0], kind="euclidean", coords=coords, matrix=matrix)


def matrix_metric(matrix, validate_axioms: bool = True) -> MetricSpace:
    """
    距離行列から距離空間を作る

    Args:
        matrix: n×n の距離行列
        validate_axioms: True なら距離の公理を検証し、違反があれば例外を送出する
    """
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] < 1:
        raise MetricError(f"距離行列が正方行列ではありません: {data.shape}")
    space = MetricSpace(n=data.shape[0], kind="matrix", matrix=data)
    if validate_axioms:
        violations = validate(space)
        if violations:
            kind, where = violations[0]
            human = tuple(v + 1 for v in where)
            logger.error(f"距離行列の検証に失敗しました: {len(violations)} 件（最初の違反: {kind} {human}）")
            raise MetricValidationError(
                f"距離の公理に違反しています: {kind} at {human}（1始まり）ほか {len(violations) - 1} 件",
                violations,
            )
    return space


def random_euclidean(n: int, dim: int = 2, rng=None) -> MetricSpace:
    """単位超立方体内の一様乱数点による距離空間"""
    rng = np.random.default_rng(rng)
    return euclidean_metric(rng.random((n, dim)))


def star_metric(k: int) -> MetricSpace:
    """中心 0 と k 枚の葉（中心から距離1、葉同士は距離2）"""
    if k < 1:
        raise MetricError(f"葉の数は1以上が必要です: {k}")
    matrix = np.full((k + 1, k + 1), 2.0)
    matrix[0, :] = 1.0
    matrix[:, 0] = 1.0
    np.fill_diagonal(matrix, 0.0)
    return matrix_metric(matrix)


# ----------------------------------------------------------------------
# 検証
# ----------------------------------------------------------------------
def validate(metric: MetricSpace, tolerance: float = TOLERANCE) -> List[Violation]:
    """
    距離の公理を検証し、違反箇所を全て返す

    Returns:
        (種類, 頂点の組) のリスト。種類は nonfinite / negative / diagonal / symmetry / triangle
    """
    if metric.kind == "line":
        return []
    D = metric.distance_matrix()
    violations: List[Violation] = []

    # NaN や inf は比較が成り立たないので、残りの公理は調べない
    for i, j in zip(*np.nonzero(~np.isfinite(D))):
        violations.append(("nonfinite", (int(i), int(j))))
    if violations:
        return violations

    for i, j in zip(*np.nonzero(D < 0)):
        violations.append(("negative", (int(i), int(j))))
    for i in np.nonzero(np.abs(np.diag(D)) > tolerance)[0]:
        violations.append(("diagonal", (int(i),)))
    for i, j in zip(*np.nonzero(np.abs(D - D.T) > tolerance)):
        if i < j:
            violations.append(("symmetry", (int(i), int(j))))

    # 中継点 j ごとに D[i,k] > D[i,j] + D[j,k] を一括判定
    for j in range(metric.n):
        via = D[:, j][:, None] + D[j, :][None, :]
        bad_i, bad_k = np.nonzero(D > via + tolerance)
        for i, k in zip(bad_i, bad_k):
            if i < k and j not in (i, k):
                violations.append(("triangle", (int(i), int(j), int(k))))

    violations.sort(key=lambda item: (item[0] != "triangle", item[1]))
    return violations


# ----------------------------------------------------------------------
# 入力
# ----------------------------------------------------------------------
def parse_metric(text: str) -> MetricSpace:
    """
    テキスト形式の距離空間を読む

    `line N` / `points D` + N 行 / `matrix N` + N 行 の3形式。
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MetricError("入力が空です")

    header = lines[0].split()
    tag = header[0].lower()
    try:
        size = int(header[1])
    except (IndexError, ValueError) as e:
        raise MetricError(f"ヘッダを解釈できません: {lines[0]!r}") from e

    try:
        rows = [[float(x) for x in ln.split()] for ln in lines[1:]]
    except ValueError as e:
        raise MetricError(f"数値を解釈できません: {e}") from e

    if tag == "line":
        return line_metric(size)
    if tag == "points":
        if not rows or any(len(r) != size for r in rows):
            raise MetricError(f"各点は {size} 次元の座標が必要です")
        return euclidean_metric(rows)
    if tag == "matrix":
        if len(rows) != size or any(len(r) != size for r in rows):
            raise MetricError(f"{size}×{size} の距離行列が必要です")
        return matrix_metric(rows)
    raise MetricError(f"未知の形式です: {tag}")


def load_metric(source: Union[str, Path]) -> MetricSpace:
    """ファイル、または `line_N` / `line N` の省略記法から距離空間を読む"""
    path = Path(source)
    if path.is_file():
        metric = parse_metric(path.read_text(encoding="utf-8"))
        logger.info(f"距離空間を読み込みました: {path} (n={metric.n}, kind={metric.kind})")
        return metric
    match = _LINE_SHORTHAND.match(str(source).strip())
    if match:
        return line_metric(int(match.group(1)))
    raise MetricError(f"距離空間の入力が見つかりません: {source}")


# ----------------------------------------------------------------------
# MST とハミルトンパス
# ----------------------------------------------------------------------
def minimum_spanning_tree(metric: MetricSpace, root: int = 0) -> RootedTree:
    """
    完全グラフ上の MST（密グラフ向け O(n^2) の Prim 法）

    同じ重みの辺は (重み, min(i,j), max(i,j)) の辞書順で比較する。
    辺の全順序が一意な MST を決めるので、辞書順最小の辺から取る Kruskal 法と同じ木になる。

    Args:
        metric: 距離空間
        root: 返す木の根

    Returns:
        子を添字昇順に並べた RootedTree
    """
    n = metric.n
    if not 0 <= root < n:
        raise MetricError(f"根が範囲外です: {root}")
    if metric.kind == "line":
        parent = [-1] + list(range(n - 1))
        return RootedTree.from_parents(parent, metric.dist).rerooted(root)

    D = metric.distance_matrix()
    idx = np.arange(n)
    in_tree = np.zeros(n, dtype=bool)
    key_w = np.full(n, np.inf)
    key_a = np.full(n, n, dtype=np.int64)
    key_b = np.full(n, n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)

    u = 0
    for _ in range(n):
        in_tree[u] = True
        new_w = D[u]
        new_a = np.minimum(idx, u)
        new_b = np.maximum(idx, u)
        better = (new_w < key_w) | (
            (new_w == key_w) & ((new_a < key_a) | ((new_a == key_a) & (new_b < key_b)))
        )
        better &= ~in_tree
        key_w[better] = new_w[better]
        key_a[better] = new_a[better]
        key_b[better] = new_b[better]
        parent[better] = u

        outside = np.nonzero(~in_tree)[0]
        if outside.size == 0:
            break
        best = np.lexsort((key_b[outside], key_a[outside], key_w[outside]))[0]
        u = int(outside[best])

    tree = RootedTree.from_parents([int(p) for p in parent], metric.dist)
    logger.debug(f"MST を計算しました: n={n}, weight={tree.total_weight:.6g}")
    return tree.rerooted(root)


def hamiltonian_path(metric: MetricSpace, mst: RootedTree, start: Optional[int] = None) -> LinearOrder:
    """
    MST のオイラーツアーで初出の頂点だけを残したハミルトンパス

    start を根として子を添字昇順に訪問する（先行順）。
    三角不等式より ω(L) ≤ 2·ω(MST)。
    """
    if mst.n != metric.n:
        raise MetricError(f"MST が距離空間を張っていません (木 {mst.n}, 空間 {metric.n})")
    start = mst.root if start is None else start
    if not 0 <= start < metric.n:
        raise MetricError(f"開始頂点が範囲外です: {start}")
    return LinearOrder.from_sequence(mst.rerooted(start).preorder(), metric)


def rotated_order(order: LinearOrder, metric: MetricSpace, vertex: int, position: int) -> LinearOrder:
    """
    L を閉路とみなして回転し、vertex が position 番目に来るようにする

    ショートカットの閉路は ω ≤ 2·ω(MST) なので、1辺を除いた回転後のパスも同じ上限を満たす。
    """
    n = len(order)
    if not 0 <= position < n:
        raise MetricError(f"位置が範囲外です: {position} (n={n})")
    if not 0 <= vertex < n:
        raise MetricError(f"頂点が範囲外です: {vertex}")
    shift = order.position()[vertex] - position
    seq = [order.order[(q + shift) % n] for q in range(n)]
    return LinearOrder.from_sequence(seq, metric)


def spanning_tree_weight_bruteforce(metric: MetricSpace) -> float:
    """Prüfer 列の全列挙による最小全域木の重み（n ≤ 7 向けの検算用）"""
    n = metric.n
    if n <= 1:
        return 0.0
    if n == 2:
        return float(metric.dist(0, 1))
    best = np.inf
    for seq in itertools.product(range(n), repeat=n - 2):
        weight = sum(metric.dist(a, b) for a, b in prufer_edges(seq, n))
        best = min(best, weight)
    return float(best)
