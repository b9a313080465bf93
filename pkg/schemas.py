# schemas.py
from pydantic import BaseModel, Field
from typing import Any, Dict, List, Literal, Optional

# 木の計測値
class TreeMetrics(BaseModel):
    n: int
    depth: int
    hop_diameter: int
    weight: float
    mst_weight: float
    lightness: float
    load: Optional[int] = None
    max_covering: Optional[int] = None
    max_arity: int
    max_degree: int

# LLT 構築計画
class ConstructionPlan(BaseModel):
    regime: Literal["low", "mid", "high", "path"]
    n: int
    h: int
    xi: Optional[int] = None
    d: Optional[int] = None
    template_size: int
    template_root: int

# 不等式チェック（レポート用）
class BoundCheck(BaseModel):
    name: str
    lhs: float
    rhs: float
    relation: Literal["<=", "<", ">=", ">", "=="] = "<="
    holds: bool

# 下界の評価結果
class BoundReport(BaseModel):
    n: int
    h: int
    bound_kind: Literal["majort-part1", "majort-part2", "work-covering", "degree", "covering-prop"]
    analytic_bound: float
    exhaustive_value: Optional[float] = None
    strict: bool = False
    vacuous: bool

    @property
    def holds(self) -> Optional[bool]:
        if self.exhaustive_value is None:
            return None
        if self.strict:
            return self.exhaustive_value > self.analytic_bound
        return self.exhaustive_value >= self.analytic_bound

# トレードオフ表の1行
class TradeoffRow(BaseModel):
    n: int
    h: int
    regime: str
    construction_load: int
    construction_weight: float
    lower_bound: Optional[float] = None
    lower_bound_kind: Optional[str] = None
    exhaustive_weight: Optional[int] = None

# 難しいグラフ（パス ∪ スター）の全探索結果
class HardGraphReport(BaseModel):
    n: int
    W: int
    spanning_trees: int
    mst_weight: int
    min_product: float
    min_product_star_edges: int
    min_diameter_by_star_edges: Dict[int, int]

# 実行レポート
class RunReport(BaseModel):
    schema_version: int = Field(1, alias="schema")
    command: str
    inputs: Dict[str, Any] = {}
    plan: Optional[ConstructionPlan] = None
    metrics: Optional[TreeMetrics] = None
    bound_checks: List[BoundCheck] = []
    extra: Dict[str, Any] = {}
    timing: Optional[float] = None

    model_config = {"populate_by_name": True}

    @property
    def passed(self) -> bool:
        return all(check.holds for check in self.bound_checks)
