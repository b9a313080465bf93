"""
コマンドラインのフロントエンド

build / sllt / normalize / metrics / oracle / tradeoff / hardgraph / selftest
"""
import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, List, Optional

from bound_oracle import (
    analytic_bounds,
    exhaustive_min,
    exhaustive_min_cost,
    greedy_hamming_cost,
    hard_graph_scan,
    min_hamming_cost,
    tradeoff_table,
)
from config import DEFAULT_SEED, DEFAULT_THETA, DEV_MODE, LOG_FORMAT, LOG_LEVEL, REPORT_DIGITS, REPORT_SCHEMA
from invariants import (
    check,
    failed,
    llt_checks,
    metric_checks,
    normalize_checks,
    oracle_checks,
    selftest_suite,
    sllt_checks,
    theta_tree_checks,
    tree_checks,
)
from llt_builder import build_llt, load_cap
from metric_core import LinearOrder, hamiltonian_path, load_metric, minimum_spanning_tree
from schemas import RunReport
from sllt_builder import build_sllt, root_distance_ratios
from tree_model import measure, read_tree, write_tree
from tree_normalize import NormalizationError, deepen, four_extension, to_binary

logger = logging.getLogger("llt")

_QUIET_ARGS = ("func", "verbose", "timing", "report", "out")


def _round(value: Any) -> Any:
    """浮動小数点数を有効桁 REPORT_DIGITS に丸める（レポートを決定的にするため）"""
    if isinstance(value, float):
        return float(f"{value:.{REPORT_DIGITS}g}")
    if isinstance(value, dict):
        return {str(k): _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def write_report(report: RunReport, path: Optional[str]) -> None:
    text = json.dumps(_round(report.model_dump(by_alias=True)), indent=2, sort_keys=True, ensure_ascii=False)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
        logger.info(f"レポートを保存しました: {path}")
    else:
        sys.stdout.write(text + "\n")


def _inputs(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _QUIET_ARGS}


# ----------------------------------------------------------------------
# サブコマンド
# ----------------------------------------------------------------------
def cmd_build(args: argparse.Namespace) -> RunReport:
    metric = load_metric(args.input)
    result = build_llt(metric, args.h, args.root)
    checks = llt_checks(result, metric) + metric_checks(metric, result.order)
    if metric.kind == "line":
        checks += theta_tree_checks(result.tree)
    if args.out:
        write_tree(result.tree, args.out)
    return RunReport(
        command="build", inputs=_inputs(args), plan=result.plan,
        metrics=measure(result.tree, metric, result.order), bound_checks=checks,
    )


def cmd_sllt(args: argparse.Namespace) -> RunReport:
    metric = load_metric(args.input)
    llt = build_llt(metric, args.h, args.root)
    rt = llt.tree.root
    result = build_sllt(llt.tree, metric, rt, args.theta)
    if args.out:
        write_tree(result.tree, args.out)
    ratios = root_distance_ratios(result.tree, metric, rt)
    return RunReport(
        command="sllt", inputs=_inputs(args), plan=llt.plan,
        metrics=measure(result.tree, metric),
        bound_checks=llt_checks(llt, metric) + sllt_checks(result, metric, llt.plan.h),
        extra={
            "source_metrics": measure(result.source, metric, llt.order).model_dump(),
            "breakpoints": list(result.breakpoints.points),
            "star_edges": len(result.breakpoints.star_edges),
            "root_distance_ratios": {str(v): r for v, r in sorted(ratios.items())},
        },
    )


def cmd_normalize(args: argparse.Namespace) -> RunReport:
    metric = load_metric(args.metric)
    tree = read_tree(args.input, metric.dist)
    if args.mode == "4ary":
        out = four_extension(tree, metric)
        checks = normalize_checks(tree, out, "4ary")
    elif args.mode == "binary":
        out = to_binary(tree, metric)
        checks = normalize_checks(tree, out, "composite")
    else:
        if metric.kind != "line":
            raise NormalizationError("deepen は ϑ_n（line 形式）の木にだけ適用できます")
        out = deepen(tree)
        checks = normalize_checks(tree, out, "deepen")
    if args.out:
        write_tree(out, args.out)
    return RunReport(
        command="normalize", inputs=_inputs(args), metrics=measure(out, metric), bound_checks=checks,
        extra={"input_metrics": measure(tree, metric).model_dump()},
    )


def cmd_metrics(args: argparse.Namespace) -> RunReport:
    metric = load_metric(args.metric)
    tree = read_tree(args.input, metric.dist)
    order = None
    checks = tree_checks(tree)
    if args.order is not None:
        mst = minimum_spanning_tree(metric)
        order = hamiltonian_path(metric, mst, args.order)
        checks += metric_checks(metric, order, mst)
    elif metric.kind == "line":
        order = LinearOrder.from_sequence(range(metric.n), metric)
    if metric.kind == "line":
        checks += theta_tree_checks(tree)
    return RunReport(command="metrics", inputs=_inputs(args), metrics=measure(tree, metric, order),
                     bound_checks=checks)


def cmd_oracle(args: argparse.Namespace) -> RunReport:
    n, h = args.n, args.h
    extra: dict = {}
    if args.stat in ("weight", "covering", "binary"):
        extra["value"] = exhaustive_min(n, h, args.stat, args.cap)
    elif args.stat == "cost":
        extra["value"] = exhaustive_min_cost(n, h, args.cap)
        extra["hamming"] = min_hamming_cost(n, h).value
    else:
        hc = min_hamming_cost(n, h)
        extra.update(value=hc.value, r=hc.r, remainder=hc.remainder, greedy=greedy_hamming_cost(n, h))

    checks = []
    if n >= 2 and 1 <= h <= n - 1:
        extra["bounds"] = [dict(r.model_dump(), holds=r.holds) for r in analytic_bounds(n, h)]
        checks = oracle_checks(n, h)
    if args.stat == "hamming":
        checks.append(check("hamming: closed form = greedy", extra["value"], extra["greedy"], "=="))
    if args.stat == "cost" and extra["value"] is not None:
        checks.append(check("mono: H(n,h) ≤ R(n,h)", extra["hamming"], extra["value"]))
    return RunReport(command="oracle", inputs=_inputs(args), bound_checks=checks, extra=extra)


def cmd_tradeoff(args: argparse.Namespace) -> RunReport:
    rows = tradeoff_table(args.n)
    fields = list(rows[0].model_dump().keys()) if rows else []
    target = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(target, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow(_round(row.model_dump()))
    finally:
        if args.out:
            target.close()
            logger.info(f"トレードオフ表を保存しました: {args.out}")
    checks = [check(f"tradeoff-load(h={r.h}): ξ ≤ cap({r.regime})", r.construction_load, load_cap(r.n, r.h))
              for r in rows]
    checks += [check(f"tradeoff-weight(h={r.h}): ω(T) ≥ W(n,h)", r.construction_weight, r.exhaustive_weight, ">=")
               for r in rows if r.exhaustive_weight is not None]
    return RunReport(command="tradeoff", inputs=_inputs(args), bound_checks=checks, extra={"rows": len(rows)})


def cmd_hardgraph(args: argparse.Namespace) -> RunReport:
    scan = hard_graph_scan(args.n, args.W, args.cap)
    checks = [check("hard-graph: ω(MST) = n - 2 + W", scan.mst_weight, args.n - 2 + args.W, "==")]
    if 1 in scan.min_diameter_by_star_edges:
        checks.append(check("hard-graph: one star edge forces Λ ≥ n - 2",
                            scan.min_diameter_by_star_edges[1], args.n - 2, ">="))
    return RunReport(command="hardgraph", inputs=_inputs(args), bound_checks=checks, extra=scan.model_dump())


def cmd_selftest(args: argparse.Namespace) -> RunReport:
    checks = selftest_suite(args.seed, args.full)
    return RunReport(command="selftest", inputs=_inputs(args), bound_checks=checks)


# ----------------------------------------------------------------------
# 引数の解析
# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", help="JSON レポートの出力先（省略時は標準出力）")
    common.add_argument("--verbose", "-v", action="store_true", help="DEBUG ログを出す")
    common.add_argument("--timing", action="store_true", help="実行時間をレポートに含める")

    parser = argparse.ArgumentParser(prog="llt", description="低深さ・軽量全域木の構築と下界の検証")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="LLT を構築する")
    p.add_argument("--input", required=True, help="距離空間のファイル、または line_N")
    p.add_argument("--h", type=int, required=True, help="深さの上限")
    p.add_argument("--root", type=int, default=None, help="木の根にする頂点")
    p.add_argument("--out", help="木の出力先")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sllt", parents=[common], help="LLT を作ってから S(T) を適用する")
    p.add_argument("--input", required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--root", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sllt)

    p = sub.add_parser("normalize", parents=[common], help="4分木化・二分木化・深さの増加")
    p.add_argument("--input", required=True, help="木のファイル")
    p.add_argument("--metric", required=True)
    p.add_argument("--mode", choices=["4ary", "binary", "deepen"], required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("metrics", parents=[common], help="木の計測値")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--order", type=int, default=None, help="ハミルトンパスの開始頂点（負荷を計算する）")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("oracle", parents=[common], help="全列挙による最小値と解析的下界")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--stat", choices=["weight", "covering", "binary", "cost", "hamming"], default="weight")
    p.add_argument("--cap", type=int, default=None, help="全列挙の上限（LLT_ENUM_CAP / LLT_BINARY_CAP と同じ）")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("tradeoff", parents=[common], help="深さと負荷のトレードオフ表（CSV）")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", help="CSV の出力先（省略時は標準出力）")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("hardgraph", parents=[common], help="パス ∪ スターの全域木走査")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--W", type=int, default=100)
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(func=cmd_hardgraph)

    p = sub.add_parser("selftest", parents=[common], help="性質テスト一式")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--full", action="store_true", help="n = 8 の全列挙、n ≤ 4096 の平衡木、N ≤ 5000 の全てのパスまで調べる")
    p.set_defaults(func=cmd_selftest)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """
    コマンドを実行して終了コードを返す

    Returns:
        0: 全てのチェックが成立、1: 不等式の不成立、2: 使い方・入力の誤り
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    # ロギング設定（標準エラー出力）
    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(logging.DEBUG if args.verbose or DEV_MODE else LOG_LEVEL)

    started = time.perf_counter()
    try:
        report = args.func(args)
    except ValueError as e:
        logger.error(f"{args.command} を実行できません: {str(e)}")
        return 2
    except OSError as e:
        logger.error(f"ファイルの入出力に失敗しました: {str(e)}")
        return 2

    if args.timing:
        report.timing = time.perf_counter() - started
    report.schema_version = REPORT_SCHEMA
    write_report(report, args.report)

    for c in failed(report.bound_checks):
        logger.error(f"不成立: {c.name} ({c.lhs} {c.relation} {c.rhs})")
    return 0 if report.passed else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
