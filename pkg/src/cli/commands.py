"""
qcert 命令行

子命令: solve, certify, verify-pair, lemma-audit, mesh-quality, refine,
multistart, pipeline, validate-constants, estimate-constants。

退出码: 0 通过/收敛; 1 未通过; 2 定理不适用; 3 输入输出或配置错误。
"""
import argparse
import logging
import sys
from typing import Callable

import numpy as np
import yaml
from pydantic import ValidationError

from src.certificate.conditions import certify
from src.certificate.report import BoundMode, CertificateReport, Theorem, TheoremInapplicableError
from src.certificate.stieltjes import stieltjes_check
from src.cli.experiments import cmd_multistart, cmd_pipeline
from src.cli.models import ExitCode, RunConfig, SolveReport
from src.fem.assembly import assemble_semilinear_system
from src.fem.field import random_field, zero_field
from src.fem.newton import SolverError, solve_newton
from src.fem.quadrature import AssemblyError
from src.mesh.geometry import mesh_quality
from src.mesh.model import Mesh, MeshError, with_neumann_psi
from src.mesh.refine import refine_uniform
from src.oracle.checks import OracleError, partition_elements, verify_pair
from src.oracle.lemmas import lemma_bound_check
from src.problem.catalog import CoefficientError
from src.problem.constants import ConstantsEstimationError, estimate_constants, validate_constants
from src.problem.definition import Problem, ProblemDefinitionError, load_problem
from src.storage.field_file import load_field, save_field
from src.storage.mesh_file import load_mesh, save_mesh
from src.storage.report_file import write_csv, write_report
from src.utils.config import get_config, init_config
from src.utils.log import setup_logging

logger = logging.getLogger(__name__)

THEOREM_ALIASES = {
    "1d": Theorem.COMPARISON_1D,
    "2d": Theorem.COMPARISON_2D,
    "2d-relg": Theorem.COMPARISON_2D_RELATIVE_G,
    "semi-energy": Theorem.SEMILINEAR_ENERGY,
    "semi-stieltjes": Theorem.SEMILINEAR_STIELTJES,
    # 兼容旧脚本的别名
    "semi-5.1": Theorem.SEMILINEAR_ENERGY,
    "semi-5.2": Theorem.SEMILINEAR_STIELTJES,
}

BOUND_ALIASES = {
    "corrected": BoundMode.CORRECTED,
    "original": BoundMode.ORIGINAL,
    "paper": BoundMode.ORIGINAL,
}

# 映射为退出码 3 的错误
INPUT_ERRORS = (
    OSError,
    MeshError,
    ProblemDefinitionError,
    CoefficientError,
    ConstantsEstimationError,
    AssemblyError,
    OracleError,
    ValidationError,
    ValueError,
)


# ==================== 公共 ====================

def _theorem(value: str | None) -> Theorem | None:
    return THEOREM_ALIASES[value] if value is not None else None


def _bound_mode(value: str | None) -> BoundMode | None:
    return BOUND_ALIASES[value] if value is not None else None


def _load_inputs(problem_path: str, mesh_path: str) -> tuple[Problem, Mesh]:
    """读取问题与网格; 问题给出 neumann_psi 时覆盖网格中的 Neumann 数据"""
    problem = load_problem(problem_path)
    mesh = load_mesh(mesh_path)
    if problem.neumann_psi is not None:
        mesh = with_neumann_psi(mesh, problem.neumann_psi)
    return problem, mesh


def _emit(report, output: str | None) -> None:
    text = write_report(report, output)
    if output is None:
        print(text)


def _certificate_code(report: CertificateReport) -> ExitCode:
    if not report.applicable:
        return ExitCode.INAPPLICABLE
    return ExitCode.PASS if report.global_pass else ExitCode.FAIL


def _run_config(args: argparse.Namespace, **inputs: str | None) -> RunConfig:
    return RunConfig(
        subcommand=args.command,
        inputs={k: str(v) for k, v in inputs.items() if v is not None},
        tol=getattr(args, "tol", None),
        max_iter=getattr(args, "max_iter", None),
        seed=getattr(args, "seed", None),
        starts=getattr(args, "starts", None),
        theorem=_theorem(getattr(args, "theorem", None)),
        bound_mode=_bound_mode(getattr(args, "cw", None)),
        output=getattr(args, "output", None),
    )


# ==================== 子命令 ====================

def cmd_solve(args: argparse.Namespace) -> ExitCode:
    problem, mesh = _load_inputs(args.problem, args.mesh)
    solver = get_config().solver.model_copy(update={
        k: v for k, v in {"tol": args.tol, "max_iter": args.max_iter}.items() if v is not None
    })
    u0 = None
    if args.u0:
        u0 = load_field(args.u0, mesh)
    elif args.seed is not None:
        u0 = random_field(mesh, get_config().multistart.box, np.random.default_rng(args.seed))

    result = solve_newton(problem.model, mesh, solver, u0=u0)
    if args.output:
        save_field(result.field, args.output)
    report = SolveReport(
        run=_run_config(args, problem=args.problem, mesh=args.mesh, u0=args.u0),
        converged=result.converged,
        iterations=result.iterations,
        residual_norm=result.residual_norm,
        n_vertices=mesh.n_vertices,
    )
    _emit(report, args.report)
    return ExitCode.PASS if result.converged else ExitCode.FAIL


def cmd_certify(args: argparse.Namespace) -> ExitCode:
    problem, mesh = _load_inputs(args.problem, args.mesh)
    theorem = _theorem(args.theorem)
    field = load_field(args.solution, mesh) if args.solution else None
    bundle = problem.resolve_bundle(mesh.dim)
    try:
        report = certify(theorem, mesh, bundle, field, _bound_mode(args.cw))
    except TheoremInapplicableError as e:
        logger.warning(f"定理不适用: {e}")
        return ExitCode.INAPPLICABLE
    if theorem is Theorem.SEMILINEAR_STIELTJES and args.check_matrix:
        # 未给出解时在零场上组装
        at = field if field is not None else zero_field(mesh)
        verdict = stieltjes_check(assemble_semilinear_system(problem.model, mesh, at, at).system)
        logger.info(f"组装矩阵 Stieltjes 检验: {verdict.is_stieltjes}")
        report = report.model_copy(update={"matrix_check": verdict})
    _emit(report, args.output)
    if report.matrix_check is not None and not report.matrix_check.is_stieltjes:
        if report.global_pass:
            logger.warning("单元条件通过但组装矩阵不是 Stieltjes 矩阵, 请检查常数包")
        return ExitCode.FAIL
    return _certificate_code(report)


def cmd_verify_pair(args: argparse.Namespace) -> ExitCode:
    problem, mesh = _load_inputs(args.problem, args.mesh)
    u1 = load_field(args.sol1, mesh)
    u2 = load_field(args.sol2, mesh)
    verdict = verify_pair(problem.model, mesh, u1, u2, args.tol)
    _emit(verdict, args.output)
    return ExitCode.PASS if verdict.is_subsolution and verdict.is_supersolution else ExitCode.FAIL


LEMMA_HEADER = [
    "id", "w_i", "w_j", "w_k",
    "diffusion_lhs", "diffusion_rhs",
    "eta_lhs", "eta_rhs",
    "reaction_lhs", "reaction_rhs",
    "total_lhs", "total_rhs", "holds",
]


def cmd_lemma_audit(args: argparse.Namespace) -> ExitCode:
    problem, mesh = _load_inputs(args.problem, args.mesh)
    u1 = load_field(args.sol1, mesh)
    u2 = load_field(args.sol2, mesh)
    bundle = problem.resolve_bundle(mesh.dim)
    bound_mode = _bound_mode(args.cw)

    rows = []
    all_hold = True
    for elem in partition_elements(u1 - u2).t_c:
        audit = lemma_bound_check(
            problem.model, mesh, u1, u2, elem, bundle, bound_mode, relative_g=args.relative_g
        )
        holds = all(audit.holds().values())
        all_hold = all_hold and holds
        w = audit.w_values + [None] * (3 - len(audit.w_values))
        rows.append([
            audit.elem, *w,
            audit.diffusion_lhs, audit.diffusion_rhs,
            audit.eta_lhs, audit.eta_rhs,
            audit.reaction_lhs, audit.reaction_rhs,
            audit.total_lhs, audit.total_rhs, holds,
        ])
    write_csv(LEMMA_HEADER, rows, args.output)
    logger.info(f"引理核验: {len(rows)} 个 t_c 单元, {'全部成立' if all_hold else '存在不成立的单元'}")
    return ExitCode.PASS if all_hold else ExitCode.FAIL


def cmd_mesh_quality(args: argparse.Namespace) -> ExitCode:
    quality = mesh_quality(load_mesh(args.mesh))
    _emit(quality, args.output)
    return ExitCode.PASS if quality.acute else ExitCode.FAIL


def cmd_refine(args: argparse.Namespace) -> ExitCode:
    if args.levels < 0:
        raise ValueError(f"加密次数不能为负: {args.levels}")
    mesh = load_mesh(args.mesh)
    for _ in range(args.levels):
        mesh = refine_uniform(mesh)
    save_mesh(mesh, args.output)
    logger.info(f"网格已加密 {args.levels} 次: {mesh.n_vertices} 个顶点, {mesh.n_elements} 个单元")
    return ExitCode.PASS


def cmd_multistart_command(args: argparse.Namespace) -> ExitCode:
    problem, mesh = _load_inputs(args.problem, args.mesh)
    report = cmd_multistart(
        problem,
        mesh,
        starts=args.starts,
        seed=args.seed,
        theorem=_theorem(args.theorem),
        bound_mode=_bound_mode(args.cw),
        box=args.box,
        run=_run_config(args, problem=args.problem, mesh=args.mesh),
    )
    _emit(report, args.output)
    return ExitCode.PASS if report.conclusion == "certified-unique" else ExitCode.FAIL


def cmd_pipeline_command(args: argparse.Namespace) -> ExitCode:
    problem, mesh = _load_inputs(args.problem, args.mesh)
    report = cmd_pipeline(
        problem,
        mesh,
        theorem=_theorem(args.theorem),
        refinements=args.refinements,
        bound_mode=_bound_mode(args.cw),
        run=_run_config(args, problem=args.problem, mesh=args.mesh),
    )
    _emit(report, args.output)
    if report.final is None:
        return ExitCode.FAIL
    return _certificate_code(report.final)


def cmd_validate_constants(args: argparse.Namespace) -> ExitCode:
    problem = load_problem(args.problem)
    if problem.bundle is None:
        raise ProblemDefinitionError("问题定义中没有常数包, 无法校验")
    report = validate_constants(
        problem.model,
        problem.bundle,
        samples=args.samples,
        seed=args.seed,
        box=problem.sampling_box(),
        dimension=args.dimension,
    )
    _emit(report, args.output)
    return ExitCode.PASS if report.passed else ExitCode.FAIL


def cmd_estimate_constants(args: argparse.Namespace) -> ExitCode:
    problem = load_problem(args.problem)
    bundle = estimate_constants(
        problem.model,
        box=problem.sampling_box(),
        samples=args.samples,
        seed=args.seed,
        dimension=args.dimension,
    )
    _emit(bundle, args.output)
    return ExitCode.PASS


# ==================== 参数解析 ====================

def _add_theorem(parser: argparse.ArgumentParser, required: bool = False) -> None:
    parser.add_argument("--theorem", choices=sorted(THEOREM_ALIASES), required=required, help="检验的条件")
    parser.add_argument("--cw", choices=sorted(BOUND_ALIASES), default=None, help="|w| 积分界常数 (默认取配置)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcert", description="拟线性椭圆问题 P1 有限元求解与唯一性证书")
    parser.add_argument("--config", default=None, help="配置文件路径")
    parser.add_argument("--log-level", default=None, help="日志级别")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="阻尼 Newton 求解")
    p.add_argument("problem")
    p.add_argument("mesh")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--u0", default=None, help="初始猜测解文件")
    p.add_argument("--seed", type=int, default=None, help="随机初始猜测的种子")
    p.add_argument("-o", "--output", default=None, help="解文件输出路径")
    p.add_argument("--report", default=None, help="求解报告 JSON 路径")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("certify", help="逐单元证书")
    p.add_argument("problem")
    p.add_argument("mesh")
    p.add_argument("solution", nargs="?", default=None, help="离散解 (半线性条件不需要)")
    _add_theorem(p, required=True)
    p.add_argument("--check-matrix", action="store_true", help="同时对组装矩阵做 Stieltjes 检验")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("verify-pair", help="下解/上解对检验")
    p.add_argument("problem")
    p.add_argument("mesh")
    p.add_argument("sol1")
    p.add_argument("sol2")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_verify_pair)

    p = sub.add_parser("lemma-audit", help="逐单元三项下界核验 (CSV)")
    p.add_argument("problem")
    p.add_argument("mesh")
    p.add_argument("sol1")
    p.add_argument("sol2")
    p.add_argument("--cw", choices=sorted(BOUND_ALIASES), default=None)
    p.add_argument("--relative-g", action="store_true", help="p_T 不含 g 项")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_lemma_audit)

    p = sub.add_parser("mesh-quality", help="网格质量")
    p.add_argument("mesh")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_mesh_quality)

    p = sub.add_parser("refine", help="一致加密")
    p.add_argument("mesh")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_refine)

    p = sub.add_parser("multistart", help="多初值唯一性实验")
    p.add_argument("problem")
    p.add_argument("mesh")
    p.add_argument("--starts", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--box", type=float, default=None, help="初值范围 [−M, M] 的 M")
    _add_theorem(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_multistart_command)

    p = sub.add_parser("pipeline", help="逐层加密求解与证书")
    p.add_argument("problem")
    p.add_argument("mesh")
    p.add_argument("--refinements", type=int, default=0)
    _add_theorem(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_pipeline_command)

    for name, handler, help_text in (
        ("validate-constants", cmd_validate_constants, "蒙特卡洛抽查常数包"),
        ("estimate-constants", cmd_estimate_constants, "采样估计常数包 (启发式)"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("problem")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--dimension", type=int, choices=(1, 2), default=2)
        p.add_argument("-o", "--output", default=None)
        p.set_defaults(handler=handler)

    return parser


def run(argv: list[str] | None = None) -> int:
    """解析参数并执行子命令, 返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # 用法错误按输入错误处理, 退出码 3
        return ExitCode.ERROR if e.code else ExitCode.PASS
    try:
        config = init_config(args.config)
    except (OSError, yaml.YAMLError, ValidationError, ValueError) as e:
        print(f"配置加载失败: {e}", file=sys.stderr)
        return ExitCode.ERROR
    if args.log_level:
        config.logging.level = args.log_level
    setup_logging(config)

    handler: Callable[[argparse.Namespace], ExitCode] = args.handler
    try:
        return int(handler(args))
    except TheoremInapplicableError as e:
        logger.error(f"定理不适用: {e}")
        return ExitCode.INAPPLICABLE
    except SolverError as e:
        logger.error(f"求解失败: {e}")
        return ExitCode.FAIL
    except INPUT_ERRORS as e:
        logger.error(f"{args.command} 失败: {e}")
        return ExitCode.ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
