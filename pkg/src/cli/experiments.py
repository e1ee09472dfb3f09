"""
多初值唯一性实验与逐层加密流水线
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from src.certificate.conditions import certify
from src.certificate.report import BoundMode, CertificateReport, Theorem
from src.cli.models import (
    MultistartReport,
    PipelineLevel,
    PipelineReport,
    RunConfig,
    StartRecord,
)
from src.fem.field import DiscreteField, prolongate, random_field
from src.fem.newton import SolveResult, solve_newton
from src.mesh.geometry import geometry_table
from src.mesh.model import Mesh, Mesh1D
from src.mesh.refine import refine_uniform
from src.problem.definition import Problem
from src.utils.config import SolverConfig, get_config

logger = logging.getLogger(__name__)


def worker_count(tasks: int) -> int:
    """并行线程数: 不超过任务数, 受 runtime.threads (QCERT_THREADS) 限制"""
    limit = get_config().runtime.threads or os.cpu_count() or 1
    return max(1, min(tasks, limit))


def _cluster(fields: list[DiscreteField], tol: float) -> list[int]:
    """按最大节点差贪心聚类 (以每簇首个解为代表)"""
    representatives: list[DiscreteField] = []
    labels = []
    for u in fields:
        for c, rep in enumerate(representatives):
            if float(np.max(np.abs(u.values - rep.values))) <= tol:
                labels.append(c)
                break
        else:
            representatives.append(u)
            labels.append(len(representatives) - 1)
    return labels


def cmd_multistart(
    problem: Problem,
    mesh: Mesh,
    starts: int | None = None,
    seed: int | None = None,
    theorem: Theorem | str | None = None,
    bound_mode: BoundMode | str | None = None,
    box: float | None = None,
    solver: SolverConfig | None = None,
    run: RunConfig | None = None,
) -> MultistartReport:
    """
    从 starts 个随机初值分别求解, 统计收敛解的两两最大节点差与每个解的证书

    初值在 [−M, M] 上逐节点均匀抽取, 各初值的随机数流由 SeedSequence 派生,
    结果与线程调度无关。证书失败不构成非唯一性的证明。
    """
    config = get_config().multistart
    starts = starts if starts is not None else config.starts
    seed = seed if seed is not None else config.seed
    box = box if box is not None else config.box
    if starts < 2:
        raise ValueError(f"多初值实验至少需要 2 个初值: {starts}")
    theorem = Theorem(theorem) if theorem is not None else default_theorem(mesh)
    bundle = problem.resolve_bundle(mesh.dim)

    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(starts)]
    initial = [random_field(mesh, box, rng) for rng in rngs]

    def run_start(u0: DiscreteField) -> SolveResult:
        return solve_newton(problem.model, mesh, solver, u0=u0)

    workers = worker_count(starts)
    logger.info(f"多初值实验: {starts} 个初值, 种子 {seed}, 线程 {workers}")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run_start, initial))

    converged = [k for k, r in enumerate(results) if r.converged]
    fields = [results[k].field for k in converged]
    labels = _cluster(fields, config.cluster_tol)
    cluster_of = dict(zip(converged, labels))

    differences = [
        [float(np.max(np.abs(a.values - b.values))) for b in fields] for a in fields
    ]
    max_difference = max(map(max, differences)) if fields else None

    records = []
    certificates: list[CertificateReport] = []
    for k, result in enumerate(results):
        record = StartRecord(
            start=k,
            converged=result.converged,
            iterations=result.iterations,
            residual_norm=result.residual_norm,
            cluster=cluster_of.get(k),
        )
        if result.converged:
            report = certify(theorem, mesh, bundle, result.field, bound_mode)
            certificates.append(report)
            record.certificate_pass = report.global_pass
            record.certificate_applicable = report.applicable
            record.worst_margin = report.worst_margin
        records.append(record)

    n_clusters = len(set(labels))
    if not converged:
        conclusion = "no-converged-solution"
    elif n_clusters > 1:
        conclusion = "divergent-solutions-found"
    elif all(c.global_pass for c in certificates):
        conclusion = "certified-unique"
    else:
        conclusion = "empirically-unique-uncertified"

    report = MultistartReport(
        run=run or RunConfig(subcommand="multistart", seed=seed, starts=starts, theorem=theorem),
        theorem=theorem,
        seed=seed,
        box=box,
        starts=starts,
        converged=len(converged),
        clusters=n_clusters,
        max_pairwise_difference=max_difference,
        pairwise_differences=differences,
        records=records,
        conclusion=conclusion,
    )
    logger.info(f"多初值实验结论: {conclusion} ({len(converged)}/{starts} 收敛, {n_clusters} 个解簇)")
    return report


def default_theorem(mesh: Mesh) -> Theorem:
    return Theorem.COMPARISON_1D if isinstance(mesh, Mesh1D) else Theorem.COMPARISON_2D


def _max_size(mesh: Mesh) -> float | None:
    if mesh.n_elements == 0:
        return None
    if isinstance(mesh, Mesh1D):
        return float(mesh.h.max())
    return float(geometry_table(mesh).area.max())


def cmd_pipeline(
    problem: Problem,
    mesh: Mesh,
    theorem: Theorem | str | None = None,
    refinements: int = 0,
    bound_mode: BoundMode | str | None = None,
    solver: SolverConfig | None = None,
    run: RunConfig | None = None,
) -> PipelineReport:
    """
    逐层一致加密: 每层求解并做证书, 记录最小余量及其单元

    第 k 层 (k >= 1) 以上一层的解插值为初始猜测, 并额外记录该插值场本身的最小余量。
    """
    if refinements < 0:
        raise ValueError(f"加密次数不能为负: {refinements}")
    theorem = Theorem(theorem) if theorem is not None else default_theorem(mesh)
    bundle = problem.resolve_bundle(mesh.dim)

    levels: list[PipelineLevel] = []
    previous: DiscreteField | None = None
    report: CertificateReport | None = None
    first_pass: int | None = None
    for level in range(refinements + 1):
        if level > 0:
            mesh = refine_uniform(mesh)
        u0 = prolongate(previous, mesh) if previous is not None else None
        interpolated = None
        if u0 is not None:
            coarse = certify(theorem, mesh, bundle, u0, bound_mode)
            interpolated = coarse.worst_margin

        result = solve_newton(problem.model, mesh, solver, u0=u0)
        report = certify(theorem, mesh, bundle, result.field, bound_mode)
        levels.append(PipelineLevel(
            level=level,
            n_vertices=mesh.n_vertices,
            n_elements=mesh.n_elements,
            max_area=_max_size(mesh),
            converged=result.converged,
            iterations=result.iterations,
            global_pass=report.global_pass,
            applicable=report.applicable,
            worst_margin=report.worst_margin,
            worst_element=report.worst.elem if report.worst is not None else None,
            interpolated_margin=interpolated,
        ))
        if report.global_pass and first_pass is None:
            first_pass = level
        logger.info(
            f"加密第 {level} 层: {mesh.n_elements} 个单元, "
            f"{'通过' if report.global_pass else '未通过'}, 最小余量 {report.worst_margin}"
        )
        previous = result.field

    return PipelineReport(
        run=run or RunConfig(subcommand="pipeline", theorem=theorem),
        theorem=theorem,
        refinements=refinements,
        levels=levels,
        first_pass_level=first_pass,
        final=report,
    )
