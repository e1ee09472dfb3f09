# CLI Module
from src.cli.models import (
    ExitCode,
    MultistartReport,
    PipelineLevel,
    PipelineReport,
    RunConfig,
    SolveReport,
    StartRecord,
)
from src.cli.experiments import cmd_multistart, cmd_pipeline
from src.cli.commands import build_parser, run

__all__ = [
    "ExitCode",
    "MultistartReport",
    "PipelineLevel",
    "PipelineReport",
    "RunConfig",
    "SolveReport",
    "StartRecord",
    "cmd_multistart",
    "cmd_pipeline",
    "build_parser",
    "run",
]
