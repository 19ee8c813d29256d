"""Adaptive anisotropic meshing for hierarchical Bayesian inverse problems."""

from ._bamesh import (
    Config,
    ConfigError,
    Dataset,
    DomainShape,
    Error,
    InvalidArgument,
    IterationReport,
    NumericalError,
    RunResult,
    StageError,
    TriMesh,
    generate_initial_mesh,
    incidence,
    load_reports,
    phantom,
    prepare_dataset,
    read_mesh,
    run,
    write_mesh,
    write_reports,
)

__all__ = [
    "Config",
    "ConfigError",
    "Dataset",
    "DomainShape",
    "Error",
    "InvalidArgument",
    "IterationReport",
    "NumericalError",
    "RunResult",
    "StageError",
    "TriMesh",
    "generate_initial_mesh",
    "incidence",
    "load_reports",
    "phantom",
    "prepare_dataset",
    "read_mesh",
    "run",
    "write_mesh",
    "write_reports",
]
