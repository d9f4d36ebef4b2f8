"""Python access to the pullin_lab electromechanical pull-in solvers."""

from ._core import (
    ConfigError,
    CouplingMode,
    FieldMethod,
    Layout,
    NoPullInFound,
    NumericalError,
    SolverConfig,
    Specimen,
    __version__,
    calibrate_correction,
    catalog,
    curvature_from_tip_offset,
    derive_section,
    elastica_tip,
    find_in_catalog,
    find_lumped_pull_in,
    find_pull_in,
    load_specimen,
    lumped_pullin,
    ritz_pullin,
    serialize,
    sweep_csv,
    voltage_sweep,
)

__all__ = [
    "ConfigError",
    "CouplingMode",
    "FieldMethod",
    "Layout",
    "NoPullInFound",
    "NumericalError",
    "SolverConfig",
    "Specimen",
    "__version__",
    "calibrate_correction",
    "catalog",
    "curvature_from_tip_offset",
    "derive_section",
    "elastica_tip",
    "find_in_catalog",
    "find_lumped_pull_in",
    "find_pull_in",
    "load_specimen",
    "lumped_pullin",
    "ritz_pullin",
    "serialize",
    "sweep_csv",
    "voltage_sweep",
]
