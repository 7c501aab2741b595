"""Angular momentum L_z on the flat square torus."""

from ._core import (
    DomainError,
    NonConvergence,
    SingularityError,
    UndersampledGrid,
    apply_lz,
    branch_radius,
    branch_table,
    degeneracy,
    eigenvalues,
    fiber_eigenvalue,
    gamma_segments,
    localize,
    lz_matrix,
    mu,
    run_cli,
    semiclassical_level,
    spectral_statistics,
    theta_r,
    trace_orbit,
)

__all__ = [
    "DomainError",
    "NonConvergence",
    "SingularityError",
    "UndersampledGrid",
    "apply_lz",
    "branch_radius",
    "branch_table",
    "degeneracy",
    "eigenvalues",
    "fiber_eigenvalue",
    "gamma_segments",
    "localize",
    "lz_matrix",
    "mu",
    "run_cli",
    "semiclassical_level",
    "spectral_statistics",
    "theta_r",
    "trace_orbit",
]
