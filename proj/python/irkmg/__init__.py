"""Monolithic multigrid for implicit Runge-Kutta Stokes and Navier-Stokes."""

from ._irkmg import (
    SolverFailure,
    Tableau,
    config_keys,
    consistency_check,
    convergence_rate,
    count_dofs,
    ew_forcing,
    mesh_counts,
    mms_velocity,
    registry,
    run,
    stability_function,
    tableau,
    tableau_report,
    taylor_green_pressure,
)

__all__ = [
    "SolverFailure",
    "Tableau",
    "config_keys",
    "consistency_check",
    "convergence_rate",
    "count_dofs",
    "ew_forcing",
    "mesh_counts",
    "mms_velocity",
    "registry",
    "run",
    "stability_function",
    "tableau",
    "tableau_report",
    "taylor_green_pressure",
]
