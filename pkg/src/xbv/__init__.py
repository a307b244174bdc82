"""Singular integral operators, Beltrami-type solvers, and two-sided
boundary-value experiments on planar grids."""

from .grids import (DomainSpec, GridField, HolderReport, boundary_trace,
                    build_grid, disk, field_from_function, from_boundary,
                    holder_estimate, lower_half_disk, unit_disk,
                    upper_half_disk, wirtinger)

__all__ = [
    "DomainSpec", "GridField", "HolderReport", "boundary_trace", "build_grid",
    "disk", "field_from_function", "from_boundary", "holder_estimate",
    "lower_half_disk", "unit_disk", "upper_half_disk", "wirtinger",
]

__version__ = "0.1.0"
