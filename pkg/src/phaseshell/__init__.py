"""phaseshell: narrow-volume reconstruction from unorganized point clouds.

The pipeline: fit a point cloud into a cell-centered grid, evaluate its
unsigned distance field, seed a thin tanh shell around the samples, relax it
with an edge-weighted phase-field flow integrated by an unconditionally
energy-stable, second-order, multiplier-constrained Crank-Nicolson scheme,
and extract the zero level set as a triangle mesh.
"""

from .diagnostics import EnergyRecord, discrete_energy, monotonicity_report, original_energy, record_step, volume
from .extract import IsoMesh, marching_cubes, surface_area, write_energy_csv, write_obj, write_vtk_structured
from .grid import GridSpec, ScalarField, grad_inner_e, grad_norm_sq, h_norm_sq, inner_h, laplacian7, sync_ghosts
from .phasefield import ModelParams, edge_function, epsilon_from_cells, init_phi, potential_F, potential_dF
from .pointcloud import (PointCloud, PointCloudParseError, SpatialIndex, build_index, distance_field,
                         fit_to_domain, load_points, subsample)
from .solver import (QuarticCoeffs, SolverConvergenceError, SolverDivergenceError, SolverState,
                     extrapolate, gs_block_sweep, initial_state, quartic_coefficients, solve_phi1,
                     solve_phi2, solve_Q, step)
from .synthetic import icosphere

__version__ = "0.1.0"

__all__ = [
    "EnergyRecord", "GridSpec", "IsoMesh", "ModelParams", "PointCloud", "PointCloudParseError",
    "QuarticCoeffs", "ScalarField", "SolverConvergenceError", "SolverDivergenceError", "SolverState",
    "SpatialIndex", "build_index", "discrete_energy", "distance_field", "edge_function",
    "epsilon_from_cells", "extrapolate", "fit_to_domain", "grad_inner_e", "grad_norm_sq",
    "gs_block_sweep", "h_norm_sq", "icosphere", "init_phi", "inner_h", "initial_state",
    "laplacian7", "load_points", "marching_cubes", "monotonicity_report", "original_energy",
    "potential_F", "potential_dF", "quartic_coefficients", "record_step", "solve_Q", "solve_phi1",
    "solve_phi2", "step", "subsample", "surface_area", "sync_ghosts", "volume",
    "write_energy_csv", "write_obj", "write_vtk_structured",
]
