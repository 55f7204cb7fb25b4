"""Edge diffraction of elastic waves by a half-plane crack in a
transversely isotropic solid: slowness-surface analysis, scalar
factorization of the face kernels, spectral crack-opening solution and
far-field (GTD) diffraction coefficients for the two closed-form crack
orientations."""

from .material import (TIMaterial, NondimMaterial, nondimensionalize,
                       voigt_matrix, isotropic, load_material, save_material,
                       load_bundled, bundled_material_path)
from .christoffel import (MODE_QP, MODE_QSV, MODE_QSH, MODES, Eigensystem,
                          christoffel_matrix, eigensystem, eigenvalues,
                          transfer_tensor, slowness, ray_direction,
                          sample_curves, write_curves_csv)
from .crackgeom import (CrackCase, IncidentWave, rotation_matrix,
                        rotation_matrix_general, incident_wave, s_operator)
from .spectral import (BranchData, Xi3Root, RayleighData, branch_points,
                       gamma, xi3_root, rayleigh_pole, mu_eigenvalues,
                       tau_closed, green_traction_residue, write_root_loci)
from .wienerhopf import FactorTable, k_plus, on_cut_k_plus, mu_plus
from .codsolver import (CODSolution, solve, functional_residual,
                        residue_conditions, residual_grid)
from .gtd import (GTDTolerances, DiffractedWave, DiffractionCoefficient,
                  SweepResult, rho, ray_angle, diffraction_coefficient,
                  regularized_coefficient, sweep, write_sweep_csv,
                  shadow_boundary_angles, setup, ALPHA_OF_MODE)
from . import errors

__version__ = "0.1.0"
