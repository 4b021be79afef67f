"""Grid-based toolkit for variable-exponent Hardy, BMO and tent spaces tied to semigroups."""
from .bmo import bmo_norm, bmo_report, carleson_measure, carleson_norm, pairing_via_tent, tent_duality_check
from .config import GridConfig, SuiteConfig, Tolerances
from .exponent import PRESETS, ExponentFunction, sobolev_conjugate, verify_log_holder
from .fractional import FractionalParams, TailError, coefficient_inequality, fractional_apply
from .grid import Box, Cube, GridFunction, HalfSpaceFunction, ScaleLadder, dyadic_family
from .hardy import (classical_atom_embedding_check, compute_Cms, haar_atom, hardy_norm,
                    is_classical_atom, lusin_area, molecular_decompose, pi_L)
from .io import read_any, read_decomposition, read_grid, write_decomposition, write_grid
from .lebesgue import a_functional, cube_norm, cube_ratio_check, luxemburg_norm, modular
from .maximal import MaximalConfig, hl_maximal
from .semigroup import GAUSSIAN, OperatorParams, SemigroupSpec, verify_kernel_decay
from .suites import run_suite
from .tent import tent_atomic_decompose, tent_C, tent_norm, tent_T

__version__ = "0.1.0"

__all__ = [
    "Box", "Cube", "GridFunction", "HalfSpaceFunction", "ScaleLadder", "dyadic_family",
    "PRESETS", "ExponentFunction", "sobolev_conjugate", "verify_log_holder",
    "a_functional", "cube_norm", "cube_ratio_check", "luxemburg_norm", "modular",
    "MaximalConfig", "hl_maximal",
    "GAUSSIAN", "OperatorParams", "SemigroupSpec", "verify_kernel_decay",
    "tent_atomic_decompose", "tent_C", "tent_norm", "tent_T",
    "classical_atom_embedding_check", "compute_Cms", "haar_atom", "hardy_norm",
    "is_classical_atom", "lusin_area", "molecular_decompose", "pi_L",
    "bmo_norm", "bmo_report", "carleson_measure", "carleson_norm", "pairing_via_tent",
    "tent_duality_check",
    "FractionalParams", "TailError", "coefficient_inequality", "fractional_apply",
    "read_any", "read_decomposition", "read_grid", "write_decomposition", "write_grid",
    "GridConfig", "SuiteConfig", "Tolerances", "run_suite",
]
