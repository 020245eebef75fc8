"""Bipartite entanglement tests built on the separability eigenvalue problem."""

from sepeig.grid import GridSpec, GridTooLarge, generate_grid, grid_operator, nearest_grid_index, scan
from sepeig.linalg import (
    BipartiteOperator,
    DensityOperator,
    DimensionError,
    Dims,
    LocalVector,
    PureBipartiteState,
    expectation,
    partial_transpose,
    product_value,
    project_a,
    project_b,
)
from sepeig.schmidt import SchmidtDecomposition, schmidt, schmidt_rank
from sepeig.solver import (
    ConvergenceError,
    SepEigenpair,
    SepSpectrum,
    SolverConfig,
    brute_force_extrema,
    check_proposition1,
    f_ab,
    inf_g,
    solve_rank_one,
    solve_sepeig,
)
from sepeig.witness import (
    Kind,
    Verdict,
    Witness,
    bound_check,
    build_witness,
    npt_check,
    test_lower,
    test_upper,
    validate_partial_positive,
)

__version__ = "0.1.0"
