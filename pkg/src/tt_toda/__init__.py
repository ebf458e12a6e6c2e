"""Monodromy data, special-function solutions and a radial solver for the tt*-Toda equations.

Submodules:

``algebra``       structure matrices, automorphisms and reality predicates
``spectral``      asymptotic data, Stokes parameters, connection matrices
``linear_ode``    numeric Stokes factors and connection matrices of the linear system
``mellin``        Mellin-Barnes solutions by quadrature and by residues
``toda_solver``   radial boundary-value solver for the Toda system
``asymptotics``   fitting of solutions at both ends against the closed forms
``jump_data``     jump matrices of the Riemann-Hilbert problem at large ``|t|``
``cli``           the ``tt-toda`` command line
"""

__version__ = "0.1.0"

from .algebra import Rank, build_structure, structure
from .spectral import (
    ModelInput,
    NonGenericError,
    StokesData,
    asymptotic_from_m,
    build_D1,
    chat_id,
    invert_stokes,
    stokes_params,
)
from .toda_solver import BvpProblem, SolverOptions, assemble_tt_toda, solve_bvp

__all__ = [
    "Rank",
    "build_structure",
    "structure",
    "ModelInput",
    "NonGenericError",
    "StokesData",
    "asymptotic_from_m",
    "build_D1",
    "chat_id",
    "invert_stokes",
    "stokes_params",
    "BvpProblem",
    "SolverOptions",
    "assemble_tt_toda",
    "solve_bvp",
    "__version__",
]
