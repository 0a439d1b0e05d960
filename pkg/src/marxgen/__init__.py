"""Design of Marx generator parasitic capacitors by structured eigenvalue
assignment, with homotopy enumeration of all real designs and state-space
verification of the energy transfer."""

__version__ = "0.1.0"

from .polysys import DesignSpec, Formulation, PolySystem, RationalPolynomial  # noqa: E402
from .polysys import build_B, build_B_inverse, system_f, system_k  # noqa: E402
from .solver import (  # noqa: E402
    Budget, DesignSolution, SolutionSet, enumerate_solutions, refine, solution_count,
    validate,
)
from .circuit import StateModel, build_A0, modal_check, simulate, verify_transfer  # noqa: E402
from .analysis import condition_numbers, pseudospectrum, select_regular  # noqa: E402

__all__ = [
    "DesignSpec", "Formulation", "PolySystem", "RationalPolynomial",
    "build_B", "build_B_inverse", "system_f", "system_k",
    "Budget", "DesignSolution", "SolutionSet", "enumerate_solutions", "refine",
    "solution_count", "validate",
    "StateModel", "build_A0", "modal_check", "simulate", "verify_transfer",
    "condition_numbers", "pseudospectrum", "select_regular",
]
