"""Sensitivity of designs and selection of the regular solution."""

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEFAULT_TOLERANCES
from .numkernel import eigenvalue_condition_numbers, smallest_singular_value
from .polysys import RationalPolynomial, build_B
from .solver import DesignSolution, SolutionSet

DEFAULT_EPSILONS = (10 ** -1.0, 10 ** -0.5, 1.0, 10 ** 0.3)


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SensitivityReport:
    eigenvalues: np.ndarray
    conditions: np.ndarray
    max_condition: float

    def to_dict(self):
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "conditions": [float(x) for x in self.conditions],
            "max_condition": self.max_condition,
        }


def condition_numbers(spec, solution, rel_gap=1e-8) -> SensitivityReport:
    """Eigenvalue condition numbers ``1/|w^T v|`` of ``BF``.

    Raises ``ValueError`` if two eigenvalues coincide (within ``rel_gap``
    relative to the largest), since the measure then loses meaning.
    """
    k = np.asarray(solution.k if hasattr(solution, "k") else solution, dtype=float)
    B = build_B(spec.n).astype(float)
    spectrum, cond = eigenvalue_condition_numbers(B / k[None, :])
    vals = spectrum.values
    order = np.argsort(vals.real)
    vals, cond = vals[order], cond[order]
    if len(vals) > 1:
        gap = np.min(np.abs(np.diff(vals)))
        if gap <= rel_gap * np.max(np.abs(vals)):
            raise ValueError("repeated eigenvalue: condition numbers undefined")
    return SensitivityReport(eigenvalues=vals.real, conditions=cond,
                             max_condition=float(np.max(cond)))


# --------------------------------------------------------------------------
# pseudospectra


@dataclass(frozen=True)
class PseudospectrumGrid:
    re: np.ndarray  # (nx,)
    im: np.ndarray  # (ny,)
    sigma_min: np.ndarray  # (ny, nx)
    epsilons: Tuple[float, ...]

    @property
    def points(self):
        R, I = np.meshgrid(self.re, self.im)
        return R + 1j * I

    def level_areas(self):
        """Area of ``{z : sigma_min(zI - A) <= eps}`` for each level."""
        dx = (self.re[-1] - self.re[0]) / max(len(self.re) - 1, 1)
        dy = (self.im[-1] - self.im[0]) / max(len(self.im) - 1, 1)
        return {eps: float(np.count_nonzero(self.sigma_min <= eps) * dx * dy)
                for eps in self.epsilons}


def default_window(model):
    half = model.omega0 * (max(model.spec.alpha) + 1)
    return (-half, half, -half, half)


def pseudospectrum(model, window=None, resolution=(201, 201),
                   epsilons: Sequence[float] = DEFAULT_EPSILONS) -> PseudospectrumGrid:
    """``sigma_min(zI - A0)`` over a rectangular grid.

    ``window`` is ``(re_min, re_max, im_min, im_max)``; ``resolution`` is
    ``(nx, ny)`` or a single count for both axes.
    """
    if np.isscalar(resolution):
        resolution = (int(resolution), int(resolution))
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2 per axis")
    x0, x1, y0, y1 = default_window(model) if window is None else window
    re = np.linspace(x0, x1, nx)
    im = np.linspace(y0, y1, ny)
    A = model.A0.astype(complex)
    m = A.shape[0]
    eye = np.eye(m)
    sig = np.empty((ny, nx))
    for row, y in enumerate(im):
        z = re + 1j * y
        sig[row] = smallest_singular_value(z[:, None, None] * eye - A)
    return PseudospectrumGrid(re=re, im=im, sigma_min=sig, epsilons=tuple(epsilons))


def sigma_min_at(model, z):
    A = model.A0.astype(complex)
    return float(smallest_singular_value(z * np.eye(A.shape[0]) - A))


# --------------------------------------------------------------------------
# regular solution


def q0(k):
    """``sum_{i,j} (k_i - k_j)^2``: zero iff all capacitors are equal."""
    k = np.asarray(k, dtype=float)
    return float(np.sum((k[:, None] - k[None, :]) ** 2))


def q0_quadratic(k):
    """Same objective through the identity ``2n sum k^2 - 2 (sum k)^2``."""
    k = np.asarray(k, dtype=float)
    return float(2 * len(k) * np.dot(k, k) - 2 * k.sum() ** 2)


def convexity_margins(k):
    """``g_j = k_j - 2 k_{j+1} + k_{j+2}`` for j = 1..n-2."""
    k = np.asarray(k, dtype=float)
    return k[:-2] - 2 * k[1:-1] + k[2:]


Objective = Union[Callable[[np.ndarray], float], RationalPolynomial]


def _objective_fn(objective: Optional[Objective]):
    if objective is None:
        return q0
    if isinstance(objective, RationalPolynomial):
        return lambda k: float(objective.evaluate(list(np.asarray(k, dtype=float))))
    return objective


def select_regular(solutions, objective: Optional[Objective] = None,
                   tol=DEFAULT_TOLERANCES):
    """Minimisers of ``objective`` (default :func:`q0`) among the solutions
    whose ``k`` profile is convex. Returns copies flagged ``regular=True``."""
    sols = list(solutions)
    if not sols:
        raise SelectionError("no solutions to select from")
    fn = _objective_fn(objective)
    feasible = [s for s in sols if np.all(convexity_margins(s.k) >= -tol.convexity)]
    if not feasible:
        raise SelectionError("no solution satisfies the convexity constraints")
    values = np.array([fn(s.k) for s in feasible])
    best = values.min()
    return [replace(s, regular=True) for s, v in zip(feasible, values)
            if v <= best + tol.objective_tie]


def mark_regular(solution_set: SolutionSet, objective: Optional[Objective] = None,
                 tol=DEFAULT_TOLERANCES) -> SolutionSet:
    """Copy of the set with the regular solution(s) flagged.

    A set with no convex solution is returned unchanged.
    """
    try:
        chosen = select_regular(solution_set.solutions, objective, tol)
    except SelectionError:
        return solution_set
    keys = {tuple(s.k) for s in chosen}
    sols = tuple(replace(s, regular=tuple(s.k) in keys) for s in solution_set.solutions)
    return replace(solution_set, solutions=sols)
