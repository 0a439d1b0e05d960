"""Enumerate, refine and validate the real solutions of the design system.

Solutions are computed in the capacitor-ratio unknowns ``k_i = c_i / c``
(all real solutions lie in the unit box) and reported in both ``k`` and
``f = 1/k`` together with the ``n^2 c_i / c`` scaling used in design tables.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from . import homotopy
from .config import DEFAULT_TOLERANCES
from .numkernel import eig, eigenvalue_condition_numbers
from .polysys import CompiledSystem, DesignSpec, Formulation, PolySystem, build_B, system_k

logger = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class ConvergenceError(SolverError):
    """Newton refinement did not reach the residual target."""


class SingularJacobianError(SolverError):
    """The Jacobian is singular at the iterate (non-simple root)."""


@dataclass(frozen=True)
class DesignSolution:
    k: np.ndarray
    f: np.ndarray
    scaled: np.ndarray
    residual_inf: float
    eig_error: float
    condition: float
    regular: bool = False
    iterations: int = 0

    @property
    def n(self):
        return len(self.k)

    def to_dict(self):
        return {
            "k": [float(x) for x in self.k],
            "f": [float(x) for x in self.f],
            "scaled": [float(x) for x in self.scaled],
            "residual_inf": float(self.residual_inf),
            "eig_error": float(self.eig_error),
            "condition": float(self.condition),
            "regular": bool(self.regular),
        }

    @classmethod
    def from_dict(cls, d):
        k = np.asarray(d["k"], dtype=float)
        return cls(
            k=k,
            f=np.asarray(d.get("f", 1.0 / k), dtype=float),
            scaled=np.asarray(d.get("scaled", len(k) ** 2 * k), dtype=float),
            residual_inf=float(d.get("residual_inf", np.nan)),
            eig_error=float(d.get("eig_error", np.nan)),
            condition=float(d.get("condition", np.nan)),
            regular=bool(d.get("regular", False)),
        )


@dataclass(frozen=True)
class PathStats:
    tracked: int = 0
    converged: int = 0
    diverged: int = 0
    failed: int = 0
    complex: int = 0
    real: int = 0
    skipped: int = 0
    retracked: int = 0

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class Budget:
    """Work limits for :func:`enumerate_solutions`.

    ``max_paths`` caps the number of start solutions tracked (``None``: all);
    ``max_iterations`` caps predictor-corrector steps per path.
    """

    max_paths: Optional[int] = None
    max_iterations: int = 20000


@dataclass(frozen=True)
class SolutionSet:
    spec: DesignSpec
    solutions: Tuple[DesignSolution, ...]
    path_stats: PathStats = field(default_factory=PathStats)
    incomplete: bool = False
    seed: Optional[int] = None

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]

    @property
    def regular(self):
        return [s for s in self.solutions if s.regular]


@dataclass(frozen=True)
class ValidationReport:
    eig_error: float
    symmetric_error: float
    residual_inf: float
    f_positive: bool
    k_in_box: bool
    sum_k_below_one: bool
    failures: Tuple[str, ...] = ()

    @property
    def valid(self):
        return not self.failures

    def to_dict(self):
        return {
            "valid": self.valid,
            "eig_error": float(self.eig_error),
            "symmetric_error": float(self.symmetric_error),
            "residual_inf": float(self.residual_inf),
            "f_positive": self.f_positive,
            "k_in_box": self.k_in_box,
            "sum_k_below_one": self.sum_k_below_one,
            "failures": list(self.failures),
        }


# --------------------------------------------------------------------------
# helpers


def _scaled_system(system):
    """Evaluator in ``y = n^2 k`` with unit-max-coefficient equations."""
    n = system.n
    return CompiledSystem.from_system(system, var_scale=1.0 / n ** 2, normalize=True)


def _check_k_form(system):
    if system.formulation is not Formulation.K_FORM:
        raise ValueError("solver works on the K_FORM system")


def spectrum_error(spec, k):
    """Max distance between sorted ``sigma(BF)`` and sorted ``alpha^2 - 1``."""
    n = spec.n
    B = build_B(n).astype(float)
    f = 1.0 / np.asarray(k, dtype=float)
    got = eig(B * f[None, :]).values
    got = np.array(sorted(got, key=lambda z: (z.real, z.imag)))
    want = np.sort(np.array([float(t) for t in spec.targets]))
    return float(np.max(np.abs(got - want)))


def max_condition(spec, k):
    B = build_B(spec.n).astype(float)
    f = 1.0 / np.asarray(k, dtype=float)
    _, cond = eigenvalue_condition_numbers(B * f[None, :])
    return float(np.max(cond))


def make_solution(system, k, iterations=0):
    """Fill every :class:`DesignSolution` field for a given ``k``."""
    k = np.asarray(k, dtype=float)
    spec = system.spec
    n = spec.n
    residual = float(np.max(np.abs(system.evaluate(list(k)))))
    return DesignSolution(
        k=k,
        f=1.0 / k,
        scaled=n ** 2 * k,
        residual_inf=residual,
        eig_error=spectrum_error(spec, k),
        condition=max_condition(spec, k),
        iterations=iterations,
    )


# --------------------------------------------------------------------------
# Newton refinement


def _newton(C, y, tol, max_iterations):
    """Damped Newton on the compiled system; returns ``(y, norm, iterations)``."""

    def resid(y):
        F, J = C.evaluate(y[None, :])
        return F[0], J[0]

    F, J = resid(y)
    norm = np.abs(F).max()
    it = 0
    while norm > tol:
        if it >= max_iterations:
            raise ConvergenceError(
                f"Newton did not converge in {max_iterations} iterations "
                f"(normalised residual {norm:.3e})")
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e14:
            raise SingularJacobianError("Jacobian is singular at the current iterate")
        delta = np.linalg.solve(J, -F)
        lam = 1.0
        while True:
            y_new = y + lam * delta
            F_new, J_new = resid(y_new)
            norm_new = np.abs(F_new).max()
            if norm_new < norm or lam < 1e-4:
                break
            lam *= 0.5
        it += 1
        if not np.all(np.isfinite(y_new)):
            raise ConvergenceError("Newton iterate diverged")
        tiny = lam * np.abs(delta).max() <= 1e-15 * (1 + np.abs(y).max())
        if norm_new >= norm and tiny:
            break  # rounding floor reached
        y, F, J, norm = y_new, F_new, J_new, norm_new
        if tiny:
            break
    return y, norm, it


def _residual_continuation(C, y0, max_steps=2000):
    """Follow ``F(y) = (1 - t) F(y0)`` from t = 0 to 1 (Newton homotopy).

    Each step solves the shifted system by a few plain Newton iterations;
    the step in t halves on failure and grows after successes.
    """
    F0 = C.evaluate(y0[None, :], jacobian=False)[0][0]
    y, t, dt, steps = y0.copy(), 0.0, 0.05, 0
    while t < 1.0:
        if steps >= max_steps or dt < 1e-10:
            raise ConvergenceError("residual continuation stalled")
        t_new = min(1.0, t + dt)
        shift = (1.0 - t_new) * F0
        z, ok = y.copy(), False
        for _ in range(8):
            F, J = C.evaluate(z[None, :])
            F, J = F[0] - shift, J[0]
            if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e14:
                break
            step = np.linalg.solve(J, -F)
            z = z + step
            if np.abs(step).max() <= 1e-10 * (1 + np.abs(z).max()):
                ok = True
                break
        steps += 1
        if ok and np.abs(z - y).max() <= 0.25 * (1 + np.abs(y).max()):
            y, t = z, t_new
            dt = min(2 * dt, 0.2)
        else:
            dt /= 2
    return y, steps


def refine(system: PolySystem, guess, max_iterations=50, tol=1e-15):
    """Damped Newton on the K_FORM system starting from ``guess`` (a k-vector).

    Iterates in the scaled unknowns ``n^2 k`` on normalised equations until the
    normalised residual is at most ``tol`` (or stagnates at rounding level),
    then checks the raw residual against
    :attr:`~marxgen.config.Tolerances.polish_residual`. If Newton fails from
    a poor guess, the residual continuation ``F(y) = (1 - t) F(y_guess)`` is
    followed to a root first and Newton restarted there.
    """
    _check_k_form(system)
    n = system.n
    if len(guess) != n:
        raise ValueError(f"guess has {len(guess)} entries, system has {n}")
    if all(isinstance(g, (int, Fraction)) for g in guess):
        if all(r == 0 for r in system.evaluate(list(guess))):
            return make_solution(system, [float(g) for g in guess], iterations=0)
    C = _scaled_system(system)
    y0 = n ** 2 * np.asarray(guess, dtype=float)
    try:
        y, _, it = _newton(C, y0, tol, max_iterations)
        sol = make_solution(system, y / n ** 2, iterations=it)
    except SolverError as exc:
        logger.info("plain Newton failed (%s); following residual continuation", exc)
        y, steps = _residual_continuation(C, y0)
        y, _, it = _newton(C, y, tol, max_iterations)
        sol = make_solution(system, y / n ** 2, iterations=steps + it)
    if sol.residual_inf > DEFAULT_TOLERANCES.polish_residual:
        raise ConvergenceError(f"residual {sol.residual_inf:.3e} above target")
    return sol


# --------------------------------------------------------------------------
# validation


def validate(solution: DesignSolution, spec: DesignSpec, tol=DEFAULT_TOLERANCES):
    """Check the spectral assignment, positivity and unit-box conditions."""
    k = np.asarray(solution.k, dtype=float)
    f = 1.0 / k
    failures = []
    residual = float(np.max(np.abs(system_k(spec).evaluate(list(k)))))
    if residual > 1e-8:
        failures.append("residual")
    eig_err = spectrum_error(spec, k)
    if not eig_err <= tol.eig_match:
        failures.append("spectrum")
    f_pos = bool(np.all(f > 0))
    if not f_pos:
        failures.append("f_positive")
    in_box = bool(np.all((k > 0) & (k < 1)))
    if not in_box:
        failures.append("k_in_box")
    below_one = bool(k.sum() < 1)
    if not below_one:
        failures.append("sum_k")
    if f_pos:
        B = build_B(spec.n).astype(float)
        root = np.sqrt(f)
        sym = np.linalg.eigvalsh(root[:, None] * B * root[None, :])
        nonsym = np.sort(eig(B * f[None, :]).values.real)
        sym_err = float(np.max(np.abs(np.sort(sym) - nonsym)))
    else:
        sym_err = float("inf")
    if not sym_err <= tol.symmetric_match:
        failures.append("symmetric")
    return ValidationReport(
        eig_error=eig_err, symmetric_error=sym_err, residual_inf=residual,
        f_positive=f_pos, k_in_box=in_box, sum_k_below_one=below_one,
        failures=tuple(failures))


# --------------------------------------------------------------------------
# enumeration


def _duplicate_paths(Y, tol):
    if len(Y) < 2:
        return np.array([], dtype=int)
    pts = np.hstack([Y.real, Y.imag])
    pairs = cKDTree(pts).query_pairs(tol, p=np.inf, output_type="ndarray")
    return np.unique(pairs.ravel())


def enumerate_solutions(spec: DesignSpec, budget: Budget = Budget(), seed=0,
                        settings: Optional[homotopy.TrackerSettings] = None,
                        n_jobs=1, tol=DEFAULT_TOLERANCES, retrack_rounds=2,
                        mark_regular=True):
    """Every real solution of the K_FORM system by total-degree homotopy.

    All ``n!`` paths are tracked from ``x_i^i = 1`` with a random ``gamma``
    drawn from ``numpy.random.default_rng(seed)``. Endpoints that collide
    (a sign of path jumping) are re-tracked with tighter step control.
    """
    system = system_k(spec)
    C = _scaled_system(system)
    n = spec.n
    settings = settings or homotopy.TrackerSettings(
        max_iterations=budget.max_iterations, diverged_norm=tol.diverged_norm)
    rng = np.random.default_rng(seed)
    gamma = homotopy.random_gamma(rng)
    starts = homotopy.start_solutions(C.degrees)
    total = len(starts)
    if budget.max_paths is not None and budget.max_paths < total:
        starts = starts[:budget.max_paths]
    skipped = total - len(starts)

    result = homotopy.track_parallel(C, starts, gamma, settings, n_jobs=n_jobs)
    status = result.status.copy()
    Y = result.endpoints.copy()
    conv = status == homotopy.CONVERGED
    Y[conv], _ = homotopy.newton_polish(C, Y[conv])

    retracked = 0
    round_settings = settings
    for _ in range(retrack_rounds):
        idx = np.flatnonzero(conv)
        dup = idx[_duplicate_paths(Y[idx], tol.dedup * n ** 2)]
        redo = np.union1d(dup, np.flatnonzero(status == homotopy.FAILED))
        if redo.size == 0:
            break
        round_settings = round_settings.tightened()
        logger.info("re-tracking %d paths with max_step=%g", redo.size,
                    round_settings.max_step)
        again = homotopy.track(C, starts[redo], gamma, round_settings)
        retracked += redo.size
        status[redo] = again.status
        Y[redo] = again.endpoints
        ok = redo[again.status == homotopy.CONVERGED]
        Y[ok], _ = homotopy.newton_polish(C, Y[ok])
        conv = status == homotopy.CONVERGED

    K = Y / n ** 2
    finite = conv & np.all(np.isfinite(K), axis=1)
    is_real = finite & (np.abs(K.imag).max(axis=1) <= tol.real_imag)
    solutions: List[DesignSolution] = []
    for kvec in K[is_real].real:
        try:
            sol = refine(system, kvec)
        except SolverError as exc:
            logger.warning("refinement failed for %s: %s", kvec, exc)
            continue
        if any(np.max(np.abs(sol.k - s.k)) <= tol.dedup for s in solutions):
            continue
        solutions.append(sol)
    solutions.sort(key=lambda s: tuple(s.scaled))

    stats = PathStats(
        tracked=len(starts),
        converged=int(conv.sum()),
        diverged=int((status == homotopy.DIVERGED).sum()),
        failed=int(np.isin(status, (homotopy.FAILED, homotopy.BUDGET)).sum()),
        complex=int((finite & ~is_real).sum()),
        real=int(is_real.sum()),
        skipped=skipped,
        retracked=retracked,
    )
    incomplete = skipped > 0 or bool((status == homotopy.BUDGET).any())
    out = SolutionSet(spec=spec, solutions=tuple(solutions), path_stats=stats,
                      incomplete=incomplete, seed=seed)
    if mark_regular and solutions:
        from .analysis import mark_regular as _mark
        out = _mark(out)
    return out


def solution_count(spec, **kwargs):
    """Number of distinct real solutions found by :func:`enumerate_solutions`."""
    return len(enumerate_solutions(spec, **kwargs))


def solve_scalar(spec):
    """Closed-form solution for a single stage: ``(1/2) k = 1/(alpha^2 - 1)``."""
    if spec.n != 1:
        raise ValueError("closed form only for n = 1")
    return Fraction(2, spec.alpha[0] ** 2 - 1)


def solve_two_stage(spec):
    """Both n = 2 solutions from the linear/quadratic pair in closed form.

    The linear equation gives ``k2 = a - b k1``; substituting in the product
    equation ``d k1 k2 = p`` yields ``d b k1^2 - d a k1 + p = 0``.
    """
    if spec.n != 2:
        raise ValueError("closed form only for n = 2")
    q1, q2 = system_k(spec).polynomials
    b1 = float(q1.terms[(1, 0)])
    b2 = float(q1.terms[(0, 1)])
    s = -float(q1.constant_term())
    d = float(q2.terms[(1, 1)])
    p = -float(q2.constant_term())
    # k2 = (s - b1 k1)/b2  ->  d k1 (s - b1 k1) / b2 = p
    A, Bc, Cc = d * b1 / b2, -d * s / b2, p
    disc = Bc * Bc - 4 * A * Cc
    roots = sorted([(-Bc - np.sqrt(disc)) / (2 * A), (-Bc + np.sqrt(disc)) / (2 * A)])
    return [np.array([k1, (s - b1 * k1) / b2]) for k1 in roots]
