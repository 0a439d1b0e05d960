import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from marxgen.analysis import (
    DEFAULT_EPSILONS,
    SelectionError,
    condition_numbers,
    convexity_margins,
    default_window,
    mark_regular,
    pseudospectrum,
    q0,
    q0_quadratic,
    select_regular,
    sigma_min_at,
)
from marxgen.circuit import build_A0
from marxgen.polysys import DesignSpec, RationalPolynomial, build_B
from marxgen.solver import DesignSolution

from reference import DESIGNS, N3_MINIMISER, match_rows


def _solution(k):
    k = np.asarray(k, dtype=float)
    return DesignSolution(k=k, f=1 / k, scaled=len(k) ** 2 * k, residual_inf=0,
                          eig_error=0, condition=1)


def test_single_stage_condition_is_one():
    rep = condition_numbers(DesignSpec.default(1), [2 / 3])
    assert rep.max_condition == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 5, 6])
def test_condition_column(n, solution_sets):
    spec = DesignSpec.default(n)
    sols = solution_sets(n).solutions
    pairs, _ = match_rows([s.scaled for s in sols], [r for r, _ in DESIGNS[n]])
    for (_, cond), j in zip(DESIGNS[n], pairs):
        assert condition_numbers(spec, sols[j]).max_condition == pytest.approx(cond, abs=1e-3)


def test_condition_numbers_are_at_least_one(solution_sets):
    for s in solution_sets(5):
        rep = condition_numbers(DesignSpec.default(5), s)
        assert np.all(rep.conditions >= 1 - 1e-12)
        assert rep.max_condition == pytest.approx(s.condition, rel=1e-12)


def test_condition_numbers_against_eig_of_transpose(solution_sets):
    """Second route: left vectors as right eigenvectors of the transpose."""
    s = solution_sets(4)[2]
    M = build_B(4).astype(float) * s.f[None, :]
    w, V = np.linalg.eig(M)
    wl, W = np.linalg.eig(M.T)
    V, W = V[:, np.argsort(w.real)], W[:, np.argsort(wl.real)]
    V /= np.linalg.norm(V, axis=0)
    W /= np.linalg.norm(W, axis=0)
    cond = 1 / np.abs(np.sum(W * V, axis=0))
    rep = condition_numbers(DesignSpec.default(4), s)
    assert np.allclose(rep.conditions, cond, rtol=1e-9)


def test_condition_numbers_scale_invariant(solution_sets):
    s = solution_sets(3)[0]
    a = condition_numbers(DesignSpec.default(3), s.k)
    b = condition_numbers(DesignSpec.default(3), s.k / 3.7)
    assert np.allclose(a.conditions, b.conditions, rtol=1e-9)


def test_repeated_eigenvalue_rejected(solution_sets):
    # two-stage BF never has a double eigenvalue (its discriminant
    # 4a^2 - 2ab + 9b^2/4 is positive definite), so widen the gap threshold
    k = solution_sets(2)[0].k
    condition_numbers(DesignSpec.default(2), k, rel_gap=0.5)
    with pytest.raises(ValueError):
        condition_numbers(DesignSpec.default(2), k, rel_gap=1.0)


# -------------------------------------------------------------- pseudospectra


def test_pseudospectrum_zero_at_eigenvalue(solution_sets):
    m = build_A0(DesignSpec.default(3), solution_sets(3)[1].f)
    assert sigma_min_at(m, 1j * m.omega0) <= 1e-8
    assert sigma_min_at(m, 6j) <= 1e-8
    assert sigma_min_at(m, 0) <= 1e-8


def test_pseudospectrum_far_point(solution_sets):
    m = build_A0(DesignSpec.default(3), solution_sets(3)[1].f)
    norm = np.linalg.norm(m.A0, 2)
    for z in (1e3, 1e4, -2e3j):
        # Weyl: sigma_min(zI - A) lies within ||A|| of |z|
        assert abs(sigma_min_at(m, z) - abs(z)) <= norm * (1 + 1e-12)
    assert norm / 1e4 < 1e-2
    assert sigma_min_at(m, 1e4) == pytest.approx(1e4, rel=1e-2)


def test_pseudospectrum_grid(solution_sets):
    m = build_A0(DesignSpec.default(2), solution_sets(2)[1].f)
    g = pseudospectrum(m, window=(-1, 1, -5, 5), resolution=(3, 11))
    assert g.sigma_min.shape == (11, 3)
    assert np.all(g.sigma_min >= 0)
    assert g.sigma_min[np.argmin(np.abs(g.im - 4)), 1] <= 1e-8  # grid hits z = 4j
    direct = sigma_min_at(m, g.points[2, 0])
    assert g.sigma_min[2, 0] == pytest.approx(direct, rel=1e-12)
    areas = g.level_areas()
    assert list(areas) == list(DEFAULT_EPSILONS)
    assert all(a <= b for a, b in zip(areas.values(), list(areas.values())[1:]))
    assert 10 ** 0.3 in g.epsilons
    with pytest.raises(ValueError):
        pseudospectrum(m, resolution=1)


def test_default_window_covers_spectrum(solution_sets):
    m = build_A0(DesignSpec.default(3), solution_sets(3)[0].f)
    x0, x1, y0, y1 = default_window(m)
    assert y1 > 6 and y0 < -6 and x0 < 0 < x1


def test_regular_five_stage_has_tightest_pseudospectrum(solution_sets):
    spec = DesignSpec.default(5)
    sset = mark_regular(solution_sets(5))
    peaks = {}
    for i, s in enumerate(sset):
        g = pseudospectrum(build_A0(spec, s.f), resolution=(41, 81))
        peaks[i] = g.sigma_min.max()
    reg = next(i for i, s in enumerate(sset) if s.regular)
    assert all(peaks[reg] >= v for v in peaks.values())


# -------------------------------------------------------------------- q0 / g


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(1, 8), elements=st.floats(0, 1)))
def test_objective_two_routes_agree(k):
    assert q0(k) == pytest.approx(q0_quadratic(k), abs=1e-12)
    assert q0(k) >= 0


def test_objective_zero_iff_equal():
    assert q0([0.3, 0.3, 0.3]) == 0
    assert q0([0.3, 0.31]) > 0


def test_convexity_margins():
    assert convexity_margins([1.0, 0.5, 0.5, 1.0]).tolist() == [0.5, 0.5]
    assert convexity_margins([1.0, 2.0]).size == 0


def test_select_regular_three_stages(solution_sets):
    (reg,) = select_regular(solution_sets(3).solutions)
    assert reg.regular
    assert np.max(np.abs(reg.k - np.array(N3_MINIMISER))) <= 1e-4
    assert np.allclose(reg.scaled, DESIGNS[3][-1][0], atol=1e-4)


def test_select_regular_two_stages_uses_objective_only(solution_sets):
    (reg,) = select_regular(solution_sets(2).solutions)
    assert np.allclose(reg.scaled, [0.63120, 1.12660], atol=1e-4)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_regular_is_last_row_and_least_sensitive(n, solution_sets):
    sols = mark_regular(solution_sets(n)).solutions
    regs = [s for s in sols if s.regular]
    assert len(regs) == 1
    assert np.max(np.abs(regs[0].scaled - DESIGNS[n][-1][0])) <= 1e-4
    assert regs[0].condition == min(s.condition for s in sols)


def test_select_regular_with_polynomial_objective(solution_sets):
    sols = solution_sets(3).solutions
    x = [RationalPolynomial.variable(3, i) for i in range(3)]
    obj = (x[0] - x[1]) * (x[0] - x[1]) + (x[1] - x[2]) * (x[1] - x[2]) + (x[0] - x[2]) * (x[0] - x[2])
    (a,) = select_regular(sols, objective=obj)
    (b,) = select_regular(sols)
    assert np.array_equal(a.k, b.k)


def test_select_regular_errors():
    with pytest.raises(SelectionError):
        select_regular([])
    with pytest.raises(SelectionError):
        select_regular([_solution([0.1, 0.5, 0.1])])  # concave profile


def test_ties_return_every_minimiser():
    a, b = _solution([0.2, 0.1, 0.2]), _solution([0.1, 0.2, 0.1 + 0.2])
    both = select_regular([a, _solution([0.2, 0.1, 0.2])])
    assert len(both) == 2
    assert len(select_regular([a, b])) == 1


def test_mark_regular_without_candidates_is_noop(solution_sets):
    from dataclasses import replace
    sset = solution_sets(2)
    bad = replace(sset, solutions=(_solution([0.1, 0.5, 0.1]),))
    assert mark_regular(bad) is bad
