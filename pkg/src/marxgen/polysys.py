"""Exact construction of the Marx design polynomial systems.

Two formulations are built with rational coefficients:

* ``F_FORM`` in the unknowns ``f_i = c / c_i``: coefficient matching of
  ``det(sI - BF)`` against ``prod(s - (alpha_i^2 - 1))``;
* ``K_FORM`` in the unknowns ``k_i = c_i / c = 1 / f_i``: coefficient matching
  of ``det(sI - K B^{-1})`` against ``prod(s - 1/(alpha_i^2 - 1))``.

Polynomial ``i`` (1-based) in either system equals ``e_i(M) - e_i(targets)``
where ``e_i`` is the i-th elementary symmetric function of the eigenvalues,
so its total degree is exactly ``i``.
"""

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

Exponent = Tuple[int, ...]


class Formulation(str, enum.Enum):
    F_FORM = "f"
    K_FORM = "k"


# --------------------------------------------------------------------------
# problem instance


@dataclass(frozen=True)
class DesignSpec:
    """An n-stage Marx design problem: harmonics ``alpha`` and values c, ell."""

    n: int
    alpha: Tuple[int, ...]
    c: float = 1.0
    ell: float = 1.0

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"stage count must be a positive integer, got {self.n}")
        if len(alpha) != self.n:
            raise ValueError(f"need {self.n} harmonics, got {len(alpha)}")
        if any(a <= 0 or a % 2 for a in alpha):
            raise ValueError(f"harmonics must be positive even integers: {alpha}")
        if len(set(alpha)) != len(alpha):
            raise ValueError(f"harmonics must be distinct: {alpha}")
        if not (self.c > 0 and self.ell > 0):
            raise ValueError("c and ell must be positive")

    @classmethod
    def default(cls, n, c=1.0, ell=1.0):
        """The lowest-frequency choice ``alpha_i = 2 i``."""
        return cls(n=n, alpha=tuple(2 * i for i in range(1, n + 1)), c=c, ell=ell)

    @property
    def targets(self) -> List[Fraction]:
        """Prescribed spectrum of ``BF``: ``alpha_i^2 - 1``."""
        return [Fraction(a * a - 1) for a in self.alpha]

    @property
    def omega0(self):
        return 1.0 / math.sqrt(self.ell * self.c)

    @property
    def T(self):
        """Transfer time ``pi * sqrt(ell c)``."""
        return math.pi * math.sqrt(self.ell * self.c)

    def to_dict(self):
        return {"n": self.n, "alpha": list(self.alpha), "c": self.c, "ell": self.ell}

    @classmethod
    def from_dict(cls, d):
        return cls(n=int(d["n"]), alpha=tuple(d["alpha"]),
                   c=float(d.get("c", 1.0)), ell=float(d.get("ell", 1.0)))


# --------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class RationalPolynomial:
    """Sparse multivariate polynomial with :class:`Fraction` coefficients."""

    nvars: int
    terms: Dict[Exponent, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for exp, coef in self.terms.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars or min(exp, default=0) < 0:
                raise ValueError(f"bad exponent {exp} for {self.nvars} variables")
            coef = Fraction(coef)
            if coef:
                clean[exp] = clean.get(exp, Fraction(0)) + coef
        object.__setattr__(self, "terms", {e: c for e, c in clean.items() if c})

    @classmethod
    def constant(cls, nvars, value):
        return cls(nvars, {(0,) * nvars: Fraction(value)})

    @classmethod
    def variable(cls, nvars, index, coef=1):
        exp = [0] * nvars
        exp[index] = 1
        return cls(nvars, {tuple(exp): Fraction(coef)})

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def homogeneous_part(self, d):
        return RationalPolynomial(
            self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return RationalPolynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return RationalPolynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalPolynomial.constant(self.nvars, other)
        if not isinstance(other, RationalPolynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def _coerce(self, other):
        if isinstance(other, RationalPolynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return RationalPolynomial.constant(self.nvars, other)

    def __call__(self, point):
        return self.evaluate(point)

    def evaluate(self, point):
        """Value at ``point``; exact when every coordinate is int/Fraction."""
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, need {self.nvars}")
        exact = all(isinstance(p, (int, Fraction)) for p in point)
        if exact:
            total = Fraction(0)
            for e, c in self.terms.items():
                term = c
                for x, k in zip(point, e):
                    if k:
                        term *= Fraction(x) ** k
                total += term
            return total
        point = np.asarray(point)
        total = 0.0
        for e, c in self.terms.items():
            total = total + float(c) * np.prod(point ** np.asarray(e))
        return total

    def __repr__(self):
        return f"RationalPolynomial({format_polynomial(self)})"


def format_polynomial(p, var="x"):
    def mono(e):
        parts = []
        for i, k in enumerate(e):
            if k == 1:
                parts.append(f"{var}{i + 1}")
            elif k > 1:
                parts.append(f"{var}{i + 1}^{k}")
        return "*".join(parts)

    items = sorted(p.terms.items(), key=lambda t: (sum(t[0]), tuple(-x for x in t[0])))
    out = []
    for e, c in items:
        m = mono(e)
        out.append(f"{c}" if not m else (m if c == 1 else f"{c}*{m}"))
    return " + ".join(out) or "0"


# --------------------------------------------------------------------------
# exact matrices


def _fraction_det(M):
    """Determinant of a square Fraction matrix by Gaussian elimination."""
    M = [list(map(Fraction, row)) for row in M]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, n):
            factor = M[r][col] / M[col][col]
            if factor:
                for c in range(col, n):
                    M[r][c] -= factor * M[col][c]
    return det


def _fraction_inverse(M):
    n = len(M)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(M)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _object_matrix(rows):
    n = len(rows)
    out = np.empty((n, len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            out[i, j] = Fraction(x)
    return out


def build_B(n):
    """Tridiagonal ``B``: diagonal ``(2, ..., 2, (n+1)/n)``, off-diagonal ``-1``.

    Entries are :class:`Fraction` in an object array; ``B.astype(float)``
    gives the numeric matrix.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = Fraction(2)
        if i + 1 < n:
            rows[i][i + 1] = rows[i + 1][i] = Fraction(-1)
    rows[n - 1][n - 1] = Fraction(n + 1, n)
    return _object_matrix(rows)


def build_B_inverse(n):
    """Exact inverse of :func:`build_B`."""
    return _object_matrix(_fraction_inverse(build_B(n).tolist()))


def elementary_symmetric(values):
    """``[e_1, ..., e_n]`` of a list of exact numbers."""
    e = [Fraction(1)]
    for v in values:
        e = [Fraction(1)] + [e[j] + v * e[j - 1] for j in range(1, len(e))] + [v * e[-1]]
    return e[1:]


# --------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class PolySystem:
    """The n design equations, ordered by total degree ``1, 2, ..., n``."""

    polynomials: Tuple[RationalPolynomial, ...]
    formulation: Formulation
    spec: DesignSpec

    @property
    def n(self):
        return len(self.polynomials)

    @property
    def degrees(self):
        return [p.degree for p in self.polynomials]

    @property
    def bezout_number(self):
        return math.prod(self.degrees)

    @property
    def variable_name(self):
        return self.formulation.value

    def __iter__(self):
        return iter(self.polynomials)

    def __getitem__(self, i):
        return self.polynomials[i]

    def evaluate(self, point):
        return evaluate(self, point)

    def to_json(self, indent=None):
        return json.dumps(system_to_dict(self), indent=indent)


def _check_alpha(spec):
    if not isinstance(spec, DesignSpec):
        raise TypeError("expected a DesignSpec")


def system_f(spec):
    """Equations ``p_i(f) = 0`` from ``det(sI - BF) = prod(s - (alpha_i^2-1))``.

    ``det(sI - BF)`` is expanded with the continuant recurrence
    ``D_k = (s - b_k f_k) D_{k-1} - f_k f_{k-1} D_{k-2}``, whose entries are
    polynomials in ``s`` with coefficients in Q[f].
    """
    _check_alpha(spec)
    n = spec.n
    b = [build_B(n)[i, i] for i in range(n)]
    one = RationalPolynomial.constant(n, 1)
    zero = RationalPolynomial(n)
    f = [RationalPolynomial.variable(n, i) for i in range(n)]

    def shift(poly_s):  # multiply by s
        return [zero] + poly_s

    def axpy(a, x, y):  # a*x + y over lists indexed by power of s
        m = max(len(x), len(y))
        x = x + [zero] * (m - len(x))
        y = y + [zero] * (m - len(y))
        return [a * xi + yi for xi, yi in zip(x, y)]

    d_prev2, d_prev = None, [one]
    for k in range(n):
        diag = f[k] * b[k]
        nxt = axpy(-diag, d_prev, shift(d_prev))
        if k > 0:
            nxt = axpy(-(f[k] * f[k - 1]), d_prev2, nxt)
        d_prev2, d_prev = d_prev, nxt
    charpoly = d_prev  # charpoly[j] is the coefficient of s^j
    e_targets = elementary_symmetric(spec.targets)
    polys = []
    for j in range(1, n + 1):
        coef = charpoly[n - j] * ((-1) ** j)  # e_j(BF)
        polys.append(coef - e_targets[j - 1])
    return PolySystem(tuple(polys), Formulation.F_FORM, spec)


def system_k(spec):
    """Equations ``q_i(k) = 0`` from ``det(sI - KB^{-1}) = prod(s - 1/(alpha_i^2-1))``.

    With ``K`` diagonal, every principal minor of ``K B^{-1}`` on an index set
    ``S`` is ``prod_{i in S} k_i * det(B^{-1}[S, S])``, so ``e_j(KB^{-1})`` is
    assembled exactly from the principal minors of ``B^{-1}``.
    """
    _check_alpha(spec)
    n = spec.n
    Binv = build_B_inverse(n)
    e_targets = elementary_symmetric([1 / t for t in spec.targets])
    polys = []
    for j in range(1, n + 1):
        terms = {}
        for S in itertools.combinations(range(n), j):
            minor = _fraction_det([[Binv[r, c] for c in S] for r in S])
            exp = tuple(int(i in S) for i in range(n))
            terms[exp] = minor
        terms[(0,) * n] = -e_targets[j - 1]
        polys.append(RationalPolynomial(n, terms))
    return PolySystem(tuple(polys), Formulation.K_FORM, spec)


def build_system(spec, formulation=Formulation.K_FORM):
    formulation = Formulation(formulation)
    return system_k(spec) if formulation is Formulation.K_FORM else system_f(spec)


def evaluate(system, point):
    """Residual vector ``[p_1(x), ..., p_n(x)]``.

    Exact rationals for an int/Fraction point, floats (or complex) otherwise.
    """
    if len(point) != system.n:
        raise ValueError(f"point has {len(point)} coordinates, system has {system.n}")
    exact = all(isinstance(p, (int, Fraction)) for p in point)
    if exact:
        return [p.evaluate(list(point)) for p in system.polynomials]
    return np.array([p.evaluate(point) for p in system.polynomials])


# --------------------------------------------------------------------------
# numeric compilation


@dataclass(frozen=True)
class CompiledSystem:
    """Float/complex evaluator for a square polynomial system.

    Holds per-polynomial exponent matrices and coefficients; evaluates a batch
    of points ``X`` of shape ``(P, n)`` together with the Jacobian.
    Variables may be rescaled (``x = var_scale * y``) and each equation
    normalised to unit max-coefficient, which leaves the roots unchanged.
    """

    exponents: Tuple[np.ndarray, ...]
    coefficients: Tuple[np.ndarray, ...]

    @classmethod
    def from_system(cls, system, var_scale=1.0, normalize=False):
        exps, coefs = [], []
        for p in system.polynomials:
            e = np.array(list(p.terms.keys()), dtype=np.int64).reshape(-1, system.n)
            c = np.array([float(v) for v in p.terms.values()], dtype=float)
            c = c * var_scale ** e.sum(axis=1)
            if normalize and len(c):
                c = c / np.abs(c).max()
            exps.append(e)
            coefs.append(c)
        return cls(tuple(exps), tuple(coefs))

    @property
    def n(self):
        return len(self.exponents)

    @property
    def degrees(self):
        return [int(e.sum(axis=1).max()) for e in self.exponents]

    @cached_property
    def _derivative_tables(self):
        # per polynomial: exponents of d/dx_v of each term, shape (n, T, n),
        # and multipliers E[t, v] * coef[t], shape (n, T)
        tables = []
        for E, C in zip(self.exponents, self.coefficients):
            dE = np.repeat(E[None, :, :], self.n, axis=0)
            mult = np.empty((self.n, len(C)))
            for v in range(self.n):
                mult[v] = E[:, v] * C
                dE[v, :, v] = np.maximum(E[:, v] - 1, 0)
            tables.append((dE, mult))
        return tables

    def evaluate(self, X, jacobian=True):
        X = np.atleast_2d(X)
        P, n = X.shape
        dmax = max(self.degrees)
        powers = np.empty((P, dmax + 1, n), dtype=np.result_type(X.dtype, float))
        powers[:, 0] = 1.0
        for d in range(1, dmax + 1):
            powers[:, d] = powers[:, d - 1] * X
        cols = np.arange(n)
        values = np.empty((P, n), dtype=powers.dtype)
        J = np.empty((P, n, n), dtype=powers.dtype) if jacobian else None
        for i, (E, C) in enumerate(zip(self.exponents, self.coefficients)):
            mono = np.prod(powers[:, E, cols], axis=2)  # (P, T)
            values[:, i] = mono @ C
            if jacobian:
                dE, mult = self._derivative_tables[i]
                dmono = np.prod(powers[:, dE, cols], axis=3)  # (P, n, T)
                J[:, i, :] = np.einsum("pvt,vt->pv", dmono, mult)
        return values, J


def system_to_dict(system):
    return {
        "formulation": system.formulation.value,
        "spec": system.spec.to_dict(),
        "variables": [f"{system.variable_name}{i + 1}" for i in range(system.n)],
        "polynomials": [
            {
                "degree": p.degree,
                "terms": [[list(e), f"{c.numerator}/{c.denominator}"]
                          for e, c in sorted(p.terms.items())],
            }
            for p in system.polynomials
        ],
    }


def system_from_dict(d):
    spec = DesignSpec.from_dict(d["spec"])
    n = len(d["variables"])
    polys = tuple(
        RationalPolynomial(n, {tuple(e): Fraction(c) for e, c in p["terms"]})
        for p in d["polynomials"])
    return PolySystem(polys, Formulation(d["formulation"]), spec)


def system_from_json(text):
    return system_from_dict(json.loads(text))


def sum_inverse_targets(alpha: Sequence[int]):
    """Exact ``sum_j 1/(alpha_j^2 - 1)``."""
    return sum((Fraction(1, a * a - 1) for a in alpha), Fraction(0))
