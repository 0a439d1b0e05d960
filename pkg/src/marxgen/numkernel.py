"""Dense linear-algebra kernel: eigenpairs, smallest singular values, expm.

Matrices here are small (at most ~26x26), so the routines favour robustness
over speed and delegate to LAPACK through numpy/scipy.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCES


class KernelError(ArithmeticError):
    """Raised when a kernel routine cannot produce a trustworthy result."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with optional unit-norm right/left eigenvectors.

    ``right[:, i]`` and ``left[:, i]`` belong to ``values[i]``; the left vector
    satisfies ``left[:, i].conj() @ A == values[i] * left[:, i].conj()``.
    """

    values: np.ndarray
    right: Optional[np.ndarray] = None
    left: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.values)

    def sorted_values(self):
        """Eigenvalues ordered by (real part, imaginary part)."""
        return np.array(sorted(self.values, key=lambda z: (z.real, z.imag)))


def as_dense(A, *, square=False, name="A"):
    """Validate and convert to a 2-D finite float/complex array."""
    A = np.asarray(A)
    if A.dtype == object:
        A = A.astype(float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.iscomplexobj(A):
        A = A.astype(float)
    return A


def eig(A, vectors=False, tol=DEFAULT_TOLERANCES.eig_backward):
    """Eigenvalues of ``A`` and, on request, paired left/right eigenvectors.

    Each returned eigenpair is checked against ``||A v - lam v|| <= tol*||A||``
    for the right vectors; a violation raises :class:`KernelError`.
    """
    A = as_dense(A, square=True)
    try:
        if vectors:
            w, vl, vr = scipy.linalg.eig(A, left=True, right=True)
        else:
            w = scipy.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"eigenvalue iteration did not converge: {exc}") from exc
    if not vectors:
        return Spectrum(values=w)
    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl / np.linalg.norm(vl, axis=0)
    scale = max(np.linalg.norm(A, 2), 1.0)
    resid = np.linalg.norm(A @ vr - vr * w, axis=0)
    if np.any(resid > tol * scale * max(1, A.shape[0])):
        raise KernelError(
            f"eigenvector residual {resid.max():.3e} exceeds {tol:.1e}*||A||")
    return Spectrum(values=w, right=vr, left=vl)


def smallest_singular_value(A):
    """Smallest singular value of a (possibly complex) matrix.

    A stacked input of shape ``(..., m, n)`` returns an array of shape ``(...)``.
    """
    A = np.asarray(A)
    if A.ndim < 2:
        raise ValueError("need at least a 2-D array")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    s = np.linalg.svd(A, compute_uv=False)
    return s[..., -1]


def expm(A, t=1.0, max_norm=DEFAULT_TOLERANCES.expm_max_norm):
    """Matrix exponential ``e^{A t}`` by scaling and squaring (scipy)."""
    A = as_dense(A, square=True)
    At = A * t
    norm = np.linalg.norm(At, 1)
    if norm > max_norm:
        raise KernelError(
            f"||A t||_1 = {norm:.3e} exceeds {max_norm:.1e}; refusing to exponentiate")
    E = scipy.linalg.expm(At)
    if not np.all(np.isfinite(E)):
        raise KernelError("matrix exponential overflowed")
    return E


def eigenvalue_condition_numbers(A):
    """Condition ``1/|w^H v|`` of each eigenvalue, unit left/right vectors.

    Returns ``(spectrum, conditions)``; conditions are aligned with
    ``spectrum.values``.
    """
    spec = eig(A, vectors=True)
    overlap = np.abs(np.sum(spec.left.conj() * spec.right, axis=0))
    with np.errstate(divide="ignore"):
        cond = np.where(overlap > 0, 1.0 / overlap, np.inf)
    return spec, cond
